//! Geometry layer: the two supported backgrounds, their Regge-Wheeler
//! potentials `V`, `V_L`, the nonlinear coefficient `f`, the trapping
//! terms `2X + r_* X'`, and the effective-potential peaks.
//!
//! Both backgrounds reduce to
//! `phi_tt = phi'' - V phi - V_L (-Lap_W) phi - f F'(phi^2) phi`
//! in the tortoise coordinate `r_*`.

mod chi;
mod conditions;
mod tortoise;
mod warp;

pub use chi::{ChiAlpha, TrapSelection};
pub use conditions::{
    check_conditions, check_conditions_with_spectrum, ConditionOutcome, ConditionReport, ConditionStatus,
};
pub use tortoise::{
    area_radius_from_tortoise, horizon_distance_from_tortoise, tortoise_from_area_radius,
    tortoise_from_horizon_distance,
};
pub use warp::{SplineTable, Warp, WarpJet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Schwarzschild {
        mass: f64,
    },
    WarpedProduct {
        warp: Warp,
        /// Expected polynomial growth exponent of `r`, informational.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p1_hint: Option<f64>,
    },
}

/// Immutable background description. `p` is the nonlinearity exponent;
/// when absent, `f` is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    geometry: Geometry,
    p: Option<f64>,
}

/// Potentials and their `r_*`-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSample {
    pub r_star: f64,
    pub r: f64,
    pub v: f64,
    pub v_l: f64,
    pub f: f64,
    pub dv: f64,
    pub dv_l: f64,
    pub df: f64,
    pub trap_v: f64,
    pub trap_vl: f64,
    pub trap_f: f64,
}

impl PotentialSample {
    pub const CSV_HEADER: &'static str = "r_star,r,V,V_L,f,trap_V,trap_VL,trap_f";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.r_star, self.r, self.v, self.v_l, self.f, self.trap_v, self.trap_vl, self.trap_f
        )
    }

    /// Effective potential `V + lt2 V_L` of one harmonic.
    pub fn effective(&self, lt2: f64) -> f64 {
        self.v + lt2 * self.v_l
    }

    pub fn effective_derivative(&self, lt2: f64) -> f64 {
        self.dv + lt2 * self.dv_l
    }
}

/// Location of the maximum of an effective potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub area_radius: f64,
    pub tortoise: f64,
}

/// Uniform sampling of a finite `r_*` window used for all numerical
/// condition checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanDomain {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl ScanDomain {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(max > min) || n < 16 || !min.is_finite() || !max.is_finite() {
            return Err(Error::Parameter(format!(
                "scan domain needs min < max and at least 16 samples (got [{min}, {max}], n = {n})"
            )));
        }
        Ok(ScanDomain { min, max, n })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.n).map(move |i| self.min + i as f64 * h)
    }

    /// True when `x` lies in the outer `fraction` of the window on either side.
    pub fn near_edge(&self, x: f64, fraction: f64) -> bool {
        let w = fraction * (self.max - self.min);
        x < self.min + w || x > self.max - w
    }
}

impl Background {
    pub fn schwarzschild(mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Config(format!("Schwarzschild mass must be positive, got {mass}")));
        }
        Ok(Background { geometry: Geometry::Schwarzschild { mass }, p: None })
    }

    pub fn warped(warp: Warp) -> Result<Self> {
        warp.validate()?;
        Ok(Background { geometry: Geometry::WarpedProduct { warp, p1_hint: None }, p: None })
    }

    pub fn with_p1_hint(mut self, hint: f64) -> Self {
        if let Geometry::WarpedProduct { p1_hint, .. } = &mut self.geometry {
            *p1_hint = Some(hint);
        }
        self
    }

    /// Enables the nonlinear coefficient `f` with exponent `p > 1`.
    pub fn with_nonlinearity(mut self, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("nonlinearity exponent must exceed 1, got {p}")));
        }
        self.p = Some(p);
        Ok(self)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn p(&self) -> Option<f64> {
        self.p
    }

    pub fn is_semilinear(&self) -> bool {
        self.p.is_some()
    }

    pub fn mass(&self) -> Option<f64> {
        match self.geometry {
            Geometry::Schwarzschild { mass } => Some(mass),
            _ => None,
        }
    }

    /// `F(s) = s^{(p+1)/2} / (p+1)` evaluated at `s = phi^2`.
    pub fn big_f(&self, phi: f64) -> f64 {
        match self.p {
            Some(p) => phi.abs().powf(p + 1.0) / (p + 1.0),
            None => 0.0,
        }
    }

    /// `F'(phi^2) phi`, with `F'` the derivative in `s = phi^2`; this is
    /// `|phi|^{p-1} phi / 2`, the variational derivative of `F(phi^2)/2`.
    pub fn big_f_prime_phi(&self, phi: f64) -> f64 {
        match self.p {
            Some(p) => 0.5 * phi.abs().powf(p - 1.0) * phi,
            None => 0.0,
        }
    }

    pub fn potentials(&self, r_star: f64) -> Result<PotentialSample> {
        if !r_star.is_finite() {
            return Err(Error::Domain(format!("r_* must be finite, got {r_star}")));
        }
        let (r, v, v_l, f, dv, dv_l, df) = match &self.geometry {
            Geometry::Schwarzschild { mass } => {
                let m = *mass;
                let delta = horizon_distance_from_tortoise(r_star, m)?;
                let r = 2.0 * m + delta;
                let lapse = delta / r;
                let v = 2.0 * m * lapse / r.powi(3);
                let v_l = lapse / (r * r);
                let dv = lapse * 2.0 * m * (8.0 * m - 3.0 * r) / r.powi(5);
                let dv_l = lapse * (6.0 * m - 2.0 * r) / r.powi(4);
                let (f, df) = match self.p {
                    Some(p) => (delta * r.powf(-p), lapse * r.powf(-p - 1.0) * (r - p * delta)),
                    None => (0.0, 0.0),
                };
                (r, v, v_l, f, dv, dv_l, df)
            }
            Geometry::WarpedProduct { warp, .. } => {
                let j = warp.jet(r_star)?;
                if !(j.r > 0.0) {
                    return Err(Error::ConditionViolation(format!("warp r({r_star}) = {} is not positive", j.r)));
                }
                let v = j.d2 / j.r;
                let dv = (j.d3 * j.r - j.d2 * j.d1) / (j.r * j.r);
                let v_l = 1.0 / (j.r * j.r);
                let dv_l = -2.0 * j.d1 / j.r.powi(3);
                let (f, df) = match self.p {
                    Some(p) => (j.r.powf(1.0 - p), (1.0 - p) * j.r.powf(-p) * j.d1),
                    None => (0.0, 0.0),
                };
                (j.r, v, v_l, f, dv, dv_l, df)
            }
        };
        Ok(PotentialSample {
            r_star,
            r,
            v,
            v_l,
            f,
            dv,
            dv_l,
            df,
            trap_v: 2.0 * v + r_star * dv,
            trap_vl: 2.0 * v_l + r_star * dv_l,
            trap_f: 2.0 * f + r_star * df,
        })
    }

    /// `(2V + r_* V', 2V_L + r_* V_L', 2f + r_* f')`.
    pub fn trapping_terms(&self, r_star: f64) -> Result<(f64, f64, f64)> {
        let s = self.potentials(r_star)?;
        Ok((s.trap_v, s.trap_vl, s.trap_f))
    }

    /// Maximum of `V_l = V + lt2 V_L`.
    ///
    /// Schwarzschild uses the closed-form positive root of `V_l' = 0`;
    /// warped products use a grid argmax refined by bisection on `V_l'`.
    /// In both cases the number of sign changes of `V_l'` across `scan` must
    /// be exactly one.
    pub fn effective_potential_peak(&self, lt2: f64, scan: &ScanDomain) -> Result<Peak> {
        if !(lt2 >= 0.0) {
            return Err(Error::Parameter(format!("harmonic eigenvalue must be >= 0, got {lt2}")));
        }
        self.ensure_unique_critical_point(scan, |s| s.effective_derivative(lt2))?;
        match self.geometry {
            Geometry::Schwarzschild { mass } => {
                let r = schwarzschild_peak_radius(lt2, mass);
                Ok(Peak { area_radius: r, tortoise: tortoise_from_area_radius(r, mass)? })
            }
            Geometry::WarpedProduct { .. } => {
                let x = self.numeric_peak(scan, |s| s.effective(lt2), |s| s.effective_derivative(lt2))?;
                Ok(Peak { area_radius: self.potentials(x)?.r, tortoise: x })
            }
        }
    }

    /// Limit of the peaks as `l -> infinity`: the maximum of `V_L` alone.
    pub fn asymptotic_peak(&self, scan: &ScanDomain) -> Result<Peak> {
        self.ensure_unique_critical_point(scan, |s| s.dv_l)?;
        match self.geometry {
            Geometry::Schwarzschild { mass } => Ok(Peak { area_radius: 3.0 * mass, tortoise: 0.0 }),
            Geometry::WarpedProduct { .. } => {
                let x = self.numeric_peak(scan, |s| s.v_l, |s| s.dv_l)?;
                Ok(Peak { area_radius: self.potentials(x)?.r, tortoise: x })
            }
        }
    }

    /// Counts sign changes of a derivative over the scan.
    pub(crate) fn sign_changes(
        &self,
        scan: &ScanDomain,
        derivative: impl Fn(&PotentialSample) -> f64,
    ) -> Result<Vec<f64>> {
        let mut changes = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        for x in scan.points() {
            let d = derivative(&self.potentials(x)?);
            if d == 0.0 {
                continue;
            }
            if let Some((px, pd)) = prev {
                if pd.signum() != d.signum() {
                    changes.push(0.5 * (px + x));
                }
            }
            prev = Some((x, d));
        }
        Ok(changes)
    }

    fn ensure_unique_critical_point(
        &self,
        scan: &ScanDomain,
        derivative: impl Fn(&PotentialSample) -> f64,
    ) -> Result<()> {
        let changes = self.sign_changes(scan, derivative)?;
        if changes.len() != 1 {
            return Err(Error::ConditionViolation(format!(
                "effective potential has {} critical points on [{}, {}] (expected exactly one maximum)",
                changes.len(),
                scan.min,
                scan.max
            )));
        }
        Ok(())
    }

    fn numeric_peak(
        &self,
        scan: &ScanDomain,
        value: impl Fn(&PotentialSample) -> f64,
        derivative: impl Fn(&PotentialSample) -> f64,
    ) -> Result<f64> {
        let mut best = (scan.min, f64::NEG_INFINITY);
        for x in scan.points() {
            let v = value(&self.potentials(x)?);
            if v > best.1 {
                best = (x, v);
            }
        }
        let h = scan.step();
        let mut lo = (best.0 - h).max(scan.min);
        let mut hi = (best.0 + h).min(scan.max);
        let d_lo = derivative(&self.potentials(lo)?);
        let d_hi = derivative(&self.potentials(hi)?);
        if !(d_lo > 0.0 && d_hi < 0.0) {
            return Ok(best.0);
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if derivative(&self.potentials(mid)?) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * mid.abs().max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Samples every grid node once; hot loops read from the profile.
    pub fn profile(&self, nodes: &[f64]) -> Result<Profile> {
        let samples = nodes.iter().map(|&x| self.potentials(x)).collect::<Result<Vec<_>>>()?;
        Ok(Profile { samples })
    }
}

/// Positive root `alpha_{l,+}` of `lt2 r^2 - (lt2 - 1) 3M r - 8M^2 = 0`.
pub fn schwarzschild_peak_radius(lt2: f64, mass: f64) -> f64 {
    if lt2 == 0.0 {
        return 8.0 * mass / 3.0;
    }
    let b = (lt2 - 1.0) * 3.0 * mass;
    (b + (b * b + 32.0 * lt2 * mass * mass).sqrt()) / (2.0 * lt2)
}

/// Potentials cached on a fixed set of nodes.
#[derive(Debug, Clone)]
pub struct Profile {
    samples: Vec<PotentialSample>,
}

impl Profile {
    pub fn samples(&self) -> &[PotentialSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn map(&self, f: impl Fn(&PotentialSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan() -> ScanDomain {
        ScanDomain::new(-200.0, 200.0, 8001).unwrap()
    }

    #[test]
    fn schwarzschild_potentials_at_photon_sphere() {
        let bg = Background::schwarzschild(1.0).unwrap();
        let s = bg.potentials(0.0).unwrap();
        assert!((s.r - 3.0).abs() < 1e-14);
        assert!((s.v - 2.0 / 81.0).abs() < 1e-15);
        assert!((s.v_l - 1.0 / 27.0).abs() < 1e-15);
        assert_eq!(s.f, 0.0);
    }

    #[test]
    fn warped_potentials_at_origin_and_far() {
        let bg = Background::warped(Warp::unit_quadratic()).unwrap();
        let s = bg.potentials(0.0).unwrap();
        assert_eq!((s.v, s.v_l), (2.0, 1.0));
        let far = bg.potentials(1e4).unwrap();
        assert!((far.v * 1e8 - 2.0).abs() < 1e-6);
        assert!((far.v_l * 1e16 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let bgs = [
            Background::schwarzschild(1.0).unwrap().with_nonlinearity(2.9).unwrap(),
            Background::warped(Warp::unit_quadratic()).unwrap().with_nonlinearity(2.9).unwrap(),
            Background::warped(Warp::Polynomial { coeffs: vec![2.0, 0.3, 1.0, 0.0, 0.05] })
                .unwrap()
                .with_nonlinearity(2.5)
                .unwrap(),
        ];
        for bg in &bgs {
            for &x in &[-7.0, -1.3, 0.0, 0.4, 2.0, 9.5] {
                let h = 1e-5;
                let s = bg.potentials(x).unwrap();
                let p = bg.potentials(x + h).unwrap();
                let m = bg.potentials(x - h).unwrap();
                let fd = |a: f64, b: f64| (a - b) / (2.0 * h);
                assert!((fd(p.v, m.v) - s.dv).abs() < 1e-7 * (1.0 + s.dv.abs()));
                assert!((fd(p.v_l, m.v_l) - s.dv_l).abs() < 1e-7 * (1.0 + s.dv_l.abs()));
                assert!((fd(p.f, m.f) - s.df).abs() < 1e-7 * (1.0 + s.df.abs()));
            }
        }
    }

    #[test]
    fn trapping_terms_match_closed_forms() {
        let bg = Background::schwarzschild(1.0).unwrap();
        for &x in &[-30.0, -4.0, 0.0, 1.5, 6.0, 40.0] {
            let s = bg.potentials(x).unwrap();
            let r = s.r;
            let lapse = 1.0 - 2.0 / r;
            let closed_v = 2.0 / r.powi(5) * lapse * (2.0 * r * r - x * (3.0 * r - 8.0));
            let closed_vl = 2.0 / r.powi(4) * lapse * (r * r - x * (r - 3.0));
            assert!((s.trap_v - closed_v).abs() < 1e-14 * (1.0 + closed_v.abs()));
            assert!((s.trap_vl - closed_vl).abs() < 1e-14 * (1.0 + closed_vl.abs()));
            assert_eq!(s.trap_v, 2.0 * s.v + x * s.dv);
        }
        let (tv, tvl, _) = bg.trapping_terms(0.0).unwrap();
        assert!((tv - 2.0 / 243.0 / 3.0 * 18.0).abs() < 1e-15);
        assert!((tvl - 2.0 / 81.0 / 3.0 * 9.0).abs() < 1e-15);
        for &x in &[200.0, -200.0] {
            let (tv, tvl, _) = bg.trapping_terms(x).unwrap();
            assert!(tv < 0.0 && tvl < 0.0, "x = {x}: {tv} {tvl}");
        }
    }

    #[test]
    fn schwarzschild_peaks() {
        let bg = Background::schwarzschild(1.0).unwrap();
        let p0 = bg.effective_potential_peak(0.0, &scan()).unwrap();
        assert_eq!(p0.area_radius, 8.0 / 3.0);
        let p1 = bg.effective_potential_peak(2.0, &scan()).unwrap();
        assert!((p1.area_radius - (3.0 + 73f64.sqrt()) / 4.0).abs() < 1e-14);
        assert!((p1.area_radius - 2.88601).abs() < 1e-5);
        let big = bg.effective_potential_peak(1e8, &scan()).unwrap();
        assert!((big.area_radius - 3.0).abs() < 1e-6 && big.tortoise.abs() < 1e-5);
        let inf = bg.asymptotic_peak(&scan()).unwrap();
        assert_eq!((inf.area_radius, inf.tortoise), (3.0, 0.0));
    }

    #[test]
    fn closed_form_matches_grid_argmax() {
        let bg = Background::schwarzschild(1.0).unwrap();
        let fine = ScanDomain::new(-20.0, 20.0, 40001).unwrap();
        for l in 0..=20u32 {
            let lt2 = (l * (l + 1)) as f64;
            let peak = bg.effective_potential_peak(lt2, &fine).unwrap();
            let mut best = (0.0, f64::NEG_INFINITY);
            for x in fine.points() {
                let v = bg.potentials(x).unwrap().effective(lt2);
                if v > best.1 {
                    best = (x, v);
                }
            }
            assert!((best.0 - peak.tortoise).abs() <= fine.step(), "l = {l}");
        }
    }

    #[test]
    fn warped_peak_is_origin() {
        let bg = Background::warped(Warp::unit_quadratic()).unwrap();
        let s = ScanDomain::new(-50.0, 50.0, 2001).unwrap();
        for lt2 in [0.0, 2.0, 6.0, 110.0] {
            let p = bg.effective_potential_peak(lt2, &s).unwrap();
            assert!(p.tortoise.abs() < 1e-10, "{p:?}");
            assert!((p.area_radius - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn double_well_warp_is_rejected() {
        // r = 2 - r_*^2 + 0.2 r_*^4 has two minima, so V_L has two maxima.
        let bg = Background::warped(Warp::Polynomial { coeffs: vec![2.0, 0.0, -1.0, 0.0, 0.2] }).unwrap();
        let s = ScanDomain::new(-10.0, 10.0, 2001).unwrap();
        assert!(matches!(bg.asymptotic_peak(&s), Err(Error::ConditionViolation(_))));
    }

    #[test]
    fn nonlinearity_validation() {
        assert!(Background::schwarzschild(1.0).unwrap().with_nonlinearity(0.5).is_err());
        assert!(Background::schwarzschild(0.0).is_err());
    }
}
