//! Numerical checks of the nine admissibility conditions on a finite scan.
//!
//! Asymptotic statements need finite proxies:
//! - "positive only in a compact region" means no positive sample within
//!   the outer 10% of the scan window on either side;
//! - "bounded" means the growth exponent of the quantity between the inner
//!   and outer halves of each tail band is at most [`GROWTH_TOLERANCE`].

use serde::Serialize;

use super::{Background, PotentialSample, ScanDomain};

pub const EDGE_FRACTION: f64 = 0.1;
pub const GROWTH_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionOutcome {
    pub condition: u8,
    pub status: ConditionStatus,
    /// An `r_*` where the condition fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub scan: ScanDomain,
    pub semilinear: bool,
    pub outcomes: Vec<ConditionOutcome>,
}

impl ConditionReport {
    pub fn status(&self, condition: u8) -> ConditionStatus {
        self.outcomes
            .iter()
            .find(|o| o.condition == condition)
            .map(|o| o.status)
            .unwrap_or(ConditionStatus::NotApplicable)
    }

    pub fn passes(&self, conditions: impl IntoIterator<Item = u8>) -> bool {
        conditions.into_iter().all(|c| self.status(c) == ConditionStatus::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionOutcome> {
        self.outcomes.iter().filter(|o| o.status == ConditionStatus::Fail)
    }
}

fn outcome(condition: u8, failure: Option<(f64, String)>, ok_detail: &str) -> ConditionOutcome {
    match failure {
        Some((x, detail)) => ConditionOutcome { condition, status: ConditionStatus::Fail, witness: Some(x), detail },
        None => {
            ConditionOutcome { condition, status: ConditionStatus::Pass, witness: None, detail: ok_detail.to_string() }
        }
    }
}

fn not_applicable(condition: u8, detail: &str) -> ConditionOutcome {
    ConditionOutcome { condition, status: ConditionStatus::NotApplicable, witness: None, detail: detail.to_string() }
}

/// Checks conditions 1-9 with the sphere spectrum `l(l+1)`, `l <= 20`.
pub fn check_conditions(bg: &Background, scan: &ScanDomain) -> ConditionReport {
    let spectrum: Vec<f64> = (0..=20u32).map(|l| (l * (l + 1)) as f64).collect();
    check_conditions_with_spectrum(bg, scan, &spectrum)
}

pub fn check_conditions_with_spectrum(bg: &Background, scan: &ScanDomain, spectrum: &[f64]) -> ConditionReport {
    let semilinear = bg.is_semilinear();
    let mut samples = Vec::with_capacity(scan.n);
    let mut undefined = None;
    for x in scan.points() {
        match bg.potentials(x) {
            Ok(s) if [s.v, s.v_l, s.f, s.dv, s.dv_l, s.df].iter().all(|v| v.is_finite()) => samples.push(s),
            Ok(_) => {
                undefined = Some((x, "potentials are not finite".to_string()));
                break;
            }
            Err(e) => {
                undefined = Some((x, e.to_string()));
                break;
            }
        }
    }
    if let Some((x, why)) = undefined {
        let mut outcomes = vec![outcome(1, Some((x, why)), "")];
        for c in 2..=9 {
            outcomes.push(not_applicable(c, "potentials unavailable on the scan"));
        }
        return ConditionReport { scan: *scan, semilinear, outcomes };
    }

    let mut outcomes = vec![
        outcome(1, None, "potentials are analytic functions of r_* alone"),
        outcome(
            2,
            samples
                .iter()
                .find(|s| s.v < 0.0 || s.v_l < 0.0)
                .map(|s| (s.r_star, format!("V = {:e}, V_L = {:e}", s.v, s.v_l))),
            "V >= 0 and V_L >= 0 at every sample",
        ),
        condition_three(bg, scan, &samples, spectrum),
        outcome(
            4,
            edge_positive(scan, &samples, |s| s.trap_v.max(s.trap_vl))
                .map(|x| (x, "a trapping term is positive near the edge of the scan".to_string())),
            "trapping terms are positive only in the interior",
        ),
        outcome(
            5,
            first_failure([
                unbounded(scan, &samples, |s| log_derivative(s).max(0.0)).map(|x| (x, "V_L'/V_L grows".to_string())),
                unbounded(scan, &samples, |s| s.v_l * (1.0 + s.r_star * s.r_star))
                    .map(|x| (x, "V_L decays slower than r_*^-2".to_string())),
            ]),
            "V_L'/V_L bounded above, V_L = O(r_*^-2)",
        ),
    ];

    if !semilinear {
        for c in 6..=9 {
            outcomes.push(not_applicable(c, "no semilinear term configured"));
        }
    } else {
        outcomes.push(outcome(
            6,
            first_failure([
                unbounded(scan, &samples, |s| log_derivative(s).max(0.0) * (1.0 + s.r_star.abs()))
                    .map(|x| (x, "V_L'/V_L does not decay like 1/r_*".to_string())),
                unbounded(scan, &samples, |s| s.v_l * (1.0 + s.r_star * s.r_star))
                    .map(|x| (x, "V_L decays slower than r_*^-2".to_string())),
            ]),
            "V_L'/V_L = O(1/r_*), V_L = O(r_*^-2)",
        ));
        outcomes.push(outcome(
            7,
            samples.iter().find(|s| s.f < 0.0).map(|s| (s.r_star, format!("f = {:e}", s.f))),
            "f >= 0 at every sample",
        ));
        let inner_f = samples
            .iter()
            .find(|s| s.trap_f > 0.0 && !(s.f > 0.0))
            .map(|s| (s.r_star, "f vanishes where 2f + r_* f' > 0".to_string()));
        outcomes.push(outcome(
            8,
            first_failure([
                edge_positive(scan, &samples, |s| s.trap_f)
                    .map(|x| (x, "2f + r_* f' is positive near the edge of the scan".to_string())),
                inner_f,
            ]),
            "2f + r_* f' positive only in the interior, where f > 0",
        ));
        let p = bg.p().unwrap_or(1.0);
        outcomes.push(outcome(
            9,
            unbounded(scan, &samples, |s| if s.v_l > 0.0 { s.f * s.v_l.powf(0.5 * (1.0 - p)) } else { 0.0 })
                .map(|x| (x, "f V_L^((1-p)/2) grows".to_string())),
            "f V_L^((1-p)/2) bounded",
        ));
    }

    ConditionReport { scan: *scan, semilinear, outcomes }
}

fn log_derivative(s: &PotentialSample) -> f64 {
    if s.v_l > 0.0 {
        s.dv_l / s.v_l
    } else {
        0.0
    }
}

fn first_failure<const N: usize>(checks: [Option<(f64, String)>; N]) -> Option<(f64, String)> {
    checks.into_iter().flatten().next()
}

fn edge_positive(
    scan: &ScanDomain,
    samples: &[PotentialSample],
    value: impl Fn(&PotentialSample) -> f64,
) -> Option<f64> {
    samples.iter().find(|s| scan.near_edge(s.r_star, EDGE_FRACTION) && value(s) > 0.0).map(|s| s.r_star)
}

/// Growth exponent test on each tail. The tail is the outer half of each
/// side of the window, split into an inner and an outer band.
fn unbounded(scan: &ScanDomain, samples: &[PotentialSample], value: impl Fn(&PotentialSample) -> f64) -> Option<f64> {
    let centre = 0.5 * (scan.min + scan.max);
    let half = 0.5 * (scan.max - scan.min);
    for side in [-1.0, 1.0] {
        // distance from the centre, as a fraction of the half width
        let band = |lo: f64, hi: f64| {
            let mut sup: f64 = 0.0;
            let mut at = centre;
            for s in samples {
                let d = side * (s.r_star - centre) / half;
                if d >= lo && d <= hi {
                    let v = value(s).abs();
                    if v > sup {
                        sup = v;
                        at = s.r_star;
                    }
                }
            }
            (sup, at)
        };
        let (inner, _) = band(0.5, 0.75);
        let (outer, at) = band(0.75, 1.0);
        if !outer.is_finite() {
            return Some(at);
        }
        if outer <= inner || outer == 0.0 {
            continue;
        }
        if inner == 0.0 {
            return Some(at);
        }
        // bands are centred near 0.625 and 0.875 of the half width
        let exponent = (outer / inner).ln() / (0.875f64 / 0.625).ln();
        if exponent > GROWTH_TOLERANCE {
            return Some(at);
        }
    }
    None
}

fn condition_three(
    bg: &Background,
    scan: &ScanDomain,
    samples: &[PotentialSample],
    spectrum: &[f64],
) -> ConditionOutcome {
    // The stated requirement "V_l vanishes linearly at its maximum" is read as
    // V_l' vanishing linearly there, i.e. V_l'' < 0 at the peak.
    let h = scan.step();
    let check = |name: &str, d: &dyn Fn(&PotentialSample) -> f64| -> Result<f64, (f64, String)> {
        let mut crossings = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        for s in samples {
            let v = d(s);
            if v == 0.0 {
                continue;
            }
            if let Some((px, pv)) = prev {
                if pv.signum() != v.signum() {
                    crossings.push((0.5 * (px + s.r_star), pv > 0.0));
                }
            }
            prev = Some((s.r_star, v));
        }
        match crossings.as_slice() {
            [(x, true)] => {
                let lo = bg.potentials(x - h).map(|s| d(&s));
                let hi = bg.potentials(x + h).map(|s| d(&s));
                match (lo, hi) {
                    (Ok(lo), Ok(hi)) if hi < lo => Ok(*x),
                    _ => Err((*x, format!("{name}: critical point is degenerate"))),
                }
            }
            [(x, false)] => Err((*x, format!("{name}: critical point is a minimum"))),
            [] => Err((scan.min, format!("{name}: no critical point on the scan"))),
            [_, (x, _), ..] => Err((*x, format!("{name}: {} critical points on the scan", crossings.len()))),
        }
    };

    let mut peaks = Vec::new();
    for &lt2 in spectrum {
        match check(&format!("V_l with l~^2 = {lt2}"), &|s| s.effective_derivative(lt2)) {
            Ok(x) => peaks.push(x),
            Err(f) => return outcome(3, Some(f), ""),
        }
    }
    if let Err(f) = check("V", &|s| s.dv) {
        return outcome(3, Some(f), "");
    }
    let alpha_inf = match check("V_L", &|s| s.dv_l) {
        Ok(x) => x,
        Err(f) => return outcome(3, Some(f), ""),
    };
    // (d) the peaks approach (alpha_inf)_*: the last gap must be a small
    // fraction of the first, or within two scan cells.
    if let (Some(first), Some(last)) = (peaks.first(), peaks.last()) {
        let g0 = (first - alpha_inf).abs();
        let g1 = (last - alpha_inf).abs();
        if peaks.len() > 1 && g1 > 2.0 * h && g1 > 0.1 * g0 {
            return outcome(3, Some((*last, format!("peaks do not approach (alpha_inf)_* = {alpha_inf:.4}"))), "");
        }
    }
    outcome(3, None, "each V_l, V and V_L has one nondegenerate maximum; peaks converge")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::Warp;

    fn scan() -> ScanDomain {
        ScanDomain::new(-200.0, 200.0, 8001).unwrap()
    }

    #[test]
    fn schwarzschild_linear_passes_one_to_five() {
        let bg = Background::schwarzschild(1.0).unwrap();
        let report = check_conditions(&bg, &scan());
        assert!(report.passes(1..=5), "{report:#?}");
        for c in 6..=9 {
            assert_eq!(report.status(c), ConditionStatus::NotApplicable);
        }
    }

    #[test]
    fn schwarzschild_semilinear_fails_six_at_horizon() {
        let bg = Background::schwarzschild(1.0).unwrap().with_nonlinearity(3.0).unwrap();
        let report = check_conditions(&bg, &scan());
        let six = report.outcomes.iter().find(|o| o.condition == 6).unwrap();
        assert_eq!(six.status, ConditionStatus::Fail);
        assert!(six.witness.unwrap() < -100.0);
        assert_eq!(report.status(7), ConditionStatus::Pass);
        assert_eq!(report.status(9), ConditionStatus::Pass);
    }

    #[test]
    fn schwarzschild_condition_eight_needs_p_at_least_three() {
        let scan = scan();
        let bg = Background::schwarzschild(1.0).unwrap();
        let ok = check_conditions(&bg.clone().with_nonlinearity(3.5).unwrap(), &scan);
        assert_eq!(ok.status(8), ConditionStatus::Pass);
        let bad = check_conditions(&bg.with_nonlinearity(2.5).unwrap(), &scan);
        assert_eq!(bad.status(8), ConditionStatus::Fail);
    }

    #[test]
    fn quadratic_warp_trapping_term_never_changes_sign() {
        // 2V + r_* V' = 4/(1 + r_*^2)^2 is positive everywhere.
        let bg = Background::warped(Warp::unit_quadratic()).unwrap().with_nonlinearity(2.9).unwrap();
        let report = check_conditions(&bg, &scan());
        assert_eq!(report.status(4), ConditionStatus::Fail);
        for c in [1, 2, 3, 5, 6, 7, 8, 9] {
            assert_eq!(report.status(c), ConditionStatus::Pass, "condition {c}: {report:#?}");
        }
    }

    #[test]
    fn double_well_fails_three() {
        let bg = Background::warped(Warp::Polynomial { coeffs: vec![2.0, 0.0, -1.0, 0.0, 0.2] }).unwrap();
        let report = check_conditions(&bg, &ScanDomain::new(-50.0, 50.0, 4001).unwrap());
        assert_eq!(report.status(3), ConditionStatus::Fail);
    }

    #[test]
    fn table_outside_scan_is_reported_not_raised() {
        let xs: Vec<f64> = (0..=20).map(|i| -5.0 + 0.5 * i as f64).collect();
        let ys = xs.iter().map(|x| 1.0 + x * x).collect();
        let bg = Background::warped(Warp::Table(crate::background::SplineTable::new(xs, ys).unwrap())).unwrap();
        let report = check_conditions(&bg, &scan());
        assert_eq!(report.status(1), ConditionStatus::Fail);
    }
}
