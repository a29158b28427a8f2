//! Scalar functionals of a field state: energy, conformal charge in both
//! forms, the conformal growth rate, Hardy, Sobolev and weighted `L^q`
//! quantities, and the space-time accumulators.
//!
//! Radial integrals are trapezoid sums on the uniform grid. Quadratic
//! angular integrals use the eigenvalue identity
//! `int |grad_W psi|^2 = sum_l lt2 |phi_l|^2`; cubic and higher integrands
//! go through axisymmetric synthesis.
//!
//! The energy's gradient term uses edge differences `(phi_{i+1} - phi_i)/h`,
//! which makes it the exact conserved quantity of the leapfrog scheme up
//! to `O(dt^2)`. The conformal densities use the nodal centred difference,
//! so that the definitional and positive forms agree pointwise.

mod record;

pub use record::{DiagnosticsRecord, DiagnosticsRecorder, CSV_HEADER};

use crate::background::{Background, ChiAlpha, Geometry, ScanDomain, TrapSelection};
use crate::error::{Error, Result};
use crate::evolve::{FieldState, RadialGrid, WaveSystem};
use crate::harmonics::AngularQuadrature;

/// Default angular regularity loss `epsilon`.
pub const DEFAULT_EPSILON: f64 = 0.1;

fn trapezoid(h: f64, values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    match v.len() {
        0 => 0.0,
        1 => 0.0,
        n => h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1])),
    }
}

/// Nodal centred first difference with zero at the end nodes.
pub fn centred_derivative(phi: &[f64], h: f64) -> Vec<f64> {
    let n = phi.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
    }
    d
}

/// The cutoff used by the angular accumulator: all trapping terms on
/// Schwarzschild; the angular (and nonlinear) ones on warped products,
/// whose `2V + r_* V'` need not change sign.
///
/// The cutoff is a property of the background, so it is built on a scan
/// that covers the grid and at least `[-CHI_SCAN_HALF_WIDTH, CHI_SCAN_HALF_WIDTH]`
/// when the background is defined there, and on the grid otherwise.
pub fn default_chi(bg: &Background, grid: &RadialGrid) -> Result<ChiAlpha> {
    let selection = match bg.geometry() {
        Geometry::Schwarzschild { .. } => TrapSelection::All,
        Geometry::WarpedProduct { .. } => TrapSelection::Angular,
    };
    let (a, b) = (grid.r_min.min(-CHI_SCAN_HALF_WIDTH), grid.r_max.max(CHI_SCAN_HALF_WIDTH));
    let wide = ScanDomain::new(a, b, ((b - a) / 0.01).round() as usize + 1)?;
    match ChiAlpha::build_with(bg, &wide, selection) {
        Err(Error::Domain(_) | Error::ConditionViolation(_)) => {
            let scan = ScanDomain::new(grid.r_min, grid.r_max, grid.n.clamp(16, 20001))?;
            ChiAlpha::build_with(bg, &scan, selection)
        }
        other => other,
    }
}

const CHI_SCAN_HALF_WIDTH: f64 = 60.0;

/// Precomputed node weights shared by all functionals of one run.
#[derive(Debug, Clone)]
pub struct FunctionalContext {
    pub epsilon: f64,
    pub chi: Vec<f64>,
    pub chi_alpha: ChiAlpha,
    quad: Option<AngularQuadrature>,
    /// `(1 + r_*^2)^{-1}`.
    hardy_weight: Vec<f64>,
    /// `V_L' / V_L`.
    log_derivative: Vec<f64>,
}

impl FunctionalContext {
    pub fn new(sys: &WaveSystem, epsilon: f64) -> Result<Self> {
        let chi_alpha = default_chi(&sys.background, &sys.grid)?;
        Self::with_chi(sys, epsilon, chi_alpha)
    }

    pub fn with_chi(sys: &WaveSystem, epsilon: f64, chi_alpha: ChiAlpha) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let quad = if sys.modes.is_sphere() { Some(AngularQuadrature::for_modes(&sys.modes)?) } else { None };
        let log_derivative = sys.profile.map(|s| if s.v_l > 0.0 { s.dv_l / s.v_l } else { f64::NAN });
        Ok(FunctionalContext {
            epsilon,
            chi: chi_alpha.sample(&sys.nodes),
            chi_alpha,
            quad,
            hardy_weight: sys.nodes.iter().map(|x| 1.0 / (1.0 + x * x)).collect(),
            log_derivative,
        })
    }

    fn quadrature(&self) -> Result<&AngularQuadrature> {
        self.quad.as_ref().ok_or_else(|| Error::Contract("pointwise functionals need the sphere spectrum".into()))
    }
}

/// Linear energy of mode `m`, weighted per mode by `weight(m)`, plus the
/// nonlinear term on the radial mode.
fn energy_weighted(state: &FieldState, sys: &WaveSystem, weight: impl Fn(usize) -> f64) -> f64 {
    let h = sys.grid.h();
    let n = sys.grid.n;
    let mut total = 0.0;
    for (m, (phi, phidot)) in state.phi.iter().zip(&state.phidot).enumerate() {
        let pot = &sys.effective[m];
        let mut kin = 0.0;
        let mut grad = 0.0;
        for i in 0..n {
            kin += phidot[i] * phidot[i] + pot[i] * phi[i] * phi[i];
        }
        kin -= 0.5 * (phidot[0] * phidot[0] + pot[0] * phi[0] * phi[0]);
        kin -= 0.5 * (phidot[n - 1] * phidot[n - 1] + pot[n - 1] * phi[n - 1] * phi[n - 1]);
        for i in 0..n - 1 {
            let d = phi[i + 1] - phi[i];
            grad += d * d;
        }
        total += weight(m) * 0.5 * (h * kin + grad / h);
    }
    if sys.semilinear.is_some() {
        total += trapezoid(h, state.phi[0].iter().enumerate().map(|(i, &v)| sys.nonlinear_energy_density(i, v)));
    }
    total
}

pub fn energy(state: &FieldState, sys: &WaveSystem) -> f64 {
    energy_weighted(state, sys, |_| 1.0)
}

/// Energy of `L^s phi`: mode `l` weighted by `lambda^{2s}`.
pub fn energy_l_power(state: &FieldState, sys: &WaveSystem, s: f64) -> f64 {
    let w: Vec<f64> = sys.modes.modes().iter().map(|m| m.lambda.powf(2.0 * s)).collect();
    energy_weighted(state, sys, |m| w[m])
}

/// Centred-difference densities after angular integration.
struct NodalDensities {
    /// `(phidot^2 + phi'^2) / 2`.
    wave: Vec<f64>,
    /// `(V_l phi^2 + f F) / 2`.
    potential: Vec<f64>,
    /// `p_* = phidot phi'`.
    momentum: Vec<f64>,
    /// `(phidot - phi')^2` and `(phidot + phi')^2`.
    minus: Vec<f64>,
    plus: Vec<f64>,
}

fn nodal_densities(state: &FieldState, sys: &WaveSystem) -> NodalDensities {
    let n = sys.grid.n;
    let h = sys.grid.h();
    let mut d = NodalDensities {
        wave: vec![0.0; n],
        potential: vec![0.0; n],
        momentum: vec![0.0; n],
        minus: vec![0.0; n],
        plus: vec![0.0; n],
    };
    for (m, (phi, phidot)) in state.phi.iter().zip(&state.phidot).enumerate() {
        let dphi = centred_derivative(phi, h);
        let pot = &sys.effective[m];
        for i in 0..n {
            let (w, v) = (phidot[i], dphi[i]);
            d.wave[i] += 0.5 * (w * w + v * v);
            d.potential[i] += 0.5 * pot[i] * phi[i] * phi[i];
            d.momentum[i] += w * v;
            d.minus[i] += (w - v) * (w - v);
            d.plus[i] += (w + v) * (w + v);
        }
    }
    if sys.semilinear.is_some() {
        for i in 0..n {
            d.potential[i] += sys.nonlinear_energy_density(i, state.phi[0][i]);
        }
    }
    d
}

/// `(E_C, E_C_positive)` at shifted time `t`: `int e_C + e` with `e_C` from
/// its definition and from the sum-of-squares form.
pub fn conformal_charge(state: &FieldState, sys: &WaveSystem, t: f64) -> (f64, f64) {
    let d = nodal_densities(state, sys);
    let h = sys.grid.h();
    let n = sys.grid.n;
    let definitional = (0..n).map(|i| {
        let x = sys.nodes[i];
        let e = d.wave[i] + d.potential[i];
        (t * t + x * x) * e + 2.0 * t * x * d.momentum[i] + e
    });
    let a = trapezoid(h, definitional);
    let positive = (0..n).map(|i| {
        let x = sys.nodes[i];
        0.25 * (t - x).powi(2) * d.minus[i]
            + 0.25 * (t + x).powi(2) * d.plus[i]
            + (t * t + x * x) * d.potential[i]
            + d.wave[i]
            + d.potential[i]
    });
    (a, trapezoid(h, positive))
}

/// Right side of the conformal growth identity at shifted time `t`.
pub fn conformal_growth_rhs(state: &FieldState, sys: &WaveSystem, t: f64) -> f64 {
    let h = sys.grid.h();
    let samples = sys.profile.samples();
    let mut total = 0.0;
    for (m, phi) in state.phi.iter().enumerate() {
        let lt2 = sys.modes.modes()[m].lt2;
        total += trapezoid(h, phi.iter().zip(samples).map(|(v, s)| (s.trap_v + lt2 * s.trap_vl) * v * v));
    }
    if sys.semilinear.is_some() {
        total += trapezoid(h, state.phi[0].iter().zip(samples).map(|(&v, s)| s.trap_f * sys.big_f_integrated(v)));
    }
    t * total
}

/// `|| (1 + r_*^2)^{-1/2} phi ||^2`.
pub fn hardy_norm(state: &FieldState, sys: &WaveSystem, ctx: &FunctionalContext) -> f64 {
    weighted_l2(state, sys, |i| ctx.hardy_weight[i])
}

/// `|| (1 + r_*^2)^{-1} phi ||^2`.
pub fn morawetz_density(state: &FieldState, sys: &WaveSystem, ctx: &FunctionalContext) -> f64 {
    weighted_l2(state, sys, |i| ctx.hardy_weight[i] * ctx.hardy_weight[i])
}

/// `sum_l int w_i phi_l^2`.
pub fn weighted_l2(state: &FieldState, sys: &WaveSystem, w: impl Fn(usize) -> f64) -> f64 {
    let h = sys.grid.h();
    state.phi.iter().map(|phi| trapezoid(h, phi.iter().enumerate().map(|(i, v)| w(i) * v * v))).sum()
}

/// `sum_l lambda^{2(1-eps)} int (chi_alpha phi_l)^2`.
pub fn angular_density(state: &FieldState, sys: &WaveSystem, ctx: &FunctionalContext) -> f64 {
    let h = sys.grid.h();
    state
        .phi
        .iter()
        .zip(sys.modes.modes())
        .map(|(phi, m)| {
            m.lambda.powf(2.0 * (1.0 - ctx.epsilon))
                * trapezoid(h, phi.iter().zip(&ctx.chi).map(|(v, c)| (c * v).powi(2)))
        })
        .sum()
}

/// `int w(r_*) int_{S^2} g(psi) d omega dr_*` by synthesis.
fn pointwise_integral(
    state: &FieldState,
    sys: &WaveSystem,
    ctx: &FunctionalContext,
    weight: impl Fn(usize) -> f64,
    g: impl Fn(f64) -> f64 + Copy,
) -> Result<f64> {
    let quad = ctx.quadrature()?;
    let n = sys.grid.n;
    let mut values = vec![0.0; state.mode_count()];
    let mut integrand = vec![0.0; n];
    for (i, out) in integrand.iter_mut().enumerate() {
        let w = weight(i);
        if w == 0.0 {
            continue;
        }
        for (m, v) in values.iter_mut().enumerate() {
            *v = state.phi[m][i];
        }
        if values.iter().all(|v| *v == 0.0) {
            continue;
        }
        *out = w * quad.sphere_integral(&values, g);
    }
    Ok(trapezoid(sys.grid.h(), integrand.into_iter()))
}

/// `int V_L^{(sigma-2)/2} |psi|^sigma d^3 mu` for `2 <= sigma <= 6`.
pub fn weighted_lq(state: &FieldState, sys: &WaveSystem, ctx: &FunctionalContext, sigma: f64) -> Result<f64> {
    if !(2.0..=6.0).contains(&sigma) {
        return Err(Error::Parameter(format!("sigma must lie in [2, 6], got {sigma}")));
    }
    let e = 0.5 * (sigma - 2.0);
    pointwise_integral(state, sys, ctx, |i| if e == 0.0 { 1.0 } else { sys.v_l[i].powf(e) }, |v| v.abs().powf(sigma))
}

/// `int V_L |psi|^4 d^3 mu`; on both backgrounds `V_L` is the weight of
/// the space-time `L^4` estimate after the change of measure.
pub fn l4_density(state: &FieldState, sys: &WaveSystem, ctx: &FunctionalContext) -> Result<f64> {
    pointwise_integral(state, sys, ctx, |i| sys.v_l[i], |v| v.powi(4))
}

/// Both sides of the Sobolev estimate
/// `int V_L^2 |psi|^6 <= C (int |psi'|^2 + |(V_L'/V_L) psi|^2)(int V_L (|grad_W psi|^2 + |psi|^2))^2`.
pub fn sobolev_sides(state: &FieldState, sys: &WaveSystem, ctx: &FunctionalContext) -> Result<(f64, f64)> {
    let h = sys.grid.h();
    let mut radial = 0.0;
    let mut angular = 0.0;
    for (phi, m) in state.phi.iter().zip(sys.modes.modes()) {
        let d = centred_derivative(phi, h);
        for i in 0..phi.len() {
            if phi[i] == 0.0 && d[i] == 0.0 {
                continue;
            }
            let q = ctx.log_derivative[i];
            if !q.is_finite() {
                return Err(Error::ConditionViolation(format!("V_L'/V_L is not finite at r_* = {}", sys.nodes[i])));
            }
            radial += h * (d[i] * d[i] + (q * phi[i]).powi(2));
            angular += h * sys.v_l[i] * (m.lt2 + 1.0) * phi[i] * phi[i];
        }
    }
    let lhs = weighted_lq(state, sys, ctx, 6.0)?;
    Ok((lhs, radial * angular * angular))
}
