//! Harmonic bookkeeping: mode sets, powers of `L = sqrt(1 - Lap_W)` as
//! per-mode multipliers, and axisymmetric synthesis on Gauss-Legendre
//! nodes for pointwise (cubic and higher) functionals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub l: usize,
    /// Eigenvalue of `-Lap_W`.
    pub lt2: f64,
    /// Eigenvalue of `L`, `sqrt(1 + lt2)`.
    pub lambda: f64,
}

impl Mode {
    pub fn new(l: usize, lt2: f64) -> Self {
        Mode { l, lt2, lambda: (1.0 + lt2).sqrt() }
    }

    pub fn sphere(l: usize) -> Self {
        Mode::new(l, (l * (l + 1)) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    modes: Vec<Mode>,
    /// False when the spectrum was supplied rather than `l(l+1)`.
    sphere: bool,
}

impl ModeSet {
    pub fn new(l_max: usize, spectrum: Option<&[f64]>) -> Result<Self> {
        match spectrum {
            None => Ok(ModeSet { modes: (0..=l_max).map(Mode::sphere).collect(), sphere: true }),
            Some(values) => {
                if values.is_empty() {
                    return Err(Error::Config("custom spectrum is empty".into()));
                }
                if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                    return Err(Error::Config(format!("spectrum value {v} is not a finite nonnegative number")));
                }
                if let Some(w) = values.windows(2).find(|w| !(w[1] > w[0])) {
                    return Err(Error::Config(format!(
                        "spectrum must be strictly increasing ({} then {})",
                        w[0], w[1]
                    )));
                }
                Ok(ModeSet { modes: values.iter().enumerate().map(|(l, &v)| Mode::new(l, v)).collect(), sphere: false })
            }
        }
    }

    /// A set holding a single sphere harmonic.
    pub fn single(l: usize) -> Self {
        ModeSet { modes: vec![Mode::sphere(l)], sphere: true }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn l_max(&self) -> usize {
        self.modes.iter().map(|m| m.l).max().unwrap_or(0)
    }

    pub fn is_sphere(&self) -> bool {
        self.sphere
    }

    pub fn is_radial(&self) -> bool {
        self.modes.len() == 1 && self.modes[0].lt2 == 0.0
    }
}

/// Per-mode multipliers `lambda^s` realising `L^s`.
pub fn l_power(modes: &ModeSet, s: f64) -> Vec<f64> {
    modes.modes.iter().map(|m| m.lambda.powf(s)).collect()
}

/// Gauss-Legendre rule on `[-1, 1]` in `x = cos(theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("Gauss-Legendre rule needs at least one node".into()));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for k in 0..n.div_ceil(2) {
            let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d.is_finite() { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            nodes[n - 1 - k] = x;
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(GaussLegendre { nodes, weights })
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Orthonormal zonal harmonics `Y_l0 = sqrt((2l+1)/4pi) P_l(cos theta)`
/// and their `x`-derivatives, for `l = 0..=l_max`.
fn zonal_table(l_max: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; l_max + 1];
    let mut dp = vec![0.0; l_max + 1];
    p[0] = 1.0;
    if l_max >= 1 {
        p[1] = x;
        dp[1] = 1.0;
    }
    for l in 2..=l_max {
        let lf = l as f64;
        p[l] = ((2.0 * lf - 1.0) * x * p[l - 1] - (lf - 1.0) * p[l - 2]) / lf;
        // P_l' = P_{l-2}' + (2l-1) P_{l-1}, valid at the poles as well.
        dp[l] = dp[l - 2] + (2.0 * lf - 1.0) * p[l - 1];
    }
    for l in 0..=l_max {
        let norm = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
        p[l] *= norm;
        dp[l] *= norm;
    }
    (p, dp)
}

/// Angular quadrature for axisymmetric fields: synthesis tables on
/// Gauss-Legendre nodes. Integrals over the sphere are
/// `2 pi sum_k w_k g(x_k)`.
#[derive(Debug, Clone)]
pub struct AngularQuadrature {
    rule: GaussLegendre,
    /// Mode `l` indices present in the field, in storage order.
    ls: Vec<usize>,
    /// `y[k][j] = Y_{l_j,0}(x_k)`.
    y: Vec<Vec<f64>>,
    /// `dy[k][j] = sqrt(1 - x_k^2) dY_{l_j,0}/dx (x_k)`, i.e. `-dY/dtheta`.
    dy: Vec<Vec<f64>>,
}

impl AngularQuadrature {
    /// `node_count` must be at least `2 l_max + 1`.
    pub fn new(modes: &ModeSet, node_count: usize) -> Result<Self> {
        if !modes.is_sphere() {
            return Err(Error::Contract("pointwise synthesis needs the sphere spectrum l(l+1)".into()));
        }
        let l_max = modes.l_max();
        if node_count < 2 * l_max + 1 {
            return Err(Error::Accuracy(format!(
                "{node_count} angular nodes cannot resolve l_max = {l_max} (need at least {})",
                2 * l_max + 1
            )));
        }
        let rule = GaussLegendre::new(node_count)?;
        let ls: Vec<usize> = modes.modes().iter().map(|m| m.l).collect();
        let mut y = Vec::with_capacity(node_count);
        let mut dy = Vec::with_capacity(node_count);
        for &x in &rule.nodes {
            let (p, dp) = zonal_table(l_max, x);
            let s = (1.0 - x * x).sqrt();
            y.push(ls.iter().map(|&l| p[l]).collect());
            dy.push(ls.iter().map(|&l| s * dp[l]).collect());
        }
        Ok(AngularQuadrature { rule, ls, y, dy })
    }

    /// Default rule with `3 l_max + 2` nodes, exact for sextic products.
    pub fn for_modes(modes: &ModeSet) -> Result<Self> {
        Self::new(modes, 3 * modes.l_max() + 2)
    }

    pub fn node_count(&self) -> usize {
        self.rule.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    pub fn mode_count(&self) -> usize {
        self.ls.len()
    }

    /// Pointwise field at angular node `k` from the mode values at one radius.
    pub fn value_at(&self, k: usize, mode_values: &[f64]) -> f64 {
        self.y[k].iter().zip(mode_values).map(|(a, b)| a * b).sum()
    }

    /// `|d phi / d theta|` at angular node `k`.
    pub fn theta_derivative_at(&self, k: usize, mode_values: &[f64]) -> f64 {
        self.dy[k].iter().zip(mode_values).map(|(a, b)| a * b).sum()
    }

    /// `int_{S^2} g(phi) d omega` for the field whose mode values at one
    /// radius are `mode_values`.
    pub fn sphere_integral(&self, mode_values: &[f64], g: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (k, w) in self.rule.weights.iter().enumerate() {
            acc += w * g(self.value_at(k, mode_values));
        }
        2.0 * PI * acc
    }

    pub fn sphere_gradient_sq(&self, mode_values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (k, w) in self.rule.weights.iter().enumerate() {
            let d = self.theta_derivative_at(k, mode_values);
            acc += w * d * d;
        }
        2.0 * PI * acc
    }
}

/// Pointwise synthesis `phi(r_*, theta_k) = sum_l phi_l(r_*) Y_l0(theta_k)`.
///
/// `coeffs[j]` is the radial array of the `j`-th mode of `quad`'s mode set.
/// The result is indexed `[k][i]` (angular node, radial node).
pub fn synthesize_axisymmetric(coeffs: &[&[f64]], quad: &AngularQuadrature) -> Result<Vec<Vec<f64>>> {
    if coeffs.len() != quad.mode_count() {
        return Err(Error::Shape(format!("{} coefficient arrays for {} modes", coeffs.len(), quad.mode_count())));
    }
    let n = coeffs.first().map_or(0, |c| c.len());
    if coeffs.iter().any(|c| c.len() != n) {
        return Err(Error::Shape("coefficient arrays differ in length".into()));
    }
    let mut out = vec![vec![0.0; n]; quad.node_count()];
    for (k, row) in out.iter_mut().enumerate() {
        for (j, c) in coeffs.iter().enumerate() {
            let y = quad.y[k][j];
            for (o, v) in row.iter_mut().zip(c.iter()) {
                *o += y * v;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spectrum() {
        let m = ModeSet::new(3, None).unwrap();
        let lambdas: Vec<f64> = m.modes().iter().map(|m| m.lambda).collect();
        let want = [1.0, 3f64.sqrt(), 7f64.sqrt(), 13f64.sqrt()];
        for (a, b) in lambdas.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let zero = ModeSet::new(0, None).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero.modes()[0].lambda, 1.0);
        assert!(zero.is_radial());
    }

    #[test]
    fn custom_spectrum() {
        let m = ModeSet::new(0, Some(&[0.0, 4.0, 9.0])).unwrap();
        let lambdas: Vec<f64> = m.modes().iter().map(|m| m.lambda).collect();
        assert_eq!(lambdas, vec![1.0, 5f64.sqrt(), 10f64.sqrt()]);
        assert!(matches!(ModeSet::new(0, Some(&[0.0, 4.0, 2.0])), Err(Error::Config(_))));
        assert!(ModeSet::new(0, Some(&[-1.0])).is_err());
    }

    #[test]
    fn powers_of_l() {
        let m = ModeSet::new(3, None).unwrap();
        assert!(l_power(&m, 0.0).iter().all(|&v| v == 1.0));
        assert_eq!(l_power(&m, 1.0)[0], 1.0);
        assert!((l_power(&m, 2.0)[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..=40 {
            let rule = GaussLegendre::new(n).unwrap();
            assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * n) {
                let q: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n = {n}, degree {deg}: {q}");
            }
        }
    }

    #[test]
    fn radial_constant_field() {
        let modes = ModeSet::new(0, None).unwrap();
        let quad = AngularQuadrature::for_modes(&modes).unwrap();
        let c = [2.5; 5];
        let grid = synthesize_axisymmetric(&[&c], &quad).unwrap();
        for row in grid {
            for v in row {
                assert!((v - 2.5 / (4.0 * PI).sqrt()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn orthonormal_and_gradient_identity() {
        let modes = ModeSet::new(6, None).unwrap();
        let quad = AngularQuadrature::for_modes(&modes).unwrap();
        let vals = [0.3, -1.2, 0.7, 0.05, 2.0, -0.4, 1.1];
        let norm = quad.sphere_integral(&vals, |v| v * v);
        let want: f64 = vals.iter().map(|v| v * v).sum();
        assert!((norm - want).abs() < 1e-13 * want);
        let grad = quad.sphere_gradient_sq(&vals);
        let want: f64 = vals.iter().enumerate().map(|(l, v)| (l * (l + 1)) as f64 * v * v).sum();
        assert!((grad - want).abs() < 1e-12 * want);
    }

    #[test]
    fn too_few_nodes_is_an_accuracy_error() {
        let modes = ModeSet::new(4, None).unwrap();
        assert!(matches!(AngularQuadrature::new(&modes, 8), Err(Error::Accuracy(_))));
        assert!(AngularQuadrature::new(&modes, 9).is_ok());
        let custom = ModeSet::new(0, Some(&[0.0, 3.0])).unwrap();
        assert!(AngularQuadrature::for_modes(&custom).is_err());
    }
}
