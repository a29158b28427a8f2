//! Positivity certification of quadratic forms `C - c W` on interior test
//! functions.
//!
//! Positive definiteness is decided by a Cholesky factorisation: banded
//! (`O(n k^2)`) when both forms are banded, dense otherwise. The largest
//! admissible `c` and the smallest eigenvalue are both found by bisection
//! on that test, so a reported `c_best` always passed it.

use std::ops::Range;

use nalgebra::{Cholesky, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::phase::PhaseWorkbench;
use super::{
    build_gamma, build_hamiltonian, commutator, interior_nodes, real_bandwidth, Centering, DiscreteOperator,
    SymmetryTag,
};
use crate::background::Background;
use crate::error::{Error, Result};
use crate::evolve::RadialGrid;
use crate::harmonics::Mode;

const BISECTION_STEPS: usize = 200;
const RELATIVE_TOLERANCE: f64 = 1e-12;

/// Interior grid functions supported at least `margin_fraction` of the
/// domain length away from either end, and resolved: piecewise linear
/// interpolants of values on every `coarsening`-th node.
///
/// Any local skew discretisation of `gamma` reverses the sign of the
/// potential part of `[H, gamma]` on odd-even modes near the grid Nyquist
/// frequency, so positivity is certified only on resolved functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSubspace {
    pub margin_fraction: f64,
    #[serde(default = "default_coarsening")]
    pub coarsening: usize,
}

fn default_coarsening() -> usize {
    2
}

impl Default for TestSubspace {
    fn default() -> Self {
        TestSubspace { margin_fraction: 0.1, coarsening: default_coarsening() }
    }
}

impl TestSubspace {
    pub fn new(margin_fraction: f64, coarsening: usize) -> Result<Self> {
        if !(0.0..0.5).contains(&margin_fraction) {
            return Err(Error::Parameter(format!("boundary margin must lie in [0, 0.5), got {margin_fraction}")));
        }
        if coarsening == 0 {
            return Err(Error::Parameter("coarsening factor must be at least 1".into()));
        }
        Ok(TestSubspace { margin_fraction, coarsening })
    }

    /// Interior indices of the admissible support.
    pub fn indices(&self, grid: &RadialGrid) -> Range<usize> {
        let nodes = interior_nodes(grid);
        let pad = self.margin_fraction * grid.length();
        let (lo, hi) = (grid.r_min + pad, grid.r_max - pad);
        let start = nodes.iter().position(|&x| x >= lo).unwrap_or(nodes.len());
        let end = nodes.iter().rposition(|&x| x <= hi).map_or(start, |e| e + 1);
        start..end.max(start)
    }

    pub fn restriction(&self, grid: &RadialGrid) -> Restriction {
        Restriction { range: self.indices(grid), coarsening: self.coarsening.max(1) }
    }
}

/// A test subspace in index form: hat functions of half-width
/// `coarsening` centred on every `coarsening`-th index, supported in `range`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub range: Range<usize>,
    pub coarsening: usize,
}

impl Restriction {
    pub fn new(range: Range<usize>, coarsening: usize) -> Self {
        Restriction { range, coarsening: coarsening.max(1) }
    }

    /// Every vector supported in `range`.
    pub fn all(range: Range<usize>) -> Self {
        Restriction { range, coarsening: 1 }
    }

    /// Sparse columns of the basis, as `(index, value)` lists.
    fn basis(&self) -> Vec<Vec<(usize, f64)>> {
        let q = self.coarsening;
        if self.range.len() < 2 * q - 1 {
            return Vec::new();
        }
        let (first, last) = (self.range.start + q - 1, self.range.end - q);
        (first..=last)
            .step_by(q)
            .map(|c| (c + 1 - q..c + q).map(|i| (i, 1.0 - i.abs_diff(c) as f64 / q as f64)).collect())
            .collect()
    }

    /// `P^T M P` for the basis `P`.
    fn project(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let basis = self.basis();
        let k = basis.len();
        if self.coarsening == 1 {
            let r = &self.range;
            return m.view((r.start, r.start), (r.len(), r.len())).into_owned();
        }
        let rows = self.range.clone();
        // columns of M P restricted to the range rows
        let mut mp = DMatrix::<f64>::zeros(rows.len(), k);
        for (b, col) in basis.iter().enumerate() {
            for &(j, p) in col {
                for (o, i) in rows.clone().enumerate() {
                    let v = m[(i, j)];
                    if v != 0.0 {
                        mp[(o, b)] += p * v;
                    }
                }
            }
        }
        DMatrix::from_fn(k, k, |a, b| basis[a].iter().map(|&(i, p)| p * mp[(i - rows.start, b)]).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    /// Largest `c >= 0` with `C - c W >= 0`; infinite when `W = 0`.
    pub c_best: f64,
    /// Smallest eigenvalue of `C - c_best W` on the test subspace.
    pub margin: f64,
    pub dimension: usize,
    pub bandwidth: usize,
}

impl Certification {
    pub fn certified(&self) -> bool {
        self.c_best > 0.0 && self.margin >= 0.0
    }
}

/// Restricted pair `(C, W)` with a Cholesky test for `C - c W - s I > 0`.
struct Pencil {
    c: DMatrix<f64>,
    w: DMatrix<f64>,
    bandwidth: usize,
    banded: bool,
}

impl Pencil {
    fn new(c: &DMatrix<f64>, w: &DMatrix<f64>, sub: &Restriction) -> Self {
        let c = sub.project(c);
        let w = sub.project(w);
        let len = c.nrows();
        let bandwidth = real_bandwidth(&c).max(real_bandwidth(&w));
        Pencil { banded: bandwidth <= (len / 8).max(1), c, w, bandwidth }
    }

    fn dim(&self) -> usize {
        self.c.nrows()
    }

    fn entry(&self, i: usize, j: usize, coef: f64, shift: f64) -> f64 {
        let d = if i == j { shift } else { 0.0 };
        self.c[(i, j)] - coef * self.w[(i, j)] - d
    }

    fn positive_definite(&self, coef: f64, shift: f64) -> bool {
        let n = self.dim();
        if self.banded {
            let k = self.bandwidth;
            let width = k + 1;
            // l[i * width + (j + k - i)] holds L_ij for i - k <= j <= i
            let mut l = vec![0.0; n * width];
            for i in 0..n {
                let j0 = i.saturating_sub(k);
                for j in j0..=i {
                    let mut s = self.entry(i, j, coef, shift);
                    let k0 = j0.max(j.saturating_sub(k));
                    for q in k0..j {
                        s -= l[i * width + q + k - i] * l[j * width + q + k - j];
                    }
                    if i == j {
                        if !(s > 0.0) {
                            return false;
                        }
                        l[i * width + k] = s.sqrt();
                    } else {
                        l[i * width + j + k - i] = s / l[j * width + k];
                    }
                }
            }
            true
        } else {
            let m = DMatrix::from_fn(n, n, |i, j| self.entry(i, j, coef, shift));
            Cholesky::new(m).is_some()
        }
    }

    /// Gershgorin bound on the spectral radius of `C - coef W`.
    fn radius(&self, coef: f64) -> f64 {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.entry(i, j, coef, 0.0).abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Largest shift `s` found with `C - coef W - s I > 0`.
    fn lambda_min(&self, coef: f64) -> f64 {
        let r = self.radius(coef).max(f64::MIN_POSITIVE);
        let (mut lo, mut hi) = if self.positive_definite(coef, 0.0) {
            (0.0, r * (1.0 + 1e-12))
        } else {
            (-r * (1.0 + 1e-12) - f64::MIN_POSITIVE, 0.0)
        };
        for _ in 0..BISECTION_STEPS {
            if hi - lo <= RELATIVE_TOLERANCE * r {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.positive_definite(coef, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Smallest eigenvalue of a symmetric operator restricted to `range`.
pub fn lambda_min(op: &DiscreteOperator, sub: &Restriction) -> Result<f64> {
    check_restriction(op.dim(), sub)?;
    let m = op.as_real()?;
    let zero = DMatrix::zeros(m.nrows(), m.ncols());
    Ok(Pencil::new(m, &zero, sub).lambda_min(0.0))
}

fn check_restriction(dim: usize, sub: &Restriction) -> Result<()> {
    if sub.range.end > dim || sub.basis().is_empty() {
        return Err(Error::Shape(format!(
            "test subspace {:?} at coarsening {} is empty or exceeds dimension {dim}",
            sub.range, sub.coarsening
        )));
    }
    Ok(())
}

fn check_pair(c: &DiscreteOperator, w: &DiscreteOperator, sub: &Restriction) -> Result<()> {
    for op in [c, w] {
        if op.tag() != SymmetryTag::Symmetric {
            return Err(Error::Contract(format!("positivity needs symmetric forms, got {:?}", op.tag())));
        }
    }
    if c.dim() != w.dim() {
        return Err(Error::Shape(format!("form of dimension {} against weight of dimension {}", c.dim(), w.dim())));
    }
    check_restriction(c.dim(), sub)
}

/// Largest `c >= 0` for which `C - c W` is positive semidefinite on the
/// test subspace, with the final smallest eigenvalue.
pub fn certify_positivity(c: &DiscreteOperator, w: &DiscreteOperator, sub: &Restriction) -> Result<Certification> {
    check_pair(c, w, sub)?;
    let pencil = Pencil::new(c.as_real()?, w.as_real()?, sub);
    let done = |c_best: f64, margin: f64| Certification {
        c_best,
        margin,
        dimension: pencil.dim(),
        bandwidth: pencil.bandwidth,
    };
    if pencil.w.iter().all(|v| *v == 0.0) {
        return Ok(done(f64::INFINITY, pencil.lambda_min(0.0)));
    }
    let wscale = pencil.w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let n = pencil.dim();
    let weight =
        Pencil { c: pencil.w.clone(), w: DMatrix::zeros(n, n), bandwidth: pencil.bandwidth, banded: pencil.banded };
    if weight.lambda_min(0.0) < -1e-12 * wscale * n as f64 {
        return Err(Error::Contract("weight form is not positive semidefinite".into()));
    }
    if !pencil.positive_definite(0.0, 0.0) {
        return Ok(done(0.0, pencil.lambda_min(0.0)));
    }
    let mut hi = 1.0;
    while pencil.positive_definite(hi, 0.0) {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(done(f64::INFINITY, pencil.lambda_min(0.0)));
        }
    }
    let mut lo = if hi > 1.0 { 0.5 * hi } else { 0.0 };
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= RELATIVE_TOLERANCE * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pencil.positive_definite(mid, 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(done(lo, pencil.lambda_min(lo)))
}

/// `diag((1 + r_*^2)^{-sigma/2 - 1}) + D1^T diag((1 + r_*^2)^{-sigma/2}) D1`.
pub fn morawetz_weight(mode: &Mode, grid: &RadialGrid, sigma: f64) -> Result<DiscreteOperator> {
    let nodes = interior_nodes(grid);
    let n = nodes.len();
    let c2 = 0.25 / (grid.h() * grid.h());
    let w: Vec<f64> = nodes.iter().map(|x| (1.0 + x * x).powf(-0.5 * sigma)).collect();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        // D1 has +c at (k, k+1) and -c at (k+1, k)
        let mut d = (1.0 + nodes[i] * nodes[i]).powf(-0.5 * sigma - 1.0);
        if i > 0 {
            d += c2 * w[i - 1];
        }
        if i + 1 < n {
            d += c2 * w[i + 1];
        }
        m[(i, i)] = d;
        if i + 2 < n {
            m[(i, i + 2)] = -c2 * w[i + 1];
            m[(i + 2, i)] = -c2 * w[i + 1];
        }
    }
    DiscreteOperator::real(*mode, m, SymmetryTag::Symmetric)
}

/// `lambda^{2 s} diag(chi_alpha^2)`.
pub fn localized_mass_weight(wb: &PhaseWorkbench, mode: &Mode, s: f64) -> DiscreteOperator {
    let scale = mode.lambda.powf(2.0 * s);
    let diag = nalgebra::DVector::from_iterator(wb.chi.len(), wb.chi.iter().map(|c| scale * c * c));
    DiscreteOperator::real_projected(*mode, DMatrix::from_diagonal(&diag), SymmetryTag::Symmetric)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorawetzCertification {
    pub l: usize,
    pub sigma: f64,
    pub b: f64,
    #[serde(flatten)]
    pub result: Certification,
}

/// `[H, gamma] >= c W` for one mode.
pub fn certify_morawetz(
    bg: &Background,
    mode: &Mode,
    grid: &RadialGrid,
    sigma: f64,
    b: f64,
    centering: Centering,
    sub: &TestSubspace,
) -> Result<MorawetzCertification> {
    let h = build_hamiltonian(mode, bg, grid)?;
    let gamma = build_gamma(mode, bg, grid, sigma, b, centering)?;
    let c = commutator(&h, &gamma)?;
    let w = morawetz_weight(mode, grid, sigma)?;
    Ok(MorawetzCertification { l: mode.l, sigma, b, result: certify_positivity(&c, &w, &sub.restriction(grid))? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BScanRow {
    pub b: f64,
    pub modes: Vec<MorawetzCertification>,
    pub all_certified: bool,
    /// `min_l c_best / median_l c_best`.
    pub uniformity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BScanReport {
    pub sigma: f64,
    pub rows: Vec<BScanRow>,
    /// First `b` certifying every mode with uniformity above one half.
    pub chosen: Option<f64>,
}

impl BScanReport {
    pub fn chosen_row(&self) -> Option<&BScanRow> {
        self.chosen.and_then(|b| self.rows.iter().find(|r| r.b == b))
    }
}

/// Uniformity threshold on `min / median` of the per-mode constants.
pub const UNIFORMITY_THRESHOLD: f64 = 0.5;

/// Certifies every mode for each `b` in `b_values`.
pub fn scan_b(
    bg: &Background,
    modes: &[Mode],
    grid: &RadialGrid,
    sigma: f64,
    b_values: &[f64],
    centering: Centering,
    sub: &TestSubspace,
) -> Result<BScanReport> {
    let mut rows = Vec::with_capacity(b_values.len());
    for &b in b_values {
        let certs: Vec<MorawetzCertification> =
            modes.par_iter().map(|m| certify_morawetz(bg, m, grid, sigma, b, centering, sub)).collect::<Result<_>>()?;
        let mut cs: Vec<f64> = certs.iter().map(|c| c.result.c_best).collect();
        cs.sort_by(f64::total_cmp);
        let median = if cs.len() % 2 == 1 { cs[cs.len() / 2] } else { 0.5 * (cs[cs.len() / 2 - 1] + cs[cs.len() / 2]) };
        let uniformity = if median > 0.0 { cs[0] / median } else { 0.0 };
        rows.push(BScanRow { b, all_certified: certs.iter().all(|c| c.result.certified()), modes: certs, uniformity });
    }
    let chosen = rows.iter().find(|r| r.all_certified && r.uniformity > UNIFORMITY_THRESHOLD).map(|r| r.b);
    Ok(BScanReport { sigma, rows, chosen })
}

/// Smallest `C >= 0` with `[H, Gamma] + C [H, gamma] >= 0` on the subspace.
pub fn phase_constant(comm_phase: &DiscreteOperator, comm_gamma: &DiscreteOperator, sub: &Restriction) -> Result<f64> {
    check_pair(comm_phase, comm_gamma, sub)?;
    // C - c W with W = -[H, gamma] is [H, Gamma] + c [H, gamma]
    let neg = comm_gamma.scaled(-1.0);
    let pencil = Pencil::new(comm_phase.as_real()?, neg.as_real()?, sub);
    if pencil.positive_definite(0.0, 0.0) {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while !pencil.positive_definite(hi, 0.0) {
        hi *= 2.0;
        if hi > 1e200 {
            return Err(Error::ConditionViolation(
                "no multiple of the Morawetz commutator makes the phase commutator positive".into(),
            ));
        }
    }
    let mut lo = if hi > 1.0 { 0.5 * hi } else { 0.0 };
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= RELATIVE_TOLERANCE * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pencil.positive_definite(mid, 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCertification {
    pub l: usize,
    /// Smallest multiple of `gamma` making the commutator positive.
    pub c_min: f64,
    /// Multiple actually used: `max(2 c_min, 1)`.
    pub c_gamma: f64,
    /// Exponent `s` of the weight `lambda^{2s} chi_alpha^2`.
    pub weight_exponent: f64,
    #[serde(flatten)]
    pub result: Certification,
}

/// `[H, Gamma + C_Gamma gamma] >= c lambda^{2(1 - 3 delta / 2)} chi_alpha^2`.
pub fn certify_phase(
    wb: &PhaseWorkbench,
    bg: &Background,
    mode: &Mode,
    sub: &TestSubspace,
) -> Result<PhaseCertification> {
    let h = build_hamiltonian(mode, bg, &wb.grid)?;
    let big = wb.full(mode)?;
    let gamma = wb.modulated_gamma(mode, 0.0);
    let c_big = commutator(&h, &big)?;
    let c_gamma = commutator(&h, &gamma)?;
    let restriction = sub.restriction(&wb.grid);
    let c_min = phase_constant(&c_big, &c_gamma, &restriction)?;
    let k = (2.0 * c_min).max(1.0);
    let c = c_big.add_scaled(&c_gamma, k)?;
    let s = 1.0 - 1.5 * wb.params.delta;
    let w = localized_mass_weight(wb, mode, s);
    Ok(PhaseCertification {
        l: mode.l,
        c_min,
        c_gamma: k,
        weight_exponent: s,
        result: certify_positivity(&c, &w, &restriction)?,
    })
}
