//! Per-mode discrete operators: the Hamiltonian, the Morawetz multiplier
//! `gamma`, the phase space observables, exact commutators, positivity
//! certification and the Heisenberg identity check.
//!
//! Every operator acts on the `n - 2` interior nodes of a [`RadialGrid`];
//! the Dirichlet boundary values are zero and are not represented. With
//! that convention the centred first difference `D1` is exactly skew and
//! the second difference `D2` exactly symmetric.

mod calculus;
mod certify;
mod decay;
mod heisenberg;
mod multiplier;
mod phase;

pub use calculus::{functional_calculus, momentum_operator, MomentumSpectrum};
pub use certify::{
    certify_morawetz, certify_phase, certify_positivity, lambda_min, localized_mass_weight, morawetz_weight,
    phase_constant, scan_b, BScanReport, BScanRow, Certification, MorawetzCertification, PhaseCertification,
    Restriction, TestSubspace,
};
pub use decay::{local_decay_report, LocalDecayReport, SATURATION_THRESHOLD};
pub use heisenberg::{
    heisenberg_identity_check, static_family, HeisenbergReport, ObservableFamily, StaticFamily, TemporalPhaseFamily,
};
pub use multiplier::{g_weight, g_weight_derivative, lightcone_cutoff, MultiplierSpec};
pub use phase::{
    build_full_phase_observable, build_partial_phase_observable, full_phase_indices, EnergyBoundRatio, PhaseParams,
    PhaseWorkbench,
};

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::background::{Background, ScanDomain};
use crate::error::{Error, Result};
use crate::evolve::RadialGrid;
use crate::harmonics::Mode;

/// Relative tolerance for the tagged symmetry of a built operator.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryTag {
    /// Self-adjoint: real symmetric or complex Hermitian.
    Symmetric,
    /// Real antisymmetric (anti-self-adjoint).
    Skew,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex<f64>>),
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        match self {
            OperatorMatrix::Real(m) => m.nrows(),
            OperatorMatrix::Complex(m) => m.nrows(),
        }
    }

    fn norm(&self) -> f64 {
        match self {
            OperatorMatrix::Real(m) => m.norm(),
            OperatorMatrix::Complex(m) => m.norm(),
        }
    }

    /// `|| M - s M^* ||` for `s = +1` (self-adjoint) or `-1` (skew).
    fn adjoint_defect(&self, sign: f64) -> f64 {
        match self {
            OperatorMatrix::Real(m) => (m - m.transpose() * sign).norm(),
            OperatorMatrix::Complex(m) => (m - m.adjoint() * Complex::new(sign, 0.0)).norm(),
        }
    }
}

/// A matrix acting on one mode's interior grid values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub mode: Mode,
    matrix: OperatorMatrix,
    tag: SymmetryTag,
}

impl DiscreteOperator {
    /// Checks the tag to [`SYMMETRY_TOLERANCE`] of the matrix norm.
    pub fn new(mode: Mode, matrix: OperatorMatrix, tag: SymmetryTag) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(Error::Shape("operator has no rows".into()));
        }
        if let OperatorMatrix::Real(m) = &matrix {
            if !m.is_square() {
                return Err(Error::Shape(format!("operator is {}x{}, not square", m.nrows(), m.ncols())));
            }
        }
        if let OperatorMatrix::Complex(m) = &matrix {
            if !m.is_square() {
                return Err(Error::Shape(format!("operator is {}x{}, not square", m.nrows(), m.ncols())));
            }
            if tag == SymmetryTag::Skew {
                return Err(Error::Contract("complex operators are tagged symmetric or general".into()));
            }
        }
        let op = DiscreteOperator { mode, matrix, tag };
        let defect = op.symmetry_defect();
        if defect > SYMMETRY_TOLERANCE {
            return Err(Error::Contract(format!("operator tagged {tag:?} has relative defect {defect:e}")));
        }
        Ok(op)
    }

    pub fn real(mode: Mode, matrix: DMatrix<f64>, tag: SymmetryTag) -> Result<Self> {
        Self::new(mode, OperatorMatrix::Real(matrix), tag)
    }

    /// Symmetrises (or antisymmetrises) before tagging.
    pub(crate) fn real_projected(mode: Mode, m: DMatrix<f64>, tag: SymmetryTag) -> Self {
        let matrix = match tag {
            SymmetryTag::Symmetric => (&m + m.transpose()) * 0.5,
            SymmetryTag::Skew => (&m - m.transpose()) * 0.5,
            SymmetryTag::General => m,
        };
        DiscreteOperator { mode, matrix: OperatorMatrix::Real(matrix), tag }
    }

    pub fn tag(&self) -> SymmetryTag {
        self.tag
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn as_real(&self) -> Result<&DMatrix<f64>> {
        match &self.matrix {
            OperatorMatrix::Real(m) => Ok(m),
            OperatorMatrix::Complex(_) => Err(Error::Contract("operation needs a real operator".into())),
        }
    }

    /// Relative distance from the tagged symmetry; zero for `General`.
    pub fn symmetry_defect(&self) -> f64 {
        let norm = self.matrix.norm();
        if norm == 0.0 {
            return 0.0;
        }
        match self.tag {
            SymmetryTag::Symmetric => self.matrix.adjoint_defect(1.0) / norm,
            SymmetryTag::Skew => self.matrix.adjoint_defect(-1.0) / norm,
            SymmetryTag::General => 0.0,
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Largest `|i - j|` with a nonzero entry.
    pub fn bandwidth(&self) -> usize {
        match &self.matrix {
            OperatorMatrix::Real(m) => real_bandwidth(m),
            OperatorMatrix::Complex(m) => {
                let n = m.nrows();
                let mut bw = 0;
                for j in 0..n {
                    for i in 0..n {
                        if m[(i, j)] != Complex::new(0.0, 0.0) {
                            bw = bw.max(i.abs_diff(j));
                        }
                    }
                }
                bw
            }
        }
    }

    /// Real matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.as_real()?;
        if x.len() != m.ncols() {
            return Err(Error::Shape(format!("vector of length {} for a {}-dim operator", x.len(), m.ncols())));
        }
        let mut out = vec![0.0; m.nrows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(m.column(j).iter()) {
                *o += a * xj;
            }
        }
        Ok(out)
    }

    /// Transposed product `A^T x`.
    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.as_real()?;
        if x.len() != m.nrows() {
            return Err(Error::Shape(format!("vector of length {} for a {}-dim operator", x.len(), m.nrows())));
        }
        Ok((0..m.ncols()).map(|j| m.column(j).iter().zip(x).map(|(a, b)| a * b).sum()).collect())
    }

    pub fn scaled(&self, c: f64) -> DiscreteOperator {
        let matrix = match &self.matrix {
            OperatorMatrix::Real(m) => OperatorMatrix::Real(m * c),
            OperatorMatrix::Complex(m) => OperatorMatrix::Complex(m * Complex::new(c, 0.0)),
        };
        DiscreteOperator { mode: self.mode, matrix, tag: self.tag }
    }

    /// `self + c * other`; the tag survives when both tags agree.
    pub fn add_scaled(&self, other: &DiscreteOperator, c: f64) -> Result<DiscreteOperator> {
        let (a, b) = (self.as_real()?, other.as_real()?);
        if a.shape() != b.shape() {
            return Err(Error::Shape(format!("cannot add {:?} and {:?}", a.shape(), b.shape())));
        }
        let tag = if self.tag == other.tag { self.tag } else { SymmetryTag::General };
        Ok(DiscreteOperator { mode: self.mode, matrix: OperatorMatrix::Real(a + b * c), tag })
    }

    /// Real product, exploiting bandwidth when either factor is banded.
    pub fn product(&self, other: &DiscreteOperator) -> Result<DMatrix<f64>> {
        banded_product(self.as_real()?, other.as_real()?)
    }
}

pub(crate) fn real_bandwidth(m: &DMatrix<f64>) -> usize {
    let n = m.nrows();
    let mut bw = 0;
    for j in 0..m.ncols() {
        let col = m.column(j);
        // only entries further out than the current bandwidth matter
        for i in 0..n {
            if i.abs_diff(j) > bw && col[i] != 0.0 {
                bw = i.abs_diff(j);
            }
        }
    }
    bw
}

/// `A B` in `O(n^2 k)` when one factor has bandwidth `k <= n / 8`.
pub(crate) fn banded_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.ncols() != b.nrows() {
        return Err(Error::Shape(format!("cannot multiply {:?} by {:?}", a.shape(), b.shape())));
    }
    let n = a.nrows();
    let (ka, kb) = (real_bandwidth(a), real_bandwidth(b));
    let limit = (n / 8).max(1);
    if kb <= limit && kb <= ka {
        // column j of AB mixes columns j-kb..=j+kb of A
        let mut out = DMatrix::zeros(n, b.ncols());
        for j in 0..b.ncols() {
            let lo = j.saturating_sub(kb);
            let hi = (j + kb).min(b.nrows() - 1);
            for k in lo..=hi {
                let bkj = b[(k, j)];
                if bkj != 0.0 {
                    out.column_mut(j).axpy(bkj, &a.column(k), 1.0);
                }
            }
        }
        Ok(out)
    } else if ka <= limit {
        // column j of AB is the banded product A b_j
        let mut out = DMatrix::zeros(n, b.ncols());
        for j in 0..b.ncols() {
            let bj = b.column(j);
            for i in 0..n {
                let lo = i.saturating_sub(ka);
                let hi = (i + ka).min(a.ncols() - 1);
                let mut s = 0.0;
                for k in lo..=hi {
                    s += a[(i, k)] * bj[k];
                }
                out[(i, j)] = s;
            }
        }
        Ok(out)
    } else {
        Ok(a * b)
    }
}

/// `A B - B A`; symmetric when one argument is symmetric and the other
/// skew, skew when both share a tag, general otherwise.
pub fn commutator(a: &DiscreteOperator, b: &DiscreteOperator) -> Result<DiscreteOperator> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("commutator of {}-dim and {}-dim operators", a.dim(), b.dim())));
    }
    let m = a.product(b)? - b.product(a)?;
    use SymmetryTag::*;
    let tag = match (a.tag, b.tag) {
        (Symmetric, Skew) | (Skew, Symmetric) => Symmetric,
        (Symmetric, Symmetric) | (Skew, Skew) => Skew,
        _ => General,
    };
    DiscreteOperator::real(a.mode, m, tag)
}

/// Interior node coordinates.
pub fn interior_nodes(grid: &RadialGrid) -> Vec<f64> {
    (1..grid.n - 1).map(|i| grid.node(i)).collect()
}

/// Centred first difference on the interior with zero Dirichlet values.
pub fn first_difference(grid: &RadialGrid) -> DMatrix<f64> {
    let n = grid.n - 2;
    let c = 0.5 / grid.h();
    DMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            c
        } else if i == j + 1 {
            -c
        } else {
            0.0
        }
    })
}

/// Second difference on the interior with zero Dirichlet values.
pub fn second_difference(grid: &RadialGrid) -> DMatrix<f64> {
    let n = grid.n - 2;
    let c = 1.0 / (grid.h() * grid.h());
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -2.0 * c
        } else if i.abs_diff(j) == 1 {
            c
        } else {
            0.0
        }
    })
}

/// `H = -D2 + diag(V + lt2 V_L)`.
pub fn build_hamiltonian(mode: &Mode, bg: &Background, grid: &RadialGrid) -> Result<DiscreteOperator> {
    let nodes = interior_nodes(grid);
    let mut m = -second_difference(grid);
    for (i, &x) in nodes.iter().enumerate() {
        m[(i, i)] += bg.potentials(x)?.effective(mode.lt2);
    }
    DiscreteOperator::real(*mode, m, SymmetryTag::Symmetric)
}

/// Where the Morawetz weight `g` is centred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// At the mode's own peak `(alpha_l)_*`.
    #[default]
    PerMode,
    /// At the limit `(alpha_inf)_*` for every mode.
    Uniform,
}

/// Peak location used as the centre of `g` for `mode`.
pub fn gamma_center(bg: &Background, mode: &Mode, grid: &RadialGrid, centering: Centering) -> Result<f64> {
    let scan = ScanDomain::new(grid.r_min, grid.r_max, grid.n.clamp(16, 20001))?;
    Ok(match centering {
        Centering::PerMode => bg.effective_potential_peak(mode.lt2, &scan)?.tortoise,
        Centering::Uniform => bg.asymptotic_peak(&scan)?.tortoise,
    })
}

/// `gamma = (G D1 + D1 G) / 2` with `G = diag(g(scale (r_* - center)))`.
pub fn gamma_from_weight(mode: &Mode, grid: &RadialGrid, g: impl Fn(f64) -> f64) -> DiscreteOperator {
    let nodes = interior_nodes(grid);
    let d1 = first_difference(grid);
    let n = nodes.len();
    let gv: Vec<f64> = nodes.iter().map(|&x| g(x)).collect();
    // (G D1 + D1 G)_{ij} = (g_i + g_j) D1_{ij} / 2 on the two off-diagonals
    let m = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 0.5 * (gv[i] + gv[j]) * d1[(i, j)] } else { 0.0 });
    DiscreteOperator::real_projected(*mode, m, SymmetryTag::Skew)
}

/// The Morawetz multiplier `gamma_{l, sigma}` of dilation `b`.
pub fn build_gamma(
    mode: &Mode,
    bg: &Background,
    grid: &RadialGrid,
    sigma: f64,
    b: f64,
    centering: Centering,
) -> Result<DiscreteOperator> {
    check_sigma_b(sigma, b)?;
    let center = gamma_center(bg, mode, grid, centering)?;
    Ok(gamma_from_weight(mode, grid, |x| g_weight(x - center, sigma, b)))
}

pub(crate) fn check_sigma_b(sigma: f64, b: f64) -> Result<()> {
    if !(sigma > 1.0) || !sigma.is_finite() {
        return Err(Error::Parameter(format!("sigma must exceed 1 for a bounded weight, got {sigma}")));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::Parameter(format!("dilation b must be positive, got {b}")));
    }
    Ok(())
}
