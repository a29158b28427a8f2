//! Functions of self-adjoint discrete operators by dense eigendecomposition.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use super::{first_difference, DiscreteOperator, OperatorMatrix, SymmetryTag};
use crate::error::{Error, Result};
use crate::evolve::RadialGrid;
use crate::harmonics::Mode;

/// `f(A)` for self-adjoint `A`; real input gives a real result.
pub fn functional_calculus(base: &DiscreteOperator, f: impl Fn(f64) -> f64) -> Result<DiscreteOperator> {
    if base.tag() != SymmetryTag::Symmetric {
        return Err(Error::Contract(format!(
            "functional calculus needs a self-adjoint operator, got {:?}",
            base.tag()
        )));
    }
    match base.matrix() {
        OperatorMatrix::Real(m) => {
            let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
                .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
            let fv = eig.eigenvalues.map(&f);
            let q = &eig.eigenvectors;
            let out = q * DMatrix::from_diagonal(&fv) * q.transpose();
            Ok(DiscreteOperator::real_projected(base.mode, out, SymmetryTag::Symmetric))
        }
        OperatorMatrix::Complex(m) => {
            let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
                .ok_or_else(|| Error::Eigen("Hermitian eigensolver did not converge".into()))?;
            let fv: DVector<Complex<f64>> = eig.eigenvalues.map(|v| Complex::new(f(v), 0.0));
            let q = &eig.eigenvectors;
            let out = q * DMatrix::from_diagonal(&fv) * q.adjoint();
            let out = (&out + out.adjoint()) * Complex::new(0.5, 0.0);
            DiscreteOperator::new(base.mode, OperatorMatrix::Complex(out), SymmetryTag::Symmetric)
        }
    }
}

/// `xi = scale * (-i D1)`, Hermitian.
pub fn momentum_operator(mode: Mode, grid: &RadialGrid, scale: f64) -> Result<DiscreteOperator> {
    let d1 = first_difference(grid);
    let m = d1.map(|v| Complex::new(0.0, -scale * v));
    DiscreteOperator::new(mode, OperatorMatrix::Complex(m), SymmetryTag::Symmetric)
}

/// Eigendecomposition of `D1^T D1 = (-i D1)^2`, shared by every even
/// function of `xi_n = lambda^{n-1} (-i D1)` on one grid.
#[derive(Debug, Clone)]
pub struct MomentumSpectrum {
    /// Eigenvalues of `D1^T D1`, clamped at zero.
    squares: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl MomentumSpectrum {
    pub fn new(grid: &RadialGrid) -> Result<Self> {
        let d1 = first_difference(grid);
        let gram = d1.transpose() * &d1;
        let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 0)
            .ok_or_else(|| Error::Eigen("eigensolver failed on D1^T D1".into()))?;
        Ok(MomentumSpectrum { squares: eig.eigenvalues.map(|v| v.max(0.0)), vectors: eig.eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.squares.len()
    }

    /// `f(scale (-i D1))` for an even `f`, as a real symmetric matrix.
    pub fn even_function(&self, scale: f64, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let fv = self.squares.map(|s| f(scale * s.sqrt()));
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= fv[j];
        }
        let out = scaled * self.vectors.transpose();
        (&out + out.transpose()) * 0.5
    }
}
