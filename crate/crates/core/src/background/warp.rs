//! Warp functions `r(r_*)` for warped-product manifolds `R x W` with
//! metric `dr_*^2 + r(r_*)^2 dw^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value and first three derivatives of the warp at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpJet {
    pub r: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warp {
    /// `r = a + c r_*^2`; the default catalog entry is `a = c = 1`.
    Quadratic { a: f64, c: f64 },
    /// `r = a cosh(r_* / s)`.
    Cosh { a: f64, s: f64 },
    /// `r = (1 + r_*^2 / s^2)^k`, growing like `|r_*|^{2k}`.
    Power { s: f64, k: f64 },
    /// `r = sum_k coeffs[k] r_*^k`.
    Polynomial { coeffs: Vec<f64> },
    /// Natural cubic spline through sampled `(r_*, r)` pairs.
    Table(SplineTable),
}

impl Warp {
    pub fn unit_quadratic() -> Self {
        Warp::Quadratic { a: 1.0, c: 1.0 }
    }

    pub fn jet(&self, x: f64) -> Result<WarpJet> {
        match self {
            Warp::Quadratic { a, c } => Ok(WarpJet { r: a + c * x * x, d1: 2.0 * c * x, d2: 2.0 * c, d3: 0.0 }),
            Warp::Cosh { a, s } => {
                let u = x / s;
                Ok(WarpJet {
                    r: a * u.cosh(),
                    d1: a * u.sinh() / s,
                    d2: a * u.cosh() / (s * s),
                    d3: a * u.sinh() / (s * s * s),
                })
            }
            Warp::Power { s, k } => {
                let u = 1.0 + x * x / (s * s);
                let (u1, u2) = (2.0 * x / (s * s), 2.0 / (s * s));
                let p = |e: f64| u.powf(e);
                Ok(WarpJet {
                    r: p(*k),
                    d1: k * p(k - 1.0) * u1,
                    d2: k * (k - 1.0) * p(k - 2.0) * u1 * u1 + k * p(k - 1.0) * u2,
                    d3: k * (k - 1.0) * (k - 2.0) * p(k - 3.0) * u1.powi(3)
                        + 3.0 * k * (k - 1.0) * p(k - 2.0) * u1 * u2,
                })
            }
            Warp::Polynomial { coeffs } => Ok(polynomial_jet(coeffs, x)),
            Warp::Table(table) => table.jet(x),
        }
    }

    /// Sampled extent for tables; analytic warps are defined everywhere.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            Warp::Table(t) => Some((t.x[0], t.x[t.x.len() - 1])),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Warp::Quadratic { a, c } if !(*a > 0.0 && *c >= 0.0) => {
                Err(Error::Config(format!("quadratic warp needs a > 0 and c >= 0 (got a = {a}, c = {c})")))
            }
            Warp::Cosh { a, s } if !(*a > 0.0 && *s > 0.0) => {
                Err(Error::Config(format!("cosh warp needs a > 0 and s > 0 (got a = {a}, s = {s})")))
            }
            Warp::Power { s, k } if !(*s > 0.0 && *k > 0.0) => {
                Err(Error::Config(format!("power warp needs s > 0 and k > 0 (got s = {s}, k = {k})")))
            }
            Warp::Polynomial { coeffs } if coeffs.is_empty() => {
                Err(Error::Config("polynomial warp needs at least one coefficient".into()))
            }
            _ => Ok(()),
        }
    }
}

fn polynomial_jet(coeffs: &[f64], x: f64) -> WarpJet {
    // Horner on the value and its derivatives simultaneously.
    let (mut r, mut d1, mut d2, mut d3) = (0.0, 0.0, 0.0, 0.0);
    for &c in coeffs.iter().rev() {
        d3 = d3 * x + 3.0 * d2;
        d2 = d2 * x + 2.0 * d1;
        d1 = d1 * x + r;
        r = r * x + c;
    }
    WarpJet { r, d1, d2, d3 }
}

/// Natural cubic spline. Second derivatives at the knots are solved once at
/// construction; the third derivative is piecewise constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct SplineTable {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    r_star: Vec<f64>,
    r: Vec<f64>,
}

impl TryFrom<RawTable> for SplineTable {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        SplineTable::new(raw.r_star, raw.r)
    }
}

impl From<SplineTable> for RawTable {
    fn from(t: SplineTable) -> Self {
        RawTable { r_star: t.x, r: t.y }
    }
}

impl SplineTable {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Config(format!("warp table has {} abscissae but {} values", x.len(), y.len())));
        }
        if x.len() < 4 {
            return Err(Error::Config("warp table needs at least 4 samples".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("warp table abscissae must be strictly increasing".into()));
        }
        let n = x.len();
        // Tridiagonal system for the natural spline (m_0 = m_{n-1} = 0).
        let mut m = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            diag[i] = 2.0 * (h0 + h1);
            upper[i] = h1;
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        // Thomas sweep over interior unknowns 1..n-2.
        for i in 2..n - 1 {
            let h0 = x[i] - x[i - 1];
            let w = h0 / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for i in (1..n - 1).rev() {
            let next = if i + 1 < n - 1 { m[i + 1] } else { 0.0 };
            m[i] = (rhs[i] - upper[i] * next) / diag[i];
        }
        Ok(SplineTable { x, y, m })
    }

    pub fn jet(&self, t: f64) -> Result<WarpJet> {
        let n = self.x.len();
        if !(t >= self.x[0] && t <= self.x[n - 1]) {
            return Err(Error::Domain(format!("r_* = {t} outside warp table [{}, {}]", self.x[0], self.x[n - 1])));
        }
        let k = match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => (i - 1).min(n - 2),
        };
        let h = self.x[k + 1] - self.x[k];
        let a = (self.x[k + 1] - t) / h;
        let b = (t - self.x[k]) / h;
        let (m0, m1) = (self.m[k], self.m[k + 1]);
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let r = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2 = a * m0 + b * m1;
        let d3 = (m1 - m0) / h;
        Ok(WarpJet { r, d1, d2, d3 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_jet() {
        let j = Warp::unit_quadratic().jet(2.0).unwrap();
        assert_eq!((j.r, j.d1, j.d2, j.d3), (5.0, 4.0, 2.0, 0.0));
    }

    #[test]
    fn power_jet_matches_differences() {
        let w = Warp::Power { s: 1.5, k: 0.625 };
        let h = 1e-4;
        for &x in &[-4.0, -0.3, 0.0, 0.8, 6.0] {
            let j = w.jet(x).unwrap();
            let (m, p) = (w.jet(x - h).unwrap(), w.jet(x + h).unwrap());
            assert!((j.d1 - (p.r - m.r) / (2.0 * h)).abs() < 1e-7);
            assert!((j.d2 - (p.d1 - m.d1) / (2.0 * h)).abs() < 1e-7);
            assert!((j.d3 - (p.d2 - m.d2) / (2.0 * h)).abs() < 1e-7);
        }
        let q = Warp::Power { s: 1.0, k: 1.0 };
        assert_eq!(q.jet(2.0).unwrap(), Warp::unit_quadratic().jet(2.0).unwrap());
    }

    #[test]
    fn polynomial_matches_quadratic() {
        let p = Warp::Polynomial { coeffs: vec![1.0, 0.0, 1.0] };
        for &x in &[-3.0, -0.5, 0.0, 1.25, 7.0] {
            assert_eq!(p.jet(x).unwrap(), Warp::unit_quadratic().jet(x).unwrap());
        }
        let cubic = Warp::Polynomial { coeffs: vec![0.5, -1.0, 0.25, 2.0] };
        let j = cubic.jet(1.5).unwrap();
        assert!((j.r - (0.5 - 1.5 + 0.25 * 2.25 + 2.0 * 3.375)).abs() < 1e-14);
        assert!((j.d1 - (-1.0 + 0.5 * 1.5 + 6.0 * 2.25)).abs() < 1e-14);
        assert!((j.d2 - (0.5 + 12.0 * 1.5)).abs() < 1e-14);
        assert!((j.d3 - 12.0).abs() < 1e-14);
    }

    #[test]
    fn spline_reproduces_smooth_warp() {
        let xs: Vec<f64> = (0..=400).map(|i| -10.0 + 0.05 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + x * x).collect();
        let t = SplineTable::new(xs, ys).unwrap();
        let j = t.jet(0.3).unwrap();
        assert!((j.r - 1.09).abs() < 1e-6);
        assert!((j.d1 - 0.6).abs() < 1e-4);
        assert!((j.d2 - 2.0).abs() < 1e-3);
        assert!(t.jet(11.0).is_err());
    }

    #[test]
    fn table_validation() {
        assert!(SplineTable::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(SplineTable::new(vec![0.0, 2.0, 1.0, 3.0], vec![1.0; 4]).is_err());
        assert!(SplineTable::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0; 3]).is_err());
    }
}
