use serde::{Deserialize, Serialize};

use crate::background::ChiAlpha;
use crate::error::{Error, Result};

/// `int_0^{b x} (1 + |tau|)^{-sigma} d tau`, bounded by `1 / (sigma - 1)`.
pub fn g_weight(x: f64, sigma: f64, b: f64) -> f64 {
    let y = b * x.abs();
    let v = if (sigma - 1.0).abs() < 1e-12 { y.ln_1p() } else { (1.0 - (1.0 + y).powf(1.0 - sigma)) / (sigma - 1.0) };
    v.copysign(x)
}

/// `g'` of [`g_weight`].
pub fn g_weight_derivative(x: f64, sigma: f64, b: f64) -> f64 {
    b / (1.0 + b * x.abs()).powf(sigma)
}

/// Smooth step from 1 on `[0, 1]` to 0 beyond 2, via `exp(-1/u)` gluing.
fn cutoff_profile(x: f64) -> f64 {
    let u = x.abs() - 1.0;
    if u <= 0.0 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    b / (a + b)
}

/// `chi_check(10 r_* / (1 + t))`: one for `|r_*| <= (1+t)/10`, zero beyond
/// `(1+t)/5`.
pub fn lightcone_cutoff(r_star: f64, t: f64) -> f64 {
    cutoff_profile(10.0 * r_star / (1.0 + t))
}

fn phi_a(xi: f64, eps: f64) -> f64 {
    (1.0 + xi * xi).powf(-(1.0 - eps) / 4.0)
}

fn phi_a_derivative(xi: f64, eps: f64) -> f64 {
    -0.5 * (1.0 - eps) * xi * (1.0 + xi * xi).powf(-(1.0 - eps) / 4.0 - 1.0)
}

/// A scalar weight, either of position or of the radial frequency `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiplierSpec {
    GSigma {
        sigma: f64,
        b: f64,
        center: f64,
    },
    /// `g(lambda^m (r_* - center))`.
    GModulated {
        sigma: f64,
        b: f64,
        center: f64,
        lambda: f64,
        m: f64,
    },
    PhiA {
        eps: f64,
    },
    PhiB {
        eps: f64,
    },
    PhiC {
        eps: f64,
    },
    /// Indicator of `|xi| <= 1`.
    SharpNear,
    /// Indicator of `lambda^{-delta} <= |xi| <= 1`.
    Psi {
        delta: f64,
        lambda: f64,
    },
    XDown {
        b: f64,
    },
    XDownTilde,
    XUp {
        sigma: f64,
        b: f64,
    },
    ChiAlpha(ChiAlpha),
    Lightcone {
        t: f64,
    },
}

impl MultiplierSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        match *self {
            MultiplierSpec::GSigma { sigma, b, .. }
            | MultiplierSpec::GModulated { sigma, b, .. }
            | MultiplierSpec::XUp { sigma, b } => super::check_sigma_b(sigma, b),
            MultiplierSpec::PhiA { eps } | MultiplierSpec::PhiB { eps } | MultiplierSpec::PhiC { eps }
                if !(eps > 0.0 && eps < 1.0) =>
            {
                bad(format!("epsilon must lie in (0, 1), got {eps}"))
            }
            MultiplierSpec::Psi { delta, lambda } if !(delta > 0.0) || !(lambda >= 1.0) => {
                bad(format!("Psi needs delta > 0 and lambda >= 1, got {delta}, {lambda}"))
            }
            MultiplierSpec::XDown { b } if !(b > 0.0) => bad(format!("b must be positive, got {b}")),
            _ => Ok(()),
        }
    }

    /// True for the functions of `xi` that depend on `|xi|` only.
    pub fn is_even(&self) -> bool {
        matches!(
            self,
            MultiplierSpec::PhiA { .. }
                | MultiplierSpec::PhiB { .. }
                | MultiplierSpec::PhiC { .. }
                | MultiplierSpec::SharpNear
                | MultiplierSpec::Psi { .. }
                | MultiplierSpec::XDown { .. }
                | MultiplierSpec::XDownTilde
                | MultiplierSpec::Lightcone { .. }
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            MultiplierSpec::GSigma { sigma, b, center } => g_weight(x - center, *sigma, *b),
            MultiplierSpec::GModulated { sigma, b, center, lambda, m } => {
                g_weight(lambda.powf(*m) * (x - center), *sigma, *b)
            }
            MultiplierSpec::PhiA { eps } => phi_a(x, *eps),
            MultiplierSpec::PhiB { eps } => x * phi_a_derivative(x, *eps),
            MultiplierSpec::PhiC { eps } => {
                let a = phi_a(x, *eps);
                (a * (a + 2.0 * x * phi_a_derivative(x, *eps))).max(0.0).sqrt()
            }
            MultiplierSpec::SharpNear => f64::from(u8::from(x.abs() <= 1.0)),
            MultiplierSpec::Psi { delta, lambda } => {
                f64::from(u8::from(x.abs() <= 1.0 && x.abs() >= lambda.powf(-delta)))
            }
            MultiplierSpec::XDown { b } => b / (1.0 + b * x.abs()).powi(2),
            MultiplierSpec::XDownTilde => 1.0 / (1.0 + x * x),
            MultiplierSpec::XUp { sigma, b } => (x * g_weight(x, *sigma, *b)).sqrt().copysign(x),
            MultiplierSpec::ChiAlpha(chi) => chi.eval(x),
            MultiplierSpec::Lightcone { t } => lightcone_cutoff(x, *t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_values() {
        assert_eq!(g_weight(0.0, 2.0, 1.0), 0.0);
        assert!((g_weight(1.0, 2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((g_weight(-1.0, 2.0, 1.0) + 0.5).abs() < 1e-15);
        for sigma in [1.5, 2.0, 3.0] {
            for x in [-1e6, -3.0, 0.1, 40.0, 1e9] {
                assert!(g_weight(x, sigma, 0.7).abs() <= 1.0 / (sigma - 1.0));
            }
        }
        // derivative by central difference
        let (s, b) = (2.5, 0.8);
        for x in [-2.0, 0.3, 5.0] {
            let fd = (g_weight(x + 1e-6, s, b) - g_weight(x - 1e-6, s, b)) / 2e-6;
            assert!((fd - g_weight_derivative(x, s, b)).abs() < 1e-7);
        }
    }

    #[test]
    fn phase_localizers() {
        let a = MultiplierSpec::PhiA { eps: 0.1 };
        assert_eq!(a.eval(0.0), 1.0);
        let c = MultiplierSpec::PhiC { eps: 0.1 };
        for xi in [0.0, 0.5, 3.0, 100.0] {
            // Phi_c = Phi_a sqrt((1 + eps xi^2) / (1 + xi^2)) >= sqrt(eps) Phi_a
            let expect = a.eval(xi) * ((1.0 + 0.1 * xi * xi) / (1.0 + xi * xi)).sqrt();
            assert!((c.eval(xi) - expect).abs() < 1e-14);
            assert!(c.eval(xi) >= 0.1f64.sqrt() * a.eval(xi) - 1e-15);
        }
        let b = MultiplierSpec::PhiB { eps: 0.1 };
        assert!(b.eval(2.0) < 0.0 && b.eval(0.0) == 0.0);
        let psi = MultiplierSpec::Psi { delta: 0.25, lambda: 16.0 };
        assert_eq!(psi.eval(0.4), 0.0);
        assert_eq!(psi.eval(0.6), 1.0);
        assert_eq!(psi.eval(1.1), 0.0);
    }

    #[test]
    fn x_functions_cover() {
        // X_tilde_down^2 + X_up^2 stays away from zero
        let (s, b) = (2.0, 1.0);
        let mut lo = f64::INFINITY;
        for k in -2000..=2000 {
            let x = k as f64 * 0.05;
            let v = MultiplierSpec::XDownTilde.eval(x).powi(2) + MultiplierSpec::XUp { sigma: s, b }.eval(x).powi(2);
            lo = lo.min(v);
        }
        assert!(lo > 0.1);
        assert!(MultiplierSpec::XUp { sigma: s, b }.eval(-2.0) < 0.0);
    }

    #[test]
    fn lightcone_support() {
        for t in [0.0, 9.0, 99.0] {
            assert_eq!(lightcone_cutoff(0.0, t), 1.0);
            assert_eq!(lightcone_cutoff((1.0 + t) / 10.0, t), 1.0);
            assert_eq!(lightcone_cutoff((1.0 + t) / 5.0 + 1e-9, t), 0.0);
            let mid = lightcone_cutoff(0.15 * (1.0 + t), t);
            assert!(mid > 0.0 && mid < 1.0);
        }
        assert!(MultiplierSpec::PhiA { eps: 1.5 }.validate().is_err());
        assert!(MultiplierSpec::GSigma { sigma: 0.5, b: 1.0, center: 0.0 }.validate().is_err());
    }
}
