//! The cutoff `chi_alpha`: a smooth, compactly supported function that
//! dominates the positive parts of the trapping terms.
//!
//! Construction: let `[a, b]` be the hull of the scan samples where a
//! selected trapping term is positive, widened by one scan cell. The bump
//! equals `1.05 * max(trap)` on `[a, b]` and falls to zero through a quintic
//! smootherstep (C^2) over a margin of 20% of `b - a` on each side.

use serde::{Deserialize, Serialize};

use super::conditions::EDGE_FRACTION;
use super::{Background, PotentialSample, ScanDomain};
use crate::error::{Error, Result};

pub const MARGIN_FRACTION: f64 = 0.2;
pub const AMPLITUDE_FACTOR: f64 = 1.05;

/// Which trapping terms the cutoff must dominate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrapSelection {
    /// `2V + r_*V'`, `2V_L + r_*V_L'` and, when semilinear, `2f + r_*f'`.
    All,
    /// Only the angular term and, when semilinear, the nonlinear one.
    Angular,
}

impl TrapSelection {
    fn value(self, s: &PotentialSample, semilinear: bool) -> f64 {
        let f = if semilinear { s.trap_f } else { f64::NEG_INFINITY };
        match self {
            TrapSelection::All => s.trap_v.max(s.trap_vl).max(f),
            TrapSelection::Angular => s.trap_vl.max(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiAlpha {
    /// Plateau `[a, b]`.
    pub plateau: (f64, f64),
    pub margin: f64,
    pub amplitude: f64,
}

fn smootherstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

impl ChiAlpha {
    pub fn build(bg: &Background, scan: &ScanDomain) -> Result<Self> {
        Self::build_with(bg, scan, TrapSelection::All)
    }

    pub fn build_with(bg: &Background, scan: &ScanDomain, selection: TrapSelection) -> Result<Self> {
        let semilinear = bg.is_semilinear();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut peak: f64 = 0.0;
        for x in scan.points() {
            let t = selection.value(&bg.potentials(x)?, semilinear);
            if t > 0.0 {
                if scan.near_edge(x, EDGE_FRACTION) {
                    return Err(Error::ConditionViolation(format!(
                        "trapping term positive at r_* = {x}, near the edge of [{}, {}]; \
                         the positivity region is not compact",
                        scan.min, scan.max
                    )));
                }
                lo = lo.min(x);
                hi = hi.max(x);
                peak = peak.max(t);
            }
        }
        if peak == 0.0 {
            return Ok(ChiAlpha { plateau: (0.0, 0.0), margin: 0.0, amplitude: 0.0 });
        }
        let h = scan.step();
        let (a, b) = (lo - h, hi + h);
        Ok(ChiAlpha { plateau: (a, b), margin: MARGIN_FRACTION * (b - a), amplitude: AMPLITUDE_FACTOR * peak })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.plateau;
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let shape = if x < a {
            smootherstep((x - (a - self.margin)) / self.margin)
        } else if x > b {
            smootherstep(((b + self.margin) - x) / self.margin)
        } else {
            1.0
        };
        self.amplitude * shape
    }

    pub fn support(&self) -> (f64, f64) {
        (self.plateau.0 - self.margin, self.plateau.1 + self.margin)
    }

    pub fn sample(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.eval(x)).collect()
    }
}
