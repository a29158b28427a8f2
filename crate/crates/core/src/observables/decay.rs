use serde::{Deserialize, Serialize};

use crate::functionals::DiagnosticsRecord;

/// Tail fraction below which the accumulated Morawetz integral counts as
/// saturated.
pub const SATURATION_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalDecayReport {
    /// `morawetz_cum(t_end) / E(t_0)`.
    pub constant: f64,
    /// Share of `morawetz_cum(t_end)` accumulated over the last 10% of the run.
    pub tail_fraction: f64,
    pub saturated: bool,
    pub morawetz_cum: f64,
    pub energy: f64,
}

/// Reads the local decay constant off a diagnostics time series.
pub fn local_decay_report(records: &[DiagnosticsRecord]) -> LocalDecayReport {
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return LocalDecayReport { constant: 0.0, tail_fraction: 0.0, saturated: true, morawetz_cum: 0.0, energy: 0.0 };
    };
    let total = last.morawetz_cum;
    let cut = first.t + 0.9 * (last.t - first.t);
    // cumulative value at 0.9 T, interpolated between records
    let mut at_cut = total;
    for w in records.windows(2) {
        if w[0].t <= cut && cut <= w[1].t {
            let s = if w[1].t > w[0].t { (cut - w[0].t) / (w[1].t - w[0].t) } else { 1.0 };
            at_cut = w[0].morawetz_cum + s * (w[1].morawetz_cum - w[0].morawetz_cum);
            break;
        }
    }
    let tail_fraction = if total > 0.0 { (total - at_cut) / total } else { 0.0 };
    LocalDecayReport {
        constant: if first.e > 0.0 { total / first.e } else { 0.0 },
        tail_fraction,
        saturated: tail_fraction < SATURATION_THRESHOLD,
        morawetz_cum: total,
        energy: first.e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, cum: f64, e: f64) -> DiagnosticsRecord {
        DiagnosticsRecord { t, e, morawetz_cum: cum, ..Default::default() }
    }

    #[test]
    fn zero_data_is_saturated() {
        let r = local_decay_report(&[rec(1.0, 0.0, 0.0), rec(2.0, 0.0, 0.0)]);
        assert_eq!(r.constant, 0.0);
        assert!(r.saturated);
        assert!(local_decay_report(&[]).saturated);
    }

    #[test]
    fn tail_of_linear_growth() {
        let records: Vec<_> = (0..=10).map(|k| rec(1.0 + k as f64, k as f64, 2.0)).collect();
        let r = local_decay_report(&records);
        assert!((r.tail_fraction - 0.1).abs() < 1e-12);
        assert!(!r.saturated);
        assert!((r.constant - 5.0).abs() < 1e-12);
    }
}
