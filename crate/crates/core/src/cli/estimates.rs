//! Saturation and boundedness analysis of a diagnostics time series.

use serde::Serialize;

use super::config::EstimatesBlock;
use crate::functionals::DiagnosticsRecord;
use crate::observables::local_decay_report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub estimate: String,
    pub quantity: String,
    pub value: f64,
    pub bound: f64,
    pub status: Status,
}

impl EstimateRow {
    fn judged(estimate: &str, quantity: &str, value: f64, bound: f64) -> Self {
        let status = if value <= bound { Status::Pass } else { Status::Fail };
        EstimateRow { estimate: estimate.into(), quantity: quantity.into(), value, bound, status }
    }

    fn skipped(estimate: &str, quantity: &str, bound: f64) -> Self {
        EstimateRow {
            estimate: estimate.into(),
            quantity: quantity.into(),
            value: f64::NAN,
            bound,
            status: Status::NotApplicable,
        }
    }
}

/// Value of `f` at time `t`, linear between records.
pub fn value_at(records: &[DiagnosticsRecord], t: f64, f: impl Fn(&DiagnosticsRecord) -> f64) -> Option<f64> {
    let first = records.first()?;
    if t <= first.t {
        return (t == first.t).then(|| f(first));
    }
    records.windows(2).find(|w| w[0].t <= t && t <= w[1].t).map(|w| {
        let s = if w[1].t > w[0].t { (t - w[0].t) / (w[1].t - w[0].t) } else { 1.0 };
        f(&w[0]) + s * (f(&w[1]) - f(&w[0]))
    })
}

/// Share of the final value accumulated after `t_from`.
pub fn tail_share(records: &[DiagnosticsRecord], t_from: f64, f: impl Fn(&DiagnosticsRecord) -> f64 + Copy) -> f64 {
    let (Some(last), Some(at)) = (records.last(), value_at(records, t_from, f)) else {
        return 0.0;
    };
    let total = f(last);
    if total > 0.0 {
        (total - at) / total
    } else {
        0.0
    }
}

/// Least-squares slope of `ln f` against `ln t` over the second half of the
/// run, skipping non-positive values.
pub fn log_log_slope(records: &[DiagnosticsRecord], f: impl Fn(&DiagnosticsRecord) -> f64) -> Option<f64> {
    let (first, last) = (records.first()?, records.last()?);
    let mid = 0.5 * (first.t + last.t);
    let pts: Vec<(f64, f64)> =
        records.iter().filter(|r| r.t >= mid && f(r) > 0.0).map(|r| (r.t.ln(), f(r).ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slopes {
    #[serde(rename = "E_C")]
    pub e_c: Option<f64>,
    #[serde(rename = "L6_weighted")]
    pub l6_weighted: Option<f64>,
    pub hardy: Option<f64>,
}

pub fn slopes(records: &[DiagnosticsRecord]) -> Slopes {
    Slopes {
        e_c: log_log_slope(records, |r| r.e_c),
        l6_weighted: log_log_slope(records, |r| r.l6_weighted),
        hardy: log_log_slope(records, |r| r.hardy),
    }
}

/// `N^{1/2} E(0) + sup E_C + N^{9/4} sup E[L^{18 eps}]` at every record.
pub fn bootstrap_norm(records: &[DiagnosticsRecord], n: f64) -> Vec<f64> {
    let Some(first) = records.first() else { return Vec::new() };
    let (mut sup_c, mut sup_l) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    records
        .iter()
        .map(|r| {
            sup_c = sup_c.max(r.e_c);
            sup_l = sup_l.max(r.e_l_18eps);
            n.sqrt() * first.e + sup_c + n.powf(2.25) * sup_l
        })
        .collect()
}

/// The estimates table. `pointwise` says whether the `L^4` and `L^6`
/// columns were evaluated.
pub fn estimate_table(records: &[DiagnosticsRecord], est: &EstimatesBlock, pointwise: bool) -> Vec<EstimateRow> {
    let mut rows = Vec::new();
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return rows;
    };
    let span = last.t - first.t;
    let sat = est.saturation_limit;

    let decay = local_decay_report(records);
    rows.push(EstimateRow::judged(
        "local_decay",
        "morawetz_cum tail share over the last 10%",
        decay.tail_fraction,
        sat,
    ));
    rows.push(EstimateRow {
        estimate: "local_decay_constant".into(),
        quantity: "morawetz_cum / E(0)".into(),
        value: decay.constant,
        bound: f64::INFINITY,
        status: Status::Info,
    });
    let angular = tail_share(records, first.t + 0.9 * span, |r| r.angular_cum);
    rows.push(EstimateRow::judged("angular_decay", "angular_cum tail share over the last 10%", angular, sat));

    let growth = est.growth_limit;
    let ec_quantity = "max E_C after t_ref / E_C(t_ref)";
    match value_at(records, est.t_ref, |r| r.e_c) {
        Some(reference) if last.t > est.t_ref => {
            let peak = records.iter().filter(|r| r.t >= est.t_ref).fold(reference, |m, r| m.max(r.e_c));
            let ratio = if reference > 0.0 {
                peak / reference
            } else if peak > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            rows.push(EstimateRow::judged("conformal_bound", ec_quantity, ratio, growth));
        }
        _ => rows.push(EstimateRow::skipped("conformal_bound", ec_quantity, growth)),
    }

    let l6_quantity = "max of L6_weighted t^4 / E_C^3 over the last half of [t_ref, T] / over the first half";
    let monitor: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.t >= est.t_ref && r.e_c > 0.0)
        .map(|r| (r.t, r.l6_weighted * r.t.powi(4) / r.e_c.powi(3)))
        .collect();
    if pointwise && monitor.len() >= 4 {
        let mid = 0.5 * (monitor[0].0 + monitor[monitor.len() - 1].0);
        let early = monitor.iter().filter(|p| p.0 <= mid).fold(0.0f64, |m, p| m.max(p.1));
        let late = monitor.iter().filter(|p| p.0 > mid).fold(0.0f64, |m, p| m.max(p.1));
        let ratio = if early > 0.0 {
            late / early
        } else if late > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        rows.push(EstimateRow::judged("l6_decay", l6_quantity, ratio, growth));
    } else {
        rows.push(EstimateRow::skipped("l6_decay", l6_quantity, growth));
    }

    let l4_quantity = "L4_cum share from the final half of the run";
    if pointwise {
        let share = tail_share(records, first.t + 0.5 * span, |r| r.l4_cum);
        rows.push(EstimateRow::judged("spacetime_l4", l4_quantity, share, est.tail_limit));
    } else {
        rows.push(EstimateRow::skipped("spacetime_l4", l4_quantity, est.tail_limit));
    }

    let norm = bootstrap_norm(records, est.bootstrap_n);
    let (n0, n1) = (norm[0], norm[norm.len() - 1]);
    let ratio = if n0 > 0.0 {
        n1 / n0
    } else if n1 > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    rows.push(EstimateRow::judged("bootstrap_norm", "combined norm squared at T / at the start", ratio, growth));

    let drift = if first.e > 0.0 { (last.e - first.e).abs() / first.e } else { 0.0 };
    rows.push(EstimateRow {
        estimate: "energy_drift".into(),
        quantity: "|E(T) - E(0)| / E(0)".into(),
        value: drift,
        bound: f64::INFINITY,
        status: Status::Info,
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            e: 1.0,
            e_c: 2.0,
            l6_weighted: t.powi(-4),
            morawetz_cum: 1.0 - 1.0 / t,
            ..Default::default()
        }
    }

    #[test]
    fn slope_of_power_law() {
        let records: Vec<_> = (1..=100).map(|k| rec(k as f64)).collect();
        let s = log_log_slope(&records, |r| r.l6_weighted).unwrap();
        assert!((s + 4.0).abs() < 1e-12);
        assert_eq!(log_log_slope(&records, |r| r.l4_cum), None);
    }

    #[test]
    fn interpolation_and_tail() {
        let records: Vec<_> =
            (1..=3).map(|k| DiagnosticsRecord { t: k as f64, l4_cum: k as f64, ..Default::default() }).collect();
        assert_eq!(value_at(&records, 2.5, |r| r.l4_cum), Some(2.5));
        assert_eq!(value_at(&records, 0.5, |r| r.l4_cum), None);
        assert!((tail_share(&records, 2.0, |r| r.l4_cum) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bounded_series_passes() {
        let records: Vec<_> = (1..=200).map(|k| rec(k as f64)).collect();
        let rows = estimate_table(&records, &EstimatesBlock::default(), true);
        let get = |name: &str| rows.iter().find(|r| r.estimate == name).unwrap().clone();
        assert_eq!(get("conformal_bound").status, Status::Pass);
        assert_eq!(get("l6_decay").status, Status::Pass);
        assert_eq!(get("bootstrap_norm").status, Status::Pass);
        // 1 - 1/t gains about 0.5% of its value over the last 10% of t in [1, 200]
        assert_eq!(get("local_decay").status, Status::Pass);
        let none = estimate_table(&records, &EstimatesBlock::default(), false);
        assert!(none.iter().any(|r| r.estimate == "spacetime_l4" && r.status == Status::NotApplicable));
    }
}
