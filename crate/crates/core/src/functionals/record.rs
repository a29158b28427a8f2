use serde::Serialize;

use super::{
    angular_density, conformal_charge, conformal_growth_rhs, energy, energy_l_power, hardy_norm, l4_density,
    morawetz_density, weighted_lq, FunctionalContext,
};
use crate::error::Result;
use crate::evolve::{FieldState, Observer, WaveSystem};

pub const CSV_HEADER: &str =
    "t,E,E_L_eps,E_L_18eps,E_C,E_C_positive,dEC_dt_formula,morawetz_cum,angular_cum,L4_cum,L6_weighted,hardy";

/// One observer tick. `t` is the shifted time `1 + tau`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "E_L_eps")]
    pub e_l_eps: f64,
    #[serde(rename = "E_L_18eps")]
    pub e_l_18eps: f64,
    #[serde(rename = "E_C")]
    pub e_c: f64,
    #[serde(rename = "E_C_positive")]
    pub e_c_positive: f64,
    #[serde(rename = "dEC_dt_formula")]
    pub dec_dt_formula: f64,
    pub morawetz_cum: f64,
    pub angular_cum: f64,
    #[serde(rename = "L4_cum")]
    pub l4_cum: f64,
    #[serde(rename = "L6_weighted")]
    pub l6_weighted: f64,
    pub hardy: f64,
}

impl DiagnosticsRecord {
    /// Shortest round-trip decimal for every field.
    pub fn csv_row(&self) -> String {
        let v = [
            self.t,
            self.e,
            self.e_l_eps,
            self.e_l_18eps,
            self.e_c,
            self.e_c_positive,
            self.dec_dt_formula,
            self.morawetz_cum,
            self.angular_cum,
            self.l4_cum,
            self.l6_weighted,
            self.hardy,
        ];
        v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
    }
}

/// Instantaneous integrands of the three accumulators.
#[derive(Debug, Clone, Copy, Default)]
struct Integrands {
    morawetz: f64,
    angular: f64,
    l4: f64,
}

/// Observer that evaluates every functional at its cadence and integrates
/// the space-time accumulators in time with the trapezoid rule.
#[derive(Debug)]
pub struct DiagnosticsRecorder {
    ctx: FunctionalContext,
    cadence: usize,
    /// Evaluate the synthesis-based `L^4` and `L^6` terms.
    pointwise: bool,
    pub records: Vec<DiagnosticsRecord>,
    last: Option<(f64, Integrands)>,
}

impl DiagnosticsRecorder {
    pub fn new(ctx: FunctionalContext, cadence: usize) -> Self {
        DiagnosticsRecorder { ctx, cadence, pointwise: true, records: Vec::new(), last: None }
    }

    /// Skips the synthesis-based columns (reported as zero).
    pub fn without_pointwise(mut self) -> Self {
        self.pointwise = false;
        self
    }

    pub fn context(&self) -> &FunctionalContext {
        &self.ctx
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn record(&mut self, state: &FieldState, sys: &WaveSystem) -> Result<DiagnosticsRecord> {
        let t = state.t();
        let eps = self.ctx.epsilon;
        let (e_c, e_c_positive) = conformal_charge(state, sys, t);
        let now = Integrands {
            morawetz: morawetz_density(state, sys, &self.ctx),
            angular: angular_density(state, sys, &self.ctx),
            l4: if self.pointwise { l4_density(state, sys, &self.ctx)? } else { 0.0 },
        };
        let prev = self.records.last();
        let (mut morawetz_cum, mut angular_cum, mut l4_cum) =
            prev.map_or((0.0, 0.0, 0.0), |r| (r.morawetz_cum, r.angular_cum, r.l4_cum));
        if let Some((t_prev, before)) = self.last {
            let dt = t - t_prev;
            morawetz_cum += 0.5 * dt * (before.morawetz + now.morawetz);
            angular_cum += 0.5 * dt * (before.angular + now.angular);
            l4_cum += 0.5 * dt * (before.l4 + now.l4);
        }
        self.last = Some((t, now));
        let rec = DiagnosticsRecord {
            t,
            e: energy(state, sys),
            e_l_eps: energy_l_power(state, sys, eps),
            e_l_18eps: energy_l_power(state, sys, 18.0 * eps),
            e_c,
            e_c_positive,
            dec_dt_formula: conformal_growth_rhs(state, sys, t),
            morawetz_cum,
            angular_cum,
            l4_cum,
            l6_weighted: if self.pointwise { weighted_lq(state, sys, &self.ctx, 6.0)? } else { 0.0 },
            hardy: hardy_norm(state, sys, &self.ctx),
        };
        self.records.push(rec);
        Ok(rec)
    }
}

impl Observer for DiagnosticsRecorder {
    fn name(&self) -> &str {
        "diagnostics"
    }

    fn cadence(&self) -> usize {
        self.cadence
    }

    fn observe(&mut self, state: &FieldState, sys: &WaveSystem) -> Result<()> {
        self.record(state, sys).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::Background;
    use crate::evolve::{evolve_run, initial_data_bump, Boundary, BumpData, Launch, RadialGrid, SolverConfig};
    use crate::functionals::DEFAULT_EPSILON;
    use crate::harmonics::ModeSet;

    #[test]
    fn header_has_every_column() {
        assert_eq!(CSV_HEADER.split(',').count(), 12);
        let r = DiagnosticsRecord {
            t: 1.0,
            e: 0.5,
            e_l_eps: 0.0,
            e_l_18eps: 0.0,
            e_c: 0.0,
            e_c_positive: 0.0,
            dec_dt_formula: -1e-300,
            morawetz_cum: 0.0,
            angular_cum: 0.0,
            l4_cum: 0.0,
            l6_weighted: 0.0,
            hardy: 0.1,
        };
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), 12);
        let back: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(back[6], -1e-300);
        assert_eq!(back[11], 0.1);
    }

    #[test]
    fn accumulators_are_monotone_and_energy_conserved() {
        let grid = RadialGrid::new(-60.0, 60.0, 2401).unwrap();
        let bg = Background::schwarzschild(1.0).unwrap();
        let modes = ModeSet::new(2, None).unwrap();
        let sys = WaveSystem::new(&bg, &modes, grid, false).unwrap();
        let data = BumpData {
            center: 5.0,
            width: 1.5,
            amplitude: 1.0,
            mode_weights: vec![1.0, 0.5, 0.5],
            launch: Launch::Outgoing,
        };
        let s0 = initial_data_bump(&grid, &data).unwrap();
        let cfg = SolverConfig { dt: 0.025, t_end: 20.0, boundary: Boundary::DirichletTruncation, semilinear: false };
        let mut rec = DiagnosticsRecorder::new(FunctionalContext::new(&sys, DEFAULT_EPSILON).unwrap(), 40);
        evolve_run(&cfg, &sys, s0, &mut [&mut rec]).unwrap();
        assert_eq!(rec.records.len(), 21);
        for w in rec.records.windows(2) {
            assert!(w[1].morawetz_cum >= w[0].morawetz_cum);
            assert!(w[1].angular_cum >= w[0].angular_cum);
            assert!(w[1].l4_cum >= w[0].l4_cum);
        }
        let e0 = rec.records[0].e;
        let drift = rec.records.iter().map(|r| (r.e - e0).abs()).fold(0.0, f64::max) / e0;
        assert!(drift < 1e-4, "{drift}");
        assert!(rec.records.iter().all(|r| r.e_c_positive > 0.0 && r.e > 0.0));
    }
}
