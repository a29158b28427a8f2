//! Run configuration: flat TOML sections, validated in full at parse time.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::background::{Background, ScanDomain, SplineTable, Warp};
use crate::error::{Error, Result};
use crate::evolve::{initial_data_bump, Boundary, BumpData, Launch, RadialGrid, SolverConfig, MAX_CFL};
use crate::harmonics::{Mode, ModeSet};
use crate::observables::{check_sigma_b, full_phase_indices, Centering, PhaseParams, TestSubspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundKind {
    Schwarzschild,
    Warped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarpKind {
    Quadratic,
    Cosh,
    Power,
    Polynomial,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundBlock {
    pub kind: BackgroundKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warp: Option<WarpKind>,
    /// Quadratic `r = a + c r_*^2`, cosh `r = a cosh(r_* / s)`,
    /// power `r = (1 + r_*^2 / s^2)^k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_r_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_r: Option<Vec<f64>>,
    /// Nonlinearity exponent; absent means linear.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ModesBlock {
    #[serde(default)]
    pub l_max: usize,
    /// Custom angular spectrum replacing `l(l+1)`, one value per mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub r_min: f64,
    pub r_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

impl Default for GridBlock {
    fn default() -> Self {
        GridBlock { r_min: -100.0, r_max: 100.0, n: Some(2001), h: None }
    }
}

pub const DEFAULT_CFL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub semilinear: bool,
}

fn default_t_end() -> f64 {
    100.0
}

impl Default for SolverBlock {
    fn default() -> Self {
        SolverBlock { dt: None, cfl: None, t_end: default_t_end(), semilinear: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatesBlock {
    pub sigma: f64,
    pub b: f64,
    /// Values of `b` tried by `verify-morawetz`; defaults to `[b]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_scan: Option<Vec<f64>>,
    pub epsilon: f64,
    /// Defaults to `epsilon`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Bootstrap constant weighting the energies in the combined norm.
    pub bootstrap_n: f64,
    /// Share of the grid excluded at each end from the certification subspace.
    pub boundary_margin: f64,
    pub coarsening: usize,
    pub centering: Centering,
    pub phase_modes: Vec<usize>,
    /// Random static states per mode for the energy-bound ratios.
    pub samples: usize,
    pub seed: u64,
    /// Shifted time `1 + tau` after which conformal-charge growth is judged.
    pub t_ref: f64,
    /// Allowed growth factor of bounded quantities after `t_ref`.
    pub growth_limit: f64,
    /// Allowed `max(high l) / max(low l)` of the energy-bound ratios.
    pub ratio_growth_limit: f64,
    /// Largest tail share for a saturated accumulator.
    pub saturation_limit: f64,
    /// Largest final-half share of a convergent space-time integral.
    pub tail_limit: f64,
}

impl Default for EstimatesBlock {
    fn default() -> Self {
        EstimatesBlock {
            sigma: 2.0,
            b: 1.0,
            b_scan: None,
            epsilon: 0.1,
            delta: None,
            bootstrap_n: 16.0,
            boundary_margin: 0.1,
            coarsening: 2,
            centering: Centering::PerMode,
            phase_modes: vec![5, 10, 20],
            samples: 100,
            seed: 0,
            t_ref: 20.0,
            growth_limit: 3.0,
            ratio_growth_limit: 2.0,
            saturation_limit: 0.01,
            tail_limit: 0.05,
        }
    }
}

impl EstimatesBlock {
    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(self.epsilon)
    }

    pub fn b_values(&self) -> Vec<f64> {
        self.b_scan.clone().unwrap_or_else(|| vec![self.b])
    }

    pub fn phase_params(&self) -> PhaseParams {
        PhaseParams { sigma: self.sigma, b: self.b, delta: self.delta(), epsilon: self.epsilon }
    }

    pub fn subspace(&self) -> Result<TestSubspace> {
        TestSubspace::new(self.boundary_margin, self.coarsening)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataBlock {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
    /// One weight per mode; defaults to all ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_weights: Option<Vec<f64>>,
    pub launch: Launch,
}

impl Default for DataBlock {
    fn default() -> Self {
        DataBlock { center: 0.0, width: 2.0, amplitude: 1.0, mode_weights: None, launch: Launch::TimeSymmetric }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: PathBuf,
    /// Steps between diagnostics rows.
    pub cadence: usize,
    pub formats: Vec<Format>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: PathBuf::from("out"), cadence: 10, formats: vec![Format::Csv, Format::Json] }
    }
}

impl OutputBlock {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// `r_*` window for `potential` and `check`; defaults to the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub background: BackgroundBlock,
    #[serde(default)]
    pub modes: ModesBlock,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub estimates: EstimatesBlock,
    #[serde(default)]
    pub data: DataBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanBlock>,
}

/// Every object a subcommand needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub background: Background,
    pub modes: ModeSet,
    pub grid: RadialGrid,
    pub solver: SolverConfig,
    pub data: BumpData,
    pub scan: ScanDomain,
    pub subspace: TestSubspace,
    pub phase: PhaseParams,
}

fn field(name: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| {
        let msg = match e {
            Error::Config(m) | Error::Parameter(m) | Error::Domain(m) | Error::Contract(m) => m,
            other => other.to_string(),
        };
        Error::Config(format!("{name}: {msg}"))
    }
}

fn invalid(name: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{name}: {msg}"))
}

fn location(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| location(text, s.start));
        Error::Parse { line, column, message: e.message().trim().to_string() }
    })?;
    cfg.resolve()?;
    Ok(cfg)
}

impl RunConfig {
    /// Effective Courant number `dt / h`.
    pub fn cfl(&self) -> Result<f64> {
        let r = self.resolve()?;
        Ok(r.solver.cfl(&r.grid))
    }

    fn build_background(&self) -> Result<Background> {
        let b = &self.background;
        let bg = match b.kind {
            BackgroundKind::Schwarzschild => {
                for (name, set) in [
                    ("warp", b.warp.is_some()),
                    ("a", b.a.is_some()),
                    ("c", b.c.is_some()),
                    ("s", b.s.is_some()),
                    ("k", b.k.is_some()),
                    ("coeffs", b.coeffs.is_some()),
                    ("table_r_star", b.table_r_star.is_some()),
                    ("table_r", b.table_r.is_some()),
                ] {
                    if set {
                        return Err(invalid(&format!("background.{name}"), "only applies to kind = \"warped\""));
                    }
                }
                Background::schwarzschild(b.mass.unwrap_or(1.0)).map_err(field("background.mass"))?
            }
            BackgroundKind::Warped => {
                if b.mass.is_some() {
                    return Err(invalid("background.mass", "only applies to kind = \"schwarzschild\""));
                }
                let warp = match b.warp.unwrap_or(WarpKind::Quadratic) {
                    WarpKind::Quadratic => Warp::Quadratic { a: b.a.unwrap_or(1.0), c: b.c.unwrap_or(1.0) },
                    WarpKind::Cosh => Warp::Cosh { a: b.a.unwrap_or(1.0), s: b.s.unwrap_or(1.0) },
                    WarpKind::Power => Warp::Power {
                        s: b.s.unwrap_or(1.0),
                        k: b.k.ok_or_else(|| invalid("background.k", "required for warp = \"power\""))?,
                    },
                    WarpKind::Polynomial => Warp::Polynomial {
                        coeffs: b
                            .coeffs
                            .clone()
                            .ok_or_else(|| invalid("background.coeffs", "required for warp = \"polynomial\""))?,
                    },
                    WarpKind::Table => {
                        let (Some(x), Some(y)) = (b.table_r_star.clone(), b.table_r.clone()) else {
                            return Err(invalid(
                                "background.table_r_star",
                                "table_r_star and table_r are required for warp = \"table\"",
                            ));
                        };
                        Warp::Table(SplineTable::new(x, y).map_err(field("background.table_r"))?)
                    }
                };
                warp.validate().map_err(field("background.warp"))?;
                Background::warped(warp).map_err(field("background.warp"))?
            }
        };
        match b.p {
            Some(p) => bg.with_nonlinearity(p).map_err(field("background.p")),
            None => Ok(bg),
        }
    }

    fn build_grid(&self) -> Result<RadialGrid> {
        let g = &self.grid;
        let grid = match (g.n, g.h) {
            (Some(_), Some(_)) => return Err(invalid("grid.h", "give either n or h, not both")),
            (None, Some(h)) if !(h > 0.0) => return Err(invalid("grid.h", format!("must be positive, got {h}"))),
            (None, Some(h)) => RadialGrid::with_spacing(g.r_min, g.r_max, h),
            (n, None) => RadialGrid::new(g.r_min, g.r_max, n.unwrap_or(2001)),
        };
        grid.map_err(field("grid"))
    }

    /// Step size: explicit `dt`, or the largest `dt <= cfl h` with a step
    /// count that is a multiple of the output cadence.
    fn build_solver(&self, grid: &RadialGrid, modes: &ModeSet, bg: &Background) -> Result<SolverConfig> {
        let s = &self.solver;
        let cadence = self.output.cadence;
        if !(s.t_end >= 0.0 && s.t_end.is_finite()) {
            return Err(invalid("solver.t_end", format!("must be finite and nonnegative, got {}", s.t_end)));
        }
        let dt = match (s.dt, s.cfl) {
            (Some(_), Some(_)) => return Err(invalid("solver.cfl", "give either dt or cfl, not both")),
            (Some(dt), None) => dt,
            (None, cfl) => {
                let cfl = cfl.unwrap_or(DEFAULT_CFL);
                if !(cfl > 0.0 && cfl <= MAX_CFL) {
                    return Err(invalid("solver.cfl", format!("must satisfy 0 < cfl <= {MAX_CFL}, got {cfl}")));
                }
                let base = cfl * grid.h();
                if s.t_end == 0.0 {
                    base
                } else {
                    let blocks = (s.t_end / (base * cadence as f64)).ceil().max(1.0);
                    s.t_end / (blocks * cadence as f64)
                }
            }
        };
        let solver =
            SolverConfig { dt, t_end: s.t_end, boundary: Boundary::DirichletTruncation, semilinear: s.semilinear };
        if solver.cfl(grid) > MAX_CFL {
            return Err(invalid(
                "solver.dt",
                format!("cfl = dt/h = {:.4} must satisfy cfl <= {MAX_CFL}", solver.cfl(grid)),
            ));
        }
        if s.semilinear && !modes.is_radial() {
            return Err(invalid(
                "solver.semilinear",
                "the semilinear coupling is radial only and requires modes.l_max = 0",
            ));
        }
        solver.validate(grid, modes, bg).map_err(field("solver"))?;
        let steps = solver.steps().map_err(field("solver.t_end"))?;
        if steps > 0 && steps % cadence != 0 {
            return Err(invalid("output.cadence", format!("{cadence} does not divide the step count {steps}")));
        }
        Ok(solver)
    }

    fn check_estimates(&self) -> Result<()> {
        let e = &self.estimates;
        check_sigma_b(e.sigma, e.b).map_err(field("estimates.sigma/b"))?;
        if !(e.epsilon > 0.0 && e.epsilon < 1.0) {
            return Err(invalid("estimates.epsilon", format!("must lie in (0, 1), got {}", e.epsilon)));
        }
        full_phase_indices(e.delta()).map_err(field("estimates.delta"))?;
        if let Some(bs) = &e.b_scan {
            if bs.is_empty() {
                return Err(invalid("estimates.b_scan", "must not be empty"));
            }
            for &b in bs {
                check_sigma_b(e.sigma, b).map_err(field("estimates.b_scan"))?;
            }
        }
        if !(e.bootstrap_n >= 1.0 && e.bootstrap_n.is_finite()) {
            return Err(invalid("estimates.bootstrap_n", format!("must be at least 1, got {}", e.bootstrap_n)));
        }
        for (name, v) in [("growth_limit", e.growth_limit), ("ratio_growth_limit", e.ratio_growth_limit)] {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(invalid(&format!("estimates.{name}"), format!("must be at least 1, got {v}")));
            }
        }
        for (name, v) in [("saturation_limit", e.saturation_limit), ("tail_limit", e.tail_limit)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(&format!("estimates.{name}"), format!("must lie in (0, 1), got {v}")));
            }
        }
        if !(e.t_ref >= 1.0 && e.t_ref.is_finite()) {
            return Err(invalid("estimates.t_ref", format!("shifted time starts at 1, got {}", e.t_ref)));
        }
        if e.phase_modes.is_empty() {
            return Err(invalid("estimates.phase_modes", "must not be empty"));
        }
        if e.samples == 0 {
            return Err(invalid("estimates.samples", "must be positive"));
        }
        Ok(())
    }

    /// Validates every block and builds the run objects.
    pub fn resolve(&self) -> Result<Resolved> {
        if self.output.cadence == 0 {
            return Err(invalid("output.cadence", "must be positive"));
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats", "must name at least one of \"csv\", \"json\""));
        }
        let background = self.build_background()?;
        let modes = ModeSet::new(self.modes.l_max, self.modes.spectrum.as_deref()).map_err(field("modes"))?;
        let grid = self.build_grid()?;
        let solver = self.build_solver(&grid, &modes, &background)?;
        self.check_estimates()?;
        let subspace = self.estimates.subspace().map_err(field("estimates.boundary_margin/coarsening"))?;

        let d = &self.data;
        let mode_weights = match &d.mode_weights {
            Some(w) if w.len() != modes.len() => {
                return Err(invalid("data.mode_weights", format!("{} weights for {} modes", w.len(), modes.len())))
            }
            Some(w) => w.clone(),
            None => vec![1.0; modes.len()],
        };
        if !d.amplitude.is_finite() || mode_weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("data.amplitude", "amplitude and weights must be finite"));
        }
        let data =
            BumpData { center: d.center, width: d.width, amplitude: d.amplitude, mode_weights, launch: d.launch };
        initial_data_bump(&grid, &data).map_err(field("data"))?;

        let scan = match self.scan {
            Some(s) => ScanDomain::new(s.min, s.max, s.n).map_err(field("scan"))?,
            None => ScanDomain::new(grid.r_min, grid.r_max, grid.n.clamp(16, 20001)).map_err(field("scan"))?,
        };
        Ok(Resolved { background, modes, grid, solver, data, scan, subspace, phase: self.estimates.phase_params() })
    }
}

impl Resolved {
    pub fn mode_list(&self) -> &[Mode] {
        self.modes.modes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[background]\nkind = \"schwarzschild\"\nmass = 1.0\n\n[modes]\nl_max = 2\n";

    #[test]
    fn minimal_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.estimates.sigma, 2.0);
        assert_eq!(cfg.estimates.epsilon, 0.1);
        assert_eq!(cfg.estimates.delta(), 0.1);
        assert_eq!(cfg.solver.cfl, None);
        let r = cfg.resolve().unwrap();
        let cfl = r.solver.cfl(&r.grid);
        assert!(cfl <= DEFAULT_CFL && cfl > 0.99 * DEFAULT_CFL, "cfl {cfl}");
        assert!((cfg.cfl().unwrap() - cfl).abs() < 1e-15);
    }

    #[test]
    fn cfl_bound() {
        let err = parse_config(&format!("{MINIMAL}\n[solver]\ncfl = 1.5\n")).unwrap_err();
        assert!(matches!(&err, Error::Config(m) if m.contains("solver.cfl") && m.contains("0.9")), "{err}");
    }

    #[test]
    fn semilinear_is_radial_only() {
        let text = "[background]\nkind = \"warped\"\np = 2.9\n[modes]\nl_max = 3\n[solver]\nsemilinear = true\n";
        let err = parse_config(text).unwrap_err();
        assert!(matches!(&err, Error::Config(m) if m.contains("solver.semilinear")), "{err}");
    }

    #[test]
    fn unknown_key_has_location() {
        let err = parse_config("[background]\nkind = \"schwarzschild\"\nmas = 1.0\n").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3, "{message}");
                assert!(message.contains("mas"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn syntax_error_location() {
        let err = parse_config("[background]\nkind = \n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn sigma_must_exceed_one() {
        let err = parse_config(&format!("{MINIMAL}\n[estimates]\nsigma = 0.5\n")).unwrap_err();
        assert!(matches!(&err, Error::Config(m) if m.contains("sigma")), "{err}");
    }

    #[test]
    fn mass_on_warped_is_rejected() {
        assert!(parse_config("[background]\nkind = \"warped\"\nmass = 1.0\n").is_err());
        assert!(parse_config("[background]\nkind = \"schwarzschild\"\nwarp = \"cosh\"\n").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = parse_config(MINIMAL).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
