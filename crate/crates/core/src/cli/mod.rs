//! Command-line orchestration: configuration, subcommand dispatch and
//! deterministic CSV/JSON artifacts.
//!
//! Exit status: 0 on success, 1 when a certification or a declared bound
//! fails (or a run breaks down numerically), 2 on a configuration error.

pub mod config;
pub mod estimates;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{parse_config, Format, Resolved, RunConfig};
pub use estimates::{estimate_table, log_log_slope, slopes, EstimateRow, Slopes, Status};

use crate::background::{check_conditions_with_spectrum, ConditionReport, Peak, PotentialSample, ScanDomain};
use crate::error::{Error, Result};
use crate::evolve::{evolve_run, initial_data_bump, random_state, RandomStateSpec, WaveSystem};
use crate::functionals::{DiagnosticsRecord, DiagnosticsRecorder, FunctionalContext};
use crate::harmonics::Mode;
use crate::observables::{
    certify_phase, local_decay_report, scan_b, BScanReport, EnergyBoundRatio, LocalDecayReport, PhaseCertification,
    PhaseParams, PhaseWorkbench,
};

#[derive(Debug, Parser)]
#[command(name = "rwlab", version, about = "Wave equations on black-hole and warped-product backgrounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, overriding `[output] dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the potentials and locate the effective-potential peaks.
    Potential(RunArgs),
    /// Check the admissibility conditions of the background.
    Check(RunArgs),
    /// Evolve the configured pulse and record every diagnostic.
    Evolve(RunArgs),
    /// Certify positivity of the Morawetz commutator over a scan of b.
    VerifyMorawetz(RunArgs),
    /// Certify the phase-space commutator and sample energy bounds.
    VerifyPhase(RunArgs),
    /// Evolve and test accumulator saturation and boundedness.
    VerifyEstimates(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Potential,
    Check,
    Evolve,
    VerifyMorawetz,
    VerifyPhase,
    VerifyEstimates,
}

impl Command {
    pub fn split(&self) -> (Task, &RunArgs) {
        match self {
            Command::Potential(a) => (Task::Potential, a),
            Command::Check(a) => (Task::Check, a),
            Command::Evolve(a) => (Task::Evolve, a),
            Command::VerifyMorawetz(a) => (Task::VerifyMorawetz, a),
            Command::VerifyPhase(a) => (Task::VerifyPhase, a),
            Command::VerifyEstimates(a) => (Task::VerifyEstimates, a),
        }
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.passed => EXIT_OK,
        Ok(_) => EXIT_FAILED,
        Err(Error::Config(_) | Error::Parameter(_) | Error::Parse { .. } | Error::Io { .. }) => EXIT_CONFIG,
        Err(_) => EXIT_FAILED,
    }
}

/// Reads, validates and runs one subcommand.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let (task, args) = cli.command.split();
    load(&args.config).and_then(|cfg| dispatch(task, &cfg, args.out.as_deref()))
}

/// [`execute`] with reporting; returns the exit status.
pub fn run(cli: &Cli) -> i32 {
    let result = execute(cli);
    match &result {
        Ok(o) => {
            // a closed pipe on stdout is not an error of the run
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", o.summary);
            for f in &o.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    exit_code(&result)
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Runs `task`; `out` overrides the configured output directory.
pub fn dispatch(task: Task, cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let resolved = cfg.resolve()?;
    let mut writer = Writer::new(out.map_or_else(|| cfg.output.dir.clone(), Path::to_path_buf), cfg);
    let (passed, summary) = match task {
        Task::Potential => potential(cfg, &resolved, &mut writer)?,
        Task::Check => check(cfg, &resolved, &mut writer)?,
        Task::Evolve => evolve(cfg, &resolved, &mut writer)?,
        Task::VerifyMorawetz => verify_morawetz(cfg, &resolved, &mut writer)?,
        Task::VerifyPhase => verify_phase(cfg, &resolved, &mut writer)?,
        Task::VerifyEstimates => verify_estimates(cfg, &resolved, &mut writer)?,
    };
    Ok(Outcome { passed, files: writer.files, summary })
}

struct Writer<'a> {
    dir: PathBuf,
    cfg: &'a RunConfig,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(dir: PathBuf, cfg: &'a RunConfig) -> Self {
        Writer { dir, cfg, files: Vec::new() }
    }

    fn write(&mut self, format: Format, name: &str, contents: &str) -> Result<()> {
        if !self.cfg.output.wants(format) {
            return Ok(());
        }
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    /// Pretty JSON with the configuration echoed under `config`.
    fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'b, T> {
            config: &'b RunConfig,
            #[serde(flatten)]
            body: &'b T,
        }
        let text = serde_json::to_string_pretty(&Doc { config: self.cfg, body })
            .map_err(|e| Error::Contract(format!("serialising {name}: {e}")))?;
        self.write(Format::Json, name, &(text + "\n"))
    }
}

#[derive(Debug, Clone, Serialize)]
struct PeakRow {
    l: usize,
    lt2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    area_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tortoise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn peak_row(r: &Resolved, l: usize, lt2: f64, peak: Result<Peak>) -> PeakRow {
    let with_value = peak.and_then(|p| Ok((p, r.background.potentials(p.tortoise)?.effective(lt2))));
    match with_value {
        Ok((p, v)) => PeakRow {
            l,
            lt2,
            area_radius: Some(p.area_radius),
            tortoise: Some(p.tortoise),
            value: Some(v),
            error: None,
        },
        Err(e) => PeakRow { l, lt2, area_radius: None, tortoise: None, value: None, error: Some(e.to_string()) },
    }
}

fn potential(_cfg: &RunConfig, r: &Resolved, w: &mut Writer) -> Result<(bool, String)> {
    let mut csv = String::from(PotentialSample::CSV_HEADER);
    csv.push('\n');
    for x in r.scan.points() {
        csv.push_str(&r.background.potentials(x)?.csv_row());
        csv.push('\n');
    }
    w.write(Format::Csv, "potential.csv", &csv)?;

    #[derive(Serialize)]
    struct Peaks<'b> {
        scan: &'b ScanDomain,
        peaks: Vec<PeakRow>,
        #[serde(skip_serializing_if = "Option::is_none")]
        asymptotic: Option<Peak>,
    }
    let peaks: Vec<PeakRow> = r
        .mode_list()
        .iter()
        .map(|m| peak_row(r, m.l, m.lt2, r.background.effective_potential_peak(m.lt2, &r.scan)))
        .collect();
    let asymptotic = r.background.asymptotic_peak(&r.scan).ok();
    let located = peaks.iter().filter(|p| p.error.is_none()).count();
    w.json("peaks.json", &Peaks { scan: &r.scan, peaks, asymptotic })?;
    Ok((true, format!("potential: {} samples, {located}/{} peaks located", r.scan.n, r.modes.len())))
}

fn check(_cfg: &RunConfig, r: &Resolved, w: &mut Writer) -> Result<(bool, String)> {
    let spectrum: Vec<f64> = r.mode_list().iter().map(|m| m.lt2).collect();
    let report = check_conditions_with_spectrum(&r.background, &r.scan, &spectrum);
    let failed: Vec<u8> = report.failures().map(|o| o.condition).collect();
    #[derive(Serialize)]
    struct Doc<'b> {
        passed: bool,
        report: &'b ConditionReport,
    }
    w.json("conditions.json", &Doc { passed: failed.is_empty(), report: &report })?;
    let summary = if failed.is_empty() {
        "check: no condition fails".to_string()
    } else {
        format!("check: conditions {failed:?} fail")
    };
    Ok((failed.is_empty(), summary))
}

/// Runs the configured pulse with the diagnostics observer.
fn run_diagnostics(cfg: &RunConfig, r: &Resolved) -> Result<(Vec<DiagnosticsRecord>, String, bool)> {
    let sys = WaveSystem::new(&r.background, &r.modes, r.grid, r.solver.semilinear)?;
    let initial = initial_data_bump(&r.grid, &r.data)?;
    let ctx = FunctionalContext::new(&sys, cfg.estimates.epsilon)?;
    let pointwise = r.modes.is_sphere();
    let mut rec = DiagnosticsRecorder::new(ctx, cfg.output.cadence);
    if !pointwise {
        rec = rec.without_pointwise();
    }
    evolve_run(&r.solver, &sys, initial, &mut [&mut rec])?;
    let csv = rec.to_csv();
    Ok((rec.records, csv, pointwise))
}

#[derive(Debug, Clone, Serialize)]
struct RunSummary {
    steps: usize,
    dt: f64,
    cfl: f64,
    records: usize,
    #[serde(rename = "final")]
    last: DiagnosticsRecord,
    slopes: Slopes,
    local_decay: LocalDecayReport,
}

fn run_summary(r: &Resolved, records: &[DiagnosticsRecord]) -> Result<RunSummary> {
    Ok(RunSummary {
        steps: r.solver.steps()?,
        dt: r.solver.dt,
        cfl: r.solver.cfl(&r.grid),
        records: records.len(),
        last: records.last().copied().unwrap_or_default(),
        slopes: slopes(records),
        local_decay: local_decay_report(records),
    })
}

fn evolve(cfg: &RunConfig, r: &Resolved, w: &mut Writer) -> Result<(bool, String)> {
    let (records, csv, _) = run_diagnostics(cfg, r)?;
    w.write(Format::Csv, "diagnostics.csv", &csv)?;
    let summary = run_summary(r, &records)?;
    w.json("summary.json", &summary)?;
    Ok((true, format!("evolve: {} steps, {} records, final E = {:e}", summary.steps, summary.records, summary.last.e)))
}

fn verify_morawetz(cfg: &RunConfig, r: &Resolved, w: &mut Writer) -> Result<(bool, String)> {
    let est = &cfg.estimates;
    let report = scan_b(&r.background, r.mode_list(), &r.grid, est.sigma, &est.b_values(), est.centering, &r.subspace)?;
    let certified: Vec<f64> = report.rows.iter().filter(|row| row.all_certified).map(|row| row.b).collect();
    #[derive(Serialize)]
    struct Doc<'b> {
        passed: bool,
        certified_b: &'b [f64],
        scan: &'b BScanReport,
    }
    let passed = !certified.is_empty();
    w.json("morawetz.json", &Doc { passed, certified_b: &certified, scan: &report })?;
    let mut s = format!("verify-morawetz: {} of {} b values certify every mode", certified.len(), report.rows.len());
    if let Some(b) = report.chosen {
        let _ = write!(s, "; b = {b} also meets the uniformity threshold");
    }
    Ok((passed, s))
}

/// Mode of angular index `l`, from the custom spectrum when one is set.
fn phase_mode(cfg: &RunConfig, r: &Resolved, l: usize) -> Result<Mode> {
    match &cfg.modes.spectrum {
        None => Ok(Mode::sphere(l)),
        Some(_) => r
            .mode_list()
            .get(l)
            .copied()
            .ok_or_else(|| Error::Config(format!("estimates.phase_modes: index {l} is outside the spectrum"))),
    }
}

#[derive(Debug, Clone, Serialize)]
struct RatioTrend {
    low_max: f64,
    high_max: f64,
    ratio: f64,
    limit: f64,
    passed: bool,
}

fn ratio_trend(per_l: &[(usize, f64)], limit: f64) -> RatioTrend {
    let mut sorted = per_l.to_vec();
    sorted.sort_by_key(|p| p.0);
    let half = sorted.len().div_ceil(2);
    let low_max = sorted[..half].iter().fold(0.0f64, |m, p| m.max(p.1));
    let high_max = sorted[half..].iter().fold(0.0f64, |m, p| m.max(p.1));
    let ratio = if low_max > 0.0 {
        high_max / low_max
    } else if high_max > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    RatioTrend { low_max, high_max, ratio, limit, passed: ratio <= limit }
}

fn verify_phase(cfg: &RunConfig, r: &Resolved, w: &mut Writer) -> Result<(bool, String)> {
    let est = &cfg.estimates;
    let modes = est.phase_modes.iter().map(|&l| phase_mode(cfg, r, l)).collect::<Result<Vec<_>>>()?;
    let wb = PhaseWorkbench::new(&r.background, r.grid, r.phase)?;
    let certs = modes
        .par_iter()
        .map(|m| certify_phase(&wb, &r.background, m, &r.subspace))
        .collect::<Result<Vec<PhaseCertification>>>()?;

    let length = r.grid.length();
    let spec = RandomStateSpec {
        region: (r.grid.r_min + 0.25 * length, r.grid.r_max - 0.25 * length),
        moving: false,
        ..RandomStateSpec::default()
    };
    let n = r.grid.n;
    let states = (0..est.samples)
        .map(|k| Ok(random_state(&r.grid, 1, &spec, est.seed.wrapping_add(k as u64))?.phi[0][1..n - 1].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let ratios = modes
        .par_iter()
        .map(|m| wb.energy_bound_ratios(&r.background, m, &states))
        .collect::<Result<Vec<Vec<EnergyBoundRatio>>>>()?;
    let per_l: Vec<(usize, f64)> =
        ratios.iter().zip(&modes).map(|(rs, m)| (m.l, rs.iter().fold(0.0f64, |a, x| a.max(x.max_ratio)))).collect();
    let trend = ratio_trend(&per_l, est.ratio_growth_limit);
    let certified = certs.iter().all(|c| c.result.certified());

    #[derive(Serialize)]
    struct Doc<'b> {
        passed: bool,
        params: PhaseParams,
        certifications: &'b [PhaseCertification],
        energy_bound_ratios: Vec<EnergyBoundRatio>,
        ratio_trend: &'b RatioTrend,
    }
    let passed = certified && trend.passed;
    w.json(
        "phase.json",
        &Doc {
            passed,
            params: r.phase,
            certifications: &certs,
            energy_bound_ratios: ratios.concat(),
            ratio_trend: &trend,
        },
    )?;
    let ok = certs.iter().filter(|c| c.result.certified()).count();
    Ok((
        passed,
        format!(
            "verify-phase: {ok}/{} modes certified; energy-bound ratio trend {:.3} (limit {})",
            certs.len(),
            trend.ratio,
            trend.limit
        ),
    ))
}

fn verify_estimates(cfg: &RunConfig, r: &Resolved, w: &mut Writer) -> Result<(bool, String)> {
    let (records, csv, pointwise) = run_diagnostics(cfg, r)?;
    w.write(Format::Csv, "diagnostics.csv", &csv)?;
    let table = estimate_table(&records, &cfg.estimates, pointwise);
    let failed: Vec<&str> =
        table.iter().filter(|row| row.status == Status::Fail).map(|row| row.estimate.as_str()).collect();
    #[derive(Serialize)]
    struct Doc<'b> {
        passed: bool,
        #[serde(flatten)]
        run: RunSummary,
        estimates: &'b [EstimateRow],
    }
    let passed = failed.is_empty();
    w.json("estimates.json", &Doc { passed, run: run_summary(r, &records)?, estimates: &table })?;
    let summary = if passed {
        format!(
            "verify-estimates: all {} judged rows hold",
            table.iter().filter(|x| matches!(x.status, Status::Pass)).count()
        )
    } else {
        format!("verify-estimates: {failed:?} violated")
    };
    Ok((passed, summary))
}

#[cfg(test)]
mod end_to_end;
