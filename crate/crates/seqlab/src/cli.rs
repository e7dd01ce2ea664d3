//! The `seqlab` command line.

use std::f64::consts::PI;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qutrit_core::dissipative::{evolve_master, DensityMatrix, Trajectory};
use qutrit_core::pairwise::mixture_fringe_scan;
use qutrit_core::photostats::{
    estimate_g2_seeded, fit_fringe, readout_with_sequence, sample_shots, ReadoutTiming, ShotRecord, TimeBinPopulations,
};
use qutrit_core::qcore::{
    propagate_sequence, DriveSegment, Field, PulseSequence, QutritState, Segment, CANONICAL_BOUND_S,
};
use qutrit_core::ramsey::{fringe_scan, linspace, Backend, FringePoint, FringeScan, RamseyScanConfig};

use crate::config::{ConfigError, RunConfig};
use crate::dsl::{parse_sequence, ParseError, SequenceSource};
use crate::output::{
    self, read_record, read_rows, render_record, render_rows, write_atomic, Finite, FitRow, Format, G2Row, OutputError,
    RabiRow, ReadoutRow, ScanRow, ShotRow,
};
use crate::units::{self, Kind};

#[derive(Debug, Parser)]
#[command(name = "seqlab", version, about = "Simulate pulse sequences on a Rydberg qutrit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (`key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Pulse sequence file.
    #[arg(long, global = true, value_name = "PATH")]
    pub seq: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ramsey fringe: `|R1>` intensity against the `mu1` detuning.
    RamseyScan,
    /// Populations after a pi/2 `mu1` pulse and a `mu2` pulse of growing length.
    RabiScan {
        /// Also write the master-equation trajectory of the longest point.
        #[arg(long, value_name = "PATH")]
        trajectory: Option<PathBuf>,
    },
    /// Time-bin read-out probabilities.
    Readout,
    /// Zero-delay intensity correlation from shot records.
    G2 {
        /// Shot records to analyse; simulated from the read-out when absent.
        #[arg(long, value_name = "PATH")]
        records: Option<PathBuf>,
        /// Where to save the simulated shot records.
        #[arg(long, value_name = "PATH")]
        records_out: Option<PathBuf>,
    },
    /// Fit a fringe scan and report its visibility.
    Fit {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        /// Expected fringe period in delay units, e.g. `270ns`.
        #[arg(long)]
        hint: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Analytic,
    Unitary,
    Lindblad,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Analytic => Backend::Analytic,
            BackendArg::Unitary => Backend::Unitary,
            BackendArg::Lindblad => Backend::Lindblad,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: configuration, sequence, arguments or data files.
    #[error("{0}")]
    Validation(String),
    /// The computation itself failed.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<OutputError> for CliError {
    fn from(e: OutputError) -> Self {
        match e {
            OutputError::NonFinite(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<qutrit_core::Error> for CliError {
    fn from(e: qutrit_core::Error) -> Self {
        if is_numeric(&e) {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

fn is_numeric(e: &qutrit_core::Error) -> bool {
    use qutrit_core::Error as E;
    match e {
        E::Backend { source, .. } => is_numeric(source),
        E::StepUnderflow { .. }
        | E::PositivityViolation { .. }
        | E::TraceDrift { .. }
        | E::HermiticityViolation { .. }
        | E::UndefinedEstimate(_)
        | E::Singular => true,
        _ => false,
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}

/// Runs one parsed invocation. Diagnostics go to standard error.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(b) = cli.backend {
        cfg.backend = b.into();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let seq = match &cli.seq {
        Some(path) => {
            let src = SequenceSource::from_path(path).map_err(|e| io_error(path, e))?;
            Some(parse_sequence(&src)?)
        }
        None => None,
    };
    let default_format = match cli.command {
        Command::Fit { .. } => Format::Json,
        _ => Format::Csv,
    };
    let format = cli.format.or(cfg.format).unwrap_or(default_format);

    let bytes = match &cli.command {
        Command::RamseyScan => render_rows(&output::scan_rows(&ramsey_scan(&cfg, seq.as_ref())?), format)?,
        Command::RabiScan { trajectory } => {
            reject_seq(&seq, "rabi-scan")?;
            if let Some(path) = trajectory {
                let traj = rabi_trajectory(&cfg)?;
                let rows = trajectory_rows(&traj);
                write_artifact(Some(path), &render_rows(&rows, Format::detect(path, b""))?)?;
            }
            render_rows(&rabi_scan(&cfg)?, format)?
        }
        Command::Readout => {
            let (pops, seq) = readout(&cfg, seq.as_ref())?;
            report_duration(&seq);
            let rows: Vec<ReadoutRow> =
                (1..=3).map(|bin| ReadoutRow { bin, probability: pops.p[bin as usize - 1] }).collect();
            render_rows(&rows, format)?
        }
        Command::G2 { records, records_out } => {
            let shots = match records {
                Some(path) => {
                    if seq.is_some() {
                        return Err(CliError::Validation("`--seq` has no effect together with `--records`".into()));
                    }
                    load_shots(path)?
                }
                None => {
                    let (pops, _) = readout(&cfg, seq.as_ref())?;
                    sample_shots(&pops, &cfg.shot_config())?
                }
            };
            if let Some(path) = records_out {
                let rows: Vec<ShotRow> = shots.iter().map(ShotRow::from).collect();
                write_artifact(Some(path), &render_rows(&rows, Format::detect(path, b""))?)?;
            }
            let g = estimate_g2_seeded(&shots, cfg.shots.bin, cfg.seed)?;
            render_record(&G2Row::from(g), format)?
        }
        Command::Fit { input, hint } => {
            reject_seq(&seq, "fit")?;
            let hint = match hint {
                Some(text) => units::parse(text, Kind::Time).filter(|t| *t > 0.0).ok_or_else(|| {
                    CliError::Validation(format!("`--hint` expects {}, found `{text}`", Kind::Time.describe()))
                })?,
                None => cfg.fit_t_total.unwrap_or_else(|| cfg.ramsey_config().t_total()),
            };
            let scan = load_scan(input, cfg.i0, cfg.backend)?;
            let fit = fit_fringe(&scan, hint)?;
            if fit.frequency_warning {
                eprintln!("warning: fitted period is far from the hint");
            }
            if !fit.converged {
                eprintln!("warning: fit did not converge");
            }
            render_record(&FitRow::from(fit), format)?
        }
    };
    write_artifact(cli.out.as_deref(), &bytes)
}

fn reject_seq(seq: &Option<PulseSequence>, command: &str) -> Result<(), CliError> {
    match seq {
        Some(_) => Err(CliError::Validation(format!("`{command}` does not take `--seq`"))),
        None => Ok(()),
    }
}

fn write_artifact(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, bytes).map_err(|e| io_error(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::Validation(format!("stdout: {e}")))
        }
    }
}

/// Scan settings from the config, with the control pulses of `seq` if one
/// is given. `seq` must look like `mu1; [mu2]; [wait]; mu1; readouts...`.
pub fn ramsey_settings(cfg: &RunConfig, seq: Option<&PulseSequence>) -> Result<RamseyScanConfig, CliError> {
    let mut scan = cfg.ramsey_config();
    let Some(seq) = seq else { return Ok(scan) };
    let (control, _) = seq.split_at_readout();
    let shape_error = || {
        CliError::Validation(format!(
            "sequence `{}` is not a Ramsey sequence (expected `mu1`, optional `mu2`, optional `wait`, `mu1`)",
            seq.label
        ))
    };
    let (first, rest) = match control {
        [Segment::Drive(d), rest @ ..] if d.field == Field::Mu1 => (d, rest),
        _ => return Err(shape_error()),
    };
    let (mu2, rest) = match rest {
        [Segment::Drive(d), rest @ ..] if d.field == Field::Mu2 => (Some(d), rest),
        _ => (None, rest),
    };
    let (wait, rest) = match rest {
        [Segment::Wait(t), rest @ ..] => (*t, rest),
        _ => (0.0, rest),
    };
    match rest {
        [Segment::Drive(d)] if d.field == Field::Mu1 && d.duration == first.duration => {}
        _ => return Err(shape_error()),
    }
    scan.t_mu1 = first.duration;
    scan.omega_mu2 = mu2.map_or(0.0, |d| d.rabi);
    scan.t_mu2 = mu2.map_or(0.0, |d| d.duration);
    scan.detuning_mu2 = mu2.map_or(0.0, |d| d.detuning);
    scan.dead_time = wait;
    Ok(scan)
}

pub fn ramsey_scan(cfg: &RunConfig, seq: Option<&PulseSequence>) -> Result<FringeScan, CliError> {
    let scan = ramsey_settings(cfg, seq)?;
    let interactions = cfg.interactions()?;
    if interactions.p2 > 0.0 {
        Ok(mixture_fringe_scan(&scan, &interactions)?)
    } else {
        Ok(fringe_scan(&scan)?)
    }
}

fn rabi_sequence(cfg: &RunConfig, t_mu2: f64) -> Result<PulseSequence, CliError> {
    let mut segments = vec![Segment::Drive(DriveSegment::with_area(Field::Mu1, PI / 2.0, cfg.rabi.t_mu1)?)];
    if t_mu2 > 0.0 {
        segments.push(DriveSegment::resonant(Field::Mu2, cfg.rabi.rabi_mu2, t_mu2)?.into());
    }
    Ok(PulseSequence::new("rabi", segments)?)
}

fn control_populations(cfg: &RunConfig, seq: &PulseSequence) -> Result<DensityMatrix, CliError> {
    match cfg.backend {
        Backend::Analytic | Backend::Unitary => {
            Ok(DensityMatrix::from(propagate_sequence(&QutritState::ground(), seq)?))
        }
        Backend::Lindblad => {
            let rho0 = DensityMatrix::from_state(&QutritState::ground());
            let traj = evolve_master(&rho0, seq, &cfg.dissipation, &cfg.integrator)?;
            Ok(*traj.final_state())
        }
    }
}

pub fn rabi_scan(cfg: &RunConfig) -> Result<Vec<RabiRow>, CliError> {
    linspace(0.0, cfg.rabi.t_max, cfg.rabi.points)
        .into_iter()
        .map(|t| {
            let rho = control_populations(cfg, &rabi_sequence(cfg, t)?)?;
            Ok(RabiRow { t_mu2_s: t, p1: rho.population(0), p2: rho.population(1), p3: rho.population(2) })
        })
        .collect()
}

fn rabi_trajectory(cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let seq = rabi_sequence(cfg, cfg.rabi.t_max)?;
    let rho0 = DensityMatrix::from_state(&QutritState::ground());
    Ok(evolve_master(&rho0, &seq, &cfg.dissipation, &cfg.integrator)?)
}

/// One sample of a master-equation trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub time_s: f64,
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    #[serde(rename = "P3")]
    pub p3: f64,
    #[serde(rename = "P_loss")]
    pub p_loss: f64,
    pub re_rho12: f64,
    pub im_rho12: f64,
    pub re_rho13: f64,
    pub im_rho13: f64,
    pub re_rho23: f64,
    pub im_rho23: f64,
}

impl Finite for TrajectoryRow {
    fn check_finite(&self) -> Result<(), OutputError> {
        let all = [
            self.time_s,
            self.p1,
            self.p2,
            self.p3,
            self.p_loss,
            self.re_rho12,
            self.im_rho12,
            self.re_rho13,
            self.im_rho13,
            self.re_rho23,
            self.im_rho23,
        ];
        if all.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(OutputError::NonFinite("trajectory"))
        }
    }
}

pub fn trajectory_rows(traj: &Trajectory) -> Vec<TrajectoryRow> {
    traj.samples
        .iter()
        .map(|s| {
            let [c12, c13, c23] = s.rho.coherences();
            TrajectoryRow {
                time_s: s.time,
                p1: s.rho.population(0),
                p2: s.rho.population(1),
                p3: s.rho.population(2),
                p_loss: s.rho.loss(),
                re_rho12: c12.re,
                im_rho12: c12.im,
                re_rho13: c13.re,
                im_rho13: c13.im,
                re_rho23: c23.re,
                im_rho23: c23.im,
            }
        })
        .collect()
}

/// Runs the control part of `seq` (or the default preparation: pi/2 on
/// `mu1`, then the configured `mu2` pulse) and reads out the time bins.
/// Returns the populations and the full sequence that was run.
pub fn readout(cfg: &RunConfig, seq: Option<&PulseSequence>) -> Result<(TimeBinPopulations, PulseSequence), CliError> {
    let full = match seq {
        Some(seq) => {
            if !seq.has_readout() {
                return Err(CliError::Validation(format!("sequence `{}` has no `readout` statement", seq.label)));
            }
            seq.clone()
        }
        None => {
            let r = &cfg.ramsey;
            let mut prep =
                PulseSequence::new("readout", vec![DriveSegment::with_area(Field::Mu1, PI / 2.0, r.t_mu1)?.into()])?;
            if r.t_mu2 > 0.0 {
                prep.push(DriveSegment::new(Field::Mu2, r.rabi_mu2, r.detuning_mu2, 0.0, r.t_mu2)?);
            }
            prep.concat(&ReadoutTiming::default().sequence()?)
        }
    };
    let (control, tail) = full.split_at_readout();
    let rho = if control.is_empty() {
        DensityMatrix::from_state(&QutritState::ground())
    } else {
        control_populations(cfg, &PulseSequence::new(full.label.clone(), control.to_vec())?)?
    };
    let tail = PulseSequence::new(full.label.clone(), tail.to_vec())?;
    let dephasing = (cfg.readout_dephasing > 0.0).then_some(cfg.readout_dephasing);
    let pops = readout_with_sequence(rho, &tail, cfg.eta, dephasing)?;
    Ok((pops, full))
}

fn report_duration(seq: &PulseSequence) {
    let total = seq.total_duration();
    let relation = if seq.within_canonical_bound() { "<" } else { ">=" };
    eprintln!(
        "sequence `{}`: {} segments, total duration {} {relation} {}",
        seq.label,
        seq.len(),
        units::format(total, Kind::Time),
        units::format(CANONICAL_BOUND_S, Kind::Time)
    );
}

fn read_input(path: &Path) -> Result<(Vec<u8>, Format), CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    let format = Format::detect(path, &bytes);
    Ok((bytes, format))
}

pub fn load_scan(path: &Path, i0: f64, provenance: Backend) -> Result<FringeScan, CliError> {
    let (bytes, format) = read_input(path)?;
    let rows: Vec<ScanRow> =
        read_rows(&bytes, format).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let points = rows.iter().map(|r| FringePoint { delta: r.delta_rad_s, intensity: r.intensity }).collect();
    Ok(FringeScan { points, i0, provenance })
}

pub fn load_shots(path: &Path) -> Result<Vec<ShotRecord>, CliError> {
    let (bytes, format) = read_input(path)?;
    let rows: Vec<ShotRow> =
        read_rows(&bytes, format).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(rows.iter().map(ShotRecord::from).collect())
}

/// Reads a single fit record, as written by `fit`.
pub fn load_fit(path: &Path) -> Result<FitRow, CliError> {
    let (bytes, format) = read_input(path)?;
    read_record(&bytes, format).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}
