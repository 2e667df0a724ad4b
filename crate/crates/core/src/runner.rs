//! Run orchestration and tabular output.
//!
//! A run directory holds:
//!
//! * `snapshot_KKK.tsv`: a `#` header (`scenario_hash`, `t`, `L`, `N`, `h`,
//!   `x_left`), a column line, then `x<TAB>n` rows with 17 significant digits;
//! * `timeseries.tsv`: `t mass min max max_abs_rhs`;
//! * `manifest.ini`: run information as comments followed by the canonical
//!   scenario, so the manifest itself is a valid scenario file.
//!
//! Negative densities from round-off are written as 0; the smallest value
//! before clamping is recorded in the manifest.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};

use crate::adaptive::{AdaptiveDynamics, Enlargement};
use crate::diagnostics::total_mass;
use crate::error::{Error, Result};
use crate::grid::{DensityField, Grid};
use crate::integrate::{integrate, Dynamics, Event, Observer, RateFunction, SolverState};
use crate::kernel::sample_initial;
use crate::rhs::{DirectRhs, SampledKernels};
use crate::scenario::{RhsPath, Scenario};
use crate::spectral::{self, SpectralWorkspace};

/// The right-hand side selected by a scenario.
#[derive(Debug, Clone)]
pub enum Model {
    Direct(DirectRhs),
    Spectral(SpectralWorkspace),
    Adaptive(AdaptiveDynamics),
}

impl Model {
    pub fn build(s: &Scenario, initial: &DensityField) -> Result<Model> {
        let grid = initial.grid();
        if s.adaptive_enabled {
            return Ok(Model::Adaptive(AdaptiveDynamics::new(
                initial,
                &s.kernels,
                s.quadrature,
                s.boundary,
                s.stepper,
                s.adaptive,
            )?));
        }
        match s.path {
            RhsPath::Direct => {
                let ws = SampledKernels::new(&s.kernels, grid, s.quadrature)?;
                Ok(Model::Direct(DirectRhs::new(ws, s.boundary)))
            }
            RhsPath::Spectral => {
                spectral::check_eligible(&s.kernels, s.boundary)?;
                Ok(Model::Spectral(SpectralWorkspace::new(&s.kernels, grid)?))
            }
        }
    }

    pub fn enlargements(&self) -> &[Enlargement] {
        match self {
            Model::Adaptive(a) => a.enlargements(),
            _ => &[],
        }
    }
}

impl RateFunction for Model {
    fn rate(&mut self, values: &[f64], out: &mut [f64]) {
        match self {
            Model::Direct(m) => m.rate(values, out),
            Model::Spectral(m) => m.rate(values, out),
            Model::Adaptive(m) => m.rate(values, out),
        }
    }
}

impl Dynamics for Model {
    fn after_step(&mut self, state: &mut SolverState, dt: f64) -> Result<()> {
        match self {
            Model::Direct(m) => m.after_step(state, dt),
            Model::Spectral(m) => m.after_step(state, dt),
            Model::Adaptive(m) => m.after_step(state, dt),
        }
    }
}

/// Initial field of a scenario on its starting grid.
pub fn initial_field(s: &Scenario) -> Result<DensityField> {
    sample_initial(&s.initial, &s.grid()?, s.mirror)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub mass: f64,
    pub min: f64,
    pub max: f64,
    pub max_abs_rhs: f64,
}

/// Everything a run produced, including partial results of a failed run.
#[derive(Debug)]
pub struct Simulation {
    pub scenario: Scenario,
    pub hash: String,
    /// Snapshot states in the order of the configured times.
    pub snapshots: Vec<SolverState>,
    pub series: Vec<SeriesRow>,
    /// Steps completed.
    pub steps: u64,
    pub evaluations: u64,
    pub enlargements: Vec<Enlargement>,
    /// Smallest density seen at any recorded state, before clamping.
    pub min_value: f64,
    /// Why the run stopped early, if it did.
    pub failure: Option<Error>,
}

impl Simulation {
    pub fn status(&self) -> String {
        match &self.failure {
            None => "completed".into(),
            Some(Error::Divergence { step, t }) => format!("diverged at step {step} (t = {t})"),
            Some(Error::Resource(m)) => format!("resource limit: {m}"),
            Some(e) => format!("failed: {e}"),
        }
    }

    /// The last snapshot taken.
    pub fn last_snapshot(&self) -> Option<&SolverState> {
        self.snapshots.last()
    }

    /// Turn a recorded failure into an error.
    pub fn into_result(mut self) -> Result<Simulation> {
        match self.failure.take() {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

struct Recorder {
    every: u64,
    series: Vec<SeriesRow>,
    buf: Vec<f64>,
    min_value: f64,
    steps: u64,
    last_row: Option<u64>,
}

impl Recorder {
    fn row(&mut self, state: &SolverState, dynamics: &mut dyn Dynamics) {
        if self.last_row == Some(state.step) {
            return;
        }
        let v = state.field.values();
        self.buf.resize(v.len(), 0.0);
        dynamics.rate(v, &mut self.buf);
        let (min, max) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(*x), hi.max(*x))
            });
        self.series.push(SeriesRow {
            t: state.t,
            mass: total_mass(&state.field),
            min,
            max,
            max_abs_rhs: self.buf.iter().fold(0.0, |m, x| f64::max(m, x.abs())),
        });
        self.last_row = Some(state.step);
    }
}

impl Observer for Recorder {
    fn observe(
        &mut self,
        event: Event,
        state: &SolverState,
        dynamics: &mut dyn Dynamics,
    ) -> Result<()> {
        let lo = state
            .field
            .values()
            .iter()
            .fold(f64::INFINITY, |m, x| m.min(*x));
        self.min_value = self.min_value.min(lo);
        match event {
            Event::Snapshot(_) => self.row(state, dynamics),
            Event::Step => {
                self.steps = state.step;
                if state.step % self.every == 0 {
                    self.row(state, dynamics);
                }
            }
        }
        Ok(())
    }
}

/// Run a scenario in memory.
///
/// Invalid scenarios are errors. Failures during integration (divergence,
/// resource caps) are returned inside the `Simulation` together with
/// everything recorded up to that point.
pub fn simulate(s: &Scenario) -> Result<Simulation> {
    s.validate()?;
    if s.path == RhsPath::Spectral && s.initial.is_discontinuous() {
        warn!(
            "discontinuous {} initial condition on the spectral path: expect Gibbs ringing",
            s.initial.kind()
        );
    }
    let initial = initial_field(s)?;
    let mut model = Model::build(s, &initial)?;
    let cfg = s.integration()?;
    let mut rec = Recorder {
        every: s.output.series_every,
        series: Vec::new(),
        buf: Vec::new(),
        min_value: f64::INFINITY,
        steps: 0,
        last_row: None,
    };
    let start = SolverState::new(initial);
    rec.observe(Event::Step, &start, &mut model)?;

    let mut snapshots = Vec::new();
    let (evaluations, failure) = match integrate(
        start,
        &mut model,
        &cfg,
        s.stepper,
        &mut SnapshotTap {
            inner: &mut rec,
            snapshots: &mut snapshots,
        },
    ) {
        Ok(record) => {
            rec.steps = record.final_state.step;
            (record.evaluations, None)
        }
        Err(e) => {
            warn!("run `{}` stopped: {e}", s.name);
            (rec.steps * s.stepper.evaluations_per_step(), Some(e))
        }
    };
    info!(
        "run `{}`: {} steps, {evaluations} evaluations",
        s.name, rec.steps
    );
    Ok(Simulation {
        scenario: s.clone(),
        hash: s.hash(),
        snapshots,
        series: rec.series,
        steps: rec.steps,
        evaluations,
        enlargements: model.enlargements().to_vec(),
        min_value: rec.min_value,
        failure,
    })
}

/// Keeps snapshot states even if the run later fails.
struct SnapshotTap<'a> {
    inner: &'a mut Recorder,
    snapshots: &'a mut Vec<SolverState>,
}

impl Observer for SnapshotTap<'_> {
    fn observe(
        &mut self,
        event: Event,
        state: &SolverState,
        dynamics: &mut dyn Dynamics,
    ) -> Result<()> {
        if let Event::Snapshot(_) = event {
            self.snapshots.push(state.clone());
        }
        self.inner.observe(event, state, dynamics)
    }
}

/// Output directory: explicit override, then the scenario's own setting,
/// then `$root/<name>` where `root` comes from `env_root` or `runs`.
pub fn output_dir(s: &Scenario, explicit: Option<&Path>, env_root: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = &s.output.directory {
        return p.clone();
    }
    env_root.unwrap_or(Path::new("runs")).join(&s.name)
}

pub fn snapshot_file_name(k: usize) -> String {
    format!("snapshot_{k:03}.tsv")
}

fn clamp(x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else {
        x
    }
}

/// Snapshot file text.
pub fn format_snapshot(hash: &str, state: &SolverState) -> String {
    let grid = state.field.grid();
    let mut out = String::with_capacity(48 * grid.len() + 256);
    let _ = writeln!(out, "# scenario_hash = {hash}");
    let _ = writeln!(out, "# t = {}", state.t);
    let _ = writeln!(out, "# L = {}", grid.length());
    let _ = writeln!(out, "# N = {}", grid.len());
    let _ = writeln!(out, "# h = {}", grid.h());
    let _ = writeln!(out, "# x_left = {}", grid.left_edge());
    out.push_str("x\tn\n");
    for (i, n) in state.field.values().iter().enumerate() {
        let _ = writeln!(out, "{:.16e}\t{:.16e}", grid.knot(i), clamp(*n));
    }
    out
}

/// A snapshot read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub hash: String,
    pub t: f64,
    pub field: DensityField,
}

fn format_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}:{line}: {msg}", path.display()))
}

pub fn read_snapshot(path: &Path) -> Result<SnapshotFile> {
    let text = fs::read_to_string(path)?;
    parse_snapshot(&text).map_err(|(line, msg)| format_err(path, line, msg))
}

/// Parse snapshot text; errors carry a 1-based line number.
pub fn parse_snapshot(text: &str) -> std::result::Result<SnapshotFile, (usize, String)> {
    let mut header = std::collections::HashMap::new();
    let mut values = Vec::new();
    let mut xs = Vec::new();
    let mut seen_columns = false;
    for (idx, line) in text.lines().enumerate() {
        let ln = idx + 1;
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .split_once('=')
                .ok_or((ln, format!("malformed header line `{line}`")))?;
            header.insert(k.trim().to_string(), (v.trim().to_string(), ln));
            continue;
        }
        if !seen_columns {
            if line.trim() != "x\tn" {
                return Err((ln, format!("expected column line `x<TAB>n`, got `{line}`")));
            }
            seen_columns = true;
            continue;
        }
        let (x, n) = line
            .split_once('\t')
            .ok_or((ln, "expected two tab-separated columns".to_string()))?;
        let x: f64 = x
            .parse()
            .map_err(|_| (ln, format!("bad coordinate `{x}`")))?;
        let n: f64 = n.parse().map_err(|_| (ln, format!("bad density `{n}`")))?;
        xs.push((x, ln));
        values.push(n);
    }
    let get = |k: &str| -> std::result::Result<(String, usize), (usize, String)> {
        header
            .get(k)
            .cloned()
            .ok_or((0, format!("missing header `{k}`")))
    };
    let num = |k: &str| -> std::result::Result<f64, (usize, String)> {
        let (v, ln) = get(k)?;
        v.parse()
            .map_err(|_| (ln, format!("bad value for `{k}`: `{v}`")))
    };
    let hash = get("scenario_hash")?.0;
    let t = num("t")?;
    let length = num("L")?;
    let h = num("h")?;
    let x_left = num("x_left")?;
    let (n_text, n_line) = get("N")?;
    let n: usize = n_text
        .parse()
        .map_err(|_| (n_line, format!("bad value for `N`: `{n_text}`")))?;
    if values.len() != n {
        return Err((
            0,
            format!("header says N = {n} but {} rows follow", values.len()),
        ));
    }
    let first = (x_left / h).round() as i64;
    let grid = Grid::from_parts(length, h, n, first).map_err(|e| (0, e.to_string()))?;
    for (i, (x, ln)) in xs.iter().enumerate() {
        let expected = grid.knot(i);
        if (x - expected).abs() > 1e-9 * h {
            return Err((
                *ln,
                format!("coordinate {x} is off the grid (expected {expected})"),
            ));
        }
    }
    let field = DensityField::new(grid, values).map_err(|e| (0, e.to_string()))?;
    Ok(SnapshotFile { hash, t, field })
}

/// Time-series file text.
pub fn format_series(rows: &[SeriesRow]) -> String {
    let mut out = String::from("t\tmass\tmin\tmax\tmax_abs_rhs\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}",
            r.t, r.mass, r.min, r.max, r.max_abs_rhs
        );
    }
    out
}

/// Manifest text: run information as comments, then the canonical scenario.
pub fn format_manifest(sim: &Simulation) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# scenario_hash = {}", sim.hash);
    let _ = writeln!(out, "# status = {}", sim.status());
    let _ = writeln!(out, "# steps = {}", sim.steps);
    let _ = writeln!(out, "# rhs_evaluations = {}", sim.evaluations);
    let _ = writeln!(out, "# snapshots_written = {}", sim.snapshots.len());
    let _ = writeln!(out, "# min_density_before_clamp = {:e}", sim.min_value);
    let _ = writeln!(out, "# enlargements = {}", sim.enlargements.len());
    for e in &sim.enlargements {
        let _ = writeln!(
            out,
            "#   t = {} step = {} left = {} right = {} L = {} N = {}",
            e.t, e.step, e.report.left, e.report.right, e.length, e.n
        );
    }
    for note in &sim.scenario.notes {
        let _ = writeln!(out, "# note: {note}");
    }
    out.push('\n');
    out.push_str(&sim.scenario.to_canonical());
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Write every output of `sim` into `dir`, creating it if needed.
pub fn write_outputs(sim: &Simulation, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (k, state) in sim.snapshots.iter().enumerate() {
        write_file(
            &dir.join(snapshot_file_name(k)),
            &format_snapshot(&sim.hash, state),
        )?;
    }
    write_file(&dir.join("timeseries.tsv"), &format_series(&sim.series))?;
    write_file(&dir.join("manifest.ini"), &format_manifest(sim))?;
    Ok(())
}

/// Simulate, write outputs (partial ones too), then report any failure.
pub fn run(s: &Scenario, dir: &Path) -> Result<Simulation> {
    let sim = simulate(s)?;
    write_outputs(&sim, dir)?;
    info!("outputs written to {}", dir.display());
    sim.into_result()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{InitialConditionSpec, KernelSpec};
    use crate::rhs::KernelSet;

    fn small() -> Scenario {
        Scenario {
            name: "small".into(),
            length: 8.0,
            n: 40,
            kernels: KernelSet::new(
                KernelSpec::gaussian(1.0, 0.5).unwrap(),
                KernelSpec::disabled(),
                KernelSpec::disabled(),
            ),
            initial: InitialConditionSpec::Rectangle { v: 1.0, sigma: 1.0 },
            t_end: 1.0,
            snapshots: vec![0.0, 0.5, 1.0],
            ..Scenario::default()
        }
    }

    #[test]
    fn snapshot_text_round_trips() {
        let sim = simulate(&small()).unwrap();
        for s in &sim.snapshots {
            let back = parse_snapshot(&format_snapshot(&sim.hash, s)).unwrap();
            assert_eq!(back.field, s.field);
            assert_eq!(back.t, s.t);
            assert_eq!(back.hash, sim.hash);
        }
    }

    #[test]
    fn series_has_start_and_snapshot_rows() {
        let sim = simulate(&small()).unwrap();
        let ts: Vec<f64> = sim.series.iter().map(|r| r.t).collect();
        assert_eq!(ts.first(), Some(&0.0));
        assert!(ts.iter().any(|t| (t - 0.5).abs() < 1e-12));
        assert_eq!(sim.snapshots.len(), 3);
        assert_eq!(sim.steps, 10);
        assert_eq!(sim.evaluations, 40);
    }

    #[test]
    fn malformed_snapshot_reports_line() {
        let bad = "# scenario_hash = x\n# t = 0\n# L = 4\n# N = 4\n# h = 1\n# x_left = -2\nx\tn\n-1.5\t1\n-0.5\tabc\n";
        let (line, _) = parse_snapshot(bad).unwrap_err();
        assert_eq!(line, 9);
    }

    #[test]
    fn output_dir_precedence() {
        let mut s = small();
        assert_eq!(output_dir(&s, None, None), Path::new("runs/small"));
        assert_eq!(
            output_dir(&s, None, Some(Path::new("/tmp/o"))),
            Path::new("/tmp/o/small")
        );
        s.output.directory = Some("here".into());
        assert_eq!(
            output_dir(&s, None, Some(Path::new("/tmp/o"))),
            Path::new("here")
        );
        assert_eq!(output_dir(&s, Some(Path::new("x")), None), Path::new("x"));
    }
}
