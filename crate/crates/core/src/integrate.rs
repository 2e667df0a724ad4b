//! Fixed-step explicit Runge-Kutta integration.

use std::fmt;
use std::str::FromStr;

use log::info;

use crate::error::{Error, Result};
use crate::grid::DensityField;
use crate::rhs::DirectRhs;
use crate::spectral::SpectralWorkspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepperKind {
    /// Classical fourth-order scheme.
    Rk4,
    /// Heun's second-order scheme.
    Rk2Heun,
    /// Explicit midpoint scheme.
    Rk2Midpoint,
}

impl StepperKind {
    pub const ALL: [StepperKind; 3] = [
        StepperKind::Rk4,
        StepperKind::Rk2Heun,
        StepperKind::Rk2Midpoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StepperKind::Rk4 => "rk4",
            StepperKind::Rk2Heun => "rk2_heun",
            StepperKind::Rk2Midpoint => "rk2_midpoint",
        }
    }

    pub fn evaluations_per_step(self) -> u64 {
        match self {
            StepperKind::Rk4 => 4,
            _ => 2,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            StepperKind::Rk4 => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for StepperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StepperKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rk4" => Ok(StepperKind::Rk4),
            "rk2_heun" | "rk2" | "heun" => Ok(StepperKind::Rk2Heun),
            "rk2_midpoint" | "rk2prime" | "midpoint" => Ok(StepperKind::Rk2Midpoint),
            other => Err(Error::Parameter(format!(
                "unknown stepper '{other}' (expected rk4, rk2_heun or rk2_midpoint)"
            ))),
        }
    }
}

/// Something that maps a state vector to its time derivative.
pub trait RateFunction {
    fn rate(&mut self, values: &[f64], out: &mut [f64]);
}

impl<F: FnMut(&[f64], &mut [f64])> RateFunction for F {
    fn rate(&mut self, values: &[f64], out: &mut [f64]) {
        self(values, out)
    }
}

impl RateFunction for DirectRhs {
    fn rate(&mut self, values: &[f64], out: &mut [f64]) {
        self.eval(values, out)
    }
}

impl RateFunction for SpectralWorkspace {
    fn rate(&mut self, values: &[f64], out: &mut [f64]) {
        self.eval(values, out)
    }
}

/// State of a run: the field, the current time and the number of steps taken.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub field: DensityField,
    pub t: f64,
    pub step: u64,
}

impl SolverState {
    pub fn new(field: DensityField) -> Self {
        SolverState {
            field,
            t: 0.0,
            step: 0,
        }
    }
}

/// One Runge-Kutta stepper with its stage buffers.
#[derive(Debug, Clone)]
pub struct Stepper {
    kind: StepperKind,
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
    evaluations: u64,
}

fn axpy_into(out: &mut [f64], y: &[f64], a: f64, k: &[f64]) {
    for ((o, y), k) in out.iter_mut().zip(y).zip(k) {
        *o = y + a * k;
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl Stepper {
    pub fn new(kind: StepperKind) -> Self {
        Stepper {
            kind,
            k: Default::default(),
            stage: Vec::new(),
            evaluations: 0,
        }
    }

    pub fn kind(&self) -> StepperKind {
        self.kind
    }

    /// Total number of rate evaluations performed so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn resize(&mut self, n: usize) {
        for k in &mut self.k {
            k.resize(n, 0.0);
        }
        self.stage.resize(n, 0.0);
    }

    fn eval<R: RateFunction + ?Sized>(
        &mut self,
        rhs: &mut R,
        slot: usize,
        from_stage: bool,
        y: &[f64],
    ) -> bool {
        self.evaluations += 1;
        let input = if from_stage { &self.stage } else { y };
        rhs.rate(input, &mut self.k[slot]);
        all_finite(&self.k[slot])
    }

    /// Advance `y` in place by one step of size `dt`. Returns `false` when a
    /// stage or the result contains a non-finite value; `y` is then left in
    /// an unspecified state.
    pub fn advance<R: RateFunction + ?Sized>(
        &mut self,
        rhs: &mut R,
        y: &mut [f64],
        dt: f64,
    ) -> bool {
        self.resize(y.len());
        match self.kind {
            StepperKind::Rk4 => {
                if !self.eval(rhs, 0, false, y) {
                    return false;
                }
                axpy_into(&mut self.stage, y, 0.5 * dt, &self.k[0]);
                if !all_finite(&self.stage) || !self.eval(rhs, 1, true, y) {
                    return false;
                }
                axpy_into(&mut self.stage, y, 0.5 * dt, &self.k[1]);
                if !all_finite(&self.stage) || !self.eval(rhs, 2, true, y) {
                    return false;
                }
                axpy_into(&mut self.stage, y, dt, &self.k[2]);
                if !all_finite(&self.stage) || !self.eval(rhs, 3, true, y) {
                    return false;
                }
                let c = dt / 6.0;
                let [k1, k2, k3, k4] = &self.k;
                for i in 0..y.len() {
                    y[i] += c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            StepperKind::Rk2Heun => {
                if !self.eval(rhs, 0, false, y) {
                    return false;
                }
                axpy_into(&mut self.stage, y, dt, &self.k[0]);
                if !all_finite(&self.stage) || !self.eval(rhs, 1, true, y) {
                    return false;
                }
                let c = 0.5 * dt;
                let [k1, k2, ..] = &self.k;
                for i in 0..y.len() {
                    y[i] += c * (k1[i] + k2[i]);
                }
            }
            StepperKind::Rk2Midpoint => {
                if !self.eval(rhs, 0, false, y) {
                    return false;
                }
                axpy_into(&mut self.stage, y, 0.5 * dt, &self.k[0]);
                if !all_finite(&self.stage) || !self.eval(rhs, 1, true, y) {
                    return false;
                }
                let k2 = &self.k[1];
                for i in 0..y.len() {
                    y[i] += dt * k2[i];
                }
            }
        }
        all_finite(y)
    }
}

/// Advance `state` by one step; the field is replaced by the new value and
/// time advances by exactly `dt`.
pub fn step<R: RateFunction + ?Sized>(
    state: &SolverState,
    rhs: &mut R,
    dt: f64,
    kind: StepperKind,
) -> Result<SolverState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Parameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let mut values = state.field.values().to_vec();
    let mut stepper = Stepper::new(kind);
    if !stepper.advance(rhs, &mut values, dt) {
        return Err(Error::Divergence {
            step: state.step + 1,
            t: state.t,
        });
    }
    Ok(SolverState {
        field: DensityField::new(state.field.grid().clone(), values)?,
        t: state.t + dt,
        step: state.step + 1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Ascending times within `[0, t_end]`.
    pub snapshot_times: Vec<f64>,
}

impl IntegrationConfig {
    pub fn new(dt: f64, t_end: f64, snapshot_times: Vec<f64>) -> Result<Self> {
        let cfg = IntegrationConfig {
            dt,
            t_end,
            snapshot_times,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Parameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Parameter(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        let p = self.t_end / self.dt;
        if (p - p.round()).abs() > 1e-6 * p.max(1.0) {
            return Err(Error::Parameter(format!(
                "t_end = {} is not a whole number of steps of dt = {}",
                self.t_end, self.dt
            )));
        }
        let mut prev = f64::NEG_INFINITY;
        for &t in &self.snapshot_times {
            if !(0.0..=self.t_end * (1.0 + 1e-12)).contains(&t) {
                return Err(Error::Parameter(format!(
                    "snapshot time {t} lies outside [0, {}]",
                    self.t_end
                )));
            }
            if t <= prev {
                return Err(Error::Parameter(
                    "snapshot times must be strictly ascending".into(),
                ));
            }
            prev = t;
        }
        Ok(())
    }

    /// Number of steps `P`.
    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    /// Step index of each snapshot, snapped to the nearest step boundary.
    pub fn snapshot_steps(&self) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::with_capacity(self.snapshot_times.len());
        for &t in &self.snapshot_times {
            let exact = t / self.dt;
            let p = exact.round();
            if (exact - p).abs() > 1e-9 * exact.max(1.0) {
                info!("snapshot at t = {t} snapped to t = {}", p * self.dt);
            }
            let p = p as u64;
            if out.last() != Some(&p) {
                out.push(p);
            }
        }
        out
    }
}

/// The model being integrated, with an optional hook run after every
/// accepted step.
pub trait Dynamics: RateFunction {
    /// Inspect or replace the state after an accepted step.
    fn after_step(&mut self, _state: &mut SolverState, _dt: f64) -> Result<()> {
        Ok(())
    }
}

impl Dynamics for DirectRhs {}
impl Dynamics for SpectralWorkspace {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    /// Snapshot number `k` in the configured list.
    Snapshot(usize),
    /// A step was completed.
    Step,
}

/// Receives the state at snapshots and after each step.
pub trait Observer {
    fn observe(
        &mut self,
        event: Event,
        state: &SolverState,
        dynamics: &mut dyn Dynamics,
    ) -> Result<()>;
}

/// Observer that ignores everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoObserver;

impl Observer for NoObserver {
    fn observe(&mut self, _: Event, _: &SolverState, _: &mut dyn Dynamics) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub final_state: SolverState,
    pub snapshots: Vec<SolverState>,
    pub evaluations: u64,
}

/// Integrate from `initial` to `cfg.t_end`.
pub fn integrate(
    initial: SolverState,
    dynamics: &mut dyn Dynamics,
    cfg: &IntegrationConfig,
    kind: StepperKind,
    observer: &mut dyn Observer,
) -> Result<RunRecord> {
    cfg.validate()?;
    let total = cfg.steps();
    let snaps = cfg.snapshot_steps();
    let mut next_snap = 0;
    let mut snapshots = Vec::with_capacity(snaps.len());
    let mut stepper = Stepper::new(kind);
    let mut state = initial;
    let t0 = state.t;
    let p0 = state.step;

    let emit = |state: &SolverState,
                next_snap: &mut usize,
                snapshots: &mut Vec<SolverState>,
                dynamics: &mut dyn Dynamics,
                observer: &mut dyn Observer|
     -> Result<()> {
        while *next_snap < snaps.len() && snaps[*next_snap] == state.step - p0 {
            observer.observe(Event::Snapshot(*next_snap), state, dynamics)?;
            snapshots.push(state.clone());
            *next_snap += 1;
        }
        Ok(())
    };

    emit(&state, &mut next_snap, &mut snapshots, dynamics, observer)?;
    let mut values = state.field.values().to_vec();
    for p in 1..=total {
        if !stepper.advance(dynamics, &mut values, cfg.dt) {
            return Err(Error::Divergence {
                step: state.step + 1,
                t: state.t,
            });
        }
        state.field = DensityField::new(state.field.grid().clone(), std::mem::take(&mut values))?;
        state.step += 1;
        state.t = t0 + p as f64 * cfg.dt;
        dynamics.after_step(&mut state, cfg.dt)?;
        observer.observe(Event::Step, &state, dynamics)?;
        emit(&state, &mut next_snap, &mut snapshots, dynamics, observer)?;
        values = state.field.values().to_vec();
    }
    Ok(RunRecord {
        final_state: state,
        snapshots,
        evaluations: stepper.evaluations(),
    })
}

/// Integrate the scalar equation `dn/dt = -c n^2` with a fixed step.
pub fn integrate_scalar_coalescence(
    n0: f64,
    c: f64,
    dt: f64,
    steps: u64,
    kind: StepperKind,
) -> f64 {
    let mut y = [n0];
    let mut stepper = Stepper::new(kind);
    let mut f = |v: &[f64], out: &mut [f64]| out[0] = -c * v[0] * v[0];
    for _ in 0..steps {
        stepper.advance(&mut f, &mut y, dt);
    }
    y[0]
}
