//! Convergence sweeps and direct-versus-spectral comparison.

use std::time::Instant;

use log::{info, warn};

use crate::diagnostics::{fit_loglog_slope, max_abs_diff, theta, Window};
use crate::error::{Error, Result};
use crate::grid::{DensityField, Grid, QuadratureRule};
use crate::integrate::StepperKind;
use crate::kernel::sample_initial;
use crate::rhs::{DirectRhs, KernelSet, SampledKernels};
use crate::runner::{initial_field, simulate};
use crate::scenario::{RhsPath, Scenario};
use crate::spectral::{check_eligible, SpectralWorkspace};

/// Copy of `base` at mesh `h` and step `dt`, keeping only the final snapshot.
pub fn with_resolution(base: &Scenario, h: f64, dt: f64) -> Result<Scenario> {
    let ratio = base.length / h;
    let n = ratio.round();
    if !(h > 0.0) || (ratio - n).abs() > 1e-9 * ratio || n as usize % 2 != 0 {
        return Err(Error::Parameter(format!(
            "h = {h} does not give an even knot count for L = {}",
            base.length
        )));
    }
    let mut s = base.clone();
    s.n = n as usize;
    s.dt = dt;
    s.snapshots = vec![base.t_end];
    if s.adaptive_enabled {
        s.adaptive.max_n = s.adaptive.max_n.max(s.n);
    }
    s.name = format!("{}-h{h}-dt{dt}", base.name);
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub hs: Vec<f64>,
    pub dts: Vec<f64>,
    pub ref_h: f64,
    pub ref_dt: f64,
    /// Stepper of the reference run; sweep cells use the scenario's stepper.
    pub ref_stepper: StepperKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub h: f64,
    pub dt: f64,
    /// Percentage error per window, in the report's window order.
    pub theta: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slope {
    pub window: String,
    /// `"h"` for a spatial fit at fixed `dt`, `"dt"` for a temporal fit at fixed `h`.
    pub axis: &'static str,
    pub fixed: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub t: f64,
    pub windows: Vec<String>,
    pub cells: Vec<SweepCell>,
    pub slopes: Vec<Slope>,
}

impl SweepReport {
    pub fn cell(&self, h: f64, dt: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.h == h && c.dt == dt)
    }

    pub fn slope(&self, window: &str, axis: &str, fixed: f64) -> Option<f64> {
        self.slopes
            .iter()
            .find(|s| s.window == window && s.axis == axis && s.fixed == fixed)
            .map(|s| s.slope)
    }

    /// Tab-separated table followed by the fitted slopes.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "h\tdt\t{}\n",
            self.windows
                .iter()
                .map(|w| format!("theta_{w}"))
                .collect::<Vec<_>>()
                .join("\t")
        );
        for c in &self.cells {
            let cols = match &c.error {
                Some(e) => format!("failed: {e}"),
                None => c
                    .theta
                    .iter()
                    .map(|t| format!("{t:.6e}"))
                    .collect::<Vec<_>>()
                    .join("\t"),
            };
            out.push_str(&format!("{}\t{}\t{cols}\n", c.h, c.dt));
        }
        for s in &self.slopes {
            out.push_str(&format!(
                "# slope {} vs {} at fixed {}: {:.4}\n",
                s.window, s.axis, s.fixed, s.slope
            ));
        }
        out
    }
}

fn final_field(s: &Scenario) -> Result<DensityField> {
    let sim = simulate(s)?.into_result()?;
    sim.last_snapshot()
        .map(|st| st.field.clone())
        .ok_or_else(|| Error::Metric("run produced no snapshot".into()))
}

/// Error table over a grid of `(h, dt)` values against one fine reference,
/// all at the scenario's final time. Windows come from the scenario's
/// output section; with none, the whole candidate domain is used.
pub fn sweep_errors(base: &Scenario, spec: &SweepSpec) -> Result<SweepReport> {
    base.validate()?;
    if spec.hs.is_empty() || spec.dts.is_empty() {
        return Err(Error::Parameter(
            "sweep needs at least one h and one dt".into(),
        ));
    }
    for &h in &spec.hs {
        for &dt in &spec.dts {
            if spec.ref_h > h || spec.ref_dt > dt || (spec.ref_h == h && spec.ref_dt == dt) {
                return Err(Error::Parameter(format!(
                    "reference (h = {}, dt = {}) is not finer than sweep point (h = {h}, dt = {dt})",
                    spec.ref_h, spec.ref_dt
                )));
            }
        }
    }
    let mut reference = with_resolution(base, spec.ref_h, spec.ref_dt)?;
    reference.stepper = spec.ref_stepper;
    info!(
        "sweep reference: h = {}, dt = {}, N = {}",
        spec.ref_h, spec.ref_dt, reference.n
    );
    let ref_field = final_field(&reference)?;

    let windows: Vec<(String, Option<Window>)> = if base.output.windows.is_empty() {
        vec![("domain".into(), None)]
    } else {
        base.output
            .windows
            .iter()
            .map(|(n, w)| (n.clone(), Some(*w)))
            .collect()
    };

    let mut cells = Vec::new();
    for &h in &spec.hs {
        for &dt in &spec.dts {
            let result = with_resolution(base, h, dt)
                .and_then(|s| final_field(&s))
                .and_then(|f| {
                    windows
                        .iter()
                        .map(|(_, w)| theta(&f, &ref_field, *w).map(|r| r.theta_percent))
                        .collect::<Result<Vec<f64>>>()
                });
            let cell = match result {
                Ok(theta) => SweepCell {
                    h,
                    dt,
                    theta,
                    error: None,
                },
                Err(e) => {
                    warn!("sweep cell h = {h}, dt = {dt} failed: {e}");
                    SweepCell {
                        h,
                        dt,
                        theta: Vec::new(),
                        error: Some(e.to_string()),
                    }
                }
            };
            cells.push(cell);
        }
    }

    let mut slopes = Vec::new();
    for (wi, (wname, _)) in windows.iter().enumerate() {
        let fit = |points: Vec<(f64, f64)>| {
            (points.len() >= 2)
                .then(|| fit_loglog_slope(&points).ok())
                .flatten()
        };
        for &dt in &spec.dts {
            let pts = cells
                .iter()
                .filter(|c| c.dt == dt && c.error.is_none())
                .map(|c| (c.h, c.theta[wi]))
                .collect();
            if let Some(slope) = fit(pts) {
                slopes.push(Slope {
                    window: wname.clone(),
                    axis: "h",
                    fixed: dt,
                    slope,
                });
            }
        }
        for &h in &spec.hs {
            let pts = cells
                .iter()
                .filter(|c| c.h == h && c.error.is_none())
                .map(|c| (c.dt, c.theta[wi]))
                .collect();
            if let Some(slope) = fit(pts) {
                slopes.push(Slope {
                    window: wname.clone(),
                    axis: "dt",
                    fixed: h,
                    slope,
                });
            }
        }
    }
    Ok(SweepReport {
        t: base.t_end,
        windows: windows.into_iter().map(|(n, _)| n).collect(),
        cells,
        slopes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathComparison {
    /// Max-norm difference of the two rates at the initial field.
    pub rhs_max_diff: f64,
    /// `(t, max-norm difference)` at every snapshot.
    pub trajectory: Vec<(f64, f64)>,
    /// Seconds per rate evaluation.
    pub direct_seconds: f64,
    pub spectral_seconds: f64,
}

impl PathComparison {
    pub fn max_trajectory_diff(&self) -> f64 {
        self.trajectory
            .iter()
            .fold(0.0, |m, (_, d)| f64::max(m, *d))
    }

    pub fn time_ratio(&self) -> f64 {
        self.spectral_seconds / self.direct_seconds
    }
}

fn seconds_per_call(f: &mut dyn FnMut(), min_total: f64) -> f64 {
    f();
    let mut calls = 0u32;
    let start = Instant::now();
    loop {
        f();
        calls += 1;
        let elapsed = start.elapsed().as_secs_f64();
        if elapsed >= min_total || calls >= 10_000 {
            return elapsed / f64::from(calls);
        }
    }
}

/// Run a scenario through both the direct and the spectral path and compare.
pub fn compare_paths(s: &Scenario) -> Result<PathComparison> {
    check_eligible(&s.kernels, s.boundary)?;
    if s.adaptive_enabled {
        return Err(Error::Contract(
            "path comparison needs a fixed window".into(),
        ));
    }
    let mut direct = s.clone();
    direct.path = RhsPath::Direct;
    let mut spectral = s.clone();
    spectral.path = RhsPath::Spectral;

    let initial = initial_field(s)?;
    let grid = initial.grid().clone();
    let mut d = DirectRhs::new(
        SampledKernels::new(&s.kernels, &grid, s.quadrature)?,
        s.boundary,
    );
    let mut sp = SpectralWorkspace::new(&s.kernels, &grid)?;
    let mut a = vec![0.0; grid.len()];
    let mut b = vec![0.0; grid.len()];
    d.eval(initial.values(), &mut a);
    sp.eval(initial.values(), &mut b);
    let rhs_max_diff = max_abs_diff(&a, &b);
    let direct_seconds = seconds_per_call(&mut || d.eval(initial.values(), &mut a), 0.05);
    let spectral_seconds = seconds_per_call(&mut || sp.eval(initial.values(), &mut b), 0.05);

    let rd = simulate(&direct)?.into_result()?;
    let rs = simulate(&spectral)?.into_result()?;
    let trajectory = rd
        .snapshots
        .iter()
        .zip(&rs.snapshots)
        .map(|(x, y)| (x.t, max_abs_diff(x.field.values(), y.field.values())))
        .collect();
    Ok(PathComparison {
        rhs_max_diff,
        trajectory,
        direct_seconds,
        spectral_seconds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub n: usize,
    pub direct_seconds: f64,
    pub spectral_seconds: f64,
}

/// Seconds per rate evaluation on both paths for a periodic domain of
/// length `length` at each knot count in `ns`, with the direct path using
/// `rule`. The field is a smooth cosine profile.
pub fn rhs_timings(
    kernels: &KernelSet,
    length: f64,
    ns: &[usize],
    rule: QuadratureRule,
) -> Result<Vec<Timing>> {
    check_eligible(kernels, crate::grid::BoundaryMode::Periodic)?;
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let grid = Grid::centered(length, n)?;
        let ic = crate::kernel::InitialConditionSpec::Trigonometric {
            n0: 1.0,
            mu0: 0.5,
            k: 3.0,
        };
        let field = sample_initial(&ic, &grid, false)?;
        let mut d = DirectRhs::new(
            SampledKernels::new(kernels, &grid, rule)?,
            crate::grid::BoundaryMode::Periodic,
        );
        let mut sp = SpectralWorkspace::new(kernels, &grid)?;
        let mut buf = vec![0.0; n];
        let direct_seconds = seconds_per_call(&mut || d.eval(field.values(), &mut buf), 0.2);
        let spectral_seconds = seconds_per_call(&mut || sp.eval(field.values(), &mut buf), 0.2);
        info!("N = {n}: direct {direct_seconds:.3e} s, spectral {spectral_seconds:.3e} s");
        out.push(Timing {
            n,
            direct_seconds,
            spectral_seconds,
        });
    }
    Ok(out)
}
