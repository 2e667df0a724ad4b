//! Acceptance criteria for the solver, each run at its stated tolerance.
//!
//! Every check returns a [`Verdict`]; the acceptance test prints one line per
//! criterion and fails if any criterion does.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kinetics_core::diagnostics::{
    fit_loglog_slope, gaussian_quadrature_error, max_abs_diff, symmetry_defect, total_mass,
};
use kinetics_core::harness::{compare_paths, rhs_timings, sweep_errors, SweepSpec};
use kinetics_core::integrate::StepperKind;
use kinetics_core::presets::preset;
use kinetics_core::rhs::{compute_rhs, compute_rhs_naive};
use kinetics_core::{
    simulate, BoundaryMode, DensityField, Grid, InitialConditionSpec, KernelSet, KernelShape,
    KernelSpec, QuadratureRule, Result, SampledKernels, Scenario, Simulation,
};

#[derive(Debug, Clone)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub check: fn() -> Result<Verdict>,
}

pub const CRITERIA: [Criterion; 13] = [
    Criterion {
        id: 1,
        name: "homogeneous closed-form solution",
        check: homogeneous_oracle,
    },
    Criterion {
        id: 2,
        name: "discrete mass conservation",
        check: mass_conservation,
    },
    Criterion {
        id: 3,
        name: "time-order convergence",
        check: time_order,
    },
    Criterion {
        id: 4,
        name: "quadrature-order microbenchmark",
        check: quadrature_order,
    },
    Criterion {
        id: 5,
        name: "overall spatial order",
        check: spatial_order,
    },
    Criterion {
        id: 6,
        name: "spectral-direct trajectory equivalence",
        check: spectral_equivalence,
    },
    Criterion {
        id: 7,
        name: "rate oracle equivalence",
        check: rate_oracle,
    },
    Criterion {
        id: 8,
        name: "symmetry preservation",
        check: symmetry,
    },
    Criterion {
        id: 9,
        name: "mirror property",
        check: mirror,
    },
    Criterion {
        id: 10,
        name: "flat long-time limit",
        check: flat_limit,
    },
    Criterion {
        id: 11,
        name: "stationary-state tendency",
        check: stationary_tendency,
    },
    Criterion {
        id: 12,
        name: "growing window vs fixed wide window",
        check: window_consistency,
    },
    Criterion {
        id: 13,
        name: "spectral cost scaling",
        check: cost_scaling,
    },
];

fn gaussian(mu: f64, sigma: f64) -> KernelSpec {
    KernelSpec {
        shape: KernelShape::Gaussian,
        mu,
        sigma,
        shift: 0.0,
    }
}

fn completed(s: &Scenario) -> Result<Simulation> {
    simulate(s)?.into_result()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn homogeneous_oracle() -> Result<Verdict> {
    let exact = 1.0 / 51.0;
    let mut details = Vec::new();
    let mut pass = true;
    for jumps in [true, false] {
        let mut s = preset("homogeneous").expect("preset");
        if !jumps {
            s.kernels.jump = KernelSpec::disabled();
        }
        let start = Instant::now();
        let sim = completed(&s)?;
        let secs = start.elapsed().as_secs_f64();
        let f = &sim.last_snapshot().expect("final snapshot").field;
        let v = f.values();
        let spread = v.iter().fold(0.0f64, |m, x| m.max((x - v[0]).abs()));
        let rel = v
            .iter()
            .fold(0.0f64, |m, x| m.max((x - exact).abs() / exact));
        pass &= rel <= 1e-8 && spread <= 1e-8 * exact && secs < 5.0;
        details.push(format!(
            "jumps {}: rel err {rel:.3e}, spread {spread:.1e}, {secs:.2} s",
            if jumps { "on" } else { "off" }
        ));
    }
    Ok(Verdict::new(pass, details.join("; ")))
}

fn mass_conservation() -> Result<Verdict> {
    let s = Scenario {
        name: "mass".into(),
        length: 20.0,
        n: 400,
        kernels: KernelSet::new(
            gaussian(1.0, 1.0),
            KernelSpec::disabled(),
            gaussian(20.0, 1.0),
        ),
        initial: InitialConditionSpec::Trigonometric {
            n0: 1.0,
            mu0: 1.0,
            k: 3.0,
        },
        t_end: 100.0,
        snapshots: (0..=20).map(|k| 5.0 * k as f64).collect(),
        ..Scenario::default()
    };
    let sim = completed(&s)?;
    let m0 = total_mass(&sim.snapshots[0].field);
    let worst = sim
        .snapshots
        .iter()
        .map(|st| (total_mass(&st.field) - m0).abs() / m0)
        .fold(0.0, f64::max);
    Ok(Verdict::new(
        worst <= 1e-10,
        format!(
            "max relative mass drift {worst:.3e} over {} snapshots",
            sim.snapshots.len()
        ),
    ))
}

fn fig5d_at_50() -> Scenario {
    let mut s = preset("fig5d").expect("preset");
    s.t_end = 50.0;
    s.snapshots = vec![50.0];
    s
}

fn time_order() -> Result<Verdict> {
    let mut pass = true;
    let mut details = Vec::new();
    for (kind, target) in [
        (StepperKind::Rk4, 4.0),
        (StepperKind::Rk2Heun, 2.0),
        (StepperKind::Rk2Midpoint, 2.0),
    ] {
        let mut s = fig5d_at_50();
        s.stepper = kind;
        let report = sweep_errors(
            &s,
            &SweepSpec {
                hs: vec![0.1],
                dts: vec![0.1, 0.2, 0.4],
                ref_h: 0.1,
                ref_dt: 0.01,
                ref_stepper: StepperKind::Rk4,
            },
        )?;
        let slope = report.slope("inhomogeneous", "dt", 0.1);
        let thetas: Vec<String> = report
            .cells
            .iter()
            .map(|c| match &c.error {
                None => format!("{:.2e}", c.theta[1]),
                Some(e) => format!("failed ({e})"),
            })
            .collect();
        let ok = slope.is_some_and(|s| within(s, target, 0.3));
        pass &= ok;
        details.push(format!(
            "{kind}: slope {} (theta% {})",
            slope.map_or("n/a".into(), |s| format!("{s:.3}")),
            thetas.join(", ")
        ));
    }
    Ok(Verdict::new(pass, details.join("; ")))
}

fn quadrature_order() -> Result<Verdict> {
    let hs: [f64; 4] = [0.01, 0.02, 0.04, 0.1];
    let mut pass = true;
    let mut details = Vec::new();
    for (rule, target) in [
        (QuadratureRule::Simpson, 4.0),
        (QuadratureRule::Trapezoid, 2.0),
    ] {
        let mut pts = Vec::new();
        for h in hs {
            let steps = (1.0 / h).round() as u64;
            pts.push((h, gaussian_quadrature_error(rule, steps)?));
        }
        let slope = fit_loglog_slope(&pts)?;
        pass &= within(slope, target, 0.3);
        details.push(format!(
            "{rule}: slope {slope:.3} (errors {})",
            pts.iter()
                .map(|(_, e)| format!("{e:.2e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    Ok(Verdict::new(pass, details.join("; ")))
}

fn spatial_order() -> Result<Verdict> {
    let s = fig5d_at_50();
    let report = sweep_errors(
        &s,
        &SweepSpec {
            hs: vec![0.02, 0.04, 0.1, 0.2],
            dts: vec![0.1],
            ref_h: 0.005,
            ref_dt: 0.1,
            ref_stepper: StepperKind::Rk4,
        },
    )?;
    let slope = report.slope("inhomogeneous", "h", 0.1);
    let at_002 = report.cell(0.02, 0.1).and_then(|c| c.theta.get(1).copied());
    let pass = slope.is_some_and(|s| within(s, 1.0, 0.4))
        && at_002.is_some_and(|t| (0.003..=0.1).contains(&t));
    let rows: Vec<String> = report
        .cells
        .iter()
        .map(|c| match &c.error {
            None => format!("h={}: {:.2e}% / {:.2e}%", c.h, c.theta[0], c.theta[1]),
            Some(e) => format!("h={}: failed ({e})", c.h),
        })
        .collect();
    Ok(Verdict::new(
        pass,
        format!(
            "inhomogeneous slope {}, theta(h=0.02) {}%; homogeneous/inhomogeneous: {}; homogeneous slope {}",
            slope.map_or("n/a".into(), |s| format!("{s:.3}")),
            at_002.map_or("n/a".into(), |t| format!("{t:.3e}")),
            rows.join(", "),
            report
                .slope("homogeneous", "h", 0.1)
                .map_or("n/a".into(), |s| format!("{s:.3}")),
        ),
    ))
}

fn spectral_equivalence() -> Result<Verdict> {
    let mut s = preset("fig4a").expect("preset");
    s.t_end = 10.0;
    s.snapshots = (0..=10).map(f64::from).collect();
    let c = compare_paths(&s)?;
    let worst = c.max_trajectory_diff();
    Ok(Verdict::new(
        worst <= 1e-6,
        format!(
            "max trajectory difference {worst:.3e} (initial rate difference {:.3e}), {} quadrature on the direct path",
            c.rhs_max_diff, s.quadrature
        ),
    ))
}

fn rate_oracle() -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for k in 0..100 {
        let n = [8usize, 16, 32][k % 3];
        let length = n as f64 / 2.0;
        let h = length / n as f64;
        let grid = Grid::centered(length, n)?;
        // Radii of exactly N/2 - 1 steps use every offset the oracle sums.
        let reach = (n / 2 - 1) as f64 * h;
        let shape = if rng.gen_bool(0.5) {
            KernelShape::Rectangle
        } else {
            KernelShape::Gaussian
        };
        let radius_to_sigma = |r: f64| match shape {
            KernelShape::Rectangle => r,
            KernelShape::Gaussian => r / 6.0,
        };
        let spec = |mu: f64| KernelSpec {
            shape,
            mu,
            sigma: radius_to_sigma(reach),
            shift: 0.0,
        };
        let set = KernelSet::new(
            spec(rng.gen_range(0.1..2.0)),
            spec(rng.gen_range(0.1..2.0)),
            spec(rng.gen_range(0.0..10.0)),
        );
        let ws = SampledKernels::new(&set, &grid, QuadratureRule::Unit)?;
        for j in [ws.jump(), ws.coalescence(), ws.repulsion()]
            .into_iter()
            .flatten()
        {
            assert_eq!(j.jstar(), n / 2 - 1, "truncation must be full");
        }
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let field = DensityField::new(grid, values)?;
        let mode = BoundaryMode::ALL[k % BoundaryMode::ALL.len()];
        let fast = compute_rhs(&field, &ws, mode);
        let slow = compute_rhs_naive(&field, &set, mode);
        worst = worst.max(max_abs_diff(fast.values(), slow.values()));
        cases += 1;
    }
    Ok(Verdict::new(
        worst <= 1e-12,
        format!("{cases} random fields, max abs difference {worst:.3e}"),
    ))
}

fn symmetry() -> Result<Verdict> {
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for part in ['a', 'b', 'c', 'd', 'e', 'f'] {
        let mut s = preset(&format!("fig1{part}")).expect("preset");
        s.snapshots = (0..=20).map(|k| 5.0 * k as f64).collect();
        let sim = completed(&s)?;
        let d = sim
            .snapshots
            .iter()
            .map(|st| symmetry_defect(&st.field))
            .fold(0.0, f64::max);
        worst = worst.max(d);
        details.push(format!("fig1{part} {d:.1e}"));
    }
    Ok(Verdict::new(
        worst <= 1e-12,
        format!("max defect {worst:.3e} ({})", details.join(", ")),
    ))
}

fn mirror() -> Result<Verdict> {
    let s = preset("fig5a").expect("preset");
    let mut m = s.clone();
    m.mirror = true;
    m.boundary = s.boundary.mirrored();
    let a = completed(&s)?;
    let b = completed(&m)?;
    let mut worst = 0.0f64;
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        let (gx, gy) = (x.field.grid(), y.field.grid());
        if gx.len() != gy.len() || gx.first_index() != -(gy.first_index() + gy.len() as i64) {
            return Ok(Verdict::new(
                false,
                format!("windows are not mirror images at t = {}", x.t),
            ));
        }
        let rev: Vec<f64> = y.field.values().iter().rev().copied().collect();
        worst = worst.max(max_abs_diff(x.field.values(), &rev));
    }
    Ok(Verdict::new(
        worst <= 1e-12 && a.snapshots.len() == b.snapshots.len(),
        format!(
            "max difference {worst:.3e} over {} snapshots; final N = {}",
            a.snapshots.len(),
            a.last_snapshot().map_or(0, |s| s.field.len())
        ),
    ))
}

fn flat_limit() -> Result<Verdict> {
    let mut s = preset("fig1a").expect("preset");
    s.t_end = 400.0;
    s.snapshots = vec![0.0, 400.0];
    let sim = completed(&s)?;
    let f = &sim.last_snapshot().expect("final").field;
    let dev = f
        .values()
        .iter()
        .fold(0.0f64, |m, x| m.max((x - 0.05).abs()));
    Ok(Verdict::new(
        dev <= 0.005,
        format!("max |n - 0.05| at t = 400: {dev:.3e}"),
    ))
}

fn stationary_tendency() -> Result<Verdict> {
    let s = preset("fig3a").expect("preset");
    let sim = completed(&s)?;
    let m0 = sim.series[0].mass;
    let min_mass = sim
        .series
        .iter()
        .map(|r| r.mass)
        .fold(f64::INFINITY, f64::min);
    let at = |t: f64| {
        sim.series
            .iter()
            .find(|r| (r.t - t).abs() < 1e-9)
            .map(|r| r.max_abs_rhs)
    };
    let (Some(r10), Some(r_end)) = (at(10.0), at(s.t_end)) else {
        return Ok(Verdict::new(
            false,
            "time series lacks rows at t = 10 or the final time",
        ));
    };
    let pass = min_mass > 0.5 * m0 && r_end * 100.0 <= r10;
    Ok(Verdict::new(
        pass,
        format!(
            "min mass / initial {:.4}; max|dn/dt| at t=10 {r10:.3e}, at t={} {r_end:.3e} (ratio {:.1})",
            min_mass / m0,
            s.t_end,
            r10 / r_end
        ),
    ))
}

fn window_consistency() -> Result<Verdict> {
    let mut grow = preset("fig5a").expect("preset");
    grow.t_end = 50.0;
    grow.snapshots = vec![0.0, 1.0, 5.0, 10.0, 25.0, 50.0];
    let mut fixed = grow.clone();
    fixed.adaptive_enabled = false;
    fixed.length = 80.0;
    fixed.n = 800;
    let a = completed(&grow)?;
    let b = completed(&fixed)?;
    let mut worst = (0.0f64, 0.0);
    let mut per_t = Vec::new();
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        let (gx, gy) = (x.field.grid(), y.field.grid());
        let mut d = 0.0f64;
        for (i, v) in x.field.values().iter().enumerate() {
            if let Some(p) = gy.position_of(gx.first_index() + i as i64) {
                let e = (v - y.field.values()[p]).abs();
                d = d.max(e);
                if e > worst.0 {
                    worst = (e, gx.knot(i));
                }
            }
        }
        per_t.push(format!("t={}: {d:.1e}", x.t));
    }
    Ok(Verdict::new(
        worst.0 <= 1e-8,
        format!(
            "max difference {:.3e} at x = {:.2} ({})",
            worst.0,
            worst.1,
            per_t.join(", ")
        ),
    ))
}

fn cost_scaling() -> Result<Verdict> {
    let kernels = KernelSet::new(
        gaussian(1.0, 1.0),
        KernelSpec::disabled(),
        gaussian(8.0, 1.0),
    );
    let ns: Vec<usize> = (8..=13).map(|p| 1usize << p).collect();
    let t = rhs_timings(&kernels, 20.0, &ns, QuadratureRule::Simpson)?;
    let direct = fit_loglog_slope(
        &t.iter()
            .map(|x| (x.n as f64, x.direct_seconds))
            .collect::<Vec<_>>(),
    )?;
    let spectral = fit_loglog_slope(
        &t.iter()
            .map(|x| (x.n as f64, x.spectral_seconds))
            .collect::<Vec<_>>(),
    )?;
    Ok(Verdict::new(
        spectral <= 1.3 && direct >= 1.7,
        format!(
            "spectral slope {spectral:.3}, direct slope {direct:.3}; at N = {}: {:.2e} s vs {:.2e} s",
            ns[ns.len() - 1],
            t[t.len() - 1].spectral_seconds,
            t[t.len() - 1].direct_seconds
        ),
    ))
}
