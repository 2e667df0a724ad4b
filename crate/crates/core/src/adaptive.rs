//! Automatically growing computational window for non-periodic runs.
//!
//! After every step each non-periodic side is checked:
//!
//! * a zero-fill side breaches when the density at a sentinel knot, placed
//!   the largest kernel radius inside the edge, exceeds `epsilon * max n`;
//! * an edge-fill side breaches when the edge density drifts from the
//!   spatially homogeneous companion solution by more than `epsilon * max n`.
//!
//! On a breach the window doubles at fixed mesh: a single breached side is
//! extended by `L`, two breached sides by `L/2` each.

use std::fmt;
use std::str::FromStr;

use log::info;

use crate::error::{Error, Result};
use crate::grid::{BoundaryMode, DensityField, QuadratureRule, SideRule};
use crate::integrate::{Dynamics, RateFunction, SolverState, Stepper, StepperKind};
use crate::rhs::{half_range, DirectRhs, KernelSet, SampledKernels};

pub const DEFAULT_EPSILON: f64 = 1e-12;
pub const DEFAULT_MAX_N: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompanionMode {
    /// Closed form `n0 / (1 + mu_b n0 t)` with the kernel's `mu_b`.
    Analytic,
    /// The scalar equation integrated with the run's stepper, using the
    /// coalescence rate of the discretised operator for a flat field.
    RkTracked,
}

impl CompanionMode {
    pub fn name(self) -> &'static str {
        match self {
            CompanionMode::Analytic => "analytic",
            CompanionMode::RkTracked => "rk_tracked",
        }
    }
}

impl fmt::Display for CompanionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CompanionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "analytic" => Ok(CompanionMode::Analytic),
            "rk_tracked" => Ok(CompanionMode::RkTracked),
            other => Err(Error::Parameter(format!(
                "unknown companion mode `{other}` (expected analytic or rk_tracked)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub epsilon: f64,
    pub max_n: usize,
    pub companion: CompanionMode,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            epsilon: DEFAULT_EPSILON,
            max_n: DEFAULT_MAX_N,
            companion: CompanionMode::RkTracked,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1e-2) {
            return Err(Error::Parameter(format!(
                "epsilon must lie in (0, 0.01), got {}",
                self.epsilon
            )));
        }
        if self.max_n < n {
            return Err(Error::Parameter(format!(
                "max_n = {} is below the initial N = {n}",
                self.max_n
            )));
        }
        Ok(())
    }
}

/// Scalar track of the spatially flat solution.
#[derive(Debug, Clone)]
pub struct HomogeneousCompanion {
    n0: f64,
    n_h: f64,
    mu_b: f64,
    t: f64,
    mode: CompanionMode,
    stepper: Stepper,
}

impl HomogeneousCompanion {
    pub fn new(n0: f64, mu_b: f64, mode: CompanionMode, kind: StepperKind) -> Self {
        HomogeneousCompanion {
            n0,
            n_h: n0,
            mu_b,
            t: 0.0,
            mode,
            stepper: Stepper::new(kind),
        }
    }

    pub fn value(&self) -> f64 {
        self.n_h
    }

    pub fn mu_b(&self) -> f64 {
        self.mu_b
    }

    pub fn mode(&self) -> CompanionMode {
        self.mode
    }

    pub fn advance(&mut self, dt: f64) {
        self.t += dt;
        match self.mode {
            CompanionMode::Analytic => {
                self.n_h = self.n0 / (1.0 + self.mu_b * self.n0 * self.t);
            }
            CompanionMode::RkTracked => {
                let c = self.mu_b;
                let mut f = |v: &[f64], out: &mut [f64]| out[0] = -c * v[0] * v[0];
                let mut y = [self.n_h];
                self.stepper.advance(&mut f, &mut y, dt);
                self.n_h = y[0];
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BreachReport {
    pub left: bool,
    pub right: bool,
}

impl BreachReport {
    pub fn any(&self) -> bool {
        self.left || self.right
    }
}

/// Edge-fill reference values per side (`None` on other sides).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompanionValues {
    pub left: Option<f64>,
    pub right: Option<f64>,
}

/// Check both sides of `field`. `sentinel` is the distance in knots of the
/// zero-fill sentinel from the edge.
pub fn breach_check(
    field: &DensityField,
    mode: BoundaryMode,
    sentinel: usize,
    epsilon: f64,
    companions: CompanionValues,
) -> BreachReport {
    let v = field.values();
    let n = v.len();
    let max = v.iter().fold(0.0f64, |m, x| m.max(*x));
    let threshold = epsilon * max;
    let s = sentinel.min(n - 1);
    let side = |rule: SideRule, sentinel_value: f64, edge: f64, companion: Option<f64>| match rule {
        SideRule::Periodic => false,
        SideRule::Dirichlet => sentinel_value > threshold,
        SideRule::Asymptotic => (edge - companion.unwrap_or(edge)).abs() > threshold,
    };
    BreachReport {
        left: side(mode.left(), v[s], v[0], companions.left),
        right: side(mode.right(), v[n - 1 - s], v[n - 1], companions.right),
    }
}

/// Double the window of `field` according to `report`, padding zero-fill
/// sides with 0 and edge-fill sides with the companion value (the edge
/// value when there is none). Padding with the edge value would freeze any
/// drift of the edge into the new far field and trigger a breach on every
/// later check.
pub fn enlarge(
    field: &DensityField,
    mode: BoundaryMode,
    report: BreachReport,
    companions: CompanionValues,
    max_n: usize,
) -> Result<DensityField> {
    if mode.is_periodic() {
        return Err(Error::Contract("periodic runs cannot be enlarged".into()));
    }
    if !report.any() {
        return Err(Error::Contract("enlarge called without a breach".into()));
    }
    let n = field.len();
    if 2 * n > max_n {
        return Err(Error::Resource(format!(
            "growing the window would need N = {} knots, above max_n = {max_n}; \
             raise [adaptive] max_n or shorten t_end",
            2 * n
        )));
    }
    let (left, right) = match (report.left, report.right) {
        (true, true) => (n / 2, n - n / 2),
        (true, false) => (n, 0),
        _ => (0, n),
    };
    let v = field.values();
    let fill = |rule: SideRule, edge: f64, companion: Option<f64>| match rule {
        SideRule::Asymptotic => companion.unwrap_or(edge),
        _ => 0.0,
    };
    let mut values = Vec::with_capacity(2 * n);
    values.extend(std::iter::repeat(fill(mode.left(), v[0], companions.left)).take(left));
    values.extend_from_slice(v);
    values.extend(std::iter::repeat(fill(mode.right(), v[n - 1], companions.right)).take(right));
    DensityField::new(field.grid().extended(left, right), values)
}

/// A window enlargement that happened during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enlargement {
    pub t: f64,
    pub step: u64,
    pub n: usize,
    pub length: f64,
    pub report: BreachReport,
}

/// Direct-path dynamics with breach monitoring and window growth.
#[derive(Debug, Clone)]
pub struct AdaptiveDynamics {
    rhs: DirectRhs,
    kernels: KernelSet,
    rule: QuadratureRule,
    cfg: AdaptiveConfig,
    sentinel: usize,
    left: Option<HomogeneousCompanion>,
    right: Option<HomogeneousCompanion>,
    enlargements: Vec<Enlargement>,
}

impl AdaptiveDynamics {
    pub fn new(
        initial: &DensityField,
        kernels: &KernelSet,
        rule: QuadratureRule,
        mode: BoundaryMode,
        kind: StepperKind,
        cfg: AdaptiveConfig,
    ) -> Result<Self> {
        if mode.is_periodic() {
            return Err(Error::Config(
                "the growing window cannot be used with periodic boundaries".into(),
            ));
        }
        cfg.validate(initial.len())?;
        let ws = SampledKernels::new(kernels, initial.grid(), rule)?;
        let mu_b = match cfg.companion {
            CompanionMode::Analytic => {
                if kernels.coalescence.is_enabled() {
                    kernels.coalescence.mu
                } else {
                    0.0
                }
            }
            CompanionMode::RkTracked => ws.homogeneous_coalescence_rate(),
        };
        let v = initial.values();
        let companion = |rule: SideRule, edge: f64| {
            (rule == SideRule::Asymptotic)
                .then(|| HomogeneousCompanion::new(edge, mu_b, cfg.companion, kind))
        };
        let left = companion(mode.left(), v[0]);
        let right = companion(mode.right(), v[v.len() - 1]);
        Ok(AdaptiveDynamics {
            sentinel: half_range(kernels.max_radius(), initial.grid().h()),
            rhs: DirectRhs::new(ws, mode),
            kernels: *kernels,
            rule,
            cfg,
            left,
            right,
            enlargements: Vec::new(),
        })
    }

    pub fn enlargements(&self) -> &[Enlargement] {
        &self.enlargements
    }

    pub fn companions(&self) -> CompanionValues {
        CompanionValues {
            left: self.left.as_ref().map(HomogeneousCompanion::value),
            right: self.right.as_ref().map(HomogeneousCompanion::value),
        }
    }

    pub fn sentinel(&self) -> usize {
        self.sentinel
    }
}

impl RateFunction for AdaptiveDynamics {
    fn rate(&mut self, values: &[f64], out: &mut [f64]) {
        self.rhs.eval(values, out)
    }
}

impl Dynamics for AdaptiveDynamics {
    fn after_step(&mut self, state: &mut SolverState, dt: f64) -> Result<()> {
        for c in [&mut self.left, &mut self.right].into_iter().flatten() {
            c.advance(dt);
        }
        let mode = self.rhs.mode();
        let report = breach_check(
            &state.field,
            mode,
            self.sentinel,
            self.cfg.epsilon,
            self.companions(),
        );
        if !report.any() {
            return Ok(());
        }
        let grown = enlarge(
            &state.field,
            mode,
            report,
            self.companions(),
            self.cfg.max_n,
        )?;
        let ws = SampledKernels::new(&self.kernels, grown.grid(), self.rule)?;
        self.rhs = DirectRhs::new(ws, mode);
        let e = Enlargement {
            t: state.t,
            step: state.step,
            n: grown.len(),
            length: grown.grid().length(),
            report,
        };
        info!(
            "window grown at t = {} (left: {}, right: {}): L = {}, N = {}",
            e.t, report.left, report.right, e.length, e.n
        );
        self.enlargements.push(e);
        state.field = grown;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::total_mass;
    use crate::grid::Grid;
    use crate::kernel::KernelSpec;
    use proptest::prelude::*;

    fn field(length: f64, values: Vec<f64>) -> DensityField {
        let n = values.len();
        DensityField::new(Grid::centered(length, n).unwrap(), values).unwrap()
    }

    #[test]
    fn quiet_field_has_no_breach() {
        let mut v = vec![0.0; 40];
        v[20] = 1.0;
        let f = field(4.0, v);
        let r = breach_check(
            &f,
            BoundaryMode::Dirichlet,
            5,
            1e-12,
            CompanionValues::default(),
        );
        assert_eq!(r, BreachReport::default());
    }

    #[test]
    fn dirichlet_sentinel_threshold() {
        let mut v = vec![0.0; 40];
        v[20] = 1.0;
        v[40 - 1 - 5] = 2e-12;
        let f = field(4.0, v);
        let r = breach_check(
            &f,
            BoundaryMode::Dirichlet,
            5,
            1e-12,
            CompanionValues::default(),
        );
        assert_eq!(
            r,
            BreachReport {
                left: false,
                right: true
            }
        );
    }

    #[test]
    fn asymptotic_drift_from_companion() {
        let mut v = vec![0.0; 40];
        v[..20].iter_mut().for_each(|x| *x = 1.0);
        v[0] = 1.0 + 1e-11;
        let f = field(4.0, v);
        let c = CompanionValues {
            left: Some(1.0),
            right: None,
        };
        let r = breach_check(&f, BoundaryMode::LeftAsymptoticRightDirichlet, 5, 1e-12, c);
        assert_eq!(
            r,
            BreachReport {
                left: true,
                right: false
            }
        );
    }

    #[test]
    fn doubling_keeps_the_mesh() {
        let f = DensityField::new(Grid::centered(20.0, 160).unwrap(), vec![0.5; 160]).unwrap();
        let g = enlarge(
            &f,
            BoundaryMode::Dirichlet,
            BreachReport {
                left: true,
                right: true,
            },
            CompanionValues::default(),
            1000,
        )
        .unwrap();
        assert_eq!(g.grid().length(), 40.0);
        assert_eq!(g.len(), 320);
        assert_eq!(g.grid().h(), 0.125);
    }

    #[test]
    fn padding_values() {
        let v: Vec<f64> = (0..20).map(|i| 1.0 + i as f64).collect();
        let f = field(2.0, v.clone());
        let right = enlarge(
            &f,
            BoundaryMode::Dirichlet,
            BreachReport {
                left: false,
                right: true,
            },
            CompanionValues::default(),
            100,
        )
        .unwrap();
        assert_eq!(&right.values()[..20], v.as_slice());
        assert!(right.values()[20..].iter().all(|x| *x == 0.0));
        let left = enlarge(
            &f,
            BoundaryMode::LeftAsymptoticRightDirichlet,
            BreachReport {
                left: true,
                right: false,
            },
            CompanionValues::default(),
            100,
        )
        .unwrap();
        assert!(left.values()[..20].iter().all(|x| *x == 1.0));
        assert_eq!(&left.values()[20..], v.as_slice());
        for i in 0..20 {
            assert_eq!(left.grid().knot(20 + i), f.grid().knot(i));
        }
        let tracked = enlarge(
            &f,
            BoundaryMode::LeftAsymptoticRightDirichlet,
            BreachReport {
                left: true,
                right: false,
            },
            CompanionValues {
                left: Some(0.75),
                right: None,
            },
            100,
        )
        .unwrap();
        assert!(tracked.values()[..20].iter().all(|x| *x == 0.75));
        assert!(matches!(
            enlarge(
                &f,
                BoundaryMode::Dirichlet,
                BreachReport {
                    left: true,
                    right: true
                },
                CompanionValues::default(),
                39
            ),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn companion_examples() {
        let mut a = HomogeneousCompanion::new(1.0, 1.0, CompanionMode::Analytic, StepperKind::Rk4);
        for _ in 0..10 {
            a.advance(0.1);
        }
        assert!((a.value() - 0.5).abs() < 1e-15);
        let mut z = HomogeneousCompanion::new(0.8, 0.0, CompanionMode::RkTracked, StepperKind::Rk4);
        for _ in 0..100 {
            z.advance(0.1);
        }
        assert_eq!(z.value(), 0.8);
    }

    #[test]
    fn tracked_companion_converges_at_fourth_order() {
        let err = |dt: f64| {
            let mut c =
                HomogeneousCompanion::new(0.5, 1.0, CompanionMode::RkTracked, StepperKind::Rk4);
            for _ in 0..(10.0 / dt).round() as u64 {
                c.advance(dt);
            }
            (c.value() - 0.5 / 6.0).abs()
        };
        let pts: Vec<(f64, f64)> = [0.1, 0.2, 0.4].iter().map(|dt| (*dt, err(*dt))).collect();
        let slope = crate::diagnostics::fit_loglog_slope(&pts).unwrap();
        assert!((slope - 4.0).abs() <= 0.3, "{slope}");
    }

    #[test]
    fn periodic_is_rejected() {
        let f = DensityField::new(Grid::centered(20.0, 200).unwrap(), vec![0.5; 200]).unwrap();
        let set = KernelSet::new(
            KernelSpec::gaussian(1.0, 1.0).unwrap(),
            KernelSpec::disabled(),
            KernelSpec::disabled(),
        );
        let r = AdaptiveDynamics::new(
            &f,
            &set,
            QuadratureRule::Simpson,
            BoundaryMode::Periodic,
            StepperKind::Rk4,
            AdaptiveConfig::default(),
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn enlargement_preserves_values_and_mass(
            values in prop::collection::vec(0.0f64..2.0, 16),
            left in any::<bool>(), right in any::<bool>(),
            mode_idx in 1usize..5,
        ) {
            prop_assume!(left || right);
            let mode = BoundaryMode::ALL[mode_idx];
            let f = field(8.0, values.clone());
            let g = enlarge(&f, mode, BreachReport { left, right }, CompanionValues::default(), 1 << 10).unwrap();
            let offset = (f.grid().first_index() - g.grid().first_index()) as usize;
            for i in 0..16 {
                prop_assert_eq!(g.values()[offset + i], values[i]);
                prop_assert_eq!(g.grid().knot(offset + i), f.grid().knot(i));
            }
            let window: f64 = g.values()[offset..offset + 16].iter().sum::<f64>() * g.grid().h();
            prop_assert_eq!(window, total_mass(&f));
        }
    }
}
