//! Interaction kernels and initial density profiles.
//!
//! Every kernel is an even, nonnegative function of the separation `x`
//! normalised to its intensity `mu`:
//!
//! ```text
//! G(x) = mu / sqrt(2 pi sigma^2) * exp(-x^2 / (2 sigma^2))    (Gaussian)
//! C(x) = mu / (2 sigma)   for |x| <= sigma, 0 otherwise       (rectangle)
//! F_s(x) = [F(x - s) + F(x + s)] / 2                         (shifted pair)
//! ```
//!
//! Kernels are treated as exactly zero beyond their truncation radius
//! `R = Q sigma + s`, with `Q = 6` for Gaussians and `Q = 1` for rectangles.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{DensityField, Grid};

/// Truncation multiplier for Gaussian kernels.
pub const GAUSSIAN_Q: f64 = 6.0;
/// Truncation multiplier for rectangle kernels.
pub const RECTANGLE_Q: f64 = 1.0;

/// Knot-aligned discontinuities are inclusive up to this many ulps of the
/// evaluated coordinate, so `j * h` landing a rounding step past an edge
/// still samples the edge value.
const EDGE_ULPS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelShape {
    Gaussian,
    Rectangle,
}

impl KernelShape {
    pub fn name(self) -> &'static str {
        match self {
            KernelShape::Gaussian => "gaussian",
            KernelShape::Rectangle => "rectangle",
        }
    }

    fn q(self) -> f64 {
        match self {
            KernelShape::Gaussian => GAUSSIAN_Q,
            KernelShape::Rectangle => RECTANGLE_Q,
        }
    }
}

impl fmt::Display for KernelShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(KernelShape::Gaussian),
            "rectangle" => Ok(KernelShape::Rectangle),
            other => Err(Error::Parameter(format!(
                "unknown kernel shape `{other}` (expected gaussian or rectangle)"
            ))),
        }
    }
}

/// Parametric description of one interaction kernel (jump, coalescence or
/// repulsion).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub shape: KernelShape,
    /// Intensity: the integral of the kernel over the real line.
    pub mu: f64,
    /// Range of a single component.
    pub sigma: f64,
    /// Pair shift `s`; zero means a single centred kernel.
    pub shift: f64,
}

impl KernelSpec {
    pub fn new(shape: KernelShape, mu: f64, sigma: f64, shift: f64) -> Result<Self> {
        let spec = KernelSpec {
            shape,
            mu,
            sigma,
            shift,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(KernelShape::Gaussian, mu, sigma, 0.0)
    }

    pub fn rectangle(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(KernelShape::Rectangle, mu, sigma, 0.0)
    }

    pub fn with_shift(self, shift: f64) -> Result<Self> {
        Self::new(self.shape, self.mu, self.sigma, shift)
    }

    /// A kernel that is identically zero.
    pub fn disabled() -> Self {
        KernelSpec {
            shape: KernelShape::Gaussian,
            mu: 0.0,
            sigma: 1.0,
            shift: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::Parameter(format!(
                "kernel intensity mu must be finite and >= 0, got {}",
                self.mu
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Parameter(format!(
                "kernel range sigma must be finite and > 0, got {}",
                self.sigma
            )));
        }
        if !(self.shift.is_finite() && self.shift >= 0.0) {
            return Err(Error::Parameter(format!(
                "kernel shift must be finite and >= 0, got {}",
                self.shift
            )));
        }
        Ok(())
    }

    pub fn is_enabled(&self) -> bool {
        self.mu > 0.0
    }

    /// Distance beyond which the kernel is exactly zero: `Q sigma + s`, or 0
    /// for a disabled kernel.
    pub fn truncation_radius(&self) -> f64 {
        if !self.is_enabled() {
            return 0.0;
        }
        self.shape.q() * self.sigma + self.shift
    }

    /// Kernel value at separation `x`.
    pub fn eval(&self, x: f64) -> f64 {
        if !self.is_enabled() {
            return 0.0;
        }
        let ax = x.abs();
        let r = self.truncation_radius();
        if ax - r > EDGE_ULPS * f64::EPSILON * ax.max(r) {
            return 0.0;
        }
        if self.shift == 0.0 {
            return self.component(ax, ax);
        }
        let scale = ax + self.shift;
        0.5 * (self.component((ax - self.shift).abs(), scale)
            + self.component(ax + self.shift, scale))
    }

    /// Single unshifted component at distance `d >= 0`; `scale` is the
    /// magnitude the distance was computed from (used for edge inclusion).
    fn component(&self, d: f64, scale: f64) -> f64 {
        match self.shape {
            KernelShape::Gaussian => {
                let s2 = self.sigma * self.sigma;
                self.mu / (2.0 * PI * s2).sqrt() * (-d * d / (2.0 * s2)).exp()
            }
            KernelShape::Rectangle => {
                if d - self.sigma <= EDGE_ULPS * f64::EPSILON * scale.max(self.sigma) {
                    self.mu / (2.0 * self.sigma)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Initial density profile families.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialConditionSpec {
    /// `C_{v,sigma}(x)`: height `v / (2 sigma)` on `|x| <= sigma`.
    Rectangle {
        v: f64,
        sigma: f64,
    },
    /// `sum_k C_{v_k,sigma_k}(x + s_k)` with `s_k = -L/2 + (k - 1/2) L / N0`.
    MultiRectangle {
        amplitudes: Vec<f64>,
        sigmas: Vec<f64>,
    },
    /// `n0 (1 + mu0 cos(2 pi k x / L))`.
    Trigonometric {
        n0: f64,
        mu0: f64,
        k: f64,
    },
    /// `n0` for `x <= 0`, zero for `x > 0`.
    Heaviside {
        n0: f64,
    },
    /// `G_{mu,sigma}(x)` used as a density.
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    Constant {
        n0: f64,
    },
}

impl InitialConditionSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialConditionSpec::Rectangle { .. } => "rectangle",
            InitialConditionSpec::MultiRectangle { .. } => "multi_rectangle",
            InitialConditionSpec::Trigonometric { .. } => "trigonometric",
            InitialConditionSpec::Heaviside { .. } => "heaviside",
            InitialConditionSpec::Gaussian { .. } => "gaussian",
            InitialConditionSpec::Constant { .. } => "constant",
        }
    }

    /// True for profiles with jump discontinuities.
    pub fn is_discontinuous(&self) -> bool {
        matches!(
            self,
            InitialConditionSpec::Rectangle { .. }
                | InitialConditionSpec::MultiRectangle { .. }
                | InitialConditionSpec::Heaviside { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        fn nonneg(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )))
            }
        }
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "{name} must be finite and > 0, got {v}"
                )))
            }
        }
        match self {
            InitialConditionSpec::Rectangle { v, sigma } => {
                nonneg("rectangle amplitude v", *v)?;
                positive("rectangle range sigma", *sigma)
            }
            InitialConditionSpec::MultiRectangle { amplitudes, sigmas } => {
                if amplitudes.is_empty() {
                    return Err(Error::Parameter(
                        "multi_rectangle needs at least one amplitude".into(),
                    ));
                }
                if amplitudes.len() != sigmas.len() {
                    return Err(Error::Parameter(format!(
                        "multi_rectangle has {} amplitudes but {} ranges",
                        amplitudes.len(),
                        sigmas.len()
                    )));
                }
                for v in amplitudes {
                    nonneg("multi_rectangle amplitude", *v)?;
                }
                for s in sigmas {
                    positive("multi_rectangle range", *s)?;
                }
                Ok(())
            }
            InitialConditionSpec::Trigonometric { n0, mu0, k } => {
                nonneg("trigonometric n0", *n0)?;
                if !(*mu0 > 0.0 && *mu0 <= 1.0) {
                    return Err(Error::Parameter(format!(
                        "trigonometric modulation mu0 must lie in (0, 1], got {mu0}"
                    )));
                }
                if !(k.is_finite() && *k >= 1.0 && k.fract() == 0.0) {
                    return Err(Error::Parameter(format!(
                        "trigonometric wave number k must be a positive integer, got {k}"
                    )));
                }
                Ok(())
            }
            InitialConditionSpec::Heaviside { n0 } => nonneg("heaviside n0", *n0),
            InitialConditionSpec::Gaussian { mu, sigma } => {
                nonneg("gaussian mu", *mu)?;
                positive("gaussian sigma", *sigma)
            }
            InitialConditionSpec::Constant { n0 } => nonneg("constant n0", *n0),
        }
    }

    /// Profile value at `x` for a basic period of length `period`.
    pub fn eval(&self, x: f64, period: f64) -> f64 {
        match self {
            InitialConditionSpec::Rectangle { v, sigma } => rectangle_density(*v, *sigma, x),
            InitialConditionSpec::MultiRectangle { amplitudes, sigmas } => {
                let count = amplitudes.len() as f64;
                amplitudes
                    .iter()
                    .zip(sigmas)
                    .enumerate()
                    .map(|(k, (&v, &sigma))| {
                        let s = multi_rectangle_shift(k + 1, count, period);
                        rectangle_density(v, sigma, x + s)
                    })
                    .sum()
            }
            InitialConditionSpec::Trigonometric { n0, mu0, k } => {
                n0 * (1.0 + mu0 * (2.0 * PI * k * x / period).cos())
            }
            InitialConditionSpec::Heaviside { n0 } => {
                if x <= 0.0 {
                    *n0
                } else {
                    0.0
                }
            }
            InitialConditionSpec::Gaussian { mu, sigma } => {
                let s2 = sigma * sigma;
                mu / (2.0 * PI * s2).sqrt() * (-x * x / (2.0 * s2)).exp()
            }
            InitialConditionSpec::Constant { n0 } => *n0,
        }
    }
}

/// Shift of the `k`-th (1-based) rectangle in a multi-rectangle profile.
pub fn multi_rectangle_shift(k: usize, count: f64, period: f64) -> f64 {
    -period / 2.0 + (k as f64 - 0.5) * period / count
}

fn rectangle_density(v: f64, sigma: f64, x: f64) -> f64 {
    let ax = x.abs();
    if ax - sigma <= EDGE_ULPS * f64::EPSILON * ax.max(sigma) {
        v / (2.0 * sigma)
    } else {
        0.0
    }
}

/// Sample an initial profile at the knots of `grid`.
///
/// With `mirror` set the profile is evaluated at `-x`, giving `n(-x, 0)`.
/// The period used by the trigonometric and multi-rectangle families is the
/// grid length.
pub fn sample_initial(
    spec: &InitialConditionSpec,
    grid: &Grid,
    mirror: bool,
) -> Result<DensityField> {
    spec.validate()?;
    let period = grid.length();
    let values = (0..grid.len())
        .map(|i| {
            let x = grid.knot(i);
            spec.eval(if mirror { -x } else { x }, period)
        })
        .collect();
    DensityField::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gaussian_peak() {
        let g = KernelSpec::gaussian(1.0, 1.0).unwrap();
        assert!(close(g.eval(0.0), 0.398_942_280_401_432_7, 1e-15));
    }

    #[test]
    fn rectangle_edge_is_inclusive() {
        let c = KernelSpec::rectangle(1.0, 1.0).unwrap();
        assert_eq!(c.eval(1.0), 0.5);
        assert_eq!(c.eval(-1.0), 0.5);
        assert_eq!(c.eval(1.000_001), 0.0);
    }

    #[test]
    fn shifted_gaussian_pair() {
        let g = KernelSpec::gaussian(1.0, 1.0)
            .unwrap()
            .with_shift(5.0)
            .unwrap();
        let g0 = 1.0 / (2.0 * PI).sqrt();
        let expected = 0.5 * (g0 + g0 * (-50.0f64).exp());
        assert!(close(g.eval(5.0), expected, 1e-15));
        assert!(close(g.eval(5.0), 0.199_471_2, 1e-7));
    }

    #[test]
    fn truncation_radii() {
        let g = KernelSpec::gaussian(1.0, 2.0).unwrap();
        assert_eq!(g.truncation_radius(), 12.0);
        let gs = KernelSpec::gaussian(1.0, 1.0)
            .unwrap()
            .with_shift(5.0)
            .unwrap();
        assert_eq!(gs.truncation_radius(), 11.0);
        let cs = KernelSpec::rectangle(1.0, 1.0)
            .unwrap()
            .with_shift(8.0)
            .unwrap();
        assert_eq!(cs.truncation_radius(), 9.0);
        assert_eq!(KernelSpec::disabled().truncation_radius(), 0.0);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(KernelSpec::gaussian(1.0, 0.0).is_err());
        assert!(KernelSpec::gaussian(1.0, -1.0).is_err());
        assert!(KernelSpec::gaussian(-1.0, 1.0).is_err());
        assert!(KernelSpec::rectangle(1.0, 1.0)
            .unwrap()
            .with_shift(-1.0)
            .is_err());
    }

    #[test]
    fn disabled_kernel_is_zero() {
        let k = KernelSpec::disabled();
        assert!(!k.is_enabled());
        assert_eq!(k.eval(0.0), 0.0);
    }

    #[test]
    fn gaussian_is_zero_beyond_radius() {
        let g = KernelSpec::gaussian(3.0, 0.5).unwrap();
        assert!(g.eval(2.999) > 0.0);
        assert_eq!(g.eval(3.001), 0.0);
    }

    #[test]
    fn trigonometric_and_heaviside_values() {
        let t = InitialConditionSpec::Trigonometric {
            n0: 1.0,
            mu0: 1.0,
            k: 3.0,
        };
        assert_eq!(t.eval(0.0, 20.0), 2.0);
        let h = InitialConditionSpec::Heaviside { n0: 1.0 };
        assert_eq!(h.eval(-1.0, 20.0), 1.0);
        assert_eq!(h.eval(1.0, 20.0), 0.0);
        assert_eq!(h.eval(0.0, 20.0), 1.0);
    }

    #[test]
    fn multi_rectangle_shifts() {
        let s: Vec<f64> = (1..=3)
            .map(|k| multi_rectangle_shift(k, 3.0, 20.0))
            .collect();
        assert!(close(s[0], -20.0 / 3.0, 1e-12));
        assert!(close(s[1], 0.0, 1e-12));
        assert!(close(s[2], 20.0 / 3.0, 1e-12));
    }

    #[test]
    fn trigonometric_requires_integer_wave_number() {
        let t = InitialConditionSpec::Trigonometric {
            n0: 1.0,
            mu0: 0.5,
            k: 2.5,
        };
        assert!(t.validate().is_err());
        let grid = Grid::centered(20.0, 10).unwrap();
        assert!(sample_initial(&t, &grid, false).is_err());
    }

    #[test]
    fn mirrored_heaviside_sample() {
        let grid = Grid::centered(20.0, 10).unwrap();
        let spec = InitialConditionSpec::Heaviside { n0: 1.0 };
        let f = sample_initial(&spec, &grid, false).unwrap();
        let m = sample_initial(&spec, &grid, true).unwrap();
        let rev: Vec<f64> = f.values().iter().rev().copied().collect();
        assert_eq!(m.values(), rev.as_slice());
    }
}
