//! Conserved quantities, error metrics and convergence fits.

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::error::{Error, Result};
use crate::grid::{quadrature_weights, DensityField, QuadratureRule};

/// `h * sum_i n_i`.
pub fn total_mass(field: &DensityField) -> f64 {
    field.grid().h() * field.values().iter().sum::<f64>()
}

/// Closed-form solution of `dn/dt = -mu_b n^2`.
pub fn homogeneous_solution(n0: f64, mu_b: f64, t: f64) -> f64 {
    n0 / (1.0 + mu_b * n0 * t)
}

/// `max_i |n_i - n_{N+1-i}|`.
pub fn symmetry_defect(field: &DensityField) -> f64 {
    let v = field.values();
    v.iter()
        .zip(v.iter().rev())
        .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// Largest absolute difference between two equally long sequences.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Closed interval of x used to select knots for an error metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Parameter(format!("window [{lo}, {hi}] is empty")));
        }
        Ok(Window { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// Relative absolute deviation in percent.
    pub theta_percent: f64,
    /// First and last candidate index used.
    pub region: (usize, usize),
    pub n_points: usize,
}

/// Reference value at `x`: the knot value when `x` is a reference knot,
/// otherwise four-point Lagrange interpolation.
pub fn interpolate(reference: &DensityField, x: f64) -> Result<f64> {
    let grid = reference.grid();
    let h = grid.h();
    let v = reference.values();
    let pos = (x - grid.knot(0)) / h;
    let nearest = pos.round();
    if (pos - nearest).abs() < 1e-9 && nearest >= 0.0 && (nearest as usize) < v.len() {
        return Ok(v[nearest as usize]);
    }
    let j = pos.floor() as isize;
    if j < 1 || j + 2 >= v.len() as isize {
        return Err(Error::Metric(format!(
            "x = {x} is outside the interpolation range of the reference grid"
        )));
    }
    let t = pos - j as f64;
    let j = j as usize;
    let (p0, p1, p2, p3) = (v[j - 1], v[j], v[j + 1], v[j + 2]);
    // Lagrange basis on nodes -1, 0, 1, 2.
    let l0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let l1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let l2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let l3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    Ok(l0 * p0 + l1 * p1 + l2 * p2 + l3 * p3)
}

/// `sum |n_i - ref_i| / sum ref_i * 100` over candidate knots inside
/// `window` (all knots when `None`). The reference may live on a different
/// mesh; it is then interpolated to the candidate knots.
pub fn theta(
    candidate: &DensityField,
    reference: &DensityField,
    window: Option<Window>,
) -> Result<ErrorReport> {
    let grid = candidate.grid();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut first = None;
    let mut last = 0;
    let mut count = 0;
    for (i, n) in candidate.values().iter().enumerate() {
        let x = grid.knot(i);
        if let Some(w) = window {
            if !w.contains(x) {
                continue;
            }
        }
        let r = interpolate(reference, x)?;
        num += (n - r).abs();
        den += r;
        first.get_or_insert(i);
        last = i;
        count += 1;
    }
    let Some(first) = first else {
        return Err(Error::Metric("no candidate knots inside the window".into()));
    };
    if den == 0.0 {
        return Err(Error::Metric(
            "reference sums to zero over the window".into(),
        ));
    }
    Ok(ErrorReport {
        theta_percent: num / den * 100.0,
        region: (first, last),
        n_points: count,
    })
}

/// Least-squares slope of `ln(error)` against `ln(scale)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Parameter(
            "slope fit needs at least two points".into(),
        ));
    }
    if points.iter().any(|(s, e)| !(*s > 0.0) || !(*e > 0.0)) {
        return Err(Error::Parameter(
            "slope fit needs positive scales and errors".into(),
        ));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("slope fit needs distinct scales".into()));
    }
    Ok(sxy / sxx)
}

const BENCH_PREC: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;

fn to_f64(x: &BigFloat) -> f64 {
    format!("{x}").parse().unwrap_or(f64::NAN)
}

fn big(v: u64) -> BigFloat {
    BigFloat::from_u64(v, BENCH_PREC)
}

/// `erf(z)` for `z = sqrt(z2)` by the all-positive series
/// `2/sqrt(pi) e^{-z^2} sum_n 2^n z^{2n+1} / (2n+1)!!`.
fn erf_from_square(z2: &BigFloat, cc: &mut Consts) -> BigFloat {
    let p = BENCH_PREC;
    let z = z2.sqrt(p, RM);
    let mut term = z.clone();
    let mut sum = term.clone();
    let two_z2 = z2.mul(&big(2), p, RM);
    let eps = BigFloat::from_f64(1e-90, p);
    for n in 1..10_000u64 {
        term = term.mul(&two_z2, p, RM).div(&big(2 * n + 1), p, RM);
        sum = sum.add(&term, p, RM);
        if term.div(&sum, p, RM).cmp(&eps) == Some(-1) {
            break;
        }
    }
    let pi = cc.pi(p, RM);
    let pref = big(2).div(&pi.sqrt(p, RM), p, RM);
    pref.mul(&z2.neg().exp(p, RM, cc), p, RM).mul(&sum, p, RM)
}

/// Relative error of the composite rule applied to the unit Gaussian
/// `exp(-x^2/2)/sqrt(2 pi)` over `[-6, 6]` with step `1/steps_per_unit`.
/// Samples, weights and the sum are carried in extended precision so the
/// result reflects the rule alone.
pub fn gaussian_quadrature_error(rule: QuadratureRule, steps_per_unit: u64) -> Result<f64> {
    if steps_per_unit == 0 {
        return Err(Error::Parameter("steps_per_unit must be positive".into()));
    }
    let p = BENCH_PREC;
    let mut cc = Consts::new().map_err(|e| Error::Metric(format!("precision context: {e:?}")))?;
    let jstar = 6 * steps_per_unit as usize;
    let table = quadrature_weights(rule, jstar)?;
    let d = big(steps_per_unit);
    let norm = big(2).mul(&cc.pi(p, RM), p, RM).sqrt(p, RM);
    let mut sum = big(0);
    for (j, w) in table.exact().iter().enumerate() {
        let x = big(j as u64).div(&d, p, RM);
        let g = x
            .mul(&x, p, RM)
            .div(&big(2), p, RM)
            .neg()
            .exp(p, RM, &mut cc)
            .div(&norm, p, RM);
        let w = big(*w.numer() as u64).div(&big(*w.denom() as u64), p, RM);
        let term = w.mul(&g, p, RM);
        sum = if j == 0 {
            sum.add(&term, p, RM)
        } else {
            sum.add(&term.mul(&big(2), p, RM), p, RM)
        };
    }
    let approx = sum.div(&d, p, RM);
    let exact = erf_from_square(&big(18), &mut cc);
    Ok(to_f64(&approx.sub(&exact, p, RM).abs().div(&exact, p, RM)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::kernel::{sample_initial, InitialConditionSpec};
    use proptest::prelude::*;

    fn field(length: f64, values: Vec<f64>) -> DensityField {
        let n = values.len();
        DensityField::new(Grid::centered(length, n).unwrap(), values).unwrap()
    }

    #[test]
    fn mass_examples() {
        assert!((total_mass(&field(20.0, vec![1.0; 200])) - 20.0).abs() < 1e-12);
        assert_eq!(total_mass(&field(20.0, vec![0.0; 200])), 0.0);
        let grid = Grid::centered(20.0, 200).unwrap();
        let c = sample_initial(
            &InitialConditionSpec::Rectangle { v: 1.0, sigma: 1.0 },
            &grid,
            false,
        )
        .unwrap();
        assert!((total_mass(&c) - 1.0).abs() < 0.05);
    }

    #[test]
    fn theta_examples() {
        let a = field(4.0, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(theta(&a, &a, None).unwrap().theta_percent, 0.0);
        let w = Window::new(-0.5, 0.5).unwrap();
        let c = field(4.0, vec![0.0, 1.01, 0.0, 0.0]);
        let r = field(4.0, vec![0.0, 1.0, 0.0, 0.0]);
        let rep = theta(&c, &r, Some(Window::new(-1.0, -0.1).unwrap())).unwrap();
        assert!((rep.theta_percent - 1.0).abs() < 1e-12);
        assert_eq!(rep.n_points, 1);
        assert!(matches!(
            theta(&c, &field(4.0, vec![0.0; 4]), None),
            Err(Error::Metric(_))
        ));
        assert!(theta(&c, &r, Some(w)).is_ok());
    }

    #[test]
    fn theta_with_finer_reference_is_exact_for_cubics() {
        let coarse = Grid::centered(8.0, 16).unwrap();
        let fine = Grid::centered(8.0, 80).unwrap();
        let f = |x: f64| 3.0 + x - 0.2 * x * x + 0.01 * x * x * x;
        let c = DensityField::new(
            coarse.clone(),
            coarse.knots().iter().map(|x| f(*x)).collect(),
        )
        .unwrap();
        let r =
            DensityField::new(fine.clone(), fine.knots().iter().map(|x| f(*x)).collect()).unwrap();
        let rep = theta(&c, &r, Some(Window::new(-3.0, 3.0).unwrap())).unwrap();
        assert!(rep.theta_percent < 1e-10, "{}", rep.theta_percent);
    }

    #[test]
    fn symmetry_examples() {
        assert_eq!(symmetry_defect(&field(4.0, vec![1.0, 2.0, 2.0, 1.0])), 0.0);
        assert!((symmetry_defect(&field(4.0, vec![1.0, 2.001, 2.0, 1.0])) - 1e-3).abs() < 1e-12);
        let grid = Grid::centered(20.0, 200).unwrap();
        let hv =
            sample_initial(&InitialConditionSpec::Heaviside { n0: 1.0 }, &grid, false).unwrap();
        assert_eq!(symmetry_defect(&hv), 1.0);
    }

    #[test]
    fn slope_examples() {
        let hs = [0.1, 0.2, 0.4];
        let sq: Vec<_> = hs.iter().map(|h| (*h, h * h)).collect();
        assert!((fit_loglog_slope(&sq).unwrap() - 2.0).abs() < 1e-12);
        let q: Vec<_> = hs.iter().map(|h| (*h, 3.0 * h.powi(4))).collect();
        assert!((fit_loglog_slope(&q).unwrap() - 4.0).abs() < 1e-12);
        let c: Vec<_> = hs.iter().map(|h| (*h, 0.5)).collect();
        assert!(fit_loglog_slope(&c).unwrap().abs() < 1e-12);
        assert!(fit_loglog_slope(&[(0.1, 0.0), (0.2, 1.0)]).is_err());
        assert!(fit_loglog_slope(&[(0.1, 1.0)]).is_err());
    }

    #[test]
    fn homogeneous_examples() {
        assert_eq!(homogeneous_solution(1.0, 1.0, 1.0), 0.5);
        assert_eq!(homogeneous_solution(0.7, 0.0, 1e6), 0.7);
    }

    #[test]
    fn quadrature_benchmark_values() {
        // Independent multiprecision evaluation of the same sums.
        let simpson = gaussian_quadrature_error(QuadratureRule::Simpson, 10).unwrap();
        assert!((simpson / 1.29e-12 - 1.0).abs() < 0.01, "{simpson}");
        let trap = gaussian_quadrature_error(QuadratureRule::Trapezoid, 10).unwrap();
        assert!((trap / 6.04e-11 - 1.0).abs() < 0.01, "{trap}");
    }

    proptest! {
        #[test]
        fn theta_is_scale_invariant(
            c in prop::collection::vec(0.0f64..2.0, 8),
            r in prop::collection::vec(0.1f64..2.0, 8),
            s in 0.01f64..100.0,
        ) {
            let a = theta(&field(8.0, c.clone()), &field(8.0, r.clone()), None).unwrap().theta_percent;
            let cs: Vec<f64> = c.iter().map(|v| v * s).collect();
            let rs: Vec<f64> = r.iter().map(|v| v * s).collect();
            let b = theta(&field(8.0, cs), &field(8.0, rs), None).unwrap().theta_percent;
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        }

        #[test]
        fn mass_is_linear(
            x in prop::collection::vec(-2.0f64..2.0, 16),
            y in prop::collection::vec(-2.0f64..2.0, 16),
            a in -3.0f64..3.0,
        ) {
            let sum: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
            let lhs = total_mass(&field(4.0, sum));
            let rhs = a * total_mass(&field(4.0, x)) + total_mass(&field(4.0, y));
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn symmetry_defect_ignores_reversal(
            v in (2usize..20).prop_flat_map(|k| prop::collection::vec(0.0f64..2.0, 2 * k)),
        ) {
            let f = field(4.0, v);
            prop_assert_eq!(symmetry_defect(&f), symmetry_defect(&f.reversed()));
        }
    }
}
