//! Uniform grid, quadrature weight tables and boundary index resolution.
//!
//! Knots sit at cell midpoints, `x_i = -L/2 + (i - 1/2) h` for `i = 1..N`
//! with `N` even, so the knot set is symmetric about the origin. Internally
//! every knot is addressed by a global lattice index `m` with coordinate
//! `(m + 1/2) h`; enlarging the domain keeps `h` and shifts the index range,
//! which preserves the coordinates of retained knots bit for bit.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    length: f64,
    n: usize,
    h: f64,
    /// Global lattice index of the first knot.
    first: i64,
}

impl Grid {
    /// Grid on `[-L/2, L/2]` with `n` knots.
    pub fn centered(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Parameter(format!(
                "domain length L must be finite and > 0, got {length}"
            )));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::Parameter(format!(
                "knot count N must be an even integer >= 4, got {n}"
            )));
        }
        Ok(Grid {
            length,
            n,
            h: length / n as f64,
            first: -((n / 2) as i64),
        })
    }

    /// Grid with mesh `h` whose first knot has lattice index `first`.
    pub fn from_lattice(h: f64, n: usize, first: i64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Parameter(format!(
                "mesh h must be finite and > 0, got {h}"
            )));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::Parameter(format!(
                "knot count N must be an even integer >= 4, got {n}"
            )));
        }
        Ok(Grid {
            length: h * n as f64,
            n,
            h,
            first,
        })
    }

    /// Grid with explicit length, mesh and first lattice index, as read
    /// back from a data file.
    pub fn from_parts(length: f64, h: f64, n: usize, first: i64) -> Result<Self> {
        let mut g = Self::from_lattice(h, n, first)?;
        if (length - g.length).abs() > 1e-9 * length.abs() {
            return Err(Error::Parameter(format!(
                "length {length} does not match N h = {}",
                g.length
            )));
        }
        g.length = length;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn first_index(&self) -> i64 {
        self.first
    }

    /// Coordinate of the 0-based knot `i`.
    pub fn knot(&self, i: usize) -> f64 {
        self.coordinate(self.first + i as i64)
    }

    /// Coordinate of global lattice index `m`.
    pub fn coordinate(&self, m: i64) -> f64 {
        (m as f64 + 0.5) * self.h
    }

    pub fn knots(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.knot(i)).collect()
    }

    pub fn left_edge(&self) -> f64 {
        self.first as f64 * self.h
    }

    pub fn right_edge(&self) -> f64 {
        (self.first + self.n as i64) as f64 * self.h
    }

    /// 0-based position of lattice index `m`, if it lies on this grid.
    pub fn position_of(&self, m: i64) -> Option<usize> {
        let p = m - self.first;
        (p >= 0 && (p as usize) < self.n).then_some(p as usize)
    }

    /// Same mesh, twice the knots; `left` and `right` knots are added on
    /// each side and must sum to `n`.
    pub(crate) fn extended(&self, left: usize, right: usize) -> Grid {
        debug_assert_eq!(left + right, self.n);
        Grid {
            length: 2.0 * self.length,
            n: 2 * self.n,
            h: self.h,
            first: self.first - left as i64,
        }
    }

    /// Whether the two grids share a mesh, so that equal lattice indices
    /// denote equal coordinates.
    pub fn same_lattice(&self, other: &Grid) -> bool {
        self.h == other.h
    }
}

/// Density values at the knots of a grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Grid,
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Parameter(format!(
                "field has {} values but the grid has {} knots",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "field value at knot {i} is not finite"
            )));
        }
        Ok(DensityField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        DensityField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The index-reversed field on the same grid, `n_i -> n_{N+1-i}`.
    pub fn reversed(&self) -> DensityField {
        let mut values = self.values.clone();
        values.reverse();
        DensityField {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Value at global lattice index `m`, if present.
    pub fn at_lattice(&self, m: i64) -> Option<f64> {
        self.grid.position_of(m).map(|p| self.values[p])
    }
}

/// How one side of the domain is continued beyond its last knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideRule {
    Periodic,
    /// Zero fill.
    Dirichlet,
    /// Edge-value fill.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryMode {
    Periodic,
    Dirichlet,
    Asymptotic,
    /// Edge-value fill on the left, zero fill on the right.
    LeftAsymptoticRightDirichlet,
    /// Zero fill on the left, edge-value fill on the right.
    LeftDirichletRightAsymptotic,
}

impl BoundaryMode {
    pub const ALL: [BoundaryMode; 5] = [
        BoundaryMode::Periodic,
        BoundaryMode::Dirichlet,
        BoundaryMode::Asymptotic,
        BoundaryMode::LeftAsymptoticRightDirichlet,
        BoundaryMode::LeftDirichletRightAsymptotic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::Dirichlet => "dirichlet",
            BoundaryMode::Asymptotic => "asymptotic",
            BoundaryMode::LeftAsymptoticRightDirichlet => "left_asymptotic_right_dirichlet",
            BoundaryMode::LeftDirichletRightAsymptotic => "left_dirichlet_right_asymptotic",
        }
    }

    pub fn left(self) -> SideRule {
        match self {
            BoundaryMode::Periodic => SideRule::Periodic,
            BoundaryMode::Dirichlet | BoundaryMode::LeftDirichletRightAsymptotic => {
                SideRule::Dirichlet
            }
            BoundaryMode::Asymptotic | BoundaryMode::LeftAsymptoticRightDirichlet => {
                SideRule::Asymptotic
            }
        }
    }

    pub fn right(self) -> SideRule {
        match self {
            BoundaryMode::Periodic => SideRule::Periodic,
            BoundaryMode::Dirichlet | BoundaryMode::LeftAsymptoticRightDirichlet => {
                SideRule::Dirichlet
            }
            BoundaryMode::Asymptotic | BoundaryMode::LeftDirichletRightAsymptotic => {
                SideRule::Asymptotic
            }
        }
    }

    /// The mode seen by the index-reversed problem.
    pub fn mirrored(self) -> BoundaryMode {
        match self {
            BoundaryMode::LeftAsymptoticRightDirichlet => {
                BoundaryMode::LeftDirichletRightAsymptotic
            }
            BoundaryMode::LeftDirichletRightAsymptotic => {
                BoundaryMode::LeftAsymptoticRightDirichlet
            }
            other => other,
        }
    }

    pub fn is_periodic(self) -> bool {
        self == BoundaryMode::Periodic
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundaryMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown boundary mode `{s}` (expected one of: {})",
                    BoundaryMode::ALL.map(|m| m.name()).join(", ")
                ))
            })
    }
}

/// Value of `n_{i+offset}` (0-based `i`) with out-of-range neighbours
/// resolved by `mode`: a single periodic wrap, zero, or the edge value.
pub fn resolve_offset(values: &[f64], i: usize, offset: isize, mode: BoundaryMode) -> Result<f64> {
    let n = values.len();
    if i >= n {
        return Err(Error::Contract(format!("knot index {i} outside 0..{n}")));
    }
    if offset.unsigned_abs() >= n / 2 {
        return Err(Error::Contract(format!(
            "offset {offset} reaches half the domain (N = {n}); kernel truncation radii must stay below L/2"
        )));
    }
    Ok(resolve_unchecked(values, i as isize + offset, mode))
}

/// Value at signed 0-based position `p`, which may lie outside the grid.
/// Periodic positions wrap modulo `N`; the other rules accept any distance.
pub(crate) fn resolve_unchecked(values: &[f64], p: isize, mode: BoundaryMode) -> f64 {
    let n = values.len() as isize;
    if p < 0 {
        match mode.left() {
            SideRule::Periodic => values[p.rem_euclid(n) as usize],
            SideRule::Dirichlet => 0.0,
            SideRule::Asymptotic => values[0],
        }
    } else if p >= n {
        match mode.right() {
            SideRule::Periodic => values[p.rem_euclid(n) as usize],
            SideRule::Dirichlet => 0.0,
            SideRule::Asymptotic => values[(n - 1) as usize],
        }
    } else {
        values[p as usize]
    }
}

/// Copy of `values` with `pad` boundary-resolved ghost knots on each side.
pub(crate) fn padded(values: &[f64], pad: usize, mode: BoundaryMode) -> Vec<f64> {
    let n = values.len() as isize;
    let pad = pad as isize;
    (-pad..n + pad)
        .map(|p| resolve_unchecked(values, p, mode))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureRule {
    /// Composite trapezoid, second order.
    Trapezoid,
    /// Composite Simpson, fourth order.
    Simpson,
    /// Plain Riemann sum with every weight equal to one. Not normalised to
    /// `2 j*`; used by the spectral cross-checks and the brute-force oracle.
    Unit,
}

impl QuadratureRule {
    pub fn name(self) -> &'static str {
        match self {
            QuadratureRule::Trapezoid => "trapezoid",
            QuadratureRule::Simpson => "simpson",
            QuadratureRule::Unit => "unit",
        }
    }
}

impl fmt::Display for QuadratureRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuadratureRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trapezoid" => Ok(QuadratureRule::Trapezoid),
            "simpson" => Ok(QuadratureRule::Simpson),
            "unit" => Ok(QuadratureRule::Unit),
            other => Err(Error::Parameter(format!(
                "unknown quadrature rule `{other}` (expected simpson, trapezoid or unit)"
            ))),
        }
    }
}

/// Half-range weights `xi_0..xi_{j*}` for a symmetric sum
/// `xi_0 f_0 + sum_{j=1}^{j*} xi_j (f_{-j} + f_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    rule: QuadratureRule,
    exact: Vec<Ratio<i64>>,
    values: Vec<f64>,
}

impl WeightTable {
    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn jstar(&self) -> usize {
        self.exact.len() - 1
    }

    pub fn exact(&self) -> &[Ratio<i64>] {
        &self.exact
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `xi_0 + 2 sum xi_j`, computed exactly.
    pub fn normalization(&self) -> Ratio<i64> {
        let tail: Ratio<i64> = self.exact[1..].iter().copied().sum();
        self.exact[0] + tail * 2
    }
}

/// Weight table for `rule` over half-range `jstar`.
///
/// Simpson needs at least two panels per side; `jstar = 1` falls back to the
/// trapezoid rule with a warning.
pub fn quadrature_weights(rule: QuadratureRule, jstar: usize) -> Result<WeightTable> {
    if jstar < 1 {
        return Err(Error::Parameter(
            "quadrature half-range j* must be >= 1".into(),
        ));
    }
    let (rule, exact) = match rule {
        QuadratureRule::Unit => (rule, vec![Ratio::from_integer(1); jstar + 1]),
        QuadratureRule::Trapezoid => (rule, trapezoid(jstar)),
        QuadratureRule::Simpson if jstar == 1 => {
            log::warn!("Simpson rule needs j* >= 2; using the trapezoid rule for j* = 1");
            (QuadratureRule::Trapezoid, trapezoid(jstar))
        }
        QuadratureRule::Simpson => {
            let third = Ratio::new(1, 3);
            let exact = (0..=jstar)
                .map(|j| {
                    let from_end = jstar - j;
                    if from_end == 0 {
                        third
                    } else if from_end % 2 == 1 {
                        third * 4
                    } else {
                        third * 2
                    }
                })
                .collect();
            (rule, exact)
        }
    };
    let values = exact
        .iter()
        .map(|r: &Ratio<i64>| *r.numer() as f64 / *r.denom() as f64)
        .collect();
    Ok(WeightTable {
        rule,
        exact,
        values,
    })
}

fn trapezoid(jstar: usize) -> Vec<Ratio<i64>> {
    let mut w = vec![Ratio::from_integer(1); jstar + 1];
    w[jstar] = Ratio::new(1, 2);
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Ratio<i64> {
        Ratio::new(n, d)
    }

    #[test]
    fn centered_grid_knots() {
        let g = Grid::centered(20.0, 10).unwrap();
        assert_eq!(g.h(), 2.0);
        assert_eq!(g.knot(0), -9.0);
        assert_eq!(g.knot(9), 9.0);
        assert_eq!(g.left_edge(), -10.0);
        assert_eq!(g.right_edge(), 10.0);
        let g = Grid::centered(20.0, 160).unwrap();
        assert_eq!(g.h(), 0.125);
    }

    #[test]
    fn grid_rejects_bad_knot_counts() {
        assert!(Grid::centered(20.0, 7).is_err());
        assert!(Grid::centered(20.0, 2).is_err());
        assert!(Grid::centered(0.0, 10).is_err());
        assert!(Grid::centered(-5.0, 10).is_err());
    }

    #[test]
    fn knots_are_exactly_symmetric() {
        let g = Grid::centered(20.0, 200).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.knot(i), -g.knot(g.len() - 1 - i));
        }
    }

    #[test]
    fn extension_preserves_coordinates() {
        let g = Grid::centered(20.0, 160).unwrap();
        let e = g.extended(160, 0);
        assert_eq!(e.len(), 320);
        assert_eq!(e.h(), g.h());
        assert_eq!(e.length(), 40.0);
        for i in 0..g.len() {
            assert_eq!(e.knot(i + 160), g.knot(i));
        }
    }

    #[test]
    fn simpson_weights() {
        let w = quadrature_weights(QuadratureRule::Simpson, 3).unwrap();
        assert_eq!(w.exact(), &[r(4, 3), r(2, 3), r(4, 3), r(1, 3)]);
        assert_eq!(w.normalization(), r(6, 1));
        let w = quadrature_weights(QuadratureRule::Simpson, 4).unwrap();
        assert_eq!(w.exact(), &[r(2, 3), r(4, 3), r(2, 3), r(4, 3), r(1, 3)]);
        assert_eq!(w.normalization(), r(8, 1));
    }

    #[test]
    fn trapezoid_weights() {
        let w = quadrature_weights(QuadratureRule::Trapezoid, 2).unwrap();
        assert_eq!(w.exact(), &[r(1, 1), r(1, 1), r(1, 2)]);
        assert_eq!(w.normalization(), r(4, 1));
    }

    #[test]
    fn simpson_single_panel_falls_back() {
        let w = quadrature_weights(QuadratureRule::Simpson, 1).unwrap();
        assert_eq!(w.rule(), QuadratureRule::Trapezoid);
        assert_eq!(w.exact(), &[r(1, 1), r(1, 2)]);
    }

    #[test]
    fn zero_half_range_rejected() {
        assert!(quadrature_weights(QuadratureRule::Trapezoid, 0).is_err());
    }

    #[test]
    fn boundary_resolution_examples() {
        // 1-based n_1..n_8 stored as 1.0..8.0
        let v: Vec<f64> = (1..=8).map(f64::from).collect();
        assert_eq!(
            resolve_offset(&v, 1, -3, BoundaryMode::Periodic).unwrap(),
            7.0
        );
        assert_eq!(
            resolve_offset(&v, 6, 3, BoundaryMode::Dirichlet).unwrap(),
            0.0
        );
        assert_eq!(
            resolve_offset(&v, 0, -2, BoundaryMode::Asymptotic).unwrap(),
            1.0
        );
        assert_eq!(
            resolve_offset(&v, 7, 2, BoundaryMode::Asymptotic).unwrap(),
            8.0
        );
        let combined = BoundaryMode::LeftAsymptoticRightDirichlet;
        assert_eq!(resolve_offset(&v, 0, -2, combined).unwrap(), 1.0);
        assert_eq!(resolve_offset(&v, 7, 2, combined).unwrap(), 0.0);
        let mirrored = BoundaryMode::LeftDirichletRightAsymptotic;
        assert_eq!(resolve_offset(&v, 0, -2, mirrored).unwrap(), 0.0);
        assert_eq!(resolve_offset(&v, 7, 2, mirrored).unwrap(), 8.0);
        assert_eq!(resolve_offset(&v, 3, 2, mirrored).unwrap(), 6.0);
    }

    #[test]
    fn half_domain_offset_is_a_contract_violation() {
        let v = vec![1.0; 8];
        assert!(matches!(
            resolve_offset(&v, 3, 4, BoundaryMode::Periodic),
            Err(Error::Contract(_))
        ));
        assert!(resolve_offset(&v, 3, -4, BoundaryMode::Dirichlet).is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in BoundaryMode::ALL {
            assert_eq!(m.name().parse::<BoundaryMode>().unwrap(), m);
            assert_eq!(m.mirrored().mirrored(), m);
        }
        assert!("sideways".parse::<BoundaryMode>().is_err());
    }

    proptest! {
        #[test]
        fn normalization_is_exact(jstar in 1usize..=1000) {
            for rule in [QuadratureRule::Trapezoid, QuadratureRule::Simpson] {
                let w = quadrature_weights(rule, jstar).unwrap();
                prop_assert_eq!(w.normalization(), Ratio::from_integer(2 * jstar as i64));
                prop_assert!(w.exact().iter().all(|x| *x > Ratio::from_integer(0)));
            }
        }

        #[test]
        fn periodic_resolution_is_a_wrap(half in 2usize..40, i_frac in 0.0f64..1.0, j_frac in 0.0f64..1.0) {
            let n = 2 * half;
            let v: Vec<f64> = (0..n).map(|k| k as f64).collect();
            let i = ((n as f64) * i_frac) as usize % n;
            let j = ((half - 1) as f64 * j_frac) as isize;
            let got = resolve_offset(&v, i, -j, BoundaryMode::Periodic).unwrap();
            let want = ((i as isize - j).rem_euclid(n as isize)) as f64;
            prop_assert_eq!(got, want);
        }

        #[test]
        fn constant_field_resolves_to_constant(c in 0.1f64..10.0, i in 0usize..16, off in -7isize..8) {
            let v = vec![c; 16];
            for mode in BoundaryMode::ALL {
                let got = resolve_offset(&v, i, off, mode).unwrap();
                let p = i as isize + off;
                let spilled_left = p < 0 && mode.left() == SideRule::Dirichlet;
                let spilled_right = p >= 16 && mode.right() == SideRule::Dirichlet;
                if spilled_left || spilled_right {
                    prop_assert_eq!(got, 0.0);
                } else {
                    prop_assert_eq!(got, c);
                }
            }
        }
    }
}
