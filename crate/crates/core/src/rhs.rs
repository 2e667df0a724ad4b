//! Direct evaluation of the discretised right-hand side.
//!
//! For knot `i` the rate is
//!
//! ```text
//! s_i = h sum_{j=1}^{ja} xa_j a_j [lam_i (n_{i-j} + n_{i+j}) - n_i (lam_{i-j} + lam_{i+j})]
//!     - 2h xb_0 b_0 n_i^2 - 2h n_i sum_{j=1}^{jb} xb_j b_j (n_{i-j} + n_{i+j})
//!     + 2h x2b_0 b_0 n_i^2 + 4h sum_{j=1}^{jb/2} x2b_j b_{2j} n_{i-j} n_{i+j}
//!
//! lam_i = exp(-h [xp_0 phi_0 n_i + sum_{j=1}^{jp} xp_j phi_j (n_{i-j} + n_{i+j})])
//! ```
//!
//! Neighbours outside the grid, for densities and repulsion factors alike,
//! are taken from the boundary-resolved continuation of the field.
//!
//! Each symmetric sum is accumulated in four interleaved partial sums whose
//! assignment depends only on `j`. The summation order is therefore fixed
//! per knot and identical for a knot and its mirror image.

use crate::error::{Error, Result};
use crate::grid::{
    padded, quadrature_weights, BoundaryMode, DensityField, Grid, QuadratureRule, WeightTable,
};
use crate::kernel::KernelSpec;

/// Kernels for the three interaction roles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSet {
    /// Jump kernel `a`.
    pub jump: KernelSpec,
    /// Coalescence kernel `b`.
    pub coalescence: KernelSpec,
    /// Repulsion potential `phi`.
    pub repulsion: KernelSpec,
}

impl KernelSet {
    pub fn new(jump: KernelSpec, coalescence: KernelSpec, repulsion: KernelSpec) -> Self {
        KernelSet {
            jump,
            coalescence,
            repulsion,
        }
    }

    /// Largest truncation radius among the three kernels.
    pub fn max_radius(&self) -> f64 {
        self.jump
            .truncation_radius()
            .max(self.coalescence.truncation_radius())
            .max(self.repulsion.truncation_radius())
    }
}

/// One kernel sampled at `j h` (or `2 j h`) with its weight table.
#[derive(Debug, Clone)]
pub struct SampledKernel {
    samples: Vec<f64>,
    weights: WeightTable,
    /// `xi_j * k_j`.
    weighted: Vec<f64>,
}

impl SampledKernel {
    fn new(spec: &KernelSpec, jstar: usize, spacing: f64, rule: QuadratureRule) -> Result<Self> {
        let samples: Vec<f64> = (0..=jstar).map(|j| spec.eval(j as f64 * spacing)).collect();
        let weights = quadrature_weights(rule, jstar)?;
        let weighted = samples
            .iter()
            .zip(weights.values())
            .map(|(k, w)| w * k)
            .collect();
        Ok(SampledKernel {
            samples,
            weights,
            weighted,
        })
    }

    pub fn jstar(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn weights(&self) -> &WeightTable {
        &self.weights
    }

    pub fn weighted(&self) -> &[f64] {
        &self.weighted
    }

    /// `xi_0 k_0 + 2 sum xi_j k_j`.
    fn weighted_total(&self) -> f64 {
        self.weighted[0] + 2.0 * self.weighted[1..].iter().sum::<f64>()
    }
}

/// Number of mesh steps covering radius `r`, rounded up.
pub fn half_range(r: f64, h: f64) -> usize {
    if r <= 0.0 {
        return 0;
    }
    (r / h - 1e-9).ceil().max(1.0) as usize
}

/// Precomputed kernel samples for the direct path.
#[derive(Debug, Clone)]
pub struct SampledKernels {
    h: f64,
    rule: QuadratureRule,
    kernels: KernelSet,
    jump: Option<SampledKernel>,
    coalescence: Option<SampledKernel>,
    /// `b(2 j h)` for `j = 0..=floor(jb / 2)`.
    gain: Option<SampledKernel>,
    repulsion: Option<SampledKernel>,
}

impl SampledKernels {
    pub fn new(kernels: &KernelSet, grid: &Grid, rule: QuadratureRule) -> Result<Self> {
        let h = grid.h();
        let max_j = grid.len() / 2 - 1;
        let check = |name: &str, spec: &KernelSpec| -> Result<usize> {
            spec.validate()?;
            let j = half_range(spec.truncation_radius(), h);
            if j > max_j {
                return Err(Error::Config(format!(
                    "{name} kernel truncation radius {} needs {j} mesh steps but the domain \
                     L = {} allows at most {max_j} (R must stay below L/2); increase L",
                    spec.truncation_radius(),
                    grid.length()
                )));
            }
            Ok(j)
        };
        let ja = check("jump", &kernels.jump)?;
        let jb = check("coalescence", &kernels.coalescence)?;
        let jp = check("repulsion", &kernels.repulsion)?;

        let jump = if kernels.jump.is_enabled() {
            Some(SampledKernel::new(&kernels.jump, ja, h, rule)?)
        } else {
            None
        };
        let (coalescence, gain) = if kernels.coalescence.is_enabled() {
            if jb < 2 {
                return Err(Error::Config(format!(
                    "coalescence kernel radius {} spans fewer than two mesh steps (h = {h}); refine the mesh",
                    kernels.coalescence.truncation_radius()
                )));
            }
            (
                Some(SampledKernel::new(&kernels.coalescence, jb, h, rule)?),
                Some(SampledKernel::new(
                    &kernels.coalescence,
                    jb / 2,
                    2.0 * h,
                    rule,
                )?),
            )
        } else {
            (None, None)
        };
        let repulsion = if kernels.repulsion.is_enabled() {
            Some(SampledKernel::new(&kernels.repulsion, jp, h, rule)?)
        } else {
            None
        };
        Ok(SampledKernels {
            h,
            rule,
            kernels: *kernels,
            jump,
            coalescence,
            gain,
            repulsion,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn kernels(&self) -> &KernelSet {
        &self.kernels
    }

    pub fn jump(&self) -> Option<&SampledKernel> {
        self.jump.as_ref()
    }

    pub fn coalescence(&self) -> Option<&SampledKernel> {
        self.coalescence.as_ref()
    }

    pub fn gain(&self) -> Option<&SampledKernel> {
        self.gain.as_ref()
    }

    pub fn repulsion(&self) -> Option<&SampledKernel> {
        self.repulsion.as_ref()
    }

    fn ja(&self) -> usize {
        self.jump.as_ref().map_or(0, SampledKernel::jstar)
    }

    fn jb(&self) -> usize {
        self.coalescence.as_ref().map_or(0, SampledKernel::jstar)
    }

    fn jp(&self) -> usize {
        self.repulsion.as_ref().map_or(0, SampledKernel::jstar)
    }

    /// Largest half-range among the sampled kernels.
    pub fn max_half_range(&self) -> usize {
        self.ja().max(self.jb()).max(self.jp())
    }

    /// Coefficient `c` such that a spatially flat field evolves as
    /// `dn/dt = -c n^2` under this discretisation (the discrete counterpart
    /// of `mu_b`).
    pub fn homogeneous_coalescence_rate(&self) -> f64 {
        match (&self.coalescence, &self.gain) {
            (Some(loss), Some(gain)) => {
                2.0 * self.h * loss.weighted_total() - 2.0 * self.h * gain.weighted_total()
            }
            _ => 0.0,
        }
    }
}

/// Time derivatives `dn_i/dt` at the knots of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RateField {
    grid: Grid,
    values: Vec<f64>,
}

impl RateField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        RateField { grid, values }
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

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `sum_k w[k] * (left[k] + right[k])` in four interleaved partial sums.
#[inline]
fn pair_sum(w: &[f64], left: &[f64], right: &[f64]) -> f64 {
    let n = w.len();
    let (left, right) = (&left[..n], &right[..n]);
    let mut acc = [0.0f64; 4];
    for ((wc, lc), rc) in w
        .chunks_exact(4)
        .zip(left.chunks_exact(4))
        .zip(right.chunks_exact(4))
    {
        for q in 0..4 {
            acc[q] += wc[q] * (lc[q] + rc[q]);
        }
    }
    let rem = n - n % 4;
    let mut tail = 0.0;
    for k in rem..n {
        tail += w[k] * (left[k] + right[k]);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `sum_k w[k] * left[k] * right[k]` in four interleaved partial sums.
#[inline]
fn product_sum(w: &[f64], left: &[f64], right: &[f64]) -> f64 {
    let n = w.len();
    let (left, right) = (&left[..n], &right[..n]);
    let mut acc = [0.0f64; 4];
    for ((wc, lc), rc) in w
        .chunks_exact(4)
        .zip(left.chunks_exact(4))
        .zip(right.chunks_exact(4))
    {
        for q in 0..4 {
            acc[q] += wc[q] * (lc[q] * rc[q]);
        }
    }
    let rem = n - n % 4;
    let mut tail = 0.0;
    for k in rem..n {
        tail += w[k] * (left[k] * right[k]);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// A padded sequence together with its reverse, so that both the
/// `x_{c-j}` and the `x_{c+j}` runs are contiguous and ascending in `j`.
#[derive(Debug, Default, Clone)]
struct Mirrored {
    fwd: Vec<f64>,
    rev: Vec<f64>,
}

impl Mirrored {
    fn fill_reverse(&mut self) {
        self.rev.clear();
        self.rev.extend(self.fwd.iter().rev());
    }

    /// `x_{c-1}, x_{c-2}, ..., x_{c-len}` for padded position `c`.
    #[inline]
    fn before(&self, c: usize, len: usize) -> &[f64] {
        let start = self.fwd.len() - c;
        &self.rev[start..start + len]
    }

    /// `x_{c+1}, ..., x_{c+len}`.
    #[inline]
    fn after(&self, c: usize, len: usize) -> &[f64] {
        &self.fwd[c + 1..c + 1 + len]
    }
}

/// Reusable evaluator for the direct path.
#[derive(Debug, Clone)]
pub struct DirectRhs {
    ws: SampledKernels,
    mode: BoundaryMode,
    dens: Mirrored,
    lam: Mirrored,
}

impl DirectRhs {
    pub fn new(ws: SampledKernels, mode: BoundaryMode) -> Self {
        DirectRhs {
            ws,
            mode,
            dens: Mirrored::default(),
            lam: Mirrored::default(),
        }
    }

    pub fn workspace(&self) -> &SampledKernels {
        &self.ws
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    /// Padding so that repulsion factors are available `ja` knots beyond
    /// each edge.
    fn pad(&self) -> usize {
        let (ja, jb, jp) = (self.ws.ja(), self.ws.jb(), self.ws.jp());
        if self.mode.is_periodic() {
            ja.max(jb).max(jp)
        } else {
            (ja + jp).max(jb)
        }
    }

    /// Repulsion factors for padded positions `[pad - ja, pad + n + ja)`,
    /// written into `self.lam.fwd` indexed like the padded density.
    fn fill_lambda(&mut self, n: usize, pad: usize) {
        let h = self.ws.h;
        let total = n + 2 * pad;
        self.lam.fwd.clear();
        self.lam.fwd.resize(total, 1.0);
        let Some(rep) = self.ws.repulsion.as_ref() else {
            self.lam.fill_reverse();
            return;
        };
        let jp = rep.jstar();
        let w0 = rep.weighted[0];
        let w = &rep.weighted[1..];
        let ja = self.ws.ja();
        let lambda_at = |dens: &Mirrored, c: usize| -> f64 {
            let acc = w0 * dens.fwd[c] + pair_sum(w, dens.before(c, jp), dens.after(c, jp));
            (-h * acc).exp()
        };
        if self.mode.is_periodic() {
            for c in pad..pad + n {
                self.lam.fwd[c] = lambda_at(&self.dens, c);
            }
            for c in (pad - ja)..pad {
                self.lam.fwd[c] = self.lam.fwd[c + n];
            }
            for c in (pad + n)..(pad + n + ja) {
                self.lam.fwd[c] = self.lam.fwd[c - n];
            }
        } else {
            for c in (pad - ja)..(pad + n + ja) {
                self.lam.fwd[c] = lambda_at(&self.dens, c);
            }
        }
        self.lam.fill_reverse();
    }

    fn prepare(&mut self, values: &[f64]) -> usize {
        let pad = self.pad();
        self.dens.fwd = padded(values, pad, self.mode);
        self.dens.fill_reverse();
        self.fill_lambda(values.len(), pad);
        pad
    }

    /// Repulsion factors at the knots.
    pub fn lambda(&mut self, values: &[f64]) -> Vec<f64> {
        let pad = self.prepare(values);
        self.lam.fwd[pad..pad + values.len()].to_vec()
    }

    /// Write `dn_i/dt` for the density `values` into `out`.
    pub fn eval(&mut self, values: &[f64], out: &mut [f64]) {
        let n = values.len();
        assert_eq!(out.len(), n, "rate buffer length mismatch");
        let pad = self.prepare(values);
        let h = self.ws.h;
        let dens = &self.dens;
        let lam = &self.lam;
        let jump = self.ws.jump.as_ref();
        let loss = self.ws.coalescence.as_ref();
        let gain = self.ws.gain.as_ref();

        for (i, s) in out.iter_mut().enumerate() {
            let c = pad + i;
            let nc = dens.fwd[c];
            let mut rate = 0.0;
            if let Some(a) = jump {
                let ja = a.jstar();
                let w = &a.weighted[1..];
                let dens_sum = pair_sum(w, dens.before(c, ja), dens.after(c, ja));
                let lam_sum = pair_sum(w, lam.before(c, ja), lam.after(c, ja));
                rate += h * (lam.fwd[c] * dens_sum - nc * lam_sum);
            }
            if let (Some(b), Some(g)) = (loss, gain) {
                let jb = b.jstar();
                let jg = g.jstar();
                let loss_sum = pair_sum(&b.weighted[1..], dens.before(c, jb), dens.after(c, jb));
                let gain_sum = product_sum(&g.weighted[1..], dens.before(c, jg), dens.after(c, jg));
                rate += -2.0 * h * b.weighted[0] * nc * nc - 2.0 * h * nc * loss_sum
                    + 2.0 * h * g.weighted[0] * nc * nc
                    + 4.0 * h * gain_sum;
            }
            *s = rate;
        }
    }
}

/// Repulsion factors `lambda_i` for `field`.
pub fn compute_lambda(field: &DensityField, ws: &SampledKernels, mode: BoundaryMode) -> Vec<f64> {
    DirectRhs::new(ws.clone(), mode).lambda(field.values())
}

/// Rate field for `field` on the direct path.
pub fn compute_rhs(field: &DensityField, ws: &SampledKernels, mode: BoundaryMode) -> RateField {
    let mut out = vec![0.0; field.len()];
    DirectRhs::new(ws.clone(), mode).eval(field.values(), &mut out);
    RateField::new(field.grid().clone(), out)
}

/// Brute-force evaluation of the untruncated discrete equation with unit
/// weights and every offset `|j| <= N/2 - 1`, kernels evaluated on the fly.
/// Cost is cubic in `N`; intended for small test grids.
pub fn compute_rhs_naive(
    field: &DensityField,
    kernels: &KernelSet,
    mode: BoundaryMode,
) -> RateField {
    let n = field.len() as isize;
    let h = field.grid().h();
    let values = field.values();
    let reach = n / 2 - 1;
    let dens = |p: isize| crate::grid::resolve_unchecked(values, p, mode);
    let lambda = |p: isize| -> f64 {
        let s: f64 = (-reach..=reach)
            .map(|k| kernels.repulsion.eval(k as f64 * h) * dens(p - k))
            .sum();
        (-h * s).exp()
    };
    let lam_range: Vec<f64> = (-n..2 * n).map(lambda).collect();
    let lam = |p: isize| -> f64 {
        if mode.is_periodic() {
            lam_range[(p.rem_euclid(n) + n) as usize]
        } else {
            lam_range[(p + n) as usize]
        }
    };
    let out = (0..n)
        .map(|i| {
            let ni = dens(i);
            let li = lam(i);
            let s: f64 = (-reach..=reach)
                .map(|j| {
                    let x = j as f64 * h;
                    let a = kernels.jump.eval(x);
                    let b = kernels.coalescence.eval(x);
                    let b2 = kernels.coalescence.eval(2.0 * x);
                    a * (li * dens(i - j) - lam(i - j) * ni) - 2.0 * b * ni * dens(i - j)
                        + 2.0 * b2 * dens(i - j) * dens(i + j)
                })
                .sum();
            h * s
        })
        .collect();
    RateField::new(field.grid().clone(), out)
}
