//! Convolution-theorem evaluation of the rate for periodic runs without
//! coalescence.
//!
//! ```text
//! dn_i/dt = -h n_i IDFT(a~ g~)_i + h g_i IDFT(a~ n~)_i
//! g_i     = exp(-h IDFT(phi~ n~)_i)
//! ```
//!
//! Kernels are sampled at offsets `k h` in wraparound order (offset zero at
//! bin 0, negative offsets in the upper half) and use unit weights.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{BoundaryMode, DensityField, Grid};
use crate::kernel::KernelSpec;
use crate::rhs::{KernelSet, RateField};

fn plan(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

/// `F_k = sum_i f_i exp(-2 pi i k i / N)`, unnormalised.
pub fn dft_forward(f: &[f64]) -> Vec<Complex64> {
    let (fwd, _) = plan(f.len());
    let mut buf: Vec<Complex64> = f.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    fwd.process(&mut buf);
    buf
}

/// Inverse of [`dft_forward`] including the `1/N` factor; returns real parts.
pub fn dft_inverse(spectrum: &[Complex64]) -> Vec<f64> {
    let n = spectrum.len();
    let (_, inv) = plan(n);
    let mut buf = spectrum.to_vec();
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Samples of `kernel` at offsets `k h` in wraparound order.
pub fn wraparound_samples(kernel: &KernelSpec, n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let offset = if k < n / 2 {
                k as isize
            } else {
                k as isize - n as isize
            };
            kernel.eval(offset as f64 * h)
        })
        .collect()
}

/// Precomputed kernel spectra plus scratch buffers.
#[derive(Clone)]
pub struct SpectralWorkspace {
    grid: Grid,
    a_hat: Vec<Complex64>,
    phi_hat: Vec<Complex64>,
    repulsion_enabled: bool,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    n_hat: Vec<Complex64>,
    work: Vec<Complex64>,
    scratch: Vec<Complex64>,
    g: Vec<f64>,
}

impl fmt::Debug for SpectralWorkspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralWorkspace")
            .field("grid", &self.grid)
            .field("repulsion_enabled", &self.repulsion_enabled)
            .finish_non_exhaustive()
    }
}

/// Reject configurations outside the spectral path's scope.
pub fn check_eligible(kernels: &KernelSet, mode: BoundaryMode) -> Result<()> {
    if kernels.coalescence.is_enabled() {
        return Err(Error::Contract("spectral path requires b = 0".into()));
    }
    if !mode.is_periodic() {
        return Err(Error::Contract(format!(
            "spectral path requires periodic boundaries, got {mode}"
        )));
    }
    Ok(())
}

impl SpectralWorkspace {
    pub fn new(kernels: &KernelSet, grid: &Grid) -> Result<Self> {
        check_eligible(kernels, BoundaryMode::Periodic)?;
        kernels.jump.validate()?;
        kernels.repulsion.validate()?;
        let n = grid.len();
        let h = grid.h();
        let (fwd, inv) = plan(n);
        let transform = |k: &KernelSpec| {
            let mut buf: Vec<Complex64> = wraparound_samples(k, n, h)
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect();
            fwd.process(&mut buf);
            buf
        };
        let a_hat = transform(&kernels.jump);
        let phi_hat = transform(&kernels.repulsion);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Ok(SpectralWorkspace {
            grid: grid.clone(),
            a_hat,
            phi_hat,
            repulsion_enabled: kernels.repulsion.is_enabled(),
            fwd,
            inv,
            n_hat: vec![Complex64::default(); n],
            work: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); scratch_len],
            g: vec![1.0; n],
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn a_hat(&self) -> &[Complex64] {
        &self.a_hat
    }

    pub fn phi_hat(&self) -> &[Complex64] {
        &self.phi_hat
    }

    /// Inverse transform of `spec * self.work`, written to `self.work`.
    fn convolve_work(&mut self, spec: &[Complex64]) {
        for (w, s) in self.work.iter_mut().zip(spec) {
            *w *= *s;
        }
        self.inv
            .process_with_scratch(&mut self.work, &mut self.scratch);
    }

    /// Write `dn_i/dt` for `values` into `out`.
    pub fn eval(&mut self, values: &[f64], out: &mut [f64]) {
        let n = self.grid.len();
        assert_eq!(
            values.len(),
            n,
            "field length does not match the spectral workspace"
        );
        assert_eq!(out.len(), n, "rate buffer length mismatch");
        let h = self.grid.h();
        let scale = h / n as f64;

        for (c, v) in self.n_hat.iter_mut().zip(values) {
            *c = Complex64::new(*v, 0.0);
        }
        self.fwd
            .process_with_scratch(&mut self.n_hat, &mut self.scratch);

        if self.repulsion_enabled {
            self.work.copy_from_slice(&self.n_hat);
            let phi_hat = std::mem::take(&mut self.phi_hat);
            self.convolve_work(&phi_hat);
            self.phi_hat = phi_hat;
            for (g, w) in self.g.iter_mut().zip(&self.work) {
                *g = (-scale * w.re).exp();
            }
        } else {
            self.g.iter_mut().for_each(|g| *g = 1.0);
        }

        let a_hat = std::mem::take(&mut self.a_hat);
        // a * n
        self.work.copy_from_slice(&self.n_hat);
        self.convolve_work(&a_hat);
        for ((o, w), g) in out.iter_mut().zip(&self.work).zip(&self.g) {
            *o = scale * g * w.re;
        }
        // a * g
        for (w, g) in self.work.iter_mut().zip(&self.g) {
            *w = Complex64::new(*g, 0.0);
        }
        self.fwd
            .process_with_scratch(&mut self.work, &mut self.scratch);
        self.convolve_work(&a_hat);
        for ((o, w), v) in out.iter_mut().zip(&self.work).zip(values) {
            *o -= scale * v * w.re;
        }
        self.a_hat = a_hat;
    }
}

/// Rate field for `field` on the spectral path.
pub fn compute_rhs_spectral(field: &DensityField, ws: &mut SpectralWorkspace) -> Result<RateField> {
    if field.grid() != ws.grid() {
        return Err(Error::Contract(
            "field grid differs from the spectral workspace grid".into(),
        ));
    }
    let mut out = vec![0.0; field.len()];
    ws.eval(field.values(), &mut out);
    Ok(RateField::new(field.grid().clone(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::QuadratureRule;
    use crate::kernel::{sample_initial, InitialConditionSpec, KernelShape};
    use crate::rhs::{compute_rhs, SampledKernels};
    use proptest::prelude::*;

    fn off() -> KernelSpec {
        KernelSpec::disabled()
    }

    #[test]
    fn constant_sequence_has_only_zero_mode() {
        let f = dft_forward(&[2.5; 16]);
        assert!((f[0].re - 40.0).abs() < 1e-12);
        for c in &f[1..] {
            assert!(c.norm() < 1e-12);
        }
    }

    #[test]
    fn cosine_hits_two_bins() {
        let n = 32;
        let k0 = 5;
        let f: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * (k0 * i) as f64 / n as f64).cos())
            .collect();
        let spec = dft_forward(&f);
        for (k, c) in spec.iter().enumerate() {
            if k == k0 || k == n - k0 {
                assert!((c.re - n as f64 / 2.0).abs() < 1e-10);
            } else {
                assert!(c.norm() < 1e-10, "bin {k}: {c}");
            }
        }
    }

    #[test]
    fn zero_mode_is_kernel_mass_over_h() {
        let grid = Grid::centered(20.0, 200).unwrap();
        let set = KernelSet::new(KernelSpec::gaussian(1.0, 1.0).unwrap(), off(), off());
        let ws = SpectralWorkspace::new(&set, &grid).unwrap();
        assert!((ws.a_hat()[0].re * grid.h() - 1.0).abs() < 1e-6);
        for c in ws.a_hat() {
            assert!(c.im.abs() < 1e-12);
        }
        assert!(ws.phi_hat().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn coalescence_is_rejected() {
        let grid = Grid::centered(20.0, 200).unwrap();
        let set = KernelSet::new(off(), KernelSpec::gaussian(0.5, 1.0).unwrap(), off());
        assert!(matches!(
            SpectralWorkspace::new(&set, &grid),
            Err(Error::Contract(_))
        ));
        let ok = KernelSet::new(KernelSpec::gaussian(1.0, 1.0).unwrap(), off(), off());
        assert!(check_eligible(&ok, BoundaryMode::Dirichlet).is_err());
    }

    #[test]
    fn wraparound_places_shifted_pair_peaks() {
        // Shifted-pair rectangle of half-width 0.5 centred at +-3: convolving a
        // unit spike at knot 10 must spread to knots 10 +- {5, 6, 7} (h = 0.5).
        let grid = Grid::centered(16.0, 32).unwrap();
        let a = KernelSpec::new(KernelShape::Rectangle, 1.0, 0.5, 3.0).unwrap();
        let n = grid.len();
        let samples = wraparound_samples(&a, n, grid.h());
        let mut spike = vec![0.0; n];
        spike[10] = 1.0;
        let sa = dft_forward(&samples);
        let ss = dft_forward(&spike);
        let prod: Vec<Complex64> = sa.iter().zip(&ss).map(|(x, y)| x * y).collect();
        let conv = dft_inverse(&prod);
        let peak = conv.iter().cloned().fold(0.0, f64::max);
        let peaks: Vec<usize> = (0..n).filter(|i| (conv[*i] - peak).abs() < 1e-12).collect();
        assert_eq!(peaks, vec![3, 4, 5, 15, 16, 17]);
    }

    #[test]
    fn flat_and_zero_fields() {
        let grid = Grid::centered(20.0, 200).unwrap();
        let set = KernelSet::new(
            KernelSpec::gaussian(1.0, 1.0).unwrap(),
            off(),
            KernelSpec::gaussian(20.0, 1.0).unwrap(),
        );
        let mut ws = SpectralWorkspace::new(&set, &grid).unwrap();
        let zero = DensityField::zeros(grid.clone());
        assert!(compute_rhs_spectral(&zero, &mut ws).unwrap().max_abs() == 0.0);
        let flat = DensityField::new(grid.clone(), vec![1.0; 200]).unwrap();
        assert!(compute_rhs_spectral(&flat, &mut ws).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn trigonometric_field_matches_direct_path() {
        let grid = Grid::centered(20.0, 200).unwrap();
        let set = KernelSet::new(
            KernelSpec::gaussian(1.0, 1.0).unwrap(),
            off(),
            KernelSpec::gaussian(8.0, 1.0).unwrap(),
        );
        let ic = InitialConditionSpec::Trigonometric {
            n0: 1.0,
            mu0: 1.0,
            k: 3.0,
        };
        let f = sample_initial(&ic, &grid, false).unwrap();
        let mut ws = SpectralWorkspace::new(&set, &grid).unwrap();
        let spectral = compute_rhs_spectral(&f, &mut ws).unwrap();
        for rule in [QuadratureRule::Simpson, QuadratureRule::Unit] {
            let direct = compute_rhs(
                &f,
                &SampledKernels::new(&set, &grid, rule).unwrap(),
                BoundaryMode::Periodic,
            );
            let diff = spectral
                .values()
                .iter()
                .zip(direct.values())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(diff <= 1e-6, "{rule}: {diff}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn round_trip(values in prop::collection::vec(-5.0f64..5.0, 2..64usize)) {
            let back = dft_inverse(&dft_forward(&values));
            for (x, y) in values.iter().zip(&back) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn spectral_conserves_mass_and_matches_unit_direct(
            values in prop::collection::vec(0.0f64..2.0, 64),
            sa in 0.2f64..0.9, sp in 0.2f64..0.9, mp in 0.0f64..20.0,
        ) {
            let grid = Grid::centered(12.8, 64).unwrap();
            let set = KernelSet::new(
                KernelSpec::gaussian(1.0, sa).unwrap(),
                off(),
                KernelSpec::gaussian(mp, sp).unwrap(),
            );
            let f = DensityField::new(grid.clone(), values).unwrap();
            let mut ws = SpectralWorkspace::new(&set, &grid).unwrap();
            let s = compute_rhs_spectral(&f, &mut ws).unwrap();
            let d = compute_rhs(
                &f,
                &SampledKernels::new(&set, &grid, QuadratureRule::Unit).unwrap(),
                BoundaryMode::Periodic,
            );
            let scale = d.max_abs();
            for (x, y) in s.values().iter().zip(d.values()) {
                prop_assert!((x - y).abs() <= 1e-6 * scale + 1e-10, "{x} vs {y}");
            }
            let total: f64 = s.values().iter().sum();
            let abs: f64 = s.values().iter().map(|v| v.abs()).sum();
            prop_assert!(total.abs() <= 1e-10 * abs.max(1.0));
        }
    }
}
