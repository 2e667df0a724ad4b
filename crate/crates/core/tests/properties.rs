use kinetics_core::diagnostics::{max_abs_diff, total_mass};
use kinetics_core::rhs::compute_rhs;
use kinetics_core::spectral::{compute_rhs_spectral, SpectralWorkspace};
use kinetics_core::{
    BoundaryMode, DensityField, Grid, KernelSet, KernelSpec, QuadratureRule, SampledKernels,
};
use proptest::prelude::*;

const L: f64 = 12.8;

fn kernels(mu_a: f64, mu_b: f64, mu_phi: f64) -> KernelSet {
    KernelSet::new(
        KernelSpec::gaussian(mu_a, 1.0).unwrap(),
        KernelSpec::gaussian(mu_b, 0.5).unwrap(),
        KernelSpec::gaussian(mu_phi, 1.0).unwrap(),
    )
}

fn field(values: Vec<f64>) -> DensityField {
    let grid = Grid::centered(L, values.len()).unwrap();
    DensityField::new(grid, values).unwrap()
}

fn densities(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..2.0, n)
}

fn modes() -> impl Strategy<Value = BoundaryMode> {
    prop::sample::select(BoundaryMode::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reversal_commutes_with_the_rate(
        values in densities(128),
        mode in modes(),
        mu_a in 0.0f64..2.0,
        mu_b in 0.0f64..2.0,
        mu_phi in 0.0f64..20.0,
    ) {
        let ks = kernels(mu_a, mu_b, mu_phi);
        let f = field(values);
        let ws = SampledKernels::new(&ks, f.grid(), QuadratureRule::Simpson).unwrap();
        let forward = compute_rhs(&f, &ws, mode);
        let backward = compute_rhs(&f.reversed(), &ws, mode.mirrored());
        let mut flipped = backward.values().to_vec();
        flipped.reverse();
        prop_assert_eq!(forward.values(), flipped.as_slice());
    }

    #[test]
    fn periodic_jumps_conserve_mass(
        values in densities(128),
        mu_a in 0.1f64..2.0,
        mu_phi in 0.0f64..20.0,
    ) {
        let ks = kernels(mu_a, 0.0, mu_phi);
        let f = field(values);
        let ws = SampledKernels::new(&ks, f.grid(), QuadratureRule::Simpson).unwrap();
        let rate = compute_rhs(&f, &ws, BoundaryMode::Periodic);
        let scale = 1.0 + rate.max_abs();
        let drift: f64 = rate.values().iter().sum::<f64>() * f.grid().h();
        prop_assert!(drift.abs() <= 1e-12 * scale * 128.0, "drift {drift}");
    }

    #[test]
    fn coalescence_never_adds_mass(values in densities(128), mu_b in 0.1f64..2.0) {
        let ks = kernels(0.0, mu_b, 0.0);
        let f = field(values);
        let ws = SampledKernels::new(&ks, f.grid(), QuadratureRule::Simpson).unwrap();
        let rate = compute_rhs(&f, &ws, BoundaryMode::Periodic);
        let change: f64 = rate.values().iter().sum::<f64>() * f.grid().h();
        prop_assert!(change <= 1e-12, "change {change}");
    }

    #[test]
    fn flat_fields_feel_no_jumps(level in 0.0f64..3.0, mode in prop::sample::select(vec![
        BoundaryMode::Periodic,
        BoundaryMode::Asymptotic,
    ])) {
        let ks = kernels(1.0, 0.0, 20.0);
        let f = field(vec![level; 128]);
        let ws = SampledKernels::new(&ks, f.grid(), QuadratureRule::Simpson).unwrap();
        let rate = compute_rhs(&f, &ws, mode);
        prop_assert!(rate.max_abs() <= 1e-13 * (1.0 + level), "rate {}", rate.max_abs());
    }

    #[test]
    fn spectral_matches_unit_weight_direct(values in densities(64), mu_phi in 0.0f64..20.0) {
        let mut ks = kernels(1.0, 0.0, mu_phi);
        ks.coalescence = KernelSpec::disabled();
        let f = field(values);
        let ws = SampledKernels::new(&ks, f.grid(), QuadratureRule::Unit).unwrap();
        let direct = compute_rhs(&f, &ws, BoundaryMode::Periodic);
        let mut sw = SpectralWorkspace::new(&ks, f.grid()).unwrap();
        let spectral = compute_rhs_spectral(&f, &mut sw).unwrap();
        let diff = max_abs_diff(direct.values(), spectral.values());
        prop_assert!(diff <= 1e-9 * (1.0 + direct.max_abs()), "diff {diff}");
    }
}

#[test]
fn zero_field_is_stationary() {
    let ks = kernels(1.0, 1.0, 20.0);
    let f = field(vec![0.0; 128]);
    let ws = SampledKernels::new(&ks, f.grid(), QuadratureRule::Simpson).unwrap();
    for mode in BoundaryMode::ALL {
        assert_eq!(compute_rhs(&f, &ws, mode).max_abs(), 0.0);
    }
    assert_eq!(total_mass(&f), 0.0);
}
