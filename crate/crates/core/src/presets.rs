//! Built-in scenarios for the standard figure setups.
//!
//! All presets use h = 0.1, Simpson weights and RK4 at dt = 0.1.

use crate::diagnostics::Window;
use crate::grid::BoundaryMode;
use crate::kernel::{InitialConditionSpec, KernelShape, KernelSpec};
use crate::rhs::KernelSet;
use crate::scenario::Scenario;

pub const PRESET_NAMES: [&str; 24] = [
    "fig1a",
    "fig1b",
    "fig1c",
    "fig1d",
    "fig1e",
    "fig1f",
    "fig2",
    "fig3a",
    "fig3b",
    "fig4a",
    "fig4b",
    "fig4c",
    "fig4d",
    "fig5a",
    "fig5b",
    "fig5c",
    "fig5d",
    "fig5e",
    "fig5f",
    "fig6a",
    "fig6b",
    "fig6c",
    "fig6d",
    "homogeneous",
];

fn g(mu: f64, sigma: f64) -> KernelSpec {
    g_shift(mu, sigma, 0.0)
}

fn g_shift(mu: f64, sigma: f64, shift: f64) -> KernelSpec {
    KernelSpec {
        shape: KernelShape::Gaussian,
        mu,
        sigma,
        shift,
    }
}

fn off() -> KernelSpec {
    KernelSpec::disabled()
}

fn periodic(name: &str, initial: InitialConditionSpec, kernels: KernelSet, t_end: f64) -> Scenario {
    Scenario {
        name: name.into(),
        length: 20.0,
        n: 200,
        boundary: BoundaryMode::Periodic,
        kernels,
        initial,
        t_end,
        snapshots: standard_snapshots(t_end),
        ..Scenario::default()
    }
}

fn standard_snapshots(t_end: f64) -> Vec<f64> {
    let mut out: Vec<f64> = [
        0.0, 1.0, 5.0, 10.0, 25.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0,
    ]
    .into_iter()
    .filter(|t| *t < t_end)
    .collect();
    out.push(t_end);
    out
}

/// Kernel triples for the four-panel pattern: free jumps, repulsive jumps,
/// pure coalescence, all three.
fn panel(part: char, a: KernelSpec, b: KernelSpec, phi: KernelSpec) -> KernelSet {
    match part {
        'a' => KernelSet::new(a, off(), off()),
        'b' => KernelSet::new(a, off(), phi),
        'c' => KernelSet::new(off(), b, off()),
        _ => KernelSet::new(a, b, phi),
    }
}

fn fig1(part: char) -> Scenario {
    let (sa, sphi, sb) = match part {
        'e' => (0.5, 1.0, 2.0),
        'f' => (2.0, 1.0, 0.5),
        _ => (1.0, 1.0, 1.0),
    };
    let kernels = panel(part, g(1.0, sa), g(1.0, sb), g(20.0, sphi));
    let mut s = periodic(
        &format!("fig1{part}"),
        InitialConditionSpec::Rectangle { v: 1.0, sigma: 1.0 },
        kernels,
        100.0,
    );
    widen_for_range(&mut s);
    s
}

/// Kernels of range 2 reach 12 and do not fit a period of 20; use 30.
fn widen_for_range(s: &mut Scenario) {
    if s.kernels.max_radius() >= s.length / 2.0 {
        s.length = 30.0;
        s.n = 300;
        s.notes.push(
            "domain widened from 20 to 30 so the widest kernel stays below half the domain".into(),
        );
    }
}

fn fig2() -> Scenario {
    let mut s = periodic(
        "fig2",
        InitialConditionSpec::MultiRectangle {
            amplitudes: vec![0.83, 0.27, 0.56],
            sigmas: vec![1.0, 1.0, 1.0],
        },
        KernelSet::new(g(1.0, 1.0), g(1.0, 1.0), g(20.0, 1.0)),
        100.0,
    );
    s.notes
        .push("amplitudes are a fixed draw from (0, 1) so the run is reproducible".into());
    s
}

fn fig3(part: char) -> Scenario {
    let b = KernelSpec {
        shape: KernelShape::Rectangle,
        mu: 1.0,
        sigma: 1.0,
        shift: 8.0,
    };
    let ic = InitialConditionSpec::MultiRectangle {
        amplitudes: vec![1.0, 1.0],
        sigmas: vec![1.0, 1.0],
    };
    if part == 'a' {
        let mut s = periodic("fig3a", ic, KernelSet::new(off(), b, off()), 2000.0);
        s.notes.push(
            "final time capped at 2000; the approach to the stationary state continues to t ~ 2e4"
                .into(),
        );
        s
    } else {
        periodic("fig3b", ic, KernelSet::new(g(0.2, 1.0), b, off()), 100.0)
    }
}

fn fig4(part: char) -> Scenario {
    let kernels = panel(part, g(1.0, 1.0), g(0.25, 1.0), g(8.0, 1.0));
    let mut s = periodic(
        &format!("fig4{part}"),
        InitialConditionSpec::Trigonometric {
            n0: 1.0,
            mu0: 1.0,
            k: 3.0,
        },
        kernels,
        100.0,
    );
    if matches!(part, 'c' | 'd') {
        s.notes.push(
            "coalescence intensity 0.25 follows the figure caption; the body text gives 0.5".into(),
        );
    }
    s
}

fn fig5(part: char) -> Scenario {
    let (sa, sphi, sb) = match part {
        'e' => (0.5, 1.0, 2.0),
        'f' => (2.0, 1.0, 0.5),
        _ => (1.0, 1.0, 1.0),
    };
    let kernels = match part {
        'e' | 'f' => KernelSet::new(g(1.0, sa), g(0.1, sb), g(8.0, sphi)),
        _ => panel(part, g(1.0, sa), g(0.1, sb), g(8.0, sphi)),
    };
    let mut s = Scenario {
        name: format!("fig5{part}"),
        length: 20.0,
        n: 200,
        boundary: BoundaryMode::LeftAsymptoticRightDirichlet,
        kernels,
        initial: InitialConditionSpec::Heaviside { n0: 1.0 },
        t_end: 100.0,
        snapshots: standard_snapshots(100.0),
        adaptive_enabled: true,
        ..Scenario::default()
    };
    widen_for_range(&mut s);
    s.output.windows = vec![
        (
            "homogeneous".into(),
            Window {
                lo: -80.0,
                hi: -20.0,
            },
        ),
        (
            "inhomogeneous".into(),
            Window {
                lo: -20.0,
                hi: 20.0,
            },
        ),
    ];
    s
}

fn fig6(part: char) -> Scenario {
    let (sa, sphi) = match part {
        'c' => (1.0, 2.0),
        'd' => (4.0, 8.0),
        _ => (2.0, 4.0),
    };
    let b = if part == 'b' {
        g_shift(0.05, 1.0, 2.0)
    } else {
        off()
    };
    Scenario {
        name: format!("fig6{part}"),
        length: 40.0,
        n: 400,
        boundary: BoundaryMode::LeftAsymptoticRightDirichlet,
        kernels: KernelSet::new(g_shift(1.0, 1.0, sa), b, g_shift(10.0, 1.0, sphi)),
        initial: InitialConditionSpec::Heaviside { n0: 1.0 },
        t_end: 100.0,
        snapshots: standard_snapshots(100.0),
        adaptive_enabled: true,
        ..Scenario::default()
    }
}

/// Flat field under pure coalescence, with a known closed-form solution.
fn homogeneous() -> Scenario {
    Scenario {
        name: "homogeneous".into(),
        length: 16.0,
        n: 160,
        kernels: KernelSet::new(g(1.0, 1.0), g(1.0, 1.0), off()),
        initial: InitialConditionSpec::Constant { n0: 1.0 },
        t_end: 50.0,
        snapshots: standard_snapshots(50.0),
        ..Scenario::default()
    }
}

/// Look up a preset by name.
pub fn preset(name: &str) -> Option<Scenario> {
    let mut chars = name.chars();
    let s = match name {
        "fig2" => fig2(),
        "homogeneous" => homogeneous(),
        _ if name.len() == 5 && name.starts_with("fig") => {
            let fig = chars.nth(3)?;
            let part = chars.next()?;
            match (fig, part) {
                ('1', 'a'..='f') => fig1(part),
                ('3', 'a'..='b') => fig3(part),
                ('4', 'a'..='d') => fig4(part),
                ('5', 'a'..='f') => fig5(part),
                ('6', 'a'..='d') => fig6(part),
                _ => return None,
            }
        }
        _ => return None,
    };
    Some(s)
}

/// One-line description for listings.
pub fn describe(s: &Scenario) -> String {
    let k = |spec: &KernelSpec| {
        if !spec.is_enabled() {
            "off".to_string()
        } else if spec.shift != 0.0 {
            format!(
                "{}({}, {}, {})",
                spec.shape, spec.mu, spec.sigma, spec.shift
            )
        } else {
            format!("{}({}, {})", spec.shape, spec.mu, spec.sigma)
        }
    };
    format!(
        "L={} N={} {} ic={} a={} b={} phi={} T={}{}",
        s.length,
        s.n,
        s.boundary,
        s.initial.kind(),
        k(&s.kernels.jump),
        k(&s.kernels.coalescence),
        k(&s.kernels.repulsion),
        s.t_end,
        if s.adaptive_enabled { " adaptive" } else { "" }
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves_and_validates() {
        for name in PRESET_NAMES {
            let s = preset(name).unwrap_or_else(|| panic!("{name} missing"));
            assert_eq!(s.name, name);
            s.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!((s.h() - 0.1).abs() < 1e-12);
            assert!(s.kernels.max_radius() < s.length / 2.0);
        }
        assert!(preset("fig7a").is_none());
        assert!(preset("fig1g").is_none());
    }

    #[test]
    fn fig6a_matches_its_description() {
        let s = preset("fig6a").unwrap();
        assert_eq!(s.kernels.jump, g_shift(1.0, 1.0, 2.0));
        assert_eq!(s.kernels.repulsion, g_shift(10.0, 1.0, 4.0));
        assert!(!s.kernels.coalescence.is_enabled());
        assert_eq!(s.initial, InitialConditionSpec::Heaviside { n0: 1.0 });
        assert!(s.adaptive_enabled);
        assert_eq!(s.length, 40.0);
    }

    #[test]
    fn fig1a_is_pure_free_jumps() {
        let s = preset("fig1a").unwrap();
        assert!(s.kernels.jump.is_enabled());
        assert!(!s.kernels.repulsion.is_enabled());
        assert!(!s.kernels.coalescence.is_enabled());
        assert_eq!(s.boundary, BoundaryMode::Periodic);
    }

    #[test]
    fn fig3a_carries_its_cap_note() {
        let s = preset("fig3a").unwrap();
        assert_eq!(s.t_end, 2000.0);
        assert!(s.notes.iter().any(|n| n.contains("capped")));
    }
}
