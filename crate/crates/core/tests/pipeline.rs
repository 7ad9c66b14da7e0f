use egl_core::diagnostics::{l2_norm, symmetry_residual};
use egl_core::evolution::rhs;
use egl_core::field_io::{read_binary, write_binary};
use egl_core::initial_data::build_theorem1_data;
use egl_core::spectral::{dealias, grid_to_spectral, spectral_to_grid, survives_dealiasing, wavenumber};
use egl_core::{run_with, GridField, MeanPolicy, RunOptions, SimState, Symmetry, Theorem1Params, TimeStep};
use proptest::prelude::*;

fn out_of_band_fraction(s: &egl_core::SpectralField) -> f64 {
    let n = s.n();
    let mut tail = 0.0;
    for (k, c) in s.coeffs().iter().enumerate() {
        let (a, b) = (wavenumber(k % n, n), wavenumber(k / n, n));
        if !survives_dealiasing(a, b, n) {
            tail += c.norm_sqr();
        }
    }
    tail / s.norm_sq()
}

#[test]
fn first_family_tail_is_measured_and_then_truncated() {
    let n = 256;
    let f = build_theorem1_data(n, &Theorem1Params::new(0.05).unwrap()).unwrap();
    let s = grid_to_spectral(&f, MeanPolicy::Tolerance(1e-12)).unwrap();
    let tail = out_of_band_fraction(&s);
    assert!(tail > 1e-10, "tail {tail:e}");
    assert!(tail < 1e-2, "tail {tail:e}");
    let state = SimState::new(s, 1.0).unwrap();
    assert_eq!(out_of_band_fraction(&state.field), 0.0);
}

#[test]
fn first_family_run_keeps_symmetry_and_l2() {
    let n = 64;
    let f = build_theorem1_data(n, &Theorem1Params::new(0.1).unwrap()).unwrap();
    let init = SimState::from_grid(&f, 1.0).unwrap();
    let l0 = l2_norm(&init.field);
    let opts = RunOptions {
        t_end: 0.2,
        checkpoint_interval: 0.1,
        dt: TimeStep::Fixed(1e-3),
    };
    let mut seen = 0;
    let summary = run_with(&init, &opts, |c| {
        let g = spectral_to_grid(&c.field)?;
        assert!(symmetry_residual(&g, Symmetry::Even)? < 1e-12);
        assert!(symmetry_residual(&g, Symmetry::Rot4)? < 1e-12);
        assert!((l2_norm(&c.field) - l0).abs() <= 1e-8 * l0);
        seen += 1;
        Ok(())
    })
    .unwrap();
    assert_eq!(seen, 3);
    assert!(summary.blow_up.is_none());
}

#[test]
fn evolved_field_survives_binary_round_trip() {
    let n = 32;
    let f = GridField::from_fn(n, |x, y| x.sin() * (2.0 * y).cos() + 0.3 * (x + y).cos()).unwrap();
    let init = SimState::from_grid(&f, 1.0).unwrap();
    let opts = RunOptions {
        t_end: 0.1,
        checkpoint_interval: 0.1,
        dt: TimeStep::Auto,
    };
    let mut last = None;
    run_with(&init, &opts, |c| {
        last = Some(c.field);
        Ok(())
    })
    .unwrap();
    let g = spectral_to_grid(&last.unwrap()).unwrap();
    let mut buf = Vec::new();
    write_binary(&g, &mut buf).unwrap();
    assert_eq!(read_binary(buf.as_slice()).unwrap(), g);
}

fn low_mode_field(n: usize, amps: &[(f64, f64)]) -> egl_core::SpectralField {
    let g = GridField::from_fn(n, |x, y| {
        amps.iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let (p, q) = ((k % 3) as f64 + 1.0, (k / 3) as f64);
                a * (p * x + q * y).cos() + b * (q * x - p * y).sin()
            })
            .sum()
    })
    .unwrap();
    dealias(&grid_to_spectral(&g, MeanPolicy::Tolerance(1e-10)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rhs_is_orthogonal_to_the_field(
        amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..9),
        gamma in prop::sample::select(vec![0.5, 1.0, 1.5]),
    ) {
        let s = low_mode_field(32, &amps);
        let r = rhs(&s, gamma).unwrap();
        let dot: f64 = s.coeffs().iter().zip(r.coeffs()).map(|(a, b)| (a.conj() * b).re).sum();
        let scale = s.norm_sq() * r.norm_sq().sqrt().max(1.0);
        prop_assert!(dot.abs() <= 1e-12 * scale.max(1e-30), "dot {dot:e}");
    }
}
