mod common;

use common::{hier, re};
use dsc::apply::{apply, apply_compressed};
use dsc::apps::{
    bicgstab, build_preconditioner, build_ssr_generator, directional_taper, helmholtz_apply, migrate, polarize,
    smooth_min, step_symbol, MediumField, PreconditionerVariant, Profile, SsrConfig, SymbolSetup,
};
use dsc::calculus::IterOptions;
use dsc::symbol::GridFunction;
use dsc::Complex64;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn setup(dim: usize, grid: std::sync::Arc<dsc::grid::FreqGrid<f64>>, band: usize) -> SymbolSetup<f64> {
    assert_eq!(grid.dim(), dim);
    SymbolSetup {
        band,
        grid,
        iter: IterOptions { tol: 1e-10, max_iter: 100 },
    }
}

fn plane_wave(dim: usize, n: usize, k: [f64; 2]) -> GridFunction<f64> {
    GridFunction::from_fn(dim, n, |x: [f64; 2]| Complex64::from_polar(1.0, TWO_PI * (k[0] * x[0] + k[1] * x[1]))).unwrap()
}

// ------------------------------------------------------------------ Helmholtz

#[test]
fn helmholtz_operator_on_a_plane_wave() {
    let c = MediumField::homogeneous(2, 2.0, 3.0);
    let u = plane_wave(2, 32, [4.0, -2.0]);
    let omega = TWO_PI * 3.0;
    let factor = TWO_PI * TWO_PI * 20.0 - omega * omega / 4.0;
    let err = helmholtz_apply(&c, &u).unwrap().relative_error(&u.scaled(re(factor)));
    assert!(err <= 1e-12, "{err:e}");
}

#[test]
fn helmholtz_operator_is_linear_and_kills_zero() {
    let c = MediumField::new(2, Profile::Sinusoid { mean: 1.0, amplitude: 0.2 }, 4.0);
    let z = GridFunction::zeros(2, 16).unwrap();
    assert_eq!(helmholtz_apply(&c, &z).unwrap().norm(), 0.0);
    let u = GridFunction::random_bandlimited(2, 16, 8, 1).unwrap();
    let v = GridFunction::random_bandlimited(2, 16, 8, 2).unwrap();
    let lhs = helmholtz_apply(&c, &u.axpy(re(3.0), &v)).unwrap();
    let rhs = helmholtz_apply(&c, &u).unwrap().axpy(re(3.0), &helmholtz_apply(&c, &v).unwrap());
    assert!(lhs.relative_error(&rhs) <= 1e-12);
}

#[test]
fn bicgstab_with_exact_preconditioner_takes_one_step() {
    let f = GridFunction::random_bandlimited(1, 32, 16, 4).unwrap();
    let id = |u: &GridFunction<f64>| Ok(u.clone());
    let r = bicgstab(id, id, &f, 1e-12, 10).unwrap();
    assert!(r.converged);
    assert!(r.iterations <= 1.0, "{}", r.iterations);
    assert!(r.solution.relative_error(&f) <= 1e-12);
}

#[test]
fn bicgstab_solves_a_diagonal_system() {
    let n = 64;
    let d: Vec<f64> = (0..n).map(|p| 1.0 + 9.0 * p as f64 / n as f64).collect();
    let l = |u: &GridFunction<f64>| {
        GridFunction::from_values(1, n, u.values().iter().zip(&d).map(|(v, s)| v * s).collect())
    };
    let f = GridFunction::random_bandlimited(1, n, n / 2, 5).unwrap();
    let r = bicgstab(l, |u: &GridFunction<f64>| Ok(u.clone()), &f, 1e-10, 200).unwrap();
    assert!(r.converged);
    assert!(r.residual <= 1e-10);
    let want = GridFunction::from_values(1, n, f.values().iter().zip(&d).map(|(v, s)| v / s).collect()).unwrap();
    assert!(r.solution.relative_error(&want) <= 1e-9);
}

#[test]
fn bicgstab_reports_exhaustion() {
    let c = MediumField::new(2, Profile::Sinusoid { mean: 1.0, amplitude: 0.2 }, 4.0);
    let f = GridFunction::random_bandlimited(2, 32, 8, 6).unwrap();
    let r = bicgstab(|u: &GridFunction<f64>| helmholtz_apply(&c, u), |u: &GridFunction<f64>| Ok(u.clone()), &f, 1e-8, 3)
        .unwrap();
    assert!(!r.converged);
    assert!(r.iterations <= 3.0);
}

#[test]
fn constant_medium_preconditioner_is_rank_one() {
    let c = MediumField::homogeneous(2, 1.0, 2.0);
    let s = setup(2, hier(2, 6, 2, 5), 2);
    let n = 32;
    for variant in [PreconditionerVariant::M1, PreconditionerVariant::M2] {
        let p = build_preconditioner(&c, variant, &s, n, 1e-8).unwrap();
        assert_eq!(p.compressed.rank(), 1, "{}", variant.name());
    }
}

#[test]
fn preconditioner_approximately_inverts_the_shifted_laplacian() {
    let c = MediumField::new(2, Profile::Sinusoid { mean: 1.0, amplitude: 0.2 }, 2.0);
    let s = setup(2, hier(2, 6, 2, 5), 4);
    let n = 32;
    let p = build_preconditioner(&c, PreconditionerVariant::M1, &s, n, 1e-6).unwrap();
    // M u = L u + 2 (ω²/c²) u for the unit shift.
    let u = GridFunction::random_bandlimited(2, n, 8, 7).unwrap();
    let omega2 = c.omega() * c.omega();
    let lu = helmholtz_apply(&c, &u).unwrap();
    let mu = GridFunction::from_fn(2, n, |x| {
        let cv = c.value(x);
        re(2.0 * omega2 / (cv * cv))
    })
    .unwrap();
    let mu = GridFunction::from_values(2, n, lu.values().iter().zip(mu.values()).zip(u.values()).map(|((l, w), v)| l + w * v).collect())
        .unwrap();
    let back = apply_compressed(&p.compressed, &mu).unwrap();
    let err = back.relative_error(&u);
    assert!(err <= 0.1, "{err:e}");
    assert!(apply(&p.symbol, &mu).unwrap().relative_error(&u) <= 0.1);
}

// --------------------------------------------------------------- polarization

#[test]
fn polarization_parts_sum_to_the_data() {
    let alpha = MediumField::new(2, Profile::Sinusoid { mean: 1.0, amplitude: 0.3 }, 1.0);
    let s = setup(2, hier(2, 6, 2, 5), 3);
    let u0 = GridFunction::random_bandlimited(2, 32, 8, 8).unwrap();
    let u1 = GridFunction::random_bandlimited(2, 32, 8, 9).unwrap();
    let p = polarize(&alpha, &u0, &u1, 1e-4, &s).unwrap();
    assert!(p.plus.add(&p.minus).relative_error(&u0) <= 1e-12);
    assert!(p.report.converged);
}

#[test]
fn polarization_picks_the_direction_of_travel() {
    let alpha = MediumField::homogeneous(1, 1.0, 1.0);
    let s = setup(1, hier(1, 12, 3, 5), 2);
    let k = 6.0;
    let u0 = plane_wave(1, 64, [k, 0.0]);
    let u1 = u0.scaled(Complex64::new(0.0, -TWO_PI * k));
    let p = polarize(&alpha, &u0, &u1, 1e-6, &s).unwrap();
    assert!(p.plus.norm() / u0.norm() <= 1e-4);
    assert!(p.minus.relative_error(&u0) <= 1e-4);
}

#[test]
fn polarization_rejects_bad_input() {
    let alpha = MediumField::homogeneous(1, 1.0, 1.0);
    let s = setup(1, hier(1, 8, 1, 5), 2);
    let u = GridFunction::zeros(1, 16).unwrap();
    assert!(polarize(&alpha, &u, &GridFunction::zeros(1, 32).unwrap(), 1e-4, &s).is_err());
    assert!(polarize(&alpha, &u, &u, 0.0, &s).is_err());
}

// ------------------------------------------------------------------------ SSR

#[test]
fn smooth_min_and_taper_shapes() {
    let cfg = SsrConfig::<f64>::default();
    assert_eq!(smooth_min(0.5, 1.0, &cfg), 0.5);
    assert_eq!(smooth_min(2.0, 1.0, &cfg), 1.0);
    let mid = smooth_min(1.1, 1.0, &cfg);
    assert!(mid > 1.0 && mid < 1.1, "{mid}");
    assert_eq!(directional_taper(-0.9, -0.65, -0.5), 1.0);
    assert_eq!(directional_taper(-0.4, -0.65, -0.5), 0.0);
    let t: f64 = directional_taper(-0.575, -0.65, -0.5);
    assert!((t - 0.5).abs() <= 1e-12);
}

#[test]
fn invalid_ssr_settings_are_rejected() {
    let bad = [
        SsrConfig { p_keep: -0.4, ..SsrConfig::default() },
        SsrConfig { dz: 0.0, ..SsrConfig::default() },
        SsrConfig { quad_nodes: 4, ..SsrConfig::default() },
        SsrConfig { cap_fraction: 0.9, ..SsrConfig::default() },
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err(), "{cfg:?}");
    }
}

fn homogeneous_1d(freq: f64) -> (MediumField<f64>, SymbolSetup<f64>, SsrConfig<f64>) {
    let c = MediumField::homogeneous(1, 1.0, freq);
    let s = setup(1, hier(1, 2 * freq as usize, 2, 5), 2);
    let cfg = SsrConfig { dz: 1.0 / freq, ..SsrConfig::default() };
    (c, s, cfg)
}

#[test]
fn generator_at_zero_frequency_is_i_omega() {
    let (c, s, cfg) = homogeneous_1d(8.0);
    let g = build_ssr_generator(&c, 0.0, &cfg, &s).unwrap();
    let v = g.generator.eval_symbol([0.3, 0.0], [0.0, 0.0]);
    let omega = c.omega();
    assert!((v - Complex64::new(0.0, omega)).norm() <= 1e-6 * omega, "{v}");
    // Horizontal propagation is removed entirely.
    let far = g.generator.eval_symbol([0.3, 0.0], [8.0, 0.0]);
    assert!(far.norm() <= 1e-8 * omega, "{far}");
}

#[test]
fn generator_is_nearly_skew_in_a_smooth_medium() {
    let freq = 8.0;
    let c = MediumField::new(2, Profile::Sinusoid { mean: 1.0, amplitude: 0.1 }, freq);
    let s = setup(2, hier(2, 16, 1, 6), 4);
    let cfg = SsrConfig { dz: 1.0 / freq, ..SsrConfig::default() };
    let g = build_ssr_generator(&c, 0.0, &cfg, &s).unwrap();
    let omega = c.omega();
    for xi in [[0.0, 0.0], [2.0, 1.0], [-3.0, 2.0]] {
        let v = g.generator.eval_symbol([0.4, 0.6], xi);
        assert!(v.re.abs() <= 0.05 * omega, "{xi:?}: {v}");
    }
}

#[test]
fn one_step_propagates_a_plane_wave() {
    let (c, s, cfg) = homogeneous_1d(8.0);
    let n = 64;
    let k = 3.0;
    let u0 = plane_wave(1, n, [k, 0.0]);
    let m = migrate(&c, &u0, cfg.dz, &cfg, &s).unwrap();
    assert_eq!(m.slices.len(), 2);
    let omega = c.omega();
    let kz = (omega * omega - (TWO_PI * k).powi(2)).sqrt();
    let want = u0.scaled(Complex64::from_polar(1.0, kz * cfg.dz));
    let err = m.slices[1].relative_error(&want);
    assert!(err <= 1e-2, "{err:e}");
}

#[test]
fn one_step_removes_steep_content() {
    let (c, s, cfg) = homogeneous_1d(8.0);
    // p = (6/8)² − 1 ≈ −0.44 lies beyond p_kill.
    let u0 = plane_wave(1, 64, [6.0, 0.0]);
    let m = migrate(&c, &u0, cfg.dz, &cfg, &s).unwrap();
    assert!(m.slices[1].norm() / u0.norm() <= 1e-6);
}

#[test]
fn step_symbol_uses_one_report_per_quadrature_node() {
    let (c, s, cfg) = homogeneous_1d(4.0);
    for q in 1..=3 {
        let cfg = SsrConfig { quad_nodes: q, ..cfg };
        let (_, reports) = step_symbol(&c, 0.0, &cfg, &s).unwrap();
        assert_eq!(reports.len(), q);
    }
}
