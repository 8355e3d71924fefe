mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{max_dev, random_real};
use mlcs_core::infdim::*;
use mlcs_core::linalg::relative_error_percent;
use mlcs_core::sampling::SamplingMap;
use mlcs_core::signal::Shape;
use mlcs_core::solvers::SolverControls;
use mlcs_core::transforms::{BoundaryMode, Dwt1, LinearOperator, WaveletSpec};
use mlcs_core::C64;
use proptest::prelude::*;

/// `∫_a^b e^{−2πiωt} dt`, written out.
fn interval_ft(a: f64, b: f64, w: f64) -> C64 {
    if w == 0.0 {
        return C64::new(b - a, 0.0);
    }
    let s = C64::new(0.0, -2.0 * PI * w);
    ((s * b).exp() - (s * a).exp()) / s
}

/// FT of `exp(−t)cos²t` on `[0, 1]` from `cos²t = (2 + e^{2it} + e^{−2it})/4`.
fn exp_cos2_oracle(w: f64) -> C64 {
    let s = C64::new(0.0, 2.0 * PI * w);
    [(0.5, C64::new(-1.0, 0.0)), (0.25, C64::new(-1.0, 2.0)), (0.25, C64::new(-1.0, -2.0))]
        .iter()
        .map(|&(a, b)| {
            let c = b - s;
            a * (c.exp() - 1.0) / c
        })
        .sum()
}

fn db(order: usize, k: usize) -> WaveletBasis {
    let levels = WaveletSpec::max_levels(order, BoundaryMode::Boundary, k);
    WaveletBasis::new(WaveletSpec::boundary(order, levels), k).unwrap()
}

#[test]
fn zero_and_indicator_samples() {
    let w: Vec<Vec<f64>> = [-3.0, -0.5, 0.0, 0.5, 7.5].iter().map(|&v| vec![v]).collect();
    let z = continuous_fourier_samples(&ContinuousTarget::zero(), &w).unwrap();
    assert!(z.iter().all(|v| *v == C64::new(0.0, 0.0)));

    let ones = ContinuousTarget::ones();
    assert!((ones.sample(&[0.0]).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-15);
    for &om in &[-3.0, -0.5, 0.5, 7.5] {
        let s = C64::new(0.0, -2.0 * PI * om);
        let expect = (s.exp() - 1.0) / s;
        assert!((ones.sample(&[om]).unwrap() - expect).norm() < 1e-14);
    }
}

#[test]
fn quadrature_matches_closed_form() {
    let f = ContinuousTarget::exp_cos2();
    for &w in &[0.0, 0.5, -0.5, 5.0, -5.0] {
        let q = f.quadrature(&[w]).unwrap();
        assert!((q - exp_cos2_oracle(w)).norm() < 1e-10, "ω = {w}");
        assert!((f.closed_form(&[w]).unwrap() - exp_cos2_oracle(w)).norm() < 1e-13);
    }
    // Twenty probes per target on the half-integer grid.
    for target in [ContinuousTarget::exp_cos2(), ContinuousTarget::ramp(), ContinuousTarget::trig(&[(3, C64::new(0.5, -1.0))])] {
        for j in -10..10 {
            let w = j as f64 * 3.5;
            let q = target.quadrature(&[w]).unwrap();
            let c = target.closed_form(&[w]).unwrap();
            assert!((q - c).norm() < 1e-10, "{} at ω = {w}", target.label());
        }
    }
}

#[test]
fn ramp_closed_form_near_zero() {
    // ∫ t e^{−2πiωt} dt = 1/2 − 2πiω/3 + O(ω²).
    let r = ContinuousTarget::ramp();
    let w = 1e-7;
    let expect = C64::new(0.5, -2.0 * PI * w / 3.0);
    assert!((r.closed_form(&[w]).unwrap() - expect).norm() < 1e-12);
}

#[test]
fn separable_samples_factor() {
    let f = ContinuousTarget::separable(ContinuousTarget::exp_cos2(), ContinuousTarget::ramp()).unwrap();
    assert_eq!(f.dim(), 2);
    let w = [1.5, -2.0];
    let q = f.quadrature(&w).unwrap();
    let expect = exp_cos2_oracle(1.5) * ContinuousTarget::ramp().closed_form(&[-2.0]).unwrap();
    assert!((q - expect).norm() < 1e-10);
    assert!((f.eval(&[0.3, 0.5]) - C64::new((-0.3f64).exp() * 0.3f64.cos().powi(2) * 0.5, 0.0)).norm() < 1e-14);
}

#[test]
fn truncated_series_of_zero_is_zero() {
    let f = truncated_fourier_grid(&[C64::new(0.0, 0.0); 64]).unwrap();
    assert!(f.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn truncated_series_reproduces_band_limited_grid_signals() {
    // Samples generated by the DFT of a 2N-grid signal on [0, 2) are the
    // coefficients of the trigonometric interpolant, so f_N returns the signal.
    let half = 64;
    let x = random_real(2 * half, 5);
    let g = dft_samples(&x).unwrap();
    let t: Vec<f64> = (0..2 * half).map(|m| m as f64 / half as f64).collect();
    let f = truncated_fourier_series(&g, &t).unwrap();
    assert!(max_dev(&f, &x) < 1e-10);
}

#[test]
fn truncated_series_shows_gibbs_for_ramp() {
    let half = 256;
    let g = grid_samples(&ContinuousTarget::ramp(), half).unwrap();
    let f = truncated_fourier_grid(&g).unwrap();
    let worst = f.iter().enumerate().map(|(m, v)| (v.re - m as f64 / half as f64).abs()).fold(0.0, f64::max);
    assert!(worst > 0.05, "max error {worst}");
}

#[test]
fn haar_coarsest_function_has_unit_mean() {
    let b = WaveletBasis::new(WaveletSpec::boundary(1, 0), 1).unwrap();
    assert!((b.row(0.0)[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
}

#[test]
fn haar_rows_match_indicator_integrals() {
    let b = WaveletBasis::new(WaveletSpec::boundary(1, 3), 8).unwrap();
    let probe = interval_ft(0.0, 0.5, 0.25) - interval_ft(0.5, 1.0, 0.25);
    let sign = if (b.row(0.25)[1] * probe.conj()).re > 0.0 { 1.0 } else { -1.0 };
    for &w in &[-7.5, -1.0, 0.0, 0.5, 2.5, 13.0] {
        let row = b.row(w);
        assert!((row[0] - interval_ft(0.0, 1.0, w)).norm() < 1e-12, "scaling at ω = {w}");
        let psi = (interval_ft(0.0, 0.5, w) - interval_ft(0.5, 1.0, w)) * sign;
        assert!((row[1] - psi).norm() < 1e-12, "wavelet at ω = {w}");
    }
}

#[test]
fn column_norms_follow_parseval_on_a_dense_grid() {
    // ½ Σ_j |ĝ(j/2)|² = ‖φ‖² for functions supported in [0, 1]; truncating the
    // sum at |ω| ≤ 1024 loses the slowly decaying edge tails only.
    let b = db(6, 128);
    let half = 2048;
    let rows: Vec<usize> = (0..2 * half).collect();
    let s = build_synthesis_slice(&b, half, &rows).unwrap();
    for k in 0..128 {
        let e: f64 = (0..s.rows()).map(|r| s.entry(r, k).norm_sqr()).sum::<f64>() * 0.5;
        assert!(e > 0.98 && e < 1.0 + 1e-9, "column {k}: {e}");
    }
    // Distinct columns are orthogonal to the same accuracy.
    let cross: C64 = (0..s.rows()).map(|r| s.entry(r, 3) * s.entry(r, 40).conj()).sum::<C64>() * 0.5;
    assert!(cross.norm() < 0.02);
}

#[test]
fn slice_is_stable_under_cascade_refinement() {
    let spec = WaveletSpec::boundary(6, WaveletSpec::max_levels(6, BoundaryMode::Boundary, 256));
    let a = WaveletBasis::with_levels(spec, 256, DEFAULT_CASCADE_LEVEL, DEFAULT_EVAL_LEVEL).unwrap();
    let b = WaveletBasis::with_levels(spec, 256, DEFAULT_CASCADE_LEVEL + 1, DEFAULT_EVAL_LEVEL).unwrap();
    for &w in &[0.0, 0.5, -3.5, 64.0, 255.5] {
        assert!(max_dev(&a.row(w), &b.row(w)) < 1e-8, "ω = {w}");
    }
}

#[test]
fn slice_rows_use_conjugate_symmetry() {
    let b = db(4, 64);
    let half = 32;
    let rows = vec![half + 5, half - 5, half + 5, half];
    let s = build_synthesis_slice(&b, half, &rows).unwrap();
    for k in 0..64 {
        assert_eq!(s.entry(0, k), s.entry(1, k).conj());
        assert_eq!(s.entry(0, k), s.entry(2, k));
    }
    let direct = b.row(-2.5);
    assert!((0..64).all(|k| (s.entry(1, k) - direct[k]).norm() < 1e-14));
    assert!(build_synthesis_slice(&b, half, &[2 * half]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn rows_of_real_functions_are_hermitian(w in -300.0f64..300.0) {
        let b = db(4, 64);
        let (p, m) = (b.row(w), b.row(-w));
        for (x, y) in p.iter().zip(&m) {
            prop_assert!((x - y.conj()).norm() < 1e-12);
        }
    }
}

#[test]
fn evaluation_reproduces_an_atom_in_space() {
    // A unit-norm basis function sampled on a 128-point grid: the Riemann sum
    // of its square is close to 1.
    let b = db(6, 128);
    let mut z = vec![C64::new(0.0, 0.0); 128];
    z[40] = C64::new(1.0, 0.0);
    let v = b.evaluate_grid(&z, 128).unwrap();
    let energy: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>() / 128.0;
    assert!((energy - 1.0).abs() < 0.05, "‖φ‖² ≈ {energy}");
}

#[test]
fn single_atom_is_recovered_from_dense_samples() {
    let b = Arc::new(db(6, 128));
    let f = ContinuousTarget::atom(b.clone(), 5).unwrap();
    let half = 256;
    let rows: Vec<usize> = (0..2 * half).collect();
    let slice = build_synthesis_slice(&b, half, &rows).unwrap();
    let g = grid_samples(&f, half).unwrap();
    let c = SolverControls { max_iterations: 4000, tolerance: 1e-10, real: true, ..SolverControls::default() };
    let r = solve_infdim(&g, &slice, &b, 0.0, c, half, None).unwrap();
    let est = &r.result.unwrap().estimate;
    let mut truth = vec![C64::new(0.0, 0.0); 128];
    truth[5] = C64::new(1.0, 0.0);
    assert!(max_dev(est, &truth) < 1e-6, "deviation {}", max_dev(est, &truth));
}

#[test]
fn zero_samples_give_zero() {
    let b = db(6, 128);
    let half = 128;
    let rows: Vec<usize> = (0..2 * half).step_by(7).collect();
    let slice = build_synthesis_slice(&b, half, &rows).unwrap();
    let r = solve_infdim(&vec![C64::new(0.0, 0.0); rows.len()], &slice, &b, 0.0, SolverControls::default(), half, None)
        .unwrap();
    assert!(r.values.iter().all(|v| *v == 0.0));
}

#[test]
fn baselines_are_exact_for_band_limited_grid_signals() {
    // A trigonometric polynomial on [0, 2) with |j| < N/2, sampled on every
    // candidate frequency: no crime is committed by either baseline.
    let half = 64;
    let two_n = 2 * half;
    let mut coeffs = vec![C64::new(0.0, 0.0); two_n];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let j = i as i64 - half as i64;
        if j.abs() < half as i64 / 2 {
            *c = C64::new(((j * 7) % 5) as f64, ((j * 3) % 4) as f64) / (1.0 + j.abs() as f64);
        }
    }
    // Hermitian so the signal is real.
    for i in 1..half {
        let (a, b) = (half + i, half - i);
        coeffs[b] = coeffs[a].conj();
    }
    coeffs[half].im = 0.0;
    let grid: Vec<f64> = truncated_fourier_grid(&coeffs).unwrap().iter().map(|v| v.re).collect();

    let map = SamplingMap::full(Shape::D1(two_n)).unwrap();
    let lin = linear_reconstruction(&coeffs, two_n, Some(&grid)).unwrap();
    assert!(lin.error.unwrap() < 1e-6 * 100.0);
    let c = SolverControls { max_iterations: 3000, tolerance: 1e-10, real: true, ..SolverControls::default() };
    let wl = WaveletSpec::periodic(6, WaveletSpec::max_levels(6, BoundaryMode::Periodic, two_n));
    let d = discrete_cs(&coeffs, &map, wl, 0.0, c, Some(&grid)).unwrap();
    assert!(d.error.unwrap() < 1e-6 * 100.0, "discrete {}", d.error.unwrap());
}

#[test]
fn recovery_ordering_on_the_non_periodic_target() {
    let cfg = InfdimConfig::default();
    let f = ContinuousTarget::exp_cos2();
    for seed in 0..5 {
        let r = cfg.run(&f, seed).unwrap();
        let (i, d, l) = (r.infdim.error.unwrap(), r.discrete.error.unwrap(), r.linear.error.unwrap());
        assert!(i < 0.5 * d && d < l, "seed {seed}: infdim {i}, discrete {d}, linear {l}");
        // The errors are on the same grid as an independent evaluation of f.
        let direct: Vec<f64> = (0..cfg.half)
            .map(|m| {
                let t = m as f64 / cfg.half as f64;
                (-t).exp() * t.cos().powi(2)
            })
            .collect();
        assert!((relative_error_percent(&r.infdim.values, &direct) - i).abs() < 1e-9);
    }
}

#[test]
fn inverse_crime_flatters_the_discrete_baseline() {
    let cfg = InfdimConfig::default();
    let f = ContinuousTarget::exp_cos2();
    let half = cfg.half;
    let truth: Vec<f64> = f.grid_values(half).iter().map(|v| v.re).collect();
    let mut x: Vec<C64> = truth.iter().map(|&v| C64::new(v, 0.0)).collect();
    x.resize(2 * half, C64::new(0.0, 0.0));
    let crime = dft_samples(&x).unwrap();
    let honest = grid_samples(&f, half).unwrap();
    for seed in 0..3 {
        let map = cfg.sampling_map(seed).unwrap();
        let pick = |g: &[C64]| map.indices().iter().map(|&i| g[i]).collect::<Vec<_>>();
        let a = discrete_cs(&pick(&crime), &map, cfg.discrete_wavelet(), 0.0, cfg.controls, Some(&truth)).unwrap();
        let b = discrete_cs(&pick(&honest), &map, cfg.discrete_wavelet(), 0.0, cfg.controls, Some(&truth)).unwrap();
        assert!(a.error.unwrap() < b.error.unwrap(), "seed {seed}");
    }

    // A signal that is sparse in the discrete model itself is recovered
    // almost exactly from its DFT-generated samples.
    let wl = cfg.discrete_wavelet();
    let dwt = Dwt1::new(2 * half, wl).unwrap();
    let mut z = vec![C64::new(0.0, 0.0); 2 * half];
    for (i, v) in [(0usize, 3.0), (5, -1.0), (17, 0.5), (40, 0.8), (90, -0.3)] {
        z[i] = C64::new(v, 0.0);
    }
    let xs = dwt.adjoint(&z);
    let g = dft_samples(&xs).unwrap();
    let map = cfg.sampling_map(0).unwrap();
    let pick: Vec<C64> = map.indices().iter().map(|&i| g[i]).collect();
    let t: Vec<f64> = xs[..half].iter().map(|v| v.re).collect();
    let c = SolverControls { tolerance: 1e-9, max_iterations: 6000, ..cfg.controls };
    let r = discrete_cs(&pick, &map, wl, 0.0, c, Some(&t)).unwrap();
    assert!(r.error.unwrap() < 0.1, "crime-sparse error {}", r.error.unwrap());
}

#[test]
fn larger_truncation_does_not_hurt() {
    let f = ContinuousTarget::exp_cos2();
    for seed in 0..3 {
        let small = InfdimConfig { k: 256, ..InfdimConfig::default() }.run(&f, seed).unwrap();
        let large = InfdimConfig { k: 512, ..InfdimConfig::default() }.run(&f, seed).unwrap();
        let (a, b) = (small.infdim.error.unwrap(), large.infdim.error.unwrap());
        assert!(b <= a + 0.05, "seed {seed}: K=256 {a}, K=512 {b}");
    }
}

#[test]
fn tensor_slice_adjoint_is_consistent() {
    let b = db(4, 32);
    let half = 32;
    let rows: Vec<usize> = (0..2 * half).collect();
    let op = TensorSlice::new(&build_synthesis_slice(&b, half, &rows).unwrap()).unwrap();
    let x = common::random_complex(op.dim_in(), 1);
    let y = common::random_complex(op.dim_out(), 2);
    let lhs: C64 = op.apply(&x).iter().zip(&y).map(|(a, b)| a * b.conj()).sum();
    let rhs: C64 = x.iter().zip(op.adjoint(&y)).map(|(a, b)| a * b.conj()).sum();
    assert!((lhs - rhs).norm() < 1e-9 * lhs.norm().max(1.0));
    assert!(TensorSlice::new(&build_synthesis_slice(&b, half, &rows[1..]).unwrap()).is_err());
}

#[test]
fn small_2d_configuration_orders_the_errors() {
    let cfg = InfdimConfig {
        dims: 2,
        half: 32,
        k: 64,
        fraction: 0.25,
        map: mlcs_core::sampling::AllRoundSpec { n: 10, m_radius: 0.1, a: 2.0, b: 0.0 },
        controls: SolverControls { max_iterations: 1500, ..InfdimConfig::default().controls },
        ..InfdimConfig::default()
    };
    let f = ContinuousTarget::separable(ContinuousTarget::exp_cos2(), ContinuousTarget::exp_cos2()).unwrap();
    let r = cfg.run(&f, 0).unwrap();
    let (i, d, l) = (r.infdim.error.unwrap(), r.discrete.error.unwrap(), r.linear.error.unwrap());
    assert!(i < d && i < l, "infdim {i}, discrete {d}, linear {l}");
}
