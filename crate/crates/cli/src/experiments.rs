//! One driver per experiment kind. Drivers write their files through
//! [`Artifacts`] and return metrics plus one flag per solver call.

use std::path::Path;

use mlcs_core::coherence::{coherence_matrix, coherence_report, scaled_tail_coherence};
use mlcs_core::fliptest::{permuted_gradient_image, run_flip_test, run_tv_flip_test, FlipSetup};
use mlcs_core::fmsim::{
    acquire, correct_measurements, corrected_eta, initial_approach_baseline, recover_cfm, PsfSpec, RecoveryMode,
};
use mlcs_core::infdim::{
    build_synthesis_slice, dft_samples, discrete_cs, grid_samples, linear_reconstruction, solve_infdim,
    truncated_fourier_grid, InfdimRecovery, SliceMeta, SynthesisMatrixSlice,
};
use mlcs_core::levels::LevelStructure;
use mlcs_core::linalg::{relative_error_percent, to_complex};
use mlcs_core::phantom::PhantomKind;
use mlcs_core::rng::{gaussian_vec, seeded};
use mlcs_core::sampling::SamplingMap;
use mlcs_core::solvers::{scale_weights, solve, RecoveryProblem, RecoveryResult, Regularizer};
use mlcs_core::sparsity::sparsity_curve;
use mlcs_core::transforms::{Dft2, Dwt2, FreqOrdering, OperatorSpec};
use mlcs_core::{LinearOperator, Operator, Shape, Signal, C64};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{ExperimentConfig, ExperimentKind, RegularizerKind};
use crate::error::{CliError, Result};
use crate::formats::{fit_square, load_image, read_array, ArrayData, Artifacts, SolverFlag};

/// What a driver hands back besides its files.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub metrics: serde_json::Value,
    pub flags: Vec<SolverFlag>,
}

/// A square test image with values in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Scene {
    pub data: Vec<f64>,
    pub side: usize,
    pub id: String,
}

pub fn load_scene(cfg: &ExperimentConfig) -> Result<Scene> {
    match cfg.image.phantom()? {
        Some(kind) => Ok(Scene { data: kind.render(cfg.image.size)?, side: cfg.image.size, id: cfg.image.source.clone() }),
        None => {
            let img = load_image(&cfg.resolve(Path::new(&cfg.image.source)))?;
            let (data, side) = fit_square(&img, cfg.image.resize)?;
            Ok(Scene { data, side, id: cfg.image.source.clone() })
        }
    }
}

pub fn dispatch(kind: ExperimentKind, cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Outcome> {
    match kind {
        ExperimentKind::Coherence => coherence(cfg, art),
        ExperimentKind::Sparsity => sparsity(cfg, art),
        ExperimentKind::Flip => flip(cfg, art),
        ExperimentKind::Tvflip => tvflip(cfg, art),
        ExperimentKind::Recover => recover(cfg, art),
        ExperimentKind::Fmsim => fmsim(cfg, art),
        ExperimentKind::Infdim => infdim(cfg, art),
        ExperimentKind::ResolutionSweep => resolution_sweep(cfg, art),
        ExperimentKind::FixedCountSweep => fixed_count_sweep(cfg, art),
    }
}

fn f(v: f64) -> String {
    v.to_string()
}

fn real(v: &[C64]) -> Vec<f64> {
    v.iter().map(|z| z.re).collect()
}

fn op(text: &str, shape: Shape, field: &str) -> Result<Operator> {
    let spec = OperatorSpec::parse(text).map_err(|e| CliError::validation(field, e.to_string()))?;
    Ok(spec.build(shape)?)
}

fn write_log(art: &mut Artifacts, name: &str, r: &RecoveryResult) -> Result<()> {
    if r.log.is_empty() {
        return Ok(());
    }
    art.csv(
        name,
        &["iteration", "objective", "residual", "best_objective", "gap", "tau"],
        r.log.iter().map(|l| {
            vec![l.iteration.to_string(), f(l.objective), f(l.residual), f(l.best_objective), f(l.gap), f(l.tau)]
        }),
    )
}

fn coherence(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Outcome> {
    let c = &cfg.coherence;
    let n = c.size;
    let u = op(&c.operator, Shape::D1(n), "coherence.operator")?;
    let bounds: Vec<usize> = (0..=c.levels).rev().map(|l| n >> l).collect();
    let lev = LevelStructure::new(bounds)?;
    let report = coherence_report(&*u, &lev, &lev, &c.k_grid)?;
    art.json("coherence_report.json", &report)?;
    art.csv(
        "tail.csv",
        &["k", "tail_row", "tail_col"],
        report.k_grid.iter().enumerate().map(|(i, k)| vec![k.to_string(), f(report.tail_row[i]), f(report.tail_col[i])]),
    )?;
    art.csv(
        "local.csv",
        &["row_level", "col_level", "mu"],
        report
            .local
            .iter()
            .enumerate()
            .flat_map(|(k, row)| row.iter().enumerate().map(move |(l, v)| vec![k.to_string(), l.to_string(), f(*v)])),
    )?;
    // log10 |u_ij|² mapped from [log10(1/N), 0] onto [0, 1].
    let lo = -(n as f64).log10();
    let heat: Vec<f64> = coherence_matrix(&*u)?
        .iter()
        .map(|&v| if v > 0.0 { (v.log10() - lo) / -lo } else { 0.0 })
        .collect();
    art.image("heatmap.pgm", &heat, n)?;
    let family = c
        .family
        .iter()
        .map(|&m| op(&c.operator, Shape::D1(m), "coherence.operator"))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&dyn LinearOperator> = family.iter().map(|o| &**o).collect();
    let scaled = scaled_tail_coherence(&refs, c.tail_ratio)?;
    art.csv(
        "scaled_tail.csv",
        &["n", "tail_row", "tail_col"],
        scaled.iter().map(|(m, r, col)| vec![m.to_string(), f(*r), f(*col)]),
    )?;
    Ok(Outcome {
        metrics: json!({
            "global": report.global,
            "global_times_n": report.global * n as f64,
            "tail_row": report.tail_row,
            "tail_col": report.tail_col,
        }),
        flags: Vec::new(),
    })
}

fn sparsity(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Outcome> {
    let scene = load_scene(cfg)?;
    let n = scene.side;
    let spec = cfg.transform.wavelet_spec(n)?;
    let eps = &cfg.sparsity.epsilons;
    let mut profiles = vec![(scene.id.clone(), sparsity_curve(&Signal::from_real(Shape::D2(n), &scene.data)?, spec, eps)?)];
    if cfg.sparsity.control {
        let noise = gaussian_vec(&mut seeded(cfg.seed), n * n);
        profiles.push(("gaussian".into(), sparsity_curve(&Signal::from_real(Shape::D2(n), &noise)?, spec, eps)?));
    }
    art.csv(
        "sparsity.csv",
        &["image", "level", "epsilon", "count", "relative"],
        profiles.iter().flat_map(|(id, p)| {
            p.rows()
                .into_iter()
                .map(move |(k, e, s, r)| vec![id.clone(), k.to_string(), f(e), s.to_string(), f(r)])
        }),
    )?;
    // Finest over coarsest detail scale, per ε.
    let gaps: Vec<serde_json::Value> = profiles
        .iter()
        .map(|(id, p)| {
            let last = p.levels.num_levels() - 1;
            let g: Vec<f64> = (0..eps.len()).map(|e| p.relative[last][e] / p.relative[1.min(last)][e]).collect();
            json!({ "image": id, "finest_over_coarsest": g })
        })
        .collect();
    art.json("sparsity_profile.json", &profiles.iter().map(|(_, p)| p).collect::<Vec<_>>())?;
    Ok(Outcome { metrics: json!({ "epsilons": eps, "gaps": gaps }), flags: Vec::new() })
}

fn flip(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Outcome> {
    let scene = load_scene(cfg)?;
    let (n, shape) = (scene.side, Shape::D2(scene.side));
    let x = cfg.transform.analysis(shape)?.apply(&to_complex(&scene.data));
    let map = cfg.sampling.build(shape, cfg.seed, cfg.transform.is_hadamard())?;
    let setup = FlipSetup {
        operator: cfg.transform.recovery_operator(shape)?,
        rows: map.indices(),
        eta: cfg.solver.eta,
        controls: cfg.solver.controls(true),
        synthesis: Some(cfg.transform.synthesis(shape)?),
        image_id: scene.id.clone(),
        seed: cfg.seed,
    };
    let out = run_flip_test(&x, &setup)?;
    art.json("flip_report.json", &out.report)?;
    art.mask("mask", &map)?;
    art.image("truth.png", &scene.data, n)?;
    art.image("direct.png", &real(&out.direct), n)?;
    art.image("flipped.png", &real(&out.flipped), n)?;
    let r = &out.report;
    Ok(Outcome {
        metrics: json!({ "error_direct": r.error_direct, "error_flipped": r.error_flipped, "ratio": r.ratio, "samples": r.samples }),
        flags: vec![SolverFlag::bare("direct", r.converged[0]), SolverFlag::bare("flipped", r.converged[1])],
    })
}

fn tvflip(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Outcome> {
    let scene = load_scene(cfg)?;
    let (n, shape) = (scene.side, Shape::D2(scene.side));
    let (twin, cert) = permuted_gradient_image(&scene.data, n, Some(cfg.tvflip.twin_seed.unwrap_or(cfg.seed)))?;
    let u = cfg.transform.sensing_operator(shape)?;
    let map = cfg.sampling.build(shape, cfg.seed, cfg.transform.is_hadamard())?;
    let (report, a, b) = run_tv_flip_test(
        &scene.data,
        &twin,
        n,
        &u,
        &map.indices(),
        cfg.solver.eta,
        cfg.solver.controls(true),
        cfg.seed,
    )?;
    art.json("tvflip_report.json", &json!({ "report": report, "certificate": cert, "certified": cert.holds() }))?;
    art.mask("mask", &map)?;
    art.image("original.png", &scene.data, n)?;
    art.image("twin.png", &twin, n)?;
    art.image("recovered_original.png", &a, n)?;
    art.image("recovered_twin.png", &b, n)?;
    Ok(Outcome {
        metrics: json!({
            "error_original": report.error_direct,
            "error_twin": report.error_flipped,
            "certified": cert.holds(),
            "tv_relative_gap": cert.tv_relative_gap,
        }),
        flags: vec![SolverFlag::bare("original", report.converged[0]), SolverFlag::bare("twin", report.converged[1])],
    })
}

/// Noiseless measurements of `image` on `map`, recovered with the configured
/// regularizer. Errors are in image space.
pub fn recover_image(cfg: &ExperimentConfig, image: &[f64], n: usize, map: &SamplingMap) -> Result<(RecoveryResult, Vec<C64>)> {
    let shape = Shape::D2(n);
    let truth = to_complex(image);
    let controls = cfg.solver.controls(true);
    let problem = if cfg.solver.regularizer == RegularizerKind::Tv {
        let u = cfg.transform.sensing_operator(shape)?;
        let y = RecoveryProblem::measure(&u, &map.indices(), &truth);
        RecoveryProblem {
            regularizer: Regularizer::Tv { side: n },
            controls,
            ground_truth: Some(truth),
            ..RecoveryProblem::new(u, map, y, cfg.solver.eta)
        }
    } else {
        let u = cfg.transform.recovery_operator(shape)?;
        let x = cfg.transform.analysis(shape)?.apply(&truth);
        let y = RecoveryProblem::measure(&u, &map.indices(), &x);
        let regularizer = match cfg.solver.regularizer {
            RegularizerKind::WeightedL1 => {
                let levels = Dwt2::new(n, cfg.transform.wavelet_spec(n)?)?.level_structure();
                Regularizer::WeightedL1 { weights: scale_weights(&levels, cfg.solver.weight_base) }
            }
            _ => Regularizer::L1,
        };
        RecoveryProblem {
            regularizer,
            controls,
            synthesis: Some(cfg.transform.synthesis(shape)?),
            ground_truth: Some(truth),
            ..RecoveryProblem::new(u, map, y, cfg.solver.eta)
        }
    };
    let y = problem.measurements.clone();
    Ok((solve(&problem)?, y))
}

fn recover(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Outcome> {
    let scene = load_scene(cfg)?;
    let (n, shape) = (scene.side, Shape::D2(scene.side));
    let map = cfg.sampling.build(shape, cfg.seed, cfg.transform.is_hadamard())?;
    let (r, y) = recover_image(cfg, &scene.data, n, &map)?;
    art.mask("mask", &map)?;
    art.array("measurements", &ArrayData::C64(y), vec![map.m()], json!({ "rows": "mask order" }))?;
    art.image("truth.png", &scene.data, n)?;
    art.image("reconstruction.png", &r.real_reconstruction(), n)?;
    write_log(art, "convergence.csv", &r)?;
    Ok(Outcome {
        metrics: json!({
            "error": r.relative_error,
            "samples": map.m(),
            "fraction": map.fraction(),
            "objective": r.objective,
            "operator_norm": r.operator_norm,
        }),
        flags: vec![SolverFlag::of("recovery", &r)],
    })
}

fn fmsim(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Outcome> {
    let fm = &cfg.fmsim;
    let scene = load_scene(cfg)?;
    let (n, shape) = (scene.side, Shape::D2(scene.side));
    let psf = PsfSpec { cutoff: fm.psf_cutoff };
    let wavelet = cfg.transform.wavelet_spec(n)?;
    let controls = cfg.solver.controls(true);
    let noise = fm.noise.then(|| fm.noise_seed.unwrap_or(cfg.seed));
    // Patterns are sequency-ordered Hadamard rows.
    let map = cfg.sampling.build(shape, cfg.seed, true)?;
    let y = acquire(&scene.data, psf, map, fm.budget, noise)?;
    let yc = correct_measurements(&y)?;
    let eta = if noise.is_some() { corrected_eta(&y) } else { cfg.solver.eta };
    let m = y.omega.m();
    art.mask("mask", &y.omega)?;
    art.array("gamma", &ArrayData::F64(y.gamma.clone()), vec![m], json!({ "units": "expected photons" }))?;
    art.array("y", &ArrayData::U64(y.counts.clone()), vec![m], json!({ "ones_row_index": y.ones_row_index }))?;
    art.array("y_corrected", &ArrayData::F64(yc.clone()), vec![m], json!({ "definition": "2 y_i - y_ones" }))?;
    art.image("truth.png", &scene.data, n)?;

    let mut rows = Vec::new();
    let mut flags = Vec::new();
    let full = recover_cfm(&yc, &y.omega, psf, wavelet, eta, RecoveryMode::FullChain, fm.budget, controls, Some(&scene.data))?;
    art.image("full_chain.png", &full.image, n)?;
    rows.push(("full_chain", full.error, full.result.converged, full.result.iterations));
    flags.push(SolverFlag::of("full_chain", &full.result));
    if fm.hadamard_only {
        let had = recover_cfm(&yc, &y.omega, psf, wavelet, eta, RecoveryMode::HadamardOnly, fm.budget, controls, Some(&scene.data))?;
        art.image("hadamard_only.png", &had.image, n)?;
        rows.push(("hadamard_only", had.error, had.result.converged, had.result.iterations));
        flags.push(SolverFlag::of("hadamard_only", &had.result));
    }
    if fm.baseline {
        let base = initial_approach_baseline(&scene.data, n, psf, cfg.sampling.fraction, wavelet, fm.budget, cfg.seed, noise, controls)?;
        art.image("initial_approach.png", &base.recovery.image, n)?;
        art.mask("initial_approach_mask", &base.measurements.omega)?;
        rows.push(("initial_approach", base.recovery.error, base.recovery.result.converged, base.recovery.result.iterations));
        flags.push(SolverFlag::of("initial_approach", &base.recovery.result));
    }
    art.csv(
        "errors.csv",
        &["method", "error", "converged", "iterations"],
        rows.iter().map(|(name, e, c, it)| {
            vec![name.to_string(), e.map(f).unwrap_or_default(), c.to_string(), it.to_string()]
        }),
    )?;
    let metrics: serde_json::Map<String, serde_json::Value> =
        rows.iter().map(|(name, e, _, _)| (name.to_string(), json!(e))).collect();
    Ok(Outcome {
        metrics: json!({ "errors": metrics, "samples": m, "eta": eta, "noise_seed": noise }),
        flags,
    })
}

fn infdim_flag(stage: &str, r: &InfdimRecovery) -> Option<SolverFlag> {
    r.result.as_ref().map(|res| SolverFlag::of(stage, res))
}

/// Cached slice from `dir`, if it was built for exactly `meta`.
fn cached_slice(dir: &Path, meta: &SliceMeta) -> Result<Option<SynthesisMatrixSlice>> {
    let (bin, json) = (dir.join("slice.bin"), dir.join("slice.json"));
    if !bin.exists() || !json.exists() {
        return Ok(None);
    }
    let (data, stored) = read_array(&bin, &json)?;
    let stored_meta: SliceMeta =
        serde_json::from_value(stored.extra).map_err(|e| CliError::malformed(&json, e.to_string()))?;
    match data {
        ArrayData::C64(entries) if &stored_meta == meta && entries.len() == meta.rows.len() * meta.k => {
            let slice = SynthesisMatrixSlice { meta: stored_meta, entries };
            slice.validate()?;
            Ok(Some(slice))
        }
        _ => Ok(None),
    }
}

fn infdim(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Outcome> {
    let sec = &cfg.infdim;
    let model = &sec.model;
    let target = sec.target()?;
    if model.dims == 2 {
        let r = model.run(&target, cfg.seed)?;
        let half = model.half;
        for (name, v) in [
            ("truth.png", &r.truth),
            ("infdim.png", &r.infdim.values),
            ("discrete.png", &r.discrete.values),
            ("linear.png", &r.linear.values),
        ] {
            art.image(name, v, half)?;
        }
        let flags = [infdim_flag("infdim", &r.infdim), infdim_flag("discrete", &r.discrete)].into_iter().flatten().collect();
        return Ok(Outcome {
            metrics: json!({ "infdim": r.infdim.error, "discrete": r.discrete.error, "linear": r.linear.error }),
            flags,
        });
    }
    let half = model.half;
    let map = model.sampling_map(cfg.seed)?;
    let basis = model.basis()?;
    let rows = map.indices();
    let grid = grid_samples(&target, half)?;
    let truth: Vec<f64> = target.grid_values(half).iter().map(|v| v.re).collect();
    let meta = SliceMeta { wavelet: basis.spec(), k: basis.len(), cascade_level: basis.cascade_level(), half, rows: rows.clone() };
    let cached = match &sec.slice_cache {
        Some(dir) => cached_slice(&cfg.resolve(dir), &meta)?,
        None => None,
    };
    let from_cache = cached.is_some();
    let slice = match cached {
        Some(s) => s,
        None => build_synthesis_slice(&basis, half, &rows)?,
    };
    art.array(
        "slice",
        &ArrayData::C64(slice.entries.clone()),
        vec![slice.rows(), slice.cols()],
        serde_json::to_value(&slice.meta).expect("slice metadata serialises"),
    )?;
    art.mask("mask", &map)?;
    let sampled: Vec<C64> = rows.iter().map(|&i| grid[i]).collect();
    art.array("samples", &ArrayData::C64(sampled.clone()), vec![sampled.len()], json!({ "rows": "mask order" }))?;
    let inf = solve_infdim(&sampled, &slice, &basis, model.eta, model.controls, half, Some(&truth))?;
    let disc = discrete_cs(&sampled, &map, model.discrete_wavelet(), model.eta, model.controls, Some(&truth))?;
    let lin = linear_reconstruction(&grid, map.m(), Some(&truth))?;
    let series: Vec<f64> = real(&truncated_fourier_grid(&grid)?);
    let mut flags: Vec<SolverFlag> = [infdim_flag("infdim", &inf), infdim_flag("discrete", &disc)].into_iter().flatten().collect();
    let crime = if sec.crime {
        let mut x = to_complex(&truth);
        x.resize(2 * half, C64::new(0.0, 0.0));
        let g = dft_samples(&x)?;
        let picked: Vec<C64> = rows.iter().map(|&i| g[i]).collect();
        let c = discrete_cs(&picked, &map, model.discrete_wavelet(), model.eta, model.controls, Some(&truth))?;
        flags.extend(infdim_flag("discrete_crime", &c));
        Some(c)
    } else {
        None
    };
    art.csv(
        "recovery.csv",
        &["t", "truth", "infdim", "discrete", "linear", "fourier_series"],
        (0..half).map(|m| {
            vec![
                f(m as f64 / half as f64),
                f(truth[m]),
                f(inf.values[m]),
                f(disc.values[m]),
                f(lin.values[m]),
                f(series[m]),
            ]
        }),
    )?;
    Ok(Outcome {
        metrics: json!({
            "infdim": inf.error,
            "discrete": disc.error,
            "linear": lin.error,
            "fourier_series": relative_error_percent(&series, &truth),
            "discrete_crime": crime.as_ref().and_then(|c| c.error),
            "samples": map.m(),
            "slice_from_cache": from_cache,
        }),
        flags,
    })
}

struct SweepPoint {
    n: usize,
    samples: usize,
    result: RecoveryResult,
}

fn phantom(cfg: &ExperimentConfig) -> Result<PhantomKind> {
    cfg.image
        .phantom()?
        .ok_or_else(|| CliError::validation("image.source", "sweeps re-render a phantom at every resolution"))
}

fn resolution_sweep(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Outcome> {
    let kind = phantom(cfg)?;
    let points = cfg
        .sweep
        .resolutions
        .par_iter()
        .map(|&n| -> Result<SweepPoint> {
            let img = kind.render(n)?;
            let map = cfg.sampling.build(Shape::D2(n), cfg.seed, cfg.transform.is_hadamard())?;
            let (result, _) = recover_image(cfg, &img, n, &map)?;
            Ok(SweepPoint { n, samples: map.m(), result })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    for p in &points {
        art.image(&format!("reconstruction_{}.png", p.n), &p.result.real_reconstruction(), p.n)?;
    }
    let errors: Vec<f64> = points.iter().map(|p| p.result.relative_error.unwrap_or(f64::NAN)).collect();
    art.csv(
        "sweep.csv",
        &["resolution", "samples", "fraction", "error", "converged"],
        points.iter().zip(&errors).map(|(p, e)| {
            vec![
                p.n.to_string(),
                p.samples.to_string(),
                f(p.samples as f64 / (p.n * p.n) as f64),
                f(*e),
                p.result.converged.to_string(),
            ]
        }),
    )?;
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    Ok(Outcome {
        metrics: json!({ "resolutions": cfg.sweep.resolutions, "errors": errors, "strictly_decreasing": decreasing }),
        flags: points.iter().map(|p| SolverFlag::of(format!("resolution_{}", p.n), &p.result)).collect(),
    })
}

/// Zero-filled inverse DFT of the central `base × base` frequency block of
/// an `high × high` image: the linear reconstruction from a fully sampled
/// `base²` acquisition, shown at the high resolution.
pub fn low_resolution_linear(image: &[f64], high: usize, base: usize) -> Result<Vec<f64>> {
    let dft = Dft2::new(high, FreqOrdering::Centered)?;
    let mut coeffs = dft.apply(&to_complex(image));
    let lo = high / 2 - base / 2;
    for r in 0..high {
        for c in 0..high {
            if !(lo..lo + base).contains(&r) || !(lo..lo + base).contains(&c) {
                coeffs[r * high + c] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(real(&dft.adjoint(&coeffs)))
}

fn fixed_count_sweep(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Outcome> {
    let kind = phantom(cfg)?;
    let (base, high) = (cfg.sweep.base, cfg.sweep.high);
    let count = base * base;
    let truth = kind.render(high)?;
    let linear = low_resolution_linear(&truth, high, base)?;
    let linear_error = relative_error_percent(&linear, &truth);
    let mut spread = cfg.clone();
    spread.sampling.fraction = count as f64 / (high * high) as f64;
    let map = spread.sampling.build(Shape::D2(high), cfg.seed, cfg.transform.is_hadamard())?;
    let (r, _) = recover_image(&spread, &truth, high, &map)?;
    let cs_error = r.relative_error.unwrap_or(f64::NAN);
    art.image("truth.png", &truth, high)?;
    art.image("linear_low_resolution.png", &linear, high)?;
    art.image("cs_high_resolution.png", &r.real_reconstruction(), high)?;
    art.mask("mask", &map)?;
    art.csv(
        "fixed_count.csv",
        &["method", "resolution", "samples", "error"],
        [
            vec!["linear_full".into(), base.to_string(), count.to_string(), f(linear_error)],
            vec!["cs_multilevel".into(), high.to_string(), map.m().to_string(), f(cs_error)],
        ],
    )?;
    Ok(Outcome {
        metrics: json!({
            "linear_error": linear_error,
            "cs_error": cs_error,
            "cs_samples": map.m(),
            "linear_samples": count,
            "cs_beats_linear": cs_error < linear_error,
        }),
        flags: vec![SolverFlag::of("cs_multilevel", &r)],
    })
}
