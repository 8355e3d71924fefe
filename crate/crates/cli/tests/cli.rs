use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use mlcs::config::{ExperimentConfig, ExperimentKind};
use mlcs::error::{CliError, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_VALIDATION};
use mlcs::formats::{sha256_hex, Manifest};
use mlcs::run::{batch_exit_code, exit_code, run, run_batch};

fn smoke(kind: ExperimentKind) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smoke").join(format!("{}.toml", kind.name()))
}

fn mlcs(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mlcs")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

fn manifest(dir: &Path) -> Manifest {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn field_of(e: CliError) -> String {
    match e {
        CliError::Validation { field, .. } => field,
        other => panic!("expected a validation error, got {other}"),
    }
}

#[test]
fn every_kind_has_a_smoke_config() {
    for kind in ExperimentKind::ALL {
        let c = ExperimentConfig::load(&smoke(kind)).unwrap();
        assert_eq!(c.kind, Some(kind));
        c.validate().unwrap();
    }
}

#[test]
fn configs_round_trip_through_toml() {
    for kind in ExperimentKind::ALL {
        let c = ExperimentConfig::load(&smoke(kind)).unwrap();
        let back = ExperimentConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(ExperimentConfig { base_dir: c.base_dir.clone(), ..back }, c);
    }
}

#[test]
fn validation_errors_name_the_field() {
    let cases = [
        ("kind = \"flip\"\n[sampling]\nfraction = 1.5\n", "sampling.fraction"),
        ("kind = \"flip\"\n[sampling]\nfractoin = 0.1\n", "fractoin"),
        ("kind = \"flip\"\n[solver]\ntolerance = 0.0\n", "solver.tolerance"),
        ("kind = \"flip\"\n[image]\nsource = \"phantom:nope\"\n", "image.source"),
        ("kind = \"flip\"\n[image]\nsize = 100\n", "image.size"),
        ("kind = \"flip\"\n[transform]\nwavelet = \"dft\"\n", "transform.wavelet"),
        ("kind = \"coherence\"\n[coherence]\nk_grid = [300]\n", "coherence.k_grid"),
        ("kind = \"infdim\"\n[infdim]\ndims = 3\n", "infdim.dims"),
        ("kind = \"resolution-sweep\"\n[image]\nsource = \"x.png\"\n", "image.source"),
        ("kind = \"fixed-count-sweep\"\n[sweep]\nbase = 256\nhigh = 64\n", "sweep.base"),
        ("[solver]\nmax_iterations = 10\n", "kind"),
    ];
    for (text, field) in cases {
        let got = ExperimentConfig::parse(text).and_then(|c| c.validate().map(|_| c));
        let e = got.expect_err(text);
        assert_eq!(e.exit_code(), EXIT_VALIDATION, "{text}");
        assert!(field_of(e).contains(field), "{text}");
    }
    assert!(matches!(ExperimentConfig::parse("kind = \"warp\"\n"), Err(CliError::Validation { .. })));
}

#[test]
fn coherence_run_writes_heatmap_and_tail_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::new(ExperimentKind::Coherence);
    assert_eq!(cfg.coherence.size, 256);
    let m = run(&cfg, dir.path()).unwrap();
    let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
    for want in ["heatmap.pgm", "tail.csv", "local.csv", "config.toml"] {
        assert!(names.contains(&want), "{names:?}");
    }
    for f in &m.files {
        assert_eq!(sha256_hex(&std::fs::read(dir.path().join(&f.path)).unwrap()), f.sha256);
    }
    // μ(dft·db3⁻¹) at N = 256 is far above 1/N.
    assert!(m.metrics["global"].as_f64().unwrap() >= 0.1);
    assert_eq!(exit_code(&Ok(m)), EXIT_OK);
}

#[test]
fn manifests_are_stable_across_reruns() {
    let cfg = ExperimentConfig::load(&smoke(ExperimentKind::Recover)).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = run(&cfg, a.path()).unwrap();
    let mb = run(&cfg, b.path()).unwrap();
    assert_eq!(ma, mb);
    // The stored config re-runs to the same artifacts.
    let stored = ExperimentConfig::load(&a.path().join("config.toml")).unwrap();
    let c = tempfile::tempdir().unwrap();
    assert_eq!(run(&stored, c.path()).unwrap().files, ma.files);
}

#[test]
fn thread_count_does_not_change_outputs() {
    let cfg = smoke(ExperimentKind::ResolutionSweep);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let (code, _, err) = mlcs(&[
            "resolution-sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(code == EXIT_OK || code == EXIT_NOT_CONVERGED, "{err}");
    }
    assert_eq!(manifest(a.path()).files, manifest(b.path()).files);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "kind = \"flip\"\n[sampling]\nfraction = -1.0\n").unwrap();
    let (code, _, err) = mlcs(&["flip", "--config", bad.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("sampling.fraction"), "{err}");

    // Wrong subcommand for the config.
    let cfg = smoke(ExperimentKind::Flip);
    let (code, _, _) = mlcs(&["recover", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);

    // A starved solver still writes everything and reports it.
    let starved = dir.path().join("starved.toml");
    let text = std::fs::read_to_string(&cfg).unwrap().replace("max_iterations = 4000", "max_iterations = 3");
    std::fs::write(&starved, text).unwrap();
    let out = dir.path().join("starved");
    let (code, stdout, _) = mlcs(&["flip", "--config", starved.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(code, EXIT_NOT_CONVERGED);
    let m = manifest(&out);
    assert_eq!((m.status.as_str(), m.seed), ("not_converged", 9));
    assert!(m.files.iter().any(|f| f.path == "flip_report.json"));
    assert!(stdout.contains("error_flipped"));

    let (code, stdout, _) = mlcs(&["default-config", "fmsim"]);
    assert_eq!(code, EXIT_OK);
    assert!(ExperimentConfig::parse(&stdout).unwrap().kind == Some(ExperimentKind::Fmsim));
}

#[test]
fn smoke_configs_finish_within_a_minute() {
    let root = tempfile::tempdir().unwrap();
    for kind in ExperimentKind::ALL {
        let cfg = ExperimentConfig::load(&smoke(kind)).unwrap();
        let t = Instant::now();
        let r = run(&cfg, &root.path().join(kind.name()));
        let secs = t.elapsed().as_secs_f64();
        let code = exit_code(&r);
        assert!(code == EXIT_OK || code == EXIT_NOT_CONVERGED, "{}: {:?}", kind.name(), r.err());
        assert!(secs < 60.0, "{}: {secs:.1} s", kind.name());
        let m = r.unwrap();
        assert_eq!(m.kind, kind.name());
        assert!(m.files.len() >= 2);
    }
}

#[test]
fn infdim_slice_cache_is_reused() {
    let cfg = ExperimentConfig::load(&smoke(ExperimentKind::Infdim)).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run(&cfg, a.path()).unwrap();
    assert_eq!(first.metrics["slice_from_cache"], false);
    let mut cached = cfg.clone();
    cached.infdim.slice_cache = Some(a.path().to_path_buf());
    let second = run(&cached, b.path()).unwrap();
    assert_eq!(second.metrics["slice_from_cache"], true);
    let hash = |m: &Manifest, name: &str| m.files.iter().find(|f| f.path == name).unwrap().sha256.clone();
    for name in ["slice.bin", "recovery.csv"] {
        assert_eq!(hash(&first, name), hash(&second, name));
    }
    // A cache built for another map is ignored.
    let mut other = cached.clone();
    other.seed = 1;
    let c = tempfile::tempdir().unwrap();
    assert_eq!(run(&other, c.path()).unwrap().metrics["slice_from_cache"], false);
}

#[test]
fn images_from_files_are_cropped_or_padded() {
    let dir = tempfile::tempdir().unwrap();
    let img = mlcs::formats::GrayImage {
        width: 70,
        height: 50,
        data: (0..3500).map(|i| (i % 70) as f64 / 70.0).collect(),
    };
    mlcs::formats::save_image(&dir.path().join("in.png"), &img).unwrap();
    for (mode, side) in [("crop", 32), ("pad", 128)] {
        let text = format!(
            "kind = \"recover\"\n[image]\nsource = \"in.png\"\nresize = \"{mode}\"\n[solver]\nmax_iterations = 50\n"
        );
        let cfg_path = dir.path().join(format!("{mode}.toml"));
        std::fs::write(&cfg_path, text).unwrap();
        let cfg = ExperimentConfig::load(&cfg_path).unwrap();
        let scene = mlcs::experiments::load_scene(&cfg).unwrap();
        assert_eq!(scene.side, side);
        let m = run(&cfg, &dir.path().join(mode)).unwrap();
        assert!(m.files.iter().any(|f| f.path == "reconstruction.png"));
    }
}

#[test]
fn batch_runs_configs_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let jobs: Vec<_> = [ExperimentKind::Coherence, ExperimentKind::Sparsity]
        .into_iter()
        .map(|k| (ExperimentConfig::load(&smoke(k)).unwrap(), dir.path().join(k.name())))
        .collect();
    let results = run_batch(&jobs);
    assert_eq!(results[0].as_ref().unwrap().kind, "coherence");
    assert_eq!(results[1].as_ref().unwrap().kind, "sparsity");
    assert_eq!(batch_exit_code(&results), EXIT_OK);
    let bad = ExperimentConfig::parse("kind = \"flip\"\n[solver]\neta = -1.0\n").unwrap();
    let mixed = run_batch(&[(bad, dir.path().join("bad"))]);
    assert_eq!(batch_exit_code(&mixed), EXIT_VALIDATION);
}
