//! Declarative experiment configs (TOML). Every random draw in a run traces
//! back to the single `seed` field.

use std::path::{Path, PathBuf};

use mlcs_core::infdim::{ContinuousTarget, InfdimConfig};
use mlcs_core::levels::LevelStructure;
use mlcs_core::phantom::PhantomKind;
use mlcs_core::sampling::{
    all_round_map, calibrate_fraction, hadamard_ordering_adapter, half_half_map, multilevel_map, uniform_map,
    AllRoundSpec, IndexOrdering, SamplingMap,
};
use mlcs_core::solvers::SolverControls;
use mlcs_core::transforms::registry::WaveletFactor;
use mlcs_core::transforms::{OperatorSpec, WaveletSpec};
use mlcs_core::{Operator, Shape};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::formats::ResizeMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Coherence,
    Sparsity,
    Flip,
    Tvflip,
    Recover,
    Fmsim,
    Infdim,
    ResolutionSweep,
    FixedCountSweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Coherence,
        ExperimentKind::Sparsity,
        ExperimentKind::Flip,
        ExperimentKind::Tvflip,
        ExperimentKind::Recover,
        ExperimentKind::Fmsim,
        ExperimentKind::Infdim,
        ExperimentKind::ResolutionSweep,
        ExperimentKind::FixedCountSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Coherence => "coherence",
            ExperimentKind::Sparsity => "sparsity",
            ExperimentKind::Flip => "flip",
            ExperimentKind::Tvflip => "tvflip",
            ExperimentKind::Recover => "recover",
            ExperimentKind::Fmsim => "fmsim",
            ExperimentKind::Infdim => "infdim",
            ExperimentKind::ResolutionSweep => "resolution-sweep",
            ExperimentKind::FixedCountSweep => "fixed-count-sweep",
        }
    }
}

/// Input image: `phantom:<geometric|smooth_blob|piecewise_constant>` or a
/// PGM/PNG path, relative paths resolved against the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImageConfig {
    pub source: String,
    /// Side of rendered phantoms; ignored for files.
    pub size: usize,
    /// Applied to files that are not square powers of two.
    pub resize: ResizeMode,
}

impl Default for ImageConfig {
    fn default() -> Self {
        ImageConfig { source: "phantom:geometric".into(), size: 128, resize: ResizeMode::Crop }
    }
}

impl ImageConfig {
    pub fn phantom(&self) -> Result<Option<PhantomKind>> {
        match self.source.strip_prefix("phantom:") {
            Some(name) => PhantomKind::parse(name)
                .map(Some)
                .map_err(|_| CliError::validation("image.source", format!("unknown phantom `{name}`"))),
            None => Ok(None),
        }
    }
}

/// `sensing` is `Ψ` in the registry syntax; `wavelet` a single `db<p>`
/// factor. Recovery operators are `sensing * wavelet⁻¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformConfig {
    pub sensing: String,
    pub wavelet: String,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig { sensing: "dft:centered".into(), wavelet: "db4".into() }
    }
}

impl TransformConfig {
    pub fn wavelet_factor(&self) -> Result<WaveletFactor> {
        match OperatorSpec::parse(&self.wavelet) {
            Ok(OperatorSpec::Dwt { wavelet }) => Ok(wavelet),
            _ => Err(CliError::validation("transform.wavelet", format!("`{}` is not a single db<p> factor", self.wavelet))),
        }
    }

    pub fn wavelet_spec(&self, side: usize) -> Result<WaveletSpec> {
        let spec = self.wavelet_factor()?.resolve(side);
        spec.validate(side).map_err(|e| CliError::validation("transform.wavelet", e.to_string()))?;
        Ok(spec)
    }

    pub fn sensing_operator(&self, shape: Shape) -> Result<Operator> {
        let spec = OperatorSpec::parse(&self.sensing).map_err(|e| CliError::validation("transform.sensing", e.to_string()))?;
        Ok(spec.build(shape)?)
    }

    pub fn analysis(&self, shape: Shape) -> Result<Operator> {
        self.wavelet_factor()?;
        Ok(OperatorSpec::parse(&self.wavelet)?.build(shape)?)
    }

    pub fn synthesis(&self, shape: Shape) -> Result<Operator> {
        self.wavelet_factor()?;
        Ok(OperatorSpec::parse(&format!("{}^-1", self.wavelet))?.build(shape)?)
    }

    /// `Ψ Φ*`.
    pub fn recovery_operator(&self, shape: Shape) -> Result<Operator> {
        self.wavelet_factor()?;
        let text = format!("{}*{}^-1", self.sensing, self.wavelet);
        let spec = OperatorSpec::parse(&text).map_err(|e| CliError::validation("transform.sensing", e.to_string()))?;
        Ok(spec.build(shape)?)
    }

    /// Maps are designed on the centered frequency grid; Hadamard sensing
    /// reads them in sequency order.
    pub fn is_hadamard(&self) -> bool {
        self.sensing.trim_start().starts_with("hadamard")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Full,
    Uniform,
    HalfHalf,
    Multilevel,
    AllRound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub scheme: SchemeKind,
    pub fraction: f64,
    /// All-round region count `n`.
    pub regions: usize,
    /// All-round fully sampled radius `m`.
    pub inner_radius: f64,
    /// All-round exponent `a`; `b` is calibrated to `fraction`.
    pub exponent: f64,
    /// Half-half: samples in the first level (default: half the budget).
    pub first_level: Option<usize>,
    /// Multilevel: level bounds in ranking order, ending at the grid size.
    pub levels: Vec<usize>,
    /// Multilevel: samples per level.
    pub counts: Vec<usize>,
    pub ordering: IndexOrdering,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            scheme: SchemeKind::AllRound,
            fraction: 0.125,
            regions: 20,
            inner_radius: 0.1,
            exponent: 2.0,
            first_level: None,
            levels: Vec::new(),
            counts: Vec::new(),
            ordering: IndexOrdering::CenteredSquare,
        }
    }
}

impl SamplingConfig {
    pub fn all_round_spec(&self, two_d: bool) -> Result<AllRoundSpec> {
        let base = AllRoundSpec { n: self.regions, m_radius: self.inner_radius, a: self.exponent, b: 0.0 };
        let b = calibrate_fraction(base, self.fraction, two_d)
            .map_err(|e| CliError::validation("sampling", e.to_string()))?;
        Ok(AllRoundSpec { b, ..base })
    }

    /// Budget in samples for a grid of `len` points.
    pub fn budget(&self, len: usize) -> usize {
        (self.fraction * len as f64).round() as usize
    }

    pub fn build(&self, shape: Shape, seed: u64, hadamard: bool) -> Result<SamplingMap> {
        let len = shape.len();
        let two_d = matches!(shape, Shape::D2(_));
        let map = match self.scheme {
            SchemeKind::Full => SamplingMap::full(shape)?,
            SchemeKind::Uniform => uniform_map(shape, self.budget(len), seed)?,
            SchemeKind::HalfHalf => {
                let first = self.first_level.unwrap_or(self.budget(len) / 2);
                half_half_map(shape, self.fraction, first, self.ordering, seed)?
            }
            SchemeKind::Multilevel => {
                let levels = LevelStructure::new(self.levels.clone())
                    .map_err(|e| CliError::validation("sampling.levels", e.to_string()))?;
                multilevel_map(shape, &levels, &self.counts, self.ordering, seed)?
            }
            SchemeKind::AllRound => all_round_map(shape, self.all_round_spec(two_d)?, seed)?,
        };
        Ok(if hadamard { hadamard_ordering_adapter(&map)? } else { map })
    }

    fn validate(&self) -> Result<()> {
        let f = |m: &str| Err(CliError::validation(format!("sampling.{}", m.split(' ').next().unwrap_or(m)), m.to_string()));
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return f("fraction must lie in (0, 1]");
        }
        if self.scheme == SchemeKind::AllRound {
            self.all_round_spec(true)?;
        }
        if self.scheme == SchemeKind::Multilevel && self.levels.len() != self.counts.len() {
            return f("counts must have one entry per level");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    L1,
    WeightedL1,
    Tv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub power_iterations: usize,
    /// Noise level `η` of the data constraint, in measurement units.
    pub eta: f64,
    pub regularizer: RegularizerKind,
    /// Weighted ℓ¹: level `k` of the wavelet layout gets weight `base^k`.
    pub weight_base: f64,
    /// Keep every `log_every`-th iteration in the convergence CSV.
    pub log_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 500,
            tolerance: 1e-5,
            power_iterations: 20,
            eta: 0.0,
            regularizer: RegularizerKind::L1,
            weight_base: 0.5,
            log_every: 0,
        }
    }
}

impl SolverConfig {
    pub fn controls(&self, real: bool) -> SolverControls {
        SolverControls {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            power_iterations: self.power_iterations,
            real,
            log_every: self.log_every,
            ..SolverControls::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(CliError::validation("solver.max_iterations", "must be at least 1"));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(CliError::validation("solver.tolerance", "must be positive and finite"));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(CliError::validation("solver.eta", "must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherenceConfig {
    /// 1D operator in the registry syntax.
    pub operator: String,
    pub size: usize,
    /// Dyadic levels: bounds `N/2^L, …, N/2, N` for rows and columns.
    pub levels: usize,
    pub k_grid: Vec<usize>,
    /// Tail coherence at `K = N/c` over `family` sizes.
    pub tail_ratio: f64,
    pub family: Vec<usize>,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        CoherenceConfig {
            operator: "dft:magnitude*db3^-1".into(),
            size: 256,
            levels: 5,
            k_grid: vec![0, 32, 64, 128, 192],
            tail_ratio: 2.0,
            family: vec![64, 128, 256, 512],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SparsityConfig {
    pub epsilons: Vec<f64>,
    /// Also profile a seeded i.i.d. Gaussian image of the same size.
    pub control: bool,
}

impl Default for SparsityConfig {
    fn default() -> Self {
        SparsityConfig { epsilons: vec![0.5, 0.75, 0.9, 0.95, 0.99], control: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TvFlipConfig {
    /// Twin construction seed; defaults to the run seed.
    pub twin_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FmConfig {
    /// Lens pass band radius, Nyquist = 1.
    pub psf_cutoff: f64,
    /// Photons under the all-ones pattern for a white scene.
    pub budget: f64,
    pub noise: bool,
    /// Defaults to the run seed.
    pub noise_seed: Option<u64>,
    /// Also run the Hadamard-only model and the half-half raw-pattern
    /// baseline.
    pub hadamard_only: bool,
    pub baseline: bool,
}

impl Default for FmConfig {
    fn default() -> Self {
        FmConfig {
            psf_cutoff: mlcs_core::fmsim::DEFAULT_CUTOFF,
            budget: mlcs_core::fmsim::DEFAULT_BUDGET,
            noise: true,
            noise_seed: None,
            hadamard_only: true,
            baseline: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InfdimSection {
    /// `exp_cos2`, `ramp`, `ones` or `zero`; 2D runs use its tensor square.
    pub target: String,
    /// Also feed DFT-generated samples of the grid signal to the discrete
    /// baseline.
    pub crime: bool,
    /// Directory holding `slice.bin`/`slice.json` from an earlier run with
    /// the same basis, grid and map.
    pub slice_cache: Option<PathBuf>,
    #[serde(flatten)]
    pub model: InfdimConfig,
}

impl Default for InfdimSection {
    fn default() -> Self {
        InfdimSection { target: "exp_cos2".into(), crime: true, slice_cache: None, model: InfdimConfig::default() }
    }
}

impl InfdimSection {
    pub fn target(&self) -> Result<ContinuousTarget> {
        let one = match self.target.as_str() {
            "exp_cos2" => ContinuousTarget::exp_cos2(),
            "ramp" => ContinuousTarget::ramp(),
            "ones" => ContinuousTarget::ones(),
            "zero" => ContinuousTarget::zero(),
            other => return Err(CliError::validation("infdim.target", format!("unknown target `{other}`"))),
        };
        if self.model.dims == 2 {
            Ok(ContinuousTarget::separable(one.clone(), one)?)
        } else {
            Ok(one)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Resolution sweep sides at the fixed fraction `sampling.fraction`.
    pub resolutions: Vec<usize>,
    /// Fixed-count sweep: `base²` samples, fully at `base` and spread at
    /// `high`.
    pub base: usize,
    pub high: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { resolutions: vec![64, 128, 256], base: 64, high: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional when the subcommand names the kind.
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub image: ImageConfig,
    #[serde(default)]
    pub transform: TransformConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub coherence: CoherenceConfig,
    #[serde(default)]
    pub sparsity: SparsityConfig,
    #[serde(default)]
    pub tvflip: TvFlipConfig,
    #[serde(default)]
    pub fmsim: FmConfig,
    #[serde(default)]
    pub infdim: InfdimSection,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    /// All defaults for `kind`.
    pub fn new(kind: ExperimentKind) -> Self {
        let mut c: ExperimentConfig = toml::from_str("").expect("empty config parses");
        c.kind = Some(kind);
        c
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e.message().split('`').nth(1).unwrap_or("config").to_string();
            CliError::validation(field, e.to_string().trim_end().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut c = Self::parse(&text).map_err(|e| match e {
            CliError::Validation { field, message } => {
                CliError::validation(field, format!("{}: {message}", path.display()))
            }
            other => other,
        })?;
        c.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        self.kind.ok_or_else(|| CliError::validation("kind", "no experiment kind given"))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Checks fields that are cheap to check up front; operator and map
    /// construction errors surface later as validation errors too.
    pub fn validate(&self) -> Result<()> {
        let kind = self.kind()?;
        self.solver.validate()?;
        self.sampling.validate()?;
        let pow2 = |field: &str, n: usize| {
            if n >= 2 && n.is_power_of_two() {
                Ok(())
            } else {
                Err(CliError::validation(field, format!("{n} is not a power of two ≥ 2")))
            }
        };
        if self.image.phantom()?.is_some() {
            pow2("image.size", self.image.size)?;
        } else if !self.resolve(Path::new(&self.image.source)).exists() {
            return Err(CliError::validation("image.source", format!("no such file `{}`", self.image.source)));
        }
        match kind {
            ExperimentKind::Coherence => {
                let c = &self.coherence;
                pow2("coherence.size", c.size)?;
                if c.size > 4096 {
                    return Err(CliError::validation("coherence.size", "the heatmap needs size ≤ 4096"));
                }
                if c.levels == 0 || c.size >> c.levels == 0 {
                    return Err(CliError::validation("coherence.levels", "need 1 ≤ levels ≤ log2(size)"));
                }
                if let Some(k) = c.k_grid.iter().find(|&&k| k >= c.size) {
                    return Err(CliError::validation("coherence.k_grid", format!("{k} is not below size")));
                }
                for &n in &c.family {
                    pow2("coherence.family", n)?;
                }
                if !(c.tail_ratio >= 1.0) {
                    return Err(CliError::validation("coherence.tail_ratio", "must be at least 1"));
                }
                OperatorSpec::parse(&c.operator).map_err(|e| CliError::validation("coherence.operator", e.to_string()))?;
            }
            ExperimentKind::Sparsity => {
                if self.sparsity.epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
                    return Err(CliError::validation("sparsity.epsilons", "every ε must lie in (0, 1]"));
                }
                self.transform.wavelet_factor()?;
            }
            ExperimentKind::Flip | ExperimentKind::Recover | ExperimentKind::Tvflip => {
                self.transform.wavelet_factor()?;
                OperatorSpec::parse(&self.transform.sensing)
                    .map_err(|e| CliError::validation("transform.sensing", e.to_string()))?;
            }
            ExperimentKind::Fmsim => {
                let f = &self.fmsim;
                if !(f.psf_cutoff > 0.0) {
                    return Err(CliError::validation("fmsim.psf_cutoff", "must be positive"));
                }
                if !(f.budget > 0.0 && f.budget.is_finite()) {
                    return Err(CliError::validation("fmsim.budget", "must be positive and finite"));
                }
                self.transform.wavelet_factor()?;
            }
            ExperimentKind::Infdim => {
                let m = &self.infdim.model;
                if m.dims != 1 && m.dims != 2 {
                    return Err(CliError::validation("infdim.dims", "must be 1 or 2"));
                }
                pow2("infdim.half", m.half)?;
                pow2("infdim.k", m.k)?;
                if !(m.fraction > 0.0 && m.fraction <= 1.0) {
                    return Err(CliError::validation("infdim.fraction", "must lie in (0, 1]"));
                }
                self.infdim.target()?;
            }
            ExperimentKind::ResolutionSweep | ExperimentKind::FixedCountSweep => {
                if self.image.phantom()?.is_none() {
                    return Err(CliError::validation("image.source", "sweeps re-render a phantom at every resolution"));
                }
                self.transform.wavelet_factor()?;
                if kind == ExperimentKind::ResolutionSweep {
                    if self.sweep.resolutions.is_empty() {
                        return Err(CliError::validation("sweep.resolutions", "empty"));
                    }
                    for &n in &self.sweep.resolutions {
                        pow2("sweep.resolutions", n)?;
                    }
                } else {
                    pow2("sweep.base", self.sweep.base)?;
                    pow2("sweep.high", self.sweep.high)?;
                    if self.sweep.base >= self.sweep.high {
                        return Err(CliError::validation("sweep.base", "must be below sweep.high"));
                    }
                }
            }
        }
        Ok(())
    }
}
