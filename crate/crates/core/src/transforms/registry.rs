//! Declarative operator descriptions, as found in experiment configs.
//!
//! Textual form: factors joined by `*` (or `·`), applied right to left.
//! Factors are `dft[:natural|centered|magnitude]`, `hadamard[:natural|sequency]`,
//! `db<p>[:r<levels>][:periodic|boundary]` (analysis), the same with a `^-1`
//! or `⁻¹` suffix or an `i` prefix (synthesis), `rand:<seed>`,
//! `scrambled:<seed>` and `id`. Omitted levels mean the deepest admissible
//! decomposition.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::ops::{compose, random_orthogonal, Adjoint, Identity, ScrambledHadamard};
use super::{
    BoundaryMode, Dft1, Dft2, Dwt1, Dwt2, FreqOrdering, Hadamard1, Hadamard2, HadamardOrdering,
    Operator, WaveletSpec,
};
use crate::error::{Error, Result};
use crate::signal::Shape;

/// Wavelet factor with optional depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveletFactor {
    pub order: usize,
    #[serde(default)]
    pub levels: Option<usize>,
    pub mode: BoundaryMode,
}

impl WaveletFactor {
    pub fn resolve(&self, side: usize) -> WaveletSpec {
        let levels = self
            .levels
            .unwrap_or_else(|| WaveletSpec::max_levels(self.order, self.mode, side));
        WaveletSpec { order: self.order, levels, mode: self.mode }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    Dft { ordering: FreqOrdering },
    Hadamard { ordering: HadamardOrdering },
    Dwt { wavelet: WaveletFactor },
    InverseDwt { wavelet: WaveletFactor },
    RandomOrthogonal { seed: u64 },
    ScrambledHadamard { seed: u64 },
    Identity,
    Compose { ops: Vec<OperatorSpec> },
    Adjoint { op: Box<OperatorSpec> },
}

impl OperatorSpec {
    /// Builds the operator for signals of the given shape.
    pub fn build(&self, shape: Shape) -> Result<Operator> {
        shape.validate()?;
        let n = shape.side();
        let two_d = matches!(shape, Shape::D2(_));
        Ok(match self {
            OperatorSpec::Dft { ordering } if two_d => Arc::new(Dft2::new(n, *ordering)?),
            OperatorSpec::Dft { ordering } => Arc::new(Dft1::new(n, *ordering)?),
            OperatorSpec::Hadamard { ordering } if two_d => Arc::new(Hadamard2::new(n, *ordering)?),
            OperatorSpec::Hadamard { ordering } => Arc::new(Hadamard1::new(n, *ordering)?),
            OperatorSpec::Dwt { wavelet } | OperatorSpec::InverseDwt { wavelet } => {
                let spec = wavelet.resolve(n);
                let op: Operator = if two_d {
                    Arc::new(Dwt2::new(n, spec)?)
                } else {
                    Arc::new(Dwt1::new(n, spec)?)
                };
                if matches!(self, OperatorSpec::InverseDwt { .. }) {
                    Arc::new(Adjoint(op))
                } else {
                    op
                }
            }
            OperatorSpec::RandomOrthogonal { seed } => {
                if shape.len() > 4096 {
                    return Err(Error::TooLarge(alloc::format!(
                        "dense random orthogonal matrix of size {}; use scrambled:<seed>",
                        shape.len()
                    )));
                }
                Arc::new(random_orthogonal(shape.len(), *seed)?)
            }
            OperatorSpec::ScrambledHadamard { seed } => {
                Arc::new(ScrambledHadamard::new(shape.len(), *seed)?)
            }
            OperatorSpec::Identity => Arc::new(Identity(shape.len())),
            OperatorSpec::Compose { ops } => {
                compose(ops.iter().map(|o| o.build(shape)).collect::<Result<Vec<_>>>()?)?
            }
            OperatorSpec::Adjoint { op } => Arc::new(Adjoint(op.build(shape)?)),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let factors: Vec<&str> = text
            .split(['*', '·'])
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        if factors.is_empty() {
            return Err(Error::invalid("empty operator description"));
        }
        let mut ops = factors.into_iter().map(parse_factor).collect::<Result<Vec<_>>>()?;
        Ok(if ops.len() == 1 { ops.remove(0) } else { OperatorSpec::Compose { ops } })
    }
}

fn parse_factor(tok: &str) -> Result<OperatorSpec> {
    let bad = || Error::invalid(alloc::format!("unrecognised operator factor `{tok}`"));
    let mut inverse = false;
    let mut t = tok.to_string();
    for suffix in ["^-1", "⁻¹"] {
        if let Some(s) = t.strip_suffix(suffix) {
            t = s.to_string();
            inverse = true;
        }
    }
    let mut parts = t.split(':');
    let head = parts.next().ok_or_else(bad)?;
    let rest: Vec<&str> = parts.collect();
    let head = if let Some(h) = head.strip_prefix("idb") {
        inverse = true;
        alloc::format!("db{h}")
    } else {
        head.to_string()
    };
    let spec = match head.as_str() {
        "dft" => OperatorSpec::Dft {
            ordering: match rest.first().copied() {
                None | Some("natural") => FreqOrdering::Natural,
                Some("centered") => FreqOrdering::Centered,
                Some("magnitude") => FreqOrdering::Magnitude,
                _ => return Err(bad()),
            },
        },
        "hadamard" => OperatorSpec::Hadamard {
            ordering: match rest.first().copied() {
                None | Some("sequency") => HadamardOrdering::Sequency,
                Some("natural") => HadamardOrdering::Natural,
                _ => return Err(bad()),
            },
        },
        "haar" => wavelet(1, &rest).ok_or_else(bad)?,
        "rand" => OperatorSpec::RandomOrthogonal {
            seed: rest.first().and_then(|s| s.parse().ok()).ok_or_else(bad)?,
        },
        "scrambled" => OperatorSpec::ScrambledHadamard {
            seed: rest.first().and_then(|s| s.parse().ok()).ok_or_else(bad)?,
        },
        "id" => OperatorSpec::Identity,
        h if h.starts_with("db") => {
            let p: usize = h[2..].parse().map_err(|_| bad())?;
            wavelet(p, &rest).ok_or_else(bad)?
        }
        _ => return Err(bad()),
    };
    Ok(match (inverse, spec) {
        (false, s) => s,
        (true, OperatorSpec::Dwt { wavelet }) => OperatorSpec::InverseDwt { wavelet },
        (true, s) => OperatorSpec::Adjoint { op: Box::new(s) },
    })
}

fn wavelet(order: usize, rest: &[&str]) -> Option<OperatorSpec> {
    let mut w = WaveletFactor { order, levels: None, mode: BoundaryMode::Periodic };
    for r in rest {
        match *r {
            "periodic" => w.mode = BoundaryMode::Periodic,
            "boundary" => w.mode = BoundaryMode::Boundary,
            s if s.starts_with('r') => w.levels = Some(s[1..].parse().ok()?),
            _ => return None,
        }
    }
    Some(OperatorSpec::Dwt { wavelet: w })
}

impl core::fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OperatorSpec::Dft { ordering } => write!(f, "dft:{}", lower(ordering)),
            OperatorSpec::Hadamard { ordering } => write!(f, "hadamard:{}", lower(ordering)),
            OperatorSpec::Dwt { wavelet } | OperatorSpec::InverseDwt { wavelet } => {
                write!(f, "db{}", wavelet.order)?;
                if let Some(r) = wavelet.levels {
                    write!(f, ":r{r}")?;
                }
                write!(f, ":{}", lower(&wavelet.mode))?;
                if matches!(self, OperatorSpec::InverseDwt { .. }) {
                    write!(f, "^-1")?;
                }
                Ok(())
            }
            OperatorSpec::RandomOrthogonal { seed } => write!(f, "rand:{seed}"),
            OperatorSpec::ScrambledHadamard { seed } => write!(f, "scrambled:{seed}"),
            OperatorSpec::Identity => write!(f, "id"),
            OperatorSpec::Compose { ops } => {
                for (i, o) in ops.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{o}")?;
                }
                Ok(())
            }
            OperatorSpec::Adjoint { op } => write!(f, "{op}^-1"),
        }
    }
}

fn lower<T: core::fmt::Debug>(v: &T) -> String {
    alloc::format!("{v:?}").to_lowercase()
}
