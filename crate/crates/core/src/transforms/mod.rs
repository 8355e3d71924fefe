//! Linear operators and the unitary transforms used as sensing and sparsity
//! bases.
//!
//! Vectors are flat `C64` slices; 2D operators act on row-major `n × n` grids.
//! `apply_into` and `adjoint_into` require `x.len() == dim_in()` and
//! `out.len() == dim_out()` (resp. swapped) and panic otherwise; the checked
//! wrappers [`LinearOperator::try_apply`] and [`LinearOperator::try_adjoint`]
//! report a [`crate::Error`] instead.

pub mod fft;
pub mod hadamard;
pub mod ops;
pub mod registry;
pub mod wavelet;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::signal::{Shape, Signal};
use crate::C64;

pub use fft::{Dft1, Dft2, FftPlan, FreqOrdering};
pub use hadamard::{Hadamard1, Hadamard2, HadamardOrdering};
pub use ops::{
    compose, random_orthogonal, tensor2d, Adjoint, Compose, Identity, MatrixOperator,
    ScrambledHadamard, Subsampled, Tensor2d,
};
pub use registry::OperatorSpec;
pub use wavelet::{BoundaryMode, Dwt1, Dwt2, StationaryEdges, WaveletSpec};

/// A linear map `C^dim_in → C^dim_out` with its adjoint.
pub trait LinearOperator: Send + Sync + core::fmt::Debug {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn apply_into(&self, x: &[C64], out: &mut [C64]);
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]);
    /// Short description used in manifests and logs.
    fn name(&self) -> String;

    /// `U* U = I`.
    fn is_isometry(&self) -> bool {
        false
    }
    /// `U U* = I`.
    fn is_coisometry(&self) -> bool {
        false
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim_out()];
        self.apply_into(x, &mut out);
        out
    }

    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim_in()];
        self.adjoint_into(y, &mut out);
        out
    }

    fn try_apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len(self.dim_in(), x.len())?;
        Ok(self.apply(x))
    }

    fn try_adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        check_len(self.dim_out(), y.len())?;
        Ok(self.adjoint(y))
    }

    /// Column `j`, i.e. `U e_j`.
    fn column(&self, j: usize) -> Vec<C64> {
        let mut e = vec![C64::new(0.0, 0.0); self.dim_in()];
        e[j] = C64::new(1.0, 0.0);
        self.apply(&e)
    }
}

pub type Operator = Arc<dyn LinearOperator>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Inverse,
}

fn run(op: &dyn LinearOperator, x: &Signal, direction: Direction) -> Result<Signal> {
    let data = match direction {
        Direction::Forward => op.try_apply(&x.data)?,
        Direction::Inverse => op.try_adjoint(&x.data)?,
    };
    Signal::new(x.shape, data)
}

/// Unitary DFT of a 1D or 2D signal.
pub fn dft(x: &Signal, direction: Direction, ordering: FreqOrdering) -> Result<Signal> {
    match x.shape {
        Shape::D1(n) => run(&Dft1::new(n, ordering)?, x, direction),
        Shape::D2(n) => run(&Dft2::new(n, ordering)?, x, direction),
    }
}

/// Orthonormal Walsh-Hadamard transform of a 1D or 2D signal.
pub fn fwht(x: &Signal, direction: Direction, ordering: HadamardOrdering) -> Result<Signal> {
    match x.shape {
        Shape::D1(n) => run(&Hadamard1::new(n, ordering)?, x, direction),
        Shape::D2(n) => run(&Hadamard2::new(n, ordering)?, x, direction),
    }
}

/// Orthonormal DWT (forward = analysis) of a 1D or 2D signal.
pub fn dwt(x: &Signal, direction: Direction, spec: WaveletSpec) -> Result<Signal> {
    match x.shape {
        Shape::D1(n) => run(&Dwt1::new(n, spec)?, x, direction),
        Shape::D2(n) => run(&Dwt2::new(n, spec)?, x, direction),
    }
}

/// Dense matrix of `op` as a list of columns. Intended for small operators.
pub fn materialize(op: &dyn LinearOperator) -> Vec<Vec<C64>> {
    (0..op.dim_in()).map(|j| op.column(j)).collect()
}
