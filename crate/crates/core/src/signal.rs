//! Discrete signals on power-of-two grids.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_pow2, Result};
use crate::C64;

/// Grid shape. Two-dimensional grids are square and stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    D1(usize),
    D2(usize),
}

impl Shape {
    /// Side length.
    pub fn side(self) -> usize {
        match self {
            Shape::D1(n) | Shape::D2(n) => n,
        }
    }

    /// Number of samples.
    pub fn len(self) -> usize {
        match self {
            Shape::D1(n) => n,
            Shape::D2(n) => n * n,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    pub fn validate(self) -> Result<()> {
        check_pow2(self.side())
    }
}

/// Samples together with their grid shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub shape: Shape,
    pub data: Vec<C64>,
}

impl Signal {
    pub fn new(shape: Shape, data: Vec<C64>) -> Result<Self> {
        shape.validate()?;
        check_len(shape.len(), data.len())?;
        Ok(Signal { shape, data })
    }

    pub fn from_real(shape: Shape, data: &[f64]) -> Result<Self> {
        Self::new(shape, data.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn zeros(shape: Shape) -> Result<Self> {
        Self::new(shape, alloc::vec![C64::new(0.0, 0.0); shape.len()])
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }
}
