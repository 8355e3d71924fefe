//! Synthetic test images on `[0, 1)²`, row-major, values in `[0, 1]`.
//!
//! The geometric phantom is a fixed continuous function, box-filtered onto the
//! pixel grid, so that different resolutions discretise the same object.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{check_pow2, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhantomKind {
    Geometric,
    SmoothBlob,
    PiecewiseConstant,
}

impl PhantomKind {
    pub fn render(self, n: usize) -> Result<Vec<f64>> {
        match self {
            PhantomKind::Geometric => geometric_phantom(n),
            PhantomKind::SmoothBlob => smooth_blob(n),
            PhantomKind::PiecewiseConstant => tv_phantom(n),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(PhantomKind::Geometric),
            "smooth_blob" | "blob" => Ok(PhantomKind::SmoothBlob),
            "piecewise_constant" | "tv" => Ok(PhantomKind::PiecewiseConstant),
            _ => Err(Error::invalid(alloc::format!("unknown phantom `{s}`"))),
        }
    }
}

/// Rotated ellipse with a constant additive value.
struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    angle: f64,
    value: f64,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (x - self.cx, y - self.cy);
        let u = (c * dx + s * dy) / self.a;
        let v = (-s * dx + c * dy) / self.b;
        u * u + v * v <= 1.0
    }
}

const ELLIPSES: [Ellipse; 9] = [
    Ellipse { cx: 0.50, cy: 0.50, a: 0.42, b: 0.36, angle: 0.0, value: 0.45 },
    Ellipse { cx: 0.50, cy: 0.50, a: 0.39, b: 0.33, angle: 0.0, value: -0.15 },
    Ellipse { cx: 0.36, cy: 0.46, a: 0.10, b: 0.16, angle: 0.35, value: 0.30 },
    Ellipse { cx: 0.64, cy: 0.46, a: 0.08, b: 0.14, angle: -0.35, value: -0.20 },
    Ellipse { cx: 0.50, cy: 0.70, a: 0.12, b: 0.05, angle: 0.0, value: 0.25 },
    Ellipse { cx: 0.50, cy: 0.28, a: 0.04, b: 0.04, angle: 0.0, value: 0.35 },
    Ellipse { cx: 0.42, cy: 0.74, a: 0.015, b: 0.015, angle: 0.0, value: 0.30 },
    Ellipse { cx: 0.58, cy: 0.74, a: 0.012, b: 0.02, angle: 0.0, value: 0.30 },
    Ellipse { cx: 0.66, cy: 0.64, a: 0.025, b: 0.01, angle: 0.8, value: -0.2 },
];

/// The continuous geometric phantom at `(x, y)` (x across, y down).
pub fn geometric_value(x: f64, y: f64) -> f64 {
    let mut v = 0.05;
    for e in &ELLIPSES {
        if e.contains(x, y) {
            v += e.value;
        }
    }
    if ELLIPSES[1].contains(x, y) {
        // Smooth shading and a soft bump inside the inner region.
        v += 0.12 * (x - 0.5) + 0.08 * (y - 0.5);
        let (dx, dy) = (x - 0.60, y - 0.32);
        v += 0.2 * (-(dx * dx + dy * dy) / (2.0 * 0.06 * 0.06)).exp();
    }
    // A small bright square.
    if (0.30..0.36).contains(&x) && (0.62..0.68).contains(&y) {
        v += 0.3;
    }
    v.clamp(0.0, 1.0)
}

/// Box-filtered geometric phantom; every pixel averages the same number of
/// points per unit area at all resolutions up to 1024.
pub fn geometric_phantom(n: usize) -> Result<Vec<f64>> {
    check_pow2(n)?;
    let ss = (1024 / n).max(2);
    let inv = 1.0 / (n * ss) as f64;
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let mut acc = 0.0;
            for a in 0..ss {
                for b in 0..ss {
                    let y = ((r * ss + a) as f64 + 0.5) * inv;
                    let x = ((c * ss + b) as f64 + 0.5) * inv;
                    acc += geometric_value(x, y);
                }
            }
            out[r * n + c] = acc / (ss * ss) as f64;
        }
    }
    Ok(out)
}

/// Sum of three Gaussians, scaled into `[0, 1]`.
pub fn smooth_blob(n: usize) -> Result<Vec<f64>> {
    check_pow2(n)?;
    let blobs = [(0.4, 0.45, 0.15, 0.7), (0.65, 0.6, 0.1, 0.5), (0.55, 0.3, 0.07, 0.3)];
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let (x, y) = ((c as f64 + 0.5) / n as f64, (r as f64 + 0.5) / n as f64);
            let mut v = 0.0;
            for &(cx, cy, s, amp) in &blobs {
                let d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                v += amp * (-d2 / (2.0 * s * s)).exp();
            }
            out[r * n + c] = v.min(1.0);
        }
    }
    Ok(out)
}

/// Background level of [`tv_phantom`].
pub const TV_BACKGROUND: f64 = 0.1;

/// Isolated constant rectangles and one disc on a constant background, with
/// no anti-aliasing. Objects keep at least two background pixels between
/// each other and the image border for every `n ≥ 32`.
pub fn tv_phantom(n: usize) -> Result<Vec<f64>> {
    check_pow2(n)?;
    if n < 32 {
        return Err(Error::invalid("the piecewise-constant phantom needs n ≥ 32"));
    }
    let f = n as f64;
    let px = |t: f64| (t * f).round() as usize;
    let mut out = vec![TV_BACKGROUND; n * n];
    // (row0, row1, col0, col1) as fractions, half-open.
    let rects = [
        (0.125, 0.375, 0.125, 0.4375, 0.5),
        (0.125, 0.25, 0.5625, 0.875, 0.7),
        (0.5, 0.875, 0.125, 0.25, 0.4),
        (0.6875, 0.875, 0.375, 0.5625, 0.9),
    ];
    for &(r0, r1, c0, c1, v) in &rects {
        for r in px(r0)..px(r1) {
            for c in px(c0)..px(c1) {
                out[r * n + c] = v;
            }
        }
    }
    let (cy, cx, rad) = (0.5625 * f, 0.71875 * f, 0.125 * f);
    for r in 0..n {
        for c in 0..n {
            let (dy, dx) = (r as f64 + 0.5 - cy, c as f64 + 0.5 - cx);
            if dx * dx + dy * dy <= rad * rad {
                out[r * n + c] = 0.6;
            }
        }
    }
    Ok(out)
}
