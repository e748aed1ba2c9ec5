//! Closed-form homogeneous norms and fundamental solutions.

use carnot_core::group::{make_euclidean, make_heisenberg};
use carnot_core::{CarnotGroup, Presentation};

use crate::error::{AcfError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeKind {
    /// `N = |x|` on `R^n`.
    Euclidean { n: usize },
    /// `N = (|x|^4 + 16 y^2)^{1/4}` on `H^n` in canonical coordinates.
    Heisenberg { n: usize },
}

/// Gauge data for a group with explicit fundamental solution
/// `Gamma = C N^{2-Q}`. Balls are always `{N <= r}`.
#[derive(Debug, Clone)]
pub struct GaugeSpec {
    pub group: CarnotGroup,
    pub kind: GaugeKind,
    pub q: u32,
    pub c: f64,
    /// `{N <= 1}` lies inside `|x_k| <= half_widths[k]`.
    pub half_widths: Vec<f64>,
    pub weights: Vec<u32>,
}

pub fn gauge_for(g: &CarnotGroup) -> Result<GaugeSpec> {
    let n = g.n();
    let weights: Vec<u32> = g.weights.weights().to_vec();
    let q = g.weights.homogeneous_dimension();
    if g.weights.step() == 1 {
        if n >= 3 && make_euclidean(n).is_ok_and(|e| e.same_fields(g)) {
            return Ok(GaugeSpec {
                group: g.clone(),
                kind: GaugeKind::Euclidean { n },
                q,
                c: 1.0,
                half_widths: vec![1.0; n],
                weights,
            });
        }
    } else if g.weights.strata().len() == 2 && g.weights.strata()[1] == 1 && g.m1().is_multiple_of(2) {
        let h = g.m1() / 2;
        if make_heisenberg(h, Presentation::Canonical).is_ok_and(|c| c.same_fields(g)) {
            let mut half_widths = vec![1.0; 2 * h];
            half_widths.push(0.25);
            return Ok(GaugeSpec {
                group: g.clone(),
                kind: GaugeKind::Heisenberg { n: h },
                q,
                c: 1.0,
                half_widths,
                weights,
            });
        }
        if h == 1 && make_heisenberg(1, Presentation::Polarized).is_ok_and(|p| p.same_fields(g)) {
            return Err(AcfError::UnsupportedGroup(
                "polarized Heisenberg coordinates: transport to the canonical presentation first".into(),
            ));
        }
    }
    Err(AcfError::UnsupportedGroup(format!(
        "the fundamental solution of the sub-Laplacian on `{}` is not explicit",
        g.name
    )))
}

impl GaugeSpec {
    pub fn with_constant(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn n(&self) -> usize {
        self.half_widths.len()
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        match self.kind {
            GaugeKind::Euclidean { .. } => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            GaugeKind::Heisenberg { n } => {
                let r2: f64 = x[..2 * n].iter().map(|v| v * v).sum();
                let y = x[2 * n];
                (r2 * r2 + 16.0 * y * y).sqrt().sqrt()
            }
        }
    }

    /// `C N^{2-Q}`.
    pub fn gamma(&self, x: &[f64]) -> f64 {
        self.c * self.norm(x).powi(2 - self.q as i32)
    }

    /// `C N^e`, for probing wrong exponents.
    pub fn gamma_power(&self, x: &[f64], e: f64) -> f64 {
        self.c * self.norm(x).powf(e)
    }

    pub fn dilate_into(&self, x: &[f64], lambda: f64, out: &mut [f64]) {
        for ((o, v), &w) in out.iter_mut().zip(x).zip(&self.weights) {
            *o = v * lambda.powi(w as i32);
        }
    }

    pub fn box_volume(&self) -> f64 {
        self.half_widths.iter().map(|h| 2.0 * h).product()
    }

    /// Half-widths of the box containing `{N <= r}`.
    pub fn scaled_half_widths(&self, r: f64) -> Vec<f64> {
        self.half_widths.iter().zip(&self.weights).map(|(h, &w)| h * r.powi(w as i32)).collect()
    }
}
