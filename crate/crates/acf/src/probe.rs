//! Finite-difference check that `Gamma` is `Delta_G`-harmonic off the pole.
//!
//! `X_j^2 Gamma(P)` is the second derivative of `Gamma` along the integral
//! curve of `X_j` through `P`. The curve is replaced by its second-order
//! Taylor polynomial `P + s v + s^2/2 (Dv v)`; the odd error terms cancel in
//! the central difference, so the probe is `O(h^2)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::eval::CompiledPoly;
use crate::gauge::GaugeSpec;
use crate::integrate::annulus_sample;
use crate::sampling::purpose;

struct FieldCurve {
    velocity: Vec<CompiledPoly>,
    accel: Vec<CompiledPoly>,
}

fn field_curves(spec: &GaugeSpec) -> Result<Vec<FieldCurve>> {
    let g = &spec.group;
    let n = g.n();
    (0..g.m1())
        .map(|j| {
            let d = g.field(j)?;
            let mut velocity = Vec::with_capacity(n);
            let mut accel = Vec::with_capacity(n);
            for k in 0..n {
                let c = d.coeff(k);
                accel.push(CompiledPoly::new(&d.apply(&c)?));
                velocity.push(CompiledPoly::new(&c));
            }
            Ok(FieldCurve { velocity, accel })
        })
        .collect()
}

fn probe_points(spec: &GaugeSpec, points: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose::PROBE << 40);
    let mut out = Vec::with_capacity(points);
    let mut p = vec![0.0; spec.n()];
    while out.len() < points {
        if annulus_sample(spec, &mut rng, &mut p) && spec.norm(&p) < 1.0 {
            out.push(p.clone());
        }
    }
    out
}

/// `max_P |sum_j (G(g_j(h)) - 2 G(P) + G(g_j(-h))) / h^2|` over probe points in
/// the annulus, where `G = C N^{exponent}` (`2 - Q` when `None`).
pub fn gamma_harmonicity_probe(
    spec: &GaugeSpec,
    points: usize,
    h: f64,
    seed: u64,
    exponent: Option<f64>,
) -> Result<f64> {
    let curves = field_curves(spec)?;
    let pts = probe_points(spec, points, seed);
    Ok(probe_max(spec, &curves, &pts, h, exponent))
}

fn probe_max(spec: &GaugeSpec, curves: &[FieldCurve], pts: &[Vec<f64>], h: f64, exponent: Option<f64>) -> f64 {
    let e = exponent.unwrap_or(2.0 - spec.q as f64);
    let gamma = |x: &[f64]| spec.gamma_power(x, e);
    let n = spec.n();
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let mut worst: f64 = 0.0;
    for p in pts {
        let centre = gamma(p);
        let mut lap = 0.0;
        for c in curves {
            for k in 0..n {
                let v = c.velocity[k].eval(p);
                let a = c.accel[k].eval(p);
                plus[k] = p[k] + h * v + 0.5 * h * h * a;
                minus[k] = p[k] - h * v + 0.5 * h * h * a;
            }
            lap += (gamma(&plus) - 2.0 * centre + gamma(&minus)) / (h * h);
        }
        worst = worst.max(lap.abs());
    }
    worst
}

/// Probe values at `h0, h0/2, ...` (`halvings + 1` steps) on one point set.
pub fn probe_convergence(
    spec: &GaugeSpec,
    points: usize,
    seed: u64,
    h0: f64,
    halvings: u32,
    exponent: Option<f64>,
) -> Result<Vec<(f64, f64)>> {
    let curves = field_curves(spec)?;
    let pts = probe_points(spec, points, seed);
    Ok((0..=halvings)
        .map(|k| {
            let h = h0 * 0.5f64.powi(k as i32);
            (h, probe_max(spec, &curves, &pts, h, exponent))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::gauge_for;
    use carnot_core::CarnotGroup;

    #[test]
    fn euclidean_gamma_is_harmonic() {
        let s = gauge_for(&CarnotGroup::preset("euclidean:3").unwrap()).unwrap();
        let conv = probe_convergence(&s, 200, 1, 0.05, 4, None).unwrap();
        for w in conv.windows(2) {
            let ratio = w[0].1 / w[1].1;
            assert!((3.5..4.5).contains(&ratio), "{conv:?}");
        }
    }

    #[test]
    fn wrong_exponent_is_caught() {
        let s = gauge_for(&CarnotGroup::preset("heisenberg:1").unwrap()).unwrap();
        let good = gamma_harmonicity_probe(&s, 200, 1e-3, 2, None).unwrap();
        let bad = gamma_harmonicity_probe(&s, 200, 1e-3, 2, Some(-1.0)).unwrap();
        assert!(bad > 1e3 * good, "{good} {bad}");
    }
}
