//! Integrals of the form `int_{B_r} f Gamma` over gauge balls.

use carnot_core::Polynomial;
use rand_chacha::ChaCha8Rng;

use crate::error::{AcfError, Result};
use crate::eval::CompiledPoly;
use crate::gauge::GaugeSpec;
use crate::sampling::{purpose, run_blocks, uniform_in_box, Estimate, Moments};

/// Sample budget and reproducibility knobs shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; `0` lets rayon decide. Results do not depend on it.
    pub workers: usize,
}

impl SampleConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, workers: 0 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Draws a uniform point of the unit box and reports whether it falls in
/// the annulus `{1/2 < N <= 1}`.
pub(crate) fn annulus_sample(spec: &GaugeSpec, rng: &mut ChaCha8Rng, p: &mut [f64]) -> bool {
    uniform_in_box(rng, &spec.half_widths, p);
    let n = spec.norm(p);
    n > 0.5 && n <= 1.0
}

/// A real function of the coordinates, shared across worker threads.
pub type Integrand<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// Plain rejection sampling of `int_{B_r} f Gamma` from the box around
/// `B_r`, for several integrands at once.
pub fn mc_ball_oracle_many(
    spec: &GaugeSpec,
    integrands: &[Integrand],
    r: f64,
    cfg: SampleConfig,
) -> Result<Vec<Estimate>> {
    if r <= 0.0 || !r.is_finite() {
        return Err(AcfError::InvalidInput(format!("radius must be positive, got {r}")));
    }
    let half = spec.scaled_half_widths(r);
    let volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let k = integrands.len();
    let m = run_blocks(cfg.seed, purpose::ORACLE, cfg.samples, k + 1, cfg.workers, |rng, x| {
        let mut p = vec![0.0; half.len()];
        uniform_in_box(rng, &half, &mut p);
        if spec.norm(&p) <= r {
            let gamma = spec.gamma(&p);
            for (xi, f) in x.iter_mut().zip(integrands) {
                *xi = f(&p) * gamma;
            }
            x[k] = 1.0;
        }
    });
    if m.mean[k] == 0.0 {
        return Err(AcfError::ZeroAcceptance);
    }
    Ok((0..k).map(|i| m.estimate(i, volume)).collect())
}

pub fn mc_ball_oracle(
    spec: &GaugeSpec,
    integrand: Integrand,
    r: f64,
    cfg: SampleConfig,
) -> Result<Estimate> {
    Ok(mc_ball_oracle_many(spec, &[integrand], r, cfg)?[0])
}

/// Joint shell estimates of `int_{B_1} f_i Gamma` for homogeneous `f_i`.
#[derive(Debug, Clone)]
pub struct ShellResult {
    pub moments: Moments,
    /// `box volume / (1 - 2^{-(d_i + 2)})`.
    pub factors: Vec<f64>,
    pub acceptance: f64,
}

impl ShellResult {
    pub fn estimate(&self, i: usize) -> Estimate {
        self.moments.estimate(i, self.factors[i])
    }

    pub fn estimates(&self) -> Vec<Estimate> {
        (0..self.factors.len()).map(|i| self.estimate(i)).collect()
    }

    /// `sum_i w_i I_i` with its standard error, accounting for correlation.
    pub fn linear(&self, weights: &[f64]) -> Estimate {
        let value = weights.iter().enumerate().map(|(i, w)| w * self.estimate(i).value).sum();
        let g: Vec<(usize, f64)> =
            weights.iter().enumerate().map(|(i, w)| (i, w * self.factors[i])).collect();
        Estimate::new(value, self.moments.linear_stderr(&g, 1.0))
    }

    /// Covariance of the estimates `i` and `j`.
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.factors[i] * self.factors[j] * self.moments.mean_cov(i, j)
    }
}

/// `int_{B_1} f Gamma` for each `(f, d)` with `f` G-homogeneous of degree `d`:
/// Monte-Carlo over the annulus `{1/2 < N <= 1}`, then the dyadic shells sum
/// to `I_shell / (1 - 2^{-(d+2)})`.
pub fn shell_integrate_many(spec: &GaugeSpec, integrands: &[(Polynomial, i32)], cfg: SampleConfig) -> Result<ShellResult> {
    let mut compiled = Vec::with_capacity(integrands.len());
    let mut factors = Vec::with_capacity(integrands.len());
    let volume = spec.box_volume();
    for (f, d) in integrands {
        if *d < 0 {
            return Err(AcfError::NegativeDegree);
        }
        if f.nvars() != spec.n() {
            return Err(AcfError::InvalidInput(format!(
                "integrand has {} variables, group has {}",
                f.nvars(),
                spec.n()
            )));
        }
        if !f.is_g_homogeneous(&spec.group.weights, *d as u32) {
            return Err(AcfError::NotHomogeneous(*d as u32));
        }
        compiled.push(CompiledPoly::new(f));
        factors.push(volume / (1.0 - 0.5f64.powi(d + 2)));
    }
    let k = compiled.len();
    let moments = run_blocks(cfg.seed, purpose::SHELL, cfg.samples, k + 1, cfg.workers, |rng, x| {
        let mut p = vec![0.0; spec.n()];
        if annulus_sample(spec, rng, &mut p) {
            let gamma = spec.gamma(&p);
            for (xi, f) in x.iter_mut().zip(&compiled) {
                *xi = f.eval(&p) * gamma;
            }
            x[k] = 1.0;
        }
    });
    let acceptance = moments.mean[k];
    if acceptance == 0.0 {
        return Err(AcfError::ZeroAcceptance);
    }
    Ok(ShellResult { moments, factors, acceptance })
}

pub fn shell_integrate(spec: &GaugeSpec, integrand: &Polynomial, degree: i32, cfg: SampleConfig) -> Result<Estimate> {
    Ok(shell_integrate_many(spec, &[(integrand.clone(), degree)], cfg)?.estimate(0))
}
