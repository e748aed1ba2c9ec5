//! Reproducible parallel Monte-Carlo.
//!
//! Samples are drawn in fixed-size blocks. Block `b` of a run with purpose
//! tag `t` reads ChaCha stream `(t << 40) | b` of the user seed, so the
//! values never depend on how blocks are scheduled. Per-block sums are
//! compensated and block moments are merged in block order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const BLOCK: usize = 4096;

/// Purpose tags keep the streams of different estimators independent.
pub mod purpose {
    pub const ORACLE: u64 = 1;
    pub const SHELL: u64 = 2;
    pub const PHI_DIRECT: u64 = 3;
    pub const JAY: u64 = 4;
    pub const PROBE: u64 = 5;
    pub const ORTHO: u64 = 6;
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sample count, mean vector and co-moment matrix
/// `sum_s (x_i - mean_i)(x_j - mean_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub dim: usize,
    pub mean: Vec<f64>,
    pub comoment: Vec<f64>,
}

impl Moments {
    pub fn empty(dim: usize) -> Self {
        Self { n: 0, dim, mean: vec![0.0; dim], comoment: vec![0.0; dim * dim] }
    }

    /// Chan et al. pairwise update.
    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta: Vec<f64> = other.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                self.comoment[i * d + j] += other.comoment[i * d + j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl * nb / n;
        }
        self.n += other.n;
    }

    /// Covariance of the sample means of components `i` and `j`.
    pub fn mean_cov(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        let n = self.n as f64;
        self.comoment[i * self.dim + j] / (n - 1.0) / n
    }

    pub fn mean_stderr(&self, i: usize) -> f64 {
        self.mean_cov(i, i).max(0.0).sqrt()
    }

    /// `scale * mean_i` with its standard error.
    pub fn estimate(&self, i: usize, scale: f64) -> Estimate {
        Estimate { value: scale * self.mean[i], stderr: scale.abs() * self.mean_stderr(i) }
    }

    /// Standard error of `scale * sum_i g_i mean_i` (delta method for a
    /// linear functional with gradient `g`).
    pub fn linear_stderr(&self, g: &[(usize, f64)], scale: f64) -> f64 {
        let mut var = 0.0;
        for &(i, gi) in g {
            for &(j, gj) in g {
                var += gi * gj * self.mean_cov(i, j);
            }
        }
        scale.abs() * var.max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(value: f64, stderr: f64) -> Self {
        Self { value, stderr }
    }

    /// Number of standard errors separating `self` from zero.
    pub fn z(&self) -> f64 {
        self.value / self.stderr
    }

    pub fn combined_stderr(&self, other: &Estimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }

    /// `|self - other| <= k * combined stderr`.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.value - other.value).abs() <= k * self.combined_stderr(other)
    }
}

fn block_rng(seed: u64, purpose: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((purpose << 40) | block);
    rng
}

fn block_moments<F>(seed: u64, purpose: u64, block: usize, count: usize, dim: usize, sample: &F) -> Moments
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let mut rng = block_rng(seed, purpose, block as u64);
    let mut x = vec![0.0; dim];
    let mut s = vec![CompensatedSum::default(); dim];
    let mut ss = vec![CompensatedSum::default(); dim * dim];
    for _ in 0..count {
        x.iter_mut().for_each(|v| *v = 0.0);
        sample(&mut rng, &mut x);
        for i in 0..dim {
            s[i].add(x[i]);
            if x[i] != 0.0 {
                for j in 0..dim {
                    ss[i * dim + j].add(x[i] * x[j]);
                }
            }
        }
    }
    let n = count as f64;
    let mean: Vec<f64> = s.iter().map(|c| c.value() / n).collect();
    let mut comoment = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            comoment[i * dim + j] = ss[i * dim + j].value() - n * mean[i] * mean[j];
        }
    }
    Moments { n: count as u64, dim, mean, comoment }
}

/// Runs `samples` draws of `sample` (which fills a `dim`-vector, pre-zeroed)
/// on `workers` threads (`0` = rayon default) and returns the merged moments.
/// The result depends only on `(seed, purpose, samples)`.
pub fn run_blocks<F>(seed: u64, purpose: u64, samples: usize, dim: usize, workers: usize, sample: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let nblocks = samples.div_ceil(BLOCK);
    let job = || {
        (0..nblocks)
            .into_par_iter()
            .map(|b| {
                let count = BLOCK.min(samples - b * BLOCK);
                block_moments(seed, purpose, b, count, dim, &sample)
            })
            .collect::<Vec<_>>()
    };
    let blocks = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(job),
        Err(_) => job(),
    };
    let mut total = Moments::empty(dim);
    for b in &blocks {
        total.merge(b);
    }
    total
}

/// Uniform point in the box `|x_k| <= half[k]`.
pub fn uniform_in_box(rng: &mut ChaCha8Rng, half: &[f64], out: &mut [f64]) {
    use rand::Rng;
    for (o, h) in out.iter_mut().zip(half) {
        *o = h * (2.0 * rng.random::<f64>() - 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..10 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 10.0);
    }

    #[test]
    fn merged_moments_match_direct() {
        let xs = [1.0, 4.0, -2.0, 0.5, 3.0, 7.0];
        let mut whole = Moments::empty(1);
        let mut parts = Moments::empty(1);
        let one = |v: f64| Moments { n: 1, dim: 1, mean: vec![v], comoment: vec![0.0] };
        for &x in &xs {
            whole.merge(&one(x));
        }
        let mut a = Moments::empty(1);
        let mut b = Moments::empty(1);
        xs[..2].iter().for_each(|&x| a.merge(&one(x)));
        xs[2..].iter().for_each(|&x| b.merge(&one(x)));
        parts.merge(&a);
        parts.merge(&b);
        let mean = xs.iter().sum::<f64>() / 6.0;
        let m2: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        assert!((parts.mean[0] - mean).abs() < 1e-14);
        assert!((parts.comoment[0] - m2).abs() < 1e-12);
        assert!((whole.comoment[0] - m2).abs() < 1e-12);
    }

    #[test]
    fn independent_of_worker_count() {
        use rand::Rng;
        let f = |rng: &mut ChaCha8Rng, x: &mut [f64]| {
            let u: f64 = rng.random();
            x[0] = u;
            x[1] = u * u;
        };
        let a = run_blocks(7, 99, 3 * BLOCK + 17, 2, 1, f);
        let b = run_blocks(7, 99, 3 * BLOCK + 17, 2, 4, f);
        assert_eq!(a, b);
        assert_eq!(a.n, (3 * BLOCK + 17) as u64);
        assert!((a.mean[0] - 0.5).abs() < 5.0 * a.mean_stderr(0));
        let c = run_blocks(8, 99, 3 * BLOCK + 17, 2, 1, f);
        assert_ne!(a, c);
    }
}
