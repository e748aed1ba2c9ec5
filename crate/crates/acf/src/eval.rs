//! Floating-point evaluation of exact polynomials.

use carnot_core::{Polynomial, Rational};
use num_traits::ToPrimitive;

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A polynomial flattened to `(coefficient, [(variable, exponent)])` terms.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    nvars: usize,
    max_exp: u32,
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let mut max_exp = 0;
        let terms = p
            .terms()
            .map(|(m, c)| {
                let factors: Vec<(usize, u32)> = m
                    .exps()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(k, &e)| (k, e))
                    .collect();
                max_exp = factors.iter().map(|f| f.1).fold(max_exp, u32::max);
                (rational_to_f64(c), factors)
            })
            .collect();
        Self { nvars: p.nvars(), max_exp, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, factors) in &self.terms {
            let mut t = *c;
            for &(k, e) in factors {
                t *= x[k].powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    /// Upper bound of `|p|` on the box `|x_k| <= half[k]`.
    pub fn abs_bound(&self, half: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, factors)| factors.iter().fold(c.abs(), |t, &(k, e)| t * half[k].powi(e as i32)))
            .sum()
    }

    pub fn max_exponent(&self) -> u32 {
        self.max_exp
    }
}
