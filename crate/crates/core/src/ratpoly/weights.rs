use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use super::PolyError;

/// Strata dimensions `(m_1, ..., m_s)` of a stratified algebra together with
/// the derived coordinate weights.
///
/// Coordinates are ordered layer by layer; coordinate `j` (0-based) has weight
/// `i` exactly when it belongs to the `i`-th layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StratifiedWeights {
    strata: Vec<usize>,
    weights: Vec<u32>,
}

impl StratifiedWeights {
    pub fn new(strata: &[usize]) -> Result<Self, PolyError> {
        if strata.is_empty() {
            return Err(PolyError::BadStrata("at least one layer is required".to_string()));
        }
        if let Some(pos) = strata.iter().position(|&m| m == 0) {
            return Err(PolyError::BadStrata(format!("layer {} has dimension 0", pos + 1)));
        }
        let weights = strata
            .iter()
            .enumerate()
            .flat_map(|(layer, &m)| core::iter::repeat_n((layer + 1) as u32, m))
            .collect();
        Ok(Self { strata: strata.to_vec(), weights })
    }

    /// Unit weights on `n` coordinates (the abelian, step-1 case).
    pub fn euclidean(n: usize) -> Result<Self, PolyError> {
        Self::new(&[n])
    }

    pub fn strata(&self) -> &[usize] {
        &self.strata
    }

    /// Total number of coordinates `n`.
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn step(&self) -> usize {
        self.strata.len()
    }

    /// Dimension of layer `layer` (1-based, as in `m_1`).
    pub fn layer_dim(&self, layer: usize) -> usize {
        self.strata.get(layer.wrapping_sub(1)).copied().unwrap_or(0)
    }

    /// Horizontal dimension `m_1`.
    pub fn m1(&self) -> usize {
        self.strata[0]
    }

    /// Offset `h_i = m_1 + ... + m_i`, with `h_0 = 0`.
    pub fn offset(&self, i: usize) -> usize {
        self.strata[..i.min(self.strata.len())].iter().sum()
    }

    /// 0-based coordinate range of layer `layer` (1-based).
    pub fn layer_range(&self, layer: usize) -> Range<usize> {
        self.offset(layer - 1)..self.offset(layer)
    }

    pub fn weight(&self, j: usize) -> u32 {
        self.weights[j]
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// Homogeneous dimension `Q = sum_i i * m_i`.
    pub fn homogeneous_dimension(&self) -> u32 {
        self.strata
            .iter()
            .enumerate()
            .map(|(i, &m)| (i as u32 + 1) * m as u32)
            .sum()
    }

    /// Weighted degree `d_1 b_1 + ... + d_n b_n` of an exponent vector.
    pub fn monomial_degree(&self, exps: &[u32]) -> u32 {
        exps.iter().zip(&self.weights).map(|(e, w)| e * w).sum()
    }
}

/// Bidirectional map between coordinate indices and their printed names.
///
/// Layer 1 uses `x1..`, layer 2 `y1..`, layer 3 `t1..`, deeper layers
/// `w{layer}_{k}`. A layer of dimension one in positions 2 or 3 is printed as
/// bare `y` / `t`; the indexed spelling `y1` / `t1` is still accepted on input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarNames {
    names: Vec<String>,
    aliases: Vec<(String, usize)>,
}

impl VarNames {
    pub fn for_weights(w: &StratifiedWeights) -> Self {
        let mut names = Vec::with_capacity(w.n());
        let mut aliases = Vec::new();
        for (layer0, &m) in w.strata().iter().enumerate() {
            let layer = layer0 + 1;
            for k in 1..=m {
                let idx = names.len();
                let indexed = match layer {
                    1 => format!("x{k}"),
                    2 => format!("y{k}"),
                    3 => format!("t{k}"),
                    _ => format!("w{layer}_{k}"),
                };
                let primary = match layer {
                    2 if m == 1 => "y".to_string(),
                    3 if m == 1 => "t".to_string(),
                    _ => indexed.clone(),
                };
                if primary != indexed {
                    aliases.push((indexed, idx));
                }
                names.push(primary);
            }
        }
        Self { names, aliases }
    }

    /// Names for `count` copies of the coordinates, used for group laws.
    /// Copy `c` gets `c` trailing apostrophes (`x1`, `x1'`, `x1''`, ...).
    pub fn primed_copies(&self, count: usize) -> Self {
        let n = self.names.len();
        let mut names = Vec::with_capacity(n * count);
        let mut aliases = Vec::new();
        for c in 0..count {
            let suffix = "'".repeat(c);
            for name in &self.names {
                names.push(format!("{name}{suffix}"));
            }
            for (alias, idx) in &self.aliases {
                aliases.push((format!("{alias}{suffix}"), idx + c * n));
            }
        }
        Self { names, aliases }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .or_else(|| self.aliases.iter().find(|(a, _)| a == name).map(|(_, i)| *i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engel_weights() {
        let w = StratifiedWeights::new(&[2, 1, 1]).unwrap();
        assert_eq!(w.weights(), &[1, 1, 2, 3]);
        assert_eq!(w.homogeneous_dimension(), 7);
        assert_eq!(w.step(), 3);
        assert_eq!(w.layer_range(2), 2..3);
        assert_eq!(w.offset(0), 0);
        assert_eq!(w.offset(3), 4);
    }

    #[test]
    fn weights_are_nondecreasing_and_q_matches() {
        let w = StratifiedWeights::new(&[3, 2, 4, 1]).unwrap();
        assert!(w.weights().windows(2).all(|p| p[0] <= p[1]));
        assert_eq!(w.homogeneous_dimension(), 3 + 4 + 12 + 4);
        assert_eq!(w.weights().iter().sum::<u32>(), w.homogeneous_dimension());
    }

    #[test]
    fn rejects_empty_layers() {
        assert!(StratifiedWeights::new(&[]).is_err());
        assert!(StratifiedWeights::new(&[2, 0]).is_err());
    }

    #[test]
    fn names_by_layer() {
        let w = StratifiedWeights::new(&[2, 1, 1]).unwrap();
        let names = VarNames::for_weights(&w);
        assert_eq!(names.name(2), "y");
        assert_eq!(names.name(3), "t");
        assert_eq!(names.index_of("y1"), Some(2));
        assert_eq!(names.index_of("t"), Some(3));

        let w = StratifiedWeights::new(&[2, 2, 1, 2]).unwrap();
        let names = VarNames::for_weights(&w);
        assert_eq!(names.name(3), "y2");
        assert_eq!(names.name(6), "w4_2");
        assert_eq!(names.index_of("y"), None);

        let primed = VarNames::for_weights(&StratifiedWeights::new(&[2, 1]).unwrap()).primed_copies(2);
        assert_eq!(primed.index_of("y'"), Some(5));
        assert_eq!(primed.index_of("y1'"), Some(5));
        assert_eq!(primed.name(3), "x1'");
    }
}
