use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{rat_pow, PolyError, Rational, StratifiedWeights};

/// Exponent vector `beta` of a monomial `x^beta`.
///
/// Ordered graded-lexicographically: first by total degree `|beta|`, then with
/// larger powers of earlier variables first (`x1^3 < x1^2*x2 < x2^3`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        Monomial(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Sparse polynomial in `nvars` variables with exact rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is equality of
/// polynomials.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    /// The coordinate function `x_j` (0-based `j`).
    pub fn var(nvars: usize, j: usize) -> Self {
        assert!(j < nvars, "variable {j} out of range for {nvars} variables");
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, j), Rational::one());
        p
    }

    /// `coeff * x^exps`.
    pub fn monomial(exps: Vec<u32>, coeff: Rational) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(Monomial(exps), coeff);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// repeated exponents.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Self::zero(nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(PolyError::DimensionMismatch { expected: nvars, found: exps.len() });
            }
            p.add_term(Monomial(exps), c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_constant)
    }

    /// Number of stored (nonzero) terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (graded-lex) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Coefficient of `x^exps` (zero when absent).
    pub fn coeff(&self, exps: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Constant term.
    pub fn constant_term(&self) -> Rational {
        self.coeff(&vec![0; self.nvars])
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_same(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.nvars == other.nvars {
            Ok(())
        } else {
            Err(PolyError::DimensionMismatch { expected: self.nvars, found: other.nvars })
        }
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_same(other)?;
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    /// `a (op) b` with a dimension check.
    pub fn arith(a: &Polynomial, b: &Polynomial, op: ArithOp) -> Result<Polynomial, PolyError> {
        match op {
            ArithOp::Add => a.checked_add(b),
            ArithOp::Sub => a.checked_sub(b),
            ArithOp::Mul => a.checked_mul(b),
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.nvars);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Exact value at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, found: point.len() });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exps()) {
                if e > 0 {
                    t *= rat_pow(x, e);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// `d/dx_j` (0-based `j`).
    pub fn partial_derivative(&self, j: usize) -> Result<Polynomial, PolyError> {
        if j >= self.nvars {
            return Err(PolyError::IndexOutOfRange { index: j, nvars: self.nvars });
        }
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exps()[j];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps().to_vec();
            exps[j] -= 1;
            out.add_term(Monomial(exps), c * Rational::from_integer(e.into()));
        }
        Ok(out)
    }

    /// Composition `p(images[0], ..., images[n-1])`.
    pub fn substitute(&self, images: &[Polynomial]) -> Result<Polynomial, PolyError> {
        if images.len() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, found: images.len() });
        }
        let target = images.first().map_or(0, Polynomial::nvars);
        if let Some(bad) = images.iter().find(|q| q.nvars != target) {
            return Err(PolyError::DimensionMismatch { expected: target, found: bad.nvars });
        }
        // powers[j][e] = images[j]^e, built lazily up to the largest exponent used
        let mut max_exp = vec![0u32; self.nvars];
        for m in self.terms.keys() {
            for (mx, &e) in max_exp.iter_mut().zip(m.exps()) {
                *mx = (*mx).max(e);
            }
        }
        let powers: Vec<Vec<Polynomial>> = images
            .iter()
            .zip(&max_exp)
            .map(|(img, &mx)| {
                let mut v = Vec::with_capacity(mx as usize + 1);
                v.push(Polynomial::one(target));
                for e in 1..=mx as usize {
                    let next = &v[e - 1] * img;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (j, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t = &t * &powers[j][e as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Weighted degree: the maximum of `|beta|_G` over stored terms.
    pub fn g_degree(&self, w: &StratifiedWeights) -> Result<u32, PolyError> {
        self.check_weights(w)?;
        self.terms
            .keys()
            .map(|m| w.monomial_degree(m.exps()))
            .max()
            .ok_or(PolyError::ZeroPolynomial)
    }

    /// True iff every term has weighted degree `m`. The zero polynomial is
    /// homogeneous of every degree.
    pub fn is_g_homogeneous(&self, w: &StratifiedWeights, m: u32) -> bool {
        w.n() == self.nvars && self.terms.keys().all(|t| w.monomial_degree(t.exps()) == m)
    }

    /// `p o delta_lambda`: each term scaled by `lambda^{|beta|_G}`.
    pub fn dilate(&self, w: &StratifiedWeights, lambda: &Rational) -> Result<Polynomial, PolyError> {
        self.check_weights(w)?;
        if lambda.is_zero() {
            return Err(PolyError::ZeroLambda);
        }
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * rat_pow(lambda, w.monomial_degree(m.exps())));
        }
        Ok(out)
    }

    /// Splits into weighted-homogeneous components keyed by degree.
    pub fn homogeneous_components(
        &self,
        w: &StratifiedWeights,
    ) -> Result<BTreeMap<u32, Polynomial>, PolyError> {
        self.check_weights(w)?;
        let mut out: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(w.monomial_degree(m.exps()))
                .or_insert_with(|| Polynomial::zero(self.nvars))
                .add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    /// Re-embeds into `nvars` variables, placing variable `j` at `offset + j`.
    pub fn embed(&self, nvars: usize, offset: usize) -> Polynomial {
        assert!(offset + self.nvars <= nvars);
        let mut out = Polynomial::zero(nvars);
        for (m, c) in &self.terms {
            let mut exps = vec![0; nvars];
            exps[offset..offset + self.nvars].copy_from_slice(m.exps());
            out.add_term(Monomial(exps), c.clone());
        }
        out
    }

    /// True when no stored term involves variable `j`.
    pub fn is_free_of(&self, j: usize) -> bool {
        self.terms.keys().all(|m| m.exps()[j] == 0)
    }

    fn check_weights(&self, w: &StratifiedWeights) -> Result<(), PolyError> {
        if w.n() == self.nvars {
            Ok(())
        } else {
            Err(PolyError::DimensionMismatch { expected: w.n(), found: self.nvars })
        }
    }
}

// Operator impls panic on a variable-count mismatch; use the `checked_*`
// methods on untrusted input.

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        self.checked_add(rhs).expect("polynomial variable counts differ")
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        self.checked_sub(rhs).expect("polynomial variable counts differ")
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        self.checked_mul(rhs).expect("polynomial variable counts differ")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratpoly::{int, rat};

    fn x(n: usize, j: usize) -> Polynomial {
        Polynomial::var(n, j)
    }

    #[test]
    fn difference_of_squares() {
        let (a, b) = (x(2, 0), x(2, 1));
        let lhs = Polynomial::arith(&(&a + &b), &(&a - &b), ArithOp::Mul).unwrap();
        let rhs = &(&a * &a) - &(&b * &b);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn add_zero_is_identity() {
        let p = &x(3, 0) * &x(3, 2);
        assert_eq!(p.checked_add(&Polynomial::zero(3)).unwrap(), p);
    }

    #[test]
    fn rational_coefficient_product() {
        let a = x(1, 0).scale(&rat(1, 2));
        let b = x(1, 0).scale(&rat(1, 3));
        assert_eq!(&a * &b, Polynomial::monomial(vec![2], rat(1, 6)));
    }

    #[test]
    fn mismatched_dimensions() {
        let err = x(2, 0).checked_mul(&x(3, 0)).unwrap_err();
        assert_eq!(err, PolyError::DimensionMismatch { expected: 2, found: 3 });
    }

    #[test]
    fn evaluation() {
        assert_eq!(x(3, 1).eval(&[int(0), int(1), int(0)]).unwrap(), int(1));
        let p = &(&x(3, 0) * &x(3, 0)) * &x(3, 1);
        assert_eq!(p.eval(&[int(2), int(3), int(0)]).unwrap(), int(12));
        assert_eq!(Polynomial::zero(3).eval(&[int(5), rat(1, 7), int(-2)]).unwrap(), int(0));
        assert!(p.eval(&[int(1)]).is_err());
    }

    #[test]
    fn derivatives() {
        let cube = Polynomial::monomial(vec![3, 0, 0], int(1));
        assert_eq!(cube.partial_derivative(0).unwrap(), Polynomial::monomial(vec![2, 0, 0], int(3)));
        let x1y = &x(3, 0) * &x(3, 2);
        assert!(x1y.partial_derivative(1).unwrap().is_zero());
        assert_eq!(x1y.partial_derivative(2).unwrap(), x(3, 0));
        assert_eq!(
            x1y.partial_derivative(3).unwrap_err(),
            PolyError::IndexOutOfRange { index: 3, nvars: 3 }
        );
    }

    #[test]
    fn substitution() {
        let n = 3;
        let x1x2 = &x(n, 0) * &x(n, 1);
        let flip = [-x(n, 0), -x(n, 1), x(n, 2)];
        assert_eq!(x1x2.substitute(&flip).unwrap(), x1x2);

        let shear = [x(n, 0), x(n, 1), &x(n, 2) - &(&x(n, 0) * &x(n, 1)).scale(&rat(1, 2))];
        assert_eq!(x(n, 1).substitute(&shear).unwrap(), x(n, 1));
        assert!(x(n, 1).substitute(&shear[..2]).is_err());
    }

    #[test]
    fn weighted_degree_and_dilation() {
        let w = StratifiedWeights::new(&[2, 1, 1]).unwrap();
        let x1y = &x(4, 0) * &x(4, 2);
        assert_eq!(x1y.g_degree(&w).unwrap(), 3);
        assert_eq!(x(4, 3).g_degree(&w).unwrap(), 3);
        assert_eq!(Polynomial::monomial(vec![0, 3, 0, 0], int(1)).g_degree(&w).unwrap(), 3);
        assert_eq!(Polynomial::zero(4).g_degree(&w), Err(PolyError::ZeroPolynomial));

        assert!(x1y.is_g_homogeneous(&w, 3));
        let mixed = &x(4, 0) + &x(4, 0).pow(3);
        assert!(!mixed.is_g_homogeneous(&w, 1));
        assert!(Polynomial::zero(4).is_g_homogeneous(&w, 5));

        let lambda = rat(-3, 2);
        assert_eq!(x1y.dilate(&w, &lambda).unwrap(), x1y.scale(&rat_pow(&lambda, 3)));
        assert_eq!(x1y.dilate(&w, &int(1)).unwrap(), x1y);
        let cube = Polynomial::monomial(vec![0, 3, 0, 0], int(1));
        assert_eq!(cube.dilate(&w, &int(2)).unwrap(), cube.scale(&int(8)));
        assert_eq!(cube.dilate(&w, &int(0)), Err(PolyError::ZeroLambda));
    }

    #[test]
    fn graded_lex_order() {
        let mut ms = vec![
            Monomial::new(vec![0, 3]),
            Monomial::new(vec![1, 0]),
            Monomial::new(vec![2, 1]),
            Monomial::new(vec![3, 0]),
            Monomial::new(vec![0, 0]),
        ];
        ms.sort();
        let exps: Vec<&[u32]> = ms.iter().map(|m| m.exps()).collect();
        assert_eq!(exps, vec![&[0, 0][..], &[1, 0], &[3, 0], &[2, 1], &[0, 3]]);
    }

    #[test]
    fn components_split_by_weight() {
        let w = StratifiedWeights::new(&[2, 1]).unwrap();
        let p = &(&x(3, 1) + &x(3, 2)) + &(&x(3, 0) * &x(3, 1));
        let parts = p.homogeneous_components(&w).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[&1], x(3, 1));
        assert_eq!(parts[&2], &x(3, 2) + &(&x(3, 0) * &x(3, 1)));
    }
}
