//! Horizontal calculus on a Carnot group: fields acting on polynomials,
//! horizontal gradient and divergence, the sub-Laplacian.

use alloc::vec::Vec;

use crate::group::{CarnotGroup, GroupError};
use crate::ratpoly::{PolyError, Polynomial, Rational};

/// Components of a horizontal section with respect to `X_1, ..., X_{m_1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HorizontalSection {
    pub components: Vec<Polynomial>,
}

impl HorizontalSection {
    pub fn new(components: Vec<Polynomial>) -> Self {
        Self { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Harmonicity {
    Harmonic,
    /// The nonzero value of the sub-Laplacian.
    Residual(Polynomial),
}

impl Harmonicity {
    pub fn is_harmonic(&self) -> bool {
        matches!(self, Harmonicity::Harmonic)
    }
}

fn check_dim(g: &CarnotGroup, p: &Polynomial) -> Result<(), GroupError> {
    if p.nvars() != g.n() {
        return Err(PolyError::DimensionMismatch { expected: g.n(), found: p.nvars() }.into());
    }
    Ok(())
}

/// `X_j p` (0-based `j`).
pub fn apply_field(g: &CarnotGroup, j: usize, p: &Polynomial) -> Result<Polynomial, GroupError> {
    check_dim(g, p)?;
    let field = g.fields.get(j).ok_or(GroupError::IndexOutOfRange { index: j, m1: g.m1() })?;
    let mut out = p.partial_derivative(field.base)?;
    for (&k, c) in &field.coeffs {
        let d = p.partial_derivative(k)?;
        if !d.is_zero() {
            out = &out + &(c * &d);
        }
    }
    Ok(out)
}

pub fn horizontal_gradient(g: &CarnotGroup, p: &Polynomial) -> Result<HorizontalSection, GroupError> {
    check_dim(g, p)?;
    let components = (0..g.m1()).map(|j| apply_field(g, j, p)).collect::<Result<_, _>>()?;
    Ok(HorizontalSection::new(components))
}

pub fn horizontal_divergence(g: &CarnotGroup, phi: &HorizontalSection) -> Result<Polynomial, GroupError> {
    if phi.len() != g.m1() {
        return Err(PolyError::DimensionMismatch { expected: g.m1(), found: phi.len() }.into());
    }
    let mut out = Polynomial::zero(g.n());
    for (j, c) in phi.components.iter().enumerate() {
        out = &out + &apply_field(g, j, c)?;
    }
    Ok(out)
}

/// `sum_j X_j (X_j p)`.
pub fn sublaplacian(g: &CarnotGroup, p: &Polynomial) -> Result<Polynomial, GroupError> {
    horizontal_divergence(g, &horizontal_gradient(g, p)?)
}

pub fn is_harmonic(g: &CarnotGroup, p: &Polynomial) -> Result<Harmonicity, GroupError> {
    let lap = sublaplacian(g, p)?;
    Ok(if lap.is_zero() { Harmonicity::Harmonic } else { Harmonicity::Residual(lap) })
}

pub fn horizontal_inner(a: &HorizontalSection, b: &HorizontalSection) -> Result<Polynomial, PolyError> {
    if a.len() != b.len() {
        return Err(PolyError::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    let nvars = a.components.first().map_or(0, Polynomial::nvars);
    let mut out = Polynomial::zero(nvars);
    for (x, y) in a.components.iter().zip(&b.components) {
        out = &out + &x.checked_mul(y)?;
    }
    Ok(out)
}

/// Checks `grad(p o delta_l) = l * (grad p) o delta_l` componentwise.
pub fn check_g1(g: &CarnotGroup, p: &Polynomial, lambda: &Rational) -> Result<bool, GroupError> {
    let w = &g.weights;
    let lhs = horizontal_gradient(g, &p.dilate(w, lambda)?)?;
    let rhs = horizontal_gradient(g, p)?;
    for (l, r) in lhs.components.iter().zip(&rhs.components) {
        if *l != r.dilate(w, lambda)?.scale(lambda) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_engel, make_euclidean, make_heisenberg, Presentation};
    use crate::ratpoly::{int, parse_poly, rat};
    use alloc::vec;

    fn p(g: &CarnotGroup, s: &str) -> Polynomial {
        parse_poly(s, &g.weights).unwrap()
    }

    const ENGEL_P3: &str = "-1/2*x1^2*x2 + 1/6*x2^3 + 1/2*x1*y";
    const ENGEL_U: &str = "x2 + 1/2*x1^2*x2 - 1/6*x2^3 - 1/2*x1*y";
    const ENGEL_P5: &str = "x1*y^2 - 2*y*x1^2*x2 + 2*t*x1*x2 + 1/2*x1^3*x2^2 + x1^2*x2^3";

    #[test]
    fn apply_field_examples() {
        let g = make_engel();
        assert_eq!(apply_field(&g, 1, &p(&g, "x1*y")).unwrap(), p(&g, "x1^2"));
        assert_eq!(apply_field(&g, 0, &p(&g, ENGEL_P3)).unwrap(), p(&g, "-x1*x2 + 1/2*y"));
        assert!(apply_field(&g, 1, &p(&g, "1")).unwrap().is_zero());
        assert!(matches!(apply_field(&g, 2, &p(&g, "x1")), Err(GroupError::IndexOutOfRange { .. })));
        assert!(matches!(
            apply_field(&g, 0, &Polynomial::var(3, 0)),
            Err(GroupError::Poly(PolyError::DimensionMismatch { .. }))
        ));
    }

    #[test]
    fn gradient_examples() {
        let g = make_engel();
        let grad = horizontal_gradient(&g, &p(&g, "x2")).unwrap();
        assert_eq!(grad.components, vec![p(&g, "0"), p(&g, "1")]);
        let grad = horizontal_gradient(&g, &p(&g, ENGEL_P3)).unwrap();
        assert_eq!(grad.components, vec![p(&g, "-x1*x2 + 1/2*y"), p(&g, "1/2*x2^2")]);
        let e = make_euclidean(3).unwrap();
        let grad = horizontal_gradient(&e, &p(&e, "x1^2 + x2^2")).unwrap();
        assert_eq!(grad.components, vec![p(&e, "2*x1"), p(&e, "2*x2"), p(&e, "0")]);
    }

    #[test]
    fn divergence_examples() {
        let g = make_engel();
        let phi = HorizontalSection::new(vec![p(&g, "x2"), p(&g, "-x1")]);
        assert!(horizontal_divergence(&g, &phi).unwrap().is_zero());
        let c = HorizontalSection::new(vec![p(&g, "3"), p(&g, "-1/2")]);
        assert!(horizontal_divergence(&g, &c).unwrap().is_zero());
        let short = HorizontalSection::new(vec![p(&g, "x2")]);
        assert!(horizontal_divergence(&g, &short).is_err());
    }

    #[test]
    fn sublaplacian_examples() {
        let g = make_engel();
        assert!(sublaplacian(&g, &p(&g, ENGEL_U)).unwrap().is_zero());
        assert!(!sublaplacian(&g, &p(&g, ENGEL_P5)).unwrap().is_zero());
        let e = make_euclidean(3).unwrap();
        assert!(sublaplacian(&e, &p(&e, "x1^3 - 3*x1*x2^2")).unwrap().is_zero());
    }

    #[test]
    fn harmonicity_examples() {
        let g = make_engel();
        assert_eq!(is_harmonic(&g, &p(&g, ENGEL_U)).unwrap(), Harmonicity::Harmonic);
        let e = make_euclidean(3).unwrap();
        assert_eq!(is_harmonic(&e, &p(&e, "x1^2")).unwrap(), Harmonicity::Residual(p(&e, "2")));
        let u5 = &p(&g, "x2") - &p(&g, ENGEL_P5);
        let res = is_harmonic(&g, &u5).unwrap();
        assert_eq!(
            res,
            Harmonicity::Residual(p(&g, "4*x2*y - x1^3 - 6*x1^2*x2 - 3*x1*x2^2 - 2*x2^3")),
        );
    }

    #[test]
    fn inner_product_examples() {
        let g = make_engel();
        let a = horizontal_gradient(&g, &p(&g, "x2")).unwrap();
        let b = horizontal_gradient(&g, &p(&g, ENGEL_P3)).unwrap();
        assert_eq!(horizontal_inner(&a, &b).unwrap(), p(&g, "1/2*x2^2"));
        let s = HorizontalSection::new(vec![p(&g, "x2"), p(&g, "-x1")]);
        assert_eq!(horizontal_inner(&s, &s).unwrap(), p(&g, "x1^2 + x2^2"));
        let z = HorizontalSection::new(vec![p(&g, "0"), p(&g, "0")]);
        assert!(horizontal_inner(&s, &z).unwrap().is_zero());
    }

    #[test]
    fn engel_p5_inner_product() {
        let g = make_engel();
        let a = horizontal_gradient(&g, &p(&g, "x2")).unwrap();
        let b = horizontal_gradient(&g, &p(&g, ENGEL_P5)).unwrap();
        assert_eq!(horizontal_inner(&a, &b).unwrap(), p(&g, "2*x1*t + 3*x1^2*x2^2"));
    }

    #[test]
    fn g1_examples() {
        let g = make_engel();
        assert!(check_g1(&g, &p(&g, ENGEL_U), &int(2)).unwrap());
        assert!(check_g1(&g, &p(&g, ENGEL_P5), &int(1)).unwrap());
        let h = make_heisenberg(1, Presentation::Canonical).unwrap();
        assert!(check_g1(&h, &p(&h, "x1*y - x2^3 + 7"), &rat(-3, 5)).unwrap());
        assert!(matches!(check_g1(&h, &p(&h, "x1"), &int(0)), Err(GroupError::Poly(PolyError::ZeroLambda))));
    }
}
