//! Construction of `u = P1 - P3` with `Delta_G u = 0` and
//! `<grad P1, grad P3> = p x_i^2 + q x_s^2`, plus intrinsic-odd utilities.
//!
//! The linear system for the cubic coefficients is assembled from the
//! symbolic sub-Laplacian and inner product of each basis polynomial, and the
//! result is re-verified exactly before it is returned.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::group::{extract_alpha, group_inverse_apply, CarnotGroup, GroupError, Step2Alpha};
use crate::hcalc::{horizontal_gradient, horizontal_inner, sublaplacian};
use crate::linalg::{self, LinalgError, Matrix};
use crate::ratpoly::{parse_poly, Polynomial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("b must be nonzero")]
    ZeroB,
    #[error("the horizontal fields commute to second order; no admissible pair")]
    NoNoncommutingPair,
    #[error("the linear system is singular")]
    SingularSystem,
    #[error("certificate failed: laplacian {laplacian}, inner-product defect {inner_defect}")]
    CertificateFailure { laplacian: String, inner_defect: String, residual: CertificateReport },
    #[error(transparent)]
    Group(#[from] GroupError),
}

impl From<crate::ratpoly::PolyError> for ConstructError {
    fn from(e: crate::ratpoly::PolyError) -> Self {
        ConstructError::Group(e.into())
    }
}

impl From<LinalgError> for ConstructError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular => ConstructError::SingularSystem,
            other => ConstructError::InvalidParams(format!("{other}")),
        }
    }
}

/// Indices (0-based) of the chosen noncommuting pair `X_i, X_s` and the
/// second-layer coordinate `y_j` on which they fail to commute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairChoice {
    pub i: usize,
    pub s: usize,
    pub j: usize,
    /// `alpha[s][i][j] - alpha[i][s][j]`, nonzero.
    pub alpha_gap: Rational,
}

/// `P3 = sum_k c_k basis[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearTemplate {
    pub basis: [Polynomial; 5],
}

impl LinearTemplate {
    pub fn instantiate(&self, c: &[Rational]) -> Polynomial {
        let mut out = Polynomial::zero(self.basis[0].nvars());
        for (b, ck) in self.basis.iter().zip(c) {
            out = &out + &b.scale(ck);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateReport {
    pub harmonic: bool,
    pub laplacian: Polynomial,
    pub inner_product: Polynomial,
    pub inner_matches_pq: bool,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.harmonic && self.inner_matches_pq
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterexampleResult {
    pub b: Rational,
    pub p: Rational,
    pub q: Rational,
    pub pair: PairChoice,
    pub coefficients: Vec<Rational>,
    pub p1: Polynomial,
    pub p3: Polynomial,
    pub u: Polynomial,
    pub system_matrix: Matrix,
    pub rhs: Vec<Rational>,
    pub certificate: CertificateReport,
}

/// First `(i, s, j)` in lexicographic order with `s != i` and
/// `alpha[s][i][j] != alpha[i][s][j]`.
pub fn select_pair(g: &CarnotGroup) -> Result<PairChoice, ConstructError> {
    let alpha = extract_alpha(g)?;
    select_pair_alpha(&alpha)
}

pub fn select_pair_alpha(alpha: &Step2Alpha) -> Result<PairChoice, ConstructError> {
    for i in 0..alpha.m1 {
        for s in 0..alpha.m1 {
            if s == i {
                continue;
            }
            for j in 0..alpha.m2 {
                let gap = alpha.get(s, i, j) - alpha.get(i, s, j);
                if !gap.is_zero() {
                    return Ok(PairChoice { i, s, j, alpha_gap: gap });
                }
            }
        }
    }
    Err(ConstructError::NoNoncommutingPair)
}

/// `P1 = b x_s` and the cubic template
/// `c1 x_i^3 + c2 x_i^2 x_s + c3 x_i x_s^2 + c4 x_s^3 + c5 B5`, where
/// `B5 = x_i y_j - sum_{l != i,s} (alpha[i][l][j] x_i^2 x_l + alpha[s][l][j] x_i x_s x_l)`.
pub fn build_ansatz(
    g: &CarnotGroup,
    pair: &PairChoice,
    b: &Rational,
) -> Result<(Polynomial, LinearTemplate), ConstructError> {
    if b.is_zero() {
        return Err(ConstructError::ZeroB);
    }
    let alpha = extract_alpha(g)?;
    let n = g.n();
    let (i, s, j) = (pair.i, pair.s, pair.j);
    let x = |k| Polynomial::var(n, k);
    let xi = x(i);
    let xs = x(s);
    let yj = x(g.m1() + j);
    let p1 = xs.scale(b);
    let mut b5 = &xi * &yj;
    for l in (0..g.m1()).filter(|&l| l != i && l != s) {
        let xl = x(l);
        let a = (&(&xi * &xi) * &xl).scale(alpha.get(i, l, j));
        let c = (&(&xi * &xs) * &xl).scale(alpha.get(s, l, j));
        b5 = &(&b5 - &a) - &c;
    }
    let basis = [
        &(&xi * &xi) * &xi,
        &(&xi * &xi) * &xs,
        &(&xi * &xs) * &xs,
        &(&xs * &xs) * &xs,
        b5,
    ];
    Ok((p1, LinearTemplate { basis }))
}

fn mono(n: usize, pairs: &[(usize, u32)]) -> Vec<u32> {
    let mut e = vec![0; n];
    for &(k, d) in pairs {
        e[k] += d;
    }
    e
}

/// Rows: coefficients of `x_i`, `x_s` in `Delta_G P3`, then of `x_i x_s`,
/// `x_i^2`, `x_s^2` in `<grad P1, grad P3>`; right-hand side `(0,0,0,p,q)`.
pub fn assemble_system(
    g: &CarnotGroup,
    pair: &PairChoice,
    p1: &Polynomial,
    template: &LinearTemplate,
    p: &Rational,
    q: &Rational,
) -> Result<(Matrix, Vec<Rational>), ConstructError> {
    let n = g.n();
    let (i, s) = (pair.i, pair.s);
    let grad1 = horizontal_gradient(g, p1)?;
    let monos = [
        mono(n, &[(i, 1)]),
        mono(n, &[(s, 1)]),
        mono(n, &[(i, 1), (s, 1)]),
        mono(n, &[(i, 2)]),
        mono(n, &[(s, 2)]),
    ];
    let mut a: Matrix = vec![vec![Rational::zero(); 5]; 5];
    for (k, basis) in template.basis.iter().enumerate() {
        let lap = sublaplacian(g, basis)?;
        let inner = horizontal_inner(&grad1, &horizontal_gradient(g, basis)?)?;
        for row in 0..5 {
            let src = if row < 2 { &lap } else { &inner };
            a[row][k] = src.coeff(&monos[row]);
        }
    }
    let v = vec![Rational::zero(), Rational::zero(), Rational::zero(), p.clone(), q.clone()];
    Ok((a, v))
}

pub fn solve_exact(a: &Matrix, v: &[Rational]) -> Result<Vec<Rational>, ConstructError> {
    Ok(linalg::solve(a, v)?)
}

fn check_params(b: &Rational, p: &Rational, q: &Rational) -> Result<(), ConstructError> {
    if b.is_zero() {
        return Err(ConstructError::InvalidParams("b must be nonzero".into()));
    }
    if p.is_negative() || q.is_negative() {
        return Err(ConstructError::InvalidParams("p and q must be nonnegative".into()));
    }
    if p.is_zero() && q.is_zero() {
        return Err(ConstructError::InvalidParams("(p, q) must not be (0, 0)".into()));
    }
    Ok(())
}

/// Verifies `Delta_G u = 0` and `<grad P1, grad P3> = p x_i^2 + q x_s^2`.
pub fn certify(
    g: &CarnotGroup,
    pair: &PairChoice,
    p1: &Polynomial,
    p3: &Polynomial,
    p: &Rational,
    q: &Rational,
) -> Result<CertificateReport, ConstructError> {
    let n = g.n();
    let u = p1 - p3;
    let laplacian = sublaplacian(g, &u)?;
    let inner_product = horizontal_inner(&horizontal_gradient(g, p1)?, &horizontal_gradient(g, p3)?)?;
    let target = &Polynomial::monomial(mono(n, &[(pair.i, 2)]), p.clone())
        + &Polynomial::monomial(mono(n, &[(pair.s, 2)]), q.clone());
    Ok(CertificateReport {
        harmonic: laplacian.is_zero(),
        laplacian,
        inner_matches_pq: inner_product == target,
        inner_product,
    })
}

/// Full pipeline: pair, ansatz, exact solve, exact certificate. Returns an
/// error rather than an unverified result.
pub fn construct(
    g: &CarnotGroup,
    b: &Rational,
    p: &Rational,
    q: &Rational,
) -> Result<CounterexampleResult, ConstructError> {
    check_params(b, p, q)?;
    let pair = select_pair(g)?;
    let (p1, template) = build_ansatz(g, &pair, b)?;
    let (a, v) = assemble_system(g, &pair, &p1, &template, p, q)?;
    let c = solve_exact(&a, &v)?;
    let p3 = template.instantiate(&c);
    let certificate = certify(g, &pair, &p1, &p3, p, q)?;
    if !certificate.passed() {
        let n = g.n();
        let target = &Polynomial::monomial(mono(n, &[(pair.i, 2)]), p.clone())
            + &Polynomial::monomial(mono(n, &[(pair.s, 2)]), q.clone());
        let defect = &certificate.inner_product - &target;
        return Err(ConstructError::CertificateFailure {
            laplacian: crate::ratpoly::print_poly(&certificate.laplacian, &g.weights),
            inner_defect: crate::ratpoly::print_poly(&defect, &g.weights),
            residual: certificate,
        });
    }
    Ok(CounterexampleResult {
        b: b.clone(),
        p: p.clone(),
        q: q.clone(),
        pair,
        coefficients: c,
        u: &p1 - &p3,
        p1,
        p3,
        system_matrix: a,
        rhs: v,
        certificate,
    })
}

/// Determinant of the assembled system for the group's selected pair.
pub fn system_determinant(g: &CarnotGroup, b: &Rational) -> Result<(PairChoice, Rational), ConstructError> {
    let pair = select_pair(g)?;
    let det = pair_determinant(g, &pair, b)?;
    Ok((pair, det))
}

/// Determinant of the system assembled for an explicit pair, which may be
/// degenerate (`alpha_gap = 0`).
pub fn pair_determinant(g: &CarnotGroup, pair: &PairChoice, b: &Rational) -> Result<Rational, ConstructError> {
    let (p1, template) = build_ansatz(g, pair, b)?;
    let zero = Rational::zero();
    let (a, _) = assemble_system(g, pair, &p1, &template, &zero, &zero)?;
    Ok(linalg::determinant(&a)?)
}

/// The printed closed-form coefficients, with `alpha_k^l` the coefficient of
/// `x_k` in `X_l` (`1 -> i`, `2 -> s`). Only meaningful as a cross-check.
pub fn closed_form_coefficients(
    alpha: &Step2Alpha,
    pair: &PairChoice,
    b: &Rational,
    p: &Rational,
    q: &Rational,
) -> Result<Vec<Rational>, ConstructError> {
    let [a11, a21, a12, a22] = alpha.pair_block(pair.i, pair.s, pair.j);
    let d = &a21 - &a12;
    if d.is_zero() {
        return Err(ConstructError::SingularSystem);
    }
    if b.is_zero() {
        return Err(ConstructError::ZeroB);
    }
    let two = Rational::from_integer(2.into());
    let three = Rational::from_integer(3.into());
    let pq = p + q;
    Ok(vec![
        &a11 * &pq / (&two * b * &d),
        (&a12 * q + &a21 * p) / (b * &d),
        &a22 * &pq / (&two * b * &d),
        q / (&three * b),
        &pq / (b * -&d),
    ])
}

/// `p(P^{-1}) = -p(P)` as a polynomial identity.
pub fn intrinsic_odd_check(g: &CarnotGroup, p: &Polynomial) -> Result<bool, ConstructError> {
    Ok(group_inverse_apply(g, p)? == -p)
}

/// `x_i -> -x_i` on the first layer, other coordinates fixed.
pub fn s_reflect(g: &CarnotGroup, p: &Polynomial) -> Result<Polynomial, ConstructError> {
    let n = g.n();
    let images: Vec<Polynomial> = (0..n)
        .map(|k| {
            let v = Polynomial::var(n, k);
            if k < g.m1() {
                -v
            } else {
                v
            }
        })
        .collect();
    Ok(p.substitute(&images)?)
}

/// The degree-5 intrinsic-odd Engel polynomial
/// `x1 y^2 - 2 y x1^2 x2 + 2 t x1 x2 + x1^3 x2^2 / 2 + x1^2 x2^3`.
pub fn engel_p5(g: &CarnotGroup) -> Result<Polynomial, ConstructError> {
    Ok(parse_poly("x1*y^2 - 2*y*x1^2*x2 + 2*t*x1*x2 + 1/2*x1^3*x2^2 + x1^2*x2^3", &g.weights)?)
}
