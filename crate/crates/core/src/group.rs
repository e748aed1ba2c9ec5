//! Carnot groups presented by their horizontal vector fields.
//!
//! A group is a stratification plus `m_1` fields of the form
//! `X_j = d/dx_j + sum_{k: d_k > 1} p_{j,k}(x) d/dx_k`, where each `p_{j,k}` is
//! weighted-homogeneous of degree `d_k - 1`. A polynomial group law and
//! inverse are optional; counterexample construction only needs the fields.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::linalg::{self, Matrix};
use crate::ratpoly::{int, rat, rat_pow, PolyError, Polynomial, Rational, StratifiedWeights};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("bad dimension {0}: the Euclidean preset needs n >= 3")]
    BadDimension(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("matrix B({0}) is not skew-symmetric")]
    NotSkew(usize),
    #[error("the skew matrices are linearly dependent")]
    DependentMatrices,
    #[error("the group has no group law")]
    NoGroupLaw,
    #[error("malformed coefficients: {0}")]
    MalformedCoefficients(String),
    #[error("field index {index} out of range (m1 = {m1})")]
    IndexOutOfRange { index: usize, m1: usize },
    #[error("invalid group structure: {0}")]
    Structure(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A first-order differential operator `sum_k c_k(x) d/dx_k` with polynomial
/// coefficients. Zero coefficients are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    nvars: usize,
    coeffs: BTreeMap<usize, Polynomial>,
}

impl Derivation {
    pub fn new(nvars: usize, coeffs: BTreeMap<usize, Polynomial>) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        Self { nvars, coeffs }
    }

    pub fn zero(nvars: usize) -> Self {
        Self { nvars, coeffs: BTreeMap::new() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Coefficient of `d/dx_k`.
    pub fn coeff(&self, k: usize) -> Polynomial {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| Polynomial::zero(self.nvars))
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, Polynomial> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn apply(&self, p: &Polynomial) -> Result<Polynomial, PolyError> {
        if p.nvars() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, found: p.nvars() });
        }
        let mut out = Polynomial::zero(self.nvars);
        for (&k, c) in &self.coeffs {
            let d = p.partial_derivative(k)?;
            if !d.is_zero() {
                out = &out + &(c * &d);
            }
        }
        Ok(out)
    }

    /// Lie bracket `[self, other] = self o other - other o self`.
    pub fn bracket(&self, other: &Derivation) -> Result<Derivation, PolyError> {
        let keys: alloc::collections::BTreeSet<usize> =
            self.coeffs.keys().chain(other.coeffs.keys()).copied().collect();
        let mut out = BTreeMap::new();
        for k in keys {
            let c = &self.apply(&other.coeff(k))? - &other.apply(&self.coeff(k))?;
            out.insert(k, c);
        }
        Ok(Derivation::new(self.nvars, out))
    }
}

/// Horizontal field `X_j = d/dx_j + sum_k p_{j,k} d/dx_k` (`base` is `j`,
/// 0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    pub base: usize,
    pub coeffs: BTreeMap<usize, Polynomial>,
}

impl VectorField {
    pub fn new(base: usize, coeffs: BTreeMap<usize, Polynomial>) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        Self { base, coeffs }
    }

    pub fn coordinate(base: usize) -> Self {
        Self { base, coeffs: BTreeMap::new() }
    }

    pub fn as_derivation(&self, nvars: usize) -> Derivation {
        let mut c = self.coeffs.clone();
        let unit = Polynomial::one(nvars);
        match c.get_mut(&self.base) {
            Some(p) => *p = &*p + &unit,
            None => {
                c.insert(self.base, unit);
            }
        }
        Derivation::new(nvars, c)
    }
}

/// Polynomial group law: `product[k]` is the `k`-th coordinate of `P o P'` in
/// `2n` variables (`P` first, then `P'`); `inverse[k]` that of `P^{-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupLaw {
    pub product: Vec<Polynomial>,
    pub inverse: Vec<Polynomial>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Presentation {
    /// `X_i = d_i - (x_{n+i}/2) d_y`, `X_{n+i} = d_{n+i} + (x_i/2) d_y`.
    Canonical,
    /// `X_1 = d_1`, `X_2 = d_2 + x_1 d_y` (first Heisenberg group only).
    Polarized,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarnotGroup {
    pub name: String,
    pub weights: StratifiedWeights,
    pub fields: Vec<VectorField>,
    pub law: Option<GroupLaw>,
    /// Skew matrices `B^(j)` of a canonical step-2 presentation.
    pub step2: Option<Vec<Matrix>>,
}

impl CarnotGroup {
    /// Assembles a group after structural checks (field count and order,
    /// coefficient targets, variable counts). Analytic invariants are reported
    /// by [`validate_group`] rather than enforced here.
    pub fn new(
        name: impl Into<String>,
        weights: StratifiedWeights,
        fields: Vec<VectorField>,
        law: Option<GroupLaw>,
        step2: Option<Vec<Matrix>>,
    ) -> Result<Self, GroupError> {
        let n = weights.n();
        let m1 = weights.m1();
        if fields.len() != m1 {
            return Err(GroupError::Structure(format!(
                "expected {m1} horizontal fields, got {}",
                fields.len()
            )));
        }
        for (j, f) in fields.iter().enumerate() {
            if f.base != j {
                return Err(GroupError::Structure(format!(
                    "field {} has base index {}, expected {}",
                    j + 1,
                    f.base + 1,
                    j + 1
                )));
            }
            for (&k, p) in &f.coeffs {
                if k >= n {
                    return Err(GroupError::Structure(format!(
                        "field {} has a coefficient on coordinate {} of {n}",
                        j + 1,
                        k + 1
                    )));
                }
                if weights.weight(k) < 2 {
                    return Err(GroupError::Structure(format!(
                        "field {} has a coefficient on horizontal coordinate {}",
                        j + 1,
                        k + 1
                    )));
                }
                if p.nvars() != n {
                    return Err(PolyError::DimensionMismatch { expected: n, found: p.nvars() }.into());
                }
            }
        }
        if let Some(law) = &law {
            if law.product.len() != n || law.inverse.len() != n {
                return Err(GroupError::Structure("group law must have one polynomial per coordinate".into()));
            }
            if let Some(p) = law.product.iter().find(|p| p.nvars() != 2 * n) {
                return Err(PolyError::DimensionMismatch { expected: 2 * n, found: p.nvars() }.into());
            }
            if let Some(p) = law.inverse.iter().find(|p| p.nvars() != n) {
                return Err(PolyError::DimensionMismatch { expected: n, found: p.nvars() }.into());
            }
        }
        if let Some(bs) = &step2 {
            if weights.step() != 2 || bs.len() != weights.layer_dim(2) {
                return Err(GroupError::Structure("step-2 data needs strata (m1, m2) and m2 matrices".into()));
            }
            if bs.iter().any(|b| b.len() != m1 || b.iter().any(|r| r.len() != m1)) {
                return Err(GroupError::Structure("step-2 matrices must be m1 x m1".into()));
            }
        }
        Ok(Self { name: name.into(), weights, fields, law, step2 })
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn m1(&self) -> usize {
        self.weights.m1()
    }

    /// `X_j` as a derivation (0-based `j`).
    pub fn field(&self, j: usize) -> Result<Derivation, GroupError> {
        self.fields
            .get(j)
            .map(|f| f.as_derivation(self.n()))
            .ok_or(GroupError::IndexOutOfRange { index: j, m1: self.m1() })
    }

    /// Same stratification and horizontal fields (names and laws ignored).
    pub fn same_fields(&self, other: &CarnotGroup) -> bool {
        self.weights == other.weights && self.fields == other.fields
    }

    /// Resolves `euclidean:<n>`, `heisenberg:<n>[:polarized]` and `engel`.
    pub fn preset(name: &str) -> Result<CarnotGroup, GroupError> {
        let parts: Vec<&str> = name.trim().split(':').collect();
        let parse_n = |s: &str| s.parse::<usize>().map_err(|_| GroupError::UnknownPreset(name.to_string()));
        match parts.as_slice() {
            ["engel"] => Ok(make_engel()),
            ["euclidean", n] => make_euclidean(parse_n(n)?),
            ["heisenberg", n] => make_heisenberg(parse_n(n)?, Presentation::Canonical),
            ["heisenberg", n, "canonical"] => make_heisenberg(parse_n(n)?, Presentation::Canonical),
            ["heisenberg", n, "polarized"] => make_heisenberg(parse_n(n)?, Presentation::Polarized),
            _ => Err(GroupError::UnknownPreset(name.to_string())),
        }
    }
}

/// `R^n` with the coordinate fields and the additive law.
pub fn make_euclidean(n: usize) -> Result<CarnotGroup, GroupError> {
    if n < 3 {
        return Err(GroupError::BadDimension(n));
    }
    let weights = StratifiedWeights::euclidean(n)?;
    let fields = (0..n).map(VectorField::coordinate).collect();
    let law = GroupLaw {
        product: (0..n)
            .map(|k| &Polynomial::var(2 * n, k) + &Polynomial::var(2 * n, n + k))
            .collect(),
        inverse: (0..n).map(|k| -Polynomial::var(n, k)).collect(),
    };
    CarnotGroup::new(format!("euclidean:{n}"), weights, fields, Some(law), None)
}

/// The Heisenberg group `H^n` with strata `(2n, 1)`.
pub fn make_heisenberg(n: usize, presentation: Presentation) -> Result<CarnotGroup, GroupError> {
    if n == 0 {
        return Err(GroupError::BadDimension(n));
    }
    match presentation {
        Presentation::Canonical => {
            let m1 = 2 * n;
            let mut b: Matrix = vec![vec![Rational::zero(); m1]; m1];
            for i in 0..n {
                b[i][n + i] = int(-1);
                b[n + i][i] = int(1);
            }
            let mut g = step2_unchecked(&[b])?;
            g.name = format!("heisenberg:{n}");
            Ok(g)
        }
        Presentation::Polarized => {
            if n != 1 {
                return Err(GroupError::Unsupported(
                    "the polarized presentation is only provided for the first Heisenberg group".into(),
                ));
            }
            let weights = StratifiedWeights::new(&[2, 1])?;
            let x = |k| Polynomial::var(3, k);
            let fields = vec![
                VectorField::coordinate(0),
                VectorField::new(1, BTreeMap::from([(2, x(0))])),
            ];
            let xx = |k| Polynomial::var(6, k);
            let law = GroupLaw {
                product: vec![
                    &xx(0) + &xx(3),
                    &xx(1) + &xx(4),
                    &(&xx(2) + &xx(5)) + &(&xx(0) * &xx(4)),
                ],
                inverse: vec![-x(0), -x(1), &(-x(2)) + &(&x(0) * &x(1))],
            };
            CarnotGroup::new("heisenberg:1:polarized", weights, fields, Some(law), None)
        }
    }
}

fn check_step2_data(bs: &[Matrix]) -> Result<usize, GroupError> {
    let m1 = bs.first().map(Vec::len).ok_or(GroupError::DependentMatrices)?;
    for (j, b) in bs.iter().enumerate() {
        if b.len() != m1 || b.iter().any(|r| r.len() != m1) {
            return Err(GroupError::Structure("step-2 matrices must all be m1 x m1".into()));
        }
        for i in 0..m1 {
            for k in 0..m1 {
                if b[i][k] != -b[k][i].clone() {
                    return Err(GroupError::NotSkew(j + 1));
                }
            }
        }
    }
    let flat: Matrix = bs.iter().map(|b| b.iter().flatten().cloned().collect()).collect();
    if linalg::rank(&flat) != bs.len() {
        return Err(GroupError::DependentMatrices);
    }
    Ok(m1)
}

fn step2_unchecked(bs: &[Matrix]) -> Result<CarnotGroup, GroupError> {
    let m1 = check_step2_data(bs)?;
    let m2 = bs.len();
    let n = m1 + m2;
    let weights = StratifiedWeights::new(&[m1, m2])?;
    let half = rat(1, 2);
    let fields = (0..m1)
        .map(|i| {
            let coeffs = (0..m2)
                .map(|j| {
                    let mut p = Polynomial::zero(n);
                    for k in 0..m1 {
                        p = &p + &Polynomial::var(n, k).scale(&(&bs[j][i][k] * &half));
                    }
                    (m1 + j, p)
                })
                .collect();
            VectorField::new(i, coeffs)
        })
        .collect();
    let xx = |k| Polynomial::var(2 * n, k);
    let mut product: Vec<Polynomial> = (0..n).map(|k| &xx(k) + &xx(n + k)).collect();
    for (j, b) in bs.iter().enumerate() {
        // + 1/2 <B x, x'> = 1/2 sum_{i,k} B_ik x_k x'_i
        for i in 0..m1 {
            for k in 0..m1 {
                if !b[i][k].is_zero() {
                    let t = (&xx(k) * &xx(n + i)).scale(&(&b[i][k] * &half));
                    product[m1 + j] = &product[m1 + j] + &t;
                }
            }
        }
    }
    let law = GroupLaw { product, inverse: (0..n).map(|k| -Polynomial::var(n, k)).collect() };
    CarnotGroup::new(format!("step2:{m1}x{m2}"), weights, fields, Some(law), Some(bs.to_vec()))
}

/// Canonical step-2 group from skew matrices `B^(1..m2)`:
/// `X_i = d_{x_i} + 1/2 sum_j (sum_k B^(j)_{ik} x_k) d_{y_j}`, with law
/// `(x, y) o (x', y') = (x + x', y_j + y'_j + 1/2 <B^(j) x, x'>)`.
pub fn make_step2(bs: &[Matrix]) -> Result<CarnotGroup, GroupError> {
    step2_unchecked(bs)
}

/// The Engel group: strata `(2, 1, 1)`, `X_1 = d_1`,
/// `X_2 = d_2 + x_1 d_y + x_1^2/2 d_t`.
pub fn make_engel() -> CarnotGroup {
    let weights = StratifiedWeights::new(&[2, 1, 1]).expect("static strata");
    let x = |k| Polynomial::var(4, k);
    let half = rat(1, 2);
    let fields = vec![
        VectorField::coordinate(0),
        VectorField::new(1, BTreeMap::from([(2, x(0)), (3, (&x(0) * &x(0)).scale(&half))])),
    ];
    let xx = |k| Polynomial::var(8, k);
    let product = vec![
        &xx(0) + &xx(4),
        &xx(1) + &xx(5),
        &(&xx(2) + &xx(6)) + &(&xx(0) * &xx(5)),
        &(&(&xx(3) + &xx(7)) + &(&xx(0) * &xx(6))) + &(&(&xx(0) * &xx(0)) * &xx(5)).scale(&half),
    ];
    let inverse = vec![
        -x(0),
        -x(1),
        &(-x(2)) + &(&x(0) * &x(1)),
        &(&(-x(3)) + &(&x(0) * &x(2))) - &(&(&x(0) * &x(0)) * &x(1)).scale(&rat(1, 2)),
    ];
    CarnotGroup::new("engel", weights, fields, Some(GroupLaw { product, inverse }), None)
        .expect("engel preset is well formed")
}

/// Step-2 group with `m1` horizontal and `m2` vertical coordinates whose fields
/// are read from an `alpha[i][k][j]` table (coefficient of `x_k d_{y_j}` in
/// `X_i`). No law is attached and no bracket-generating check is made.
pub fn from_alpha(alpha: &Step2Alpha) -> Result<CarnotGroup, GroupError> {
    let (m1, m2) = (alpha.m1, alpha.m2);
    let n = m1 + m2;
    let weights = StratifiedWeights::new(&[m1, m2])?;
    let fields = (0..m1)
        .map(|i| {
            let coeffs = (0..m2)
                .map(|j| {
                    let mut p = Polynomial::zero(n);
                    for k in 0..m1 {
                        p = &p + &Polynomial::var(n, k).scale(alpha.get(i, k, j));
                    }
                    (m1 + j, p)
                })
                .collect();
            VectorField::new(i, coeffs)
        })
        .collect();
    CarnotGroup::new(format!("alpha:{m1}x{m2}"), weights, fields, None, None)
}

/// Coefficient table of a step-2 presentation: `get(i, k, j)` is the
/// coefficient of `x_k d_{y_j}` in `X_i` (all 0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step2Alpha {
    pub m1: usize,
    pub m2: usize,
    table: Vec<Rational>,
}

impl Step2Alpha {
    pub fn zeros(m1: usize, m2: usize) -> Self {
        Self { m1, m2, table: vec![Rational::zero(); m1 * m1 * m2] }
    }

    pub fn get(&self, i: usize, k: usize, j: usize) -> &Rational {
        &self.table[(i * self.m1 + k) * self.m2 + j]
    }

    pub fn set(&mut self, i: usize, k: usize, j: usize, v: Rational) {
        let idx = (i * self.m1 + k) * self.m2 + j;
        self.table[idx] = v;
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// The four entries `(alpha_1^1, alpha_2^1, alpha_1^2, alpha_2^2)` for a
    /// chosen pair `(i, s)` and vertical index `j`, where `alpha_k^l` is the
    /// coefficient of `x_k` in `X_l`, with `1 -> i` and `2 -> s`.
    pub fn pair_block(&self, i: usize, s: usize, j: usize) -> [Rational; 4] {
        [
            self.get(i, i, j).clone(),
            self.get(i, s, j).clone(),
            self.get(s, i, j).clone(),
            self.get(s, s, j).clone(),
        ]
    }
}

/// Reads the `alpha` table off the second-layer coefficients of the fields.
/// Coefficients on deeper layers are ignored.
pub fn extract_alpha(g: &CarnotGroup) -> Result<Step2Alpha, GroupError> {
    let w = &g.weights;
    if w.step() < 2 {
        return Ok(Step2Alpha::zeros(g.m1(), 0));
    }
    let m1 = w.m1();
    let layer2 = w.layer_range(2);
    let mut alpha = Step2Alpha::zeros(m1, layer2.len());
    for (i, f) in g.fields.iter().enumerate() {
        for (&k, p) in &f.coeffs {
            if !layer2.contains(&k) {
                continue;
            }
            if !p.is_g_homogeneous(w, 1) {
                return Err(GroupError::MalformedCoefficients(format!(
                    "coefficient of X{} on coordinate {} is not linear in the horizontal variables",
                    i + 1,
                    k + 1
                )));
            }
            for kk in 0..m1 {
                let mut e = vec![0; g.n()];
                e[kk] = 1;
                alpha.set(i, kk, k - layer2.start, p.coeff(&e));
            }
        }
    }
    Ok(alpha)
}

/// `[X_i, X_l]` as a derivation (0-based indices).
pub fn commutator(g: &CarnotGroup, i: usize, l: usize) -> Result<Derivation, GroupError> {
    let xi = g.field(i)?;
    let xl = g.field(l)?;
    Ok(xi.bracket(&xl)?)
}

/// `p o inverse`, i.e. the function `P -> p(P^{-1})`.
pub fn group_inverse_apply(g: &CarnotGroup, p: &Polynomial) -> Result<Polynomial, GroupError> {
    let law = g.law.as_ref().ok_or(GroupError::NoGroupLaw)?;
    Ok(p.substitute(&law.inverse)?)
}

/// Polynomial change of coordinates with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateChange {
    pub forward: Vec<Polynomial>,
    pub backward: Vec<Polynomial>,
}

impl CoordinateChange {
    /// Expresses a function given in source coordinates in target
    /// coordinates: `f_target = f_source o backward`.
    pub fn transport(&self, p: &Polynomial) -> Result<Polynomial, PolyError> {
        p.substitute(&self.backward)
    }

    pub fn pull_back(&self, p: &Polynomial) -> Result<Polynomial, PolyError> {
        p.substitute(&self.forward)
    }
}

/// `phi(x1, x2, y) = (x1, x2, y - x1 x2 / 2)`, taking the polarized first
/// Heisenberg group to the canonical one.
pub fn polarized_to_canonical() -> CoordinateChange {
    let x = |k| Polynomial::var(3, k);
    let half_x1x2 = (&x(0) * &x(1)).scale(&rat(1, 2));
    CoordinateChange {
        forward: vec![x(0), x(1), &x(2) - &half_x1x2],
        backward: vec![x(0), x(1), &x(2) + &half_x1x2],
    }
}

/// Checks `phi(P o P') = phi(P) o phi(P')` as a polynomial identity.
pub fn is_homomorphism(
    phi: &CoordinateChange,
    src: &CarnotGroup,
    dst: &CarnotGroup,
) -> Result<bool, GroupError> {
    let src_law = src.law.as_ref().ok_or(GroupError::NoGroupLaw)?;
    let dst_law = dst.law.as_ref().ok_or(GroupError::NoGroupLaw)?;
    let n = src.n();
    let lhs: Vec<Polynomial> =
        phi.forward.iter().map(|f| f.substitute(&src_law.product)).collect::<Result<_, _>>()?;
    let left: Vec<Polynomial> = phi.forward.iter().map(|f| f.embed(2 * n, 0)).collect();
    let right: Vec<Polynomial> = phi.forward.iter().map(|f| f.embed(2 * n, n)).collect();
    let args: Vec<Polynomial> = left.into_iter().chain(right).collect();
    let rhs: Vec<Polynomial> =
        dst_law.product.iter().map(|f| f.substitute(&args)).collect::<Result<_, _>>()?;
    let roundtrip: Vec<Polynomial> =
        phi.forward.iter().map(|f| f.substitute(&phi.backward)).collect::<Result<_, _>>()?;
    let identity = (0..n).all(|k| roundtrip[k] == Polynomial::var(n, k));
    Ok(lhs == rhs && identity)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, failures: Vec<String>) {
        let passed = failures.is_empty();
        let detail = if passed { "ok".to_string() } else { failures.join("; ") };
        self.checks.push(Check { name, passed, detail });
    }
}

/// Dilation factor used for the exact law-homogeneity check.
fn probe_lambda() -> Rational {
    rat(3, 2)
}

/// Runs every structural and algebraic invariant that applies to `g`.
pub fn validate_group(g: &CarnotGroup) -> ValidationReport {
    let mut report = ValidationReport::default();
    let w = &g.weights;
    let n = g.n();

    let mut homog = Vec::new();
    let mut support = Vec::new();
    for (j, f) in g.fields.iter().enumerate() {
        for (&k, p) in &f.coeffs {
            let dk = w.weight(k);
            if !p.is_g_homogeneous(w, dk - 1) {
                homog.push(format!("p_{{{},{}}} is not homogeneous of degree {}", j + 1, k + 1, dk - 1));
            }
            if let Some(bad) = (0..n).find(|&v| w.weight(v) >= dk && !p.is_free_of(v)) {
                support.push(format!("p_{{{},{}}} involves coordinate {}", j + 1, k + 1, bad + 1));
            }
        }
    }
    report.push("coefficient homogeneity", homog);
    report.push("coefficient support", support);

    if let Some(bs) = &g.step2 {
        let mut skew = Vec::new();
        for (j, b) in bs.iter().enumerate() {
            let ok = (0..b.len()).all(|i| (0..b.len()).all(|k| b[i][k] == -b[k][i].clone()));
            if !ok {
                skew.push(format!("B({}) is not skew", j + 1));
            }
        }
        report.push("step2 skewness", skew);
        let flat: Matrix = bs.iter().map(|b| b.iter().flatten().cloned().collect()).collect();
        let indep = if linalg::rank(&flat) == bs.len() {
            Vec::new()
        } else {
            vec!["matrices are linearly dependent".to_string()]
        };
        report.push("step2 independence", indep);
        let mut table = Vec::new();
        match extract_alpha(g) {
            Ok(alpha) => {
                for i in 0..alpha.m1 {
                    for k in 0..alpha.m1 {
                        for j in 0..alpha.m2 {
                            if *alpha.get(i, k, j) != &bs[j][i][k] * rat(1, 2) {
                                table.push(format!("alpha[{}][{}][{}] != B/2", i + 1, k + 1, j + 1));
                            }
                        }
                    }
                }
            }
            Err(e) => table.push(e.to_string()),
        }
        report.push("step2 fields", table);
    }

    if let Some(law) = &g.law {
        let results = law_checks(g, law);
        for (name, failures) in results {
            report.push(name, failures);
        }
    }
    report
}

fn law_checks(g: &CarnotGroup, law: &GroupLaw) -> Vec<(&'static str, Vec<String>)> {
    let n = g.n();
    let w = &g.weights;
    let x = |k| Polynomial::var(n, k);
    let zero = Polynomial::zero(n);
    let mut out = Vec::new();

    let compose = |args: &[Polynomial]| -> Result<Vec<Polynomial>, PolyError> {
        law.product.iter().map(|p| p.substitute(args)).collect()
    };
    let collect = |name: &'static str, r: Result<Vec<String>, PolyError>| match r {
        Ok(v) => (name, v),
        Err(e) => (name, vec![e.to_string()]),
    };

    // P o e = P and e o P = P
    out.push(collect("law identity", (|| {
        let mut f = Vec::new();
        let ids: Vec<Polynomial> = (0..n).map(x).collect();
        let right_unit: Vec<Polynomial> = ids.iter().cloned().chain((0..n).map(|_| zero.clone())).collect();
        let left_unit: Vec<Polynomial> = (0..n).map(|_| zero.clone()).chain(ids.iter().cloned()).collect();
        for (k, (a, b)) in compose(&right_unit)?.iter().zip(compose(&left_unit)?.iter()).enumerate() {
            if *a != ids[k] || *b != ids[k] {
                f.push(format!("coordinate {}", k + 1));
            }
        }
        Ok(f)
    })()));

    // P o P^{-1} = e and P^{-1} o P = e
    out.push(collect("law inverse", (|| {
        let mut f = Vec::new();
        let ids: Vec<Polynomial> = (0..n).map(x).collect();
        let a: Vec<Polynomial> = ids.iter().cloned().chain(law.inverse.iter().cloned()).collect();
        let b: Vec<Polynomial> = law.inverse.iter().cloned().chain(ids.iter().cloned()).collect();
        for (k, (p, q)) in compose(&a)?.iter().zip(compose(&b)?.iter()).enumerate() {
            if !p.is_zero() || !q.is_zero() {
                f.push(format!("coordinate {}", k + 1));
            }
        }
        Ok(f)
    })()));

    // (a o b) o c = a o (b o c) on three generic points
    out.push(collect("law associativity", (|| {
        let mut f = Vec::new();
        let v = |k| Polynomial::var(3 * n, k);
        let ab: Vec<Polynomial> = compose(&(0..2 * n).map(v).collect::<Vec<_>>())?;
        let bc_args: Vec<Polynomial> = (n..3 * n).map(v).collect();
        let bc: Vec<Polynomial> = compose(&bc_args)?;
        let left_args: Vec<Polynomial> = ab.into_iter().chain((2 * n..3 * n).map(v)).collect();
        let right_args: Vec<Polynomial> = (0..n).map(v).chain(bc).collect();
        for (k, (l, r)) in compose(&left_args)?.iter().zip(compose(&right_args)?.iter()).enumerate() {
            if l != r {
                f.push(format!("coordinate {}", k + 1));
            }
        }
        Ok(f)
    })()));

    // delta_lambda(P o P') = delta_lambda P o delta_lambda P'
    out.push(collect("law dilation", (|| {
        let mut f = Vec::new();
        let lambda = probe_lambda();
        let scaled: Vec<Polynomial> = (0..2 * n)
            .map(|k| Polynomial::var(2 * n, k).scale(&rat_pow(&lambda, w.weight(k % n))))
            .collect();
        for (k, p) in law.product.iter().enumerate() {
            let lhs = p.substitute(&scaled)?;
            if lhs != p.scale(&rat_pow(&lambda, w.weight(k))) {
                f.push(format!("coordinate {}", k + 1));
            }
        }
        let inv_scaled: Vec<Polynomial> =
            (0..n).map(|k| x(k).scale(&rat_pow(&lambda, w.weight(k)))).collect();
        for (k, p) in law.inverse.iter().enumerate() {
            if p.substitute(&inv_scaled)? != p.scale(&rat_pow(&lambda, w.weight(k))) {
                f.push(format!("inverse coordinate {}", k + 1));
            }
        }
        Ok(f)
    })()));

    // X_i(P) = d/ds (P o s e_i) at s = 0
    out.push(collect("law left-invariant fields", (|| {
        let mut f = Vec::new();
        let at_origin: Vec<Polynomial> =
            (0..n).map(x).chain((0..n).map(|_| zero.clone())).collect();
        for (i, field) in g.fields.iter().enumerate() {
            let d = field.as_derivation(n);
            for (k, p) in law.product.iter().enumerate() {
                let coeff = p.partial_derivative(n + i)?.substitute(&at_origin)?;
                if coeff != d.coeff(k) {
                    f.push(format!("X{} coefficient on coordinate {}", i + 1, k + 1));
                }
            }
        }
        Ok(f)
    })()));

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratpoly::parse_poly;

    fn poly(g: &CarnotGroup, s: &str) -> Polynomial {
        parse_poly(s, &g.weights).unwrap()
    }

    fn heis_b() -> Matrix {
        vec![vec![int(0), int(-1)], vec![int(1), int(0)]]
    }

    #[test]
    fn euclidean_preset() {
        let g = make_euclidean(3).unwrap();
        assert_eq!(g.weights.homogeneous_dimension(), 3);
        assert!(g.fields.iter().all(|f| f.coeffs.is_empty()));
        assert!(commutator(&g, 0, 1).unwrap().is_zero());
        assert_eq!(make_euclidean(2).unwrap_err(), GroupError::BadDimension(2));
        assert!(validate_group(&g).all_passed());
    }

    #[test]
    fn heisenberg_presets() {
        let g = make_heisenberg(1, Presentation::Canonical).unwrap();
        let a = extract_alpha(&g).unwrap();
        assert_eq!(*a.get(0, 1, 0), rat(-1, 2));
        assert_eq!(*a.get(1, 0, 0), rat(1, 2));
        assert_eq!(*a.get(0, 0, 0), int(0));
        let br = commutator(&g, 0, 1).unwrap();
        assert_eq!(br.coeff(2), Polynomial::one(3));
        assert_eq!(br.coeffs().len(), 1);
        assert!(validate_group(&g).all_passed());

        let inv = &g.law.as_ref().unwrap().inverse;
        assert_eq!(inv[2], -Polynomial::var(3, 2));

        let p = make_heisenberg(1, Presentation::Polarized).unwrap();
        assert_eq!(p.fields[1].coeffs[&2], Polynomial::var(3, 0));
        assert!(validate_group(&p).all_passed());
        assert!(matches!(make_heisenberg(2, Presentation::Polarized), Err(GroupError::Unsupported(_))));

        let h2 = make_heisenberg(2, Presentation::Canonical).unwrap();
        assert_eq!(h2.weights.homogeneous_dimension(), 6);
        assert!(validate_group(&h2).all_passed());
    }

    #[test]
    fn step2_from_standard_symplectic_matrix_is_heisenberg() {
        let g = make_step2(&[heis_b()]).unwrap();
        let h = make_heisenberg(1, Presentation::Canonical).unwrap();
        assert!(g.same_fields(&h));
        assert_eq!(g.law, h.law);
        // bracket convention: [X_i, X_l] = sum_j B(j)_{li} d_{y_j}
        assert_eq!(commutator(&g, 0, 1).unwrap().coeff(2), Polynomial::constant(3, heis_b()[1][0].clone()));
    }

    #[test]
    fn step2_rejects_bad_matrices() {
        let zero = vec![vec![int(0), int(0)], vec![int(0), int(0)]];
        assert_eq!(make_step2(&[zero]).unwrap_err(), GroupError::DependentMatrices);
        let sym = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert_eq!(make_step2(&[sym]).unwrap_err(), GroupError::NotSkew(1));
        let b = heis_b();
        let twice: Matrix = b.iter().map(|r| r.iter().map(|x| x * int(2)).collect()).collect();
        assert_eq!(make_step2(&[b, twice]).unwrap_err(), GroupError::DependentMatrices);
    }

    #[test]
    fn engel_preset() {
        let g = make_engel();
        assert_eq!(g.weights.homogeneous_dimension(), 7);
        let report = validate_group(&g);
        assert!(report.all_passed(), "{report:?}");
        let br = commutator(&g, 0, 1).unwrap();
        assert_eq!(br.coeff(2), Polynomial::one(4));
        assert_eq!(br.coeff(3), Polynomial::var(4, 0));
        assert!(commutator(&g, 1, 1).unwrap().is_zero());
        assert!(matches!(commutator(&g, 0, 2), Err(GroupError::IndexOutOfRange { .. })));

        let a = extract_alpha(&g).unwrap();
        assert_eq!(*a.get(1, 0, 0), int(1));
        assert_eq!([a.get(0, 0, 0), a.get(0, 1, 0), a.get(1, 1, 0)], [&int(0), &int(0), &int(0)]);
    }

    #[test]
    fn engel_inverse_composition() {
        let g = make_engel();
        assert_eq!(group_inverse_apply(&g, &poly(&g, "x2")).unwrap(), poly(&g, "-x2"));
        assert_eq!(
            group_inverse_apply(&g, &poly(&g, "t")).unwrap(),
            poly(&g, "-t + x1*y - 1/2*x1^2*x2")
        );
        let e = make_euclidean(3).unwrap();
        let p = poly(&e, "x1^2*x2 + x3 - 4");
        assert_eq!(group_inverse_apply(&e, &p).unwrap(), poly(&e, "-x1^2*x2 - x3 - 4"));
        let nolaw = from_alpha(&extract_alpha(&g).unwrap()).unwrap();
        assert_eq!(group_inverse_apply(&nolaw, &p), Err(GroupError::NoGroupLaw));
    }

    #[test]
    fn validation_flags_bad_coefficients() {
        let w = StratifiedWeights::new(&[2, 1]).unwrap();
        let x1sq = &Polynomial::var(3, 0) * &Polynomial::var(3, 0);
        let fields = vec![
            VectorField::new(0, BTreeMap::from([(2, x1sq)])),
            VectorField::new(1, BTreeMap::from([(2, Polynomial::var(3, 0))])),
        ];
        let g = CarnotGroup::new("bad", w.clone(), fields, None, None).unwrap();
        let report = validate_group(&g);
        assert!(!report.get("coefficient homogeneity").unwrap().passed);

        // dependent step-2 data attached to otherwise fine fields
        let h = make_heisenberg(1, Presentation::Canonical).unwrap();
        let zero = vec![vec![int(0), int(0)], vec![int(0), int(0)]];
        let bad = CarnotGroup::new("dep", w, h.fields.clone(), None, Some(vec![zero])).unwrap();
        assert!(!validate_group(&bad).get("step2 independence").unwrap().passed);
    }

    #[test]
    fn structural_errors() {
        let w = StratifiedWeights::new(&[2, 1]).unwrap();
        let one = vec![VectorField::coordinate(0)];
        assert!(matches!(CarnotGroup::new("g", w.clone(), one, None, None), Err(GroupError::Structure(_))));
        let horiz = vec![
            VectorField::new(0, BTreeMap::from([(1, Polynomial::one(3))])),
            VectorField::coordinate(1),
        ];
        assert!(matches!(CarnotGroup::new("g", w, horiz, None, None), Err(GroupError::Structure(_))));
    }

    #[test]
    fn polarized_coordinate_change() {
        let pol = make_heisenberg(1, Presentation::Polarized).unwrap();
        let can = make_heisenberg(1, Presentation::Canonical).unwrap();
        let phi = polarized_to_canonical();
        assert!(is_homomorphism(&phi, &pol, &can).unwrap());
        let y = Polynomial::var(3, 2);
        assert_eq!(phi.pull_back(&phi.transport(&y).unwrap()).unwrap(), y);
    }

    #[test]
    fn presets_by_name() {
        assert_eq!(CarnotGroup::preset("engel").unwrap().name, "engel");
        assert_eq!(CarnotGroup::preset("euclidean:4").unwrap().n(), 4);
        assert_eq!(CarnotGroup::preset("heisenberg:2").unwrap().n(), 5);
        assert_eq!(CarnotGroup::preset("heisenberg:1:polarized").unwrap().name, "heisenberg:1:polarized");
        assert!(matches!(CarnotGroup::preset("sphere"), Err(GroupError::UnknownPreset(_))));
        assert!(matches!(CarnotGroup::preset("euclidean:x"), Err(GroupError::UnknownPreset(_))));
    }

    #[test]
    fn derivation_bracket_is_antisymmetric() {
        let g = make_engel();
        let a = commutator(&g, 0, 1).unwrap();
        let b = commutator(&g, 1, 0).unwrap();
        let neg: BTreeMap<usize, Polynomial> = b.coeffs().iter().map(|(k, p)| (*k, -p)).collect();
        assert_eq!(a, Derivation::new(4, neg));
        // [X1, [X1, X2]] = d_t
        let x1 = g.field(0).unwrap();
        let t = x1.bracket(&a).unwrap();
        assert_eq!(t.coeff(3), Polynomial::one(4));
        assert_eq!(t.coeffs().len(), 1);
    }
}
