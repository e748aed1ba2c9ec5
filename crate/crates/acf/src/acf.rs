//! The ACF factor `Phi(r) = r^{-2} int_{B_r} |grad_G u|^2 Gamma`, its quartic
//! form `a0 - 2 a2 r^2 + a4 r^4`, and the two-phase product `J = I+ I-`.
//!
//! After `M = delta_r P`, `Phi(r) = int_{B_1} |grad u|^2(delta_r P) Gamma(P) dP`.
//! The direct estimators split `B_1` into dyadic shells `2^{-k} A`,
//! `A = {1/2 < N <= 1}`, each contributing
//! `4^{-k} int_A |grad u|^2(delta_{r 2^{-k}} P) Gamma(P) dP`, and bound the
//! remaining core `B_{2^{-K}}` analytically.

use carnot_core::hcalc::{horizontal_gradient, horizontal_inner};
use carnot_core::{CarnotGroup, CounterexampleResult, Polynomial};

use crate::error::{AcfError, Result};
use crate::eval::CompiledPoly;
use crate::gauge::GaugeSpec;
use crate::integrate::{annulus_sample, shell_integrate_many, SampleConfig, ShellResult};
use crate::sampling::{purpose, run_blocks, Estimate};

pub const DEFAULT_SHELLS: u32 = 20;

/// `|grad_G p|^2` as an exact polynomial.
pub fn grad_norm_sq(g: &CarnotGroup, p: &Polynomial) -> Result<Polynomial> {
    let grad = horizontal_gradient(g, p)?;
    Ok(horizontal_inner(&grad, &grad)?)
}

/// Splits `u` into `P1 - P3` with `P1`, `P3` G-homogeneous of degrees 1, 3.
pub fn decompose(g: &CarnotGroup, u: &Polynomial) -> Result<(Polynomial, Polynomial)> {
    let comps = u.homogeneous_components(&g.weights)?;
    if let Some(bad) = comps.keys().find(|&&m| m != 1 && m != 3) {
        return Err(AcfError::BadDecomposition(format!(
            "u has a G-homogeneous component of degree {bad}; expected degrees 1 and 3 only"
        )));
    }
    let zero = Polynomial::zero(g.n());
    let p1 = comps.get(&1).cloned().unwrap_or_else(|| zero.clone());
    let p3 = -comps.get(&3).cloned().unwrap_or(zero);
    Ok((p1, p3))
}

#[derive(Debug, Clone)]
pub struct QuarticCoeffs {
    pub a0: Estimate,
    pub a2: Estimate,
    pub a4: Estimate,
    shell: ShellResult,
}

impl QuarticCoeffs {
    /// `a0 - 2 a2 r^2 + a4 r^4` with correlated stderr.
    pub fn phi(&self, r: f64) -> Estimate {
        let r2 = r * r;
        self.shell.linear(&[1.0, -2.0 * r2, r2 * r2])
    }

    /// `sqrt(a2 / a4)` by the delta method; `None` unless both are positive.
    pub fn r_star(&self) -> Option<Estimate> {
        let (a2, a4) = (self.a2.value, self.a4.value);
        if a2 <= 0.0 || a4 <= 0.0 {
            return None;
        }
        let r = (a2 / a4).sqrt();
        let g2 = 1.0 / (2.0 * r * a4);
        let g4 = -r / (2.0 * a4);
        let var = g2 * g2 * self.shell.cov(1, 1) + 2.0 * g2 * g4 * self.shell.cov(1, 2) + g4 * g4 * self.shell.cov(2, 2);
        Some(Estimate::new(r, var.max(0.0).sqrt()))
    }

    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.shell.cov(i, j)
    }
}

/// `a0 = int |grad P1|^2 Gamma`, `a2 = int <grad P1, grad P3> Gamma`,
/// `a4 = int |grad P3|^2 Gamma` over `B_1`, jointly by the shell method.
pub fn quartic_coeffs_for(spec: &GaugeSpec, p1: &Polynomial, p3: &Polynomial, cfg: SampleConfig) -> Result<QuarticCoeffs> {
    let g = &spec.group;
    let g1 = horizontal_gradient(g, p1)?;
    let g3 = horizontal_gradient(g, p3)?;
    let integrands = vec![
        (horizontal_inner(&g1, &g1)?, 0),
        (horizontal_inner(&g1, &g3)?, 2),
        (horizontal_inner(&g3, &g3)?, 4),
    ];
    let shell = shell_integrate_many(spec, &integrands, cfg)?;
    Ok(QuarticCoeffs { a0: shell.estimate(0), a2: shell.estimate(1), a4: shell.estimate(2), shell })
}

pub fn quartic_coeffs(spec: &GaugeSpec, result: &CounterexampleResult, cfg: SampleConfig) -> Result<QuarticCoeffs> {
    if !result.certificate.passed() {
        return Err(AcfError::InvalidInput("counterexample certificate did not pass".into()));
    }
    quartic_coeffs_for(spec, &result.p1, &result.p3, cfg)
}

/// Direct Phi on a grid, with the standard errors of consecutive
/// differences `Phi(r_a) - Phi(r_{a+1})` (common random numbers).
#[derive(Debug, Clone)]
pub struct DirectCurve {
    pub r: Vec<f64>,
    pub phi: Vec<Estimate>,
    pub diff: Vec<Estimate>,
    /// Analytic bound on the neglected core `B_{2^{-K}}`, per grid point.
    pub tail: Vec<f64>,
    pub acceptance: f64,
}

impl DirectCurve {
    /// Every consecutive drop exceeds `k` standard errors.
    pub fn strictly_decreasing(&self, k: f64) -> bool {
        self.diff.iter().all(|d| d.value > k * d.stderr)
    }

    pub fn strictly_increasing(&self, k: f64) -> bool {
        self.diff.iter().all(|d| -d.value > k * d.stderr)
    }
}

/// Bound on `int_{B_{2^{-K}}} |grad u|^2(delta_r P) Gamma(P) dP`.
fn core_tail(spec: &GaugeSpec, integrand: &CompiledPoly, r: f64, shells: u32, gamma_mass: f64) -> f64 {
    let rho = r * 0.5f64.powi(shells as i32);
    integrand.abs_bound(&spec.scaled_half_widths(rho)) * 0.25f64.powi(shells as i32) * gamma_mass
}

fn dyadic_weights(shells: u32) -> Vec<(f64, f64)> {
    (0..shells).map(|k| (0.5f64.powi(k as i32), 0.25f64.powi(k as i32))).collect()
}

fn check_grid(r: &[f64]) -> Result<()> {
    if r.is_empty() || r.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(AcfError::InvalidInput("radius grid must be nonempty and positive".into()));
    }
    Ok(())
}

pub fn phi_direct(
    spec: &GaugeSpec,
    u: &Polynomial,
    r_grid: &[f64],
    shells: u32,
    cfg: SampleConfig,
) -> Result<DirectCurve> {
    check_grid(r_grid)?;
    let g2 = CompiledPoly::new(&grad_norm_sq(&spec.group, u)?);
    let ladder = dyadic_weights(shells);
    let nr = r_grid.len();
    let n = spec.n();
    // last slot: Gamma on the annulus, for the core bound
    let m = run_blocks(cfg.seed, purpose::PHI_DIRECT, cfg.samples, nr + 1, cfg.workers, |rng, x| {
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        if annulus_sample(spec, rng, &mut p) {
            let gamma = spec.gamma(&p);
            for (xa, &r) in x.iter_mut().zip(r_grid) {
                let mut acc = 0.0;
                for &(s, w) in &ladder {
                    spec.dilate_into(&p, r * s, &mut q);
                    acc += w * g2.eval(&q);
                }
                *xa = acc * gamma;
            }
            x[nr] = gamma;
        }
    });
    if m.mean[nr] == 0.0 {
        return Err(AcfError::ZeroAcceptance);
    }
    let volume = spec.box_volume();
    let gamma_mass = m.estimate(nr, volume / 0.75);
    let gamma_bound = gamma_mass.value + 3.0 * gamma_mass.stderr;
    let tail: Vec<f64> = r_grid.iter().map(|&r| core_tail(spec, &g2, r, shells, gamma_bound)).collect();
    let phi = (0..nr)
        .map(|a| {
            let e = m.estimate(a, volume);
            Estimate::new(e.value, e.stderr.hypot(tail[a]))
        })
        .collect();
    let diff = (0..nr.saturating_sub(1))
        .map(|a| {
            let value = volume * (m.mean[a] - m.mean[a + 1]);
            let se = m.linear_stderr(&[(a, 1.0), (a + 1, -1.0)], volume);
            Estimate::new(value, se.hypot(tail[a].max(tail[a + 1])))
        })
        .collect();
    Ok(DirectCurve { r: r_grid.to_vec(), phi, diff, tail, acceptance: m.mean[nr] })
}

/// One grid point of the two-phase curve.
#[derive(Debug, Clone, Copy)]
pub struct JPoint {
    pub r: f64,
    pub i_plus: Estimate,
    pub i_minus: Estimate,
    pub j: Estimate,
    /// `I+ - I-` with paired standard error.
    pub i_diff: Estimate,
}

#[derive(Debug, Clone)]
pub struct JCurve {
    pub points: Vec<JPoint>,
    /// `J(r_a) - J(r_{a+1})` with delta-method standard errors.
    pub j_diff: Vec<Estimate>,
}

impl JCurve {
    pub fn strictly_decreasing(&self, k: f64) -> bool {
        self.j_diff.iter().all(|d| d.value > k * d.stderr)
    }
}

/// `I+-(r) = r^{-2} int_{B_r cap {+-u > 0}} |grad u|^2 Gamma` and `J = I+ I-`.
pub fn j_curve(spec: &GaugeSpec, u: &Polynomial, r_grid: &[f64], shells: u32, cfg: SampleConfig) -> Result<JCurve> {
    check_grid(r_grid)?;
    let g2 = CompiledPoly::new(&grad_norm_sq(&spec.group, u)?);
    let uc = CompiledPoly::new(u);
    let ladder = dyadic_weights(shells);
    let nr = r_grid.len();
    let n = spec.n();
    let m = run_blocks(cfg.seed, purpose::JAY, cfg.samples, 2 * nr + 1, cfg.workers, |rng, x| {
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        if annulus_sample(spec, rng, &mut p) {
            let gamma = spec.gamma(&p);
            for (a, &r) in r_grid.iter().enumerate() {
                let (mut plus, mut minus) = (0.0, 0.0);
                for &(s, w) in &ladder {
                    spec.dilate_into(&p, r * s, &mut q);
                    let v = uc.eval(&q);
                    if v > 0.0 {
                        plus += w * g2.eval(&q);
                    } else if v < 0.0 {
                        minus += w * g2.eval(&q);
                    }
                }
                x[2 * a] = plus * gamma;
                x[2 * a + 1] = minus * gamma;
            }
            x[2 * nr] = gamma;
        }
    });
    if m.mean[2 * nr] == 0.0 {
        return Err(AcfError::ZeroAcceptance);
    }
    let vol = spec.box_volume();
    let gamma_mass = m.estimate(2 * nr, vol / 0.75);
    let gamma_bound = gamma_mass.value + 3.0 * gamma_mass.stderr;
    let mut points = Vec::with_capacity(nr);
    for (a, &r) in r_grid.iter().enumerate() {
        let tail = core_tail(spec, &g2, r, shells, gamma_bound);
        let (ip, im) = (vol * m.mean[2 * a], vol * m.mean[2 * a + 1]);
        let se_p = m.linear_stderr(&[(2 * a, 1.0)], vol).hypot(tail);
        let se_m = m.linear_stderr(&[(2 * a + 1, 1.0)], vol).hypot(tail);
        let se_j = m.linear_stderr(&[(2 * a, im), (2 * a + 1, ip)], vol).hypot(tail * (ip + im));
        let se_d = m.linear_stderr(&[(2 * a, 1.0), (2 * a + 1, -1.0)], vol).hypot(tail);
        points.push(JPoint {
            r,
            i_plus: Estimate::new(ip, se_p),
            i_minus: Estimate::new(im, se_m),
            j: Estimate::new(ip * im, se_j),
            i_diff: Estimate::new(ip - im, se_d),
        });
    }
    let j_diff = (0..nr.saturating_sub(1))
        .map(|a| {
            let (p0, m0) = (points[a].i_plus.value, points[a].i_minus.value);
            let (p1, m1) = (points[a + 1].i_plus.value, points[a + 1].i_minus.value);
            let g = [(2 * a, m0), (2 * a + 1, p0), (2 * a + 2, -m1), (2 * a + 3, -p1)];
            Estimate::new(p0 * m0 - p1 * m1, m.linear_stderr(&g, vol))
        })
        .collect();
    Ok(JCurve { points, j_diff })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiMethod {
    Direct,
    Quartic,
}

/// Per-radius Phi values with metadata sufficient to reproduce them.
#[derive(Debug, Clone)]
pub struct AcfEvaluation {
    pub r_grid: Vec<f64>,
    pub phi: Vec<Estimate>,
    pub phi_quartic: Option<Vec<Estimate>>,
    pub coeffs: Option<QuarticCoeffs>,
    pub seed: u64,
    pub samples: usize,
    pub shells: u32,
}

/// Phi on a grid. `Direct` also reports the quartic curve when `u` splits as
/// `P1 - P3` (quartic coefficients use an independent stream).
pub fn phi_curve(
    spec: &GaugeSpec,
    u: &Polynomial,
    r_grid: &[f64],
    method: PhiMethod,
    shells: u32,
    cfg: SampleConfig,
) -> Result<AcfEvaluation> {
    check_grid(r_grid)?;
    let coeffs = match decompose(&spec.group, u) {
        Ok((p1, p3)) => Some(quartic_coeffs_for(spec, &p1, &p3, cfg)?),
        Err(e) if method == PhiMethod::Quartic => return Err(e),
        Err(_) => None,
    };
    let phi_quartic = coeffs.as_ref().map(|c| r_grid.iter().map(|&r| c.phi(r)).collect::<Vec<_>>());
    let phi = match method {
        PhiMethod::Direct => phi_direct(spec, u, r_grid, shells, cfg)?.phi,
        PhiMethod::Quartic => phi_quartic.clone().unwrap_or_default(),
    };
    Ok(AcfEvaluation {
        r_grid: r_grid.to_vec(),
        phi,
        phi_quartic,
        coeffs,
        seed: cfg.seed,
        samples: cfg.samples,
        shells,
    })
}

/// `steps` equally spaced radii ending at `r_max`, starting at `r_min` (or
/// `r_max / steps` when `r_min` is `None`).
pub fn radius_grid(r_min: Option<f64>, r_max: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    let lo = r_min.unwrap_or(r_max / steps as f64);
    if steps == 1 {
        return vec![r_max];
    }
    (0..steps).map(|i| lo + (r_max - lo) * i as f64 / (steps - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::gauge_for;
    use carnot_core::counterexample::construct;
    use carnot_core::ratpoly::{int, rat};
    use carnot_core::{parse_poly, CarnotGroup};

    fn heis() -> GaugeSpec {
        gauge_for(&CarnotGroup::preset("heisenberg:1").unwrap()).unwrap()
    }

    #[test]
    fn decomposition() {
        let s = heis();
        let u = parse_poly("x2 + 1/4*x1^2*x2 - x1*y", &s.group.weights).unwrap();
        let (p1, p3) = decompose(&s.group, &u).unwrap();
        assert_eq!(p1, parse_poly("x2", &s.group.weights).unwrap());
        assert_eq!(p3, parse_poly("-1/4*x1^2*x2 + x1*y", &s.group.weights).unwrap());
        let bad = parse_poly("x2 + y", &s.group.weights).unwrap();
        assert!(matches!(decompose(&s.group, &bad), Err(AcfError::BadDecomposition(_))));
    }

    #[test]
    fn linear_u_gives_constant_phi() {
        let s = heis();
        let u = parse_poly("x2", &s.group.weights).unwrap();
        let grid = [0.1, 0.5, 1.0];
        let d = phi_direct(&s, &u, &grid, DEFAULT_SHELLS, SampleConfig::new(50_000, 1)).unwrap();
        // |grad x2|^2 = 1 at every point, so all radii see identical samples
        assert!(d.diff.iter().all(|e| e.value.abs() < 1e-9));
        let ev = phi_curve(&s, &u, &grid, PhiMethod::Quartic, DEFAULT_SHELLS, SampleConfig::new(50_000, 1)).unwrap();
        let a0 = ev.coeffs.as_ref().unwrap().a0;
        assert!(ev.phi.iter().all(|e| (e.value - a0.value).abs() < 1e-12));
        assert!(d.phi[0].agrees_with(&a0, 3.0));
    }

    #[test]
    fn cubic_u_gives_increasing_phi() {
        let s = heis();
        let u = parse_poly("x1^3 - 3*x1*x2^2", &s.group.weights).unwrap();
        let grid = radius_grid(None, 1.0, 5);
        let d = phi_direct(&s, &u, &grid, DEFAULT_SHELLS, SampleConfig::new(50_000, 2)).unwrap();
        assert!(d.strictly_increasing(3.0));
        let ratio = d.phi[4].value / d.phi[0].value;
        assert!((ratio - 5f64.powi(4)).abs() < 1e-6 * ratio);
    }

    #[test]
    fn heisenberg_coefficients_and_r_star() {
        let s = heis();
        let r = construct(&s.group, &int(1), &int(0), &rat(1, 2)).unwrap();
        let c = quartic_coeffs(&s, &r, SampleConfig::new(100_000, 3)).unwrap();
        assert!(c.a2.z() > 5.0 && c.a0.z() > 5.0 && c.a4.z() > 5.0);
        let rs = c.r_star().unwrap();
        assert!(rs.value > 0.0 && rs.stderr < rs.value);
        let p = c.phi(0.0);
        assert_eq!(p.value, c.a0.value);
    }

    #[test]
    fn grid() {
        assert_eq!(radius_grid(None, 1.0, 4), vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(radius_grid(Some(0.5), 1.0, 3), vec![0.5, 0.75, 1.0]);
    }
}
