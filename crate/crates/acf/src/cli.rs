//! The `carnot-acf` command line.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 mathematical-domain
//! error, 3 unsupported feature.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use carnot_core::counterexample::{construct, intrinsic_odd_check, pair_determinant};
use carnot_core::group::{from_alpha, make_euclidean, make_heisenberg, polarized_to_canonical, validate_group, Step2Alpha};
use carnot_core::hcalc::{horizontal_gradient, horizontal_inner, is_harmonic, sublaplacian};
use carnot_core::ratpoly::{format_rational, int, parse_poly_with, print_poly_with, rat_pow};
use carnot_core::{
    parse_rational, CarnotGroup, ConstructError, GroupError, PairChoice, PolyError, Polynomial, Presentation,
    Rational, VarNames,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::acf::{decompose, phi_direct, quartic_coeffs_for, radius_grid, AcfEvaluation, QuarticCoeffs, DEFAULT_SHELLS};
use crate::error::AcfError;
use crate::formats::{fmt_num, load_group, write_coeffs_csv, write_jay_csv, write_phi_csv, Certificate, DEFAULT_PRECISION};
use crate::gauge::{gauge_for, GaugeSpec};
use crate::integrate::{shell_integrate, SampleConfig};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "carnot-acf", version, about = "Exact counterexamples and ACF functionals on Carnot groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and certify a counterexample u = P1 - P3.
    Construct(ConstructArgs),
    /// Sub-Laplacian, harmonicity and homogeneous components of a polynomial.
    Check(CheckArgs),
    /// Run the structural and group-law checks on a group.
    Validate(GroupArg),
    /// Phi(r) on a radius grid (CSV).
    Phi(CurveArgs),
    /// Quartic coefficients a0, a2, a4 and r* (CSV).
    Coeffs(CurveArgs),
    /// Two-phase curve J = I+ I- (CSV).
    Jay(CurveArgs),
    /// Orthogonality of harmonic polynomials of different degrees on R^n.
    EuclidOrtho(OrthoArgs),
    /// Determinant of the assembled system on a synthetic two-field group.
    DetCheck(DetArgs),
}

#[derive(Debug, Args)]
pub struct GroupArg {
    /// Preset (engel, euclidean:<n>, heisenberg:<n>[:polarized]) or group file.
    #[arg(long)]
    pub group: String,
}

#[derive(Debug, Args)]
pub struct Params {
    #[arg(long, default_value = "1")]
    pub b: String,
    #[arg(long, default_value = "0")]
    pub p: String,
    #[arg(long, default_value = "1/2")]
    pub q: String,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Significant digits in CSV output.
    #[arg(long, default_value_t = DEFAULT_PRECISION, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..=17))]
    pub precision: usize,
}

#[derive(Debug, Args)]
pub struct Sampling {
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0: automatic). Results do not depend on it.
    #[arg(long, env = "CARNOT_ACF_WORKERS", default_value_t = 0)]
    pub workers: usize,
}

impl Sampling {
    fn config(&self) -> SampleConfig {
        SampleConfig::new(self.samples, self.seed).with_workers(self.workers)
    }
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub group: GroupArg,
    #[command(flatten)]
    pub params: Params,
    /// Certificate file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub group: GroupArg,
    /// Polynomial string or file.
    #[arg(long = "u", value_name = "POLY")]
    pub u: Option<String>,
    #[arg(value_name = "POLY", conflicts_with = "u")]
    pub poly: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Direct,
    Quartic,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub group: GroupArg,
    /// Function to analyse (string or file); built from --b/--p/--q when absent.
    #[arg(long = "u", value_name = "POLY")]
    pub u: Option<String>,
    #[command(flatten)]
    pub params: Params,
    #[arg(long)]
    pub rmin: Option<f64>,
    /// Largest radius; defaults to 0.9 r* when r* exists, else 1.
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Dyadic shells for the direct estimators.
    #[arg(long, default_value_t = DEFAULT_SHELLS)]
    pub shells: u32,
    #[arg(long, value_enum, default_value_t = Method::Direct)]
    pub method: Method,
    /// Also write a gnuplot script for the CSV (needs --out).
    #[arg(long, requires = "out")]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct OrthoArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// First harmonic polynomial.
    #[arg(long)]
    pub ph: String,
    /// Second harmonic polynomial, of a different degree.
    #[arg(long)]
    pub pk: String,
    #[command(flatten)]
    pub sampling: Sampling,
}

#[derive(Debug, Args)]
pub struct DetArgs {
    /// `a11,a21,a12,a22`, with `akl` the coefficient of `x_k d_y` in `X_l`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub b: String,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn domain(message: impl Into<String>) -> Self {
        Self { code: EXIT_DOMAIN, message: message.into() }
    }
}

fn poly_code(e: &PolyError) -> i32 {
    match e {
        PolyError::SyntaxError { .. } | PolyError::UnknownVariable { .. } | PolyError::BadStrata(_) => EXIT_USAGE,
        _ => EXIT_DOMAIN,
    }
}

fn group_code(e: &GroupError) -> i32 {
    match e {
        GroupError::Unsupported(_) => EXIT_UNSUPPORTED,
        GroupError::UnknownPreset(_) => EXIT_USAGE,
        GroupError::Poly(p) => poly_code(p),
        _ => EXIT_DOMAIN,
    }
}

pub fn exit_code(e: &AcfError) -> i32 {
    match e {
        AcfError::UnsupportedGroup(_) => EXIT_UNSUPPORTED,
        AcfError::InvalidInput(_) => EXIT_USAGE,
        AcfError::Poly(p) => poly_code(p),
        AcfError::Group(g) | AcfError::Construct(ConstructError::Group(g)) => group_code(g),
        _ => EXIT_DOMAIN,
    }
}

impl From<AcfError> for CliError {
    fn from(e: AcfError) -> Self {
        let message = match &e {
            AcfError::UnsupportedGroup(_) => format!(
                "{e}\nPhi needs an explicit fundamental solution; without it the monotonicity theorem cannot be applied"
            ),
            _ => e.to_string(),
        };
        Self { code: exit_code(&e), message }
    }
}

impl From<ConstructError> for CliError {
    fn from(e: ConstructError) -> Self {
        AcfError::from(e).into()
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        AcfError::from(e).into()
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        AcfError::from(e).into()
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(format!("io: {e}"))
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code; diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{text}");
            return 0;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match cmd {
        Command::Construct(a) => cmd_construct(a, out, err),
        Command::Check(a) => cmd_check(a, out),
        Command::Validate(a) => cmd_validate(a, out),
        Command::Phi(a) => cmd_phi(a, out, err),
        Command::Coeffs(a) => cmd_coeffs(a, out, err),
        Command::Jay(a) => cmd_jay(a, out, err),
        Command::EuclidOrtho(a) => cmd_euclid_ortho(a, out),
        Command::DetCheck(a) => cmd_det_check(a, out),
    }
}

fn rational_arg(name: &str, text: &str) -> CliResult<Rational> {
    parse_rational(text).map_err(|e| CliError::usage(format!("--{name}: {e}")))
}

/// A polynomial given inline or as the path of a file holding it.
fn poly_arg(text: &str, g: &CarnotGroup) -> CliResult<Polynomial> {
    let path = Path::new(text);
    let source = if path.is_file() { std::fs::read_to_string(path)? } else { text.to_string() };
    Ok(parse_poly_with(source.trim(), &VarNames::for_weights(&g.weights))?)
}

fn show(g: &CarnotGroup, p: &Polynomial) -> String {
    print_poly_with(p, &VarNames::for_weights(&g.weights))
}

fn emit(path: &Option<PathBuf>, out: &mut dyn Write, content: &[u8]) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => out.write_all(content)?,
    }
    Ok(())
}

fn cmd_construct(a: ConstructArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let g = load_group(&a.group.group)?;
    let b = rational_arg("b", &a.params.b)?;
    let p = rational_arg("p", &a.params.p)?;
    let q = rational_arg("q", &a.params.q)?;
    let r = construct(&g, &b, &p, &q)?;
    let cert = Certificate::from_result(&g, &r);
    // the summary goes wherever the certificate does not
    let summary: &mut dyn Write = if a.out.is_some() { &mut *out } else { &mut *err };
    writeln!(summary, "group: {}", g.name)?;
    writeln!(summary, "pair: i = {}, s = {}, j = {} (gap {})", cert.pair.i, cert.pair.s, cert.pair.j, cert.pair.alpha_gap)?;
    writeln!(summary, "c = ({})", cert.coefficients.join(", "))?;
    writeln!(summary, "u = {}", cert.u)?;
    writeln!(summary, "<grad P1, grad P3> = {}", cert.inner_product)?;
    writeln!(summary, "certificate: PASS")?;
    let text = cert.to_toml()?;
    emit(&a.out, out, text.as_bytes())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> CliResult {
    let g = load_group(&a.group.group)?;
    let text = a.u.or(a.poly).ok_or_else(|| CliError::usage("no polynomial given"))?;
    let p = poly_arg(&text, &g)?;
    let lap = sublaplacian(&g, &p)?;
    writeln!(out, "group: {}", g.name)?;
    writeln!(out, "polynomial: {}", show(&g, &p))?;
    writeln!(out, "laplacian: {}", show(&g, &lap))?;
    writeln!(out, "harmonic: {}", yes_no(is_harmonic(&g, &p)?.is_harmonic()))?;
    let comps = p.homogeneous_components(&g.weights)?;
    if comps.is_empty() {
        writeln!(out, "components: none")?;
    }
    for (d, c) in &comps {
        writeln!(out, "degree {d}: {}", show(&g, c))?;
    }
    if g.law.is_some() {
        writeln!(out, "intrinsic-odd: {}", yes_no(intrinsic_odd_check(&g, &p)?))?;
    }
    Ok(())
}

fn cmd_validate(a: GroupArg, out: &mut dyn Write) -> CliResult {
    let g = load_group(&a.group)?;
    let report = validate_group(&g);
    writeln!(out, "group: {}", g.name)?;
    for c in &report.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        if c.detail.is_empty() {
            writeln!(out, "{verdict} {}", c.name)?;
        } else {
            writeln!(out, "{verdict} {}: {}", c.name, c.detail)?;
        }
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::domain("group validation failed"))
    }
}

fn is_polarized(g: &CarnotGroup) -> bool {
    make_heisenberg(1, Presentation::Polarized).is_ok_and(|p| p.same_fields(g))
}

/// Gauge data and the function to analyse, in canonical coordinates.
fn numeric_setup(a: &CurveArgs) -> CliResult<(GaugeSpec, Polynomial)> {
    let g = load_group(&a.group.group)?;
    let u = match &a.u {
        Some(text) => poly_arg(text, &g)?,
        None => {
            let b = rational_arg("b", &a.params.b)?;
            let p = rational_arg("p", &a.params.p)?;
            let q = rational_arg("q", &a.params.q)?;
            // fail on an unsupported group before the exact construction
            if !is_polarized(&g) {
                gauge_for(&g)?;
            }
            construct(&g, &b, &p, &q)?.u
        }
    };
    if is_polarized(&g) {
        let canonical = make_heisenberg(1, Presentation::Canonical)?;
        let u = polarized_to_canonical().transport(&u)?;
        return Ok((gauge_for(&canonical)?, u));
    }
    Ok((gauge_for(&g)?, u))
}

fn coeffs_if_split(spec: &GaugeSpec, u: &Polynomial, cfg: SampleConfig) -> CliResult<Option<QuarticCoeffs>> {
    match decompose(&spec.group, u) {
        Ok((p1, p3)) => Ok(Some(quartic_coeffs_for(spec, &p1, &p3, cfg)?)),
        Err(AcfError::BadDecomposition(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn grid_for(a: &CurveArgs, coeffs: Option<&QuarticCoeffs>) -> CliResult<Vec<f64>> {
    let r_max = match a.rmax {
        Some(r) => r,
        None => coeffs.and_then(|c| c.r_star()).map_or(1.0, |r| 0.9 * r.value),
    };
    if !(r_max > 0.0 && r_max.is_finite()) || a.rmin.is_some_and(|r| !(r > 0.0 && r <= r_max)) || a.steps == 0 {
        return Err(CliError::usage("need 0 < rmin <= rmax and steps >= 1"));
    }
    Ok(radius_grid(a.rmin, r_max, a.steps))
}

fn report_coeffs(w: &mut dyn Write, c: &QuarticCoeffs, precision: usize) -> CliResult {
    let f = |x| fmt_num(x, precision);
    writeln!(w, "a0 = {} +- {}", f(c.a0.value), f(c.a0.stderr))?;
    writeln!(w, "a2 = {} +- {}", f(c.a2.value), f(c.a2.stderr))?;
    writeln!(w, "a4 = {} +- {}", f(c.a4.value), f(c.a4.stderr))?;
    match c.r_star() {
        Some(r) => writeln!(w, "r* = {} +- {}", f(r.value), f(r.stderr))?,
        None => writeln!(w, "r* undefined (a2 or a4 not positive)")?,
    }
    if c.a2.value > 5.0 * c.a2.stderr {
        writeln!(w, "verdict: Φ decreasing on (0, r*)")?;
    } else {
        writeln!(w, "verdict: inconclusive (a2 not positive at 5 stderr)")?;
    }
    Ok(())
}

fn gnuplot_script(csv: &Path, ycol: usize, title: &str) -> String {
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'r'\nset title '{title}'\n\
         plot '{}' using 1:{ycol}:{} with yerrorlines\n",
        csv.display(),
        ycol + 1
    )
}

fn write_plot(a: &CurveArgs, ycol: usize, title: &str) -> CliResult {
    if let (Some(plot), Some(csv)) = (&a.plot, &a.output.out) {
        std::fs::write(plot, gnuplot_script(csv, ycol, title))?;
    }
    Ok(())
}

fn cmd_phi(a: CurveArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let (spec, u) = numeric_setup(&a)?;
    let cfg = a.sampling.config();
    let coeffs = coeffs_if_split(&spec, &u, cfg)?;
    let grid = grid_for(&a, coeffs.as_ref())?;
    let phi_quartic = coeffs.as_ref().map(|c| grid.iter().map(|&r| c.phi(r)).collect::<Vec<_>>());
    let phi = match a.method {
        Method::Direct => phi_direct(&spec, &u, &grid, a.shells, cfg)?.phi,
        Method::Quartic => phi_quartic
            .clone()
            .ok_or_else(|| CliError::domain("quartic method needs u = P1 - P3 with homogeneous parts of degrees 1 and 3"))?,
    };
    let ev = AcfEvaluation { r_grid: grid, phi, phi_quartic, coeffs, seed: cfg.seed, samples: cfg.samples, shells: a.shells };
    let mut buf = Vec::new();
    write_phi_csv(&mut buf, &ev, a.output.precision)?;
    emit(&a.output.out, out, &buf)?;
    write_plot(&a, 2, "Phi(r)")?;
    if let Some(c) = &ev.coeffs {
        let summary: &mut dyn Write = if a.output.out.is_some() { &mut *out } else { &mut *err };
        report_coeffs(summary, c, a.output.precision)?;
    }
    Ok(())
}

fn cmd_coeffs(a: CurveArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let (spec, u) = numeric_setup(&a)?;
    let (p1, p3) = decompose(&spec.group, &u)?;
    let c = quartic_coeffs_for(&spec, &p1, &p3, a.sampling.config())?;
    let mut buf = Vec::new();
    write_coeffs_csv(&mut buf, &c, a.output.precision)?;
    emit(&a.output.out, out, &buf)?;
    let summary: &mut dyn Write = if a.output.out.is_some() { &mut *out } else { &mut *err };
    report_coeffs(summary, &c, a.output.precision)
}

fn cmd_jay(a: CurveArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let (spec, u) = numeric_setup(&a)?;
    let cfg = a.sampling.config();
    let coeffs = if a.rmax.is_none() { coeffs_if_split(&spec, &u, cfg)? } else { None };
    let grid = grid_for(&a, coeffs.as_ref())?;
    let curve = crate::acf::j_curve(&spec, &u, &grid, a.shells, cfg)?;
    let mut buf = Vec::new();
    write_jay_csv(&mut buf, &curve, a.output.precision)?;
    emit(&a.output.out, out, &buf)?;
    write_plot(&a, 2, "J(r)")?;
    let summary: &mut dyn Write = if a.output.out.is_some() { &mut *out } else { &mut *err };
    let symmetric = curve.points.iter().all(|p| p.i_diff.value.abs() < 3.0 * p.i_diff.stderr);
    writeln!(summary, "|I+ - I-| < 3 stderr at every radius: {}", yes_no(symmetric))?;
    writeln!(summary, "J decreasing at 3 stderr: {}", yes_no(curve.strictly_decreasing(3.0)))?;
    Ok(())
}

fn cmd_euclid_ortho(a: OrthoArgs, out: &mut dyn Write) -> CliResult {
    let g = make_euclidean(a.n).map_err(|e| CliError::usage(e.to_string()))?;
    let ph = poly_arg(&a.ph, &g)?;
    let pk = poly_arg(&a.pk, &g)?;
    let mut degrees = [0u32; 2];
    for (slot, (name, p)) in degrees.iter_mut().zip([("ph", &ph), ("pk", &pk)]) {
        if !is_harmonic(&g, p)?.is_harmonic() {
            return Err(CliError::domain(format!("--{name} is not harmonic: laplacian {}", show(&g, &sublaplacian(&g, p)?))));
        }
        let d = p.g_degree(&g.weights).map_err(|_| CliError::domain(format!("--{name} is zero")))?;
        if !p.is_g_homogeneous(&g.weights, d) {
            return Err(CliError::domain(format!("--{name} is not homogeneous")));
        }
        *slot = d;
    }
    if degrees[0] == degrees[1] {
        return Err(CliError::domain(format!("both polynomials have degree {}; the identity needs h != k", degrees[0])));
    }
    let integrand = horizontal_inner(&horizontal_gradient(&g, &ph)?, &horizontal_gradient(&g, &pk)?)?;
    let spec = gauge_for(&g)?;
    let e = shell_integrate(&spec, &integrand, (degrees[0] + degrees[1]) as i32 - 2, a.sampling.config())?;
    writeln!(out, "degrees: h = {}, k = {}", degrees[0], degrees[1])?;
    writeln!(out, "integral = {} +- {}", fmt_num(e.value, DEFAULT_PRECISION), fmt_num(e.stderr, DEFAULT_PRECISION))?;
    let pass = e.value.abs() < 3.0 * e.stderr || (e.value == 0.0 && e.stderr == 0.0);
    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" })?;
    Ok(())
}

fn cmd_det_check(a: DetArgs, out: &mut dyn Write) -> CliResult {
    let vals = a
        .alpha
        .split(',')
        .map(|s| rational_arg("alpha", s.trim()))
        .collect::<CliResult<Vec<_>>>()?;
    let [a11, a21, a12, a22]: [Rational; 4] =
        vals.try_into().map_err(|_| CliError::usage("--alpha needs four comma-separated rationals"))?;
    let b = rational_arg("b", &a.b)?;
    let mut alpha = Step2Alpha::zeros(2, 1);
    alpha.set(0, 0, 0, a11);
    alpha.set(0, 1, 0, a21.clone());
    alpha.set(1, 0, 0, a12.clone());
    alpha.set(1, 1, 0, a22);
    let g = from_alpha(&alpha)?;
    let gap = &a12 - &a21;
    let pair = PairChoice { i: 0, s: 1, j: 0, alpha_gap: gap.clone() };
    let det = pair_determinant(&g, &pair, &b)?;
    let zero = Rational::from_integer(0.into());
    let stated = &int(-72) * &rat_pow(&b, 4) * &gap;
    let cubic = &int(-72) * &rat_pow(&b, 3) * &gap;
    writeln!(out, "det = {}", format_rational(&det))?;
    writeln!(out, "-72*b^4*gap = {}", format_rational(&stated))?;
    writeln!(out, "-72*b^3*gap = {}", format_rational(&cubic))?;
    let verdict = if gap == zero && det == zero {
        "SINGULAR"
    } else if det == cubic {
        "PASS"
    } else {
        "FAIL"
    };
    writeln!(out, "{verdict}")?;
    Ok(())
}
