//! Command-line experiments. Each subcommand runs a family of checks, prints one
//! line per check and writes CSV tables plus a `report.json` to the output directory.
//!
//! Exit codes: 0 when every residual is within tolerance, 1 when one is not,
//! 2 when the configuration is invalid or an experiment cannot be set up.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{
    check_form_leibniz, check_leibniz, coproduct_first, coproduct_second, morphism_residual, nabla, nabla_by_scaling,
    LeibnizVariant,
};
use crate::cas::{random_element, relation_checks, AlgebraElement};
use crate::context::QContext;
use crate::fourier::{Family, QFourier, SublatticeSeq};
use crate::gauge::{
    commutator_residual, curvature, curvature_covariance, leibniz_residual, mixed_commutator_residual, transform_matter,
    Einbein, GaugeField, Scenario,
};
use crate::jackson::{definite_integral, definite_integral_closed_form};
use crate::laurent::{parse_laurent, CoeffText, LaurentPoly};
use crate::lattice::{LatticeFn, LatticeGrid, Sector};
use crate::oscillator::{GaussianPair, LadderPair, LadderParams};
use crate::ring::{parse_rational, rational_to_f64, ExactComplex, Field};
use crate::schrodinger::{
    check_noether, continuity_residual, eigen_residual, energy_form_residual, evolve, stationary_states, Closure,
    EvolutionState, Hamiltonian, Representation,
};
use crate::special::{pochhammer_factorial_residual, Basis, QSpecial, Trig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config {path}: {source}")]
    ConfigParse { path: PathBuf, source: serde_json::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("experiment failed to run: {0}")]
    Experiment(String),
}

fn experiment<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Experiment(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "qcalc", version, about = "Experiments on the q-deformed Heisenberg algebra and its lattice calculus")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Deformation parameter; a fraction such as 3/2 selects exact arithmetic
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Lattice window as N_MIN,N_MAX
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Directory for CSV and JSON artifacts
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Tolerance applied to every check
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file with any of the settings; flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normal-ordering relations, associativity, involution and derivative extraction
    VerifyAlgebra(SampleArgs),
    /// Product rules, the scaling morphism and the kernel and image of the derivative
    Leibniz(SampleArgs),
    /// Definite Jackson integral of a Laurent polynomial
    Integrate(IntegrateArgs),
    /// cos_q and sin_q on the even lattice, with their relations and orthogonality
    SpecialTables,
    /// Isometry and inversion of the q-Fourier transforms and the step-function pair
    Fourier(FourierArgs),
    /// Free Hamiltonian spectrum against the tabulated eigenvalues
    Spectrum(SpectrumArgs),
    /// Time evolution with density, current and conservation checks
    Evolve(EvolveArgs),
    /// Gauge covariance of the derivative and curvature
    Gauge(GaugeArgs),
    /// Ladder operators, ground state, q-Hermite levels and the Gaussian transform pair
    Oscillator(OscillatorArgs),
}

#[derive(Args, Debug, Default)]
pub struct SampleArgs {
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct IntegrateArgs {
    /// Integrand, e.g. "x" or "2 x^3 - 1/3 x^-2"
    #[arg(long, allow_hyphen_values = true)]
    pub poly: Option<String>,
    /// Lower limit as an exponent: the integral starts at q^FROM
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<i32>,
    /// Upper limit as an exponent
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<i32>,
    /// plus or minus
    #[arg(long)]
    pub sector: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct FourierArgs {
    /// Jump position of the step function
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<i32>,
}

#[derive(Args, Debug, Default)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub mass: Option<f64>,
    /// dirichlet, even-series or odd-series
    #[arg(long)]
    pub closure: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct EvolveArgs {
    #[arg(long)]
    pub mass: Option<f64>,
    /// Time step of the continuity check
    #[arg(long)]
    pub dt: Option<f64>,
    /// Snapshots recorded over unit time
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct GaugeArgs {
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Rate of time variation of the background fields
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct OscillatorArgs {
    #[arg(long)]
    pub levels: Option<usize>,
}

/// Number or fraction string in the config file.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum QSpec {
    Number(f64),
    Text(String),
}

/// Settings from `--config`; any field may be omitted. Flags override it.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub q: Option<QSpec>,
    pub window: Option<(i32, i32)>,
    pub sectors: Option<Vec<String>>,
    pub tol: Option<f64>,
    /// per-check tolerances keyed by check label
    pub tolerances: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub samples: Option<usize>,
    pub poly: Option<String>,
    pub from: Option<i32>,
    pub to: Option<i32>,
    pub sector: Option<String>,
    pub m: Option<i32>,
    pub mass: Option<f64>,
    pub closure: Option<Closure>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub rate: Option<f64>,
    pub levels: Option<usize>,
    pub alpha: Option<[f64; 2]>,
    pub beta: Option<[f64; 2]>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::ConfigRead { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| CliError::ConfigParse { path: path.into(), source })
    }

    fn overlay(&mut self, common: &CommonArgs, command: &Command) -> Result<(), CliError> {
        if let Some(q) = &common.q {
            self.q = Some(QSpec::Text(q.clone()));
        }
        if let Some(w) = &common.window {
            self.window = Some(parse_window(w)?);
        }
        set(&mut self.out, common.out.clone());
        set(&mut self.tol, common.tol);
        set(&mut self.seed, common.seed);
        match command {
            Command::VerifyAlgebra(a) | Command::Leibniz(a) => set(&mut self.samples, a.samples),
            Command::Integrate(a) => {
                set(&mut self.poly, a.poly.clone());
                set(&mut self.from, a.from);
                set(&mut self.to, a.to);
                set(&mut self.sector, a.sector.clone());
            }
            Command::SpecialTables => {}
            Command::Fourier(a) => set(&mut self.m, a.m),
            Command::Spectrum(a) => {
                set(&mut self.mass, a.mass);
                if let Some(c) = &a.closure {
                    self.closure = Some(parse_closure(c)?);
                }
            }
            Command::Evolve(a) => {
                set(&mut self.mass, a.mass);
                set(&mut self.dt, a.dt);
                set(&mut self.steps, a.steps);
            }
            Command::Gauge(a) => {
                set(&mut self.samples, a.samples);
                set(&mut self.dt, a.dt);
                set(&mut self.rate, a.rate);
            }
            Command::Oscillator(a) => set(&mut self.levels, a.levels),
        }
        Ok(())
    }
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

fn parse_window(text: &str) -> Result<(i32, i32), CliError> {
    let bad = || CliError::Config(format!("window must be N_MIN,N_MAX, got {text:?}"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_closure(text: &str) -> Result<Closure, CliError> {
    serde_json::from_value(serde_json::Value::String(text.to_string()))
        .map_err(|_| CliError::Config(format!("unknown closure {text:?}")))
}

fn parse_sector(text: &str) -> Result<Sector, CliError> {
    match text.to_ascii_lowercase().as_str() {
        "plus" | "+" => Ok(Sector::Plus),
        "minus" | "-" => Ok(Sector::Minus),
        _ => Err(CliError::Config(format!("unknown sector {text:?}"))),
    }
}

/// The deformation parameter with the arithmetic it selects.
#[derive(Clone, Debug, PartialEq)]
pub enum QValue {
    Float(f64),
    Exact(BigRational),
}

impl QValue {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let text = text.trim();
        let q = if text.contains('/') {
            QValue::Exact(parse_rational(text).ok_or_else(|| CliError::Config(format!("bad fraction {text:?}")))?)
        } else {
            QValue::Float(text.parse().map_err(|_| CliError::Config(format!("bad number {text:?}")))?)
        };
        if !(q.as_f64() > 1.0) {
            return Err(CliError::Config(format!("q must exceed 1, got {text}")));
        }
        Ok(q)
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            QValue::Float(v) => *v,
            QValue::Exact(r) => rational_to_f64(r),
        }
    }

    fn label(&self) -> String {
        match self {
            QValue::Float(v) => v.to_string(),
            QValue::Exact(r) => crate::ring::format_rational(r),
        }
    }
}

/// One residual against its tolerance.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub label: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub q: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Resolved settings shared by the experiments.
struct Run {
    cfg: ExperimentConfig,
    q: QValue,
    seed: u64,
    out: PathBuf,
    checks: Vec<Check>,
}

impl Run {
    fn check(&mut self, label: &str, residual: f64, default_tol: f64) {
        let tolerance = self.cfg.tolerances.get(label).copied().or(self.cfg.tol).unwrap_or(default_tol);
        let pass = residual <= tolerance;
        self.checks.push(Check { label: label.to_string(), residual, tolerance, pass });
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn window(&self, default: (i32, i32), min_sites: i32) -> Result<(i32, i32), CliError> {
        let (lo, hi) = self.cfg.window.unwrap_or(default);
        if hi - lo + 1 < min_sites {
            return Err(CliError::Config(format!("window [{lo}, {hi}] needs at least {min_sites} sites")));
        }
        Ok((lo, hi))
    }

    fn sectors(&self) -> Result<Vec<Sector>, CliError> {
        match &self.cfg.sectors {
            None => Ok(vec![Sector::Plus, Sector::Minus]),
            Some(v) if v.is_empty() => Err(CliError::Config("sectors must not be empty".into())),
            Some(v) => v.iter().map(|s| parse_sector(s)).collect(),
        }
    }

    fn float_q(&self) -> f64 {
        self.q.as_f64()
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.out.join(name);
        fs::create_dir_all(&self.out)
            .and_then(|_| fs::write(&path, bytes))
            .map_err(|source| CliError::Write { path, source })
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(header).map_err(experiment)?;
    for r in rows {
        wr.write_record(&r).map_err(experiment)?;
    }
    wr.into_inner().map_err(experiment)
}

/// Parses `args` (program name first), runs the experiment and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(report) if report.passed() => 0,
        Ok(_) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "qcalc: {e}");
            2
        }
    }
}

/// Runs a parsed command line, printing results and writing artifacts.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<Report, CliError> {
    let mut cfg = match &cli.common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.overlay(&cli.common, &cli.command)?;
    let default_q = match cli.command {
        Command::VerifyAlgebra(_) | Command::Leibniz(_) => "3/2",
        _ => "2",
    };
    let q = match &cfg.q {
        None => QValue::parse(default_q)?,
        Some(QSpec::Text(t)) => QValue::parse(t)?,
        Some(QSpec::Number(v)) => QValue::parse(&v.to_string())?,
    };
    if let Some(t) = cfg.tol {
        if !(t >= 0.0) {
            return Err(CliError::Config(format!("tolerance must be non-negative, got {t}")));
        }
    }
    let mut run = Run {
        seed: cfg.seed.unwrap_or(1),
        out: cfg.out.clone().unwrap_or_else(|| PathBuf::from("qcalc-out")),
        cfg,
        q,
        checks: Vec::new(),
    };
    let (name, value) = match &cli.command {
        Command::VerifyAlgebra(_) => ("verify-algebra", verify_algebra(&mut run)?),
        Command::Leibniz(_) => ("leibniz", leibniz(&mut run)?),
        Command::Integrate(_) => ("integrate", Some(integrate(&mut run)?)),
        Command::SpecialTables => ("special-tables", special_tables(&mut run)?),
        Command::Fourier(_) => ("fourier", fourier(&mut run)?),
        Command::Spectrum(_) => ("spectrum", spectrum(&mut run)?),
        Command::Evolve(_) => ("evolve", evolve_cmd(&mut run)?),
        Command::Gauge(_) => ("gauge", gauge(&mut run)?),
        Command::Oscillator(_) => ("oscillator", oscillator(&mut run, stdout)?),
    };
    let report = Report { command: name.into(), q: run.q.label(), seed: run.seed, value, checks: run.checks.clone() };
    let json = serde_json::to_vec_pretty(&report).map_err(experiment)?;
    run.write("report.json", &json)?;
    print_report(&report, stdout);
    Ok(report)
}

fn print_report(report: &Report, out: &mut dyn Write) {
    if let Some(v) = &report.value {
        let _ = writeln!(out, "{v}");
    }
    for c in &report.checks {
        let status = if c.pass { "pass" } else { "FAIL" };
        let _ = writeln!(out, "{status}  {:<40} residual {:.3e}  tol {:.1e}", c.label, c.residual, c.tolerance);
    }
    let ok = report.checks.iter().filter(|c| c.pass).count();
    let _ = writeln!(out, "{}: {ok}/{} checks passed", report.command, report.checks.len());
}

fn exact_ctx(q: &BigRational) -> Result<QContext<ExactComplex>, CliError> {
    QContext::new(ExactComplex::from_rational(q, &BigRational::from_integer(0.into()))).map_err(experiment)
}

fn count(flags: impl IntoIterator<Item = bool>) -> f64 {
    flags.into_iter().filter(|ok| !ok).count() as f64
}

fn verify_algebra(run: &mut Run) -> Result<Option<String>, CliError> {
    for r in relation_checks() {
        run.check(r.label, r.residual.len() as f64, 0.0);
    }
    let samples = run.cfg.samples.unwrap_or(200);
    let mut rng = run.rng();
    let (mut assoc, mut invol, mut anti) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..samples {
        let a = random_element(&mut rng, 3, 2);
        let b = random_element(&mut rng, 3, 2);
        let c = random_element(&mut rng, 3, 2);
        assoc.push(&(&a * &b) * &c == &a * &(&b * &c));
        invol.push(a.bar().bar().reduce() == a.reduce());
        anti.push((&a * &b).bar().reduce() == (&b.bar() * &a.bar()).reduce());
    }
    run.check("associativity", count(assoc), 0.0);
    run.check("bar is an involution", count(invol), 0.0);
    run.check("bar reverses products", count(anti), 0.0);

    let formal = QContext::formal();
    let mut formal_ok = Vec::new();
    let mut at_q: f64 = 0.0;
    for n in -10..=10 {
        let (h, _, j) = AlgebraElement::extract_nabla_l(&LaurentPoly::x_pow(n)).map_err(experiment)?;
        formal_ok.push(h == LaurentPoly::monomial(n - 1, formal.q_number(n)));
        formal_ok.push(j == LaurentPoly::monomial(n, formal.q_pow(-n)));
        let coeff = h.coeff(n - 1);
        at_q = at_q.max(match &run.q {
            QValue::Exact(q) => {
                let ctx = exact_ctx(q)?;
                if coeff.specialize(q) == Some(ctx.q_number(n)) { 0.0 } else { 1.0 }
            }
            QValue::Float(q) => {
                let want = QContext::float(*q).map_err(experiment)?.q_number(n);
                (coeff.evaluate(q.sqrt()) - want).norm() / want.norm().max(1.0)
            }
        });
    }
    run.check("derivative from reordering", count(formal_ok), 0.0);
    let tol = if matches!(run.q, QValue::Exact(_)) { 0.0 } else { 1e-12 };
    run.check("derivative from reordering at q", at_q, tol);
    Ok(None)
}

fn random_poly<C: Field, R: Rng>(rng: &mut R) -> LaurentPoly<C> {
    let terms = rng.gen_range(1..=4);
    LaurentPoly::from_terms((0..terms).map(|_| {
        let re = C::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5));
        let im = C::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5));
        (rng.gen_range(-5..=5), re + C::imag_unit() * im)
    }))
}

fn size<C: Field>(p: &LaurentPoly<C>) -> f64 {
    p.terms().map(|(_, c)| c.magnitude()).fold(0.0, f64::max)
}

/// Largest residual relative to the size of the expression it was taken from.
fn rel<C: Field>(residual: &LaurentPoly<C>, scale: &LaurentPoly<C>) -> f64 {
    size(residual) / size(scale).max(1.0)
}

fn leibniz_suite<C: Field>(ctx: &QContext<C>, run: &mut Run, samples: usize) {
    let mut rng = run.rng();
    let mut worst = [0.0f64; 7];
    for i in 0..samples {
        let f: LaurentPoly<C> = random_poly(&mut rng);
        let g: LaurentPoly<C> = random_poly(&mut rng);
        let fg = nabla(ctx, &(&f * &g));
        let [r1, r2] = check_leibniz(ctx, &f, &g);
        worst[0] = worst[0].max(rel(&r1, &fg));
        worst[1] = worst[1].max(rel(&r2, &fg));
        let agree = coproduct_first(ctx, &f, &g) - coproduct_second(ctx, &f, &g);
        worst[2] = worst[2].max(rel(&agree, &fg));
        worst[3] = worst[3].max(rel(&morphism_residual(ctx, &f), &f));
        worst[4] = worst[4].max(rel(&(nabla(ctx, &f) - nabla_by_scaling(ctx, &f)), &f));
        // kernel: constants are annihilated and nothing else is
        let c = LaurentPoly::constant(C::from_ratio(rng.gen_range(-9..=9), 7));
        let shifted = nabla(ctx, &(&f + &c)) - nabla(ctx, &f);
        let non_constant = f.terms().any(|(n, _)| n != 0);
        let kernel_ok = size(&shifted) == 0.0 && (nabla(ctx, &f).is_zero() != non_constant);
        worst[5] = worst[5].max(if kernel_ok { 0.0 } else { 1.0 });
        // image: x⁻¹ never appears in a derivative
        worst[6] = worst[6].max(nabla(ctx, &f).coeff(-1).magnitude());
        if i % 10 == 0 {
            for b in -1..=1 {
                for v in [LeibnizVariant::A, LeibnizVariant::B] {
                    let r = check_form_leibniz(ctx, &f, &g, b, v);
                    worst[0] = worst[0].max(rel(&r, &fg));
                }
            }
        }
    }
    let tol = if C::is_exact() { 0.0 } else { 1e-12 };
    let labels = [
        "product rule, first coproduct",
        "product rule, second coproduct",
        "coproducts agree",
        "scaling morphism",
        "derivative as scaling difference",
        "kernel of the derivative",
        "image misses x^-1",
    ];
    for (label, r) in labels.iter().zip(worst) {
        run.check(label, r, tol);
    }
}

fn leibniz(run: &mut Run) -> Result<Option<String>, CliError> {
    let samples = run.cfg.samples.unwrap_or(500);
    match run.q.clone() {
        QValue::Exact(q) => {
            let ctx = exact_ctx(&q)?;
            leibniz_suite(&ctx, run, samples);
        }
        QValue::Float(q) => {
            let ctx = QContext::float(q).map_err(experiment)?;
            leibniz_suite(&ctx, run, samples);
        }
    }
    Ok(None)
}

fn plain_text<C: CoeffText>(v: &C) -> String {
    let t = v.coeff_text();
    match t.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        Some(inner) => inner.to_string(),
        None => t,
    }
}

fn integrate_with<C: Field + CoeffText>(ctx: &QContext<C>, run: &mut Run) -> Result<String, CliError> {
    let text = run.cfg.poly.clone().unwrap_or_else(|| "x".into());
    let poly: LaurentPoly<C> = parse_laurent(&text).map_err(|e| CliError::Config(format!("bad polynomial: {e}")))?;
    let (from, to) = (run.cfg.from.unwrap_or(0), run.cfg.to.unwrap_or(2));
    let sector = parse_sector(run.cfg.sector.as_deref().unwrap_or("plus"))?;
    let trace = definite_integral(ctx, &poly, from, to, sector).map_err(|e| CliError::Config(e.to_string()))?;
    let closed = definite_integral_closed_form(ctx, &poly, from, to, sector).map_err(experiment)?;
    let r = (trace.clone() - closed).magnitude() / trace.magnitude().max(1.0);
    run.check("trace formula against antiderivative", r, if C::is_exact() { 0.0 } else { 1e-12 });
    Ok(plain_text(&trace))
}

fn integrate(run: &mut Run) -> Result<String, CliError> {
    match run.q.clone() {
        QValue::Exact(q) => {
            let ctx = exact_ctx(&q)?;
            integrate_with(&ctx, run)
        }
        QValue::Float(q) => {
            let ctx = QContext::float(q).map_err(experiment)?;
            integrate_with(&ctx, run)
        }
    }
}

fn special_tables(run: &mut Run) -> Result<Option<String>, CliError> {
    let sp = QSpecial::new(run.float_q()).map_err(|e| CliError::Config(e.to_string()))?;
    let (lo, hi) = run.window((-10, 10), 1)?;
    let q = sp.q();
    let rows = (lo..=hi).map(|j| {
        vec![
            j.to_string(),
            q.powi(2 * j).to_string(),
            sp.on_even_lattice(Trig::Cos, j).to_string(),
            sp.on_even_lattice(Trig::Sin, j).to_string(),
        ]
    });
    run.write("trig_table.csv", &csv_bytes(&["j", "z", "cos_q", "sin_q"], rows)?)?;

    let factorial = match &run.q {
        QValue::Exact(r) => {
            let ctx = exact_ctx(r)?;
            (0..=12).map(|n| pochhammer_factorial_residual(&ctx, n).magnitude()).fold(0.0, f64::max)
        }
        QValue::Float(v) => {
            let ctx = QContext::float(*v).map_err(experiment)?;
            (0..=12).map(|n| pochhammer_factorial_residual(&ctx, n).norm()).fold(0.0, f64::max)
        }
    };
    run.check("pochhammer against q-factorial", factorial, if matches!(run.q, QValue::Exact(_)) { 0.0 } else { 1e-12 });
    let r = sp.relation_residuals(6);
    run.check("sin_q difference relation", r.sin_difference, 1e-10);
    run.check("cos_q difference relation", r.cos_difference, 1e-10);
    run.check("derivative of cos_q(xy)", r.derivative, 1e-10);
    run.check("second derivative eigenvalue", r.eigenvalue, 1e-9);
    for (kind, name) in [(Trig::Cos, "cos_q"), (Trig::Sin, "sin_q")] {
        let gram = sp.gram_matrix(kind, -6, 6, 60);
        let d = sp.gram_deviation(&gram, -6);
        run.check(&format!("{name} orthogonality, off-diagonal"), d.off_diagonal, 1e-10);
        run.check(&format!("{name} orthogonality, diagonal"), d.diagonal, 1e-10);
    }
    let g = sp.gauss_sum_constants(1.0);
    let dev = (g.tilde_c0_direct - g.tilde_c0_product).abs().max((g.c0_prime_direct - g.c0_prime_product).abs());
    run.check("gauss sums against triple products", dev, 1e-12);
    Ok(None)
}

fn fourier(run: &mut Run) -> Result<Option<String>, CliError> {
    let qf = QFourier::new(run.float_q()).map_err(|e| CliError::Config(e.to_string()))?;
    let q = qf.special().q();
    let (lo, hi) = run.window((-40, 60), 20)?;
    let m = run.cfg.m.unwrap_or(0);
    let mut rng = run.rng();
    let (mut iso, mut back) = (0.0f64, 0.0f64);
    let mid = (lo + hi) / 2;
    for family in [Family::Even, Family::Odd] {
        let vals: Vec<Complex64> = (lo..=hi)
            .map(|k| {
                if (k - mid).abs() <= 6 {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let f = SublatticeSeq::new(family, lo, vals);
        for kind in [Trig::Cos, Trig::Sin] {
            let g = qf.transform(kind, &f, -hi, -lo).map_err(experiment)?.seq;
            let twice = qf.transform(kind, &g, lo, hi).map_err(experiment)?.seq;
            back = back.max(twice.max_abs_diff(&f));
            let (a, b) = (f.weighted_norm_sq(q), g.weighted_norm_sq(q));
            iso = iso.max((a - b).abs() / a);
        }
    }
    run.check("transform is an isometry", iso, 1e-10);
    run.check("double transform is the identity", back, 1e-8);

    let k_out = 10;
    let st = qf.qft_step(m, lo, hi, k_out).map_err(|e| CliError::Config(e.to_string()))?;
    run.check("step transform closed form", st.max_deviation(), 1e-8);
    let rows = st.computed.iter().zip(&st.closed).map(|((k, a), (_, b))| vec![k.to_string(), a.to_string(), b.to_string()]);
    run.write("step_transform.csv", &csv_bytes(&["k", "computed", "closed_form"], rows)?)?;
    let rt = qf.step_round_trip(m, lo, hi, k_out).map_err(experiment)?;
    let expect = |n: i32| if n <= m { 1.0 } else { 0.0 };
    let dev = rt.iter().map(|(n, v)| (v - expect(*n)).abs()).fold(0.0, f64::max);
    run.check("step round trip", dev, 1e-8);
    let rows = rt.iter().map(|(n, v)| vec![n.to_string(), v.to_string(), expect(*n).to_string()]);
    run.write("step_round_trip.csv", &csv_bytes(&["n", "value", "expected"], rows)?)?;
    Ok(None)
}

fn spectrum(run: &mut Run) -> Result<Option<String>, CliError> {
    let (lo, hi) = run.window((-12, 12), Representation::MIN_SITES as i32)?;
    let grid = LatticeGrid::new(run.float_q(), lo, hi, &run.sectors()?).map_err(|e| CliError::Config(e.to_string()))?;
    let mass = run.cfg.mass.unwrap_or(1.0);
    let closure = run.cfg.closure.unwrap_or_default();
    let h = Hamiltonian::free(&grid, mass, closure).map_err(|e| CliError::Config(e.to_string()))?;
    let rows = h.eigenvalues().into_iter().enumerate().map(|(i, e)| vec![i.to_string(), e.to_string()]);
    run.write("eigenvalues.csv", &csv_bytes(&["index", "energy"], rows)?)?;
    let sector = grid.sectors()[0];
    let mut table = Vec::new();
    let mut worst: f64 = 0.0;
    for (basis, name) in [(Basis::C, "C"), (Basis::S, "S")] {
        for st in stationary_states(&grid, mass, basis, sector, -3..=3).map_err(experiment)? {
            let r = eigen_residual(&st, mass, 2);
            worst = worst.max(r);
            table.push(vec![name.to_string(), st.label.to_string(), st.energy.to_string(), r.to_string()]);
        }
    }
    run.write("stationary_states.csv", &csv_bytes(&["basis", "label", "energy", "residual"], table)?)?;
    run.check("second derivative eigenvalue table", worst, 1e-6);
    let rep = Representation::build(&grid).map_err(experiment)?;
    run.check("algebra relations on the lattice", rep.algebra_residual(), 1e-12);
    run.check("momentum as scaled derivative", rep.momentum_residual(), 1e-12);
    run.check("adjoint of the shifted derivative", rep.adjoint_residual(), 1e-12);
    Ok(None)
}

fn random_fn(grid: &LatticeGrid, rng: &mut ChaCha8Rng, support: i32) -> LatticeFn {
    let vals: Vec<Complex64> =
        (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    LatticeFn::from_sites(grid, |s, n| if n.abs() <= support { vals[grid.index(s, n).unwrap()] } else { Complex64::new(0.0, 0.0) })
}

fn evolve_cmd(run: &mut Run) -> Result<Option<String>, CliError> {
    let (lo, hi) = run.window((-12, 12), Representation::MIN_SITES as i32)?;
    let grid = LatticeGrid::new(run.float_q(), lo, hi, &run.sectors()?).map_err(|e| CliError::Config(e.to_string()))?;
    let mass = run.cfg.mass.unwrap_or(1.0);
    let dt = run.cfg.dt.unwrap_or(1e-3);
    let steps = run.cfg.steps.unwrap_or(20).max(1);
    if !(dt > 0.0) {
        return Err(CliError::Config(format!("dt must be positive, got {dt}")));
    }
    let h = Hamiltonian::free(&grid, mass, Closure::EvenSeries).map_err(|e| CliError::Config(e.to_string()))?;
    let sector = grid.sectors()[0];
    let sts = stationary_states(&grid, mass, Basis::C, sector, -1..=1).map_err(experiment)?;
    let c1 = &sts[2].psi;
    let moved = h.propagate(c1, 1.0);
    let drift = moved.zip_with(c1, |a, b| Complex64::new(a.norm() - b.norm(), 0.0)).max_abs();
    run.check("stationary state keeps its modulus", drift, 1e-6);
    let psi = c1 + &sts[0].psi.scale(Complex64::new(0.0, 1.0));
    run.check("continuity equation", continuity_residual(&h, &psi, 0.5, dt, 2).map_err(experiment)?, 1e-6);
    let (n0, e0) = (h.norm_sq(&psi), h.energy(&psi));
    let state = evolve(EvolutionState::new(psi), &h, 1.0 / steps as f64, steps).map_err(experiment)?;
    run.check("norm conservation", (h.norm_sq(&state.psi) - n0).abs() / n0, 1e-10);
    run.check("energy conservation", (h.energy(&state.psi) - e0).abs() / e0.abs().max(1.0), 1e-10);
    let mut buf = Vec::new();
    state.write_csv(&mut buf).map_err(experiment)?;
    run.write("evolution.csv", &buf)?;
    let mut rng = run.rng();
    let support = (hi - lo) / 2 - 4;
    let centre = (lo + hi) / 2;
    let shifted = |n: i32| n - centre;
    let vals = random_fn(&grid, &mut rng, i32::MAX);
    let compact = LatticeFn::from_sites(&grid, |s, n| {
        if shifted(n).abs() <= support { vals.value(s, n).unwrap_or_default() } else { Complex64::new(0.0, 0.0) }
    });
    let noether = check_noether(&vals, mass, 1.0).map_err(experiment)?;
    run.check("noether current equals probability current", noether.current, 1e-10);
    run.check("energy form", energy_form_residual(&compact).map_err(experiment)?.norm(), 1e-10);
    Ok(None)
}

fn gauge(run: &mut Run) -> Result<Option<String>, CliError> {
    let (lo, hi) = run.window((-5, 5), 5)?;
    let grid = LatticeGrid::new(run.float_q(), lo, hi, &run.sectors()?).map_err(|e| CliError::Config(e.to_string()))?;
    let samples = run.cfg.samples.unwrap_or(100);
    let dt = run.cfg.dt.unwrap_or(1e-3);
    let rate = run.cfg.rate.unwrap_or(0.3);
    let mut rng = run.rng();
    let sc = Scenario::random(&grid, &mut rng, dt, rate);
    let (mut d_cov, mut t_cov, mut f_cov) = (0.0f64, 0.0f64, 0.0f64);
    let (mut de, mut leib, mut shifts) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let e = Einbein::random(&grid, &mut rng);
        let psi = random_fn(&grid, &mut rng, i32::MAX);
        let chi = random_fn(&grid, &mut rng, i32::MAX);
        let a0 = GaugeField::random(&grid, &mut rng, 3.0);
        let a1 = GaugeField::random(&grid, &mut rng, 1.0);
        let lhs = e.transform(&a0).derivative(&transform_matter(&psi, &a0));
        d_cov = d_cov.max((&lhs - &transform_matter(&e.derivative(&psi), &a0)).max_abs());
        let (t, f) = curvature_covariance(&sc, &a0, &a1);
        t_cov = t_cov.max(t);
        f_cov = f_cov.max(f);
        de = de.max(e.derivative_field(e.field()).max_abs());
        leib = leib.max(leibniz_residual(&e, &Einbein::random(&grid, &mut rng), &psi, &chi));
        shifts = shifts.max((&e.shift(&e.shift_inv(&psi)) - &psi).max_abs());
        shifts = shifts.max((&e.shift_inv(&e.shift(&psi)) - &psi).max_abs());
    }
    run.check("covariance of the derivative", d_cov, 1e-10);
    run.check("covariance of the torsion", t_cov, 1e-10);
    run.check("covariance of the curvature", f_cov, 1e-10);
    run.check("einbein is covariantly constant", de, 1e-12);
    run.check("product rule for einbeins", leib, 1e-12);
    run.check("shift and inverse shift", shifts, 1e-12);
    run.check("commutator identity", commutator_residual(&sc.slices, &sc.omega, sc.psi_refs()), 1e-6);
    run.check("mixed commutator identity", mixed_commutator_residual(&sc.slices, &sc.omega, sc.psi_refs()), 1e-6);
    let k = curvature(&sc.slices, &sc.omega);
    let rows = k.t.valid_sites().filter_map(|(s, n, t)| {
        let f = k.f.value(s, n)?;
        let cf = k.cal_f.value(s, n)?;
        Some(vec![(s.sign() as i32).to_string(), n.to_string(), t.norm().to_string(), f.norm().to_string(), cf.norm().to_string()])
    });
    run.write("curvature.csv", &csv_bytes(&["sigma", "n", "abs_t", "abs_f", "abs_cal_f"], rows)?)?;
    Ok(None)
}

fn oscillator(run: &mut Run, stdout: &mut dyn Write) -> Result<Option<String>, CliError> {
    let q = run.float_q();
    let (lo, hi) = run.window((-8, 10), 12)?;
    let levels = run.cfg.levels.unwrap_or(4).max(2);
    let grid = LatticeGrid::new(q, lo, hi, &[Sector::Plus]).map_err(|e| CliError::Config(e.to_string()))?;
    let mut params = LadderParams::normalized(q);
    if let Some([re, im]) = run.cfg.alpha {
        params.alpha = Complex64::new(re, im);
    }
    if let Some([re, im]) = run.cfg.beta {
        params.beta = Complex64::new(re, im);
    }
    let pair = LadderPair::build(&grid, params).map_err(|e| CliError::Config(e.to_string()))?;
    let unit = (pair.commutator_constant() - 1.0).abs();
    run.check("commutator constant is one", unit, 1e-12);
    run.check("ladder commutator", pair.commutator_residual(), 1e-10);
    run.check("hamiltonian expansion", pair.hamiltonian_residual(), 1e-12);
    run.check("position commutator", pair.xi_commutator_residual(), 1e-10);
    let psi0 = pair.ground_state().map_err(experiment)?;
    run.check("annihilator kills ground state", pair.annihilation_residual(&psi0), 1e-8);
    run.check("ground state exponential form", pair.exponential_form_deviation(&psi0).map_err(experiment)?, 1e-8);
    run.check("creator on ground state", pair.creation_residual(&psi0), 1e-8);
    let hermite = pair.hermite_residuals(levels.min(7) - 1).map_err(experiment)?;
    run.check("excited states as q-Hermite", hermite.into_iter().fold(0.0, f64::max), 1e-6);
    let energies = pair.levels(levels).map_err(experiment)?;
    run.check("ground level", energies[0].abs(), 1e-6);
    let ladder = energies.windows(2).map(|w| (w[1] - (w[0] / (q * q) + 1.0)).abs()).fold(0.0, f64::max);
    run.check("ladder spectrum", ladder, 1e-6);

    let _ = writeln!(stdout, "{:>3}  {:>22}  {:>22}", "n", "E_n", "q^-2 E_(n-1) + 1");
    let mut rows = Vec::new();
    for (n, e) in energies.iter().enumerate() {
        let pred = if n == 0 { 0.0 } else { energies[n - 1] / (q * q) + 1.0 };
        let _ = writeln!(stdout, "{n:>3}  {e:>22.15}  {pred:>22.15}");
        rows.push(vec![n.to_string(), e.to_string(), pred.to_string()]);
    }
    run.write("levels.csv", &csv_bytes(&["n", "energy", "ladder_prediction"], rows)?)?;
    let mut buf = Vec::new();
    psi0.write_csv(&mut buf).map_err(experiment)?;
    run.write("ground_state.csv", &buf)?;

    let gp = GaussianPair::new(q, 1.0, -12, 12).map_err(experiment)?;
    let rep = gp.compare(-6, 1.0).map_err(experiment)?;
    run.check("gaussian transform, even points", rep.even_deviation, 1e-8);
    run.check("gaussian transform, odd points", rep.odd_deviation, 1e-8);
    let k = rep.constants;
    let dev = (k.tilde_c0_direct - k.tilde_c0_product).abs().max((k.c0_prime_direct - k.c0_prime_product).abs());
    run.check("gauss sums against triple products", dev, 1e-12);
    let pair_json = serde_json::json!({
        "even_deviation": rep.even_deviation,
        "odd_deviation": rep.odd_deviation,
        "tilde_c0_direct": k.tilde_c0_direct,
        "tilde_c0_product": k.tilde_c0_product,
        "c0_prime_direct": k.c0_prime_direct,
        "c0_prime_product": k.c0_prime_product,
    });
    run.write("fourier_pair.json", &serde_json::to_vec_pretty(&pair_json).map_err(experiment)?)?;
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_backend_selection() {
        assert!(matches!(QValue::parse("3/2").unwrap(), QValue::Exact(_)));
        assert_eq!(QValue::parse("2").unwrap(), QValue::Float(2.0));
        assert!(QValue::parse("1").is_err());
        assert!(QValue::parse("1/2").is_err());
        assert!(QValue::parse("abc").is_err());
    }

    #[test]
    fn window_parsing() {
        assert_eq!(parse_window("-8,10").unwrap(), (-8, 10));
        assert!(parse_window("8").is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"qq": 2}"#);
        assert!(err.is_err());
        let ok: ExperimentConfig = serde_json::from_str(r#"{"q": "3/2", "window": [-4, 4], "closure": "dirichlet"}"#).unwrap();
        assert_eq!(ok.q, Some(QSpec::Text("3/2".into())));
        assert_eq!(ok.closure, Some(Closure::Dirichlet));
    }
}
