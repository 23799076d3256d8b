//! Argument definitions and dispatch for the `hofa` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand};
use hofa_core::decompose::{regularize, FourierOracle, Growth, QuadraticPhaseOracle, RegularizeOptions};
use hofa_core::forms::{
    cs_complexity, leibman_dim, pairwise_independent, power_flag, top_power_independence, LinearFormSystem,
};
use hofa_core::gowers::{gowers_norm_with, GowersOptions, Method};
use hofa_core::nilgroup::{irrationality_score, FilteredGroup};
use hofa_core::orbits::{counting_residual, equidist_witness, LeibmanGroup, LipschitzFunction, Region};
use hofa_core::patterns::{
    bhk_verify_synthetic, gvn_check, gw_statement_check, pattern_report, AverageDomain, Construction,
};
use hofa_core::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::acceptance;
use crate::config::merge_layers;
use crate::error::{CliError, CliResult, EXIT_CHECK_FAILED, EXIT_OK};
use crate::io::{self, load_function, load_group, parse_sequence, write_text};
use crate::report;

#[derive(Debug, Parser)]
#[command(name = "hofa", version, about = "Computational higher-order Fourier analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
    /// Report file (JSON); standard output when absent.
    #[arg(long, global = true, visible_alias = "report")]
    pub out: Option<PathBuf>,
    /// key = value defaults, below flags and HOFA_* variables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel kernels.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Omit timing so equal inputs give byte-identical reports.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cmd {
    /// Gowers U^k norm of a sampled function.
    Gowers(GowersArgs),
    /// Multilinear average of a form system, with its von Neumann check.
    Count(CountArgs),
    /// Cauchy–Schwarz complexity and independence tests of a form system.
    Csc(FormsArgs),
    /// Power flag of a form system.
    Flag(FlagArgs),
    /// Dimension of the Leibman group of a form system in a filtered group.
    Leibman(LeibmanArgs),
    /// Equidistribution test of a polynomial orbit, with a witness character.
    Equidist(EquidistArgs),
    /// Empirical average of F along a form-system orbit against its Haar integral.
    CountLemma(CountLemmaArgs),
    /// Regularity decomposition f = f_nil + f_sml + f_unf.
    Decompose(DecomposeArgs),
    /// Weighted progression counts on synthetic sets.
    Bhk(BhkArgs),
    /// Pattern averages against uniformity for a phase family.
    GwCheck(GwArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct FunctionArgs {
    /// Function file (.json or .csv).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Expression such as "e(1/7*n^2)" (needs --n).
    #[arg(long)]
    pub expr: Option<String>,
    /// interval ([N] = 1..N) or cyclic (Z/NZ).
    #[arg(long, default_value = "interval")]
    pub domain: String,
    #[arg(long, visible_alias = "N")]
    pub n: Option<usize>,
}

impl FunctionArgs {
    fn load(&self) -> CliResult<hofa_core::funcspace::SampledFunction> {
        load_function(self.input.as_deref(), self.expr.as_deref(), &self.domain, self.n)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GowersArgs {
    #[command(flatten)]
    pub f: FunctionArgs,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Cyclic size for interval norms: AUTO (2^k N) or an integer.
    #[arg(long, value_parser = parse_ntilde)]
    pub ntilde: Option<Ntilde>,
    /// auto, direct or fft.
    #[arg(long, default_value = "auto")]
    pub method: String,
    #[arg(long)]
    pub allow_large_k: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CountArgs {
    /// Forms such as "n; n+d; n+2d".
    #[arg(long)]
    pub forms: String,
    /// One function file per form, or a single file used for every form.
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// One expression per form, or a single one used for every form.
    #[arg(long)]
    pub expr: Vec<String>,
    #[arg(long, default_value = "cyclic")]
    pub domain: String,
    #[arg(long, visible_alias = "N")]
    pub n: Option<usize>,
    /// Interval ranges "lo:hi,lo:hi" per variable (default [1,N]^D).
    #[arg(long)]
    pub ranges: Option<String>,
    /// CSV file for the per-difference profile.
    #[arg(long)]
    pub profile_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FormsArgs {
    #[arg(long)]
    pub forms: String,
    /// Degree for the top-power independence test.
    #[arg(long)]
    pub s: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct FlagArgs {
    #[arg(long)]
    pub forms: String,
    #[arg(long, default_value_t = 2)]
    pub s: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct LeibmanArgs {
    #[arg(long)]
    pub forms: String,
    /// Built-in name (heisenberg, circle, torus(m), torus(m,s)) or group JSON.
    #[arg(long, default_value = "heisenberg")]
    pub group: String,
}

#[derive(Debug, Args, Serialize)]
pub struct EquidistArgs {
    #[arg(long, default_value = "heisenberg")]
    pub group: String,
    /// Taylor coefficients "g0; g1; ..." with comma-separated coordinates,
    /// or a sequence JSON file.
    #[arg(long, visible_alias = "seq")]
    pub coeffs: String,
    #[arg(long, visible_alias = "N")]
    pub n: u64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 4)]
    pub max_complexity: u64,
    /// Largest A for the irrationality score.
    #[arg(long, default_value_t = 1000)]
    pub max_a: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct CountLemmaArgs {
    #[arg(long, default_value = "heisenberg")]
    pub group: String,
    /// Taylor coefficients or a sequence JSON file (default: a linear
    /// Heisenberg orbit with horizontal data near (√2−1, √3−1)).
    #[arg(long, visible_alias = "seq", default_value = "0,0,0; 0.41421356237309505,0.7320508075688772,0")]
    pub coeffs: String,
    #[arg(long, default_value = "n; n+d; n+2d")]
    pub forms: String,
    #[arg(long, visible_alias = "N", default_value_t = 2000)]
    pub n: u64,
    /// Monte Carlo samples; scientific notation such as 1e6 is accepted.
    #[arg(long, default_value = "1000000", value_parser = parse_count)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// cos2 or cos2-vertical (Heisenberg only).
    #[arg(long, default_value = "cos2-vertical")]
    pub function: String,
}

#[derive(Debug, Args, Serialize)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub f: FunctionArgs,
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// linear, exp or tower.
    #[arg(long, default_value = "exp")]
    pub growth: String,
    /// Largest number of factor cells.
    #[arg(long, default_value_t = 10_000)]
    pub cap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV with f, f_nil, f_sml and f_unf.
    #[arg(long)]
    pub components_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BhkArgs {
    #[arg(long)]
    pub k: usize,
    /// full, bohr:alpha=A,delta=D or heisenberg:level=L.
    #[arg(long)]
    pub construction: String,
    #[arg(long, visible_alias = "N")]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Cutoff radius (default eps^(1/m)).
    #[arg(long)]
    pub eps_prime: Option<f64>,
    #[arg(long)]
    pub profile_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GwArgs {
    #[arg(long, default_value = "n; n+d; n+2d")]
    pub forms: String,
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    #[arg(long, visible_alias = "N", default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub alpha: f64,
    /// Comma-separated ρ values.
    #[arg(long, default_value = "0,0.2,0.4,0.6,0.8,1")]
    pub rhos: String,
}

#[derive(Debug, Args, Serialize)]
pub struct SelftestArgs {
    /// Criterion numbers to run (default all).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ntilde {
    Auto,
    Fixed(usize),
}

impl Serialize for Ntilde {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Ntilde::Auto => s.serialize_str("AUTO"),
            Ntilde::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

fn parse_ntilde(s: &str) -> Result<Ntilde, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Ntilde::Auto);
    }
    s.parse().map(Ntilde::Fixed).map_err(|_| format!("`{s}` is neither AUTO nor an integer"))
}

/// Nonnegative integer, also written as 1e6 or 2.5e5.
fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= usize::MAX as f64 => Ok(x as usize),
        _ => Err(format!("`{s}` is not a whole number")),
    }
}

/// Outcome of a command: the result object and, if an asserted check
/// failed, the reason.
struct Outcome {
    result: Value,
    failure: Option<String>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome { result, failure: None }
    }
}

fn forms(text: &str) -> CliResult<LinearFormSystem> {
    Ok(LinearFormSystem::parse(text)?)
}

fn parse_ranges(text: &str) -> CliResult<Vec<(i64, i64)>> {
    text.split(',')
        .map(|r| {
            let (a, b) = r.split_once(':').ok_or_else(|| CliError::Input(format!("range `{r}` is not lo:hi")))?;
            let p = |s: &str| s.trim().parse::<i64>().map_err(|_| CliError::Input(format!("bad range bound `{s}`")));
            Ok((p(a)?, p(b)?))
        })
        .collect()
}

fn cmd_gowers(a: &GowersArgs) -> CliResult<Outcome> {
    let f = a.f.load()?;
    let method = match a.method.as_str() {
        "auto" => Method::Auto,
        "direct" => Method::Direct,
        "fft" => Method::FftBase,
        m => return Err(CliError::Input(format!("unknown method `{m}`"))),
    };
    let ntilde = match a.ntilde {
        Some(Ntilde::Fixed(n)) => Some(n),
        _ => None,
    };
    let opts = GowersOptions { ntilde, method, allow_large_k: a.allow_large_k, ..Default::default() };
    let r = gowers_norm_with(&f, a.k, &opts)?;
    Ok(Outcome::ok(json!({ "norm": r.norm, "power": r.power, "k": r.k, "n": f.len(), "clamped": r.clamped })))
}

fn cmd_count(a: &CountArgs) -> CliResult<Outcome> {
    let psi = forms(&a.forms)?;
    let t = psi.t();
    let mut fs = Vec::new();
    for p in &a.input {
        fs.push(io::read_function(p, &a.domain)?);
    }
    for e in &a.expr {
        fs.push(load_function(None, Some(e), &a.domain, a.n)?);
    }
    if fs.len() == 1 {
        fs = vec![fs[0].clone(); t];
    }
    if fs.len() != t {
        return Err(CliError::Input(format!("{} functions given for {t} forms", fs.len())));
    }
    let domain = match (a.domain.as_str(), &a.ranges) {
        ("cyclic", None) => AverageDomain::Cyclic,
        ("cyclic", Some(_)) => return Err(CliError::Input("--ranges applies to interval domains".into())),
        (_, Some(r)) => AverageDomain::Interval { ranges: parse_ranges(r)? },
        (_, None) => AverageDomain::interval_box(psi.d(), fs[0].len()),
    };
    let r = pattern_report(&fs, &psi, &domain)?;
    let g = gvn_check(&fs, &psi, &domain)?;
    if let (Some(path), Some(p)) = (&a.profile_csv, &r.per_difference) {
        write_text(path, &report::profile_csv(p))?;
    }
    let failure = (!g.pass).then(|| format!("|Λ| = {} exceeds min ‖f_i‖ = {} + 1e-6", g.lhs, g.rhs));
    Ok(Outcome { result: json!({ "pattern": report::pattern(&r), "gvn": report::gvn(&g) }), failure })
}

fn cmd_csc(a: &FormsArgs) -> CliResult<Outcome> {
    let psi = forms(&a.forms)?;
    let independent = pairwise_independent(&psi);
    let s = if independent { Some(cs_complexity(&psi)?) } else { None };
    let deg = a.s.or(s).unwrap_or(1);
    Ok(Outcome::ok(json!({
        "system": psi.display(),
        "pairwise_independent": independent,
        "cs_complexity": s,
        "top_power_independence": { "s": deg, "holds": top_power_independence(&psi, deg)? },
    })))
}

fn cmd_flag(a: &FlagArgs) -> CliResult<Outcome> {
    let psi = forms(&a.forms)?;
    Ok(Outcome::ok(report::power_flag(&power_flag(&psi, a.s)?)))
}

fn cmd_leibman(a: &LeibmanArgs) -> CliResult<Outcome> {
    let psi = forms(&a.forms)?;
    let g = load_group(&a.group)?;
    let lg = LeibmanGroup::new(g.clone(), psi)?;
    let dims = g.filtration_dims().to_vec();
    Ok(Outcome::ok(json!({
        "group": g.name,
        "group_filtration": dims,
        "flag": report::power_flag(lg.flag()),
        "leibman_dim": leibman_dim(&lg.flag().dims, &dims)?,
        "normal_form_slots": lg.dim(),
    })))
}

fn cmd_equidist(a: &EquidistArgs) -> CliResult<Outcome> {
    let g = load_group(&a.group)?;
    let seq = parse_sequence(&g, &a.coeffs)?;
    let r = equidist_witness(&seq, a.n, a.delta, a.max_complexity)?;
    let score = irrationality_score(&seq, a.n, a.max_a)?;
    let mut v = report::equidist(&r);
    v["irrationality_score"] = json!(score);
    v["equidistributed"] = json!(r.discrepancy <= a.delta);
    Ok(Outcome::ok(v))
}

/// Π_j cos²(π Σ level-1 coordinates of x_j), optionally with the factor
/// 1 + ½ sin²(πb_1) cos(2πc_1) on the Heisenberg group.
pub fn count_lemma_function(name: &str, group: &FilteredGroup, t: usize) -> CliResult<LipschitzFunction> {
    let dim = group.dim();
    let horiz: Vec<usize> = group.block(1).collect();
    let vertical = match name {
        "cos2" => false,
        "cos2-vertical" if group.name == "heisenberg" => true,
        "cos2-vertical" => return Err(CliError::Input("cos2-vertical needs the Heisenberg group".into())),
        other => return Err(CliError::Input(format!("unknown test function `{other}`"))),
    };
    let pi = std::f64::consts::PI;
    Ok(LipschitzFunction::new(name, 40.0, move |x| {
        let mut v = 1.0;
        for j in 0..t {
            let c = (pi * horiz.iter().map(|&k| x[dim * j + k]).sum::<f64>()).cos();
            v *= c * c;
        }
        if vertical {
            let s = (pi * x[1]).sin();
            v *= 1.0 + 0.5 * s * s * (2.0 * pi * x[2]).cos();
        }
        Complex64::new(v, 0.0)
    }))
}

fn cmd_count_lemma(a: &CountLemmaArgs) -> CliResult<Outcome> {
    let g = load_group(&a.group)?;
    let psi = forms(&a.forms)?;
    let seq = parse_sequence(&g, &a.coeffs)?;
    let f = count_lemma_function(&a.function, &g, psi.t())?;
    let lg = LeibmanGroup::new(g, psi.clone())?;
    let region = Region::cube(psi.d(), a.n)?;
    let r = counting_residual(&f, &seq.to_f64(), &lg, &region, a.samples, a.seed)?;
    Ok(Outcome::ok(report::counting(&r)))
}

fn cmd_decompose(a: &DecomposeArgs) -> CliResult<Outcome> {
    let f = a.f.load()?;
    let opts = RegularizeOptions { growth: Growth::parse(&a.growth)?, cap: a.cap, seed: a.seed };
    let r = match a.s {
        1 => regularize(&f, 1, a.eps, &FourierOracle, &opts),
        2 => regularize(&f, 2, a.eps, &QuadraticPhaseOracle::default(), &opts),
        s => return Err(CliError::Input(format!("no correlation oracle for s = {s} (use 1 or 2)"))),
    };
    let r = match r {
        Ok(r) => r,
        Err(hofa_core::decompose::DecomposeError::BudgetOverflow { partial, cap }) => {
            let mut v = report::decomposition(&partial);
            v["budget_overflow"] = json!({ "cap": cap });
            return Ok(Outcome { result: v, failure: Some(format!("factor complexity exceeded the cap {cap}")) });
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &a.components_csv {
        let text = io::functions_to_csv(&["f", "f_nil", "f_sml", "f_unf"], &[&f, &r.f_nil, &r.f_sml, &r.f_unf])?;
        write_text(path, &text)?;
    }
    let failure = (!r.certificates.all()).then(|| "a decomposition certificate failed".to_string());
    Ok(Outcome { result: report::decomposition(&r), failure })
}

/// `full`, `bohr:alpha=0.618,delta=0.15`, `heisenberg:level=0.4`.
pub fn parse_construction(text: &str) -> CliResult<Construction> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let mut alpha = None;
    let mut delta = None;
    let mut level = None;
    for kv in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Input(format!("`{kv}` is not key=value")))?;
        let x: f64 = v.trim().parse().map_err(|_| CliError::Input(format!("`{v}` is not a number")))?;
        match k.trim() {
            "alpha" => alpha = Some(x),
            "delta" => delta = Some(x),
            "level" => level = Some(x),
            other => return Err(CliError::Input(format!("unknown construction parameter `{other}`"))),
        }
    }
    match kind {
        "full" => Ok(Construction::Full),
        "bohr" => Ok(Construction::Bohr {
            alpha: alpha.ok_or_else(|| CliError::Input("bohr needs alpha".into()))?,
            delta: delta.ok_or_else(|| CliError::Input("bohr needs delta".into()))?,
        }),
        "heisenberg" => Ok(Construction::HeisenbergLevel { level: level.unwrap_or(0.4) }),
        other => Err(CliError::Input(format!("unknown construction `{other}`"))),
    }
}

fn cmd_bhk(a: &BhkArgs) -> CliResult<Outcome> {
    if a.k >= 5 {
        return Err(CliError::Input(
            "k >= 5 is not supported: the weighted lower bound fails for progressions of length 5 or more".into(),
        ));
    }
    let c = parse_construction(&a.construction)?;
    let r = bhk_verify_synthetic(a.k, &c, a.eps, a.n, a.eps_prime)?;
    if let Some(path) = &a.profile_csv {
        let p = hofa_core::patterns::ap_profile(&c.indicator(a.n)?, a.k)?;
        write_text(path, &report::profile_csv(&p))?;
    }
    Ok(Outcome::ok(report::bhk(&r)))
}

fn cmd_gw(a: &GwArgs) -> CliResult<Outcome> {
    let psi = forms(&a.forms)?;
    let rhos: Vec<f64> = a
        .rhos
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Input(format!("bad ρ `{s}`"))))
        .collect::<CliResult<_>>()?;
    let r = gw_statement_check(&psi, a.s, a.n, a.alpha, &rhos)?;
    Ok(Outcome::ok(report::gw(&r)))
}

fn cmd_selftest(a: &SelftestArgs) -> CliResult<Outcome> {
    let results = acceptance::run(&a.only);
    for r in &results {
        eprintln!("{}", r.line());
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    let v = json!({
        "criteria": results.iter().map(|r| json!({ "id": r.id, "name": r.name, "pass": r.pass, "detail": r.detail })).collect::<Vec<_>>(),
        "all_pass": failed.is_empty(),
    });
    let failure = (!failed.is_empty()).then(|| format!("criteria {failed:?} failed"));
    Ok(Outcome { result: v, failure })
}

fn name_of(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Gowers(_) => "gowers",
        Cmd::Count(_) => "count",
        Cmd::Csc(_) => "csc",
        Cmd::Flag(_) => "flag",
        Cmd::Leibman(_) => "leibman",
        Cmd::Equidist(_) => "equidist",
        Cmd::CountLemma(_) => "count-lemma",
        Cmd::Decompose(_) => "decompose",
        Cmd::Bhk(_) => "bhk",
        Cmd::GwCheck(_) => "gw-check",
        Cmd::Selftest(_) => "selftest",
    }
}

fn dispatch(cmd: &Cmd) -> CliResult<Outcome> {
    match cmd {
        Cmd::Gowers(a) => cmd_gowers(a),
        Cmd::Count(a) => cmd_count(a),
        Cmd::Csc(a) => cmd_csc(a),
        Cmd::Flag(a) => cmd_flag(a),
        Cmd::Leibman(a) => cmd_leibman(a),
        Cmd::Equidist(a) => cmd_equidist(a),
        Cmd::CountLemma(a) => cmd_count_lemma(a),
        Cmd::Decompose(a) => cmd_decompose(a),
        Cmd::Bhk(a) => cmd_bhk(a),
        Cmd::GwCheck(a) => cmd_gw(a),
        Cmd::Selftest(a) => cmd_selftest(a),
    }
}

fn emit(out: Option<&Path>, v: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v).expect("reports serialize") + "\n";
    match out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn error_kind(e: &CliError) -> &'static str {
    match e {
        CliError::Io { .. } => "io",
        CliError::Input(_) => "validation",
        CliError::Core(c) if c.is_validation() => "validation",
        CliError::CheckFailed(_) => "check",
        _ => "contract",
    }
}

fn execute(cli: &Cli) -> CliResult<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be >= 1".into()));
        }
        // Fails only if the pool already exists (repeated in-process runs).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let params = serde_json::to_value(&cli.command).expect("arguments serialize");
    let params = params.as_object().and_then(|o| o.values().next().cloned()).unwrap_or(Value::Null);
    let start = Instant::now();
    let outcome = dispatch(&cli.command)?;
    let elapsed = (!cli.deterministic).then(|| start.elapsed().as_millis());
    let mut v = report::envelope(name_of(&cli.command), params, outcome.result, elapsed);
    if let Some(reason) = &outcome.failure {
        v["check_failed"] = json!(reason);
    }
    emit(cli.out.as_deref(), &v)?;
    match outcome.failure {
        Some(reason) => {
            eprintln!("hofa: check failed: {reason}");
            Ok(EXIT_CHECK_FAILED)
        }
        None => Ok(EXIT_OK),
    }
}

/// Parses arguments (after merging environment and config layers), runs
/// the command and returns the exit status.
pub fn run(args: Vec<OsString>, env: &dyn Fn(&str) -> Option<String>) -> i32 {
    let merged = match merge_layers(args, &Cli::command(), env) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("hofa: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(merged) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                EXIT_OK
            } else {
                crate::error::EXIT_VALIDATION
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hofa: {e}");
            let code = e.exit_code();
            if let Some(out) = &cli.out {
                let v = report::error_envelope(name_of(&cli.command), error_kind(&e), &e.to_string(), code);
                let _ = emit(Some(out), &v);
            }
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructions_and_ranges_parse() {
        assert_eq!(parse_construction("full").unwrap(), Construction::Full);
        assert_eq!(
            parse_construction("bohr:alpha=0.5,delta=0.1").unwrap(),
            Construction::Bohr { alpha: 0.5, delta: 0.1 }
        );
        assert_eq!(parse_construction("heisenberg").unwrap(), Construction::HeisenbergLevel { level: 0.4 });
        assert!(parse_construction("bohr:alpha=0.5").is_err());
        assert!(parse_construction("bohr:beta=1").is_err());
        assert_eq!(parse_ranges("1:10, -3:3").unwrap(), vec![(1, 10), (-3, 3)]);
        assert!(parse_ranges("1-10").is_err());
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert!(parse_count("2.5").is_err());
        assert_eq!(parse_ntilde("AUTO"), Ok(Ntilde::Auto));
        assert_eq!(parse_ntilde("77"), Ok(Ntilde::Fixed(77)));
    }

    #[test]
    fn arguments_are_consistent() {
        Cli::command().debug_assert();
    }
}
