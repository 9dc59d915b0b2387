//! Command-line front end: `prove`, `sweep`, `check` and `emit-eqs`.
//!
//! Exit codes: 0 success, 1 usage or malformed input, 2 a run or a check
//! that completed but did not succeed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::cache::ResultantCache;
use crate::cascade::prove;
use crate::certificate::{Certificate, Order, StepKind, Strategy, Verdict, DEFAULT_WALL_SECS};
use crate::check::check_certificate_seeded;
use crate::derivation::DerivationTable;
use crate::error::Error;
use crate::limits::{DEFAULT_MAX_BITS, DEFAULT_MAX_TERMS, Limits};
use crate::poly::Poly;
use crate::scenario::{list_patterns, paper_equation, proportional, validate_nr, PaperEq, Pattern, Scenario};

// Stdout writes that tolerate a closed pipe (`ideal-elim sweep | head`).
macro_rules! out {
    ($($t:tt)*) => {{
        let _ = std::io::Write::write_fmt(&mut std::io::stdout(), format_args!($($t)*));
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        out!($($t)*);
        out!("\n");
    }};
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ideal-elim", version, about = "Resultant cascades with replayable certificates")]
pub struct Cli {
    /// Print progress to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    /// Directory for cached resultants.
    #[arg(long, global = true, env = "IDEAL_ELIM_CACHE")]
    pub cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the cascade and the minimality step for one scenario.
    Prove(ProveArgs),
    /// Run every canonical pattern over ranges of n and r.
    Sweep(SweepArgs),
    /// Replay a certificate.
    Check(CheckArgs),
    /// Print the trace identity, its first two derivatives and the transcriptions.
    EmitEqs(EmitArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Paper,
    Mindeg,
}

#[derive(Args, Debug, Clone)]
pub struct StrategyArgs {
    /// Highest derivative paired with a constraint.
    #[arg(long, default_value_t = 2)]
    pub depth: u32,
    #[arg(long, default_value_t = 4)]
    pub max_pairings: u32,
    #[arg(long, value_enum, default_value_t = OrderArg::Paper)]
    pub order: OrderArg,
    /// Keep powers of H instead of cancelling them.
    #[arg(long)]
    pub no_h_cancel: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_TERMS)]
    pub max_terms: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_BITS)]
    pub max_bits: u64,
    /// Wall budget per scenario in seconds; 0 disables it.
    #[arg(long, default_value_t = DEFAULT_WALL_SECS)]
    pub wall_secs: f64,
}

impl StrategyArgs {
    pub fn strategy(&self) -> Result<Strategy, Error> {
        if self.wall_secs < 0.0 || !self.wall_secs.is_finite() {
            return Err(Error::Usage("--wall-secs must be a non-negative number".into()));
        }
        let s = Strategy {
            derivative_depth: self.depth,
            max_pairings: self.max_pairings,
            order: match self.order {
                OrderArg::Paper => Order::Paper,
                OrderArg::Mindeg => Order::MinDegree,
            },
            allow_h_cancel: !self.no_h_cancel,
            max_terms: self.max_terms,
            max_bits: self.max_bits,
            wall_secs: (self.wall_secs > 0.0).then_some(self.wall_secs),
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Args, Debug)]
pub struct ProveArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub r: u32,
    /// `A`, or items like `B:2=3` and `C:4` separated by commas.
    #[arg(long, default_value = "A")]
    pub pattern: String,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Certificate path; the report and side files go next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Polynomials with more terms are written to side files.
    #[arg(long, default_value_t = 200)]
    pub inline_terms: usize,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Range such as `3-6`, or a single value.
    #[arg(long, default_value = "3-6")]
    pub n: String,
    #[arg(long, default_value = "2-4")]
    pub r: String,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Directory for certificates and the summary table.
    #[arg(long, default_value = "sweep-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub path: PathBuf,
    /// Random specializations per resultant step.
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Seed for the specializations; random when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct EmitArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub r: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32, Error> {
    let cache = match &cli.cache_dir {
        Some(d) if !d.as_os_str().is_empty() => Some(ResultantCache::open(d)?),
        _ => None,
    };
    match &cli.command {
        Command::Prove(a) => cmd_prove(a, cache.as_ref(), cli.verbose),
        Command::Sweep(a) => cmd_sweep(a, cache.as_ref(), cli.verbose),
        Command::Check(a) => cmd_check(a),
        Command::EmitEqs(a) => cmd_emit_eqs(a),
    }
}

/// File-name friendly form of a pattern: `B:2=3,C:4` becomes `B2-3_C4`.
pub fn pattern_slug(p: &Pattern) -> String {
    p.to_string().replace(':', "").replace('=', "-").replace(',', "_")
}

pub fn scenario_stem(s: &Scenario) -> String {
    format!("n{}-r{}-{}", s.n, s.r, pattern_slug(&s.pattern))
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

fn cmd_prove(a: &ProveArgs, cache: Option<&ResultantCache>, verbose: u8) -> Result<i32, Error> {
    let strat = a.strategy.strategy()?;
    let pattern: Pattern = a.pattern.parse()?;
    let s = Scenario::build(a.n, a.r, &pattern)?;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.cert.json", scenario_stem(&s))));
    if verbose > 0 {
        eprintln!("proving {}", s.label());
    }
    let t = Instant::now();
    let cert = prove(&s, &strat, cache)?;
    let secs = t.elapsed().as_secs_f64();
    write_file(&out, &cert.to_json_string())?;
    let report = render_report(&cert, &out, a.inline_terms)?;
    let report_path = out.with_extension("report.txt");
    write_file(&report_path, &report)?;
    match a.format {
        Format::Text => out!("{report}"),
        Format::Json => {
            let v = json!({
                "scenario": s.label(),
                "verdict": cert.verdict.to_string(),
                "final_degree": cert.final_poly.total_degree(),
                "steps": cert.steps.len(),
                "peak_terms": cert.peak_terms(),
                "seconds": secs,
                "certificate": out.display().to_string(),
                "report": report_path.display().to_string(),
            });
            outln!("{}", serde_json::to_string_pretty(&v)?);
        }
    }
    Ok(if cert.verdict == Verdict::MinimalProven { EXIT_OK } else { EXIT_FAILED })
}

/// Human-readable step log. Polynomials above `inline_terms` terms are written
/// to side files next to `cert_path` and referenced by name.
pub fn render_report(cert: &Certificate, cert_path: &Path, inline_terms: usize) -> Result<String, Error> {
    let vars = cert.vars().clone();
    let stem = cert_path.file_name().map(|f| f.to_string_lossy().trim_end_matches(".json").to_string());
    let stem = stem.unwrap_or_else(|| "certificate".into());
    let dir = cert_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let show = |label: &str, p: &Poly| -> Result<String, Error> {
        if p.len() <= inline_terms {
            return Ok(p.to_string());
        }
        let side = dir.join(format!("{stem}.{label}.poly"));
        write_file(&side, &format!("{p}\n"))?;
        Ok(format!("<{} terms, see {}>", p.len(), side.display()))
    };
    let mut out = String::new();
    let _ = writeln!(out, "scenario: n={} r={} pattern={}", cert.n, cert.r, cert.pattern);
    let _ = writeln!(out, "variables: {}", vars.names().join(" "));
    for (i, st) in cert.steps.iter().enumerate() {
        let refs = st.kind.refs().iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",");
        let extra = match &st.kind {
            StepKind::Resultant { var, .. } => format!(" eliminate {}", vars.name(*var)),
            StepKind::Substitute { var, by, .. } => format!(" {} := {}", vars.name(*var), by),
            StepKind::Normalize { record, .. } => {
                let mut e = format!(" content {} monomial {} h_power {}", record.content, record.monomial.fmt_with(&vars), record.h_power);
                for (f, k) in &record.factors {
                    let _ = write!(e, " factor ({f})^{k}");
                }
                e
            }
            _ => String::new(),
        };
        let p = &st.result;
        let degs: Vec<String> = p
            .support()
            .iter()
            .map(|&v| format!("{}:{}", vars.name(v), p.degree_in(v)))
            .collect();
        let _ = writeln!(
            out,
            "[{i:>3}] {:<10} refs [{refs}]{extra}\n      terms {} degree {} ({})\n      {}",
            st.kind.name(),
            p.len(),
            p.total_degree(),
            degs.join(" "),
            show(&format!("step{i}"), p)?
        );
    }
    let _ = writeln!(out, "final p(H): {}", show("final", &cert.final_poly)?);
    let _ = writeln!(out, "final degree: {}", cert.final_poly.total_degree());
    if let Some(w) = &cert.witness {
        let sq: Vec<String> = w.squares.iter().map(|(m, c)| format!("{c}*{}", m.fmt_with(&vars))).collect();
        let _ = writeln!(out, "witness: trace(A^2) = {}*H^2 + {}", w.leading, sq.join(" + "));
    }
    for n in &cert.notes {
        let _ = writeln!(out, "note: {n}");
    }
    let _ = writeln!(out, "verdict: {}", cert.verdict);
    Ok(out)
}

/// `"3-6"` or `"4"`.
pub fn parse_range(s: &str) -> Result<(u32, u32), Error> {
    let bad = || Error::Usage(format!("bad range '{s}'; expected a or a-b"));
    let (a, b) = match s.split_once('-') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    Ok((a, b))
}

/// Every valid `(n, r, pattern)` in the ranges, sorted.
pub fn sweep_scenarios(n: (u32, u32), r: (u32, u32)) -> Vec<(u32, u32, Pattern)> {
    let mut out = Vec::new();
    for n in n.0..=n.1 {
        for r in r.0..=r.1 {
            if validate_nr(n, r).is_err() {
                continue;
            }
            for p in list_patterns(r) {
                out.push((n, r, p));
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub n: u32,
    pub r: u32,
    pub pattern: String,
    pub verdict: Verdict,
    pub final_degree: u32,
    pub seconds: f64,
    pub peak_terms: usize,
    pub certificate: String,
}

impl SweepRow {
    fn ok(&self) -> bool {
        self.verdict == Verdict::MinimalProven
    }
}

pub fn render_table(rows: &[SweepRow], format: Format) -> String {
    match format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n, "r": r.r, "pattern": r.pattern,
                        "verdict": r.verdict.to_string(),
                        "final_degree": r.final_degree,
                        "seconds": r.seconds,
                        "peak_terms": r.peak_terms,
                        "status": if r.ok() { "ok" } else { "FAIL" },
                        "certificate": r.certificate,
                    })
                })
                .collect();
            serde_json::to_string_pretty(&v).expect("table serializes") + "\n"
        }
        Format::Text => {
            let mut s = String::from("n\tr\tpattern\tverdict\tfinal_degree\tseconds\tpeak_terms\tstatus\n");
            for r in rows {
                let _ = writeln!(
                    s,
                    "{}\t{}\t{}\t{}\t{}\t{:.3}\t{}\t{}",
                    r.n,
                    r.r,
                    r.pattern,
                    r.verdict,
                    r.final_degree,
                    r.seconds,
                    r.peak_terms,
                    if r.ok() { "ok" } else { "FAIL" }
                );
            }
            s
        }
    }
}

/// Runs the scenarios on `jobs` workers; rows come back in input order.
pub fn run_sweep(
    scenarios: &[(u32, u32, Pattern)],
    strat: &Strategy,
    cache: Option<&ResultantCache>,
    out_dir: &Path,
    jobs: usize,
    verbose: u8,
) -> Result<Vec<SweepRow>, Error> {
    fs::create_dir_all(out_dir)?;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<SweepRow, Error>>>> = Mutex::new((0..scenarios.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(scenarios.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((n, r, p)) = scenarios.get(i) else { break };
                let row = run_one(*n, *r, p, strat, cache, out_dir, verbose);
                slots.lock().expect("sweep sink poisoned")[i] = Some(row);
            });
        }
    });
    slots.into_inner().expect("sweep sink poisoned").into_iter().map(|r| r.expect("every slot filled")).collect()
}

fn run_one(
    n: u32,
    r: u32,
    p: &Pattern,
    strat: &Strategy,
    cache: Option<&ResultantCache>,
    out_dir: &Path,
    verbose: u8,
) -> Result<SweepRow, Error> {
    let s = Scenario::build(n, r, p)?;
    let t = Instant::now();
    let cert = prove(&s, strat, cache)?;
    let seconds = t.elapsed().as_secs_f64();
    let path = out_dir.join(format!("{}.cert.json", scenario_stem(&s)));
    write_file(&path, &cert.to_json_string())?;
    if verbose > 0 {
        eprintln!("{} -> {} ({seconds:.2}s)", s.label(), cert.verdict);
    }
    Ok(SweepRow {
        n,
        r,
        pattern: s.pattern.to_string(),
        verdict: cert.verdict,
        final_degree: cert.final_poly.total_degree(),
        seconds,
        peak_terms: cert.peak_terms(),
        certificate: path.display().to_string(),
    })
}

fn cmd_sweep(a: &SweepArgs, cache: Option<&ResultantCache>, verbose: u8) -> Result<i32, Error> {
    let strat = a.strategy.strategy()?;
    if a.jobs == 0 {
        return Err(Error::Usage("--jobs must be at least 1".into()));
    }
    let scenarios = sweep_scenarios(parse_range(&a.n)?, parse_range(&a.r)?);
    if scenarios.is_empty() {
        return Err(Error::Usage(format!("no valid (n, r) in n={} r={}", a.n, a.r)));
    }
    let rows = run_sweep(&scenarios, &strat, cache, &a.out, a.jobs, verbose)?;
    let table = render_table(&rows, a.format);
    let name = match a.format {
        Format::Text => "summary.tsv",
        Format::Json => "summary.json",
    };
    write_file(&a.out.join(name), &table)?;
    out!("{table}");
    Ok(if rows.iter().all(SweepRow::ok) { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_check(a: &CheckArgs) -> Result<i32, Error> {
    let text = fs::read_to_string(&a.path)?;
    let cert = Certificate::from_json_str(&text)?;
    let rep = check_certificate_seeded(&cert, a.trials, a.seed.unwrap_or_else(rand::random));
    for f in &rep.failures {
        outln!("FAIL {f}");
    }
    outln!(
        "{}: {} steps, {} specializations agreed, {} skipped, verdict {}",
        if rep.passed() { "PASS" } else { "FAIL" },
        rep.steps_checked,
        rep.trials_run,
        rep.trials_skipped,
        cert.verdict
    );
    Ok(if rep.passed() { EXIT_OK } else { EXIT_FAILED })
}

/// One row of `emit-eqs`: the engine's polynomial against a transcription.
#[derive(Clone, Debug)]
pub struct EqComparison {
    pub tag: &'static str,
    pub description: &'static str,
    pub engine: Poly,
    pub transcription: Poly,
    pub matches: bool,
}

/// Seed, its first two derivatives (with and without the seed substitution)
/// and the comparison against the hand transcriptions.
pub fn emit_equations(n: u32, r: u32) -> Result<(Scenario, Vec<EqComparison>), Error> {
    let s = Scenario::build(n, r, &Pattern::all_singletons(r))?;
    let t = DerivationTable::build(&s);
    let d1 = t.derive(&s.seed);
    let d2 = t.derive(&d1);
    let (v, by) = s.seed_substitution().expect("Case A has free groups");
    let lim = Limits::unbounded();
    let e1 = d1.substitute(v, &by, &lim)?;
    let e2 = d2.substitute(v, &by, &lim)?;
    let rows = [
        (PaperEq::FirstDerivative, "first derivative", d1),
        (PaperEq::SecondDerivative, "second derivative", d2),
        (PaperEq::FirstEliminated, "first derivative, first eigenvalue eliminated", e1),
        (PaperEq::SecondEliminated, "second derivative, first eigenvalue eliminated", e2),
    ];
    let mut out = Vec::new();
    for (eq, description, engine) in rows {
        let transcription = paper_equation(eq, n, r)?;
        let matches = proportional(&engine, &transcription);
        out.push(EqComparison { tag: eq.tag(), description, engine, transcription, matches });
    }
    Ok((s, out))
}

fn cmd_emit_eqs(a: &EmitArgs) -> Result<i32, Error> {
    let (s, rows) = emit_equations(a.n, a.r)?;
    match a.format {
        Format::Text => {
            outln!("scenario: n={} r={} pattern=A", s.n, s.r);
            outln!("trace identity: {}", s.seed);
            for row in &rows {
                outln!("({}) {}", row.tag, row.description);
                outln!("  engine:        {}", row.engine);
                outln!("  transcription: {}", row.transcription);
                outln!("  {}", if row.matches { "MATCH" } else { "MISMATCH (engine result kept)" });
            }
        }
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "tag": r.tag,
                        "description": r.description,
                        "engine": r.engine.to_string(),
                        "transcription": r.transcription.to_string(),
                        "match": r.matches,
                    })
                })
                .collect();
            let doc = json!({"n": s.n, "r": s.r, "seed": s.seed.to_string(), "equations": v});
            outln!("{}", serde_json::to_string_pretty(&doc)?);
        }
    }
    Ok(EXIT_OK)
}
