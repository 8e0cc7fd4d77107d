//! `varmc`: family-based CTL checking of featured transition systems.

mod report;

use std::path::Path as FsPath;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use varmc_core::checker::{
    attribute_counterexample, refine_brute, CheckError, DEFAULT_BRUTE_BUDGET,
};
use varmc_core::dsl::{
    apply_abstraction_syntactic, apply_invar, parse_document, parse_path, parse_property_for,
    DslError, Mode,
};
use varmc_core::models::EMPTY_CONFIG_SPACE;
use varmc_core::synth::{scaled_family, state_count, Goal, DEFAULT_STATE_BUDGET};
use varmc_core::{
    bundled, check_family_abstract, check_fts_brute_force, parse_feat_expr, parse_model,
    print_model, selftest, with_thread_pool, Abstraction, CheckOptions, Ctl, Diagnostic, Exec,
    FamilyReport, FeatExpr, Fts, ModelDocument, Severity, Validate,
};

use report::{braces, counts, digest, exit_code, features, CheckReport, Source, Timings};

// Output goes through `write!` so a closed pipe ends the run quietly.
macro_rules! put {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// Exit code for usage errors and bad input.
const USAGE: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "varmc",
    version,
    about = "Family-based CTL model checking of featured transition systems"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "human")]
    format: Format,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a model and report structural diagnostics.
    Validate { model: String },
    /// Restrict a model to the configurations satisfying a constraint.
    Project {
        model: String,
        #[arg(long)]
        constraint: String,
    },
    /// Rewrite a model through an abstraction (may or must component).
    Abstract {
        model: String,
        /// `join`, `ignore=A`, `ignore=A,B` or a `+` chain such as `ignore=A+join`.
        #[arg(long)]
        op: String,
        #[arg(long, default_value = "may")]
        mode: String,
        /// Project onto this constraint first.
        #[arg(long)]
        constraint: Option<String>,
    },
    /// Check a property on every variant of a family.
    Check {
        model: String,
        /// A property name declared in the model or an inline formula.
        property: String,
        /// `brute`, an abstraction such as `join`, or `partition "ψ1;ψ2;..."`.
        #[arg(long, num_args = 1..=2, default_values_t = vec!["brute".to_string()])]
        strategy: Vec<String>,
        /// Abstraction for partition cells: one for all, or a `;`-list with one per cell.
        #[arg(long = "abstract")]
        abstraction: Option<String>,
        /// Resolve inconclusive variants (`brute`).
        #[arg(long)]
        refine: Option<String>,
        /// Largest number of variants brute force may enumerate.
        #[arg(long, default_value_t = DEFAULT_BRUTE_BUDGET)]
        budget: usize,
    },
    /// Attribute a path to the variants that can execute it.
    Explain {
        model: String,
        /// `1 -pay-> 2 -> 3 loop 1`; an unlabeled arrow must be unambiguous.
        path: String,
    },
    /// Run strategies on the synthetic counter family with `n` optional features.
    Bench {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "AF(x >= 0)")]
        property: String,
        /// Comma-separated strategies: `brute`, `join`.
        #[arg(long, default_value = "brute,join", value_delimiter = ',')]
        strategy: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_BRUTE_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        state_budget: usize,
    },
    /// Run the randomized and exhaustive self-check suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        /// Largest feature count for the exhaustive Galois suite.
        #[arg(long, default_value_t = 2)]
        max_features: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let jobs = cli.jobs;
    match with_thread_pool(jobs, move || run(&cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Validate { model } => validate(cli.format, model),
        Command::Project { model, constraint } => {
            let (_, doc, _) = load(model)?;
            let psi = parse_feat_expr(constraint)?;
            put!("{}", print_model(&apply_invar(&doc, &psi)?));
            Ok(0)
        }
        Command::Abstract {
            model,
            op,
            mode,
            constraint,
        } => {
            let (_, mut doc, _) = load(model)?;
            if let Some(c) = constraint {
                doc = apply_invar(&doc, &parse_feat_expr(c)?)?;
            }
            let a = Abstraction::from_str(op)?;
            let mode = Mode::from_str(mode).map_err(|e| anyhow!(e))?;
            put!(
                "{}",
                print_model(&apply_abstraction_syntactic(&doc, &a, mode)?)
            );
            Ok(0)
        }
        Command::Check {
            model,
            property,
            strategy,
            abstraction,
            refine,
            budget,
        } => check(
            cli.format,
            CheckArgs {
                model,
                property,
                strategy,
                abstraction: abstraction.as_deref(),
                refine: refine.as_deref(),
                budget: *budget,
            },
        ),
        Command::Explain { model, path } => explain(cli.format, model, path),
        Command::Bench {
            n,
            property,
            strategy,
            budget,
            state_budget,
        } => bench(cli.format, *n, property, strategy, *budget, *state_budget),
        Command::Selftest {
            seed,
            cases,
            max_features,
        } => selftest_cmd(cli.format, *seed, *cases, *max_features),
    }
}

/// Source text of a model file, falling back to a bundled model of that name.
fn read_source(model: &str) -> Result<String> {
    match std::fs::read_to_string(model) {
        Ok(text) => Ok(text),
        Err(e) => {
            let base = FsPath::new(model)
                .file_name()
                .and_then(|s| s.to_str())
                .unwrap_or(model);
            bundled::source(base)
                .map(str::to_string)
                .ok_or(e)
                .with_context(|| format!("cannot read model `{model}`"))
        }
    }
}

fn load(model: &str) -> Result<(String, ModelDocument, Fts)> {
    let text = read_source(model)?;
    let (doc, fts) = parse_model(&text).with_context(|| format!("in model `{model}`"))?;
    Ok((text, doc, fts))
}

fn emit_json<T: Serialize>(value: &T) -> Result<()> {
    say!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn validate(format: Format, model: &str) -> Result<u8> {
    let text = read_source(model)?;
    let doc = parse_document(&text).with_context(|| format!("in model `{model}`"))?;
    // An empty configuration space is a model error, not a syntax error.
    let (fts, diags) = match doc.to_fts() {
        Ok(fts) => {
            let diags = fts.validate();
            (Some(fts), diags)
        }
        Err(DslError::EmptyConfigSpace) => (
            None,
            vec![Diagnostic {
                severity: Severity::Error,
                code: EMPTY_CONFIG_SPACE,
                message: "the configuration constraint admits no configuration".into(),
            }],
        ),
        Err(e) => return Err(e).with_context(|| format!("in model `{model}`")),
    };
    let errors = diags.iter().any(|d| d.severity == Severity::Error);
    let states = doc.states.len();
    let transitions = fts
        .as_ref()
        .map_or(doc.transitions.len(), |f| f.transitions.len());
    let configurations = fts.as_ref().map_or(0, |f| f.space.len());
    match format {
        Format::Json => emit_json(&json!({
            "schema": "varmc-validate/1",
            "model": model,
            "model_digest": digest(&text),
            "features": doc.features,
            "configurations": configurations,
            "states": states,
            "transitions": transitions,
            "properties": doc.properties.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
            "diagnostics": diags.iter().map(|d| json!({
                "severity": if d.severity == Severity::Error { "error" } else { "warning" },
                "code": d.code,
                "message": d.message,
            })).collect::<Vec<_>>(),
            "ok": !errors,
        }))?,
        Format::Human => {
            say!(
                "{model}: {states} states, {transitions} transitions, {} features, {configurations} configurations",
                doc.features.len(),
            );
            for d in &diags {
                say!("{d}");
            }
            say!("{}", if errors { "invalid" } else { "ok" });
        }
    }
    Ok(u8::from(errors))
}

struct CheckArgs<'a> {
    model: &'a str,
    property: &'a str,
    strategy: &'a [String],
    abstraction: Option<&'a str>,
    refine: Option<&'a str>,
    budget: usize,
}

enum Strategy {
    Brute,
    Plan(Vec<(FeatExpr, Abstraction)>),
}

fn parse_strategy(args: &CheckArgs<'_>) -> Result<Strategy> {
    let head = args.strategy[0].as_str();
    let tail = args.strategy.get(1);
    match head {
        "brute" => {
            if tail.is_some() {
                bail!("strategy `brute` takes no argument");
            }
            Ok(Strategy::Brute)
        }
        "partition" => {
            let cells: Vec<FeatExpr> = tail
                .ok_or_else(|| {
                    anyhow!("strategy `partition` needs a `;`-separated constraint list")
                })?
                .split(';')
                .map(|c| parse_feat_expr(c.trim()))
                .collect::<Result<_, _>>()?;
            let abstractions: Vec<Abstraction> = args
                .abstraction
                .unwrap_or("join")
                .split(';')
                .map(|a| Abstraction::from_str(a.trim()))
                .collect::<Result<_, _>>()?;
            let abstractions = match abstractions.len() {
                1 => vec![abstractions[0].clone(); cells.len()],
                n if n == cells.len() => abstractions,
                n => bail!("{n} abstractions given for {} partition cells", cells.len()),
            };
            Ok(Strategy::Plan(
                cells.into_iter().zip(abstractions).collect(),
            ))
        }
        name => {
            if tail.is_some() {
                bail!("strategy `{name}` takes no argument");
            }
            if args.abstraction.is_some() {
                bail!("--abstract applies only to the partition strategy");
            }
            Ok(Strategy::Plan(vec![(
                FeatExpr::True,
                Abstraction::from_str(name)?,
            )]))
        }
    }
}

fn resolve_property(doc: &ModelDocument, fts: &Fts, text: &str) -> Result<(Option<String>, Ctl)> {
    if let Some(phi) = doc.property(text) {
        return Ok((Some(text.to_string()), phi.clone()));
    }
    let phi = parse_property_for(text, &fts.skeleton)
        .with_context(|| format!("`{text}` is neither a declared property nor a valid formula"))?;
    Ok((None, phi))
}

fn check(format: Format, args: CheckArgs<'_>) -> Result<u8> {
    let start = Instant::now();
    let (text, doc, fts) = load(args.model)?;
    let (name, phi) = resolve_property(&doc, &fts, args.property)?;
    let parse_ms = ms(start);
    let strategy = parse_strategy(&args)?;
    let refine = match args.refine {
        None => false,
        Some("brute") => true,
        Some(other) => bail!("unknown refinement `{other}`, expected brute"),
    };
    let opts = CheckOptions {
        brute_budget: args.budget,
        ..CheckOptions::default()
    };
    let check_start = Instant::now();
    let mut family = match &strategy {
        Strategy::Brute => check_fts_brute_force(&fts, &phi, &opts)?,
        Strategy::Plan(plan) => check_family_abstract(&fts, &phi, plan, &opts)?,
    };
    let brute_ms = if matches!(strategy, Strategy::Brute) {
        ms(check_start)
    } else {
        0.0
    };
    let mut refine_ms = 0.0;
    if refine {
        let t = Instant::now();
        family = refine_brute(&family, &fts, &phi)?;
        refine_ms = ms(t);
    }
    let timings = Timings {
        parse: parse_ms,
        check: brute_ms + refine_ms,
        ..Timings::default()
    };
    let src = Source {
        name: args.model,
        text: &text,
        property_name: name.as_deref(),
        property: &phi,
    };
    let out = CheckReport::build(&src, &fts.skeleton, &family, refine, timings);
    match format {
        Format::Json => emit_json(&out)?,
        Format::Human => put!("{}", out.human()),
    }
    Ok(out.summary.exit_code as u8)
}

fn explain(format: Format, model: &str, text: &str) -> Result<u8> {
    let (_, _, fts) = load(model)?;
    let path = parse_path(&fts, text)?;
    let attributed = attribute_counterexample(&fts, &path)?;
    let configs = fts.space.satisfying_configs(&attributed)?;
    let variants: Vec<Vec<String>> = configs.iter().map(|k| features(&fts.space, *k)).collect();
    match format {
        Format::Json => emit_json(&json!({
            "schema": "varmc-explain/1",
            "path": path.render(&fts.skeleton),
            "attributed": attributed.to_string(),
            "variants": variants,
        }))?,
        Format::Human => {
            say!("path        {}", path.render(&fts.skeleton));
            say!("attributed  {attributed}");
            say!("variants    {} of {}", variants.len(), fts.space.len());
            for v in &variants {
                say!("  {}", braces(v));
            }
        }
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct BenchRun {
    strategy: String,
    status: &'static str,
    reason: Option<String>,
    holds: usize,
    fails: usize,
    inconclusive: usize,
    time_ms: f64,
}

fn bench(
    format: Format,
    n: usize,
    property: &str,
    strategies: &[String],
    budget: usize,
    state_budget: usize,
) -> Result<u8> {
    if n == 0 {
        bail!("bench needs n >= 1");
    }
    let goal = Goal::from_str(property)?;
    let family = scaled_family(n, &goal, state_budget)?;
    let opts = CheckOptions {
        brute_budget: budget,
        ..CheckOptions::default()
    };
    let mut runs = Vec::new();
    let mut reports: Vec<FamilyReport> = Vec::new();
    for s in strategies {
        let t = Instant::now();
        let result = match s.as_str() {
            "brute" => check_fts_brute_force(&family.fts, &family.property, &opts),
            other => {
                let a = Abstraction::from_str(other)?;
                check_family_abstract(&family.fts, &family.property, &[(FeatExpr::True, a)], &opts)
            }
        };
        let time_ms = ms(t);
        match result {
            Ok(r) => {
                let (holds, fails, inconclusive) = counts(&r);
                runs.push(BenchRun {
                    strategy: s.clone(),
                    status: "ok",
                    reason: None,
                    holds,
                    fails,
                    inconclusive,
                    time_ms,
                });
                reports.push(r);
            }
            Err(e @ CheckError::BudgetExceeded { .. }) => runs.push(BenchRun {
                strategy: s.clone(),
                status: "refused",
                reason: Some(e.to_string()),
                holds: 0,
                fails: 0,
                inconclusive: 0,
                time_ms,
            }),
            Err(e) => return Err(e.into()),
        }
    }
    let kinds = |r: &FamilyReport| {
        r.verdicts
            .iter()
            .map(|(k, v)| (*k, v.kind()))
            .collect::<Vec<_>>()
    };
    let identical = reports.windows(2).all(|w| kinds(&w[0]) == kinds(&w[1]));
    // Decided verdicts never contradict across strategies.
    let consistent = reports.windows(2).all(|w| {
        w[0].verdicts
            .iter()
            .zip(&w[1].verdicts)
            .all(|((_, a), (_, b))| {
                use varmc_core::VerdictKind::Inconclusive;
                a.kind() == Inconclusive || b.kind() == Inconclusive || a.kind() == b.kind()
            })
    });
    let fails = runs.iter().any(|r| r.fails > 0);
    let inconclusive = runs.iter().any(|r| r.inconclusive > 0);
    let code = if reports.is_empty() {
        USAGE as i32
    } else if !consistent {
        1
    } else {
        exit_code(usize::from(fails), usize::from(inconclusive))
    };
    match format {
        Format::Json => emit_json(&json!({
            "schema": "varmc-bench/1",
            "n": n,
            "states": family.fts.skeleton.num_states(),
            "variants": family.fts.space.len(),
            "property": property,
            "formula": family.property.to_string(),
            "runs": runs,
            "identical": identical,
            "consistent": consistent,
            "exit_code": code,
        }))?,
        Format::Human => {
            say!(
                "family    n={n}, {} states (expected {}), {} variants",
                family.fts.skeleton.num_states(),
                state_count(n),
                family.fts.space.len()
            );
            say!("property  {property} = {}", family.property);
            say!();
            say!(
                "{:10}{:9}{:>8}{:>8}{:>14}{:>12}",
                "strategy",
                "status",
                "holds",
                "fails",
                "inconclusive",
                "time (ms)"
            );
            for r in &runs {
                say!(
                    "{:10}{:9}{:>8}{:>8}{:>14}{:>12.2}",
                    r.strategy,
                    r.status,
                    r.holds,
                    r.fails,
                    r.inconclusive,
                    r.time_ms
                );
                if let Some(reason) = &r.reason {
                    say!("          {reason}");
                }
            }
            if reports.len() > 1 {
                say!();
                say!(
                    "verdicts  {}",
                    if identical {
                        "identical"
                    } else if consistent {
                        "consistent (some inconclusive)"
                    } else {
                        "CONTRADICTORY"
                    }
                );
            }
        }
    }
    Ok(code as u8)
}

fn selftest_cmd(format: Format, seed: u64, cases: usize, max_features: usize) -> Result<u8> {
    let exec = Exec::default();
    let mut rows: Vec<(&str, selftest::Tally, f64)> = Vec::new();
    let mut timed = |name, f: &dyn Fn() -> selftest::Tally| {
        let t = Instant::now();
        let tally = f();
        rows.push((name, tally, ms(t)));
    };
    timed("galois-law", &|| {
        selftest::galois_exhaustive(exec, max_features)
    });
    timed("duality", &|| selftest::duality(exec, seed, cases, 6));
    timed("checker-oracle", &|| {
        selftest::checker_oracle(exec, seed, cases)
    });
    timed("soundness", &|| {
        let s = selftest::soundness(exec, seed, cases);
        let mut t = s.tally;
        t.violations.extend(s.structural_violations);
        t
    });
    timed("lemmas", &|| selftest::lemmas(exec, seed, cases, 8));
    timed("commutation", &|| selftest::commutation(exec, seed, cases));
    timed("modal-differential", &|| {
        selftest::modal_differential(exec, seed, cases)
    });
    timed("attribution", &|| {
        selftest::attribution_replay(exec, seed, cases)
    });
    let passed = rows.iter().all(|(_, t, _)| t.passed());
    match format {
        Format::Json => emit_json(&json!({
            "schema": "varmc-selftest/1",
            "seed": seed,
            "cases": cases,
            "suites": rows.iter().map(|(name, t, time)| json!({
                "suite": name,
                "passed": t.passed(),
                "cases": t.cases,
                "checks": t.checks,
                "violations": t.violations,
                "findings": t.findings.len(),
                "time_ms": time,
            })).collect::<Vec<_>>(),
            "passed": passed,
        }))?,
        Format::Human => {
            for (name, t, time) in &rows {
                say!(
                    "{} {name:20} {t} ({time:.0} ms)",
                    if t.passed() { "PASS" } else { "FAIL" }
                );
                for v in t.violations.iter().take(5) {
                    say!("     {v}");
                }
            }
        }
    }
    Ok(u8::from(!passed))
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}
