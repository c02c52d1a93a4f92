use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hadamard_jsr::catalog::list_entries;
use hadamard_jsr::instance::{InstanceSpec, SCHEMA};
use hadamard_jsr::kerngen::{nystrom_matrix, KernelKind, KernelSpec};
use hadamard_jsr::radius::{jsr_bracket, set_norm, JsrConfig, JsrResult};
use hadamard_jsr::verify::{
    check_instance, fuzz_campaign, resolve_entry_ids, run_example, CheckOptions, ExampleReport, FuzzReport,
    GenParams, Status, Verdict, DEFAULT_TOL, EXAMPLE_IDS,
};
use hadamard_jsr::OperatorSet;

const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "hjsr", version, about = "Certified spectral brackets and Hadamard-product chain checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one catalog entry on an instance file.
    Check(CheckArgs),
    /// Run seeded random in-regime instances through catalog entries.
    Fuzz(FuzzArgs),
    /// Reproduce the worked examples.
    Examples(ExamplesArgs),
    /// Bracket the joint spectral radius and norm of each set in an instance.
    Jsr(JsrArgs),
    /// Inspect the inequality catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Write a Nyström kernel matrix as a one-set instance.
    GenKernel(GenKernelArgs),
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List entries with their regimes.
    List(OutArgs),
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report to standard output instead of a summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// Maximum product length for the JSR engine.
    #[arg(long)]
    depth: Option<usize>,
    /// Relative bracket width at which refinement stops.
    #[arg(long)]
    target_width: Option<f64>,
    /// Product budget per JSR evaluation.
    #[arg(long)]
    budget: Option<u64>,
    /// Absolute tolerance on bracket comparisons.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

impl EngineArgs {
    fn config(&self) -> anyhow::Result<JsrConfig> {
        let mut cfg = JsrConfig::default();
        if let Some(d) = self.depth {
            cfg.max_depth = d;
        }
        if let Some(w) = self.target_width {
            cfg.target_width = w;
        }
        if let Some(b) = self.budget {
            cfg.budget_products = b;
        }
        cfg.validate()?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            bail!("--tol must be positive, got {}", self.tol);
        }
        Ok(cfg)
    }

    fn options(&self) -> anyhow::Result<CheckOptions> {
        Ok(CheckOptions { cfg: self.config()?, tol: self.tol, ..CheckOptions::default() })
    }
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    entry: String,
    #[arg(long)]
    instance: PathBuf,
    /// Evaluate even when the instance violates the entry's hypotheses.
    #[arg(long)]
    allow_out_of_regime: bool,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FuzzArgs {
    /// `all` or a comma-separated list of entry ids.
    #[arg(long, default_value = "all")]
    entries: String,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Matrix dimension range, e.g. `2..4`.
    #[arg(long, default_value = "2..4", value_parser = parse_range)]
    dim: (usize, usize),
    /// Members per set, e.g. `1..3`.
    #[arg(long, default_value = "1..3", value_parser = parse_range)]
    set_size: (usize, usize),
    #[arg(long, default_value_t = 0.3)]
    sparsity: f64,
    /// Largest intermediate set size; larger draws are shrunk.
    #[arg(long)]
    size_cap: Option<usize>,
    /// Record wall-clock time per entry (makes the report nondeterministic).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ExamplesArgs {
    #[arg(long)]
    id: Option<String>,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct JsrArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Only this set (1-based).
    #[arg(long)]
    set: Option<usize>,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct GenKernelArgs {
    /// exp_abs, gauss, poly or const.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Grid size.
    #[arg(long)]
    n: usize,
    /// Number of identical singleton sets in the instance.
    #[arg(long, default_value_t = 1)]
    copies: usize,
    #[command(flatten)]
    out: OutArgs,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    match s.split_once("..") {
        Some((a, b)) => Ok((parse(a)?, parse(b.trim_start_matches('='))?)),
        None => {
            let v = parse(s)?;
            Ok((v, v))
        }
    }
}

#[derive(Serialize)]
struct CheckReport<'a> {
    schema: u32,
    instance: String,
    config: &'a JsrConfig,
    tol: f64,
    allow_out_of_regime: bool,
    verdict: &'a Verdict,
}

#[derive(Serialize)]
struct ExamplesReport<'a> {
    schema: u32,
    config: &'a JsrConfig,
    tol: f64,
    examples: &'a [ExampleReport],
}

#[derive(Serialize)]
struct SetBracket {
    set: usize,
    name: String,
    members: usize,
    jsr: JsrResult,
    norm_lo: f64,
    norm_hi: f64,
}

#[derive(Serialize)]
struct JsrReport<'a> {
    schema: u32,
    config: &'a JsrConfig,
    sets: Vec<SetBracket>,
}

#[derive(Serialize)]
struct EntryLine {
    id: &'static str,
    anchor: &'static str,
    arity: String,
    regime: String,
}

#[derive(Serialize)]
struct CatalogReport {
    schema: u32,
    entries: Vec<EntryLine>,
}

fn read_instance(path: &Path) -> anyhow::Result<InstanceSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    InstanceSpec::from_json(&text).with_context(|| format!("invalid instance {}", path.display()))
}

/// Write the report and return whether the summary should be printed.
fn emit<T: Serialize>(out: &OutArgs, report: &T) -> anyhow::Result<bool> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    if let Some(path) = &out.out {
        std::fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    if out.json {
        print!("{text}");
        return Ok(false);
    }
    Ok(true)
}

fn status_code(worst: Option<Status>) -> u8 {
    match worst {
        Some(Status::ViolationCertified) => 2,
        Some(Status::Inconclusive) => 1,
        _ => 0,
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Confirmed => "Confirmed",
        Status::Inconclusive => "Inconclusive",
        Status::ViolationCertified => "ViolationCertified",
    }
}

fn run_check(a: &CheckArgs) -> anyhow::Result<u8> {
    let inst = read_instance(&a.instance)?;
    let mut opts = a.engine.options()?;
    opts.allow_out_of_regime = a.allow_out_of_regime;
    let v = check_instance(&a.entry, &inst, &opts)?;
    let report = CheckReport {
        schema: SCHEMA,
        instance: a.instance.display().to_string(),
        config: &opts.cfg,
        tol: opts.tol,
        allow_out_of_regime: a.allow_out_of_regime,
        verdict: &v,
    };
    if emit(&a.out, &report)? {
        println!("{}: {}", v.entry, status_word(v.status));
        if let Some(r) = &v.applicability.reason {
            println!("  out of regime: {r}");
        }
        for c in &v.chains {
            println!("  chain {}", c.label);
            for (i, t) in c.terms.iter().enumerate() {
                println!("    e{} = [{:.9}, {:.9}]  {}", i + 1, t.lo, t.hi, t.expr);
            }
            for m in &c.margins {
                println!("    e{} vs e{}: {} (gap {:.3e})", m.position, m.position + 1, status_word(m.status), m.gap);
            }
        }
        for e in &v.elementwise {
            let holds = e.holds.map_or("not evaluated", |h| if h { "holds" } else { "fails" });
            println!("  {}: {holds}", e.label);
        }
        if let Some(w) = &v.witness {
            println!("  witness {}", w.digest);
        }
    }
    Ok(status_code(Some(v.status)))
}

fn run_fuzz(a: &FuzzArgs) -> anyhow::Result<u8> {
    let opts = a.engine.options()?;
    let defaults = GenParams::default();
    let gen = GenParams {
        dim: a.dim,
        set_size: a.set_size,
        sparsity: a.sparsity,
        size_cap: a.size_cap.unwrap_or(defaults.size_cap),
    };
    let ids = resolve_entry_ids(&a.entries)?;
    if ids.is_empty() {
        bail!("--entries selects no catalog entries");
    }
    let report: FuzzReport = fuzz_campaign(&ids, a.count, a.seed, &gen, &opts, a.timing)?;
    if emit(&a.out, &report)? {
        for e in &report.entries {
            println!(
                "{:10} confirmed {:4}  inconclusive {:3}  violations {:3}{}",
                e.entry,
                e.confirmed,
                e.inconclusive,
                e.violations.len(),
                if e.errors.is_empty() { String::new() } else { format!("  errors {}", e.errors.len()) }
            );
        }
    }
    if report.error_count() > 0 {
        bail!("{} instances could not be evaluated", report.error_count());
    }
    Ok(if report.violation_count() > 0 {
        2
    } else if report.inconclusive_count() > 0 {
        1
    } else {
        0
    })
}

fn run_examples(a: &ExamplesArgs) -> anyhow::Result<u8> {
    let opts = a.engine.options()?;
    let ids: Vec<&str> = match &a.id {
        Some(id) => vec![id.as_str()],
        None => EXAMPLE_IDS.to_vec(),
    };
    let reports = ids.iter().map(|id| run_example(id, &opts)).collect::<hadamard_jsr::Result<Vec<_>>>()?;
    let report = ExamplesReport { schema: SCHEMA, config: &opts.cfg, tol: opts.tol, examples: &reports };
    if emit(&a.out, &report)? {
        for r in &reports {
            println!("Example {} ({}): {}", r.id, r.entry, if r.passed { "reproduced" } else { "NOT reproduced" });
            for e in &r.expectations {
                let tag = match e.provenance {
                    hadamard_jsr::verify::Provenance::Printed => "printed",
                    hadamard_jsr::verify::Provenance::Oracle => "oracle",
                };
                println!(
                    "  {} = [{:.9}, {:.9}]  expected {:.9} ({tag}){}",
                    e.name,
                    e.lo,
                    e.hi,
                    e.expected,
                    if e.matches { "" } else if e.required { "  MISMATCH" } else { "  differs" }
                );
            }
            println!("  threshold {:.9}", r.threshold);
            for c in &r.checks {
                println!(
                    "  {} = {}: {}{}",
                    c.parameter,
                    c.value,
                    status_word(c.status),
                    if c.in_regime { "" } else { " (out of regime)" }
                );
            }
        }
    }
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
}

fn run_jsr(a: &JsrArgs) -> anyhow::Result<u8> {
    let inst = read_instance(&a.instance)?;
    let cfg = a.engine.config()?;
    let chosen: Vec<(usize, &OperatorSet)> = match a.set {
        Some(i) if i >= 1 && i <= inst.sets.len() => vec![(i, &inst.sets[i - 1])],
        Some(i) => bail!("--set {i} is out of range 1..{}", inst.sets.len()),
        None => inst.sets.iter().enumerate().map(|(i, s)| (i + 1, s)).collect(),
    };
    let sets: Vec<SetBracket> = chosen
        .into_iter()
        .map(|(i, s)| {
            let n = set_norm(s);
            SetBracket { set: i, name: s.name.clone(), members: s.len(), jsr: jsr_bracket(s, &cfg), norm_lo: n.lo, norm_hi: n.hi }
        })
        .collect();
    let partial = sets.iter().any(|s| s.jsr.partial);
    let report = JsrReport { schema: SCHEMA, config: &cfg, sets };
    if emit(&a.out, &report)? {
        for s in &report.sets {
            println!(
                "{} ({} members): rho in [{:.9}, {:.9}]{}  norm in [{:.9}, {:.9}]",
                s.name,
                s.members,
                s.jsr.lo,
                s.jsr.hi,
                if s.jsr.partial { " (partial)" } else { "" },
                s.norm_lo,
                s.norm_hi
            );
        }
    }
    Ok(if partial { 1 } else { 0 })
}

fn run_catalog(a: &CatalogAction) -> anyhow::Result<u8> {
    let CatalogAction::List(out) = a;
    let entries = list_entries()
        .into_iter()
        .map(|e| EntryLine { id: e.id, anchor: e.anchor, arity: e.arity.to_string(), regime: e.regime() })
        .collect();
    let report = CatalogReport { schema: SCHEMA, entries };
    if emit(out, &report)? {
        for e in &report.entries {
            println!("{:10} sets {:5} {}", e.id, e.arity, e.regime);
            println!("           {}", e.anchor);
        }
    }
    Ok(0)
}

fn run_gen_kernel(a: &GenKernelArgs) -> anyhow::Result<u8> {
    let kind: KernelKind = a.kind.parse()?;
    let spec = KernelSpec::new(kind, a.c, a.n)?;
    if a.copies == 0 {
        bail!("--copies must be at least 1");
    }
    let m = nystrom_matrix(&spec)?;
    let sets = (1..=a.copies).map(|i| OperatorSet::singleton(format!("Psi{i}"), m.clone())).collect();
    let inst = InstanceSpec::new(sets)?;
    if emit(&a.out, &inst)? {
        println!("{} kernel, c = {}, grid {}: {}x{} matrix", a.kind, a.c, a.n, a.n, a.n);
    }
    Ok(0)
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Check(a) => run_check(a),
        Command::Fuzz(a) => run_fuzz(a),
        Command::Examples(a) => run_examples(a),
        Command::Jsr(a) => run_jsr(a),
        Command::Catalog { action } => run_catalog(action),
        Command::GenKernel(a) => run_gen_kernel(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
