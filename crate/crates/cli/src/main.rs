use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pe_repair::bounds::{conventional_lower_bound, min_subpacketization, tradeoff_csv, tradeoff_table, BoundQuery};
use pe_repair::constructions::{build_plan_c1, build_plan_c2, load_plan, C1Params, C2Params, CodePlan};
use pe_repair::factor::FactorBudget;
use pe_repair::field::FieldOptions;
use pe_repair::fixtures;
use pe_repair::io::write_atomic;
use pe_repair::repair::{repair, repair_c1_with_subspace};
use pe_repair::rs::{encode, write_codeword, MessagePoly};
use pe_repair::sim::{
    init_cluster, init_cluster_with_message, load_cluster, save_cluster, seeded_message, RepairReport, Strategy,
};
use pe_repair::Error;

#[derive(Parser)]
#[command(name = "pe-repair", version, about = "Partial-exclusion repair for Reed-Solomon codes")]
struct Cli {
    /// Machine-readable JSON reports instead of human summaries.
    #[arg(long, global = true)]
    json: bool,
    /// Seconds allowed for factoring group orders.
    #[arg(long, global = true, default_value_t = 5)]
    factor_timeout: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a code plan and write it as JSON.
    Plan(PlanArgs),
    /// Encode a message under a plan.
    Encode(EncodeArgs),
    /// Simulated cluster management.
    Cluster {
        #[command(subcommand)]
        cmd: ClusterCmd,
    },
    /// Fail one node of a cluster and repair it.
    Repair(RepairArgs),
    /// Smallest sub-packetization for a dimension and flexibility.
    Bound(BoundArgs),
    /// Flexibility/bandwidth trade-off table as CSV.
    Tradeoff(TradeoffArgs),
    /// Rebuild a worked example and check every published number.
    Reproduce {
        #[arg(value_enum)]
        example: Example,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    Example1,
    Example2,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), required_unless_present = "example")]
    construction: Option<u8>,
    /// Write a compiled-in example plan instead.
    #[arg(long, value_enum, conflicts_with = "construction")]
    example: Option<Example>,
    #[arg(long, default_value_t = 1)]
    base_bits: usize,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<usize>>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<u64>>,
    /// Accept a generator whose order could only be partly verified.
    #[arg(long)]
    allow_unproven_generator: bool,
    #[arg(long, default_value = "plan.json")]
    out: PathBuf,
}

#[derive(Args)]
struct MessageArgs {
    /// Seed for the ChaCha20 message generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit message coefficients as comma-separated hex.
    #[arg(long, value_delimiter = ',')]
    message: Option<Vec<String>>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    plan: PathBuf,
    #[command(flatten)]
    msg: MessageArgs,
    #[arg(long, default_value = "codeword.txt")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum ClusterCmd {
    /// Encode a message and store one symbol per node.
    Init {
        #[arg(long)]
        plan: PathBuf,
        #[command(flatten)]
        msg: MessageArgs,
        #[arg(long, default_value = "cluster.txt")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Pe,
    Naive,
}

#[derive(Args)]
struct RepairArgs {
    #[arg(long)]
    cluster: PathBuf,
    #[arg(long)]
    node: usize,
    #[arg(long, value_enum, default_value = "pe")]
    strategy: StrategyArg,
    /// Number of helpers (defaults to the plan's repair degree).
    #[arg(long)]
    d: Option<usize>,
    /// Write the repair transcript as JSON.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Write the transfer log as CSV.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, required_unless_present = "t_list", conflicts_with = "t_list")]
    t: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    t_list: Option<Vec<usize>>,
}

#[derive(Args)]
struct TradeoffArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure carrying its process exit code and a stable error code.
struct Failure {
    exit: u8,
    code: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { exit: 2, code: "USAGE", message: message.into() }
    }

    fn verification(message: impl Into<String>) -> Self {
        Failure { exit: 4, code: "VERIFICATION_FAILED", message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e.code() {
            "INVALID_INPUT" | "NODE_OUT_OF_RANGE" => 2,
            "FACTORIZATION_TIMEOUT" => 5,
            _ => 3,
        };
        Failure { exit, code: e.code(), message: e.to_string() }
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    json: bool,
    budget: FactorBudget,
}

impl Ctx {
    fn emit(&self, human: impl FnOnce() -> String, report: impl FnOnce() -> Value) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&report()).expect("report serializes"));
        } else {
            print!("{}", human());
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let ctx = Ctx {
        json: cli.json,
        budget: FactorBudget { time: Duration::from_secs(cli.factor_timeout) },
    };
    let result = match cli.cmd {
        Cmd::Plan(a) => cmd_plan(&ctx, a),
        Cmd::Encode(a) => cmd_encode(&ctx, a),
        Cmd::Cluster { cmd: ClusterCmd::Init { plan, msg, out } } => cmd_cluster_init(&ctx, &plan, &msg, &out),
        Cmd::Repair(a) => cmd_repair(&ctx, a),
        Cmd::Bound(a) => cmd_bound(&ctx, a),
        Cmd::Tradeoff(a) => cmd_tradeoff(&ctx, a),
        Cmd::Reproduce { example } => cmd_reproduce(&ctx, example),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if cli.json {
                eprintln!("{}", json!({ "error": f.code, "message": f.message }));
            } else {
                eprintln!("error[{}]: {}", f.code, f.message);
            }
            ExitCode::from(f.exit)
        }
    }
}

fn field_options(ctx: &Ctx, allow_unproven: bool) -> FieldOptions {
    FieldOptions { factor_budget: ctx.budget, allow_unproven_generator: allow_unproven }
}

fn build_plan(ctx: &Ctx, a: &PlanArgs) -> Result<CodePlan, Failure> {
    if let Some(ex) = a.example {
        return Ok(match ex {
            Example::Example1 => build_plan_c1(&fixtures::example1_params())?,
            Example::Example2 => build_plan_c2(&fixtures::example2_params())?,
        });
    }
    let field = field_options(ctx, a.allow_unproven_generator);
    match a.construction {
        Some(1) => {
            if a.r.is_some() {
                return Err(Failure::usage("--r applies to construction 2 only"));
            }
            let k = a.k.ok_or_else(|| Failure::usage("construction 1 needs --k"))?;
            let t = a.t.clone().ok_or_else(|| Failure::usage("construction 1 needs --t"))?;
            let mut p = C1Params::new(a.base_bits, 1, k, t);
            p.s = a.s;
            p.d = a.d;
            p.primes = a.primes.clone();
            p.field = field;
            Ok(build_plan_c1(&p)?)
        }
        _ => {
            if a.s.is_some() || a.d.is_some() || a.t.is_some() {
                return Err(Failure::usage("--s, --d and --t apply to construction 1 only"));
            }
            let r = a.r.ok_or_else(|| Failure::usage("construction 2 needs --r"))?;
            let primes = a.primes.clone().ok_or_else(|| Failure::usage("construction 2 needs --primes"))?;
            let mut p = C2Params::new(a.base_bits, r, primes);
            p.field = field;
            let plan = build_plan_c2(&p)?;
            if let Some(k) = a.k.filter(|&k| k != plan.k) {
                return Err(Failure::usage(format!("--k {k} conflicts with n - r = {}", plan.k)));
            }
            Ok(plan)
        }
    }
}

fn cmd_plan(ctx: &Ctx, a: PlanArgs) -> Outcome {
    let plan = build_plan(ctx, &a)?;
    write_atomic(&a.out, plan.to_json().as_bytes())?;
    ctx.emit(
        || {
            let mut s = format!("{}\ndigest={}\n", plan.summary(), plan.digest());
            for w in &plan.warnings {
                s.push_str(&format!("warning: {w}\n"));
            }
            s
        },
        || {
            json!({
                "out": a.out.display().to_string(),
                "digest": plan.digest(),
                "construction": plan.file.construction,
                "n": plan.n,
                "k": plan.k,
                "t": plan.file.t,
                "primes": plan.file.primes,
                "L": plan.subpacketization(),
                "field_bits": plan.ctx.degree(),
                "warnings": plan.warnings,
            })
        },
    );
    Ok(())
}

fn message_for(plan: &CodePlan, m: &MessageArgs) -> Result<MessagePoly, Failure> {
    match &m.message {
        None => Ok(seeded_message(plan, m.seed)),
        Some(hex) => {
            if hex.len() != plan.k {
                return Err(Failure::usage(format!("--message needs {} coefficients", plan.k)));
            }
            let coeffs = hex.iter().map(|h| plan.ctx.from_hex(h)).collect::<Result<Vec<_>, _>>()?;
            Ok(MessagePoly::new(coeffs))
        }
    }
}

fn cmd_encode(ctx: &Ctx, a: EncodeArgs) -> Outcome {
    let plan = load_plan(&a.plan, ctx.budget)?;
    let cw = encode(&message_for(&plan, &a.msg)?, &plan.eval)?;
    write_codeword(&a.out, &plan.ctx, &cw)?;
    ctx.emit(
        || format!("n={} symbol_bits={} out={}\n", plan.n, plan.ctx.degree(), a.out.display()),
        || json!({ "n": plan.n, "symbol_bits": plan.ctx.degree(), "out": a.out.display().to_string() }),
    );
    Ok(())
}

/// How the cluster file should name the plan: a bare file name when both
/// live in one directory, otherwise an absolute path.
fn plan_ref(plan: &Path, cluster: &Path) -> Result<String, Failure> {
    let dir_of = |p: &Path| -> std::io::Result<PathBuf> {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        parent.canonicalize()
    };
    let plan_dir = dir_of(plan).map_err(Error::from)?;
    let name = plan.file_name().ok_or_else(|| Failure::usage("plan path has no file name"))?;
    if dir_of(cluster).map_err(Error::from)? == plan_dir {
        Ok(name.to_string_lossy().into_owned())
    } else {
        Ok(plan_dir.join(name).display().to_string())
    }
}

fn cmd_cluster_init(ctx: &Ctx, plan_path: &Path, m: &MessageArgs, out: &Path) -> Outcome {
    let plan = load_plan(plan_path, ctx.budget)?;
    let state = match &m.message {
        None => init_cluster(plan, m.seed)?,
        Some(_) => {
            let msg = message_for(&plan, m)?;
            init_cluster_with_message(plan, m.seed, msg)?
        }
    };
    save_cluster(&state, out, &plan_ref(plan_path, out)?)?;
    ctx.emit(
        || format!("nodes={} seed={} out={}\n", state.nodes.len(), state.seed, out.display()),
        || json!({ "nodes": state.nodes.len(), "seed": state.seed, "out": out.display().to_string() }),
    );
    Ok(())
}

fn cmd_repair(ctx: &Ctx, a: RepairArgs) -> Outcome {
    let mut state = load_cluster(&a.cluster, ctx.budget)?;
    if a.node >= state.nodes.len() {
        return Err(Failure::usage(format!("node {} out of range for n = {}", a.node, state.nodes.len())));
    }
    if state.failed_node() != Some(a.node) {
        state.fail_node(a.node)?;
    }
    let strategy = match a.strategy {
        StrategyArg::Pe => Strategy::Pe,
        StrategyArg::Naive => Strategy::Naive,
    };
    let out = state.run_repair(strategy, a.d)?;
    let report = match &out.report {
        RepairReport::Pe(t) => serde_json::from_str::<Value>(&t.to_json(&state.plan.ctx)).expect("transcript is JSON"),
        RepairReport::Naive(r) => json!({
            "failed": r.failed,
            "helpers": r.helpers,
            "strategy": "naive",
            "bits_transmitted": r.bits_transmitted,
            "recovered": state.plan.ctx.to_hex(&r.recovered),
            "verified": out.verified,
        }),
    };
    if let Some(p) = &a.transcript {
        write_atomic(p, (serde_json::to_string_pretty(&report).expect("report serializes") + "\n").as_bytes())?;
    }
    if let Some(p) = &a.log {
        write_atomic(p, out.log.to_csv().as_bytes())?;
    }
    ctx.emit(
        || match &out.report {
            RepairReport::Pe(t) => {
                format!("bits={} cutset={} verified={}\n", t.bits_transmitted, t.cutset_bits, out.verified)
            }
            RepairReport::Naive(r) => format!("bits={} verified={}\n", r.bits_transmitted, out.verified),
        },
        || report.clone(),
    );
    if !out.verified {
        return Err(Failure::verification(format!("node {} was not recovered exactly", a.node)));
    }
    Ok(())
}

fn cmd_bound(ctx: &Ctx, a: BoundArgs) -> Outcome {
    let q = match (a.t, a.t_list) {
        (Some(t), _) => BoundQuery::uniform(a.k, t)?,
        (None, Some(list)) => BoundQuery::new(a.k, list)?,
        (None, None) => return Err(Failure::usage("give --t or --t-list")),
    };
    let l = min_subpacketization(&q);
    let conv = conventional_lower_bound(a.k)?;
    ctx.emit(
        || format!("{l}\n"),
        || {
            json!({
                "k": a.k,
                "t_list": q.t_list(),
                "w": q.w(),
                "L_min": l.to_string(),
                "conventional": conv.to_string(),
            })
        },
    );
    Ok(())
}

fn cmd_tradeoff(ctx: &Ctx, a: TradeoffArgs) -> Outcome {
    let rows = tradeoff_table(a.n, a.k)?;
    let csv = tradeoff_csv(&rows);
    if let Some(p) = &a.out {
        write_atomic(p, csv.as_bytes())?;
    }
    ctx.emit(
        || if a.out.is_some() { String::new() } else { csv.clone() },
        || {
            Value::Array(
                rows.iter()
                    .map(|r| {
                        json!({
                            "t": r.t,
                            "L_min": r.l_min.to_string(),
                            "d_max": r.d_max,
                            "beta_bar_min_num": r.beta_bar_min.numer(),
                            "beta_bar_min_den": r.beta_bar_min.denom(),
                        })
                    })
                    .collect(),
            )
        },
    );
    Ok(())
}

struct Row {
    label: String,
    bits: u64,
    expected: u64,
    verified: bool,
}

impl Row {
    fn pass(&self) -> bool {
        self.verified && self.bits == self.expected
    }
}

fn cmd_reproduce(ctx: &Ctx, ex: Example) -> Outcome {
    let (name, rows) = match ex {
        Example::Example1 => ("example1", reproduce_example1()?),
        Example::Example2 => ("example2", reproduce_example2()?),
    };
    let all = rows.iter().all(Row::pass);
    ctx.emit(
        || {
            let mut s = format!("{:<24} {:>7} {:>9}  {:<8} result\n", "repair", "bits", "expected", "verified");
            for r in &rows {
                s.push_str(&format!(
                    "{:<24} {:>7} {:>9}  {:<8} {}\n",
                    r.label,
                    r.bits,
                    r.expected,
                    r.verified,
                    if r.pass() { "PASS" } else { "FAIL" }
                ));
            }
            s.push_str(&format!("{name}: {}\n", if all { "PASS" } else { "FAIL" }));
            s
        },
        || {
            json!({
                "example": name,
                "pass": all,
                "rows": rows.iter().map(|r| json!({
                    "repair": r.label,
                    "bits": r.bits,
                    "expected": r.expected,
                    "verified": r.verified,
                    "pass": r.pass(),
                })).collect::<Vec<_>>(),
            })
        },
    );
    if !all {
        return Err(Failure::verification(format!("{name} does not match the published numbers")));
    }
    Ok(())
}

fn reproduce_example1() -> Result<Vec<Row>, Failure> {
    let plan = build_plan_c1(&fixtures::example1_params())?;
    let msg = fixtures::example1_message(&plan.ctx);
    let cw = encode(&msg, &plan.eval)?;
    let mut rows = Vec::new();

    let mut t = repair(&plan, &cw, 0, Some(9))?;
    let verified = t.verify(&cw.symbols[0]);
    rows.push(Row { label: "g_1 pe d=9".into(), bits: t.bits_transmitted, expected: 10395, verified });

    let published = fixtures::example1_published_subspace(&plan)?;
    let mut p = repair_c1_with_subspace(&plan, &cw, 0, 9, &published)?;
    let verified = p.verify(&cw.symbols[0]);
    rows.push(Row { label: "g_1 pe published S".into(), bits: p.bits_transmitted, expected: 10395, verified });

    let mut st = init_cluster_with_message(plan, 0, msg)?;
    st.fail_node(0)?;
    let naive = st.run_repair(Strategy::Naive, None)?;
    rows.push(Row {
        label: "g_1 naive".into(),
        bits: naive.log.total_bits,
        expected: 18480,
        verified: naive.verified,
    });
    Ok(rows)
}

fn reproduce_example2() -> Result<Vec<Row>, Failure> {
    let plan = build_plan_c2(&fixtures::example2_params())?;
    let cw = encode(&fixtures::example2_message(&plan.ctx), &plan.eval)?;
    let mut rows = Vec::with_capacity(plan.n);
    for node in 0..plan.n {
        let (g, j) = plan.locate(node)?;
        let mut t = repair(&plan, &cw, node, None)?;
        let verified = t.verify(&cw.symbols[node]) && t.bits_transmitted == t.cutset_bits;
        rows.push(Row {
            label: format!("node {node} (A_{} #{})", g + 1, j + 1),
            bits: t.bits_transmitted,
            expected: [300, 220, 156][g],
            verified,
        });
    }
    Ok(rows)
}
