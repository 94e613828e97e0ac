//! `pir-squeeze`: simulate, audit and tabulate disguise-and-squeeze PIR.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use pir_squeeze::audit::{
    redundancy_audit, strategy_completeness_check, structural_privacy_audit, PrivacyReport,
    RedundancyReport, SpanReport,
};
use pir_squeeze::codes::CodeFlavor;
use pir_squeeze::parallel::Execution;
use pir_squeeze::rates::{self, Rational};
use pir_squeeze::scheme::{
    build_code, seeded_plan, seeded_strategy, simulate, sub_rng, FaultTarget, SystemParams,
    Transcript, Variant,
};
use pir_squeeze::Error;

const DEFAULT_BUDGET: usize = 10_000;
const DEFAULT_RANDOMIZED_TRIALS: usize = 200;
const STREAM_FAULT: u64 = 99;

#[derive(Parser)]
#[command(
    name = "pir-squeeze",
    version,
    about = "Disguise-and-squeeze private information retrieval"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a retrieval end to end and print its transcript.
    Run(Common),
    /// Audit privacy structure, spanning and redundancy of one plan.
    Audit(Common),
    /// Tabulate closed-form rates and capacity references.
    Rates(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    General,
    Grs,
    Multifile,
    Cyclic,
    #[value(name = "generalT")]
    GeneralT,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::General => Variant::GeneralT2,
            VariantArg::Grs => Variant::GrsT2,
            VariantArg::Multifile => Variant::MultiFile,
            VariantArg::Cyclic => Variant::CyclicAdjacent,
            VariantArg::GeneralT => Variant::GeneralT,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct Common {
    /// Number of files.
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Number of servers (for `rates`: largest N tabulated).
    #[arg(long)]
    n: Option<usize>,
    /// Collusion size.
    #[arg(long)]
    t: Option<usize>,
    /// Code dimension.
    #[arg(long)]
    k: Option<usize>,
    /// Number of desired files (multifile only).
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, value_enum, default_value = "general")]
    variant: VariantArg,
    /// Field size; 0 picks one automatically.
    #[arg(long, default_value_t = 0)]
    q: u64,
    #[arg(long, env = "PIR_SQUEEZE_SEED", default_value_t = 0)]
    seed: u64,
    /// Independent retrievals to run.
    #[arg(long)]
    trials: Option<usize>,
    /// Permutation tuples the span check may examine.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Write output here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Corrupt one mixed undesired row before auditing.
    #[arg(long)]
    inject_fault: bool,
}

impl Common {
    fn params(&self) -> Result<SystemParams, Error> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| Error::InvalidParams(format!("--{name} is required")))
        };
        let variant = Variant::from(self.variant);
        let t = self
            .t
            .unwrap_or(if variant == Variant::GeneralT { 3 } else { 2 });
        SystemParams::new(
            variant,
            self.m,
            need(self.n, "n")?,
            t,
            need(self.k, "k")?,
            self.p,
            self.q,
            self.seed,
        )
    }
}

fn emit(common: &Common, text: &str) -> Result<(), Error> {
    match &common.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidParams(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cmd_run(common: &Common) -> Result<bool, Error> {
    let params = common.params()?;
    let trials = common.trials.unwrap_or(if params.variant.is_randomized() {
        DEFAULT_RANDOMIZED_TRIALS
    } else {
        1
    });
    let t = simulate(&params, trials, Execution::default())?;
    let text = match common.format {
        Format::Json => to_json(&t),
        Format::Table => transcript_table(&t),
    };
    emit(common, &text)?;
    Ok(t.matches_closed_form())
}

fn transcript_table(t: &Transcript) -> String {
    let p = &t.params;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "variant {}  (M,N,T,K,P)=({},{},{},{},{})  q={}  seed={}",
        p.variant, p.m, p.n, p.t, p.k, p.p, p.q, p.seed
    );
    let _ = writeln!(s, "{:>6} {:>5} {:>8}", "server", "I_n", "symbols");
    for r in &t.per_server {
        let _ = writeln!(s, "{:>6} {:>5} {:>8}", r.server, r.i_n, r.answer_symbols);
    }
    let _ = writeln!(s, "download {}  L {}", t.download_total, t.l);
    let _ = writeln!(
        s,
        "rate {}  closed form {}",
        t.achieved_rate, t.closed_form_rate
    );
    let _ = writeln!(
        s,
        "success {}  failures {}/{}",
        t.success, t.epsilon_trials.failures, t.epsilon_trials.runs
    );
    s
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

fn privacy_json(r: &PrivacyReport) -> Value {
    json!({
        "verdict": r.verdict,
        "witness": r.witness.as_deref().map(one_based),
        "coalitions": r.coalitions.iter().map(|c| json!({
            "servers": one_based(&c.servers),
            "target_intersections": c.target_intersections,
            "target_exclusive": c.target_exclusive,
            "files": c.files.iter().map(|f| json!({
                "file": f.file + 1,
                "desired": f.desired,
                "intersections": f.intersections,
                "exclusive": f.exclusive,
                "joint": f.joint,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn span_json(r: &SpanReport) -> Value {
    json!({
        "mode": r.mode,
        "tuple_space": r.tuple_space.map(|x| x.to_string()),
        "trials": r.trials,
        "failures": r.failures,
        "verdict": r.verdict,
        "witness": r.witness.as_ref().map(|w| json!({
            "file": w.file + 1,
            "permutations": w.perms.iter().map(|p| one_based(p)).collect::<Vec<_>>(),
        })),
    })
}

fn redundancy_json(r: &RedundancyReport) -> Value {
    json!({
        "expected": r.expected,
        "exact": r.exact,
        "ranks": r.ranks.iter().map(|&(f, rank)| json!({"file": f + 1, "rank": rank})).collect::<Vec<_>>(),
        "verdict": r.verdict,
    })
}

fn cmd_audit(common: &Common) -> Result<bool, Error> {
    let params = common.params()?;
    let code = build_code(&params)?;
    let mut plan = seeded_plan(&params, &code, params.seed)?;
    let fault = if common.inject_fault {
        Some(plan.inject_fault(FaultTarget::Tilde, &mut sub_rng(params.seed, STREAM_FAULT))?)
    } else {
        None
    };
    let strategy = seeded_strategy(&params, params.seed)?;
    let privacy = structural_privacy_audit(&plan);
    let span = strategy_completeness_check(
        &plan,
        &strategy,
        common.budget,
        params.seed,
        Execution::default(),
    );
    let redundancy = redundancy_audit(&plan);
    let pass = privacy.verdict && span.verdict && redundancy.verdict;

    let text = match common.format {
        Format::Json => {
            let v = json!({
                "params": {
                    "m": params.m, "n": params.n, "t": params.t, "k": params.k, "p": params.p,
                    "variant": params.variant.name(), "q": params.q, "seed": params.seed,
                },
                "fault": fault.as_ref().map(|f| json!({
                    "file": f.file + 1, "server": f.server + 1, "row": f.row + 1,
                    "replaced": format!("{:?}", f.replaced),
                })),
                "privacy": privacy_json(&privacy),
                "span": span_json(&span),
                "redundancy": redundancy_json(&redundancy),
                "pass": pass,
            });
            to_json(&v)
        }
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "privacy    {}  ({} coalitions){}",
                verdict(privacy.verdict),
                privacy.coalitions.len(),
                privacy
                    .witness
                    .as_ref()
                    .map(|w| format!("  witness servers {:?}", one_based(w)))
                    .unwrap_or_default()
            );
            let _ = writeln!(
                s,
                "span       {}  ({:?}, {} checks, {} failures)",
                verdict(span.verdict),
                span.mode,
                span.trials,
                span.failures
            );
            let ranks: Vec<usize> = redundancy.ranks.iter().map(|r| r.1).collect();
            let _ = writeln!(
                s,
                "redundancy {}  (ranks {:?}, expected {})",
                verdict(redundancy.verdict),
                ranks,
                redundancy.expected
            );
            s
        }
    };
    emit(common, &text)?;
    Ok(pass)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct RateRow {
    m: u64,
    n: u64,
    t: u64,
    k: u64,
    fghk: Option<Rational>,
    theorem1: Option<Rational>,
    grs: Option<Rational>,
    cyclic: Option<Rational>,
    general_t: Option<Rational>,
    scheme: Option<Rational>,
    capacity: Vec<rates::CapacityRef>,
}

fn rate_row(m: u64, n: u64, t: u64, k: u64) -> RateRow {
    let two = t == 2;
    let theorem1 = two
        .then(|| rates::rate_multi(m, n, k, 1, CodeFlavor::GenericMds).ok())
        .flatten();
    let grs = two
        .then(|| rates::rate_multi(m, n, k, 1, CodeFlavor::Grs).ok())
        .flatten();
    let cyclic = (two && m == 2)
        .then(|| rates::rate_cyclic(n, k, CodeFlavor::Grs).ok())
        .flatten();
    let general_t = (t >= 3 && m == 2)
        .then(|| rates::rate_general_t(n, t, k).ok())
        .flatten();
    RateRow {
        m,
        n,
        t,
        k,
        fghk: rates::fghk_rate(m, n, t, k).ok(),
        scheme: if two { theorem1 } else { general_t },
        theorem1,
        grs,
        cyclic,
        general_t,
        capacity: if m == 2 {
            rates::capacity_refs(n, t, k)
        } else {
            Vec::new()
        },
    }
}

fn cmd_rates(common: &Common) -> Result<bool, Error> {
    let m = common.m as u64;
    let mut rows = Vec::new();
    match (common.n, common.k) {
        (Some(n), Some(k)) => {
            let t = common.t.unwrap_or(2) as u64;
            rows.push(rate_row(m, n as u64, t, k as u64));
        }
        _ => {
            let n_max = common.n.unwrap_or(8) as u64;
            let ts: Vec<u64> = match common.t {
                Some(t) => vec![t as u64],
                None => vec![2, 3],
            };
            for t in ts {
                for n in t + 2..=n_max {
                    for k in 1..=n - t {
                        rows.push(rate_row(m, n, t, k));
                    }
                }
            }
        }
    }
    let text = match common.format {
        Format::Json => to_json(&rows),
        Format::Table => {
            let cell =
                |r: &Option<Rational>| r.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
            let mut s = format!(
                "{:>3} {:>3} {:>3} {:>3} {:>10} {:>10} {:>10} {:>10} {:>10}  capacity\n",
                "M", "N", "T", "K", "fghk", "theorem1", "grs", "cyclic", "general_t"
            );
            for r in &rows {
                let caps: Vec<String> = r
                    .capacity
                    .iter()
                    .map(|c| format!("{}={}", c.label, c.value))
                    .collect();
                let _ = writeln!(
                    s,
                    "{:>3} {:>3} {:>3} {:>3} {:>10} {:>10} {:>10} {:>10} {:>10}  {}",
                    r.m,
                    r.n,
                    r.t,
                    r.k,
                    cell(&r.fghk),
                    cell(&r.theorem1),
                    cell(&r.grs),
                    cell(&r.cyclic),
                    cell(&r.general_t),
                    caps.join(" ")
                );
            }
            s
        }
    };
    emit(common, &text)?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Audit(c) => cmd_audit(c),
        Command::Rates(c) => cmd_rates(c),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let err = json!({"error": {"code": e.code(), "message": e.to_string()}});
            eprintln!("{err}");
            ExitCode::from(2)
        }
    }
}
