use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lrc_core::bounds::{consecutive_groups, distance_bound, effective_rate, scalar_bound, witness_search, BoundQuery, WitnessExit};
use lrc_core::field::Field;
use lrc_core::flownet::{build_flownet, extract_code, lemma2_capacity, min_cut_all_dcs, rlnc_verify};
use lrc_core::lrc::{CodeParams, Lrc};
use lrc_core::storesim::{self, StoreError};
use lrc_core::verifier::{certify, exact_distance, exact_locality};

const VERIFY_LIMIT: usize = 14;
const FLOWGRAPH_LIMIT: usize = 10;
/// Symbols per block in `simulate`.
const SIM_BLOCK_LEN: usize = 1024;

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "lrc", version, about = "Locally repairable codes: bounds, verification, flow graphs and a storage simulator")]
struct Cli {
    /// Output style: readable lines or one key=value per line.
    #[arg(long, value_enum, global = true, default_value_t = Format::Human)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Kv,
}

#[derive(Subcommand)]
enum Command {
    /// Distance bound for given length, locality and file/node sizes.
    Bound(BoundArgs),
    /// Encode a file into node files plus a manifest.
    Encode(EncodeArgs),
    /// Rebuild one node from its repair group (deleting it first if present).
    Repair(RepairArgs),
    /// Decode the file from a set of nodes.
    Retrieve(RetrieveArgs),
    /// Compare repair traffic of the LRC against an RS baseline.
    Simulate(SimulateArgs),
    /// Exhaustively check distance and locality of the explicit code.
    Verify(VerifyArgs),
    /// Build the information flow graph, compute its capacity, optionally run
    /// random network coding trials.
    Flowgraph(FlowArgs),
}

#[derive(Args)]
struct FieldArgs {
    /// Field GF(2^p).
    #[arg(long, conflicts_with = "q")]
    p: Option<u32>,
    /// Field order q = 2^p.
    #[arg(long)]
    q: Option<u64>,
}

impl FieldArgs {
    fn field(&self) -> anyhow::Result<Field> {
        Ok(match (self.p, self.q) {
            (_, Some(q)) => Field::with_order(q)?,
            (Some(p), None) => Field::with_bits(p)?,
            (None, None) => Field::default(),
        })
    }
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    r: usize,
    #[command(flatten)]
    field: FieldArgs,
}

impl CodeArgs {
    fn params(&self) -> anyhow::Result<CodeParams> {
        Ok(CodeParams::new(self.n, self.k, self.r, self.field.field()?)?)
    }
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    /// File size in symbols; defaults to r*k.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Symbols per node; defaults to r+1 with --k, else 1.
    #[arg(long)]
    alpha: Option<usize>,
    /// Scalar dimension; also enables the rate and tightness report.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    dir: PathBuf,
}

#[derive(Args)]
struct RepairArgs {
    #[arg(long)]
    dir: PathBuf,
    #[arg(long)]
    node: usize,
}

#[derive(Args)]
struct RetrieveArgs {
    #[arg(long)]
    dir: PathBuf,
    /// Comma-separated node ids; defaults to every node file present.
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value_t = 10)]
    failures: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Allow n above the default size guard.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long = "M")]
    m: usize,
    #[arg(long)]
    alpha: usize,
    /// Run random linear network coding trials.
    #[arg(long)]
    rlnc: bool,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    field: FieldArgs,
    /// Write the graph as an edge list.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Allow n above the default size guard.
    #[arg(long)]
    force: bool,
}

/// Collected output, printed in the chosen format.
#[derive(Default)]
struct Report {
    kv: Vec<(&'static str, String)>,
    human: Vec<String>,
    /// Printed normally, but the process exits with the verification code.
    failed: bool,
}

impl Report {
    fn kv(&mut self, key: &'static str, value: impl ToString) -> &mut Self {
        self.kv.push((key, value.to_string()));
        self
    }

    fn line(&mut self, line: impl Into<String>) -> &mut Self {
        self.human.push(line.into());
        self
    }

    fn print(&self, format: Format) {
        match format {
            Format::Kv => self.kv.iter().for_each(|(k, v)| println!("{k}={v}")),
            Format::Human => self.human.iter().for_each(|l| println!("{l}")),
        }
    }
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = match error.downcast_ref::<StoreError>() {
            Some(StoreError::Io { .. }) => EXIT_IO,
            Some(StoreError::Checksum { .. } | StoreError::PeerMissing { .. } | StoreError::Lrc(_) | StoreError::Rs(_)) => {
                EXIT_VERIFY
            }
            _ if error.downcast_ref::<std::io::Error>().is_some() => EXIT_IO,
            _ => EXIT_USAGE,
        };
        Failure { code, error }
    }
}

fn verification_failed(mut report: Report) -> Result<Report, Failure> {
    report.failed = true;
    Ok(report)
}

fn size_guard(n: usize, limit: usize, force: bool, what: &str) -> Result<(), Failure> {
    if n <= limit {
        return Ok(());
    }
    if force {
        eprintln!("warning: {what} with n={n} is exponential in n and may take very long");
        Ok(())
    } else {
        Err(anyhow!("n={n} exceeds the {what} size guard of {limit}; pass --force to run anyway").into())
    }
}

fn bound(args: &BoundArgs) -> Result<Report, Failure> {
    let mut out = Report::default();
    let (m, alpha) = match (args.k, args.m, args.alpha) {
        (Some(k), m, alpha) => (m.unwrap_or(args.r * k), alpha.unwrap_or(args.r + 1)),
        (None, Some(m), alpha) => (m, alpha.unwrap_or(1)),
        (None, None, _) => return Err(anyhow!("give --M (with optional --alpha) or --k").into()),
    };
    let d = distance_bound(&BoundQuery {
        n: args.n,
        r: args.r,
        file_size: m,
        alpha,
    })?;
    out.kv("n", args.n).kv("r", args.r).kv("M", m).kv("alpha", alpha).kv("bound", d);
    out.line(format!("d<={d}"));
    if let Some(k) = args.k {
        let scalar = scalar_bound(args.n, k, args.r)?;
        out.kv("scalar_bound", scalar);
        out.line(format!("scalar (alpha=1, M=k): d<={scalar}"));
        if let Ok(params) = CodeParams::gf256(args.n, k, args.r) {
            let rate = effective_rate(&params);
            out.kv("rate", rate);
            out.line(format!("rate={rate}"));
        }
        let tight = k % (args.r + 1) != 0;
        out.kv("tight_expected", tight);
        if !tight {
            out.line(format!(
                "warning: r+1={} divides k={k}; the explicit construction is not expected to meet this bound",
                args.r + 1
            ));
        }
    }
    Ok(out)
}

fn encode(args: &EncodeArgs) -> Result<Report, Failure> {
    let params = args.code.params()?;
    let data = fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let m = storesim::store(&data, &params, &args.dir)?;
    let mut out = Report::default();
    out.kv("nodes", m.n)
        .kv("file_len", m.file_len)
        .kv("pad_len", m.pad_len)
        .kv("block_bytes", m.block_bytes())
        .kv("node_bytes", m.node_bytes());
    out.line(format!(
        "stored {} bytes as {} nodes of {} bytes ({} bytes padding) in {}",
        m.file_len,
        m.n,
        m.node_bytes(),
        m.pad_len,
        args.dir.display()
    ));
    Ok(out)
}

fn repair(args: &RepairArgs) -> Result<Report, Failure> {
    let report = if storesim::node_path(&args.dir, args.node).exists() {
        storesim::fail_and_repair(&args.dir, args.node)?
    } else {
        storesim::repair(&args.dir, args.node)?
    };
    let contacted = join(&report.contacted);
    let mut out = Report::default();
    out.kv("failed", report.failed)
        .kv("contacted", &contacted)
        .kv("blocks", report.blocks)
        .kv("bytes", report.bytes)
        .kv("success", report.success);
    out.line(format!(
        "repaired node {} from nodes {contacted}: {} blocks, {} bytes",
        report.failed, report.blocks, report.bytes
    ));
    Ok(out)
}

fn retrieve(args: &RetrieveArgs) -> Result<Report, Failure> {
    let nodes = match &args.nodes {
        Some(nodes) => nodes.clone(),
        None => {
            let manifest = storesim::load_manifest(&args.dir)?;
            storesim::present_nodes(&args.dir, &manifest)
        }
    };
    let data = storesim::retrieve(&args.dir, &nodes, Some(&args.out))?;
    let mut out = Report::default();
    out.kv("nodes", join(&nodes)).kv("bytes", data.len());
    out.line(format!(
        "retrieved {} bytes from nodes {} into {}",
        data.len(),
        join(&nodes),
        args.out.display()
    ));
    Ok(out)
}

fn simulate(args: &SimulateArgs) -> Result<Report, Failure> {
    let params = args.code.params()?;
    let c = storesim::compare_schemes(&params, args.failures, SIM_BLOCK_LEN, args.seed)?;
    let mut out = Report::default();
    out.kv("failures", c.failures.len())
        .kv("lrc_overhead", format!("{:.4}", c.lrc.overhead))
        .kv("rs_overhead", format!("{:.4}", c.rs.overhead))
        .kv("overhead_ratio", format!("{:.4}", c.lrc.overhead / c.rs.overhead))
        .kv("lrc_nodes_contacted", c.lrc.nodes_contacted)
        .kv("rs_nodes_contacted", c.rs.nodes_contacted)
        .kv("lrc_repair_bytes", c.lrc.repair_bytes)
        .kv("rs_repair_bytes", c.rs.repair_bytes);
    out.line(format!(
        "{} failures, blocks of {SIM_BLOCK_LEN} symbols, lrc stores {:.4}x the rs baseline",
        c.failures.len(),
        c.lrc.overhead / c.rs.overhead
    ));
    out.line("scheme  overhead  contacted  repair_bytes");
    out.line(format!(
        "lrc     {:<8.4}  {:<9}  {}",
        c.lrc.overhead, c.lrc.nodes_contacted, c.lrc.repair_bytes
    ));
    out.line(format!(
        "rs      {:<8.4}  {:<9}  {}",
        c.rs.overhead, c.rs.nodes_contacted, c.rs.repair_bytes
    ));
    Ok(out)
}

fn exit_name(exit: WitnessExit) -> &'static str {
    match exit {
        WitnessExit::Line9 => "line9",
        WitnessExit::Line12 => "line12",
        WitnessExit::Exhausted => "exhausted",
    }
}

fn verify(args: &VerifyArgs) -> Result<Report, Failure> {
    size_guard(args.code.n, VERIFY_LIMIT, args.force, "verify")?;
    let params = args.code.params()?;
    let cert = certify(&params)?;
    let gen = Lrc::new(params.clone())?.generator_view();
    let witness = witness_search(&gen, &consecutive_groups(params.n(), params.r()))?;
    let verdict = if cert.passed() { "PASS" } else { "FAIL" };
    let mut out = Report::default();
    out.kv("distance", cert.distance)
        .kv("bound", cert.bound)
        .kv("locality", cert.locality())
        .kv("any_k_decodable", cert.any_k_decodable)
        .kv("tight_expected", cert.bound_expected_tight)
        .kv("witness_set", join(&witness.set))
        .kv("witness_bound", witness.bound(params.n()))
        .kv("witness_exit", exit_name(witness.exit))
        .kv("result", verdict);
    out.line(format!(
        "distance={} bound={} locality={} {verdict}",
        cert.distance,
        cert.bound,
        cert.locality()
    ));
    let steps: Vec<String> = witness
        .steps
        .iter()
        .map(|s| format!("+{{{}}} h={}", join(&s.added), s.gain))
        .collect();
    out.line(format!(
        "witness: |S|={} d<={} exit={} steps: {}",
        witness.set.len(),
        witness.bound(params.n()),
        exit_name(witness.exit),
        steps.join(" ")
    ));
    if !cert.bound_expected_tight {
        out.line(format!(
            "note: r+1={} divides k={}; only d >= n-k+1 is guaranteed",
            params.r() + 1,
            params.k()
        ));
    }
    if !cert.any_k_decodable {
        out.line("some k-subset of nodes cannot decode");
    }
    if cert.passed() {
        Ok(out)
    } else {
        verification_failed(out)
    }
}

fn flowgraph(args: &FlowArgs) -> Result<Report, Failure> {
    size_guard(args.n, FLOWGRAPH_LIMIT, args.force, "flowgraph")?;
    let net = build_flownet(args.n, args.r, args.m, args.alpha)?;
    if let Some(path) = &args.out {
        fs::write(path, net.edge_list()).with_context(|| format!("writing {}", path.display()))?;
    }
    let cut = min_cut_all_dcs(&net);
    let closed = lemma2_capacity(args.n, args.r, args.m, args.alpha);
    let mut ok = closed.as_ref() == Ok(&cut);
    let mut out = Report::default();
    out.kv("d", net.distance())
        .kv("collectors", net.collectors().len())
        .kv("vertices", net.vertex_count())
        .kv("edges", net.edges().len())
        .kv("min_cut", cut);
    out.line(format!(
        "d={} collectors={} vertices={} edges={}",
        net.distance(),
        net.collectors().len(),
        net.vertex_count(),
        net.edges().len()
    ));
    match &closed {
        Ok(c) => {
            out.kv("closed_form", c);
            out.line(format!("min_cut={cut} closed_form={c}"));
        }
        Err(e) => {
            out.kv("closed_form", "error");
            out.line(format!("min_cut={cut} closed form check failed: {e}"));
        }
    }
    if args.rlnc {
        let f = args.field.field()?;
        let report = rlnc_verify(&net, &f, args.trials, args.seed)?;
        out.kv("q", f.order())
            .kv("trials", args.trials)
            .kv("passes", report.passes())
            .kv("collector_failures", report.collector_failures())
            .kv("local_failures", report.local_failures());
        out.line(format!(
            "rlnc over GF({}): {}/{} trials pass ({} collector failures, {} local failures)",
            f.order(),
            report.passes(),
            args.trials,
            report.collector_failures(),
            report.local_failures()
        ));
        if let Some(trial) = report.trials.iter().find(|t| t.passed()) {
            let gen = extract_code(&net, &f, trial)?;
            let d = exact_distance(&gen)?;
            let locality = (0..args.n)
                .map(|j| exact_locality(&gen, j))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .max()
                .unwrap_or(0);
            let good = d >= net.distance() && locality <= args.r;
            ok &= good;
            out.kv("extracted_trial", trial.index)
                .kv("extracted_distance", d)
                .kv("extracted_locality", locality);
            out.line(format!(
                "trial {} code: distance={d} locality={locality} {}",
                trial.index,
                if good { "PASS" } else { "FAIL" }
            ));
        }
    }
    if ok {
        Ok(out)
    } else {
        verification_failed(out)
    }
}

fn join(ids: &[usize]) -> String {
    ids.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Bound(a) => bound(a),
        Command::Encode(a) => encode(a),
        Command::Repair(a) => repair(a),
        Command::Retrieve(a) => retrieve(a),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Flowgraph(a) => flowgraph(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(report) => {
            report.print(cli.format);
            if report.failed {
                ExitCode::from(EXIT_VERIFY)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
