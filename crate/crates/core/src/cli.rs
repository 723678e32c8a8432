//! Command-line driver: `compile`, `simulate`, `sweep` and `report`.
//!
//! Exit codes: 0 success, 1 user-facing diagnostics (bad input, bad
//! flags, deadlock under manual FIFOs), 2 internal invariant violations
//! (compiler bug, simulator output differing from the reference).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::{emit_netlist, estimate_resources, parse_netlist};
use crate::compile::{compile, CompileOptions, Compiled};
use crate::corpus;
use crate::design::Design;
use crate::frontend::{parse_pipeline, Program};
use crate::image_io::{self, write_file};
use crate::interp::eval;
use crate::sim::{random_stimulus, simulate, SimError, SimOptions};
use crate::types::Rate;
use crate::value::Value;

#[derive(Debug, Parser)]
#[command(
    name = "pixelflow",
    version,
    about = "Compile image pipelines to streaming hardware designs and simulate them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Map a pipeline at a throughput and write its netlist and reports.
    Compile(CompileArgs),
    /// Run a netlist cycle by cycle on input images.
    Simulate(SimulateArgs),
    /// Compile and simulate a pipeline at several throughputs.
    Sweep(SweepArgs),
    /// Print the resource estimate of a netlist.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    pub pipeline: PathBuf,
    /// Pixels per cycle, e.g. `1`, `1/4`, `0.5`, `8`.
    #[arg(short = 'T', long)]
    pub throughput: Option<String>,
    /// Force a FIFO depth, `producer->consumer=N` or `eK=N`. Repeatable.
    #[arg(long = "manual-fifo", value_name = "EDGE=DEPTH")]
    pub manual_fifo: Vec<String>,
    /// Print how each operator was mapped.
    #[arg(long)]
    pub explain: bool,
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
    /// TOML file with defaults; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub netlist: PathBuf,
    /// Input image(s); several are zipped into one image of tuples.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Where to write the output image (.pgm, .png or .raw).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Write a VCD trace of FIFO activity.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the simulation report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub max_cycles: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub pipeline: PathBuf,
    /// Comma-separated throughputs.
    #[arg(short = 'T', long, value_delimiter = ',')]
    pub rates: Vec<String>,
    /// Input image(s); defaults to the corpus input or seeded random data.
    #[arg(short, long)]
    pub input: Vec<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub netlist: PathBuf,
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
}

/// Optional defaults read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub throughput: Option<toml::Value>,
    pub explain: Option<bool>,
    pub out_dir: Option<PathBuf>,
    pub max_cycles: Option<u64>,
    pub rates: Option<Vec<toml::Value>>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub manual_fifo: BTreeMap<String, u64>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub msg: String,
}

impl CliError {
    fn user(msg: impl Into<String>) -> CliError {
        CliError {
            code: 1,
            msg: msg.into(),
        }
    }

    fn internal(msg: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            msg: msg.into(),
        }
    }
}

fn toml_rate(v: &toml::Value) -> Result<Rate, CliError> {
    match v {
        toml::Value::String(s) => parse_rate(s),
        toml::Value::Integer(i) => Ok(Rate::from_int(*i)),
        toml::Value::Float(f) => parse_rate(&f.to_string()),
        other => Err(CliError::user(format!(
            "config: throughput must be a number or string, found {other}"
        ))),
    }
}

pub fn parse_rate(s: &str) -> Result<Rate, CliError> {
    let r: Rate = s
        .parse()
        .map_err(|_| CliError::user(format!("invalid throughput `{s}`")))?;
    if !r.is_positive() {
        return Err(CliError::user(format!(
            "throughput must be positive, found `{s}`"
        )));
    }
    Ok(r)
}

fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::user(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::user(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::user(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, CliError> {
    let src = read_text(path)?;
    parse_pipeline(&src).map_err(|e| CliError::user(format!("{}:{e}", path.display())))
}

fn compile_at(
    prog: &Program,
    rate: Rate,
    manual: &BTreeMap<String, u64>,
) -> Result<Compiled, CliError> {
    let opts = CompileOptions {
        throughput: rate,
        manual_fifo: manual.clone(),
    };
    compile(prog, &opts).map_err(|e| {
        if e.is_internal() {
            CliError::internal(e.to_string())
        } else {
            CliError::user(e.to_string())
        }
    })
}

/// File-name tag for a rate: `1/4` becomes `1_4`.
pub fn rate_tag(r: Rate) -> String {
    r.to_string().replace('/', "_")
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("pipeline")
        .to_string()
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    write_file(path, text.as_bytes()).map_err(|e| CliError::user(e.to_string()))
}

#[derive(Serialize)]
struct BufferReport<'a> {
    design: &'a str,
    throughput: Rate,
    latency_total: u64,
    total_bits: u64,
    edges: Vec<BufferEdge>,
    delays: BTreeMap<String, u64>,
}

#[derive(Serialize)]
struct BufferEdge {
    edge: String,
    depth: u64,
    bits: u64,
}

fn buffer_report(c: &Compiled) -> String {
    let d = &c.design;
    let r = BufferReport {
        design: &d.name,
        throughput: d.throughput,
        latency_total: d.latency_total,
        total_bits: d.edges.iter().map(|e| e.depth * e.bits).sum(),
        edges: (0..d.edges.len())
            .map(|k| BufferEdge {
                edge: d.edge_label(k),
                depth: d.edges[k].depth,
                bits: d.edges[k].bits,
            })
            .collect(),
        delays: d
            .instances
            .iter()
            .map(|i| (i.name.clone(), i.start))
            .collect(),
    };
    serde_json::to_string_pretty(&r).expect("report serializes") + "\n"
}

fn manual_overrides(
    flags: &[String],
    config: &BTreeMap<String, u64>,
) -> Result<BTreeMap<String, u64>, CliError> {
    let mut out = config.clone();
    for f in flags {
        let (edge, depth) = f.rsplit_once('=').ok_or_else(|| {
            CliError::user(format!("--manual-fifo expects EDGE=DEPTH, found `{f}`"))
        })?;
        let depth = depth
            .parse()
            .map_err(|_| CliError::user(format!("bad FIFO depth in `{f}`")))?;
        out.insert(edge.to_string(), depth);
    }
    Ok(out)
}

pub fn cmd_compile(a: &CompileArgs, out: &mut String) -> Result<(), CliError> {
    let cfg = load_config(a.config.as_deref())?;
    let rate = match (&a.throughput, &cfg.throughput) {
        (Some(s), _) => parse_rate(s)?,
        (None, Some(v)) => toml_rate(v)?,
        (None, None) => Rate::ONE,
    };
    let explain = a.explain || cfg.explain.unwrap_or(false);
    let dir = a
        .out_dir
        .clone()
        .or(cfg.out_dir)
        .unwrap_or_else(|| PathBuf::from("."));
    let manual = manual_overrides(&a.manual_fifo, &cfg.manual_fifo)?;
    let prog = load_program(&a.pipeline)?;
    let c = compile_at(&prog, rate, &manual)?;
    let base = format!("{}_T{}", stem(&a.pipeline), rate_tag(rate));
    let netlist = dir.join(format!("{base}.netlist.json"));
    write(&netlist, &emit_netlist(&c.design))?;
    write(
        &dir.join(format!("{base}.buffers.json")),
        &buffer_report(&c),
    )?;
    let mut trace = c.explain.join("\n");
    trace.push('\n');
    write(&dir.join(format!("{base}.explain.txt")), &trace)?;
    for n in &c.notes {
        let _ = writeln!(out, "note: {n}");
    }
    if explain {
        out.push_str(&trace);
    }
    let d = &c.design;
    let _ = writeln!(
        out,
        "{}: {} instances ({} conversions), {} mode, latency {}, FIFO bits {}",
        netlist.display(),
        d.instances.len(),
        c.conversions,
        d.mode,
        d.latency_total,
        c.buffers.total_bits
    );
    Ok(())
}

fn load_inputs(paths: &[PathBuf]) -> Result<Value, CliError> {
    let images = paths
        .iter()
        .map(|p| image_io::read_image(p).map_err(|e| CliError::user(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if images.len() == 1 {
        return Ok(images.into_iter().next().expect("one image"));
    }
    image_io::zip_images(&images).ok_or_else(|| CliError::user("input images differ in size"))
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::InputMismatch(_) | SimError::Deadlock { .. } | SimError::MaxCycles(_) => {
            CliError::user(e.to_string())
        }
        SimError::Unsupported(_) => CliError::internal(e.to_string()),
    }
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut String) -> Result<(), CliError> {
    let cfg = load_config(a.config.as_deref())?;
    let d = parse_netlist(&read_text(&a.netlist)?)
        .map_err(|e| CliError::user(format!("{}: {e}", a.netlist.display())))?;
    let input = load_inputs(&a.inputs)?;
    let mut opts = SimOptions {
        trace: a.trace.is_some(),
        ..SimOptions::default()
    };
    if let Some(m) = a.max_cycles.or(cfg.max_cycles) {
        opts.max_cycles = m;
    }
    let run = simulate(&d, &input, &opts).map_err(sim_error)?;
    if let (Some(p), Some(t)) = (&a.trace, &run.trace) {
        write(p, t)?;
    }
    if let Some(p) = &a.report {
        write(p, &(run.report.to_json() + "\n"))?;
    }
    if let Some(p) = &a.output {
        image_io::write_image(p, &run.output, &d.output_ty)
            .map_err(|e| CliError::user(e.to_string()))?;
    }
    let golden = eval(&d.program, &input).map_err(|e| CliError::user(e.to_string()))?;
    let _ = writeln!(
        out,
        "{}: {} cycles (latency {}), static violations {}",
        d.name, run.report.total_cycles, d.latency_total, run.report.static_violations
    );
    if golden != run.output {
        return Err(CliError::internal(
            "simulated output differs from the reference interpreter",
        ));
    }
    let _ = writeln!(out, "output matches the reference interpreter");
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub throughput: Rate,
    pub cycles: u64,
    pub latency_total: u64,
    /// `W*H/T + latency_total`.
    pub ideal_cycles: u64,
    pub multipliers: u64,
    pub adder_bits: u64,
    pub comparators: u64,
    pub ram_bits: u64,
    pub conversions: usize,
    pub pass: bool,
    pub error: String,
}

/// Compiles and simulates `prog` at one throughput, comparing against the
/// reference output.
pub fn sweep_point(prog: &Program, rate: Rate, input: &Value, golden: &Value) -> SweepRow {
    let mut row = SweepRow {
        throughput: rate,
        cycles: 0,
        latency_total: 0,
        ideal_cycles: 0,
        multipliers: 0,
        adder_bits: 0,
        comparators: 0,
        ram_bits: 0,
        conversions: 0,
        pass: false,
        error: String::new(),
    };
    let c = match compile_at(prog, rate, &BTreeMap::new()) {
        Ok(c) => c,
        Err(e) => {
            row.error = e.msg;
            return row;
        }
    };
    let d = &c.design;
    let res = estimate_resources(d);
    row.latency_total = d.latency_total;
    let n = d.input_ty.element_count().unwrap_or(0) as i64;
    row.ideal_cycles = (Rate::from_int(n) / rate).ceil() as u64 + d.latency_total;
    row.multipliers = res.total.multipliers;
    row.adder_bits = res.total.adder_bits;
    row.comparators = res.total.comparators;
    row.ram_bits = res.total.ram_bits;
    row.conversions = c.conversions;
    match simulate(d, input, &SimOptions::default()) {
        Ok(run) => {
            row.cycles = run.report.total_cycles;
            row.pass = &run.output == golden;
            if !row.pass {
                row.error = "output differs from reference".into();
            }
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("throughput,cycles,ideal_cycles,latency_total,multipliers,adder_bits,comparators,ram_bits,conversions,pass,error\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.throughput,
            r.cycles,
            r.ideal_cycles,
            r.latency_total,
            r.multipliers,
            r.adder_bits,
            r.comparators,
            r.ram_bits,
            r.conversions,
            r.pass,
            r.error.replace([',', '\n'], ";")
        );
    }
    s
}

/// Runs every throughput on its own thread; rows keep the input order.
pub fn run_sweep(prog: &Program, rates: &[Rate], input: &Value) -> Vec<SweepRow> {
    let golden = eval(prog, input).expect("input matches the pipeline");
    std::thread::scope(|s| {
        let golden = &golden;
        let handles: Vec<_> = rates
            .iter()
            .map(|&r| s.spawn(move || sweep_point(prog, r, input, golden)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker"))
            .collect()
    })
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut String) -> Result<(), CliError> {
    let cfg = load_config(a.config.as_deref())?;
    let rates: Vec<Rate> = if !a.rates.is_empty() {
        a.rates
            .iter()
            .map(|s| parse_rate(s))
            .collect::<Result<_, _>>()?
    } else if let Some(rs) = &cfg.rates {
        rs.iter().map(toml_rate).collect::<Result<_, _>>()?
    } else {
        corpus::sweep_rates()
    };
    let prog = load_program(&a.pipeline)?;
    let in_ty = prog.main_fn().input_ty.clone();
    let input = if !a.input.is_empty() {
        load_inputs(&a.input)?
    } else if let Some(p) = corpus::by_name(&stem(&a.pipeline)).filter(|p| p.input_type() == in_ty)
    {
        p.input()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed.or(cfg.seed).unwrap_or(1));
        random_stimulus(&in_ty, &mut rng)
    };
    if !input.conforms(&in_ty) {
        return Err(CliError::user(format!("input does not have type {in_ty}")));
    }
    let rows = run_sweep(&prog, &rates, &input);
    let csv = sweep_csv(&rows);
    match &a.csv {
        Some(p) => write(p, &csv)?,
        None => out.push_str(&csv),
    }
    if let Some(bad) = rows.iter().find(|r| !r.pass) {
        let msg = format!("T={}: {}", bad.throughput, bad.error);
        // a mapping refusal is a diagnostic; a wrong answer is a bug
        return Err(if bad.cycles > 0 {
            CliError::internal(msg)
        } else {
            CliError::user(msg)
        });
    }
    Ok(())
}

pub fn cmd_report(a: &ReportArgs, out: &mut String) -> Result<(), CliError> {
    let d: Design = parse_netlist(&read_text(&a.netlist)?)
        .map_err(|e| CliError::user(format!("{}: {e}", a.netlist.display())))?;
    let r = estimate_resources(&d);
    if a.json {
        out.push_str(&r.to_json());
        out.push('\n');
    } else {
        out.push_str(&r.table());
    }
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit code.
/// Normal output goes to `stdout`, diagnostics to `stderr`.
pub fn run(args: &[String], stdout: &mut String, stderr: &mut String) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                stderr.push_str(&text);
                1
            } else {
                stdout.push_str(&text);
                0
            };
        }
    };
    let res = match &cli.cmd {
        Command::Compile(a) => cmd_compile(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Report(a) => cmd_report(a, stdout),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.msg);
            e.code
        }
    }
}
