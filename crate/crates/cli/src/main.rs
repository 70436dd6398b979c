//! `twistlab` command-line front end: reads curve records as JSON / JSONL,
//! runs one computation per record and writes JSONL in input order.

mod commands;
mod json;

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use commands::{Command, Context, JobError, Outcome};

#[derive(Parser, Debug)]
#[command(
    name = "twistlab",
    version,
    about = "2-Selmer ranks of quadratic twists"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSONL input file (default: stdin unless record flags are given)
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// JSONL output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit 3 when any result is unsupported or out of domain
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for sampled inputs
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Add elapsedMillis to each record
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Invariants, reduction types, Galois type and root number
    Analyze(RecordArgs),
    /// Twist by d with the local norm indices and Kramer parity flip
    Twist(RecordArgs),
    /// Possible 2-Selmer ranks of an admissible twist
    Envelope(RecordArgs),
    /// Complete 2-descent for y² = (x − e1)(x − e2)(x − e3)
    Descend(RecordArgs),
    /// Twist sieves and the S3 family (--mode stable|step|flip|family|density)
    Search(RecordArgs),
    /// Frobenius order counts over good primes up to --max-x
    Density(RecordArgs),
    /// Constant 2-Selmer parity from local place descriptors
    Classify(RecordArgs),
    /// F2[G]-module decomposition for G cyclic of odd prime order
    Gmodule(RecordArgs),
    /// JSONL of {"command": ..., "inputs": {...}} records
    Batch,
}

/// Fields of a single record; in stream mode they fill keys missing from
/// each input line.
#[derive(Args, Debug, Default)]
struct RecordArgs {
    /// Curve as JSON, {"a": [a1,a2,a3,a4,a6]} or {"e": [e1,e2,e3]}
    #[arg(long)]
    curve: Option<String>,
    /// Squarefree twist discriminant
    #[arg(long, allow_hyphen_values = true)]
    d: Option<i64>,
    /// 2-Selmer rank of the untwisted curve
    #[arg(long)]
    d2: Option<u32>,
    /// dim V_T when known (pins the envelope to one value)
    #[arg(long)]
    dim_vt: Option<u32>,
    /// stable, step, flip, family or density
    #[arg(long)]
    mode: Option<String>,
    /// Prime bound for sieves and density counts
    #[arg(long)]
    max_x: Option<u64>,
    /// Prime for the family curve or the group order
    #[arg(long)]
    p: Option<u64>,
    /// Family parameter
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<i64>,
    /// Override the family offset η
    #[arg(long)]
    eta: Option<u64>,
    /// Place descriptors as a JSON array
    #[arg(long)]
    places: Option<String>,
    /// Generator matrix as a JSON array of row bit strings
    #[arg(long)]
    action: Option<String>,
    /// Number of random full 2-torsion curves to descend
    #[arg(long)]
    sample: Option<usize>,
    /// Bound on |e_i| for sampled curves
    #[arg(long, default_value_t = 50)]
    e_bound: i64,
}

impl RecordArgs {
    fn to_map(&self) -> Result<Map<String, Value>> {
        let mut m = match &self.curve {
            Some(s) => match serde_json::from_str(s).context("--curve is not valid JSON")? {
                Value::Object(m) => m,
                _ => bail!("--curve must be a JSON object"),
            },
            None => Map::new(),
        };
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("d", self.d.map(Value::from));
        put("d2", self.d2.map(Value::from));
        put("dimVT", self.dim_vt.map(Value::from));
        put("mode", self.mode.clone().map(Value::from));
        put("maxX", self.max_x.map(Value::from));
        put("p", self.p.map(Value::from));
        put("t0", self.t0.map(Value::from));
        put("eta", self.eta.map(Value::from));
        if let Some(s) = &self.places {
            put(
                "places",
                Some(serde_json::from_str(s).context("--places is not valid JSON")?),
            );
        }
        if let Some(s) = &self.action {
            put(
                "action",
                Some(serde_json::from_str(s).context("--action is not valid JSON")?),
            );
        }
        Ok(m)
    }

    /// Whether the flags alone describe one record.
    fn is_record(&self) -> bool {
        self.curve.is_some() || self.places.is_some() || self.action.is_some() || self.p.is_some()
    }
}

/// One unit of work; `line` is the 1-based input line.
struct Job {
    line: usize,
    parsed: Result<(Command, Map<String, Value>), JobError>,
}

fn read_lines(path: Option<&PathBuf>) -> Result<Vec<(usize, String)>> {
    let reader: Box<dyn BufRead> = match path {
        Some(p) => Box::new(BufReader::new(
            File::open(p).with_context(|| format!("cannot open {}", p.display()))?,
        )),
        None => Box::new(BufReader::new(io::stdin())),
    };
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.context("reading input")?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn parse_object(s: &str) -> Result<Map<String, Value>, JobError> {
    match serde_json::from_str(s) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(JobError::Input("expected a JSON object".into())),
        Err(e) => Err(JobError::Input(format!("malformed JSON: {e}"))),
    }
}

fn sample_curves(n: usize, bound: i64, seed: u64) -> Vec<Map<String, Value>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let e: [i64; 3] = std::array::from_fn(|_| rng.gen_range(-bound..=bound));
        if e[0] != e[1] && e[0] != e[2] && e[1] != e[2] {
            let mut m = Map::new();
            m.insert("e".into(), json!(e));
            out.push(m);
        }
    }
    out
}

fn record_jobs(cmd: Command, args: &RecordArgs, cli: &Cli) -> Result<Vec<Job>> {
    let defaults = args.to_map()?;
    let with_defaults = |mut m: Map<String, Value>| {
        for (k, v) in &defaults {
            m.entry(k.clone()).or_insert_with(|| v.clone());
        }
        m
    };
    if let Some(n) = args.sample.filter(|_| cli.input.is_none()) {
        if cmd != Command::Descend {
            bail!("--sample is only available for descend");
        }
        return Ok(sample_curves(n, args.e_bound, cli.seed)
            .into_iter()
            .enumerate()
            .map(|(i, m)| Job {
                line: i + 1,
                parsed: Ok((cmd, with_defaults(m))),
            })
            .collect());
    }
    if cli.input.is_none() && args.is_record() {
        return Ok(vec![Job {
            line: 1,
            parsed: Ok((cmd, defaults)),
        }]);
    }
    Ok(read_lines(cli.input.as_ref())?
        .into_iter()
        .map(|(line, s)| Job {
            line,
            parsed: parse_object(&s).map(|m| (cmd, with_defaults(m))),
        })
        .collect())
}

fn batch_jobs(cli: &Cli) -> Result<Vec<Job>> {
    Ok(read_lines(cli.input.as_ref())?
        .into_iter()
        .map(|(line, s)| {
            let parsed = parse_object(&s).and_then(|mut m| {
                let cmd: Command = m
                    .get("command")
                    .and_then(Value::as_str)
                    .ok_or_else(|| JobError::Input("missing \"command\"".into()))?
                    .parse()?;
                let inputs = match m.remove("inputs") {
                    Some(Value::Object(i)) => i,
                    None => Map::new(),
                    Some(_) => return Err(JobError::Input("\"inputs\" must be an object".into())),
                };
                Ok((cmd, inputs))
            });
            Job { line, parsed }
        })
        .collect())
}

struct Done {
    line: usize,
    command: Option<Command>,
    inputs: Option<Map<String, Value>>,
    result: Result<Outcome, JobError>,
    millis: u128,
}

fn execute(jobs: Vec<Job>, ctx: &Context) -> Vec<Done> {
    jobs.into_par_iter()
        .map(|job| {
            let start = Instant::now();
            let (command, inputs, result) = match job.parsed {
                Ok((cmd, inputs)) => {
                    let r = commands::run(cmd, &inputs, ctx);
                    (Some(cmd), Some(inputs), r)
                }
                Err(e) => (None, None, Err(e)),
            };
            Done {
                line: job.line,
                command,
                inputs,
                result,
                millis: start.elapsed().as_millis(),
            }
        })
        .collect()
}

fn write_line(w: &mut dyn Write, v: &Value) -> Result<()> {
    serde_json::to_writer(&mut *w, v)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let ctx = Context {
        jobs: cli.jobs.max(1),
    };
    let batch = matches!(cli.command, Cmd::Batch);
    let jobs = match &cli.command {
        Cmd::Batch => batch_jobs(&cli)?,
        Cmd::Analyze(a) => record_jobs(Command::Analyze, a, &cli)?,
        Cmd::Twist(a) => record_jobs(Command::Twist, a, &cli)?,
        Cmd::Envelope(a) => record_jobs(Command::Envelope, a, &cli)?,
        Cmd::Descend(a) => record_jobs(Command::Descend, a, &cli)?,
        Cmd::Search(a) => record_jobs(Command::Search, a, &cli)?,
        Cmd::Density(a) => record_jobs(Command::Density, a, &cli)?,
        Cmd::Classify(a) => record_jobs(Command::Classify, a, &cli)?,
        Cmd::Gmodule(a) => record_jobs(Command::Gmodule, a, &cli)?,
    };
    log::info!("{} records, {} workers", jobs.len(), ctx.jobs);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.jobs)
        .build()
        .context("starting worker pool")?;
    let done = pool.install(|| execute(jobs, &ctx));

    let mut w: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let (mut ok, mut failed_lines, mut unsupported) = (0u64, Vec::new(), false);
    for d in done {
        match d.result {
            Ok(outcome) => {
                ok += 1;
                unsupported |= outcome.unsupported;
                let mut v = if batch {
                    json!({
                        "command": d.command.map(Command::name),
                        "inputs": d.inputs,
                        "outputs": outcome.value,
                        "engineVersion": twistlab::VERSION,
                    })
                } else {
                    outcome.value
                };
                if cli.timing {
                    v["elapsedMillis"] = json!(d.millis as u64);
                }
                write_line(&mut w, &v)?;
            }
            Err(e) => {
                eprintln!("line {}: {e}", d.line);
                failed_lines.push(d.line);
                write_line(&mut w, &json!({ "line": d.line, "error": e.to_string() }))?;
            }
        }
    }
    if batch {
        write_line(
            &mut w,
            &json!({ "summary": { "ok": ok, "failed": failed_lines.len(), "failedLines": failed_lines } }),
        )?;
    }
    w.flush()?;
    Ok(if !failed_lines.is_empty() && (!batch || cli.strict) {
        ExitCode::from(2)
    } else if unsupported && cli.strict {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TWISTLAB_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
