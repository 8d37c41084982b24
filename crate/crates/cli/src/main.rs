use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use multirepair::tradeoff::{self, parse_rational, rational_parts, Rational, SystemParams};
use multirepair::workbench::{self, BuildSpec, CodeInstance, Descriptor, Family, Sample, Shard};
use multirepair::{Elem, Error, Field};

#[derive(Parser)]
#[command(name = "multirepair", version, about = "Centralized multi-node repair for regenerating codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Functional storage/bandwidth tradeoff
    #[command(subcommand)]
    Tradeoff(TradeoffCmd),
    /// Concrete codes over GF(2^m)
    #[command(subcommand)]
    Code(CodeCmd),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// File size and code shape as `M,n,k,d,e`; M may be a fraction
    #[arg(long)]
    params: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TradeoffCmd {
    /// Breakpoints of the optimal tradeoff curve
    Curve {
        #[command(flatten)]
        common: Common,
        /// Extra evenly spaced samples (JSON only)
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Optimal storage for a bandwidth, optimal bandwidth for a storage, or
    /// both extreme points
    Point {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "gamma")]
        alpha: Option<String>,
        #[arg(long)]
        gamma: Option<String>,
    },
    /// Whether the cooperative minimum-bandwidth point is on the tradeoff
    Mbcr {
        #[command(flatten)]
        common: Common,
    },
    /// Centralized versus separate repair
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct FieldArg {
    /// `m` or `m:modulus-hex`
    #[arg(long, default_value = "8")]
    field: String,
}

#[derive(Args)]
struct CodeArg {
    /// Code descriptor JSON file
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CodeCmd {
    /// Build a code and write its descriptor
    Build {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Fixed helper count (mds) or smallest helper count (ambr)
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        d_max: Option<usize>,
        /// Failure count served by an adaptive mds code
        #[arg(long)]
        e: Option<usize>,
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a message (JSON list of ints) or a seeded random one into shards
    Encode {
        #[command(flatten)]
        code: CodeArg,
        #[arg(long)]
        message: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recover the message from k shards
    Reconstruct {
        #[command(flatten)]
        code: CodeArg,
        #[arg(long)]
        shards: PathBuf,
        /// Nodes to use; defaults to the first k shards in the file
        #[arg(long, value_delimiter = ',')]
        nodes: Option<Vec<usize>>,
    },
    /// Regenerate failed nodes from the surviving shards
    Repair {
        #[command(flatten)]
        code: CodeArg,
        #[arg(long)]
        shards: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        failed: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        helpers: Option<Vec<usize>>,
    },
    /// Verify exact repair over failure patterns
    Sweep {
        #[command(flatten)]
        code: CodeArg,
        #[arg(long)]
        e: usize,
        /// Random subset size; all patterns when omitted
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search for an assignment that repairs every pattern up to e_max
    Search {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        e_max: usize,
        #[arg(long, default_value_t = 100)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Lib(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotFound { .. } => 3,
        Error::SingularCoupling { .. } => 4,
        Error::Io(_) | Error::Malformed(_) => 1,
        _ => 2,
    }
}

fn parse_params(s: &str) -> CliResult<SystemParams> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(Error::Malformed(format!("--params needs M,n,k,d,e, got {s:?}")).into());
    }
    let m = parse_rational(parts[0])?;
    let nums = parts[1..]
        .iter()
        .map(|p| p.parse::<usize>().map_err(|_| Error::Malformed(format!("not an integer: {p:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SystemParams::new(m, nums[0], nums[1], nums[2], nums[3])?)
}

fn parse_field(s: &str) -> CliResult<Field> {
    let bad = || Error::Malformed(format!("--field expects m or m:hex, got {s:?}"));
    Ok(match s.split_once(':') {
        Some((m, hex)) => {
            let m = m.trim().parse().map_err(|_| bad())?;
            let hex = hex.trim().trim_start_matches("0x").trim_start_matches("0X");
            Field::new(m, u32::from_str_radix(hex, 16).map_err(|_| bad())?)?
        }
        None => Field::with_default_modulus(s.trim().parse().map_err(|_| bad())?)?,
    })
}

fn emit(out: Option<&Path>, body: &str) -> CliResult {
    match out {
        Some(p) => fs::write(p, body).map_err(|e| Error::Io(format!("{}: {e}", p.display())).into()),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, v: &Value) -> CliResult {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    emit(out, &s)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())).into())
}

fn q(x: &Rational) -> Value {
    json!(x.to_string())
}

fn point_json(p: &tradeoff::TradeoffPoint) -> Value {
    json!({"alpha": q(&p.alpha), "beta": q(&p.beta), "gamma": q(&p.gamma)})
}

fn point_csv(rows: &[(&str, &Rational, &Rational)]) -> String {
    let mut s = String::from("label,gamma_num,gamma_den,alpha_num,alpha_den\n");
    for (label, g, a) in rows {
        let (gn, gd) = rational_parts(g);
        let (an, ad) = rational_parts(a);
        s.push_str(&format!("{label},{gn},{gd},{an},{ad}\n"));
    }
    s
}

fn run_tradeoff(cmd: TradeoffCmd) -> CliResult {
    match cmd {
        TradeoffCmd::Curve { common, samples } => {
            let p = parse_params(&common.params)?;
            let c = workbench::curve_export(&p, samples)?;
            match common.format {
                Format::Csv => emit(common.out.as_deref(), &c.to_csv()),
                Format::Json => emit_json(common.out.as_deref(), &serde_json::to_value(&c).expect("serializable")),
            }
        }
        TradeoffCmd::Point { common, alpha, gamma } => {
            let p = parse_params(&common.params)?;
            let d = p.d;
            let rows: Vec<(String, tradeoff::TradeoffPoint)> = match (alpha, gamma) {
                (Some(a), _) => {
                    let a = parse_rational(&a)?;
                    let g = tradeoff::gamma_star(&p, &a)?;
                    vec![("optimal".into(), tradeoff::TradeoffPoint::from_alpha_gamma(a, g, d))]
                }
                (None, Some(g)) => {
                    let g = parse_rational(&g)?;
                    let a = tradeoff::alpha_star(&p, &g)?;
                    vec![("optimal".into(), tradeoff::TradeoffPoint::from_alpha_gamma(a, g, d))]
                }
                (None, None) => vec![("msmr".into(), tradeoff::msmr_point(&p)), ("mbmr".into(), tradeoff::mbmr_point(&p))],
            };
            match common.format {
                Format::Csv => {
                    let r: Vec<_> = rows.iter().map(|(l, t)| (l.as_str(), &t.gamma, &t.alpha)).collect();
                    emit(common.out.as_deref(), &point_csv(&r))
                }
                Format::Json => {
                    let m: serde_json::Map<String, Value> = rows.iter().map(|(l, t)| (l.clone(), point_json(t))).collect();
                    emit_json(common.out.as_deref(), &Value::Object(m))
                }
            }
        }
        TradeoffCmd::Mbcr { common } => {
            let p = parse_params(&common.params)?;
            let (pt, on) = tradeoff::mbcr_check(&p);
            match common.format {
                Format::Csv => {
                    let (gn, gd) = rational_parts(&pt.gamma);
                    let (an, ad) = rational_parts(&pt.alpha);
                    emit(common.out.as_deref(), &format!("gamma_num,gamma_den,alpha_num,alpha_den,on_tradeoff\n{gn},{gd},{an},{ad},{on}\n"))
                }
                Format::Json => emit_json(common.out.as_deref(), &json!({"point": point_json(&pt), "on_tradeoff": on})),
            }
        }
        TradeoffCmd::Compare { common } => {
            let p = parse_params(&common.params)?;
            let c = workbench::comparison_export(&p)?;
            match common.format {
                Format::Csv => emit(common.out.as_deref(), &c.to_csv()),
                Format::Json => emit_json(common.out.as_deref(), &serde_json::to_value(&c).expect("serializable")),
            }
        }
    }
}

fn load_code(path: &Path) -> CliResult<CodeInstance> {
    let d: Descriptor = read_json(path)?;
    Ok(CodeInstance::from_descriptor(&d)?)
}

fn load_shards(code: &CodeInstance, path: &Path) -> CliResult<BTreeMap<usize, Vec<Elem>>> {
    let shards: Vec<Shard> = read_json(path)?;
    let mut out = BTreeMap::new();
    for s in shards {
        if s.node >= code.n() {
            return Err(Error::Malformed(format!("shard for node {} but n = {}", s.node, code.n())).into());
        }
        out.insert(s.node, s.content(code.field())?);
    }
    Ok(out)
}

fn run_code(cmd: CodeCmd) -> CliResult {
    match cmd {
        CodeCmd::Build { family, n, k, d, d_max, e, field, out } => {
            let spec = BuildSpec { family: family.parse()?, n, k, d, d_max, e };
            let code = CodeInstance::build(parse_field(&field.field)?, &spec)?;
            emit_json(out.as_deref(), &serde_json::to_value(code.descriptor()).expect("serializable"))
        }
        CodeCmd::Encode { code, message, seed } => {
            let c = load_code(&code.code)?;
            let msg: Vec<Elem> = match message {
                Some(p) => {
                    let raw: Vec<u32> = read_json(&p)?;
                    raw.into_iter().map(|v| c.field().elem(v)).collect::<Result<_, _>>()?
                }
                None => workbench::random_message(c.field(), c.message_len(), &mut workbench::pattern_rng(seed, 0)),
            };
            let nodes = c.encode(&msg)?;
            let shards: Vec<Shard> = nodes.iter().enumerate().map(|(i, w)| Shard::new(i, w)).collect();
            emit_json(code.out.as_deref(), &serde_json::to_value(shards).expect("serializable"))
        }
        CodeCmd::Reconstruct { code, shards, nodes } => {
            let c = load_code(&code.code)?;
            let have = load_shards(&c, &shards)?;
            let nodes = nodes.unwrap_or_else(|| have.keys().copied().take(c.k()).collect());
            let contents = nodes
                .iter()
                .map(|n| have.get(n).cloned().ok_or_else(|| Error::Malformed(format!("no shard for node {n}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let msg = c.reconstruct(&nodes, &contents)?;
            emit_json(code.out.as_deref(), &json!(msg.iter().map(|x| x.0).collect::<Vec<_>>()))
        }
        CodeCmd::Repair { code, shards, failed, helpers } => {
            let c = load_code(&code.code)?;
            let have = load_shards(&c, &shards)?;
            let helpers = match helpers {
                Some(h) => h,
                None => c.default_helpers(&failed)?,
            };
            if let Some(h) = helpers.iter().find(|h| !have.contains_key(h)) {
                return Err(Error::Malformed(format!("no shard for helper {h}")).into());
            }
            let out = c.repair(&failed, Some(&helpers), &|h| have[&h].clone())?;
            let shards: Vec<Shard> = failed.iter().zip(&out.contents).map(|(&f, w)| Shard::new(f, w)).collect();
            emit_json(code.out.as_deref(), &json!({"shards": shards, "transcript": out.transcript}))
        }
        CodeCmd::Sweep { code, e, sample, seed } => {
            let c = load_code(&code.code)?;
            let sample = sample.map_or(Sample::All, Sample::Random);
            let r = workbench::run_sweep(&c, e, sample, seed)?;
            emit_json(code.out.as_deref(), &serde_json::to_value(&r).expect("serializable"))?;
            if r.failures > 0 {
                return Err(Failure::Verification(format!("{} of {} patterns failed", r.failures, r.outcomes.len())));
            }
            Ok(())
        }
        CodeCmd::Search { family, n, k, e_max, budget, seed, field, out } => {
            let fam: Family = family.parse()?;
            let r = workbench::search_assignment(fam, &parse_field(&field.field)?, n, k, e_max, budget, seed)?;
            emit_json(out.as_deref(), &serde_json::to_value(&r).expect("serializable"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Tradeoff(t) => run_tradeoff(t),
        Command::Code(c) => run_code(c),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(4)
        }
    }
}
