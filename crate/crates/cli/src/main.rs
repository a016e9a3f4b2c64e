use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde::Serialize;

use omnisec::classical::{self, Direction, EventSets, JointPmf};
use omnisec::io::{self, KeyReport, Model, ReductionReport, ReportFile, TreePinReport, TwoUserReport, VerificationReport};
use omnisec::lp::rco_lp;
use omnisec::scheme::{self, BuildOptions, CommScheme};
use omnisec::{EntropyValue, Error, Result};

#[derive(Parser)]
#[command(name = "omnisec", version, about = "Secret key agreement and omniscience with a wiretapper")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacities and rates of a model file.
    Analyze {
        model: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Remove edge-local wiretapper components from a tree-PIN model.
    Reduce {
        model: PathBuf,
        /// Where to write the reduced model file.
        #[arg(long)]
        model_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Construct and verify an omniscience scheme.
    BuildScheme {
        model: PathBuf,
        /// Block length; defaults to ceil(log_q sum n_e) + 1.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        attempts: usize,
        #[arg(long, value_enum, default_value_t = Method::General)]
        method: Method,
        /// Scheme file to write.
        #[arg(long)]
        scheme_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check omniscience, alignment, leakage and key secrecy of a scheme.
    Verify {
        model: PathBuf,
        scheme: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run sampled realizations through a scheme's recovery maps.
    Simulate {
        model: PathBuf,
        scheme: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Key capacity as a function of the total discussion rate (tree-PIN).
    Capacity {
        model: PathBuf,
        /// Number of rate points between 0 and (|E| - 1) C_W inclusive, plus one beyond.
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Tools for general discrete sources.
    #[command(subcommand)]
    Classical(ClassicalCommand),
}

#[derive(Subcommand)]
enum ClassicalCommand {
    /// Doubly symmetric binary erasure source.
    Dsbe {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write (q, f(q)) samples here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// One-way capacity and leakage bounds for a two-user pmf.
    Oneway {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Dir::OneToTwo)]
        direction: Dir,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Two-message bounds and the duality verdict for a two-user pmf.
    TwoMsg {
        model: PathBuf,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Search single-letter events certifying a positive key rate.
    Positivity {
        model: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Block-swapping bound on the ternary source of a positivity certificate.
    BlockSwap {
        model: PathBuf,
        /// Event sets as JSON `[[[a..], [b..]], ...]`; found by search if omitted.
        #[arg(long)]
        sets: Option<String>,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
        /// Write (n, lhs, rhs, q1) rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct OutArgs {
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Random construction for tree-PIN sources.
    General,
    /// Deterministic construction over F_{q^k}, k = |E| - n_w.
    Unit,
    /// Key-rate corner point with minimum discussion (tree-PIN).
    Corner,
    /// Two-user linear source construction.
    TwoUser,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    #[value(name = "1to2")]
    OneToTwo,
    #[value(name = "2to1")]
    TwoToOne,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Self {
        match d {
            Dir::OneToTwo => Direction::OneToTwo,
            Dir::TwoToOne => Direction::TwoToOne,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::Parse(_) | Error::Dimension(_) | Error::ContextMismatch => 2,
        Error::SearchExhausted(_) => 3,
        _ => 1,
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load(path: &Path) -> Result<(Model, Vec<u8>)> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((io::parse_model(&text)?, bytes))
}

fn load_scheme(path: &Path) -> Result<(CommScheme, Vec<u8>)> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((io::parse_scheme(&text)?, bytes))
}

fn pmf_of(m: Model) -> Result<JointPmf> {
    match m {
        Model::Pmf(p) => Ok(p),
        other => Err(Error::InvalidArgument(format!("a pmf model is required, got {}", other.kind()))),
    }
}

fn emit<T: Serialize>(out: &OutArgs, report: &ReportFile<T>) -> Result<()> {
    let text = io::to_json(report);
    match &out.output {
        Some(p) => io::write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct LinearReport {
    users: usize,
    h_zv_given_zw: EntropyValue,
    r_co: EntropyValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    two_user: Option<TwoUserReport>,
}

#[derive(Serialize)]
struct PmfReport {
    users: usize,
    h_zv: f64,
    h_zv_given_zw: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    two_msg: Option<classical::TwoMessageReport>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum AnalyzeReport {
    TreePin(TreePinReport),
    Fls(LinearReport),
    Pmf(PmfReport),
}

#[derive(Serialize)]
struct BuildReport {
    method: &'static str,
    n: usize,
    attempts: usize,
    verification: VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    corner: Option<CornerReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_leakage: Option<EntropyValue>,
}

#[derive(Serialize)]
struct CornerReport {
    comm_rate: EntropyValue,
    key_rate: EntropyValue,
    key: KeyReport,
}

#[derive(Serialize)]
struct CapacityPoint {
    rate: EntropyValue,
    c_w: EntropyValue,
}

#[derive(Serialize)]
struct DsbeReport {
    p: f64,
    eps: f64,
    more_capable: classical::CurveCheck,
    not_less_noisy: classical::CurveCheck,
    h_x_given_z: f64,
    oneway_leakage: classical::OneWayLeakage,
    oneway_capacity_lb: f64,
    two_msg: classical::TwoMessageReport,
}

#[derive(Serialize)]
struct BlockSwapReport {
    sets: EventSets,
    condition: classical::PositivityCheck,
    rows: Vec<classical::BlockSwap>,
    exceeds_at: Option<usize>,
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Analyze { model, out } => {
            let (m, bytes) = load(&model)?;
            let result = match m {
                Model::TreePin(t) => AnalyzeReport::TreePin(TreePinReport::from(&t.analyze()?)),
                Model::Fls(f) => {
                    let two_user = if f.num_users() == 2 {
                        Some(TwoUserReport::from(&omnisec::fls::two_user_analyze(&f)?))
                    } else {
                        None
                    };
                    AnalyzeReport::Fls(LinearReport {
                        users: f.num_users(),
                        h_zv_given_zw: f.h_zv_given_zw(),
                        r_co: rco_lp(&f, None)?.r_co,
                        two_user,
                    })
                }
                Model::Pmf(p) => {
                    let m = p.num_users();
                    let users: Vec<usize> = (0..m).collect();
                    let two_msg = if m == 2 { Some(classical::two_msg_report(&p, 8, 0)?) } else { None };
                    AnalyzeReport::Pmf(PmfReport {
                        users: m,
                        h_zv: p.entropy(&users),
                        h_zv_given_zw: p.cond_entropy(&users, &[p.wiretap_var()]),
                        two_msg,
                    })
                }
            };
            emit(&out, &ReportFile::new("analyze", &[&bytes], None, result))
        }
        Command::Reduce { model, model_out, out } => {
            let (m, bytes) = load(&model)?;
            let Model::TreePin(t) = m else {
                return Err(Error::InvalidArgument("reduce needs a tree-pin model".into()));
            };
            let r = t.reduce()?;
            if let Some(p) = model_out {
                io::write_file(&p, &io::model_to_json(&Model::TreePin(r.model.clone())))?;
            }
            emit(&out, &ReportFile::new("reduce", &[&bytes], None, ReductionReport::from(&r)))
        }
        Command::BuildScheme { model, n, seed, attempts, method, scheme_out, out } => {
            let (m, bytes) = load(&model)?;
            let fls = m.linear()?;
            let opts = BuildOptions { n, seed, max_attempts: attempts };
            let (mut s, tries, corner, target, name) = match (method, &m) {
                (Method::General, Model::TreePin(t)) => {
                    let b = scheme::build_general_scheme(t, &opts)?;
                    (b.scheme, b.attempts, None, None, "general")
                }
                (Method::Unit, Model::TreePin(t)) => (scheme::build_unit_scheme(t)?, 1, None, None, "unit"),
                (Method::Corner, Model::TreePin(t)) => {
                    let c = scheme::corner_point_scheme(t, &opts)?;
                    let rep = CornerReport { comm_rate: c.comm_rate, key_rate: c.key_rate, key: KeyReport::from(&c.key_check) };
                    (c.scheme, c.attempts, Some(rep), None, "corner")
                }
                (Method::TwoUser, Model::Fls(f)) => {
                    let n_max = n.unwrap_or(4);
                    let t = scheme::two_user_scheme(f, n_max, seed)?;
                    (t.scheme, t.attempts, None, Some(t.target), "two-user")
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "method does not apply to a {} model",
                        m.kind()
                    )))
                }
            };
            scheme::attach_recovery(&fls, &mut s)?;
            let v = scheme::verify_scheme(&fls, &s)?;
            if let Some(p) = scheme_out {
                io::write_file(&p, &io::scheme_to_json(&s)?)?;
            }
            let result = BuildReport {
                method: name,
                n: s.n,
                attempts: tries,
                verification: VerificationReport::from(&v),
                corner,
                target_leakage: target,
            };
            emit(&out, &ReportFile::new("build-scheme", &[&bytes], Some(seed), result))
        }
        Command::Verify { model, scheme: sp, out } => {
            let (m, mb) = load(&model)?;
            let (s, sb) = load_scheme(&sp)?;
            let fls = m.linear()?;
            let v = scheme::verify_scheme(&fls, &s)?;
            let rep = VerificationReport::from(&v);
            let ok = rep.omniscience && rep.alignment && rep.senders_consistent && rep.key.as_ref().is_none_or(|k| k.secret);
            emit(&out, &ReportFile::new("verify", &[&mb, &sb], None, rep))?;
            if !ok {
                return Err(Error::InvalidArgument("scheme failed verification".into()));
            }
            Ok(())
        }
        Command::Simulate { model, scheme: sp, samples, seed, out } => {
            let (m, mb) = load(&model)?;
            let (mut s, sb) = load_scheme(&sp)?;
            let fls = m.linear()?;
            if s.recovery.is_empty() {
                scheme::attach_recovery(&fls, &mut s)?;
            }
            let r = scheme::simulate(&fls, &s, samples, seed)?;
            emit(&out, &ReportFile::new("simulate", &[&mb, &sb], Some(seed), r))
        }
        Command::Capacity { model, points, csv, out } => {
            let (m, bytes) = load(&model)?;
            let Model::TreePin(t) = m else {
                return Err(Error::InvalidArgument("capacity needs a tree-pin model".into()));
            };
            let a = t.analyze()?;
            let span = a.c_w.units() * Ratio::from_integer((t.num_edges() as i64 - 1).max(1));
            let steps = points.max(2) as i64 - 1;
            let mut rows = Vec::new();
            for k in 0..=steps + 1 {
                let r = span * Ratio::new(k, steps);
                rows.push((r, t.constrained_capacity(r)?));
            }
            if let Some(p) = csv {
                let f = std::fs::File::create(&p)?;
                io::write_capacity_csv(f, &rows)?;
            }
            let q = t.q();
            let result: Vec<CapacityPoint> =
                rows.iter().map(|(r, c)| CapacityPoint { rate: EntropyValue::from_ratio(*r, q), c_w: *c }).collect();
            emit(&out, &ReportFile::new("capacity", &[&bytes], None, result))
        }
        Command::Classical(c) => run_classical(c),
    }
}

fn run_classical(cmd: ClassicalCommand) -> Result<()> {
    match cmd {
        ClassicalCommand::Dsbe { p, eps, grid, restarts, seed, csv, out } => {
            let pmf = classical::dsbe(p, eps)?;
            let lk = classical::oneway_leakage_search(&pmf, Direction::OneToTwo, 101, seed)?;
            let cw = classical::oneway_capacity_search(&pmf, Direction::OneToTwo, restarts, seed)?;
            let result = DsbeReport {
                p,
                eps,
                more_capable: classical::more_capable_check(p, eps, grid, 1e-9),
                not_less_noisy: classical::not_less_noisy_check(p, eps, 1e-3, 1e-6),
                h_x_given_z: pmf.cond_entropy(&[0], &[2]),
                oneway_leakage: lk,
                oneway_capacity_lb: cw.value,
                two_msg: classical::two_msg_report(&pmf, restarts, seed)?,
            };
            if let Some(path) = csv {
                let f = std::fs::File::create(&path)?;
                io::write_f_curve_csv(f, &classical::f_curve_samples(p, eps, grid))?;
            }
            emit(&out, &ReportFile::new("classical dsbe", &[], Some(seed), result))
        }
        ClassicalCommand::Oneway { model, direction, restarts, seed, out } => {
            let (m, bytes) = load(&model)?;
            let pmf = pmf_of(m)?;
            #[derive(Serialize)]
            struct OneWay {
                capacity: classical::OneWaySearch,
                leakage: classical::OneWayLeakage,
            }
            let d = direction.into();
            let result = OneWay {
                capacity: classical::oneway_capacity_search(&pmf, d, restarts, seed)?,
                leakage: classical::oneway_leakage_search(&pmf, d, 101, seed)?,
            };
            emit(&out, &ReportFile::new("classical oneway", &[&bytes], Some(seed), result))
        }
        ClassicalCommand::TwoMsg { model, restarts, seed, out } => {
            let (m, bytes) = load(&model)?;
            let r = classical::two_msg_report(&pmf_of(m)?, restarts, seed)?;
            emit(&out, &ReportFile::new("classical two-msg", &[&bytes], Some(seed), r))
        }
        ClassicalCommand::Positivity { model, out } => {
            let (m, bytes) = load(&model)?;
            let r = classical::positivity_search(&pmf_of(m)?)?;
            emit(&out, &ReportFile::new("classical positivity", &[&bytes], None, r))
        }
        ClassicalCommand::BlockSwap { model, sets, n_max, csv, out } => {
            let (m, bytes) = load(&model)?;
            let pmf = pmf_of(m)?;
            let sets: EventSets = match sets {
                Some(s) => serde_json::from_str(&s).map_err(|e| Error::Parse(e.to_string()))?,
                None => match classical::positivity_search(&pmf)? {
                    Some(c) => c.sets,
                    None => return Err(Error::InvalidArgument("no positivity certificate found".into())),
                },
            };
            let condition = classical::positivity_condition_check(&pmf, &sets)?;
            let tern = classical::ternary_transform(&pmf, &sets)?;
            let rows = classical::block_swap_sweep(&tern, n_max)?;
            if let Some(path) = csv {
                let f = std::fs::File::create(&path)?;
                io::write_block_swap_csv(f, &rows)?;
            }
            let exceeds_at = rows.iter().find(|b| b.exceeds).map(|b| b.n);
            let result = BlockSwapReport { sets, condition, rows, exceeds_at };
            emit(&out, &ReportFile::new("classical block-swap", &[&bytes], None, result))
        }
    }
}
