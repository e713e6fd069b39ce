//! `zl`: command-line front end for the zaremba library.

mod alphabet;
mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use zaremba::arith::{singular_series, SeriesMode};
use zaremba::circle::{decompose, MajorArcConfig, DEFAULT_Q_LEVEL};
use zaremba::construction::Schedule;
use zaremba::dimension::dimension;
use zaremba::modular::{find_bad_modulus, is_admissible, DEFAULT_Q_MAX};
use zaremba::orbit::{density_report, enumerate_ball_parallel};
use zaremba::primroot::{search_height_bounded, SearchFilters};
use zaremba::{Alphabet, DetFilter, Error, OrbitBall};

use alphabet::parse_alphabet;
use output::{fmt_float, Report, Table};

#[derive(Parser, Debug)]
#[command(
    name = "zl",
    version,
    about = "Continued fractions with bounded partial quotients"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Output format. CSV is available for tabular subcommands only.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write output here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "ZL_THREADS", global = true)]
    threads: Option<usize>,
    /// Suppress progress messages on standard error.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Det {
    All,
    Plus,
}

impl From<Det> for DetFilter {
    fn from(d: Det) -> Self {
        match d {
            Det::All => DetFilter::All,
            Det::Plus => DetFilter::PlusOne,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Truncated,
    Euler,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// All generator products with Frobenius norm below N.
    ///
    /// CSV columns: a,b,c,d,word (word quotients separated by spaces).
    Enumerate {
        #[arg(long, value_parser = parse_alphabet)]
        alphabet: Alphabet,
        #[arg(long)]
        norm: u64,
        #[arg(long, value_enum, default_value_t = Det::All)]
        det: Det,
    },
    /// Fraction of admissible integers up to each cutoff that occur as denominators.
    ///
    /// CSV columns: cutoff,admissible,represented,fraction.
    Density {
        #[arg(long, value_parser = parse_alphabet)]
        alphabet: Alphabet,
        #[arg(long)]
        norm: u64,
        #[arg(long, default_value_t = 20)]
        grid: usize,
    },
    /// Local admissibility of integers, checked at prime powers up to qmax.
    ///
    /// CSV columns: d,admissible,witness,bounded.
    Admissible {
        #[arg(long, value_parser = parse_alphabet)]
        alphabet: Alphabet,
        /// Integers to test.
        #[arg(required = true)]
        values: Vec<u64>,
        #[arg(long, default_value_t = DEFAULT_Q_MAX)]
        qmax: u64,
    },
    /// Moduli at which the orbit misses residues.
    Obstructions {
        #[arg(long, value_parser = parse_alphabet)]
        alphabet: Alphabet,
        #[arg(long, default_value_t = DEFAULT_Q_MAX)]
        qmax: u64,
    },
    /// Hausdorff dimension of the associated Cantor set.
    Dimension {
        #[arg(long, value_parser = parse_alphabet)]
        alphabet: Alphabet,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Singular series, truncated at modulus Q or as an Euler product up to P.
    ///
    /// CSV columns: index,numer,denom,value.
    Series {
        #[arg(long, value_parser = parse_alphabet)]
        alphabet: Alphabet,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = Mode::Euler)]
        mode: Mode,
        /// Q for truncated mode, P for Euler mode.
        #[arg(long, default_value_t = 100)]
        cutoff: u64,
    },
    /// Representation counts split into major-arc main term and error.
    ///
    /// CSV columns: d,r,main,error,admissible.
    Circle {
        #[arg(long, value_parser = parse_alphabet)]
        alphabet: Alphabet,
        #[arg(long)]
        norm: u64,
        /// Inclusive window `lo..hi`; defaults to `1..N`.
        #[arg(long, value_parser = parse_window)]
        window: Option<(u64, u64)>,
        #[arg(long, default_value_t = DEFAULT_Q_LEVEL)]
        q_level: u64,
        /// Pair with (a, 1) instead of (0, 1).
        #[arg(long)]
        shift: Option<u64>,
        #[arg(long, value_enum, default_value_t = Det::Plus)]
        det: Det,
    },
    /// Least primitive root of bounded height for each prime.
    ///
    /// CSV columns: p,b,height,via_complement (b empty when none exists).
    Primroots {
        #[arg(long)]
        pmax: u64,
        #[arg(long, default_value_t = 7)]
        height: u64,
        /// Keep only primes congruent to 3 mod 4.
        #[arg(long)]
        three_mod_four: bool,
        /// Keep only primes whose (p-1)/2 has all prime factors above this.
        #[arg(long)]
        min_half_factor: Option<u64>,
    },
    /// Dyadic scale schedule N_j = N^{e_j}.
    ///
    /// CSV columns: index,exponent,log2_size.
    Schedule {
        /// log2 of N.
        #[arg(long)]
        log2_n: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        c: f64,
        /// Use this J2 instead of its defining formula.
        #[arg(long)]
        j2: Option<i64>,
        /// log2 M values to locate in the schedule.
        #[arg(long)]
        locate: Vec<f64>,
    },
}

fn parse_window(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected lo..hi")?;
    let p = |x: &str| x.trim().parse::<u64>().map_err(|e| e.to_string());
    Ok((p(lo)?, p(hi)?))
}

enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Lib(Error::Domain(_) | Error::Numerical(_)) => 2,
            Failure::Lib(Error::Overflow(_) | Error::Resource(_)) => 3,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Io(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

struct Progress(bool);

impl Progress {
    fn note(&self, msg: impl AsRef<str>) {
        if self.0 {
            eprintln!("zl: {}", msg.as_ref());
        }
    }
}

fn threads(global: &Global) -> usize {
    global
        .threads
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn word_string(w: &zaremba::Word) -> String {
    w.quotients()
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn enumerate(
    alphabet: &Alphabet,
    norm: u64,
    det: DetFilter,
    threads: usize,
) -> Result<Report, Failure> {
    let ball = if norm == 0 {
        OrbitBall {
            alphabet: alphabet.clone(),
            norm_bound: 0,
            det_filter: det,
            elements: Vec::new(),
        }
    } else {
        enumerate_ball_parallel(alphabet, norm as u128, det, threads)?
    };
    let words: Vec<_> = ball.words().collect();
    let elements: Vec<_> = ball
        .elements
        .iter()
        .zip(&words)
        .map(|(m, w)| json!({"a": m.a as u64, "b": m.b as u64, "c": m.c as u64, "d": m.d as u64, "word": w.quotients()}))
        .collect();
    let rows = ball
        .elements
        .iter()
        .zip(&words)
        .map(|(m, w)| {
            vec![
                m.a.to_string(),
                m.b.to_string(),
                m.c.to_string(),
                m.d.to_string(),
                word_string(w),
            ]
        })
        .collect();
    Ok(Report::new("enumerate")
        .field("alphabet", alphabet)
        .field("norm", norm)
        .field("det_filter", det)
        .field("count", ball.len())
        .field("elements", elements)
        .table(Table {
            headers: vec!["a", "b", "c", "d", "word"],
            rows,
        }))
}

fn run(cli: Cli) -> Result<Report, Failure> {
    let progress = Progress(!cli.global.quiet);
    let threads = threads(&cli.global);
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();

    match cli.command {
        Command::Enumerate {
            alphabet,
            norm,
            det,
        } => {
            progress.note(format!(
                "enumerating {alphabet} below norm {norm} on {threads} thread(s)"
            ));
            enumerate(&alphabet, norm, det.into(), threads)
        }
        Command::Density {
            alphabet,
            norm,
            grid,
        } => {
            progress.note(format!("density of {alphabet} up to {norm}"));
            let points = density_report(&alphabet, norm, grid)?;
            let rows = points
                .iter()
                .map(|p| {
                    vec![
                        p.cutoff.to_string(),
                        p.admissible.to_string(),
                        p.represented.to_string(),
                        fmt_float(p.fraction),
                    ]
                })
                .collect();
            Ok(Report::new("density")
                .field("alphabet", &alphabet)
                .field("norm", norm)
                .field("points", &points)
                .table(Table {
                    headers: vec!["cutoff", "admissible", "represented", "fraction"],
                    rows,
                }))
        }
        Command::Admissible {
            alphabet,
            values,
            qmax,
        } => {
            let certs = values
                .iter()
                .map(|&d| is_admissible(d, &alphabet, qmax))
                .collect::<Result<Vec<_>, _>>()?;
            let rows = certs
                .iter()
                .map(|c| {
                    vec![
                        c.d.to_string(),
                        c.admissible.to_string(),
                        c.witness.map_or(String::new(), |w| w.to_string()),
                        c.bounded.to_string(),
                    ]
                })
                .collect();
            Ok(Report::new("admissible")
                .field("alphabet", &alphabet)
                .field("qmax", qmax)
                .field("certificates", &certs)
                .table(Table {
                    headers: vec!["d", "admissible", "witness", "bounded"],
                    rows,
                }))
        }
        Command::Obstructions { alphabet, qmax } => {
            progress.note(format!("searching prime powers up to {qmax}"));
            let report = find_bad_modulus(&alphabet, qmax)?;
            Ok(Report::new("obstructions")
                .field("alphabet", &alphabet)
                .field("report", &report))
        }
        Command::Dimension { alphabet, tol } => {
            progress.note(format!("solving for the dimension of {alphabet}"));
            let e = dimension(&alphabet, tol)?;
            Ok(Report::new("dimension")
                .field("alphabet", &alphabet)
                .field("delta", e.delta)
                .field("collocation_order", e.collocation_order)
                .field("residual", e.residual)
                .field("order_change", e.order_change)
                .field("converged", e.converged))
        }
        Command::Series {
            alphabet,
            n,
            mode,
            cutoff,
        } => {
            let m = match mode {
                Mode::Truncated => SeriesMode::Truncated(cutoff),
                Mode::Euler => SeriesMode::Euler(cutoff),
            };
            let v = singular_series(n, m, &alphabet)?;
            let rows = v
                .terms
                .iter()
                .map(|t| {
                    vec![
                        t.index.to_string(),
                        t.numer.to_string(),
                        t.denom.to_string(),
                        fmt_float(t.value),
                    ]
                })
                .collect();
            let terms: Vec<_> = v
                .terms
                .iter()
                .map(|t| json!({"index": t.index, "numer": t.numer.to_string(), "denom": t.denom.to_string(), "value": t.value}))
                .collect();
            Ok(Report::new("series")
                .field("alphabet", &alphabet)
                .field("n", n)
                .field("mode", format!("{mode:?}").to_lowercase())
                .field("cutoff", cutoff)
                .field("value", v.value)
                .field("terms", terms)
                .table(Table {
                    headers: vec!["index", "numer", "denom", "value"],
                    rows,
                }))
        }
        Command::Circle {
            alphabet,
            norm,
            window,
            q_level,
            shift,
            det,
        } => {
            let config = MajorArcConfig::new(norm, q_level, shift)?;
            progress.note(format!("enumerating {alphabet} below norm {norm}"));
            let ball = enumerate_ball_parallel(&alphabet, norm as u128, det.into(), threads)?;
            progress.note(format!("{} elements; evaluating main terms", ball.len()));
            let res = decompose(&ball, window.unwrap_or((1, norm)), &config)?;
            let rows = res
                .records
                .iter()
                .map(|r| {
                    vec![
                        r.d.to_string(),
                        r.r.to_string(),
                        fmt_float(r.main),
                        fmt_float(r.error),
                        r.admissible.to_string(),
                    ]
                })
                .collect();
            Ok(Report::new("circle")
                .field("alphabet", &alphabet)
                .field("normalized_l2", res.normalized_l2())
                .field("exceptional_fraction", res.exceptional_fraction())
                .field("result", &res)
                .table(Table {
                    headers: vec!["d", "r", "main", "error", "admissible"],
                    rows,
                }))
        }
        Command::Primroots {
            pmax,
            height,
            three_mod_four,
            min_half_factor,
        } => {
            progress.note(format!("searching primes up to {pmax}"));
            let filters = SearchFilters {
                three_mod_four,
                min_half_factor,
            };
            let out = search_height_bounded(pmax, height, &filters)?;
            let rows = out
                .iter()
                .map(|o| match &o.record {
                    Some(r) => vec![
                        o.p.to_string(),
                        r.b.to_string(),
                        r.height.to_string(),
                        r.via_complement.to_string(),
                    ],
                    None => vec![o.p.to_string(), String::new(), String::new(), String::new()],
                })
                .collect();
            let missing: Vec<u64> = out
                .iter()
                .filter(|o| o.record.is_none())
                .map(|o| o.p)
                .collect();
            Ok(Report::new("primroots")
                .field("pmax", pmax)
                .field("height_bound", height)
                .field("filters", &filters)
                .field("none_found", missing)
                .field("results", &out)
                .table(Table {
                    headers: vec!["p", "b", "height", "via_complement"],
                    rows,
                }))
        }
        Command::Schedule {
            log2_n,
            r,
            c,
            j2,
            locate,
        } => {
            let s = match j2 {
                Some(j2) => Schedule::from_parts(log2_n, r, c, j2)?,
                None => Schedule::build(log2_n, r, c)?,
            };
            let entries: Vec<_> = s
                .indices()
                .map(|i| json!({"index": i, "exponent": s.exponent(i).to_string(), "log2_size": s.log2_size(i)}))
                .collect();
            let rows = s
                .indices()
                .map(|i| {
                    vec![
                        i.to_string(),
                        s.exponent(i).to_string(),
                        fmt_float(s.log2_size(i)),
                    ]
                })
                .collect();
            let located = locate
                .iter()
                .map(|&m| {
                    s.locate_index(m)
                        .map(|(j, h)| json!({"log2_m": m, "j": j, "h": h}))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (lo, hi) = s.m_range_log2();
            Ok(Report::new("schedule")
                .field("log2_n", log2_n)
                .field("r", r)
                .field("c", c)
                .field("j1", s.j1)
                .field("j2", s.j2)
                .field("j", s.j)
                .field("m_range_log2", [lo, hi])
                .field("log_sum", s.log_sum_report())
                .field("located", located)
                .field("exponents", entries)
                .table(Table {
                    headers: vec!["index", "exponent", "log2_size"],
                    rows,
                }))
        }
    }
}

fn emit(report: &Report, global: &Global) -> Result<(), Failure> {
    let mut sink: Box<dyn Write> = match &global.output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    match global.format {
        Format::Json => report
            .write_json(&mut sink)
            .map_err(|e| Failure::Io(e.to_string()))?,
        Format::Csv => report.write_csv(&mut sink).map_err(Failure::Usage)?,
    }
    sink.flush().map_err(|e| Failure::Io(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if cli.global.format == Format::Csv
        && matches!(
            cli.command,
            Command::Obstructions { .. } | Command::Dimension { .. }
        )
    {
        eprintln!("zl: this subcommand has no tabular output; use --format json");
        return ExitCode::from(1);
    }
    let global = cli.global.clone();
    match run(cli).and_then(|r| emit(&r, &global)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("zl: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
