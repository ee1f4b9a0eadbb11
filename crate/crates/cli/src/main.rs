use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dejean::cascade::BaseMode;
use dejean::certificate::BoundCertificate;
use dejean::corrections::PeriodRange;
use dejean::counting::count_dejean_exact;
use dejean::guard::ResourceGuard;
use dejean::pipeline::{
    corrections_stage, emit_table, load_quotient, perron_stage, row_from_certificate, run_pipeline, BoundOutcome,
    PipelineConfig, TableRow,
};
use dejean::spectral::{approx_perron, quotient_adjacency, ratio_to_f64, upper_bound_growth, DeltaMode, PowerOptions};
use dejean::verify::verify_certificate;
use dejean::words::AlphabetParams;
use dejean::Error;

#[derive(Parser)]
#[command(name = "dejean", about = "Growth-rate bounds for Dejean words")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Worker threads for stage-internal parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for stage caches.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Cap on enumerated nodes/words.
    #[arg(long, global = true, default_value_t = 2_000_000_000)]
    guard_count: u64,
    /// Wall-clock cap for enumerations, in seconds.
    #[arg(long, global = true)]
    guard_seconds: Option<u64>,
}

impl Common {
    fn guard(&self) -> ResourceGuard {
        ResourceGuard::new(self.guard_count, self.guard_seconds.map(Duration::from_secs))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DeltaArg {
    Exact,
    Rounded,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Default,
    Truncated,
}

#[derive(Args, Clone)]
struct Periods {
    #[arg(long)]
    p1: usize,
    #[arg(long)]
    p2: usize,
    /// Use exact estimates on [p0, p1] (the default).
    #[arg(long, conflicts_with = "no_zeta")]
    zeta: bool,
    /// Weak estimates only; requires p1 = p0 - 1.
    #[arg(long = "no-zeta")]
    no_zeta: bool,
    #[arg(long, value_enum, default_value = "rounded")]
    delta_mode: DeltaArg,
}

#[derive(Subcommand)]
enum Command {
    /// Build, prune and quotient the graph of trimmed words of length m.
    Graph {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        /// Write the quotient in cache format.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perron data of the quotient and the transfer-matrix upper bound.
    Spectral {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        /// Also compute the upper bound on the full trimmed graph.
        #[arg(long)]
        upper: bool,
    },
    /// The ω table (one line per period and class).
    Corrections {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        periods: Periods,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline: writes a certificate and its ω dump.
    Bound {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        periods: Periods,
        #[arg(long)]
        n0: usize,
        #[arg(long, value_enum, default_value = "default")]
        base_mode: BaseArg,
        /// Certificate path; the ω dump goes next to it with suffix `.omega`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate against its ω dump.
    Verify {
        certificate: PathBuf,
        /// Defaults to CERTIFICATE.omega.
        #[arg(long)]
        omega: Option<PathBuf>,
    },
    /// Exact counts of Dejean words of lengths 1..=n.
    Count {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// Results table from certificates, with the published rows.
    Table {
        certificates: Vec<PathBuf>,
        /// Append the published table.
        #[arg(long)]
        reference: bool,
        /// Compute the transfer-matrix upper bound for each row.
        #[arg(long)]
        upper: bool,
    },
}

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_GUARD: u8 = 4;
const EXIT_VERIFY: u8 = 5;

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Domain(_) => EXIT_CONFIG,
        Error::GuardExceeded { .. } => EXIT_GUARD,
        _ => 1,
    }
}

fn pipeline_config(
    common: &Common,
    k: usize,
    m: usize,
    periods: &Periods,
    n0: usize,
    base: BaseArg,
) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(k, m, periods.p1, periods.p2, n0);
    cfg.zeta = !periods.no_zeta;
    cfg.delta_mode = match periods.delta_mode {
        DeltaArg::Exact => DeltaMode::Exact,
        DeltaArg::Rounded => DeltaMode::Rounded,
    };
    cfg.base_mode = match base {
        BaseArg::Default => BaseMode::Default,
        BaseArg::Truncated => BaseMode::Truncated,
    };
    cfg.threads = common.threads;
    cfg.cache_dir = common.cache.clone();
    cfg.guard = common.guard();
    cfg
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn run(cli: &Cli) -> Result<u8, (String, Error)> {
    let common = &cli.common;
    let guard = common.guard();
    let cache = common.cache.as_deref();
    let params = |k: usize| AlphabetParams::new(k).map_err(|e| ("parameters".to_string(), Error::Config(e.to_string())));
    match &cli.command {
        Command::Graph { k, m, out } => {
            let p = params(*k)?;
            let q = load_quotient(&p, *m, cache, &guard).map_err(|e| ("graph".into(), e))?;
            println!("k {} m {} s {} s_hat {} edges {}", k, m, q.s(), q.s_hat(), q.edge_count());
            if let Some(path) = out {
                let f = std::fs::File::create(path).map_err(|e| ("graph".into(), e.into()))?;
                q.write_cache(std::io::BufWriter::new(f)).map_err(|e| ("graph".into(), e))?;
            }
            Ok(0)
        }
        Command::Spectral { k, m, upper } => {
            let p = params(*k)?;
            let q = load_quotient(&p, *m, cache, &guard).map_err(|e| ("graph".into(), e))?;
            let (r, _) = approx_perron(&quotient_adjacency(&q), &PowerOptions::default()).map_err(|e| ("perron".into(), e))?;
            let cert = perron_stage(&q).map_err(|e| ("perron".into(), e))?;
            println!("s {}", q.s());
            println!("r_approx {r:.12}");
            println!("r_hat {:.12} ({})", ratio_to_f64(&cert.r_hat), cert.r_hat);
            println!("mu_hat {:.12}", ratio_to_f64(&cert.mu_hat));
            if *upper {
                let u = upper_bound_growth(&p, *m, &guard).map_err(|e| ("upper bound".into(), e))?;
                println!("upper {u:.9}");
            }
            Ok(0)
        }
        Command::Corrections { k, m, periods, out } => {
            let cfg = pipeline_config(common, *k, *m, periods, m + 1, BaseArg::Truncated);
            let (p, range): (AlphabetParams, PeriodRange) =
                dejean::pipeline::validate(&cfg).map_err(|e| ("configuration".into(), e))?;
            let work = || -> Result<String, (String, Error)> {
                let q = load_quotient(&p, *m, cache, &guard).map_err(|e| ("graph".into(), e))?;
                let cert = perron_stage(&q).map_err(|e| ("perron".into(), e))?;
                let table = corrections_stage(&cfg, &q, &range, &cert.x_hat).map_err(|e| ("corrections".into(), e))?;
                Ok(table.dump())
            };
            let text = work()?;
            write_or_print(out, &text).map_err(|e| ("output".into(), e))?;
            Ok(0)
        }
        Command::Bound {
            k,
            m,
            periods,
            n0,
            base_mode,
            out,
        } => {
            let cfg = pipeline_config(common, *k, *m, periods, *n0, *base_mode);
            let run = run_pipeline(&cfg).map_err(|e| ("pipeline".into(), e))?;
            match run.outcome {
                BoundOutcome::Certified {
                    certificate,
                    omega_dump,
                    ..
                } => {
                    let text = certificate.emit();
                    match out {
                        Some(path) => {
                            std::fs::write(path, &text).map_err(|e| ("output".into(), e.into()))?;
                            std::fs::write(with_suffix(path, ".omega"), &omega_dump)
                                .map_err(|e| ("output".into(), e.into()))?;
                            eprintln!("alpha {:.9}", ratio_to_f64(&certificate.alpha));
                        }
                        None => print!("{text}"),
                    }
                    if certificate.mode == BaseMode::Truncated {
                        eprintln!("note: truncated base mode; the certificate is heuristic below the induction threshold");
                    }
                    Ok(0)
                }
                BoundOutcome::Infeasible(diag) => {
                    eprintln!("infeasible: {diag}");
                    Ok(EXIT_INFEASIBLE)
                }
                BoundOutcome::BaseFailed { alpha, n, d } => {
                    eprintln!(
                        "infeasible: base inequality fails at n = {n}, d = {d} (alpha {:.9})",
                        ratio_to_f64(&alpha)
                    );
                    Ok(EXIT_INFEASIBLE)
                }
            }
        }
        Command::Verify { certificate, omega } => {
            let text = std::fs::read_to_string(certificate).map_err(|e| ("verify".into(), e.into()))?;
            let cert = match BoundCertificate::parse(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("rejected: {e}");
                    return Ok(EXIT_VERIFY);
                }
            };
            let omega_path = omega.clone().unwrap_or_else(|| with_suffix(certificate, ".omega"));
            let dump = std::fs::read_to_string(&omega_path).map_err(|e| ("verify".into(), e.into()))?;
            let p = params(cert.k)?;
            let q = load_quotient(&p, cert.m, cache, &guard).map_err(|e| ("graph".into(), e))?;
            let report = match verify_certificate(&cert, &dump, &q) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("rejected: {e}");
                    return Ok(EXIT_VERIFY);
                }
            };
            for (name, ok, detail) in &report.checks {
                println!("{} {name} {detail}", if *ok { "ok  " } else { "FAIL" });
            }
            if report.accepted() {
                println!("accepted");
                Ok(0)
            } else {
                println!("rejected");
                Ok(EXIT_VERIFY)
            }
        }
        Command::Count { k, n } => {
            let p = params(*k)?;
            let counts = count_dejean_exact(&p, *n, &guard).map_err(|e| ("count".into(), e))?;
            for (i, c) in counts.iter().enumerate() {
                println!("{} {}", i + 1, c);
            }
            Ok(0)
        }
        Command::Table {
            certificates,
            reference,
            upper,
        } => {
            let mut rows = Vec::new();
            for path in certificates {
                let parsed = std::fs::read_to_string(path)
                    .ok()
                    .and_then(|t| BoundCertificate::parse(&t).ok());
                match parsed {
                    Some(cert) => {
                        let mut row = row_from_certificate(&cert);
                        if *upper {
                            let p = params(cert.k)?;
                            row.upper = Some(upper_bound_growth(&p, cert.m, &guard).map_err(|e| ("upper bound".into(), e))?);
                        }
                        rows.push(row);
                    }
                    None => {
                        eprintln!("{}: certificate absent or unreadable", path.display());
                        rows.push(TableRow {
                            k: 0,
                            m: 0,
                            s: 0,
                            n0: 0,
                            p1: 0,
                            p2: 0,
                            lower: None,
                            upper: None,
                        });
                    }
                }
            }
            print!("{}", emit_table(&rows, *reference));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err((stage, err)) => {
            let args: Vec<String> = std::env::args().collect();
            eprintln!("error in stage {stage}: {err}");
            eprintln!("reproduce with: {}", args.join(" "));
            ExitCode::from(exit_for(&err))
        }
    }
}
