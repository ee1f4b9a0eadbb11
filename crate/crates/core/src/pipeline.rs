//! End-to-end run: quotient, Perron certificate, corrections, cascade, α and
//! base, with optional on-disk caching of the expensive stages.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Zero};
use sha2::{Digest, Sha256};

use crate::cascade::{
    alpha_on_grid, base_alpha_limit, final_slack, induction_threshold, rho_cascade, solve_alpha, tail_exponent,
    verify_base, AlphaOutcome, BaseMode, BaseTranscript, Infeasibility, RhoPolynomial, StepContext,
};
use crate::certificate::{config_hash, delta_tag, BoundCertificate};
use crate::corrections::{
    assemble_omega, dump_zeta, eta_prime, p0, parse_omega_dump, parse_zeta_dump, shift_bounds, weight_digest,
    xi_weak_mode, zeta_table, Contribution, OmegaTable, PeriodRange,
};
use crate::counting::{count_fm_by_class, ClassCounts};
use crate::error::{Error, Result};
use crate::guard::ResourceGuard;
use crate::language_graph::{build_pipeline_quotient, QuotientIndex};
use crate::spectral::{
    approx_perron, certify_subeigenvector, quotient_adjacency, ratio_to_f64, DeltaMode, PerronCertificate,
    PowerOptions, VoltageLift, DEFAULT_DENOMINATOR_BITS, DEFAULT_MAX_LIFT_CELLS,
};
use crate::words::AlphabetParams;

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub k: usize,
    pub m: usize,
    pub p1: usize,
    pub p2: usize,
    pub n0: usize,
    /// Exact estimates on `[p0, p1]`. When off, `p1` must be `p0 - 1`.
    pub zeta: bool,
    pub delta_mode: DeltaMode,
    pub base_mode: BaseMode,
    pub threads: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub guard: ResourceGuard,
    pub max_lift_cells: usize,
}

impl PipelineConfig {
    pub fn new(k: usize, m: usize, p1: usize, p2: usize, n0: usize) -> PipelineConfig {
        PipelineConfig {
            k,
            m,
            p1,
            p2,
            n0,
            zeta: true,
            delta_mode: DeltaMode::Rounded,
            base_mode: BaseMode::Default,
            threads: None,
            cache_dir: None,
            guard: ResourceGuard::default(),
            max_lift_cells: DEFAULT_MAX_LIFT_CELLS,
        }
    }

    pub fn config_hash(&self) -> String {
        config_hash(self.k, self.m, self.p1, self.p2, self.n0, self.base_mode, self.delta_mode)
    }
}

#[derive(Clone, Debug)]
pub enum BoundOutcome {
    Certified {
        certificate: BoundCertificate,
        omega_dump: String,
        transcript: BaseTranscript,
    },
    Infeasible(Infeasibility),
    /// α solves the final inequality but the base fails at `(n, d)` even
    /// after lowering α.
    BaseFailed { alpha: BigRational, n: usize, d: usize },
}

pub struct PipelineRun {
    pub quotient: QuotientIndex,
    pub perron: PerronCertificate,
    pub omega: OmegaTable,
    pub rho: RhoPolynomial,
    pub outcome: BoundOutcome,
}

/// Checks the configuration before any expensive stage.
pub fn validate(cfg: &PipelineConfig) -> Result<(AlphabetParams, PeriodRange)> {
    let params = AlphabetParams::new(cfg.k).map_err(|e| Error::Config(e.to_string()))?;
    if cfg.k < 5 {
        return Err(Error::Config("the bound needs k >= 5".into()));
    }
    let p0 = p0(&params, cfg.m).map_err(|e| Error::Config(e.to_string()))?;
    if !cfg.zeta && cfg.p1 + 1 != p0 {
        return Err(Error::Config(format!(
            "without exact estimates p1 must be p0 - 1 = {}",
            p0 - 1
        )));
    }
    let range = PeriodRange::new(&params, cfg.m, cfg.p1, cfg.p2)?;
    if cfg.n0 <= cfg.m {
        return Err(Error::Config(format!("n0 = {} must exceed m = {}", cfg.n0, cfg.m)));
    }
    if cfg.base_mode == BaseMode::Default {
        let (_, b) = shift_bounds(&params, cfg.m, &range);
        let threshold = induction_threshold(&params, cfg.m, &range, b);
        if cfg.n0 < threshold {
            return Err(Error::Config(format!(
                "default base mode needs n0 >= {threshold} for k={} m={} p1={} p2={}; got n0 = {}",
                cfg.k, cfg.m, cfg.p1, cfg.p2, cfg.n0
            )));
        }
    }
    Ok((params, range))
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
}

fn cache_path(cfg: &PipelineConfig, name: &str) -> Option<PathBuf> {
    cfg.cache_dir.as_ref().map(|d| d.join(name))
}

fn read_cached(path: &Option<PathBuf>) -> Option<String> {
    path.as_ref().and_then(|p| fs::read_to_string(p).ok())
}

fn write_cached(path: &Option<PathBuf>, text: &str) -> Result<()> {
    if let Some(p) = path {
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)?;
        }
        let tmp = p.with_extension("tmp");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, p)?;
    }
    Ok(())
}

/// Builds (or loads) the pruned quotient for `(k, m)`.
pub fn load_quotient(params: &AlphabetParams, m: usize, cache: Option<&Path>, guard: &ResourceGuard) -> Result<QuotientIndex> {
    let path = cache.map(|d| d.join(format!("graph-{}.dejg", digest(&format!("k={} m={m}", params.k())))));
    if let Some(p) = &path {
        if let Ok(f) = fs::File::open(p) {
            let q = QuotientIndex::read_cache(BufReader::new(f))?;
            if q.params.k() == params.k() && q.m == m {
                return Ok(q);
            }
        }
    }
    let (_, _, q) = build_pipeline_quotient(params, m, guard)?;
    if let Some(p) = &path {
        let mut buf = Vec::new();
        q.write_cache(&mut buf)?;
        write_cached(&Some(p.clone()), &String::from_utf8(buf).expect("ascii"))?;
    }
    Ok(q)
}

/// Shifted power iteration and the rational certificate.
pub fn perron_stage(q: &QuotientIndex) -> Result<PerronCertificate> {
    let adj = quotient_adjacency(q);
    let (_, x) = approx_perron(&adj, &PowerOptions::default())?;
    certify_subeigenvector(&adj, &x, DEFAULT_DENOMINATOR_BITS)
}

/// All contributions `η'` and `ξ'`, tagged with the weight digest.
pub fn corrections_stage(
    cfg: &PipelineConfig,
    q: &QuotientIndex,
    range: &PeriodRange,
    x_hat: &[BigRational],
) -> Result<OmegaTable> {
    let params = q.params;
    let weights = weight_digest(x_hat);
    let key = format!(
        "k={} m={} p1={} p2={} delta={} x={weights}",
        cfg.k,
        cfg.m,
        cfg.p1,
        cfg.p2,
        delta_tag(cfg.delta_mode)
    );
    let omega_path = cache_path(cfg, &format!("omega-{}.txt", digest(&key)));
    if let Some(text) = read_cached(&omega_path) {
        let dump = parse_omega_dump(&text, q.s())?;
        if dump.weights.as_deref() == Some(weights.as_str()) {
            let mut table = assemble_omega(&params, cfg.m, range, q.s(), dump.contributions)?;
            table.weights = Some(weights);
            return Ok(table);
        }
    }
    let mut contributions: Vec<Contribution> = Vec::new();
    if range.p1 >= range.p0 {
        let zkey = format!("k={} m={} p1={}", cfg.k, cfg.m, cfg.p1);
        let zeta_path = cache_path(cfg, &format!("zeta-{}.txt", digest(&zkey)));
        let rows = match read_cached(&zeta_path) {
            Some(text) => parse_zeta_dump(&text, q.s())?,
            None => {
                let rows = zeta_table(q, range, &cfg.guard)?;
                write_cached(&zeta_path, &dump_zeta(&rows))?;
                rows
            }
        };
        contributions.extend(eta_prime(&params, cfg.m, &rows, x_hat));
    }
    let lift = VoltageLift::new(q, cfg.max_lift_cells)?;
    contributions.extend(xi_weak_mode(&lift, range, x_hat, cfg.delta_mode)?);
    let mut table = assemble_omega(&params, cfg.m, range, q.s(), contributions)?;
    table.weights = Some(weights);
    write_cached(&omega_path, &table.dump())?;
    Ok(table)
}

/// `|F_m^{(w_i)}(n)|` for `n = m..=n0`.
pub fn counts_stage(cfg: &PipelineConfig, q: &QuotientIndex) -> Result<Vec<ClassCounts>> {
    let key = format!("k={} m={} n0={}", cfg.k, cfg.m, cfg.n0);
    let path = cache_path(cfg, &format!("counts-{}.txt", digest(&key)));
    if let Some(text) = read_cached(&path) {
        let mut out = Vec::new();
        for line in text.lines() {
            let f: Vec<&str> = line.split_whitespace().collect();
            let n = f[0].parse().map_err(|_| Error::Parse("bad counts cache".into()))?;
            let counts = f[1..]
                .iter()
                .map(|c| c.parse().map_err(|_| Error::Parse("bad counts cache".into())))
                .collect::<Result<Vec<u128>>>()?;
            out.push(ClassCounts { n, counts });
        }
        if out.len() == cfg.n0 - cfg.m + 1 {
            return Ok(out);
        }
    }
    let counts = count_fm_by_class(q, cfg.n0, &cfg.guard)?;
    let mut text = String::new();
    for cc in &counts {
        text.push_str(&cc.n.to_string());
        for c in &cc.counts {
            text.push(' ');
            text.push_str(&c.to_string());
        }
        text.push('\n');
    }
    write_cached(&path, &text)?;
    Ok(counts)
}

/// Runs every stage. Stage-internal work uses `cfg.threads` workers.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineRun> {
    match cfg.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| run_stages(cfg))
        }
        None => run_stages(cfg),
    }
}

fn run_stages(cfg: &PipelineConfig) -> Result<PipelineRun> {
    let (params, range) = validate(cfg)?;
    let m = cfg.m;
    let quotient = load_quotient(&params, m, cfg.cache_dir.as_deref(), &cfg.guard)?;
    let perron = perron_stage(&quotient)?;
    let adj = quotient_adjacency(&quotient);
    let omega = corrections_stage(cfg, &quotient, &range, &perron.x_hat)?;
    let rho = rho_cascade(omega.a, &omega.omega, &perron.x_hat, &adj)?;
    let q = tail_exponent(&params, cfg.p2);
    let alpha = match solve_alpha(&perron.r_hat, &rho, &perron.mu_hat, q, true)? {
        AlphaOutcome::Feasible(a) => a,
        AlphaOutcome::Infeasible(diag) => {
            return Ok(PipelineRun {
                quotient,
                perron,
                omega,
                rho,
                outcome: BoundOutcome::Infeasible(diag),
            })
        }
    };
    let counts = counts_stage(cfg, &quotient)?;
    let s_values: Vec<BigRational> = counts.iter().map(|c| c.weighted(&perron.x_hat)).collect();
    let ctx = StepContext {
        params: &params,
        m,
        range: &range,
        a: omega.a,
        b: omega.b,
        contributions: &omega.contributions,
        x_hat: &perron.x_hat,
        adj: &adj,
        r_hat: &perron.r_hat,
        mu: &perron.mu_hat,
        q,
    };
    // The ratio inequalities at n0 cap α from above.
    let limit = base_alpha_limit(&s_values, m, cfg.n0) * (1.0 - 1e-12);
    let mut alpha = match BigRational::from_f64(limit) {
        Some(l) if l < alpha => alpha_on_grid(&l),
        _ => alpha,
    };
    let mut transcript = verify_base(&ctx, cfg.base_mode, &s_values, cfg.n0, &alpha)?;
    let mut attempts = 0;
    while let Some((n, d)) = transcript.failure {
        attempts += 1;
        let lowered = alpha_on_grid(&(BigRational::one() + (&alpha - BigRational::one()) * BigRational::new(63.into(), 64.into())));
        let still = final_slack(&perron.r_hat, &rho, &perron.mu_hat, q, &lowered, true)? >= BigRational::zero();
        if attempts > 32 || !still || lowered <= BigRational::one() {
            return Ok(PipelineRun {
                quotient,
                perron,
                omega,
                rho,
                outcome: BoundOutcome::BaseFailed { alpha, n, d },
            });
        }
        alpha = lowered;
        transcript = verify_base(&ctx, cfg.base_mode, &s_values, cfg.n0, &alpha)?;
    }
    let omega_dump = omega.dump();
    let mut notes = vec![format!("alpha ~ {:.9}", ratio_to_f64(&alpha))];
    notes.extend(transcript.lines.iter().cloned());
    let certificate = BoundCertificate {
        config_hash: cfg.config_hash(),
        k: cfg.k,
        m,
        p1: cfg.p1,
        p2: cfg.p2,
        n0: cfg.n0,
        mode: cfg.base_mode,
        delta_mode: cfg.delta_mode,
        r_hat: perron.r_hat.clone(),
        x_hat: perron.x_hat.clone(),
        mu_hat: perron.mu_hat.clone(),
        rho: rho.clone(),
        q,
        alpha,
        base: counts,
        omega_hash: hex::encode(Sha256::digest(omega_dump.as_bytes())),
        notes,
    };
    Ok(PipelineRun {
        quotient,
        perron,
        omega,
        rho,
        outcome: BoundOutcome::Certified {
            certificate,
            omega_dump,
            transcript,
        },
    })
}

/// One line of the results table.
#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub k: usize,
    pub m: usize,
    pub s: usize,
    pub n0: usize,
    pub p1: usize,
    pub p2: usize,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// Published parameters and bounds, for comparison.
pub const REFERENCE_ROWS: [(usize, usize, usize, usize, usize, usize, f64, f64); 6] = [
    (5, 50, 5287, 150, 183, 600, 1.153811, 1.157895),
    (6, 33, 1926, 100, 125, 500, 1.223437, 1.224695),
    (7, 28, 318, 100, 126, 600, 1.236409, 1.236899),
    (8, 18, 31, 100, 119, 600, 1.234725, 1.234843),
    (9, 20, 42, 100, 123, 600, 1.246659, 1.246678),
    (10, 22, 55, 100, 122, 600, 1.239287, 1.239308),
];

pub fn reference_rows() -> Vec<TableRow> {
    REFERENCE_ROWS
        .iter()
        .map(|&(k, m, s, n0, p1, p2, lower, upper)| TableRow {
            k,
            m,
            s,
            n0,
            p1,
            p2,
            lower: Some(lower),
            upper: Some(upper),
        })
        .collect()
}

/// Row for a certificate; the upper column is filled by the caller.
pub fn row_from_certificate(cert: &BoundCertificate) -> TableRow {
    TableRow {
        k: cert.k,
        m: cert.m,
        s: cert.x_hat.len(),
        n0: cert.n0,
        p1: cert.p1,
        p2: cert.p2,
        lower: Some(ratio_to_f64(&cert.alpha)),
        upper: None,
    }
}

/// Renders rows in the layout `k m s n0 p1 p2 lower upper`. Rows with no
/// lower bound are marked absent. With `reference`, the published rows are
/// appended.
pub fn emit_table(rows: &[TableRow], reference: bool) -> String {
    let mut out = format!(
        "{:>3} {:>4} {:>6} {:>5} {:>5} {:>5} {:>10} {:>10}  {}\n",
        "k", "m", "s", "n0", "p1", "p2", "lower", "upper", "source"
    );
    let fmt = |v: Option<f64>| v.map_or_else(|| "absent".to_string(), |x| format!("{x:.6}"));
    let mut line = |r: &TableRow, source: &str| {
        out.push_str(&format!(
            "{:>3} {:>4} {:>6} {:>5} {:>5} {:>5} {:>10} {:>10}  {}\n",
            r.k,
            r.m,
            r.s,
            r.n0,
            r.p1,
            r.p2,
            fmt(r.lower),
            fmt(r.upper),
            source
        ));
    };
    for r in rows {
        line(r, "computed");
    }
    if reference {
        for r in reference_rows() {
            line(&r, "published");
        }
    }
    out
}
