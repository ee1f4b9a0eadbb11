//! Independent re-check of a bound certificate.
//!
//! Nothing here calls the producer's arithmetic: the Perron rule, the
//! period geometry, the cascade, the α inequality and the base chain are
//! recomputed from scratch with plain rationals. Shared code is limited to
//! parsing and the quotient itself.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use crate::certificate::{config_hash, BoundCertificate};
use crate::cascade::BaseMode;
use crate::corrections::{parse_omega_dump, Contribution, EstimateKind};
use crate::error::Result;
use crate::language_graph::QuotientIndex;

/// Outcome of a verification: the checks run, in order, up to the first
/// failure.
#[derive(Clone, Debug, Default)]
pub struct Verification {
    pub checks: Vec<(String, bool, String)>,
}

impl Verification {
    pub fn accepted(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.1)
    }

    pub fn first_failure(&self) -> Option<&(String, bool, String)> {
        self.checks.iter().find(|c| !c.1)
    }

    fn record(&mut self, name: &str, ok: bool, detail: String) -> bool {
        self.checks.push((name.to_string(), ok, detail));
        ok
    }
}

const RHO_BITS: u32 = 64;

fn grid_floor(x: &BigRational) -> BigRational {
    let g = BigInt::one() << RHO_BITS;
    BigRational::new((x * BigRational::from_integer(g.clone())).floor().to_integer(), g)
}

fn grid_ceil(x: &BigRational) -> BigRational {
    let g = BigInt::one() << RHO_BITS;
    BigRational::new((x * BigRational::from_integer(g.clone())).ceil().to_integer(), g)
}

struct Geometry {
    k: usize,
    m: usize,
}

impl Geometry {
    fn longest(&self, p: usize) -> usize {
        (self.k * p) / (self.k - 1)
    }
    fn chi(&self, p: usize) -> usize {
        p / (self.k - 1) + 1
    }
    fn p0(&self) -> usize {
        self.m + 1 - (self.m + 1) / self.k
    }
    fn exact_shift(&self, j: usize) -> i64 {
        self.longest(j) as i64 + 1 - self.m as i64
    }
    fn weak_shift(&self, j: usize) -> i64 {
        if self.chi(j) <= self.m {
            j as i64 - 1
        } else {
            self.longest(j) as i64 - self.m as i64
        }
    }
    fn kind(&self, p1: usize, j: usize) -> EstimateKind {
        if j <= p1 {
            EstimateKind::Exact
        } else if self.chi(j) <= self.m {
            EstimateKind::WeakSmall
        } else {
            EstimateKind::WeakLarge
        }
    }
    fn shift(&self, p1: usize, j: usize) -> i64 {
        if j <= p1 {
            self.exact_shift(j)
        } else {
            self.weak_shift(j)
        }
    }
    /// First `n` at which the estimate for `j` holds.
    fn established(&self, p1: usize, j: usize) -> usize {
        match self.kind(p1, j) {
            EstimateKind::Exact => j + self.chi(j),
            EstimateKind::WeakSmall => j + self.m,
            EstimateKind::WeakLarge => (j + self.m).max(self.longest(j)),
        }
    }
    fn shift_range(&self, p1: usize, p2: usize) -> (i64, i64) {
        let d2 = self.weak_shift(p1 + 1);
        let d3 = self.weak_shift(p2);
        if p1 >= self.p0() {
            (d2.min(self.exact_shift(self.p0())), d3.max(self.exact_shift(p1)))
        } else {
            (d2, d3)
        }
    }
    fn threshold(&self, p1: usize, p2: usize, b: i64) -> usize {
        let mut n = self.longest(p2) + 1;
        for j in self.p0()..=p2 {
            n = n.max(self.established(p1, j));
        }
        n = n.max(b.max(0) as usize + self.m);
        while n - n / self.k < self.m {
            n += 1;
        }
        n
    }
}

/// The cascade rule in plain rationals over rows `ω(a..=a+rows-1)`.
fn cascade(omega: &[Vec<BigRational>], x: &[BigRational], adj: &[Vec<u32>]) -> Option<Vec<BigRational>> {
    let mut out = Vec::new();
    let mut cur = omega[0].clone();
    for d in 0..omega.len() {
        if cur.iter().any(|v| v.is_negative()) {
            return None;
        }
        let ratios: Vec<BigRational> = cur.iter().zip(x).map(|(w, xi)| w / xi).collect();
        if d + 1 == omega.len() {
            out.push(grid_ceil(ratios.iter().max().unwrap()));
            break;
        }
        let r = grid_floor(ratios.iter().min().unwrap());
        let nu: Vec<BigRational> = cur.iter().zip(x).map(|(w, xi)| w - &r * xi).collect();
        out.push(r);
        let mut next = omega[d + 1].clone();
        for (i, row) in adj.iter().enumerate() {
            for &l in row {
                next[i] += &nu[l as usize];
            }
        }
        cur = next;
    }
    Some(out)
}

/// `r̂ - Σ_d ρ_d α^{-d} - [tail] - α`, term by term.
fn slack(
    r_hat: &BigRational,
    a: i64,
    rho: &[BigRational],
    mu: &BigRational,
    q: usize,
    alpha: &BigRational,
    tail: bool,
) -> BigRational {
    // Put every term over the common denominator 2^64 α_num^b.
    let (an, ad) = (alpha.numer().clone(), alpha.denom().clone());
    let b = a as usize + rho.len() - 1;
    let g = BigInt::one() << RHO_BITS;
    let mut an_pows = vec![BigInt::one()];
    for _ in 0..=b {
        let next = an_pows.last().unwrap() * &an;
        an_pows.push(next);
    }
    let mut num = BigInt::zero();
    let mut ad_pow = num_traits::pow(ad.clone(), a as usize);
    for (e, r) in rho.iter().enumerate() {
        let d = a as usize + e;
        let rg = r * BigRational::from_integer(g.clone());
        num += rg.to_integer() * &ad_pow * &an_pows[b - d];
        ad_pow *= &ad;
    }
    let p = BigRational::new(num, g * &an_pows[b]);
    let mut total = r_hat - p - alpha;
    if tail {
        total -= mu / (num_traits::pow(alpha.clone(), q) * (alpha - BigRational::one()));
    }
    total
}

/// Checks `cert` against the ω dump it names and the quotient it was built
/// on. Stops at the first failing item.
pub fn verify_certificate(cert: &BoundCertificate, omega_dump: &str, q: &QuotientIndex) -> Result<Verification> {
    let mut v = Verification::default();
    let k = q.params.k();
    let s = q.s();
    let geo = Geometry { k, m: q.m };

    let ok = cert.k == k && cert.m == q.m && cert.x_hat.len() == s;
    if !v.record("parameters", ok, format!("k={} m={} s={}", k, q.m, s)) {
        return Ok(v);
    }
    let expected = config_hash(cert.k, cert.m, cert.p1, cert.p2, cert.n0, cert.mode, cert.delta_mode);
    if !v.record("config hash", expected == cert.config_hash, expected) {
        return Ok(v);
    }
    let (p0, p1, p2) = (geo.p0(), cert.p1, cert.p2);
    let ok = p1 + 1 >= p0 && p1 < p2 && p2 + 3 >= 2 * k && geo.chi(p1 + 1) + 1 >= k;
    if !v.record("period range", ok, format!("p0={p0} p1={p1} p2={p2}")) {
        return Ok(v);
    }
    let q_expected = (p2 + 1) / (k - 1) - 1;
    if !v.record("tail exponent", cert.q == q_expected, format!("q={q_expected}")) {
        return Ok(v);
    }

    // Sub-eigenvector inequality and the exact min rule for r̂.
    let x = &cert.x_hat;
    if !v.record("x positive", x.iter().all(|xi| xi.is_positive()), String::new()) {
        return Ok(v);
    }
    let adj: Vec<Vec<u32>> = q.out.iter().map(|row| row.iter().map(|e| e.to).collect()).collect();
    let mut min_ratio: Option<BigRational> = None;
    for (i, row) in adj.iter().enumerate() {
        let sum = row.iter().fold(BigRational::zero(), |acc, &j| acc + &x[j as usize]);
        let ratio = sum / &x[i];
        if min_ratio.as_ref().map_or(true, |m| &ratio < m) {
            min_ratio = Some(ratio);
        }
    }
    let min_ratio = min_ratio.unwrap();
    let ok = min_ratio == cert.r_hat && cert.r_hat > BigRational::one();
    if !v.record("perron rule", ok, format!("min (Dx)_i/x_i = {min_ratio}")) {
        return Ok(v);
    }
    let mu = x.iter().max().unwrap() / x.iter().min().unwrap();
    if !v.record("mu", mu == cert.mu_hat, mu.to_string()) {
        return Ok(v);
    }

    // ω table: hash, weights binding, geometry of every entry.
    let digest = hex::encode(Sha256::digest(omega_dump.as_bytes()));
    if !v.record("omega hash", digest == cert.omega_hash, digest.clone()) {
        return Ok(v);
    }
    let dump = parse_omega_dump(omega_dump, s)?;
    let mut xtext = String::new();
    for (i, xi) in x.iter().enumerate() {
        xtext.push_str(&format!("{} {}/{}\n", i, xi.numer(), xi.denom()));
    }
    let xdigest = hex::encode(Sha256::digest(xtext.as_bytes()));
    let ok = dump.weights.as_deref() == Some(xdigest.as_str());
    if !v.record("omega weights", ok, xdigest) {
        return Ok(v);
    }
    let (a, b) = geo.shift_range(p1, p2);
    let ok = (dump.a, dump.b) == (a, b) && (cert.rho.a, cert.rho.b) == (a, b);
    if !v.record("shift range", ok, format!("[{a}, {b}]")) {
        return Ok(v);
    }
    let mut bad = None;
    for c in &dump.contributions {
        let fine = (p0..=p2).contains(&c.j)
            && c.kind == geo.kind(p1, c.j)
            && c.d == geo.shift(p1, c.j)
            && c.values.iter().all(|val| !val.is_negative());
        if !fine {
            bad = Some(c.j);
            break;
        }
    }
    if !v.record("omega geometry", bad.is_none(), format!("{bad:?}")) {
        return Ok(v);
    }
    let table = |contribs: &[&Contribution], top: i64| -> Vec<Vec<BigRational>> {
        let mut t = vec![vec![BigRational::zero(); s]; (top - a + 1) as usize];
        for c in contribs {
            for (acc, val) in t[(c.d - a) as usize].iter_mut().zip(&c.values) {
                *acc += val;
            }
        }
        t
    };

    // Cascade recurrence.
    let all: Vec<&Contribution> = dump.contributions.iter().collect();
    let rho = cascade(&table(&all, b), x, &adj);
    let ok = rho.as_deref() == Some(&cert.rho.rho[..]);
    let detail = match &rho {
        None => "negative residual".to_string(),
        Some(r) => match r.iter().zip(&cert.rho.rho).position(|(p, c)| p != c) {
            Some(i) => format!("mismatch at d = {}", a + i as i64),
            None => String::new(),
        },
    };
    if !v.record("cascade", ok, detail) {
        return Ok(v);
    }

    // Final inequality.
    let alpha = &cert.alpha;
    if !v.record("alpha > 1", alpha > &BigRational::one(), String::new()) {
        return Ok(v);
    }
    let sl = slack(&cert.r_hat, a, &cert.rho.rho, &cert.mu_hat, cert.q, alpha, true);
    let approx = sl.to_f64().unwrap_or(f64::NAN);
    if !v.record("final inequality", !sl.is_negative(), format!("slack {approx:.6e}")) {
        return Ok(v);
    }

    // Base.
    let m = q.m;
    let n0 = cert.n0;
    let shape = n0 > m
        && cert.base.len() == n0 - m + 1
        && cert.base.iter().enumerate().all(|(i, cc)| cc.n == m + i && cc.counts.len() == s)
        && cert.base[0].counts.iter().all(|&c| c == 1);
    if !v.record("base shape", shape, String::new()) {
        return Ok(v);
    }
    let weighted: Vec<BigRational> = cert
        .base
        .iter()
        .map(|cc| {
            cc.counts
                .iter()
                .zip(x)
                .fold(BigRational::zero(), |acc, (&c, xi)| acc + xi * BigRational::from_integer(BigInt::from(c)))
        })
        .collect();
    let threshold = geo.threshold(p1, p2, b);
    if cert.mode == BaseMode::Default && !v.record("base threshold", n0 >= threshold, format!("n0 >= {threshold}")) {
        return Ok(v);
    }
    let mut witness = None;
    for d in 1..=n0 - m {
        if weighted[n0 - m] < num_traits::pow(alpha.clone(), d) * &weighted[n0 - m - d] {
            witness = Some(d);
            break;
        }
    }
    if !v.record("base ratios", witness.is_none(), format!("n = {n0}, failing d = {witness:?}")) {
        return Ok(v);
    }
    if cert.mode == BaseMode::Truncated {
        for n in n0..threshold {
            let top = (n as i64 - m as i64).min(b);
            let fits = |j: usize| geo.longest(j) < n + 1;
            let sl = if top < a {
                &cert.r_hat - alpha
            } else {
                let kept: Vec<&Contribution> = dump
                    .contributions
                    .iter()
                    .filter(|c| fits(c.j) && geo.established(p1, c.j) <= n && c.d <= top)
                    .collect();
                let Some(r) = cascade(&table(&kept, top), x, &adj) else {
                    v.record("truncated chain", false, format!("negative residual at n = {n}"));
                    return Ok(v);
                };
                slack(&cert.r_hat, a, &r, &cert.mu_hat, cert.q, alpha, fits(p2 + 1))
            };
            if sl.is_negative() {
                v.record("truncated chain", false, format!("step n = {n} fails"));
                return Ok(v);
            }
        }
        v.record("truncated chain", true, format!("n = {n0}..{threshold} (heuristic)"));
    }
    Ok(v)
}
