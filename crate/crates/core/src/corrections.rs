//! Upper bounds on the losses `|H_j^{(w)}(n+1)|` caused by prohibited
//! suffixes of minimal period `j`, and their assembly into the shift table
//! `ω_l(d)`.
//!
//! Periods `j ∈ [p_0, p_1]` use the exact prefix-class counts `ζ`; periods
//! `j ∈ (p_1, p_2]` use path counts on the voltage lift.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::guard::ResourceGuard;
use crate::language_graph::QuotientIndex;
use crate::perm::Perm;
use crate::spectral::{DeltaMode, Direction, Magnitude, UpF64, VoltageLift};
use crate::words::{suffix_ok, AlphabetParams};

/// Index arithmetic attached to one candidate minimal period `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeriodGeometry {
    pub j: usize,
    pub chi: usize,
    /// Length of a minimal prohibited factor of period `j`.
    pub h_len: usize,
    pub t: usize,
    /// Shift of the exact (`ζ`) estimate: `⌊kj/(k-1)⌋ + 1 - m`.
    pub d_exact: i64,
    /// Shift of the weak estimate.
    pub d_weak: i64,
    pub n_prime_offset: usize,
    pub n_dblprime_offset: usize,
}

impl PeriodGeometry {
    pub fn new(params: &AlphabetParams, m: usize, j: usize) -> PeriodGeometry {
        let chi = params.chi(j);
        let long = params.max_allowed_len(j);
        let d_weak = if chi <= m {
            j as i64 - 1
        } else {
            long as i64 - m as i64
        };
        PeriodGeometry {
            j,
            chi,
            h_len: long + 1,
            t: j + chi + 1,
            d_exact: long as i64 + 1 - m as i64,
            d_weak,
            n_prime_offset: j / (params.k() - 1),
            n_dblprime_offset: long,
        }
    }

    pub fn weak_is_small(&self, m: usize) -> bool {
        self.chi <= m
    }
}

/// Smallest possible minimal period of a prohibited suffix in `G(n+1)`.
pub fn p0(params: &AlphabetParams, m: usize) -> Result<usize> {
    if m <= params.k() {
        return Err(Error::Domain(format!("m = {m} must exceed k = {}", params.k())));
    }
    Ok((m + 1) - (m + 1) / params.k())
}

/// Period range split: exact estimates on `[p0, p1]`, weak ones on `(p1, p2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeriodRange {
    pub p0: usize,
    pub p1: usize,
    pub p2: usize,
}

impl PeriodRange {
    pub fn new(params: &AlphabetParams, m: usize, p1: usize, p2: usize) -> Result<PeriodRange> {
        let p0 = p0(params, m)?;
        let k = params.k();
        if p1 + 1 < p0 {
            return Err(Error::Config(format!("p1 = {p1} is below p0 - 1 = {}", p0 - 1)));
        }
        if p1 >= p2 {
            return Err(Error::Config(format!("need p1 < p2, got p1 = {p1}, p2 = {p2}")));
        }
        if p2 < 2 * k - 3 {
            return Err(Error::Config(format!(
                "p2 = {p2} violates p2 >= 2k - 3 = {}",
                2 * k - 3
            )));
        }
        if params.chi(p1 + 1) < k - 1 {
            return Err(Error::Config(format!(
                "weak estimates need chi(p1 + 1) >= k - 1; chi({}) = {}",
                p1 + 1,
                params.chi(p1 + 1)
            )));
        }
        Ok(PeriodRange { p0, p1, p2 })
    }
}

// ---------------------------------------------------------------------------
// Exact path: the sets X_{j,t}^{(w)}

/// Visits every word of `X_{j,t}^{(w)}` for the representative `w` of class
/// `w_class`, in forward letter order. Returns the number of words.
pub fn enumerate_x<F: FnMut(&[u8])>(
    q: &QuotientIndex,
    j: usize,
    w_class: u32,
    guard: &ResourceGuard,
    mut visit: F,
) -> Result<u64> {
    let params = q.params;
    let m = q.m;
    let g = PeriodGeometry::new(&params, m, j);
    let t = g.t;
    if t < m {
        return Err(Error::Domain(format!("t = {t} is shorter than m = {m}")));
    }
    let w = q.reps[w_class as usize].letters();
    // rev[i] = v[t - i] (1-based positions of v).
    let mut rev: Vec<u8> = w.iter().rev().copied().collect();
    let chi = g.chi;
    // Forced block v[2..=1+chi] = v[2+j..=1+chi+j] already inside w.
    for p in (t - m + 1).max(2)..=(1 + chi) {
        if rev[t - p] != rev[t - p - j] {
            return Ok(0);
        }
    }
    let mut state = XSearch {
        q,
        params,
        t,
        j,
        chi,
        guard,
        visited: 0,
        found: 0,
        window: vec![0u8; m],
        forward: vec![0u8; t],
    };
    let p_start = t - m;
    if p_start == 0 {
        state.complete(&rev, &mut visit);
    } else {
        state.dfs(&mut rev, p_start, &mut visit)?;
    }
    Ok(state.found)
}

struct XSearch<'a> {
    q: &'a QuotientIndex,
    params: AlphabetParams,
    t: usize,
    j: usize,
    chi: usize,
    guard: &'a ResourceGuard,
    visited: u64,
    found: u64,
    window: Vec<u8>,
    forward: Vec<u8>,
}

impl XSearch<'_> {
    fn complete<F: FnMut(&[u8])>(&mut self, rev: &[u8], visit: &mut F) {
        for (i, &a) in rev.iter().rev().enumerate() {
            self.forward[i] = a;
        }
        assert_ne!(
            self.forward[0], self.forward[self.j],
            "X word whose prefix carries a prohibited factor"
        );
        self.found += 1;
        visit(&self.forward);
    }

    /// Fills position `p` (1-based) and recurses leftwards.
    fn dfs<F: FnMut(&[u8])>(&mut self, rev: &mut Vec<u8>, p: usize, visit: &mut F) -> Result<()> {
        self.visited += 1;
        if self.visited & 0xffff == 0 {
            self.guard.check_count("X enumeration nodes", self.visited)?;
            self.guard.check_time("X enumeration")?;
        }
        let t = self.t;
        let m = self.q.m;
        let forced = (2..=1 + self.chi).contains(&p);
        let k = self.params.k() as u8;
        for c in 0..k {
            if forced && c != rev[t - p - self.j] {
                continue;
            }
            rev.push(c);
            if self.accept(rev, p, m) {
                if p == 1 {
                    self.complete(rev, visit);
                } else {
                    self.dfs(rev, p - 1, visit)?;
                }
            }
            rev.pop();
        }
        Ok(())
    }

    fn accept(&mut self, rev: &[u8], p: usize, m: usize) -> bool {
        let t = self.t;
        // Window v[p .. p+m-1] in forward order.
        for i in 0..m {
            self.window[i] = rev[t - p - i];
        }
        if self.q.class_of(&self.window).is_none() {
            return false;
        }
        if p >= 3 {
            suffix_ok(rev, &self.params)
        } else {
            // Only v[p .. t-1] has to stay free of prohibited factors.
            suffix_ok(&rev[1..], &self.params)
        }
    }
}

/// Counts `ζ^{(l)}_{j,t}(w)` of the length-m prefixes of `X_{j,t}^{(w)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZetaRow {
    pub j: usize,
    pub w_class: u32,
    pub counts: Vec<u64>,
    pub total: u64,
}

pub fn enumerate_x_and_zeta(
    q: &QuotientIndex,
    j: usize,
    w_class: u32,
    guard: &ResourceGuard,
) -> Result<ZetaRow> {
    let mut counts = vec![0u64; q.s()];
    let m = q.m;
    let total = enumerate_x(q, j, w_class, guard, |v| {
        let (l, _) = q
            .class_of(&v[..m])
            .expect("prefix window of an X word lies in the pruned level");
        counts[l as usize] += 1;
    })?;
    Ok(ZetaRow {
        j,
        w_class,
        counts,
        total,
    })
}

/// `ζ` rows for every `j ∈ [p0, p1]` and every class, computed in parallel.
pub fn zeta_table(q: &QuotientIndex, range: &PeriodRange, guard: &ResourceGuard) -> Result<Vec<ZetaRow>> {
    let jobs: Vec<(usize, u32)> = (range.p0..=range.p1)
        .flat_map(|j| (0..q.s() as u32).map(move |w| (j, w)))
        .collect();
    jobs.par_iter()
        .map(|&(j, w)| enumerate_x_and_zeta(q, j, w, guard))
        .collect()
}

pub fn dump_zeta(rows: &[ZetaRow]) -> String {
    let mut out = String::new();
    for r in rows {
        for (l, &c) in r.counts.iter().enumerate() {
            if c != 0 {
                writeln!(out, "{} {} {} {}", r.j, r.w_class, l, c).unwrap();
            }
        }
    }
    out
}

/// Reads a [`dump_zeta`] listing back. Totals are not stored and come back
/// as the sum of the listed counts.
pub fn parse_zeta_dump(text: &str, s: usize) -> Result<Vec<ZetaRow>> {
    let mut rows: BTreeMap<(usize, u32), ZetaRow> = BTreeMap::new();
    for line in text.lines() {
        let f: Vec<u64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad zeta line {line:?}"))))
            .collect::<Result<_>>()?;
        if f.len() != 4 || f[2] as usize >= s {
            return Err(Error::Parse(format!("bad zeta line {line:?}")));
        }
        let (j, w) = (f[0] as usize, f[1] as u32);
        let row = rows.entry((j, w)).or_insert_with(|| ZetaRow {
            j,
            w_class: w,
            counts: vec![0; s],
            total: 0,
        });
        row.counts[f[2] as usize] = f[3];
        row.total += f[3];
    }
    Ok(rows.into_values().collect())
}

// ---------------------------------------------------------------------------
// Contributions and the ω table

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EstimateKind {
    Exact,
    WeakSmall,
    WeakLarge,
}

impl EstimateKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EstimateKind::Exact => "exact",
            EstimateKind::WeakSmall => "small",
            EstimateKind::WeakLarge => "large",
        }
    }

    pub fn from_tag(tag: &str) -> Result<EstimateKind> {
        match tag {
            "exact" => Ok(EstimateKind::Exact),
            "small" => Ok(EstimateKind::WeakSmall),
            "large" => Ok(EstimateKind::WeakLarge),
            _ => Err(Error::Parse(format!("unknown estimate kind {tag:?}"))),
        }
    }
}

/// The bound `Σ_i x̂_i |H_j^{(w_i)}(n+1)| ≤ Σ_l values_l |F_m^{(w_l)}(n-d)|`
/// for one period `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Contribution {
    pub j: usize,
    pub d: i64,
    pub kind: EstimateKind,
    pub values: Vec<BigRational>,
}

impl EstimateKind {
    /// Which estimate covers period `j`.
    pub fn for_period(params: &AlphabetParams, m: usize, range: &PeriodRange, j: usize) -> EstimateKind {
        if j <= range.p1 {
            EstimateKind::Exact
        } else if params.chi(j) <= m {
            EstimateKind::WeakSmall
        } else {
            EstimateKind::WeakLarge
        }
    }

    /// Smallest `n` at which this estimate for period `j` is established.
    pub fn valid_from(&self, params: &AlphabetParams, m: usize, j: usize) -> usize {
        let g = PeriodGeometry::new(params, m, j);
        match self {
            // n + 1 >= t.
            EstimateKind::Exact => g.t - 1,
            EstimateKind::WeakSmall => j + m,
            EstimateKind::WeakLarge => (j + m).max(g.n_dblprime_offset),
        }
    }
}

impl Contribution {
    pub fn valid_from(&self, params: &AlphabetParams, m: usize) -> usize {
        self.kind.valid_from(params, m, self.j)
    }
}

/// `η'` contributions: `η'_l(d_exact(j)) = Σ_i x̂_i ζ^{(l)}_{j,t}(w_i)`.
pub fn eta_prime(
    params: &AlphabetParams,
    m: usize,
    zeta: &[ZetaRow],
    x_hat: &[BigRational],
) -> Vec<Contribution> {
    let mut by_j: BTreeMap<usize, Vec<BigRational>> = BTreeMap::new();
    for row in zeta {
        let acc = by_j
            .entry(row.j)
            .or_insert_with(|| vec![BigRational::zero(); x_hat.len()]);
        let xi = &x_hat[row.w_class as usize];
        for (l, &c) in row.counts.iter().enumerate() {
            if c != 0 {
                acc[l] += xi * BigRational::from_integer(BigInt::from(c));
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    by_j.into_iter()
        .map(|(j, values)| {
            let d = PeriodGeometry::new(params, m, j).d_exact;
            assert!(seen.insert(d), "two periods share the exact shift {d}");
            Contribution {
                j,
                d,
                kind: EstimateKind::Exact,
                values,
            }
        })
        .collect()
}

/// Trimmed classes sharing the last `chi` letters with class `l`.
pub fn suffix_mates(q: &QuotientIndex, l: usize, chi: usize) -> Vec<usize> {
    let m = q.m;
    let tail = &q.reps[l].letters()[m - chi..];
    (0..q.s())
        .filter(|&i| &q.reps[i].letters()[m - chi..] == tail)
        .collect()
}

fn weight_of<M: Magnitude>(x: &BigRational, v: M) -> BigRational {
    x * v.to_rational()
}

/// Weak-path contributions for every `j ∈ (p1, p2]`.
///
/// Base classes are processed one at a time; each keeps a backward stream
/// for the small case (power `j`), a backward stream at power `χ(j) - m` and
/// a forward stream at power `j + m - χ(j)` for the large case. All three
/// powers are nondecreasing in `j`.
pub fn xi_weak<M: Magnitude>(
    lift: &VoltageLift<'_>,
    range: &PeriodRange,
    x_hat: &[BigRational],
) -> Result<Vec<Contribution>> {
    let q = lift.quotient;
    let params = q.params;
    let m = q.m;
    let s = q.s();
    let perms = lift.perms();
    let id_rank = Perm::identity(params.k()).rank();
    let periods: Vec<PeriodGeometry> = (range.p1 + 1..=range.p2)
        .map(|j| PeriodGeometry::new(&params, m, j))
        .collect();
    let mut xi: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); s]; periods.len()];
    let mates: Vec<Vec<Vec<usize>>> = periods
        .iter()
        .map(|g| {
            if g.weak_is_small(m) {
                (0..s).map(|l| suffix_mates(q, l, g.chi)).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    for i in 0..s {
        let mut bwd_small = lift.stream::<M>(i, Direction::Backward);
        let mut bwd_large = lift.stream::<M>(i, Direction::Backward);
        let mut fwd_large = lift.stream::<M>(i, Direction::Forward);
        for (jdx, g) in periods.iter().enumerate() {
            if g.weak_is_small(m) {
                // ξ_l(j) += x̂_i δ̂^{(j)}_{l,i} for every l with w_i ∈ W_j(w_l).
                bwd_small.advance_to(g.j)?;
                for l in 0..s {
                    if mates[jdx][l].binary_search(&i).is_ok() {
                        let v = bwd_small.get(l, id_rank);
                        if !v.is_zero() {
                            xi[jdx][l] += weight_of(&x_hat[i], v);
                        }
                    }
                }
            } else {
                bwd_large.advance_to(g.chi - m)?;
                fwd_large.advance_to(g.j + m - g.chi)?;
                let inner: Vec<M> = (0..s)
                    .into_par_iter()
                    .map(|l| {
                        let a = bwd_large.class_cells(l);
                        let b = fwd_large.class_cells(l);
                        let mut acc = M::default();
                        for p in 0..perms {
                            if !a[p].is_zero() && !b[p].is_zero() {
                                acc = acc.accumulate(a[p].product(b[p]));
                            }
                        }
                        acc
                    })
                    .collect();
                for (l, v) in inner.into_iter().enumerate() {
                    if v.overflowed() {
                        return Err(Error::GuardExceeded {
                            what: format!("path-count product overflow at j = {}; use rounded mode", g.j),
                            cap: u64::MAX,
                        });
                    }
                    if !v.is_zero() {
                        xi[jdx][l] += weight_of(&x_hat[i], v);
                    }
                }
            }
        }
    }
    Ok(periods
        .iter()
        .zip(xi)
        .map(|(g, values)| Contribution {
            j: g.j,
            d: g.d_weak,
            kind: if g.weak_is_small(m) {
                EstimateKind::WeakSmall
            } else {
                EstimateKind::WeakLarge
            },
            values,
        })
        .collect())
}

/// Weak contributions in the configured magnitude mode.
pub fn xi_weak_mode(
    lift: &VoltageLift<'_>,
    range: &PeriodRange,
    x_hat: &[BigRational],
    mode: DeltaMode,
) -> Result<Vec<Contribution>> {
    match mode {
        DeltaMode::Exact => xi_weak::<u128>(lift, range, x_hat),
        DeltaMode::Rounded => xi_weak::<UpF64>(lift, range, x_hat),
    }
}

/// The shift table `ω_l(d) = η'_l(d) + ξ'_l(d)` over `d ∈ [a, b]`, together
/// with the per-period contributions it was summed from.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaTable {
    pub a: i64,
    pub b: i64,
    pub omega: Vec<Vec<BigRational>>,
    pub contributions: Vec<Contribution>,
    /// Digest of the weight vector the contributions were computed with.
    pub weights: Option<String>,
}

/// SHA-256 of the lines `i num/den`, one per entry of `x̂`.
pub fn weight_digest(x_hat: &[BigRational]) -> String {
    let mut text = String::new();
    for (i, x) in x_hat.iter().enumerate() {
        writeln!(text, "{} {}/{}", i, x.numer(), x.denom()).unwrap();
    }
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl OmegaTable {
    pub fn at(&self, d: i64) -> &[BigRational] {
        &self.omega[(d - self.a) as usize]
    }

    /// One line `j kind d l num/den` per nonzero entry, sorted by `j`, then `l`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "OMEGA {} {}", self.a, self.b).unwrap();
        if let Some(w) = &self.weights {
            writeln!(out, "WEIGHTS {w}").unwrap();
        }
        for c in &self.contributions {
            for (l, v) in c.values.iter().enumerate() {
                if !v.is_zero() {
                    writeln!(out, "{} {} {} {} {}/{}", c.j, c.kind.tag(), c.d, l, v.numer(), v.denom()).unwrap();
                }
            }
        }
        out
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.dump().as_bytes()))
    }
}

/// `[a, b]`: the shifts the ω table spans.
pub fn shift_bounds(params: &AlphabetParams, m: usize, range: &PeriodRange) -> (i64, i64) {
    let d2 = PeriodGeometry::new(params, m, range.p1 + 1).d_weak;
    let d3 = PeriodGeometry::new(params, m, range.p2).d_weak;
    if range.p1 >= range.p0 {
        (
            d2.min(PeriodGeometry::new(params, m, range.p0).d_exact),
            d3.max(PeriodGeometry::new(params, m, range.p1).d_exact),
        )
    } else {
        (d2, d3)
    }
}

/// Sums contributions per shift. Collisions of weak shifts add up.
pub fn assemble_omega(
    params: &AlphabetParams,
    m: usize,
    range: &PeriodRange,
    s: usize,
    mut contributions: Vec<Contribution>,
) -> Result<OmegaTable> {
    let (a, b) = shift_bounds(params, m, range);
    if a > b {
        return Err(Error::Config(format!("empty shift range [{a}, {b}]")));
    }
    if a < 0 {
        return Err(Error::Config(format!("negative shift a = {a}")));
    }
    contributions.sort_by_key(|c| (c.j, c.kind));
    let mut omega = vec![vec![BigRational::zero(); s]; (b - a + 1) as usize];
    for c in &contributions {
        if c.d < a || c.d > b {
            return Err(Error::Internal(format!(
                "period {} maps to shift {} outside [{a}, {b}]",
                c.j, c.d
            )));
        }
        if c.values.iter().any(|v| v.is_negative()) {
            return Err(Error::Internal(format!("negative correction at j = {}", c.j)));
        }
        for (acc, v) in omega[(c.d - a) as usize].iter_mut().zip(&c.values) {
            *acc += v;
        }
    }
    Ok(OmegaTable {
        a,
        b,
        omega,
        contributions,
        weights: None,
    })
}

/// Contents of an ω dump.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaDump {
    pub a: i64,
    pub b: i64,
    pub weights: Option<String>,
    pub contributions: Vec<Contribution>,
}

/// Parses an [`OmegaTable::dump`] back into contributions. `s` is the number
/// of classes.
pub fn parse_omega_dump(text: &str, s: usize) -> Result<OmegaDump> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty omega dump".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 3 || h[0] != "OMEGA" {
        return Err(Error::Parse(format!("bad omega header {header:?}")));
    }
    let a: i64 = h[1].parse().map_err(|_| Error::Parse("bad a".into()))?;
    let b: i64 = h[2].parse().map_err(|_| Error::Parse("bad b".into()))?;
    let mut map: BTreeMap<(usize, EstimateKind), Contribution> = BTreeMap::new();
    let mut weights = None;
    for line in lines {
        if let Some(w) = line.strip_prefix("WEIGHTS ") {
            weights = Some(w.trim().to_string());
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(Error::Parse(format!("bad omega line {line:?}")));
        }
        let j: usize = f[0].parse().map_err(|_| Error::Parse(format!("bad j in {line:?}")))?;
        let kind = EstimateKind::from_tag(f[1])?;
        let d: i64 = f[2].parse().map_err(|_| Error::Parse(format!("bad d in {line:?}")))?;
        let l: usize = f[3].parse().map_err(|_| Error::Parse(format!("bad l in {line:?}")))?;
        let v: BigRational = f[4].parse().map_err(|_| Error::Parse(format!("bad value in {line:?}")))?;
        if l >= s {
            return Err(Error::Parse(format!("class {l} out of range")));
        }
        let c = map.entry((j, kind)).or_insert_with(|| Contribution {
            j,
            d,
            kind,
            values: vec![BigRational::zero(); s],
        });
        if c.d != d {
            return Err(Error::Parse(format!("period {j} listed with two shifts")));
        }
        c.values[l] = v;
    }
    Ok(OmegaDump {
        a,
        b,
        weights,
        contributions: map.into_values().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language_graph::build_pipeline_quotient;
    use num_traits::One;

    fn quotient(k: usize, m: usize) -> QuotientIndex {
        let p = AlphabetParams::new(k).unwrap();
        build_pipeline_quotient(&p, m, &ResourceGuard::unlimited()).unwrap().2
    }

    #[test]
    fn p0_examples() {
        let p5 = AlphabetParams::new(5).unwrap();
        let p8 = AlphabetParams::new(8).unwrap();
        assert_eq!(p0(&p5, 50).unwrap(), 41);
        assert_eq!(p0(&p8, 18).unwrap(), 17);
        for k in 5..=10 {
            let p = AlphabetParams::new(k).unwrap();
            for m in k + 1..60 {
                assert!(p0(&p, m).unwrap() <= m + 1);
            }
        }
    }

    #[test]
    fn geometry_identities() {
        for k in 5..=10 {
            let p = AlphabetParams::new(k).unwrap();
            let mut last = None;
            for j in 1..=10_000 {
                let g = PeriodGeometry::new(&p, 20, j);
                assert_eq!(g.t, k * j / (k - 1) + 2);
                assert_eq!(g.h_len, g.t - 1);
                assert_eq!(g.chi, j / (k - 1) + 1);
                if let Some(prev) = last {
                    assert!(g.d_exact > prev);
                }
                last = Some(g.d_exact);
            }
        }
        let p5 = AlphabetParams::new(5).unwrap();
        assert_eq!(PeriodGeometry::new(&p5, 50, 41).d_exact, 2);
    }

    #[test]
    fn range_validation() {
        let p8 = AlphabetParams::new(8).unwrap();
        assert!(PeriodRange::new(&p8, 18, 41, 60).is_ok());
        assert!(matches!(PeriodRange::new(&p8, 18, 30, 60), Err(Error::Config(_))));
        assert!(matches!(PeriodRange::new(&p8, 18, 41, 41), Err(Error::Config(_))));
        let p5 = AlphabetParams::new(5).unwrap();
        assert!(PeriodRange::new(&p5, 6, 11, 12).is_ok());
        assert!(PeriodRange::new(&p5, 6, 5, 12).is_err());
    }

    #[test]
    fn zeta_sums_to_x_size() {
        let q = quotient(5, 6);
        for j in 6..=14 {
            for w in 0..q.s() as u32 {
                let row = enumerate_x_and_zeta(&q, j, w, &ResourceGuard::unlimited()).unwrap();
                assert_eq!(row.counts.iter().sum::<u64>(), row.total);
            }
        }
    }

    #[test]
    fn assemble_handles_degenerate_exact_range() {
        let p5 = AlphabetParams::new(5).unwrap();
        // p0 = 17 at m = 20 and chi(17) = 5 >= k - 1.
        let range = PeriodRange::new(&p5, 20, 16, 20).unwrap();
        let c = vec![Contribution {
            j: 17,
            d: 16,
            kind: EstimateKind::WeakSmall,
            values: vec![BigRational::from_integer(2.into()); 3],
        }];
        let t = assemble_omega(&p5, 20, &range, 3, c).unwrap();
        assert_eq!((t.a, t.b), (16, 19));
        assert!(t.omega.iter().flatten().all(|v| !v.is_negative()));
        let mut t = t;
        t.weights = Some(weight_digest(&vec![BigRational::one(); 3]));
        let back = parse_omega_dump(&t.dump(), 3).unwrap();
        assert_eq!((back.a, back.b), (16, 19));
        assert_eq!(back.contributions, t.contributions);
        assert_eq!(back.weights, t.weights);
    }
}
