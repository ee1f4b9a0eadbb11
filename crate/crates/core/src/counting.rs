//! Exact enumeration of Dejean words, class-resolved counts of `F_m`, and the
//! brute-force oracles used to check the estimates.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::guard::ResourceGuard;
use crate::language_graph::QuotientIndex;
use crate::perm::{Perm, MAX_K};
use crate::words::{is_dejean, minimal_period, suffix_ok, AlphabetParams};

fn add_into(acc: &mut [u128], other: &[u128]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b;
    }
}

/// `S^(k)(1..=n_max)`: canonical words (letters introduced in order
/// `0, 1, 2, ..`) weighted by the size of their relabeling orbit.
pub fn count_dejean_exact(params: &AlphabetParams, n_max: usize, guard: &ResourceGuard) -> Result<Vec<u128>> {
    if n_max == 0 {
        return Ok(Vec::new());
    }
    let k = params.k();
    // orbit[d] = k!/(k-d)!, the number of relabelings of a word with d letters.
    let mut orbit = [1u128; MAX_K + 1];
    for d in 1..=k {
        orbit[d] = orbit[d - 1] * (k - d + 1) as u128;
    }
    // Split the search at a shallow depth so workers get disjoint subtrees.
    let split = n_max.min(6);
    let mut seeds = Vec::new();
    let mut head = vec![0u128; n_max + 1];
    let mut word = Vec::with_capacity(n_max);
    collect_canonical(params, &mut word, 0, split, &orbit, &mut head, &mut seeds);
    let visited = std::sync::atomic::AtomicU64::new(0);
    let tails: Result<Vec<Vec<u128>>> = seeds
        .par_iter()
        .map(|(seed, used)| {
            let mut acc = vec![0u128; n_max + 1];
            let mut w = seed.clone();
            let mut local = 0u64;
            canonical_dfs(params, &mut w, *used, n_max, &orbit, &mut acc, &mut local, guard, &visited)?;
            Ok(acc)
        })
        .collect();
    for t in tails? {
        add_into(&mut head, &t);
    }
    Ok(head[1..].to_vec())
}

fn collect_canonical(
    params: &AlphabetParams,
    w: &mut Vec<u8>,
    used: usize,
    split: usize,
    orbit: &[u128],
    counts: &mut [u128],
    seeds: &mut Vec<(Vec<u8>, usize)>,
) {
    if w.len() == split {
        seeds.push((w.clone(), used));
        return;
    }
    let top = (used + 1).min(params.k());
    for c in 0..top as u8 {
        w.push(c);
        if suffix_ok(w, params) {
            let u = used.max(c as usize + 1);
            counts[w.len()] += orbit[u];
            collect_canonical(params, w, u, split, orbit, counts, seeds);
        }
        w.pop();
    }
}

#[allow(clippy::too_many_arguments)]
fn canonical_dfs(
    params: &AlphabetParams,
    w: &mut Vec<u8>,
    used: usize,
    n_max: usize,
    orbit: &[u128],
    acc: &mut [u128],
    local: &mut u64,
    guard: &ResourceGuard,
    visited: &std::sync::atomic::AtomicU64,
) -> Result<()> {
    if w.len() == n_max {
        return Ok(());
    }
    *local += 1;
    if *local & 0xfff == 0 {
        let total = visited.fetch_add(0x1000, std::sync::atomic::Ordering::Relaxed) + 0x1000;
        guard.check_count("Dejean word enumeration", total)?;
        guard.check_time("Dejean word enumeration")?;
    }
    let top = (used + 1).min(params.k());
    for c in 0..top as u8 {
        w.push(c);
        if suffix_ok(w, params) {
            let u = used.max(c as usize + 1);
            acc[w.len()] += orbit[u];
            canonical_dfs(params, w, u, n_max, orbit, acc, local, guard, visited)?;
        }
        w.pop();
    }
    Ok(())
}

/// `S^(k)(1..=n_max)` by a plain search over all words, testing every word
/// with the full-window predicate. Pruning at rejected prefixes is sound
/// because the language is factorial.
pub fn count_dejean_naive(params: &AlphabetParams, n_max: usize, guard: &ResourceGuard) -> Result<Vec<u128>> {
    let mut counts = vec![0u128; n_max + 1];
    let mut w = Vec::new();
    let mut nodes = 0u64;
    fn go(
        params: &AlphabetParams,
        w: &mut Vec<u8>,
        n_max: usize,
        counts: &mut [u128],
        nodes: &mut u64,
        guard: &ResourceGuard,
    ) -> Result<()> {
        if w.len() == n_max {
            return Ok(());
        }
        *nodes += 1;
        if *nodes & 0xffff == 0 {
            guard.check_count("naive Dejean enumeration", *nodes)?;
        }
        for c in 0..params.k() as u8 {
            w.push(c);
            if is_dejean(w, params) {
                counts[w.len()] += 1;
                go(params, w, n_max, counts, nodes, guard)?;
            }
            w.pop();
        }
        Ok(())
    }
    go(params, &mut w, n_max, &mut counts, &mut nodes, guard)?;
    Ok(counts[1..].to_vec())
}

/// `|F_m^{(w_i)}(n)|` for every class `i`, at one length `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassCounts {
    pub n: usize,
    pub counts: Vec<u128>,
}

impl ClassCounts {
    /// `S_m(n) = Σ_i x̂_i |F_m^{(w_i)}(n)|`.
    pub fn weighted(&self, x_hat: &[BigRational]) -> BigRational {
        self.counts
            .iter()
            .zip(x_hat)
            .fold(BigRational::zero(), |acc, (&c, x)| acc + x * BigRational::from_integer(BigInt::from(c)))
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }
}

/// Class-resolved counts of `F_m` for `n = m..=n_max`.
///
/// Words are grown from each representative along voltage edges, so their
/// first window is trimmed; `counts_e(n)` counts those whose last window lies
/// in class `e`. Relabeling moves this set bijectively onto the words of
/// `F_m(n)` with suffix exactly `w_e`, so `counts_e(n) = |F_m^{(w_e)}(n)|`.
/// In particular every class has count 1 at `n = m`.
pub fn count_fm_by_class(q: &QuotientIndex, n_max: usize, guard: &ResourceGuard) -> Result<Vec<ClassCounts>> {
    let m = q.m;
    if n_max < m {
        return Err(Error::Domain(format!("n_max = {n_max} is below m = {m}")));
    }
    let s = q.s();
    let k = q.params.k();
    let last_letter: Vec<u8> = q.reps.iter().map(|r| r.letters()[m - 1]).collect();
    // Seeds: all extensions of depth up to a few letters, one task per seed.
    let depth = (n_max - m).min(4);
    let mut seeds: Vec<(Vec<u8>, u32, Perm)> = Vec::new();
    let mut head = vec![vec![0u128; s]; n_max - m + 1];
    for c in 0..s {
        let mut w = q.reps[c].letters().to_vec();
        head[0][c] += 1;
        seed_walk(q, &last_letter, &mut w, c as u32, Perm::identity(k), m + depth, m, &mut head, &mut seeds);
    }
    let visited = std::sync::atomic::AtomicU64::new(0);
    let parts: Result<Vec<Vec<Vec<u128>>>> = seeds
        .par_iter()
        .map(|(w0, c, sigma)| {
            let mut acc = vec![vec![0u128; s]; n_max - m + 1];
            let mut w = w0.clone();
            w.reserve(n_max - w.len());
            let mut local = 0u64;
            fm_dfs(q, &last_letter, &mut w, *c, *sigma, n_max, &mut acc, &mut local, guard, &visited)?;
            Ok(acc)
        })
        .collect();
    for part in parts? {
        for (h, p) in head.iter_mut().zip(&part) {
            add_into(h, p);
        }
    }
    Ok(head
        .into_iter()
        .enumerate()
        .map(|(i, counts)| ClassCounts { n: m + i, counts })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn seed_walk(
    q: &QuotientIndex,
    last_letter: &[u8],
    w: &mut Vec<u8>,
    c: u32,
    sigma: Perm,
    stop: usize,
    m: usize,
    head: &mut [Vec<u128>],
    seeds: &mut Vec<(Vec<u8>, u32, Perm)>,
) {
    if w.len() == stop {
        seeds.push((w.clone(), c, sigma));
        return;
    }
    for e in &q.out[c as usize] {
        let next = sigma.compose(&e.voltage);
        w.push(next.apply(last_letter[e.to as usize]));
        if suffix_ok(w, &q.params) {
            head[w.len() - m][e.to as usize] += 1;
            seed_walk(q, last_letter, w, e.to, next, stop, m, head, seeds);
        }
        w.pop();
    }
}

#[allow(clippy::too_many_arguments)]
fn fm_dfs(
    q: &QuotientIndex,
    last_letter: &[u8],
    w: &mut Vec<u8>,
    c: u32,
    sigma: Perm,
    n_max: usize,
    acc: &mut [Vec<u128>],
    local: &mut u64,
    guard: &ResourceGuard,
    visited: &std::sync::atomic::AtomicU64,
) -> Result<()> {
    if w.len() == n_max {
        return Ok(());
    }
    *local += 1;
    if *local & 0xfff == 0 {
        let total = visited.fetch_add(0x1000, std::sync::atomic::Ordering::Relaxed) + 0x1000;
        guard.check_count("F_m enumeration", total)?;
        guard.check_time("F_m enumeration")?;
    }
    let m = q.m;
    for e in &q.out[c as usize] {
        let next = sigma.compose(&e.voltage);
        w.push(next.apply(last_letter[e.to as usize]));
        if suffix_ok(w, &q.params) {
            acc[w.len() - m][e.to as usize] += 1;
            fm_dfs(q, last_letter, w, e.to, next, n_max, acc, local, guard, visited)?;
        }
        w.pop();
    }
    Ok(())
}

/// One line `n i count` per nonzero count.
pub fn dump_counts(counts: &[ClassCounts]) -> String {
    let mut out = String::new();
    for cc in counts {
        for (i, &c) in cc.counts.iter().enumerate() {
            if c != 0 {
                writeln!(out, "{} {} {}", cc.n, i, c).unwrap();
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Brute-force oracles. They use only window membership, minimal periods and
// direct comparisons, never the voltage graph.

/// Length of the shortest prohibited suffix of `w`, if any.
pub fn shortest_prohibited_suffix(w: &[u8], params: &AlphabetParams) -> Option<(usize, usize)> {
    let (num, den) = params.threshold();
    let n = w.len();
    for len in 2..=n {
        let p = minimal_period(&w[n - len..]).expect("nonempty");
        if len * den > p * num {
            return Some((len, p));
        }
    }
    None
}

/// All words of `F_m(n)` (every relabeling), by brute force.
pub fn naive_fm_words(q: &QuotientIndex, n: usize, guard: &ResourceGuard) -> Result<Vec<Vec<u8>>> {
    let mut out = Vec::new();
    let mut w = Vec::new();
    let mut nodes = 0u64;
    naive_fm_go(q, &mut w, n, &mut out, &mut nodes, guard)?;
    Ok(out)
}

fn naive_fm_go(
    q: &QuotientIndex,
    w: &mut Vec<u8>,
    n: usize,
    out: &mut Vec<Vec<u8>>,
    nodes: &mut u64,
    guard: &ResourceGuard,
) -> Result<()> {
    if w.len() == n {
        if n >= q.m {
            out.push(w.clone());
        }
        return Ok(());
    }
    *nodes += 1;
    guard.check_count("naive F_m enumeration", *nodes)?;
    for c in 0..q.params.k() as u8 {
        w.push(c);
        let ok = shortest_prohibited_suffix(w, &q.params).is_none()
            && (w.len() < q.m || q.class_of(&w[w.len() - q.m..]).is_some());
        if ok {
            naive_fm_go(q, w, n, out, nodes, guard)?;
        }
        w.pop();
    }
    Ok(())
}

/// `|F_m^{(w_i)}(n)|` per class by brute force.
pub fn naive_fm_by_class(q: &QuotientIndex, n: usize, guard: &ResourceGuard) -> Result<Vec<u128>> {
    let mut counts = vec![0u128; q.s()];
    for w in naive_fm_words(q, n, guard)? {
        if let Some(i) = q.class_of_trimmed(&w[n - q.m..]) {
            counts[i as usize] += 1;
        }
    }
    Ok(counts)
}

/// Exact `|G^{(w_i)}(n+1)|` and `|H_j^{(w_i)}(n+1)|` for every class and
/// period, from the definitions.
#[derive(Clone, Debug, Default)]
pub struct HOracle {
    pub n: usize,
    pub g: Vec<u64>,
    /// `by_period[j][i] = |H_j^{(w_i)}(n+1)|`.
    pub by_period: BTreeMap<usize, Vec<u64>>,
}

impl HOracle {
    pub fn h_total(&self, i: usize) -> u64 {
        self.by_period.values().map(|v| v[i]).sum()
    }

    pub fn hj(&self, j: usize) -> Vec<u64> {
        self.by_period.get(&j).cloned().unwrap_or_else(|| vec![0; self.g.len()])
    }
}

pub fn oracle_h(q: &QuotientIndex, n: usize, guard: &ResourceGuard) -> Result<HOracle> {
    let m = q.m;
    let s = q.s();
    let mut g = vec![0u64; s];
    let mut by_period: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for u in naive_fm_words(q, n, guard)? {
        let mut v = u;
        for c in 0..q.params.k() as u8 {
            v.push(c);
            let l = v.len();
            let in_g = is_dejean(&v[l - m - 1..], &q.params) && q.class_of(&v[l - m..]).is_some();
            if in_g {
                if let Some(i) = q.class_of_trimmed(&v[l - m..]) {
                    g[i as usize] += 1;
                    if let Some((_, period)) = shortest_prohibited_suffix(&v, &q.params) {
                        by_period.entry(period).or_insert_with(|| vec![0; s])[i as usize] += 1;
                    }
                }
            }
            v.pop();
        }
    }
    Ok(HOracle { n, g, by_period })
}

/// `|H_j^{(w_i)}(n+1)|` for every class.
pub fn oracle_hj(q: &QuotientIndex, j: usize, n: usize, guard: &ResourceGuard) -> Result<Vec<u64>> {
    Ok(oracle_h(q, n, guard)?.hj(j))
}

/// Words of the given length with prefix `u` and suffix `w` whose length-m
/// factors all lie in `F̂(m)` and whose length-(m+1) factors are Dejean.
pub fn oracle_lm_paths(q: &QuotientIndex, u: &[u8], w: &[u8], length: usize) -> Result<u128> {
    oracle_lm_count(q, u, w, length, true)
}

/// As [`oracle_lm_paths`] but with the window condition alone.
pub fn oracle_lm_windows(q: &QuotientIndex, u: &[u8], w: &[u8], length: usize) -> Result<u128> {
    oracle_lm_count(q, u, w, length, false)
}

fn oracle_lm_count(q: &QuotientIndex, u: &[u8], w: &[u8], length: usize, joins: bool) -> Result<u128> {
    let m = q.m;
    if u.len() != m || w.len() != m || length < m {
        return Err(Error::Domain("prefix and suffix must have length m".into()));
    }
    if q.class_of(u).is_none() {
        return Ok(0);
    }
    let mut word = u.to_vec();
    fn go(q: &QuotientIndex, word: &mut Vec<u8>, w: &[u8], length: usize, joins: bool) -> u128 {
        let m = q.m;
        if word.len() == length {
            return (&word[length - m..] == w) as u128;
        }
        let mut total = 0;
        for c in 0..q.params.k() as u8 {
            word.push(c);
            let l = word.len();
            if q.class_of(&word[l - m..]).is_some() && (!joins || is_dejean(&word[l - m - 1..], &q.params)) {
                total += go(q, word, w, length, joins);
            }
            word.pop();
        }
        total
    }
    Ok(go(q, &mut word, w, length, joins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language_graph::build_pipeline_quotient;

    fn quotient(k: usize, m: usize) -> QuotientIndex {
        let p = AlphabetParams::new(k).unwrap();
        build_pipeline_quotient(&p, m, &ResourceGuard::unlimited()).unwrap().2
    }

    #[test]
    fn k5_prefix_of_sequence() {
        let p = AlphabetParams::new(5).unwrap();
        let s = count_dejean_exact(&p, 5, &ResourceGuard::unlimited()).unwrap();
        assert_eq!(s, vec![5, 20, 60, 120, 240]);
        let p6 = AlphabetParams::new(6).unwrap();
        let s6 = count_dejean_exact(&p6, 2, &ResourceGuard::unlimited()).unwrap();
        assert_eq!(s6, vec![6, 30]);
    }

    #[test]
    fn accelerated_matches_naive_small() {
        for k in 5..=7 {
            let p = AlphabetParams::new(k).unwrap();
            let g = ResourceGuard::unlimited();
            assert_eq!(count_dejean_exact(&p, 9, &g).unwrap(), count_dejean_naive(&p, 9, &g).unwrap());
        }
    }

    #[test]
    fn factorial_growth_bound() {
        let p = AlphabetParams::new(5).unwrap();
        let s = count_dejean_exact(&p, 30, &ResourceGuard::unlimited()).unwrap();
        for w in s.windows(2) {
            assert!(w[1] <= 5 * w[0]);
        }
    }

    #[test]
    fn guard_refuses_large_counts() {
        let p = AlphabetParams::new(5).unwrap();
        let err = count_dejean_exact(&p, 60, &ResourceGuard::with_count(1000)).unwrap_err();
        assert!(matches!(err, Error::GuardExceeded { .. }));
    }

    #[test]
    fn class_counts_at_m_and_branching() {
        let q = quotient(5, 8);
        let counts = count_fm_by_class(&q, 24, &ResourceGuard::unlimited()).unwrap();
        assert!(counts[0].counts.iter().all(|&c| c == 1));
        assert_eq!(counts[0].total() * 120, q.s_hat() as u128);
        for w in counts.windows(2) {
            assert!(w[1].total() <= 4 * w[0].total());
        }
    }

    #[test]
    fn class_counts_match_brute_force() {
        let q = quotient(5, 6);
        let g = ResourceGuard::unlimited();
        let counts = count_fm_by_class(&q, 14, &g).unwrap();
        for cc in &counts {
            assert_eq!(cc.counts, naive_fm_by_class(&q, cc.n, &g).unwrap(), "n = {}", cc.n);
        }
    }

    #[test]
    fn counted_words_are_dejean() {
        let q = quotient(6, 10);
        let g = ResourceGuard::unlimited();
        for w in naive_fm_words(&q, 16, &g).unwrap() {
            assert!(is_dejean(&w, &q.params));
        }
    }

    #[test]
    fn lm_paths_trivial_lengths() {
        let q = quotient(5, 6);
        for u in 0..q.s() {
            for w in 0..q.s() {
                let (ru, rw) = (q.reps[u].letters(), q.reps[w].letters());
                assert_eq!(oracle_lm_paths(&q, ru, rw, 6).unwrap(), (u == w) as u128);
                let adj = q.out[u].iter().any(|e| e.to as usize == w && e.voltage.is_identity());
                assert_eq!(oracle_lm_paths(&q, ru, rw, 7).unwrap(), adj as u128);
            }
        }
    }

    #[test]
    fn h_oracle_partitions() {
        let q = quotient(5, 6);
        let p0 = 6;
        let h = oracle_h(&q, 12, &ResourceGuard::unlimited()).unwrap();
        assert!(h.by_period.keys().all(|&j| j >= p0));
        let fm = count_fm_by_class(&q, 13, &ResourceGuard::unlimited()).unwrap();
        for i in 0..q.s() {
            // |F_m^{(w)}(n+1)| = |G^{(w)}(n+1)| - |H^{(w)}(n+1)|.
            assert_eq!(h.g[i] - h.h_total(i), fm[13 - 6].counts[i] as u64);
        }
    }
}
