//! The length-m layer of the Dejean language as a de Bruijn-style graph.
//!
//! Two vertex sets are supported. A *full* level holds every Dejean word of
//! length `m`; edges carry the identity voltage. A *trimmed* level holds one
//! trimmed representative per isomorphism class; an edge `c -> d` carries the
//! permutation `τ` with `descendant(rep_c) = τ(rep_d)`. Closedness is invariant
//! under relabeling, so pruning either graph yields the same classes; the full
//! form only exists for cross-checking small instances.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::guard::ResourceGuard;
use crate::perm::{factorial, Perm};
use crate::words::{suffix_ok, trim_canonicalize, AlphabetParams, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelKind {
    Full,
    Trimmed,
}

/// Dejean words of one length, sorted lexicographically.
#[derive(Clone, Debug)]
pub struct LevelSet {
    pub params: AlphabetParams,
    pub m: usize,
    pub kind: LevelKind,
    pub words: Vec<Word>,
}

impl LevelSet {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    fn index_of(&self, w: &[u8]) -> Option<u32> {
        self.words
            .binary_search_by(|probe| probe.letters().cmp(w))
            .ok()
            .map(|i| i as u32)
    }
}

/// Depth-first extension of `prefix` to length `m`, collecting leaves.
fn extend_all(
    params: &AlphabetParams,
    prefix: &mut Vec<u8>,
    m: usize,
    out: &mut Vec<Vec<u8>>,
    cap: u64,
) -> bool {
    if prefix.len() == m {
        out.push(prefix.clone());
        return (out.len() as u64) <= cap;
    }
    for a in 0..params.k() as u8 {
        prefix.push(a);
        if suffix_ok(prefix, params) && !extend_all(params, prefix, m, out, cap) {
            prefix.pop();
            return false;
        }
        prefix.pop();
    }
    true
}

/// Every Dejean word of length `m`.
pub fn enumerate_dejean_length(
    params: &AlphabetParams,
    m: usize,
    guard: &ResourceGuard,
) -> Result<LevelSet> {
    if m == 0 {
        return Err(Error::Domain("level length must be at least 1".into()));
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(m);
    if !extend_all(params, &mut prefix, m, &mut out, guard.max_count) {
        return Err(Error::GuardExceeded {
            what: format!("Dejean words of length {m}"),
            cap: guard.max_count,
        });
    }
    // DFS in letter order already yields lexicographic order.
    Ok(LevelSet {
        params: *params,
        m,
        kind: LevelKind::Full,
        words: out.into_iter().map(Word::from_raw).collect(),
    })
}

/// One trimmed representative for each isomorphism class of Dejean words of
/// length `m`. Requires `m >= k - 1`.
///
/// Rarefied words of length at least `k-1` begin with `k-1` distinct letters,
/// so each class has exactly one member starting `0 1 .. k-2`; those are
/// enumerated (in parallel over the next few letters) and then trimmed.
pub fn enumerate_trimmed_length(
    params: &AlphabetParams,
    m: usize,
    guard: &ResourceGuard,
) -> Result<LevelSet> {
    let k = params.k();
    if m < k - 1 {
        return Err(Error::Domain(format!(
            "trimmed level needs m >= k-1 = {}, got {m}",
            k - 1
        )));
    }
    let start: Vec<u8> = (0..(k - 1) as u8).collect();
    // Seeds: all Dejean extensions of the start by a few letters.
    let seed_len = (start.len() + 6).min(m);
    let mut seeds = Vec::new();
    extend_all(params, &mut start.clone(), seed_len, &mut seeds, u64::MAX);

    let chunks: Vec<Result<Vec<Vec<u8>>>> = seeds
        .into_par_iter()
        .map(|mut seed| {
            let mut out = Vec::new();
            if !extend_all(params, &mut seed, m, &mut out, guard.max_count) {
                return Err(Error::GuardExceeded {
                    what: format!("trimmed Dejean classes of length {m}"),
                    cap: guard.max_count,
                });
            }
            Ok(out)
        })
        .collect();
    let mut words = Vec::new();
    for chunk in chunks {
        for w in chunk? {
            let (t, _) = trim_canonicalize(&w, params)?;
            words.push(t);
        }
        guard.check_count("trimmed Dejean classes", words.len() as u64)?;
    }
    words.sort_unstable();
    let before = words.len();
    words.dedup();
    if words.len() != before {
        return Err(Error::Internal(
            "two start-canonical words trimmed to the same class".into(),
        ));
    }
    Ok(LevelSet {
        params: *params,
        m,
        kind: LevelKind::Trimmed,
        words,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub to: u32,
    pub voltage: Perm,
}

/// Out-edges (descendants) and in-edges (ancestors). For an in-edge the `to`
/// field names the ancestor and `voltage` is the voltage of the forward edge.
#[derive(Clone, Debug)]
pub struct DescendantGraph {
    pub params: AlphabetParams,
    pub m: usize,
    pub kind: LevelKind,
    pub out: Vec<Vec<Edge>>,
    pub inc: Vec<Vec<Edge>>,
}

impl DescendantGraph {
    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }
}

/// Descendant edges of every vertex. The merged `(m+1)`-word is tested
/// directly with the suffix check; `F(m+1)` is never stored.
pub fn build_descendant_graph(level: &LevelSet) -> Result<DescendantGraph> {
    let params = level.params;
    let k = params.k();
    if level.m <= k {
        return Err(Error::Domain(format!(
            "descendant graph needs m > k (m = {}, k = {k})",
            level.m
        )));
    }
    let out: Vec<Result<Vec<Edge>>> = level
        .words
        .par_iter()
        .map(|u| {
            let mut merged = Vec::with_capacity(level.m + 1);
            merged.extend_from_slice(u.letters());
            merged.push(0);
            let mut edges = Vec::new();
            for a in 0..k as u8 {
                *merged.last_mut().unwrap() = a;
                if !suffix_ok(&merged, &params) {
                    continue;
                }
                let desc = &merged[1..];
                let edge = match level.kind {
                    LevelKind::Full => Edge {
                        to: level.index_of(desc).ok_or_else(|| {
                            Error::Internal("descendant missing from level".into())
                        })?,
                        voltage: Perm::identity(k),
                    },
                    LevelKind::Trimmed => {
                        let (t, sigma) = trim_canonicalize(desc, &params)?;
                        Edge {
                            to: level.index_of(t.letters()).ok_or_else(|| {
                                Error::Internal("descendant class missing from level".into())
                            })?,
                            voltage: sigma.inverse(),
                        }
                    }
                };
                edges.push(edge);
            }
            Ok(edges)
        })
        .collect();
    let out = out.into_iter().collect::<Result<Vec<_>>>()?;
    let inc = invert_edges(&out);
    Ok(DescendantGraph {
        params,
        m: level.m,
        kind: level.kind,
        out,
        inc,
    })
}

fn invert_edges(out: &[Vec<Edge>]) -> Vec<Vec<Edge>> {
    let mut inc = vec![Vec::new(); out.len()];
    for (from, edges) in out.iter().enumerate() {
        for e in edges {
            inc[e.to as usize].push(Edge {
                to: from as u32,
                voltage: e.voltage,
            });
        }
    }
    inc
}

/// Vertices from which arbitrarily long paths leave along `adj`: iterated
/// removal of vertices whose every neighbor has been removed.
fn infinite_path_vertices(adj: &[Vec<Edge>], rev: &[Vec<Edge>]) -> Vec<bool> {
    let n = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut alive = vec![true; n];
    let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] == 0).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for e in &rev[v] {
            let u = e.to as usize;
            degree[u] -= 1;
            if degree[u] == 0 && alive[u] {
                stack.push(u);
            }
        }
    }
    alive
}

/// Vertices that are neither right closed nor left closed.
///
/// The two fixpoints are computed independently on the unpruned graph and
/// intersected; closedness is defined against descendants and ancestors in the
/// whole level, not in a partially pruned one.
pub fn prune_closed(graph: &DescendantGraph) -> Result<Vec<u32>> {
    let forward = infinite_path_vertices(&graph.out, &graph.inc);
    let backward = infinite_path_vertices(&graph.inc, &graph.out);
    let survivors: Vec<u32> = (0..graph.vertex_count())
        .filter(|&v| forward[v] && backward[v])
        .map(|v| v as u32)
        .collect();
    if survivors.is_empty() {
        return Err(Error::LanguageDies { m: graph.m });
    }
    Ok(survivors)
}

/// The isomorphism quotient of the pruned level, `F̂'(m)`, with permutation
/// voltages on its edges. The full `Δ̂_m` is the lift of this graph.
#[derive(Clone, Debug)]
pub struct QuotientIndex {
    pub params: AlphabetParams,
    pub m: usize,
    pub reps: Vec<Word>,
    pub out: Vec<Vec<Edge>>,
    pub inc: Vec<Vec<Edge>>,
    index: HashMap<Vec<u8>, u32>,
}

impl QuotientIndex {
    fn from_parts(params: AlphabetParams, m: usize, reps: Vec<Word>, out: Vec<Vec<Edge>>) -> Result<Self> {
        let inc = invert_edges(&out);
        let index = reps
            .iter()
            .enumerate()
            .map(|(i, w)| (w.letters().to_vec(), i as u32))
            .collect();
        let q = QuotientIndex {
            params,
            m,
            reps,
            out,
            inc,
            index,
        };
        q.check_structure()?;
        Ok(q)
    }

    fn check_structure(&self) -> Result<()> {
        for (c, edges) in self.out.iter().enumerate() {
            if edges.is_empty() || self.inc[c].is_empty() {
                return Err(Error::Internal(format!(
                    "class {c} lacks a quasi-descendant or quasi-ancestor"
                )));
            }
            let mut targets: Vec<u32> = edges.iter().map(|e| e.to).collect();
            targets.sort_unstable();
            targets.dedup();
            if targets.len() != edges.len() {
                return Err(Error::Internal(format!(
                    "class {c} has two descendants in one class"
                )));
            }
        }
        Ok(())
    }

    /// Number of classes `s`.
    pub fn s(&self) -> usize {
        self.reps.len()
    }

    /// `ŝ = k!·s`, the size of the pruned level.
    pub fn s_hat(&self) -> u64 {
        factorial(self.params.k()) * self.s() as u64
    }

    pub fn class_of_trimmed(&self, w: &[u8]) -> Option<u32> {
        self.index.get(w).copied()
    }

    /// Class of an arbitrary length-m word together with the relabeling `σ`
    /// such that `σ(w)` is the representative; `None` when `w ∉ F̂(m)`.
    pub fn class_of(&self, w: &[u8]) -> Option<(u32, Perm)> {
        let (t, sigma) = trim_canonicalize(w, &self.params).ok()?;
        self.class_of_trimmed(t.letters()).map(|c| (c, sigma))
    }

    /// The 0/1 matrix `Δ_m` as rows: `delta[i][j] = 1` iff `w_i` is a
    /// quasi-ancestor of `w_j`.
    pub fn delta_m(&self) -> Vec<Vec<u8>> {
        let s = self.s();
        let mut d = vec![vec![0u8; s]; s];
        for (i, edges) in self.out.iter().enumerate() {
            for e in edges {
                d[i][e.to as usize] = 1;
            }
        }
        d
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Writes the plain-text graph cache (`DEJG1` format).
    pub fn write_cache<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "DEJG1 {} {} {} {}",
            self.params.k(),
            self.m,
            self.s(),
            self.s_hat()
        )?;
        for w in &self.reps {
            writeln!(out, "{w}")?;
        }
        for (i, edges) in self.out.iter().enumerate() {
            for e in edges {
                writeln!(out, "{} {} {}", i, e.to, e.voltage)?;
            }
        }
        Ok(())
    }

    pub fn read_cache<R: BufRead>(input: R) -> Result<QuotientIndex> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph cache".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "DEJG1" {
            return Err(Error::Parse(format!("bad graph cache header {header:?}")));
        }
        let num = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::Parse(format!("bad integer {s:?} in graph cache")))
        };
        let params = AlphabetParams::new(num(fields[1])?)?;
        let m = num(fields[2])?;
        let s = num(fields[3])?;
        let s_hat = num(fields[4])? as u64;
        let mut reps = Vec::with_capacity(s);
        for _ in 0..s {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("truncated representative list".into()))??;
            let w = Word::parse(line.trim(), &params)?;
            if w.len() != m {
                return Err(Error::Parse(format!("representative {w} has wrong length")));
            }
            reps.push(w);
        }
        let mut out = vec![Vec::new(); s];
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("bad edge line {line:?}")));
            }
            let (i, j) = (num(f[0])?, num(f[1])?);
            if i >= s || j >= s {
                return Err(Error::Parse(format!("edge {i} {j} out of range")));
            }
            let voltage = Perm::parse(f[2])?;
            if voltage.k() != params.k() {
                return Err(Error::Parse(format!("voltage {} has wrong size", f[2])));
            }
            out[i].push(Edge {
                to: j as u32,
                voltage,
            });
        }
        let q = QuotientIndex::from_parts(params, m, reps, out)?;
        if q.s_hat() != s_hat {
            return Err(Error::Parse("header ŝ disagrees with k!·s".into()));
        }
        Ok(q)
    }
}

/// Quotient of the surviving vertices of `graph` (built on `level`).
pub fn build_quotient(
    level: &LevelSet,
    graph: &DescendantGraph,
    survivors: &[u32],
) -> Result<QuotientIndex> {
    let params = level.params;
    let k = params.k();
    match level.kind {
        LevelKind::Trimmed => {
            let mut renumber = vec![u32::MAX; level.len()];
            for (new, &old) in survivors.iter().enumerate() {
                renumber[old as usize] = new as u32;
            }
            let reps = survivors
                .iter()
                .map(|&v| level.words[v as usize].clone())
                .collect();
            let out = survivors
                .iter()
                .map(|&v| {
                    graph.out[v as usize]
                        .iter()
                        .filter(|e| renumber[e.to as usize] != u32::MAX)
                        .map(|e| Edge {
                            to: renumber[e.to as usize],
                            voltage: e.voltage,
                        })
                        .collect()
                })
                .collect();
            QuotientIndex::from_parts(params, level.m, reps, out)
        }
        LevelKind::Full => {
            let mut alive = vec![false; level.len()];
            for &v in survivors {
                alive[v as usize] = true;
            }
            let mut class_sizes: HashMap<Vec<u8>, u64> = HashMap::new();
            for &v in survivors {
                let w = &level.words[v as usize];
                let (t, _) = trim_canonicalize(w.letters(), &params).map_err(|_| {
                    Error::Internal(format!("surviving word {w} is not rarefied"))
                })?;
                *class_sizes.entry(t.into_letters()).or_default() += 1;
            }
            let mut reps: Vec<Word> = class_sizes.keys().cloned().map(Word::from_raw).collect();
            reps.sort_unstable();
            if class_sizes.values().any(|&c| c != factorial(k)) {
                return Err(Error::Internal(
                    "a surviving class does not have k! members".into(),
                ));
            }
            let index: HashMap<&[u8], u32> = reps
                .iter()
                .enumerate()
                .map(|(i, w)| (w.letters(), i as u32))
                .collect();
            let mut out = Vec::with_capacity(reps.len());
            for rep in &reps {
                let v = level
                    .index_of(rep.letters())
                    .ok_or_else(|| Error::Internal("representative missing from level".into()))?;
                let mut edges = Vec::new();
                for e in &graph.out[v as usize] {
                    if !alive[e.to as usize] {
                        continue;
                    }
                    let desc = level.words[e.to as usize].letters();
                    let (t, sigma) = trim_canonicalize(desc, &params)?;
                    edges.push(Edge {
                        to: index[t.letters()],
                        voltage: sigma.inverse(),
                    });
                }
                out.push(edges);
            }
            QuotientIndex::from_parts(params, level.m, reps, out)
        }
    }
}

/// Enumerate, build, prune and quotient in one call, on the trimmed level.
pub fn build_pipeline_quotient(
    params: &AlphabetParams,
    m: usize,
    guard: &ResourceGuard,
) -> Result<(LevelSet, DescendantGraph, QuotientIndex)> {
    let level = enumerate_trimmed_length(params, m, guard)?;
    let graph = build_descendant_graph(&level)?;
    let survivors = prune_closed(&graph)?;
    let quotient = build_quotient(&level, &graph, &survivors)?;
    Ok((level, graph, quotient))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{is_dejean, is_rarefied};

    fn params(k: usize) -> AlphabetParams {
        AlphabetParams::new(k).unwrap()
    }

    fn brute_level(k: usize, m: usize) -> Vec<Vec<u8>> {
        let p = params(k);
        let mut all = vec![vec![]];
        for _ in 0..m {
            all = all
                .into_iter()
                .flat_map(|v: Vec<u8>| {
                    (0..k as u8).map(move |a| {
                        let mut u = v.clone();
                        u.push(a);
                        u
                    })
                })
                .collect();
        }
        all.into_iter().filter(|v| is_dejean(v, &p)).collect()
    }

    #[test]
    fn level_counts_small() {
        let g = ResourceGuard::unlimited();
        assert_eq!(enumerate_dejean_length(&params(5), 1, &g).unwrap().len(), 5);
        let l5 = enumerate_dejean_length(&params(5), 5, &g).unwrap();
        assert_eq!(l5.len(), brute_level(5, 5).len());
        assert_eq!(l5.len(), 240);
        let words: Vec<Vec<u8>> = l5.words.iter().map(|w| w.letters().to_vec()).collect();
        assert_eq!(words, brute_level(5, 5));
    }

    #[test]
    fn guard_is_an_error() {
        let g = ResourceGuard::with_count(100);
        assert!(matches!(
            enumerate_dejean_length(&params(5), 5, &g),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn trimmed_level_is_full_level_mod_isomorphism() {
        let p = params(5);
        let g = ResourceGuard::unlimited();
        for m in [6, 7, 8] {
            let full = enumerate_dejean_length(&p, m, &g).unwrap();
            let trimmed = enumerate_trimmed_length(&p, m, &g).unwrap();
            assert_eq!(full.len() as u64, trimmed.len() as u64 * 120);
            let mut from_full: Vec<Word> = full
                .words
                .iter()
                .filter(|w| crate::words::is_trimmed(w.letters(), &p))
                .cloned()
                .collect();
            from_full.sort();
            assert_eq!(from_full, trimmed.words);
        }
    }

    #[test]
    fn edges_are_descendant_pairs() {
        let p = params(5);
        let g = ResourceGuard::unlimited();
        let level = enumerate_dejean_length(&p, 6, &g).unwrap();
        let graph = build_descendant_graph(&level).unwrap();
        // |edges| = |F(7)|: each 7-letter Dejean word is one (prefix, suffix) pair.
        assert_eq!(graph.edge_count(), brute_level(5, 7).len());
        for (u, edges) in graph.out.iter().enumerate() {
            assert!(edges.len() <= 4);
            for e in edges {
                let a = level.words[u].letters();
                let b = level.words[e.to as usize].letters();
                assert_eq!(&a[1..], &b[..5]);
            }
        }
    }

    #[test]
    fn pruning_on_hand_graph() {
        // 0 -> 1 -> 2 -> 1 (cycle 1,2), 3 -> 0, 2 -> 4 (sink), 5 isolated.
        let id = Perm::identity(5);
        let e = |to| Edge { to, voltage: id };
        let out = vec![vec![e(1)], vec![e(2)], vec![e(1), e(4)], vec![e(0)], vec![], vec![]];
        let inc = invert_edges(&out);
        let graph = DescendantGraph {
            params: params(5),
            m: 6,
            kind: LevelKind::Full,
            out,
            inc,
        };
        // 0 and 3 have no infinite backward path; 4 has no descendants.
        assert_eq!(prune_closed(&graph).unwrap(), vec![1, 2]);

        let dead = DescendantGraph {
            out: vec![vec![e(1)], vec![]],
            inc: vec![vec![], vec![e(0)]],
            ..graph
        };
        assert!(matches!(prune_closed(&dead), Err(Error::LanguageDies { m: 6 })));
    }

    #[test]
    fn path_between_cycles_survives() {
        // Cycle {0,1} -> 2 -> cycle {3,4}; 5 feeds 2; 2 -> 6 dead end.
        let id = Perm::identity(5);
        let e = |to| Edge { to, voltage: id };
        let out = vec![
            vec![e(1)],
            vec![e(0), e(2)],
            vec![e(3), e(6)],
            vec![e(4)],
            vec![e(3)],
            vec![e(2)],
            vec![],
        ];
        let inc = invert_edges(&out);
        let graph = DescendantGraph {
            params: params(5),
            m: 6,
            kind: LevelKind::Full,
            out,
            inc,
        };
        assert_eq!(prune_closed(&graph).unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn full_and_trimmed_routes_agree() {
        let p = params(5);
        let g = ResourceGuard::unlimited();
        for m in [6, 7, 8, 9] {
            let full = enumerate_dejean_length(&p, m, &g).unwrap();
            let fg = build_descendant_graph(&full).unwrap();
            let fs = prune_closed(&fg).unwrap();
            let fq = build_quotient(&full, &fg, &fs).unwrap();

            let (_, _, tq) = build_pipeline_quotient(&p, m, &g).unwrap();
            assert_eq!(fq.reps, tq.reps, "m = {m}");
            assert_eq!(fq.out, tq.out, "m = {m}");
            assert_eq!(fs.len() as u64, tq.s_hat());
            for w in &tq.reps {
                assert!(is_rarefied(w.letters(), &p));
            }
        }
    }

    #[test]
    fn voltages_reproduce_descendants() {
        let p = params(6);
        let (_, _, q) = build_pipeline_quotient(&p, 8, &ResourceGuard::unlimited()).unwrap();
        for (c, edges) in q.out.iter().enumerate() {
            let rep = q.reps[c].letters();
            for e in edges {
                let image = e.voltage.apply_word(q.reps[e.to as usize].letters());
                assert_eq!(&rep[1..], &image[..7]);
                let mut merged = rep.to_vec();
                merged.push(image[7]);
                assert!(is_dejean(&merged, &p));
            }
        }
        let delta = q.delta_m();
        for i in 0..q.s() {
            assert!(delta[i].iter().any(|&x| x == 1));
            assert!((0..q.s()).any(|r| delta[r][i] == 1));
        }
    }

    #[test]
    fn cache_round_trip() {
        let p = params(5);
        let (_, _, q) = build_pipeline_quotient(&p, 7, &ResourceGuard::unlimited()).unwrap();
        let mut buf = Vec::new();
        q.write_cache(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("DEJG1 5 7 {} {}\n", q.s(), q.s_hat())));
        let back = QuotientIndex::read_cache(&buf[..]).unwrap();
        assert_eq!(back.reps, q.reps);
        assert_eq!(back.out, q.out);
        let mut again = Vec::new();
        back.write_cache(&mut again).unwrap();
        assert_eq!(again, buf);

        assert!(QuotientIndex::read_cache(&b"DEJG2 5 7 1 120\n"[..]).is_err());
    }
}
