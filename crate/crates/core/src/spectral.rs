//! Perron data of the quotient matrix `Δ_m` and path counts on its
//! permutation-voltage lift.
//!
//! The weight vector satisfies `Δ_m x̂ ≥ r̂ x̂` componentwise, i.e.
//! `Σ_j δ_ij x̂_j ≥ r̂ x̂_i`: the quasi-ancestor sum in the growth recurrence
//! pairs `x̂` with the rows of `Δ_m`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::guard::ResourceGuard;
use crate::language_graph::{build_descendant_graph, enumerate_trimmed_length, QuotientIndex};
use crate::perm::{factorial, Perm};
use crate::words::AlphabetParams;

/// Adjacency rows of a 0/1 matrix: `rows[i]` lists the `j` with `a_ij = 1`.
pub type Adjacency = Vec<Vec<u32>>;

pub fn quotient_adjacency(q: &QuotientIndex) -> Adjacency {
    q.out
        .iter()
        .map(|edges| edges.iter().map(|e| e.to).collect())
        .collect()
}

#[derive(Clone, Debug)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub shift: f64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: 1e-12,
            max_iter: 2_000_000,
            shift: 1.0,
        }
    }
}

/// Strongly connected components (iterative Tarjan), in reverse topological order.
pub fn strongly_connected_components(adj: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let n = adj.len();
    let mut index = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0u32;
    for root in 0..n {
        if index[root] != u32::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root as u32);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos] as usize;
                *pos += 1;
                if index[w] == u32::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w as usize] = false;
                        comp.push(w);
                        if w as usize == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

fn multiply(adj: &[Vec<u32>], x: &[f64], shift: f64, y: &mut [f64]) {
    for (i, row) in adj.iter().enumerate() {
        y[i] = row.iter().map(|&j| x[j as usize]).sum::<f64>() + shift * x[i];
    }
}

/// Shifted power iteration `x <- (A + shift I) x`, stopped when the
/// Collatz–Wielandt bounds `min (Ax)_i/x_i` and `max (Ax)_i/x_i` agree to
/// `tol`. Returns `r` and `x` normalized to max component 1.
pub fn power_iteration(adj: &[Vec<u32>], start: Option<&[f64]>, opts: &PowerOptions) -> Result<(f64, Vec<f64>)> {
    let n = adj.len();
    if n == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    let mut x: Vec<f64> = match start {
        Some(s) => {
            if s.len() != n || s.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
                return Err(Error::Domain("start vector must be positive".into()));
            }
            s.to_vec()
        }
        None => vec![1.0; n],
    };
    let mut y = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..opts.max_iter {
        multiply(adj, &x, opts.shift, &mut y);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let ratio = y[i] / x[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        let top = y.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return Ok((0.0, x));
        }
        for i in 0..n {
            x[i] = (y[i] / top).max(f64::MIN_POSITIVE);
        }
        estimate = 0.5 * (lo + hi) - opts.shift;
        if hi - lo <= opts.tol * hi {
            return Ok((estimate, x));
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        last_r: estimate,
        last_x: x,
    })
}

/// Perron root and positive eigenvector of an irreducible 0/1 matrix.
/// Reducible input is rejected with its component structure.
pub fn approx_perron(adj: &[Vec<u32>], opts: &PowerOptions) -> Result<(f64, Vec<f64>)> {
    let comps = strongly_connected_components(adj);
    if comps.len() > 1 {
        return Err(Error::Reducible {
            components: comps.len(),
            sizes: comps.iter().map(Vec::len).collect(),
        });
    }
    power_iteration(adj, None, opts)
}

/// Exact rational certificate `Δ x̂ ≥ r̂ x̂` with `x̂ > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerronCertificate {
    pub r_hat: BigRational,
    pub x_hat: Vec<BigRational>,
    pub mu_hat: BigRational,
}

pub const DEFAULT_DENOMINATOR_BITS: u32 = 48;

/// Rounds `x` to the grid `2^-bits` (keeping every entry positive) and takes
/// the largest `r̂` the rounded vector supports: `min_i (Δx̂)_i / x̂_i`.
pub fn certify_subeigenvector(adj: &[Vec<u32>], x: &[f64], bits: u32) -> Result<PerronCertificate> {
    if x.len() != adj.len() || x.is_empty() {
        return Err(Error::Domain("vector length does not match matrix".into()));
    }
    let top = x.iter().cloned().fold(0.0, f64::max);
    if !(top > 0.0) || x.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Domain("weight vector must be positive and finite".into()));
    }
    let scale = (bits as f64).exp2();
    let numerators: Vec<BigInt> = x
        .iter()
        .map(|&v| {
            let scaled = (v / top * scale).round().max(1.0);
            BigInt::from(scaled as u64)
        })
        .collect();
    let denom = BigInt::one() << bits;
    let x_hat: Vec<BigRational> = numerators
        .iter()
        .map(|n| BigRational::new(n.clone(), denom.clone()))
        .collect();
    let r_hat = adj
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let sum: BigInt = row.iter().map(|&j| &numerators[j as usize]).sum();
            BigRational::new(sum, numerators[i].clone())
        })
        .min()
        .expect("nonempty");
    if r_hat <= BigRational::one() {
        return Err(Error::NoCertificate(format!(
            "certified Perron bound {} is not above 1",
            ratio_to_f64(&r_hat)
        )));
    }
    let mu_hat = compute_mu(&x_hat)?;
    Ok(PerronCertificate {
        r_hat,
        x_hat,
        mu_hat,
    })
}

/// `max x̂ / min x̂`, exactly.
pub fn compute_mu(x_hat: &[BigRational]) -> Result<BigRational> {
    if x_hat.is_empty() || x_hat.iter().any(|v| !v.is_positive()) {
        return Err(Error::Domain("μ needs a positive vector".into()));
    }
    let max = x_hat.iter().max().unwrap();
    let min = x_hat.iter().min().unwrap();
    Ok(max / min)
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Collatz–Wielandt upper bound `max_i (Ax)_i/x_i` on the spectral radius of
/// an irreducible block, computed exactly from a rationalized `x`.
fn collatz_wielandt_upper(adj: &[Vec<u32>], x: &[f64]) -> BigRational {
    let top = x.iter().cloned().fold(0.0, f64::max);
    let nums: Vec<BigInt> = x
        .iter()
        .map(|&v| BigInt::from(((v / top) * 2f64.powi(48)).round().max(1.0) as u64))
        .collect();
    adj.iter()
        .enumerate()
        .map(|(i, row)| {
            let sum: BigInt = row.iter().map(|&j| &nums[j as usize]).sum();
            BigRational::new(sum, nums[i].clone())
        })
        .max()
        .unwrap_or_else(BigRational::zero)
}

/// Spectral radius upper bound of an arbitrary 0/1 matrix: the maximum over
/// its nontrivial strongly connected blocks of a Collatz–Wielandt bound.
pub fn spectral_radius_upper(adj: &[Vec<u32>]) -> Result<BigRational> {
    let mut best = BigRational::zero();
    for comp in strongly_connected_components(adj) {
        let mut local = vec![u32::MAX; adj.len()];
        for (i, &v) in comp.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let sub: Adjacency = comp
            .iter()
            .map(|&v| {
                adj[v as usize]
                    .iter()
                    .filter_map(|&w| (local[w as usize] != u32::MAX).then_some(local[w as usize]))
                    .collect()
            })
            .collect();
        if sub.iter().all(Vec::is_empty) {
            continue;
        }
        let (_, x) = power_iteration(&sub, None, &PowerOptions::default())?;
        let bound = collatz_wielandt_upper(&sub, &x);
        if bound > best {
            best = bound;
        }
    }
    Ok(best)
}

/// Upper bound on the growth rate: Perron value of the class graph of the
/// whole length-m level (closed words included), plus `1e-9`.
pub fn upper_bound_growth(params: &AlphabetParams, m: usize, guard: &ResourceGuard) -> Result<f64> {
    let level = enumerate_trimmed_length(params, m, guard)?;
    let graph = build_descendant_graph(&level)?;
    let adj: Adjacency = graph
        .out
        .iter()
        .map(|edges| edges.iter().map(|e| e.to).collect())
        .collect();
    let bound = spectral_radius_upper(&adj)?;
    Ok(ratio_to_f64(&bound) + 1e-9)
}

// ---------------------------------------------------------------------------
// Voltage lift

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Paths leaving the base: entry `(d, σ)` counts `L_m` words with prefix
    /// `rep_base` and suffix `σ(rep_d)`.
    Forward,
    /// Paths entering the base: entry `(d, σ)` counts `L_m` words with prefix
    /// `σ(rep_d)` and suffix `rep_base`.
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaMode {
    Exact,
    Rounded,
}

/// Path-count magnitude on the lift.
pub trait Magnitude: Copy + Send + Sync + PartialEq + Default + std::fmt::Debug {
    fn one() -> Self;
    fn accumulate(self, other: Self) -> Self;
    fn product(self, other: Self) -> Self;
    fn is_zero(&self) -> bool;
    fn overflowed(&self) -> bool;
    /// An exact rational no smaller than the true count.
    fn to_rational(&self) -> BigRational;
    fn to_f64(&self) -> f64;
}

/// Exact counts; `u128::MAX` marks overflow.
impl Magnitude for u128 {
    fn one() -> Self {
        1
    }
    #[inline]
    fn accumulate(self, other: Self) -> Self {
        self.checked_add(other).unwrap_or(u128::MAX)
    }
    #[inline]
    fn product(self, other: Self) -> Self {
        self.checked_mul(other).unwrap_or(u128::MAX)
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn overflowed(&self) -> bool {
        *self == u128::MAX
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(*self))
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

/// Upper bounds on counts, accumulated with upward rounding.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct UpF64(pub f64);

impl Magnitude for UpF64 {
    fn one() -> Self {
        UpF64(1.0)
    }
    #[inline]
    fn accumulate(self, other: Self) -> Self {
        if other.0 == 0.0 {
            return self;
        }
        if self.0 == 0.0 {
            return other;
        }
        // The exact sum lies within one ulp of the rounded one.
        UpF64((self.0 + other.0).next_up())
    }
    #[inline]
    fn product(self, other: Self) -> Self {
        if self.0 == 0.0 || other.0 == 0.0 {
            return UpF64(0.0);
        }
        UpF64((self.0 * other.0).next_up())
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
    fn overflowed(&self) -> bool {
        !self.0.is_finite()
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_float(self.0).expect("finite magnitude")
    }
    fn to_f64(&self) -> f64 {
        self.0
    }
}

/// Rank-transition tables for the voltage lift of a quotient graph.
pub struct VoltageLift<'a> {
    pub quotient: &'a QuotientIndex,
    perms: usize,
    /// For each class `d`: `(source class, table)` of its in-edges; the table
    /// maps `rank(σ')` to `rank(σ'∘τ⁻¹)`.
    fwd: Vec<Vec<(u32, usize)>>,
    /// For each class `a`: `(target class, table)` of its out-edges; the table
    /// maps `rank(ρ)` to `rank(ρ∘τ)`.
    bwd: Vec<Vec<(u32, usize)>>,
    tables: Vec<Vec<u32>>,
}

/// Default ceiling on lift cells (`s·k!`) for a single row.
pub const DEFAULT_MAX_LIFT_CELLS: usize = 1 << 25;

impl<'a> VoltageLift<'a> {
    pub fn new(quotient: &'a QuotientIndex, max_cells: usize) -> Result<Self> {
        let k = quotient.params.k();
        let perms = factorial(k) as usize;
        let cells = perms * quotient.s();
        let table_cells = 2 * perms * quotient.edge_count();
        if cells > max_cells || table_cells > 4 * max_cells {
            return Err(Error::GuardExceeded {
                what: format!(
                    "voltage lift with {cells} cells per row; use rounded mode with a smaller k or raise the lift guard"
                ),
                cap: max_cells as u64,
            });
        }
        let all = Perm::all(k);
        let mut tables = Vec::new();
        let mut fwd = vec![Vec::new(); quotient.s()];
        let mut bwd = vec![Vec::new(); quotient.s()];
        for (c, edges) in quotient.out.iter().enumerate() {
            for e in edges {
                let inv = e.voltage.inverse();
                let t_fwd: Vec<u32> = all.iter().map(|s| s.compose(&inv).rank()).collect();
                let t_bwd: Vec<u32> = all.iter().map(|s| s.compose(&e.voltage).rank()).collect();
                fwd[e.to as usize].push((c as u32, tables.len()));
                tables.push(t_fwd);
                bwd[c].push((e.to, tables.len()));
                tables.push(t_bwd);
            }
        }
        Ok(VoltageLift {
            quotient,
            perms,
            fwd,
            bwd,
            tables,
        })
    }

    pub fn perms(&self) -> usize {
        self.perms
    }

    pub fn cells(&self) -> usize {
        self.perms * self.quotient.s()
    }

    pub fn stream<M: Magnitude>(&self, base: usize, direction: Direction) -> LiftStream<'_, 'a, M> {
        let mut row = vec![M::default(); self.cells()];
        row[base * self.perms] = M::one();
        LiftStream {
            lift: self,
            base,
            direction,
            t: 0,
            row,
            scratch: vec![M::default(); self.cells()],
        }
    }
}

/// Successive powers `t = 0, 1, 2, ..` of one lift row.
pub struct LiftStream<'l, 'a, M: Magnitude> {
    lift: &'l VoltageLift<'a>,
    pub base: usize,
    pub direction: Direction,
    t: usize,
    row: Vec<M>,
    scratch: Vec<M>,
}

impl<'l, 'a, M: Magnitude> LiftStream<'l, 'a, M> {
    pub fn power(&self) -> usize {
        self.t
    }

    pub fn get(&self, class: usize, perm_rank: u32) -> M {
        self.row[class * self.lift.perms + perm_rank as usize]
    }

    /// Cells of one class, indexed by permutation rank.
    pub fn class_cells(&self, class: usize) -> &[M] {
        &self.row[class * self.lift.perms..(class + 1) * self.lift.perms]
    }

    pub fn advance(&mut self) -> Result<()> {
        let perms = self.lift.perms;
        let sources = match self.direction {
            Direction::Forward => &self.lift.fwd,
            Direction::Backward => &self.lift.bwd,
        };
        let tables = &self.lift.tables;
        let row = &self.row;
        self.scratch
            .par_chunks_mut(perms)
            .enumerate()
            .for_each(|(d, out)| {
                out.iter_mut().for_each(|c| *c = M::default());
                for &(src, table) in &sources[d] {
                    let src_row = &row[src as usize * perms..(src as usize + 1) * perms];
                    let map = &tables[table];
                    for (cell, &r) in out.iter_mut().zip(map.iter()) {
                        let v = src_row[r as usize];
                        if !v.is_zero() {
                            *cell = cell.accumulate(v);
                        }
                    }
                }
            });
        std::mem::swap(&mut self.row, &mut self.scratch);
        self.t += 1;
        if self.row.iter().any(Magnitude::overflowed) {
            return Err(Error::GuardExceeded {
                what: format!("path counts overflow at power {}; use rounded mode", self.t),
                cap: u128::MAX.min(u64::MAX as u128) as u64,
            });
        }
        Ok(())
    }

    pub fn advance_to(&mut self, t: usize) -> Result<()> {
        if t < self.t {
            return Err(Error::StageOrder(format!(
                "lift row already at power {}, asked for {t}",
                self.t
            )));
        }
        while self.t < t {
            self.advance()?;
        }
        Ok(())
    }

    pub fn snapshot(&self) -> DeltaPowerRow<M> {
        DeltaPowerRow {
            base: self.base,
            direction: self.direction,
            t: self.t,
            perms: self.lift.perms,
            cells: self.row.clone(),
        }
    }
}

/// One power of one lift row, detached from its stream.
#[derive(Clone, Debug)]
pub struct DeltaPowerRow<M: Magnitude> {
    pub base: usize,
    pub direction: Direction,
    pub t: usize,
    perms: usize,
    cells: Vec<M>,
}

impl<M: Magnitude> DeltaPowerRow<M> {
    pub fn get(&self, class: usize, perm: &Perm) -> M {
        self.cells[class * self.perms + perm.rank() as usize]
    }

    /// Nonzero entries as `(class, permutation rank, magnitude)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u32, M)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(move |(i, &v)| (i / self.perms, (i % self.perms) as u32, v))
    }
}

/// Rows for powers `1..=t_max` from one base class.
pub fn delta_power_rows<M: Magnitude>(
    lift: &VoltageLift<'_>,
    base: usize,
    direction: Direction,
    t_max: usize,
) -> Result<Vec<DeltaPowerRow<M>>> {
    if t_max == 0 {
        return Err(Error::Domain("t_max must be at least 1".into()));
    }
    let mut stream = lift.stream::<M>(base, direction);
    let mut rows = Vec::with_capacity(t_max);
    for _ in 0..t_max {
        stream.advance()?;
        rows.push(stream.snapshot());
    }
    Ok(rows)
}
