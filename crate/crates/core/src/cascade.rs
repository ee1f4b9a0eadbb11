//! The ρ-cascade that majorizes the ω table by shifted copies of `S_m`, the
//! tail term for periods beyond `p_2`, the α inequality, and the induction
//! base.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::corrections::{Contribution, EstimateKind, PeriodRange};
use crate::error::{Error, Result};
use crate::spectral::ratio_to_f64;
use crate::words::AlphabetParams;

/// ρ values are rounded to multiples of `2^-RHO_GRID_BITS`: down for `d < b`,
/// up at `d = b`. This keeps every number in the cascade dyadic.
pub const RHO_GRID_BITS: u32 = 64;

/// α is reported on the grid `2^-ALPHA_GRID_BITS`.
pub const ALPHA_GRID_BITS: u32 = 32;

/// `P(z) = Σ_{d=a}^{b} ρ_d z^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoPolynomial {
    pub a: i64,
    pub b: i64,
    pub rho: Vec<BigRational>,
}

impl RhoPolynomial {
    pub fn coefficient(&self, d: i64) -> &BigRational {
        &self.rho[(d - self.a) as usize]
    }

    /// `P(1/α)`, exactly. With `ρ_d = R_d/L` and `α = A/B` the sum is
    /// `B^a Σ_e R_{a+e} B^e A^{E-e} / (L A^b)`, accumulated by Horner's rule
    /// over integers.
    pub fn eval_inverse(&self, alpha: &BigRational) -> BigRational {
        let l = self.rho.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let (a_num, b_den) = (alpha.numer(), alpha.denom());
        let mut acc = BigInt::zero();
        let mut a_pow = BigInt::one();
        for r in self.rho.iter().rev() {
            acc *= b_den;
            if !r.is_zero() {
                acc += r.numer() * (&l / r.denom()) * &a_pow;
            }
            a_pow *= a_num;
        }
        assert!(self.a >= 0, "shifts are nonnegative");
        let num = acc * num_traits::pow(b_den.clone(), self.a as usize);
        let den = l * num_traits::pow(a_num.clone(), self.a as usize + self.rho.len() - 1);
        BigRational::new(num, den)
    }

    pub fn eval_inverse_f64(&self, alpha: f64) -> f64 {
        self.rho
            .iter()
            .enumerate()
            .map(|(i, r)| ratio_to_f64(r) * alpha.powi(-(self.a as i32 + i as i32)))
            .sum()
    }
}

fn floor_to_grid(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    let scaled = x * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.floor().to_integer(), scale)
}

/// Runs the cascade over `ω(a..=b)` (one row per shift).
///
/// For `d < b`: `ρ_d = min_l ω'_l(d)/x̂_l` rounded down, `ν = ω'(d) - ρ_d x̂`,
/// `ω'(d+1) = ω(d+1) + Δν` with `(Δν)_i = Σ_{i→l} ν_l`. At `d = b` the max
/// rule applies, rounded up.
///
/// Every quantity is kept as an integer multiple of `1/D` with
/// `D = 2^RHO_GRID_BITS · lcm(denominators)`, which makes `ρ_d x̂` exact
/// without normalizing fractions.
pub fn rho_cascade(
    a: i64,
    omega: &[Vec<BigRational>],
    x_hat: &[BigRational],
    adj: &[Vec<u32>],
) -> Result<RhoPolynomial> {
    if omega.is_empty() {
        return Err(Error::Domain("empty ω table".into()));
    }
    if x_hat.iter().any(|x| !x.is_positive()) {
        return Err(Error::Domain("x̂ must be strictly positive".into()));
    }
    let lcm = omega
        .iter()
        .flatten()
        .chain(x_hat)
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let grid = BigInt::one() << RHO_GRID_BITS;
    let scale = &lcm * &grid;
    let scaled = |v: &BigRational| v.numer() * (&scale / v.denom());
    let xs: Vec<BigInt> = x_hat.iter().map(scaled).collect();
    // x̂_l D is a multiple of the grid, so ρ x̂_l D = R (x̂_l D / grid).
    let x_units: Vec<BigInt> = xs.iter().map(|x| x >> RHO_GRID_BITS).collect();
    let s = x_hat.len();
    let last = omega.len() - 1;
    let mut rho = Vec::with_capacity(omega.len());
    let mut current: Vec<BigInt> = omega[0].iter().map(scaled).collect();
    for idx in 0..=last {
        if current.iter().any(|v| v.is_negative()) {
            return Err(Error::Internal(format!("negative carried correction at d = {}", a + idx as i64)));
        }
        // R = floor(min_l W_l 2^g / X_l), or the ceiling of the max at d = b.
        let units = current.iter().zip(&xs).map(|(w, x)| {
            let (q, r) = (w << RHO_GRID_BITS).div_rem(x);
            (q, r.is_zero())
        });
        if idx == last {
            let top = units
                .map(|(q, exact)| if exact { q } else { q + 1 })
                .max()
                .expect("s > 0");
            rho.push(BigRational::new(top, grid.clone()));
            break;
        }
        let low = units.map(|(q, _)| q).min().expect("s > 0");
        let nu: Vec<BigInt> = current.iter().zip(&x_units).map(|(w, x)| w - &low * x).collect();
        rho.push(BigRational::new(low, grid.clone()));
        let mut next: Vec<BigInt> = omega[idx + 1].iter().map(scaled).collect();
        for i in 0..s {
            for &l in &adj[i] {
                let v = &nu[l as usize];
                if !v.is_zero() {
                    next[i] += v;
                }
            }
        }
        current = next;
    }
    Ok(RhoPolynomial {
        a,
        b: a + last as i64,
        rho,
    })
}

/// `q = ⌊(p_2+1)/(k-1)⌋ - 1`.
pub fn tail_exponent(params: &AlphabetParams, p2: usize) -> usize {
    (p2 + 1) / (params.k() - 1) - 1
}

/// `μ/(α^q (α - 1))`, the sum of `μ α^{-d}` over `d > q`.
pub fn tail_term(mu: &BigRational, q: usize, alpha: &BigRational) -> Result<BigRational> {
    if alpha <= &BigRational::one() {
        return Err(Error::Domain("tail term needs α > 1".into()));
    }
    let denom = num_traits::pow(alpha.clone(), q) * (alpha - BigRational::one());
    Ok(mu / denom)
}

/// `r̂ - P(1/α) - tail(α) - α`, exactly. The bound holds iff this is `≥ 0`.
pub fn final_slack(
    r_hat: &BigRational,
    rho: &RhoPolynomial,
    mu: &BigRational,
    q: usize,
    alpha: &BigRational,
    with_tail: bool,
) -> Result<BigRational> {
    let tail = if with_tail {
        tail_term(mu, q, alpha)?
    } else {
        BigRational::zero()
    };
    Ok(r_hat - rho.eval_inverse(alpha) - tail - alpha)
}

/// Why no α works, evaluated at the α where the slack is largest.
#[derive(Clone, Debug, PartialEq)]
pub struct Infeasibility {
    pub best_alpha: f64,
    pub best_slack: f64,
    pub r: f64,
    pub p_value: f64,
    pub tail_value: f64,
}

impl Infeasibility {
    pub fn dominant_term(&self) -> &'static str {
        if self.tail_value >= self.p_value {
            "tail term mu/(alpha^q (alpha-1)); raise p2 (and n0)"
        } else {
            "correction polynomial P(1/alpha); raise p1, p2 or m"
        }
    }
}

impl std::fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "no alpha > 1 satisfies the inequality; best slack {:.6e} at alpha = {:.9} (r = {:.9}, P(1/alpha) = {:.6e}, tail = {:.6e}); dominant: {}",
            self.best_slack,
            self.best_alpha,
            self.r,
            self.p_value,
            self.tail_value,
            self.dominant_term()
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlphaOutcome {
    Feasible(BigRational),
    Infeasible(Infeasibility),
}

/// Largest α on the grid `2^-ALPHA_GRID_BITS` satisfying the inequality.
/// A float scan locates the feasible region; every candidate is accepted
/// only after the exact check.
pub fn solve_alpha(
    r_hat: &BigRational,
    rho: &RhoPolynomial,
    mu: &BigRational,
    q: usize,
    with_tail: bool,
) -> Result<AlphaOutcome> {
    if r_hat <= &BigRational::one() {
        return Err(Error::Domain("r̂ must exceed 1".into()));
    }
    if final_slack(r_hat, rho, mu, q, r_hat, with_tail)? >= BigRational::zero() {
        return Ok(AlphaOutcome::Feasible(r_hat.clone()));
    }
    let r = ratio_to_f64(r_hat);
    let muf = ratio_to_f64(mu);
    let terms = |alpha: f64| -> (f64, f64) {
        let p = rho.eval_inverse_f64(alpha);
        let tail = if with_tail {
            muf / (alpha.powi(q as i32) * (alpha - 1.0))
        } else {
            0.0
        };
        (p, tail)
    };
    let slack = |alpha: f64| {
        let (p, tail) = terms(alpha);
        r - p - tail - alpha
    };
    const STEPS: usize = 20_000;
    let grid = |i: usize| 1.0 + (r - 1.0) * i as f64 / STEPS as f64;
    let mut best = (f64::NEG_INFINITY, r);
    let mut found = None;
    for i in (1..STEPS).rev() {
        let a = grid(i);
        let v = slack(a);
        if v > best.0 {
            best = (v, a);
        }
        if v >= 0.0 {
            found = Some(i);
            break;
        }
    }
    let Some(i) = found else {
        let (p, tail) = terms(best.1);
        return Ok(AlphaOutcome::Infeasible(Infeasibility {
            best_alpha: best.1,
            best_slack: best.0,
            r,
            p_value: p,
            tail_value: tail,
        }));
    };
    let (mut lo, mut hi) = (grid(i), grid(i + 1));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slack(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let grid_scale = (ALPHA_GRID_BITS as f64).exp2();
    let mut units = (lo * grid_scale).floor() as u64;
    let denom = BigInt::one() << ALPHA_GRID_BITS;
    let one_units = 1u64 << ALPHA_GRID_BITS;
    let mut step = 1u64;
    while units > one_units {
        let alpha = BigRational::new(BigInt::from(units), denom.clone());
        if final_slack(r_hat, rho, mu, q, &alpha, with_tail)? >= BigRational::zero() {
            return Ok(AlphaOutcome::Feasible(alpha));
        }
        units = units.saturating_sub(step);
        step = step.saturating_mul(2);
    }
    let (p, tail) = terms(lo);
    Ok(AlphaOutcome::Infeasible(Infeasibility {
        best_alpha: lo,
        best_slack: slack(lo),
        r,
        p_value: p,
        tail_value: tail,
    }))
}

/// Floors `x` to the α grid.
pub fn alpha_on_grid(x: &BigRational) -> BigRational {
    floor_to_grid(x, ALPHA_GRID_BITS)
}

// ---------------------------------------------------------------------------
// Induction base

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseMode {
    /// `(21)` is checked at `n_0` from exact counts; `n_0` must reach the
    /// induction threshold.
    Default,
    /// Steps between `n_0` and the threshold are re-run with the period sums
    /// restricted to the estimates already established at each `n`. Periods
    /// whose estimate is not yet established are dropped, which the proof
    /// does not justify; certificates in this mode are labeled heuristic.
    Truncated,
}

impl BaseMode {
    pub fn tag(&self) -> &'static str {
        match self {
            BaseMode::Default => "default",
            BaseMode::Truncated => "truncated",
        }
    }

    pub fn from_tag(tag: &str) -> Result<BaseMode> {
        match tag {
            "default" => Ok(BaseMode::Default),
            "truncated" => Ok(BaseMode::Truncated),
            _ => Err(Error::Parse(format!("unknown base mode {tag:?}"))),
        }
    }
}

/// Smallest `n` from which every step of the induction is established:
/// each period estimate is valid, the cascade only touches lengths `≥ m`,
/// the tail prefixes have length `≥ m`, and `n > kp_2/(k-1)`.
pub fn induction_threshold(params: &AlphabetParams, m: usize, range: &PeriodRange, b: i64) -> usize {
    let k = params.k();
    let mut n = params.max_allowed_len(range.p2) + 1;
    for j in range.p0..=range.p2 {
        n = n.max(EstimateKind::for_period(params, m, range, j).valid_from(params, m, j));
    }
    n = n.max((b.max(0) as usize) + m);
    while n - n / k < m {
        n += 1;
    }
    n
}

/// Outcome of the base verification, with a line per checked item.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseTranscript {
    pub mode: BaseMode,
    pub n0: usize,
    pub threshold: usize,
    pub lines: Vec<String>,
    pub failure: Option<(usize, usize)>,
}

impl BaseTranscript {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks `S(n_0) ≥ α^d S(n_0 - d)` for `d = 1..n_0-m`. `s_values[i]` is
/// `S_m(m + i)`.
pub fn check_ratio_inequalities(
    s_values: &[BigRational],
    m: usize,
    n0: usize,
    alpha: &BigRational,
) -> std::result::Result<(), usize> {
    let top = &s_values[n0 - m];
    let mut power = BigRational::one();
    for d in 1..=n0 - m {
        power *= alpha;
        if top < &(&power * &s_values[n0 - m - d]) {
            return Err(d);
        }
    }
    Ok(())
}

/// Largest α (as a float estimate) for which the ratio inequalities hold at
/// `n_0`.
pub fn base_alpha_limit(s_values: &[BigRational], m: usize, n0: usize) -> f64 {
    let top = ratio_to_f64(&s_values[n0 - m]).ln();
    (1..=n0 - m)
        .map(|d| (top - ratio_to_f64(&s_values[n0 - m - d]).ln()) / d as f64)
        .fold(f64::INFINITY, f64::min)
        .exp()
}

/// Everything a single step of the induction at length `n` relies on.
pub struct StepContext<'a> {
    pub params: &'a AlphabetParams,
    pub m: usize,
    pub range: &'a PeriodRange,
    pub a: i64,
    pub b: i64,
    pub contributions: &'a [Contribution],
    pub x_hat: &'a [BigRational],
    pub adj: &'a [Vec<u32>],
    pub r_hat: &'a BigRational,
    pub mu: &'a BigRational,
    pub q: usize,
}

impl StepContext<'_> {
    /// Slack of the step `S(n+1) ≥ α S(n)` at `n`, keeping only periods
    /// whose estimate is established at `n`. Returns the slack and the
    /// periods with a nonzero estimate that were dropped.
    pub fn truncated_step(&self, n: usize, alpha: &BigRational) -> Result<(BigRational, Vec<usize>)> {
        let m = self.m;
        let cap = (n as i64 - m as i64).min(self.b);
        let mut dropped = Vec::new();
        let s = self.x_hat.len();
        if cap < self.a {
            // Nothing can be majorized; only periods that cannot occur yet.
            for c in self.contributions.iter().filter(|c| c.values.iter().any(|v| !v.is_zero())) {
                if self.params.min_prohibited_len(c.j) <= n + 1 {
                    dropped.push(c.j);
                }
            }
            return Ok((self.r_hat - alpha, dropped));
        }
        let mut omega = vec![vec![BigRational::zero(); s]; (cap - self.a + 1) as usize];
        for c in self.contributions.iter().filter(|c| c.values.iter().any(|v| !v.is_zero())) {
            let occurs = self.params.min_prohibited_len(c.j) <= n + 1;
            if !occurs {
                continue;
            }
            if c.valid_from(self.params, m) > n || c.d > cap {
                dropped.push(c.j);
                continue;
            }
            for (acc, v) in omega[(c.d - self.a) as usize].iter_mut().zip(&c.values) {
                *acc += v;
            }
        }
        let rho = rho_cascade(self.a, &omega, self.x_hat, self.adj)?;
        // The tail only matters once periods beyond p2 fit into n + 1 letters.
        let with_tail = self.params.min_prohibited_len(self.range.p2 + 1) <= n + 1;
        let slack = final_slack(self.r_hat, &rho, self.mu, self.q, alpha, with_tail)?;
        Ok((slack, dropped))
    }
}

/// Verifies the induction base. `s_values[i] = S_m(m + i)` for lengths up to
/// `n_0`.
pub fn verify_base(
    ctx: &StepContext<'_>,
    mode: BaseMode,
    s_values: &[BigRational],
    n0: usize,
    alpha: &BigRational,
) -> Result<BaseTranscript> {
    let m = ctx.m;
    if n0 < m + 1 || s_values.len() < n0 - m + 1 {
        return Err(Error::Config(format!("need counts for lengths {m}..={n0}")));
    }
    let threshold = induction_threshold(ctx.params, m, ctx.range, ctx.b);
    let mut lines = Vec::new();
    let mut failure = None;
    lines.push(format!("mode {} n0 {} threshold {}", mode.tag(), n0, threshold));
    match mode {
        BaseMode::Default => {
            if n0 < threshold {
                return Err(Error::Config(format!(
                    "default base mode needs n0 >= {threshold} (every estimate established); got n0 = {n0}"
                )));
            }
        }
        BaseMode::Truncated => {
            lines.push(
                "heuristic: periods without an established estimate are dropped below the threshold".into(),
            );
        }
    }
    match check_ratio_inequalities(s_values, m, n0, alpha) {
        Ok(()) => lines.push(format!("ratio n {n0} d 1..={} ok", n0 - m)),
        Err(d) => {
            lines.push(format!("ratio n {n0} d {d} FAIL"));
            failure = Some((n0, d));
        }
    }
    if mode == BaseMode::Truncated && failure.is_none() {
        for n in n0..threshold {
            let (slack, dropped) = ctx.truncated_step(n, alpha)?;
            let ok = !slack.is_negative();
            lines.push(
                format!(
                    "step n {n} slack {:.6e} dropped {} {}",
                    ratio_to_f64(&slack),
                    dropped.len(),
                    if ok { "ok" } else { "FAIL" }
                ),
            );
            if !ok {
                failure = Some((n, 1));
                break;
            }
        }
    }
    Ok(BaseTranscript {
        mode,
        n0,
        threshold,
        lines,
        failure,
    })
}


/// Exact decimal rendering of a rational, for transcripts.
pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn proportional_omega_has_no_carry() {
        let x = vec![rat(1, 1), rat(2, 1)];
        let adj = vec![vec![0, 1], vec![0]];
        let omega = vec![
            vec![rat(3, 1), rat(6, 1)],
            vec![rat(1, 2), rat(1, 1)],
            vec![rat(1, 4), rat(1, 2)],
        ];
        let p = rho_cascade(2, &omega, &x, &adj).unwrap();
        assert_eq!(p.rho, vec![rat(3, 1), rat(1, 2), rat(1, 4)]);
        assert_eq!((p.a, p.b), (2, 4));
    }

    #[test]
    fn single_class_has_no_residual() {
        let x = vec![rat(3, 1)];
        let adj = vec![vec![0]];
        let omega = vec![vec![rat(6, 1)], vec![rat(3, 1)], vec![rat(9, 1)]];
        let p = rho_cascade(1, &omega, &x, &adj).unwrap();
        assert_eq!(p.rho, vec![rat(2, 1), rat(1, 1), rat(3, 1)]);
    }

    #[test]
    fn residual_is_carried_along_edges() {
        let x = vec![rat(1, 1), rat(1, 1)];
        let adj = vec![vec![1], vec![0, 1]];
        let omega = vec![vec![rat(1, 1), rat(3, 1)], vec![rat(0, 1), rat(0, 1)]];
        let p = rho_cascade(0, &omega, &x, &adj).unwrap();
        // ρ_0 = 1, ν = (0, 2), ν' = (2, 2), ρ_1 = max = 2.
        assert_eq!(p.rho, vec![rat(1, 1), rat(2, 1)]);
    }

    #[test]
    fn horner_matches_direct_sum() {
        let rho = RhoPolynomial {
            a: 3,
            b: 6,
            rho: vec![rat(1, 7), rat(0, 1), rat(5, 64), rat(2, 3)],
        };
        for alpha in [rat(6, 5), rat(3, 2), rat(1234567, 1000000)] {
            let mut direct = BigRational::zero();
            for (i, r) in rho.rho.iter().enumerate() {
                direct += r / num_traits::pow(alpha.clone(), 3 + i);
            }
            assert_eq!(rho.eval_inverse(&alpha), direct);
        }
    }

    #[test]
    fn tail_examples() {
        assert_eq!(tail_term(&rat(1, 1), 1, &rat(2, 1)).unwrap(), rat(1, 2));
        assert!(tail_term(&rat(1, 1), 1, &rat(1, 1)).is_err());
        let p5 = AlphabetParams::new(5).unwrap();
        assert_eq!(tail_exponent(&p5, 600), 149);
        // The closed form dominates partial sums.
        let alpha = rat(11, 10);
        let mu = rat(3, 2);
        let q = 4;
        let mut partial = BigRational::zero();
        for d in q + 1..q + 60 {
            partial += &mu / num_traits::pow(alpha.clone(), d);
        }
        assert!(tail_term(&mu, q, &alpha).unwrap() >= partial);
    }

    #[test]
    fn no_losses_give_alpha_equal_r() {
        let r = rat(6, 5);
        let rho = RhoPolynomial {
            a: 1,
            b: 2,
            rho: vec![BigRational::zero(), BigRational::zero()],
        };
        let out = solve_alpha(&r, &rho, &BigRational::zero(), 3, true).unwrap();
        assert_eq!(out, AlphaOutcome::Feasible(r));
    }

    #[test]
    fn solved_alpha_passes_exact_check() {
        let r = rat(5, 4);
        let rho = RhoPolynomial {
            a: 2,
            b: 4,
            rho: vec![rat(1, 50), rat(1, 100), rat(1, 20)],
        };
        let mu = BigRational::from_f64(1.5).unwrap();
        match solve_alpha(&r, &rho, &mu, 40, true).unwrap() {
            AlphaOutcome::Feasible(a) => {
                assert!(a > BigRational::one() && a < r);
                assert!(final_slack(&r, &rho, &mu, 40, &a, true).unwrap() >= BigRational::zero());
                let bumped = &a + rat(1, 1_000_000);
                assert!(final_slack(&r, &rho, &mu, 40, &bumped, true).unwrap() < BigRational::zero());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn heavy_tail_is_infeasible() {
        let r = rat(5, 4);
        let rho = RhoPolynomial {
            a: 2,
            b: 2,
            rho: vec![rat(1, 100)],
        };
        match solve_alpha(&r, &rho, &rat(2, 1), 8, true).unwrap() {
            AlphaOutcome::Infeasible(diag) => {
                assert!(diag.best_slack < 0.0);
                assert!(diag.dominant_term().starts_with("tail"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ratio_check_reports_witness() {
        let s: Vec<BigRational> = [1, 2, 4, 8, 16].iter().map(|&v| rat(v, 1)).collect();
        assert!(check_ratio_inequalities(&s, 10, 14, &rat(2, 1)).is_ok());
        assert!(check_ratio_inequalities(&s, 10, 14, &BigRational::one()).is_ok());
        assert_eq!(check_ratio_inequalities(&s, 10, 14, &rat(21, 10)), Err(1));
        assert!((base_alpha_limit(&s, 10, 14) - 2.0).abs() < 1e-12);
    }
}
