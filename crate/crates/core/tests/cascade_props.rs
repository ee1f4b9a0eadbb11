use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use dejean::cascade::{check_ratio_inequalities, final_slack, rho_cascade, RhoPolynomial};
use dejean::corrections::{assemble_omega, eta_prime, xi_weak, zeta_table, PeriodRange};
use dejean::counting::count_fm_by_class;
use dejean::guard::ResourceGuard;
use dejean::language_graph::build_pipeline_quotient;
use dejean::pipeline::perron_stage;
use dejean::spectral::{quotient_adjacency, VoltageLift};
use dejean::words::AlphabetParams;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Replays the cascade with the given ρ. Returns the carried vectors
/// `c(d+1)`, one per `d < b`, or `None` if a residual goes negative or the
/// last coefficient does not cover what is left.
fn replay(
    a: i64,
    omega: &[Vec<BigRational>],
    x: &[BigRational],
    adj: &[Vec<u32>],
    rho: &RhoPolynomial,
) -> Option<Vec<Vec<BigRational>>> {
    let mut nu = omega[0].clone();
    let mut carries = Vec::new();
    for idx in 0..omega.len() {
        let r = rho.coefficient(a + idx as i64);
        let residual: Vec<BigRational> = nu.iter().zip(x).map(|(v, xl)| v - r * xl).collect();
        if idx + 1 == omega.len() {
            return residual.iter().all(|v| !v.is_positive()).then_some(carries);
        }
        if residual.iter().any(|v| v.is_negative()) {
            return None;
        }
        let carry: Vec<BigRational> = adj
            .iter()
            .map(|row| row.iter().fold(BigRational::zero(), |acc, &l| acc + &residual[l as usize]))
            .collect();
        nu = omega[idx + 1].iter().zip(&carry).map(|(w, c)| w + c).collect();
        carries.push(carry);
    }
    unreachable!()
}

fn instance() -> impl Strategy<Value = (Vec<Vec<u32>>, Vec<BigRational>, Vec<Vec<BigRational>>)> {
    (2usize..6).prop_flat_map(|s| {
        (
            proptest::collection::vec(proptest::bool::weighted(0.3), s * s),
            proptest::collection::vec(1i64..1000, s),
            proptest::collection::vec(proptest::collection::vec(0i64..50, s), 1..6),
        )
            .prop_map(move |(bits, xs, om)| {
                let adj = (0..s)
                    .map(|i| {
                        (0..s as u32)
                            .filter(|&j| j as usize == (i + 1) % s || bits[i * s + j as usize])
                            .collect()
                    })
                    .collect();
                let x = xs.iter().map(|&v| rat(v, 1 << 10)).collect();
                let omega = om
                    .iter()
                    .map(|row| row.iter().map(|&v| rat(v, 7)).collect())
                    .collect();
                (adj, x, omega)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cascade_residuals_are_nonnegative((adj, x, omega) in instance(), a in 0i64..4) {
        let rho = rho_cascade(a, &omega, &x, &adj).unwrap();
        prop_assert_eq!(rho.b - rho.a + 1, omega.len() as i64);
        prop_assert!(replay(a, &omega, &x, &adj, &rho).is_some());
        prop_assert!(rho.rho.iter().all(|r| !r.is_negative()));
    }

    #[test]
    fn g_is_nondecreasing(
        a in 0i64..3,
        coeffs in proptest::collection::vec(0i64..64, 1..8),
        mu in 16i64..64,
        q in 0usize..30,
        lo in 1i64..1000,
        gap in 1i64..1000,
    ) {
        let rho = RhoPolynomial {
            a,
            b: a + coeffs.len() as i64 - 1,
            rho: coeffs.iter().map(|&c| rat(c, 64)).collect(),
        };
        let r = rat(3, 2);
        let mu = rat(mu, 16);
        let a1 = BigRational::one() + rat(lo, 1000);
        let a2 = &a1 + rat(gap, 1000);
        let g = |alpha: &BigRational| final_slack(&r, &rho, &mu, q, alpha, true).unwrap() + alpha;
        prop_assert!(g(&a1) <= g(&a2));
    }
}

#[test]
fn step_inequality_on_exact_counts() {
    let (k, m, n_max) = (5, 6, 26);
    let p = AlphabetParams::new(k).unwrap();
    let g = ResourceGuard::unlimited();
    let q = build_pipeline_quotient(&p, m, &g).unwrap().2;
    let s = q.s();
    let adj = quotient_adjacency(&q);
    let counts: Vec<Vec<u128>> = count_fm_by_class(&q, n_max, &g).unwrap().into_iter().map(|c| c.counts).collect();
    let perron = perron_stage(&q).unwrap();
    let lift = VoltageLift::new(&q, 1 << 20).unwrap();
    let range = PeriodRange::new(&p, m, 11, 14).unwrap();
    let zeta = zeta_table(&q, &range, &g).unwrap();
    let mut contributions = eta_prime(&p, m, &zeta, &perron.x_hat);
    contributions.extend(xi_weak::<u128>(&lift, &range, &perron.x_hat).unwrap());
    let table = assemble_omega(&p, m, &range, s, contributions).unwrap();
    let rho = rho_cascade(table.a, &table.omega, &perron.x_hat, &adj).unwrap();
    let carries = replay(table.a, &table.omega, &perron.x_hat, &adj, &rho).unwrap();

    let weighted = |v: &[BigRational], len: i64| -> BigRational {
        counts[len as usize - m]
            .iter()
            .zip(v)
            .fold(BigRational::zero(), |acc, (&c, w)| acc + w * int(c))
    };
    let mut checked = 0;
    let mut nu = table.omega[0].clone();
    for (idx, carry) in carries.iter().enumerate() {
        let d = table.a + idx as i64;
        for n in (d + 1 + m as i64)..=n_max as i64 {
            let lhs = weighted(&nu, n - d);
            let rhs = rho.coefficient(d) * weighted(&perron.x_hat, n - d) + weighted(carry, n - d - 1);
            assert!(lhs <= rhs, "d = {d}, n = {n}");
            checked += 1;
        }
        nu = table.omega[idx + 1].iter().zip(carry).map(|(w, c)| w + c).collect();
    }
    assert!(checked > 20);
}

#[test]
fn ratio_check_rejects_alpha_equal_r_hat() {
    let (k, m, n_max) = (5, 6, 26);
    let p = AlphabetParams::new(k).unwrap();
    let g = ResourceGuard::unlimited();
    let q = build_pipeline_quotient(&p, m, &g).unwrap().2;
    let perron = perron_stage(&q).unwrap();
    let s_values: Vec<BigRational> = count_fm_by_class(&q, n_max, &g)
        .unwrap()
        .iter()
        .map(|c| c.weighted(&perron.x_hat))
        .collect();
    let mut witnesses = 0;
    for n0 in m + 1..=n_max {
        if let Err(d) = check_ratio_inequalities(&s_values, m, n0, &perron.r_hat) {
            let power = num_traits::pow(perron.r_hat.clone(), d);
            assert!(s_values[n0 - m] < power * &s_values[n0 - m - d], "n0 = {n0}: witness d = {d} does not fail");
            witnesses += 1;
        }
    }
    assert!(witnesses > 0, "alpha = r_hat passed the base at every n0");
}
