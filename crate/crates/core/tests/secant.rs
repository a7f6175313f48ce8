mod common;

use common::{q, rng};
use momentvar::linalg::rank_rational;
use momentvar::moments::{mixture_moments, param_count, GaussianParams, MixtureParams};
use momentvar::polyring::{binomial, PrimeField, DEFAULT_PRIME};
use momentvar::secant::{
    census_grid, conjecture_eleven_defect, defect_identity_d3, degree_formula_sec2_g1, degree_formula_sec2_x,
    degree_formula_sec3_x, dim_formula_d3, expected_dimension, secant_dimension, secant_jacobian, ModMixturePoint,
    RankConfig, SecantError, SecantProblem,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

fn problem(n: usize, d: u32, k: usize) -> SecantProblem {
    SecantProblem::new(n, d, k).unwrap()
}

fn dim(n: usize, d: u32, k: usize) -> usize {
    secant_dimension(&problem(n, d, k), &RankConfig::default()).unwrap().row.dim
}

fn mixture_from(n: usize, thetas: &[Vec<BigRational>], free: &[BigRational]) -> MixtureParams {
    let comps = thetas.iter().map(|t| GaussianParams::from_theta(n, t).unwrap()).collect();
    MixtureParams::from_free_weights(comps, free.to_vec()).unwrap()
}

/// Exact Jacobian over Q: every moment is a polynomial of degree <= d along a
/// coordinate line, so the derivative at 0 is a fixed combination of values at
/// t = 0..d (Lagrange).
fn rational_jacobian(n: usize, d: u32, thetas: &[Vec<BigRational>], free: &[BigRational]) -> Vec<Vec<BigRational>> {
    let m = param_count(n);
    let k = thetas.len();
    let nodes: Vec<BigRational> = (0..=d as i64).map(|t| q(t, 1)).collect();
    // L_i'(0) for nodes 0..d
    let weights: Vec<BigRational> = (0..nodes.len())
        .map(|i| {
            let denom: BigRational =
                (0..nodes.len()).filter(|&j| j != i).map(|j| &nodes[i] - &nodes[j]).product();
            let mut s = BigRational::zero();
            for skip in 0..nodes.len() {
                if skip == i {
                    continue;
                }
                let prod: BigRational =
                    (0..nodes.len()).filter(|&j| j != i && j != skip).map(|j| -&nodes[j]).product();
                s += prod;
            }
            s / denom
        })
        .collect();
    let columns = k * m + k - 1;
    let mut cols = Vec::with_capacity(columns);
    for c in 0..columns {
        let mut acc: Option<Vec<BigRational>> = None;
        for (t, w) in nodes.iter().zip(&weights) {
            let mut th = thetas.to_vec();
            let mut fr = free.to_vec();
            if c < k * m {
                th[c / m][c % m] += t;
            } else {
                fr[c - k * m] += t;
            }
            let v = mixture_moments(&mixture_from(n, &th, &fr), d).to_vec();
            let scaled: Vec<BigRational> = v.into_iter().skip(1).map(|x| x * w).collect();
            acc = Some(match acc {
                None => scaled,
                Some(a) => a.into_iter().zip(scaled).map(|(x, y)| x + y).collect(),
            });
        }
        cols.push(acc.unwrap());
    }
    (0..cols[0].len()).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect()
}

fn to_field(f: &PrimeField, x: &BigRational) -> u64 {
    let num = f.from_bigint(x.numer());
    let den = f.from_bigint(x.denom());
    f.mul_mod(num, f.inv_mod(den).unwrap())
}

fn small_int(r: &mut impl Rng) -> BigRational {
    BigRational::from_integer(BigInt::from(r.gen_range(-6..=6)))
}

#[test]
fn jacobian_matches_exact_derivatives() {
    let field = PrimeField::new(DEFAULT_PRIME).unwrap();
    let mut r = rng(21);
    for (n, d, k) in [(1, 5, 2), (2, 3, 2), (3, 3, 2), (2, 4, 3)] {
        let thetas: Vec<Vec<BigRational>> =
            (0..k).map(|_| (0..param_count(n)).map(|_| small_int(&mut r)).collect()).collect();
        let free: Vec<BigRational> = (1..k).map(|i| q(i as i64, 2 * k as i64 + 1)).collect();
        let exact = rational_jacobian(n, d, &thetas, &free);
        let point = ModMixturePoint {
            thetas: thetas.iter().map(|t| t.iter().map(|x| to_field(&field, x)).collect()).collect(),
            free_weights: free.iter().map(|x| to_field(&field, x)).collect(),
        };
        let p = problem(n, d, k);
        let jac = secant_jacobian(&p, &field, &point).unwrap();
        assert_eq!((jac.rows(), jac.cols()), (p.ambient(), p.params()));
        for (i, row) in exact.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert_eq!(jac.get(i, j), to_field(&field, x), "(n,d,k)=({n},{d},{k}) entry ({i},{j})");
            }
        }
        let exact_rank = rank_rational(&exact);
        assert_eq!(jac.rank(&field), exact_rank);
        if (n, d, k) == (3, 3, 2) {
            assert_eq!(exact_rank, 17);
        }
    }
}

#[test]
fn counts_and_expected_dimension() {
    let p = problem(3, 3, 2);
    assert_eq!((p.params(), p.ambient(), expected_dimension(&p)), (19, 19, 19));
    for d in 2..=9 {
        assert_eq!(expected_dimension(&problem(1, d, 1)), 2);
    }
    let p = problem(9, 4, 13);
    assert_eq!((p.params(), p.ambient(), expected_dimension(&p)), (714, 714, 714));
    assert!(SecantProblem::new(0, 3, 1).is_err());
}

#[test]
fn single_gaussian_rank_is_full() {
    for (n, d) in [(1, 3), (2, 3), (3, 3), (4, 4), (5, 3)] {
        assert_eq!(dim(n, d, 1), param_count(n), "n={n} d={d}");
    }
}

#[test]
fn known_dimensions() {
    assert_eq!(dim(1, 6, 2), 5);
    let r = secant_dimension(&problem(5, 3, 3), &RankConfig::default()).unwrap().row;
    assert_eq!((r.dim, r.delta), (51, 4));
    let r = secant_dimension(&problem(8, 4, 11), &RankConfig::default()).unwrap().row;
    assert_eq!((r.dim, r.delta, r.par_minus_dim), (493, 1, 1));
}

#[test]
fn univariate_cubics_have_no_defective_rows() {
    let rows = census_grid(3, [1], 1..=1, true, &RankConfig::default()).unwrap();
    assert!(rows.is_empty());
    let rows = census_grid(3, [1], 1..=3, false, &RankConfig::default()).unwrap();
    assert!(rows.iter().all(|(r, _)| !r.is_defective()));
}

#[test]
fn rank_is_monotone_in_k() {
    for (n, d) in [(1, 8), (2, 4), (3, 3), (4, 3)] {
        let p1 = problem(n, d, 1);
        let mut prev = 0;
        for k in 1..=8 {
            let row = secant_dimension(&problem(n, d, k), &RankConfig::default()).unwrap().row;
            assert!(row.dim >= prev, "(n,d)=({n},{d}) k={k}");
            if prev < p1.ambient() && row.dim == prev {
                panic!("(n,d)=({n},{d}) k={k}: dimension stalled at {prev} below N");
            }
            prev = row.dim;
            if row.dim == row.ambient {
                break;
            }
        }
    }
}

#[test]
fn bivariate_secants_have_expected_dimension() {
    for d in 3..=10u32 {
        let ambient = binomial(d as u64 + 2, 2) as usize - 1;
        let mut k = 1;
        loop {
            let p = problem(2, d, k);
            if p.params() > ambient + 3 {
                break;
            }
            let row = secant_dimension(&p, &RankConfig::default()).unwrap().row;
            assert_eq!(row.dim, row.exp, "d={d} k={k}");
            k += 1;
        }
    }
}

/// Last k for which the cubic dimension formula is claimed.
fn formula_k(n: usize) -> usize {
    let ambient = binomial(n as u64 + 3, 3) as i64 - 1;
    let f = |k: usize| dim_formula_d3(n as i64, k as i64).unwrap();
    let mut k = 1;
    while f(k + 1) <= ambient && f(k + 1) > f(k) {
        k += 1;
    }
    k
}

#[test]
fn cubic_formula_matches_rank() {
    assert_eq!(formula_k(2), 2);
    for n in 2..=10usize {
        for k in 1..=formula_k(n) {
            assert_eq!(dim(n, 3, k) as i64, dim_formula_d3(n as i64, k as i64).unwrap(), "n={n} k={k}");
        }
    }
}

#[test]
fn certificates_are_reproducible() {
    let cfg = RankConfig { seed: 42, trials: 3, ..RankConfig::default() };
    let p = problem(6, 3, 4);
    let a = secant_dimension(&p, &cfg).unwrap();
    let b = secant_dimension(&p, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.cert.seed, 42);
    assert_eq!(a.cert.degree_bound, a.cert.rank as u64 * 3);
    let c = secant_dimension(&p, &RankConfig { seed: 43, ..cfg }).unwrap();
    assert_eq!(c.row, a.row);
    let f1 = ModMixturePoint::random(&p, &PrimeField::new(DEFAULT_PRIME).unwrap(), 7, 0);
    let f2 = ModMixturePoint::random(&p, &PrimeField::new(DEFAULT_PRIME).unwrap(), 7, 1);
    assert_ne!(f1, f2);
}

#[test]
fn prime_and_trial_validation() {
    let p = problem(1, 5, 2);
    let cfg = |prime, trials| RankConfig { prime, seed: 0, trials };
    assert!(matches!(secant_dimension(&p, &cfg(113, 1)), Err(SecantError::PrimeTooSmall { .. })));
    assert!(secant_dimension(&p, &cfg(127, 1)).is_ok());
    assert!(secant_dimension(&p, &cfg(1 << 40, 1)).is_err());
    assert!(matches!(secant_dimension(&p, &cfg(DEFAULT_PRIME, 0)), Err(SecantError::NoTrials)));
}

#[test]
fn formula_examples() {
    assert_eq!(degree_formula_sec2_x(5).unwrap(), 12);
    assert_eq!(degree_formula_sec2_x(4).unwrap(), 0);
    for d in 4..=50 {
        assert!(degree_formula_sec2_x(d).unwrap() >= 0);
        assert!(degree_formula_sec2_x(d).unwrap() >= degree_formula_sec2_g1(d).unwrap());
    }
    for d in 2..=4 {
        assert_eq!(degree_formula_sec2_g1(d).unwrap(), 0);
    }
    assert_eq!(degree_formula_sec2_g1(11).unwrap(), 1134);
    assert_eq!(degree_formula_sec3_x(6).unwrap(), 0);
    assert_eq!(degree_formula_sec3_x(9).unwrap(), 2497);
    for d in 6..=50 {
        degree_formula_sec3_x(d).unwrap();
    }
    for n in 2..=15 {
        assert_eq!(dim_formula_d3(n, 1).unwrap(), n * (n + 3) / 2);
        assert_eq!(defect_identity_d3(n, 1).unwrap(), 0);
        assert_eq!(defect_identity_d3(n, 2).unwrap(), 2);
        let par = 2 * (n * (n + 3) / 2) + 1;
        assert_eq!(par - dim_formula_d3(n, 2).unwrap(), 2);
    }
    assert_eq!(dim_formula_d3(9, 4).unwrap(), 181);
    assert_eq!(defect_identity_d3(6, 3).unwrap(), 12);
    assert_eq!(conjecture_eleven_defect(8, 3).unwrap(), 1);
    assert_eq!(conjecture_eleven_defect(12, 8).unwrap(), 21);
    assert_eq!(conjecture_eleven_defect(10, 5).unwrap(), 6);
    assert!(conjecture_eleven_defect(7, 3).is_err());
    assert!(degree_formula_sec3_x(5).is_err());
}
