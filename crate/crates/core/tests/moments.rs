mod common;

use std::collections::BTreeMap;

use common::{gaussian, mixture, q, rng, small, two_mixture};
use momentvar::determinantal::{willink_kernel_basis, willink_membership};
use momentvar::moments::{
    cumulants_to_moments, gaussian_moments, mixture_moments, moment_polynomials, moments_to_cumulants,
    univariate_moments, CumulantVector, GaussianParams, MixtureParams, MomentError, MomentVector, SymMatrix,
};
use momentvar::polyring::{multi_indices, MultiIndex};
use momentvar::recovery::degenerate_mean_test;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

/// Isserlis: sum over partitions of the index list into singletons (means)
/// and pairs (covariances).
fn wick(idx: &[usize], g: &GaussianParams) -> BigRational {
    match idx.split_first() {
        None => BigRational::one(),
        Some((&a, rest)) => {
            let mut acc = &g.mean[a] * wick(rest, g);
            for j in 0..rest.len() {
                let mut others = rest.to_vec();
                let b = others.remove(j);
                acc += g.covariance.get(a, b) * wick(&others, g);
            }
            acc
        }
    }
}

fn expand(beta: &MultiIndex) -> Vec<usize> {
    (0..beta.len()).flat_map(|i| std::iter::repeat(i).take(beta.get(i) as usize)).collect()
}

#[test]
fn standard_normal_to_order_six() {
    let m = univariate_moments(&q(0, 1), &q(1, 1), 6);
    let want: Vec<BigRational> = [1, 0, 1, 0, 3, 0, 15].iter().map(|&v| q(v, 1)).collect();
    assert_eq!(m.to_vec(), want);
}

#[test]
fn univariate_recursion_matches_moment_polynomials_to_order_24() {
    let polys = moment_polynomials(1, 24).unwrap();
    let mut r = rng(1);
    for _ in 0..20 {
        let (mu, var) = (small(&mut r), small(&mut r));
        let m = univariate_moments(&mu, &var, 24);
        for (beta, p) in &polys {
            assert_eq!(&p.evaluate(&[mu.clone(), var.clone()]).unwrap(), m.get(beta).unwrap(), "m{}", beta.label());
        }
    }
}

#[test]
fn multivariate_moments_match_wick_oracle() {
    let mut r = rng(2);
    for n in 1..=3 {
        for _ in 0..5 {
            let g = gaussian(&mut r, n);
            let m = gaussian_moments(&g, 5);
            for (beta, v) in m.iter() {
                assert_eq!(v, &wick(&expand(beta), &g), "n={n} m{}", beta.label());
            }
        }
    }
}

#[test]
fn symbolic_and_numeric_moments_agree() {
    let mut r = rng(3);
    let polys = moment_polynomials(3, 4).unwrap();
    let g = gaussian(&mut r, 3);
    let m = gaussian_moments(&g, 4);
    for (beta, p) in &polys {
        assert_eq!(&p.evaluate(&g.theta()).unwrap(), m.get(beta).unwrap());
    }
    let m111 = polys[&MultiIndex::new(vec![1, 1, 1])].to_string();
    for term in ["mu1*mu2*mu3", "mu1*s2_3", "mu2*s1_3", "mu3*s1_2"] {
        assert!(m111.contains(term), "{m111}");
    }
}

/// The 19 coordinates of the two-component system in three variables,
/// transcribed term by term.
fn displayed_system(l: &BigRational, c1: &GaussianParams, c2: &GaussianParams) -> BTreeMap<[u32; 3], BigRational> {
    let side = |c: &GaussianParams| {
        let u = |i: usize| c.mean[i].clone();
        let s = |i: usize, j: usize| c.covariance.get(i, j).clone();
        let three = q(3, 1);
        let two = q(2, 1);
        let mut v = BTreeMap::new();
        v.insert([1, 0, 0], u(0));
        v.insert([0, 1, 0], u(1));
        v.insert([0, 0, 1], u(2));
        v.insert([2, 0, 0], u(0) * u(0) + s(0, 0));
        v.insert([0, 2, 0], u(1) * u(1) + s(1, 1));
        v.insert([0, 0, 2], u(2) * u(2) + s(2, 2));
        v.insert([1, 1, 0], u(0) * u(1) + s(0, 1));
        v.insert([1, 0, 1], u(0) * u(2) + s(0, 2));
        v.insert([0, 1, 1], u(1) * u(2) + s(1, 2));
        v.insert([3, 0, 0], u(0) * u(0) * u(0) + &three * s(0, 0) * u(0));
        v.insert([0, 3, 0], u(1) * u(1) * u(1) + &three * s(1, 1) * u(1));
        v.insert([0, 0, 3], u(2) * u(2) * u(2) + &three * s(2, 2) * u(2));
        v.insert([2, 1, 0], u(0) * u(0) * u(1) + s(0, 0) * u(1) + &two * s(0, 1) * u(0));
        v.insert([2, 0, 1], u(0) * u(0) * u(2) + s(0, 0) * u(2) + &two * s(0, 2) * u(0));
        v.insert([1, 2, 0], u(0) * u(1) * u(1) + s(1, 1) * u(0) + &two * s(0, 1) * u(1));
        v.insert([1, 0, 2], u(0) * u(2) * u(2) + s(2, 2) * u(0) + &two * s(0, 2) * u(2));
        v.insert([0, 2, 1], u(1) * u(1) * u(2) + s(1, 1) * u(2) + &two * s(1, 2) * u(1));
        v.insert([0, 1, 2], u(1) * u(2) * u(2) + s(2, 2) * u(1) + &two * s(1, 2) * u(2));
        v.insert([1, 1, 1], u(0) * u(1) * u(2) + s(0, 1) * u(2) + s(0, 2) * u(1) + s(1, 2) * u(0));
        v
    };
    let (a, b) = (side(c1), side(c2));
    let lb = BigRational::one() - l;
    a.into_iter().map(|(k, v)| (k, l * v + &lb * &b[&k])).collect()
}

#[test]
fn two_component_system_in_three_variables() {
    let mut r = rng(4);
    for _ in 0..10 {
        let p = two_mixture(&mut r, 3);
        let m = mixture_moments(&p, 3);
        let shown = displayed_system(&p.weights()[0], &p.components()[0], &p.components()[1]);
        assert_eq!(shown.len(), 19);
        for (idx, v) in shown {
            assert_eq!(m.at(&idx), &v, "m{idx:?}");
        }
    }
}

#[test]
fn symmetric_two_point_mixture() {
    let comp = |mu: i64| GaussianParams::new(vec![q(mu, 1)], SymMatrix::zeros(1)).unwrap();
    let p = MixtureParams::new(vec![comp(1), comp(-1)], vec![q(1, 2), q(1, 2)]).unwrap();
    let m = mixture_moments(&p, 7);
    let want: Vec<BigRational> = (0..=7).map(|i| q(if i % 2 == 0 { 1 } else { 0 }, 1)).collect();
    assert_eq!(m.to_vec(), want);
}

#[test]
fn dirac_measure_has_veronese_moments() {
    let mu = q(-3, 2);
    let m = univariate_moments(&mu, &q(0, 1), 8);
    let mut pow = BigRational::one();
    for i in 0..=8 {
        assert_eq!(m.at(&[i]), &pow);
        pow *= &mu;
    }
}

#[test]
fn empty_and_mismatched_mixtures_are_rejected() {
    assert_eq!(MixtureParams::new(vec![], vec![]), Err(MomentError::EmptyMixture));
    let mut r = rng(5);
    let got = MixtureParams::new(vec![gaussian(&mut r, 2), gaussian(&mut r, 3)], vec![q(1, 2), q(1, 2)]);
    assert!(matches!(got, Err(MomentError::DimensionMismatch { .. })));
    let got = MixtureParams::new(vec![gaussian(&mut r, 2), gaussian(&mut r, 2)], vec![q(1, 2), q(1, 3)]);
    assert!(matches!(got, Err(MomentError::WeightsNotNormalized(_))));
}

#[test]
fn gaussian_cumulants_are_mean_and_covariance() {
    let mut r = rng(6);
    for n in 1..=3 {
        let g = gaussian(&mut r, n);
        let c = moments_to_cumulants(&gaussian_moments(&g, 6)).unwrap();
        for (beta, v) in c.iter() {
            let e = expand(beta);
            let want = match e.as_slice() {
                [i] => g.mean[*i].clone(),
                [i, j] => g.covariance.get(*i, *j).clone(),
                _ => BigRational::zero(),
            };
            assert_eq!(v, &want, "k{}", beta.label());
        }
    }
}

#[test]
fn dirac_at_zero_and_zero_cumulants() {
    let dirac = univariate_moments(&q(0, 1), &q(0, 1), 5);
    assert!(moments_to_cumulants(&dirac).unwrap().iter().all(|(_, v)| v.is_zero()));
    let zeros = CumulantVector::new(2, 4, multi_indices(2, 4).into_iter().skip(1).map(|b| (b, q(0, 1))).collect()).unwrap();
    let m = cumulants_to_moments(&zeros);
    assert!(m.iter().all(|(b, v)| if b.order() == 0 { v.is_one() } else { v.is_zero() }));
}

#[test]
fn first_two_cumulants_give_univariate_moments() {
    let (mu, var) = (q(2, 3), q(-5, 7));
    let values = (1..=9u32)
        .map(|i| {
            let v = match i {
                1 => mu.clone(),
                2 => var.clone(),
                _ => q(0, 1),
            };
            (MultiIndex::new(vec![i]), v)
        })
        .collect();
    let c = CumulantVector::new(1, 9, values).unwrap();
    assert_eq!(cumulants_to_moments(&c), univariate_moments(&mu, &var, 9));
}

#[test]
fn chart_violation_is_an_error() {
    let mut values: BTreeMap<MultiIndex, BigRational> =
        multi_indices(1, 3).into_iter().map(|b| (b, q(1, 1))).collect();
    values.insert(MultiIndex::new(vec![0]), q(2, 1));
    assert!(matches!(MomentVector::new(1, 3, values), Err(MomentError::ChartViolation(_))));
}

#[test]
fn degenerate_mean_identity() {
    let mut r = rng(7);
    for n in 1..=3 {
        let mut p = two_mixture(&mut r, n);
        assert!(!degenerate_mean_test(&mixture_moments(&p, 3)));
        let mut comps = p.components().to_vec();
        comps[1].mean[0] = comps[0].mean[0].clone();
        p = MixtureParams::new(comps, p.weights().to_vec()).unwrap();
        assert!(degenerate_mean_test(&mixture_moments(&p, 3)));
    }
    let single = MixtureParams::single(gaussian(&mut r, 2));
    assert!(degenerate_mean_test(&mixture_moments(&single, 3)));
}

#[test]
fn moments_are_affine_in_the_weights() {
    let mut r = rng(8);
    let p = mixture(&mut r, 2, 3);
    let m = mixture_moments(&p, 4);
    let parts: Vec<MomentVector> =
        p.components().iter().map(|c| mixture_moments(&MixtureParams::single(c.clone()), 4)).collect();
    for (beta, v) in m.iter() {
        let combo: BigRational = parts.iter().zip(p.weights()).map(|(pm, w)| w * pm.get(beta).unwrap()).sum();
        assert_eq!(v, &combo);
    }
}

#[test]
fn json_is_graded_lex_with_string_rationals() {
    let m = univariate_moments(&q(1, 2), &q(1, 3), 3);
    let v = m.to_json();
    let idx: Vec<u64> = v["values"].as_array().unwrap().iter().map(|e| e["idx"][0].as_u64().unwrap()).collect();
    assert_eq!(idx, [0, 1, 2, 3]);
    assert_eq!(v["values"][2]["num"], "7");
    assert_eq!(v["values"][2]["den"], "12");
    assert_eq!(MomentVector::from_json(&v).unwrap(), m);

    let mut r = rng(9);
    let p = mixture(&mut r, 3, 2);
    assert_eq!(MixtureParams::from_json(&p.to_json()).unwrap(), p);
}

#[test]
fn willink_rank_and_kernel_on_gaussians() {
    let mut r = rng(10);
    for n in 1..=4 {
        for d in 2..=6u32 {
            if n == 4 && d > 5 {
                continue;
            }
            let g = gaussian(&mut r, n);
            let m = gaussian_moments(&g, d);
            let rep = willink_membership(n, d, &m, Some(&g)).unwrap();
            assert_eq!(rep.rank, n + 1, "n={n} d={d}");
            assert!(rep.is_member);
            assert_eq!(rep.kernel_ok, Some(true));
            assert_eq!(willink_kernel_basis(&g).len(), n);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cumulant_round_trip(seed in any::<u64>(), n in 1usize..=3, d in 1u32..=5) {
        let mut r = rng(seed);
        let k = r.gen_range(1..=3);
        let m = mixture_moments(&mixture(&mut r, n, k), d);
        let c = moments_to_cumulants(&m).unwrap();
        prop_assert_eq!(cumulants_to_moments(&c), m);
    }

    #[test]
    fn willink_and_cumulants_agree_on_mixtures(seed in any::<u64>(), n in 1usize..=3, d in 3u32..=5) {
        let mut r = rng(seed);
        let m = mixture_moments(&two_mixture(&mut r, n), d);
        let by_rank = willink_membership(n, d, &m, None).unwrap().is_member;
        let by_cumulants = moments_to_cumulants(&m).unwrap().first_nonzero_higher().is_none();
        prop_assert_eq!(by_rank, by_cumulants);
    }
}
