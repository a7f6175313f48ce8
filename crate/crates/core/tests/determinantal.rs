mod common;

use common::{nonzero, q, rng, small};
use momentvar::determinantal::{
    build_gd, build_hilbert_burch, build_willink, expected_lowest_term, gd_minor_values, gd_minors, hb_minors,
    hd_class, intersection_pairing, singular_locus_rank, surface_degree, willink_membership, willink_unit_minor,
    DetError, DivisorClass,
};
use momentvar::moments::{gaussian_moments, univariate_moments, MomentVector};
use momentvar::polyring::{binomial, multi_indices, var_list, Polynomial, Rationals};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

type P = Polynomial<Rationals>;

fn xyz() -> (P, P, P) {
    let v = var_list(&["x", "y", "z"]);
    (
        Polynomial::variable(Rationals, v.clone(), 0),
        Polynomial::variable(Rationals, v.clone(), 1),
        Polynomial::variable(Rationals, v, 2),
    )
}

fn int(c: i64) -> BigRational {
    q(c, 1)
}

#[test]
fn gd_layout() {
    let g = build_gd(3).unwrap();
    assert_eq!((g.rows(), g.cols()), (3, 3));
    assert!(g.get(0, 0).is_zero());
    assert_eq!(g.get(0, 1).to_string(), "m0");
    assert_eq!(g.get(0, 2).to_string(), "2*m1");
    let g = build_gd(9).unwrap();
    for j in 1..9 {
        assert_eq!(g.get(0, j).coeff_of(&unit(10, j - 1)), int(j as i64));
        assert_eq!(g.get(1, j).coeff_of(&unit(10, j)), int(1));
        assert_eq!(g.get(2, j).coeff_of(&unit(10, j + 1)), int(1));
    }
    assert_eq!(gd_minors(6).unwrap().len(), 20);
    assert!(matches!(build_gd(2), Err(DetError::OrderTooSmall { .. })));
}

fn unit(n: usize, i: usize) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = 1;
    e
}

#[test]
fn minors_vanish_exactly_on_the_surface() {
    let mut r = rng(11);
    for d in 3..=12u32 {
        let minors = gd_minors(d).unwrap();
        assert_eq!(minors.len() as u64, binomial(d as u64, 3));
        for _ in 0..10 {
            let m = univariate_moments(&small(&mut r), &small(&mut r), d).to_vec();
            assert!(minors.iter().all(|f| f.evaluate(&m).unwrap().is_zero()));
            assert!(gd_minor_values(&m).unwrap().iter().all(Zero::is_zero));
            let mut off = m.clone();
            off[r.gen_range(3..=d as usize)] += nonzero(&mut r);
            assert!(gd_minor_values(&off).unwrap().iter().any(|v| !v.is_zero()));
        }
    }
    assert_eq!(surface_degree(6), 15);
}

#[test]
fn first_columns_minor_is_the_recursion() {
    let mut r = rng(12);
    let d = 9u32;
    let minors = gd_minors(d).unwrap();
    let triples = momentvar::determinantal::gd_column_triples(d);
    let (mu, var) = (small(&mut r), small(&mut r));
    let m = univariate_moments(&mu, &var, d).to_vec();
    for (t, f) in triples.iter().zip(&minors) {
        if t[0] != 0 || t[1] != 1 {
            continue;
        }
        // column i holds m_{i+1}; the minor is linear in it with coefficient -m0^2
        let top = t[2] + 1;
        let slope = f.differentiate_index(top);
        assert_eq!(slope.evaluate(&m).unwrap(), -BigRational::one());
        let mut at = m.clone();
        at[top] = BigRational::zero();
        let solved = f.evaluate(&at).unwrap();
        assert_eq!(solved, m[top], "column {}", t[2]);
    }
}

#[test]
fn singular_line() {
    for (a, b) in [(1, 1), (1, 0), (0, 1), (-2, 5)] {
        let mut pt = vec![int(0); 7];
        pt[5] = int(a);
        pt[6] = int(b);
        assert!(singular_locus_rank(6, &pt).unwrap() <= 3);
    }
    let mut pt = vec![int(0); 7];
    assert_eq!(singular_locus_rank(6, &pt), Err(DetError::PointNotOnLine));
    pt[2] = int(1);
    pt[6] = int(1);
    assert_eq!(singular_locus_rank(6, &pt), Err(DetError::PointNotOnLine));
}

#[test]
fn hilbert_burch_layout() {
    let b = build_hilbert_burch(3).unwrap();
    let rows: Vec<Vec<String>> = (0..3).map(|r| (0..4).map(|c| b.get(r, c).to_string()).collect()).collect();
    assert_eq!(rows, [["y", "z", "0", "0"], ["x", "y", "z", "0"], ["0", "2*x", "y", "z"]]);
    let b = build_hilbert_burch(8).unwrap();
    for i in 1..8 {
        assert_eq!(b.get(i, i - 1).coeff_of(&[1, 0, 0]), int(i as i64));
    }
}

/// `f_k = y f_{k-1} - (k-1) x z f_{k-2}`, so `b_{d,i} = f_i z^(d-i)`.
fn continuant(i: u32) -> P {
    let (x, y, z) = xyz();
    let mut prev = P::one(Rationals, x.vars().clone());
    let mut cur = y.clone();
    if i == 0 {
        return prev;
    }
    for k in 2..=i {
        let next = y.mul(&cur).unwrap().sub(&x.mul(&z).unwrap().mul(&prev).unwrap().scale(&int(k as i64 - 1))).unwrap();
        prev = cur;
        cur = next;
    }
    cur
}

#[test]
fn hb_minors_match_the_continuant_oracle() {
    let (_, _, z) = xyz();
    for d in 2..=14u32 {
        let b = hb_minors(d).unwrap();
        assert_eq!(b.len(), d as usize + 1);
        for (i, bi) in b.iter().enumerate() {
            let want = continuant(i as u32).mul(&z.pow(d - i as u32)).unwrap();
            assert_eq!(bi, &want, "d={d} i={i}");
        }
    }
}

#[test]
fn hb_minor_low_order_coefficients() {
    let d = 9u32;
    let b = hb_minors(d).unwrap();
    assert_eq!(b[0].to_string(), "z^9");
    assert_eq!(b[1].to_string(), "y*z^8");
    assert_eq!(b[2].coeff_of(&[0, 2, 7]), int(1));
    assert_eq!(b[2].coeff_of(&[1, 0, 8]), int(-1));
    assert_eq!(b[3].coeff_of(&[0, 3, 6]), int(1));
    assert_eq!(b[3].coeff_of(&[1, 1, 7]), int(-3));
    assert_eq!(b[3].num_terms(), 2);
    assert_eq!(b[9].coeff_of(&[0, 9, 0]), int(1));
    assert_eq!(b[9].coeff_of(&[1, 7, 1]), int(-(binomial(9, 2) as i64)));
    assert_eq!(b[8].coeff_of(&[1, 6, 2]), int(-(binomial(8, 2) as i64)));
}

#[test]
fn lowest_term_patterns() {
    let low = |d: u32| (0..=d).map(|i| expected_lowest_term(d, i)).collect::<Vec<_>>();
    let odd = low(7);
    assert_eq!(&odd[..4], &[(0, 7), (1, 6), (0, 6), (1, 5)]);
    assert_eq!(&odd[6..], &[(0, 4), (1, 3)]);
    let even = low(8);
    assert_eq!(&even[7..], &[(1, 4), (0, 4)]);
    for d in 3..=12 {
        assert!(momentvar::determinantal::hb_structural_checks(d).unwrap().all_true());
    }
}

/// The bivariate order-four matrix as printed, columns
/// `m_u, m_{u+e2}, m_{u+e1}, u1 m_{u-e1}, u2 m_{u-e2}`.
const W24: [[(i64, &str); 5]; 10] = [
    [(1, "00"), (1, "01"), (1, "10"), (0, ""), (0, "")],
    [(1, "01"), (1, "02"), (1, "11"), (0, ""), (1, "00")],
    [(1, "10"), (1, "11"), (1, "20"), (1, "00"), (0, "")],
    [(1, "02"), (1, "03"), (1, "12"), (0, ""), (2, "01")],
    [(1, "11"), (1, "12"), (1, "21"), (1, "01"), (1, "10")],
    [(1, "20"), (1, "21"), (1, "30"), (2, "10"), (0, "")],
    [(1, "03"), (1, "04"), (1, "13"), (0, ""), (3, "02")],
    [(1, "12"), (1, "13"), (1, "22"), (1, "02"), (2, "11")],
    [(1, "21"), (1, "22"), (1, "31"), (2, "11"), (1, "20")],
    [(1, "30"), (1, "31"), (1, "40"), (3, "20"), (0, "")],
];

#[test]
fn bivariate_order_four_willink_matrix() {
    let w = build_willink(2, 4).unwrap();
    assert_eq!((w.rows(), w.cols()), (10, 5));
    let shown_col = [0, 2, 1, 3, 4];
    for (r, row) in W24.iter().enumerate() {
        for (c, &(coef, label)) in row.iter().enumerate() {
            let entry = w.get(r, shown_col[c]);
            if coef == 0 {
                assert!(entry.is_zero(), "({r},{c})");
            } else {
                let var = P::var(Rationals, w.vars().clone(), &format!("m{label}")).unwrap();
                assert_eq!(entry, &var.scale(&int(coef)), "({r},{c})");
            }
        }
    }
}

#[test]
fn univariate_willink_is_transposed_gd() {
    for d in 3..=8u32 {
        let w = build_willink(1, d).unwrap();
        let g = build_gd(d).unwrap();
        assert_eq!((w.rows(), w.cols()), (d as usize, 3));
        // W row (m_u, m_{u+1}, u m_{u-1}) is G column (u m_{u-1}, m_u, m_{u+1}) permuted
        for u in 0..d as usize {
            assert_eq!(w.get(u, 0).to_string(), g.get(1, u).to_string());
            assert_eq!(w.get(u, 1).to_string(), g.get(2, u).to_string());
            assert_eq!(w.get(u, 2).to_string(), g.get(0, u).to_string());
        }
    }
}

#[test]
fn willink_unit_minor_and_non_members() {
    let mut r = rng(13);
    for n in 1..=4 {
        for d in 2..=4u32 {
            let values = multi_indices(n, d)
                .into_iter()
                .map(|b| {
                    let v = if b.order() == 0 { BigRational::one() } else { small(&mut r) };
                    (b, v)
                })
                .collect();
            let m = MomentVector::new(n, d, values).unwrap();
            assert!(willink_unit_minor(n, d, &m).unwrap().is_one());
            if d >= 3 {
                let rep = willink_membership(n, d, &m, None).unwrap();
                assert!(rep.rank > n + 1 && !rep.is_member);
            }
        }
        let g = common::gaussian(&mut r, n);
        let m = gaussian_moments(&g, 4);
        assert!(willink_unit_minor(n, 4, &m).unwrap().is_one());
    }
}

#[test]
fn divisor_pairing() {
    let s = 3;
    let l = DivisorClass::line(s);
    let ep = DivisorClass::basis_vector(s, 1);
    assert_eq!(intersection_pairing(&l, &l).unwrap(), 1);
    assert_eq!(intersection_pairing(&ep, &ep).unwrap(), -1);
    assert_eq!(intersection_pairing(&l, &ep).unwrap(), 0);
    let h6 = hd_class(6, &[1, 2, 1]).unwrap();
    assert_eq!(h6.coeffs(), &[6, -3, -3, -1, -2, -1]);
    let h7 = hd_class(7, &[2, 2, 5]).unwrap();
    assert_eq!(h7.coeffs(), &[7, -4, -3, -2, -2, -5]);
    for d in 2..=11u32 {
        let h = hd_class(d, &[1, 1, 1]).unwrap();
        assert_eq!(intersection_pairing(&h, &l).unwrap(), d as i64);
        assert_eq!(intersection_pairing(&h, &ep).unwrap(), (d as i64 + 1) / 2);
    }
    assert_eq!(hd_class(5, &[1, 0]), Err(DetError::NonPositiveCoefficient(2)));
    assert!(matches!(intersection_pairing(&l, &DivisorClass::line(1)), Err(DetError::BasisMismatch(6, 4))));
}
