//! Exact recovery of a two-component Gaussian mixture from moments of order
//! three, once the first coordinates of both means are fixed.
//!
//! With `D = mu_1 - mu_2` and `Delta = Sigma_1 - Sigma_2`, the third central
//! moment form is
//!
//! ```text
//! f(x) = ab (D.x) [ (b - a)(D.x)^2 + 3 x' Delta x ]
//! ```
//!
//! so `D` is, up to scale, the unique linear factor of `f`. Its slope in the
//! plane `x_3 = 0` is the common root of `f(t, 1, 0)` and of the second
//! derivative of `f` along the tangent direction (a point of the line
//! component has its whole tangent line on the curve); likewise for `x_2 = 0`.
//! The known difference `mu_11 - mu_21` fixes the scale, the means follow,
//! and the covariances solve a linear system.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{solve_rational, LinearSystemError};
use crate::moments::{
    gaussian_moments, mixture_moments, GaussianParams, MixtureParams, MomentError, MomentVector, SymMatrix,
};
use crate::polyring::{multi_indices, var_list, MultiIndex, Polynomial, Rationals, UniPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecoveryError {
    #[error("recovery needs n >= 3 (got n = {0}); for n = 2 the fiber is not a single point")]
    UnsupportedDimension(usize),
    #[error("recovery needs moments up to order 3 (got d = {0})")]
    OrderTooSmall(u32),
    #[error("the fixed first coordinates must differ")]
    EqualFirstMeans,
    #[error("moments satisfy m300 = 3 m100 m200 - 2 m100^3 (collapsed first coordinates)")]
    DegenerateMeans,
    #[error("implied mixing weight {0} leaves a component with zero weight")]
    DegenerateWeight(String),
    #[error("third-moment cubic has no unique linear factor (common factor of degree {degree} in plane {plane})")]
    NoUniqueLineFactor { plane: &'static str, degree: usize },
    #[error("moments are not on the secant variety: equation for m{0} is violated")]
    Inconsistent(String),
    #[error("covariance system is underdetermined")]
    Underdetermined,
    #[error("subsets disagree on {field}: {first} from {first_subset:?} vs {second} from {second_subset:?}")]
    SubsetInconsistent {
        field: String,
        first: String,
        first_subset: [usize; 3],
        second: String,
        second_subset: [usize; 3],
    },
    #[error(transparent)]
    Moment(#[from] MomentError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryInput {
    pub m: MomentVector,
    pub mu11: BigRational,
    pub mu21: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryResult {
    pub params: MixtureParams,
    /// Largest `|m_beta - m_beta(params)|` over all supplied moments.
    pub residual: BigRational,
}

/// `m300 = 3 m100 m200 - 2 m100^3` in the first coordinate.
pub fn degenerate_mean_test(m: &MomentVector) -> bool {
    let n = m.n();
    let e = |p: u32| {
        let mut x = vec![0; n];
        x[0] = p;
        m.at(&x).clone()
    };
    let (m1, m2, m3) = (e(1), e(2), e(3));
    let three = BigRational::from_integer(3.into());
    let two = BigRational::from_integer(2.into());
    m3 == &three * &m1 * &m2 - two * &m1 * &m1 * &m1
}

/// Central moment `E[(x - mean)^beta]` from raw moments of order `<= |beta|`.
fn central_moment(m: &MomentVector, beta: &MultiIndex) -> BigRational {
    let n = m.n();
    let mean: Vec<BigRational> = (0..n).map(|i| m.get(&MultiIndex::unit(n, i)).unwrap().clone()).collect();
    let mut acc = BigRational::zero();
    for gamma in multi_indices(n, beta.order()) {
        if (0..n).any(|i| gamma.get(i) > beta.get(i)) {
            continue;
        }
        let mut c = m.get(&gamma).unwrap().clone();
        for i in 0..n {
            let r = beta.get(i) - gamma.get(i);
            let b = crate::polyring::binomial(beta.get(i) as u64, gamma.get(i) as u64);
            c *= BigRational::from_integer(b.into());
            for _ in 0..r {
                c *= -&mean[i];
            }
        }
        acc += c;
    }
    acc
}

/// `f(x) = sum_{ijk} C_ijk x_i x_j x_k` from the third central moments.
pub fn third_moment_cubic(m: &MomentVector) -> Polynomial<Rationals> {
    let n = m.n();
    let vars = var_list(&(1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>());
    let six = num_bigint::BigInt::from(6);
    let terms = multi_indices(n, 3).into_iter().filter(|b| b.order() == 3).map(|b| {
        let multinomial = BigRational::new(six.clone(), b.factorial());
        let c = central_moment(m, &b) * multinomial;
        (b, c)
    });
    Polynomial::from_terms(Rationals, vars, terms)
}

/// Restriction of a trivariate polynomial to `(t, 1, 0)` (`var = 1`) or `(t, 0, 1)` (`var = 2`).
fn restrict(p: &Polynomial<Rationals>, var: usize) -> UniPoly {
    let other = 3 - var;
    let mut coeffs = vec![BigRational::zero(); 4];
    for (mono, c) in p.terms() {
        if mono.get(other) == 0 {
            let e = mono.get(0) as usize;
            if coeffs.len() <= e {
                coeffs.resize(e + 1, BigRational::zero());
            }
            coeffs[e] += c;
        }
    }
    UniPoly::new(coeffs)
}

/// Slope `r` with `(r, 1, 0)` (or `(r, 0, 1)`) on the line factor of `f`.
fn line_slope(f: &Polynomial<Rationals>, var: usize, plane: &'static str) -> Result<BigRational, RecoveryError> {
    let other = 3 - var;
    let g = restrict(f, var);
    // tangent direction (f_other, 0, -f_1) in the coordinates (x1, x_other)
    let f1 = f.differentiate_index(0);
    let fo = f.differentiate_index(other);
    let a = restrict(&f1, var);
    let b = restrict(&fo, var);
    let f11 = restrict(&f1.differentiate_index(0), var);
    let f1o = restrict(&f1.differentiate_index(other), var);
    let f_oo = restrict(&fo.differentiate_index(other), var);
    let minus_two = BigRational::from_integer((-2).into());
    let p = b.mul(&b).mul(&f11).add(&a.mul(&b).mul(&f1o).scale(&minus_two)).add(&a.mul(&a).mul(&f_oo));
    if g.is_zero() {
        return Err(RecoveryError::NoUniqueLineFactor { plane, degree: 3 });
    }
    let h = g.gcd(&p);
    h.linear_root().ok_or(RecoveryError::NoUniqueLineFactor { plane, degree: h.degree().unwrap_or(0) })
}

fn check_input(input: &RecoveryInput, n_req: impl Fn(usize) -> bool) -> Result<(), RecoveryError> {
    let n = input.m.n();
    if !n_req(n) {
        return Err(RecoveryError::UnsupportedDimension(n));
    }
    if input.m.d() < 3 {
        return Err(RecoveryError::OrderTooSmall(input.m.d()));
    }
    if input.mu11 == input.mu21 {
        return Err(RecoveryError::EqualFirstMeans);
    }
    if degenerate_mean_test(&input.m) {
        return Err(RecoveryError::DegenerateMeans);
    }
    Ok(())
}

fn residual(m: &MomentVector, params: &MixtureParams) -> Result<BigRational, RecoveryError> {
    let regen = mixture_moments(params, m.d());
    let mut worst = BigRational::zero();
    for ((beta, want), (_, got)) in m.iter().zip(regen.iter()) {
        let diff = (want - got).abs();
        if !diff.is_zero() {
            return Err(RecoveryError::Inconsistent(beta.label()));
        }
        worst = worst.max(diff);
    }
    Ok(worst)
}

/// Recovery for `n = 3`.
pub fn recover_n3(input: &RecoveryInput) -> Result<RecoveryResult, RecoveryError> {
    check_input(input, |n| n == 3)?;
    recover_three(&input.m, &input.mu11, &input.mu21)
}

fn recover_three(m: &MomentVector, mu11: &BigRational, mu21: &BigRational) -> Result<RecoveryResult, RecoveryError> {
    let n = 3;
    let mean: Vec<BigRational> = (0..n).map(|i| m.get(&MultiIndex::unit(n, i)).unwrap().clone()).collect();
    let d1 = mu11 - mu21;
    let a = (&mean[0] - mu21) / &d1;
    let b = BigRational::one() - &a;
    if a.is_zero() || b.is_zero() {
        return Err(RecoveryError::DegenerateWeight(a.to_string()));
    }
    let f = third_moment_cubic(&m.truncate(3));
    let r2 = line_slope(&f, 1, "x3 = 0")?;
    let r3 = line_slope(&f, 2, "x2 = 0")?;
    let dvec = [d1.clone(), -&r2 * &d1, -&r3 * &d1];
    let mu1: Vec<BigRational> = (0..n).map(|i| &mean[i] + &b * &dvec[i]).collect();
    let mu2: Vec<BigRational> = (0..n).map(|i| &mean[i] - &a * &dvec[i]).collect();

    // Moments of order <= 3 are affine in the covariances for fixed means.
    let tri = n * (n + 1) / 2;
    let at = |mu: &[BigRational], s: Option<usize>| {
        let mut upper = vec![BigRational::zero(); tri];
        if let Some(s) = s {
            upper[s] = BigRational::one();
        }
        let g = GaussianParams::new(mu.to_vec(), SymMatrix::from_upper(n, upper).unwrap()).unwrap();
        gaussian_moments(&g, 3)
    };
    let base1 = at(&mu1, None);
    let base2 = at(&mu2, None);
    let unit1: Vec<MomentVector> = (0..tri).map(|s| at(&mu1, Some(s))).collect();
    let unit2: Vec<MomentVector> = (0..tri).map(|s| at(&mu2, Some(s))).collect();
    let eqs: Vec<MultiIndex> = multi_indices(n, 3).into_iter().filter(|b| b.order() >= 2).collect();
    let mut rows = Vec::with_capacity(eqs.len());
    let mut rhs = Vec::with_capacity(eqs.len());
    for beta in &eqs {
        let b1 = base1.get(beta).unwrap();
        let b2 = base2.get(beta).unwrap();
        let mut row = Vec::with_capacity(2 * tri);
        row.extend(unit1.iter().map(|u| &a * (u.get(beta).unwrap() - b1)));
        row.extend(unit2.iter().map(|u| &b * (u.get(beta).unwrap() - b2)));
        rows.push(row);
        rhs.push(m.get(beta).unwrap() - &a * b1 - &b * b2);
    }
    let sol = solve_rational(&rows, &rhs).map_err(|e| match e {
        LinearSystemError::Inconsistent(i) => RecoveryError::Inconsistent(eqs[i].label()),
        _ => RecoveryError::Underdetermined,
    })?;
    let g1 = GaussianParams::new(mu1, SymMatrix::from_upper(n, sol[..tri].to_vec())?)?;
    let g2 = GaussianParams::new(mu2, SymMatrix::from_upper(n, sol[tri..].to_vec())?)?;
    let params = MixtureParams::new(vec![g1, g2], vec![a, b])?;
    let residual = residual(m, &params)?;
    Ok(RecoveryResult { params, residual })
}

/// Moments of the coordinates `coords` (zero based).
pub fn restrict_moments(m: &MomentVector, coords: &[usize]) -> MomentVector {
    let k = coords.len();
    let values = multi_indices(k, m.d())
        .into_iter()
        .map(|beta| {
            let mut full = vec![0; m.n()];
            for (j, &c) in coords.iter().enumerate() {
                full[c] = beta.get(j);
            }
            let v = m.at(&full).clone();
            (beta, v)
        })
        .collect();
    MomentVector::new(k, m.d(), values).expect("restriction of a chart vector")
}

/// Recovery for `n >= 4` through the subsets `{1, i, j}`, stitched with exact
/// agreement on shared coordinates.
pub fn recover_general(input: &RecoveryInput) -> Result<RecoveryResult, RecoveryError> {
    check_input(input, |n| n >= 4)?;
    let n = input.m.n();
    // field name -> (value, subset it came from)
    let mut seen: std::collections::BTreeMap<String, (BigRational, [usize; 3])> = Default::default();
    let mut weight = None;
    let mut record = |field: String, value: &BigRational, subset: [usize; 3]| -> Result<(), RecoveryError> {
        match seen.get(&field) {
            Some((v, s)) if v != value => Err(RecoveryError::SubsetInconsistent {
                field,
                first: v.to_string(),
                first_subset: *s,
                second: value.to_string(),
                second_subset: subset,
            }),
            Some(_) => Ok(()),
            None => {
                seen.insert(field, (value.clone(), subset));
                Ok(())
            }
        }
    };
    let mut mu = [vec![BigRational::zero(); n], vec![BigRational::zero(); n]];
    let mut cov = [SymMatrix::zeros(n), SymMatrix::zeros(n)];
    for i in 1..n {
        for j in i + 1..n {
            let coords = [0, i, j];
            let subset = [1, i + 1, j + 1];
            let sub = restrict_moments(&input.m, &coords);
            if degenerate_mean_test(&sub) {
                return Err(RecoveryError::DegenerateMeans);
            }
            let r = recover_three(&sub.truncate(3), &input.mu11, &input.mu21)?;
            let w = &r.params.weights()[0];
            record("lambda".into(), w, subset)?;
            weight = Some(w.clone());
            for (l, comp) in r.params.components().iter().enumerate() {
                for (p, &c) in coords.iter().enumerate() {
                    record(format!("mu{}{}", l + 1, c + 1), &comp.mean[p], subset)?;
                    mu[l][c] = comp.mean[p].clone();
                    for (q, &e) in coords.iter().enumerate().skip(p) {
                        let v = comp.covariance.get(p, q);
                        record(format!("sigma{}_{}{}", l + 1, c + 1, e + 1), v, subset)?;
                        cov[l].set(c, e, v.clone());
                    }
                }
            }
        }
    }
    let a = weight.expect("n >= 4 has at least one subset");
    let b = BigRational::one() - &a;
    let [mu1, mu2] = mu;
    let [c1, c2] = cov;
    let params = MixtureParams::new(vec![GaussianParams::new(mu1, c1)?, GaussianParams::new(mu2, c2)?], vec![a, b])?;
    let residual = residual(&input.m, &params)?;
    Ok(RecoveryResult { params, residual })
}

/// Dispatches on `n`.
pub fn recover(input: &RecoveryInput) -> Result<RecoveryResult, RecoveryError> {
    match input.m.n() {
        3 => recover_n3(input),
        n if n >= 4 => recover_general(input),
        n => Err(RecoveryError::UnsupportedDimension(n)),
    }
}
