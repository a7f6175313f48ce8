//! The determinantal matrices G_d, B_d and W_{n,d}, their minors and the
//! membership tests they give, plus the divisor-class pairing on the blown-up
//! surface.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{determinant_rational, rank_rational};
use crate::moments::{GaussianParams, MomentError, MomentVector};
use crate::polyring::{binomial, multi_indices, var_list, MultiIndex, Polynomial, Rationals};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetError {
    #[error("need d >= {min}, got {got}")]
    OrderTooSmall { min: u32, got: u32 },
    #[error("need n >= 1")]
    ZeroDimension,
    #[error("point is not on the line m_0 = ... = m_(d-2) = 0 with (m_(d-1), m_d) != 0")]
    PointNotOnLine,
    #[error("point has {got} coordinates, expected {expected}")]
    PointLength { expected: usize, got: usize },
    #[error("moment vector has n = {n}, d = {d}; need n = {want_n}, d >= {want_d}")]
    MomentShape { n: usize, d: u32, want_n: usize, want_d: u32 },
    #[error("divisor classes have different basis lengths ({0} and {1})")]
    BasisMismatch(usize, usize),
    #[error("coefficient c_{0} must be positive")]
    NonPositiveCoefficient(usize),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

/// Matrix of polynomials of degree at most one in a shared variable list.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMatrix {
    rows: usize,
    cols: usize,
    vars: Arc<[String]>,
    entries: Vec<Polynomial<Rationals>>,
}

impl LinearMatrix {
    fn from_fn(rows: usize, cols: usize, vars: Arc<[String]>, f: impl Fn(usize, usize) -> Polynomial<Rationals>) -> Self {
        let entries: Vec<_> = (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).map(|(r, c)| f(r, c)).collect();
        debug_assert!(entries.iter().all(|e| e.total_degree().unwrap_or(0) <= 1));
        LinearMatrix { rows, cols, vars, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    pub fn get(&self, r: usize, c: usize) -> &Polynomial<Rationals> {
        &self.entries[r * self.cols + c]
    }

    pub fn is_linear(&self) -> bool {
        self.entries.iter().all(|e| e.total_degree().unwrap_or(0) <= 1)
    }

    pub fn evaluate(&self, point: &[BigRational]) -> Result<Vec<Vec<BigRational>>, DetError> {
        if point.len() != self.vars.len() {
            return Err(DetError::PointLength { expected: self.vars.len(), got: point.len() });
        }
        Ok((0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).evaluate(point).expect("length checked")).collect())
            .collect())
    }

    /// Determinant of the square submatrix on the given rows and columns.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Polynomial<Rationals> {
        assert_eq!(rows.len(), cols.len(), "minor must be square");
        let sub: Vec<Vec<&Polynomial<Rationals>>> =
            rows.iter().map(|&r| cols.iter().map(|&c| self.get(r, c)).collect()).collect();
        poly_determinant(&sub, &self.vars)
    }

    /// One line per row, entries in canonical text form.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            let line: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

/// Laplace expansion along rows, memoized on the set of used columns; cheap
/// for banded and small matrices.
fn poly_determinant(m: &[Vec<&Polynomial<Rationals>>], vars: &Arc<[String]>) -> Polynomial<Rationals> {
    let n = m.len();
    assert!(n <= 64, "determinant too large for the expansion");
    fn go(
        m: &[Vec<&Polynomial<Rationals>>],
        used: u64,
        vars: &Arc<[String]>,
        memo: &mut HashMap<u64, Polynomial<Rationals>>,
    ) -> Polynomial<Rationals> {
        let row = used.count_ones() as usize;
        if row == m.len() {
            return Polynomial::one(Rationals, vars.clone());
        }
        if let Some(p) = memo.get(&used) {
            return p.clone();
        }
        let mut acc = Polynomial::zero(Rationals, vars.clone());
        let mut sign_pos = true;
        for c in 0..m.len() {
            if used & (1 << c) != 0 {
                continue;
            }
            let e = m[row][c];
            if !e.is_zero() {
                let rest = go(m, used | (1 << c), vars, memo);
                let term = e.mul(&rest).expect("shared variables");
                acc = if sign_pos { acc.add(&term) } else { acc.sub(&term) }.expect("shared variables");
            }
            sign_pos = !sign_pos;
        }
        memo.insert(used, acc.clone());
        acc
    }
    go(m, 0, vars, &mut HashMap::new())
}

fn moment_vars(d: u32) -> Arc<[String]> {
    var_list(&(0..=d).map(|i| format!("m{i}")).collect::<Vec<_>>())
}

fn check_order(d: u32, min: u32) -> Result<(), DetError> {
    if d < min {
        return Err(DetError::OrderTooSmall { min, got: d });
    }
    Ok(())
}

/// The 3 x d matrix with rows `(j m_{j-1})`, `(m_j)`, `(m_{j+1})`, `j = 0..d-1`.
pub fn build_gd(d: u32) -> Result<LinearMatrix, DetError> {
    check_order(d, 3)?;
    let vars = moment_vars(d);
    let v = vars.clone();
    Ok(LinearMatrix::from_fn(3, d as usize, vars, move |r, c| {
        let var = |i: usize| Polynomial::variable(Rationals, v.clone(), i);
        match r {
            0 if c == 0 => Polynomial::zero(Rationals, v.clone()),
            0 => var(c - 1).scale(&BigRational::from_integer((c as i64).into())),
            1 => var(c),
            _ => var(c + 1),
        }
    }))
}

/// Column triples `i < j < k` of G_d, in lex order.
pub fn gd_column_triples(d: u32) -> Vec<[usize; 3]> {
    let d = d as usize;
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            for k in j + 1..d {
                out.push([i, j, k]);
            }
        }
    }
    out
}

/// All `binom(d, 3)` maximal minors of G_d, in `gd_column_triples` order.
pub fn gd_minors(d: u32) -> Result<Vec<Polynomial<Rationals>>, DetError> {
    let g = build_gd(d)?;
    Ok(gd_column_triples(d).iter().map(|t| g.minor(&[0, 1, 2], t)).collect())
}

fn det3(a: &[[BigRational; 3]; 3]) -> BigRational {
    &a[0][0] * (&a[1][1] * &a[2][2] - &a[1][2] * &a[2][1]) - &a[0][1] * (&a[1][0] * &a[2][2] - &a[1][2] * &a[2][0])
        + &a[0][2] * (&a[1][0] * &a[2][1] - &a[1][1] * &a[2][0])
}

/// Values of every G_d minor at `m = (m_0, .., m_d)`.
pub fn gd_minor_values(m: &[BigRational]) -> Result<Vec<BigRational>, DetError> {
    let d = m.len().checked_sub(1).ok_or(DetError::OrderTooSmall { min: 3, got: 0 })? as u32;
    check_order(d, 3)?;
    let col = |j: usize| -> [BigRational; 3] {
        let top = if j == 0 { BigRational::zero() } else { &m[j - 1] * BigRational::from_integer((j as i64).into()) };
        [top, m[j].clone(), m[j + 1].clone()]
    };
    Ok(gd_column_triples(d)
        .iter()
        .map(|t| {
            let cols = t.map(col);
            let a = [
                [cols[0][0].clone(), cols[1][0].clone(), cols[2][0].clone()],
                [cols[0][1].clone(), cols[1][1].clone(), cols[2][1].clone()],
                [cols[0][2].clone(), cols[1][2].clone(), cols[2][2].clone()],
            ];
            det3(&a)
        })
        .collect())
}

/// First nonvanishing G_d minor of a univariate moment vector, if any.
pub fn gd_witness(m: &MomentVector) -> Result<Option<([usize; 3], BigRational)>, DetError> {
    if m.n() != 1 {
        return Err(DetError::MomentShape { n: m.n(), d: m.d(), want_n: 1, want_d: 3 });
    }
    let vals = gd_minor_values(&m.to_vec())?;
    Ok(gd_column_triples(m.d()).into_iter().zip(vals).find(|(_, v)| !v.is_zero()))
}

/// Rank of the Jacobian of the G_d minors at a point of `P^d`.
pub fn gd_jacobian_rank(d: u32, point: &[BigRational]) -> Result<usize, DetError> {
    check_order(d, 3)?;
    if point.len() != d as usize + 1 {
        return Err(DetError::PointLength { expected: d as usize + 1, got: point.len() });
    }
    let minors = gd_minors(d)?;
    let jac: Vec<Vec<BigRational>> = minors
        .iter()
        .map(|f| (0..=d as usize).map(|i| f.differentiate_index(i).evaluate(point).expect("length checked")).collect())
        .collect();
    Ok(rank_rational(&jac))
}

/// Jacobian rank at a point of the line `m_0 = .. = m_{d-2} = 0`.
pub fn singular_locus_rank(d: u32, point: &[BigRational]) -> Result<usize, DetError> {
    check_order(d, 3)?;
    if point.len() != d as usize + 1 {
        return Err(DetError::PointLength { expected: d as usize + 1, got: point.len() });
    }
    let on_line = point[..d as usize - 1].iter().all(Zero::is_zero)
        && !(point[d as usize - 1].is_zero() && point[d as usize].is_zero());
    if !on_line {
        return Err(DetError::PointNotOnLine);
    }
    gd_jacobian_rank(d, point)
}

/// The d x (d+1) Hilbert-Burch matrix: `y` on the diagonal, `z` above it and
/// `i x` below it in row `i`.
pub fn build_hilbert_burch(d: u32) -> Result<LinearMatrix, DetError> {
    check_order(d, 2)?;
    let vars = var_list(&["x", "y", "z"]);
    let v = vars.clone();
    Ok(LinearMatrix::from_fn(d as usize, d as usize + 1, vars, move |r, c| {
        let var = |i: usize| Polynomial::variable(Rationals, v.clone(), i);
        if c == r {
            var(1)
        } else if c == r + 1 {
            var(2)
        } else if c + 1 == r {
            var(0).scale(&BigRational::from_integer((r as i64).into()))
        } else {
            Polynomial::zero(Rationals, v.clone())
        }
    }))
}

/// The maximal minors `b_{d,0..d}` of B_d; `b_{d,i}` deletes column `i` and is
/// signed so that `y^i z^(d-i)` has coefficient one.
pub fn hb_minors(d: u32) -> Result<Vec<Polynomial<Rationals>>, DetError> {
    let b = build_hilbert_burch(d)?;
    let rows: Vec<usize> = (0..d as usize).collect();
    Ok((0..=d as usize)
        .map(|i| {
            let cols: Vec<usize> = (0..=d as usize).filter(|&c| c != i).collect();
            let minor = b.minor(&rows, &cols);
            let lead = minor.coeff_of(&[0, i as u32, d - i as u32]);
            assert!(lead == BigRational::one() || lead == -BigRational::one(), "unexpected leading coefficient {lead}");
            if lead.is_one() {
                minor
            } else {
                minor.neg()
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HbStructuralReport {
    pub d: u32,
    /// No monomial occurs in two of the `b_{d,i}`.
    pub monomials_disjoint: bool,
    /// `y^2` divides none of the `b_{d,i}`.
    pub no_y_squared_factor: bool,
    /// At `x = 1`, the lowest-degree part of `b_{d,2j}` is a multiple of
    /// `z^(d-j)` and that of `b_{d,2j+1}` a multiple of `y z^(d-j-1)`.
    pub lowest_terms_match: bool,
}

impl HbStructuralReport {
    pub fn all_true(&self) -> bool {
        self.monomials_disjoint && self.no_y_squared_factor && self.lowest_terms_match
    }
}

/// Expected lowest term `(y exponent, z exponent)` of `b_{d,i}` at `p = (1:0:0)`.
pub fn expected_lowest_term(d: u32, i: u32) -> (u32, u32) {
    let j = i / 2;
    if i % 2 == 0 {
        (0, d - j)
    } else {
        (1, d - j - 1)
    }
}

pub fn hb_structural_checks(d: u32) -> Result<HbStructuralReport, DetError> {
    check_order(d, 3)?;
    let b = hb_minors(d)?;
    let mut seen = std::collections::HashSet::new();
    let monomials_disjoint = b.iter().all(|p| p.terms().all(|(m, _)| seen.insert(m.clone())));
    let no_y_squared_factor = b.iter().all(|p| p.terms().any(|(m, _)| m.get(1) < 2));
    let lowest_terms_match = b.iter().enumerate().all(|(i, p)| {
        // degree in (y, z) after setting x = 1
        let low = p.terms().map(|(m, _)| m.get(1) + m.get(2)).min();
        let Some(low) = low else { return false };
        let mut lowest: HashMap<(u32, u32), BigRational> = HashMap::new();
        for (m, c) in p.terms().filter(|(m, _)| m.get(1) + m.get(2) == low) {
            *lowest.entry((m.get(1), m.get(2))).or_insert_with(BigRational::zero) += c;
        }
        lowest.retain(|_, c| !c.is_zero());
        lowest.len() == 1 && lowest.contains_key(&expected_lowest_term(d, i as u32))
    });
    Ok(HbStructuralReport { d, monomials_disjoint, no_y_squared_factor, lowest_terms_match })
}

/// Variable name of the moment `m_u` in symbolic Willink matrices.
pub fn moment_var_name(u: &MultiIndex) -> String {
    format!("m{}", u.label())
}

/// Rows `u` (|u| <= d-1) of W_{n,d}, in graded-lex order.
pub fn willink_rows(n: usize, d: u32) -> Vec<MultiIndex> {
    multi_indices(n, d - 1)
}

/// Row `u` of W_{n,d}: `(m_u, m_{u+e_1}, .., m_{u+e_n}, u_1 m_{u-e_1}, .., u_n m_{u-e_n})`,
/// built from a lookup that is never asked for an index outside `|u| <= d`.
fn willink_row<T>(u: &MultiIndex, n: usize, zero: &T, mut get: impl FnMut(&MultiIndex) -> T, scale: impl Fn(T, u32) -> T) -> Vec<T>
where
    T: Clone,
{
    let mut row = Vec::with_capacity(2 * n + 1);
    row.push(get(u));
    for i in 0..n {
        row.push(get(&u.plus_unit(i)));
    }
    for i in 0..n {
        row.push(match u.minus_unit(i) {
            Some(v) => scale(get(&v), u.get(i)),
            None => zero.clone(),
        });
    }
    row
}

/// W_{n,d} with symbolic entries in the variables `m<label>` for `|u| <= d`.
pub fn build_willink(n: usize, d: u32) -> Result<LinearMatrix, DetError> {
    if n == 0 {
        return Err(DetError::ZeroDimension);
    }
    check_order(d, 2)?;
    let all = multi_indices(n, d);
    let vars = var_list(&all.iter().map(moment_var_name).collect::<Vec<_>>());
    let pos: HashMap<&MultiIndex, usize> = all.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let rows = willink_rows(n, d);
    let zero = Polynomial::zero(Rationals, vars.clone());
    let mut entries = Vec::new();
    for u in &rows {
        entries.extend(willink_row(
            u,
            n,
            &zero,
            |m| Polynomial::variable(Rationals, vars.clone(), pos[m]),
            |p, s| p.scale(&BigRational::from_integer(s.into())),
        ));
    }
    Ok(LinearMatrix { rows: rows.len(), cols: 2 * n + 1, vars, entries })
}

/// W_{n,d} filled with the moments of `m`.
pub fn willink_numeric(n: usize, d: u32, m: &MomentVector) -> Result<Vec<Vec<BigRational>>, DetError> {
    if n == 0 {
        return Err(DetError::ZeroDimension);
    }
    check_order(d, 2)?;
    if m.n() != n || m.d() < d {
        return Err(DetError::MomentShape { n: m.n(), d: m.d(), want_n: n, want_d: d });
    }
    let zero = BigRational::zero();
    Ok(willink_rows(n, d)
        .iter()
        .map(|u| {
            willink_row(u, n, &zero, |v| m.get(v).expect("order within d").clone(), |x, s| {
                x * BigRational::from_integer(s.into())
            })
        })
        .collect())
}

/// Determinant of the submatrix on rows `0, e_1, .., e_n` and columns
/// `1, n+2, .., 2n+1` (one based); equals `m_0^(n+1)`.
pub fn willink_unit_minor(n: usize, d: u32, m: &MomentVector) -> Result<BigRational, DetError> {
    let w = willink_numeric(n, d, m)?;
    let rows = willink_rows(n, d);
    let row_ids: Vec<usize> = std::iter::once(MultiIndex::zero(n))
        .chain((0..n).map(|i| MultiIndex::unit(n, i)))
        .map(|u| rows.iter().position(|r| *r == u).expect("order one rows exist for d >= 2"))
        .collect();
    let col_ids: Vec<usize> = std::iter::once(0).chain(n + 1..=2 * n).collect();
    let sub: Vec<Vec<BigRational>> =
        row_ids.iter().map(|&r| col_ids.iter().map(|&c| w[r][c].clone()).collect()).collect();
    Ok(determinant_rational(&sub))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WillinkReport {
    pub rank: usize,
    pub is_member: bool,
    /// Whether the kernel vectors built from the supplied Gaussian parameters
    /// annihilate the matrix; `None` when no parameters were supplied.
    pub kernel_ok: Option<bool>,
}

/// The kernel vectors `(mu_i, -e_i, sigma_{1i}, .., sigma_{ni})`, `i = 1..n`.
pub fn willink_kernel_basis(g: &GaussianParams) -> Vec<Vec<BigRational>> {
    let n = g.n();
    (0..n)
        .map(|i| {
            let mut v = vec![BigRational::zero(); 2 * n + 1];
            v[0] = g.mean[i].clone();
            v[1 + i] = -BigRational::one();
            for j in 0..n {
                v[n + 1 + j] = g.covariance.get(j, i).clone();
            }
            v
        })
        .collect()
}

pub fn willink_membership(
    n: usize,
    d: u32,
    m: &MomentVector,
    params: Option<&GaussianParams>,
) -> Result<WillinkReport, DetError> {
    let w = willink_numeric(n, d, m)?;
    let rank = rank_rational(&w);
    let kernel_ok = params.map(|g| {
        g.n() == n
            && willink_kernel_basis(g).iter().all(|v| {
                w.iter().all(|row| row.iter().zip(v).map(|(a, b)| a * b).sum::<BigRational>().is_zero())
            })
    });
    Ok(WillinkReport { rank, is_member: rank <= n + 1, kernel_ok })
}

/// Class in the basis `L, E_p, E_z, F_1, .., F_s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorClass {
    coeffs: Vec<i64>,
}

impl DivisorClass {
    pub fn new(coeffs: Vec<i64>) -> Self {
        assert!(coeffs.len() >= 3, "basis has at least L, E_p, E_z");
        DivisorClass { coeffs }
    }

    pub fn basis_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn s(&self) -> usize {
        self.coeffs.len() - 3
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// `L` with `s` exceptional curves `F_i`.
    pub fn line(s: usize) -> Self {
        Self::basis_vector(s, 0)
    }

    pub fn basis_vector(s: usize, i: usize) -> Self {
        let mut c = vec![0; s + 3];
        c[i] = 1;
        DivisorClass { coeffs: c }
    }
}

/// Intersection form `diag(1, -1, .., -1)`.
pub fn intersection_pairing(a: &DivisorClass, b: &DivisorClass) -> Result<i64, DetError> {
    if a.basis_len() != b.basis_len() {
        return Err(DetError::BasisMismatch(a.basis_len(), b.basis_len()));
    }
    Ok(a.coeffs.iter().zip(&b.coeffs).enumerate().map(|(i, (x, y))| if i == 0 { x * y } else { -x * y }).sum())
}

/// `d L - ceil(d/2) E_p - floor(d/2) E_z - sum c_i F_i`.
pub fn hd_class(d: u32, c: &[i64]) -> Result<DivisorClass, DetError> {
    check_order(d, 2)?;
    if let Some(i) = c.iter().position(|&x| x <= 0) {
        return Err(DetError::NonPositiveCoefficient(i + 1));
    }
    let d = d as i64;
    let mut coeffs = vec![d, -((d + 1) / 2), -(d / 2)];
    coeffs.extend(c.iter().map(|x| -x));
    Ok(DivisorClass { coeffs })
}

/// `deg G_{1,d} = binom(d, 2)`.
pub fn surface_degree(d: u32) -> u64 {
    binomial(d as u64, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::univariate_moments;
    use crate::polyring::{parse_polynomial, rat};

    #[test]
    fn gd_shape() {
        let g = build_gd(3).unwrap();
        assert_eq!(g.get(0, 0).to_string(), "0");
        assert_eq!(g.get(0, 1).to_string(), "m0");
        assert_eq!(g.get(0, 2).to_string(), "2*m1");
        assert!(g.is_linear());
        assert_eq!(gd_minors(6).unwrap().len(), 20);
        assert!(build_gd(2).is_err());
    }

    #[test]
    fn hilbert_burch_d3() {
        let b = build_hilbert_burch(3).unwrap();
        let text: Vec<String> = (0..3).map(|r| (0..4).map(|c| b.get(r, c).to_string()).collect::<Vec<_>>().join(" ")).collect();
        assert_eq!(text, ["y z 0 0", "x y z 0", "0 2*x y z"]);
    }

    #[test]
    fn hb_minor_displays() {
        let v = var_list(&["x", "y", "z"]);
        let b = hb_minors(7).unwrap();
        assert_eq!(b[0], parse_polynomial("z^7", v.clone()).unwrap());
        assert_eq!(b[1], parse_polynomial("y*z^6", v.clone()).unwrap());
        assert_eq!(b[2], parse_polynomial("y^2*z^5 - x*z^6", v.clone()).unwrap());
        assert_eq!(b[3], parse_polynomial("y^3*z^4 - 3*x*y*z^5", v.clone()).unwrap());
        assert_eq!(b[7].coeff_of(&[1, 5, 1]), rat(-21, 1));
    }

    #[test]
    fn pairing_and_class() {
        let l = DivisorClass::line(2);
        let ep = DivisorClass::basis_vector(2, 1);
        assert_eq!(intersection_pairing(&l, &l).unwrap(), 1);
        assert_eq!(intersection_pairing(&ep, &ep).unwrap(), -1);
        assert_eq!(intersection_pairing(&l, &ep).unwrap(), 0);
        let h = hd_class(7, &[2, 5]).unwrap();
        assert_eq!(h.coeffs(), &[7, -4, -3, -2, -5]);
        assert_eq!(intersection_pairing(&h, &l).unwrap(), 7);
        assert_eq!(intersection_pairing(&h, &ep).unwrap(), 4);
        assert!(hd_class(6, &[0]).is_err());
        assert!(intersection_pairing(&l, &DivisorClass::line(1)).is_err());
    }

    #[test]
    fn willink_first_row_and_unit_minor() {
        let m = univariate_moments(&rat(2, 3), &rat(5, 1), 4);
        let w = willink_numeric(1, 4, &m).unwrap();
        assert_eq!(w[0], vec![rat(1, 1), rat(2, 3), rat(0, 1)]);
        assert_eq!(willink_unit_minor(1, 4, &m).unwrap(), rat(1, 1));
    }
}
