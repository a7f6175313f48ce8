//! Gaussian and Gaussian-mixture moments, symbolic and exact, and the
//! moment/cumulant transforms.
//!
//! Moment vectors live in the affine chart `m_0 = 1` and are indexed by
//! multi-indices in graded lexicographic order.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::polyring::{
    multi_indices, parse_rational, series_exp, series_log, var_list, MultiIndex, PolyError, PolyRing, Polynomial,
    Rationals, Ring,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MomentError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weights sum to {0}, not 1")]
    WeightsNotNormalized(String),
    #[error("a mixture needs at least one component")]
    EmptyMixture,
    #[error("{0} weights given for {1} components")]
    WeightCount(usize, usize),
    #[error("moment vector is outside the chart m_0 = 1 (m_0 = {0})")]
    ChartViolation(String),
    #[error("missing entry for index {0}")]
    MissingEntry(String),
    #[error("unexpected entry for index {0}")]
    UnexpectedEntry(String),
    #[error("covariance is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("need n >= 1 and d >= {min_d}")]
    BadShape { min_d: u32 },
    #[error("json: {0}")]
    Json(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Number of Gaussian parameters `n(n+3)/2`.
pub fn param_count(n: usize) -> usize {
    n * (n + 3) / 2
}

/// Position of `sigma_ij` (`i <= j`, zero based) in the row-major upper triangle.
#[inline]
pub fn tri_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * n - i + 1) / 2 + (j - i)
}

/// Parameter names `mu1..mun, s1_1, s1_2, .., sn_n`.
pub fn theta_vars(n: usize) -> Arc<[String]> {
    let mut names: Vec<String> = (1..=n).map(|i| format!("mu{i}")).collect();
    for i in 1..=n {
        for j in i..=n {
            names.push(format!("s{i}_{j}"));
        }
    }
    var_list(&names)
}

/// Symmetric matrix stored as its upper triangle, row by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMatrix {
    n: usize,
    upper: Vec<BigRational>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, upper: vec![BigRational::zero(); n * (n + 1) / 2] }
    }

    pub fn from_upper(n: usize, upper: Vec<BigRational>) -> Result<Self, MomentError> {
        if upper.len() != n * (n + 1) / 2 {
            return Err(MomentError::DimensionMismatch { expected: n * (n + 1) / 2, got: upper.len() });
        }
        Ok(SymMatrix { n, upper })
    }

    pub fn from_full(rows: &[Vec<BigRational>]) -> Result<Self, MomentError> {
        let n = rows.len();
        let mut m = SymMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MomentError::DimensionMismatch { expected: n, got: row.len() });
            }
            for j in 0..i {
                if row[j] != rows[j][i] {
                    return Err(MomentError::NotSymmetric(j, i));
                }
            }
            for j in i..n {
                m.set(i, j, row[j].clone());
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.upper[tri_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        let k = tri_index(self.n, i, j);
        self.upper[k] = v;
    }

    pub fn upper(&self) -> &[BigRational] {
        &self.upper
    }

    pub fn to_full(&self) -> Vec<Vec<BigRational>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).clone()).collect()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianParams {
    pub mean: Vec<BigRational>,
    pub covariance: SymMatrix,
}

impl GaussianParams {
    pub fn new(mean: Vec<BigRational>, covariance: SymMatrix) -> Result<Self, MomentError> {
        if covariance.dim() != mean.len() {
            return Err(MomentError::DimensionMismatch { expected: mean.len(), got: covariance.dim() });
        }
        Ok(GaussianParams { mean, covariance })
    }

    pub fn n(&self) -> usize {
        self.mean.len()
    }

    /// Parameters in `theta_vars` order.
    pub fn theta(&self) -> Vec<BigRational> {
        self.mean.iter().chain(self.covariance.upper()).cloned().collect()
    }

    pub fn from_theta(n: usize, theta: &[BigRational]) -> Result<Self, MomentError> {
        if theta.len() != param_count(n) {
            return Err(MomentError::DimensionMismatch { expected: param_count(n), got: theta.len() });
        }
        GaussianParams::new(theta[..n].to_vec(), SymMatrix::from_upper(n, theta[n..].to_vec())?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixtureParams {
    components: Vec<GaussianParams>,
    weights: Vec<BigRational>,
}

impl MixtureParams {
    pub fn new(components: Vec<GaussianParams>, weights: Vec<BigRational>) -> Result<Self, MomentError> {
        let first = components.first().ok_or(MomentError::EmptyMixture)?;
        if weights.len() != components.len() {
            return Err(MomentError::WeightCount(weights.len(), components.len()));
        }
        for c in &components {
            if c.n() != first.n() {
                return Err(MomentError::DimensionMismatch { expected: first.n(), got: c.n() });
            }
        }
        let total: BigRational = weights.iter().sum();
        if !total.is_one() {
            return Err(MomentError::WeightsNotNormalized(total.to_string()));
        }
        Ok(MixtureParams { components, weights })
    }

    /// Builds a mixture from `k - 1` free weights; the last is `1 - sum`.
    pub fn from_free_weights(components: Vec<GaussianParams>, free: Vec<BigRational>) -> Result<Self, MomentError> {
        if free.len() + 1 != components.len() {
            return Err(MomentError::WeightCount(free.len() + 1, components.len()));
        }
        let last = BigRational::one() - free.iter().sum::<BigRational>();
        let mut weights = free;
        weights.push(last);
        MixtureParams::new(components, weights)
    }

    pub fn single(component: GaussianParams) -> Self {
        MixtureParams { components: vec![component], weights: vec![BigRational::one()] }
    }

    pub fn n(&self) -> usize {
        self.components[0].n()
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[GaussianParams] {
        &self.components
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn to_json(&self) -> Value {
        let comps: Vec<Value> = self
            .components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| {
                json!({
                    "weight": w.to_string(),
                    "mean": c.mean.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    "covariance": c.covariance.to_full().iter()
                        .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({ "components": comps })
    }

    pub fn from_json(v: &Value) -> Result<Self, MomentError> {
        let comps = v
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| MomentError::Json("missing array field `components`".into()))?;
        let mut components = Vec::new();
        let mut weights = Vec::new();
        for (i, c) in comps.iter().enumerate() {
            let field = |name: &str| {
                c.get(name).ok_or_else(|| MomentError::Json(format!("components[{i}]: missing field `{name}`")))
            };
            weights.push(rational_from_json(field("weight")?).map_err(|e| at(&format!("components[{i}].weight"), e))?);
            let mean = rational_array(field("mean")?).map_err(|e| at(&format!("components[{i}].mean"), e))?;
            let cov_rows = field("covariance")?
                .as_array()
                .ok_or_else(|| MomentError::Json(format!("components[{i}].covariance: expected an array")))?
                .iter()
                .map(rational_array)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| at(&format!("components[{i}].covariance"), e))?;
            let cov = SymMatrix::from_full(&cov_rows)?;
            components.push(GaussianParams::new(mean, cov)?);
        }
        MixtureParams::new(components, weights)
    }
}

fn at(path: &str, e: MomentError) -> MomentError {
    MomentError::Json(format!("{path}: {e}"))
}

/// Accepts `"p/q"`, `"p"`, or a JSON integer.
pub fn rational_from_json(v: &Value) -> Result<BigRational, MomentError> {
    match v {
        Value::String(s) => parse_rational(s.trim()).ok_or_else(|| MomentError::Json(format!("bad rational {s:?}"))),
        Value::Number(num) => num
            .as_i64()
            .map(|x| BigRational::from_integer(x.into()))
            .ok_or_else(|| MomentError::Json(format!("non-integer number {num}; use a \"p/q\" string"))),
        other => Err(MomentError::Json(format!("expected a rational, got {other}"))),
    }
}

fn bigint_from_json(v: &Value) -> Result<BigInt, MomentError> {
    match v {
        Value::String(s) => s.trim().parse().map_err(|_| MomentError::Json(format!("bad integer {s:?}"))),
        Value::Number(num) => num
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| MomentError::Json(format!("bad integer {num}"))),
        other => Err(MomentError::Json(format!("expected an integer, got {other}"))),
    }
}

fn rational_array(v: &Value) -> Result<Vec<BigRational>, MomentError> {
    v.as_array()
        .ok_or_else(|| MomentError::Json("expected an array".into()))?
        .iter()
        .map(rational_from_json)
        .collect()
}

/// Multi-indices of order `lo..=d` in graded-lex order, with a position lookup.
#[derive(Clone, Debug)]
pub struct MomentLayout {
    indices: Vec<MultiIndex>,
    pos: HashMap<MultiIndex, usize>,
}

impl MomentLayout {
    pub fn new(n: usize, d: u32) -> Self {
        let indices = multi_indices(n, d);
        let pos = indices.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        MomentLayout { indices, pos }
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, m: &MultiIndex) -> Option<usize> {
        self.pos.get(m).copied()
    }
}

/// Moments of a Gaussian with the given parameters over any coefficient ring,
/// aligned with `multi_indices(n, d)`.
///
/// Uses `m_{g+e_i} = mu_i m_g + sum_j sigma_ij g_j m_{g-e_j}`.
pub fn gaussian_moments_in<R: Ring>(ring: &R, layout: &MomentLayout, mean: &[R::Elem], cov_upper: &[R::Elem]) -> Vec<R::Elem> {
    let n = mean.len();
    let mut out: Vec<R::Elem> = Vec::with_capacity(layout.len());
    for beta in layout.indices() {
        if beta.order() == 0 {
            out.push(ring.one());
            continue;
        }
        let i = (0..n).find(|&i| beta.get(i) > 0).expect("nonzero index");
        let gamma = beta.minus_unit(i).expect("positive entry");
        let mut acc = ring.mul(&mean[i], &out[layout.position(&gamma).expect("lower order first")]);
        for j in 0..n {
            let gj = gamma.get(j);
            if gj == 0 {
                continue;
            }
            let s = &cov_upper[tri_index(n, i, j)];
            if ring.is_zero(s) {
                continue;
            }
            let lower = &out[layout.position(&gamma.minus_unit(j).expect("g_j > 0")).expect("present")];
            let term = ring.mul(&ring.mul(s, lower), &ring.from_int(gj as i64));
            acc = ring.add(&acc, &term);
        }
        out.push(acc);
    }
    out
}

/// Each moment `m_beta`, `|beta| <= d`, of a single Gaussian as a polynomial in
/// the parameters `theta_vars(n)`, read off the truncated generating function
/// `exp(sum t_i mu_i + 1/2 sum sigma_ij t_i t_j)`.
pub fn moment_polynomials(n: usize, d: u32) -> Result<BTreeMap<MultiIndex, Polynomial<Rationals>>, MomentError> {
    if n == 0 || d == 0 {
        return Err(MomentError::BadShape { min_d: 1 });
    }
    let params = theta_vars(n);
    let inner = PolyRing::new(Rationals, params.clone());
    let tvars = var_list(&(1..=n).map(|i| format!("t{i}")).collect::<Vec<_>>());
    let mut exponent = Vec::new();
    for i in 0..n {
        exponent.push((MultiIndex::unit(n, i), Polynomial::variable(Rationals, params.clone(), i)));
    }
    for i in 0..n {
        for j in i..n {
            let s = Polynomial::variable(Rationals, params.clone(), n + tri_index(n, i, j));
            let idx = MultiIndex::unit(n, i).plus_unit(j);
            // the symmetric sum counts off-diagonal pairs twice
            let coeff = if i == j { s.scale(&BigRational::new(1.into(), 2.into())) } else { s };
            exponent.push((idx, coeff));
        }
    }
    let series = Polynomial::from_terms(inner, tvars, exponent).truncated(d);
    let e = series_exp(&series)?;
    let mut out = BTreeMap::new();
    for beta in multi_indices(n, d) {
        let c = e.coefficient(&beta);
        let f = BigRational::from_integer(beta.factorial());
        out.insert(beta, c.scale(&f));
    }
    Ok(out)
}

/// Exact moments `m_beta`, `|beta| <= d`, in the chart `m_0 = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentVector {
    n: usize,
    d: u32,
    values: BTreeMap<MultiIndex, BigRational>,
}

/// Checks that the keys are exactly the indices of order `lo..=d`.
fn check_keys(n: usize, d: u32, lo: u32, values: &BTreeMap<MultiIndex, BigRational>) -> Result<(), MomentError> {
    for m in values.keys() {
        if m.len() != n || m.order() > d || m.order() < lo {
            return Err(MomentError::UnexpectedEntry(m.label()));
        }
    }
    for m in multi_indices(n, d).into_iter().filter(|m| m.order() >= lo) {
        if !values.contains_key(&m) {
            return Err(MomentError::MissingEntry(m.label()));
        }
    }
    Ok(())
}

impl MomentVector {
    pub fn new(n: usize, d: u32, values: BTreeMap<MultiIndex, BigRational>) -> Result<Self, MomentError> {
        if n == 0 {
            return Err(MomentError::BadShape { min_d: 0 });
        }
        check_keys(n, d, 0, &values)?;
        let m0 = &values[&MultiIndex::zero(n)];
        if !m0.is_one() {
            return Err(MomentError::ChartViolation(m0.to_string()));
        }
        Ok(MomentVector { n, d, values })
    }

    /// Values aligned with `multi_indices(n, d)`.
    pub fn from_vec(n: usize, d: u32, values: Vec<BigRational>) -> Result<Self, MomentError> {
        let idx = multi_indices(n, d);
        if idx.len() != values.len() {
            return Err(MomentError::DimensionMismatch { expected: idx.len(), got: values.len() });
        }
        MomentVector::new(n, d, idx.into_iter().zip(values).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn get(&self, m: &MultiIndex) -> Option<&BigRational> {
        self.values.get(m)
    }

    /// Moment at the exponent vector `exps`; panics when out of range.
    pub fn at(&self, exps: &[u32]) -> &BigRational {
        self.values
            .get(&MultiIndex::new(exps.to_vec()))
            .unwrap_or_else(|| panic!("no moment {exps:?} in a vector with n = {}, d = {}", self.n, self.d))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &BigRational)> {
        self.values.iter()
    }

    pub fn to_vec(&self) -> Vec<BigRational> {
        self.values.values().cloned().collect()
    }

    /// Restriction to moments of order `<= d`.
    pub fn truncate(&self, d: u32) -> MomentVector {
        let values = self.values.iter().filter(|(m, _)| m.order() <= d).map(|(m, v)| (m.clone(), v.clone())).collect();
        MomentVector { n: self.n, d: d.min(self.d), values }
    }

    pub fn to_json(&self) -> Value {
        entries_to_json(self.n, self.d, &self.values)
    }

    pub fn from_json(v: &Value) -> Result<Self, MomentError> {
        let (n, d, values) = entries_from_json(v)?;
        MomentVector::new(n, d, values)
    }
}

/// Cumulants `k_beta`, `1 <= |beta| <= d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulantVector {
    n: usize,
    d: u32,
    values: BTreeMap<MultiIndex, BigRational>,
}

impl CumulantVector {
    pub fn new(n: usize, d: u32, values: BTreeMap<MultiIndex, BigRational>) -> Result<Self, MomentError> {
        if n == 0 {
            return Err(MomentError::BadShape { min_d: 0 });
        }
        check_keys(n, d, 1, &values)?;
        Ok(CumulantVector { n, d, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn get(&self, m: &MultiIndex) -> Option<&BigRational> {
        self.values.get(m)
    }

    pub fn at(&self, exps: &[u32]) -> &BigRational {
        &self.values[&MultiIndex::new(exps.to_vec())]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &BigRational)> {
        self.values.iter()
    }

    /// First cumulant of order 3 or more that is nonzero, if any.
    pub fn first_nonzero_higher(&self) -> Option<(&MultiIndex, &BigRational)> {
        self.values.iter().find(|(m, v)| m.order() >= 3 && !v.is_zero())
    }

    pub fn to_json(&self) -> Value {
        entries_to_json(self.n, self.d, &self.values)
    }

    pub fn from_json(v: &Value) -> Result<Self, MomentError> {
        let (n, d, values) = entries_from_json(v)?;
        CumulantVector::new(n, d, values)
    }
}

fn entries_to_json(n: usize, d: u32, values: &BTreeMap<MultiIndex, BigRational>) -> Value {
    let vals: Vec<Value> = values
        .iter()
        .map(|(m, v)| json!({ "idx": m.exps(), "num": v.numer().to_string(), "den": v.denom().to_string() }))
        .collect();
    json!({ "n": n, "d": d, "values": vals })
}

type Entries = (usize, u32, BTreeMap<MultiIndex, BigRational>);

fn entries_from_json(v: &Value) -> Result<Entries, MomentError> {
    let uint = |name: &str| {
        v.get(name)
            .and_then(Value::as_u64)
            .ok_or_else(|| MomentError::Json(format!("missing or non-integer field `{name}`")))
    };
    let n = uint("n")? as usize;
    let d = u32::try_from(uint("d")?).map_err(|_| MomentError::Json("`d` out of range".into()))?;
    let list = v
        .get("values")
        .and_then(Value::as_array)
        .ok_or_else(|| MomentError::Json("missing array field `values`".into()))?;
    let mut values = BTreeMap::new();
    for (i, e) in list.iter().enumerate() {
        let idx = e
            .get("idx")
            .and_then(Value::as_array)
            .ok_or_else(|| MomentError::Json(format!("values[{i}]: missing `idx`")))?
            .iter()
            .map(|x| x.as_u64().and_then(|x| u32::try_from(x).ok()))
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| MomentError::Json(format!("values[{i}].idx: expected non-negative integers")))?;
        if idx.len() != n {
            return Err(MomentError::Json(format!("values[{i}].idx: expected {n} entries, got {}", idx.len())));
        }
        let num = bigint_from_json(e.get("num").unwrap_or(&Value::Null)).map_err(|er| at(&format!("values[{i}].num"), er))?;
        let den = match e.get("den") {
            None => BigInt::one(),
            Some(x) => bigint_from_json(x).map_err(|er| at(&format!("values[{i}].den"), er))?,
        };
        if den.is_zero() {
            return Err(MomentError::Json(format!("values[{i}].den: zero denominator")));
        }
        let m = MultiIndex::new(idx);
        if values.insert(m.clone(), BigRational::new(num, den)).is_some() {
            return Err(MomentError::Json(format!("values[{i}]: duplicate index {}", m.label())));
        }
    }
    Ok((n, d, values))
}

/// Moments of a single Gaussian.
pub fn gaussian_moments(params: &GaussianParams, d: u32) -> MomentVector {
    let layout = MomentLayout::new(params.n(), d);
    let vals = gaussian_moments_in(&Rationals, &layout, &params.mean, params.covariance.upper());
    MomentVector::from_vec(params.n(), d, vals).expect("well-formed by construction")
}

/// `sum_l lambda_l * m(theta_l)`.
pub fn mixture_moments(params: &MixtureParams, d: u32) -> MomentVector {
    let n = params.n();
    let layout = MomentLayout::new(n, d);
    let mut acc = vec![BigRational::zero(); layout.len()];
    for (c, w) in params.components().iter().zip(params.weights()) {
        let m = gaussian_moments_in(&Rationals, &layout, &c.mean, c.covariance.upper());
        for (a, v) in acc.iter_mut().zip(m) {
            *a += w * v;
        }
    }
    MomentVector::from_vec(n, d, acc).expect("weights sum to one")
}

/// Moments of `N(mu, var)` by `m_i = mu m_{i-1} + (i-1) var m_{i-2}`.
pub fn univariate_moments(mu: &BigRational, var: &BigRational, d: u32) -> MomentVector {
    let mut m: Vec<BigRational> = Vec::with_capacity(d as usize + 1);
    m.push(BigRational::one());
    for i in 1..=d as usize {
        let mut v = mu * &m[i - 1];
        if i >= 2 {
            v += var * &m[i - 2] * BigRational::from_integer((i as i64 - 1).into());
        }
        m.push(v);
    }
    MomentVector::from_vec(1, d, m).expect("univariate shape")
}

fn tvars(n: usize) -> Arc<[String]> {
    var_list(&(1..=n).map(|i| format!("t{i}")).collect::<Vec<_>>())
}

/// `k_beta = beta! [t^beta] log(sum m_beta t^beta / beta!)`.
pub fn moments_to_cumulants(m: &MomentVector) -> Result<CumulantVector, MomentError> {
    let series = Polynomial::from_terms(
        Rationals,
        tvars(m.n),
        m.values.iter().map(|(b, v)| (b.clone(), v / BigRational::from_integer(b.factorial()))),
    )
    .truncated(m.d);
    let k = series_log(&series)?;
    let values = m
        .values
        .keys()
        .filter(|b| b.order() > 0)
        .map(|b| (b.clone(), k.coefficient(b) * BigRational::from_integer(b.factorial())))
        .collect();
    CumulantVector::new(m.n, m.d, values)
}

/// Inverse of `moments_to_cumulants`.
pub fn cumulants_to_moments(c: &CumulantVector) -> MomentVector {
    let series = Polynomial::from_terms(
        Rationals,
        tvars(c.n),
        c.values.iter().map(|(b, v)| (b.clone(), v / BigRational::from_integer(b.factorial()))),
    )
    .truncated(c.d);
    let e = series_exp(&series).expect("zero constant term over the rationals");
    let values = multi_indices(c.n, c.d)
        .into_iter()
        .map(|b| {
            let v = e.coefficient(&b) * BigRational::from_integer(b.factorial());
            (b, v)
        })
        .collect();
    MomentVector::new(c.n, c.d, values).expect("exp has constant term one")
}
