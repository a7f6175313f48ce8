//! Dimensions of secant varieties of Gaussian moment varieties by generic
//! Jacobian rank over a prime field, and the closed-form dimension and degree
//! formulas.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::ModMatrix;
use crate::moments::{gaussian_moments_in, moment_polynomials, param_count, MomentError, MomentLayout};
use crate::polyring::{binomial, PolyError, PrimeField, Ring};

/// Name of the generator behind every random point.
pub const PRNG_NAME: &str = "ChaCha20 (rand_chacha 0.3)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SecantError {
    #[error("need n >= 1, d >= 1, k >= 1 (got n = {n}, d = {d}, k = {k})")]
    InvalidProblem { n: usize, d: u32, k: usize },
    #[error("prime {prime} does not exceed {d}!")]
    PrimeTooSmall { prime: u64, d: u32 },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("internal error: rank {rank} exceeds the expected dimension {expected}")]
    RankExceedsExpected { rank: usize, expected: usize },
    #[error("{formula} is not integral at {args}")]
    NonIntegral { formula: &'static str, args: String },
    #[error("{formula} needs {requirement}")]
    OutOfDomain { formula: &'static str, requirement: &'static str },
    #[error("moment coefficient does not fit in 64 bits")]
    CoefficientOverflow,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SecantProblem {
    pub n: usize,
    pub d: u32,
    pub k: usize,
}

impl SecantProblem {
    pub fn new(n: usize, d: u32, k: usize) -> Result<Self, SecantError> {
        if n == 0 || d == 0 || k == 0 {
            return Err(SecantError::InvalidProblem { n, d, k });
        }
        Ok(SecantProblem { n, d, k })
    }

    /// `N = binom(n+d, d) - 1`.
    pub fn ambient(&self) -> usize {
        binomial((self.n as u64) + self.d as u64, self.d as u64) as usize - 1
    }

    /// `par = k n(n+3)/2 + k - 1`.
    pub fn params(&self) -> usize {
        self.k * param_count(self.n) + self.k - 1
    }

    pub fn expected(&self) -> usize {
        self.ambient().min(self.params())
    }
}

pub fn expected_dimension(p: &SecantProblem) -> usize {
    p.expected()
}

/// One line of a defectivity table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectRow {
    pub n: usize,
    pub k: usize,
    pub d: u32,
    pub par: usize,
    #[serde(rename = "N")]
    pub ambient: usize,
    pub exp: usize,
    pub dim: usize,
    pub delta: usize,
    pub par_minus_dim: usize,
}

impl DefectRow {
    pub fn new(p: &SecantProblem, dim: usize) -> Self {
        let exp = p.expected();
        DefectRow {
            n: p.n,
            k: p.k,
            d: p.d,
            par: p.params(),
            ambient: p.ambient(),
            exp,
            dim,
            delta: exp - dim,
            par_minus_dim: p.params() - dim,
        }
    }

    pub fn is_defective(&self) -> bool {
        self.delta > 0
    }

    pub fn fills(&self) -> bool {
        self.dim == self.ambient
    }

    pub const CSV_HEADER: &'static str = "n,k,d,par,N,exp,dim,delta,par_minus_dim";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n, self.k, self.d, self.par, self.ambient, self.exp, self.dim, self.delta, self.par_minus_dim
        )
    }
}

/// How a generic rank was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCertificate {
    pub prime: u64,
    pub seed: u64,
    /// Trials requested; fewer are run once a rank reaches the expected dimension.
    pub trials: usize,
    pub ranks: Vec<usize>,
    pub rank: usize,
    /// Degree bound `rank * d` on the minor certifying the rank; a single trial
    /// misses the generic rank with probability at most `degree_bound / prime`.
    pub degree_bound: u64,
}

impl fmt::Display for RankCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rank {} = max{:?} over {} trial(s) mod {} (seed {}); per-trial failure <= {}/{}",
            self.rank,
            self.ranks,
            self.ranks.len(),
            self.prime,
            self.seed,
            self.degree_bound,
            self.prime
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankConfig {
    pub prime: u64,
    pub seed: u64,
    pub trials: usize,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig { prime: crate::polyring::DEFAULT_PRIME, seed: 0, trials: 3 }
    }
}

/// `d!` must be below the prime.
pub fn check_prime_for_order(prime: u64, d: u32) -> Result<(), SecantError> {
    let mut f: u64 = 1;
    for i in 2..=d as u64 {
        f = match f.checked_mul(i) {
            Some(v) if v < prime => v,
            _ => return Err(SecantError::PrimeTooSmall { prime, d }),
        };
    }
    if f >= prime {
        return Err(SecantError::PrimeTooSmall { prime, d });
    }
    Ok(())
}

#[derive(Clone, Debug)]
struct Term {
    coef: i64,
    factors: Vec<(u16, u8)>,
}

/// Nonzero partial derivative `d m_row / d theta_col` of a single Gaussian.
#[derive(Clone, Debug)]
struct Partial {
    row: usize,
    col: usize,
    terms: Vec<Term>,
}

/// Symbolic single-component partials for a fixed `(n, d)`, reused for every
/// `k` and every random point.
#[derive(Clone, Debug)]
pub struct JacobianTemplate {
    n: usize,
    d: u32,
    layout: MomentLayout,
    partials: Vec<Partial>,
}

impl JacobianTemplate {
    pub fn new(n: usize, d: u32) -> Result<Self, SecantError> {
        SecantProblem::new(n, d, 1)?;
        let polys = moment_polynomials(n, d)?;
        let layout = MomentLayout::new(n, d);
        let mut partials = Vec::new();
        for (row, (beta, m)) in polys.iter().enumerate() {
            debug_assert_eq!(layout.indices()[row], *beta);
            if beta.order() == 0 {
                continue;
            }
            for col in 0..param_count(n) {
                let dm = m.differentiate_index(col);
                if dm.is_zero() {
                    continue;
                }
                let terms = dm
                    .terms()
                    .map(|(mono, c)| {
                        if !c.is_integer() {
                            return Err(SecantError::CoefficientOverflow);
                        }
                        let coef = c.numer().to_i64().ok_or(SecantError::CoefficientOverflow)?;
                        let factors = mono
                            .exps()
                            .iter()
                            .enumerate()
                            .filter(|(_, &e)| e > 0)
                            .map(|(v, &e)| (v as u16, e as u8))
                            .collect();
                        Ok(Term { coef, factors })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                partials.push(Partial { row, col, terms });
            }
        }
        Ok(JacobianTemplate { n, d, layout, partials })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Rows of the Jacobian: moments of order `1..=d`.
    pub fn rows(&self) -> usize {
        self.layout.len() - 1
    }

    /// `(row, col, value)` for every nonzero single-component partial at `theta`.
    fn eval_partials(&self, field: &PrimeField, theta: &[u64]) -> Vec<(usize, usize, u64)> {
        let d = self.d as usize;
        let powers: Vec<Vec<u64>> = theta
            .iter()
            .map(|&x| {
                let mut p = Vec::with_capacity(d + 1);
                p.push(1u64);
                for e in 1..=d {
                    p.push(field.mul_mod(p[e - 1], x));
                }
                p
            })
            .collect();
        self.partials
            .iter()
            .map(|pd| {
                let mut acc = 0u64;
                for t in &pd.terms {
                    let mut v = field.from_int(t.coef);
                    for &(var, e) in &t.factors {
                        v = field.mul_mod(v, powers[var as usize][e as usize]);
                    }
                    acc = field.add_mod(acc, v);
                }
                (pd.row - 1, pd.col, acc)
            })
            .collect()
    }

    fn moments(&self, field: &PrimeField, theta: &[u64]) -> Vec<u64> {
        gaussian_moments_in(field, &self.layout, &theta[..self.n], &theta[self.n..])
    }
}

/// A point of the parameter space over `F_p`: `k` parameter vectors in
/// `theta_vars` order and `k - 1` free weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMixturePoint {
    pub thetas: Vec<Vec<u64>>,
    pub free_weights: Vec<u64>,
}

impl ModMixturePoint {
    /// Uniform point drawn from a stream determined by `(seed, n, d, k, trial)`.
    pub fn random(p: &SecantProblem, field: &PrimeField, seed: u64, trial: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&(p.n as u64).to_le_bytes());
        key[16..24].copy_from_slice(&((p.d as u64) << 32 | p.k as u64).to_le_bytes());
        key[24..].copy_from_slice(&trial.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        let q = field.modulus();
        let thetas = (0..p.k).map(|_| (0..param_count(p.n)).map(|_| rng.gen_range(0..q)).collect()).collect();
        let free_weights = (1..p.k).map(|_| rng.gen_range(0..q)).collect();
        ModMixturePoint { thetas, free_weights }
    }

    fn weights(&self, field: &PrimeField) -> Vec<u64> {
        let mut w = self.free_weights.clone();
        let s = w.iter().fold(0, |a, &b| field.add_mod(a, b));
        w.push(field.sub_mod(1, s));
        w
    }
}

/// The `N x par` Jacobian of the mixture parametrization at `point`.
///
/// Columns: component blocks `lambda_l * dm/dtheta(theta_l)`, then the free
/// weights `m(theta_l) - m(theta_k)`.
pub fn secant_jacobian_with(
    template: &JacobianTemplate,
    k: usize,
    field: &PrimeField,
    point: &ModMixturePoint,
) -> Result<ModMatrix, SecantError> {
    let p = SecantProblem::new(template.n, template.d, k)?;
    check_prime_for_order(field.modulus(), p.d)?;
    assert_eq!(point.thetas.len(), k, "point has the wrong number of components");
    let m = param_count(p.n);
    let weights = point.weights(field);
    let mut jac = ModMatrix::zeros(template.rows(), p.params());
    let last_moments = template.moments(field, &point.thetas[k - 1]);
    for (l, theta) in point.thetas.iter().enumerate() {
        assert_eq!(theta.len(), m, "parameter vector has the wrong length");
        let lam = field.to_mont(weights[l]);
        for (row, col, v) in template.eval_partials(field, theta) {
            jac.set(row, l * m + col, field.mont_mul(lam, v));
        }
        if l + 1 < k {
            let ml = template.moments(field, theta);
            for row in 0..template.rows() {
                jac.set(row, k * m + l, field.sub_mod(ml[row + 1], last_moments[row + 1]));
            }
        }
    }
    Ok(jac)
}

pub fn secant_jacobian(p: &SecantProblem, field: &PrimeField, point: &ModMixturePoint) -> Result<ModMatrix, SecantError> {
    secant_jacobian_with(&JacobianTemplate::new(p.n, p.d)?, p.k, field, point)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecantDimension {
    pub row: DefectRow,
    pub cert: RankCertificate,
}

pub fn secant_dimension_with(
    template: &JacobianTemplate,
    k: usize,
    cfg: &RankConfig,
) -> Result<SecantDimension, SecantError> {
    let p = SecantProblem::new(template.n, template.d, k)?;
    if cfg.trials == 0 {
        return Err(SecantError::NoTrials);
    }
    let field = PrimeField::new(cfg.prime)?;
    check_prime_for_order(cfg.prime, p.d)?;
    let expected = p.expected();
    let mut ranks = Vec::new();
    for trial in 0..cfg.trials {
        let point = ModMixturePoint::random(&p, &field, cfg.seed, trial as u64);
        let r = secant_jacobian_with(template, k, &field, &point)?.rank(&field);
        if r > expected {
            return Err(SecantError::RankExceedsExpected { rank: r, expected });
        }
        ranks.push(r);
        if r == expected {
            break;
        }
    }
    let rank = *ranks.iter().max().expect("at least one trial");
    let cert = RankCertificate {
        prime: cfg.prime,
        seed: cfg.seed,
        trials: cfg.trials,
        ranks,
        rank,
        degree_bound: rank as u64 * p.d as u64,
    };
    Ok(SecantDimension { row: DefectRow::new(&p, rank), cert })
}

pub fn secant_dimension(p: &SecantProblem, cfg: &RankConfig) -> Result<SecantDimension, SecantError> {
    secant_dimension_with(&JacobianTemplate::new(p.n, p.d)?, p.k, cfg)
}

/// Census over all `(n, k)` in the given lists at fixed `d`, sorted by `(n, k)`.
pub fn census(
    d: u32,
    pairs: &[(usize, usize)],
    defective_only: bool,
    cfg: &RankConfig,
) -> Result<Vec<(DefectRow, RankCertificate)>, SecantError> {
    let mut ns: Vec<usize> = pairs.iter().map(|&(n, _)| n).collect();
    ns.sort_unstable();
    ns.dedup();
    let templates: BTreeMap<usize, JacobianTemplate> = ns
        .par_iter()
        .map(|&n| JacobianTemplate::new(n, d).map(|t| (n, t)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .collect();
    let mut sorted = pairs.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let rows = sorted
        .par_iter()
        .map(|&(n, k)| secant_dimension_with(&templates[&n], k, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rows
        .into_iter()
        .filter(|r| !defective_only || r.row.is_defective())
        .map(|r| (r.row, r.cert))
        .collect())
}

/// Census over the rectangle `ns x ks`.
pub fn census_grid(
    d: u32,
    ns: impl IntoIterator<Item = usize>,
    ks: impl IntoIterator<Item = usize> + Clone,
    defective_only: bool,
    cfg: &RankConfig,
) -> Result<Vec<(DefectRow, RankCertificate)>, SecantError> {
    let pairs: Vec<(usize, usize)> = ns.into_iter().flat_map(|n| ks.clone().into_iter().map(move |k| (n, k))).collect();
    census(d, &pairs, defective_only, cfg)
}

fn exact_div(num: i128, den: i128, formula: &'static str, args: String) -> Result<i64, SecantError> {
    let (q, r) = num.div_rem(&den);
    if r != 0 {
        return Err(SecantError::NonIntegral { formula, args });
    }
    i64::try_from(q).map_err(|_| SecantError::NonIntegral { formula, args })
}

/// `k [k^2 - 3(n+4)k + 3n(n+6) + 23] / 6 - (n+2)`.
pub fn dim_formula_d3(n: i64, k: i64) -> Result<i64, SecantError> {
    if n < 2 || k < 1 {
        return Err(SecantError::OutOfDomain { formula: "dim_formula_d3", requirement: "n >= 2 and k >= 1" });
    }
    let (n, k) = (n as i128, k as i128);
    let num = k * (k * k - 3 * (n + 4) * k + 3 * n * (n + 6) + 23);
    Ok(exact_div(num, 6, "dim_formula_d3", format!("n = {n}, k = {k}"))? - (n as i64 + 2))
}

/// `[3(k-1)(k-2)n - (k-1)(k^2 - 11k + 6)] / 6`.
pub fn defect_identity_d3(n: i64, k: i64) -> Result<i64, SecantError> {
    if k < 1 {
        return Err(SecantError::OutOfDomain { formula: "defect_identity_d3", requirement: "k >= 1" });
    }
    let (n, k) = (n as i128, k as i128);
    let num = 3 * (k - 1) * (k - 2) * n - (k - 1) * (k * k - 11 * k + 6);
    exact_div(num, 6, "defect_identity_d3", format!("n = {n}, k = {k}"))
}

/// `binom(r-1, 2)`.
pub fn conjecture_eleven_defect(n: i64, r: i64) -> Result<i64, SecantError> {
    if n < 8 || r < 3 {
        return Err(SecantError::OutOfDomain { formula: "conjecture_eleven_defect", requirement: "n >= 8 and r >= 3" });
    }
    Ok((r - 1) * (r - 2) / 2)
}

/// `(d+7)(d-4)(d-3)(d-2) / 8`.
pub fn degree_formula_sec2_g1(d: i64) -> Result<i64, SecantError> {
    if d < 2 {
        return Err(SecantError::OutOfDomain { formula: "degree_formula_sec2_g1", requirement: "d >= 2" });
    }
    let d = d as i128;
    exact_div((d + 7) * (d - 4) * (d - 3) * (d - 2), 8, "degree_formula_sec2_g1", format!("d = {d}"))
}

/// `(d-4)(d-3)(d^2+5d-2) / 8`.
pub fn degree_formula_sec2_x(d: i64) -> Result<i64, SecantError> {
    if d < 4 {
        return Err(SecantError::OutOfDomain { formula: "degree_formula_sec2_x", requirement: "d >= 4" });
    }
    let d = d as i128;
    exact_div((d - 4) * (d - 3) * (d * d + 5 * d - 2), 8, "degree_formula_sec2_x", format!("d = {d}"))
}

/// `(d-6)(d^5 + 3d^4 - 57d^3 - 43d^2 + 752d - 512) / 48`.
pub fn degree_formula_sec3_x(d: i64) -> Result<i64, SecantError> {
    if d < 6 {
        return Err(SecantError::OutOfDomain { formula: "degree_formula_sec3_x", requirement: "d >= 6" });
    }
    let d = d as i128;
    let quintic = d.pow(5) + 3 * d.pow(4) - 57 * d.pow(3) - 43 * d * d + 752 * d - 512;
    exact_div((d - 6) * quintic, 48, "degree_formula_sec3_x", format!("d = {d}"))
}
