use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use super::monomial::MultiIndex;
use super::ring::Ring;
use super::PolyError;

/// Builds a shared variable list from names.
pub fn var_list<S: AsRef<str>>(names: &[S]) -> Arc<[String]> {
    names.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>().into()
}

/// Sparse multivariate polynomial (or truncated power series) over a ring.
///
/// Terms are stored in ascending graded-lex order of their exponents; no
/// stored coefficient is zero. When a truncation bound `T` is set, no stored
/// term has total degree above `T`, and every operation discards terms that
/// would exceed it.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<R: Ring> {
    ring: R,
    vars: Arc<[String]>,
    terms: BTreeMap<MultiIndex, R::Elem>,
    truncation: Option<u32>,
}

fn min_truncation(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl<R: Ring> Polynomial<R> {
    pub fn zero(ring: R, vars: Arc<[String]>) -> Self {
        Polynomial { ring, vars, terms: BTreeMap::new(), truncation: None }
    }

    pub fn constant(ring: R, vars: Arc<[String]>, c: R::Elem) -> Self {
        let n = vars.len();
        Self::from_terms(ring, vars, [(MultiIndex::zero(n), c)])
    }

    pub fn one(ring: R, vars: Arc<[String]>) -> Self {
        let one = ring.one();
        Self::constant(ring, vars, one)
    }

    /// The `i`-th variable as a polynomial.
    pub fn variable(ring: R, vars: Arc<[String]>, i: usize) -> Self {
        let n = vars.len();
        let one = ring.one();
        Self::from_terms(ring, vars, [(MultiIndex::unit(n, i), one)])
    }

    pub fn var(ring: R, vars: Arc<[String]>, name: &str) -> Result<Self, PolyError> {
        let i = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        Ok(Self::variable(ring, vars, i))
    }

    /// Collects terms, summing repeated exponents and dropping zeros.
    pub fn from_terms<I>(ring: R, vars: Arc<[String]>, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, R::Elem)>,
    {
        let mut map: BTreeMap<MultiIndex, R::Elem> = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.len(), vars.len(), "exponent length does not match variable list");
            accumulate(&ring, &mut map, m, c);
        }
        let out = Polynomial { ring, vars, terms: map, truncation: None };
        out.debug_check();
        out
    }

    /// Sets (or tightens) the truncation bound and discards high-degree terms.
    pub fn truncated(mut self, bound: u32) -> Self {
        let t = min_truncation(self.truncation, Some(bound)).unwrap();
        self.truncation = Some(t);
        self.terms.retain(|m, _| m.order() <= t);
        self
    }

    /// Removes the truncation bound, keeping the stored terms.
    pub fn untruncated(mut self) -> Self {
        self.truncation = None;
        self
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn truncation(&self) -> Option<u32> {
        self.truncation
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &R::Elem)> + '_ {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &MultiIndex) -> R::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ring.zero())
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coeff_of(&self, exps: &[u32]) -> R::Elem {
        self.coefficient(&MultiIndex::new(exps.to_vec()))
    }

    pub fn constant_term(&self) -> R::Elem {
        self.coefficient(&MultiIndex::zero(self.nvars()))
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.order())
    }

    /// Degree in the `i`-th variable, or `None` for zero.
    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.get(i)).max()
    }

    /// Lowest total degree among stored terms, or `None` for zero.
    pub fn lowest_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.order())
    }

    /// Homogeneous component of the given total degree.
    pub fn homogeneous_part(&self, degree: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.order() == degree)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Polynomial { ring: self.ring.clone(), vars: self.vars.clone(), terms, truncation: self.truncation }
    }

    fn check_compatible(&self, other: &Self) -> Result<(), PolyError> {
        if !Arc::ptr_eq(&self.vars, &other.vars) && self.vars != other.vars {
            return Err(PolyError::VariableMismatch);
        }
        if self.ring != other.ring {
            return Err(PolyError::RingMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_compatible(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_compatible(other)?;
        Ok(self.add_unchecked(&other.neg()))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        let truncation = min_truncation(self.truncation, other.truncation);
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            accumulate(&self.ring, &mut terms, m.clone(), c.clone());
        }
        if let Some(t) = truncation {
            terms.retain(|m, _| m.order() <= t);
        }
        let out = Polynomial { ring: self.ring.clone(), vars: self.vars.clone(), terms, truncation };
        out.debug_check();
        out
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let truncation = min_truncation(self.truncation, other.truncation);
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some(t) = truncation {
                    // `other` is sorted by degree, so nothing further fits.
                    if ma.order() + mb.order() > t {
                        break;
                    }
                }
                let c = self.ring.mul(ca, cb);
                accumulate(&self.ring, &mut terms, ma.plus(mb), c);
            }
        }
        let out = Polynomial { ring: self.ring.clone(), vars: self.vars.clone(), terms, truncation };
        out.debug_check();
        out
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), self.ring.neg(c))).collect();
        Polynomial { ring: self.ring.clone(), vars: self.vars.clone(), terms, truncation: self.truncation }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &R::Elem) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, a)| {
                let v = self.ring.mul(a, c);
                (!self.ring.is_zero(&v)).then(|| (m.clone(), v))
            })
            .collect();
        Polynomial { ring: self.ring.clone(), vars: self.vars.clone(), terms, truncation: self.truncation }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.ring.clone(), self.vars.clone());
        acc.truncation = self.truncation;
        for _ in 0..e {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// Formal partial derivative with respect to a named variable.
    pub fn differentiate(&self, var: &str) -> Result<Self, PolyError> {
        let i = self
            .vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| PolyError::UnknownVariable(var.to_string()))?;
        Ok(self.differentiate_index(i))
    }

    pub fn differentiate_index(&self, i: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if let Some(lower) = m.minus_unit(i) {
                let v = self.ring.mul(c, &self.ring.from_int(m.get(i) as i64));
                if !self.ring.is_zero(&v) {
                    terms.insert(lower, v);
                }
            }
        }
        Polynomial { ring: self.ring.clone(), vars: self.vars.clone(), terms, truncation: self.truncation }
    }

    /// Exact evaluation at a point given in variable order.
    pub fn evaluate(&self, point: &[R::Elem]) -> Result<R::Elem, PolyError> {
        if point.len() != self.nvars() {
            return Err(PolyError::PointLength { expected: self.nvars(), got: point.len() });
        }
        let ring = &self.ring;
        let mut powers: Vec<Vec<R::Elem>> = point.iter().map(|x| vec![ring.one(), x.clone()]).collect();
        let mut acc = ring.zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = &mut powers[i];
                while pw.len() <= e as usize {
                    let next = ring.mul(pw.last().unwrap(), &point[i]);
                    pw.push(next);
                }
                term = ring.mul(&term, &pw[e as usize]);
            }
            acc = ring.add(&acc, &term);
        }
        Ok(acc)
    }

    /// Evaluation at a point given by name; every variable must be assigned.
    pub fn evaluate_named(&self, point: &HashMap<String, R::Elem>) -> Result<R::Elem, PolyError> {
        let values = self
            .vars
            .iter()
            .map(|v| point.get(v).cloned().ok_or_else(|| PolyError::MissingAssignment(v.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        self.evaluate(&values)
    }

    /// Substitutes a polynomial for every variable. The images share their
    /// own (common) variable list, which becomes the result's.
    pub fn substitute(&self, images: &[Polynomial<R>]) -> Result<Polynomial<R>, PolyError> {
        if images.len() != self.nvars() {
            return Err(PolyError::PointLength { expected: self.nvars(), got: images.len() });
        }
        let target = images.first().ok_or(PolyError::PointLength { expected: 1, got: 0 })?;
        for img in images {
            target.check_compatible(img)?;
        }
        let zero = Polynomial::zero(self.ring.clone(), target.vars.clone());
        let mut powers: Vec<Vec<Polynomial<R>>> = images
            .iter()
            .map(|x| vec![Polynomial::one(self.ring.clone(), target.vars.clone()), x.clone()])
            .collect();
        let mut acc = zero;
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(self.ring.clone(), target.vars.clone(), c.clone());
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = &mut powers[i];
                while pw.len() <= e as usize {
                    let next = pw.last().unwrap().mul_unchecked(&images[i]);
                    pw.push(next);
                }
                term = term.mul_unchecked(&pw[e as usize]);
            }
            acc = acc.add_unchecked(&term);
        }
        Ok(acc)
    }

    /// Coefficient-wise change of ring, e.g. reduction of a rational
    /// polynomial modulo a prime.
    pub fn map_ring<S, F>(&self, ring: S, f: F) -> Result<Polynomial<S>, PolyError>
    where
        S: Ring,
        F: Fn(&R::Elem) -> Result<S::Elem, PolyError>,
    {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = f(c)?;
            if !ring.is_zero(&v) {
                terms.insert(m.clone(), v);
            }
        }
        Ok(Polynomial { ring, vars: self.vars.clone(), terms, truncation: self.truncation })
    }

    /// Same terms over a different (but equal-length) variable list.
    pub fn with_vars(&self, vars: Arc<[String]>) -> Result<Self, PolyError> {
        if vars.len() != self.nvars() {
            return Err(PolyError::VariableMismatch);
        }
        Ok(Polynomial { vars, ..self.clone() })
    }

    /// Structural invariants: no zero coefficient, consistent exponent
    /// lengths and cached degrees, and no term above the truncation bound.
    pub fn check_invariants(&self) -> bool {
        self.terms.iter().all(|(m, c)| {
            !self.ring.is_zero(c)
                && m.len() == self.nvars()
                && m.check()
                && self.truncation.map_or(true, |t| m.order() <= t)
        })
    }

    #[inline]
    fn debug_check(&self) {
        debug_assert!(self.check_invariants(), "polynomial invariant violated");
    }
}

fn accumulate<R: Ring>(ring: &R, map: &mut BTreeMap<MultiIndex, R::Elem>, m: MultiIndex, c: R::Elem) {
    use std::collections::btree_map::Entry;
    if ring.is_zero(&c) {
        return;
    }
    match map.entry(m) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            let s = ring.add(o.get(), &c);
            if ring.is_zero(&s) {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

/// The ring of polynomials over `base` in a fixed variable list. Used as a
/// coefficient ring, e.g. for power series in `t` whose coefficients are
/// polynomials in model parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyRing<R: Ring> {
    base: R,
    vars: Arc<[String]>,
}

impl<R: Ring> PolyRing<R> {
    pub fn new(base: R, vars: Arc<[String]>) -> Self {
        PolyRing { base, vars }
    }

    pub fn base(&self) -> &R {
        &self.base
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }
}

impl<R: Ring> Ring for PolyRing<R> {
    type Elem = Polynomial<R>;

    fn zero(&self) -> Polynomial<R> {
        Polynomial::zero(self.base.clone(), self.vars.clone())
    }
    fn one(&self) -> Polynomial<R> {
        Polynomial::one(self.base.clone(), self.vars.clone())
    }
    fn is_zero(&self, a: &Polynomial<R>) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Polynomial<R>, b: &Polynomial<R>) -> Polynomial<R> {
        a.add(b).expect("coefficients from one polynomial ring")
    }
    fn neg(&self, a: &Polynomial<R>) -> Polynomial<R> {
        a.neg()
    }
    fn mul(&self, a: &Polynomial<R>, b: &Polynomial<R>) -> Polynomial<R> {
        a.mul(b).expect("coefficients from one polynomial ring")
    }
    fn inv(&self, a: &Polynomial<R>) -> Option<Polynomial<R>> {
        if a.num_terms() == 1 && a.total_degree() == Some(0) {
            let c = self.base.inv(&a.constant_term())?;
            Some(Polynomial::constant(self.base.clone(), self.vars.clone(), c))
        } else {
            None
        }
    }
    fn from_rational(&self, q: &num_rational::BigRational) -> Result<Polynomial<R>, PolyError> {
        let c = self.base.from_rational(q)?;
        Ok(Polynomial::constant(self.base.clone(), self.vars.clone(), c))
    }
    fn from_int(&self, v: i64) -> Polynomial<R> {
        Polynomial::constant(self.base.clone(), self.vars.clone(), self.base.from_int(v))
    }
    fn characteristic(&self) -> u64 {
        self.base.characteristic()
    }
    fn fmt_elem(&self, a: &Polynomial<R>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({a})")
    }
}

impl<R: Ring> fmt::Display for Polynomial<R> {
    /// Canonical text form: terms in descending graded-lex order, written as
    /// `coeff*var^e*...`, with unit coefficients and exponents omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let ring = &self.ring;
        let one = ring.one();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = ring.is_negative(c);
            let mag = if negative { ring.neg(c) } else { c.clone() };
            match (k, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let constant = m.order() == 0;
            if constant {
                ring.fmt_elem(&mag, f)?;
                continue;
            }
            let mut first = true;
            if mag != one {
                ring.fmt_elem(&mag, f)?;
                first = false;
            }
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "{}", self.vars[i])?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}
