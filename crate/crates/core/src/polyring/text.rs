//! Parser for the canonical text form produced by `Display`.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::One;

use super::monomial::MultiIndex;
use super::poly::Polynomial;
use super::ring::{parse_rational, Rationals};
use super::PolyError;

/// Parses text such as `-x*z^2 + 3/2*y^2*z - 7` over the rationals.
pub fn parse_polynomial(text: &str, vars: Arc<[String]>) -> Result<Polynomial<Rationals>, PolyError> {
    let err = |msg: &str| PolyError::Parse(format!("{msg} in {text:?}"));
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(err("empty input"));
    }
    // Split into signed terms at top-level '+'/'-' (never after '^' or '/').
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut negative = false;
    let mut prev: Option<char> = None;
    for ch in compact.chars() {
        let splits = (ch == '+' || ch == '-') && !matches!(prev, Some('^') | Some('/') | Some('*'));
        if splits {
            if !current.is_empty() {
                terms.push((negative, std::mem::take(&mut current)));
            } else if prev.is_some() {
                return Err(err("dangling sign"));
            }
            negative = ch == '-';
        } else {
            current.push(ch);
        }
        prev = Some(ch);
    }
    if current.is_empty() {
        return Err(err("trailing sign"));
    }
    terms.push((negative, current));

    let n = vars.len();
    let mut out = Vec::with_capacity(terms.len());
    for (negative, body) in terms {
        let mut coeff = BigRational::one();
        let mut exps = vec![0u32; n];
        for factor in body.split('*') {
            if factor.is_empty() {
                return Err(err("empty factor"));
            }
            let starts_numeric = factor.starts_with(|c: char| c.is_ascii_digit());
            if starts_numeric {
                coeff *= parse_rational(factor).ok_or_else(|| err("bad coefficient"))?;
                continue;
            }
            let (name, e) = match factor.split_once('^') {
                Some((name, e)) => (name, e.parse::<u32>().map_err(|_| err("bad exponent"))?),
                None => (factor, 1),
            };
            let i = vars
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
            exps[i] += e;
        }
        if negative {
            coeff = -coeff;
        }
        out.push((MultiIndex::new(exps), coeff));
    }
    Ok(Polynomial::from_terms(Rationals, vars, out))
}
