//! Truncated exponential and logarithm of power series.

use num_rational::BigRational;

use super::poly::Polynomial;
use super::ring::Ring;
use super::PolyError;

fn bound_and_inverses<R: Ring>(p: &Polynomial<R>) -> Result<(u32, Vec<R::Elem>), PolyError> {
    let t = p.truncation().ok_or(PolyError::TruncationRequired)?;
    let ch = p.ring().characteristic();
    if ch != 0 && ch <= t as u64 {
        return Err(PolyError::CharacteristicTooSmall { prime: ch, order: t });
    }
    // 1/j for j = 1..=t
    let inverses = (1..=t)
        .map(|j| p.ring().from_rational(&BigRational::new(1.into(), j.into())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((t, inverses))
}

/// `exp(p) = sum_{j<=T} p^j / j!`, truncated at the bound `T` of `p`.
///
/// Requires a zero constant term and a coefficient ring in which `1/j!` exists
/// for `j <= T`.
pub fn series_exp<R: Ring>(p: &Polynomial<R>) -> Result<Polynomial<R>, PolyError> {
    let (t, inv) = bound_and_inverses(p)?;
    if !p.ring().is_zero(&p.constant_term()) {
        return Err(PolyError::NonZeroConstantTerm);
    }
    let one = Polynomial::one(p.ring().clone(), p.vars().clone()).truncated(t);
    // 1 + p(1 + p/2(1 + p/3(...)))
    let mut acc = one.clone();
    for j in (1..=t).rev() {
        acc = one.add_unchecked(&p.mul_unchecked(&acc).scale(&inv[j as usize - 1]));
    }
    Ok(acc)
}

/// `log(p) = sum_{j=1}^{T} (-1)^{j+1} (p-1)^j / j`, truncated at `T`.
///
/// Requires constant term exactly one.
pub fn series_log<R: Ring>(p: &Polynomial<R>) -> Result<Polynomial<R>, PolyError> {
    let (t, inv) = bound_and_inverses(p)?;
    let ring = p.ring();
    if p.constant_term() != ring.one() {
        return Err(PolyError::ConstantTermNotOne);
    }
    let one = Polynomial::one(ring.clone(), p.vars().clone()).truncated(t);
    if t == 0 {
        return Ok(Polynomial::zero(ring.clone(), p.vars().clone()).truncated(0));
    }
    let u = p.add_unchecked(&one.neg());
    let coeff = |j: u32| {
        let c = inv[j as usize - 1].clone();
        if j % 2 == 0 {
            ring.neg(&c)
        } else {
            c
        }
    };
    // u(c_1 + u(c_2 + ... + u c_T))
    let mut acc = one.scale(&coeff(t));
    for j in (1..t).rev() {
        acc = one.scale(&coeff(j)).add_unchecked(&u.mul_unchecked(&acc));
    }
    Ok(u.mul_unchecked(&acc))
}
