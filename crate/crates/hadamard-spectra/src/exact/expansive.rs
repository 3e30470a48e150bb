//! Exact test that every eigenvalue has modulus > 1.
//!
//! Works on the characteristic polynomial only: reverse it so the question
//! becomes "all roots strictly inside the unit disk", then run the classical
//! Schur reduction over exact integers. No floating point eigenvalues.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{ExactMatrix, Rat};
use crate::error::{Error, Result};

/// Monic characteristic polynomial det(zI - m), coefficients ascending.
pub fn char_poly(m: &ExactMatrix) -> Result<Vec<Rat>> {
    if !m.is_square() {
        return Err(Error::Shape("characteristic polynomial of non-square matrix".into()));
    }
    let n = m.rows();
    // Faddeev-LeVerrier: exact over the rationals.
    let mut coeffs = vec![Rat::zero(); n + 1];
    coeffs[n] = Rat::one();
    let mut aux = ExactMatrix::identity(n);
    for k in 1..=n {
        let prod = m.mul(&aux);
        let mut tr = Rat::zero();
        for i in 0..n {
            tr += prod.get(i, i);
        }
        let c = -tr / Rat::from_integer(BigInt::from(k as i64));
        coeffs[n - k] = c.clone();
        let mut shifted = prod;
        for i in 0..n {
            let v = shifted.get(i, i) + &c;
            shifted.set(i, i, v);
        }
        aux = shifted;
    }
    Ok(coeffs)
}

/// True when every eigenvalue of the integer matrix has modulus > 1.
pub fn is_expansive(m: &ExactMatrix) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::Shape("expansivity of non-square matrix".into()));
    }
    if !m.is_integer() {
        return Err(Error::NotIntegral("expansivity is defined for integer matrices".into()));
    }
    let cp = char_poly(m)?;
    let p: Vec<BigInt> = cp
        .iter()
        .map(|c| {
            debug_assert!(c.is_integer());
            c.to_integer()
        })
        .collect();
    // Zero constant term means a zero eigenvalue.
    if p[0].is_zero() {
        return Ok(false);
    }
    // Roots of the reversed polynomial are reciprocals of the eigenvalues.
    let reversed: Vec<BigInt> = p.iter().rev().cloned().collect();
    Ok(all_roots_in_unit_disk(reversed))
}

/// Schur reduction: all roots strictly inside the unit circle iff at every
/// stage |constant| < |leading|, recursing on (lc*f - c*rev(f)) / z.
fn all_roots_in_unit_disk(mut f: Vec<BigInt>) -> bool {
    trim(&mut f);
    while f.len() > 1 {
        let lead = f.last().unwrap().clone();
        let cons = f[0].clone();
        if cons.abs() >= lead.abs() {
            return false;
        }
        let n = f.len();
        let mut next = vec![BigInt::zero(); n - 1];
        // Coefficient of z^k in lc*f - c*rev(f), shifted down by one.
        for (k, slot) in next.iter_mut().enumerate() {
            let a = &f[k + 1];
            let b = &f[n - 2 - k];
            *slot = &lead * a - &cons * b;
        }
        trim(&mut next);
        f = next;
    }
    true
}

fn trim(f: &mut Vec<BigInt>) {
    while f.len() > 1 && f.last().is_some_and(|c| c.is_zero()) {
        f.pop();
    }
}
