//! Exact vanishing test for finite sums of roots of unity.
//!
//! A sum of q-th roots of unity sum_j w^{k_j} vanishes exactly when the q-th
//! cyclotomic polynomial divides sum_j x^{k_j}. Everything here is integer
//! polynomial arithmetic; no floating point.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::exact::Rat;

/// Dense integer polynomial, ascending coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly(pub Vec<BigInt>);

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly(vec![BigInt::zero()])
    }

    pub fn one() -> Self {
        IntPoly(vec![BigInt::one()])
    }

    /// x^n - 1.
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[0] = -BigInt::one();
        c[n] = BigInt::one();
        IntPoly(c)
    }

    pub fn degree(&self) -> usize {
        let mut d = self.0.len();
        while d > 1 && self.0[d - 1].is_zero() {
            d -= 1;
        }
        d - 1
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    fn trimmed(mut self) -> Self {
        while self.0.len() > 1 && self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![BigInt::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly(out).trimmed()
    }

    /// Exact division by a monic divisor; panics if the division is inexact
    /// (only used where exactness is guaranteed).
    pub fn div_exact_monic(&self, div: &Self) -> Self {
        let (q, r) = self.div_rem_monic(div);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Division with remainder by a monic divisor.
    pub fn div_rem_monic(&self, div: &Self) -> (Self, Self) {
        let dd = div.degree();
        assert!(div.0[dd].is_one(), "divisor must be monic");
        let mut rem = self.clone().trimmed().0;
        if rem.len() <= dd {
            return (IntPoly::zero(), IntPoly(rem).trimmed());
        }
        let mut quot = vec![BigInt::zero(); rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let c = rem[k].clone();
            if c.is_zero() {
                continue;
            }
            quot[k - dd] = c.clone();
            for (j, dc) in div.0.iter().enumerate().take(dd + 1) {
                rem[k - dd + j] -= &c * dc;
            }
        }
        (IntPoly(quot).trimmed(), IntPoly(rem).trimmed())
    }
}

/// n-th cyclotomic polynomial by recursive exact division of x^n - 1 by the
/// cyclotomic polynomials of the proper divisors. Cached globally.
pub fn cyclotomic_poly(n: usize) -> IntPoly {
    assert!(n >= 1);
    static CACHE: Mutex<Option<HashMap<usize, IntPoly>>> = Mutex::new(None);
    {
        let guard = CACHE.lock().unwrap();
        if let Some(map) = guard.as_ref() {
            if let Some(p) = map.get(&n) {
                return p.clone();
            }
        }
    }
    let result = if n == 1 {
        IntPoly(vec![-BigInt::one(), BigInt::one()])
    } else {
        let mut num = IntPoly::x_pow_minus_one(n);
        for d in 1..n {
            if n.is_multiple_of(d) {
                let phi = cyclotomic_poly(d);
                num = num.div_exact_monic(&phi);
            }
        }
        num
    };
    let mut guard = CACHE.lock().unwrap();
    guard.get_or_insert_with(HashMap::new).insert(n, result.clone());
    result
}

/// Exact test: does sum_j exp(2 pi i t_j) vanish, for rational t_j?
pub fn roots_of_unity_sum_is_zero(ts: &[Rat]) -> bool {
    if ts.is_empty() {
        return true;
    }
    let mut q = BigInt::one();
    for t in ts {
        q = q.lcm(t.denom());
    }
    let q: usize = q
        .to_string()
        .parse()
        .expect("root-of-unity order exceeds machine range");
    let mut coeffs = vec![BigInt::zero(); q];
    let qi = BigInt::from(q as i64);
    for t in ts {
        let scaled = t * BigRational::from_integer(qi.clone());
        debug_assert!(scaled.is_integer());
        let k = scaled.to_integer().mod_floor(&qi);
        let k: usize = k.to_string().parse().unwrap();
        coeffs[k] += BigInt::one();
    }
    let p = IntPoly(coeffs).trimmed();
    if p.is_zero() {
        return true;
    }
    if q == 1 {
        // All terms equal 1; the sum is the term count.
        return p.0.iter().sum::<BigInt>().is_zero();
    }
    let phi = cyclotomic_poly(q);
    let (_, r) = p.div_rem_monic(&phi);
    r.is_zero()
}

/// Exact test: do all exp(2 pi i t_j) coincide (the sum has full modulus)?
/// For rational t_j this is exact integrality of the pairwise differences.
pub fn roots_of_unity_all_equal(ts: &[Rat]) -> bool {
    match ts.first() {
        None => true,
        Some(t0) => ts.iter().all(|t| (t - t0).is_integer()),
    }
}

/// Float value of sum_j exp(2 pi i t_j) for cross-checks.
pub fn roots_of_unity_sum_f64(ts: &[Rat]) -> num_complex::Complex64 {
    use crate::exact::rat_to_f64;
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for t in ts {
        let frac = t - t.floor();
        let ang = 2.0 * std::f64::consts::PI * rat_to_f64(&frac);
        acc += num_complex::Complex64::new(ang.cos(), ang.sin());
    }
    acc
}
