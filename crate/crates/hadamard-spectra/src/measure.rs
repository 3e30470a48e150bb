//! The self-affine measure attached to (R, B) and its Fourier transform.
//!
//! mu is the unique probability measure with mu = (1/N) sum_b mu(R x - b)
//! pushed forward, equivalently the distribution of sum_{k>=1} R^{-k} b_k
//! with digits b_k drawn uniformly from B. Its transform is the infinite
//! product of mask factors m_B((R^T)^{-n} xi); evaluation truncates the
//! product with a certified tail bound.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cyclotomic::{roots_of_unity_all_equal, roots_of_unity_sum_is_zero};
use crate::error::{Error, Result};
use crate::exact::{self, rat_to_f64, ExactMatrix, Rat, RatVec};
use crate::triple::{DigitSet, Triple};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Per-step mask m_B(y) = (1/N) sum_b exp(-2 pi i <b, y>) and its square
/// modulus u_B = |m_B|^2.
pub struct MaskEvaluator {
    digits_f: Vec<Vec<f64>>,
    digits: Vec<RatVec>,
    n: usize,
}

impl MaskEvaluator {
    pub fn new(b: &DigitSet) -> Self {
        MaskEvaluator {
            digits_f: b
                .iter()
                .map(|e| e.iter().map(|x| x.to_f64().unwrap()).collect())
                .collect(),
            digits: b.as_rat_vecs(),
            n: b.len(),
        }
    }

    pub fn symbol(&self, y: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for d in &self.digits_f {
            let phase: f64 = d.iter().zip(y).map(|(a, b)| a * b).sum();
            acc += Complex64::from_polar(1.0, -TWO_PI * phase.fract());
        }
        acc / self.n as f64
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.symbol(y).norm_sqr()
    }

    /// Exact vanishing test at a rational point.
    pub fn is_zero_at(&self, y: &RatVec) -> bool {
        let phases: Vec<Rat> = self.digits.iter().map(|d| exact::vec_dot(d, y)).collect();
        roots_of_unity_sum_is_zero(&phases)
    }

    /// Exact |m_B(y)| = 1 test: all digit phases coincide mod 1.
    pub fn is_one_at(&self, y: &RatVec) -> bool {
        let phases: Vec<Rat> = self.digits.iter().map(|d| exact::vec_dot(d, y)).collect();
        roots_of_unity_all_equal(&phases)
    }
}

/// Value of the transform with a certified truncation error: the true value
/// differs from `value` by at most `err` in modulus.
#[derive(Debug, Clone, Copy)]
pub struct MuValue {
    pub value: Complex64,
    pub err: f64,
    pub depth: u32,
}

impl MuValue {
    pub fn norm_sqr_bounds(&self) -> (f64, f64) {
        let m = self.value.norm();
        let lo = (m - self.err).max(0.0);
        let hi = m + self.err;
        (lo * lo, hi * hi)
    }
}

/// Evaluator for the Fourier transform of mu(R, B). Construction derives the
/// contraction data used in the tail bound: n0 with ||(R^T)^{-n0}||_inf <= 1/2,
/// that norm rho, and an upper bound s_inf for sum_{r>=1} ||(R^T)^{-r}||_inf.
pub struct MeasureEvaluator {
    pub r: ExactMatrix,
    pub b: DigitSet,
    mask: MaskEvaluator,
    rt_inv_f: Vec<f64>,
    // Adjugate of R^T (row major) and det R^T; (R^T)^{-1} = adjt / det_rt.
    adjt: Vec<BigInt>,
    det_rt: BigInt,
    dim: usize,
    pub n0: u32,
    pub rho: f64,
    pub s_inf: f64,
    pub beta1: f64,
    pub depth_cap: u32,
}

/// Exact orbit of a rational shift under (R^T)^{-1}, kept as integer
/// numerators over den = q0 * det^n. Iterating the adjugate avoids the gcd
/// reduction cost of rational arithmetic; den stays positive.
struct ShiftState {
    w: Vec<BigInt>,
    den: BigInt,
}

fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

impl ShiftState {
    fn new(shift: &RatVec) -> Self {
        let mut den = BigInt::one();
        for q in shift {
            den = den.lcm(q.denom());
        }
        let den_r = Rat::from_integer(den.clone());
        let w = shift.iter().map(|q| (q * &den_r).to_integer()).collect();
        ShiftState { w, den }
    }

    fn step(&mut self, adjt: &[BigInt], det: &BigInt, d: usize) {
        let mut out = vec![BigInt::zero(); d];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = BigInt::zero();
            for (j, wj) in self.w.iter().enumerate() {
                acc += &adjt[i * d + j] * wj;
            }
            *o = acc;
        }
        self.w = out;
        self.den = &self.den * det;
        if self.den.is_negative() {
            self.den = -std::mem::take(&mut self.den);
            for x in self.w.iter_mut() {
                *x = -std::mem::take(x);
            }
        }
    }

    /// Fractional parts in [0, 1), reduced exactly before the f64 division.
    fn fract_f64(&self) -> Vec<f64> {
        let den_f = big_to_f64(&self.den);
        self.w
            .iter()
            .map(|x| big_to_f64(&x.mod_floor(&self.den)) / den_f)
            .collect()
    }

    fn sup_f64(&self) -> f64 {
        let den_f = big_to_f64(&self.den);
        self.w
            .iter()
            .map(|x| big_to_f64(&x.abs()) / den_f)
            .fold(0.0, f64::max)
    }
}

impl MeasureEvaluator {
    pub fn new(r: &ExactMatrix, b: &DigitSet) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::Shape("expansion must be square".into()));
        }
        if !r.is_integer() {
            return Err(Error::NotIntegral("expansion must be integral".into()));
        }
        if b.dim() != r.rows() {
            return Err(Error::Shape("digit dimension mismatch".into()));
        }
        if !exact::is_expansive(r)? {
            return Err(Error::NotExpansive);
        }
        let dim = r.rows();
        let rt_inv = r.transpose().inverse()?;
        // Smallest n0 with ||(R^T)^{-n0}|| <= 1/2, plus the partial norm sum.
        let half = exact::ratio(1, 2);
        let mut p = rt_inv.clone();
        let mut block_sum = p.row_sum_norm();
        let mut n0 = 1u32;
        while p.row_sum_norm() > half {
            p = p.mul(&rt_inv);
            block_sum += p.row_sum_norm();
            n0 += 1;
            if n0 > 512 {
                return Err(Error::NotExpansive);
            }
        }
        let rho_exact = p.row_sum_norm();
        let s_inf_exact = &block_sum / (Rat::from_integer(BigInt::from(1)) - &rho_exact);
        let rt_inv_f: Vec<f64> = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| rat_to_f64(rt_inv.get(i, j)))
            .collect();
        let beta1 = b
            .iter()
            .map(|e| e.iter().map(|x| x.abs().to_f64().unwrap()).sum::<f64>())
            .fold(0.0f64, f64::max);
        let det_rt = r.transpose().det()?.to_integer();
        let det_r = Rat::from_integer(det_rt.clone());
        let adjt: Vec<BigInt> = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| (rt_inv.get(i, j) * &det_r).to_integer())
            .collect();
        Ok(MeasureEvaluator {
            r: r.clone(),
            b: b.clone(),
            mask: MaskEvaluator::new(b),
            rt_inv_f,
            adjt,
            det_rt,
            dim,
            n0,
            rho: rat_to_f64(&rho_exact),
            s_inf: rat_to_f64(&s_inf_exact) * (1.0 + 1e-12),
            beta1,
            depth_cap: 64,
        })
    }

    pub fn from_triple(t: &Triple) -> Result<Self> {
        Self::new(&t.r, &t.b)
    }

    pub fn mask(&self) -> &MaskEvaluator {
        &self.mask
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn apply_rt_inv_f(&self, v: &mut [f64]) {
        let d = self.dim;
        let mut out = vec![0.0; d];
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += self.rt_inv_f[i * d + j] * v[j];
            }
            out[i] = acc;
        }
        v.copy_from_slice(&out);
    }

    /// Bound on |true product / computed prefix - 1| once the argument has
    /// sup norm `arg_norm`: every later factor differs from 1 by at most
    /// 2 pi beta1 ||(R^T)^{-k} w||, and the norms sum to s_inf * arg_norm.
    fn tail_err(&self, arg_norm: f64) -> f64 {
        (TWO_PI * self.beta1 * self.s_inf * arg_norm).exp_m1()
    }

    /// Transform at a floating point frequency. Multiplies mask factors until
    /// the certified tail error drops below tol.
    pub fn fourier(&self, xi: &[f64], tol: f64) -> Result<MuValue> {
        if xi.len() != self.dim {
            return Err(Error::Shape("frequency dimension mismatch".into()));
        }
        let mut y = xi.to_vec();
        let mut prod = Complex64::new(1.0, 0.0);
        for depth in 1..=self.depth_cap {
            self.apply_rt_inv_f(&mut y);
            prod *= self.mask.symbol(&y);
            let norm = y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            let err = self.tail_err(norm);
            if err <= tol {
                return Ok(MuValue { value: prod, err, depth });
            }
        }
        Err(Error::DepthCapExceeded {
            achieved: self.tail_err(y.iter().fold(0.0f64, |a, &v| a.max(v.abs()))),
            requested: tol,
        })
    }

    /// Transform at base + shift with the shift carried exactly. The shift
    /// part of each phase is reduced mod 1 in exact arithmetic before any
    /// floating point enters, so large spectrum points lose no precision.
    pub fn fourier_shifted(&self, base: &[f64], shift: &RatVec, tol: f64) -> Result<MuValue> {
        if base.len() != self.dim || shift.len() != self.dim {
            return Err(Error::Shape("frequency dimension mismatch".into()));
        }
        let mut y = base.to_vec();
        let mut zs = ShiftState::new(shift);
        let mut prod = Complex64::new(1.0, 0.0);
        for depth in 1..=self.depth_cap {
            self.apply_rt_inv_f(&mut y);
            zs.step(&self.adjt, &self.det_rt, self.dim);
            let zf = zs.fract_f64();
            let mut acc = Complex64::new(0.0, 0.0);
            for d in &self.mask.digits_f {
                let phase: f64 = d
                    .iter()
                    .zip(y.iter().zip(&zf))
                    .map(|(b, (yy, zz))| b * yy + b * zz)
                    .sum();
                acc += Complex64::from_polar(1.0, -TWO_PI * phase.fract());
            }
            prod *= acc / self.mask.n as f64;
            let norm_y = y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            let err = self.tail_err(norm_y + zs.sup_f64());
            if err <= tol {
                return Ok(MuValue { value: prod, err, depth });
            }
        }
        let norm_y = y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        Err(Error::DepthCapExceeded { achieved: self.tail_err(norm_y), requested: tol })
    }

    /// Transform truncated to exactly `level` mask factors, no tail bound.
    /// This is the transform of the level-`level` discrete approximation.
    pub fn fourier_level(&self, base: &[f64], shift: &RatVec, level: u32) -> Result<Complex64> {
        if base.len() != self.dim || shift.len() != self.dim {
            return Err(Error::Shape("frequency dimension mismatch".into()));
        }
        let mut y = base.to_vec();
        let mut zs = ShiftState::new(shift);
        let mut prod = Complex64::new(1.0, 0.0);
        for _ in 0..level {
            self.apply_rt_inv_f(&mut y);
            zs.step(&self.adjt, &self.det_rt, self.dim);
            let zf = zs.fract_f64();
            let mut acc = Complex64::new(0.0, 0.0);
            for d in &self.mask.digits_f {
                let phase: f64 = d
                    .iter()
                    .zip(y.iter().zip(&zf))
                    .map(|(b, (yy, zz))| b * yy + b * zz)
                    .sum();
                acc += Complex64::from_polar(1.0, -TWO_PI * phase.fract());
            }
            prod *= acc / self.mask.n as f64;
        }
        Ok(prod)
    }
}

/// Points of the level-`level` approximation sum_{k=1..level} R^{-k} b_k.
/// All N^level digit words are enumerated when they fit in `max_points`,
/// otherwise a seeded uniform subsample of words is taken.
pub fn attractor_points(
    r: &ExactMatrix,
    b: &DigitSet,
    level: u32,
    max_points: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let n = b.len() as u128;
    let total = n.checked_pow(level).ok_or_else(|| Error::TooLarge("word count".into()))?;
    let r_inv = r.inverse()?;
    let digits = b.as_rat_vecs();
    let word_point = |mut idx: u128| -> Vec<f64> {
        // Digits of idx base N, least significant first = deepest level.
        let mut x: RatVec = vec![Rat::from_integer(BigInt::zero()); b.dim()];
        let mut pw = r_inv.clone();
        for _ in 0..level {
            let d = (idx % n) as usize;
            idx /= n;
            let term = pw.mul_vec(&digits[d]);
            x = exact::vec_add(&x, &term);
            pw = pw.mul(&r_inv);
        }
        x.iter().map(rat_to_f64).collect()
    };
    let mut out = Vec::new();
    if total <= max_points as u128 {
        for i in 0..total {
            out.push(word_point(i));
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = std::collections::BTreeSet::new();
        while picked.len() < max_points {
            picked.insert(rng.gen_range(0..total));
        }
        for i in picked {
            out.push(word_point(i));
        }
    }
    Ok(out)
}

/// Exact distinctness probe for level sums. Reports whether two digit words
/// of the given length produce the same point of the attractor.
#[derive(Debug, Clone)]
pub struct OverlapReport {
    pub level: u32,
    pub words: u64,
    pub distinct: u64,
    pub overlap: bool,
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
}

pub fn no_overlap_probe(r: &ExactMatrix, b: &DigitSet, level: u32) -> Result<OverlapReport> {
    let n = b.len() as u64;
    let total = n
        .checked_pow(level)
        .filter(|&t| t <= 1_000_000)
        .ok_or_else(|| Error::TooLarge("word count above 1e6".into()))?;
    let r_inv = r.inverse()?;
    let digits = b.as_rat_vecs();
    let mut seen: std::collections::HashMap<Vec<Rat>, u64> = std::collections::HashMap::new();
    let mut witness = None;
    for i in 0..total {
        let mut idx = i;
        let mut x: RatVec = vec![Rat::from_integer(BigInt::zero()); b.dim()];
        let mut pw = r_inv.clone();
        for _ in 0..level {
            let d = (idx % n) as usize;
            idx /= n;
            let term = pw.mul_vec(&digits[d]);
            x = exact::vec_add(&x, &term);
            pw = pw.mul(&r_inv);
        }
        if let Some(&prev) = seen.get(&x) {
            if witness.is_none() {
                witness = Some((word_of(prev, n, level), word_of(i, n, level)));
            }
        } else {
            seen.insert(x, i);
        }
    }
    let distinct = seen.len() as u64;
    Ok(OverlapReport { level, words: total, distinct, overlap: distinct < total, witness })
}

fn word_of(mut idx: u64, n: u64, level: u32) -> Vec<usize> {
    let mut w = Vec::with_capacity(level as usize);
    for _ in 0..level {
        w.push((idx % n) as usize);
        idx /= n;
    }
    w
}

/// Partition-of-unity check: for a Hadamard triple,
/// sum_{l in L} u_B((R^T)^{-1}(x + l)) = 1 identically. Samples random x and
/// returns the worst defect.
#[derive(Debug, Clone)]
pub struct QmfReport {
    pub samples: usize,
    pub max_defect: f64,
}

pub fn qmf_check(t: &Triple, samples: usize, seed: u64) -> Result<QmfReport> {
    let d = t.dim();
    let mask = MaskEvaluator::new(&t.b);
    let rt_inv = t.r.transpose().inverse()?;
    let rt_inv_f: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| rat_to_f64(rt_inv.get(i, j))).collect())
        .collect();
    let ls: Vec<Vec<f64>> = t
        .l
        .iter()
        .map(|e| e.iter().map(|x| x.to_f64().unwrap()).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_defect = 0.0f64;
    for k in 0..samples {
        let x: Vec<f64> = if k == 0 {
            vec![0.0; d]
        } else {
            (0..d).map(|_| rng.gen_range(0.0..1.0)).collect()
        };
        let mut sum = 0.0;
        for l in &ls {
            let shifted: Vec<f64> = x.iter().zip(l).map(|(a, b)| a + b).collect();
            let y: Vec<f64> = rt_inv_f
                .iter()
                .map(|row| row.iter().zip(&shifted).map(|(a, b)| a * b).sum())
                .collect();
            sum += mask.value(&y);
        }
        max_defect = max_defect.max((sum - 1.0).abs());
    }
    Ok(QmfReport { samples, max_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ratio, vec_from_i64};

    fn lebesgue() -> (ExactMatrix, DigitSet) {
        (ExactMatrix::from_i64(&[&[2]]), DigitSet::from_i64(&[&[0], &[1]]).unwrap())
    }

    fn quarter_cantor() -> (ExactMatrix, DigitSet) {
        (ExactMatrix::from_i64(&[&[4]]), DigitSet::from_i64(&[&[0], &[2]]).unwrap())
    }

    #[test]
    fn contraction_constants_binary() {
        let (r, b) = lebesgue();
        let ev = MeasureEvaluator::new(&r, &b).unwrap();
        assert_eq!(ev.n0, 1);
        assert!((ev.rho - 0.5).abs() < 1e-15);
        assert!((ev.s_inf - 1.0).abs() < 1e-9);
        assert!((ev.beta1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mask_exact_zero_and_one() {
        let (_, b) = quarter_cantor();
        let mask = MaskEvaluator::new(&b);
        // Phases {0, 2y}: sum of two opposite unit vectors at y = 1/4.
        assert!(mask.is_zero_at(&vec![ratio(1, 4)]));
        assert!(!mask.is_zero_at(&vec![ratio(1, 8)]));
        assert!(mask.is_one_at(&vec![ratio(1, 2)]));
        assert!(mask.is_one_at(&vec![Rat::from_integer(BigInt::from(3))]));
        assert!(!mask.is_one_at(&vec![ratio(1, 4)]));
        // Float values agree.
        assert!(mask.value(&[0.25]) < 1e-15);
        assert!((mask.value(&[0.5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fourier_matches_closed_form() {
        // For R = 2, B = {0, 1}, mu is Lebesgue on [0, 1] and the transform
        // is exp(-pi i t) sin(pi t) / (pi t).
        let (r, b) = lebesgue();
        let ev = MeasureEvaluator::new(&r, &b).unwrap();
        for &t in &[0.5, 1.5, 0.125, 2.75, -0.3] {
            let got = ev.fourier(&[t], 1e-9).unwrap();
            let want = Complex64::from_polar(1.0, -std::f64::consts::PI * t)
                * ((std::f64::consts::PI * t).sin() / (std::f64::consts::PI * t));
            assert!(
                (got.value - want).norm() <= got.err + 1e-9,
                "t={t}: got {:?} want {want:?} err {}",
                got.value,
                got.err
            );
        }
        // Integer frequencies other than 0 are exact zeros of the transform.
        let at_two = ev.fourier(&[2.0], 1e-9).unwrap();
        assert!(at_two.value.norm() <= at_two.err + 1e-12);
        let at_zero = ev.fourier(&[0.0], 1e-12).unwrap();
        assert!((at_zero.value - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fourier_exact_zero_quarter_cantor() {
        // m_B(1/4) = 0, so the transform vanishes at 1: first factor dies.
        let (r, b) = quarter_cantor();
        let ev = MeasureEvaluator::new(&r, &b).unwrap();
        let v = ev.fourier(&[1.0], 1e-9).unwrap();
        assert!(v.value.norm() < 1e-14);
    }

    #[test]
    fn fourier_shifted_agrees_with_direct() {
        let (r, b) = quarter_cantor();
        let ev = MeasureEvaluator::new(&r, &b).unwrap();
        for (base, shift) in [(0.3, 5i64), (0.77, -12), (0.0, 3), (0.5, 123)] {
            let direct = ev.fourier(&[base + shift as f64], 1e-10).unwrap();
            let split = ev
                .fourier_shifted(&[base], &vec_from_i64(&[shift]), 1e-10)
                .unwrap();
            assert!(
                (direct.value - split.value).norm() < 1e-8,
                "base {base} shift {shift}: {:?} vs {:?}",
                direct.value,
                split.value
            );
        }
    }

    #[test]
    fn fourier_level_is_prefix() {
        let (r, b) = quarter_cantor();
        let ev = MeasureEvaluator::new(&r, &b).unwrap();
        let full = ev.fourier(&[0.6], 1e-10).unwrap();
        let lv = ev.fourier_level(&[0.6], &vec![Rat::from_integer(BigInt::zero())], full.depth).unwrap();
        assert!((full.value - lv).norm() < 1e-12);
    }

    #[test]
    fn depth_cap_reported() {
        let (r, b) = lebesgue();
        let mut ev = MeasureEvaluator::new(&r, &b).unwrap();
        ev.depth_cap = 4;
        let e = ev.fourier(&[0.5], 1e-12).unwrap_err();
        assert!(matches!(e, Error::DepthCapExceeded { .. }));
    }

    #[test]
    fn attractor_points_binary() {
        let (r, b) = lebesgue();
        let pts = attractor_points(&r, &b, 3, 100, 0).unwrap();
        assert_eq!(pts.len(), 8);
        let mut xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        for (i, x) in xs.iter().enumerate() {
            assert!((x - i as f64 / 8.0).abs() < 1e-12);
        }
        // Subsampling is deterministic under a fixed seed.
        let s1 = attractor_points(&r, &b, 10, 50, 9).unwrap();
        let s2 = attractor_points(&r, &b, 10, 50, 9).unwrap();
        assert_eq!(s1.len(), 50);
        assert_eq!(s1, s2);
    }

    #[test]
    fn overlap_probe() {
        let (r, _) = lebesgue();
        let fat = DigitSet::from_i64(&[&[0], &[1], &[2]]).unwrap();
        let rep = no_overlap_probe(&r, &fat, 3).unwrap();
        assert!(rep.overlap);
        assert_eq!(rep.words, 27);
        assert!(rep.distinct < 27);
        assert!(rep.witness.is_some());
        let (rq, bq) = quarter_cantor();
        let rep2 = no_overlap_probe(&rq, &bq, 5).unwrap();
        assert!(!rep2.overlap);
        assert_eq!(rep2.distinct, 32);
    }

    #[test]
    fn qmf_partition_of_unity() {
        let t = Triple::from_i64(&[&[4]], &[&[0], &[2]], &[&[0], &[1]]).unwrap();
        let rep = qmf_check(&t, 64, 1).unwrap();
        assert!(rep.max_defect < 1e-12, "defect {}", rep.max_defect);
        let t2 = Triple::from_i64(
            &[&[2, 0], &[0, 2]],
            &[&[0, 0], &[0, 3], &[1, 0], &[1, 3]],
            &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]],
        )
        .unwrap();
        let rep2 = qmf_check(&t2, 64, 2).unwrap();
        assert!(rep2.max_defect < 1e-12);
        // A non Hadamard pair violates the identity.
        let bad = Triple::from_i64(&[&[3]], &[&[0], &[2]], &[&[0], &[1]]).unwrap();
        let rep3 = qmf_check(&bad, 64, 3).unwrap();
        assert!(rep3.max_defect > 1e-3);
    }
}
