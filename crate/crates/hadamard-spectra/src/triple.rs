//! Digit sets, Hadamard verification, conjugation and reduction of triples.
//!
//! A triple is an expanding integer matrix R with digit sets B (space side)
//! and L (frequency side) of equal cardinality. The Hadamard property, the
//! unitarity of the associated exponential matrix, is decided exactly through
//! vanishing sums of roots of unity.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::cyclotomic::{roots_of_unity_sum_f64, roots_of_unity_sum_is_zero};
use crate::error::{Error, Result};
use crate::exact::{
    self, invariant_lattice, residue_system, smith_normal_form, ExactMatrix, IntVec, Lattice, Rat,
    RatVec,
};

/// Finite set of integer vectors, all of one dimension, pairwise distinct.
/// Stored sorted, so equal sets compare equal and iteration is deterministic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DigitSet {
    dim: usize,
    elems: Vec<IntVec>,
}

impl DigitSet {
    pub fn new(dim: usize, elems: Vec<IntVec>) -> Result<Self> {
        if elems.is_empty() {
            return Err(Error::BadDigitSet("empty digit set".into()));
        }
        if elems.iter().any(|e| e.len() != dim) {
            return Err(Error::BadDigitSet("digit dimension mismatch".into()));
        }
        let mut sorted = elems;
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::BadDigitSet(format!("duplicate digit {:?}", w[0])));
            }
        }
        Ok(DigitSet { dim, elems: sorted })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        Self::new(dim, rows.iter().map(|r| exact::int_vec_from_i64(r)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[IntVec] {
        &self.elems
    }

    pub fn iter(&self) -> impl Iterator<Item = &IntVec> {
        self.elems.iter()
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.elems.binary_search_by(|e| e.as_slice().cmp(v)).is_ok()
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&vec![BigInt::zero(); self.dim])
    }

    /// Lexicographically least element.
    pub fn min_elem(&self) -> &IntVec {
        &self.elems[0]
    }

    pub fn translate(&self, shift: &[BigInt]) -> DigitSet {
        let elems = self
            .elems
            .iter()
            .map(|e| e.iter().zip(shift).map(|(a, s)| a + s).collect())
            .collect();
        DigitSet { dim: self.dim, elems }
    }

    pub fn as_rat_vecs(&self) -> Vec<RatVec> {
        self.elems.iter().map(|e| exact::vec_from_ints(e)).collect()
    }

    /// Apply an exact linear map; every image must stay integral.
    pub fn map(&self, m: &ExactMatrix) -> Result<DigitSet> {
        let mut out = Vec::with_capacity(self.elems.len());
        for e in &self.elems {
            let img = m.mul_vec(&exact::vec_from_ints(e));
            if !exact::vec_is_integer(&img) {
                return Err(Error::NonIntegralConjugation(format!(
                    "digit {e:?} maps outside Z^d"
                )));
            }
            out.push(img.iter().map(|x| x.to_integer()).collect());
        }
        DigitSet::new(m.rows(), out)
    }

    /// Keep the first r coordinates of every digit.
    pub fn project(&self, r: usize) -> Result<DigitSet> {
        DigitSet::new(r, self.elems.iter().map(|e| e[..r].to_vec()).collect())
    }
}

impl std::fmt::Debug for DigitSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elems.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "(")?;
            for (j, x) in e.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        write!(f, "}}")
    }
}

/// One step in the history mapping an original triple to its current form.
#[derive(Debug, Clone)]
pub enum ConjugationRecord {
    /// B was shifted by -b_shift, L by -l_shift.
    Translation { b_shift: IntVec, l_shift: IntVec },
    /// Conjugation by a unimodular integer matrix m: R -> mRm^{-1}, B -> mB,
    /// L -> (m^T)^{-1} L.
    Unimodular { m: ExactMatrix },
    /// Conjugation by the inverse of a lattice basis; same formulas with a
    /// rational m, all images verified integral.
    LatticeRescale { m: ExactMatrix },
    /// The triple lived in the first `kept` coordinates; `dropped` trailing
    /// coordinates were removed.
    DimensionDrop { kept: usize, dropped: usize },
}

/// Expanding matrix with paired digit and frequency sets.
#[derive(Clone)]
pub struct Triple {
    pub r: ExactMatrix,
    pub b: DigitSet,
    pub l: DigitSet,
    pub history: Vec<ConjugationRecord>,
}

impl std::fmt::Debug for Triple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Triple(R={}, B={:?}, L={:?})", self.r, self.b, self.l)
    }
}

impl Triple {
    pub fn new(r: ExactMatrix, b: DigitSet, l: DigitSet) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::Shape("expansion must be square".into()));
        }
        if !r.is_integer() {
            return Err(Error::NotIntegral("expansion must be integral".into()));
        }
        let d = r.rows();
        if b.dim() != d || l.dim() != d {
            return Err(Error::Shape(format!(
                "digit dimension {} / frequency dimension {} vs matrix dimension {d}",
                b.dim(),
                l.dim()
            )));
        }
        if b.len() != l.len() {
            return Err(Error::CardinalityMismatch { b: b.len(), l: l.len() });
        }
        Ok(Triple { r, b, l, history: Vec::new() })
    }

    pub fn from_i64(r: &[&[i64]], b: &[&[i64]], l: &[&[i64]]) -> Result<Self> {
        Triple::new(ExactMatrix::from_i64(r), DigitSet::from_i64(b)?, DigitSet::from_i64(l)?)
    }

    pub fn dim(&self) -> usize {
        self.r.rows()
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn require_expanding(&self) -> Result<()> {
        if exact::is_expansive(&self.r)? {
            Ok(())
        } else {
            Err(Error::NotExpansive)
        }
    }

    /// Shift B and L so both contain 0; identity if they already do.
    pub fn translate_to_zero(&self) -> Triple {
        if self.b.contains_zero() && self.l.contains_zero() {
            return self.clone();
        }
        let b0 = self.b.min_elem().clone();
        let l0 = self.l.min_elem().clone();
        let nb: IntVec = b0.iter().map(|x| -x).collect();
        let nl: IntVec = l0.iter().map(|x| -x).collect();
        let mut out = self.clone();
        out.b = self.b.translate(&nb);
        out.l = self.l.translate(&nl);
        out.history.push(ConjugationRecord::Translation { b_shift: b0, l_shift: l0 });
        out
    }

    /// Conjugate by m: R -> mRm^{-1}, B -> mB, L -> (m^T)^{-1}L. m may be any
    /// invertible rational matrix as long as all three images stay integral.
    pub fn conjugate(&self, m: &ExactMatrix) -> Result<Triple> {
        let m_inv = m.inverse()?;
        let r2 = m.mul(&self.r).mul(&m_inv);
        if !r2.is_integer() {
            return Err(Error::NonIntegralConjugation(format!("expansion image {r2}")));
        }
        let b2 = self.b.map(m)?;
        let l2 = self.l.map(&m.transpose().inverse()?)?;
        let mut out = Triple::new(r2, b2, l2)?;
        out.history = self.history.clone();
        let unimodular = m.det()?.abs().is_one();
        out.history.push(if unimodular {
            ConjugationRecord::Unimodular { m: m.clone() }
        } else {
            ConjugationRecord::LatticeRescale { m: m.clone() }
        });
        debug_assert_eq!(
            check_hadamard(self).map(|v| v.pass),
            check_hadamard(&out).map(|v| v.pass),
            "conjugation must preserve the Hadamard verdict"
        );
        Ok(out)
    }
}

/// Verdict of the exact Hadamard test. On failure the offending digit pair
/// is reported.
#[derive(Debug, Clone)]
pub struct HadamardVerdict {
    pub pass: bool,
    pub witness: Option<(IntVec, IntVec)>,
}

/// Exact unitarity check: for every pair b != b' in B the sum over l in L of
/// exp(2 pi i <R^{-1}(b - b'), l>) must vanish.
pub fn check_hadamard(t: &Triple) -> Result<HadamardVerdict> {
    let r_inv = t.r.inverse().map_err(|_| Error::SingularModulus)?;
    let ls: Vec<RatVec> = t.l.as_rat_vecs();
    for (i, b1) in t.b.iter().enumerate() {
        for b2 in t.b.iter().skip(i + 1) {
            let diff: RatVec = b1
                .iter()
                .zip(b2)
                .map(|(x, y)| Rat::from_integer(x - y))
                .collect();
            let v = r_inv.mul_vec(&diff);
            let ts: Vec<Rat> = ls.iter().map(|l| exact::vec_dot(&v, l)).collect();
            if !roots_of_unity_sum_is_zero(&ts) {
                return Ok(HadamardVerdict { pass: false, witness: Some((b1.clone(), b2.clone())) });
            }
        }
    }
    Ok(HadamardVerdict { pass: true, witness: None })
}

/// Maximum deviation of H*H from the identity in floating point, for
/// cross-checking the exact verdict.
pub fn hadamard_float_defect(t: &Triple) -> Result<f64> {
    let r_inv = t.r.inverse()?;
    let ls = t.l.as_rat_vecs();
    let n = t.n() as f64;
    let mut worst: f64 = 0.0;
    for (i, b1) in t.b.iter().enumerate() {
        for (j, b2) in t.b.iter().enumerate() {
            let diff: RatVec = b1
                .iter()
                .zip(b2)
                .map(|(x, y)| Rat::from_integer(x - y))
                .collect();
            let v = r_inv.mul_vec(&diff);
            let ts: Vec<Rat> = ls.iter().map(|l| exact::vec_dot(&v, l)).collect();
            let s = roots_of_unity_sum_f64(&ts) / n;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s.re - target).abs().max(s.im.abs()));
        }
    }
    Ok(worst)
}

/// Distinctness of digits modulo R(Z^d); a witness pair is reported when two
/// digits share a class.
pub fn check_simple_digit_set(r: &ExactMatrix, digits: &DigitSet) -> Result<HadamardVerdict> {
    let rs = residue_system(r)?;
    let mut seen: std::collections::HashMap<IntVec, IntVec> = std::collections::HashMap::new();
    for d in digits.iter() {
        let c = rs.canonical(d);
        if let Some(prev) = seen.get(&c) {
            return Ok(HadamardVerdict { pass: false, witness: Some((prev.clone(), d.clone())) });
        }
        seen.insert(c, d.clone());
    }
    Ok(HadamardVerdict { pass: true, witness: None })
}

/// Strategy for picking representatives of the residue classes a frequency
/// set misses when completing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompletionStrategy {
    /// Canonical representatives from the Smith fundamental box.
    #[default]
    Canonical,
    /// Smallest sup-norm representative near the origin, ties broken
    /// lexicographically.
    NearZero,
}

/// Extend L to a full residue system modulo R^T(Z^d) containing L itself.
/// Errors if two elements of L already share a class.
pub fn complete_representatives_containing(
    r: &ExactMatrix,
    l: &DigitSet,
    strategy: CompletionStrategy,
) -> Result<Vec<IntVec>> {
    let rt = r.transpose();
    let rs = residue_system(&rt)?;
    let mut used: std::collections::HashMap<IntVec, IntVec> = std::collections::HashMap::new();
    for e in l.iter() {
        let c = rs.canonical(e);
        if let Some(prev) = used.get(&c) {
            return Err(Error::NotCompleteResidues(format!(
                "{prev:?} and {e:?} are congruent mod R^T"
            )));
        }
        used.insert(c, e.clone());
    }
    let mut out: Vec<IntVec> = l.iter().cloned().collect();
    for rep in &rs.reps {
        if used.contains_key(rep) {
            continue;
        }
        let chosen = match strategy {
            CompletionStrategy::Canonical => rep.clone(),
            CompletionStrategy::NearZero => near_zero_in_class(&rt, rep),
        };
        out.push(chosen);
    }
    Ok(out)
}

/// Smallest sup-norm vector congruent to rep modulo the column lattice of m,
/// searched over a small shift box; deterministic tie break.
fn near_zero_in_class(m: &ExactMatrix, rep: &IntVec) -> IntVec {
    let d = m.rows();
    let mut best = rep.clone();
    let mut best_norm = sup_norm_int(&best);
    let mut shifts = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for s in &shifts {
            for k in -2i64..=2 {
                let mut t = s.clone();
                t.push(BigInt::from(k));
                next.push(t);
            }
        }
        shifts = next;
    }
    for s in shifts {
        let offset = m.mul_vec(&exact::vec_from_ints(&s));
        let cand: IntVec = rep
            .iter()
            .zip(&offset)
            .map(|(x, o)| x + o.to_integer())
            .collect();
        let n = sup_norm_int(&cand);
        if n < best_norm || (n == best_norm && cand < best) {
            best_norm = n;
            best = cand;
        }
    }
    best
}

fn sup_norm_int(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(BigInt::zero)
}

/// Outcome of reduction: either the triple already generates Z^d, or a
/// conjugate (possibly lower-dimensional) triple that does, with its history.
#[derive(Debug, Clone)]
pub enum ReduceOutcome {
    Unchanged(Triple),
    Reduced(Triple),
}

impl ReduceOutcome {
    pub fn triple(&self) -> &Triple {
        match self {
            ReduceOutcome::Unchanged(t) | ReduceOutcome::Reduced(t) => t,
        }
    }

    pub fn changed(&self) -> bool {
        matches!(self, ReduceOutcome::Reduced(_))
    }
}

/// Normalize a triple until its digit lattice is the full integer lattice:
/// translate so 0 is a digit, drop to the span of the lattice when it is
/// rank-deficient, and rescale coordinates when it is a proper full-rank
/// sublattice.
pub fn reduce_triple(t: &Triple) -> Result<ReduceOutcome> {
    let mut cur = t.translate_to_zero();
    let mut changed = cur.history.len() != t.history.len();
    for _ in 0..(t.dim() + 2) {
        let d = cur.dim();
        let lat = invariant_lattice(&cur.r, cur.b.elems())?;
        if lat.rank() < d {
            cur = drop_to_span(&cur, &lat)?;
            changed = true;
            continue;
        }
        if lat.is_standard() {
            return Ok(if changed {
                ReduceOutcome::Reduced(cur)
            } else {
                ReduceOutcome::Unchanged(cur)
            });
        }
        // Full-rank proper sublattice: pull it back to Z^d.
        let m = lat.basis().inverse()?;
        cur = cur.conjugate(&m)?;
        changed = true;
    }
    Err(Error::BudgetExhausted("reduction did not terminate".into()))
}

/// Conjugate by a unimodular matrix sending the lattice span to the first
/// coordinates, then drop the trailing zero coordinates.
fn drop_to_span(t: &Triple, lat: &Lattice) -> Result<Triple> {
    let rank = lat.rank();
    let sf = smith_normal_form(lat.basis())?;
    // u maps the span onto the first `rank` coordinates.
    let n = sf.u.clone();
    let conj = t.conjugate(&n)?;
    // The conjugated expansion preserves R^rank x {0}; its lower-left block
    // must vanish identically.
    for i in rank..t.dim() {
        for j in 0..rank {
            if !conj.r.get(i, j).is_zero() {
                return Err(Error::NotInvariant(format!(
                    "expansion does not preserve the digit span: entry ({i},{j}) = {}",
                    conj.r.get(i, j)
                )));
            }
        }
    }
    let mut r_sub = ExactMatrix::zero(rank, rank);
    for i in 0..rank {
        for j in 0..rank {
            r_sub.set(i, j, conj.r.get(i, j).clone());
        }
    }
    for e in conj.b.iter() {
        if e[rank..].iter().any(|x| !x.is_zero()) {
            return Err(Error::NotInvariant(format!("digit {e:?} outside the span")));
        }
    }
    let mut out = Triple::new(r_sub, conj.b.project(rank)?, conj.l.project(rank)?)?;
    out.history = conj.history;
    out.history.push(ConjugationRecord::DimensionDrop { kept: rank, dropped: t.dim() - rank });
    Ok(out)
}

/// Exhaustive search for a frequency set making (R, B, L) Hadamard, over
/// subsets of the integer box [-bound, bound]^d of size #B. Deterministic
/// lexicographic order; None when the box holds no companion.
pub fn search_hadamard_companion(
    r: &ExactMatrix,
    b: &DigitSet,
    bound: i64,
) -> Result<Option<DigitSet>> {
    let d = r.rows();
    let n = b.len();
    let mut points: Vec<IntVec> = Vec::new();
    let width = (2 * bound + 1) as u128;
    let total = width.pow(d as u32);
    if total > 20_000 {
        return Err(Error::TooLarge(format!("{total} box points")));
    }
    let mut idx = vec![-bound; d];
    loop {
        points.push(idx.iter().map(|&v| BigInt::from(v)).collect());
        let mut k = d;
        loop {
            if k == 0 {
                idx.clear();
                break;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] <= bound {
                break;
            }
            idx[k] = -bound;
        }
        if idx.is_empty() {
            break;
        }
    }
    points.sort();
    let combos = n_choose_k_count(points.len(), n);
    if combos > 5_000_000 {
        return Err(Error::TooLarge(format!("{combos} candidate sets")));
    }
    let mut choice = Vec::with_capacity(n);
    search_subsets(r, b, &points, 0, &mut choice)
}

fn n_choose_k_count(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn search_subsets(
    r: &ExactMatrix,
    b: &DigitSet,
    points: &[IntVec],
    start: usize,
    choice: &mut Vec<IntVec>,
) -> Result<Option<DigitSet>> {
    if choice.len() == b.len() {
        let l = DigitSet::new(b.dim(), choice.clone())?;
        let t = Triple::new(r.clone(), b.clone(), l.clone())?;
        if check_hadamard(&t)?.pass {
            return Ok(Some(l));
        }
        return Ok(None);
    }
    for i in start..points.len() {
        choice.push(points[i].clone());
        if let Some(found) = search_subsets(r, b, points, i + 1, choice)? {
            return Ok(Some(found));
        }
        choice.pop();
    }
    Ok(None)
}
