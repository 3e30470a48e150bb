//! Quasi-product structure of a block triangular triple.
//!
//! After block normalization the expansion is [[R1, 0], [C, R2]]. This
//! module decides whether the digits split as base digits u_i carrying
//! fibers d_{i,j} congruent modulo a proper lattice Gamma, extracts the base
//! triple and the rescaled fibers, and picks the lattice spanning the fiber
//! side of a product spectrum. Frequencies can be renormalized modulo
//! R^T Z^d so equal fiber classes share a representative, which is what the
//! product construction needs.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{
    self, dual_lattice, kernel_lattice, sublattices_of_index, ExactMatrix, IntVec, Lattice, Rat,
    RatVec,
};
use crate::measure::{MeasureEvaluator, MuValue};
use crate::triple::{check_hadamard, check_simple_digit_set, DigitSet, Triple};

/// Verify the expansion of a triple is block lower triangular at the given
/// split and return (r1, c, r2).
fn blocks_at(t: &Triple, split: usize) -> Result<(ExactMatrix, ExactMatrix, ExactMatrix)> {
    let d = t.dim();
    if split == 0 || split >= d {
        return Err(Error::Shape(format!("split {split} of dimension {d}")));
    }
    for i in 0..split {
        for j in split..d {
            if !t.r.get(i, j).is_zero() {
                return Err(Error::NotInvariant(format!(
                    "expansion not block triangular: entry ({i},{j}) = {}",
                    t.r.get(i, j)
                )));
            }
        }
    }
    let take = |r0: usize, c0: usize, nr: usize, nc: usize| {
        let mut out = ExactMatrix::zero(nr, nc);
        for i in 0..nr {
            for j in 0..nc {
                out.set(i, j, t.r.get(r0 + i, c0 + j).clone());
            }
        }
        out
    };
    Ok((
        take(0, 0, split, split),
        take(split, 0, d - split, split),
        take(split, split, d - split, d - split),
    ))
}

/// Replace each frequency by a representative modulo R^T Z^d whose tail
/// component equals the class target: within each class of l_2 modulo
/// R2^T Z^{d-split} the target is the tail of the lexicographically least
/// member. Replacing l by l - R^T k never changes a Hadamard sum. Two
/// frequencies collapsing to one representative means they were congruent
/// modulo R^T Z^d, so the input could not have been Hadamard.
pub fn normalize_l(t: &Triple, split: usize) -> Result<Triple> {
    let d = t.dim();
    let (_, c, r2) = blocks_at(t, split)?;
    let r2t = r2.transpose();
    let r2t_inv = r2t.inverse()?;
    let ct = c.transpose();
    let rs = exact::residue_system(&r2t)?;
    // Class key -> lexicographically least member.
    let mut leaders: BTreeMap<IntVec, IntVec> = BTreeMap::new();
    for l in t.l.iter() {
        let key = rs.canonical(&l[split..]);
        let cur = leaders.entry(key).or_insert_with(|| l.clone());
        if l < cur {
            *cur = l.clone();
        }
    }
    let mut new_l: Vec<IntVec> = Vec::with_capacity(t.l.len());
    for l in t.l.iter() {
        let key = rs.canonical(&l[split..]);
        let target = &leaders[&key][split..];
        let diff: RatVec = l[split..]
            .iter()
            .zip(target)
            .map(|(a, b)| Rat::from_integer(a - b))
            .collect();
        let k2 = r2t_inv.mul_vec(&diff);
        if !exact::vec_is_integer(&k2) {
            return Err(Error::NotIntegral("class solve left the integer lattice".into()));
        }
        let shift1 = ct.mul_vec(&k2);
        let mut out: IntVec = Vec::with_capacity(d);
        for (i, x) in l[..split].iter().enumerate() {
            out.push(x - shift1[i].to_integer());
        }
        out.extend(target.iter().cloned());
        new_l.push(out);
    }
    {
        let full = exact::residue_system(&t.r.transpose())?;
        let mut canon: Vec<IntVec> = new_l.iter().map(|l| full.canonical(l)).collect();
        canon.sort();
        canon.dedup();
        if canon.len() != new_l.len() {
            return Err(Error::NotCompleteResidues(
                "two frequencies are congruent mod R^T Z^d; the system is not Hadamard".into(),
            ));
        }
    }
    let mut out = Triple::new(t.r.clone(), t.b.clone(), DigitSet::new(d, new_l)?)?;
    out.history = t.history.clone();
    debug_assert_eq!(
        check_hadamard(t).map(|v| v.pass),
        check_hadamard(&out).map(|v| v.pass),
        "frequency renormalization must preserve the Hadamard verdict"
    );
    Ok(out)
}

/// Digits grouped by their first `split` coordinates, sorted by base digit.
pub fn group_fibers(b: &DigitSet, split: usize) -> Vec<(IntVec, Vec<IntVec>)> {
    let mut groups: BTreeMap<IntVec, Vec<IntVec>> = BTreeMap::new();
    for digit in b.iter() {
        groups
            .entry(digit[..split].to_vec())
            .or_default()
            .push(digit[split..].to_vec());
    }
    groups.into_iter().collect()
}

/// A triple recognized as a quasi-product over a block split.
#[derive(Debug, Clone)]
pub struct QuasiProduct {
    /// Block triple with normalized frequencies.
    pub triple: Triple,
    pub split: usize,
    pub r1: ExactMatrix,
    pub r2: ExactMatrix,
    pub c: ExactMatrix,
    /// Fiber congruence lattice in Z^{d - split}: all fiber digits of one
    /// base digit agree modulo gamma.
    pub gamma: Lattice,
    /// Basis of gamma.
    pub q: ExactMatrix,
    /// Fiber expansion in gamma coordinates, Q^{-1} R2 Q.
    pub r2_tilde: ExactMatrix,
    /// Distinct base digits u_i, sorted.
    pub base_digits: Vec<IntVec>,
    /// Least fiber digit v_i per base digit.
    pub fiber_offsets: Vec<IntVec>,
    /// Rescaled fibers Q^{-1}(d_{i,j} - v_i), complete residues mod r2_tilde.
    pub fibers: Vec<Vec<IntVec>>,
    /// Distinct frequency tails t_2 after normalization, sorted.
    pub l_targets: Vec<IntVec>,
    /// Base triple (r1, base digits, frequency heads of the least tail).
    pub base: Triple,
}

impl QuasiProduct {
    pub fn n1(&self) -> usize {
        self.base_digits.len()
    }

    pub fn n2(&self) -> usize {
        self.fibers.first().map_or(0, |f| f.len())
    }
}

/// Decide quasi-product structure of a block triple against the witness
/// tail y0: the fiber congruence lattice is
/// Gamma = {x : <x, (R2^T)^j y0> integral for all j below the period}.
pub fn detect_quasi_product(t: &Triple, split: usize, y0: &RatVec) -> Result<QuasiProduct> {
    let d = t.dim();
    let d2 = d - split;
    let (r1, c, r2) = blocks_at(t, split)?;
    if y0.len() != d2 {
        return Err(Error::Shape("witness tail dimension".into()));
    }
    let r2t = r2.transpose();
    // Period of the witness tail under R2^T mod Z^{d2}.
    let y = exact::vec_fract(y0);
    let mut period = 0u32;
    let mut cur = y.clone();
    for step in 1..=256u32 {
        cur = exact::vec_fract(&r2t.mul_vec(&cur));
        if cur == y {
            period = step;
            break;
        }
    }
    if period == 0 {
        return Err(Error::NotQuasiProduct("witness tail is not periodic".into()));
    }
    // Gamma as the projection of an integer kernel: q_j <x, y_j> = q_j t_j
    // for integers t_j, rows scaled integral.
    let mut rows: Vec<RatVec> = Vec::new();
    let mut yj = y.clone();
    for _ in 0..period {
        rows.push(yj.clone());
        yj = r2t.mul_vec(&yj);
    }
    let m = period as usize;
    let mut sys = ExactMatrix::zero(m, d2 + m);
    for (j, row) in rows.iter().enumerate() {
        let q: BigInt = row
            .iter()
            .fold(BigInt::from(1), |acc, v| num_integer::lcm(acc, v.denom().clone()));
        let qr = Rat::from_integer(q.clone());
        for (i, v) in row.iter().enumerate() {
            sys.set(j, i, v * &qr);
        }
        sys.set(j, d2 + j, Rat::from_integer(q));
    }
    let ker = kernel_lattice(&sys)?;
    let gens: Vec<RatVec> = (0..ker.rank())
        .map(|k| ker.basis().col(k)[..d2].to_vec())
        .collect();
    let gamma = Lattice::from_generators(d2, &gens)?;
    if !gamma.is_full_rank() {
        return Err(Error::NotQuasiProduct("fiber congruence lattice is degenerate".into()));
    }
    if gamma.is_standard() {
        return Err(Error::FiberLatticeFull);
    }
    let q = gamma.basis().clone();
    let q_inv = q.inverse()?;
    let r2_tilde = q_inv.mul(&r2).mul(&q);
    if !r2_tilde.is_integer() {
        return Err(Error::NotQuasiProduct(
            "fiber lattice is not stable under the tail expansion".into(),
        ));
    }
    // Fibers: equal sizes, offsets congruent mod gamma, rescaled digits a
    // complete residue system mod the rescaled expansion.
    let nt = normalize_l(t, split)?;
    let groups = group_fibers(&nt.b, split);
    let n1 = groups.len();
    if !t.b.len().is_multiple_of(n1) {
        return Err(Error::NotQuasiProduct("unequal fiber sizes".into()));
    }
    let n2 = t.b.len() / n1;
    let det2 = r2_tilde
        .det()?
        .abs()
        .to_integer()
        .to_usize()
        .ok_or_else(|| Error::TooLarge("fiber determinant".into()))?;
    if n2 != det2 {
        return Err(Error::NotQuasiProduct(format!(
            "fiber size {n2} does not match the tail determinant {det2}"
        )));
    }
    let mut base_digits = Vec::with_capacity(n1);
    let mut fiber_offsets = Vec::with_capacity(n1);
    let mut fibers = Vec::with_capacity(n1);
    for (u, fiber) in groups {
        if fiber.len() != n2 {
            return Err(Error::NotQuasiProduct("unequal fiber sizes".into()));
        }
        let v = fiber.iter().min().unwrap().clone();
        let mut rescaled = Vec::with_capacity(n2);
        for digit in &fiber {
            let diff: RatVec = digit
                .iter()
                .zip(&v)
                .map(|(a, b)| Rat::from_integer(a - b))
                .collect();
            if !gamma.contains(&diff) {
                return Err(Error::NotQuasiProduct(format!(
                    "fiber digits of base {u:?} do not agree mod the fiber lattice"
                )));
            }
            let scaled = q_inv.mul_vec(&diff);
            rescaled.push(scaled.iter().map(|x| x.to_integer()).collect::<IntVec>());
        }
        let fiber_set = DigitSet::new(d2, rescaled.clone())?;
        let simple = check_simple_digit_set(&r2_tilde, &fiber_set)?;
        if !simple.pass {
            return Err(Error::NotCompleteResidues(format!(
                "rescaled fiber of base {u:?} repeats a class"
            )));
        }
        base_digits.push(u);
        fiber_offsets.push(v);
        fibers.push(rescaled);
    }
    // Frequency side: tails take n2 values, each carried by n1 heads; the
    // heads of the least tail form the base frequency set.
    let l_groups = group_fibers(&nt.l, split);
    let mut tail_groups: BTreeMap<IntVec, Vec<IntVec>> = BTreeMap::new();
    for (head, tails) in &l_groups {
        for tail in tails {
            tail_groups.entry(tail.clone()).or_default().push(head.clone());
        }
    }
    if tail_groups.len() != n2 || tail_groups.values().any(|heads| heads.len() != n1) {
        return Err(Error::NotQuasiProduct("frequencies do not split over fiber classes".into()));
    }
    let l_targets: Vec<IntVec> = tail_groups.keys().cloned().collect();
    let base_heads = tail_groups.values().next().unwrap().clone();
    let base = Triple::new(
        r1.clone(),
        DigitSet::new(split, base_digits.clone())?,
        DigitSet::new(split, base_heads)?,
    )?;
    if !check_hadamard(&base)?.pass {
        return Err(Error::NotQuasiProduct("base system is not Hadamard".into()));
    }
    Ok(QuasiProduct {
        triple: nt,
        split,
        r1,
        r2,
        c,
        gamma,
        q,
        r2_tilde,
        base_digits,
        fiber_offsets,
        fibers,
        l_targets,
        base,
    })
}

/// The one-sided systems induced by a quasi-product split, every one of
/// them verified Hadamard.
#[derive(Debug, Clone)]
pub struct ProjectedTriples {
    /// One head system per frequency tail, in sorted tail order: the base
    /// expansion, the base digits, and the heads of the frequencies
    /// sharing that tail.
    pub bases: Vec<Triple>,
    /// One tail system per base digit, in sorted base digit order: the
    /// tail expansion, the tail digits carried by that base digit, and the
    /// frequency tails.
    pub fibers: Vec<Triple>,
}

/// Project a quasi-product onto its two blocks. Digits regroup as tails
/// under each head and frequencies as heads over each tail; every induced
/// pairing must itself be Hadamard, and the counts are forced: each base
/// digit carries |det R2| tail digits, the tails take |det R2| distinct
/// values, and each tail is carried by one head per base digit. Groups are
/// rebuilt from the stored triple, so tampered digit data fails here.
pub fn project_triples(qp: &QuasiProduct) -> Result<ProjectedTriples> {
    let t = &qp.triple;
    let split = qp.split;
    let d2 = t.dim() - split;
    let det2 = qp
        .r2
        .det()?
        .abs()
        .to_integer()
        .to_usize()
        .ok_or_else(|| Error::TooLarge("tail determinant".into()))?;
    let b_groups = group_fibers(&t.b, split);
    let n1 = b_groups.len();
    let mut tail_heads: BTreeMap<IntVec, Vec<IntVec>> = BTreeMap::new();
    for (head, tails) in group_fibers(&t.l, split) {
        for tail in tails {
            tail_heads.entry(tail).or_default().push(head.clone());
        }
    }
    let n2 = tail_heads.len();
    for (_, fiber) in &b_groups {
        if fiber.len() != n2 {
            return Err(Error::CardinalityMismatch { b: fiber.len(), l: n2 });
        }
    }
    if n2 != det2 {
        return Err(Error::NotQuasiProduct(format!(
            "{n2} frequency tails against tail determinant {det2}"
        )));
    }
    for heads in tail_heads.values() {
        if heads.len() != n1 {
            return Err(Error::CardinalityMismatch { b: n1, l: heads.len() });
        }
    }
    let base_digits = DigitSet::new(split, b_groups.iter().map(|(u, _)| u.clone()).collect())?;
    let tail_set = DigitSet::new(d2, tail_heads.keys().cloned().collect())?;
    let mut bases = Vec::with_capacity(n2);
    for (tail, heads) in &tail_heads {
        let tri = Triple::new(
            qp.r1.clone(),
            base_digits.clone(),
            DigitSet::new(split, heads.clone())?,
        )?;
        if !check_hadamard(&tri)?.pass {
            return Err(Error::NotQuasiProduct(format!(
                "head system of frequency tail {tail:?} is not Hadamard"
            )));
        }
        bases.push(tri);
    }
    let mut fibers = Vec::with_capacity(n1);
    for (u, fiber) in &b_groups {
        let tri = Triple::new(
            qp.r2.clone(),
            DigitSet::new(d2, fiber.clone())?,
            tail_set.clone(),
        )?;
        if !check_hadamard(&tri)?.pass {
            return Err(Error::NotQuasiProduct(format!(
                "tail system of base digit {u:?} is not Hadamard"
            )));
        }
        fibers.push(tri);
    }
    Ok(ProjectedTriples { bases, fibers })
}

/// How to extend a finite base word when evaluating a conditional fiber
/// transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WordExtension {
    /// Repeat the word periodically.
    #[default]
    PeriodicPrefix,
    /// Continue with the first symbol forever.
    ConstantFirst,
}

/// Conditional fiber transforms: fixing an infinite base word w, the fiber
/// component is an independent digit sum with level-n digit set given by the
/// fiber of w(n), and its transform is the product of per-fiber masks.
pub struct FiberSystem {
    pub base_digits: Vec<IntVec>,
    fibers_f: Vec<Vec<Vec<f64>>>,
    rt2_inv_f: Vec<f64>,
    d2: usize,
    s_inf: f64,
    beta1: f64,
    pub depth_cap: u32,
}

impl FiberSystem {
    pub fn new(t: &Triple, split: usize) -> Result<Self> {
        let (_, _, r2) = blocks_at(t, split)?;
        if !exact::is_expansive(&r2)? {
            return Err(Error::NotExpansive);
        }
        let d2 = t.dim() - split;
        let rt2_inv = r2.transpose().inverse()?;
        let rt2_inv_f: Vec<f64> = (0..d2)
            .flat_map(|i| (0..d2).map(move |j| (i, j)))
            .map(|(i, j)| exact::rat_to_f64(rt2_inv.get(i, j)))
            .collect();
        let s_inf = exact::rat_to_f64(&exact::geometric_norm_sum(&rt2_inv)?) * (1.0 + 1e-12);
        let groups = group_fibers(&t.b, split);
        let beta1 = groups
            .iter()
            .flat_map(|(_, f)| f.iter())
            .map(|digit| {
                digit
                    .iter()
                    .map(|x| x.abs().to_f64().unwrap())
                    .sum::<f64>()
            })
            .fold(0.0f64, f64::max);
        let base_digits = groups.iter().map(|(u, _)| u.clone()).collect();
        let fibers_f = groups
            .iter()
            .map(|(_, f)| {
                f.iter()
                    .map(|digit| digit.iter().map(|x| x.to_f64().unwrap()).collect())
                    .collect()
            })
            .collect();
        Ok(FiberSystem {
            base_digits,
            fibers_f,
            rt2_inv_f,
            d2,
            s_inf,
            beta1,
            depth_cap: 64,
        })
    }

    pub fn word_count(&self) -> usize {
        self.base_digits.len()
    }

    /// Transform of the fiber sum conditioned on the base word, with the
    /// same certified truncation as the full measure. `word` holds indices
    /// into base_digits; levels beyond the word follow the extension rule.
    pub fn g(
        &self,
        word: &[usize],
        ext: WordExtension,
        xi2: &[f64],
        tol: f64,
    ) -> Result<MuValue> {
        if word.is_empty() {
            return Err(Error::Input("empty base word".into()));
        }
        if xi2.len() != self.d2 {
            return Err(Error::Shape("fiber frequency dimension".into()));
        }
        if let Some(&bad) = word.iter().find(|&&i| i >= self.fibers_f.len()) {
            return Err(Error::Input(format!("base symbol {bad} out of range")));
        }
        let symbol_at = |n: usize| -> usize {
            if n < word.len() {
                word[n]
            } else {
                match ext {
                    WordExtension::PeriodicPrefix => word[n % word.len()],
                    WordExtension::ConstantFirst => word[0],
                }
            }
        };
        let mut y = xi2.to_vec();
        let mut prod = num_complex::Complex64::new(1.0, 0.0);
        for depth in 1..=self.depth_cap {
            let mut out = vec![0.0; self.d2];
            for i in 0..self.d2 {
                let mut acc = 0.0;
                for j in 0..self.d2 {
                    acc += self.rt2_inv_f[i * self.d2 + j] * y[j];
                }
                out[i] = acc;
            }
            y = out;
            let fiber = &self.fibers_f[symbol_at(depth as usize - 1)];
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for digit in fiber {
                let phase: f64 = digit.iter().zip(&y).map(|(a, b)| a * b).sum();
                acc += num_complex::Complex64::from_polar(
                    1.0,
                    -std::f64::consts::TAU * phase.fract(),
                );
            }
            prod *= acc / fiber.len() as f64;
            let norm = y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            let err = (std::f64::consts::TAU * self.beta1 * self.s_inf * norm).exp_m1();
            if err <= tol {
                return Ok(MuValue { value: prod, err, depth });
            }
        }
        Err(Error::DepthCapExceeded { achieved: f64::INFINITY, requested: tol })
    }
}

/// Auxiliary digit system pairing base digit indices with rescaled fibers:
/// expansion diag(n1, r2_tilde) with digits (i, f) for f in fiber i. The
/// digits form a complete residue system, so the attractor tiles and lattice
/// spectra of this system screen fiber lattice candidates cheaply.
pub fn screening_system(qp: &QuasiProduct) -> Result<Triple> {
    let n1 = qp.n1();
    let d2 = qp.r2_tilde.rows();
    let d = 1 + d2;
    let mut r = ExactMatrix::zero(d, d);
    r.set(0, 0, exact::rat(n1 as i64));
    for i in 0..d2 {
        for j in 0..d2 {
            r.set(1 + i, 1 + j, qp.r2_tilde.get(i, j).clone());
        }
    }
    let mut digits: Vec<IntVec> = Vec::new();
    for (i, fiber) in qp.fibers.iter().enumerate() {
        for f in fiber {
            let mut v: IntVec = vec![BigInt::from(i)];
            v.extend(f.iter().cloned());
            digits.push(v);
        }
    }
    let b = DigitSet::new(d, digits)?;
    let simple = check_simple_digit_set(&r, &b)?;
    debug_assert!(simple.pass, "screening digits must be a residue system");
    if !simple.pass {
        return Err(Error::NotCompleteResidues("screening system degenerate".into()));
    }
    // No frequency side; reuse the digit set as a placeholder of equal size.
    Triple::new(r, b.clone(), b)
}

/// Where an accepted fiber lattice candidate came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gamma2Source {
    /// Dual of the fiber congruence lattice.
    DualOfFiberLattice,
    /// The integer lattice itself.
    IntegerLattice,
    /// Dual of an enumerated sublattice of the given index.
    SublatticeDual { index: u64 },
}

/// Accepted fiber-side spectrum lattice, in the block coordinates of the
/// tail variables.
#[derive(Debug, Clone)]
pub struct Gamma2Choice {
    pub lattice: Lattice,
    pub source: Gamma2Source,
    pub screen_defect: f64,
}

/// Pick the lattice spanning the fiber side of a product spectrum.
/// Candidates in deterministic order: dual of gamma, Z^{d2}, duals of
/// sublattices of index up to index_bound. A candidate is accepted when
/// lattice sums of squared transform moduli of the screening measure come
/// within tol of one on a small grid.
pub fn candidate_gamma2(
    qp: &QuasiProduct,
    index_bound: u64,
    grid: usize,
    trunc: i64,
    tol: f64,
) -> Result<Gamma2Choice> {
    let d2 = qp.r2_tilde.rows();
    let mut candidates: Vec<(Lattice, Gamma2Source)> = vec![
        (dual_lattice(&qp.gamma)?, Gamma2Source::DualOfFiberLattice),
        (Lattice::standard(d2), Gamma2Source::IntegerLattice),
    ];
    for sub in sublattices_of_index(d2, index_bound)? {
        let index = sub
            .covolume()?
            .to_integer()
            .to_u64()
            .ok_or_else(|| Error::TooLarge("sublattice index".into()))?;
        let dual = dual_lattice(&sub)?;
        if candidates.iter().any(|(lat, _)| lat == &dual) {
            continue;
        }
        candidates.push((dual, Gamma2Source::SublatticeDual { index }));
    }
    for (lat, source) in candidates {
        if let Some(defect) = screen_candidate(qp, &lat, grid, trunc, tol)? {
            return Ok(Gamma2Choice { lattice: lat, source, screen_defect: defect });
        }
    }
    Err(Error::NoFiberLattice { index_bound })
}

/// Screen one candidate: Some(defect) when accepted. The candidate lattice
/// is mapped to screening coordinates by Q^T; with several base digits the
/// screening measure gains a unit interval factor carrying the spectrum Z.
fn screen_candidate(
    qp: &QuasiProduct,
    cand: &Lattice,
    grid: usize,
    trunc: i64,
    tol: f64,
) -> Result<Option<f64>> {
    let d2 = qp.r2_tilde.rows();
    let qt = qp.q.transpose();
    let cand_in_screen = qt.mul(cand.basis());
    let n1 = qp.n1();
    // Spectrum points and cell basis in the screening space.
    let (ev, cell, points) = if n1 == 1 {
        let fiber = DigitSet::new(d2, qp.fibers[0].clone())?;
        let ev = MeasureEvaluator::new(&qp.r2_tilde, &fiber)?;
        let pts = lattice_box(&cand_in_screen, trunc);
        (ev, cand_in_screen.clone(), pts)
    } else {
        let screen = screening_system(qp)?;
        let ev = MeasureEvaluator::new(&screen.r, &screen.b)?;
        let mut cell = ExactMatrix::identity(1 + d2);
        for i in 0..d2 {
            for j in 0..d2 {
                cell.set(1 + i, 1 + j, cand_in_screen.get(i, j).clone());
            }
        }
        let fiber_pts = lattice_box(&cand_in_screen, trunc);
        let mut pts = Vec::with_capacity(fiber_pts.len() * (2 * trunc as usize + 1));
        for j in -trunc..=trunc {
            for fp in &fiber_pts {
                let mut v: RatVec = vec![exact::rat(j)];
                v.extend(fp.iter().cloned());
                pts.push(v);
            }
        }
        (ev, cell, pts)
    };
    let dim = cell.rows();
    let mut max_defect = 0.0f64;
    let mut u = vec![0usize; dim];
    loop {
        let xi: Vec<f64> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        exact::rat_to_f64(cell.get(i, j)) * ((u[j] as f64 + 0.5) / grid as f64)
                    })
                    .sum()
            })
            .collect();
        let mut sum = 0.0f64;
        for p in &points {
            let v = ev.fourier_shifted(&xi, p, 1e-7)?;
            sum += v.value.norm_sqr();
            if sum > 1.0 + 0.02 {
                return Ok(None);
            }
        }
        max_defect = max_defect.max((sum - 1.0).abs());
        if max_defect > tol {
            return Ok(None);
        }
        let mut k = dim;
        loop {
            if k == 0 {
                return Ok(Some(max_defect));
            }
            k -= 1;
            u[k] += 1;
            if u[k] < grid {
                break;
            }
            u[k] = 0;
        }
    }
}

/// Lattice points with basis coefficients in [-trunc, trunc]^d.
fn lattice_box(basis: &ExactMatrix, trunc: i64) -> Vec<RatVec> {
    let d = basis.rows();
    let mut pts = Vec::new();
    let mut odo = vec![-trunc; d];
    loop {
        let c: RatVec = odo.iter().map(|&v| exact::rat(v)).collect();
        pts.push(basis.mul_vec(&c));
        let mut k = d;
        loop {
            if k == 0 {
                return pts;
            }
            k -= 1;
            odo[k] += 1;
            if odo[k] <= trunc {
                break;
            }
            odo[k] = -trunc;
        }
    }
}
