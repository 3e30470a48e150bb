//! Frequency-side dynamics on the torus.
//!
//! Three related computations live here: periodic points of xi -> R^T xi
//! mod Z^d, cycles of the transfer maps x -> (R^T)^{-1}(x + l) on which the
//! mask has modulus one (these seed spectrum construction), and a probe for
//! invariant affine components inside the zero set of the transform, which
//! is what quasi-product structure looks like from the frequency side.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cyclotomic::roots_of_unity_sum_is_zero;
use crate::error::{Error, Result};
use crate::exact::{
    self, char_poly, dual_lattice, geometric_norm_sum, kernel_lattice, residue_system,
    smith_normal_form, ExactMatrix, IntVec, Lattice, Rat, RatVec,
};
use crate::measure::MeasureEvaluator;
use crate::triple::Triple;

/// Points of the torus fixed by (R^T)^m, one representative in [0,1)^d each,
/// sorted. There are |det((R^T)^m - I)| of them.
pub fn periodic_points(r: &ExactMatrix, m: u32) -> Result<Vec<RatVec>> {
    if m == 0 {
        return Err(Error::Input("period must be positive".into()));
    }
    let d = r.rows();
    let p = r.transpose().pow(m);
    let shifted = p.sub(&ExactMatrix::identity(d));
    let inv = shifted.inverse().map_err(|_| Error::NotExpansive)?;
    let rs = residue_system(&shifted)?;
    let mut out: Vec<RatVec> = rs
        .reps
        .iter()
        .map(|c| exact::vec_fract(&inv.mul_vec(&exact::vec_from_ints(c))))
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Cycle of the maps x -> (R^T)^{-1}(x + digit): points[(i+1) % len] is the
/// image of points[i] under the digit digits[i]. Every point has mask
/// modulus one, which is what makes the cycle matter for spectra.
#[derive(Debug, Clone)]
pub struct ExtremeCycle {
    pub points: Vec<RatVec>,
    pub digits: Vec<IntVec>,
}

impl ExtremeCycle {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// All cycles of x -> (R^T)^{-1}(x + l), l in L, through points where the
/// mask has modulus one. Such points form the dual lattice of the digit
/// difference lattice; every cycle stays in a computable box, so the search
/// is finite and exact. Errors with ReduceFirst when the digit differences
/// do not span, since the modulus-one locus is then not discrete.
pub fn extreme_cycles(t: &Triple) -> Result<Vec<ExtremeCycle>> {
    t.require_expanding()?;
    let d = t.dim();
    let b0 = t.b.min_elem().clone();
    let diffs: Vec<RatVec> = t
        .b
        .iter()
        .skip(1)
        .map(|b| {
            b.iter()
                .zip(&b0)
                .map(|(x, y)| Rat::from_integer(x - y))
                .collect()
        })
        .collect();
    let diff_lat = Lattice::from_generators(d, &diffs)?;
    if !diff_lat.is_full_rank() {
        return Err(Error::ReduceFirst);
    }
    let cand_lat = dual_lattice(&diff_lat)?;
    let rt_inv = t.r.transpose().inverse()?;
    let series = geometric_norm_sum(&rt_inv)?;
    let l_max = t
        .l
        .iter()
        .map(|l| exact::vec_sup_norm(&exact::vec_from_ints(l)))
        .max()
        .unwrap();
    // Every cycle point is a tail sum of digit images, so its sup norm is at
    // most max||l|| * sum_j ||(R^T)^{-j}||.
    let k_bound = &series * &l_max;
    let q = cand_lat.basis().clone();
    let q_inv = q.inverse()?;
    let coef_bound = q_inv.row_sum_norm() * &k_bound;
    let cb = coef_bound
        .floor()
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::TooLarge("cycle search box".into()))?;
    let width = (2 * cb + 1) as u128;
    if width.pow(d as u32) > 200_000 {
        return Err(Error::TooLarge("cycle search box".into()));
    }
    let mut nodes: Vec<RatVec> = Vec::new();
    let mut odo = vec![-cb; d];
    'outer: loop {
        let c: RatVec = odo.iter().map(|&v| exact::rat(v)).collect();
        let x = q.mul_vec(&c);
        if exact::vec_sup_norm(&x) <= k_bound {
            nodes.push(x);
        }
        let mut k = d;
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            odo[k] += 1;
            if odo[k] <= cb {
                break;
            }
            odo[k] = -cb;
        }
    }
    nodes.sort();
    let ls = t.l.as_rat_vecs();
    // edges[i] = (digit index, target node index)
    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes.len()];
    for (i, x) in nodes.iter().enumerate() {
        for (li, l) in ls.iter().enumerate() {
            let y = rt_inv.mul_vec(&exact::vec_add(x, l));
            if !cand_lat.contains(&y) || exact::vec_sup_norm(&y) > k_bound {
                continue;
            }
            if let Ok(j) = nodes.binary_search(&y) {
                edges[i].push((li, j));
            }
        }
    }
    let mut cycles = Vec::new();
    let mut path: Vec<(usize, usize)> = Vec::new();
    let mut on_path = vec![false; nodes.len()];
    for start in 0..nodes.len() {
        dfs_cycles(start, start, &edges, &mut path, &mut on_path, &mut cycles)?;
    }
    let digit_vecs: Vec<IntVec> = t.l.elems().to_vec();
    let mut out: Vec<ExtremeCycle> = cycles
        .into_iter()
        .map(|steps| {
            let points: Vec<RatVec> = steps.iter().map(|&(n, _)| nodes[n].clone()).collect();
            let digits: Vec<IntVec> =
                steps.iter().map(|&(_, l)| digit_vecs[l].clone()).collect();
            ExtremeCycle { points, digits }
        })
        .collect();
    out.sort_by(|a, b| {
        (a.points.len(), &a.points, &a.digits).cmp(&(b.points.len(), &b.points, &b.digits))
    });
    Ok(out)
}

/// Emit each cycle once: the path starts at its smallest node index and only
/// visits larger indices. Steps are (node, digit label).
fn dfs_cycles(
    node: usize,
    start: usize,
    edges: &[Vec<(usize, usize)>],
    path: &mut Vec<(usize, usize)>,
    on_path: &mut [bool],
    cycles: &mut Vec<Vec<(usize, usize)>>,
) -> Result<()> {
    on_path[node] = true;
    for &(li, j) in &edges[node] {
        if j == start {
            let mut c = path.clone();
            c.push((node, li));
            cycles.push(c);
            if cycles.len() > 10_000 {
                return Err(Error::TooLarge("cycle count".into()));
            }
        } else if j > start && !on_path[j] {
            path.push((node, li));
            dfs_cycles(j, start, edges, path, on_path, cycles)?;
            path.pop();
        }
    }
    on_path[node] = false;
    Ok(())
}

/// Set of all points over all extreme cycles, sorted and deduplicated.
pub fn extreme_cycle_points(cycles: &[ExtremeCycle]) -> Vec<RatVec> {
    let mut pts: Vec<RatVec> = cycles.iter().flat_map(|c| c.points.iter().cloned()).collect();
    pts.sort();
    pts.dedup();
    pts
}

/// Saturated lattice spanning the rational span of the generators.
pub fn span_saturation(dim: usize, gens: &[RatVec]) -> Result<Lattice> {
    if gens.is_empty() {
        return Err(Error::RankDeficient(0));
    }
    let ann = kernel_lattice(&integer_row_matrix(dim, gens))?;
    if ann.rank() == 0 {
        return Ok(Lattice::standard(dim));
    }
    let ann_rows: Vec<RatVec> = (0..ann.rank()).map(|j| ann.basis().col(j)).collect();
    kernel_lattice(&integer_row_matrix(dim, &ann_rows))
}

/// Matrix with the given vectors as rows, scaled row by row to be integral.
fn integer_row_matrix(dim: usize, rows: &[RatVec]) -> ExactMatrix {
    let mut m = ExactMatrix::zero(rows.len(), dim);
    for (i, row) in rows.iter().enumerate() {
        let scale = row
            .iter()
            .fold(BigInt::from(1), |acc, q| num_integer::lcm(acc, q.denom().clone()));
        let s = Rat::from_integer(scale);
        for (j, q) in row.iter().enumerate() {
            m.set(i, j, q * &s);
        }
    }
    m
}

/// Proper nontrivial m-invariant rational subspaces, each as the saturated
/// lattice of its integer points. Sources: invariant coordinate subspaces,
/// kernels attached to integer eigenvalues (plain and generalized), kernels
/// of the complementary characteristic factors, and pairwise sums of these.
/// The enumeration is not exhaustive in general; every returned subspace is
/// verified invariant exactly.
pub fn invariant_subspaces(m: &ExactMatrix) -> Result<Vec<Lattice>> {
    let d = m.rows();
    if d < 2 {
        return Ok(Vec::new());
    }
    let mut found: Vec<Lattice> = Vec::new();
    let push = |lat: Lattice, found: &mut Vec<Lattice>| {
        if lat.rank() >= 1 && lat.rank() < d && !found.contains(&lat) {
            found.push(lat);
        }
    };
    // Coordinate subspaces whose columns stay inside the subspace.
    for mask in 1u32..(1 << d) - 1 {
        let coords: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
        let invariant = coords.iter().all(|&j| {
            (0..d)
                .filter(|i| mask >> i & 1 == 0)
                .all(|i| m.get(i, j).is_zero())
        });
        if invariant {
            let gens: Vec<RatVec> = coords
                .iter()
                .map(|&i| {
                    let mut e = vec![Rat::zero(); d];
                    e[i] = exact::rat(1);
                    e
                })
                .collect();
            push(Lattice::from_generators(d, &gens)?, &mut found);
        }
    }
    // Integer eigenvalues from the characteristic polynomial.
    let cp: Vec<BigInt> = char_poly(m)?.iter().map(|c| c.to_integer()).collect();
    let bound: BigInt = cp
        .iter()
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(BigInt::zero)
        + 1;
    if let Some(bound) = bound.to_i64().filter(|&b| b <= 1_000_000) {
        for lam in -bound..=bound {
            let lam_bi = BigInt::from(lam);
            if eval_int_poly(&cp, &lam_bi) != BigInt::zero() {
                continue;
            }
            // Multiplicity and the deflated complementary factor.
            let mut q = cp.clone();
            let mut mult = 0u32;
            while let Some(next) = divide_by_linear(&q, &lam_bi) {
                q = next;
                mult += 1;
            }
            let a = m.sub(&scaled_identity(d, &lam_bi));
            push(kernel_lattice(&a)?, &mut found);
            if mult > 1 {
                push(kernel_lattice(&a.pow(mult))?, &mut found);
            }
            push(kernel_lattice(&eval_poly_at_matrix(&q, m))?, &mut found);
        }
    }
    // One round of pairwise sums.
    let snapshot = found.clone();
    for i in 0..snapshot.len() {
        for j in i + 1..snapshot.len() {
            let mut gens: Vec<RatVec> =
                (0..snapshot[i].rank()).map(|k| snapshot[i].basis().col(k)).collect();
            gens.extend((0..snapshot[j].rank()).map(|k| snapshot[j].basis().col(k)));
            push(span_saturation(d, &gens)?, &mut found);
        }
    }
    // Keep only subspaces that are exactly invariant.
    let mut out: Vec<Lattice> = found
        .into_iter()
        .filter(|lat| {
            (0..lat.rank()).all(|k| {
                let img = m.mul_vec(&lat.basis().col(k));
                lat.basis().in_col_span(&img)
            })
        })
        .collect();
    out.sort_by_key(|lat| {
        let mut key: Vec<Rat> = Vec::new();
        for j in 0..lat.rank() {
            key.extend(lat.basis().col(j));
        }
        (lat.rank(), key)
    });
    Ok(out)
}

fn scaled_identity(d: usize, lam: &BigInt) -> ExactMatrix {
    let mut m = ExactMatrix::zero(d, d);
    for i in 0..d {
        m.set(i, i, Rat::from_integer(lam.clone()));
    }
    m
}

fn eval_int_poly(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Exact division by (x - lam); None when lam is not a root.
fn divide_by_linear(coeffs: &[BigInt], lam: &BigInt) -> Option<Vec<BigInt>> {
    let mut out = vec![BigInt::zero(); coeffs.len() - 1];
    let mut carry = BigInt::zero();
    for k in (0..coeffs.len()).rev() {
        let v = &coeffs[k] + &carry;
        if k == 0 {
            if v != BigInt::zero() {
                return None;
            }
        } else {
            carry = &v * lam;
            out[k - 1] = v;
        }
    }
    Some(out)
}

fn eval_poly_at_matrix(coeffs: &[BigInt], m: &ExactMatrix) -> ExactMatrix {
    let d = m.rows();
    let mut acc = ExactMatrix::zero(d, d);
    for c in coeffs.iter().rev() {
        acc = acc.mul(m).add(&scaled_identity(d, c));
    }
    acc
}

/// One numeric sample supporting a component: a frequency on the affine
/// subspace and the transform modulus there.
#[derive(Debug, Clone)]
pub struct ComponentEvidence {
    pub point: Vec<f64>,
    pub abs_mu: f64,
}

/// An affine component x0 + W believed to lie in the zero set of the
/// transform, with x0 periodic under R^T mod Z^d and W invariant.
/// vanish_depth > 0 means mask factor number vanish_depth is identically
/// zero on the component, an exact certificate; 0 means numeric evidence
/// only.
#[derive(Debug, Clone)]
pub struct InvariantComponent {
    pub x0: RatVec,
    pub period: u32,
    pub w_basis: Vec<RatVec>,
    pub vanish_depth: u32,
    pub evidence: Vec<ComponentEvidence>,
}

/// Search for invariant affine components of the zero set: try every
/// periodic point of period up to m_max against every enumerated invariant
/// subspace, preferring an exact single-factor vanishing certificate and
/// falling back to sampled moduli below tol. One representative per orbit.
pub fn zero_set_probe(
    t: &Triple,
    m_max: u32,
    samples: usize,
    tol: f64,
) -> Result<Vec<InvariantComponent>> {
    t.require_expanding()?;
    let d = t.dim();
    if d < 2 {
        return Ok(Vec::new());
    }
    let rt = t.r.transpose();
    let subspaces = invariant_subspaces(&rt)?;
    if subspaces.is_empty() {
        return Ok(Vec::new());
    }
    let ev = MeasureEvaluator::new(&t.r, &t.b)?;
    let r_inv = t.r.inverse()?;
    let b_rat = t.b.as_rat_vecs();
    let mut visited: HashSet<(Vec<Rat>, usize)> = HashSet::new();
    let mut out = Vec::new();
    for m in 1..=m_max {
        // Candidate count equals |det((R^T)^m - I)|; skip periods whose
        // residue system is too large to sweep.
        let modulus = rt.pow(m).sub(&ExactMatrix::identity(d));
        if modulus.det()?.abs() > exact::ratio(10_000, 1) {
            continue;
        }
        for x0 in periodic_points(&t.r, m)? {
            if exact::vec_is_integer(&x0) {
                continue;
            }
            if minimal_period(&rt, &x0, m) < m {
                continue;
            }
            for (wi, w) in subspaces.iter().enumerate() {
                if visited.contains(&(x0.clone(), wi)) {
                    continue;
                }
                let w_cols: Vec<RatVec> = (0..w.rank()).map(|k| w.basis().col(k)).collect();
                let depth = exact_vanish_depth(&r_inv, &b_rat, &x0, &w_cols, 8)?;
                let mut evidence = Vec::new();
                let mut max_abs = 0.0f64;
                let mut rng = ChaCha8Rng::seed_from_u64(17);
                for s in 0..samples.max(1) {
                    let coefs: Vec<f64> = if s == 0 {
                        vec![0.37; w_cols.len()]
                    } else {
                        (0..w_cols.len()).map(|_| rng.gen_range(-2.0..2.0)).collect()
                    };
                    let mut p: Vec<f64> = x0.iter().map(exact::rat_to_f64).collect();
                    for (c, col) in coefs.iter().zip(&w_cols) {
                        for (pi, x) in p.iter_mut().zip(col) {
                            *pi += c * exact::rat_to_f64(x);
                        }
                    }
                    let mu = ev.fourier(&p, 1e-9)?;
                    let abs = mu.value.norm();
                    max_abs = max_abs.max(abs);
                    evidence.push(ComponentEvidence { point: p, abs_mu: abs });
                    if depth == 0 && max_abs > tol {
                        break;
                    }
                }
                if depth > 0 || max_abs <= tol {
                    // Mark the whole orbit as handled.
                    let mut x = x0.clone();
                    for _ in 0..m {
                        visited.insert((x.clone(), wi));
                        x = exact::vec_fract(&rt.mul_vec(&x));
                    }
                    out.push(InvariantComponent {
                        x0: x0.clone(),
                        period: m,
                        w_basis: w_cols,
                        vanish_depth: depth,
                        evidence,
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| (a.period, &a.x0).cmp(&(b.period, &b.x0)));
    Ok(out)
}

fn minimal_period(rt: &ExactMatrix, x0: &RatVec, m: u32) -> u32 {
    let mut x = exact::vec_fract(&rt.mul_vec(x0));
    for step in 1..m {
        if &x == x0 {
            return step;
        }
        x = exact::vec_fract(&rt.mul_vec(&x));
    }
    m
}

/// Smallest n <= cap such that mask factor n is identically zero on the
/// affine subspace x0 + span(w), decided exactly: restricted to the
/// subspace the factor is a sum of exponentials with linear frequencies,
/// and it vanishes identically iff each frequency group's coefficient sum
/// is a vanishing sum of roots of unity. 0 when no factor certifies.
fn exact_vanish_depth(
    r_inv: &ExactMatrix,
    b_rat: &[RatVec],
    x0: &RatVec,
    w_cols: &[RatVec],
    cap: u32,
) -> Result<u32> {
    let mut pw = ExactMatrix::identity(r_inv.rows());
    for n in 1..=cap {
        pw = pw.mul(r_inv);
        let v_n = pw.transpose().mul_vec(x0);
        let mut groups: HashMap<Vec<Rat>, Vec<Rat>> = HashMap::new();
        for b in b_rat {
            let rb = pw.mul_vec(b);
            let key: Vec<Rat> = w_cols.iter().map(|w| exact::vec_dot(&rb, w)).collect();
            groups.entry(key).or_default().push(exact::vec_dot(b, &v_n));
        }
        if groups.values().all(|phases| roots_of_unity_sum_is_zero(phases)) {
            return Ok(n);
        }
    }
    Ok(0)
}

/// A triple conjugated so that the invariant subspace is the span of the
/// first `split` coordinates. The expansion becomes block lower triangular
/// [[r1, 0], [c, r2]]; frequencies transform as xi -> n_mat xi, and y0 is
/// the witness component transverse to the subspace.
#[derive(Debug, Clone)]
pub struct BlockSplit {
    pub triple: Triple,
    pub n_mat: ExactMatrix,
    pub split: usize,
    pub r1: ExactMatrix,
    pub r2: ExactMatrix,
    pub c: ExactMatrix,
    pub y0: RatVec,
}

/// Conjugate the triple so span(w) becomes R^split x {0}. The space side is
/// conjugated by (n^T)^{-1} with n unimodular, so digits stay integral; the
/// frequency side, including the witness x0, transforms by n.
pub fn block_normalize(t: &Triple, x0: &RatVec, w_cols: &[RatVec]) -> Result<BlockSplit> {
    let d = t.dim();
    if w_cols.is_empty() || w_cols.len() >= d {
        return Err(Error::Shape(format!("subspace dimension {} of {d}", w_cols.len())));
    }
    let wlat = span_saturation(d, w_cols)?;
    let split = wlat.rank();
    if split != w_cols.len() {
        return Err(Error::RankDeficient(split));
    }
    let sf = smith_normal_form(wlat.basis())?;
    let n_mat = sf.u.clone();
    // n maps the subspace lattice into the first `split` coordinates.
    let mapped = n_mat.mul(wlat.basis());
    for i in split..d {
        for j in 0..wlat.rank() {
            if !mapped.get(i, j).is_zero() {
                return Err(Error::NotInvariant("subspace straightening failed".into()));
            }
        }
    }
    let m = n_mat.transpose().inverse()?;
    let conj = t.conjugate(&m)?;
    for i in 0..split {
        for j in split..d {
            if !conj.r.get(i, j).is_zero() {
                return Err(Error::NotInvariant(format!(
                    "subspace is not invariant: block entry ({i},{j}) = {}",
                    conj.r.get(i, j)
                )));
            }
        }
    }
    let take = |r0: usize, c0: usize, nr: usize, nc: usize| {
        let mut out = ExactMatrix::zero(nr, nc);
        for i in 0..nr {
            for j in 0..nc {
                out.set(i, j, conj.r.get(r0 + i, c0 + j).clone());
            }
        }
        out
    };
    let r1 = take(0, 0, split, split);
    let c = take(split, 0, d - split, split);
    let r2 = take(split, split, d - split, d - split);
    let nx0 = n_mat.mul_vec(x0);
    let y0 = exact::vec_fract(&nx0[split..]);
    Ok(BlockSplit { triple: conj, n_mat, split, r1, r2, c, y0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio, vec_from_i64};

    #[test]
    fn periodic_points_doubling() {
        let r = ExactMatrix::from_i64(&[&[2]]);
        assert_eq!(periodic_points(&r, 1).unwrap(), vec![vec![rat(0)]]);
        let p2 = periodic_points(&r, 2).unwrap();
        assert_eq!(p2, vec![vec![rat(0)], vec![ratio(1, 3)], vec![ratio(2, 3)]]);
        let r2 = ExactMatrix::from_i64(&[&[2, 0], &[0, 2]]);
        assert_eq!(periodic_points(&r2, 2).unwrap().len(), 9);
    }

    #[test]
    fn extreme_cycles_examples() {
        // Quarter Cantor pair: only the trivial cycle at 0.
        let t = Triple::from_i64(&[&[4]], &[&[0], &[2]], &[&[0], &[1]]).unwrap();
        let cs = extreme_cycles(&t).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].points, vec![vec![rat(0)]]);
        // Binary pair with negative frequency digit: cycles {0} and {-1}.
        let t2 = Triple::from_i64(&[&[2]], &[&[0], &[1]], &[&[0], &[-1]]).unwrap();
        let cs2 = extreme_cycles(&t2).unwrap();
        let pts = extreme_cycle_points(&cs2);
        assert_eq!(pts, vec![vec![rat(-1)], vec![rat(0)]]);
        assert_eq!(cs2.len(), 2);
        // Standard binary pair: cycles {0} and {1}.
        let t3 = Triple::from_i64(&[&[2]], &[&[0], &[1]], &[&[0], &[1]]).unwrap();
        let pts3 = extreme_cycle_points(&extreme_cycles(&t3).unwrap());
        assert_eq!(pts3, vec![vec![rat(0)], vec![rat(1)]]);
    }

    #[test]
    fn extreme_cycles_need_spanning_digits() {
        let t = Triple::from_i64(
            &[&[2, 1], &[0, 3]],
            &[&[0, 0], &[1, 0]],
            &[&[0, 0], &[1, 0]],
        )
        .unwrap();
        assert!(matches!(extreme_cycles(&t), Err(Error::ReduceFirst)));
    }

    #[test]
    fn invariant_subspaces_diagonal() {
        let m = ExactMatrix::from_i64(&[&[2, 0], &[0, 3]]);
        let subs = invariant_subspaces(&m).unwrap();
        assert_eq!(subs.len(), 2);
        assert!(subs.iter().all(|s| s.rank() == 1));
    }

    #[test]
    fn invariant_subspaces_triangular() {
        // [[2,0],[1,3]]: eigenvector (0,1) for 3 and (1,-1) for 2.
        let m = ExactMatrix::from_i64(&[&[2, 0], &[1, 3]]);
        let subs = invariant_subspaces(&m).unwrap();
        assert_eq!(subs.len(), 2);
        for s in &subs {
            let img = m.mul_vec(&s.basis().col(0));
            assert!(s.basis().in_col_span(&img));
        }
    }

    #[test]
    fn probe_finds_product_structure() {
        // Digits {(0,0),(0,3),(1,0),(1,3)} under diag(2,2): the transform
        // vanishes on the lines x2 = 1/3 and x2 = 2/3 shifted by Z^2.
        let t = Triple::from_i64(
            &[&[2, 0], &[0, 2]],
            &[&[0, 0], &[0, 3], &[1, 0], &[1, 3]],
            &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]],
        )
        .unwrap();
        let comps = zero_set_probe(&t, 4, 6, 1e-6).unwrap();
        assert!(!comps.is_empty());
        let hit = comps
            .iter()
            .find(|c| c.x0 == vec![rat(0), ratio(1, 3)])
            .expect("expected witness at (0, 1/3)");
        assert_eq!(hit.period, 2);
        assert_eq!(hit.vanish_depth, 1);
        assert_eq!(hit.w_basis, vec![vec![rat(1), rat(0)]]);
        assert!(hit.evidence.iter().all(|e| e.abs_mu < 1e-6));
        // The orbit partner (0, 2/3) is not reported separately.
        assert!(comps.iter().all(|c| c.x0 != vec![rat(0), ratio(2, 3)]));
    }

    #[test]
    fn probe_empty_for_plain_square() {
        let t = Triple::from_i64(
            &[&[2, 0], &[0, 2]],
            &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]],
            &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]],
        )
        .unwrap();
        let comps = zero_set_probe(&t, 4, 6, 1e-6).unwrap();
        assert!(comps.is_empty(), "unexpected components: {comps:?}");
    }

    #[test]
    fn block_normalize_straightens() {
        let t = Triple::from_i64(
            &[&[2, 0], &[0, 2]],
            &[&[0, 0], &[0, 3], &[1, 0], &[1, 3]],
            &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]],
        )
        .unwrap();
        let x0 = vec![rat(0), ratio(1, 3)];
        let w = vec![vec![rat(1), rat(0)]];
        let bs = block_normalize(&t, &x0, &w).unwrap();
        assert_eq!(bs.split, 1);
        assert_eq!(bs.r1, ExactMatrix::from_i64(&[&[2]]));
        assert_eq!(bs.r2, ExactMatrix::from_i64(&[&[2]]));
        assert_eq!(bs.y0, vec![ratio(1, 3)]);
        assert!(crate::triple::check_hadamard(&bs.triple).unwrap().pass);
    }

    #[test]
    fn block_normalize_skew_subspace() {
        // Invariant line spanned by (1, -1) for [[2,0],[1,3]]^T = [[2,1],[0,3]].
        let t = Triple::from_i64(
            &[&[2, 0], &[1, 3]],
            &[&[0, 0], &[1, 0]],
            &[&[0, 0], &[1, 0]],
        )
        .unwrap();
        // R^T = [[2,1],[0,3]] fixes span{(1,0)}; use that line.
        let w = vec![vec![rat(1), rat(0)]];
        let x0 = vec![ratio(1, 5), ratio(2, 5)];
        let bs = block_normalize(&t, &x0, &w).unwrap();
        assert_eq!(bs.split, 1);
        // Block structure: upper right of the conjugated expansion is zero.
        assert!(bs.triple.r.get(0, 1).is_zero());
    }

    #[test]
    fn saturation_recovers_primitive_basis() {
        // Span of (2, 4) saturates to the lattice generated by (1, 2).
        let lat = span_saturation(2, &[vec![rat(2), rat(4)]]).unwrap();
        assert_eq!(lat.rank(), 1);
        let col = lat.basis().col(0);
        assert_eq!(
            col.iter().map(|q| q.abs()).collect::<Vec<_>>(),
            vec![rat(1), rat(2)]
        );
        let _ = vec_from_i64(&[0]);
    }
}
