//! Rational lattices with a canonical Hermite basis, duals, kernels,
//! and the smallest expansion-stable lattice containing a digit set.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use super::normal_form::hermite_normal_form;
use super::{vec_from_ints, ExactMatrix, IntVec, Rat, RatVec};
use crate::error::{Error, Result};

/// Full- or partial-rank lattice in Q^d. The stored basis is canonical
/// (scaled Hermite form), so equal lattices compare equal structurally.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Lattice {
    dim: usize,
    /// dim x rank matrix, columns form the canonical basis.
    basis: ExactMatrix,
}

impl Lattice {
    pub fn from_generators(dim: usize, gens: &[RatVec]) -> Result<Self> {
        if gens.iter().any(|g| g.len() != dim) {
            return Err(Error::Shape("generator dimension mismatch".into()));
        }
        // Common denominator so the Hermite form runs over the integers;
        // the canonical form is independent of the chosen scale.
        let mut denom = BigInt::one();
        for g in gens {
            for x in g {
                denom = denom.lcm(x.denom());
            }
        }
        let scale = Rat::from_integer(denom.clone());
        let scaled: Vec<RatVec> =
            gens.iter().map(|g| g.iter().map(|x| x * &scale).collect()).collect();
        let m = ExactMatrix::from_cols(dim, &scaled)?;
        let hf = hermite_normal_form(&m)?;
        let mut basis = ExactMatrix::zero(dim, hf.rank);
        let inv = scale.recip();
        for j in 0..hf.rank {
            for i in 0..dim {
                basis.set(i, j, hf.h.get(i, j) * &inv);
            }
        }
        Ok(Lattice { dim, basis })
    }

    pub fn from_basis_matrix(basis: &ExactMatrix) -> Result<Self> {
        Self::from_generators(basis.rows(), &basis.columns())
    }

    pub fn standard(dim: usize) -> Self {
        Lattice { dim, basis: ExactMatrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim
    }

    pub fn basis(&self) -> &ExactMatrix {
        &self.basis
    }

    pub fn is_standard(&self) -> bool {
        *self == Lattice::standard(self.dim)
    }

    /// |det| of the basis for a full-rank lattice.
    pub fn covolume(&self) -> Result<Rat> {
        if !self.is_full_rank() {
            return Err(Error::RankDeficient(self.rank()));
        }
        Ok(self.basis.det()?.abs())
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        match self.basis.solve_col_span(v) {
            Some(x) => x.iter().all(|c| c.is_integer()),
            None => false,
        }
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis.columns().iter().all(|c| self.contains(c))
    }

    /// True if m maps this lattice into itself.
    pub fn stable_under(&self, m: &ExactMatrix) -> bool {
        self.basis.columns().iter().all(|c| self.contains(&m.mul_vec(c)))
    }
}

impl std::fmt::Debug for Lattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Lattice(dim {}, basis {})", self.dim, self.basis)
    }
}

/// Smallest lattice containing the digit differences that is stable under
/// the expansion. Digits are translated so 0 is a digit before generating.
pub fn invariant_lattice(r: &ExactMatrix, digits: &[IntVec]) -> Result<Lattice> {
    let d = r.rows();
    if !r.is_square() {
        return Err(Error::Shape("expansion must be square".into()));
    }
    if digits.is_empty() {
        return Err(Error::BadDigitSet("empty digit set".into()));
    }
    let base = digits.iter().min().cloned().unwrap();
    let mut gens: Vec<RatVec> = Vec::new();
    for b in digits {
        let shifted: IntVec = b.iter().zip(&base).map(|(x, y)| x - y).collect();
        gens.push(vec_from_ints(&shifted));
        for b2 in digits {
            let diff: IntVec = b.iter().zip(b2).map(|(x, y)| x - y).collect();
            gens.push(vec_from_ints(&diff));
        }
    }
    let mut lat = Lattice::from_generators(d, &gens)?;
    // Saturate under the expansion; rank can only grow, entries stabilize
    // because the lattice is contained in the saturation closure.
    for _ in 0..64 {
        let mut next_gens = lat.basis.columns();
        for c in lat.basis.columns() {
            next_gens.push(r.mul_vec(&c));
        }
        let next = Lattice::from_generators(d, &next_gens)?;
        if next == lat {
            return Ok(lat);
        }
        lat = next;
    }
    Err(Error::BudgetExhausted("invariant lattice did not stabilize".into()))
}

/// Dual of a full-rank lattice: all y with <y, x> integral for every x.
pub fn dual_lattice(lat: &Lattice) -> Result<Lattice> {
    if !lat.is_full_rank() {
        return Err(Error::RankDeficient(lat.rank()));
    }
    let dual_basis = lat.basis().transpose().inverse()?;
    Lattice::from_basis_matrix(&dual_basis)
}

/// Integer kernel of an integer matrix: all x in Z^cols with a x = 0.
pub fn kernel_lattice(a: &ExactMatrix) -> Result<Lattice> {
    let hf = hermite_normal_form(a)?;
    let cols = a.cols();
    let gens: Vec<RatVec> = (hf.rank..cols).map(|j| hf.u.col(j)).collect();
    Lattice::from_generators(cols, &gens)
}

/// All sublattices of Z^dim of index in [1, bound], by Hermite enumeration.
/// Deterministic order: index ascending, then lexicographic basis.
pub fn sublattices_of_index(dim: usize, bound: u64) -> Result<Vec<Lattice>> {
    if dim == 0 || bound == 0 {
        return Ok(Vec::new());
    }
    if !(1..=4).contains(&dim) {
        return Err(Error::TooLarge(format!("sublattice enumeration in dimension {dim}")));
    }
    let mut out = Vec::new();
    for index in 1..=bound {
        for diag in factorizations(index, dim) {
            // Lower-triangular Hermite bases with the given diagonal.
            let mut stack = vec![(ExactMatrix::zero(dim, dim), 0usize)];
            while let Some((m, col)) = stack.pop() {
                if col == dim {
                    out.push(Lattice::from_basis_matrix(&m)?);
                    continue;
                }
                let mut base = m.clone();
                base.set(col, col, Rat::from_integer(BigInt::from(diag[col])));
                // Free entries sit below the diagonal, bounded by the row pivot.
                let free: Vec<usize> = (col + 1..dim).collect();
                let mut fills = vec![base];
                for &i in &free {
                    let cap = diag[i];
                    let mut next = Vec::new();
                    for f in fills {
                        for v in 0..cap {
                            let mut g = f.clone();
                            g.set(i, col, Rat::from_integer(BigInt::from(v)));
                            next.push(g);
                        }
                    }
                    fills = next;
                }
                for f in fills {
                    stack.push((f, col + 1));
                }
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|l| seen.insert(l.basis.clone()));
    Ok(out)
}

/// Ordered factorizations of n into dim positive factors.
fn factorizations(n: u64, dim: usize) -> Vec<Vec<u64>> {
    if dim == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for f in 1..=n {
        if !n.is_multiple_of(f) {
            continue;
        }
        for mut rest in factorizations(n / f, dim - 1) {
            let mut v = vec![f];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}
