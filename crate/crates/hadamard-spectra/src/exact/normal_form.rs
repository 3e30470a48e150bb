//! Hermite and Smith normal forms over the integers, with unimodular
//! transforms tracked exactly, plus residue systems for a nonsingular modulus.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{ExactMatrix, IntVec};
use crate::error::{Error, Result};

/// Column-style Hermite form: a * u = h with u unimodular.
///
/// h is in column echelon form: pivot rows strictly descend, pivots are
/// positive, entries left of a pivot in its row are reduced to [0, pivot),
/// and columns past `rank` are zero.
#[derive(Debug, Clone)]
pub struct HermiteForm {
    pub h: ExactMatrix,
    pub u: ExactMatrix,
    pub rank: usize,
    /// Pivot row of each of the first `rank` columns.
    pub pivot_rows: Vec<usize>,
}

pub fn hermite_normal_form(a: &ExactMatrix) -> Result<HermiteForm> {
    let mut m = to_int(a)?;
    let rows = a.rows();
    let cols = a.cols();
    let mut u: Vec<Vec<BigInt>> =
        (0..cols).map(|i| (0..cols).map(|j| int(i == j)).collect()).collect();
    let mut c = 0usize;
    let mut pivot_rows = Vec::new();
    for i in 0..rows {
        if c >= cols {
            break;
        }
        let Some(j0) = (c..cols).find(|&j| !m[i][j].is_zero()) else { continue };
        swap_cols(&mut m, &mut u, c, j0);
        for j in c + 1..cols {
            if m[i][j].is_zero() {
                continue;
            }
            // One extended gcd step zeroes m[i][j] and leaves gcd at m[i][c].
            let ea = m[i][c].clone();
            let eb = m[i][j].clone();
            let ext = ea.extended_gcd(&eb);
            let (g, s, t) = (ext.gcd, ext.x, ext.y);
            let p = &ea / &g;
            let q = &eb / &g;
            combine_cols(&mut m, c, j, &s, &t, &(-&q), &p);
            combine_cols(&mut u, c, j, &s, &t, &(-&q), &p);
        }
        if m[i][c].is_negative() {
            negate_col(&mut m, c);
            negate_col(&mut u, c);
        }
        for j in 0..c {
            let q = m[i][j].div_floor(&m[i][c]);
            if q.is_zero() {
                continue;
            }
            sub_col_mul(&mut m, j, c, &q);
            sub_col_mul(&mut u, j, c, &q);
        }
        pivot_rows.push(i);
        c += 1;
    }
    let result = HermiteForm {
        h: ExactMatrix::from_int_rows(&m),
        u: ExactMatrix::from_int_rows(&u),
        rank: c,
        pivot_rows,
    };
    debug_assert_eq!(a.mul(&result.u), result.h, "hermite re-multiplication check");
    debug_assert!(result.u.det().unwrap().abs().is_one(), "hermite transform unimodular");
    Ok(result)
}

/// Smith form: u * a * v = s with u, v unimodular and a divisibility chain
/// s[0] | s[1] | ... on the nonnegative diagonal. Accepts any shape.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub u: ExactMatrix,
    pub s: ExactMatrix,
    pub v: ExactMatrix,
    pub rank: usize,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let n = self.s.rows().min(self.s.cols());
        (0..n).map(|i| self.s.get(i, i).to_integer()).collect()
    }
}

pub fn smith_normal_form(a: &ExactMatrix) -> Result<SmithForm> {
    let mut m = to_int(a)?;
    let rows = a.rows();
    let cols = a.cols();
    let mut u: Vec<Vec<BigInt>> =
        (0..rows).map(|i| (0..rows).map(|j| int(i == j)).collect()).collect();
    let mut v: Vec<Vec<BigInt>> =
        (0..cols).map(|i| (0..cols).map(|j| int(i == j)).collect()).collect();
    let mut rank = 0usize;
    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = find_pivot(&m, t) else { break };
        if pi != t {
            m.swap(pi, t);
            u.swap(pi, t);
        }
        if pj != t {
            swap_cols(&mut m, &mut v, t, pj);
        }
        loop {
            // Clear column t below the pivot with row gcd steps.
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let ea = m[t][t].clone();
                let eb = m[i][t].clone();
                let ext = ea.extended_gcd(&eb);
                let (g, s, w) = (ext.gcd, ext.x, ext.y);
                let p = &ea / &g;
                let q = &eb / &g;
                combine_rows(&mut m, t, i, &s, &w, &(-&q), &p);
                combine_rows(&mut u, t, i, &s, &w, &(-&q), &p);
            }
            // Clear row t right of the pivot with column gcd steps.
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let ea = m[t][t].clone();
                let eb = m[t][j].clone();
                let ext = ea.extended_gcd(&eb);
                let (g, s, w) = (ext.gcd, ext.x, ext.y);
                let p = &ea / &g;
                let q = &eb / &g;
                combine_cols(&mut m, t, j, &s, &w, &(-&q), &p);
                combine_cols(&mut v, t, j, &s, &w, &(-&q), &p);
            }
            if (t + 1..rows).any(|i| !m[i][t].is_zero()) {
                continue;
            }
            // Enforce divisibility: pivot must divide the whole trailing block.
            let offender = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !(&m[i][j] % &m[t][t]).is_zero());
            match offender {
                Some((i, _)) => {
                    add_row(&mut m, t, i);
                    add_row(&mut u, t, i);
                }
                None => break,
            }
        }
        if m[t][t].is_negative() {
            for x in m[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        rank = t + 1;
    }
    let result = SmithForm {
        u: ExactMatrix::from_int_rows(&u),
        s: ExactMatrix::from_int_rows(&m),
        v: ExactMatrix::from_int_rows(&v),
        rank,
    };
    debug_assert_eq!(
        result.u.mul(a).mul(&result.v),
        result.s,
        "smith re-multiplication check"
    );
    debug_assert!(result.u.det().unwrap().abs().is_one());
    debug_assert!(result.v.det().unwrap().abs().is_one());
    debug_assert!({
        let d = result.diagonal();
        (1..result.rank).all(|i| (&d[i] % &d[i - 1]).is_zero())
    });
    Ok(result)
}

/// Complete set of residue representatives for Z^d / a(Z^d), a nonsingular.
///
/// Canonical choice: preimages of the Smith fundamental box, listed in
/// lexicographic order.
#[derive(Debug, Clone)]
pub struct ResidueSystem {
    pub modulus: ExactMatrix,
    pub reps: Vec<IntVec>,
    smith: SmithForm,
    u_inv: ExactMatrix,
}

const RESIDUE_CAP: u64 = 1_000_000;

pub fn residue_system(a: &ExactMatrix) -> Result<ResidueSystem> {
    if !a.is_square() {
        return Err(Error::Shape("residue system needs a square modulus".into()));
    }
    let det = a.det()?;
    if det.is_zero() {
        return Err(Error::SingularModulus);
    }
    let smith = smith_normal_form(a)?;
    let diag = smith.diagonal();
    let count = diag.iter().fold(BigInt::one(), |acc, d| acc * d.abs());
    let count: u64 = count
        .to_string()
        .parse()
        .map_err(|_| Error::TooLarge(format!("residue count {count}")))?;
    if count > RESIDUE_CAP {
        return Err(Error::TooLarge(format!("residue count {count} exceeds cap {RESIDUE_CAP}")));
    }
    let u_inv = smith.u.inverse()?;
    let d = a.rows();
    let mut reps: Vec<IntVec> = Vec::with_capacity(count as usize);
    let mut t = vec![BigInt::zero(); d];
    loop {
        let x = u_inv.mul_vec(&super::vec_from_ints(&t));
        debug_assert!(x.iter().all(|v| v.is_integer()));
        reps.push(x.iter().map(|v| v.to_integer()).collect());
        // Odometer over the Smith box.
        let mut k = d;
        while k > 0 {
            k -= 1;
            t[k] += 1;
            if t[k] < diag[k].abs() {
                break;
            }
            t[k] = BigInt::zero();
            if k == 0 {
                k = usize::MAX;
                break;
            }
        }
        if k == usize::MAX || d == 0 {
            break;
        }
    }
    reps.sort();
    Ok(ResidueSystem { modulus: a.clone(), reps, smith, u_inv })
}

impl ResidueSystem {
    pub fn count(&self) -> usize {
        self.reps.len()
    }

    /// Canonical representative of x modulo the column lattice of the modulus.
    pub fn canonical(&self, x: &[BigInt]) -> IntVec {
        let diag = self.smith.diagonal();
        let ux = self.smith.u.mul_vec(&super::vec_from_ints(x));
        let t: Vec<BigInt> = ux
            .iter()
            .zip(&diag)
            .map(|(v, s)| {
                debug_assert!(v.is_integer());
                v.to_integer().mod_floor(&s.abs())
            })
            .collect();
        let rep = self.u_inv.mul_vec(&super::vec_from_ints(&t));
        rep.iter().map(|v| v.to_integer()).collect()
    }

    pub fn same_class(&self, x: &[BigInt], y: &[BigInt]) -> bool {
        self.canonical(x) == self.canonical(y)
    }
}

fn to_int(a: &ExactMatrix) -> Result<Vec<Vec<BigInt>>> {
    a.to_int_rows()
}

fn int(b: bool) -> BigInt {
    if b {
        BigInt::one()
    } else {
        BigInt::zero()
    }
}

fn swap_cols(m: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a == b {
        return;
    }
    for row in m.iter_mut() {
        row.swap(a, b);
    }
    for row in u.iter_mut() {
        row.swap(a, b);
    }
}

/// cols (a,b) <- (s*a + t*b, p*a + q*b), sent in as the four coefficients.
fn combine_cols(
    m: &mut [Vec<BigInt>],
    a: usize,
    b: usize,
    s: &BigInt,
    t: &BigInt,
    p: &BigInt,
    q: &BigInt,
) {
    for row in m.iter_mut() {
        let va = row[a].clone();
        let vb = row[b].clone();
        row[a] = s * &va + t * &vb;
        row[b] = p * &va + q * &vb;
    }
}

fn combine_rows(
    m: &mut [Vec<BigInt>],
    a: usize,
    b: usize,
    s: &BigInt,
    t: &BigInt,
    p: &BigInt,
    q: &BigInt,
) {
    let ra = m[a].clone();
    let rb = m[b].clone();
    for (j, x) in m[a].iter_mut().enumerate() {
        *x = s * &ra[j] + t * &rb[j];
    }
    for (j, x) in m[b].iter_mut().enumerate() {
        *x = p * &ra[j] + q * &rb[j];
    }
}

fn negate_col(m: &mut [Vec<BigInt>], c: usize) {
    for row in m.iter_mut() {
        row[c] = -row[c].clone();
    }
}

fn sub_col_mul(m: &mut [Vec<BigInt>], target: usize, src: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let delta = q * &row[src];
        row[target] -= delta;
    }
}

fn add_row(m: &mut [Vec<BigInt>], target: usize, src: usize) {
    let other = m[src].clone();
    for (x, y) in m[target].iter_mut().zip(&other) {
        *x += y;
    }
}

fn find_pivot(m: &[Vec<BigInt>], t: usize) -> Option<(usize, usize)> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    for j in t..cols {
        for (i, row) in m.iter().enumerate().take(rows).skip(t) {
            if !row[j].is_zero() {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int_vec_from_i64, rat};

    #[test]
    fn hermite_example_2x2() {
        let a = ExactMatrix::from_i64(&[&[4, 2], &[2, 2]]);
        let hf = hermite_normal_form(&a).unwrap();
        assert_eq!(a.mul(&hf.u), hf.h);
        assert_eq!(hf.rank, 2);
        assert_eq!(hf.h.det().unwrap().abs(), a.det().unwrap().abs());
        // Column echelon: entry above the second pivot is zero.
        assert_eq!(hf.h.get(0, 1), &rat(0));
    }

    #[test]
    fn hermite_rank_deficient_reports_rank() {
        let a = ExactMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        let hf = hermite_normal_form(&a).unwrap();
        assert_eq!(hf.rank, 1);
        assert_eq!(hf.h.col(1), vec![rat(0), rat(0)]);
    }

    #[test]
    fn hermite_canonical_under_unimodular_right_factor() {
        let a = ExactMatrix::from_i64(&[&[4, 2], &[2, 2]]);
        // Right-multiplying by a unimodular matrix preserves the column lattice.
        let w = ExactMatrix::from_i64(&[&[1, 3], &[1, 4]]);
        assert_eq!(w.det().unwrap(), rat(1));
        let hf1 = hermite_normal_form(&a).unwrap();
        let hf2 = hermite_normal_form(&a.mul(&w)).unwrap();
        assert_eq!(hf1.h, hf2.h);
    }

    #[test]
    fn smith_example_divisibility() {
        let a = ExactMatrix::from_i64(&[&[2, 1], &[0, 2]]);
        let sf = smith_normal_form(&a).unwrap();
        assert_eq!(sf.diagonal(), int_vec_from_i64(&[1, 4]));
        assert_eq!(sf.u.mul(&a).mul(&sf.v), sf.s);
    }

    #[test]
    fn smith_rectangular() {
        let a = ExactMatrix::from_i64(&[&[2], &[4], &[6]]);
        let sf = smith_normal_form(&a).unwrap();
        assert_eq!(sf.rank, 1);
        assert_eq!(sf.s.get(0, 0), &rat(2));
        assert_eq!(sf.u.mul(&a).mul(&sf.v), sf.s);
    }

    #[test]
    fn residues_of_scalar_two() {
        let rs = residue_system(&ExactMatrix::from_i64(&[&[2]])).unwrap();
        let reps: Vec<_> = rs.reps.clone();
        assert_eq!(reps, vec![int_vec_from_i64(&[0]), int_vec_from_i64(&[1])]);
    }

    #[test]
    fn residues_of_diag_two_two() {
        let rs = residue_system(&ExactMatrix::from_i64(&[&[2, 0], &[0, 2]])).unwrap();
        assert_eq!(rs.count(), 4);
        let expect: Vec<IntVec> = vec![
            int_vec_from_i64(&[0, 0]),
            int_vec_from_i64(&[0, 1]),
            int_vec_from_i64(&[1, 0]),
            int_vec_from_i64(&[1, 1]),
        ];
        assert_eq!(rs.reps, expect);
    }

    #[test]
    fn residues_pairwise_distinct_and_complete() {
        // Oracle: exhaustive box check that every integer vector in a window
        // matches exactly one representative class.
        let a = ExactMatrix::from_i64(&[&[2, 1], &[0, 3]]);
        let rs = residue_system(&a).unwrap();
        assert_eq!(rs.count(), 6);
        for i in 0..rs.count() {
            for j in i + 1..rs.count() {
                assert!(!rs.same_class(&rs.reps[i], &rs.reps[j]));
            }
        }
        for x in -4i64..=4 {
            for y in -4i64..=4 {
                let v = int_vec_from_i64(&[x, y]);
                let c = rs.canonical(&v);
                assert!(rs.reps.contains(&c), "canonical rep must be listed");
                assert!(rs.same_class(&v, &c));
            }
        }
    }

    #[test]
    fn residue_singular_rejected() {
        let a = ExactMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(residue_system(&a).unwrap_err(), Error::SingularModulus);
    }
}
