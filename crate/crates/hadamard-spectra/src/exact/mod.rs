//! Exact linear algebra over arbitrary-precision rationals.
//!
//! Everything structural (normal forms, lattices, residue systems, the
//! expansivity test) is decided here with no floating point at all.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

mod expansive;
mod lattice;
mod normal_form;

pub use expansive::{char_poly, is_expansive};
pub use lattice::{
    dual_lattice, invariant_lattice, kernel_lattice, sublattices_of_index, Lattice,
};
pub use normal_form::{
    hermite_normal_form, smith_normal_form, residue_system, HermiteForm, ResidueSystem, SmithForm,
};

pub type Rat = BigRational;
pub type RatVec = Vec<BigRational>;
pub type IntVec = Vec<BigInt>;

pub fn rat(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Dense matrix with exact rational entries, row major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl ExactMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        ExactMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<RatVec>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(ExactMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let data = rows.iter().flat_map(|row| row.iter().map(|&v| rat(v))).collect();
        ExactMatrix { rows: rows.len(), cols: rows.first().map_or(0, |r| r.len()), data }
    }

    pub fn from_int_rows(rows: &[Vec<BigInt>]) -> Self {
        let c = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|v| Rat::from_integer(v.clone())))
            .collect();
        ExactMatrix { rows: rows.len(), cols: c, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(dim: usize, cols: &[RatVec]) -> Result<Self> {
        if cols.iter().any(|c| c.len() != dim) {
            return Err(Error::Shape("column length mismatch".into()));
        }
        let mut m = Self::zero(dim, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> RatVec {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> RatVec {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<RatVec> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> RatVec {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for j in 0..self.cols {
                    acc += self.get(i, j) * &v[j];
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        ExactMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        ExactMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &Rat) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        ExactMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rat::one())
    }

    /// Exact determinant by fraction-free style Gaussian elimination over Q.
    pub fn det(&self) -> Result<Rat> {
        if !self.is_square() {
            return Err(Error::Shape("determinant of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a: Vec<RatVec> = (0..n).map(|i| self.row(i)).collect();
        let mut det = Rat::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
                return Ok(Rat::zero());
            };
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            det *= &a[c][c];
            let inv = a[c][c].recip();
            for r in c + 1..n {
                if a[r][c].is_zero() {
                    continue;
                }
                let f = &a[r][c] * &inv;
                for j in c..n {
                    let val = &a[r][j] - &f * &a[c][j];
                    a[r][j] = val;
                }
            }
        }
        Ok(det)
    }

    /// Exact inverse via Gauss-Jordan; `SingularModulus` on singular input.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a: Vec<RatVec> = (0..n)
            .map(|i| {
                let mut row = self.row(i);
                let mut aug = vec![Rat::zero(); n];
                aug[i] = Rat::one();
                row.extend(aug);
                row
            })
            .collect();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
                return Err(Error::SingularModulus);
            };
            a.swap(p, c);
            let inv = a[c][c].recip();
            for j in c..2 * n {
                let val = &a[c][j] * &inv;
                a[c][j] = val;
            }
            for r in 0..n {
                if r == c || a[r][c].is_zero() {
                    continue;
                }
                let f = a[r][c].clone();
                for j in c..2 * n {
                    let val = &a[r][j] - &f * &a[c][j];
                    a[r][j] = val;
                }
            }
        }
        let mut out = Self::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, a[i][j + n].clone());
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        assert!(self.is_square());
        let mut out = Self::identity(self.rows);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn is_integer(&self) -> bool {
        self.data.iter().all(|v| v.is_integer())
    }

    pub fn to_int_rows(&self) -> Result<Vec<IntVec>> {
        if !self.is_integer() {
            return Err(Error::NotIntegral(format!("matrix {self}")));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_integer()).collect())
            .collect())
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| rat_to_f64(self.get(i, j))).collect())
            .collect()
    }

    /// Maximum absolute row sum (operator norm for the sup norm), exact.
    pub fn row_sum_norm(&self) -> Rat {
        (0..self.rows)
            .map(|i| {
                let mut s = Rat::zero();
                for j in 0..self.cols {
                    s += self.get(i, j).abs();
                }
                s
            })
            .max()
            .unwrap_or_else(Rat::zero)
    }

    /// True if v lies in the column span (solved exactly).
    pub fn in_col_span(&self, v: &[Rat]) -> bool {
        self.solve_col_span(v).is_some()
    }

    /// Solve self * x = v exactly if consistent, else None.
    pub fn solve_col_span(&self, v: &[Rat]) -> Option<RatVec> {
        assert_eq!(v.len(), self.rows);
        let n = self.rows;
        let m = self.cols;
        let mut a: Vec<RatVec> = (0..n)
            .map(|i| {
                let mut row = self.row(i);
                row.push(v[i].clone());
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m {
            let Some(p) = (r..n).find(|&i| !a[i][c].is_zero()) else { continue };
            a.swap(p, r);
            let inv = a[r][c].recip();
            for j in c..=m {
                let val = &a[r][j] * &inv;
                a[r][j] = val;
            }
            for i in 0..n {
                if i == r || a[i][c].is_zero() {
                    continue;
                }
                let f = a[i][c].clone();
                for j in c..=m {
                    let val = &a[i][j] - &f * &a[r][j];
                    a[i][j] = val;
                }
            }
            pivots.push(c);
            r += 1;
            if r == n {
                break;
            }
        }
        for i in r..n {
            if !a[i][m].is_zero() {
                return None;
            }
        }
        let mut x = vec![Rat::zero(); m];
        for (row, &c) in pivots.iter().enumerate() {
            x[c] = a[row][m].clone();
        }
        Some(x)
    }
}

impl std::fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self}")
    }
}

impl std::fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fallback for extreme numerator/denominator magnitudes.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY * r.numer().signum().to_f64().unwrap());
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn vec_add(a: &[Rat], b: &[Rat]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Rat], b: &[Rat]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_neg(a: &[Rat]) -> RatVec {
    a.iter().map(|x| -x).collect()
}

pub fn vec_dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn vec_is_integer(a: &[Rat]) -> bool {
    a.iter().all(|x| x.is_integer())
}

/// Componentwise fractional part in [0,1).
pub fn vec_fract(a: &[Rat]) -> RatVec {
    a.iter().map(|x| x - x.floor()).collect()
}

pub fn vec_to_f64(a: &[Rat]) -> Vec<f64> {
    a.iter().map(rat_to_f64).collect()
}

pub fn vec_from_ints(a: &[BigInt]) -> RatVec {
    a.iter().map(|v| Rat::from_integer(v.clone())).collect()
}

pub fn vec_from_i64(a: &[i64]) -> RatVec {
    a.iter().map(|&v| rat(v)).collect()
}

pub fn int_vec_from_i64(a: &[i64]) -> IntVec {
    a.iter().map(|&v| BigInt::from(v)).collect()
}

/// Sup norm of a rational vector, exact.
pub fn vec_sup_norm(a: &[Rat]) -> Rat {
    a.iter().map(|x| x.abs()).max().unwrap_or_else(Rat::zero)
}

/// One norm of a rational vector, exact.
pub fn vec_one_norm(a: &[Rat]) -> Rat {
    a.iter().map(|x| x.abs()).sum()
}

/// Exact upper bound for sum_{j >= 1} ||m^j||_inf, finite when powers of m
/// contract. Splits the series at the first power with norm <= 1/2 and
/// bounds the rest geometrically.
pub fn geometric_norm_sum(m: &ExactMatrix) -> Result<Rat> {
    let half = ratio(1, 2);
    let mut p = m.clone();
    let mut block = p.row_sum_norm();
    let mut k = 1u32;
    while p.row_sum_norm() > half {
        p = p.mul(m);
        block += p.row_sum_norm();
        k += 1;
        if k > 512 {
            return Err(Error::NotExpansive);
        }
    }
    let rho = p.row_sum_norm();
    Ok(block / (Rat::one() - rho))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let m = ExactMatrix::from_i64(&[&[2, 1], &[0, 3]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), ExactMatrix::identity(2));
        assert_eq!(inv.mul(&m), ExactMatrix::identity(2));
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        let m = ExactMatrix::from_i64(&[&[2, 1], &[0, 3]]);
        assert_eq!(m.det().unwrap(), rat(6));
        let s = ExactMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.det().unwrap(), rat(0));
        let t = ExactMatrix::from_i64(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]);
        // 1*(50-48) - 2*(40-42) + 3*(32-35) = 2 + 4 - 9
        assert_eq!(t.det().unwrap(), rat(-3));
    }

    #[test]
    fn singular_inverse_rejected() {
        let s = ExactMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.inverse().unwrap_err(), Error::SingularModulus);
    }

    #[test]
    fn solve_col_span_consistency() {
        let m = ExactMatrix::from_i64(&[&[1, 0], &[2, 0], &[0, 1]]);
        let v = vec![rat(3), rat(6), rat(-1)];
        let x = m.solve_col_span(&v).unwrap();
        assert_eq!(m.mul_vec(&x), v);
        let w = vec![rat(3), rat(5), rat(0)];
        assert!(m.solve_col_span(&w).is_none());
    }

    #[test]
    fn row_sum_norm_exact() {
        let m = ExactMatrix::from_i64(&[&[1, -2], &[3, 4]]);
        assert_eq!(m.row_sum_norm(), rat(7));
    }
}
