//! Exact integer linear algebra: arbitrary-precision matrices and certified
//! Smith normal form.
//!
//! Everything here is deterministic: the Smith normal form uses a fixed
//! pivoting rule (smallest absolute nonzero entry, row-major tie-break), so
//! byte-identical inputs give byte-identical certificates.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// A dense matrix over the integers, stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Builds a matrix from row-major `i64` data.
    pub fn from_rows(rows: &[&[i64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Ok(IntMatrix {
            rows: r,
            cols: c,
            entries: rows.iter().flat_map(|row| row.iter().map(|&e| e.into())).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Self::identity(self.rows)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn add(&self, other: &IntMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &IntMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &IntMatrix, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::InvalidInput(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        let cur = out.get(r, c) + a * b;
                        out.set(r, c, cur);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::InvalidInput(format!(
                "vector length {} does not match {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * &v[c]).sum())
            .collect())
    }

    /// Kronecker (tensor) product `self ⊗ other`.
    pub fn kronecker(&self, other: &IntMatrix) -> Self {
        let mut out = Self::zero(self.rows * other.rows, self.cols * other.cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.get(r1, c1);
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        out.set(
                            r1 * other.rows + r2,
                            c1 * other.cols + c2,
                            a * other.get(r2, c2),
                        );
                    }
                }
            }
        }
        out
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::InvalidInput("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.entries.clone();
        let idx = |r: usize, c: usize| r * n + c;
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[idx(k, k)].is_zero() {
                match (k + 1..n).find(|&r| !a[idx(r, k)].is_zero()) {
                    Some(r) => {
                        for c in 0..n {
                            a.swap(idx(k, c), idx(r, c));
                        }
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[idx(i, j)] * &a[idx(k, k)] - &a[idx(i, k)] * &a[idx(k, j)];
                    a[idx(i, j)] = num / &prev;
                }
                a[idx(i, k)] = BigInt::zero();
            }
            prev = a[idx(k, k)].clone();
        }
        Ok(sign * a[idx(n - 1, n - 1)].clone())
    }

    /// Smith normal form with unimodular transformation certificates.
    pub fn smith_normal_form(&self) -> SnfResult {
        let mut d = self.clone();
        let mut u = IntMatrix::identity(self.rows);
        let mut v = IntMatrix::identity(self.cols);
        let min = self.rows.min(self.cols);

        for t in 0..min {
            loop {
                // Deterministic pivot: smallest absolute nonzero entry of the
                // remaining submatrix, row-major tie-break.
                let mut pivot: Option<(usize, usize)> = None;
                for r in t..d.rows {
                    for c in t..d.cols {
                        let e = d.get(r, c);
                        if !e.is_zero()
                            && pivot.is_none_or(|(pr, pc)| e.abs() < d.get(pr, pc).abs())
                        {
                            pivot = Some((r, c));
                        }
                    }
                }
                let Some((pr, pc)) = pivot else { break };
                d.swap_rows(t, pr);
                u.swap_rows(t, pr);
                d.swap_cols(t, pc);
                v.swap_cols(t, pc);

                // Clear the pivot column with truncating division; nonzero
                // remainders mean a strictly smaller pivot is now available.
                let mut dirty = false;
                for r in t + 1..d.rows {
                    if !d.get(r, t).is_zero() {
                        let q = d.get(r, t) / d.get(t, t);
                        d.row_sub(r, t, &q);
                        u.row_sub(r, t, &q);
                        if !d.get(r, t).is_zero() {
                            dirty = true;
                        }
                    }
                }
                if dirty {
                    continue;
                }
                for c in t + 1..d.cols {
                    if !d.get(t, c).is_zero() {
                        let q = d.get(t, c) / d.get(t, t);
                        d.col_sub(c, t, &q);
                        v.col_sub(c, t, &q);
                        if !d.get(t, c).is_zero() {
                            dirty = true;
                        }
                    }
                }
                if dirty {
                    continue;
                }
                // Fold in any remaining entry the pivot does not divide, so
                // the diagonal comes out as a divisor chain.
                let offender = (t + 1..d.rows).find(|&r| {
                    (t + 1..d.cols).any(|c| !(d.get(r, c) % d.get(t, t)).is_zero())
                });
                match offender {
                    Some(r) => {
                        d.row_add(t, r);
                        u.row_add(t, r);
                    }
                    None => break,
                }
            }
        }

        for t in 0..min {
            if d.get(t, t).is_negative() {
                d.negate_row(t);
                u.negate_row(t);
            }
        }

        let divisors = (0..min).map(|t| d.get(t, t).clone()).collect();
        SnfResult { u, d, v, divisors }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.entries.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.entries.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }

    /// `row_a -= q * row_b`
    fn row_sub(&mut self, a: usize, b: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let delta = q * self.get(b, c);
            let e = self.get(a, c) - delta;
            self.set(a, c, e);
        }
    }

    /// `row_a += row_b`
    fn row_add(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            let e = self.get(a, c) + self.get(b, c);
            self.set(a, c, e);
        }
    }

    /// `col_a -= q * col_b`
    fn col_sub(&mut self, a: usize, b: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let delta = q * self.get(r, b);
            let e = self.get(r, a) - delta;
            self.set(r, a, e);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let e = -self.get(r, c);
            self.set(r, c, e);
        }
    }

    /// Rank over the rationals (number of nonzero elementary divisors).
    pub fn rank(&self) -> usize {
        self.smith_normal_form().rank()
    }

    /// Dimension of the rational kernel.
    pub fn kernel_rank(&self) -> usize {
        self.cols - self.rank()
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{} ", self.get(r, c))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// JSON form: dimensions plus a row-major array of decimal strings, so entries
// survive readers without big-integer support.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<String>,
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.to_string()).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(de)?;
        if repr.entries.len() != repr.rows * repr.cols {
            return Err(D::Error::custom(format!(
                "{} entries for a {}x{} matrix",
                repr.entries.len(),
                repr.rows,
                repr.cols
            )));
        }
        let entries = repr
            .entries
            .iter()
            .map(|s| BigInt::from_str(s).map_err(|e| D::Error::custom(format!("{s:?}: {e}"))))
            .collect::<std::result::Result<_, _>>()?;
        Ok(IntMatrix { rows: repr.rows, cols: repr.cols, entries })
    }
}

/// Serde adapter: `Vec<BigInt>` as decimal strings, matching the matrix
/// entry format.
pub mod decimal_vec {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &[BigInt],
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(|e| e.to_string()).collect::<Vec<_>>().serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(de)?
            .iter()
            .map(|s| BigInt::from_str(s).map_err(|e| D::Error::custom(format!("{s:?}: {e}"))))
            .collect()
    }
}

/// A certified Smith normal form `U · M · V = D`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnfResult {
    /// Unimodular row transformation.
    pub u: IntMatrix,
    /// The diagonal form.
    pub d: IntMatrix,
    /// Unimodular column transformation.
    pub v: IntMatrix,
    /// Diagonal of `D`: nonnegative, each divides the next, zeros last.
    #[serde(with = "decimal_vec")]
    pub divisors: Vec<BigInt>,
}

impl SnfResult {
    /// Number of nonzero elementary divisors.
    pub fn rank(&self) -> usize {
        self.divisors.iter().filter(|d| !d.is_zero()).count()
    }

    /// Re-multiplies the certificate: `U·M·V = D`, `det U, det V = ±1`, `D`
    /// diagonal with a nonnegative divisor chain, zeros last.
    pub fn verify(&self, m: &IntMatrix) -> Result<()> {
        let product = self.u.mul(m)?.mul(&self.v)?;
        if product != self.d {
            return Err(Error::InvalidInput("certificate mismatch: U*M*V != D".into()));
        }
        for (name, t) in [("U", &self.u), ("V", &self.v)] {
            let det = t.determinant()?;
            if !det.abs().is_one() {
                return Err(Error::InvalidInput(format!(
                    "certificate mismatch: det {name} = {det}"
                )));
            }
        }
        let min = self.d.rows.min(self.d.cols);
        for r in 0..self.d.rows {
            for c in 0..self.d.cols {
                if r != c && !self.d.get(r, c).is_zero() {
                    return Err(Error::InvalidInput("D is not diagonal".into()));
                }
            }
        }
        if self.divisors.len() != min
            || (0..min).any(|t| self.d.get(t, t) != &self.divisors[t])
        {
            return Err(Error::InvalidInput("divisor list disagrees with D".into()));
        }
        for w in self.divisors.windows(2) {
            if w[0].is_negative() || (!w[0].is_zero() && !(&w[1] % &w[0]).is_zero()) {
                return Err(Error::InvalidInput("divisors do not form a chain".into()));
            }
        }
        Ok(())
    }

    /// Solves `M x = b` over the integers, if solvable.
    ///
    /// `M` is the matrix this form was computed from; `D (V^{-1} x) = U b`
    /// decouples the system into divisibility conditions.
    pub fn solve(&self, b: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
        let ub = self.u.mul_vec(b)?;
        let min = self.divisors.len();
        let mut y = vec![BigInt::zero(); self.v.rows];
        for (i, ubi) in ub.iter().enumerate() {
            if i < min && !self.divisors[i].is_zero() {
                if !(ubi % &self.divisors[i]).is_zero() {
                    return Ok(None);
                }
                y[i] = ubi / &self.divisors[i];
            } else if !ubi.is_zero() {
                return Ok(None);
            }
        }
        Ok(Some(self.v.mul_vec(&y)?))
    }

    /// True if `z` lies in the column span of the original matrix.
    pub fn in_image(&self, z: &[BigInt]) -> Result<bool> {
        Ok(self.solve(z)?.is_some())
    }

    /// A basis of the integer kernel of the original matrix: the columns of
    /// `V` matching zero (or absent) diagonal positions.
    pub fn kernel_basis(&self) -> Vec<Vec<BigInt>> {
        let n = self.v.rows;
        (0..n)
            .filter(|&i| self.divisors.get(i).is_none_or(|d| d.is_zero()))
            .map(|i| (0..n).map(|r| self.v.get(r, i).clone()).collect())
            .collect()
    }

    /// Cokernel presentation `Z^free ⊕ ⊕_i Z_{d_i}` with all `d_i >= 2`.
    pub fn cokernel(&self) -> (usize, Vec<BigInt>) {
        let rank = self.rank();
        let free = self.d.rows - rank;
        let torsion = self
            .divisors
            .iter()
            .filter(|d| !d.is_zero() && !d.is_one())
            .cloned()
            .collect();
        (free, torsion)
    }

    /// Coordinates of `z + im(M)` in the cokernel: torsion coordinates
    /// (reduced mod their divisor, in divisor order) then free coordinates.
    pub fn cokernel_class(&self, z: &[BigInt]) -> Result<CokernelClass> {
        let uz = self.u.mul_vec(z)?;
        let min = self.divisors.len();
        let mut torsion = Vec::new();
        let mut free = Vec::new();
        for (i, c) in uz.into_iter().enumerate() {
            match self.divisors.get(i) {
                Some(d) if d.is_one() => {}
                Some(d) if !d.is_zero() => {
                    torsion.push(((c % d) + d) % d);
                }
                _ => {
                    debug_assert!(i >= min || self.divisors[i].is_zero());
                    free.push(c);
                }
            }
        }
        Ok(CokernelClass { torsion, free })
    }
}

/// An element of a cokernel, in the coordinates of [`SnfResult::cokernel`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CokernelClass {
    /// One coordinate per torsion divisor `d_i >= 2`, reduced to `0..d_i`.
    #[serde(with = "decimal_vec")]
    pub torsion: Vec<BigInt>,
    /// Free coordinates in `Z^free`.
    #[serde(with = "decimal_vec")]
    pub free: Vec<BigInt>,
}

impl CokernelClass {
    pub fn is_zero(&self) -> bool {
        self.torsion.iter().all(|c| c.is_zero()) && self.free.iter().all(|c| c.is_zero())
    }
}
