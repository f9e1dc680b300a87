//! Dense matrices over an exact field, with the linear algebra the rest of
//! the crate leans on: multiplication, reduced row echelon form, null spaces
//! and exact characteristic polynomials.

use crate::scalar::{FieldConfig, Scalar};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("Faddeev-LeVerrier needs characteristic 0 or p > n, got p = {p}, n = {n}")]
    UnsupportedField { p: u64, n: usize },
}

/// Row-major dense matrix with entries in a single field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DenseMatrix {
    field: FieldConfig,
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

/// Result of reduced row echelon form.
#[derive(Clone, Debug)]
pub struct Rref {
    pub reduced: DenseMatrix,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
}

/// Which characteristic polynomial algorithm to run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CharPolyMethod {
    /// Faddeev-LeVerrier trace iteration; divides by 1..=n, so it needs
    /// characteristic 0 or p > n.
    FaddeevLeVerrier,
    /// Similarity reduction to Hessenberg form plus the minor recurrence;
    /// works over any field.
    Hessenberg,
}

impl DenseMatrix {
    pub fn zeros(field: FieldConfig, rows: usize, cols: usize) -> Self {
        DenseMatrix {
            field,
            rows,
            cols,
            entries: vec![Scalar::zero(field); rows * cols],
        }
    }

    pub fn identity(field: FieldConfig, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one(field));
        }
        m
    }

    /// Builds a matrix from rows of integers; handy in tests and generators.
    pub fn from_int_rows(field: FieldConfig, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(field, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, Scalar::from_int(field, v));
            }
        }
        m
    }

    pub fn field(&self) -> FieldConfig {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        debug_assert_eq!(v.field(), self.field);
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect();
        Ok(DenseMatrix { entries, ..self.clone() })
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect();
        Ok(DenseMatrix { entries, ..self.clone() })
    }

    pub fn scalar_mul(&self, c: &Scalar) -> DenseMatrix {
        let entries = self.entries.iter().map(|a| a.mul(c)).collect();
        DenseMatrix { entries, ..self.clone() }
    }

    /// Exact matrix product. Skips zero operands, which matters a lot here:
    /// almost everything this crate multiplies is monomial-sparse.
    pub fn mat_mul(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).add(&a.mul(b));
                    out.set(i, j, cur);
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, mut k: u64) -> Result<DenseMatrix, LinalgError> {
        self.check_square()?;
        let mut acc = Self::identity(self.field, self.rows);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mat_mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mat_mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn trace(&self) -> Result<Scalar, LinalgError> {
        self.check_square()?;
        let mut t = Scalar::zero(self.field);
        for i in 0..self.rows {
            t = t.add(self.get(i, i));
        }
        Ok(t)
    }

    /// Unique reduced row echelon form. Pivot selection is first nonzero row
    /// in the leftmost unsettled column, so the output is deterministic.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let mut pivot_cols = Vec::new();
        let mut pivot_row = 0;
        for col in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            let Some(src) = (pivot_row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(pivot_row, src);
            let inv = m.get(pivot_row, col).inv().expect("pivot is nonzero");
            m.scale_row(pivot_row, &inv);
            for r in 0..m.rows {
                if r != pivot_row && !m.get(r, col).is_zero() {
                    let factor = m.get(r, col).clone();
                    m.sub_scaled_row(r, pivot_row, &factor);
                }
            }
            pivot_cols.push(col);
            pivot_row += 1;
        }
        Rref {
            rank: pivot_cols.len(),
            pivot_cols,
            reduced: m,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Basis of the right null space, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Scalar>> {
        let Rref { reduced, pivot_cols, .. } = self.rref();
        let pivot_of_col: std::collections::HashMap<usize, usize> = pivot_cols
            .iter()
            .enumerate()
            .map(|(row, &col)| (col, row))
            .collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_of_col.contains_key(&free) {
                continue;
            }
            let mut v = vec![Scalar::zero(self.field); self.cols];
            v[free] = Scalar::one(self.field);
            for (row, &col) in pivot_cols.iter().enumerate() {
                v[col] = reduced.get(row, free).neg();
            }
            basis.push(v);
        }
        basis
    }

    /// Monic characteristic polynomial `det(tI - M)`, coefficients in
    /// descending degree order (index 0 is the leading 1).
    pub fn char_poly(&self) -> Result<Vec<Scalar>, LinalgError> {
        match self.field {
            FieldConfig::Q => self.char_poly_with(CharPolyMethod::FaddeevLeVerrier),
            FieldConfig::Fp(_) => self.char_poly_with(CharPolyMethod::Hessenberg),
        }
    }

    pub fn char_poly_with(&self, method: CharPolyMethod) -> Result<Vec<Scalar>, LinalgError> {
        self.check_square()?;
        match method {
            CharPolyMethod::FaddeevLeVerrier => self.char_poly_faddeev_leverrier(),
            CharPolyMethod::Hessenberg => self.char_poly_hessenberg(),
        }
    }

    fn char_poly_faddeev_leverrier(&self) -> Result<Vec<Scalar>, LinalgError> {
        let n = self.rows;
        if let FieldConfig::Fp(p) = self.field {
            if p <= n as u64 {
                return Err(LinalgError::UnsupportedField { p, n });
            }
        }
        let mut coeffs = vec![Scalar::one(self.field)];
        let mut m = Self::identity(self.field, n);
        for k in 1..=n {
            let am = self.mat_mul(&m)?;
            let c = am
                .trace()?
                .neg()
                .div(&Scalar::from_int(self.field, k as i64));
            if k < n {
                m = am.add(&Self::identity(self.field, n).scalar_mul(&c))?;
            }
            coeffs.push(c);
        }
        Ok(coeffs)
    }

    fn char_poly_hessenberg(&self) -> Result<Vec<Scalar>, LinalgError> {
        let n = self.rows;
        let field = self.field;
        if n == 0 {
            return Ok(vec![Scalar::one(field)]);
        }
        let mut h = self.clone();
        // Similarity reduction to upper Hessenberg with row pivoting.
        for col in 0..n.saturating_sub(2) {
            let Some(src) = (col + 1..n).find(|&r| !h.get(r, col).is_zero()) else {
                continue;
            };
            if src != col + 1 {
                h.swap_rows(col + 1, src);
                h.swap_cols(col + 1, src);
            }
            let pivot_inv = h.get(col + 1, col).inv().expect("pivot is nonzero");
            for r in col + 2..n {
                if h.get(r, col).is_zero() {
                    continue;
                }
                let factor = h.get(r, col).mul(&pivot_inv);
                // rows: r -= factor * (col+1); columns: col+1 += factor * r
                h.sub_scaled_row(r, col + 1, &factor);
                for i in 0..n {
                    let v = h.get(i, col + 1).add(&h.get(i, r).mul(&factor));
                    h.set(i, col + 1, v);
                }
            }
        }
        // p_k(t) = (t - h[k,k]) p_{k-1}
        //        - sum_i h[i,k] * (prod_{j=i..k-1} h[j+1,j]) * p_{i-1},  1-based.
        // Polynomials are kept in ascending order while we recurse.
        let one = Scalar::one(field);
        let mut polys: Vec<Vec<Scalar>> = vec![vec![one.clone()]];
        for k in 1..=n {
            let prev = &polys[k - 1];
            let diag = h.get(k - 1, k - 1);
            let mut p = vec![Scalar::zero(field); k + 1];
            for (d, c) in prev.iter().enumerate() {
                p[d + 1] = p[d + 1].add(c);
                p[d] = p[d].sub(&c.mul(diag));
            }
            let mut subdiag = Scalar::one(field);
            for i in (1..k).rev() {
                subdiag = subdiag.mul(h.get(i, i - 1));
                if subdiag.is_zero() {
                    break;
                }
                let coeff = h.get(i - 1, k - 1).mul(&subdiag);
                if coeff.is_zero() {
                    continue;
                }
                for (d, c) in polys[i - 1].iter().enumerate() {
                    p[d] = p[d].sub(&coeff.mul(c));
                }
            }
            polys.push(p);
        }
        let mut out = polys.pop().expect("n >= 1");
        out.reverse();
        Ok(out)
    }

    /// Evaluates a polynomial (descending coefficients) at this matrix.
    pub fn eval_poly(&self, coeffs: &[Scalar]) -> Result<DenseMatrix, LinalgError> {
        self.check_square()?;
        let n = self.rows;
        let mut acc = Self::zeros(self.field, n, n);
        for c in coeffs {
            acc = acc.mat_mul(self)?;
            acc = acc.add(&Self::identity(self.field, n).scalar_mul(c))?;
        }
        Ok(acc)
    }

    fn check_same_shape(&self, other: &DenseMatrix) -> Result<(), LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn check_square(&self) -> Result<(), LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NonSquare { rows: self.rows, cols: self.cols });
        }
        Ok(())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn scale_row(&mut self, r: usize, c: &Scalar) {
        for j in 0..self.cols {
            let idx = r * self.cols + j;
            if !self.entries[idx].is_zero() {
                self.entries[idx] = self.entries[idx].mul(c);
            }
        }
    }

    /// row[r] -= factor * row[src]
    fn sub_scaled_row(&mut self, r: usize, src: usize, factor: &Scalar) {
        if factor.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = self.entries[src * self.cols + j].clone();
            if s.is_zero() {
                continue;
            }
            let idx = r * self.cols + j;
            self.entries[idx] = self.entries[idx].sub(&factor.mul(&s));
        }
    }
}

impl fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}
