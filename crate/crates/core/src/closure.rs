//! Span-closure: a linear basis for the unital subalgebra generated by given
//! block elements.
//!
//! The algorithm seeds an exact echelon basis with the unit and the
//! generators, then repeatedly right-multiplies every basis row by every
//! generator, reduces the product against the basis and inserts whatever is
//! new, until a full pass adds nothing. Right multiplication alone saturates
//! because every word grows one letter at a time; the pairwise-product checks
//! in the tests confirm the resulting span is multiplicatively closed on both
//! sides.
//!
//! Everything is deterministic: insertion order is (row index, generator
//! index) lexicographic, pivots are leftmost-first, and the finished basis is
//! presented in reduced row echelon form sorted by pivot column.

use crate::model::{AlgebraError, BlockElement, FlatVector, SupportSpec};
use crate::scalar::Scalar;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClosureError {
    #[error("no generators given")]
    NoGenerators,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Outcome of a membership test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    /// The element lies in the span; `coefficients[r]` is the coefficient of
    /// basis row `r` in the unique expression of the element.
    In { coefficients: Vec<Scalar> },
    /// Not in the span; `residue_coord` is the first coordinate where the
    /// fully reduced residue is nonzero.
    Out { residue_coord: usize },
}

impl Membership {
    pub fn is_in(&self) -> bool {
        matches!(self, Membership::In { .. })
    }
}

/// Echelonized basis of a multiplicatively closed subspace of the block
/// product, as produced by [`generate`].
#[derive(Clone, Debug)]
pub struct SubalgebraBasis {
    spec: Arc<SupportSpec>,
    rows: Vec<FlatVector>,
    pivots: Vec<usize>,
    /// Generator word whose insertion created each row (indices into the
    /// `gens` slice passed to [`generate`]; the empty word is the unit).
    /// After echelon updates a row is generally a linear combination of its
    /// word with earlier ones; the word is provenance, not an expression.
    provenance: Vec<Vec<usize>>,
}

/// Mutable echelon state, rows kept in insertion order during saturation.
struct Echelon {
    dim: usize,
    rows: Vec<FlatVector>,
    pivot_of_row: Vec<usize>,
    row_of_pivot: Vec<Option<usize>>,
    words: Vec<Vec<usize>>,
}

impl Echelon {
    fn new(dim: usize) -> Self {
        Echelon {
            dim,
            rows: Vec::new(),
            pivot_of_row: Vec::new(),
            row_of_pivot: vec![None; dim],
            words: Vec::new(),
        }
    }

    /// Reduces `v` against the basis without mutating it. Returns the residue
    /// and the (row, coefficient) pairs that were subtracted.
    fn reduce(&self, mut v: FlatVector) -> (FlatVector, Vec<(usize, Scalar)>) {
        let mut combo = Vec::new();
        for c in 0..self.dim {
            if v.coords[c].is_zero() {
                continue;
            }
            let Some(r) = self.row_of_pivot[c] else { continue };
            let factor = v.coords[c].clone();
            let row = &self.rows[r];
            for j in c..self.dim {
                if row.coords[j].is_zero() {
                    continue;
                }
                v.coords[j] = v.coords[j].sub(&factor.mul(&row.coords[j]));
            }
            combo.push((r, factor));
        }
        (v, combo)
    }

    /// Inserts `v` if independent; returns its new row index.
    fn insert(&mut self, v: FlatVector, word: Vec<usize>) -> Option<usize> {
        let (mut v, _) = self.reduce(v);
        let lead = v.leading_coord()?;
        let inv = v.coords[lead].inv().expect("leading coord is nonzero");
        for c in lead..self.dim {
            if !v.coords[c].is_zero() {
                v.coords[c] = v.coords[c].mul(&inv);
            }
        }
        for r in 0..self.rows.len() {
            if self.rows[r].coords[lead].is_zero() {
                continue;
            }
            let factor = self.rows[r].coords[lead].clone();
            for c in lead..self.dim {
                if v.coords[c].is_zero() {
                    continue;
                }
                self.rows[r].coords[c] =
                    self.rows[r].coords[c].sub(&factor.mul(&v.coords[c]));
            }
        }
        let idx = self.rows.len();
        self.rows.push(v);
        self.pivot_of_row.push(lead);
        self.row_of_pivot[lead] = Some(idx);
        self.words.push(word);
        Some(idx)
    }

    fn len(&self) -> usize {
        self.rows.len()
    }
}

/// Computes a basis of the subalgebra generated by `gens` (unital when
/// `include_unit` is set). The span is saturated under right multiplication
/// by every generator.
pub fn generate(
    spec: &Arc<SupportSpec>,
    gens: &[BlockElement],
    include_unit: bool,
) -> Result<SubalgebraBasis, ClosureError> {
    if gens.is_empty() {
        return Err(ClosureError::NoGenerators);
    }
    for g in gens {
        if g.spec() != spec && !Arc::ptr_eq(g.spec(), spec) {
            return Err(ClosureError::Algebra(AlgebraError::SpecMismatch));
        }
    }
    let mut ech = Echelon::new(spec.dimension());
    if include_unit {
        ech.insert(BlockElement::one(spec).flatten(), Vec::new());
    }
    for (gi, g) in gens.iter().enumerate() {
        ech.insert(g.flatten(), vec![gi]);
    }
    loop {
        let mut added = false;
        let mut i = 0;
        while i < ech.len() {
            for (gi, g) in gens.iter().enumerate() {
                let row_elem = BlockElement::unflatten(spec, &ech.rows[i])?;
                let prod = row_elem.mul(g)?;
                let mut word = ech.words[i].clone();
                word.push(gi);
                if ech.insert(prod.flatten(), word).is_some() {
                    added = true;
                }
            }
            i += 1;
        }
        if !added {
            break;
        }
    }
    Ok(finalize(spec, ech))
}

/// Echelonizes a plain list of elements without any saturation: a subspace
/// basis, not necessarily an algebra. Used for membership probes against
/// hand-picked spans.
pub fn from_elements(
    spec: &Arc<SupportSpec>,
    elements: &[BlockElement],
) -> Result<SubalgebraBasis, ClosureError> {
    let mut ech = Echelon::new(spec.dimension());
    for x in elements {
        if x.spec() != spec && !Arc::ptr_eq(x.spec(), spec) {
            return Err(ClosureError::Algebra(AlgebraError::SpecMismatch));
        }
        ech.insert(x.flatten(), Vec::new());
    }
    Ok(finalize(spec, ech))
}

fn finalize(spec: &Arc<SupportSpec>, ech: Echelon) -> SubalgebraBasis {
    let mut order: Vec<usize> = (0..ech.rows.len()).collect();
    order.sort_by_key(|&r| ech.pivot_of_row[r]);
    let mut rows = Vec::with_capacity(order.len());
    let mut pivots = Vec::with_capacity(order.len());
    let mut provenance = Vec::with_capacity(order.len());
    for &r in &order {
        rows.push(ech.rows[r].clone());
        pivots.push(ech.pivot_of_row[r]);
        provenance.push(ech.words[r].clone());
    }
    SubalgebraBasis { spec: Arc::clone(spec), rows, pivots, provenance }
}

impl SubalgebraBasis {
    pub fn spec(&self) -> &Arc<SupportSpec> {
        &self.spec
    }

    /// Number of basis rows, i.e. the linear dimension of the span.
    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[FlatVector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// The generator word recorded for row `r` (provenance, see above).
    pub fn word_for_row(&self, r: usize) -> &[usize] {
        &self.provenance[r]
    }

    pub fn row_element(&self, r: usize) -> BlockElement {
        BlockElement::unflatten(&self.spec, &self.rows[r]).expect("row has spec dimension")
    }

    /// Membership with certificate, on flat coordinates.
    pub fn contains_flat(&self, v: &FlatVector) -> Result<Membership, ClosureError> {
        if v.len() != self.spec.dimension() {
            return Err(ClosureError::Algebra(AlgebraError::FlatLength {
                expected: self.spec.dimension(),
                got: v.len(),
            }));
        }
        let (residue, combo) = self.reduce_against(v.clone());
        match residue.leading_coord() {
            Some(c) => Ok(Membership::Out { residue_coord: c }),
            None => {
                let mut coefficients = vec![Scalar::zero(self.spec.field()); self.rows.len()];
                for (r, factor) in combo {
                    coefficients[r] = factor;
                }
                Ok(Membership::In { coefficients })
            }
        }
    }

    /// Membership with certificate. True exactly when the element reduces to
    /// zero against the basis.
    pub fn contains(&self, x: &BlockElement) -> Result<Membership, ClosureError> {
        if x.spec() != &self.spec && !Arc::ptr_eq(x.spec(), &self.spec) {
            return Err(ClosureError::Algebra(AlgebraError::SpecMismatch));
        }
        self.contains_flat(&x.flatten())
    }

    fn reduce_against(&self, mut v: FlatVector) -> (FlatVector, Vec<(usize, Scalar)>) {
        let dim = self.spec.dimension();
        let mut combo = Vec::new();
        for (r, &pivot) in self.pivots.iter().enumerate() {
            if v.coords[pivot].is_zero() {
                continue;
            }
            let factor = v.coords[pivot].clone();
            let row = &self.rows[r];
            for j in pivot..dim {
                if row.coords[j].is_zero() {
                    continue;
                }
                v.coords[j] = v.coords[j].sub(&factor.mul(&row.coords[j]));
            }
            combo.push((r, factor));
        }
        (v, combo)
    }

    /// Rebuilds the element described by a membership certificate.
    pub fn element_from_certificate(&self, coefficients: &[Scalar]) -> BlockElement {
        assert_eq!(coefficients.len(), self.rows.len());
        let mut coords = vec![Scalar::zero(self.spec.field()); self.spec.dimension()];
        for (r, c) in coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, x) in self.rows[r].coords.iter().enumerate() {
                if !x.is_zero() {
                    coords[j] = coords[j].add(&c.mul(x));
                }
            }
        }
        BlockElement::unflatten(&self.spec, &FlatVector { coords })
            .expect("certificate has spec dimension")
    }
}
