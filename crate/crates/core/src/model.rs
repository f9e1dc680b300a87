//! The truncated block-product algebra.
//!
//! A `SupportSpec` fixes a finite list of dimensions `n` (each at least 2),
//! a multiplicity `a_n` for each, and a nonzero scale `lambda_{n,i}` per copy,
//! with the lambdas for a fixed `n` pairwise distinct even up to sign. The
//! ambient algebra is the product over all components `(n, i)` of full `n x n`
//! matrix algebras; `BlockElement` is one element of that product. The two
//! distinguished generators are
//!
//! * `e`: upper-left entry `lambda_{n,i}` in each block, zeros elsewhere;
//! * `sigma`: in every block of dimension `n`, the cyclic permutation matrix
//!   sending basis column 1 to `n` and column `j` to `j - 1`.

use crate::matrix::DenseMatrix;
use crate::scalar::{FieldConfig, Scalar};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// One copy of a matrix algebra inside the product: dimension `n`, copy
/// index `i` (1-based, `1 <= i <= a_n`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct ComponentKey {
    pub n: usize,
    pub i: usize,
}

impl fmt::Display for ComponentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.n, self.i)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpecEntry {
    pub n: usize,
    pub multiplicity: usize,
    pub lambdas: Vec<Scalar>,
}

/// Validated description of the truncated product algebra.
#[derive(Clone, Debug)]
pub struct SupportSpec {
    field: FieldConfig,
    entries: Vec<SpecEntry>,
    components: Vec<ComponentKey>,
    offsets: Vec<usize>,
    dimension: usize,
}

impl PartialEq for SupportSpec {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.entries == other.entries
    }
}
impl Eq for SupportSpec {}

/// Constructor input: lambdas `None` means "use the default scheme".
#[derive(Clone, Debug)]
pub struct SpecEntryInput {
    pub n: usize,
    pub multiplicity: usize,
    pub lambdas: Option<Vec<Scalar>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("invalid support spec: {}", violations.join("; "))]
    Invalid { violations: Vec<String> },
    #[error("field F_{p} is too small for the default lambda scheme: need p > {needed}")]
    FieldTooSmall { p: u64, needed: u64 },
    #[error("spec parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("spec JSON error: {0}")]
    Json(String),
}

/// The default lambda assignment: `lambda_{n,i} = i` as a field element.
/// All values are nonzero and pairwise distinct even up to sign, because they
/// are the integers `1..=a_n` (over `F_p` this needs `p > 2 * max(a_n)`).
pub fn default_lambda_scheme(
    field: FieldConfig,
    entries: &[(usize, usize)],
) -> Result<Vec<Vec<Scalar>>, SpecError> {
    if let FieldConfig::Fp(p) = field {
        let max_a = entries.iter().map(|&(_, a)| a).max().unwrap_or(0) as u64;
        if p <= 2 * max_a {
            return Err(SpecError::FieldTooSmall { p, needed: 2 * max_a });
        }
    }
    Ok(entries
        .iter()
        .map(|&(_, a)| (1..=a).map(|i| Scalar::from_int(field, i as i64)).collect())
        .collect())
}

impl SupportSpec {
    /// Validates and builds a spec. Entries may arrive in any order; they are
    /// sorted by dimension. Reports every violated invariant, not just the
    /// first.
    pub fn new(field: FieldConfig, inputs: Vec<SpecEntryInput>) -> Result<SupportSpec, SpecError> {
        let mut violations = Vec::new();
        if let Err(e) = field.validate() {
            violations.push(e.to_string());
        }
        if inputs.is_empty() {
            violations.push("support is empty: at least one (n, a_n) entry is required".into());
        }

        let mut inputs = inputs;
        inputs.sort_by_key(|e| e.n);
        for w in inputs.windows(2) {
            if w[0].n == w[1].n {
                violations.push(format!("duplicate dimension n = {}", w[0].n));
            }
        }

        let mut entries = Vec::with_capacity(inputs.len());
        for input in inputs {
            let SpecEntryInput { n, multiplicity, lambdas } = input;
            if n < 2 {
                violations.push(format!("dimension n = {n} is below 2"));
            }
            if multiplicity < 1 {
                violations.push(format!("multiplicity a_{n} = {multiplicity} is below 1"));
            }
            let lambdas = match lambdas {
                Some(ls) => {
                    if ls.len() != multiplicity {
                        violations.push(format!(
                            "entry n = {n} has {} lambdas, expected {multiplicity}",
                            ls.len()
                        ));
                    }
                    ls
                }
                None => match default_lambda_scheme(field, &[(n, multiplicity)]) {
                    Ok(mut v) => v.pop().unwrap(),
                    Err(e) => {
                        violations.push(e.to_string());
                        Vec::new()
                    }
                },
            };
            for (idx, l) in lambdas.iter().enumerate() {
                if l.field() != field {
                    violations.push(format!(
                        "lambda_{{{n},{}}} lies in {}, spec field is {field}",
                        idx + 1,
                        l.field()
                    ));
                } else if l.is_zero() {
                    violations.push(format!("lambda_{{{n},{}}} is zero", idx + 1));
                }
            }
            // distinct even up to sign <=> squares pairwise distinct
            for a in 0..lambdas.len() {
                for b in a + 1..lambdas.len() {
                    if lambdas[a].field() == lambdas[b].field()
                        && lambdas[a].square() == lambdas[b].square()
                    {
                        violations.push(format!(
                            "lambda_{{{n},{}}} and lambda_{{{n},{}}} coincide up to sign",
                            a + 1,
                            b + 1
                        ));
                    }
                }
            }
            entries.push(SpecEntry { n, multiplicity, lambdas });
        }

        if !violations.is_empty() {
            return Err(SpecError::Invalid { violations });
        }
        Ok(Self::from_entries(field, entries))
    }

    fn from_entries(field: FieldConfig, entries: Vec<SpecEntry>) -> SupportSpec {
        let mut components = Vec::new();
        let mut offsets = Vec::new();
        let mut dim = 0;
        for e in &entries {
            for i in 1..=e.multiplicity {
                components.push(ComponentKey { n: e.n, i });
                offsets.push(dim);
                dim += e.n * e.n;
            }
        }
        SupportSpec { field, entries, components, offsets, dimension: dim }
    }

    /// Test-only escape hatch that skips validation, used to probe what the
    /// invariants are protecting against.
    #[cfg(test)]
    pub(crate) fn new_unchecked(field: FieldConfig, entries: Vec<SpecEntry>) -> SupportSpec {
        Self::from_entries(field, entries)
    }

    /// Parses the inline grammar `n:a[,n:a]...`, e.g. `"2:3,5:2"`, with the
    /// default lambda scheme.
    pub fn parse_inline(field: FieldConfig, text: &str) -> Result<SupportSpec, SpecError> {
        if text.trim().is_empty() {
            return Err(SpecError::Parse {
                position: 0,
                message: "empty spec".into(),
            });
        }
        let mut inputs = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        let mut pos = 0usize;
        for token in text.split(',') {
            let start = pos;
            pos += token.len() + 1;
            let token_trim = token.trim();
            let err = |message: String| SpecError::Parse { position: start, message };
            let Some((n_str, a_str)) = token_trim.split_once(':') else {
                return Err(err(format!("expected n:a, got {token_trim:?}")));
            };
            let n: usize = n_str
                .trim()
                .parse()
                .map_err(|_| err(format!("invalid dimension {n_str:?}")))?;
            let a: usize = a_str
                .trim()
                .parse()
                .map_err(|_| err(format!("invalid multiplicity {a_str:?}")))?;
            if n < 2 {
                return Err(err(format!("dimension n = {n} is below 2")));
            }
            if a < 1 {
                return Err(err(format!("multiplicity a_{n} = {a} is below 1")));
            }
            if !seen.insert(n) {
                return Err(err(format!("duplicate dimension n = {n}")));
            }
            inputs.push(SpecEntryInput { n, multiplicity: a, lambdas: None });
        }
        SupportSpec::new(field, inputs)
    }

    pub fn from_json(text: &str) -> Result<SupportSpec, SpecError> {
        let raw: SpecJson =
            serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))?;
        raw.try_into()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(SpecJson::from(self)).expect("spec serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SpecJson::from(self)).expect("spec serializes")
    }

    pub fn field(&self) -> FieldConfig {
        self.field
    }

    pub fn entries(&self) -> &[SpecEntry] {
        &self.entries
    }

    /// The set of dimensions in the support, increasing.
    pub fn support(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.n).collect()
    }

    pub fn max_n(&self) -> usize {
        self.entries.last().map(|e| e.n).unwrap_or(0)
    }

    /// Total linear dimension of the product: sum of `a_n * n^2`.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of components: sum of `a_n`.
    pub fn total_multiplicity(&self) -> usize {
        self.components.len()
    }

    /// All components `(n, i)` in lexicographic order.
    pub fn components(&self) -> &[ComponentKey] {
        &self.components
    }

    pub fn component_index(&self, n: usize, i: usize) -> Option<usize> {
        self.components
            .binary_search(&ComponentKey { n, i })
            .ok()
    }

    /// Flat-coordinate offset of a component's block.
    pub fn offset(&self, component_idx: usize) -> usize {
        self.offsets[component_idx]
    }

    pub fn entry(&self, n: usize) -> Option<&SpecEntry> {
        self.entries.iter().find(|e| e.n == n)
    }

    pub fn lambda(&self, n: usize, i: usize) -> Option<&Scalar> {
        self.entry(n).and_then(|e| e.lambdas.get(i - 1))
    }
}

#[derive(Serialize, Deserialize)]
struct SpecEntryJson {
    n: usize,
    a: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambdas: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    field: FieldConfig,
    entries: Vec<SpecEntryJson>,
}

impl From<&SupportSpec> for SpecJson {
    fn from(spec: &SupportSpec) -> Self {
        SpecJson {
            field: spec.field,
            entries: spec
                .entries
                .iter()
                .map(|e| SpecEntryJson {
                    n: e.n,
                    a: e.multiplicity,
                    lambdas: Some(e.lambdas.iter().map(Scalar::to_string).collect()),
                })
                .collect(),
        }
    }
}

impl TryFrom<SpecJson> for SupportSpec {
    type Error = SpecError;

    fn try_from(raw: SpecJson) -> Result<Self, SpecError> {
        let field = raw.field;
        let mut inputs = Vec::new();
        for e in raw.entries {
            let lambdas = match e.lambdas {
                None => None,
                Some(ls) => {
                    let parsed: Result<Vec<Scalar>, _> =
                        ls.iter().map(|s| Scalar::parse(field, s)).collect();
                    Some(parsed.map_err(|err| SpecError::Json(err.to_string()))?)
                }
            };
            inputs.push(SpecEntryInput { n: e.n, multiplicity: e.a, lambdas });
        }
        SupportSpec::new(field, inputs)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("block elements built over different specs")]
    SpecMismatch,
    #[error("unknown component {0}")]
    UnknownComponent(ComponentKey),
    #[error("flat vector has length {got}, spec dimension is {expected}")]
    FlatLength { expected: usize, got: usize },
}

/// An element of the block product: one `n x n` matrix per component `(n, i)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlockElement {
    spec: Arc<SupportSpec>,
    blocks: Vec<DenseMatrix>,
}

/// Flat coordinates of a `BlockElement`: blocks in component order, each
/// row-major. Length is always the spec dimension.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FlatVector {
    pub(crate) coords: Vec<Scalar>,
}

impl FlatVector {
    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Scalar::is_zero)
    }

    /// Index of the first nonzero coordinate.
    pub fn leading_coord(&self) -> Option<usize> {
        self.coords.iter().position(|c| !c.is_zero())
    }
}

impl BlockElement {
    pub fn zero(spec: &Arc<SupportSpec>) -> BlockElement {
        let blocks = spec
            .components()
            .iter()
            .map(|c| DenseMatrix::zeros(spec.field(), c.n, c.n))
            .collect();
        BlockElement { spec: Arc::clone(spec), blocks }
    }

    pub fn one(spec: &Arc<SupportSpec>) -> BlockElement {
        let blocks = spec
            .components()
            .iter()
            .map(|c| DenseMatrix::identity(spec.field(), c.n))
            .collect();
        BlockElement { spec: Arc::clone(spec), blocks }
    }

    pub fn spec(&self) -> &Arc<SupportSpec> {
        &self.spec
    }

    pub fn blocks(&self) -> &[DenseMatrix] {
        &self.blocks
    }

    pub fn block(&self, component_idx: usize) -> &DenseMatrix {
        &self.blocks[component_idx]
    }

    fn same_spec(&self, other: &BlockElement) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec {
            Ok(())
        } else {
            Err(AlgebraError::SpecMismatch)
        }
    }

    /// The projection onto component `(n, i)`: a copy of that block.
    pub fn theta(&self, n: usize, i: usize) -> Result<DenseMatrix, AlgebraError> {
        let idx = self
            .spec
            .component_index(n, i)
            .ok_or(AlgebraError::UnknownComponent(ComponentKey { n, i }))?;
        Ok(self.blocks[idx].clone())
    }

    pub fn add(&self, other: &BlockElement) -> Result<BlockElement, AlgebraError> {
        self.same_spec(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.add(b).expect("blocks share shapes"))
            .collect();
        Ok(BlockElement { spec: Arc::clone(&self.spec), blocks })
    }

    pub fn sub(&self, other: &BlockElement) -> Result<BlockElement, AlgebraError> {
        self.same_spec(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.sub(b).expect("blocks share shapes"))
            .collect();
        Ok(BlockElement { spec: Arc::clone(&self.spec), blocks })
    }

    pub fn mul(&self, other: &BlockElement) -> Result<BlockElement, AlgebraError> {
        self.same_spec(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.mat_mul(b).expect("blocks share shapes"))
            .collect();
        Ok(BlockElement { spec: Arc::clone(&self.spec), blocks })
    }

    pub fn scalar_mul(&self, c: &Scalar) -> BlockElement {
        let blocks = self.blocks.iter().map(|b| b.scalar_mul(c)).collect();
        BlockElement { spec: Arc::clone(&self.spec), blocks }
    }

    pub fn pow(&self, mut k: u64) -> BlockElement {
        let mut acc = BlockElement::one(&self.spec);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base).expect("same spec");
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).expect("same spec");
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(DenseMatrix::is_zero)
    }

    /// Components whose block is nonzero.
    pub fn nonzero_components(&self) -> Vec<ComponentKey> {
        self.spec
            .components()
            .iter()
            .zip(&self.blocks)
            .filter(|(_, b)| !b.is_zero())
            .map(|(c, _)| *c)
            .collect()
    }

    pub fn flatten(&self) -> FlatVector {
        let mut coords = Vec::with_capacity(self.spec.dimension());
        for b in &self.blocks {
            coords.extend(b.entries().iter().cloned());
        }
        FlatVector { coords }
    }

    /// The element whose only nonzero block is the `(j, k)` matrix unit in
    /// component `(n, i)`. Indices `j`, `k` are 1-based.
    pub fn matrix_unit(
        spec: &Arc<SupportSpec>,
        n: usize,
        i: usize,
        j: usize,
        k: usize,
    ) -> Result<BlockElement, AlgebraError> {
        let idx = spec
            .component_index(n, i)
            .ok_or(AlgebraError::UnknownComponent(ComponentKey { n, i }))?;
        assert!(j >= 1 && j <= n && k >= 1 && k <= n, "unit indices out of range");
        let mut x = BlockElement::zero(spec);
        let mut block = DenseMatrix::zeros(spec.field(), n, n);
        block.set(j - 1, k - 1, Scalar::one(spec.field()));
        x.blocks[idx] = block;
        Ok(x)
    }

    pub fn unflatten(spec: &Arc<SupportSpec>, v: &FlatVector) -> Result<BlockElement, AlgebraError> {
        if v.len() != spec.dimension() {
            return Err(AlgebraError::FlatLength {
                expected: spec.dimension(),
                got: v.len(),
            });
        }
        let mut blocks = Vec::with_capacity(spec.components().len());
        for (idx, c) in spec.components().iter().enumerate() {
            let off = spec.offset(idx);
            let mut m = DenseMatrix::zeros(spec.field(), c.n, c.n);
            for r in 0..c.n {
                for col in 0..c.n {
                    m.set(r, col, v.coords[off + r * c.n + col].clone());
                }
            }
            blocks.push(m);
        }
        Ok(BlockElement { spec: Arc::clone(spec), blocks })
    }
}

/// Builds the identity and the two generators of the subalgebra under study.
pub fn build_generators(spec: &Arc<SupportSpec>) -> (BlockElement, BlockElement, BlockElement) {
    let field = spec.field();
    let one = BlockElement::one(spec);

    let mut e_blocks = Vec::new();
    let mut s_blocks = Vec::new();
    for c in spec.components() {
        let lambda = spec.lambda(c.n, c.i).expect("component exists").clone();
        let mut e_block = DenseMatrix::zeros(field, c.n, c.n);
        e_block.set(0, 0, lambda);
        e_blocks.push(e_block);

        let mut s_block = DenseMatrix::zeros(field, c.n, c.n);
        for j in 0..c.n - 1 {
            s_block.set(j, j + 1, Scalar::one(field));
        }
        s_block.set(c.n - 1, 0, Scalar::one(field));
        s_blocks.push(s_block);
    }
    let e = BlockElement { spec: Arc::clone(spec), blocks: e_blocks };
    let sigma = BlockElement { spec: Arc::clone(spec), blocks: s_blocks };
    (one, e, sigma)
}
