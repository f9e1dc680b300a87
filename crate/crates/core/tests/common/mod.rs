//! Shared oracles for the integration suites. Everything here recomputes
//! expected values by routes independent of the implementation under test:
//! word enumeration instead of right-multiplication saturation, per-block
//! dense matrix powers instead of block-element arithmetic.

// each test binary compiles its own copy and uses a subset
#![allow(dead_code)]

use simcensus::model::{build_generators, BlockElement, SpecEntryInput, SupportSpec};
use simcensus::scalar::{FieldConfig, Scalar};
use std::collections::HashSet;
use std::sync::Arc;

pub fn spec_of(field: FieldConfig, pairs: &[(usize, usize)]) -> Arc<SupportSpec> {
    let inputs = pairs
        .iter()
        .map(|&(n, a)| SpecEntryInput { n, multiplicity: a, lambdas: None })
        .collect();
    Arc::new(SupportSpec::new(field, inputs).unwrap())
}

/// Rank tracker over flat coordinates; deliberately re-implemented here so the
/// oracle does not share the closure module's echelon code.
struct OracleEchelon {
    dim: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl OracleEchelon {
    fn new(dim: usize) -> Self {
        OracleEchelon { dim, rows: Vec::new(), pivots: Vec::new() }
    }

    fn insert(&mut self, mut v: Vec<Scalar>) -> bool {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let factor = v[p].clone();
            for j in 0..self.dim {
                if !row[j].is_zero() {
                    v[j] = v[j].sub(&factor.mul(&row[j]));
                }
            }
        }
        let Some(lead) = v.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = v[lead].inv().unwrap();
        for c in v.iter_mut() {
            if !c.is_zero() {
                *c = c.mul(&inv);
            }
        }
        self.rows.push(v);
        self.pivots.push(lead);
        true
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Dimension of the span of all words in the generators (with the empty word)
/// by breadth-first enumeration: extend every distinct word value from the
/// previous level by every generator, and stop at the first level that adds
/// no rank. Equal word values are merged (they have equal extensions), which
/// keeps the enumeration finite in practice without skipping any word.
///
/// Panics if the span has not stabilized within `max_len` letters.
pub fn word_span_dimension(spec: &Arc<SupportSpec>, max_len: usize) -> usize {
    let (one, e, sigma) = build_generators(spec);
    let gens = [e, sigma];

    let mut echelon = OracleEchelon::new(spec.dimension());
    let mut seen: HashSet<Vec<Scalar>> = HashSet::new();

    let mut frontier: Vec<BlockElement> = vec![one];
    seen.insert(frontier[0].flatten().coords().to_vec());
    echelon.insert(frontier[0].flatten().coords().to_vec());

    for _len in 1..=max_len {
        let mut next = Vec::new();
        let before = echelon.rank();
        for w in &frontier {
            for g in &gens {
                let word = w.mul(g).unwrap();
                let coords = word.flatten().coords().to_vec();
                if seen.insert(coords.clone()) {
                    echelon.insert(coords);
                    next.push(word);
                }
            }
        }
        frontier = next;
        if echelon.rank() == before {
            return echelon.rank();
        }
    }
    panic!("word span did not stabilize within {max_len} letters");
}

/// Support of `e sigma^i e` computed block by block with dense matrix powers.
pub fn brute_relation_support(spec: &Arc<SupportSpec>, i: usize) -> Vec<usize> {
    let (_, e, sigma) = build_generators(spec);
    let mut dims = Vec::new();
    for (idx, c) in spec.components().iter().enumerate() {
        let sigma_pow = sigma.block(idx).pow(i as u64).unwrap();
        let prod = e
            .block(idx)
            .mat_mul(&sigma_pow)
            .unwrap()
            .mat_mul(e.block(idx))
            .unwrap();
        if !prod.is_zero() && dims.last() != Some(&c.n) {
            dims.push(c.n);
        }
    }
    dims
}
