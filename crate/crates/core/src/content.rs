//! Hausdorff content of finite unions of basic cubes.
//!
//! `H(E) = inf Σ μ(I_j)^ρ` over covers of `E` by basic cubes. An optimal
//! cover can be taken to be an antichain, and a cube lying inside `E` is never
//! improved by subdividing it (`x ↦ x^ρ` is subadditive for `ρ ≤ 1`), so the
//! infimum is a minimum over a finite tree and a bottom-up dynamic program
//! over the trie of `E` computes it exactly.

use crate::error::{FmlError, Result};
use crate::ifs::IteratedFunctionSystem;
use crate::word::{CellSet, CellTrie, NodeId, Word};

/// The exponent `ρ = α/s ∈ (0, 1]` applied to cube measures.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ContentExponent(f64);

impl ContentExponent {
    pub fn new(rho: f64) -> Result<Self> {
        if rho > 0.0 && rho <= 1.0 {
            Ok(ContentExponent(rho))
        } else {
            Err(FmlError::InvalidExponent(rho))
        }
    }

    /// `ρ = α / s`; requires `0 < α ≤ s`.
    pub fn from_alpha(alpha: f64, dimension: f64) -> Result<Self> {
        Self::new(alpha / dimension)
    }

    pub const ONE: ContentExponent = ContentExponent(1.0);

    pub fn value(self) -> f64 {
        self.0
    }

    /// `μ^ρ`. `powf` is exact at `ρ = 1`, which keeps `H = μ` bit-exact on
    /// dyadic measures.
    #[inline]
    pub fn apply(self, measure: f64) -> f64 {
        measure.powf(self.0)
    }
}

/// An optimal cover together with its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    pub value: f64,
    pub cubes: CellSet,
}

pub fn hausdorff_content(ifs: &IteratedFunctionSystem, set: &CellSet, rho: ContentExponent) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let trie = CellTrie::new(set);
    let mut path = Vec::with_capacity(set.max_depth());
    content_dp(ifs, &trie, CellTrie::ROOT, &mut path, 1.0, rho, None)
}

/// The content and a coarsest optimal cover (ties go to the larger cube).
pub fn optimal_cover(ifs: &IteratedFunctionSystem, set: &CellSet, rho: ContentExponent) -> Cover {
    if set.is_empty() {
        return Cover {
            value: 0.0,
            cubes: CellSet::empty(),
        };
    }
    let trie = CellTrie::new(set);
    let mut path = Vec::new();
    let mut cubes = Vec::new();
    let value = content_dp(ifs, &trie, CellTrie::ROOT, &mut path, 1.0, rho, Some(&mut cubes));
    Cover {
        value,
        cubes: CellSet::disjointify(cubes),
    }
}

fn content_dp(
    ifs: &IteratedFunctionSystem,
    trie: &CellTrie,
    node: NodeId,
    path: &mut Vec<u8>,
    measure: f64,
    rho: ContentExponent,
    mut cover: Option<&mut Vec<Word>>,
) -> f64 {
    let own = rho.apply(measure);
    if trie.is_terminal(node) {
        if let Some(c) = cover {
            c.push(Word::from_symbols_unchecked(path));
        }
        return own;
    }
    let mut below = Vec::new();
    let mut children_cost = 0.0;
    for &(symbol, child) in trie.children(node) {
        path.push(symbol);
        let sink = cover.as_ref().map(|_| &mut below);
        children_cost += content_dp(
            ifs,
            trie,
            child,
            path,
            measure * ifs.probability(symbol),
            rho,
            sink,
        );
        path.pop();
    }
    if own <= children_cost {
        if let Some(c) = cover.as_deref_mut() {
            c.push(Word::from_symbols_unchecked(path));
        }
        own
    } else {
        if let Some(c) = cover {
            c.append(&mut below);
        }
        children_cost
    }
}

/// Ceiling on the number of covers [`brute_force_content`] will enumerate.
pub const MAX_BRUTE_FORCE_COVERS: u128 = 10_000_000;

/// Number of antichain covers of `set` by cubes of depth `≤ max_depth` each
/// meeting `set` (saturating).
pub fn count_covers(set: &CellSet, max_depth: usize, arity: usize) -> u128 {
    if set.is_empty() {
        return 1;
    }
    let trie = CellTrie::new(set);
    count_from(&trie, &Word::root(), max_depth, arity)
}

fn count_from(trie: &CellTrie, w: &Word, max_depth: usize, arity: usize) -> u128 {
    if w.len() >= max_depth {
        return 1;
    }
    let mut product: u128 = 1;
    for s in 0..arity as u8 {
        let child = w.child(s);
        if trie.locate(&child).meets() {
            product = product.saturating_mul(count_from(trie, &child, max_depth, arity));
        }
    }
    product.saturating_add(1)
}

/// Minimum cover cost by exhaustive enumeration of every antichain of cubes
/// of depth `≤ max_depth` that covers `set`.
///
/// Cubes missing `set` are never enumerated (dropping one only lowers the
/// cost). The cost of every cover is materialized: a cube's list holds its
/// own weight followed by every sum of one entry per meeting child, children
/// added in symbol order. That is the association the dynamic program uses,
/// so the two agree bit for bit whenever `max_depth` reaches the deepest
/// cell.
pub fn brute_force_content(
    ifs: &IteratedFunctionSystem,
    set: &CellSet,
    rho: ContentExponent,
    max_depth: usize,
) -> Result<f64> {
    if set.is_empty() {
        return Ok(0.0);
    }
    let count = count_covers(set, max_depth, ifs.arity());
    if count > MAX_BRUTE_FORCE_COVERS {
        return Err(FmlError::Resource(format!(
            "{count} covers to enumerate exceeds the limit of {MAX_BRUTE_FORCE_COVERS}"
        )));
    }
    let trie = CellTrie::new(set);
    let costs = all_cover_costs(ifs, &trie, &Word::root(), 1.0, rho, max_depth);
    debug_assert_eq!(costs.len() as u128, count);
    Ok(costs.into_iter().fold(f64::INFINITY, f64::min))
}

/// One entry per cover of `set ∩ K_node`, in enumeration order.
fn all_cover_costs(
    ifs: &IteratedFunctionSystem,
    trie: &CellTrie,
    node: &Word,
    measure: f64,
    rho: ContentExponent,
    max_depth: usize,
) -> Vec<f64> {
    let mut costs = vec![rho.apply(measure)];
    if node.len() < max_depth {
        let mut partial = vec![0.0];
        for s in 0..ifs.arity() as u8 {
            let child = node.child(s);
            if !trie.locate(&child).meets() {
                continue;
            }
            let sub = all_cover_costs(ifs, trie, &child, measure * ifs.probability(s), rho, max_depth);
            partial = partial
                .iter()
                .flat_map(|&a| sub.iter().map(move |&b| a + b))
                .collect();
        }
        costs.extend(partial);
    }
    costs
}

/// `Σ μ(I)^ρ` over an antichain, accumulated along the tree.
pub fn cover_cost(ifs: &IteratedFunctionSystem, cover: &[Word], rho: ContentExponent) -> f64 {
    let set = CellSet::disjointify(cover.iter().cloned());
    if set.is_empty() {
        return 0.0;
    }
    let trie = CellTrie::new(&set);
    fold_cost(ifs, &trie, CellTrie::ROOT, 1.0, rho)
}

fn fold_cost(
    ifs: &IteratedFunctionSystem,
    trie: &CellTrie,
    node: NodeId,
    measure: f64,
    rho: ContentExponent,
) -> f64 {
    if trie.is_terminal(node) {
        return rho.apply(measure);
    }
    let mut total = 0.0;
    for &(symbol, child) in trie.children(node) {
        total += fold_cost(ifs, trie, child, measure * ifs.probability(symbol), rho);
    }
    total
}
