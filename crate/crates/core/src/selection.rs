//! Greedy subfamily selection over non-overlapping basic cubes.
//!
//! Scanning the cubes in order, a cube is kept when the selected cubes inside
//! every basic cube `I` still weigh at most `(1 + σ) μ(I)^ρ` (the packing
//! condition; `σ = 1` gives the constant 2). Adding a cube only changes the
//! sums at its ancestors, and at the cube itself the sum is its own weight,
//! so checking the strict ancestors is enough.

use std::collections::BTreeMap;

use crate::choquet::{choquet_integral, restrict, restrict_to_set, CylinderFunction};
use crate::content::{hausdorff_content, ContentExponent};
use crate::error::{FmlError, Result};
use crate::ifs::IteratedFunctionSystem;
use crate::word::{CellSet, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionOrder {
    /// Keep the caller's order.
    Input,
    /// Canonical word order (shorter first, then lexicographic).
    Lex,
    /// Heaviest cubes first; ties keep the caller's order.
    Measure,
}

impl std::str::FromStr for SelectionOrder {
    type Err = FmlError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "input" => Ok(SelectionOrder::Input),
            "lex" => Ok(SelectionOrder::Lex),
            "measure" => Ok(SelectionOrder::Measure),
            other => Err(FmlError::Parameter(format!("unknown order {other:?}"))),
        }
    }
}

pub fn order_cubes(ifs: &IteratedFunctionSystem, cubes: &[Word], order: SelectionOrder) -> Vec<Word> {
    let mut out = cubes.to_vec();
    match order {
        SelectionOrder::Input => {}
        SelectionOrder::Lex => out.sort(),
        SelectionOrder::Measure => {
            out.sort_by(|a, b| ifs.cube_measure(b).total_cmp(&ifs.cube_measure(a)))
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub input: Vec<Word>,
    /// Positions in `input` of the selected cubes, increasing.
    pub selected_indices: Vec<usize>,
    /// For each node with a selected cube at or below it, `Σ μ(I_k)^ρ` over
    /// those cubes.
    pub per_node_sums: BTreeMap<Word, f64>,
    pub rho: ContentExponent,
    pub sigma: f64,
}

impl SelectionResult {
    pub fn selected(&self) -> Vec<Word> {
        self.selected_indices.iter().map(|&i| self.input[i].clone()).collect()
    }

    /// `1 + σ`
    pub fn packing_constant(&self) -> f64 {
        1.0 + self.sigma
    }

    /// `1 + 1/σ`
    pub fn covering_constant(&self) -> f64 {
        1.0 + 1.0 / self.sigma
    }

    /// 2 at `σ = 1`, otherwise `(1 + σ)(1 + 1/σ)`.
    pub fn splitting_constant(&self) -> f64 {
        if self.sigma == 1.0 {
            2.0
        } else {
            (1.0 + self.sigma) * (1.0 + 1.0 / self.sigma)
        }
    }
}

/// Greedy selection with the default packing constant 2.
pub fn select_subfamily(
    ifs: &IteratedFunctionSystem,
    cubes: &[Word],
    rho: ContentExponent,
) -> Result<SelectionResult> {
    select_subfamily_with(ifs, cubes, rho, 1.0)
}

/// Greedy selection with packing constant `1 + σ`.
pub fn select_subfamily_with(
    ifs: &IteratedFunctionSystem,
    cubes: &[Word],
    rho: ContentExponent,
    sigma: f64,
) -> Result<SelectionResult> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(FmlError::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    // validates symbols and incomparability
    CellSet::from_antichain(cubes.iter().cloned(), ifs.arity())?;

    let threshold = 1.0 + sigma;
    let mut sums: BTreeMap<Word, f64> = BTreeMap::new();
    let mut selected_indices = Vec::new();
    for (i, cube) in cubes.iter().enumerate() {
        let weight = rho.apply(ifs.cube_measure(cube));
        let fits = (0..cube.len()).all(|k| {
            let ancestor = cube.prefix(k);
            let current = sums.get(&ancestor).copied().unwrap_or(0.0);
            current + weight <= threshold * rho.apply(ifs.cube_measure(&ancestor))
        });
        if fits {
            for k in 0..=cube.len() {
                *sums.entry(cube.prefix(k)).or_insert(0.0) += weight;
            }
            selected_indices.push(i);
        }
    }
    Ok(SelectionResult {
        input: cubes.to_vec(),
        selected_indices,
        per_node_sums: sums,
        rho,
        sigma,
    })
}

/// The three guarantees of a selection, each as `lhs ≤ constant · rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionCertificate {
    /// `min over nodes I of (1 + σ) μ(I)^ρ − Σ_{I_k ⊆ I} μ(I_k)^ρ`,
    /// recomputed from scratch.
    pub packing_margin: f64,
    pub covering: Inequality,
    pub splitting: Inequality,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
}

impl Inequality {
    pub fn margin(&self) -> f64 {
        self.constant * self.rhs - self.lhs
    }

    /// Holds up to a relative tolerance.
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.margin() >= -rel_tol * (self.constant * self.rhs).abs().max(1.0)
    }
}

/// Re-verifies packing at every node, covering
/// `H(∪ input) ≤ (1 + 1/σ) Σ_k μ(I_k)^ρ`, and splitting
/// `Σ_k ∫_{I_k} f dH ≤ C ∫_{∪ I_k} f dH`.
pub fn certify_selection(
    ifs: &IteratedFunctionSystem,
    result: &SelectionResult,
    rho: ContentExponent,
    f: &CylinderFunction,
) -> Result<SelectionCertificate> {
    let selected = result.selected();
    let deepest = result.input.iter().map(Word::len).max().unwrap_or(0);
    if f.depth() < deepest {
        return Err(FmlError::Parameter(format!(
            "function depth {} is below the deepest cube ({deepest})",
            f.depth()
        )));
    }

    // packing, from scratch: every ancestor-or-self of a selected cube
    let mut sums: BTreeMap<Word, f64> = BTreeMap::new();
    for cube in &selected {
        let weight = rho.apply(ifs.cube_measure(cube));
        for k in 0..=cube.len() {
            *sums.entry(cube.prefix(k)).or_insert(0.0) += weight;
        }
    }
    let packing_margin = sums
        .iter()
        .map(|(node, s)| result.packing_constant() * rho.apply(ifs.cube_measure(node)) - s)
        .fold(f64::INFINITY, f64::min);

    let union_input = CellSet::disjointify(result.input.iter().cloned());
    let covering = Inequality {
        lhs: hausdorff_content(ifs, &union_input, rho),
        rhs: selected.iter().map(|c| rho.apply(ifs.cube_measure(c))).sum(),
        constant: result.covering_constant(),
    };

    let mut split_lhs = 0.0;
    for cube in &selected {
        split_lhs += choquet_integral(ifs, &restrict(f, cube)?, rho);
    }
    let union_selected = CellSet::disjointify(selected.iter().cloned());
    let splitting = Inequality {
        lhs: split_lhs,
        rhs: choquet_integral(ifs, &restrict_to_set(f, &union_selected)?, rho),
        constant: result.splitting_constant(),
    };

    Ok(SelectionCertificate {
        packing_margin,
        covering,
        splitting,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(ws: &[&str]) -> Vec<Word> {
        ws.iter().map(|w| Word::parse(w, 10).unwrap()).collect()
    }

    fn binary() -> IteratedFunctionSystem {
        IteratedFunctionSystem::uniform(2, 0.25).unwrap()
    }

    fn rho(r: f64) -> ContentExponent {
        ContentExponent::new(r).unwrap()
    }

    #[test]
    fn both_halves_fit_at_half_exponent() {
        let sel = select_subfamily(&binary(), &words(&["0", "1"]), rho(0.5)).unwrap();
        assert_eq!(sel.selected_indices, vec![0, 1]);
        assert!((sel.per_node_sums[&Word::root()] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn quarter_exponent_rejects_third_leaf() {
        let cubes = words(&["00", "01", "10", "11"]);
        let sel = select_subfamily(&binary(), &cubes, rho(0.25)).unwrap();
        assert_eq!(sel.selected(), words(&["00", "01"]));

        let f = CylinderFunction::constant(2, 2, 1.0).unwrap();
        let cert = certify_selection(&binary(), &sel, rho(0.25), &f).unwrap();
        assert!(cert.packing_margin >= 0.0);
        assert_eq!(cert.covering.lhs, 1.0);
        assert!((cert.covering.rhs * 2.0 - 4.0 * 0.25f64.powf(0.25)).abs() < 1e-14);
        assert!(cert.covering.holds(1e-12));
        assert!(cert.splitting.holds(1e-12));
    }

    #[test]
    fn single_cube_is_always_selected() {
        let sel = select_subfamily(&binary(), &words(&["0110"]), rho(0.1)).unwrap();
        assert_eq!(sel.selected_indices, vec![0]);
        let f = CylinderFunction::indicator(2, &words(&["01"])[0], 4, 2.0).unwrap();
        let cert = certify_selection(&binary(), &sel, rho(0.1), &f).unwrap();
        assert_eq!(cert.splitting.lhs, cert.splitting.rhs);
    }

    #[test]
    fn zero_function_splits_trivially() {
        let sel = select_subfamily(&binary(), &words(&["00", "1"]), rho(0.5)).unwrap();
        let cert = certify_selection(&binary(), &sel, rho(0.5), &CylinderFunction::zero(2, 2)).unwrap();
        assert_eq!((cert.splitting.lhs, cert.splitting.rhs), (0.0, 0.0));
    }

    #[test]
    fn nested_input_is_rejected() {
        assert!(matches!(
            select_subfamily(&binary(), &words(&["0", "01"]), rho(0.5)),
            Err(FmlError::NotAntichain(..))
        ));
        assert!(select_subfamily_with(&binary(), &words(&["0"]), rho(0.5), 0.0).is_err());
    }

    #[test]
    fn order_changes_the_selection() {
        let ifs = IteratedFunctionSystem::symbolic(&[0.2, 0.2], &[0.25, 0.75]).unwrap();
        let cubes = words(&["000", "001", "01", "1"]);
        let by_measure = order_cubes(&ifs, &cubes, SelectionOrder::Measure);
        assert_eq!(by_measure[0], words(&["1"])[0]);
        let lex = order_cubes(&ifs, &cubes, SelectionOrder::Lex);
        assert_eq!(lex, words(&["1", "01", "000", "001"]));
        assert_eq!("measure".parse::<SelectionOrder>().unwrap(), SelectionOrder::Measure);
        assert!("size".parse::<SelectionOrder>().is_err());
    }

    #[test]
    fn constants_follow_sigma() {
        let sel = select_subfamily_with(&binary(), &words(&["0"]), rho(0.5), 2.0).unwrap();
        assert_eq!(sel.packing_constant(), 3.0);
        assert_eq!(sel.covering_constant(), 1.5);
        assert_eq!(sel.splitting_constant(), 4.5);
        let default = select_subfamily(&binary(), &words(&["0"]), rho(0.5)).unwrap();
        assert_eq!(default.splitting_constant(), 2.0);
    }
}
