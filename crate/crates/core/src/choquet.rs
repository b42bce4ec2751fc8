//! Cylinder functions and their integrals against `μ` and against the
//! Hausdorff content.
//!
//! A cylinder function is constant on each basic cube of a fixed depth, so
//! its super-level sets are finite cell unions and the Choquet integral
//! `p ∫ t^{p-1} H({f > t}) dt` reduces to a finite sum over its values.

use std::collections::BTreeMap;

use crate::content::ContentExponent;
use crate::error::{FmlError, Result};
use crate::ifs::IteratedFunctionSystem;
use crate::word::{CellSet, Word};

/// A nonnegative function constant on every depth-`depth` cube. Leaves not
/// stored carry the value zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFunction {
    arity: usize,
    depth: usize,
    values: BTreeMap<Word, f64>,
}

impl CylinderFunction {
    pub fn new<I: IntoIterator<Item = (Word, f64)>>(arity: usize, depth: usize, values: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (w, v) in values {
            w.check_arity(arity)?;
            if w.len() != depth {
                return Err(FmlError::InvalidFunction(format!(
                    "word {w:?} has length {}, expected {depth}",
                    w.len()
                )));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(FmlError::InvalidFunction(format!(
                    "value {v} at {w:?} is negative or not finite"
                )));
            }
            if v > 0.0 {
                map.insert(w, v);
            }
        }
        Ok(CylinderFunction {
            arity,
            depth,
            values: map,
        })
    }

    pub fn zero(arity: usize, depth: usize) -> Self {
        CylinderFunction {
            arity,
            depth,
            values: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, depth: usize, c: f64) -> Result<Self> {
        Self::new(arity, depth, Word::all_of_depth(depth, arity).map(|w| (w, c)))
    }

    /// `c · χ_{K_w}` sampled at `depth ≥ |w|`.
    pub fn indicator(arity: usize, w: &Word, depth: usize, c: f64) -> Result<Self> {
        if w.len() > depth {
            return Err(FmlError::InvalidFunction(format!(
                "cube {w:?} is deeper than {depth}"
            )));
        }
        let tails = Word::all_of_depth(depth - w.len(), arity);
        Self::new(arity, depth, tails.map(|t| (w.concat(&t), c)))
    }

    /// Values listed by leaf index; `values.len()` must be `arity^depth`.
    pub fn from_dense(arity: usize, depth: usize, values: &[f64]) -> Result<Self> {
        let expected = arity.pow(depth as u32);
        if values.len() != expected {
            return Err(FmlError::InvalidFunction(format!(
                "expected {expected} leaf values, got {}",
                values.len()
            )));
        }
        Self::new(
            arity,
            depth,
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (Word::from_index(i, depth, arity), v)),
        )
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.leaf_count()];
        for (w, &v) in &self.values {
            out[w.index(self.arity)] = v;
        }
        out
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn leaf_count(&self) -> usize {
        self.arity.pow(self.depth as u32)
    }

    pub fn value(&self, leaf: &Word) -> f64 {
        self.values.get(leaf).copied().unwrap_or(0.0)
    }

    /// Nonzero leaves, in canonical word order.
    pub fn iter(&self) -> impl Iterator<Item = (&Word, f64)> + '_ {
        self.values.iter().map(|(w, &v)| (w, v))
    }

    pub fn support_size(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.values().copied().fold(0.0, f64::max)
    }

    /// The smallest strictly positive value, if any.
    pub fn min_positive(&self) -> Option<f64> {
        self.values.values().copied().reduce(f64::min)
    }

    /// Distinct positive values in increasing order.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self.values.values().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        vals
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.arity, self.depth, self.values.iter().map(|(w, &v)| (w.clone(), c * v)))
    }

    /// Leafwise `min(f, cap)`.
    pub fn truncate_at(&self, cap: f64) -> Result<Self> {
        Self::new(
            self.arity,
            self.depth,
            self.values.iter().map(|(w, &v)| (w.clone(), v.min(cap))),
        )
    }

    /// Leafwise `v ↦ g(v)` on the whole tree, zeros included.
    pub fn map_values(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        let dense: Vec<f64> = self.to_dense().into_iter().map(g).collect();
        Self::from_dense(self.arity, self.depth, &dense)
    }

    pub fn add(&self, other: &CylinderFunction) -> Result<Self> {
        self.check_compatible(other)?;
        let mut values = self.values.clone();
        for (w, &v) in &other.values {
            *values.entry(w.clone()).or_insert(0.0) += v;
        }
        Self::new(self.arity, self.depth, values)
    }

    pub fn check_compatible(&self, other: &CylinderFunction) -> Result<()> {
        if self.arity != other.arity || self.depth != other.depth {
            return Err(FmlError::InvalidFunction(format!(
                "shape mismatch: ({}, {}) vs ({}, {})",
                self.arity, self.depth, other.arity, other.depth
            )));
        }
        Ok(())
    }

    /// Resamples at a finer depth (the function itself is unchanged).
    pub fn refine(&self, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(FmlError::InvalidFunction(format!(
                "cannot refine depth {} to {depth}",
                self.depth
            )));
        }
        let tails: Vec<Word> = Word::all_of_depth(depth - self.depth, self.arity).collect();
        Self::new(
            self.arity,
            depth,
            self.values
                .iter()
                .flat_map(|(w, &v)| tails.iter().map(move |t| (w.concat(t), v))),
        )
    }
}

/// `{f > t}` as maximal cubes.
pub fn level_set(f: &CylinderFunction, t: f64) -> CellSet {
    if t < 0.0 {
        return CellSet::whole();
    }
    CellSet::maximal(
        f.values.iter().filter(|(_, &v)| v > t).map(|(w, _)| w.clone()),
        f.arity,
    )
}

/// `{f ≥ t}` as maximal cubes.
pub fn level_set_at_least(f: &CylinderFunction, t: f64) -> CellSet {
    if t <= 0.0 {
        return CellSet::whole();
    }
    CellSet::maximal(
        f.values.iter().filter(|(_, &v)| v >= t).map(|(w, _)| w.clone()),
        f.arity,
    )
}

pub fn mu_integral(ifs: &IteratedFunctionSystem, f: &CylinderFunction) -> f64 {
    f.iter().map(|(w, v)| ifs.cube_measure(w) * v).sum()
}

/// `p ∫_0^∞ t^{p-1} H({f > t}) dt`.
///
/// With the distinct values `0 = v_0 < v_1 < … < v_M`, `H({f > t})` equals
/// `H({f ≥ v_k})` for `t ∈ [v_{k-1}, v_k)`, giving
/// `Σ_k H({f ≥ v_k}) (v_k^p − v_{k−1}^p)`.
pub fn p_choquet_integral(
    ifs: &IteratedFunctionSystem,
    f: &CylinderFunction,
    p: f64,
    rho: ContentExponent,
) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(FmlError::Parameter(format!("exponent p must be positive, got {p}")));
    }
    let values = f.distinct_values();
    let contents = level_contents_at_least(ifs, f, &values, rho);
    let mut total = 0.0;
    let mut prev = 0.0f64;
    for (v, content) in values.into_iter().zip(contents) {
        total += content * (v.powf(p) - prev.powf(p));
        prev = v;
    }
    Ok(total)
}

/// `H({f ≥ t})` for every `t` in `thresholds`.
pub fn level_contents_at_least(
    ifs: &IteratedFunctionSystem,
    f: &CylinderFunction,
    thresholds: &[f64],
    rho: ContentExponent,
) -> Vec<f64> {
    level_contents(ifs, f, thresholds, rho, false)
}

/// `H({f > t})` for every `t` in `thresholds`.
pub fn level_contents_above(
    ifs: &IteratedFunctionSystem,
    f: &CylinderFunction,
    thresholds: &[f64],
    rho: ContentExponent,
) -> Vec<f64> {
    level_contents(ifs, f, thresholds, rho, true)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Coverage {
    Empty,
    Full,
    Partial,
}

/// Runs the minimal-cover recursion of
/// [`hausdorff_content`](crate::content::hausdorff_content) over the full
/// depth-`n` tree while sweeping the thresholds downward: each leaf entering
/// the level set refreshes only its ancestors. A fully covered cube is a
/// terminal cell, a cube missing the set is absent and children are summed
/// in symbol order, so the results match the trie version bit for bit.
fn level_contents(
    ifs: &IteratedFunctionSystem,
    f: &CylinderFunction,
    thresholds: &[f64],
    rho: ContentExponent,
    strict: bool,
) -> Vec<f64> {
    let m = f.arity;
    let n = f.depth;
    let mut weights: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut measure = vec![1.0];
    weights.push(vec![rho.apply(1.0)]);
    for _ in 0..n {
        measure = measure
            .iter()
            .flat_map(|&mu| (0..m as u8).map(move |s| mu * ifs.probability(s)))
            .collect();
        weights.push(measure.iter().map(|&mu| rho.apply(mu)).collect());
    }
    let mut state: Vec<Vec<Coverage>> = weights.iter().map(|w| vec![Coverage::Empty; w.len()]).collect();
    let mut cost: Vec<Vec<f64>> = weights.iter().map(|w| vec![0.0; w.len()]).collect();

    // nonzero leaves by decreasing value
    let mut leaves: Vec<(usize, f64)> = f.values.iter().map(|(w, &v)| (w.index(m), v)).collect();
    leaves.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut order: Vec<usize> = (0..thresholds.len()).collect();
    order.sort_by(|&a, &b| thresholds[b].total_cmp(&thresholds[a]));

    let mut out = vec![0.0; thresholds.len()];
    let mut next = 0;
    for i in order {
        let t = thresholds[i];
        while next < leaves.len() && (if strict { leaves[next].1 > t } else { leaves[next].1 >= t }) {
            let mut idx = leaves[next].0;
            state[n][idx] = Coverage::Full;
            cost[n][idx] = weights[n][idx];
            for k in (0..n).rev() {
                idx /= m;
                let kids = &state[k + 1][idx * m..idx * m + m];
                let (s, c) = if kids.iter().all(|&s| s == Coverage::Full) {
                    (Coverage::Full, weights[k][idx])
                } else {
                    let mut below = 0.0;
                    for (s, &c) in kids.iter().zip(&cost[k + 1][idx * m..idx * m + m]) {
                        if *s != Coverage::Empty {
                            below += c;
                        }
                    }
                    let own = weights[k][idx];
                    (Coverage::Partial, if own <= below { own } else { below })
                };
                state[k][idx] = s;
                cost[k][idx] = c;
            }
            next += 1;
        }
        let everything = if strict { 0.0 > t } else { 0.0 >= t };
        out[i] = if everything { weights[0][0] } else { cost[0][0] };
    }
    out
}

/// The plain Choquet integral `∫ f dH` (`p = 1`).
pub fn choquet_integral(ifs: &IteratedFunctionSystem, f: &CylinderFunction, rho: ContentExponent) -> f64 {
    p_choquet_integral(ifs, f, 1.0, rho).expect("p = 1 is valid")
}

/// `‖f‖_{L^p(H)} = (∫ f^p dH)^{1/p}`.
pub fn lp_norm(ifs: &IteratedFunctionSystem, f: &CylinderFunction, p: f64, rho: ContentExponent) -> Result<f64> {
    Ok(p_choquet_integral(ifs, f, p, rho)?.powf(1.0 / p))
}

/// `∫ f log⁺ f dμ` with the natural logarithm.
pub fn llogl_functional(ifs: &IteratedFunctionSystem, f: &CylinderFunction) -> f64 {
    f.iter()
        .map(|(w, v)| ifs.cube_measure(w) * v * v.ln().max(0.0))
        .sum()
}

/// `f · χ_{K_w}`.
pub fn restrict(f: &CylinderFunction, w: &Word) -> Result<CylinderFunction> {
    if w.len() > f.depth {
        return Err(FmlError::InvalidFunction(format!(
            "cube {w:?} is deeper than the function ({})",
            f.depth
        )));
    }
    Ok(CylinderFunction {
        arity: f.arity,
        depth: f.depth,
        values: f
            .values
            .iter()
            .filter(|(leaf, _)| w.is_prefix_of(leaf))
            .map(|(leaf, &v)| (leaf.clone(), v))
            .collect(),
    })
}

/// `f · χ_E` for a cell union `E` no deeper than `f`.
pub fn restrict_to_set(f: &CylinderFunction, set: &CellSet) -> Result<CylinderFunction> {
    if set.max_depth() > f.depth {
        return Err(FmlError::InvalidFunction(format!(
            "cell set of depth {} is deeper than the function ({})",
            set.max_depth(),
            f.depth
        )));
    }
    Ok(CylinderFunction {
        arity: f.arity,
        depth: f.depth,
        values: f
            .values
            .iter()
            .filter(|(leaf, _)| set.contains_cube(leaf))
            .map(|(leaf, &v)| (leaf.clone(), v))
            .collect(),
    })
}

/// Essential supremum with respect to `H`.
///
/// Every nonempty cell union has positive content, so among cell unions only
/// the empty set is null and the essential supremum is the largest value.
/// `ρ` does not enter; it is kept for symmetry with the `L^p` quasi-norms.
pub fn ess_sup_norm(_ifs: &IteratedFunctionSystem, f: &CylinderFunction, _rho: ContentExponent) -> f64 {
    f.max_value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::hausdorff_content;

    fn w(s: &str) -> Word {
        Word::parse(s, 10).unwrap()
    }

    fn binary() -> IteratedFunctionSystem {
        IteratedFunctionSystem::uniform(2, 0.25).unwrap()
    }

    fn func(depth: usize, vals: &[(&str, f64)]) -> CylinderFunction {
        CylinderFunction::new(2, depth, vals.iter().map(|(k, v)| (w(k), *v))).unwrap()
    }

    fn rho(r: f64) -> ContentExponent {
        ContentExponent::new(r).unwrap()
    }

    #[test]
    fn level_sets_are_strict() {
        let one = CylinderFunction::constant(2, 2, 1.0).unwrap();
        assert_eq!(level_set(&one, 0.5), CellSet::whole());
        assert!(level_set(&one, 1.0).is_empty());
        let ind = func(2, &[("00", 1.0)]);
        assert_eq!(level_set(&ind, 0.3).cells(), &[w("00")]);
    }

    #[test]
    fn mu_integrals() {
        let ifs = binary();
        assert_eq!(mu_integral(&ifs, &CylinderFunction::constant(2, 3, 2.5).unwrap()), 2.5);
        assert_eq!(mu_integral(&ifs, &func(2, &[("00", 1.0)])), 0.25);
        assert_eq!(mu_integral(&ifs, &func(2, &[("00", 4.0), ("11", 2.0)])), 1.5);
    }

    #[test]
    fn choquet_of_a_cube_indicator_is_measure_to_rho() {
        let ifs = binary();
        let f = func(2, &[("01", 1.0)]);
        for p in [0.3, 1.0, 2.5] {
            let v = p_choquet_integral(&ifs, &f, p, rho(0.5)).unwrap();
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn choquet_of_zero_is_zero() {
        let ifs = binary();
        let zero = CylinderFunction::zero(2, 3);
        assert_eq!(p_choquet_integral(&ifs, &zero, 1.7, rho(0.4)).unwrap(), 0.0);
    }

    #[test]
    fn choquet_matches_mu_at_full_exponent() {
        let ifs = binary();
        let f = func(1, &[("0", 2.0), ("1", 1.0)]);
        let v = p_choquet_integral(&ifs, &f, 1.0, ContentExponent::ONE).unwrap();
        assert_eq!(v, 1.5);
        assert_eq!(v, mu_integral(&ifs, &f));
    }

    #[test]
    fn nonpositive_p_is_rejected() {
        let f = func(1, &[("0", 1.0)]);
        assert!(p_choquet_integral(&binary(), &f, 0.0, rho(0.5)).is_err());
        assert!(p_choquet_integral(&binary(), &f, -1.0, rho(0.5)).is_err());
    }

    #[test]
    fn llogl_values() {
        let ifs = binary();
        let e = std::f64::consts::E;
        assert_eq!(llogl_functional(&ifs, &CylinderFunction::constant(2, 2, 1.0).unwrap()), 0.0);
        assert!((llogl_functional(&ifs, &CylinderFunction::constant(2, 2, e).unwrap()) - e).abs() < 1e-15);
        let f = func(1, &[("0", e * e)]);
        assert!((llogl_functional(&ifs, &f) - e * e).abs() < 1e-13);
    }

    #[test]
    fn restriction() {
        let one = CylinderFunction::constant(2, 2, 1.0).unwrap();
        assert_eq!(restrict(&one, &w("0")).unwrap(), func(2, &[("00", 1.0), ("01", 1.0)]));
        assert_eq!(restrict(&one, &Word::root()).unwrap(), one);
        let ind = func(2, &[("00", 1.0)]);
        assert!(restrict(&ind, &w("1")).unwrap().is_zero());
        assert!(restrict(&ind, &w("000")).is_err());
    }

    #[test]
    fn ess_sup_is_the_max() {
        let ifs = binary();
        assert_eq!(ess_sup_norm(&ifs, &CylinderFunction::constant(2, 2, 3.5).unwrap(), rho(0.5)), 3.5);
        assert_eq!(ess_sup_norm(&ifs, &func(2, &[("00", 3.0)]), rho(0.5)), 3.0);
        assert_eq!(ess_sup_norm(&ifs, &CylinderFunction::zero(2, 2), rho(0.5)), 0.0);
    }

    #[test]
    fn construction_validates() {
        assert!(CylinderFunction::new(2, 2, vec![(w("0"), 1.0)]).is_err());
        assert!(CylinderFunction::new(2, 1, vec![(w("0"), -1.0)]).is_err());
        assert!(CylinderFunction::new(2, 1, vec![(w("0"), f64::INFINITY)]).is_err());
        assert!(CylinderFunction::new(2, 1, vec![(w("2"), 1.0)]).is_err());
        assert!(CylinderFunction::from_dense(2, 2, &[1.0; 3]).is_err());
    }

    #[test]
    fn refining_preserves_integrals() {
        let ifs = IteratedFunctionSystem::symbolic(&[0.2, 0.2], &[0.25, 0.75]).unwrap();
        let f = func(2, &[("00", 3.0), ("10", 1.0), ("11", 0.5)]);
        let g = f.refine(4).unwrap();
        assert_eq!(g.support_size(), 12);
        assert!((mu_integral(&ifs, &f) - mu_integral(&ifs, &g)).abs() < 1e-15);
        let a = p_choquet_integral(&ifs, &f, 1.3, rho(0.6)).unwrap();
        let b = p_choquet_integral(&ifs, &g, 1.3, rho(0.6)).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn dense_level_contents_match_the_trie() {
        use crate::harness::generate::{random_function, rng_from_seed};
        use crate::harness::ValueDistribution;
        let systems = [
            IteratedFunctionSystem::symbolic(&[0.3, 0.3], &[0.25, 0.75]).unwrap(),
            IteratedFunctionSystem::symbolic(&[0.2, 0.3, 0.1], &[0.2, 0.5, 0.3]).unwrap(),
        ];
        let mut rng = rng_from_seed(11);
        for (i, ifs) in systems.iter().enumerate() {
            for k in 0..40 {
                let f = random_function(&mut rng, ifs.arity(), 4 - i, ValueDistribution::ALL[k % 3], 0.6);
                let rho = ContentExponent::new([0.3, 0.7, 1.0][k % 3]).unwrap();
                let values = f.distinct_values();
                let dense = level_contents_at_least(ifs, &f, &values, rho);
                for (v, d) in values.iter().zip(dense) {
                    assert_eq!(d, hausdorff_content(ifs, &level_set_at_least(&f, *v), rho));
                }
                let grid: Vec<f64> = (-1..30).map(|j| 0.2 * j as f64).chain(values.iter().copied()).collect();
                let strict = level_contents_above(ifs, &f, &grid, rho);
                for (t, d) in grid.iter().zip(strict) {
                    assert_eq!(d, hausdorff_content(ifs, &level_set(&f, *t), rho));
                }
            }
        }
    }
}
