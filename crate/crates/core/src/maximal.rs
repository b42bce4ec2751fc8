//! The dyadic maximal operator over basic cubes.
//!
//! `Mf(x)` is the supremum of the `μ`-averages of `f` over the basic cubes
//! containing `x`. For a depth-`n` cylinder function every cube deeper than
//! `n` around `x` averages to `f(x)`, so the supremum is attained among the
//! `n + 1` ancestors of the leaf holding `x` and is computed exactly.

use crate::choquet::{level_contents_above, p_choquet_integral, CylinderFunction};
use crate::content::ContentExponent;
use crate::error::{FmlError, Result};
use crate::ifs::IteratedFunctionSystem;
use crate::word::Word;

/// `μ`-averages of `f` over every cube down to the leaves, indexed
/// `[level][index]`.
struct Pyramid {
    average: Vec<Vec<f64>>,
}

impl Pyramid {
    fn build(ifs: &IteratedFunctionSystem, f: &CylinderFunction) -> Self {
        let m = f.arity();
        let n = f.depth();
        let mut measure: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        measure.push(vec![1.0]);
        for k in 0..n {
            let parent = &measure[k];
            let mut level = Vec::with_capacity(parent.len() * m);
            for &mp in parent {
                for s in 0..m as u8 {
                    level.push(mp * ifs.probability(s));
                }
            }
            measure.push(level);
        }

        let leaves = f.to_dense();
        let mut mass: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
        mass[n] = leaves.iter().zip(&measure[n]).map(|(v, mu)| v * mu).collect();
        for k in (0..n).rev() {
            mass[k] = mass[k + 1].chunks(m).map(|c| c.iter().sum()).collect();
        }

        let mut average: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                mass[k]
                    .iter()
                    .zip(&measure[k])
                    .map(|(&a, &mu)| if mu > 0.0 { a / mu } else { 0.0 })
                    .collect()
            })
            .collect();
        // The average over a leaf is the leaf value itself.
        average.push(
            leaves
                .iter()
                .zip(&measure[n])
                .map(|(&v, &mu)| if mu > 0.0 { v } else { 0.0 })
                .collect(),
        );
        Pyramid { average }
    }
}

/// `Mf` at the depth of `f`.
pub fn maximal_operator(ifs: &IteratedFunctionSystem, f: &CylinderFunction) -> CylinderFunction {
    maximal_operator_truncated(ifs, f, f.depth())
}

/// The maximal operator restricted to cubes of depth `≤ max_level`.
/// At `max_level ≥ depth(f)` this is the full operator.
pub fn maximal_operator_truncated(
    ifs: &IteratedFunctionSystem,
    f: &CylinderFunction,
    max_level: usize,
) -> CylinderFunction {
    let m = f.arity();
    let n = f.depth();
    let top = max_level.min(n);
    let pyramid = Pyramid::build(ifs, f);

    // running max of ancestor averages, swept from the root down
    let mut best = pyramid.average[0].clone();
    for k in 1..=n {
        let avg = &pyramid.average[k];
        best = (0..avg.len())
            .map(|i| {
                let inherited = best[i / m];
                if k <= top {
                    inherited.max(avg[i])
                } else {
                    inherited
                }
            })
            .collect();
    }
    CylinderFunction::from_dense(m, n, &best).expect("averages are finite and nonnegative")
}

/// `M(χ_{K_w})` at `target_depth` from its closed form.
///
/// With `k = |w|`, the value is 1 on `K_w`, `a_j = μ(K_w) / μ(K_{w|k−j})` on
/// the ring `K_{w|k−j} ∖ K_{w|k−j+1}` for `1 ≤ j ≤ k − 1`, and `a_k = μ(K_w)`
/// outside `K_{w|1}`. Equivalently, at a leaf sharing `ℓ` leading symbols
/// with `w`, the value is `μ(K_w) / μ(K_{w|ℓ})`.
pub fn indicator_maximal_closed_form(
    ifs: &IteratedFunctionSystem,
    w: &Word,
    target_depth: usize,
) -> Result<CylinderFunction> {
    ifs.check_word(w)?;
    if target_depth < w.len() {
        return Err(FmlError::Parameter(format!(
            "target depth {target_depth} is shallower than the cube ({})",
            w.len()
        )));
    }
    let k = w.len();
    let mu_w = ifs.cube_measure(w);
    let coefficient = |j: usize| -> f64 {
        if j == 0 {
            1.0
        } else if j == k {
            mu_w
        } else {
            let outer = ifs.cube_measure(&w.prefix(k - j));
            if outer > 0.0 {
                mu_w / outer
            } else {
                0.0
            }
        }
    };
    let m = ifs.arity();
    let values = Word::all_of_depth(target_depth, m).map(|leaf| {
        let shared = leaf.common_prefix_len(w);
        let v = coefficient(k - shared);
        (leaf, v)
    });
    CylinderFunction::new(m, target_depth, values)
}

/// `2p/(p−ρ) · μ(K_w)^ρ`, the bound on `∫ (M χ_{K_w})^p dH` for `p > ρ`.
pub fn indicator_maximal_bound(
    ifs: &IteratedFunctionSystem,
    w: &Word,
    p: f64,
    rho: ContentExponent,
) -> Result<f64> {
    ifs.check_word(w)?;
    let r = rho.value();
    if !(p > r && p.is_finite()) {
        return Err(FmlError::Parameter(format!("need rho < p < inf, got p = {p}, rho = {r}")));
    }
    Ok(2.0 * p / (p - r) * rho.apply(ifs.cube_measure(w)))
}

/// `μ`-averages of `f` over the ancestors of `leaf`, root first.
#[derive(Debug, Clone, PartialEq)]
pub struct AncestorAverages {
    pub word: Word,
    pub averages: Vec<f64>,
}

impl AncestorAverages {
    /// Truncated maximal function at this leaf: max over levels `≤ level`.
    pub fn running_max(&self, level: usize) -> f64 {
        self.averages[..=level.min(self.averages.len() - 1)]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn ancestor_average_trace(
    ifs: &IteratedFunctionSystem,
    f: &CylinderFunction,
    leaf: &Word,
) -> Result<AncestorAverages> {
    ifs.check_word(leaf)?;
    if leaf.len() != f.depth() {
        return Err(FmlError::Parameter(format!(
            "leaf {leaf:?} must have length {}",
            f.depth()
        )));
    }
    let n = f.depth();
    let mut averages = Vec::with_capacity(n + 1);
    for k in 0..n {
        let cube = leaf.prefix(k);
        let mu = ifs.cube_measure(&cube);
        let mass: f64 = f
            .iter()
            .filter(|(w, _)| cube.is_prefix_of(w))
            .map(|(w, v)| ifs.cube_measure(w) * v)
            .sum();
        averages.push(if mu > 0.0 { mass / mu } else { 0.0 });
    }
    averages.push(f.value(leaf));
    Ok(AncestorAverages {
        word: leaf.clone(),
        averages,
    })
}

/// `4 ρ^{−ρ}`, the weak-type constant for exponent `ρ`.
pub fn weak_type_constant(rho: ContentExponent) -> f64 {
    let r = rho.value();
    4.0 * r.powf(-r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakTypePoint {
    pub t: f64,
    /// `H({Mf > t})`
    pub content: f64,
    /// `4 ρ^{−ρ} t^{−ρ} ∫ f^ρ dH`
    pub bound: f64,
    pub margin: f64,
}

pub fn weak_type_profile(
    ifs: &IteratedFunctionSystem,
    f: &CylinderFunction,
    rho: ContentExponent,
    thresholds: &[f64],
) -> Result<Vec<WeakTypePoint>> {
    if let Some(&bad) = thresholds.iter().find(|&&t| !(t > 0.0)) {
        return Err(FmlError::Parameter(format!("threshold must be positive, got {bad}")));
    }
    let mf = maximal_operator(ifs, f);
    let integral = p_choquet_integral(ifs, f, rho.value(), rho)?;
    let constant = weak_type_constant(rho);
    let contents = level_contents_above(ifs, &mf, thresholds, rho);
    Ok(thresholds
        .iter()
        .zip(contents)
        .map(|(&t, content)| {
            let bound = constant * t.powf(-rho.value()) * integral;
            WeakTypePoint {
                t,
                content,
                bound,
                margin: bound - content,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 10).unwrap()
    }

    fn binary() -> IteratedFunctionSystem {
        IteratedFunctionSystem::uniform(2, 0.25).unwrap()
    }

    fn dense(f: &CylinderFunction) -> Vec<f64> {
        f.to_dense()
    }

    #[test]
    fn maximal_of_deep_indicator() {
        let f = CylinderFunction::indicator(2, &w("00"), 2, 1.0).unwrap();
        let mf = maximal_operator(&binary(), &f);
        assert_eq!(dense(&mf), vec![1.0, 0.5, 0.25, 0.25]);
    }

    #[test]
    fn maximal_of_constant() {
        let f = CylinderFunction::constant(2, 3, 1.75).unwrap();
        assert_eq!(dense(&maximal_operator(&binary(), &f)), vec![1.75; 8]);
    }

    #[test]
    fn maximal_with_biased_weights() {
        let ifs = IteratedFunctionSystem::symbolic(&[0.2, 0.2], &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let f = CylinderFunction::indicator(2, &w("0"), 1, 1.0).unwrap();
        let mf = dense(&maximal_operator(&ifs, &f));
        assert_eq!(mf[0], 1.0);
        assert!((mf[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_examples() {
        let ifs = binary();
        let cf = indicator_maximal_closed_form(&ifs, &w("00"), 2).unwrap();
        assert_eq!(dense(&cf), vec![1.0, 0.5, 0.25, 0.25]);
        let root = indicator_maximal_closed_form(&ifs, &Word::root(), 3).unwrap();
        assert_eq!(dense(&root), vec![1.0; 8]);
        let zero = indicator_maximal_closed_form(&ifs, &w("0"), 1).unwrap();
        assert_eq!(dense(&zero), vec![1.0, 0.5]);
        assert!(indicator_maximal_closed_form(&ifs, &w("000"), 2).is_err());
    }

    #[test]
    fn closed_form_on_non_dyadic_weights_agrees_to_rounding() {
        let ifs = IteratedFunctionSystem::symbolic(&[0.2, 0.3, 0.1], &[0.2, 0.5, 0.3]).unwrap();
        for word in Word::all_of_depth(3, 3) {
            let cf = indicator_maximal_closed_form(&ifs, &word, 4).unwrap();
            let f = CylinderFunction::indicator(3, &word, 4, 1.0).unwrap();
            let mf = maximal_operator(&ifs, &f);
            for (a, b) in dense(&cf).iter().zip(dense(&mf)) {
                assert!((a - b).abs() <= 1e-14 * a.max(1e-300), "{word:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn trace_of_indicator() {
        let f = CylinderFunction::indicator(2, &w("00"), 2, 1.0).unwrap();
        let trace = ancestor_average_trace(&binary(), &f, &w("00")).unwrap();
        assert_eq!(trace.averages, vec![0.25, 0.5, 1.0]);
        assert_eq!(trace.running_max(1), 0.5);
        assert!(ancestor_average_trace(&binary(), &f, &w("0")).is_err());
    }

    #[test]
    fn trace_of_constant_is_flat() {
        let f = CylinderFunction::constant(2, 4, 3.0).unwrap();
        let trace = ancestor_average_trace(&binary(), &f, &w("0110")).unwrap();
        assert_eq!(trace.averages, vec![3.0; 5]);
    }

    #[test]
    fn truncation_is_monotone_and_stabilizes() {
        let ifs = binary();
        let f = CylinderFunction::new(
            2,
            3,
            vec![(w("000"), 5.0), (w("011"), 1.0), (w("110"), 2.0)],
        )
        .unwrap();
        let mut prev = vec![0.0; 8];
        for k in 0..=5 {
            let mk = dense(&maximal_operator_truncated(&ifs, &f, k));
            assert!(mk.iter().zip(&prev).all(|(a, b)| a >= b));
            prev = mk;
        }
        assert_eq!(prev, dense(&maximal_operator(&ifs, &f)));
    }

    #[test]
    fn weak_type_examples() {
        let ifs = binary();
        let one = CylinderFunction::constant(2, 2, 1.0).unwrap();
        let pts = weak_type_profile(&ifs, &one, ContentExponent::ONE, &[0.5, 2.0]).unwrap();
        assert_eq!(pts[0].content, 1.0);
        assert_eq!(pts[0].bound, 8.0);
        assert_eq!(pts[0].margin, 7.0);
        assert_eq!(pts[1].content, 0.0);
        assert!(pts[1].bound > 0.0);

        let ind = CylinderFunction::indicator(2, &w("00"), 2, 1.0).unwrap();
        let pts = weak_type_profile(&ifs, &ind, ContentExponent::ONE, &[0.3]).unwrap();
        assert_eq!(pts[0].content, 0.5);
        assert!((pts[0].bound - 4.0 / 0.3 * 0.25).abs() < 1e-14);
        assert!(weak_type_profile(&ifs, &ind, ContentExponent::ONE, &[0.0]).is_err());
    }

    #[test]
    fn weak_type_constant_values() {
        assert_eq!(weak_type_constant(ContentExponent::ONE), 4.0);
        let half = ContentExponent::new(0.5).unwrap();
        assert!((weak_type_constant(half) - 4.0 * 2f64.sqrt()).abs() < 1e-14);
    }
}
