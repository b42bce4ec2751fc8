//! Randomized campaigns that evaluate both sides of each maximal inequality.

use rand::Rng;
use rayon::prelude::*;

use super::generate::{random_function, random_word, rng_from_seed, trial_seed, GeneratorConfig, ValueDistribution};
use super::record::{accumulate_worst, TheoremId, VerificationRecord};
use crate::choquet::{
    ess_sup_norm, level_contents_above, llogl_functional, lp_norm, mu_integral, p_choquet_integral, CylinderFunction,
};
use crate::content::ContentExponent;
use crate::error::{FmlError, Result};
use crate::ifs::IteratedFunctionSystem;
use crate::maximal::{maximal_operator, weak_type_constant};
use crate::word::Word;

/// Trial count, function depth and base seed shared by every suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Campaign {
    pub trials: usize,
    pub depth: usize,
    pub seed: u64,
}

impl Campaign {
    pub fn new(trials: usize, depth: usize, seed: u64) -> Self {
        Campaign { trials, depth, seed }
    }
}

/// Thresholds per trial function in the weak-type suite.
pub const WEAK_GRID_POINTS: usize = 24;

/// `2^{p+2}/(p−ρ)` for `ρ < p < 1`, `2^{2p+1}/(p(1−ρ))` for `p ≥ 1`.
/// Defined only for `ρ < 1`.
pub fn strong_type_constant(p: f64, rho: ContentExponent) -> Result<f64> {
    let r = rho.value();
    if r >= 1.0 {
        return Err(FmlError::Parameter(
            "the content strong-type bound needs rho < 1; at rho = 1 the content is the measure \
             and the measure-level strong (p,p) bound applies (suite `pp`)"
                .to_string(),
        ));
    }
    if !(p > r && p.is_finite()) {
        return Err(FmlError::Parameter(format!(
            "strong-type bound needs rho < p < inf, got p = {p}, rho = {r}"
        )));
    }
    Ok(if p < 1.0 {
        2f64.powf(p + 2.0) / (p - r)
    } else {
        2f64.powf(2.0 * p + 1.0) / (p * (1.0 - r))
    })
}

/// `2^{p+2} p/(p−1)` for `p > 1`.
pub fn strong_pp_constant(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(FmlError::Parameter(format!(
            "strong (p,p) bound needs 1 < p < inf, got {p}"
        )));
    }
    Ok(2f64.powf(p + 2.0) * p / (p - 1.0))
}

pub const WIENER_CONSTANT: f64 = 8.0;
pub const WIENER_OFFSET: f64 = 2.0;

/// A trial function: every fifth is a scaled cube indicator (the extremal
/// shape for maximal inequalities), the rest have random sparsity. Values
/// cycle through the distributions unless `heavy` pins them to the heavy
/// tail.
fn trial_function(arity: usize, depth: usize, seed: u64, index: usize, heavy: bool) -> CylinderFunction {
    let mut rng = rng_from_seed(seed);
    let distribution = if heavy {
        ValueDistribution::HeavyTail
    } else {
        ValueDistribution::ALL[index % 3]
    };
    if index % 5 == 4 {
        let len = rng.gen_range(0..=depth);
        let cube = random_word(&mut rng, arity, len);
        let c = distribution.sample(&mut rng);
        return CylinderFunction::indicator(arity, &cube, depth, c).expect("cube within depth");
    }
    let sparsity = rng.gen_range(0.05..=1.0);
    random_function(&mut rng, arity, depth, distribution, sparsity)
}

fn run_trials<F>(campaign: &Campaign, f: F) -> Vec<VerificationRecord>
where
    F: Fn(usize, u64) -> Vec<VerificationRecord> + Sync,
{
    let mut records: Vec<VerificationRecord> = (0..campaign.trials)
        .into_par_iter()
        .map(|i| f(i, trial_seed(campaign.seed, i)))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    accumulate_worst(&mut records);
    records
}

/// `∫ (Mf)^p dH ≤ C_{p,ρ} ∫ f^p dH`.
pub fn verify_strong_type(
    ifs: &IteratedFunctionSystem,
    rho: ContentExponent,
    p: f64,
    campaign: &Campaign,
) -> Result<Vec<VerificationRecord>> {
    let constant = strong_type_constant(p, rho)?;
    Ok(run_trials(campaign, |i, seed| {
        let f = trial_function(ifs.arity(), campaign.depth, seed, i, false);
        let mf = maximal_operator(ifs, &f);
        let lhs = p_choquet_integral(ifs, &mf, p, rho).expect("p > 0");
        let integral = p_choquet_integral(ifs, &f, p, rho).expect("p > 0");
        vec![VerificationRecord::new(
            TheoremId::StrongType,
            ifs.name(),
            Some(rho.value()),
            Some(p),
            seed,
            lhs,
            constant * integral,
            constant,
        )]
    }))
}

/// Log-spaced thresholds from half the smallest positive value up to the
/// largest value.
pub fn threshold_grid(f: &CylinderFunction, points: usize) -> Vec<f64> {
    let hi = f.max_value();
    let lo = 0.5 * f.min_positive().unwrap_or(hi);
    if !(hi > 0.0) {
        return Vec::new();
    }
    let ratio = (hi / lo).ln();
    (0..points)
        .map(|k| {
            let frac = k as f64 / (points - 1) as f64;
            if k + 1 == points {
                hi
            } else {
                lo * (ratio * frac).exp()
            }
        })
        .collect()
}

/// `H({Mf > t}) ≤ 4 ρ^{−ρ} t^{−ρ} ∫ f^ρ dH` on a threshold grid per trial.
pub fn verify_weak_type(
    ifs: &IteratedFunctionSystem,
    rho: ContentExponent,
    campaign: &Campaign,
) -> Result<Vec<VerificationRecord>> {
    let constant = weak_type_constant(rho);
    let r = rho.value();
    Ok(run_trials(campaign, |i, seed| {
        let f = trial_function(ifs.arity(), campaign.depth, seed, i, false);
        let mf = maximal_operator(ifs, &f);
        let integral = p_choquet_integral(ifs, &f, r, rho).expect("rho > 0");
        let grid = threshold_grid(&f, WEAK_GRID_POINTS);
        let contents = level_contents_above(ifs, &mf, &grid, rho);
        grid.into_iter()
            .zip(contents)
            .map(|(t, lhs)| {
                let rhs = constant * t.powf(-r) * integral;
                VerificationRecord::new(TheoremId::WeakType, ifs.name(), Some(r), None, seed, lhs, rhs, constant)
            })
            .collect()
    }))
}

/// `∫ (Mf)^p dμ ≤ 2^{p+2} p/(p−1) ∫ f^p dμ`.
pub fn verify_strong_pp(ifs: &IteratedFunctionSystem, p: f64, campaign: &Campaign) -> Result<Vec<VerificationRecord>> {
    let constant = strong_pp_constant(p)?;
    Ok(run_trials(campaign, |i, seed| {
        let f = trial_function(ifs.arity(), campaign.depth, seed, i, false);
        let mf = maximal_operator(ifs, &f);
        let lhs = mu_integral(ifs, &power(&mf, p));
        let rhs = constant * mu_integral(ifs, &power(&f, p));
        vec![VerificationRecord::new(TheoremId::StrongPp, ifs.name(), Some(1.0), Some(p), seed, lhs, rhs, constant)]
    }))
}

fn power(f: &CylinderFunction, p: f64) -> CylinderFunction {
    f.map_values(|v| v.powf(p)).expect("powers of nonnegative values")
}

/// `∫ Mf dμ ≤ 2 μ(K) + 8 ∫ f log⁺ f dμ` on heavy-tailed values.
pub fn verify_wiener(ifs: &IteratedFunctionSystem, campaign: &Campaign) -> Result<Vec<VerificationRecord>> {
    Ok(run_trials(campaign, |i, seed| {
        let f = trial_function(ifs.arity(), campaign.depth, seed, i, true);
        let mf = maximal_operator(ifs, &f);
        let lhs = mu_integral(ifs, &mf);
        let rhs = WIENER_OFFSET + WIENER_CONSTANT * llogl_functional(ifs, &f);
        vec![VerificationRecord::new(TheoremId::Wiener, ifs.name(), None, None, seed, lhs, rhs, WIENER_CONSTANT)]
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteinEstimate {
    /// Empirical `sup ∫ f log⁺ f dμ / ∫ Mf dμ` over the nonzero trials.
    pub sup_ratio: f64,
    /// One row per nonzero trial: `lhs = ∫ f log⁺ f dμ`, `rhs = sup · ∫ Mf dμ`.
    pub records: Vec<VerificationRecord>,
}

/// `∫ f log⁺ f dμ / ∫ Mf dμ` for one function; `None` for `f ≡ 0`.
pub fn stein_ratio(ifs: &IteratedFunctionSystem, f: &CylinderFunction) -> Option<(f64, f64)> {
    if f.is_zero() {
        return None;
    }
    let mf = maximal_operator(ifs, f);
    Some((llogl_functional(ifs, f), mu_integral(ifs, &mf)))
}

/// Reports, without asserting, the largest ratio `∫ f log⁺ f / ∫ Mf` seen
/// over `trials` functions from `family` (trial seeds derived from
/// `family.seed`).
pub fn estimate_stein_constant(
    ifs: &IteratedFunctionSystem,
    family: &GeneratorConfig,
    trials: usize,
) -> Result<SteinEstimate> {
    if trials == 0 {
        return Err(FmlError::Parameter("at least one trial is required".to_string()));
    }
    let samples: Vec<(u64, Option<(f64, f64)>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(family.seed, i);
            let f = family.with_seed(seed).function(ifs.arity());
            (seed, stein_ratio(ifs, &f))
        })
        .collect();
    let nonzero: Vec<(u64, f64, f64)> = samples
        .into_iter()
        .filter_map(|(seed, s)| s.map(|(num, den)| (seed, num, den)))
        .collect();
    if nonzero.is_empty() {
        return Err(FmlError::Parameter("family produced only zero functions".to_string()));
    }
    let sup_ratio = nonzero.iter().map(|(_, num, den)| num / den).fold(0.0, f64::max);
    let mut records: Vec<VerificationRecord> = nonzero
        .into_iter()
        .map(|(seed, num, den)| {
            VerificationRecord::new(TheoremId::Stein, ifs.name(), None, None, seed, num, sup_ratio * den, sup_ratio)
        })
        .collect();
    accumulate_worst(&mut records);
    Ok(SteinEstimate { sup_ratio, records })
}

/// Empirical Stein constants at each depth in `depths`.
pub fn stein_by_depth(
    ifs: &IteratedFunctionSystem,
    family: &GeneratorConfig,
    depths: impl IntoIterator<Item = usize>,
    trials: usize,
) -> Result<Vec<(usize, f64)>> {
    depths
        .into_iter()
        .map(|d| {
            let cfg = GeneratorConfig::new(d, family.value_distribution, family.sparsity, family.seed)?;
            Ok((d, estimate_stein_constant(ifs, &cfg, trials)?.sup_ratio))
        })
        .collect()
}

/// `sup(n+1) ≤ 2 sup(n)` for consecutive depths.
pub fn stein_is_stable(by_depth: &[(usize, f64)]) -> bool {
    by_depth.windows(2).all(|w| w[1].1 <= 2.0 * w[0].1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormExponent {
    Finite(f64),
    Infinite,
}

impl std::str::FromStr for NormExponent {
    type Err = FmlError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "infinity" => Ok(NormExponent::Infinite),
            _ => s
                .parse::<f64>()
                .map(NormExponent::Finite)
                .map_err(|_| FmlError::Parameter(format!("bad exponent {s:?}"))),
        }
    }
}

/// Constant `C` in `‖Mf‖ ≤ C ‖f‖`: the root of the matching strong-type
/// constant, or 1 at `p = ∞`.
pub fn norm_constant(p: NormExponent, rho: ContentExponent) -> Result<f64> {
    match p {
        NormExponent::Infinite => Ok(1.0),
        NormExponent::Finite(p) => {
            if !(p > rho.value()) {
                return Err(FmlError::Parameter(format!(
                    "norm equivalence needs p > rho, got p = {p}, rho = {}",
                    rho.value()
                )));
            }
            let c = if rho.value() < 1.0 {
                strong_type_constant(p, rho)?
            } else {
                strong_pp_constant(p)?
            };
            Ok(c.powf(1.0 / p))
        }
    }
}

fn quasi_norm(ifs: &IteratedFunctionSystem, f: &CylinderFunction, p: NormExponent, rho: ContentExponent) -> f64 {
    match p {
        NormExponent::Infinite => ess_sup_norm(ifs, f, rho),
        NormExponent::Finite(p) => lp_norm(ifs, f, p, rho).expect("p > 0"),
    }
}

/// `‖f‖ ≤ ‖Mf‖ ≤ C ‖f‖` in `L^p(H)`; two rows per trial.
pub fn verify_norm_equivalence(
    ifs: &IteratedFunctionSystem,
    rho: ContentExponent,
    p: NormExponent,
    campaign: &Campaign,
) -> Result<Vec<VerificationRecord>> {
    let constant = norm_constant(p, rho)?;
    let p_col = match p {
        NormExponent::Finite(p) => Some(p),
        NormExponent::Infinite => Some(f64::INFINITY),
    };
    Ok(run_trials(campaign, |i, seed| {
        let f = trial_function(ifs.arity(), campaign.depth, seed, i, false);
        let mf = maximal_operator(ifs, &f);
        let nf = quasi_norm(ifs, &f, p, rho);
        let nmf = quasi_norm(ifs, &mf, p, rho);
        vec![
            VerificationRecord::new(TheoremId::NormLower, ifs.name(), Some(rho.value()), p_col, seed, nf, nmf, 1.0),
            VerificationRecord::new(
                TheoremId::NormUpper,
                ifs.name(),
                Some(rho.value()),
                p_col,
                seed,
                nmf,
                constant * nf,
                constant,
            ),
        ]
    }))
}

/// Mean oscillation `D_n(x) = μ(K_n(x))^{-1} ∫_{K_n(x)} |f − f(x)| dμ` at one
/// leaf for `n = 0..=depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentiationProfile {
    pub leaf: Word,
    pub deviations: Vec<f64>,
}

pub const MIN_DIFFERENTIATION_DEPTH: usize = 4;

pub fn lebesgue_differentiation_experiment(
    ifs: &IteratedFunctionSystem,
    f: &CylinderFunction,
    sample_leaves: &[Word],
) -> Result<Vec<DifferentiationProfile>> {
    if f.depth() < MIN_DIFFERENTIATION_DEPTH {
        return Err(FmlError::Parameter(format!(
            "differentiation experiment needs depth >= {MIN_DIFFERENTIATION_DEPTH}, got {}",
            f.depth()
        )));
    }
    let dense = f.to_dense();
    let m = f.arity();
    let n = f.depth();
    let leaf_measures: Vec<f64> = (0..dense.len())
        .map(|i| ifs.cube_measure(&Word::from_index(i, n, m)))
        .collect();
    sample_leaves
        .iter()
        .map(|leaf| {
            ifs.check_word(leaf)?;
            if leaf.len() != n {
                return Err(FmlError::Parameter(format!("leaf {leaf:?} must have length {n}")));
            }
            let x = leaf.index(m);
            let fx = dense[x];
            let deviations = (0..=n)
                .map(|k| {
                    // leaves under the depth-k ancestor form a contiguous block
                    let span = m.pow((n - k) as u32);
                    let start = x / span * span;
                    let mu = ifs.cube_measure(&leaf.prefix(k));
                    if k == n {
                        return 0.0f64.max((dense[x] - fx).abs());
                    }
                    let mass: f64 = (start..start + span)
                        .map(|y| leaf_measures[y] * (dense[y] - fx).abs())
                        .sum();
                    if mu > 0.0 {
                        mass / mu
                    } else {
                        0.0
                    }
                })
                .collect();
            Ok(DifferentiationProfile {
                leaf: leaf.clone(),
                deviations,
            })
        })
        .collect()
}

/// Leaves sampled per trial in [`verify_lebesgue`].
pub const LEBESGUE_SAMPLES: usize = 8;

/// Per trial: `D_N(x) = 0` at sampled leaves, and `Mf ≥ f` at every leaf
/// (reported at the leaf where `Mf − f` is smallest).
pub fn verify_lebesgue(ifs: &IteratedFunctionSystem, campaign: &Campaign) -> Result<Vec<VerificationRecord>> {
    if campaign.depth < MIN_DIFFERENTIATION_DEPTH {
        return Err(FmlError::Parameter(format!(
            "differentiation experiment needs depth >= {MIN_DIFFERENTIATION_DEPTH}"
        )));
    }
    Ok(run_trials(campaign, |i, seed| {
        let f = trial_function(ifs.arity(), campaign.depth, seed, i, false);
        let mut rng = rng_from_seed(seed ^ 0x5EED);
        let leaves: Vec<Word> = (0..LEBESGUE_SAMPLES)
            .map(|_| random_word(&mut rng, ifs.arity(), campaign.depth))
            .collect();
        let profiles = lebesgue_differentiation_experiment(ifs, &f, &leaves).expect("valid leaves");
        let mut rows: Vec<VerificationRecord> = profiles
            .iter()
            .map(|prof| {
                let last = *prof.deviations.last().expect("depth + 1 entries");
                VerificationRecord::new(TheoremId::Lebesgue, ifs.name(), None, None, seed, last, 0.0, 0.0)
            })
            .collect();

        let fv = f.to_dense();
        let mv = maximal_operator(ifs, &f).to_dense();
        let (worst_f, worst_m) = fv
            .iter()
            .zip(&mv)
            .min_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
            .map(|(a, b)| (*a, *b))
            .expect("at least one leaf");
        rows.push(VerificationRecord::new(TheoremId::Domination, ifs.name(), None, None, seed, worst_f, worst_m, 1.0));
        rows
    }))
}
