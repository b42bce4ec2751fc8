//! Similar iterated function systems and their self-similar measures.
//!
//! Only the contraction ratios (through the dimension) and the probability
//! vector (through the cube measures) enter the measure-theoretic layer. The
//! translations and rotations are kept for rendering generations.

use crate::error::{FmlError, Result};
use crate::word::Word;

const ORTHOGONALITY_TOL: f64 = 1e-9;
const PROBABILITY_TOL: f64 = 1e-12;

/// `x ↦ ratio · R x + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMap {
    ratio: f64,
    translation: Vec<f64>,
    rotation: Option<Vec<Vec<f64>>>,
}

impl SimilarityMap {
    pub fn new(ratio: f64, translation: Vec<f64>, rotation: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(FmlError::InvalidRatio(ratio));
        }
        if let Some(rot) = &rotation {
            check_orthogonal(rot, translation.len())?;
        }
        Ok(SimilarityMap {
            ratio,
            translation,
            rotation,
        })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    pub fn rotation(&self) -> Option<&[Vec<f64>]> {
        self.rotation.as_deref()
    }

    /// The linear part `ratio · R` as a dense row-major matrix.
    fn linear_part(&self) -> Vec<Vec<f64>> {
        let d = self.translation.len();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let r = match &self.rotation {
                            Some(rot) => rot[i][j],
                            None if i == j => 1.0,
                            None => 0.0,
                        };
                        self.ratio * r
                    })
                    .collect()
            })
            .collect()
    }
}

fn check_orthogonal(rot: &[Vec<f64>], d: usize) -> Result<()> {
    if rot.len() != d || rot.iter().any(|row| row.len() != d) {
        return Err(FmlError::InvalidGeometry(format!(
            "rotation must be a {d}x{d} matrix"
        )));
    }
    for i in 0..d {
        for j in 0..d {
            let dot: f64 = (0..d).map(|k| rot[k][i] * rot[k][j]).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            if (dot - expected).abs() > ORTHOGONALITY_TOL {
                return Err(FmlError::InvalidGeometry(
                    "rotation is not orthogonal".to_string(),
                ));
            }
        }
    }
    Ok(())
}

/// Solves `Σ r_i^s = 1` for `s` by bisection.
///
/// `s ↦ Σ r_i^s` is strictly decreasing from `m` at `s = 0` towards zero, so
/// the root is unique. The initial bracket is `(1e-9, ambient_dim]`, doubled
/// upward while the sum at the upper end still exceeds one.
pub fn solve_dimension(ratios: &[f64]) -> Result<f64> {
    solve_dimension_in(ratios, 1)
}

pub fn solve_dimension_in(ratios: &[f64], ambient_dim: usize) -> Result<f64> {
    if ratios.len() < 2 {
        return Err(FmlError::TooFewMaps(ratios.len()));
    }
    if let Some(&bad) = ratios.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(FmlError::InvalidRatio(bad));
    }
    let moran = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>();

    let mut lo = 1e-9;
    let mut hi = ambient_dim.max(1) as f64;
    while moran(hi) > 1.0 {
        lo = hi;
        hi *= 2.0;
    }
    // Run until the bracket cannot shrink any further in double precision.
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if moran(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = if (moran(lo) - 1.0).abs() <= (moran(hi) - 1.0).abs() {
        lo
    } else {
        hi
    };
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct IteratedFunctionSystem {
    name: String,
    maps: Vec<SimilarityMap>,
    probabilities: Vec<f64>,
    dimension: f64,
    ssc_declared: bool,
}

impl IteratedFunctionSystem {
    pub fn new(
        name: impl Into<String>,
        maps: Vec<SimilarityMap>,
        probabilities: Vec<f64>,
        ssc_declared: bool,
    ) -> Result<Self> {
        if maps.len() < 2 {
            return Err(FmlError::TooFewMaps(maps.len()));
        }
        if maps.len() > u8::MAX as usize + 1 {
            return Err(FmlError::Parameter(format!(
                "at most 256 maps are supported, got {}",
                maps.len()
            )));
        }
        let d = maps[0].translation.len();
        if maps.iter().any(|m| m.translation.len() != d) {
            return Err(FmlError::InvalidGeometry(
                "all translations must share one dimension".to_string(),
            ));
        }
        check_probabilities(&probabilities, maps.len())?;
        let ratios: Vec<f64> = maps.iter().map(SimilarityMap::ratio).collect();
        let dimension = solve_dimension_in(&ratios, d)?;
        Ok(IteratedFunctionSystem {
            name: name.into(),
            maps,
            probabilities,
            dimension,
            ssc_declared,
        })
    }

    /// A measure-only system: ratios and probabilities, no geometry.
    pub fn symbolic(ratios: &[f64], probabilities: &[f64]) -> Result<Self> {
        let maps = ratios
            .iter()
            .map(|&r| SimilarityMap::new(r, Vec::new(), None))
            .collect::<Result<Vec<_>>>()?;
        Self::new("symbolic", maps, probabilities.to_vec(), true)
    }

    /// `arity` maps sharing one ratio, uniformly weighted.
    pub fn uniform(arity: usize, ratio: f64) -> Result<Self> {
        let ratios = vec![ratio; arity];
        let probs = vec![1.0 / arity as f64; arity];
        Self::symbolic(&ratios, &probs)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[SimilarityMap] {
        &self.maps
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(SimilarityMap::ratio).collect()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, symbol: u8) -> f64 {
        self.probabilities[symbol as usize]
    }

    pub fn dimension(&self) -> f64 {
        self.dimension
    }

    pub fn ambient_dimension(&self) -> usize {
        self.maps[0].translation.len()
    }

    pub fn ssc_declared(&self) -> bool {
        self.ssc_declared
    }

    /// `μ(K_w)`: the product of the symbol probabilities along `w`.
    pub fn cube_measure(&self, w: &Word) -> f64 {
        w.symbols()
            .iter()
            .fold(1.0, |acc, &s| acc * self.probabilities[s as usize])
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        w.check_arity(self.arity())
    }

    /// Images of `seed` under every composition of `n` maps, addressed by
    /// their words in index order.
    pub fn generation_geometry(&self, n: usize, seed: &AxisBox) -> Result<Vec<GenerationCell>> {
        let d = self.ambient_dimension();
        if d == 0 {
            return Err(FmlError::InvalidGeometry(
                "system has no translations; geometry unavailable".to_string(),
            ));
        }
        if seed.dim() != d {
            return Err(FmlError::InvalidGeometry(format!(
                "seed box has dimension {}, system has {d}",
                seed.dim()
            )));
        }
        let count = (self.arity() as u128).checked_pow(n as u32);
        match count {
            Some(c) if c <= MAX_GENERATION_CELLS as u128 => {}
            _ => {
                return Err(FmlError::Resource(format!(
                    "{}^{n} cells exceeds the limit of {MAX_GENERATION_CELLS}",
                    self.arity()
                )))
            }
        }

        let identity = Affine::identity(d);
        let mut level = vec![(Word::root(), identity)];
        for _ in 0..n {
            let mut next = Vec::with_capacity(level.len() * self.arity());
            for (word, affine) in &level {
                for (i, map) in self.maps.iter().enumerate() {
                    next.push((word.child(i as u8), affine.then_inner(map)));
                }
            }
            level = next;
        }
        let corners = seed.corners();
        Ok(level
            .into_iter()
            .map(|(word, affine)| GenerationCell {
                word,
                vertices: corners.iter().map(|c| affine.apply(c)).collect(),
            })
            .collect())
    }

    /// Sufficient check for separation: the first-generation images of the
    /// seed box have pairwise disjoint bounding boxes.
    pub fn seed_images_disjoint(&self, seed: &AxisBox) -> Result<bool> {
        let cells = self.generation_geometry(1, seed)?;
        let boxes: Vec<AxisBox> = cells.iter().map(|c| AxisBox::bounding(&c.vertices)).collect();
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if boxes[i].intersects(&boxes[j]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub const MAX_GENERATION_CELLS: usize = 1 << 20;

fn check_probabilities(p: &[f64], m: usize) -> Result<()> {
    if p.len() != m {
        return Err(FmlError::InvalidProbabilities(format!(
            "expected {m} entries, got {}",
            p.len()
        )));
    }
    if let Some(bad) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(FmlError::InvalidProbabilities(format!(
            "entry {bad} is negative or not finite"
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_TOL {
        return Err(FmlError::InvalidProbabilities(format!(
            "entries sum to {total}, not 1"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn unit(d: usize) -> Self {
        AxisBox {
            lo: vec![0.0; d],
            hi: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// All `2^d` corners; bit `k` of the corner index selects `hi` in axis `k`.
    /// For `d = 2` the order is rotated so consecutive corners share an edge.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out: Vec<Vec<f64>> = (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|k| if mask >> k & 1 == 1 { self.hi[k] } else { self.lo[k] })
                    .collect()
            })
            .collect();
        if d == 2 {
            out.swap(2, 3);
        }
        out
    }

    pub fn bounding(points: &[Vec<f64>]) -> Self {
        let d = points[0].len();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in points {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        AxisBox { lo, hi }
    }

    /// Closed boxes touching at a face count as intersecting.
    pub fn intersects(&self, other: &AxisBox) -> bool {
        (0..self.dim()).all(|k| self.lo[k] <= other.hi[k] && other.lo[k] <= self.hi[k])
    }
}

#[derive(Debug, Clone)]
pub struct GenerationCell {
    pub word: Word,
    /// Images of the seed box corners, in [`AxisBox::corners`] order.
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
struct Affine {
    linear: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

impl Affine {
    fn identity(d: usize) -> Self {
        Affine {
            linear: (0..d)
                .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            offset: vec![0.0; d],
        }
    }

    /// `self ∘ map`.
    fn then_inner(&self, map: &SimilarityMap) -> Affine {
        let inner = map.linear_part();
        let d = self.offset.len();
        let linear = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).map(|k| self.linear[i][k] * inner[k][j]).sum())
                    .collect()
            })
            .collect();
        let offset = self.apply(&map.translation);
        Affine { linear, offset }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.linear
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>() + b)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor(ratio: f64, second: f64) -> IteratedFunctionSystem {
        let maps = vec![
            SimilarityMap::new(ratio, vec![0.0], None).unwrap(),
            SimilarityMap::new(ratio, vec![second], None).unwrap(),
        ];
        IteratedFunctionSystem::new("cantor", maps, vec![0.5, 0.5], true).unwrap()
    }

    fn carpet(lambda: f64) -> IteratedFunctionSystem {
        let t = 1.0 - lambda;
        let maps = [[0.0, 0.0], [t, 0.0], [0.0, t], [t, t]]
            .iter()
            .map(|b| SimilarityMap::new(lambda, b.to_vec(), None).unwrap())
            .collect();
        IteratedFunctionSystem::new("carpet", maps, vec![0.25; 4], true).unwrap()
    }

    #[test]
    fn dimension_of_middle_third_cantor() {
        let s = solve_dimension(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((s - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn dimension_of_middle_fourth_cantor() {
        let s = solve_dimension(&[0.25, 0.25]).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dimension_of_carpet_needs_bracket_extension() {
        // Σ r^1 = 4/3 > 1 with the default bracket end of 1.
        let s = solve_dimension(&[1.0 / 3.0; 4]).unwrap();
        assert!((s - 2.0 * 2f64.ln() / 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn dimension_residual_is_tiny() {
        let ratios = [0.1, 0.45, 0.3];
        let s = solve_dimension(&ratios).unwrap();
        let residual: f64 = ratios.iter().map(|r: &f64| r.powf(s)).sum::<f64>() - 1.0;
        assert!(residual.abs() <= 1e-12);
    }

    #[test]
    fn dimension_rejects_bad_input() {
        assert!(matches!(solve_dimension(&[0.5]), Err(FmlError::TooFewMaps(1))));
        assert!(matches!(
            solve_dimension(&[0.5, 1.0]),
            Err(FmlError::InvalidRatio(_))
        ));
        assert!(solve_dimension(&[0.0, 0.5]).is_err());
    }

    #[test]
    fn probabilities_are_validated() {
        assert!(IteratedFunctionSystem::symbolic(&[0.3, 0.3], &[0.5, 0.6]).is_err());
        assert!(IteratedFunctionSystem::symbolic(&[0.3, 0.3], &[1.2, -0.2]).is_err());
        assert!(IteratedFunctionSystem::symbolic(&[0.3, 0.3], &[1.0]).is_err());
        assert!(IteratedFunctionSystem::symbolic(&[0.3, 0.3], &[1.0, 0.0]).is_ok());
    }

    #[test]
    fn rotation_must_be_orthogonal() {
        let good = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        assert!(SimilarityMap::new(0.5, vec![0.0, 0.0], Some(good)).is_ok());
        let bad = vec![vec![1.0, 1.0], vec![0.0, 1.0]];
        assert!(SimilarityMap::new(0.5, vec![0.0, 0.0], Some(bad)).is_err());
    }

    #[test]
    fn cube_measure_is_a_product() {
        let ifs = IteratedFunctionSystem::symbolic(&[0.3, 0.3], &[0.5, 0.5]).unwrap();
        assert_eq!(ifs.cube_measure(&Word::parse("01", 2).unwrap()), 0.25);
        assert_eq!(ifs.cube_measure(&Word::root()), 1.0);
        let biased = IteratedFunctionSystem::symbolic(&[0.3, 0.3], &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let m = biased.cube_measure(&Word::parse("110", 2).unwrap());
        assert!((m - 4.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn middle_fourth_first_generation() {
        let ifs = cantor(0.25, 0.5);
        let cells = ifs.generation_geometry(1, &AxisBox::unit(1)).unwrap();
        let intervals: Vec<(f64, f64)> = cells
            .iter()
            .map(|c| (c.vertices[0][0], c.vertices[1][0]))
            .collect();
        assert_eq!(intervals, vec![(0.0, 0.25), (0.5, 0.75)]);
    }

    #[test]
    fn generation_zero_is_the_seed() {
        let ifs = cantor(1.0 / 3.0, 2.0 / 3.0);
        let cells = ifs.generation_geometry(0, &AxisBox::unit(1)).unwrap();
        assert_eq!(cells.len(), 1);
        assert!(cells[0].word.is_root());
        assert_eq!(cells[0].vertices, vec![vec![0.0], vec![1.0]]);
    }

    #[test]
    fn composition_order_applies_last_symbol_first() {
        // S_1 ∘ S_0 ([0,1]) = S_1([0, 1/4]) = [1/2, 9/16]
        let ifs = cantor(0.25, 0.5);
        let cells = ifs.generation_geometry(2, &AxisBox::unit(1)).unwrap();
        let c = cells.iter().find(|c| c.word.to_string() == "10").unwrap();
        assert_eq!((c.vertices[0][0], c.vertices[1][0]), (0.5, 0.5625));
    }

    #[test]
    fn carpet_first_generation_has_four_corner_squares() {
        let lambda = 1.0 / 3.0;
        let ifs = carpet(lambda);
        let cells = ifs.generation_geometry(1, &AxisBox::unit(2)).unwrap();
        assert_eq!(cells.len(), 4);
        let lows: Vec<AxisBox> = cells.iter().map(|c| AxisBox::bounding(&c.vertices)).collect();
        let t = 1.0 - lambda;
        let expected = [[0.0, 0.0], [t, 0.0], [0.0, t], [t, t]];
        for (b, lo) in lows.iter().zip(expected) {
            assert!((b.lo[0] - lo[0]).abs() < 1e-15 && (b.lo[1] - lo[1]).abs() < 1e-15);
            assert!((b.hi[0] - b.lo[0] - lambda).abs() < 1e-15);
        }
        assert!(ifs.seed_images_disjoint(&AxisBox::unit(2)).unwrap());
    }

    #[test]
    fn overlapping_seed_images_are_detected() {
        let ifs = cantor(0.6, 0.4);
        assert!(!ifs.seed_images_disjoint(&AxisBox::unit(1)).unwrap());
    }

    #[test]
    fn generation_geometry_guards_memory() {
        let ifs = cantor(0.25, 0.5);
        assert!(matches!(
            ifs.generation_geometry(40, &AxisBox::unit(1)),
            Err(FmlError::Resource(_))
        ));
    }
}
