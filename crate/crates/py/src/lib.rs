//! Python bindings for `fml-core`.
//!
//! Words cross the boundary as strings (`"-"` or `""` for the root), cell
//! sets as lists of words, and cylinder functions as `Function` objects.

use std::collections::BTreeMap;

use fml_core::config::{load_ifs, IfsConfig};
use fml_core::harness::{
    estimate_stein_constant, norm_constant, stein_by_depth, stein_is_stable, verify_lebesgue,
    verify_norm_equivalence, verify_strong_pp, verify_strong_type, verify_weak_type, verify_wiener, Campaign,
    GeneratorConfig, NormExponent, ValueDistribution, VerificationRecord, DEFAULT_REL_TOL,
};
use fml_core::{
    certify_selection, choquet_integral, hausdorff_content, indicator_maximal_bound, indicator_maximal_closed_form,
    level_set, maximal_operator, maximal_operator_truncated, mu_integral, optimal_cover, p_choquet_integral,
    select_subfamily_with, weak_type_constant, CellSet, ContentExponent, CylinderFunction, FmlError,
    IteratedFunctionSystem, SelectionOrder, Word,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: FmlError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn exponent(rho: f64) -> PyResult<ContentExponent> {
    ContentExponent::new(rho).map_err(err)
}

fn word(text: &str, arity: usize) -> PyResult<Word> {
    if text == "-" {
        return Ok(Word::root());
    }
    Word::parse(text, arity).map_err(err)
}

fn show(w: &Word) -> String {
    if w.is_root() {
        "-".to_string()
    } else {
        w.to_string()
    }
}

fn words(texts: &[String], arity: usize) -> PyResult<Vec<Word>> {
    texts.iter().map(|t| word(t, arity)).collect()
}

fn cell_set(texts: &[String], arity: usize) -> PyResult<CellSet> {
    let ws = words(texts, arity)?;
    CellSet::disjointify_checked(ws, arity).map_err(err)
}

/// A self-similar system with its natural measure.
#[pyclass(name = "Ifs", module = "fml", frozen)]
struct PyIfs {
    inner: IteratedFunctionSystem,
}

#[pymethods]
impl PyIfs {
    #[new]
    #[pyo3(signature = (ratios, probabilities, translations=None, name=None))]
    fn new(
        ratios: Vec<f64>,
        probabilities: Vec<f64>,
        translations: Option<Vec<Vec<f64>>>,
        name: Option<String>,
    ) -> PyResult<Self> {
        let config = IfsConfig {
            name,
            ratios,
            probabilities,
            translations,
            rotations: None,
            ssc: None,
        };
        Ok(PyIfs {
            inner: config.build().map_err(err)?,
        })
    }

    /// Reads a TOML or JSON config file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyIfs {
            inner: load_ifs(path).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let inner = IfsConfig::parse_toml(text).and_then(|c| c.build()).map_err(err)?;
        Ok(PyIfs { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    #[getter]
    fn dimension(&self) -> f64 {
        self.inner.dimension()
    }

    #[getter]
    fn ratios(&self) -> Vec<f64> {
        self.inner.ratios()
    }

    #[getter]
    fn probabilities(&self) -> Vec<f64> {
        self.inner.probabilities().to_vec()
    }

    fn cube_measure(&self, w: &str) -> PyResult<f64> {
        let w = word(w, self.inner.arity())?;
        self.inner.check_word(&w).map_err(err)?;
        Ok(self.inner.cube_measure(&w))
    }

    /// SVG of the generation-`depth` cells (ambient dimension 1 or 2 only).
    fn svg(&self, depth: usize) -> PyResult<String> {
        fml_core::render::generation_svg(&self.inner, depth).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Ifs(name={:?}, arity={}, dimension={})",
            self.inner.name(),
            self.inner.arity(),
            self.inner.dimension()
        )
    }
}

/// A function constant on the cubes of one generation.
#[pyclass(name = "Function", module = "fml", frozen)]
struct PyFunction {
    inner: CylinderFunction,
}

#[pymethods]
impl PyFunction {
    /// `values` maps leaf words to nonnegative values; missing leaves are 0.
    #[new]
    fn new(arity: usize, depth: usize, values: BTreeMap<String, f64>) -> PyResult<Self> {
        let pairs = values
            .iter()
            .map(|(w, v)| Ok((word(w, arity)?, *v)))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyFunction {
            inner: CylinderFunction::new(arity, depth, pairs).map_err(err)?,
        })
    }

    /// Leaf values in word order.
    #[staticmethod]
    fn dense(arity: usize, depth: usize, values: Vec<f64>) -> PyResult<Self> {
        Ok(PyFunction {
            inner: CylinderFunction::from_dense(arity, depth, &values).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (arity, w, depth, c=1.0))]
    fn indicator(arity: usize, w: &str, depth: usize, c: f64) -> PyResult<Self> {
        let w = word(w, arity)?;
        Ok(PyFunction {
            inner: CylinderFunction::indicator(arity, &w, depth, c).map_err(err)?,
        })
    }

    #[getter]
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    fn value(&self, leaf: &str) -> PyResult<f64> {
        let w = word(leaf, self.inner.arity())?;
        if w.len() != self.inner.depth() {
            return Err(PyValueError::new_err(format!("{leaf:?} is not a leaf")));
        }
        Ok(self.inner.value(&w))
    }

    fn to_dense(&self) -> Vec<f64> {
        self.inner.to_dense()
    }

    /// Nonzero leaves only.
    fn values(&self) -> BTreeMap<String, f64> {
        self.inner.iter().map(|(w, v)| (show(w), v)).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Function(arity={}, depth={}, support={})",
            self.inner.arity(),
            self.inner.depth(),
            self.inner.support_size()
        )
    }
}

fn wrap(inner: CylinderFunction) -> PyFunction {
    PyFunction { inner }
}

/// One verified inequality `lhs ≤ rhs`.
#[pyclass(name = "Record", module = "fml", frozen, get_all)]
struct PyRecord {
    theorem: String,
    ifs: String,
    rho: Option<f64>,
    p: Option<f64>,
    seed: u64,
    lhs: f64,
    rhs: f64,
    constant: f64,
    margin: f64,
    worst_ratio: f64,
    violated: bool,
}

#[pymethods]
impl PyRecord {
    fn __repr__(&self) -> String {
        format!(
            "Record({}, lhs={}, rhs={}, margin={})",
            self.theorem, self.lhs, self.rhs, self.margin
        )
    }
}

impl From<VerificationRecord> for PyRecord {
    fn from(r: VerificationRecord) -> Self {
        PyRecord {
            violated: r.violates(DEFAULT_REL_TOL),
            theorem: r.theorem.as_str().to_string(),
            ifs: r.ifs,
            rho: r.rho,
            p: r.p,
            seed: r.seed,
            lhs: r.lhs,
            rhs: r.rhs,
            constant: r.constant,
            margin: r.margin,
            worst_ratio: r.worst_ratio,
        }
    }
}

/// `H^ρ` of the union of `cells`.
#[pyfunction]
fn content(ifs: &PyIfs, cells: Vec<String>, rho: f64) -> PyResult<f64> {
    let set = cell_set(&cells, ifs.inner.arity())?;
    Ok(hausdorff_content(&ifs.inner, &set, exponent(rho)?))
}

/// `(value, cover words)` for a coarsest optimal cover.
#[pyfunction]
fn cover(ifs: &PyIfs, cells: Vec<String>, rho: f64) -> PyResult<(f64, Vec<String>)> {
    let set = cell_set(&cells, ifs.inner.arity())?;
    let c = optimal_cover(&ifs.inner, &set, exponent(rho)?);
    Ok((c.value, c.cubes.iter().map(show).collect()))
}

/// Maximal cubes of `{f > t}`.
#[pyfunction]
fn level_cells(f: &PyFunction, t: f64) -> Vec<String> {
    level_set(&f.inner, t).iter().map(show).collect()
}

#[pyfunction]
#[pyo3(signature = (ifs, f, rho, p=1.0))]
fn choquet(ifs: &PyIfs, f: &PyFunction, rho: f64, p: f64) -> PyResult<f64> {
    let rho = exponent(rho)?;
    if p == 1.0 {
        return Ok(choquet_integral(&ifs.inner, &f.inner, rho));
    }
    p_choquet_integral(&ifs.inner, &f.inner, p, rho).map_err(err)
}

#[pyfunction]
fn mu_integral_of(ifs: &PyIfs, f: &PyFunction) -> f64 {
    mu_integral(&ifs.inner, &f.inner)
}

/// `Mf`, or its truncation to cubes of depth `≤ max_level`.
#[pyfunction]
#[pyo3(signature = (ifs, f, max_level=None))]
fn maximal(ifs: &PyIfs, f: &PyFunction, max_level: Option<usize>) -> PyFunction {
    wrap(match max_level {
        Some(k) => maximal_operator_truncated(&ifs.inner, &f.inner, k),
        None => maximal_operator(&ifs.inner, &f.inner),
    })
}

#[pyfunction]
fn indicator_maximal(ifs: &PyIfs, w: &str, depth: usize) -> PyResult<PyFunction> {
    let w = word(w, ifs.inner.arity())?;
    indicator_maximal_closed_form(&ifs.inner, &w, depth).map(wrap).map_err(err)
}

#[pyfunction]
fn indicator_bound(ifs: &PyIfs, w: &str, p: f64, rho: f64) -> PyResult<f64> {
    let w = word(w, ifs.inner.arity())?;
    indicator_maximal_bound(&ifs.inner, &w, p, exponent(rho)?).map_err(err)
}

#[pyfunction]
fn weak_constant(rho: f64) -> PyResult<f64> {
    Ok(weak_type_constant(exponent(rho)?))
}

/// Greedy selection. Returns the selected words and, when `f` is given
/// (default: the constant 1 at the deepest input level), the margins of
/// packing, covering and splitting.
#[pyfunction]
#[pyo3(signature = (ifs, cells, rho, sigma=1.0, order="input", f=None))]
fn select(
    ifs: &PyIfs,
    cells: Vec<String>,
    rho: f64,
    sigma: f64,
    order: &str,
    f: Option<&PyFunction>,
) -> PyResult<(Vec<String>, BTreeMap<String, f64>)> {
    let m = ifs.inner.arity();
    let rho = exponent(rho)?;
    let order: SelectionOrder = order.parse().map_err(err)?;
    let cubes = fml_core::selection::order_cubes(&ifs.inner, &words(&cells, m)?, order);
    let result = select_subfamily_with(&ifs.inner, &cubes, rho, sigma).map_err(err)?;
    let one;
    let f = match f {
        Some(f) => &f.inner,
        None => {
            let depth = cubes.iter().map(Word::len).max().unwrap_or(0);
            one = CylinderFunction::constant(m, depth, 1.0).map_err(err)?;
            &one
        }
    };
    let cert = certify_selection(&ifs.inner, &result, rho, f).map_err(err)?;
    let margins = BTreeMap::from([
        ("packing".to_string(), cert.packing_margin),
        ("covering".to_string(), cert.covering.margin()),
        ("splitting".to_string(), cert.splitting.margin()),
    ]);
    Ok((result.selected().iter().map(show).collect(), margins))
}

fn norm_exponent(p: &str) -> PyResult<NormExponent> {
    p.parse().map_err(err)
}

fn finite(p: NormExponent) -> PyResult<f64> {
    match p {
        NormExponent::Finite(p) => Ok(p),
        NormExponent::Infinite => Err(PyValueError::new_err("this suite needs a finite p")),
    }
}

/// Runs one verification suite: `strong`, `weak`, `pp`, `wiener`, `stein`,
/// `equiv` or `lebesgue`. `p` accepts a number or `"inf"`.
#[pyfunction]
#[pyo3(signature = (ifs, suite, trials=100, depth=6, seed=0, rho=0.5, p="2"))]
fn verify(
    py: Python<'_>,
    ifs: &PyIfs,
    suite: &str,
    trials: usize,
    depth: usize,
    seed: u64,
    rho: f64,
    p: &str,
) -> PyResult<Vec<PyRecord>> {
    let rho = exponent(rho)?;
    let p = norm_exponent(p)?;
    let campaign = Campaign::new(trials, depth, seed);
    let ifs = &ifs.inner;
    let rows = py.detach(|| -> PyResult<Vec<VerificationRecord>> {
        match suite {
            "strong" => verify_strong_type(ifs, rho, finite(p)?, &campaign).map_err(err),
            "weak" => verify_weak_type(ifs, rho, &campaign).map_err(err),
            "pp" => verify_strong_pp(ifs, finite(p)?, &campaign).map_err(err),
            "wiener" => verify_wiener(ifs, &campaign).map_err(err),
            "stein" => {
                let family = GeneratorConfig::new(depth, ValueDistribution::HeavyTail, 0.5, seed).map_err(err)?;
                Ok(estimate_stein_constant(ifs, &family, trials).map_err(err)?.records)
            }
            "equiv" => verify_norm_equivalence(ifs, rho, p, &campaign).map_err(err),
            "lebesgue" => verify_lebesgue(ifs, &campaign).map_err(err),
            other => Err(PyValueError::new_err(format!("unknown suite {other:?}"))),
        }
    })?;
    Ok(rows.into_iter().map(PyRecord::from).collect())
}

/// Empirical Stein constant per depth and whether it stays within a
/// factor 2 from one depth to the next.
#[pyfunction]
#[pyo3(signature = (ifs, depths, trials=200, seed=0))]
fn stein_profile(ifs: &PyIfs, depths: Vec<usize>, trials: usize, seed: u64) -> PyResult<(Vec<(usize, f64)>, bool)> {
    let first = depths.first().copied().unwrap_or(1);
    let family = GeneratorConfig::new(first, ValueDistribution::HeavyTail, 0.5, seed).map_err(err)?;
    let by_depth = stein_by_depth(&ifs.inner, &family, depths, trials).map_err(err)?;
    let stable = stein_is_stable(&by_depth);
    Ok((by_depth, stable))
}

#[pyfunction]
fn norm_equivalence_constant(p: &str, rho: f64) -> PyResult<f64> {
    norm_constant(norm_exponent(p)?, exponent(rho)?).map_err(err)
}

#[pymodule]
fn fml(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyIfs>()?;
    m.add_class::<PyFunction>()?;
    m.add_class::<PyRecord>()?;
    m.add_function(wrap_pyfunction!(content, m)?)?;
    m.add_function(wrap_pyfunction!(cover, m)?)?;
    m.add_function(wrap_pyfunction!(level_cells, m)?)?;
    m.add_function(wrap_pyfunction!(choquet, m)?)?;
    m.add_function(wrap_pyfunction!(mu_integral_of, m)?)?;
    m.add_function(wrap_pyfunction!(maximal, m)?)?;
    m.add_function(wrap_pyfunction!(indicator_maximal, m)?)?;
    m.add_function(wrap_pyfunction!(indicator_bound, m)?)?;
    m.add_function(wrap_pyfunction!(weak_constant, m)?)?;
    m.add_function(wrap_pyfunction!(select, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(stein_profile, m)?)?;
    m.add_function(wrap_pyfunction!(norm_equivalence_constant, m)?)?;
    Ok(())
}
