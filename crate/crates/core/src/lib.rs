//! Exact computation of Hausdorff contents, Choquet integrals and the dyadic
//! Hardy–Littlewood maximal operator on self-similar sets, with randomized
//! campaigns that check the classical maximal inequalities.
//!
//! Everything works on cylinder sets: a set is a finite union of basic cubes
//! `K_w`, and a function is constant on the cubes of one fixed depth.

pub mod choquet;
pub mod config;
pub mod content;
pub mod error;
pub mod harness;
pub mod ifs;
pub mod maximal;
pub mod render;
pub mod selection;
pub mod word;

pub use choquet::{
    choquet_integral, level_set, level_set_at_least, llogl_functional, lp_norm, mu_integral, p_choquet_integral,
    CylinderFunction,
};
pub use content::{brute_force_content, hausdorff_content, optimal_cover, ContentExponent, Cover};
pub use error::{FmlError, Result};
pub use ifs::{solve_dimension, AxisBox, IteratedFunctionSystem, SimilarityMap};
pub use maximal::{indicator_maximal_bound, indicator_maximal_closed_form, maximal_operator, maximal_operator_truncated, weak_type_constant};
pub use selection::{certify_selection, select_subfamily, select_subfamily_with, SelectionOrder, SelectionResult};
pub use word::{CellSet, Word};
