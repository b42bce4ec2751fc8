#![allow(dead_code)]

use std::path::PathBuf;

use fml_core::config::load_ifs;
use fml_core::{ContentExponent, IteratedFunctionSystem};

pub fn rho(r: f64) -> ContentExponent {
    ContentExponent::new(r).unwrap()
}

pub fn binary() -> IteratedFunctionSystem {
    IteratedFunctionSystem::uniform(2, 1.0 / 3.0).unwrap().with_name("binary")
}

/// Dyadic weights keep every cube measure exact in binary floating point.
pub fn binary_biased() -> IteratedFunctionSystem {
    IteratedFunctionSystem::symbolic(&[1.0 / 3.0, 1.0 / 3.0], &[0.25, 0.75])
        .unwrap()
        .with_name("binary_biased")
}

pub fn quaternary() -> IteratedFunctionSystem {
    IteratedFunctionSystem::uniform(4, 1.0 / 3.0).unwrap().with_name("quaternary")
}

pub fn quaternary_biased() -> IteratedFunctionSystem {
    IteratedFunctionSystem::symbolic(&[1.0 / 3.0; 4], &[0.125, 0.25, 0.25, 0.375])
        .unwrap()
        .with_name("quaternary_biased")
}

/// Non-dyadic weights, where results agree only up to rounding.
pub fn ternary_irregular() -> IteratedFunctionSystem {
    IteratedFunctionSystem::symbolic(&[0.2, 0.3, 0.1], &[0.2, 0.5, 0.3])
        .unwrap()
        .with_name("ternary_irregular")
}

pub fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn bundled(name: &str) -> IteratedFunctionSystem {
    load_ifs(config_dir().join(format!("{name}.toml"))).unwrap()
}
