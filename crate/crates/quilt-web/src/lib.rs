//! wasm-bindgen entry points for the static page in `www/`.
//!
//! Every function returns text (JSON or a diagram) or throws a string.

use quilt::associator::{solve_associator_with, TieBreak};
use quilt::cli::{associator_artifact, quantize_artifact, render_text, to_text};
use wasm_bindgen::prelude::*;

fn tie(one: bool) -> TieBreak {
    if one {
        TieBreak::One
    } else {
        TieBreak::Zero
    }
}

/// Associator of the given degree with its residual report, as JSON.
#[wasm_bindgen]
pub fn forge_associator(degree: usize, tie_one: bool) -> Result<String, String> {
    let a = solve_associator_with(degree, tie(tie_one)).map_err(|e| e.to_string())?;
    Ok(to_text(&associator_artifact(&a)))
}

/// Polygon diagram of an ordered morphism, or drawing of a ciliated graph.
#[wasm_bindgen]
pub fn render(toml: &str) -> Result<String, String> {
    render_text(toml).map_err(|e| e.message().to_string())
}

/// Quantized function algebra of the formal group of a bialgebra, with its
/// Hopf checks, as JSON. The associator has degree `hbar`.
#[wasm_bindgen]
pub fn quantize_group(bialgebra: &str, hbar: usize, order: usize) -> Result<String, String> {
    let a = solve_associator_with(hbar, TieBreak::Zero).map_err(|e| e.to_string())?;
    let (v, _) = quantize_artifact(bialgebra, None, hbar, order, &a).map_err(|e| e.message().to_string())?;
    Ok(to_text(&v))
}
