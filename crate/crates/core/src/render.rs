//! SVG drawing of the generation-`n` cells.

use std::fmt::Write;

use crate::error::{FmlError, Result};
use crate::ifs::{AxisBox, GenerationCell, IteratedFunctionSystem};

const CANVAS: f64 = 512.0;
const STRIP: f64 = 48.0;

/// One `<polygon>` per cell in the plane, one `<rect>` per interval on the
/// line; `m^n` shape elements in total.
pub fn generation_svg(ifs: &IteratedFunctionSystem, n: usize) -> Result<String> {
    let d = ifs.ambient_dimension();
    if d != 1 && d != 2 {
        return Err(FmlError::InvalidGeometry(format!(
            "only 1- and 2-dimensional systems can be drawn, got {d}"
        )));
    }
    let cells = ifs.generation_geometry(n, &AxisBox::unit(d))?;
    let height = if d == 1 { STRIP } else { CANVAS };
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{height}" viewBox="0 0 {CANVAS} {height}">"#
    )
    .unwrap();
    for cell in &cells {
        svg.push_str(&shape(cell, d));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn shape(cell: &GenerationCell, d: usize) -> String {
    if d == 1 {
        let a = cell.vertices[0][0];
        let b = cell.vertices[1][0];
        let (lo, hi) = (a.min(b), a.max(b));
        return format!(
            "<rect data-word=\"{}\" x=\"{}\" y=\"0\" width=\"{}\" height=\"{STRIP}\" fill=\"black\"/>\n",
            cell.word,
            lo * CANVAS,
            (hi - lo) * CANVAS
        );
    }
    let points: Vec<String> = cell
        .vertices
        .iter()
        .map(|v| format!("{},{}", v[0] * CANVAS, (1.0 - v[1]) * CANVAS))
        .collect();
    format!(
        "<polygon data-word=\"{}\" points=\"{}\" fill=\"black\"/>\n",
        cell.word,
        points.join(" ")
    )
}
