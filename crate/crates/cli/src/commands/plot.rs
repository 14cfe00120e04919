use std::fmt::Write as _;

use serde_json::json;
use toric_core::potential::{guillemin_potential, tensor_samples, write_tensor_csv, TensorSamples};

use super::field::DEFAULT_GRID;
use super::{config, load_polygon, load_potential};
use crate::args::{Global, Heat, PlotCmd};
use crate::output::{Outcome, Sink};

const SIZE: f64 = 480.0;

/// Blue through white to red on `t ∈ [0, 1]`.
fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let s = 2.0 * t;
        (s, s, 1.0)
    } else {
        let s = 2.0 * (1.0 - t);
        (1.0, s, s)
    };
    format!("#{:02x}{:02x}{:02x}", (r * 255.0) as u8, (g * 255.0) as u8, (b * 255.0) as u8)
}

fn heat_cells(svg: &mut String, s: &TensorSamples, heat: Heat, to_px: &impl Fn(f64, f64) -> (f64, f64), scale: f64) {
    let value = |n: &toric_core::potential::NodeSample| match heat {
        Heat::Abreu => n.curvature.abreu,
        Heat::Det => n.curvature.det,
        Heat::AbsF => n.curvature.abs_f,
    };
    let (lo, hi) = s
        .nodes
        .iter()
        .map(value)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let side = s.lattice.h * scale;
    for n in &s.nodes {
        let (x, y) = to_px(n.x.x - 0.5 * s.lattice.h, n.x.y + 0.5 * s.lattice.h);
        let _ = writeln!(
            svg,
            r#"  <rect x="{x:.3}" y="{y:.3}" width="{side:.3}" height="{side:.3}" fill="{}"/>"#,
            colour((value(n) - lo) / span)
        );
    }
}

pub fn run(cmd: &PlotCmd, g: &Global, sink: &Sink) -> Outcome {
    let grid = g.grid.unwrap_or(DEFAULT_GRID);
    match cmd {
        PlotCmd::PolygonSvg { file, heat } => {
            let d = load_polygon(file)?;
            let (lo, hi) = d.polygon.bounding_box();
            let extent = (hi - lo).x.max((hi - lo).y);
            let margin = 0.05 * extent;
            let scale = SIZE / (extent + 2.0 * margin);
            let to_px = |x: f64, y: f64| ((x - lo.x + margin) * scale, (hi.y + margin - y) * scale);
            let (w, h) = (((hi - lo).x + 2.0 * margin) * scale, ((hi - lo).y + 2.0 * margin) * scale);
            let cfg = config(
                "plot polygon-svg",
                json!({ "input": file.display().to_string(), "grid": grid, "heat": heat.map(|h| format!("{h:?}")) }),
            );
            let mut svg = format!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.3} {h:.3}\">\n"
            );
            let _ = writeln!(svg, "  <desc>{}</desc>", serde_json::to_string(&cfg).expect("config serializes").replace('<', "&lt;"));
            if let Some(heat) = heat {
                let s = tensor_samples(&guillemin_potential(&d.polygon), grid)?;
                heat_cells(&mut svg, &s, *heat, &to_px, scale);
            }
            let points: Vec<String> = d
                .polygon
                .vertices()
                .iter()
                .map(|v| {
                    let (x, y) = to_px(v.x, v.y);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            let _ = writeln!(
                svg,
                r#"  <polygon points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
                points.join(" ")
            );
            for i in 0..d.polygon.n_edges() {
                let m = d.polygon.edge_midpoint(i);
                let (x, y) = to_px(m.x, m.y);
                let _ = writeln!(
                    svg,
                    r#"  <text x="{x:.3}" y="{y:.3}" font-size="12" text-anchor="middle">{:.4}</text>"#,
                    d.polygon.weights()[i]
                );
            }
            svg.push_str("</svg>\n");
            sink.text("polygon.svg", &svg)?;
            Ok(true)
        }
        PlotCmd::FieldCsv { input } => {
            let u = load_potential(input)?;
            let s = tensor_samples(&u.field, grid)?;
            let mut csv = Vec::new();
            write_tensor_csv(&s, None, &mut csv)?;
            sink.text("field.csv", &String::from_utf8(csv).expect("csv output is utf-8"))?;
            Ok(true)
        }
    }
}
