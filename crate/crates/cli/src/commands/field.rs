use serde_json::json;
use toric_core::functionals::{f_functional, lambda_estimate_with_seed, stability_probe};
use toric_core::potential::{tensor_samples, write_tensor_csv};

use super::{config, load_polygon, load_potential, parse_point, with_config};
use crate::args::{FieldCmd, Global, StabilityCmd};
use crate::output::{Outcome, Sink};

pub const DEFAULT_GRID: usize = 65;
const PROBE_SEED: u64 = 7;
const LAMBDA_SEED: u64 = 11;

pub fn run(cmd: &FieldCmd, g: &Global, sink: &Sink) -> Outcome {
    let grid = g.grid.unwrap_or(DEFAULT_GRID);
    match cmd {
        FieldCmd::Abreu { input } => {
            let u = load_potential(input)?;
            let s = tensor_samples(&u.field, grid)?;
            let (mean, std) = s.abreu_stats();
            let values = s.abreu_values();
            let cfg = config("field abreu", json!({ "input": input, "grid": grid }));
            let value = json!({
                "nodes": s.nodes.len(),
                "mean": mean,
                "std": std,
                "min": values.iter().copied().fold(f64::INFINITY, f64::min),
                "max": values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                "A_target": u.data.as_ref().map(|d| d.a.as_affine().map(|a| a.coeffs())),
            });
            sink.json("abreu.json", &with_config(value, cfg))?;
            Ok(true)
        }
        FieldCmd::Curvature { input } => {
            let u = load_potential(input)?;
            let s = tensor_samples(&u.field, grid)?;
            let mut csv = Vec::new();
            write_tensor_csv(&s, None, &mut csv)?;
            let wrote = sink.file_only("curvature.csv", &csv)?;
            let cfg = config("field curvature", json!({ "input": input, "grid": grid }));
            let value = json!({
                "nodes": s.nodes.len(),
                "max_abs_F": s.max_abs_f(),
                "max_inverse_error": s.max_inverse_error(),
                "csv": wrote.then_some("curvature.csv"),
            });
            sink.json("curvature.json", &with_config(value, cfg))?;
            Ok(true)
        }
        FieldCmd::Energy { file } => {
            let d = load_polygon(file)?;
            let u = toric_core::potential::guillemin_potential(&d.polygon);
            let e = f_functional(&u, &d.a)?;
            let cfg = config("field energy", json!({ "input": file.display().to_string() }));
            sink.json("energy.json", &with_config(json!(e), cfg))?;
            Ok(true)
        }
    }
}

pub fn stability(cmd: &StabilityCmd, g: &Global, sink: &Sink) -> Outcome {
    match cmd {
        StabilityCmd::Probe { file, n } => {
            let d = load_polygon(file)?;
            let seed = g.seed.unwrap_or(PROBE_SEED);
            let r = stability_probe(&d.polygon, &d.a, *n, seed)?;
            let cfg = config(
                "stability probe",
                json!({ "input": file.display().to_string(), "n": n, "seed": seed }),
            );
            let mut value = json!(r);
            value["all_positive"] = json!(r.all_positive);
            sink.json("probe.json", &with_config(value, cfg))?;
            Ok(true)
        }
        StabilityCmd::Lambda { file, n, base } => {
            let d = load_polygon(file)?;
            let seed = g.seed.unwrap_or(LAMBDA_SEED);
            let base = match base {
                Some(b) => parse_point(b)?,
                None => d.polygon.centroid(),
            };
            let r = lambda_estimate_with_seed(&d.polygon, &d.a, &base, *n, seed)?;
            let cfg = config(
                "stability lambda",
                json!({ "input": file.display().to_string(), "n": n, "seed": seed, "base": [base.x, base.y] }),
            );
            sink.json("lambda.json", &with_config(json!(r), cfg))?;
            Ok(true)
        }
    }
}
