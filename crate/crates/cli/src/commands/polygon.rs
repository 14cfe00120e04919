use std::path::Path;

use serde_json::json;
use toric_core::polygon::{
    balance_report, canonical_weights, continuity_path, corner_cut, mu_invariant, rebalance, rescale_polygon,
    unique_affine_a, PolygonFile, ScalarField, ScalarFieldSpec, WeightedPolygon,
};

use super::{config, load_polygon, with_config};
use crate::args::{Global, PolygonCmd};
use crate::output::{in_file, Outcome, Sink};

const BALANCE_TOL: f64 = 1e-8;

fn polygon_out(sink: &Sink, name: &str, p: &WeightedPolygon, a: Option<&ScalarField>, cfg: serde_json::Value) -> Outcome {
    let mut file = PolygonFile::from_polygon(p, a);
    file.config = Some(cfg);
    sink.text(name, &(file.to_json() + "\n"))?;
    Ok(true)
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

pub fn run(cmd: &PolygonCmd, g: &Global, sink: &Sink) -> Outcome {
    match cmd {
        PolygonCmd::Canon { file } => {
            let f = PolygonFile::read(file).map_err(in_file(file))?;
            let p = canonical_weights(f.points()).map_err(in_file(file))?;
            let cfg = config("polygon canon", json!({ "input": path_str(file) }));
            polygon_out(sink, "canon.json", &p, Some(&ScalarField::constant(1.0)), cfg)
        }
        PolygonCmd::Balance { file } => {
            let d = load_polygon(file)?;
            let r = balance_report(&d.polygon, &d.a);
            let tol = g.tol.unwrap_or(BALANCE_TOL);
            let balanced = r.max_residual() <= tol * (1.0 + r.boundary_mass.abs());
            let affine = unique_affine_a(&d.polygon).ok();
            let cfg = config(
                "polygon balance",
                json!({ "input": path_str(file), "tol": tol, "A": ScalarFieldSpec::from_field(&d.a) }),
            );
            let value = json!({
                "report": r,
                "max_residual": r.max_residual(),
                "balanced": balanced,
                "balancing_affine_A": affine.map(|a| a.coeffs()),
            });
            sink.json("balance.json", &with_config(value, cfg))?;
            Ok(balanced)
        }
        PolygonCmd::Mu { file } => {
            let d = load_polygon(file)?;
            let cfg = config("polygon mu", json!({ "input": path_str(file) }));
            sink.json("mu.json", &with_config(json!({ "mu": mu_invariant(&d.polygon) }), cfg))?;
            Ok(true)
        }
        PolygonCmd::Cut { file, vertex, eps } => {
            let d = load_polygon(file)?;
            let p = corner_cut(&d.polygon, *vertex, *eps)?;
            let a = ScalarField::affine(unique_affine_a(&p)?);
            let cfg = config("polygon cut", json!({ "input": path_str(file), "vertex": vertex, "eps": eps }));
            polygon_out(sink, "cut.json", &p, Some(&a), cfg)
        }
        PolygonCmd::Rebalance { file, first, second } => {
            let d = load_polygon(file)?;
            let r = rebalance(&d.polygon, *first, *second)?;
            let p = r.polygon();
            let a = ScalarField::affine(unique_affine_a(p)?);
            let cfg = config(
                "polygon rebalance",
                json!({ "input": path_str(file), "first": first, "second": second, "scales": r.scales,
                        "iterations": r.iterations, "residual": r.residual }),
            );
            polygon_out(sink, "rebalanced.json", p, Some(&a), cfg)
        }
        PolygonCmd::Rescale { file, factor } => {
            let d = load_polygon(file)?;
            let p = rescale_polygon(&d.polygon, *factor)?;
            let cfg = config("polygon rescale", json!({ "input": path_str(file), "factor": factor }));
            polygon_out(sink, "rescaled.json", &p, Some(&d.a.rescaled(*factor)), cfg)
        }
        PolygonCmd::Path { from, to, samples } => {
            let (a, b) = (load_polygon(from)?, load_polygon(to)?);
            let path = continuity_path(&a.polygon, &a.a, &b.polygon, &b.a, *samples)?;
            let cfg = config(
                "polygon path",
                json!({ "from": path_str(from), "to": path_str(to), "samples": samples }),
            );
            sink.json("path.json", &with_config(path.to_json(), cfg))?;
            Ok(true)
        }
    }
}
