use std::path::Path;

use serde_json::json;
use toric_core::potential::write_grid_csv;
use toric_core::solver::{run_manifest, SolveManifest, SolveOutcome, SolveState};

use super::{config, with_config};
use crate::args::Global;
use crate::output::{in_file, Outcome, Sink};

fn grid_csv(sink: &Sink, state: &SolveState) -> Result<bool, crate::output::Failure> {
    let mut csv = Vec::new();
    write_grid_csv(state.correction(), &mut csv)?;
    sink.file_only("grid.csv", &csv)
}

pub fn run(manifest: &Path, g: &Global, sink: &Sink) -> Outcome {
    let mut m = SolveManifest::read(manifest).map_err(in_file(manifest))?;
    if let Some(n) = g.grid {
        m.grid = n;
    }
    if let Some(t) = g.tol {
        m.tol = Some(t);
    }
    let opts = m.options();
    let base = manifest.parent().unwrap_or(Path::new("."));
    let cfg = config("solve", json!({ "manifest": m, "options": opts }));
    match run_manifest(&m, base).map_err(in_file(manifest))? {
        SolveOutcome::Single(state) => {
            let converged = state.max_residual() <= opts.tol;
            let wrote = grid_csv(sink, &state)?;
            let mut value = json!(state.diagnostics());
            value["converged"] = json!(converged);
            value["grid_csv"] = json!(wrote.then_some("grid.csv"));
            sink.json("diagnostics.json", &with_config(value, cfg))?;
            Ok(converged)
        }
        SolveOutcome::Path { path, run } => {
            let last = run.states.last();
            let converged = run.completed && last.is_some_and(|s| s.max_residual() <= opts.tol);
            let wrote = match last {
                Some(s) => grid_csv(sink, s)?,
                None => false,
            };
            let mut value = run.to_json(&path);
            value["converged"] = json!(converged);
            value["grid_csv"] = json!(wrote.then_some("grid.csv"));
            sink.json("diagnostics.json", &with_config(value, cfg))?;
            Ok(converged)
        }
    }
}
