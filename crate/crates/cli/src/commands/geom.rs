use serde_json::json;
use toric_core::geometry::{bound_suite_with, geodesic_distance, m_condition_scan, volume_growth, BoundSuiteOptions, ScanOptions, Source};
use toric_core::Point;

use super::field::DEFAULT_GRID;
use super::{config, load_potential, parse_list, parse_point, with_config};
use crate::args::{GeomCmd, Global};
use crate::output::{input_err, Outcome, Sink};

pub fn run(cmd: &GeomCmd, g: &Global, sink: &Sink) -> Outcome {
    match cmd {
        GeomCmd::Mcond { input, m, axis_only, sample_box } => {
            let u = load_potential(input)?;
            let mut opts = if *axis_only { ScanOptions::axis_only(33) } else { ScanOptions::default() };
            if let Some(n) = g.grid {
                opts.density = n;
            }
            if let Some(s) = g.seed {
                opts.seed = s;
            }
            opts.m = *m;
            if let Some(b) = sample_box {
                let v = parse_list(b)?;
                let [x0, y0, x1, y1] = v[..] else {
                    return Err(input_err(format!("--box needs x0,y0,x1,y1, got {b:?}")));
                };
                opts.sample_box = Some((Point::new(x0, y0), Point::new(x1, y1)));
            }
            let r = m_condition_scan(&u.field, &opts)?;
            let cfg = config("geom mcond", json!({ "input": input, "scan": opts }));
            sink.json("mcond.json", &with_config(json!(r), cfg))?;
            Ok(!r.violated)
        }
        GeomCmd::Geodist { input, from, edge, boundary, at } => {
            let u = load_potential(input)?;
            let grid = g.grid.unwrap_or(DEFAULT_GRID);
            let source = match (from, edge, boundary) {
                (Some(p), None, false) => Source::Point { at: parse_point(p)? },
                (None, Some(k), false) => Source::Edge { index: *k },
                (None, None, true) => Source::Boundary,
                _ => return Err(input_err("give exactly one of --from, --edge, --boundary")),
            };
            let points = at.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>, _>>()?;
            let d = geodesic_distance(&u.field, source.clone(), grid, &points)?;
            let cfg = config("geom geodist", json!({ "input": input, "grid": grid, "source": source }));
            let rows: Vec<_> = points
                .iter()
                .zip(&d)
                .map(|(p, d)| json!({ "at": [p.x, p.y], "distance": d }))
                .collect();
            sink.json("geodist.json", &with_config(json!({ "distances": rows }), cfg))?;
            Ok(true)
        }
        GeomCmd::Bounds { input, m } => {
            let u = load_potential(input)?;
            let mut opts = BoundSuiteOptions::default();
            if let Some(n) = g.grid {
                opts.grid = n;
            }
            let r = bound_suite_with(&u.field, *m, &opts)?;
            if sink.has_dir() {
                sink.file_only("bounds.jsonl", (r.to_json_lines() + "\n").as_bytes())?;
            }
            let cfg = config("geom bounds", json!({ "input": input, "m": m, "options": opts }));
            let value = json!({
                "m": r.m,
                "max_abs_F": r.max_abs_f,
                "passed": r.passed,
                "failed": r.failed,
                "skipped": r.skipped,
                "ok": r.ok(),
            });
            sink.json("bounds.json", &with_config(value, cfg))?;
            Ok(r.ok())
        }
        GeomCmd::Volume { input, tau } => {
            let u = load_potential(input)?;
            let taus = parse_list(tau)?;
            let grid = g.grid.unwrap_or(DEFAULT_GRID);
            let r = volume_growth(&u.field, &taus, grid)?;
            let cfg = config("geom volume", json!({ "input": input, "grid": grid, "tau": taus }));
            sink.json("volume.json", &with_config(json!(r), cfg))?;
            Ok(true)
        }
    }
}
