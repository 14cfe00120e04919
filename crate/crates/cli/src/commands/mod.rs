mod field;
mod geom;
mod plot;
mod polygon;
mod solve;
mod verify;

use std::path::Path;

use serde_json::{json, Value};
use toric_core::polygon::{unique_affine_a, PolygonFile, ScalarField, WeightedPolygon};
use toric_core::potential::{guillemin_potential, half_plane_model, quarter_plane_model, PotentialField};
use toric_core::Point;

use crate::args::{Cli, Command};
use crate::output::{in_file, input_err, Failure, Outcome, Sink};

pub fn run(cli: &Cli) -> Outcome {
    let sink = Sink::new(&cli.global)?;
    let g = &cli.global;
    match &cli.command {
        Command::Polygon(c) => polygon::run(c, g, &sink),
        Command::Field(c) => field::run(c, g, &sink),
        Command::Stability(c) => field::stability(c, g, &sink),
        Command::Geom(c) => geom::run(c, g, &sink),
        Command::Solve { manifest } => solve::run(manifest, g, &sink),
        Command::Verify { check } => verify::run(*check, g, &sink),
        Command::Plot(c) => plot::run(c, g, &sink),
    }
}

/// A polygon file and its curvature target: the file's `A` when present,
/// otherwise the unique balancing affine function.
pub struct Loaded {
    pub polygon: WeightedPolygon,
    pub a: ScalarField,
}

pub fn load_polygon(path: &Path) -> Result<Loaded, Failure> {
    let file = PolygonFile::read(path).map_err(in_file(path))?;
    let polygon = file.polygon().map_err(in_file(path))?;
    let a = match file.field().map_err(in_file(path))? {
        Some(a) => a,
        None => ScalarField::affine(unique_affine_a(&polygon).map_err(in_file(path))?),
    };
    Ok(Loaded { polygon, a })
}

pub struct Potential {
    pub field: PotentialField,
    /// Present when the potential comes from a polygon file.
    pub data: Option<Loaded>,
}

const DEFAULT_EXTENT: f64 = 8.0;

/// Polygon file, or `quarter[:EXTENT]` / `half[:EXTENT]`.
pub fn load_potential(arg: &str) -> Result<Potential, Failure> {
    let (name, extent) = match arg.split_once(':') {
        Some((n, e)) => (n, Some(e)),
        None => (arg, None),
    };
    if name == "quarter" || name == "half" {
        let extent = match extent {
            Some(e) => e.parse::<f64>().map_err(|_| input_err(format!("bad extent in {arg:?}")))?,
            None => DEFAULT_EXTENT,
        };
        let field = if name == "quarter" { quarter_plane_model(extent)? } else { half_plane_model(extent)? };
        return Ok(Potential { field, data: None });
    }
    let data = load_polygon(Path::new(arg))?;
    Ok(Potential {
        field: guillemin_potential(&data.polygon),
        data: Some(data),
    })
}

pub fn parse_point(text: &str) -> Result<Point, Failure> {
    let v = parse_list(text)?;
    match v.as_slice() {
        [x, y] => Ok(Point::new(*x, *y)),
        _ => Err(input_err(format!("expected a point x,y, got {text:?}"))),
    }
}

pub fn parse_list(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            let v: f64 = s.trim().parse().map_err(|_| input_err(format!("not a number: {s:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(input_err(format!("not finite: {s:?}")))
            }
        })
        .collect()
}

/// The effective settings recorded in every artifact.
pub fn config(command: &str, settings: Value) -> Value {
    let mut c = json!({ "command": command, "version": env!("CARGO_PKG_VERSION") });
    if let (Value::Object(c), Value::Object(s)) = (&mut c, settings) {
        c.extend(s);
    }
    c
}

/// Adds `config` to a JSON object.
pub fn with_config(mut value: Value, config: Value) -> Value {
    if let Value::Object(m) = &mut value {
        m.insert("config".into(), config);
        value
    } else {
        json!({ "result": value, "config": config })
    }
}
