//! Built-in fixtures for the identity checks.

use nalgebra::Matrix2;
use serde_json::{json, Value};
use toric_core::analysis::{
    det_bounds, f_harmonic_check, flux_balance, flux_identity, lemma14_ratio, lemma17_identity, lemma18_check,
    theorem2_evidence, IdentityReport, LEMMA17_FLAT_RATIO,
};
use toric_core::polygon::WeightedPolygon;
use toric_core::potential::{guillemin_potential, half_plane_model, quarter_plane_model, AnalyticPotential, Domain, PotentialField};
use toric_core::{Affine, Error, Point};

use super::config;
use crate::args::{Check, Global};
use crate::output::{Failure, Outcome, Sink};

const HARMONIC_GRID: usize = 33;
const LEMMA18_SAMPLES: usize = 201;

fn line(r: &IdentityReport) -> Value {
    serde_json::to_value(r).expect("reports serialize")
}

fn square(lo: f64, hi: f64) -> Vec<Point> {
    vec![Point::new(lo, lo), Point::new(hi, lo), Point::new(hi, hi), Point::new(lo, hi)]
}

fn lemma14() -> Result<Vec<Value>, Error> {
    let u = quarter_plane_model(8.0)?;
    Ok(vec![line(&lemma14_ratio(&u, &Point::new(2.0, 2.0), 1.0, 1.0)?)])
}

fn lemma17() -> Result<Vec<Value>, Error> {
    let u = quarter_plane_model(8.0)?;
    Ok(lemma17_identity(&u, &[1.0, 2.0, 4.0, 8.0])?
        .iter()
        .map(|r| {
            let mut v = line(r);
            v["pass"] = json!(r.pass && (r.ratio - LEMMA17_FLAT_RATIO).abs() <= 1e-8);
            v
        })
        .collect())
}

fn lemma18() -> Result<Vec<Value>, Error> {
    let n = LEMMA18_SAMPLES;
    let sampled = |r: f64, f: fn(f64) -> f64| -> Vec<f64> { (0..n).map(|i| f(r * i as f64 / (n - 1) as f64)).collect() };
    let mut out = vec![
        line(&lemma18_check(&vec![1.0; n], &vec![0.0; n], 1.0, 0.0)?),
        line(&lemma18_check(&sampled(1.0, f64::exp), &vec![1.0; n], 1.0, 1.0)?),
    ];
    let rejected = match lemma18_check(&sampled(3.0, f64::exp), &vec![1.0; n], 3.0, 0.0) {
        Err(Error::Precondition(m)) if m.contains("hypothesis unmet") => Some(m),
        _ => None,
    };
    out.push(json!({
        "name": "lemma18_rejects",
        "pass": rejected.is_some(),
        "note": rejected,
    }));
    Ok(out)
}

fn flux() -> Result<Vec<Value>, Error> {
    let u = quarter_plane_model(8.0)?;
    let sq = WeightedPolygon::with_unit_weights(square(0.0, 1.0))?;
    Ok(vec![
        line(&flux_identity(&u, 1.0)?),
        line(&flux_identity(&u, 4.0)?),
        line(&flux_balance(&guillemin_potential(&sq), &square(0.2, 0.8))?),
    ])
}

fn harmonic(grid: usize) -> Result<Vec<Value>, Error> {
    Ok(vec![
        line(&f_harmonic_check(&quarter_plane_model(4.0)?, grid)?),
        line(&f_harmonic_check(&half_plane_model(4.0)?, grid)?),
    ])
}

fn detbounds() -> Result<Vec<Value>, Error> {
    let sq = WeightedPolygon::with_unit_weights(square(-2.0, 2.0))?;
    let quadratic = PotentialField::new(
        Domain::Polygon(sq),
        AnalyticPotential::from_terms(vec![]).with_quadratic(Matrix2::identity()),
    );
    let mut flat = quarter_plane_model(4.0)?;
    flat.analytic = flat.analytic.with_linear(Affine::new(0.0, -1.0, -1.0));
    Ok(vec![
        line(&det_bounds(&quadratic, &Point::new(0.0, 0.0), 1.0)?),
        line(&det_bounds(&flat, &Point::new(1.0, 1.0), 0.5)?),
    ])
}

fn thm2() -> Result<Vec<Value>, Error> {
    Ok(vec![line(&theorem2_evidence()?)])
}

pub fn run(check: Check, g: &Global, sink: &Sink) -> Outcome {
    let grid = g.grid.unwrap_or(HARMONIC_GRID);
    let all = check == Check::All;
    let mut lines = Vec::new();
    let mut run_one = |c: Check, f: &dyn Fn() -> Result<Vec<Value>, Error>| -> Result<(), Failure> {
        if all || check == c {
            lines.extend(f()?);
        }
        Ok(())
    };
    run_one(Check::Lemma14, &lemma14)?;
    run_one(Check::Lemma17, &lemma17)?;
    run_one(Check::Lemma18, &lemma18)?;
    run_one(Check::Flux, &flux)?;
    run_one(Check::Harmonic, &|| harmonic(grid))?;
    run_one(Check::Detbounds, &detbounds)?;
    run_one(Check::Thm2, &thm2)?;

    let passed = lines.iter().filter(|l| l["pass"] == json!(true)).count();
    let failed = lines.len() - passed;
    let name = format!("{check:?}").to_lowercase();
    let summary = json!({
        "suite": name,
        "passed": passed,
        "failed": failed,
        "config": config(&format!("verify {name}"), json!({ "harmonic_grid": grid })),
    });
    let mut text = String::new();
    for l in lines.iter().chain([&summary]) {
        text.push_str(&serde_json::to_string(l).expect("json values serialize"));
        text.push('\n');
    }
    sink.text("verify.jsonl", &text)?;
    Ok(failed == 0)
}
