//! Grid CSV files: a lattice header, then one record per node.
//!
//! ```text
//! nx,ny,x0,y0,h
//! 33,33,0.0e0,0.0e0,3.125e-2
//! i,j,x,y,f
//! 2,2,6.25e-2,6.25e-2,-1.2e-3
//! ```

use std::io::{Read, Write};

use super::{Correction, Lattice, TensorSamples};
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridRecord {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub f: f64,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn header<W: Write>(w: &mut csv::Writer<W>, lat: &Lattice, columns: &[&str]) -> Result<()> {
    w.write_record(["nx", "ny", "x0", "y0", "h"])?;
    w.write_record([
        lat.nx.to_string(),
        lat.ny.to_string(),
        num(lat.origin.x),
        num(lat.origin.y),
        num(lat.h),
    ])?;
    w.write_record(columns)?;
    Ok(())
}

/// Writes the kept correction values.
pub fn write_grid_csv<W: Write>(c: &Correction, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let lat = c.lattice();
    header(&mut w, lat, &["i", "j", "x", "y", "f"])?;
    for k in c.kept_indices() {
        let (i, j) = lat.coords(k);
        let p = lat.point(k);
        w.write_record([i.to_string(), j.to_string(), num(p.x), num(p.y), num(c.value_at_node(k))])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes per-node tensor reductions; `f` is taken from `correction` when
/// given and is zero otherwise.
pub fn write_tensor_csv<W: Write>(s: &TensorSamples, correction: Option<&Correction>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    header(
        &mut w,
        &s.lattice,
        &["i", "j", "x", "y", "f", "u11", "u12", "u22", "det", "absF", "abreu"],
    )?;
    for n in &s.nodes {
        let (i, j) = s.lattice.coords(n.node);
        let c = &n.curvature;
        let f = correction.map_or(0.0, |c| c.value_at_node(n.node));
        w.write_record([
            i.to_string(),
            j.to_string(),
            num(n.x.x),
            num(n.x.y),
            num(f),
            num(c.hess[(0, 0)]),
            num(c.hess[(0, 1)]),
            num(c.hess[(1, 1)]),
            num(c.det),
            num(c.abs_f),
            num(c.abreu),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    rec.get(idx)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Format(format!("line {line}: field {} is missing or malformed", idx + 1)))
}

/// Reads a grid file back into its lattice and node records.
pub fn read_grid_csv<R: Read>(input: R) -> Result<(Lattice, Vec<GridRecord>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let rows: Vec<csv::StringRecord> = r.records().collect::<std::result::Result<_, _>>()?;
    if rows.len() < 3 {
        return Err(Error::Format("grid file needs a header, a lattice line and a column line".into()));
    }
    let lattice = Lattice {
        nx: parse(&rows[1], 0, 2)?,
        ny: parse(&rows[1], 1, 2)?,
        origin: Point::new(parse(&rows[1], 2, 2)?, parse(&rows[1], 3, 2)?),
        h: parse(&rows[1], 4, 2)?,
    };
    let mut records = Vec::with_capacity(rows.len() - 3);
    for (n, rec) in rows.iter().enumerate().skip(3) {
        let line = n + 1;
        let record = GridRecord {
            i: parse(rec, 0, line)?,
            j: parse(rec, 1, line)?,
            x: parse(rec, 2, line)?,
            y: parse(rec, 3, line)?,
            f: parse(rec, 4, line)?,
        };
        if record.i >= lattice.nx || record.j >= lattice.ny || !record.f.is_finite() {
            return Err(Error::Format(format!("line {line}: node outside the lattice or non-finite value")));
        }
        records.push(record);
    }
    Ok((lattice, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::WeightedPolygon;
    use crate::potential::{guillemin_potential, tensor_samples};

    #[test]
    fn grid_round_trip() {
        let p = WeightedPolygon::with_unit_weights(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let u = guillemin_potential(&p);
        let mut c = u.empty_correction(9).unwrap();
        c.set_kept_values(|_, x| (x.x * 3.0).sin() * x.y);
        let mut buf = Vec::new();
        write_grid_csv(&c, &mut buf).unwrap();
        let (lat, recs) = read_grid_csv(buf.as_slice()).unwrap();
        assert_eq!(lat, *c.lattice());
        assert_eq!(recs.len(), c.kept_indices().len());
        for r in recs {
            assert_eq!(r.f, c.value_at_node(lat.index(r.i, r.j)));
        }
        let s = tensor_samples(&u, 9).unwrap();
        let mut buf = Vec::new();
        write_tensor_csv(&s, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(2).unwrap().ends_with("det,absF,abreu"));
    }

    #[test]
    fn malformed_lines_are_reported() {
        let text = "nx,ny,x0,y0,h\n3,3,0,0,0.5\ni,j,x,y,f\n1,1,0.5,0.5,abc\n";
        let err = read_grid_csv(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }
}
