// Copyright 2026 The colocate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! CSV and JSON readers and writers.
//!
//! Feature CSV: `id,feature,shape_type,coords,amount[,radius]`, with coords
//! written `x y;x y;...` and shape_type one of `point`, `line`, `polygon`.
//! Empty `amount` / `radius` cells mean "absent".

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Terminator, WriterBuilder};
use serde::Serialize;

use crate::geom::{Point2D, Shape, SpatialObject};
use crate::nullmodels::PlacementRegion;
use crate::significance::MiningReport;
use crate::transact::TransactionSet;
use crate::windfield::WindStation;
use crate::{Error, Result};

const DATASET_HEADER: [&str; 6] = ["id", "feature", "shape_type", "coords", "amount", "radius"];

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_owned(), line: line as usize, message: message.into() }
}

/// Column positions by name; errors on a missing required column.
struct Columns {
    idx: Vec<Option<usize>>,
}

impl Columns {
    fn new(path: &Path, header: &StringRecord, names: &[&str], required: usize) -> Result<Self> {
        let idx: Vec<Option<usize>> =
            names.iter().map(|n| header.iter().position(|h| h.trim().eq_ignore_ascii_case(n))).collect();
        if let Some(missing) = (0..required).find(|&i| idx[i].is_none()) {
            return Err(parse_err(path, 1, format!("missing header column {:?}", names[missing])));
        }
        Ok(Columns { idx })
    }

    fn get<'r>(&self, rec: &'r StringRecord, i: usize) -> &'r str {
        self.idx[i].and_then(|j| rec.get(j)).map_or("", str::trim)
    }
}

fn parse_f64(s: &str, what: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("bad {what} {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite {what} {s:?}"))
    }
}

fn parse_optional(s: &str, what: &str) -> std::result::Result<Option<f64>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(s, what).map(Some)
    }
}

/// Parses `x y;x y;...`.
pub fn parse_coords(s: &str) -> std::result::Result<Vec<Point2D>, String> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let mut it = pair.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(x), Some(y), None) => Ok(Point2D::new(parse_f64(x, "x")?, parse_f64(y, "y")?)),
                _ => Err(format!("bad coordinate pair {pair:?}")),
            }
        })
        .collect()
}

pub fn format_coords(points: &[Point2D]) -> String {
    points.iter().map(|p| format!("{} {}", p.x, p.y)).collect::<Vec<_>>().join(";")
}

fn ring(mut v: Vec<Point2D>) -> Vec<Point2D> {
    if v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    v
}

fn shape_from(kind: &str, coords: Vec<Point2D>) -> std::result::Result<Shape, String> {
    match kind.to_ascii_lowercase().as_str() {
        "point" => match coords.as_slice() {
            [p] => Ok(Shape::Point(*p)),
            _ => Err(format!("point needs exactly one coordinate, got {}", coords.len())),
        },
        "line" | "polyline" => Ok(Shape::Polyline(coords)),
        "polygon" => Ok(Shape::Polygon(ring(coords))),
        other => Err(format!("unknown shape_type {other:?}")),
    }
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    ReaderBuilder::new().flexible(true).has_headers(false).trim(csv::Trim::All).from_reader(r)
}

/// Reads records after the header, handing each one with its line number
/// to `row`. An empty input, or one without a header, is an error.
fn read_rows<R: Read, T>(
    path: &Path,
    reader: R,
    names: &[&str],
    required: usize,
    mut row: impl FnMut(&Columns, &StringRecord, u64) -> std::result::Result<T, String>,
) -> Result<Vec<T>> {
    let mut rdr = csv_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(parse_err(path, 1, "missing header")),
    };
    let cols = Columns::new(path, &header, names, required)?;
    let mut out = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push(row(&cols, &rec, line).map_err(|m| parse_err(path, line, m))?);
    }
    Ok(out)
}

/// Parses a feature CSV. `path` labels error messages.
pub fn parse_dataset<R: Read>(path: &Path, reader: R) -> Result<Vec<SpatialObject>> {
    let mut seen = HashSet::new();
    read_rows(path, reader, &DATASET_HEADER, 5, |cols, rec, _| {
        let id = cols.get(rec, 0);
        if id.is_empty() {
            return Err("empty id".into());
        }
        if !seen.insert(id.to_owned()) {
            return Err(format!("duplicate id {id:?}"));
        }
        let feature = cols.get(rec, 1);
        if feature.is_empty() {
            return Err("empty feature".into());
        }
        let shape = shape_from(cols.get(rec, 2), parse_coords(cols.get(rec, 3))?)?;
        let obj = SpatialObject {
            id: id.to_owned(),
            feature: feature.to_owned(),
            shape,
            amount: parse_optional(cols.get(rec, 4), "amount")?,
            fixed_radius: parse_optional(cols.get(rec, 5), "radius")?,
        };
        obj.validate().map_err(|e| match e {
            Error::Validation(m) => m,
            other => other.to_string(),
        })?;
        Ok(obj)
    })
}

pub fn read_dataset(path: &Path) -> Result<Vec<SpatialObject>> {
    parse_dataset(path, open(path)?)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(w)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn serialize_dataset<W: Write>(w: W, dataset: &[SpatialObject]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(DATASET_HEADER)?;
    for o in dataset {
        wtr.write_record([
            o.id.clone(),
            o.feature.clone(),
            o.shape.kind().to_owned(),
            format_coords(o.shape.vertices()),
            opt(o.amount),
            opt(o.fixed_radius),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<dataset>", e))?;
    Ok(())
}

pub fn write_dataset(path: &Path, dataset: &[SpatialObject]) -> Result<()> {
    serialize_dataset(create(path)?, dataset)
}

/// Station CSV: `station_id,x,y,speed,direction`.
pub fn read_stations(path: &Path) -> Result<Vec<WindStation>> {
    parse_stations(path, open(path)?)
}

pub fn parse_stations<R: Read>(path: &Path, reader: R) -> Result<Vec<WindStation>> {
    let names = ["station_id", "x", "y", "speed", "direction"];
    read_rows(path, reader, &names, 5, |cols, rec, _| {
        let s = WindStation {
            id: cols.get(rec, 0).to_owned(),
            location: Point2D::new(parse_f64(cols.get(rec, 1), "x")?, parse_f64(cols.get(rec, 2), "y")?),
            speed: parse_f64(cols.get(rec, 3), "speed")?,
            direction: parse_f64(cols.get(rec, 4), "direction")?,
        };
        s.validate().map_err(|e| e.to_string())?;
        Ok(s)
    })
}

/// Region CSV: `region_id,stratum,weight,coords` with a polygon ring.
pub fn read_regions(path: &Path) -> Result<Vec<PlacementRegion>> {
    parse_regions(path, open(path)?)
}

pub fn parse_regions<R: Read>(path: &Path, reader: R) -> Result<Vec<PlacementRegion>> {
    let names = ["region_id", "stratum", "weight", "coords"];
    read_rows(path, reader, &names, 4, |cols, rec, _| {
        let weight = parse_f64(cols.get(rec, 2), "weight")?;
        if weight < 0.0 {
            return Err(format!("negative weight {weight}"));
        }
        let ring = ring(parse_coords(cols.get(rec, 3))?);
        Shape::Polygon(ring.clone()).validate().map_err(|e| e.to_string())?;
        Ok(PlacementRegion { id: cols.get(rec, 0).to_owned(), stratum: cols.get(rec, 1).to_owned(), weight, ring })
    })
}

/// One row per (grid point, feature): `gx,gy,feature,probability`.
pub fn serialize_transactions<W: Write>(w: W, ts: &TransactionSet) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["gx", "gy", "feature", "probability"])?;
    for t in &ts.transactions {
        for &(f, p) in &t.entries {
            wtr.write_record([
                t.grid_point.x.to_string(),
                t.grid_point.y.to_string(),
                ts.features[f as usize].clone(),
                p.to_string(),
            ])?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<transactions>", e))?;
    Ok(())
}

pub fn write_transactions(path: &Path, ts: &TransactionSet) -> Result<()> {
    serialize_transactions(create(path)?, ts)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// `rule,expsup,expconf,p_value`; `expconf` is empty for patterns.
pub fn serialize_report_csv<W: Write>(w: W, report: &MiningReport) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["rule", "expsup", "expconf", "p_value"])?;
    for s in &report.significant {
        wtr.write_record([s.label.clone(), s.expsup.to_string(), opt(s.expconf), s.p_value.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::io("<report>", e))?;
    Ok(())
}

pub fn write_report_csv(path: &Path, report: &MiningReport) -> Result<()> {
    serialize_report_csv(create(path)?, report)
}

/// `run,survivors`.
pub fn write_survivors_csv(path: &Path, report: &MiningReport) -> Result<()> {
    let mut wtr = writer(create(path)?);
    wtr.write_record(["run", "survivors"])?;
    for (i, n) in report.survivors_per_run.iter().enumerate() {
        wtr.write_record([(i + 1).to_string(), n.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

/// `run,seconds`.
pub fn write_timings_csv(path: &Path, report: &MiningReport) -> Result<()> {
    let mut wtr = writer(create(path)?);
    wtr.write_record(["run", "seconds"])?;
    for (i, s) in report.run_seconds.iter().enumerate() {
        wtr.write_record([(i + 1).to_string(), format!("{s:.6}")])?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

/// Writes `header` then `rows` as a CSV file.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut wtr = writer(create(path)?);
    wtr.write_record(header)?;
    for r in rows {
        wtr.write_record(r)?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Vec<SpatialObject>> {
        parse_dataset(Path::new("t.csv"), s.as_bytes())
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn point_row() {
        let d = parse("id,feature,shape_type,coords,amount\np1,BENZENE,point,3.0 4.0,1000\n").unwrap();
        assert_eq!(d, vec![SpatialObject::point("p1", "BENZENE", Point2D::new(3.0, 4.0)).with_amount(1000.0)]);
    }

    #[test]
    fn short_polygon_is_rejected_with_line() {
        let e = parse("id,feature,shape_type,coords,amount\np1,A,point,0 0,1\nq,B,polygon,0 0;1 1,\n").unwrap_err();
        assert_eq!(line_of(e), 3);
    }

    #[test]
    fn empty_after_header() {
        assert!(parse("id,feature,shape_type,coords,amount\n").unwrap().is_empty());
    }

    #[test]
    fn header_errors() {
        assert_eq!(line_of(parse("").unwrap_err()), 1);
        assert_eq!(line_of(parse("id,feature,coords,amount\n").unwrap_err()), 1);
    }

    #[test]
    fn bad_rows() {
        let h = "id,feature,shape_type,coords,amount\n";
        for row in [
            "p,A,point,1 x,",
            "p,A,point,1 2,-5",
            "p,A,circle,1 2,",
            "p,A,point,1 2;3 4,",
            "p,A,line,1 2,",
            "p,A,point,1 2 3,",
            ",A,point,1 2,",
        ] {
            assert_eq!(line_of(parse(&format!("{h}{row}\n")).unwrap_err()), 2, "{row}");
        }
        assert_eq!(line_of(parse(&format!("{h}p,A,point,1 2,\np,B,point,1 2,\n")).unwrap_err()), 3);
    }

    #[test]
    fn closed_rings_and_radius() {
        let d = parse("id,feature,shape_type,coords,amount,radius\nr,A,polygon,0 0;2 0;2 2;0 0,,1.5\n").unwrap();
        assert_eq!(d[0].shape.vertices().len(), 3);
        assert_eq!(d[0].fixed_radius, Some(1.5));
        assert_eq!(d[0].amount, None);
    }

    #[test]
    fn write_then_read() {
        let d = vec![
            SpatialObject::point("a", "X", Point2D::new(0.1, -2.5e-7)).with_amount(12.25),
            SpatialObject::new("b", "Y", Shape::Polyline(vec![Point2D::new(0.0, 0.0), Point2D::new(1.0, 1.0 / 3.0)]))
                .with_radius(2.0),
        ];
        let mut buf = Vec::new();
        serialize_dataset(&mut buf, &d).unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), d);
        assert!(!buf.contains(&b'\r'));
    }

    #[test]
    fn stations_and_regions() {
        let s = parse_stations(Path::new("s"), "station_id,x,y,speed,direction\nw1,0,0,10,90\n".as_bytes()).unwrap();
        assert_eq!(s[0].speed, 10.0);
        let r = parse_regions(Path::new("r"), "region_id,stratum,weight,coords\nu,urban,2,0 0;1 0;1 1\n".as_bytes())
            .unwrap();
        assert_eq!(r[0].ring.len(), 3);
        assert!(parse_regions(Path::new("r"), "region_id,stratum,weight,coords\nu,urban,-1,0 0;1 0;1 1\n".as_bytes())
            .is_err());
    }
}
