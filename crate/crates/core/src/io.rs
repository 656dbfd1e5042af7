//! Graph files (JSON), field and report files (CSV), plot data.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fields::{FieldRole, ScalarField};
use crate::metric::{build_graph, ChordInput, DistanceSource, GraphSpec, MetricGraph};
use crate::slope::CheckReport;
use crate::solver::ValueFunction;
use crate::verify::SuiteReport;

pub fn read_graph(path: &Path) -> Result<MetricGraph> {
    let spec: GraphSpec = serde_json::from_reader(BufReader::new(File::open(path)?))
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    build_graph(&spec)
}

pub fn write_graph(g: &MetricGraph, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &g.to_spec())?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Reads `vertex_id,value` rows. The value column is `value` or `u` when
/// present in the header, otherwise the second column.
pub fn read_field(path: &Path, g: &MetricGraph, role: FieldRole) -> Result<ScalarField> {
    let file = File::open(path)?;
    read_field_from(file, g, role).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn read_field_from<R: std::io::Read>(reader: R, g: &MetricGraph, role: FieldRole) -> Result<ScalarField> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::Parse("expected a header like \"vertex_id,value\"".into()));
    }
    let column = headers
        .iter()
        .position(|h| h == "value" || h == "u")
        .unwrap_or(1);
    let mut values = vec![None; g.len()];
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let id = record
            .get(0)
            .ok_or_else(|| Error::Parse(format!("line {line}: missing vertex_id")))?;
        let v = g
            .vertex(id)
            .map_err(|_| Error::Parse(format!("line {line}: unknown vertex {id:?}")))?;
        let raw = record
            .get(column)
            .ok_or_else(|| Error::Parse(format!("line {line}: missing value")))?;
        let x: f64 = raw
            .parse()
            .map_err(|_| Error::Parse(format!("line {line}: value {raw:?} is not a number")))?;
        if values[v].replace(x).is_some() {
            return Err(Error::Parse(format!("line {line}: duplicate vertex {id:?}")));
        }
    }
    Ok(ScalarField::from_options(role, values))
}

pub fn write_field(g: &MetricGraph, field: &ScalarField, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["vertex_id", "value"])?;
    for v in 0..g.len() {
        if let Some(x) = field.get(v) {
            w.write_record([g.id(v), &x.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `vertex_id,u,exit_vertex,attained`; `attained` is empty at interior vertices.
pub fn write_solution(g: &MetricGraph, vf: &ValueFunction, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["vertex_id", "u", "exit_vertex", "attained"])?;
    for v in 0..g.len() {
        let attained = match vf.attained[v] {
            Some(true) => "true",
            Some(false) => "false",
            None => "",
        };
        w.write_record([g.id(v), &vf.value(v).to_string(), g.id(vf.exit[v]), attained])?;
    }
    w.flush()?;
    Ok(())
}

/// `item_id,residual,verdict`.
pub fn write_report<W: Write>(report: &CheckReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["item_id", "residual", "verdict"])?;
    for item in &report.items {
        w.write_record([item.id.as_str(), &item.residual.to_string(), &item.verdict.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `fixture,level,check,max_residual,tol,verdict`.
pub fn write_suite_report<W: Write>(report: &SuiteReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["fixture", "level", "check", "max_residual", "tol", "verdict"])?;
    for row in &report.rows {
        w.write_record([
            row.fixture.as_str(),
            &row.level.to_string(),
            &row.check,
            &row.max_residual.to_string(),
            &row.tol.to_string(),
            if row.pass { "pass" } else { "fail" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Plot data `vertex_id,x,y,u`, rows ordered by vertex id. Coordinate
/// columns follow the embedding dimension (at most two) and are dropped when
/// the graph has no coordinates; `layout` makes coordinates mandatory.
pub fn write_plot_data<W: Write>(g: &MetricGraph, u: &ScalarField, layout: bool, out: W) -> Result<()> {
    let dim = if g.has_coords() {
        (0..g.len()).map(|v| g.coords(v).map_or(0, <[f64]>::len)).min().unwrap_or(0).min(2)
    } else {
        0
    };
    if layout && dim == 0 {
        return Err(Error::Validation("plot layout requested but the graph has no coordinates".into()));
    }
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| g.id(a).cmp(g.id(b)));

    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["vertex_id"];
    header.extend(["x", "y"].iter().take(dim));
    header.push("u");
    w.write_record(&header)?;
    for v in order {
        let mut row = vec![g.id(v).to_string()];
        if let Some(c) = g.coords(v) {
            row.extend(c.iter().take(dim).map(f64::to_string));
        }
        row.push(u.get(v).map(|x| x.to_string()).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct PointSpec {
    id: String,
    #[serde(default)]
    coords: Option<Vec<f64>>,
}

/// Input of `induce-metric`: points, adjacency, and an optional distance
/// table (Euclidean distances between coordinates otherwise).
#[derive(Debug, Deserialize)]
struct ChordFile {
    points: Vec<PointSpec>,
    adjacency: Vec<(String, String)>,
    #[serde(default)]
    distances: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    boundary: Vec<String>,
}

pub fn read_chord_input(path: &Path) -> Result<ChordInput> {
    let file: ChordFile = serde_json::from_reader(BufReader::new(File::open(path)?))
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let ids: Vec<String> = file.points.iter().map(|p| p.id.clone()).collect();
    let position = |id: &str| -> Result<usize> {
        ids.iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    };
    let adjacency = file
        .adjacency
        .iter()
        .map(|(a, b)| Ok((position(a)?, position(b)?)))
        .collect::<Result<Vec<_>>>()?;
    let coords = if file.points.iter().all(|p| p.coords.is_some()) {
        Some(file.points.iter().map(|p| p.coords.clone().unwrap()).collect())
    } else {
        None
    };
    let distance = match file.distances {
        Some(t) => DistanceSource::Table(t),
        None if coords.is_some() => DistanceSource::Euclidean,
        None => return Err(Error::Parse("points need coords or a distance table".into())),
    };
    Ok(ChordInput {
        ids,
        coords,
        distance,
        adjacency,
        boundary: file.boundary,
    })
}
