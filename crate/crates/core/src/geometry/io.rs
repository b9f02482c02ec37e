use std::io::{Read, Write};

use super::Point;
use crate::error::{Error, Result};

/// Reads one point per CSV row. Blank lines are skipped, `#` starts a comment
/// line, and every row must have the width of the first.
pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<Point>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut points = Vec::new();
    let mut width = None;
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::input(format!("csv row {}: {e}", row + 1)))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let coords = record
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    Error::input(format!("csv row {}: `{f}` is not a number", row + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(coords.len()),
            Some(w) if w != coords.len() => {
                return Err(Error::input(format!(
                    "csv row {} has {} columns, expected {w}",
                    row + 1,
                    coords.len()
                )))
            }
            _ => {}
        }
        points.push(
            Point::new(coords).map_err(|e| Error::input(format!("csv row {}: {e}", row + 1)))?,
        );
    }
    Ok(points)
}

pub fn write_points_csv<W: Write>(writer: W, points: &[Point]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for p in points {
        wtr.write_record(p.coords().iter().map(|c| format!("{c:?}")))
            .map_err(|e| Error::input(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a JSON array of coordinate arrays, all of one dimension.
pub fn read_points_json<R: Read>(reader: R) -> Result<Vec<Point>> {
    let points: Vec<Point> = serde_json::from_reader(reader)?;
    if let Some(first) = points.first() {
        if let Some(bad) = points.iter().position(|p| p.dim() != first.dim()) {
            return Err(Error::input(format!(
                "point {bad} has dimension {}, expected {}",
                points[bad].dim(),
                first.dim()
            )));
        }
    }
    Ok(points)
}

pub fn write_points_json<W: Write>(writer: W, points: &[Point]) -> Result<()> {
    serde_json::to_writer(writer, points).map_err(|e| Error::input(e.to_string()))
}
