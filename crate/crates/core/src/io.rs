//! Point files: two-column `x,y` CSV, optional header, `#` comment lines,
//! LF or CRLF line endings.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{PcdError, Result};
use crate::geometry::Point2;

/// Parses points from any reader. A first row that does not parse as two
/// numbers is taken as a header.
pub fn parse_points<R: Read>(reader: R) -> Result<Vec<Point2>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 2 {
            return Err(PcdError::Parse(format!(
                "line {}: expected 2 columns, found {}",
                line_of(&rec, row),
                rec.len()
            )));
        }
        let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) => {
                let p = Point2::new(x, y);
                if !p.is_finite() {
                    return Err(PcdError::NonFinite(out.len()));
                }
                out.push(p);
            }
            _ if row == 0 => continue,
            _ => {
                return Err(PcdError::Parse(format!(
                    "line {}: cannot parse {:?},{:?} as numbers",
                    line_of(&rec, row),
                    &rec[0],
                    &rec[1]
                )))
            }
        }
    }
    Ok(out)
}

fn line_of(rec: &csv::StringRecord, row: usize) -> u64 {
    rec.position().map_or(row as u64 + 1, |p| p.line())
}

pub fn read_points(path: impl AsRef<Path>) -> Result<Vec<Point2>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| PcdError::Io(format!("{}: {e}", path.display())))?;
    parse_points(f)
}

/// Writes `x,y` rows preceded by `# key=value` comment lines.
pub fn write_points<W: Write>(w: W, points: &[Point2], comments: &[(String, String)]) -> Result<()> {
    let mut w = BufWriter::new(w);
    for (k, v) in comments {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "x,y")?;
    for p in points {
        writeln!(w, "{:?},{:?}", p.x, p.y)?;
    }
    w.flush()?;
    Ok(())
}
