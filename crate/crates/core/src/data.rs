//! CSV datasets and synthetic isotropic Gaussian data.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, DepthError, Result};
use crate::geometry::PointSet;

/// `n` i.i.d. standard normal points in `d` dimensions.
pub fn gaussian_points(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if n < d + 2 {
        return Err(invalid(format!(
            "n must be at least d + 2 = {}, got {n}",
            d + 2
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    PointSet::new(data, n, d)
}

/// Parses one point per row, comma separated, optionally skipping a header
/// line. Errors carry 1-based line numbers.
pub fn parse_csv<R: Read>(reader: R, header: bool) -> Result<PointSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut data = Vec::new();
    let mut d = None;
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| DepthError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        match d {
            None => d = Some(rec.len()),
            Some(d) if d != rec.len() => {
                return Err(DepthError::Parse {
                    line,
                    msg: format!("expected {d} columns, found {}", rec.len()),
                })
            }
            _ => {}
        }
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| DepthError::Parse {
                line,
                msg: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(DepthError::Parse {
                    line,
                    msg: format!("non-finite value: {field:?}"),
                });
            }
            data.push(v);
        }
        n += 1;
    }
    let d = d.ok_or_else(|| invalid("dataset is empty"))?;
    PointSet::new(data, n, d)
}

pub fn read_csv(path: &Path, header: bool) -> Result<PointSet> {
    parse_csv(File::open(path)?, header)
}

/// Writes points with shortest round-trip float formatting.
pub fn write_csv<W: Write>(points: &PointSet, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for row in points.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basic_and_header() {
        let pts = parse_csv("0,0\n4,0\n0,4\n1,1\n".as_bytes(), false).unwrap();
        assert_eq!((pts.len(), pts.dim()), (4, 2));
        assert_eq!(pts.point(3), &[1.0, 1.0]);
        let pts = parse_csv("x,y\n0,0\n4,0\n0,4\n1,1\n".as_bytes(), true).unwrap();
        assert_eq!(pts.len(), 4);
    }

    #[test]
    fn parse_errors_report_lines() {
        let err = parse_csv("0,0\n4,0\n0,abc\n1,1\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, DepthError::Parse { line: 3, .. }), "{err:?}");
        let err = parse_csv("0,0\n4,0,1\n0,4\n1,1\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, DepthError::Parse { line: 2, .. }), "{err:?}");
        let err = parse_csv("0,0\n4,0\n0,inf\n1,1\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, DepthError::Parse { line: 3, .. }));
        assert!(parse_csv("".as_bytes(), false).is_err());
        assert!(parse_csv("0,0\n1,1\n".as_bytes(), false).is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let pts = gaussian_points(50, 3, 9).unwrap();
        let mut buf = Vec::new();
        write_csv(&pts, &mut buf).unwrap();
        assert_eq!(parse_csv(buf.as_slice(), false).unwrap(), pts);
    }

    #[test]
    fn generator_is_seeded() {
        assert_eq!(
            gaussian_points(5, 2, 1).unwrap(),
            gaussian_points(5, 2, 1).unwrap()
        );
        assert_ne!(
            gaussian_points(5, 2, 1).unwrap(),
            gaussian_points(5, 2, 2).unwrap()
        );
        assert!(gaussian_points(3, 2, 1).is_err());
    }

    #[test]
    fn generator_mean_is_near_zero() {
        let pts = gaussian_points(10_000, 2, 3).unwrap();
        for c in 0..2 {
            let mean: f64 = pts.rows().map(|r| r[c]).sum::<f64>() / 10_000.0;
            // 5 standard errors of the mean
            assert!(mean.abs() < 0.05, "coordinate {c} mean {mean}");
        }
    }
}
