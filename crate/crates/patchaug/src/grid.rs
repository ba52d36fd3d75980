//! Square grids: the 2D view of a sequence, row-major.
//!
//! Grids carry raw feature units; nothing here normalizes values. Bilinear
//! resampling uses corner-aligned coordinates with edge clamping, which
//! makes a same-size resample the exact identity — pyramids built from a
//! single scale reproduce their target bit-for-bit.

use crate::algebra::Sequence;
use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    side: usize,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(side: usize, values: Vec<f64>) -> Result<Self> {
        if side == 0 {
            return Err(Error::Config("grid side must be positive".into()));
        }
        if values.len() != side * side {
            return Err(Error::DimensionMismatch(format!(
                "grid of side {side} needs {} values, got {}",
                side * side,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("grid value {i} is not finite")));
        }
        Ok(Self { side, values })
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(side * side);
        for r in 0..side {
            for c in 0..side {
                values.push(f(r, c));
            }
        }
        Self::new(side, values)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.side + col]
    }

    pub fn to_sequence(&self) -> Sequence {
        Sequence::new(self.values.clone()).expect("grid values are finite and non-empty")
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Population standard deviation.
    pub fn std(&self) -> f64 {
        let mean = self.mean();
        let var = self
            .values
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / self.values.len() as f64;
        var.sqrt()
    }

    /// Corner-aligned bilinear resample. Same-size resampling returns the
    /// grid unchanged.
    pub fn resize_bilinear(&self, new_side: usize) -> Grid {
        assert!(new_side >= 1, "target side must be positive");
        if new_side == self.side {
            return self.clone();
        }
        let sample = |r: f64, c: f64| -> f64 {
            let max = (self.side - 1) as f64;
            let r = r.clamp(0.0, max);
            let c = c.clamp(0.0, max);
            let r0 = r.floor() as usize;
            let c0 = c.floor() as usize;
            let r1 = (r0 + 1).min(self.side - 1);
            let c1 = (c0 + 1).min(self.side - 1);
            let fr = r - r0 as f64;
            let fc = c - c0 as f64;
            let top = self.get(r0, c0) * (1.0 - fc) + self.get(r0, c1) * fc;
            let bottom = self.get(r1, c0) * (1.0 - fc) + self.get(r1, c1) * fc;
            top * (1.0 - fr) + bottom * fr
        };
        let values = if new_side == 1 {
            let center = (self.side - 1) as f64 / 2.0;
            vec![sample(center, center)]
        } else {
            let scale = (self.side - 1) as f64 / (new_side - 1) as f64;
            let mut out = Vec::with_capacity(new_side * new_side);
            for r in 0..new_side {
                for c in 0..new_side {
                    out.push(sample(r as f64 * scale, c as f64 * scale));
                }
            }
            out
        };
        Grid { side: new_side, values }
    }

    /// 16-bit binary PGM, min-max scaled. For visual inspection only.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut out = Vec::with_capacity(self.values.len() * 2 + 32);
        out.extend_from_slice(format!("P5\n{} {}\n65535\n", self.side, self.side).as_bytes());
        for v in &self.values {
            let scaled = ((v - lo) / span * 65535.0).round() as u16;
            out.extend_from_slice(&scaled.to_be_bytes());
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Writes grids as flat CSV rows, `side²` values each, row-major.
pub fn write_grids_csv(grids: &[Grid], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    for g in grids {
        let row: Vec<String> = g.values().iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads grids from flat CSV rows. The side is inferred from the first
/// row, which must have a square length; every following row must match.
pub fn read_grids_csv(path: &Path) -> Result<Vec<Grid>> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut grids = Vec::new();
    let mut side = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let values = parse_float_row(&line, lineno)?;
        if grids.is_empty() {
            side = (values.len() as f64).sqrt().round() as usize;
            if side * side != values.len() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("row length {} is not a perfect square", values.len()),
                });
            }
        } else if values.len() != side * side {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {} values, got {}", side * side, values.len()),
            });
        }
        grids.push(Grid::new(side, values).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?);
    }
    if grids.is_empty() {
        return Err(Error::EmptyDataset("no grid rows in file".into()));
    }
    Ok(grids)
}

pub(crate) fn parse_float_row(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|tok| {
            tok.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid number `{}`", tok.trim()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn constructor_validates() {
        assert!(Grid::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(Grid::new(2, vec![1.0, 2.0, 3.0, f64::NAN]).is_err());
        assert!(Grid::new(0, vec![]).is_err());
    }

    #[test]
    fn same_size_resample_is_identity() {
        let mut rng = crate::rng::stream_rng(1, 0);
        let g = Grid::from_fn(7, |_, _| rng.gen_range(-3.0..3.0)).unwrap();
        assert_eq!(g.resize_bilinear(7), g);
    }

    #[test]
    fn downsample_then_upsample_preserves_constants_and_corners() {
        let g = Grid::from_fn(9, |_, _| 4.25).unwrap();
        let small = g.resize_bilinear(5);
        assert!(small.values().iter().all(|&v| (v - 4.25).abs() < 1e-12));

        let ramp = Grid::from_fn(9, |r, c| (r * 9 + c) as f64).unwrap();
        let resized = ramp.resize_bilinear(5);
        // Corner alignment keeps the four corners exact.
        assert_eq!(resized.get(0, 0), ramp.get(0, 0));
        assert_eq!(resized.get(0, 4), ramp.get(0, 8));
        assert_eq!(resized.get(4, 0), ramp.get(8, 0));
        assert_eq!(resized.get(4, 4), ramp.get(8, 8));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grids.csv");
        let mut rng = crate::rng::stream_rng(2, 0);
        let grids: Vec<Grid> = (0..3)
            .map(|_| Grid::from_fn(4, |_, _| rng.gen_range(-2.0..2.0)).unwrap())
            .collect();
        write_grids_csv(&grids, &path).unwrap();
        let back = read_grids_csv(&path).unwrap();
        assert_eq!(back, grids);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1,2,3,4\n1,2,3\n").unwrap();
        match read_grids_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::write(&path, "1,2,3\n").unwrap();
        assert!(matches!(read_grids_csv(&path), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn pgm_header_is_wellformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.pgm");
        let g = Grid::from_fn(3, |r, c| (r + c) as f64).unwrap();
        g.write_pgm(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n3 3\n65535\n"));
        assert_eq!(bytes.len(), b"P5\n3 3\n65535\n".len() + 9 * 2);
    }
}
