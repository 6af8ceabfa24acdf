//! Observation model for clipped measurements.
//!
//! A raw measurement `q_i = phi_i^T x + n_i` is recorded as
//! `max(y_min, min(y_max, q_i))`. Rows recorded exactly at a threshold are
//! saturated and carry a direction `s_i = +1` (upper) or `-1` (lower); all
//! other rows are unsaturated.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Measurements split into an unsaturated part and a saturated part.
///
/// The parts are stored as separate matrices because the solver uses them
/// differently: `phi1` enters a quadratic term and `phi2` a linear one.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturatedDataset {
    phi1: DMatrix<f64>,
    y1: DVector<f64>,
    phi2: DMatrix<f64>,
    y2: DVector<f64>,
    s2: Vec<i8>,
    y_min: f64,
    y_max: f64,
    rows1: Vec<usize>,
    rows2: Vec<usize>,
}

impl SaturatedDataset {
    /// Assembles a dataset from its parts and checks every invariant.
    ///
    /// `rows1` / `rows2` are the original measurement indices of each part.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        phi1: DMatrix<f64>,
        y1: DVector<f64>,
        phi2: DMatrix<f64>,
        y2: DVector<f64>,
        s2: Vec<i8>,
        y_min: f64,
        y_max: f64,
        rows1: Vec<usize>,
        rows2: Vec<usize>,
    ) -> Result<Self> {
        let ds = SaturatedDataset { phi1, y1, phi2, y2, s2, y_min, y_max, rows1, rows2 };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        check_thresholds(self.y_min, self.y_max)?;
        let n = self.phi1.ncols();
        if self.phi2.ncols() != n {
            return Err(Error::dims(format!(
                "phi1 has {} columns but phi2 has {}",
                n,
                self.phi2.ncols()
            )));
        }
        if self.phi1.nrows() != self.y1.len() {
            return Err(Error::dims(format!(
                "phi1 has {} rows but y1 has {} entries",
                self.phi1.nrows(),
                self.y1.len()
            )));
        }
        if self.phi2.nrows() != self.y2.len() || self.y2.len() != self.s2.len() {
            return Err(Error::dims(format!(
                "phi2 rows {}, y2 len {}, s2 len {} disagree",
                self.phi2.nrows(),
                self.y2.len(),
                self.s2.len()
            )));
        }
        if self.rows1.len() != self.y1.len() || self.rows2.len() != self.y2.len() {
            return Err(Error::dims("row index lists do not match part sizes"));
        }
        for (i, &v) in self.y1.iter().enumerate() {
            if !(v > self.y_min && v < self.y_max) {
                return Err(Error::InvalidDataset(format!(
                    "y1[{i}] = {v} is not strictly inside ({}, {})",
                    self.y_min, self.y_max
                )));
            }
        }
        for (j, (&v, &s)) in self.y2.iter().zip(&self.s2).enumerate() {
            let ok = match s {
                1 => v == self.y_max,
                -1 => v == self.y_min,
                _ => false,
            };
            if !ok {
                return Err(Error::InvalidDataset(format!(
                    "saturated row {j}: s2 = {s} inconsistent with y2 = {v}"
                )));
            }
        }
        let m = self.m();
        let mut seen = vec![false; m];
        for &r in self.rows1.iter().chain(&self.rows2) {
            if r >= m || seen[r] {
                return Err(Error::InvalidDataset(format!(
                    "row index {r} out of range or repeated"
                )));
            }
            seen[r] = true;
        }
        if self.phi1.iter().chain(self.phi2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite sensing entry".into()));
        }
        Ok(())
    }

    pub fn phi1(&self) -> &DMatrix<f64> {
        &self.phi1
    }

    pub fn y1(&self) -> &DVector<f64> {
        &self.y1
    }

    pub fn phi2(&self) -> &DMatrix<f64> {
        &self.phi2
    }

    pub fn y2(&self) -> &DVector<f64> {
        &self.y2
    }

    pub fn s2(&self) -> &[i8] {
        &self.s2
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    /// Original indices of the unsaturated rows.
    pub fn rows1(&self) -> &[usize] {
        &self.rows1
    }

    /// Original indices of the saturated rows.
    pub fn rows2(&self) -> &[usize] {
        &self.rows2
    }

    pub fn n(&self) -> usize {
        self.phi1.ncols()
    }

    pub fn m1(&self) -> usize {
        self.y1.len()
    }

    pub fn m2(&self) -> usize {
        self.y2.len()
    }

    pub fn m(&self) -> usize {
        self.m1() + self.m2()
    }

    /// `s2` as a real vector.
    pub fn s2_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.s2.len(), self.s2.iter().map(|&s| f64::from(s)))
    }

    /// Interleaves both parts back into the clipped measurement vector.
    pub fn reconstruct_clipped(&self) -> DVector<f64> {
        let mut y = DVector::zeros(self.m());
        for (k, &r) in self.rows1.iter().enumerate() {
            y[r] = self.y1[k];
        }
        for (k, &r) in self.rows2.iter().enumerate() {
            y[r] = self.y2[k];
        }
        y
    }

    /// Same dataset with the saturated part replaced by a different one.
    /// Used by tests that check the saturated part is ignored when `gamma = 0`.
    pub fn with_saturated_part(&self, phi2: DMatrix<f64>, y2: DVector<f64>, s2: Vec<i8>) -> Result<Self> {
        let rows2 = (self.m1()..self.m1() + y2.len()).collect();
        let rows1 = (0..self.m1()).collect();
        SaturatedDataset::new(
            self.phi1.clone(),
            self.y1.clone(),
            phi2,
            y2,
            s2,
            self.y_min,
            self.y_max,
            rows1,
            rows2,
        )
    }
}

/// True sparse signal and its support.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub x_bar: DVector<f64>,
    pub support: Vec<usize>,
}

impl GroundTruth {
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }
}

fn check_thresholds(y_min: f64, y_max: f64) -> Result<()> {
    if !(y_min < y_max) {
        return Err(Error::param(format!("y_min ({y_min}) must be below y_max ({y_max})")));
    }
    Ok(())
}

/// Applies the bounded-range detector: `max(y_min, min(y_max, y))`.
pub fn clip(y_raw: &DVector<f64>, y_min: f64, y_max: f64) -> Result<DVector<f64>> {
    check_thresholds(y_min, y_max)?;
    Ok(y_raw.map(|v| v.min(y_max).max(y_min)))
}

/// Splits clipped measurements into unsaturated and saturated parts.
///
/// Values equal to a threshold are saturated. Row order is preserved within
/// each part.
pub fn partition_measurements(
    phi: &DMatrix<f64>,
    y_clipped: &DVector<f64>,
    y_min: f64,
    y_max: f64,
) -> Result<SaturatedDataset> {
    check_thresholds(y_min, y_max)?;
    if phi.nrows() != y_clipped.len() {
        return Err(Error::dims(format!(
            "phi has {} rows but y has {} entries",
            phi.nrows(),
            y_clipped.len()
        )));
    }
    let mut rows1 = Vec::new();
    let mut rows2 = Vec::new();
    let mut s2 = Vec::new();
    for (i, &v) in y_clipped.iter().enumerate() {
        if v.is_nan() || v < y_min || v > y_max {
            return Err(Error::param(format!(
                "y[{i}] = {v} lies outside [{y_min}, {y_max}]"
            )));
        }
        if v >= y_max {
            rows2.push(i);
            s2.push(1);
        } else if v <= y_min {
            rows2.push(i);
            s2.push(-1);
        } else {
            rows1.push(i);
        }
    }
    let phi1 = phi.select_rows(rows1.iter());
    let phi2 = phi.select_rows(rows2.iter());
    let y1 = DVector::from_iterator(rows1.len(), rows1.iter().map(|&i| y_clipped[i]));
    let y2 = DVector::from_iterator(rows2.len(), rows2.iter().map(|&i| y_clipped[i]));
    SaturatedDataset::new(phi1, y1, phi2, y2, s2, y_min, y_max, rows1, rows2)
}

// ---------------------------------------------------------------------------
// CSV storage
// ---------------------------------------------------------------------------

/// Formats with 17 significant digits so values survive a write/read cycle.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for r in 0..m.nrows() {
        w.write_record(m.row(r).iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

fn write_column<T: ToString>(path: &Path, values: impl Iterator<Item = T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for v in values {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        out.push(rec.iter().map(|s| s.trim().to_string()).collect());
    }
    Ok(out)
}

fn parse_f64(s: &str, path: &Path) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| Error::InvalidDataset(format!("{}: bad number {s:?}: {e}", path.display())))
}

fn read_matrix(path: &Path, ncols: usize) -> Result<DMatrix<f64>> {
    let rows = read_rows(path)?;
    let mut data = Vec::with_capacity(rows.len() * ncols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::dims(format!(
                "{} row {i} has {} columns, expected {ncols}",
                path.display(),
                row.len()
            )));
        }
        for s in row {
            data.push(parse_f64(s, path)?);
        }
    }
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &data))
}

fn read_column(path: &Path) -> Result<Vec<f64>> {
    read_rows(path)?
        .iter()
        .map(|row| match row.as_slice() {
            [s] => parse_f64(s, path),
            _ => Err(Error::InvalidDataset(format!("{}: expected one value per line", path.display()))),
        })
        .collect()
}

impl SaturatedDataset {
    /// Writes `phi1.csv`, `y1.csv`, `phi2.csv`, `y2.csv`, `s2.csv`, `meta.csv`
    /// and the row-index files `rows1.csv` / `rows2.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_matrix(&dir.join("phi1.csv"), &self.phi1)?;
        write_column(&dir.join("y1.csv"), self.y1.iter().map(|&v| fmt_f64(v)))?;
        write_matrix(&dir.join("phi2.csv"), &self.phi2)?;
        write_column(&dir.join("y2.csv"), self.y2.iter().map(|&v| fmt_f64(v)))?;
        write_column(&dir.join("s2.csv"), self.s2.iter())?;
        write_column(&dir.join("rows1.csv"), self.rows1.iter())?;
        write_column(&dir.join("rows2.csv"), self.rows2.iter())?;
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(dir.join("meta.csv"))?;
        w.write_record(["y_min", &fmt_f64(self.y_min)])?;
        w.write_record(["y_max", &fmt_f64(self.y_max)])?;
        w.write_record(["n", &self.n().to_string()])?;
        w.flush()?;
        Ok(())
    }

    /// Loads a dataset directory written by [`SaturatedDataset::save`].
    /// Row-index files are optional; without them rows are numbered part 1
    /// first, then part 2.
    pub fn load(dir: &Path) -> Result<Self> {
        let meta_path = dir.join("meta.csv");
        let mut y_min = None;
        let mut y_max = None;
        let mut n = None;
        for row in read_rows(&meta_path)? {
            match row.as_slice() {
                [k, v] if k == "y_min" => y_min = Some(parse_f64(v, &meta_path)?),
                [k, v] if k == "y_max" => y_max = Some(parse_f64(v, &meta_path)?),
                [k, v] if k == "n" => {
                    n = Some(v.parse::<usize>().map_err(|e| {
                        Error::InvalidDataset(format!("meta.csv: bad n {v:?}: {e}"))
                    })?)
                }
                _ => {
                    return Err(Error::InvalidDataset(format!(
                        "meta.csv: unexpected record {row:?}"
                    )))
                }
            }
        }
        let missing = |k: &str| Error::InvalidDataset(format!("meta.csv: missing {k}"));
        let y_min = y_min.ok_or_else(|| missing("y_min"))?;
        let y_max = y_max.ok_or_else(|| missing("y_max"))?;
        let n = n.ok_or_else(|| missing("n"))?;

        let phi1 = read_matrix(&dir.join("phi1.csv"), n)?;
        let phi2 = read_matrix(&dir.join("phi2.csv"), n)?;
        let y1 = DVector::from_vec(read_column(&dir.join("y1.csv"))?);
        let y2 = DVector::from_vec(read_column(&dir.join("y2.csv"))?);
        let s2 = read_column(&dir.join("s2.csv"))?
            .into_iter()
            .map(|v| {
                if v == 1.0 {
                    Ok(1)
                } else if v == -1.0 {
                    Ok(-1)
                } else {
                    Err(Error::InvalidDataset(format!("s2 entry {v} is not +1 or -1")))
                }
            })
            .collect::<Result<Vec<i8>>>()?;
        let read_idx = |name: &str, default: Vec<usize>| -> Result<Vec<usize>> {
            let p = dir.join(name);
            if !p.exists() {
                return Ok(default);
            }
            read_column(&p)?
                .into_iter()
                .map(|v| {
                    if v >= 0.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(Error::InvalidDataset(format!("{name}: bad row index {v}")))
                    }
                })
                .collect()
        };
        let m1 = y1.len();
        let m2 = y2.len();
        let rows1 = read_idx("rows1.csv", (0..m1).collect())?;
        let rows2 = read_idx("rows2.csv", (m1..m1 + m2).collect())?;
        SaturatedDataset::new(phi1, y1, phi2, y2, s2, y_min, y_max, rows1, rows2)
    }
}

impl GroundTruth {
    /// One value per line, `N` lines.
    pub fn save(&self, path: &Path) -> Result<()> {
        write_column(path, self.x_bar.iter().map(|&v| fmt_f64(v)))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let x = DVector::from_vec(read_column(path)?);
        let support = x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect();
        Ok(GroundTruth { x_bar: x, support })
    }
}
