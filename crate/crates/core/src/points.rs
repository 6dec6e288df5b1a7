//! Finite point measures on the punctured line or on `[0, 1]` times it.

use std::io::Write;

use crate::error::{Error, Result};
use crate::pathio::{csv_err, fmt_f64};

/// Unit-mass atoms with nonzero marks, optionally tagged with a time in `[0, 1]`.
///
/// Repeated atoms encode multiplicities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointMeasure {
    times: Option<Vec<f64>>,
    marks: Vec<f64>,
}

fn check_marks(marks: &[f64]) -> Result<()> {
    if marks.iter().any(|&x| x == 0.0 || x.is_nan()) {
        return Err(Error::Domain("atoms must be nonzero points of the punctured line".into()));
    }
    Ok(())
}

impl PointMeasure {
    /// Measure on the punctured line.
    pub fn on_line(marks: Vec<f64>) -> Result<Self> {
        check_marks(&marks)?;
        Ok(PointMeasure { times: None, marks })
    }

    /// Measure on `[0, 1]` times the punctured line.
    pub fn on_time_line(times: Vec<f64>, marks: Vec<f64>) -> Result<Self> {
        if times.len() != marks.len() {
            return Err(Error::Domain("times and marks differ in length".into()));
        }
        if times.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::Domain("atom times must lie in [0, 1]".into()));
        }
        check_marks(&marks)?;
        Ok(PointMeasure {
            times: Some(times),
            marks,
        })
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn marks(&self) -> &[f64] {
        &self.marks
    }

    pub fn times(&self) -> Option<&[f64]> {
        self.times.as_deref()
    }

    pub fn has_times(&self) -> bool {
        self.times.is_some()
    }

    /// Image under `(t, x) -> x`.
    pub fn project(&self) -> PointMeasure {
        PointMeasure {
            times: None,
            marks: self.marks.clone(),
        }
    }

    /// Number of atoms with `|x| > r`.
    pub fn count_abs_gt(&self, r: f64) -> usize {
        self.marks.iter().filter(|x| x.abs() > r).count()
    }

    /// Restriction to `{|x| > v}`.
    pub fn restrict_abs_gt(&self, v: f64) -> PointMeasure {
        let keep: Vec<usize> = (0..self.marks.len()).filter(|&i| self.marks[i].abs() > v).collect();
        PointMeasure {
            times: self.times.as_ref().map(|t| keep.iter().map(|&i| t[i]).collect()),
            marks: keep.iter().map(|&i| self.marks[i]).collect(),
        }
    }

    /// `int f dm` for a function of the mark.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.marks.iter().map(|&x| f(x)).sum()
    }

    /// CSV with columns `(t, x)` or `(x)`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        match &self.times {
            Some(ts) => {
                out.write_record(["t", "x"]).map_err(csv_err)?;
                for (&t, &x) in ts.iter().zip(&self.marks) {
                    out.write_record([fmt_f64(t), fmt_f64(x)]).map_err(csv_err)?;
                }
            }
            None => {
                out.write_record(["x"]).map_err(csv_err)?;
                for &x in &self.marks {
                    out.write_record([fmt_f64(x)]).map_err(csv_err)?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_atoms_rejected_and_restriction_keeps_times() {
        assert!(PointMeasure::on_line(vec![1.0, 0.0]).is_err());
        let m = PointMeasure::on_time_line(vec![0.1, 0.5, 0.9], vec![0.5, -3.0, 2.0]).unwrap();
        let r = m.restrict_abs_gt(1.0);
        assert_eq!(r.times().unwrap(), &[0.5, 0.9]);
        assert_eq!(m.count_abs_gt(1.0), 2);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,x\n0.5,-3.0\n0.9,2.0\n");
    }
}
