//! Cadlag step functions on `[0, 1]`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::pathio::{csv_err, fmt_f64, parse_f64, read_binary, write_binary};

/// Right-continuous piecewise-constant function on `[0, 1]`.
///
/// `initial` holds on `[0, times[0])`, `values[i]` on `[times[i], times[i+1])`.
/// Jump times are strictly increasing in `(0, 1]` and every stored jump has
/// nonzero size.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    initial: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    /// Builds a step function, dropping zero-size jumps.
    pub fn new(initial: f64, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Domain(format!(
                "{} jump times but {} values",
                times.len(),
                values.len()
            )));
        }
        if !initial.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("step function values must be finite".into()));
        }
        let mut prev_t = 0.0;
        for &t in &times {
            if !(t > prev_t && t <= 1.0) {
                return Err(Error::Domain(format!(
                    "jump times must be strictly increasing in (0, 1], got {t} after {prev_t}"
                )));
            }
            prev_t = t;
        }
        Ok(Self::normalized(initial, times, values))
    }

    /// Builds from already validated times, dropping zero-size jumps.
    pub(crate) fn normalized(initial: f64, times: Vec<f64>, values: Vec<f64>) -> Self {
        let mut t_out = Vec::with_capacity(times.len());
        let mut v_out = Vec::with_capacity(values.len());
        let mut last = initial;
        for (t, v) in times.into_iter().zip(values) {
            if v != last {
                t_out.push(t);
                v_out.push(v);
                last = v;
            }
        }
        StepFunction {
            initial,
            times: t_out,
            values: v_out,
        }
    }

    /// The constant function `c`.
    pub fn constant(c: f64) -> Self {
        StepFunction {
            initial: c,
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    /// `c * 1_{[t, 1]}`.
    pub fn indicator(c: f64, t: f64) -> Result<Self> {
        Self::new(0.0, vec![t], vec![c])
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.times
    }

    pub fn post_values(&self) -> &[f64] {
        &self.values
    }

    pub fn jump_count(&self) -> usize {
        self.times.len()
    }

    /// Value at `t = 1`.
    pub fn final_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.initial)
    }

    /// Value at `t`, clamped into `[0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&s| s <= t);
        if idx == 0 {
            self.initial
        } else {
            self.values[idx - 1]
        }
    }

    /// Values on the pieces: `initial, values[0], ...`.
    pub fn levels(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.initial).chain(self.values.iter().copied())
    }

    /// Jump sizes `values[i] - values[i-1]`.
    pub fn jump_sizes(&self) -> Vec<f64> {
        let mut prev = self.initial;
        self.values
            .iter()
            .map(|&v| {
                let d = v - prev;
                prev = v;
                d
            })
            .collect()
    }

    /// `sup_t |x(t)|`.
    pub fn sup_norm(&self) -> f64 {
        self.levels().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Composition `x o lambda` for a piecewise-linear increasing bijection
    /// `lambda` of `[0, 1]` given by its knots `(s_i, lambda(s_i))`.
    pub fn compose(&self, knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 || knots[0] != (0.0, 0.0) || *knots.last().expect("nonempty") != (1.0, 1.0) {
            return Err(Error::Domain("time change must fix 0 and 1".into()));
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
            return Err(Error::Domain("time change must be strictly increasing".into()));
        }
        // the jump at time tau of x moves to lambda^{-1}(tau)
        let inv = |tau: f64| -> f64 {
            let i = knots.partition_point(|k| k.1 < tau).clamp(1, knots.len() - 1);
            let (s0, l0) = knots[i - 1];
            let (s1, l1) = knots[i];
            (s0 + (tau - l0) * (s1 - s0) / (l1 - l0)).clamp(0.0, 1.0)
        };
        let mut times = Vec::with_capacity(self.times.len());
        let mut values = Vec::with_capacity(self.times.len());
        let mut prev = 0.0;
        for (&t, &v) in self.times.iter().zip(&self.values) {
            let s = if t == 1.0 { 1.0 } else { inv(t) };
            if s <= prev {
                return Err(Error::Domain("time change collapses distinct jumps".into()));
            }
            times.push(s);
            values.push(v);
            prev = s;
        }
        Ok(Self::normalized(self.initial, times, values))
    }

    /// CSV with columns `(t, value)`: `t = 0` first, then each jump time.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "value"]).map_err(csv_err)?;
        out.write_record([fmt_f64(0.0), fmt_f64(self.initial)]).map_err(csv_err)?;
        for (&t, &v) in self.times.iter().zip(&self.values) {
            out.write_record([fmt_f64(t), fmt_f64(v)]).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Inverse of [`StepFunction::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "value" {
            return Err(Error::Parse("expected columns `t,value`".into()));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            rows.push((parse_f64(&rec[0])?, parse_f64(&rec[1])?));
        }
        Self::from_pairs(&rows)
    }

    fn from_pairs(rows: &[(f64, f64)]) -> Result<Self> {
        match rows.split_first() {
            Some((&(0.0, init), rest)) => Self::new(
                init,
                rest.iter().map(|r| r.0).collect(),
                rest.iter().map(|r| r.1).collect(),
            ),
            _ => Err(Error::Parse("first row must be t = 0".into())),
        }
    }

    /// Binary path format holding the interleaved `(t, value)` rows of the CSV form.
    pub fn write_binary<W: Write>(&self, w: W) -> Result<()> {
        let mut flat = Vec::with_capacity(2 * (self.times.len() + 1));
        flat.extend([0.0, self.initial]);
        for (&t, &v) in self.times.iter().zip(&self.values) {
            flat.extend([t, v]);
        }
        write_binary(&flat, w)
    }

    /// Inverse of [`StepFunction::write_binary`].
    pub fn read_binary<R: Read>(r: R) -> Result<Self> {
        let flat = read_binary(r)?;
        if flat.len() % 2 != 0 {
            return Err(Error::Parse("odd number of values for (t, value) pairs".into()));
        }
        let rows: Vec<(f64, f64)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        Self::from_pairs(&rows)
    }
}
