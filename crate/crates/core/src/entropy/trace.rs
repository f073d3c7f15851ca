use std::io::{self, Write};

use super::{fit_decay_rate, DecayFit, EntropyError};

/// Time series of diagnostics, one row per accepted step. The first two
/// columns are always `t` and `dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyTrace {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl EntropyTrace {
    pub fn new(extra: &[&str]) -> Self {
        let mut columns = vec!["t".to_string(), "dt".to_string()];
        columns.extend(extra.iter().map(|s| s.to_string()));
        EntropyTrace { columns, rows: Vec::new() }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Append a row `[t, dt, values...]`; `t` must increase strictly.
    pub fn push(&mut self, t: f64, dt: f64, values: &[f64]) {
        assert_eq!(values.len() + 2, self.columns.len(), "row width");
        if let Some(last) = self.rows.last() {
            assert!(t > last[0], "trace times must increase: {} after {}", t, last[0]);
        }
        let mut row = Vec::with_capacity(self.columns.len());
        row.push(t);
        row.push(dt);
        row.extend_from_slice(values);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, EntropyError> {
        let i = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| EntropyError::UnknownColumn(name.to_string()))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.column(name).ok()?.last().copied()
    }

    /// Fit `value ≈ A e^{-rate t}` on `window`, optionally after taking the
    /// square root of the column.
    pub fn fit(&self, name: &str, window: (f64, f64), sqrt: bool) -> Result<DecayFit, EntropyError> {
        let t = self.column("t")?;
        let mut v = self.column(name)?;
        if sqrt {
            v.iter_mut().for_each(|x| *x = x.sqrt());
        }
        fit_decay_rate(&t, &v, window)
    }

    /// CSV with a header line; numbers in shortest round-trip scientific
    /// form so reruns are byte-identical.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}
