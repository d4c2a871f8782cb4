//! Sample batches and their CSV / metadata serialisation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMethod {
    Shock,
    Frailty,
}

impl std::fmt::Display for SampleMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Shock => "shock",
            Self::Frailty => "frailty",
        })
    }
}

impl std::str::FromStr for SampleMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shock" => Ok(Self::Shock),
            "frailty" => Ok(Self::Frailty),
            other => Err(Error::Malformed(format!("unknown method `{other}` (expected shock|frailty)"))),
        }
    }
}

/// `n x d` observations in `[0, 1]`, row-major, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    n: usize,
    d: usize,
    data: Vec<f64>,
    pub method: SampleMethod,
    pub seed: u64,
    pub family: String,
}

impl SampleBatch {
    pub fn new(d: usize, data: Vec<f64>, method: SampleMethod, seed: u64, family: String) -> Result<Self> {
        if d == 0 || !data.len().is_multiple_of(d) {
            return Err(Error::Malformed(format!("{} values do not form rows of width {d}", data.len())));
        }
        if let Some(bad) = data.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::OutOfUnitInterval { index: bad, value: data[bad] });
        }
        Ok(Self { n: data.len() / d, d, data, method, seed, family })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| r[k]).collect()
    }

    /// Batch with columns reordered: column `i` of the result is column `perm[i]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, actual: perm.len() });
        }
        let data = self.rows().flat_map(|r| perm.iter().map(move |&p| r[p])).collect();
        Ok(Self { data, ..self.clone() })
    }

    /// RFC 4180 CSV: header `u1,...,ud`, one row per draw, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        w.write_record((1..=self.d).map(|k| format!("u{k}")))?;
        for row in self.rows() {
            w.write_record(row.iter().map(|x| format!("{x:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn metadata(&self) -> BatchMetadata {
        BatchMetadata {
            method: self.method,
            seed: self.seed,
            n: self.n,
            d: self.d,
            family: self.family.clone(),
        }
    }
}

/// Sidecar describing how a batch was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMetadata {
    pub method: SampleMethod,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub family: String,
}
