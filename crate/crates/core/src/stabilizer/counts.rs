//! Outcome tables keyed by measurement setting.
//!
//! A setting is the letter string of a Pauli operator (sign dropped); qubits
//! carrying `I` are still detected so that every row has `2^n` outcomes.
//! Outcome index bit `n-1-q` is the result on qubit `q` (0 = eigenvalue +1),
//! so in the CSV `outcome_bits` the leftmost character is qubit 1.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::pauli::PauliString;
use crate::error::{Error, Result};

/// A cell value that can be read as a non-negative weight.
pub trait OutcomeWeight: Copy + Default + PartialOrd + std::fmt::Debug {
    fn as_weight(self) -> f64;
}

impl OutcomeWeight for u64 {
    fn as_weight(self) -> f64 {
        self as f64
    }
}

impl OutcomeWeight for f64 {
    fn as_weight(self) -> f64 {
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable<T> {
    qubits: usize,
    rows: BTreeMap<String, Vec<T>>,
}

pub type CountsTable = OutcomeTable<u64>;
pub type ProbabilityTable = OutcomeTable<f64>;

/// Mean of a ±1-valued observable with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }
}

impl<T: OutcomeWeight> OutcomeTable<T> {
    pub fn new(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > 16 {
            return Err(Error::InvalidArgument(format!("unsupported qubit count {qubits}")));
        }
        Ok(Self { qubits, rows: BTreeMap::new() })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn insert(&mut self, setting: &str, row: Vec<T>) -> Result<()> {
        self.check_setting(setting)?;
        if row.len() != 1 << self.qubits {
            return Err(Error::InvalidArgument(format!(
                "row for {setting} has {} outcomes, expected {}",
                row.len(),
                1usize << self.qubits
            )));
        }
        if row.iter().any(|v| !(v.as_weight() >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative or NaN entry for {setting}")));
        }
        self.rows.insert(setting.to_string(), row);
        Ok(())
    }

    fn check_setting(&self, setting: &str) -> Result<()> {
        if setting.len() != self.qubits || !setting.chars().all(|c| "IXYZ".contains(c)) {
            return Err(Error::InvalidArgument(format!("bad setting string {setting:?}")));
        }
        Ok(())
    }

    pub fn row(&self, setting: &str) -> Option<&[T]> {
        self.rows.get(setting).map(Vec::as_slice)
    }

    pub fn settings(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[T])> {
        self.rows.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn total(&self, setting: &str) -> f64 {
        self.row(setting).map_or(0.0, |r| r.iter().map(|v| v.as_weight()).sum())
    }

    pub fn grand_total(&self) -> f64 {
        self.rows.keys().map(|s| self.total(s)).sum()
    }

    /// `<g> = Σ_j λ_j C_j / Σ_j C_j`. The identity needs no row and returns
    /// its sign exactly.
    pub fn expectation(&self, stabilizer: &PauliString) -> Result<Estimate> {
        if stabilizer.len() != self.qubits {
            return Err(Error::InvalidArgument(format!(
                "stabilizer {stabilizer} does not act on {} qubits",
                self.qubits
            )));
        }
        if stabilizer.weight() == 0 {
            return Ok(Estimate::exact(stabilizer.sign()));
        }
        let setting = stabilizer.setting();
        let row = self
            .row(&setting)
            .ok_or_else(|| Error::InvalidArgument(format!("no data for setting {setting}")))?;
        let total: f64 = row.iter().map(|v| v.as_weight()).sum();
        if total <= 0.0 {
            return Err(Error::ZeroCounts(setting));
        }
        let sum: f64 = row
            .iter()
            .enumerate()
            .map(|(j, v)| stabilizer.eigenvalue(j as u32) * v.as_weight())
            .sum();
        let value = sum / total;
        let error = ((1.0 - value * value).max(0.0) / total).sqrt();
        Ok(Estimate { value, error })
    }

    /// Writes `setting_string,outcome_bits,counts` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()>
    where
        T: Serialize,
    {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["setting_string", "outcome_bits", "counts"])?;
        for (setting, row) in &self.rows {
            for (j, v) in row.iter().enumerate() {
                w.serialize((setting, format_bits(j, self.qubits), v))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let mut r = csv::Reader::from_reader(reader);
        let mut cells: BTreeMap<String, BTreeMap<usize, T>> = BTreeMap::new();
        let mut qubits = None;
        for rec in r.deserialize() {
            let (setting, bits, value): (String, String, T) = rec?;
            let n = bits.len();
            if *qubits.get_or_insert(n) != n || setting.len() != n {
                return Err(Error::InvalidArgument(format!("inconsistent widths at {setting},{bits}")));
            }
            let index = usize::from_str_radix(&bits, 2)
                .map_err(|_| Error::InvalidArgument(format!("bad outcome bits {bits:?}")))?;
            cells.entry(setting).or_default().insert(index, value);
        }
        let qubits = qubits.ok_or_else(|| Error::InvalidArgument("empty counts file".into()))?;
        let mut table = Self::new(qubits)?;
        for (setting, entries) in cells {
            let mut row = vec![T::default(); 1 << qubits];
            for (j, v) in entries {
                row[j] = v;
            }
            table.insert(&setting, row)?;
        }
        Ok(table)
    }
}

pub fn format_bits(index: usize, width: usize) -> String {
    format!("{index:0width$b}")
}

/// Expectation of `stabilizer` from a counts table.
pub fn expectation_from_counts(table: &CountsTable, stabilizer: &PauliString) -> Result<Estimate> {
    table.expectation(stabilizer)
}
