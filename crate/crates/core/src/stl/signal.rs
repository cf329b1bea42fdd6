use std::collections::HashMap;
use std::io::{Read, Write};

use super::StlError;

/// Uniformly sampled multi-variable trace. Step `t` is sample index `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    variables: Vec<String>,
    index: HashMap<String, usize>,
    samples: Vec<Vec<f64>>,
    /// Seconds per step; metadata only.
    pub step_duration: f64,
}

impl Signal {
    pub fn new(variables: Vec<String>, samples: Vec<Vec<f64>>) -> Result<Self, StlError> {
        if samples.is_empty() {
            return Err(StlError::InvalidSignal("signal needs at least one sample".into()));
        }
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(StlError::InvalidSignal(format!("duplicate variable `{v}`")));
            }
        }
        if let Some((t, s)) = samples.iter().enumerate().find(|(_, s)| s.len() != variables.len()) {
            return Err(StlError::InvalidSignal(format!(
                "sample {t} has {} entries, expected {}",
                s.len(),
                variables.len()
            )));
        }
        Ok(Self { variables, index, samples, step_duration: 1.0 })
    }

    /// Single-variable convenience constructor.
    pub fn scalar(name: &str, values: &[f64]) -> Result<Self, StlError> {
        Self::new(vec![name.to_owned()], values.iter().map(|&v| vec![v]).collect())
    }

    pub fn with_step_duration(mut self, secs: f64) -> Self {
        self.step_duration = secs;
        self
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last_step(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn value(&self, name: &str, t: usize) -> Option<f64> {
        let i = self.var_index(name)?;
        self.samples.get(t).map(|s| s[i])
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.var_index(name)?;
        Some(self.samples.iter().map(|s| s[i]).collect())
    }

    pub fn push(&mut self, sample: Vec<f64>) -> Result<(), StlError> {
        if sample.len() != self.variables.len() {
            return Err(StlError::InvalidSignal(format!(
                "sample has {} entries, expected {}",
                sample.len(),
                self.variables.len()
            )));
        }
        self.samples.push(sample);
        Ok(())
    }

    /// Steps `from..=to` as a new signal.
    pub fn slice(&self, from: usize, to: usize) -> Signal {
        Signal {
            variables: self.variables.clone(),
            index: self.index.clone(),
            samples: self.samples[from..=to].to_vec(),
            step_duration: self.step_duration,
        }
    }

    /// Reads a CSV with a header row of variable names and one row per step.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, StlError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| StlError::InvalidSignal(e.to_string()))?;
        let vars: Vec<String> = header.iter().map(str::to_owned).collect();
        let mut samples = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| StlError::InvalidSignal(e.to_string()))?;
            let vals = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        StlError::InvalidSignal(format!("row {}: `{s}` is not a number", row + 1))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            samples.push(vals);
        }
        Signal::new(vars, samples)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), StlError> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| StlError::InvalidSignal(e.to_string());
        w.write_record(&self.variables).map_err(io)?;
        for s in &self.samples {
            w.write_record(s.iter().map(|v| v.to_string())).map_err(io)?;
        }
        w.flush().map_err(|e| StlError::InvalidSignal(e.to_string()))
    }
}
