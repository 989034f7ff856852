//! Seeded Monte-Carlo execution of core programs.

mod interp;
mod normal;
mod rng;

pub use interp::{draw_count, draw_value, run_core, run_program, Compiled};
pub use normal::inverse_normal_cdf;
pub use rng::{derive, mix64, to_unit, RowStreams};

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::dsl::CoreProgram;
use crate::moments::{MomentSet, Provenance};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("numeric overflow in `{var}` at iteration {iteration}{}", row.map(|r| format!(" (row {})", r)).unwrap_or_default())]
    NumericOverflow {
        row: Option<usize>,
        iteration: u64,
        var: String,
    },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("at least one execution is required")]
    NoExecutions,
    #[error("sample file: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Final states of `e` independent executions, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleData {
    pub vars: Vec<String>,
    pub values: Vec<f64>,
    pub n: u64,
    pub seed: u64,
    pub e: usize,
}

impl SampleData {
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.vars.len();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn column(&self, var: &str) -> Result<Vec<f64>, EngineError> {
        let j = self
            .vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| EngineError::UnknownVariable(var.to_string()))?;
        Ok((0..self.e).map(|i| self.row(i)[j]).collect())
    }

    /// CSV with a leading `# n=<n> e=<e> seed=<s>` line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), EngineError> {
        writeln!(w, "# n={} e={} seed={}", self.n, self.e, self.seed)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.vars)?;
        for i in 0..self.e {
            out.write_record(self.row(i).iter().map(|v| v.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_csv<R: BufRead>(mut r: R) -> Result<SampleData, EngineError> {
        let mut first = String::new();
        r.read_line(&mut first)?;
        let meta = first
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| EngineError::Format("missing metadata line".into()))?;
        let fields: BTreeMap<&str, &str> = meta
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .collect();
        let get = |k: &str| -> Result<u64, EngineError> {
            fields
                .get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| EngineError::Format(format!("metadata field `{}` missing", k)))
        };
        let (n, e, seed) = (get("n")?, get("e")? as usize, get("seed")?);

        let mut reader = csv::Reader::from_reader(r);
        let vars: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut values = Vec::with_capacity(e * vars.len());
        let mut rows = 0;
        for rec in reader.records() {
            let rec = rec?;
            for field in rec.iter() {
                values.push(
                    field
                        .parse::<f64>()
                        .map_err(|_| EngineError::Format(format!("bad value `{}`", field)))?,
                );
            }
            rows += 1;
        }
        if rows != e {
            return Err(EngineError::Format(format!(
                "metadata says e={} but {} rows follow",
                e, rows
            )));
        }
        Ok(SampleData {
            vars,
            values,
            n,
            seed,
            e,
        })
    }
}

/// Final state after the init block and `n` iterations.
pub fn run_once(core: &CoreProgram, n: u64, seed: u64) -> Result<BTreeMap<String, f64>, EngineError> {
    let state = Compiled::new(core).run(n, seed, |_, _| {})?;
    Ok(core.vars.iter().cloned().zip(state).collect())
}

/// States after every iteration `0..=n` of one execution.
pub fn trajectory(core: &CoreProgram, n: u64, seed: u64) -> Result<Vec<Vec<f64>>, EngineError> {
    let mut out = Vec::with_capacity(n as usize + 1);
    Compiled::new(core).run(n, seed, |_, s| out.push(s.to_vec()))?;
    Ok(out)
}

/// `e` executions; row `i` uses seed `derive(master_seed, i)`.
pub fn sample(core: &CoreProgram, n: u64, e: usize, master_seed: u64) -> Result<SampleData, EngineError> {
    if e == 0 {
        return Err(EngineError::NoExecutions);
    }
    let compiled = Compiled::new(core);
    let rows: Vec<Result<Vec<f64>, EngineError>> = (0..e)
        .into_par_iter()
        .map(|i| {
            compiled
                .run(n, derive(master_seed, i as u64), |_, _| {})
                .map_err(|err| match err {
                    EngineError::NumericOverflow { iteration, var, .. } => {
                        EngineError::NumericOverflow {
                            row: Some(i),
                            iteration,
                            var,
                        }
                    }
                    other => other,
                })
        })
        .collect();
    let mut values = Vec::with_capacity(e * core.vars.len());
    for row in rows {
        values.extend(row?);
    }
    Ok(SampleData {
        vars: core.vars.clone(),
        values,
        n,
        seed: master_seed,
        e,
    })
}

/// `(1/e) Σ x_j^i` for `i = 1..=m`.
pub fn empirical_moments(data: &SampleData, var: &str, m: usize) -> Result<MomentSet, EngineError> {
    let col = data.column(var)?;
    Ok(MomentSet::new(
        var,
        data.n,
        sample_moments(&col, m),
        Provenance::Empirical,
    ))
}

pub fn sample_moments(xs: &[f64], m: usize) -> Vec<f64> {
    let mut sums = vec![0.0; m];
    for &x in xs {
        let mut p = 1.0;
        for s in sums.iter_mut() {
            p *= x;
            *s += p;
        }
    }
    sums.into_iter().map(|s| s / xs.len() as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::compile;

    #[test]
    fn counter_program() {
        let (_, core) = compile("x := 1 while true { x := x + 1 }").unwrap();
        assert_eq!(run_once(&core, 5, 0).unwrap()["x"], 6.0);
        assert_eq!(run_once(&core, 0, 0).unwrap()["x"], 1.0);
    }

    #[test]
    fn seeds_matter_and_repeat() {
        let (_, core) = compile("x := 0 while true { v := Uniform(0, 1); x := x + v }").unwrap();
        let a = sample(&core, 10, 3, 0).unwrap();
        let b = sample(&core, 10, 3, 1).unwrap();
        assert_ne!(a.values, b.values);
        assert_eq!(a, sample(&core, 10, 3, 0).unwrap());
        let one = sample(&core, 10, 1, 0).unwrap();
        assert_eq!(one.row(0)[0], run_once(&core, 10, derive(0, 0)).unwrap()["x"]);
    }

    #[test]
    fn overflow_names_row() {
        let (_, core) = compile("x := 10 while true { x := x * x }").unwrap();
        match sample(&core, 20, 2, 0) {
            Err(EngineError::NumericOverflow { row: Some(0), var, .. }) => assert_eq!(var, "x"),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn hand_moments() {
        assert_eq!(sample_moments(&[1.0, 2.0, 3.0], 2), vec![2.0, 14.0 / 3.0]);
        assert_eq!(sample_moments(&[2.0, 2.0], 3), vec![2.0, 4.0, 8.0]);
    }

    #[test]
    fn csv_round_trip() {
        let (_, core) = compile("x := 0 while true { w := Normal(0, 1); x := x + w / 3 }").unwrap();
        let data = sample(&core, 7, 5, 42).unwrap();
        let text = data.to_csv_string();
        assert!(text.starts_with("# n=7 e=5 seed=42\nx,w\n"));
        let back = SampleData::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, data);
    }
}
