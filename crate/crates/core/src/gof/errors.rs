use std::io::Write;

use serde::Serialize;

use super::GofError;
use crate::engine::{sample_moments, SampleData};
use crate::estimate::{DensityEstimate, EstimateKind};
use crate::moments::MomentSet;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleErrorEntry {
    pub value: f64,
    pub abs_error: f64,
    /// `None` when the exact moment is zero.
    pub rel_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateErrorEntry {
    pub kind: EstimateKind,
    pub value: f64,
    pub abs_error: f64,
    pub rel_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub order: usize,
    pub exact: f64,
    pub sample: SampleErrorEntry,
    pub estimates: Vec<EstimateErrorEntry>,
    pub undefined_relative: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorTable {
    pub var: String,
    pub rows: Vec<ErrorRow>,
}

fn errors(value: f64, exact: f64) -> (f64, Option<f64>) {
    let ae = (value - exact).abs();
    (ae, (exact != 0.0).then(|| ae / exact.abs()))
}

/// Absolute and relative errors of the sample moments and of each estimate's
/// moments against the exact moments, orders `1..=max_order`.
pub fn error_report(
    exact: &MomentSet,
    sample: &SampleData,
    estimates: &[&DensityEstimate],
    max_order: usize,
) -> Result<ErrorTable, GofError> {
    if max_order > exact.order() {
        return Err(GofError::OrderNotCovered {
            requested: max_order,
            available: exact.order(),
        });
    }
    let column = sample.column(&exact.var)?;
    if column.is_empty() {
        return Err(GofError::EmptySample);
    }
    let empirical = sample_moments(&column, max_order);
    let rows = (1..=max_order)
        .map(|i| {
            let target = exact.raw(i);
            let (ae, re) = errors(empirical[i - 1], target);
            ErrorRow {
                order: i,
                exact: target,
                sample: SampleErrorEntry {
                    value: empirical[i - 1],
                    abs_error: ae,
                    rel_error: re,
                },
                estimates: estimates
                    .iter()
                    .map(|est| {
                        let v = est.moment(i as u32);
                        let (ae, re) = errors(v, target);
                        EstimateErrorEntry {
                            kind: est.kind(),
                            value: v,
                            abs_error: ae,
                            rel_error: re,
                        }
                    })
                    .collect(),
                undefined_relative: target == 0.0,
            }
        })
        .collect();
    Ok(ErrorTable {
        var: exact.var.clone(),
        rows,
    })
}

fn rel_field(re: Option<f64>) -> String {
    re.map(|r| r.to_string()).unwrap_or_else(|| "undefined".into())
}

impl ErrorTable {
    /// Columns: order, exact, then value/AE/RE for the sample and each estimate.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec![
            "order".to_string(),
            "exact".into(),
            "Sample".into(),
            "AE_Sample".into(),
            "RE_Sample".into(),
        ];
        if let Some(row) = self.rows.first() {
            for e in &row.estimates {
                let k = e.kind.label();
                header.extend([k.to_string(), format!("AE_{}", k), format!("RE_{}", k)]);
            }
        }
        out.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![
                row.order.to_string(),
                row.exact.to_string(),
                row.sample.value.to_string(),
                row.sample.abs_error.to_string(),
                rel_field(row.sample.rel_error),
            ];
            for e in &row.estimates {
                rec.extend([e.value.to_string(), e.abs_error.to_string(), rel_field(e.rel_error)]);
            }
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}
