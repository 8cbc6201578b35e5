use serde::{Deserialize, Serialize};

use super::linalg::Design;
use super::Dataset;
use crate::error::Result;

/// OLS of log expenditure on an intercept, the log instrument and log prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstStageFit {
    pub delta0: f64,
    pub delta1: f64,
    /// One coefficient per modeled good's log price.
    pub delta2: Vec<f64>,
    /// `ê_i`, aligned with the dataset rows.
    pub residuals: Vec<f64>,
    /// Regressors dropped because they were constant in the sample.
    pub dropped: Vec<String>,
}

pub fn first_stage(ds: &Dataset) -> Result<FirstStageFit> {
    let mut labels = vec!["intercept".to_string(), "log_z".to_string()];
    labels.extend(ds.goods().iter().map(|g| format!("log_p_{g}")));
    let rows: Vec<Vec<f64>> = ds
        .rows()
        .iter()
        .map(|r| {
            let mut row = vec![1.0, r.log_z];
            row.extend(&r.log_prices);
            row
        })
        .collect();
    let design = Design::new(&rows, &labels)?;
    let y: Vec<f64> = ds.rows().iter().map(|r| r.log_y).collect();
    let coef = design.solve(None, &y)?;
    let fitted = design.predict(&coef);
    let residuals = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let raw = design.expand(&coef);
    Ok(FirstStageFit {
        delta0: raw[0],
        delta1: raw[1],
        delta2: raw[2..].to_vec(),
        residuals,
        dropped: design
            .dropped()
            .into_iter()
            .map(|j| labels[j].clone())
            .collect(),
    })
}
