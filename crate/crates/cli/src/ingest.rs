//! Household CSV schema: `w_<good>` and `log_p_<good>` per modeled good,
//! then `log_y` and `log_z`.

use std::path::Path;

use welfare_moments::estimation::{Dataset, Household};

use crate::error::{CliError, CliResult, RowError};

/// Row errors collected before giving up.
pub const MAX_ROW_ERRORS: usize = 100;

#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    /// Rows dropped for nonpositive expenditure or instrument (non-finite logs).
    pub dropped: usize,
    pub warnings: Vec<String>,
}

/// Reads a household CSV. When `goods` is `None` the goods are the
/// `w_<good>` columns in header order.
pub fn ingest_csv(path: &Path, goods: Option<&[String]>) -> CliResult<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::io(path, e))?;
    let headers = reader.headers().map_err(|e| CliError::io(path, e))?.clone();
    let names: Vec<&str> = headers.iter().collect();

    let goods: Vec<String> = match goods {
        Some(g) if !g.is_empty() => g.to_vec(),
        _ => names
            .iter()
            .filter_map(|h| h.strip_prefix("w_"))
            .map(str::to_string)
            .collect(),
    };
    let mut required: Vec<String> = goods.iter().map(|g| format!("w_{g}")).collect();
    required.extend(goods.iter().map(|g| format!("log_p_{g}")));
    required.push("log_y".into());
    required.push("log_z".into());
    let mut missing: Vec<String> = required
        .iter()
        .filter(|c| !names.contains(&c.as_str()))
        .cloned()
        .collect();
    if goods.is_empty() {
        missing.insert(0, "w_<good>".into());
    }
    if !missing.is_empty() {
        return Err(CliError::Schema { missing });
    }
    let index: Vec<usize> = required
        .iter()
        .map(|c| names.iter().position(|h| h == c).expect("checked above"))
        .collect();
    let warnings = names
        .iter()
        .filter(|h| !required.iter().any(|c| c == *h))
        .map(|h| format!("ignoring extra column '{h}'"))
        .collect();

    let k = goods.len();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut dropped = 0;
    for record in reader.records() {
        if errors.len() >= MAX_ROW_ERRORS {
            break;
        }
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(RowError {
                    line,
                    column: String::new(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        let mut values = Vec::with_capacity(index.len());
        let mut ok = true;
        for (col, &i) in required.iter().zip(&index) {
            let cell = record.get(i).unwrap_or("").trim();
            match cell.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) => {
                    errors.push(RowError {
                        line,
                        column: col.clone(),
                        message: format!("line {line}: cannot parse {col} = '{cell}'"),
                    });
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let (shares, rest) = values.split_at(k);
        let (log_prices, tail) = rest.split_at(k);
        let (log_y, log_z) = (tail[0], tail[1]);
        if !(log_y.is_finite() && log_z.is_finite()) {
            dropped += 1;
            continue;
        }
        let mut row_error = None;
        for (g, w) in goods.iter().zip(shares) {
            if !(0.0..=1.0).contains(w) {
                row_error = Some((
                    format!("w_{g}"),
                    format!("line {line}: w_{g} = {w} outside [0, 1]"),
                ));
                break;
            }
        }
        if row_error.is_none() {
            if let Some((g, _)) = goods.iter().zip(log_prices).find(|(_, v)| !v.is_finite()) {
                row_error = Some((
                    format!("log_p_{g}"),
                    format!("line {line}: log_p_{g} is not finite"),
                ));
            } else if shares.iter().sum::<f64>() > 1.0 + 1e-9 {
                row_error = Some((
                    "w_*".into(),
                    format!("line {line}: modeled shares sum above 1"),
                ));
            }
        }
        if let Some((column, message)) = row_error {
            errors.push(RowError {
                line,
                column,
                message,
            });
            continue;
        }
        rows.push(Household {
            shares: shares.to_vec(),
            log_prices: log_prices.to_vec(),
            log_y,
            log_z,
        });
    }
    if !errors.is_empty() {
        return Err(CliError::Rows { errors });
    }
    if rows.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no usable rows",
            path.display()
        )));
    }
    Ok(Ingested {
        dataset: Dataset::new(goods, rows)?,
        dropped,
        warnings,
    })
}

/// Serializes a dataset in the ingestion schema.
pub fn dataset_csv(ds: &Dataset) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ds.goods().iter().map(|g| format!("w_{g}")).collect();
    header.extend(ds.goods().iter().map(|g| format!("log_p_{g}")));
    header.push("log_y".into());
    header.push("log_z".into());
    let io = |e: csv::Error| CliError::io("<csv>", e);
    w.write_record(&header).map_err(io)?;
    for r in ds.rows() {
        let mut rec: Vec<String> = r.shares.iter().map(f64::to_string).collect();
        rec.extend(r.log_prices.iter().map(f64::to_string));
        rec.push(r.log_y.to_string());
        rec.push(r.log_z.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::io("<csv>", e))
}
