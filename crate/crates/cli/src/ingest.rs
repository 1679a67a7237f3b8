//! CSV ingestion: one separation per column, rows as points.

use anyhow::{bail, Context};
use tanglekit::instance::{Instance, SeparationJson};
use tanglekit::order::min_side_order;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    /// Columns must be exactly 0/1.
    Binary,
    /// Side = rows with value at least the column median.
    Median,
    /// Side = rows with value at least the given cut.
    Value(f64),
}

pub fn parse_threshold(spec: Option<&str>) -> anyhow::Result<Threshold> {
    match spec {
        None => Ok(Threshold::Binary),
        Some("median") => Ok(Threshold::Median),
        Some(s) => match s.strip_prefix("value:") {
            Some(v) => Ok(Threshold::Value(
                v.parse::<f64>()
                    .with_context(|| format!("bad threshold value {v:?}"))?,
            )),
            None => bail!("threshold must be `median` or `value:<x>`, got {s:?}"),
        },
    }
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Reads a CSV with a header row into an instance: each column becomes the
/// separation whose side holds the rows at or above the threshold.
/// Degenerate columns (empty or full side) are skipped with a warning on
/// standard error.
pub fn ingest_csv(text: &str, threshold: Threshold, attach_min_side: bool) -> anyhow::Result<Instance> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .context("missing header row")?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if headers.is_empty() {
        bail!("CSV has no columns");
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (row_index, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("row {}", row_index + 2))?;
        if record.len() != headers.len() {
            bail!(
                "row {}: expected {} fields, got {}",
                row_index + 2,
                headers.len(),
                record.len()
            );
        }
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                anyhow::anyhow!(
                    "parse error at row {}, column {}: {:?} is not numeric",
                    row_index + 2,
                    col + 1,
                    field
                )
            })?;
            if threshold == Threshold::Binary && value != 0.0 && value != 1.0 {
                bail!(
                    "parse error at row {}, column {}: {:?} is not 0/1; pass --threshold for numeric data",
                    row_index + 2,
                    col + 1,
                    field
                );
            }
            columns[col].push(value);
        }
    }
    let rows = columns[0].len();
    if rows == 0 {
        bail!("CSV has no data rows");
    }

    let mut separations = Vec::new();
    for (col, values) in columns.iter().enumerate() {
        let cut = match threshold {
            Threshold::Binary => 1.0,
            Threshold::Median => median(values),
            Threshold::Value(x) => x,
        };
        let side: Vec<usize> = (0..rows).filter(|&r| values[r] >= cut).collect();
        if side.is_empty() || side.len() == rows {
            eprintln!(
                "warning: column {:?} is degenerate (side of {} of {} rows); skipped",
                headers[col],
                side.len(),
                rows
            );
            continue;
        }
        separations.push(SeparationJson { side, order: None });
    }

    let mut instance = Instance {
        ground_set_size: rows,
        labels: None,
        separations,
        orientation: None,
        designated_sets: None,
        metadata: Some(serde_json::json!({
            "source": "csv",
            "columns": headers,
        })),
    };
    if attach_min_side {
        let (system, _) = instance.system()?;
        let orders = min_side_order(&system);
        instance = instance.canonicalized()?;
        for (sep, order) in instance.separations.iter_mut().zip(orders) {
            sep.order = Some(order);
        }
    }
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_columns_become_separations() {
        let csv = "a,b\n1,0\n1,0\n1,1\n0,1\n";
        let instance = ingest_csv(csv, Threshold::Binary, false).unwrap();
        assert_eq!(instance.ground_set_size, 4);
        assert_eq!(instance.separations.len(), 2);
        assert_eq!(instance.separations[0].side, vec![0, 1, 2]);
        assert_eq!(instance.separations[1].side, vec![2, 3]);
    }

    #[test]
    fn degenerate_columns_are_skipped() {
        let csv = "a,b\n1,1\n1,0\n1,1\n";
        let instance = ingest_csv(csv, Threshold::Binary, false).unwrap();
        assert_eq!(instance.separations.len(), 1);
        assert_eq!(instance.separations[0].side, vec![0, 2]);
    }

    #[test]
    fn median_threshold() {
        let csv = "x\n1.0\n2.0\n3.0\n10.0\n11.0\n12.0\n";
        let instance = ingest_csv(csv, Threshold::Median, false).unwrap();
        // median 6.5: the three large rows form the side
        assert_eq!(instance.separations[0].side, vec![3, 4, 5]);
    }

    #[test]
    fn non_binary_rejected_without_threshold() {
        let csv = "x\n0\n2\n";
        let err = ingest_csv(csv, Threshold::Binary, false).unwrap_err();
        assert!(err.to_string().contains("row 3, column 1"));
    }

    #[test]
    fn min_side_orders_attach() {
        let csv = "a,b\n1,0\n1,0\n1,1\n0,1\n";
        let instance = ingest_csv(csv, Threshold::Binary, true).unwrap();
        for sep in &instance.separations {
            let small = sep.side.len().min(4 - sep.side.len());
            assert_eq!(sep.order, Some(small as u64));
        }
    }
}
