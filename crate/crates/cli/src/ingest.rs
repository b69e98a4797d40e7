//! Dataset readers for CSV and JSON files.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use serde::Deserialize;

use rbx_core::{Dataset, ExperienceVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` files are JSON, everything else is CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub format: Option<Format>,
    /// Treat the last CSV column as a weight even without a header.
    pub weight_column: bool,
    /// Dimension to use when the file itself cannot tell (an empty CSV).
    pub dim_hint: Option<usize>,
}

pub fn ingest_dataset(path: &Path, opts: &IngestOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read data file {}", path.display()))?;
    let format = opts.format.unwrap_or_else(|| Format::from_path(path));
    let parsed = match format {
        Format::Csv => parse_csv(&text, opts.weight_column, opts.dim_hint),
        Format::Json => parse_json(&text),
    };
    parsed.with_context(|| format!("in data file {}", path.display()))
}

fn parse_cell(cell: &str, line: u64, col: usize) -> Result<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| anyhow!("line {line}, column {}: `{cell}` is not a number", col + 1))?;
    if !v.is_finite() {
        bail!("line {line}, column {}: `{cell}` is not finite", col + 1);
    }
    Ok(v)
}

pub fn parse_csv(text: &str, weight_column: bool, dim_hint: Option<usize>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let mut weighted = weight_column;
    let mut width: Option<usize> = None;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();

    for (idx, record) in reader.records().enumerate() {
        let record = record.context("malformed CSV")?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if idx == 0 && record.iter().any(|c| c.parse::<f64>().is_err()) {
            if record
                .iter()
                .next_back()
                .is_some_and(|c| c.eq_ignore_ascii_case("weight"))
            {
                weighted = true;
            }
            width = Some(record.len());
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                bail!("line {line}: expected {w} columns, found {}", record.len())
            }
            _ => width = Some(record.len()),
        }
        let mut values = record
            .iter()
            .enumerate()
            .map(|(col, c)| parse_cell(c, line, col))
            .collect::<Result<Vec<f64>>>()?;
        let weight = if weighted {
            let w = values
                .pop()
                .ok_or_else(|| anyhow!("line {line}: empty row"))?;
            if w <= 0.0 {
                bail!("line {line}: weight must be positive, got {w}");
            }
            w
        } else {
            1.0
        };
        if values.is_empty() {
            bail!("line {line}: row has no coordinates");
        }
        rows.push((values, weight));
    }

    let dim = match (rows.first(), dim_hint) {
        (Some((v, _)), Some(n)) if v.len() != n => {
            bail!(
                "rows have {} coordinates but the ambient dimension is {n}",
                v.len()
            )
        }
        (Some((v, _)), _) => v.len(),
        (None, Some(n)) => n,
        (None, None) => bail!("cannot infer the dimension of an empty CSV file; set ambient_dim"),
    };
    let mut data = Dataset::new(dim);
    for (coords, weight) in rows {
        data.push(ExperienceVector::new(coords, weight)?)?;
    }
    Ok(data)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonData {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

pub fn parse_json(text: &str) -> Result<Dataset> {
    let raw: JsonData = serde_json::from_str(text).context("invalid data JSON")?;
    if let Some(w) = &raw.weights {
        if w.len() != raw.vectors.len() {
            bail!(
                "{} weights given for {} vectors",
                w.len(),
                raw.vectors.len()
            );
        }
    }
    let mut data = Dataset::new(raw.dim);
    for (i, coords) in raw.vectors.into_iter().enumerate() {
        if coords.len() != raw.dim {
            bail!(
                "vectors[{i}]: expected {} coordinates, found {}",
                raw.dim,
                coords.len()
            );
        }
        let weight = raw.weights.as_ref().map_or(1.0, |w| w[i]);
        let item =
            ExperienceVector::new(coords, weight).with_context(|| format!("weights[{i}]"))?;
        data.push(item)?;
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_row() {
        let d = parse_csv("1,2,0\n", false, None).unwrap();
        assert_eq!(d.ambient_dim(), 3);
        assert_eq!(d.items()[0].coords(), &[1.0, 2.0, 0.0]);
        assert_eq!(d.items()[0].weight(), 1.0);
    }

    #[test]
    fn weight_column_by_flag() {
        let d = parse_csv("1,2,0,3\n", true, None).unwrap();
        assert_eq!(d.ambient_dim(), 3);
        assert_eq!(d.items()[0].coords(), &[1.0, 2.0, 0.0]);
        assert_eq!(d.items()[0].weight(), 3.0);
    }

    #[test]
    fn weight_column_by_header() {
        let d = parse_csv("x,y,z,weight\n1,2,0,3\n1,0,3,1\n", false, None).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.total_weight(), 4.0);
        let d = parse_csv("x,y\n3,4\n", false, None).unwrap();
        assert_eq!(d.items()[0].weight(), 1.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_csv("1,2\n3,4\n5\n", false, None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = parse_csv("1,2\n3,abc\n", false, None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2") && err.contains("column 2"), "{err}");
        let err = parse_csv("1,2,1\n1,2,-1\n", true, None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn empty_csv_needs_hint() {
        assert!(parse_csv("", false, None).is_err());
        let d = parse_csv("", false, Some(2)).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.ambient_dim(), 2);
        assert!(parse_csv("1,2\n", false, Some(3)).is_err());
    }

    #[test]
    fn json_dataset() {
        let d = parse_json(r#"{"dim":2,"vectors":[[3,4],[1,2]]}"#).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.items()[1].coords(), &[1.0, 2.0]);
        let d = parse_json(r#"{"dim":2,"vectors":[[3,4]],"weights":[2.5]}"#).unwrap();
        assert_eq!(d.total_weight(), 2.5);
        assert!(parse_json(r#"{"dim":2,"vectors":[[3,4,5]]}"#).is_err());
        assert!(parse_json(r#"{"dim":2,"vectors":[[3,4]],"weights":[0]}"#).is_err());
        assert!(parse_json(r#"{"dim":2,"vectors":[[3,4]],"weights":[1,1]}"#).is_err());
    }
}
