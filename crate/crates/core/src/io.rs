//! Instance files: JSON (explicit matrix or coordinates) and CSV points.

use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::DiversityInstance;
use crate::metric::{DistanceMatrix, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    CsvPoints,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" | "csv-points" => Ok(Format::CsvPoints),
            _ => Err(Error::BadParameter(format!("unknown instance format '{s}'"))),
        }
    }
}

/// On-disk JSON instance. Exactly one of `points` / `distances` is given;
/// `clients` and `facilities` default to every point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default = "default_objective")]
    pub objective: Objective,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clients: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facilities: Option<Vec<usize>>,
    pub groups: Vec<Vec<usize>>,
    pub requirements: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

fn default_objective() -> Objective {
    Objective::Median
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<DiversityInstance> {
        let n = match (&self.points, &self.distances) {
            (Some(p), None) => p.len(),
            (None, Some(d)) => d.len(),
            (Some(_), Some(_)) => return Err(Error::Schema("give either 'points' or 'distances', not both".into())),
            (None, None) => return Err(Error::Schema("missing 'points' or 'distances'".into())),
        };
        if n == 0 {
            return Err(Error::Schema("instance has no points".into()));
        }
        let clients = self.clients.unwrap_or_else(|| (0..n).collect());
        let facilities = self.facilities.unwrap_or_else(|| (0..n).collect());
        for (field, ids) in [("clients", &clients), ("facilities", &facilities)] {
            if let Some(&bad) = ids.iter().find(|&&i| i >= n) {
                return Err(Error::Schema(format!(
                    "'{field}' refers to point {bad}, but there are {n} points"
                )));
            }
        }
        let metric = match (self.points, self.distances) {
            (Some(points), _) => DistanceMatrix::from_points(&points, clients, facilities)?,
            (_, Some(rows)) => {
                if let Some(i) = rows.iter().position(|r| r.len() != n) {
                    return Err(Error::Schema(format!(
                        "'distances' row {i} has {} entries, expected {n}",
                        rows[i].len()
                    )));
                }
                DistanceMatrix::new(n, rows.concat(), clients, facilities)?
            }
            _ => unreachable!(),
        };
        let inst = DiversityInstance::new(Arc::new(metric), self.groups, self.requirements, self.k, self.objective)?;
        match self.labels {
            Some(l) => inst.with_labels(l),
            None => Ok(inst),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

pub fn parse_json(text: &str) -> Result<DiversityInstance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => Error::Schema(e.to_string()),
        _ => Error::Parse(e.to_string()),
    })?;
    file.into_instance()
}

/// CSV points: `id,x1,..,xd,is_client,is_facility,groups` with `;`-separated
/// group indices, preceded by `# k=`, `# requirements=` and optional
/// `# objective=` lines. Point order is row order; ids become labels.
pub fn parse_csv(text: &str) -> Result<DiversityInstance> {
    let mut k = None;
    let mut requirements: Option<Vec<usize>> = None;
    let mut objective = Objective::Median;
    for line in text.lines().map(str::trim).filter(|l| l.starts_with('#')) {
        let Some((key, value)) = line.trim_start_matches('#').split_once('=') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "k" => k = Some(value.parse().map_err(|_| Error::Parse(format!("bad k '{value}'")))?),
            "requirements" => {
                requirements = Some(
                    value
                        .split(',')
                        .map(|r| {
                            r.trim()
                                .parse()
                                .map_err(|_| Error::Parse(format!("bad requirement '{r}'")))
                        })
                        .collect::<Result<_>>()?,
                )
            }
            "objective" => objective = value.parse()?,
            other => return Err(Error::Schema(format!("unknown directive '{other}'"))),
        }
    }
    let k = k.ok_or_else(|| Error::Schema("missing '# k=' directive".into()))?;
    let requirements = requirements.ok_or_else(|| Error::Schema("missing '# requirements=' directive".into()))?;

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let dim = headers
        .len()
        .checked_sub(4)
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::Schema("csv header must be id,x1..xd,is_client,is_facility,groups".into()))?;

    let flag = |s: &str, row: usize| match s {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        _ => Err(Error::Schema(format!("row {row}: expected 0/1, got '{s}'"))),
    };
    let mut seen = BTreeSet::new();
    let (mut labels, mut points, mut clients, mut facilities) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut groups = vec![Vec::new(); requirements.len()];
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.len() != dim + 4 {
            return Err(Error::Schema(format!(
                "row {row} has {} fields, expected {}",
                rec.len(),
                dim + 4
            )));
        }
        let id = rec[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(Error::Schema(format!("duplicate point id '{id}'")));
        }
        let coords = (1..=dim)
            .map(|i| {
                rec[i]
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {row}: bad coordinate '{}'", &rec[i])))
            })
            .collect::<Result<Vec<_>>>()?;
        if flag(&rec[dim + 1], row)? {
            clients.push(row);
        }
        if flag(&rec[dim + 2], row)? {
            facilities.push(row);
        }
        for tag in rec[dim + 3].split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let g: usize = tag
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}: bad group tag '{tag}'")))?;
            groups
                .get_mut(g)
                .ok_or_else(|| Error::Schema(format!("row {row}: group {g} has no requirement")))?
                .push(row);
        }
        labels.push(id);
        points.push(coords);
    }
    InstanceFile {
        objective,
        k,
        points: Some(points),
        distances: None,
        clients: Some(clients),
        facilities: Some(facilities),
        groups,
        requirements,
        labels: Some(labels),
    }
    .into_instance()
}

pub fn load_instance(path: &Path, format: Format) -> Result<DiversityInstance> {
    let text = std::fs::read_to_string(path)?;
    match format {
        Format::Json => parse_json(&text),
        Format::CsvPoints => parse_csv(&text),
    }
}
