//! File formats: record, result and band CSVs plus the JSON analysis report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexity::{ComplexityRecord, Role};
use crate::dialogue::{finalize_records, records_for_role};
use crate::stats::{
    bootstrap_bands, classify_convergence, fit_lmm, fit_ols, BootstrapBand, BootstrapConfig,
    ConvergencePattern, FitOptions, PositionScale, RegressionResult, StatsError,
};
use crate::treemetrics::TreeMetrics;

pub const RECORDS_HEADER: [&str; 10] = [
    "dialogue_id",
    "speaker",
    "role",
    "position",
    "sc",
    "length",
    "heads",
    "depth",
    "branching",
    "isc",
];

pub const RESULTS_HEADER: [&str; 10] = [
    "role", "method", "slope", "se", "p", "stars", "sigma_u2", "sigma_e2", "n_obs", "n_groups",
];

pub const BANDS_HEADER: [&str; 6] = ["role", "bin", "mean", "lo", "hi", "n"];

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("expected header {expected:?}, found {found:?}")]
    Header { expected: String, found: String },
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

fn write_csv<const N: usize>(header: [&str; N], rows: Vec<[String; N]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Record CSV; component and ISC columns are empty for synthetic records.
pub fn write_records_csv(records: &[ComplexityRecord]) -> String {
    let rows = records
        .iter()
        .map(|r| {
            let (length, heads, depth, branching) = match &r.components {
                Some(m) => (
                    m.length.to_string(),
                    m.head_count.to_string(),
                    m.depth.to_string(),
                    m.branching_factor.to_string(),
                ),
                None => Default::default(),
            };
            [
                r.dialogue_id.clone(),
                r.speaker.clone(),
                r.role.to_string(),
                r.position.to_string(),
                r.sc.to_string(),
                length,
                heads,
                depth,
                branching,
                r.isc.map(|v| v.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(RECORDS_HEADER, rows)
}

fn field<T: std::str::FromStr>(value: &str, row: usize, name: &str) -> Result<T, FormatError> {
    value.parse().map_err(|_| FormatError::Row {
        row,
        message: format!("invalid {name} {value:?}"),
    })
}

/// Reads a record CSV back. Normalized positions are recomputed and the
/// records re-sorted. The CSV carries no node count, so imported
/// components report `node_count = length`.
pub fn read_records_csv(text: &str) -> Result<Vec<ComplexityRecord>, FormatError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let found: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if found != RECORDS_HEADER {
        return Err(FormatError::Header {
            expected: RECORDS_HEADER.join(","),
            found: found.join(","),
        });
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let n = i + 2;
        let role: Role = row[2]
            .parse()
            .map_err(|message| FormatError::Row { row: n, message })?;
        let position: usize = field(&row[3], n, "position")?;
        if position == 0 {
            return Err(FormatError::Row {
                row: n,
                message: "position must be at least 1".into(),
            });
        }
        let components = if row[5].is_empty() {
            None
        } else {
            let length = field(&row[5], n, "length")?;
            Some(TreeMetrics {
                length,
                head_count: field(&row[6], n, "heads")?,
                depth: field(&row[7], n, "depth")?,
                branching_factor: field(&row[8], n, "branching")?,
                node_count: length,
            })
        };
        records.push(ComplexityRecord {
            dialogue_id: row[0].to_owned(),
            speaker: row[1].to_owned(),
            role,
            position,
            normalized_position: 0.0,
            sc: field(&row[4], n, "sc")?,
            components,
            isc: if row[9].is_empty() {
                None
            } else {
                Some(field(&row[9], n, "isc")?)
            },
        });
    }
    finalize_records(&mut records);
    Ok(records)
}

/// A fit with its significance stars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    #[serde(flatten)]
    pub result: RegressionResult,
    pub stars: String,
}

impl From<RegressionResult> for FitReport {
    fn from(result: RegressionResult) -> Self {
        let stars = result.stars().to_owned();
        FitReport { result, stars }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoleReport {
    pub role: Role,
    pub lmm: FitReport,
    pub ols: FitReport,
    pub bands: Vec<BootstrapBand>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub label: ConvergencePattern,
    pub alpha: f64,
    /// The fits the label was computed from.
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub position: PositionScale,
    pub bootstrap: BootstrapConfig,
    pub roles: Vec<RoleReport>,
    pub convergence: ConvergenceReport,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisOptions {
    pub alpha: f64,
    pub fit: FitOptions,
    pub bootstrap: BootstrapConfig,
}

impl AnalysisOptions {
    pub const DEFAULT_ALPHA: f64 = 0.05;
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            alpha: Self::DEFAULT_ALPHA,
            fit: FitOptions::default(),
            bootstrap: BootstrapConfig::default(),
        }
    }
}

/// Fits both models per role, bootstraps the bands and labels the pair of
/// mixed-model slopes.
pub fn analyze(
    records: &[ComplexityRecord],
    options: AnalysisOptions,
) -> Result<AnalysisReport, StatsError> {
    let mut roles = Vec::with_capacity(2);
    for role in Role::ALL {
        let subset = records_for_role(records, role);
        let lmm = fit_lmm(&subset, options.fit)?;
        let ols = fit_ols(&subset, options.fit)?;
        let bands = bootstrap_bands(&subset, options.bootstrap)?;
        roles.push(RoleReport {
            role,
            lmm: lmm.into(),
            ols: ols.into(),
            bands,
        });
    }
    let label = classify_convergence(&roles[0].lmm.result, &roles[1].lmm.result, options.alpha);
    Ok(AnalysisReport {
        position: options.fit.position,
        bootstrap: options.bootstrap,
        roles,
        convergence: ConvergenceReport {
            label: label.label,
            alpha: options.alpha,
            method: "lmm".into(),
        },
    })
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    /// One row per role and method.
    pub fn results_csv(&self) -> String {
        let rows = self
            .roles
            .iter()
            .flat_map(|r| [(r.role, &r.lmm), (r.role, &r.ols)])
            .map(|(role, fit)| {
                let res = &fit.result;
                [
                    role.to_string(),
                    res.method.as_str().to_owned(),
                    res.slope.to_string(),
                    res.slope_se.to_string(),
                    res.p_value.to_string(),
                    fit.stars.clone(),
                    res.sigma_u2.to_string(),
                    res.sigma_e2.to_string(),
                    res.n_obs.to_string(),
                    res.n_groups.to_string(),
                ]
            })
            .collect();
        write_csv(RESULTS_HEADER, rows)
    }
}

/// Band CSV for any set of `(role, bands)` pairs.
pub fn write_bands_csv(bands: &[(Role, Vec<BootstrapBand>)]) -> String {
    let rows = bands
        .iter()
        .flat_map(|(role, bs)| bs.iter().map(move |b| (role, b)))
        .map(|(role, b)| {
            [
                role.to_string(),
                b.bin.to_string(),
                b.mean_sc.to_string(),
                b.ci_low.to_string(),
                b.ci_high.to_string(),
                b.n_dialogues.to_string(),
            ]
        })
        .collect();
    write_csv(BANDS_HEADER, rows)
}

/// Per-role bands only, without model fitting.
pub fn plot_data(
    records: &[ComplexityRecord],
    config: BootstrapConfig,
) -> Result<Vec<(Role, Vec<BootstrapBand>)>, StatsError> {
    Role::ALL
        .iter()
        .map(|&role| {
            Ok((
                role,
                bootstrap_bands(&records_for_role(records, role), config)?,
            ))
        })
        .collect()
}
