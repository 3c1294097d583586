//! Scenario data model, CSV ingestion, validation and speedups.
//!
//! A scenario is read from three CSV files with header rows:
//!
//! ```text
//! versions.csv   id,name,code_size,is_baseline      (is_baseline is 0 or 1)
//! datasets.csv   id,f0,f1,...,f{k-1}                (arity fixed by the header)
//! runtimes.csv   dataset_id,version_id,runtime_seconds
//! ```
//!
//! Ingestion first builds a [`RawScenario`] that may violate any
//! invariant, runs [`validate_scenario`] over it, and only then produces an
//! immutable [`Scenario`]. Versions and datasets are stored sorted by id.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VersionId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DatasetId(pub u32);

impl fmt::Display for VersionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One optimized variant of the hot function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Version {
    pub id: VersionId,
    pub name: String,
    /// Bytes of machine code this version adds to the binary.
    pub code_size: u64,
    pub is_baseline: bool,
}

/// One input dataset, described by a fixed-arity feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: DatasetId,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuntimeCell {
    pub dataset: DatasetId,
    pub version: VersionId,
    pub seconds: f64,
}

/// Unvalidated scenario contents, as read from the tables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawScenario {
    pub versions: Vec<Version>,
    pub datasets: Vec<DatasetRecord>,
    pub runtimes: Vec<RuntimeCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Table {
    Versions,
    Datasets,
    Runtimes,
}

impl Table {
    pub fn name(self) -> &'static str {
        match self {
            Table::Versions => "versions",
            Table::Datasets => "datasets",
            Table::Runtimes => "runtimes",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    BaselineCount { found: usize },
    TooFewVersions { found: usize },
    NoDatasets,
    DuplicateId,
    NonPositiveCodeSize,
    NoFeatures,
    FeatureArity { expected: usize, got: usize },
    NonFiniteFeature { index: usize, value: f64 },
    UnknownReference,
    NonPositiveRuntime { seconds: f64 },
    NonFiniteRuntime { seconds: f64 },
    IncompleteMatrix,
}

impl ViolationKind {
    /// Short stable label identifying the class of violation.
    pub fn label(&self) -> &'static str {
        match self {
            ViolationKind::BaselineCount { .. } => "baseline count",
            ViolationKind::TooFewVersions { .. } => "too few versions",
            ViolationKind::NoDatasets => "no datasets",
            ViolationKind::DuplicateId => "duplicate id",
            ViolationKind::NonPositiveCodeSize | ViolationKind::NonPositiveRuntime { .. } => {
                "non-positive measurement"
            }
            ViolationKind::NoFeatures | ViolationKind::FeatureArity { .. } => "feature arity",
            ViolationKind::NonFiniteFeature { .. } | ViolationKind::NonFiniteRuntime { .. } => {
                "non-finite value"
            }
            ViolationKind::UnknownReference => "unknown reference",
            ViolationKind::IncompleteMatrix => "incomplete matrix",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ViolationKind::BaselineCount { .. } => 0,
            ViolationKind::TooFewVersions { .. } => 1,
            ViolationKind::NoDatasets => 2,
            ViolationKind::DuplicateId => 3,
            ViolationKind::NonPositiveCodeSize => 4,
            ViolationKind::NoFeatures => 5,
            ViolationKind::FeatureArity { .. } => 6,
            ViolationKind::NonFiniteFeature { .. } => 7,
            ViolationKind::UnknownReference => 8,
            ViolationKind::NonPositiveRuntime { .. } => 9,
            ViolationKind::NonFiniteRuntime { .. } => 10,
            ViolationKind::IncompleteMatrix => 11,
        }
    }
}

/// A violated scenario invariant and where it was found.
///
/// For the runtimes table `id` is the dataset id and `secondary` the
/// version id; for the other tables `id` is the row id and `secondary`
/// is unused. Table-wide violations carry no id.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub table: Table,
    pub id: Option<u32>,
    pub secondary: Option<u32>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.kind.label())?;
        match self.table {
            Table::Runtimes => match (self.id, self.secondary) {
                (Some(d), Some(v)) => write!(f, "dataset {d}, version {v}")?,
                _ => write!(f, "runtimes table")?,
            },
            Table::Versions => match self.id {
                Some(v) => write!(f, "version {v}")?,
                None => write!(f, "versions table")?,
            },
            Table::Datasets => match self.id {
                Some(d) => write!(f, "dataset {d}")?,
                None => write!(f, "datasets table")?,
            },
        }
        match &self.kind {
            ViolationKind::BaselineCount { found } => write!(f, " ({found} baselines, need 1)"),
            ViolationKind::TooFewVersions { found } => write!(f, " ({found} versions, need 2)"),
            ViolationKind::FeatureArity { expected, got } => {
                write!(f, " ({got} features, expected {expected})")
            }
            ViolationKind::NonFiniteFeature { index, value } => {
                write!(f, ", feature {index} = {value}")
            }
            ViolationKind::NonPositiveRuntime { seconds }
            | ViolationKind::NonFiniteRuntime { seconds } => write!(f, " ({seconds} s)"),
            _ => Ok(()),
        }
    }
}

/// Every violation found, sorted by table, then id. Empty means valid.
pub type ValidationReport = Vec<Violation>;

/// Checks every scenario invariant and reports all violations.
pub fn validate_scenario(raw: &RawScenario) -> ValidationReport {
    let mut out = Vec::new();
    let push = |out: &mut Vec<Violation>, table, id, secondary, kind| {
        out.push(Violation {
            table,
            id,
            secondary,
            kind,
        })
    };

    let baselines = raw.versions.iter().filter(|v| v.is_baseline).count();
    if baselines != 1 {
        push(
            &mut out,
            Table::Versions,
            None,
            None,
            ViolationKind::BaselineCount { found: baselines },
        );
    }
    let mut version_ids = BTreeSet::new();
    for v in &raw.versions {
        if !version_ids.insert(v.id) {
            push(
                &mut out,
                Table::Versions,
                Some(v.id.0),
                None,
                ViolationKind::DuplicateId,
            );
        }
        if v.code_size == 0 {
            push(
                &mut out,
                Table::Versions,
                Some(v.id.0),
                None,
                ViolationKind::NonPositiveCodeSize,
            );
        }
    }
    if version_ids.len() < 2 {
        push(
            &mut out,
            Table::Versions,
            None,
            None,
            ViolationKind::TooFewVersions {
                found: version_ids.len(),
            },
        );
    }

    if raw.datasets.is_empty() {
        push(
            &mut out,
            Table::Datasets,
            None,
            None,
            ViolationKind::NoDatasets,
        );
    }
    let arity = raw.datasets.first().map_or(0, |d| d.features.len());
    let mut dataset_ids = BTreeSet::new();
    for d in &raw.datasets {
        if !dataset_ids.insert(d.id) {
            push(
                &mut out,
                Table::Datasets,
                Some(d.id.0),
                None,
                ViolationKind::DuplicateId,
            );
        }
        if d.features.is_empty() {
            push(
                &mut out,
                Table::Datasets,
                Some(d.id.0),
                None,
                ViolationKind::NoFeatures,
            );
        } else if d.features.len() != arity {
            push(
                &mut out,
                Table::Datasets,
                Some(d.id.0),
                None,
                ViolationKind::FeatureArity {
                    expected: arity,
                    got: d.features.len(),
                },
            );
        }
        for (index, &value) in d.features.iter().enumerate() {
            if !value.is_finite() {
                push(
                    &mut out,
                    Table::Datasets,
                    Some(d.id.0),
                    None,
                    ViolationKind::NonFiniteFeature { index, value },
                );
            }
        }
    }

    let mut seen = BTreeSet::new();
    for cell in &raw.runtimes {
        let at = (Some(cell.dataset.0), Some(cell.version.0));
        if !dataset_ids.contains(&cell.dataset) || !version_ids.contains(&cell.version) {
            push(
                &mut out,
                Table::Runtimes,
                at.0,
                at.1,
                ViolationKind::UnknownReference,
            );
            continue;
        }
        if !seen.insert((cell.dataset, cell.version)) {
            push(
                &mut out,
                Table::Runtimes,
                at.0,
                at.1,
                ViolationKind::DuplicateId,
            );
        }
        if !cell.seconds.is_finite() {
            push(
                &mut out,
                Table::Runtimes,
                at.0,
                at.1,
                ViolationKind::NonFiniteRuntime {
                    seconds: cell.seconds,
                },
            );
        } else if cell.seconds <= 0.0 {
            push(
                &mut out,
                Table::Runtimes,
                at.0,
                at.1,
                ViolationKind::NonPositiveRuntime {
                    seconds: cell.seconds,
                },
            );
        }
    }
    for d in &dataset_ids {
        for v in &version_ids {
            if !seen.contains(&(*d, *v)) {
                push(
                    &mut out,
                    Table::Runtimes,
                    Some(d.0),
                    Some(v.0),
                    ViolationKind::IncompleteMatrix,
                );
            }
        }
    }

    out.sort_by(|a, b| {
        (a.table, a.id, a.secondary, a.kind.rank()).cmp(&(
            b.table,
            b.id,
            b.secondary,
            b.kind.rank(),
        ))
    });
    out
}

/// A validated, immutable scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    versions: Vec<Version>,
    datasets: Vec<DatasetRecord>,
    /// Row-major `[dataset][version]`, in sorted id order.
    runtimes: Vec<f64>,
    baseline: usize,
}

impl Scenario {
    /// Validates `raw` and builds the scenario, rejecting it with the first
    /// violation in report order.
    pub fn from_raw(raw: RawScenario) -> Result<Self> {
        if let Some(first) = validate_scenario(&raw).into_iter().next() {
            return Err(Error::Scenario(first));
        }
        let RawScenario {
            mut versions,
            mut datasets,
            runtimes: cells,
        } = raw;
        versions.sort_by_key(|v| v.id);
        datasets.sort_by_key(|d| d.id);
        let v_index: BTreeMap<VersionId, usize> = versions
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id, i))
            .collect();
        let d_index: BTreeMap<DatasetId, usize> = datasets
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id, i))
            .collect();
        let nv = versions.len();
        let mut runtimes = vec![0.0; datasets.len() * nv];
        for cell in cells {
            runtimes[d_index[&cell.dataset] * nv + v_index[&cell.version]] = cell.seconds;
        }
        let baseline = versions
            .iter()
            .position(|v| v.is_baseline)
            .expect("validated: one baseline");
        Ok(Scenario {
            versions,
            datasets,
            runtimes,
            baseline,
        })
    }

    pub fn to_raw(&self) -> RawScenario {
        let mut runtimes = Vec::with_capacity(self.runtimes.len());
        for (di, d) in self.datasets.iter().enumerate() {
            for (vi, v) in self.versions.iter().enumerate() {
                runtimes.push(RuntimeCell {
                    dataset: d.id,
                    version: v.id,
                    seconds: self.runtime(di, vi),
                });
            }
        }
        RawScenario {
            versions: self.versions.clone(),
            datasets: self.datasets.clone(),
            runtimes,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_scenario(&self.to_raw())
    }

    pub fn versions(&self) -> &[Version] {
        &self.versions
    }

    pub fn datasets(&self) -> &[DatasetRecord] {
        &self.datasets
    }

    pub fn arity(&self) -> usize {
        self.datasets[0].features.len()
    }

    pub fn baseline(&self) -> &Version {
        &self.versions[self.baseline]
    }

    pub fn baseline_id(&self) -> VersionId {
        self.baseline().id
    }

    pub fn version_index(&self, id: VersionId) -> Option<usize> {
        self.versions.binary_search_by_key(&id, |v| v.id).ok()
    }

    pub fn dataset_index(&self, id: DatasetId) -> Option<usize> {
        self.datasets.binary_search_by_key(&id, |d| d.id).ok()
    }

    pub fn version(&self, id: VersionId) -> Option<&Version> {
        self.version_index(id).map(|i| &self.versions[i])
    }

    /// Runtime by position in the sorted version and dataset lists.
    pub fn runtime(&self, dataset: usize, version: usize) -> f64 {
        self.runtimes[dataset * self.versions.len() + version]
    }

    pub fn code_sizes(&self) -> BTreeMap<VersionId, u64> {
        self.versions.iter().map(|v| (v.id, v.code_size)).collect()
    }

    pub fn speedups(&self) -> SpeedupMatrix {
        speedups(self)
    }

    pub fn versions_csv(&self) -> String {
        let mut out = String::from("id,name,code_size,is_baseline\n");
        for v in &self.versions {
            out.push_str(&format!(
                "{},{},{},{}\n",
                v.id,
                v.name,
                v.code_size,
                u8::from(v.is_baseline)
            ));
        }
        out
    }

    pub fn datasets_csv(&self) -> String {
        let mut out = String::from("id");
        for i in 0..self.arity() {
            out.push_str(&format!(",f{i}"));
        }
        out.push('\n');
        for d in &self.datasets {
            out.push_str(&d.id.to_string());
            for x in &d.features {
                out.push_str(&format!(",{x:?}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn runtimes_csv(&self) -> String {
        let mut out = String::from("dataset_id,version_id,runtime_seconds\n");
        for (di, d) in self.datasets.iter().enumerate() {
            for (vi, v) in self.versions.iter().enumerate() {
                out.push_str(&format!("{},{},{:?}\n", d.id, v.id, self.runtime(di, vi)));
            }
        }
        out
    }

    /// Writes `versions.csv`, `datasets.csv` and `runtimes.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [
            ("versions.csv", self.versions_csv()),
            ("datasets.csv", self.datasets_csv()),
            ("runtimes.csv", self.runtimes_csv()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

fn table_error(table: Table, err: &csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    Error::Table {
        table: table.name(),
        line,
        message: err.to_string(),
    }
}

fn reader<R: Read>(src: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(src)
}

fn parse_field<T: std::str::FromStr>(
    table: Table,
    record: &csv::StringRecord,
    index: usize,
    what: &str,
) -> Result<T> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(index).ok_or_else(|| Error::Table {
        table: table.name(),
        line,
        message: format!("missing field `{what}`"),
    })?;
    raw.parse().map_err(|_| Error::Table {
        table: table.name(),
        line,
        message: format!("cannot parse `{what}` from {raw:?}"),
    })
}

fn check_header(table: Table, got: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = got.iter().collect();
    if got != expected {
        return Err(Error::Table {
            table: table.name(),
            line: 1,
            message: format!(
                "expected header {:?}, found {:?}",
                expected.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

fn read_versions<R: Read>(src: R) -> Result<Vec<Version>> {
    let t = Table::Versions;
    let mut rdr = reader(src);
    let header = rdr.headers().map_err(|e| table_error(t, &e))?.clone();
    check_header(t, &header, &["id", "name", "code_size", "is_baseline"])?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| table_error(t, &e))?;
        let id: u32 = parse_field(t, &rec, 0, "id")?;
        let code_size: i64 = parse_field(t, &rec, 2, "code_size")?;
        let flag: u8 = parse_field(t, &rec, 3, "is_baseline")?;
        if flag > 1 {
            return Err(Error::Table {
                table: t.name(),
                line: rec.position().map_or(0, |p| p.line()),
                message: format!("is_baseline must be 0 or 1, found {flag}"),
            });
        }
        out.push(Version {
            id: VersionId(id),
            name: rec[1].to_string(),
            // Negative sizes are kept as 0 so validation reports them.
            code_size: code_size.max(0) as u64,
            is_baseline: flag == 1,
        });
    }
    Ok(out)
}

fn read_datasets<R: Read>(src: R) -> Result<Vec<DatasetRecord>> {
    let t = Table::Datasets;
    let mut rdr = reader(src);
    let header = rdr.headers().map_err(|e| table_error(t, &e))?.clone();
    if header.get(0) != Some("id") || header.len() < 2 {
        return Err(Error::Table {
            table: t.name(),
            line: 1,
            message: "expected header `id,f0,...` with at least one feature column".into(),
        });
    }
    let arity = header.len() - 1;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| table_error(t, &e))?;
        let id: u32 = parse_field(t, &rec, 0, "id")?;
        let features = (0..arity)
            .map(|i| parse_field::<f64>(t, &rec, i + 1, &header[i + 1]))
            .collect::<Result<Vec<_>>>()?;
        out.push(DatasetRecord {
            id: DatasetId(id),
            features,
        });
    }
    Ok(out)
}

fn read_runtimes<R: Read>(src: R) -> Result<Vec<RuntimeCell>> {
    let t = Table::Runtimes;
    let mut rdr = reader(src);
    let header = rdr.headers().map_err(|e| table_error(t, &e))?.clone();
    check_header(t, &header, &["dataset_id", "version_id", "runtime_seconds"])?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| table_error(t, &e))?;
        out.push(RuntimeCell {
            dataset: DatasetId(parse_field(t, &rec, 0, "dataset_id")?),
            version: VersionId(parse_field(t, &rec, 1, "version_id")?),
            seconds: parse_field(t, &rec, 2, "runtime_seconds")?,
        });
    }
    Ok(out)
}

/// Reads the three tables without validating the result.
pub fn read_raw_scenario<A: Read, B: Read, C: Read>(
    versions: A,
    datasets: B,
    runtimes: C,
) -> Result<RawScenario> {
    Ok(RawScenario {
        versions: read_versions(versions)?,
        datasets: read_datasets(datasets)?,
        runtimes: read_runtimes(runtimes)?,
    })
}

/// Reads and validates a scenario from the three CSV sources.
pub fn load_scenario<A: Read, B: Read, C: Read>(
    versions: A,
    datasets: B,
    runtimes: C,
) -> Result<Scenario> {
    Scenario::from_raw(read_raw_scenario(versions, datasets, runtimes)?)
}

/// Loads `versions.csv`, `datasets.csv` and `runtimes.csv` from `dir`.
pub fn load_scenario_dir(dir: &Path) -> Result<Scenario> {
    let open = |name: &str| {
        let path = dir.join(name);
        std::fs::File::open(&path).map_err(|e| Error::io(&path, e))
    };
    load_scenario(
        open("versions.csv")?,
        open("datasets.csv")?,
        open("runtimes.csv")?,
    )
}

/// Speedups of every version over the baseline, with cached logarithms.
///
/// Rows are datasets and columns versions, both in sorted id order. The
/// baseline column is exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupMatrix {
    baseline: usize,
    versions: Vec<VersionId>,
    code_sizes: Vec<u64>,
    datasets: Vec<DatasetId>,
    entries: Vec<f64>,
    log_entries: Vec<f64>,
}

/// `s(v, d) = t(baseline, d) / t(v, d)` for every cell.
pub fn speedups(scenario: &Scenario) -> SpeedupMatrix {
    let nv = scenario.versions.len();
    let nd = scenario.datasets.len();
    let mut entries = Vec::with_capacity(nv * nd);
    for d in 0..nd {
        let base = scenario.runtime(d, scenario.baseline);
        for v in 0..nv {
            entries.push(if v == scenario.baseline {
                1.0
            } else {
                base / scenario.runtime(d, v)
            });
        }
    }
    SpeedupMatrix::assemble(
        scenario.baseline,
        scenario.versions.iter().map(|v| v.id).collect(),
        scenario.versions.iter().map(|v| v.code_size).collect(),
        scenario.datasets.iter().map(|d| d.id).collect(),
        entries,
    )
}

impl SpeedupMatrix {
    fn assemble(
        baseline: usize,
        versions: Vec<VersionId>,
        code_sizes: Vec<u64>,
        datasets: Vec<DatasetId>,
        entries: Vec<f64>,
    ) -> Self {
        let log_entries = entries.iter().map(|s| s.ln()).collect();
        SpeedupMatrix {
            baseline,
            versions,
            code_sizes,
            datasets,
            entries,
            log_entries,
        }
    }

    /// Builds a matrix directly from per-version speedup rows.
    ///
    /// `baseline` is `(id, code_size)`; each candidate is
    /// `(id, code_size, speedups over datasets)`. Datasets get ids
    /// `0..n`. Intended for experiments and tests that start from
    /// speedups rather than runtimes.
    pub fn from_version_rows(
        baseline: (VersionId, u64),
        candidates: &[(VersionId, u64, Vec<f64>)],
    ) -> Result<Self> {
        let nd = candidates.first().map_or(0, |c| c.2.len());
        if nd == 0 {
            return Err(Error::Scenario(Violation {
                table: Table::Datasets,
                id: None,
                secondary: None,
                kind: ViolationKind::NoDatasets,
            }));
        }
        let mut cols: Vec<(VersionId, u64, Option<&[f64]>)> = vec![(baseline.0, baseline.1, None)];
        for (id, size, row) in candidates {
            if row.len() != nd {
                return Err(Error::LengthMismatch {
                    left: nd,
                    right: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
                return Err(Error::Scenario(Violation {
                    table: Table::Runtimes,
                    id: None,
                    secondary: Some(id.0),
                    kind: ViolationKind::NonPositiveRuntime { seconds: *bad },
                }));
            }
            cols.push((*id, *size, Some(row)));
        }
        cols.sort_by_key(|c| c.0);
        for w in cols.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Scenario(Violation {
                    table: Table::Versions,
                    id: Some(w[0].0 .0),
                    secondary: None,
                    kind: ViolationKind::DuplicateId,
                }));
            }
        }
        let baseline_idx = cols.iter().position(|c| c.2.is_none()).unwrap();
        let mut entries = Vec::with_capacity(nd * cols.len());
        for d in 0..nd {
            for c in &cols {
                entries.push(c.2.map_or(1.0, |row| row[d]));
            }
        }
        Ok(Self::assemble(
            baseline_idx,
            cols.iter().map(|c| c.0).collect(),
            cols.iter().map(|c| c.1).collect(),
            (0..nd as u32).map(DatasetId).collect(),
            entries,
        ))
    }

    pub fn n_versions(&self) -> usize {
        self.versions.len()
    }

    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn baseline_index(&self) -> usize {
        self.baseline
    }

    pub fn baseline_id(&self) -> VersionId {
        self.versions[self.baseline]
    }

    pub fn version_ids(&self) -> &[VersionId] {
        &self.versions
    }

    pub fn dataset_ids(&self) -> &[DatasetId] {
        &self.datasets
    }

    pub fn version_index(&self, id: VersionId) -> Option<usize> {
        self.versions.binary_search(&id).ok()
    }

    pub fn code_size(&self, version: usize) -> u64 {
        self.code_sizes[version]
    }

    pub fn code_size_of(&self, id: VersionId) -> Option<u64> {
        self.version_index(id).map(|i| self.code_sizes[i])
    }

    /// Ids of all non-baseline versions, ascending.
    pub fn candidate_ids(&self) -> Vec<VersionId> {
        self.versions
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.baseline)
            .map(|(_, v)| *v)
            .collect()
    }

    pub fn speedup(&self, dataset: usize, version: usize) -> f64 {
        self.entries[dataset * self.versions.len() + version]
    }

    pub fn log_speedup(&self, dataset: usize, version: usize) -> f64 {
        self.log_entries[dataset * self.versions.len() + version]
    }

    pub fn speedup_by_id(&self, dataset: DatasetId, version: VersionId) -> Option<f64> {
        let d = self.datasets.binary_search(&dataset).ok()?;
        let v = self.version_index(version)?;
        Some(self.speedup(d, v))
    }
}
