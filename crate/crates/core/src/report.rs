//! Structured text reports.
//!
//! Every command that produces a result writes it in one format:
//!
//! ```text
//! MVREPORT v1 kind=selection
//!
//! [selection]
//! selected = 1 2
//! objective = 1.3862943611198906
//!
//! [table trace]
//! step,picked,gain,objective
//! 1,3,0.8109302162163288,0.8109302162163288
//! ```
//!
//! After the header line come sections. A `[name]` section holds
//! `key = value` lines; a `[table name]` section holds a CSV header and
//! rows. Blank lines separate sections. Lists inside values are
//! space-separated. In [`Format::Machine`] every float is printed in its
//! shortest round-trip form and nothing depends on the clock, so equal
//! inputs give identical bytes. [`Format::Human`] rounds floats to six
//! significant digits and the CLI adds a `[run]` section with timings.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::dispatch::SimulationReport;
use crate::learners::CvReport;
use crate::model::{SpeedupMatrix, VersionId};
use crate::repselect::{evaluate_set, RepresentativeSet};
use crate::{Error, Result};

pub const REPORT_TAG: &str = "MVREPORT v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Human,
    #[default]
    Machine,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "human" => Ok(Format::Human),
            "machine" | "machine-stable" => Ok(Format::Machine),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Section {
    Values {
        name: String,
        entries: Vec<(String, String)>,
    },
    Table {
        name: String,
        header: Vec<String>,
        rows: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub kind: String,
    pub format: Format,
    pub sections: Vec<Section>,
}

impl Report {
    pub fn new(kind: &str, format: Format) -> Self {
        Report {
            kind: kind.into(),
            format,
            sections: Vec::new(),
        }
    }

    pub fn num(&self, x: f64) -> String {
        match self.format {
            Format::Machine => format!("{x:?}"),
            Format::Human if x.is_finite() && x != 0.0 => {
                let digits = (5 - x.abs().log10().floor() as i32).clamp(0, 12) as usize;
                let s = format!("{x:.digits$}");
                if s.contains('.') {
                    s.trim_end_matches('0').trim_end_matches('.').to_string()
                } else {
                    s
                }
            }
            Format::Human => format!("{x}"),
        }
    }

    pub fn values(&mut self, name: &str) -> &mut Vec<(String, String)> {
        self.sections.push(Section::Values {
            name: name.into(),
            entries: Vec::new(),
        });
        match self.sections.last_mut() {
            Some(Section::Values { entries, .. }) => entries,
            _ => unreachable!(),
        }
    }

    pub fn table(&mut self, name: &str, header: &[&str]) -> &mut Vec<Vec<String>> {
        self.sections.push(Section::Table {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        });
        match self.sections.last_mut() {
            Some(Section::Table { rows, .. }) => rows,
            _ => unreachable!(),
        }
    }

    /// Value of `key` in section `section`.
    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.iter().find_map(|s| match s {
            Section::Values { name, entries } if name == section => entries
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str()),
            _ => None,
        })
    }

    /// Header and rows of table `table`.
    pub fn get_table(&self, table: &str) -> Option<(&[String], &[Vec<String>])> {
        self.sections.iter().find_map(|s| match s {
            Section::Table { name, header, rows } if name == table => {
                Some((header.as_slice(), rows.as_slice()))
            }
            _ => None,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{REPORT_TAG} kind={}\n", self.kind);
        for s in &self.sections {
            out.push('\n');
            match s {
                Section::Values { name, entries } => {
                    writeln!(out, "[{name}]").unwrap();
                    for (k, v) in entries {
                        if v.is_empty() {
                            writeln!(out, "{k} =").unwrap();
                        } else {
                            writeln!(out, "{k} = {v}").unwrap();
                        }
                    }
                }
                Section::Table { name, header, rows } => {
                    writeln!(out, "[table {name}]").unwrap();
                    writeln!(out, "{}", header.join(",")).unwrap();
                    for r in rows {
                        writeln!(out, "{}", r.join(",")).unwrap();
                    }
                }
            }
        }
        out
    }

    /// Parses a report; the format is recorded as machine-stable.
    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::ReportParse { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty report".into()))?;
        let kind = header
            .strip_prefix(REPORT_TAG)
            .and_then(|rest| rest.trim().strip_prefix("kind="))
            .ok_or_else(|| err(1, format!("expected \"{REPORT_TAG} kind=<kind>\"")))?;
        let mut report = Report::new(kind, Format::Machine);
        for (ln, line) in lines {
            if line.is_empty() {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                match inner.strip_prefix("table ") {
                    Some(name) => {
                        report.sections.push(Section::Table {
                            name: name.into(),
                            header: Vec::new(),
                            rows: Vec::new(),
                        });
                    }
                    None => {
                        report.values(inner);
                    }
                }
                continue;
            }
            match report.sections.last_mut() {
                Some(Section::Values { entries, .. }) => {
                    let (k, v) = line
                        .split_once('=')
                        .ok_or_else(|| err(ln, "expected \"key = value\"".into()))?;
                    entries.push((k.trim().into(), v.trim().into()));
                }
                Some(Section::Table { header, rows, .. }) => {
                    let cells: Vec<String> = line.split(',').map(String::from).collect();
                    if header.is_empty() {
                        *header = cells;
                    } else if cells.len() != header.len() {
                        return Err(err(
                            ln,
                            format!("{} cells, header has {}", cells.len(), header.len()),
                        ));
                    } else {
                        rows.push(cells);
                    }
                }
                None => return Err(err(ln, "content before the first section".into())),
            }
        }
        Ok(report)
    }
}

fn ids(list: &[VersionId]) -> String {
    list.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses a space-separated id list as written in reports.
pub fn parse_ids(value: &str) -> Result<Vec<VersionId>> {
    value
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map(VersionId)
                .map_err(|_| Error::Config(format!("bad version id {t:?}")))
        })
        .collect()
}

fn kv(entries: &mut Vec<(String, String)>, key: &str, value: impl ToString) {
    entries.push((key.into(), value.to_string()));
}

/// Report of a representative set, with per-dataset losses against the
/// full oracle.
pub fn selection_report(
    set: &RepresentativeSet,
    matrix: &SpeedupMatrix,
    format: Format,
) -> Result<Report> {
    let metrics = evaluate_set(matrix, &set.selected)?;
    let mut r = Report::new("selection", format);
    let n = |x: f64| r.num(x);
    let c = &set.constraints;
    let summary = vec![
        ("baseline", set.baseline.to_string()),
        ("selected", ids(&set.selected)),
        ("count", set.count().to_string()),
        ("count_with_baseline", set.count_with_baseline().to_string()),
        ("objective", n(set.objective_value)),
        ("geomean_speedup", n(set.geomean_speedup)),
        ("oracle_geomean", n(set.oracle_geomean)),
        (
            "fraction_of_oracle",
            n(set.geomean_speedup / set.oracle_geomean),
        ),
        ("max_dataset_loss", n(set.max_dataset_loss)),
        ("covered_datasets", set.covered_count.to_string()),
        ("datasets", matrix.n_datasets().to_string()),
        ("size_bytes", set.size_bytes.to_string()),
        ("size_fraction", n(set.size_fraction)),
        ("budget_used", n(set.budget_used)),
        ("stop_reason", set.stop_reason.to_string()),
    ];
    let constraints = vec![
        ("max_versions", c.max_versions.to_string()),
        ("size_budget", n(c.size_budget)),
        ("loss_tolerance", n(c.loss_tolerance)),
        ("min_gain", n(c.min_gain)),
        ("mode", c.mode.to_string()),
    ];
    let trace: Vec<Vec<String>> = set
        .trace
        .iter()
        .enumerate()
        .map(|(i, t)| {
            vec![
                (i + 1).to_string(),
                t.picked.to_string(),
                n(t.gain),
                n(t.objective),
            ]
        })
        .collect();
    let removals: Vec<Vec<String>> = set
        .removals
        .iter()
        .map(|m| vec![m.removed.to_string(), n(m.loss), n(m.objective)])
        .collect();
    let losses: Vec<Vec<String>> = matrix
        .dataset_ids()
        .iter()
        .zip(&metrics.per_dataset_loss)
        .map(|(d, l)| vec![d.to_string(), n(*l)])
        .collect();

    let e = r.values("selection");
    for (k, v) in summary {
        kv(e, k, v);
    }
    let e = r.values("constraints");
    for (k, v) in constraints {
        kv(e, k, v);
    }
    *r.table("trace", &["step", "picked", "gain", "objective"]) = trace;
    *r.table("removals", &["removed", "loss", "objective"]) = removals;
    *r.table("losses", &["dataset_id", "loss"]) = losses;
    Ok(r)
}

pub fn cv_report(cv: &CvReport, format: Format) -> Report {
    let mut r = Report::new("cv", format);
    let n = |x: f64| r.num(x);
    let opt = |x: Option<f64>| x.map_or_else(|| "undefined".to_string(), n);
    let summary = vec![
        ("learner", cv.learner.name().to_string()),
        ("k", cv.k.to_string()),
        ("seed", cv.seed.to_string()),
        ("metric", cv.metric.to_string()),
        ("aggregate", opt(cv.aggregate)),
        ("samples", cv.assignment.len().to_string()),
    ];
    let folds: Vec<Vec<String>> = cv
        .folds
        .iter()
        .map(|f| {
            vec![
                f.fold.to_string(),
                f.train_size.to_string(),
                f.test_size.to_string(),
                opt(f.metric),
            ]
        })
        .collect();
    let confusion: Vec<Vec<String>> = cv
        .confusion
        .iter()
        .map(|((a, p), c)| vec![a.to_string(), p.to_string(), c.to_string()])
        .collect();
    let assignment: Vec<Vec<String>> = cv
        .assignment
        .iter()
        .enumerate()
        .map(|(i, f)| vec![i.to_string(), f.to_string()])
        .collect();

    let e = r.values("cv");
    for (k, v) in summary {
        kv(e, k, v);
    }
    let e = r.values("learner");
    for line in cv.learner.to_text().lines() {
        if let Some((k, v)) = line.split_once('=') {
            kv(e, k.trim(), v.trim());
        }
    }
    *r.table("folds", &["fold", "train_size", "test_size", "metric"]) = folds;
    if !confusion.is_empty() {
        *r.table("confusion", &["actual", "predicted", "count"]) = confusion;
    }
    *r.table("assignment", &["sample", "fold"]) = assignment;
    r
}

pub fn simulation_report(sim: &SimulationReport, format: Format) -> Report {
    let mut r = Report::new("simulation", format);
    let n = |x: f64| r.num(x);
    let overlap = if sim.overlapping_ids.is_empty() {
        "none".to_string()
    } else {
        let list: Vec<String> = sim.overlapping_ids.iter().map(|d| d.to_string()).collect();
        format!(
            "{} test datasets also occur in training: {}",
            list.len(),
            list.join(" ")
        )
    };
    let summary = vec![
        ("selector", sim.selector.to_string()),
        ("available", ids(&sim.available)),
        ("datasets", sim.outcomes.len().to_string()),
        ("geomean_realized", n(sim.geomean_realized)),
        ("geomean_ideal", n(sim.geomean_ideal)),
        ("geomean_oracle", n(sim.geomean_oracle)),
        (
            "fraction_of_representative_oracle",
            n(sim.fraction_of_representative_oracle),
        ),
        ("fraction_of_full_oracle", n(sim.fraction_of_full_oracle)),
        ("mispick_rate", n(sim.mispick_rate)),
        ("mean_comparisons", n(sim.mean_comparisons)),
        ("max_comparisons", sim.max_comparisons.to_string()),
        ("overlap_warning", overlap),
    ];
    let growth = sim.code_growth.map(|g| {
        vec![
            ("baseline_binary_size", g.baseline_binary_size.to_string()),
            ("selector_bytes", g.selector_bytes.to_string()),
            ("versions_bytes", g.versions_bytes.to_string()),
            ("selector_growth", n(g.selector_growth)),
            ("multiversioning_growth", n(g.multiversioning_growth)),
        ]
    });
    let rows: Vec<Vec<String>> = sim
        .outcomes
        .iter()
        .map(|o| {
            vec![
                o.dataset.to_string(),
                o.chosen.to_string(),
                n(o.speedup),
                o.ideal.to_string(),
                n(o.ideal_speedup),
                n(o.oracle_speedup),
                o.comparisons.to_string(),
            ]
        })
        .collect();

    let e = r.values("simulation");
    for (k, v) in summary {
        kv(e, k, v);
    }
    if let Some(growth) = growth {
        let e = r.values("code_growth");
        for (k, v) in growth {
            kv(e, k, v);
        }
    }
    *r.table(
        "datasets",
        &[
            "dataset_id",
            "chosen",
            "speedup",
            "ideal",
            "ideal_speedup",
            "oracle_speedup",
            "comparisons",
        ],
    ) = rows;
    r
}
