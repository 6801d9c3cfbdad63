//! Metric aggregation and CSV / Markdown emission.
//!
//! A report holds one row per (seed, group) with a fixed column set;
//! aggregates are group-wise means and sample standard deviations,
//! recomputable from the rows. Emission is deliberately timestamp-free so
//! identical configs produce byte-identical documents.

/// Where a report came from: enough to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed_list: Vec<u64>,
    pub artifact_version: String,
}

/// One seed's metrics, optionally keyed by a sweep group (a gamma value, a
/// defense ratio, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRow {
    pub seed: u64,
    pub group: Option<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scenario: String,
    /// Value column names, fixed across all rows.
    pub columns: Vec<String>,
    pub rows: Vec<SeedRow>,
    pub provenance: Provenance,
}

/// Group-wise aggregate: mean and sample standard deviation per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub group: Option<String>,
    pub n: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl MetricsReport {
    pub fn new(
        scenario: &str,
        columns: Vec<String>,
        rows: Vec<SeedRow>,
        provenance: Provenance,
    ) -> Self {
        Self {
            scenario: scenario.to_string(),
            columns,
            rows,
            provenance,
        }
    }

    /// Aggregates in first-appearance group order; recomputable from rows.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut order: Vec<Option<String>> = Vec::new();
        for row in &self.rows {
            if !order.contains(&row.group) {
                order.push(row.group.clone());
            }
        }
        order
            .into_iter()
            .map(|group| {
                let members: Vec<&SeedRow> =
                    self.rows.iter().filter(|r| r.group == group).collect();
                let n = members.len();
                let k = self.columns.len();
                let mut mean = vec![0.0; k];
                for row in &members {
                    for (m, v) in mean.iter_mut().zip(&row.values) {
                        *m += v;
                    }
                }
                mean.iter_mut().for_each(|m| *m /= n as f64);
                let mut std = vec![0.0; k];
                if n > 1 {
                    for row in &members {
                        for ((s, v), m) in std.iter_mut().zip(&row.values).zip(&mean) {
                            *s += (v - m) * (v - m);
                        }
                    }
                    std.iter_mut()
                        .for_each(|s| *s = (*s / (n as f64 - 1.0)).sqrt());
                }
                Aggregate {
                    group,
                    n,
                    mean,
                    std,
                }
            })
            .collect()
    }

    /// The aggregate mean of one column within one group.
    pub fn group_mean(&self, group: &str, column: &str) -> Option<f64> {
        let col = self.columns.iter().position(|c| c == column)?;
        self.aggregates()
            .into_iter()
            .find(|a| a.group.as_deref() == Some(group))
            .map(|a| a.mean[col])
    }

    fn provenance_line(&self) -> String {
        format!(
            "scenario={} config_hash={} seeds={} version={}",
            self.scenario,
            self.provenance.config_hash,
            self.provenance
                .seed_list
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join("+"),
            self.provenance.artifact_version
        )
    }

    /// CSV: a provenance comment, a header, per-seed rows, then AGGREGATE
    /// mean/std rows per group.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\n", self.provenance_line());
        out.push_str("record,seed,group");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "seed,{},{}",
                row.seed,
                row.group.as_deref().unwrap_or("")
            ));
            for v in &row.values {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        for agg in self.aggregates() {
            let group = agg.group.as_deref().unwrap_or("");
            out.push_str(&format!("AGGREGATE_MEAN,,{group}"));
            for v in &agg.mean {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
            out.push_str(&format!("AGGREGATE_STD,,{group}"));
            for v in &agg.std {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    /// Markdown: one aggregate table row per group, mean (std) per column.
    pub fn to_markdown(&self) -> String {
        let mut out = format!("## {}\n\n`{}`\n\n", self.scenario, self.provenance_line());
        out.push_str("| group | n |");
        for c in &self.columns {
            out.push_str(&format!(" {c} |"));
        }
        out.push('\n');
        out.push_str("|---|---|");
        for _ in &self.columns {
            out.push_str("---|");
        }
        out.push('\n');
        for agg in self.aggregates() {
            out.push_str(&format!(
                "| {} | {} |",
                agg.group.as_deref().unwrap_or("all"),
                agg.n
            ));
            for (m, s) in agg.mean.iter().zip(&agg.std) {
                out.push_str(&format!(" {m:.4} ({s:.4}) |"));
            }
            out.push('\n');
        }
        out
    }
}

/// Renders a report in the requested format.
pub fn emit_report(report: &MetricsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Markdown => report.to_markdown(),
    }
}

/// Parses a CSV document produced by [`MetricsReport::to_csv`] back into
/// (seed, group, values) tuples. Used by round-trip checks.
pub fn parse_csv_rows(csv: &str) -> Vec<(u64, String, Vec<f64>)> {
    csv.lines()
        .filter(|l| l.starts_with("seed,"))
        .map(|l| {
            let mut parts = l.split(',');
            parts.next(); // record tag
            let seed = parts.next().unwrap().parse().unwrap();
            let group = parts.next().unwrap().to_string();
            let values = parts.map(|v| v.parse().unwrap()).collect();
            (seed, group, values)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> MetricsReport {
        MetricsReport::new(
            "spoof2",
            vec!["success".into(), "replay".into()],
            vec![
                SeedRow {
                    seed: 1,
                    group: Some("-3".into()),
                    values: vec![0.61, 0.30],
                },
                SeedRow {
                    seed: 2,
                    group: Some("-3".into()),
                    values: vec![0.59, 0.28],
                },
                SeedRow {
                    seed: 1,
                    group: Some("3".into()),
                    values: vec![0.9, 0.5],
                },
            ],
            Provenance {
                config_hash: "deadbeef00000000".into(),
                seed_list: vec![1, 2],
                artifact_version: "0.1.0".into(),
            },
        )
    }

    #[test]
    fn aggregates_are_groupwise_means() {
        let r = report();
        let aggs = r.aggregates();
        assert_eq!(aggs.len(), 2);
        assert_eq!(aggs[0].group.as_deref(), Some("-3"));
        assert!((aggs[0].mean[0] - 0.6).abs() < 1e-12);
        assert_eq!(aggs[0].n, 2);
        // Sample std of {0.61, 0.59} is 0.0141421...
        assert!((aggs[0].std[0] - 0.01414213562373095).abs() < 1e-12);
        assert_eq!(aggs[1].n, 1);
        assert_eq!(aggs[1].std, vec![0.0, 0.0]);
    }

    #[test]
    fn csv_round_trips_exactly() {
        let r = report();
        let csv = r.to_csv();
        assert!(csv.contains("config_hash=deadbeef00000000"));
        let rows = parse_csv_rows(&csv);
        assert_eq!(rows.len(), 3);
        for (parsed, original) in rows.iter().zip(&r.rows) {
            assert_eq!(parsed.0, original.seed);
            assert_eq!(&parsed.1, original.group.as_deref().unwrap());
            // f64 Display is shortest-round-trip, so equality is exact.
            assert_eq!(parsed.2, original.values);
        }
    }

    #[test]
    fn empty_report_emits_header_only() {
        let r = MetricsReport::new(
            "baseline1",
            vec!["throughput".into()],
            vec![],
            Provenance {
                config_hash: "0".into(),
                seed_list: vec![],
                artifact_version: "0.1.0".into(),
            },
        );
        let csv = r.to_csv();
        assert!(csv.lines().count() >= 2);
        assert!(r.aggregates().is_empty());
        let md = r.to_markdown();
        assert!(md.contains("| group |"));
    }

    #[test]
    fn markdown_has_one_row_per_group() {
        let md = report().to_markdown();
        let table_rows = md
            .lines()
            .filter(|l| l.starts_with("| ") && !l.starts_with("| group"))
            .count();
        assert_eq!(table_rows, 2);
    }
}
