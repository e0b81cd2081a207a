//! Rendering of audits, comparisons and simulations as aligned text, CSV or
//! JSON.
//!
//! Column names are fixed:
//!
//! * audit: `nodes, midplanes, baseline_geometry, baseline_bw,
//!   worst_geometry, worst_bw, best_geometry, best_bw, improvement`
//! * comparison: `nodes, midplanes`, then `<machine>_geometry, <machine>_bw`
//!   per machine
//! * simulation: `label, node_shape, dim_max_messages, bottleneck_messages,
//!   bottleneck_gb, round_time_s, total_time_s, ratio_to_first`
//!
//! Bandwidth columns are in link units unless GB/s is requested. Empty cells
//! render as `-` in text and as nothing in CSV. JSON documents always carry
//! link units together with the link capacity needed to convert them.

use std::fmt::Write as _;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{AuditReport, MachineComparison};
use crate::sim::{FlowResult, TrafficSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Domain(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BandwidthUnit {
    #[default]
    Links,
    Gbps,
}

/// Header plus rows of optional cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
}

impl Table {
    pub fn text(&self) -> String {
        let cell = |c: &Option<String>| c.clone().unwrap_or_else(|| "-".into());
        let mut widths: Vec<usize> = self.headers.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell(c).len());
            }
        }
        let mut out = String::new();
        let mut line = |cells: Vec<String>| {
            let joined: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", joined.join("  ").trim_end());
        };
        line(self.headers.clone());
        for row in &self.rows {
            line(row.iter().map(cell).collect());
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<&str> = row.iter().map(|c| c.as_deref().unwrap_or("")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Renders `table` as text or CSV, or `document` as pretty JSON.
pub fn render<T: Serialize>(format: Format, table: &Table, document: &T) -> String {
    match format {
        Format::Text => table.text(),
        Format::Csv => table.csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(document).expect("report types serialize");
            s.push('\n');
            s
        }
    }
}

fn bandwidth(bw: u64, unit: BandwidthUnit, capacity: f64) -> String {
    match unit {
        BandwidthUnit::Links => bw.to_string(),
        BandwidthUnit::Gbps => format!("{}", bw as f64 * capacity),
    }
}

/// Two decimals, exact for whole ratios.
pub fn format_ratio(r: Ratio<u64>) -> String {
    let (q, rem) = r.numer().div_rem(r.denom());
    if rem == 0 {
        format!("{q}.00")
    } else {
        format!("{:.2}", *r.numer() as f64 / *r.denom() as f64)
    }
}

pub fn audit_table(report: &AuditReport, unit: BandwidthUnit) -> Table {
    let cap = report.machine.link_capacity_gbps;
    let headers = [
        "nodes",
        "midplanes",
        "baseline_geometry",
        "baseline_bw",
        "worst_geometry",
        "worst_bw",
        "best_geometry",
        "best_bw",
        "improvement",
    ];
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                Some(r.node_count.to_string()),
                Some(r.midplanes.to_string()),
                r.baseline_geometry.map(|g| g.to_string()),
                r.baseline_bw.map(|b| bandwidth(b, unit, cap)),
                r.worst_geometry.map(|g| g.to_string()),
                r.worst_bw.map(|b| bandwidth(b, unit, cap)),
                Some(r.best_geometry.to_string()),
                Some(bandwidth(r.best_bw, unit, cap)),
                r.improvement_factor.map(format_ratio),
            ]
        })
        .collect();
    Table {
        headers: headers.iter().map(|s| s.to_string()).collect(),
        rows,
    }
}

pub fn comparison_table(cmp: &MachineComparison, unit: BandwidthUnit) -> Table {
    let mut headers = vec!["nodes".to_string(), "midplanes".to_string()];
    for m in &cmp.machines {
        headers.push(format!("{m}_geometry"));
        headers.push(format!("{m}_bw"));
    }
    let rows = cmp
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![
                Some(r.node_count.to_string()),
                Some(r.midplanes.to_string()),
            ];
            for (cell, cap) in r.cells.iter().zip(&cmp.link_capacity_gbps) {
                row.push(cell.map(|c| c.geometry.to_string()));
                row.push(cell.map(|c| bandwidth(c.bw, unit, *cap)));
            }
            row
        })
        .collect();
    Table { headers, rows }
}

/// Caveat attached to every simulation report.
pub const IDEALIZATION_NOTE: &str =
    "times assume the bottleneck link runs at full rate every round (idealized upper-bound throughput)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub label: String,
    pub node_shape: String,
    pub per_dimension_max_messages: Vec<f64>,
    pub bottleneck_messages: f64,
    pub bottleneck_load_gb: f64,
    pub predicted_round_time_s: f64,
    pub predicted_total_time_s: f64,
    pub counted_rounds: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub traffic: TrafficSpec,
    pub runs: Vec<FlowSummary>,
    /// `pairwise_ratios[i][j]` is run i's completion time over run j's.
    pub pairwise_ratios: Vec<Vec<f64>>,
    pub notes: Vec<String>,
}

impl SimulationReport {
    pub fn new(traffic: TrafficSpec, runs: &[(String, FlowResult)]) -> Self {
        let pairwise_ratios = runs
            .iter()
            .map(|(_, a)| runs.iter().map(|(_, b)| a.time_ratio(b)).collect())
            .collect();
        SimulationReport {
            traffic,
            runs: runs
                .iter()
                .map(|(label, r)| FlowSummary {
                    label: label.clone(),
                    node_shape: r.shape.to_string(),
                    per_dimension_max_messages: r.per_dimension_max_messages.clone(),
                    bottleneck_messages: r.bottleneck_messages,
                    bottleneck_load_gb: r.bottleneck_load_gb,
                    predicted_round_time_s: r.predicted_round_time_s,
                    predicted_total_time_s: r.predicted_total_time_s,
                    counted_rounds: r.counted_rounds,
                })
                .collect(),
            pairwise_ratios,
            notes: vec![IDEALIZATION_NOTE.to_string()],
        }
    }
}

pub fn simulation_table(report: &SimulationReport) -> Table {
    let headers = [
        "label",
        "node_shape",
        "dim_max_messages",
        "bottleneck_messages",
        "bottleneck_gb",
        "round_time_s",
        "total_time_s",
        "ratio_to_first",
    ];
    let rows = report
        .runs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let dims: Vec<String> = r
                .per_dimension_max_messages
                .iter()
                .map(|x| x.to_string())
                .collect();
            vec![
                Some(r.label.clone()),
                Some(r.node_shape.clone()),
                Some(dims.join(":")),
                Some(r.bottleneck_messages.to_string()),
                Some(format!("{:.6}", r.bottleneck_load_gb)),
                Some(format!("{:.6}", r.predicted_round_time_s)),
                Some(format!("{:.6}", r.predicted_total_time_s)),
                Some(format!("{:.4}", report.pairwise_ratios[i][0])),
            ]
        })
        .collect();
    Table {
        headers: headers.iter().map(|s| s.to_string()).collect(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgq::builtin_machine;
    use crate::policy::{audit, builtin_policy, compare_machines, PolicySpec};
    use crate::sim::simulate_pairing_benchmark;

    fn mira_audit() -> AuditReport {
        audit(
            &builtin_machine("mira").unwrap(),
            &builtin_policy("mira-2017").unwrap(),
            &[4, 24, 96],
        )
        .unwrap()
    }

    #[test]
    fn format_parsing() {
        assert_eq!("JSON".parse::<Format>().unwrap(), Format::Json);
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }

    #[test]
    fn ratio_formatting() {
        assert_eq!(format_ratio(Ratio::new(2048, 1024)), "2.00");
        assert_eq!(format_ratio(Ratio::new(2048, 1536)), "1.33");
        assert_eq!(format_ratio(Ratio::from_integer(1)), "1.00");
    }

    #[test]
    fn audit_csv() {
        let csv = audit_table(&mira_audit(), BandwidthUnit::Links).csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "nodes,midplanes,baseline_geometry,baseline_bw,worst_geometry,worst_bw,best_geometry,best_bw,improvement"
        );
        assert_eq!(lines[1], "2048,4,4x1x1x1,256,,,2x2x1x1,512,2.00");
        assert_eq!(lines[2], "12288,24,4x3x2x1,1536,,,3x2x2x2,2048,1.33");
        assert_eq!(lines[3], "49152,96,4x4x3x2,6144,,,4x4x3x2,6144,1.00");
        for line in &lines {
            assert_eq!(line.split(',').count(), 9);
        }
    }

    #[test]
    fn audit_text_is_aligned() {
        let text = audit_table(&mira_audit(), BandwidthUnit::Links).text();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("nodes  midplanes  baseline_geometry"));
        let col = lines[0].find("best_geometry").unwrap();
        assert_eq!(&lines[1][col..col + 7], "2x2x1x1");
        assert!(lines[1].contains(" - "));
    }

    #[test]
    fn gbps_units() {
        let csv = audit_table(&mira_audit(), BandwidthUnit::Gbps).csv();
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("2048,4,4x1x1x1,512,,,2x2x1x1,1024,"));
    }

    #[test]
    fn json_round_trip() {
        let report = mira_audit();
        let json = render(
            Format::Json,
            &audit_table(&report, BandwidthUnit::Links),
            &report,
        );
        let back: AuditReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);

        let any = audit(
            &builtin_machine("juqueen").unwrap(),
            &PolicySpec::any_fitting_cuboid(),
            &[12],
        )
        .unwrap();
        let back: AuditReport =
            serde_json::from_str(&serde_json::to_string(&any).unwrap()).unwrap();
        assert_eq!(back, any);

        let machines = vec![
            builtin_machine("juqueen").unwrap(),
            builtin_machine("juqueen-54").unwrap(),
        ];
        let cmp = compare_machines(&machines, &[48, 54]).unwrap();
        let back: MachineComparison =
            serde_json::from_str(&serde_json::to_string(&cmp).unwrap()).unwrap();
        assert_eq!(back, cmp);
    }

    #[test]
    fn comparison_csv_has_blank_cells() {
        let machines = vec![
            builtin_machine("juqueen").unwrap(),
            builtin_machine("juqueen-54").unwrap(),
        ];
        let cmp = compare_machines(&machines, &[48, 54]).unwrap();
        let csv = comparison_table(&cmp, BandwidthUnit::Links).csv();
        assert_eq!(
            csv,
            "nodes,midplanes,JUQUEEN_geometry,JUQUEEN_bw,JUQUEEN-54_geometry,JUQUEEN-54_bw\n\
             24576,48,6x2x2x2,2048,,\n\
             27648,54,,,3x3x3x2,4608\n"
        );
    }

    #[test]
    fn simulation_report() {
        let t = TrafficSpec::default();
        let runs: Vec<(String, FlowResult)> = ["4x1x1x1", "2x2x1x1"]
            .iter()
            .map(|g| {
                (
                    g.to_string(),
                    simulate_pairing_benchmark(&g.parse().unwrap(), &t).unwrap(),
                )
            })
            .collect();
        let report = SimulationReport::new(t, &runs);
        assert_eq!(report.pairwise_ratios[0][1], 2.0);
        assert_eq!(report.pairwise_ratios[1][0], 0.5);
        let csv = simulation_table(&report).csv();
        let first = csv.lines().nth(1).unwrap();
        assert!(
            first.starts_with("4x1x1x1,16x4x4x4x2,4:1:1:1:0.5,4,0.536800,"),
            "{first}"
        );
        assert!(first.ends_with(",1.0000"));
        let back: SimulationReport =
            serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        assert_eq!(back, report);
    }
}
