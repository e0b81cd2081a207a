//! Published partition tables for Mira and JUQUEEN, and a checker that
//! recomputes every entry from the model.
//!
//! Bandwidths are in link units (one unit per node-level link crossing the
//! bisection).

use std::fmt;

use serde::Serialize;

use crate::bgq::{builtin_machine, partition_bisection_bw, MachineSpec};
use crate::error::Result;
use crate::policy::{audit, best_geometry, builtin_policy, realizable_sizes, PolicySpec};

pub type Entry = (&'static str, u64);

/// Mira's predefined geometry per size and, where it is better, the
/// geometry with the highest bisection.
pub const MIRA_CURRENT_VS_PROPOSED: [(u64, Entry, Option<Entry>); 10] = [
    (1, ("1x1x1x1", 256), None),
    (2, ("2x1x1x1", 256), None),
    (4, ("4x1x1x1", 256), Some(("2x2x1x1", 512))),
    (8, ("4x2x1x1", 512), Some(("2x2x2x1", 1024))),
    (16, ("4x4x1x1", 1024), Some(("2x2x2x2", 2048))),
    (24, ("4x3x2x1", 1536), Some(("3x2x2x2", 2048))),
    (32, ("4x4x2x1", 2048), None),
    (48, ("4x4x3x1", 3072), None),
    (64, ("4x4x2x2", 4096), None),
    (96, ("4x4x3x2", 6144), None),
];

/// Sizes at which Mira's predefined geometry can be improved.
pub const MIRA_IMPROVED: [u64; 4] = [4, 8, 16, 24];

/// JUQUEEN's worst fitting geometry per size and, where it differs, the best.
pub const JUQUEEN_WORST_VS_BEST: [(u64, Entry, Option<Entry>); 19] = [
    (1, ("1x1x1x1", 256), None),
    (2, ("2x1x1x1", 256), None),
    (3, ("3x1x1x1", 256), None),
    (4, ("4x1x1x1", 256), Some(("2x2x1x1", 512))),
    (5, ("5x1x1x1", 256), None),
    (6, ("6x1x1x1", 256), Some(("3x2x1x1", 512))),
    (7, ("7x1x1x1", 256), None),
    (8, ("4x2x1x1", 512), Some(("2x2x2x1", 1024))),
    (10, ("5x2x1x1", 512), None),
    (12, ("6x2x1x1", 512), Some(("3x2x2x1", 1024))),
    (14, ("7x2x1x1", 512), None),
    (16, ("4x2x2x1", 1024), Some(("2x2x2x2", 2048))),
    (20, ("5x2x2x1", 1024), None),
    (24, ("6x2x2x1", 1024), Some(("3x2x2x2", 2048))),
    (28, ("7x2x2x1", 1024), None),
    (32, ("4x2x2x2", 2048), None),
    (40, ("5x2x2x2", 2048), None),
    (48, ("6x2x2x2", 2048), None),
    (56, ("7x2x2x2", 2048), None),
];

/// Sizes at which JUQUEEN's worst and best geometries differ.
pub const JUQUEEN_DIFFERING: [u64; 6] = [4, 6, 8, 12, 16, 24];

/// Machines in [`JUQUEEN_FAMILY_BEST`] column order.
pub const JUQUEEN_FAMILY: [&str; 3] = ["JUQUEEN", "JUQUEEN-54", "JUQUEEN-48"];

/// Best geometry per size on JUQUEEN and two hypothetical reshapes.
pub const JUQUEEN_FAMILY_BEST: [(u64, [Option<Entry>; 3]); 24] = [
    (
        1,
        [
            Some(("1x1x1x1", 256)),
            Some(("1x1x1x1", 256)),
            Some(("1x1x1x1", 256)),
        ],
    ),
    (
        2,
        [
            Some(("2x1x1x1", 256)),
            Some(("2x1x1x1", 256)),
            Some(("2x1x1x1", 256)),
        ],
    ),
    (
        3,
        [
            Some(("3x1x1x1", 256)),
            Some(("3x1x1x1", 256)),
            Some(("3x1x1x1", 256)),
        ],
    ),
    (
        4,
        [
            Some(("2x2x1x1", 512)),
            Some(("2x2x1x1", 512)),
            Some(("2x2x1x1", 512)),
        ],
    ),
    (5, [Some(("5x1x1x1", 256)), None, None]),
    (
        6,
        [
            Some(("3x2x1x1", 512)),
            Some(("3x2x1x1", 512)),
            Some(("3x2x1x1", 512)),
        ],
    ),
    (7, [Some(("7x1x1x1", 256)), None, None]),
    (
        8,
        [
            Some(("2x2x2x1", 1024)),
            Some(("2x2x2x1", 1024)),
            Some(("2x2x2x1", 1024)),
        ],
    ),
    (9, [None, Some(("3x3x1x1", 768)), Some(("3x3x1x1", 768))]),
    (10, [Some(("5x2x1x1", 512)), None, None]),
    (
        12,
        [
            Some(("3x2x2x1", 1024)),
            Some(("3x2x2x1", 1024)),
            Some(("3x2x2x1", 1024)),
        ],
    ),
    (14, [Some(("7x2x1x1", 512)), None, None]),
    (
        16,
        [
            Some(("2x2x2x2", 2048)),
            Some(("2x2x2x2", 2048)),
            Some(("2x2x2x2", 2048)),
        ],
    ),
    (18, [None, Some(("3x3x2x1", 1536)), Some(("3x3x2x1", 1536))]),
    (20, [Some(("5x2x2x1", 1024)), None, None]),
    (
        24,
        [
            Some(("3x2x2x2", 2048)),
            Some(("3x2x2x2", 2048)),
            Some(("3x2x2x2", 2048)),
        ],
    ),
    (27, [None, Some(("3x3x3x1", 2304)), None]),
    (28, [Some(("7x2x2x1", 1024)), None, None]),
    (32, [Some(("4x2x2x2", 2048)), None, Some(("4x2x2x2", 2048))]),
    (36, [None, Some(("3x3x2x2", 3072)), Some(("3x3x2x2", 3072))]),
    (40, [Some(("5x2x2x2", 2048)), None, None]),
    (48, [Some(("6x2x2x2", 2048)), None, Some(("4x3x2x2", 3072))]),
    (54, [None, Some(("3x3x3x2", 4608)), None]),
    (56, [Some(("7x2x2x2", 2048)), None, None]),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub table: &'static str,
    pub midplanes: u64,
    pub column: String,
    pub expected: String,
    pub actual: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} size {} {}: expected {}, computed {}",
            self.table, self.midplanes, self.column, self.expected, self.actual
        )
    }
}

fn show(entry: Option<(&str, u64)>) -> String {
    match entry {
        Some((g, bw)) => format!("{g} ({bw})"),
        None => "-".into(),
    }
}

fn machine(name: &str) -> MachineSpec {
    builtin_machine(name).expect("builtin machine")
}

struct Collector(Vec<Mismatch>);

impl Collector {
    fn check(
        &mut self,
        table: &'static str,
        midplanes: u64,
        column: &str,
        expected: Option<Entry>,
        actual: Option<(String, u64)>,
    ) {
        let actual = actual.as_ref().map(|(g, bw)| (g.as_str(), *bw));
        if expected != actual {
            let mismatch = Mismatch {
                table,
                midplanes,
                column: column.into(),
                expected: show(expected),
                actual: show(actual),
            };
            self.0.push(mismatch);
        }
    }

    fn sizes(&mut self, table: &'static str, expected: &[u64], actual: &[u64]) {
        if expected != actual {
            self.0.push(Mismatch {
                table,
                midplanes: 0,
                column: "sizes".into(),
                expected: format!("{expected:?}"),
                actual: format!("{actual:?}"),
            });
        }
    }
}

pub fn check_mira() -> Result<Vec<Mismatch>> {
    let m = machine("mira");
    let policy = builtin_policy("mira-2017").expect("builtin policy");
    let sizes: Vec<u64> = MIRA_CURRENT_VS_PROPOSED.iter().map(|r| r.0).collect();
    let report = audit(&m, &policy, &sizes)?;
    let mut out = Collector(Vec::new());
    let mut improved = Vec::new();
    for ((size, current, proposed), row) in MIRA_CURRENT_VS_PROPOSED.iter().zip(&report.rows) {
        let baseline = row
            .baseline_geometry
            .map(|g| (g.to_string(), row.baseline_bw.unwrap_or_default()));
        out.check("mira", *size, "current", Some(*current), baseline);
        let better = row
            .improvable()
            .then(|| (row.best_geometry.to_string(), row.best_bw));
        out.check("mira", *size, "proposed", *proposed, better);
        if row.improvable() {
            improved.push(*size);
        }
    }
    out.sizes("mira improved", &MIRA_IMPROVED, &improved);
    Ok(out.0)
}

pub fn check_juqueen() -> Result<Vec<Mismatch>> {
    let m = machine("juqueen");
    let rows: Vec<_> = JUQUEEN_WORST_VS_BEST.iter().collect();
    let sizes: Vec<u64> = rows.iter().map(|r| r.0).collect();
    let mut out = Collector(Vec::new());
    out.sizes("juqueen sizes", &realizable_sizes(&m), &sizes);
    let report = audit(&m, &PolicySpec::any_fitting_cuboid(), &sizes)?;
    let mut differing = Vec::new();
    for ((size, worst, best), row) in rows.iter().zip(&report.rows) {
        let w = row
            .worst_geometry
            .map(|g| (g.to_string(), row.worst_bw.unwrap_or_default()));
        out.check("juqueen", *size, "worst", Some(*worst), w);
        let b = row
            .improvable()
            .then(|| (row.best_geometry.to_string(), row.best_bw));
        out.check("juqueen", *size, "best", *best, b);
        if row.improvable() {
            differing.push(*size);
        }
    }
    out.sizes("juqueen differing", &JUQUEEN_DIFFERING, &differing);
    Ok(out.0)
}

pub fn check_juqueen_family() -> Result<Vec<Mismatch>> {
    let machines: Vec<MachineSpec> = JUQUEEN_FAMILY.iter().map(|n| machine(n)).collect();
    let mut out = Collector(Vec::new());
    let sizes: Vec<u64> = JUQUEEN_FAMILY_BEST.iter().map(|r| r.0).collect();
    out.sizes(
        "juqueen family sizes",
        &sizes,
        &crate::policy::union_of_sizes(&machines),
    );
    for (size, expected) in &JUQUEEN_FAMILY_BEST {
        for (m, want) in machines.iter().zip(expected) {
            let got = best_geometry(m, *size)
                .ok()
                .map(|g| (g.to_string(), partition_bisection_bw(&g)));
            out.check("juqueen family", *size, &m.name, *want, got);
        }
    }
    Ok(out.0)
}

/// Recomputes every table; an empty result means full agreement.
pub fn check_all() -> Result<Vec<Mismatch>> {
    let mut all = check_mira()?;
    all.extend(check_juqueen()?);
    all.extend(check_juqueen_family()?);
    Ok(all)
}

/// Every geometry string appearing in the tables, for cross-validation.
pub fn all_geometries() -> Vec<&'static str> {
    let mut out: Vec<&'static str> = MIRA_CURRENT_VS_PROPOSED
        .iter()
        .chain(JUQUEEN_WORST_VS_BEST.iter())
        .flat_map(|(_, a, b)| std::iter::once(a.0).chain(b.map(|e| e.0)))
        .chain(
            JUQUEEN_FAMILY_BEST
                .iter()
                .flat_map(|(_, cells)| cells.iter().flatten().map(|e| e.0)),
        )
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Every `(geometry, bandwidth)` pair appearing in the tables.
pub fn all_entries() -> Vec<Entry> {
    let mut out: Vec<Entry> = MIRA_CURRENT_VS_PROPOSED
        .iter()
        .chain(JUQUEEN_WORST_VS_BEST.iter())
        .flat_map(|(_, a, b)| std::iter::once(*a).chain(*b))
        .chain(
            JUQUEEN_FAMILY_BEST
                .iter()
                .flat_map(|(_, cells)| cells.iter().flatten().copied()),
        )
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}
