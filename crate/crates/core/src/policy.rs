//! Allocation-policy audits: which partition geometries a machine admits
//! for a given midplane count, which of them maximizes internal bisection,
//! and how the geometries a scheduler hands out compare with the best one.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::bgq::{
    fits, partition_bisection_bw, MachineSpec, PartitionGeometry, NODES_PER_MIDPLANE,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyMode {
    /// Only the listed geometries may be allocated.
    ExplicitList,
    /// Any cuboid of midplanes that fits the machine may be allocated.
    AnyFittingCuboid,
}

impl fmt::Display for PolicyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyMode::ExplicitList => "explicit-list",
            PolicyMode::AnyFittingCuboid => "any-fitting-cuboid",
        })
    }
}

impl FromStr for PolicyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit-list" | "explicit" => Ok(PolicyMode::ExplicitList),
            "any-fitting-cuboid" | "any" => Ok(PolicyMode::AnyFittingCuboid),
            other => Err(Error::Domain(format!("unknown policy mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub name: String,
    pub mode: PolicyMode,
    /// `(midplanes, geometry)` entries; empty unless the mode is explicit.
    pub allowed: Vec<(u64, PartitionGeometry)>,
}

/// Mira's predefined partition list as of 2017.
const MIRA_2017: [(u64, [u32; 4]); 10] = [
    (1, [1, 1, 1, 1]),
    (2, [2, 1, 1, 1]),
    (4, [4, 1, 1, 1]),
    (8, [4, 2, 1, 1]),
    (16, [4, 4, 1, 1]),
    (24, [4, 3, 2, 1]),
    (32, [4, 4, 2, 1]),
    (48, [4, 4, 3, 1]),
    (64, [4, 4, 2, 2]),
    (96, [4, 4, 3, 2]),
];

impl PolicySpec {
    pub fn any_fitting_cuboid() -> Self {
        PolicySpec {
            name: "any".into(),
            mode: PolicyMode::AnyFittingCuboid,
            allowed: Vec::new(),
        }
    }

    pub fn explicit(
        name: impl Into<String>,
        allowed: Vec<(u64, PartitionGeometry)>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (size, g) in &allowed {
            if g.volume() != *size {
                return Err(Error::Domain(format!(
                    "policy entry {g} has {} midplanes, listed as {size}",
                    g.volume()
                )));
            }
            if !seen.insert(*size) {
                return Err(Error::Domain(format!("policy lists size {size} twice")));
            }
        }
        Ok(PolicySpec {
            name: name.into(),
            mode: PolicyMode::ExplicitList,
            allowed,
        })
    }

    /// Checks every listed geometry fits `machine`.
    pub fn validate(&self, machine: &MachineSpec) -> Result<()> {
        match self.allowed.iter().find(|(_, g)| !fits(machine, g)) {
            Some((_, g)) => Err(Error::Domain(format!(
                "policy {} lists {g}, which does not fit {} ({})",
                self.name, machine.name, machine.grid
            ))),
            None => Ok(()),
        }
    }

    pub fn geometry_for(&self, midplanes: u64) -> Option<PartitionGeometry> {
        self.allowed
            .iter()
            .find(|(s, _)| *s == midplanes)
            .map(|(_, g)| *g)
    }

    /// Parses the plain-text policy format: a `mode` line, then for
    /// explicit lists one `<midplanes> <geometry>` entry per line.
    ///
    /// ```text
    /// # name of the policy comes from the caller
    /// mode explicit-list
    /// 1 1x1x1x1
    /// 4 4x1x1x1
    /// ```
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut mode = None;
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            if let Some(rest) = line.strip_prefix("mode") {
                let value = rest.trim().trim_start_matches('=').trim();
                if mode.is_some() {
                    return Err(err("duplicate mode line".into()));
                }
                mode = Some(
                    value
                        .parse::<PolicyMode>()
                        .map_err(|e| err(e.to_string()))?,
                );
                continue;
            }
            if mode.is_none() {
                return Err(err("the first entry must be the mode line".into()));
            }
            let (size, geometry) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(format!("expected `<midplanes> <geometry>`, got {line:?}")))?;
            let size: u64 = size
                .parse()
                .map_err(|_| err(format!("bad midplane count {size:?}")))?;
            let geometry: PartitionGeometry = geometry
                .trim()
                .parse()
                .map_err(|e: Error| err(e.to_string()))?;
            entries.push((size, geometry));
        }
        match mode {
            None => Err(Error::Parse {
                line: 0,
                message: "policy file has no mode line".into(),
            }),
            Some(PolicyMode::AnyFittingCuboid) if !entries.is_empty() => Err(Error::Parse {
                line: 0,
                message: "any-fitting-cuboid policies take no entries".into(),
            }),
            Some(PolicyMode::AnyFittingCuboid) => Ok(PolicySpec {
                name: name.into(),
                ..PolicySpec::any_fitting_cuboid()
            }),
            Some(PolicyMode::ExplicitList) => PolicySpec::explicit(name, entries),
        }
    }

    pub fn to_file_format(&self) -> String {
        let mut out = format!("mode {}\n", self.mode);
        for (size, g) in &self.allowed {
            out.push_str(&format!("{size} {g}\n"));
        }
        out
    }
}

/// Built-in policies: `mira-2017` (Mira's predefined list) and `any`.
pub fn builtin_policy(name: &str) -> Option<PolicySpec> {
    match name.to_ascii_lowercase().as_str() {
        "any" | "any-fitting-cuboid" => Some(PolicySpec::any_fitting_cuboid()),
        "mira-2017" => Some(
            PolicySpec::explicit(
                "mira-2017",
                MIRA_2017
                    .iter()
                    .map(|&(s, g)| (s, PartitionGeometry::new(&g).expect("builtin geometry")))
                    .collect(),
            )
            .expect("builtin policy"),
        ),
        _ => None,
    }
}

/// All distinct fitting geometries of exactly `midplanes` midplanes, by
/// descending bisection, ties in ascending lexicographic order.
pub fn enumerate_geometries(machine: &MachineSpec, midplanes: u64) -> Vec<PartitionGeometry> {
    let mut found = BTreeSet::new();
    if midplanes == 0 {
        return Vec::new();
    }
    let divisors = |n: u64| (1..=n).filter(move |d| n.is_multiple_of(*d));
    for a in divisors(midplanes) {
        for b in divisors(midplanes / a) {
            for c in divisors(midplanes / (a * b)) {
                let d = midplanes / (a * b * c);
                let dims = [a, b, c, d];
                if dims.iter().any(|&x| x > u32::MAX as u64) {
                    continue;
                }
                let g = PartitionGeometry::new(&dims.map(|x| x as u32)).expect("positive factors");
                if fits(machine, &g) {
                    found.insert(g);
                }
            }
        }
    }
    let mut out: Vec<PartitionGeometry> = found.into_iter().collect();
    out.sort_by_key(|g| (Reverse(partition_bisection_bw(g)), *g));
    out
}

/// Fitting geometry with the largest bisection; ties go to the
/// lexicographically least canonical form.
pub fn best_geometry(machine: &MachineSpec, midplanes: u64) -> Result<PartitionGeometry> {
    enumerate_geometries(machine, midplanes)
        .first()
        .copied()
        .ok_or_else(|| Error::NoGeometry {
            machine: machine.name.clone(),
            midplanes,
        })
}

/// Fitting geometry with the smallest bisection; ties go to the
/// lexicographically greatest (most elongated) canonical form.
pub fn worst_geometry(machine: &MachineSpec, midplanes: u64) -> Result<PartitionGeometry> {
    enumerate_geometries(machine, midplanes)
        .last()
        .copied()
        .ok_or_else(|| Error::NoGeometry {
            machine: machine.name.clone(),
            midplanes,
        })
}

/// Midplane counts for which at least one geometry fits, ascending.
pub fn realizable_sizes(machine: &MachineSpec) -> Vec<u64> {
    let [a, b, c, d] = machine.grid.dims();
    let mut sizes = BTreeSet::new();
    for x in 1..=a as u64 {
        for y in 1..=b as u64 {
            for z in 1..=c as u64 {
                for w in 1..=d as u64 {
                    sizes.insert(x * y * z * w);
                }
            }
        }
    }
    sizes.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub node_count: u64,
    pub midplanes: u64,
    pub baseline_geometry: Option<PartitionGeometry>,
    pub baseline_bw: Option<u64>,
    pub best_geometry: PartitionGeometry,
    pub best_bw: u64,
    pub worst_geometry: Option<PartitionGeometry>,
    pub worst_bw: Option<u64>,
    /// `best_bw` over the baseline bandwidth, or over the worst-case
    /// bandwidth when the policy has no baseline.
    pub improvement_factor: Option<Ratio<u64>>,
}

impl AuditRow {
    /// Whether a better geometry than the one the policy yields exists.
    pub fn improvable(&self) -> bool {
        self.improvement_factor
            .is_some_and(|f| f > Ratio::from_integer(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub machine: MachineSpec,
    pub policy: String,
    pub mode: PolicyMode,
    pub rows: Vec<AuditRow>,
}

/// Sizes audited when none are requested: the policy's listed sizes, or
/// every realizable size for any-cuboid policies.
pub fn default_sizes(machine: &MachineSpec, policy: &PolicySpec) -> Vec<u64> {
    match policy.mode {
        PolicyMode::ExplicitList => policy.allowed.iter().map(|(s, _)| *s).collect(),
        PolicyMode::AnyFittingCuboid => realizable_sizes(machine),
    }
}

pub fn audit(machine: &MachineSpec, policy: &PolicySpec, sizes: &[u64]) -> Result<AuditReport> {
    if sizes.is_empty() {
        return Err(Error::Domain("no sizes to audit".into()));
    }
    policy.validate(machine)?;
    let sizes: BTreeSet<u64> = sizes.iter().copied().collect();
    let mut rows = Vec::with_capacity(sizes.len());
    for midplanes in sizes {
        let best = best_geometry(machine, midplanes)?;
        let best_bw = partition_bisection_bw(&best);
        let (baseline, worst) = match policy.mode {
            PolicyMode::ExplicitList => (policy.geometry_for(midplanes), None),
            PolicyMode::AnyFittingCuboid => (None, Some(worst_geometry(machine, midplanes)?)),
        };
        let baseline_bw = baseline.as_ref().map(partition_bisection_bw);
        let worst_bw = worst.as_ref().map(partition_bisection_bw);
        let reference = baseline_bw.or(worst_bw);
        rows.push(AuditRow {
            node_count: midplanes * NODES_PER_MIDPLANE,
            midplanes,
            baseline_geometry: baseline,
            baseline_bw,
            best_geometry: best,
            best_bw,
            worst_geometry: worst,
            worst_bw,
            improvement_factor: reference.map(|r| Ratio::new(best_bw, r)),
        });
    }
    Ok(AuditReport {
        machine: machine.clone(),
        policy: policy.name.clone(),
        mode: policy.mode,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub geometry: PartitionGeometry,
    pub bw: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub node_count: u64,
    pub midplanes: u64,
    /// One cell per machine, absent when the size does not fit.
    pub cells: Vec<Option<ComparisonCell>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineComparison {
    pub machines: Vec<String>,
    pub link_capacity_gbps: Vec<f64>,
    pub rows: Vec<ComparisonRow>,
}

/// Union of the realizable sizes of all machines.
pub fn union_of_sizes(machines: &[MachineSpec]) -> Vec<u64> {
    let set: BTreeSet<u64> = machines.iter().flat_map(realizable_sizes).collect();
    set.into_iter().collect()
}

pub fn compare_machines(machines: &[MachineSpec], sizes: &[u64]) -> Result<MachineComparison> {
    if machines.is_empty() || sizes.is_empty() {
        return Err(Error::Domain(
            "comparison needs at least one machine and one size".into(),
        ));
    }
    let sizes: BTreeSet<u64> = sizes.iter().copied().collect();
    let rows = sizes
        .into_iter()
        .map(|midplanes| ComparisonRow {
            node_count: midplanes * NODES_PER_MIDPLANE,
            midplanes,
            cells: machines
                .iter()
                .map(|m| {
                    best_geometry(m, midplanes).ok().map(|g| ComparisonCell {
                        geometry: g,
                        bw: partition_bisection_bw(&g),
                    })
                })
                .collect(),
        })
        .collect();
    Ok(MachineComparison {
        machines: machines.iter().map(|m| m.name.clone()).collect(),
        link_capacity_gbps: machines.iter().map(|m| m.link_capacity_gbps).collect(),
        rows,
    })
}

/// Geometries grouped by midplane count, for listing everything a machine
/// admits.
pub fn geometry_catalog(machine: &MachineSpec) -> BTreeMap<u64, Vec<PartitionGeometry>> {
    realizable_sizes(machine)
        .into_iter()
        .map(|s| (s, enumerate_geometries(machine, s)))
        .collect()
}
