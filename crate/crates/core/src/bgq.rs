//! Blue Gene/Q style machines: a 4-D torus of midplanes, each midplane a
//! 4x4x4x4x2 torus of 512 compute nodes. Partitions are cuboids of whole
//! midplanes and keep their wrap-around links.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{cuboid_cut_size, write_dims, CuboidRegion, TorusShape};

pub const NODES_PER_MIDPLANE: u64 = 512;
pub const MIDPLANE_SHAPE: [u32; 5] = [4, 4, 4, 4, 2];
/// Nodes along one midplane edge in each of the four outer dimensions.
pub const MIDPLANE_SIDE: u32 = 4;
pub const DEFAULT_LINK_CAPACITY_GBPS: f64 = 2.0;

/// Four midplane counts in non-increasing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PartitionGeometry([u32; 4]);

impl PartitionGeometry {
    /// Canonicalizes up to four positive lengths, padding with 1s.
    pub fn new(dims: &[u32]) -> Result<Self> {
        if dims.is_empty() || dims.len() > 4 {
            return Err(Error::InvalidShape(format!(
                "a partition geometry has 1 to 4 dimensions, got {}",
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidShape(
                "partition dimensions must be positive".into(),
            ));
        }
        let mut out = [1u32; 4];
        out[..dims.len()].copy_from_slice(dims);
        out.sort_unstable_by(|a, b| b.cmp(a));
        Ok(PartitionGeometry(out))
    }

    pub fn dims(&self) -> [u32; 4] {
        self.0
    }

    pub fn longest(&self) -> u32 {
        self.0[0]
    }

    /// Number of midplanes.
    pub fn volume(&self) -> u64 {
        self.0.iter().map(|&d| d as u64).product()
    }

    pub fn node_count(&self) -> u64 {
        NODES_PER_MIDPLANE * self.volume()
    }
}

impl fmt::Display for PartitionGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_dims(f, &self.0)
    }
}

impl FromStr for PartitionGeometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let dims = parse_dim_list(s)?;
        PartitionGeometry::new(&dims)
    }
}

impl TryFrom<String> for PartitionGeometry {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PartitionGeometry> for String {
    fn from(g: PartitionGeometry) -> String {
        g.to_string()
    }
}

/// Parses "4x4x3x2", "4,4,3,2", "4 4 3 2" or "4×4×3×2".
pub fn parse_dim_list(s: &str) -> Result<Vec<u32>> {
    let parts: Vec<&str> = s
        .split(|c: char| {
            c == 'x' || c == 'X' || c == '×' || c == ',' || c == '*' || c.is_whitespace()
        })
        .filter(|p| !p.is_empty())
        .collect();
    if parts.is_empty() {
        return Err(Error::InvalidShape(format!("empty dimension list {s:?}")));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<u32>()
                .map_err(|_| Error::InvalidShape(format!("bad dimension {p:?} in {s:?}")))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineSpec {
    pub name: String,
    pub grid: PartitionGeometry,
    /// Capacity of one link direction, used only for GB/s conversions.
    pub link_capacity_gbps: f64,
}

impl MachineSpec {
    pub fn new(name: impl Into<String>, grid: &[u32]) -> Result<Self> {
        Ok(MachineSpec {
            name: name.into(),
            grid: PartitionGeometry::new(grid)?,
            link_capacity_gbps: DEFAULT_LINK_CAPACITY_GBPS,
        })
    }

    pub fn midplanes(&self) -> u64 {
        self.grid.volume()
    }

    pub fn node_count(&self) -> u64 {
        self.grid.node_count()
    }

    pub fn node_shape(&self) -> TorusShape {
        node_shape(&self.grid)
    }

    /// Parses the key-value machine format:
    ///
    /// ```text
    /// # comment
    /// name = Mira
    /// grid = 4x4x3x2
    /// link_capacity_gbps = 2
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut grid = None;
        let mut capacity = DEFAULT_LINK_CAPACITY_GBPS;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, got {line:?}")))?;
            let value = value.trim();
            match key.trim() {
                "name" => name = Some(value.to_string()),
                "grid" => {
                    let dims = parse_dim_list(value).map_err(|e| parse_err(e.to_string()))?;
                    if dims.len() != 4 {
                        return Err(parse_err(format!(
                            "grid needs 4 dimensions, got {}",
                            dims.len()
                        )));
                    }
                    grid =
                        Some(PartitionGeometry::new(&dims).map_err(|e| parse_err(e.to_string()))?);
                }
                "link_capacity_gbps" => {
                    capacity = value
                        .parse::<f64>()
                        .ok()
                        .filter(|c| c.is_finite() && *c > 0.0)
                        .ok_or_else(|| {
                            parse_err(format!(
                                "link capacity must be a positive number, got {value:?}"
                            ))
                        })?;
                }
                other => return Err(parse_err(format!("unknown key {other:?}"))),
            }
        }
        let missing = |what: &str| Error::Parse {
            line: 0,
            message: format!("machine file is missing `{what}`"),
        };
        Ok(MachineSpec {
            name: name.ok_or_else(|| missing("name"))?,
            grid: grid.ok_or_else(|| missing("grid"))?,
            link_capacity_gbps: capacity,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    /// The machine in the key-value file format.
    pub fn to_file_format(&self) -> String {
        format!(
            "name = {}\ngrid = {}\nlink_capacity_gbps = {}\n",
            self.name, self.grid, self.link_capacity_gbps
        )
    }
}

/// Internal bisection of a partition in link units: `2 N / L` with `N` nodes
/// and longest node dimension `L = 4 a_1`, i.e. `256 * volume / a_1`.
pub fn partition_bisection_bw(geometry: &PartitionGeometry) -> u64 {
    let d = geometry.dims();
    2 * geometry.node_count() / (MIDPLANE_SIDE as u64 * d[0] as u64)
}

pub fn bisection_gbps(machine: &MachineSpec, geometry: &PartitionGeometry) -> f64 {
    partition_bisection_bw(geometry) as f64 * machine.link_capacity_gbps
}

/// Node-level torus of a partition, with the physical pair of links in the
/// length-2 dimension.
pub fn node_shape(geometry: &PartitionGeometry) -> TorusShape {
    let mut dims: Vec<u32> = geometry.dims().iter().map(|&a| a * MIDPLANE_SIDE).collect();
    dims.push(MIDPLANE_SHAPE[4]);
    TorusShape::new(&dims)
        .and_then(|s| s.with_length2_multiplicity(2))
        .expect("midplane multiples are valid shapes")
}

/// Cut of the half-partition obtained by halving the longest node
/// dimension, counted on the node-level torus. Agrees with
/// [`partition_bisection_bw`].
pub fn node_bisection_cut(geometry: &PartitionGeometry) -> u64 {
    let shape = node_shape(geometry);
    let mut sides = shape.dims().to_vec();
    sides[0] /= 2;
    let half = CuboidRegion::new(shape, sides).expect("half of an even dimension");
    cuboid_cut_size(&half)
}

/// Whether some placement of `geometry` fits inside the machine's grid.
/// Sorted-sequence domination is equivalent to an assignment existing.
pub fn fits(machine: &MachineSpec, geometry: &PartitionGeometry) -> bool {
    geometry
        .dims()
        .iter()
        .zip(machine.grid.dims().iter())
        .all(|(g, m)| g <= m)
}

/// Midplane count of a node request; requests below or between whole
/// midplanes are rejected.
pub fn midplanes_for_nodes(nodes: u64) -> Result<u64> {
    if nodes < NODES_PER_MIDPLANE || !nodes.is_multiple_of(NODES_PER_MIDPLANE) {
        return Err(Error::SubMidplane { nodes });
    }
    Ok(nodes / NODES_PER_MIDPLANE)
}

pub fn builtin_machines() -> Vec<MachineSpec> {
    [
        ("Mira", [4, 4, 3, 2]),
        ("JUQUEEN", [7, 2, 2, 2]),
        ("Sequoia", [4, 4, 4, 3]),
        ("JUQUEEN-54", [3, 3, 3, 2]),
        ("JUQUEEN-48", [4, 3, 2, 2]),
    ]
    .into_iter()
    .map(|(name, grid)| MachineSpec::new(name, &grid).expect("builtin grid"))
    .collect()
}

/// Case-insensitive lookup among [`builtin_machines`].
pub fn builtin_machine(name: &str) -> Option<MachineSpec> {
    builtin_machines()
        .into_iter()
        .find(|m| m.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(s: &str) -> PartitionGeometry {
        s.parse().unwrap()
    }

    #[test]
    fn bisection_examples() {
        assert_eq!(partition_bisection_bw(&g("4x1x1x1")), 256);
        assert_eq!(partition_bisection_bw(&g("3x2x2x2")), 2048);
        assert_eq!(partition_bisection_bw(&g("3x3x3x2")), 4608);
        assert_eq!(partition_bisection_bw(&g("1x1x1x1")), 256);
    }

    #[test]
    fn node_shapes() {
        assert_eq!(node_shape(&g("4x1x1x1")).dims(), &[16, 4, 4, 4, 2]);
        assert_eq!(node_shape(&g("4x3x2x1")).dims(), &[16, 12, 8, 4, 2]);
        assert_eq!(node_shape(&g("1x1x1x1")).dims(), &MIDPLANE_SHAPE);
        assert_eq!(node_shape(&g("1x1x1x1")).length2_multiplicity(), 2);
    }

    #[test]
    fn fitting() {
        let mira = builtin_machine("mira").unwrap();
        let juqueen = builtin_machine("JUQUEEN").unwrap();
        assert!(fits(&mira, &g("3x2x2x2")));
        assert!(!fits(&mira, &g("6x1x1x1")));
        assert!(fits(&juqueen, &g("4x1x1x1")));
        assert!(!fits(&juqueen, &g("4x4x1x1")));
    }

    #[test]
    fn builtins() {
        let cases = [
            ("mira", [4, 4, 3, 2], 49152),
            ("juqueen", [7, 2, 2, 2], 28672),
            ("sequoia", [4, 4, 4, 3], 98304),
            ("juqueen-54", [3, 3, 3, 2], 27648),
            ("juqueen-48", [4, 3, 2, 2], 24576),
        ];
        for (name, grid, nodes) in cases {
            let m = builtin_machine(name).unwrap();
            assert_eq!(m.grid.dims(), grid);
            assert_eq!(m.node_count(), nodes);
        }
        assert_eq!(
            builtin_machine("mira").unwrap().node_shape().dims(),
            &[16, 16, 12, 8, 2]
        );
        assert_eq!(
            builtin_machine("juqueen").unwrap().node_shape().dims(),
            &[28, 8, 8, 8, 2]
        );
        assert!(builtin_machine("titan").is_none());
    }

    #[test]
    fn geometry_parsing() {
        assert_eq!(g("1x4x1x1").dims(), [4, 1, 1, 1]);
        assert_eq!(g("2,3").dims(), [3, 2, 1, 1]);
        assert_eq!(g("4×4×3×2").dims(), [4, 4, 3, 2]);
        assert!("".parse::<PartitionGeometry>().is_err());
        assert!("1x1x1x1x1".parse::<PartitionGeometry>().is_err());
        assert!("0x1".parse::<PartitionGeometry>().is_err());
        assert!("1.5x1".parse::<PartitionGeometry>().is_err());
    }

    #[test]
    fn sub_midplane_requests_rejected() {
        assert!(matches!(
            midplanes_for_nodes(256),
            Err(Error::SubMidplane { nodes: 256 })
        ));
        assert!(matches!(
            midplanes_for_nodes(768),
            Err(Error::SubMidplane { .. })
        ));
        assert_eq!(midplanes_for_nodes(2048).unwrap(), 4);
    }

    #[test]
    fn machine_file_round_trip() {
        let text = "# test machine\nname = Half Mira\ngrid = 2x4x3x2\nlink_capacity_gbps = 1.8\n";
        let m = MachineSpec::parse(text).unwrap();
        assert_eq!(m.name, "Half Mira");
        assert_eq!(m.grid.dims(), [4, 3, 2, 2]);
        assert_eq!(m.link_capacity_gbps, 1.8);
        assert_eq!(MachineSpec::parse(&m.to_file_format()).unwrap(), m);
        assert_eq!(bisection_gbps(&m, &g("2x1x1x1")), 256.0 * 1.8);
    }

    #[test]
    fn machine_file_errors() {
        assert!(matches!(
            MachineSpec::parse("grid = 4x4x3x2"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            MachineSpec::parse("name = a\ngrid = 4x4x3"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            MachineSpec::parse("name = a\ncolour = red"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            MachineSpec::parse("name = a\ngrid = 1x1x1x1\nlink_capacity_gbps = -1"),
            Err(Error::Parse { line: 3, .. })
        ));
        let m = MachineSpec::parse("name = a\ngrid=2 2 1 1").unwrap();
        assert_eq!(m.link_capacity_gbps, DEFAULT_LINK_CAPACITY_GBPS);
    }

    #[test]
    fn six_midplane_example() {
        // 3x2x1x1 machine: best 3-midplane-sized half is 12x4x4x4x2 with 256
        // links; 8x6x4x4x2 would give 384 but is not a midplane multiple.
        let host = TorusShape::new(&[12, 4, 4, 4, 2]).unwrap();
        let half = CuboidRegion::new(host, vec![6, 4, 4, 4, 2]).unwrap();
        assert_eq!(half.cut_size(), 256);
        assert_eq!(partition_bisection_bw(&g("3x1x1x1")), 256);
        assert!("1.5x2".parse::<PartitionGeometry>().is_err());
    }

    proptest! {
        #[test]
        fn formula_matches_node_level_cut(dims in prop::collection::vec(1u32..8, 4)) {
            let geom = PartitionGeometry::new(&dims).unwrap();
            prop_assert_eq!(partition_bisection_bw(&geom), node_bisection_cut(&geom));
        }

        #[test]
        fn rotation_invariant(dims in prop::collection::vec(1u32..8, 4), rot in 0usize..4) {
            let mut rotated = dims.clone();
            rotated.rotate_left(rot);
            let a = PartitionGeometry::new(&dims).unwrap();
            let b = PartitionGeometry::new(&rotated).unwrap();
            prop_assert_eq!(a, b);
            prop_assert_eq!(partition_bisection_bw(&a), partition_bisection_bw(&b));
        }
    }

    #[test]
    fn shorter_longest_dimension_means_more_bisection() {
        let mut all = Vec::new();
        for a in 1..=7u32 {
            for b in 1..=a {
                for c in 1..=b {
                    for d in 1..=c {
                        all.push(PartitionGeometry::new(&[a, b, c, d]).unwrap());
                    }
                }
            }
        }
        for x in &all {
            for y in &all {
                if x.volume() == y.volume() && x.longest() < y.longest() {
                    assert!(
                        partition_bisection_bw(x) > partition_bisection_bw(y),
                        "{x} vs {y}"
                    );
                }
            }
        }
    }
}
