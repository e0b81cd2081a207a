//! Torus shapes, axis-aligned cuboid regions and exact edge counting on them.
//!
//! A shape is stored in canonical form: dimension lengths sorted
//! non-increasing, so two tori that differ only by a rotation compare equal.
//! Dimensions of length 1 are allowed and carry no edges. A dimension of
//! length 2 connects each vertex to a single neighbor; how many parallel
//! edges that pair shares is the shape's `length2_multiplicity`.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawShape")]
pub struct TorusShape {
    dims: Vec<u32>,
    length2_multiplicity: u32,
}

#[derive(Deserialize)]
struct RawShape {
    dims: Vec<u32>,
    length2_multiplicity: u32,
}

impl TryFrom<RawShape> for TorusShape {
    type Error = Error;

    fn try_from(raw: RawShape) -> Result<Self> {
        canonicalize(&raw.dims)?.with_length2_multiplicity(raw.length2_multiplicity)
    }
}

/// Builds the canonical shape for `dims` with the default length-2
/// multiplicity of 1.
pub fn canonicalize(dims: &[u32]) -> Result<TorusShape> {
    if dims.is_empty() {
        return Err(Error::InvalidShape(
            "a torus needs at least one dimension".into(),
        ));
    }
    if let Some(pos) = dims.iter().position(|&d| d == 0) {
        return Err(Error::InvalidShape(format!("dimension {pos} has length 0")));
    }
    let mut sorted = dims.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut count: u64 = 1;
    for &d in &sorted {
        count = count
            .checked_mul(d as u64)
            .ok_or_else(|| Error::InvalidShape("vertex count overflows 64 bits".into()))?;
    }
    Ok(TorusShape {
        dims: sorted,
        length2_multiplicity: 1,
    })
}

impl TorusShape {
    pub fn new(dims: &[u32]) -> Result<Self> {
        canonicalize(dims)
    }

    /// Shape with every length-2 dimension carrying `multiplicity` parallel
    /// edges between its two vertices. Only 1 and 2 are meaningful.
    pub fn with_length2_multiplicity(mut self, multiplicity: u32) -> Result<Self> {
        if !(1..=2).contains(&multiplicity) {
            return Err(Error::InvalidShape(format!(
                "length-2 multiplicity must be 1 or 2, got {multiplicity}"
            )));
        }
        self.length2_multiplicity = multiplicity;
        Ok(self)
    }

    pub fn cubic(n: u32, rank: usize) -> Result<Self> {
        canonicalize(&vec![n; rank])
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn length2_multiplicity(&self) -> u32 {
        self.length2_multiplicity
    }

    pub fn vertex_count(&self) -> u64 {
        self.dims.iter().map(|&d| d as u64).product()
    }

    pub fn is_cubic(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
    }

    /// Number of edge endpoints a vertex has along dimension `dim`.
    pub fn dimension_degree(&self, dim: usize) -> u32 {
        match self.dims[dim] {
            1 => 0,
            2 => self.length2_multiplicity,
            _ => 2,
        }
    }

    /// Vertex degree; every torus is vertex-transitive, hence regular.
    pub fn degree(&self) -> u32 {
        (0..self.rank()).map(|i| self.dimension_degree(i)).sum()
    }

    pub fn edge_count(&self) -> u64 {
        self.degree() as u64 * self.vertex_count() / 2
    }

    /// True when some length-2 dimension has a single edge, which makes the
    /// degree smaller than `2 * rank` even though no dimension has length 1.
    pub fn has_single_length2_edges(&self) -> bool {
        self.length2_multiplicity == 1 && self.dims.contains(&2)
    }

    pub fn whole(&self) -> CuboidRegion {
        CuboidRegion {
            host: self.clone(),
            sides: self.dims.clone(),
        }
    }
}

impl fmt::Display for TorusShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_dims(f, &self.dims)
    }
}

pub(crate) fn write_dims(f: &mut fmt::Formatter<'_>, dims: &[u32]) -> fmt::Result {
    for (i, d) in dims.iter().enumerate() {
        if i > 0 {
            f.write_str("x")?;
        }
        write!(f, "{d}")?;
    }
    Ok(())
}

/// An axis-aligned sub-cuboid of a torus, anchored at the origin. `sides[i]`
/// is the extent along host dimension `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRegion")]
pub struct CuboidRegion {
    host: TorusShape,
    sides: Vec<u32>,
}

#[derive(Deserialize)]
struct RawRegion {
    host: TorusShape,
    sides: Vec<u32>,
}

impl TryFrom<RawRegion> for CuboidRegion {
    type Error = Error;

    fn try_from(raw: RawRegion) -> Result<Self> {
        CuboidRegion::new(raw.host, raw.sides)
    }
}

impl CuboidRegion {
    pub fn new(host: TorusShape, sides: Vec<u32>) -> Result<Self> {
        if sides.len() != host.rank() {
            return Err(Error::InvalidRegion(format!(
                "region has {} sides but host {} has {} dimensions",
                sides.len(),
                host,
                host.rank()
            )));
        }
        for (i, (&s, &a)) in sides.iter().zip(host.dims()).enumerate() {
            if s == 0 || s > a {
                return Err(Error::InvalidRegion(format!(
                    "side {i} is {s}, must lie in 1..={a}"
                )));
            }
        }
        Ok(CuboidRegion { host, sides })
    }

    pub fn host(&self) -> &TorusShape {
        &self.host
    }

    pub fn sides(&self) -> &[u32] {
        &self.sides
    }

    pub fn volume(&self) -> u64 {
        self.sides.iter().map(|&s| s as u64).product()
    }

    /// Number of host dimensions the region spans completely.
    pub fn covered_dimensions(&self) -> usize {
        self.sides
            .iter()
            .zip(self.host.dims())
            .filter(|(s, a)| s == a)
            .count()
    }

    /// True when permuting (host length, side) pairs jointly maps one region
    /// onto the other.
    pub fn is_rotation_of(&self, other: &CuboidRegion) -> bool {
        if self.host != other.host {
            return false;
        }
        let mut a: Vec<(u32, u32)> = self
            .host
            .dims()
            .iter()
            .copied()
            .zip(self.sides.iter().copied())
            .collect();
        let mut b: Vec<(u32, u32)> = other
            .host
            .dims()
            .iter()
            .copied()
            .zip(other.sides.iter().copied())
            .collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    pub fn cut_size(&self) -> u64 {
        cuboid_cut_size(self)
    }
}

impl fmt::Display for CuboidRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_dims(f, &self.sides)?;
        write!(f, " in {}", self.host)
    }
}

/// Perimeter `|E(S, S̄)|` of a cuboid, counted face by face.
///
/// A dimension the region spans completely contributes nothing. Otherwise
/// each of the two opposite faces holds `volume / side` vertices and each
/// such vertex has one outgoing edge, except on a length-2 host dimension
/// where the single neighbor is joined by `length2_multiplicity` edges.
pub fn cuboid_cut_size(region: &CuboidRegion) -> u64 {
    let volume = region.volume();
    let host = region.host();
    region
        .sides
        .iter()
        .zip(host.dims())
        .filter(|(s, a)| s < a)
        .map(|(&s, &a)| {
            let face = volume / s as u64;
            if a == 2 {
                host.length2_multiplicity() as u64 * face
            } else {
                2 * face
            }
        })
        .sum()
}

/// Interior and perimeter edge counts of a region together with the host
/// degree `k`, satisfying `k * |A| = 2 * interior + perimeter`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutAccount {
    pub interior_edges: u64,
    pub perimeter_edges: u64,
    pub degree: u32,
}

pub fn cut_account(region: &CuboidRegion) -> CutAccount {
    let degree = region.host().degree();
    let perimeter = cuboid_cut_size(region);
    let incident = degree as u64 * region.volume();
    debug_assert!(incident >= perimeter && (incident - perimeter).is_multiple_of(2));
    CutAccount {
        interior_edges: (incident - perimeter) / 2,
        perimeter_edges: perimeter,
        degree,
    }
}

/// `perimeter / (interior + perimeter)` for this region, the quantity the
/// small-set expansion minimizes over all sets of bounded size.
pub fn small_set_expansion_of(region: &CuboidRegion) -> Result<Ratio<u64>> {
    let account = cut_account(region);
    let total = account.interior_edges + account.perimeter_edges;
    if total == 0 {
        return Err(Error::UnsupportedShape(format!(
            "host {} has no edges; expansion is undefined",
            region.host()
        )));
    }
    Ok(Ratio::new(account.perimeter_edges, total))
}

/// Every origin-anchored cuboid of the given volume (side vectors, not
/// deduplicated by rotation).
pub fn cuboids_of_volume(shape: &TorusShape, volume: u64) -> Vec<CuboidRegion> {
    fn extend(dims: &[u32], remaining: u64, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let Some((&a, rest)) = dims.split_first() else {
            if remaining == 1 {
                out.push(prefix.clone());
            }
            return;
        };
        for s in 1..=a {
            if remaining.is_multiple_of(s as u64) {
                prefix.push(s);
                extend(rest, remaining / s as u64, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut sides = Vec::new();
    if volume >= 1 {
        extend(shape.dims(), volume, &mut Vec::new(), &mut sides);
    }
    sides
        .into_iter()
        .map(|s| CuboidRegion {
            host: shape.clone(),
            sides: s,
        })
        .collect()
}

/// All canonical shapes whose dimension lengths lie in `min_len..=max_len`
/// and whose vertex count is at most `max_vertices`, in descending
/// lexicographic order of their dimension lists.
pub fn shapes_up_to(max_vertices: u64, min_len: u32, max_len: u32) -> Vec<Vec<u32>> {
    fn extend(lo: u32, hi: u32, budget: u64, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        for a in (lo..=hi).rev() {
            if (a as u64) > budget {
                continue;
            }
            prefix.push(a);
            out.push(prefix.clone());
            if a > 1 {
                extend(lo, a, budget / a as u64, prefix, out);
            }
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(
        min_len.max(1),
        max_len,
        max_vertices,
        &mut Vec::new(),
        &mut out,
    );
    out
}
