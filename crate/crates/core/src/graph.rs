//! Explicit vertex/edge view of a torus shape.
//!
//! Vertices are numbered in row-major order (the last dimension varies
//! fastest). Used by the exhaustive oracle and by the flow simulator.

use crate::torus::{CuboidRegion, TorusShape};

#[derive(Clone, Debug)]
pub struct TorusGraph {
    dims: Vec<u32>,
    strides: Vec<u64>,
    length2_multiplicity: u32,
    vertex_count: u64,
}

impl TorusGraph {
    pub fn new(shape: &TorusShape) -> Self {
        let dims = shape.dims().to_vec();
        let mut strides = vec![1u64; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1] as u64;
        }
        TorusGraph {
            vertex_count: shape.vertex_count(),
            dims,
            strides,
            length2_multiplicity: shape.length2_multiplicity(),
        }
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn vertex_count(&self) -> u64 {
        self.vertex_count
    }

    pub fn stride(&self, dim: usize) -> u64 {
        self.strides[dim]
    }

    pub fn coord(&self, v: u64, dim: usize) -> u32 {
        ((v / self.strides[dim]) % self.dims[dim] as u64) as u32
    }

    pub fn coords(&self, v: u64) -> Vec<u32> {
        (0..self.dims.len()).map(|i| self.coord(v, i)).collect()
    }

    pub fn index(&self, coords: &[u32]) -> u64 {
        coords
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c as u64 * s)
            .sum()
    }

    /// Vertex reached from `v` by moving `delta` steps (mod length) along `dim`.
    pub fn step(&self, v: u64, dim: usize, delta: i64) -> u64 {
        let a = self.dims[dim] as i64;
        let c = self.coord(v, dim) as i64;
        let moved = (c + delta).rem_euclid(a);
        (v as i64 + (moved - c) * self.strides[dim] as i64) as u64
    }

    /// Distinct neighbors of `v` with the number of parallel edges to each.
    pub fn neighbors(&self, v: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::with_capacity(2 * self.dims.len());
        for (i, &a) in self.dims.iter().enumerate() {
            match a {
                1 => {}
                2 => out.push((self.step(v, i, 1), self.length2_multiplicity)),
                _ => {
                    out.push((self.step(v, i, 1), 1));
                    out.push((self.step(v, i, -1), 1));
                }
            }
        }
        out
    }

    /// Each undirected edge once as `(u, v, multiplicity)` with `u < v`.
    pub fn edges(&self) -> Vec<(u64, u64, u32)> {
        let mut out = Vec::new();
        for u in 0..self.vertex_count {
            for (v, w) in self.neighbors(u) {
                if u < v {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    /// Membership vector of an origin-anchored cuboid.
    pub fn region_membership(&self, region: &CuboidRegion) -> Vec<bool> {
        (0..self.vertex_count)
            .map(|v| {
                region
                    .sides()
                    .iter()
                    .enumerate()
                    .all(|(i, &s)| self.coord(v, i) < s)
            })
            .collect()
    }

    pub fn perimeter(&self, members: &[bool]) -> u64 {
        self.edges()
            .iter()
            .filter(|(u, v, _)| members[*u as usize] != members[*v as usize])
            .map(|&(_, _, w)| w as u64)
            .sum()
    }

    pub fn interior(&self, members: &[bool]) -> u64 {
        self.edges()
            .iter()
            .filter(|(u, v, _)| members[*u as usize] && members[*v as usize])
            .map(|&(_, _, w)| w as u64)
            .sum()
    }

    /// Minimal hop count between two vertices.
    pub fn hop_distance(&self, u: u64, v: u64) -> u64 {
        (0..self.dims.len())
            .map(|i| {
                let a = self.dims[i] as i64;
                let d = (self.coord(v, i) as i64 - self.coord(u, i) as i64).rem_euclid(a);
                d.min(a - d) as u64
            })
            .sum()
    }
}
