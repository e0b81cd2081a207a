//! Edge-isoperimetric lower bounds for cuboids in tori of arbitrary
//! dimension lengths, the cuboids attaining them, and the exact solution for
//! the hypercube.
//!
//! For a shape `a_1 >= ... >= a_D` and a set size `t`, the bound is the
//! minimum over `r` in `0..D` of
//!
//! ```text
//!     2 (D - r) * k_r^(1 / (D - r)) * t^((D - r - 1) / (D - r))
//! ```
//!
//! where `k_r` is the product of the `r` smallest dimension lengths. Whenever
//! `m = (t / k_r)^(1 / (D - r))` is an integer the term equals `2 (D - r) t / m`
//! and is evaluated in exact integer arithmetic.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{cuboid_cut_size, cuboids_of_volume, CuboidRegion, TorusShape};

/// Relative tolerance for comparing floating bound values.
pub const BOUND_RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    /// Lower bound on the perimeter of any cuboid of the requested size.
    pub value: f64,
    /// `value` as an integer when the minimizing term is integral.
    pub exact_value: Option<u64>,
    pub argmin_r: usize,
    /// Product of the `argmin_r` smallest dimension lengths.
    pub covered_product: u64,
    pub attaining_cuboid: Option<CuboidRegion>,
}

impl BoundResult {
    /// True when `cut` is below the bound by more than the tolerance.
    pub fn violated_by(&self, cut: u64) -> bool {
        match self.exact_value {
            Some(v) => cut < v,
            None => (cut as f64) < self.value * (1.0 - BOUND_RELATIVE_TOLERANCE),
        }
    }

    /// True when `cut` equals the bound (exactly, or within tolerance for
    /// irrational bounds, which integer cuts can never meet).
    pub fn attained_by(&self, cut: u64) -> bool {
        match self.exact_value {
            Some(v) => cut == v,
            None => ((cut as f64) - self.value).abs() <= self.value * BOUND_RELATIVE_TOLERANCE,
        }
    }
}

/// Integer `s`-th root of `x` when it exists.
fn exact_root(x: u64, s: u32) -> Option<u64> {
    if s == 1 {
        return Some(x);
    }
    let guess = (x as f64).powf(1.0 / s as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1)
        .find(|&m| m > 0 && (m as u128).checked_pow(s) == Some(x as u128))
}

struct Term {
    value: f64,
    exact: Option<u64>,
    covered_product: u64,
}

fn general_term(shape: &TorusShape, t: u64, r: usize) -> Term {
    let dims = shape.dims();
    let s = (dims.len() - r) as u32;
    let k: u64 = dims[dims.len() - r..].iter().map(|&a| a as u64).product();
    let exact = t
        .is_multiple_of(k)
        .then(|| exact_root(t / k, s))
        .flatten()
        .map(|m| 2 * s as u64 * (t / m));
    let value = match exact {
        Some(v) => v as f64,
        None => {
            let s = s as f64;
            2.0 * s * (((k as f64).ln() + (s - 1.0) * (t as f64).ln()) / s).exp()
        }
    };
    Term {
        value,
        exact,
        covered_product: k,
    }
}

fn check_size(vertex_count: u64, t: u64) -> Result<()> {
    if t == 0 || t.saturating_mul(2) > vertex_count {
        return Err(Error::Domain(format!(
            "set size {t} must lie in 1..={}",
            vertex_count / 2
        )));
    }
    Ok(())
}

/// Picks the minimizing term; ties (within tolerance) go to the larger `r`.
fn select(terms: impl Iterator<Item = (usize, Term)>) -> (usize, Term) {
    let mut best: Option<(usize, Term)> = None;
    for (r, term) in terms {
        let take = match &best {
            None => true,
            Some((_, b)) => term.value <= b.value * (1.0 + BOUND_RELATIVE_TOLERANCE),
        };
        if take {
            best = Some((r, term));
        }
    }
    best.expect("at least one term")
}

pub fn bound_general_torus(shape: &TorusShape, t: u64) -> Result<BoundResult> {
    check_size(shape.vertex_count(), t)?;
    let (r, term) = select((0..shape.rank()).map(|r| (r, general_term(shape, t, r))));
    Ok(BoundResult {
        value: term.value,
        exact_value: term.exact,
        argmin_r: r,
        covered_product: term.covered_product,
        attaining_cuboid: attaining_cuboid(shape, t, r),
    })
}

/// Bound for the cubic torus `[n]^rank`, evaluated directly from `n`.
pub fn bound_cubic_torus(n: u32, rank: usize, t: u64) -> Result<BoundResult> {
    if rank == 0 {
        return Err(Error::InvalidShape("rank must be positive".into()));
    }
    let shape = TorusShape::cubic(n, rank)?;
    check_size(shape.vertex_count(), t)?;
    let terms = (0..rank).map(|r| {
        let s = (rank - r) as u32;
        let nr = (n as u64).pow(r as u32);
        let exact = t
            .is_multiple_of(nr)
            .then(|| exact_root(t / nr, s))
            .flatten()
            .map(|m| 2 * s as u64 * (t / m));
        let sf = s as f64;
        let value = exact.map(|v| v as f64).unwrap_or_else(|| {
            2.0 * sf * (n as f64).powf(r as f64 / sf) * (t as f64).powf((sf - 1.0) / sf)
        });
        (
            r,
            Term {
                value,
                exact,
                covered_product: nr,
            },
        )
    });
    let (r, term) = select(terms);
    Ok(BoundResult {
        value: term.value,
        exact_value: term.exact,
        argmin_r: r,
        covered_product: term.covered_product,
        attaining_cuboid: attaining_cuboid(&shape, t, r),
    })
}

/// The cuboid covering the `r` smallest dimensions completely and taking an
/// equal side `m = (t / k_r)^(1 / (D - r))` in the others.
///
/// Absent when `m` is not an integer or exceeds an uncovered dimension.
/// Under the single-edge convention for length-2 dimensions, every length-2
/// dimension must be among the covered ones (otherwise the face count
/// differs from the bound by a factor of two), so `t` must then be a
/// multiple of `2^(number of length-2 dims)`.
pub fn attaining_cuboid(shape: &TorusShape, t: u64, r: usize) -> Option<CuboidRegion> {
    let dims = shape.dims();
    if r >= dims.len() || t == 0 || t > shape.vertex_count() {
        return None;
    }
    let (uncovered, covered) = dims.split_at(dims.len() - r);
    if shape.length2_multiplicity() == 1 && uncovered.contains(&2) {
        return None;
    }
    let k: u64 = covered.iter().map(|&a| a as u64).product();
    if !t.is_multiple_of(k) {
        return None;
    }
    let m = exact_root(t / k, uncovered.len() as u32)?;
    if uncovered.iter().any(|&a| (a as u64) < m) {
        return None;
    }
    let sides = std::iter::repeat_n(m as u32, uncovered.len())
        .chain(covered.iter().copied())
        .collect();
    CuboidRegion::new(shape.clone(), sides).ok()
}

/// Orders two same-size cuboids of one host by perimeter.
pub fn compare_cuboids(a: &CuboidRegion, b: &CuboidRegion) -> Result<Ordering> {
    if a.host() != b.host() {
        return Err(Error::Domain(format!(
            "cuboids live on different hosts ({} vs {})",
            a.host(),
            b.host()
        )));
    }
    if a.volume() != b.volume() {
        return Err(Error::Domain(format!(
            "cuboid volumes differ ({} vs {})",
            a.volume(),
            b.volume()
        )));
    }
    Ok(cuboid_cut_size(a).cmp(&cuboid_cut_size(b)))
}

/// Smallest perimeter over all cuboids of volume `t`, if any exists.
pub fn min_cuboid_cut(shape: &TorusShape, t: u64) -> Option<(u64, CuboidRegion)> {
    cuboids_of_volume(shape, t)
        .into_iter()
        .map(|c| (cuboid_cut_size(&c), c))
        .min_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.sides().cmp(y.1.sides())))
}

/// Minimum perimeter of a `t`-subset of the `d`-dimensional hypercube
/// (single edges), attained by the first `t` vertices in binary order:
/// `d * t - 2 * sum_{i < t} popcount(i)`.
pub fn hypercube_min_perimeter(d: u32, t: u64) -> Result<u64> {
    if d == 0 || d > 63 {
        return Err(Error::Domain(format!(
            "hypercube dimension {d} must lie in 1..=63"
        )));
    }
    if t == 0 || t > 1u64 << d {
        return Err(Error::Domain(format!(
            "set size {t} must lie in 1..={}",
            1u64 << d
        )));
    }
    let t = t as u128;
    // Number of ones in bit b over 0..t, summed over all bits.
    let ones: u128 = (0..d)
        .map(|b| {
            let period = 1u128 << (b + 1);
            let half = 1u128 << b;
            (t / period) * half + (t % period).saturating_sub(half)
        })
        .sum();
    Ok((d as u128 * t - 2 * ones) as u64)
}
