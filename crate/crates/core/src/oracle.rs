//! Exhaustive minimum-perimeter search over all `t`-subsets of a small
//! torus, and surveys comparing it against the cuboid bound.
//!
//! Subsets are visited as sorted vertex lists in lexicographic order. The
//! search space is cut into chunks by the leading vertices; each chunk is
//! enumerated sequentially and chunk results are merged in chunk order, so
//! the reported witness (the lexicographically least minimizer) is the same
//! whether chunks run sequentially or in parallel.
//!
//! Translation pruning keeps only subsets containing vertex 0. Every subset
//! has a translate containing vertex 0, and the lexicographically least
//! minimizer contains vertex 0, so pruning changes neither result field
//! other than `subsets_examined`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TorusGraph;
use crate::isoperimetry::{attaining_cuboid, bound_general_torus, min_cuboid_cut};
use crate::par::{map_ordered, Execution};
use crate::torus::TorusShape;

/// Largest torus the oracle accepts.
pub const MAX_ORACLE_VERTICES: u64 = 28;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub min_perimeter: u64,
    /// Sorted vertex indices (row-major) of the lexicographically least
    /// minimizer.
    pub witness: Vec<u64>,
    pub subsets_examined: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    pub budget: u64,
    pub prune_translations: bool,
    pub execution: Execution,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            budget: DEFAULT_BUDGET,
            prune_translations: true,
            execution: Execution::default(),
        }
    }
}

pub fn brute_force_min_perimeter(shape: &TorusShape, t: u64, budget: u64) -> Result<OracleResult> {
    brute_force_with(
        shape,
        t,
        &OracleOptions {
            budget,
            ..OracleOptions::default()
        },
    )
}

/// Neighbor bitmasks split by edge multiplicity.
struct MaskGraph {
    n: u32,
    single: Vec<u32>,
    double: Vec<u32>,
}

impl MaskGraph {
    fn new(shape: &TorusShape) -> Self {
        let g = TorusGraph::new(shape);
        let n = g.vertex_count() as u32;
        let mut single = vec![0u32; n as usize];
        let mut double = vec![0u32; n as usize];
        for v in 0..n {
            for (u, w) in g.neighbors(v as u64) {
                match w {
                    1 => single[v as usize] |= 1 << u,
                    _ => double[v as usize] |= 1 << u,
                }
            }
        }
        MaskGraph { n, single, double }
    }

    fn perimeter(&self, set: u32) -> u64 {
        let outside = !set;
        let mut rest = set;
        let mut total = 0u64;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            total += (self.single[v] & outside).count_ones() as u64
                + 2 * (self.double[v] & outside).count_ones() as u64;
        }
        total
    }
}

/// Subsets with a fixed prefix, completed by `free` more vertices drawn
/// from `lo..n`.
#[derive(Clone, Copy)]
struct Chunk {
    prefix: u32,
    lo: u32,
    free: u32,
}

#[derive(Clone, Copy)]
struct ChunkOutcome {
    examined: u64,
    best: Option<(u64, u32)>,
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

impl Chunk {
    fn size(&self, n: u32) -> u128 {
        binomial((n - self.lo) as u64, self.free as u64)
    }

    fn run(&self, graph: &MaskGraph, limit: u64) -> ChunkOutcome {
        let n = graph.n;
        let m = self.free as usize;
        let mut out = ChunkOutcome {
            examined: 0,
            best: None,
        };
        if self.lo as usize + m > n as usize {
            return out;
        }
        let mut idx: Vec<u32> = (0..m as u32).map(|i| self.lo + i).collect();
        loop {
            if out.examined >= limit {
                return out;
            }
            let set = idx.iter().fold(self.prefix, |acc, &i| acc | (1 << i));
            let p = graph.perimeter(set);
            out.examined += 1;
            if out.best.is_none_or(|(b, _)| p < b) {
                out.best = Some((p, set));
            }
            // advance to the next combination in lexicographic order
            let mut i = m;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if idx[i] < n - (m - i) as u32 {
                    break;
                }
            }
            idx[i] += 1;
            for j in i + 1..m {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
}

fn chunks(n: u32, t: u32, prune: bool) -> Vec<Chunk> {
    if prune {
        if t == 1 {
            return vec![Chunk {
                prefix: 1,
                lo: 1,
                free: 0,
            }];
        }
        (1..=n - (t - 1))
            .map(|j| Chunk {
                prefix: 1 | (1 << j),
                lo: j + 1,
                free: t - 2,
            })
            .collect()
    } else {
        (0..=n - t)
            .map(|j| Chunk {
                prefix: 1 << j,
                lo: j + 1,
                free: t - 1,
            })
            .collect()
    }
}

fn mask_to_vertices(set: u32) -> Vec<u64> {
    (0..32)
        .filter(|i| set & (1 << i) != 0)
        .map(|i| i as u64)
        .collect()
}

fn merge(outcomes: impl IntoIterator<Item = ChunkOutcome>) -> ChunkOutcome {
    let mut total = ChunkOutcome {
        examined: 0,
        best: None,
    };
    for o in outcomes {
        total.examined += o.examined;
        if let Some((p, s)) = o.best {
            if total.best.is_none_or(|(b, _)| p < b) {
                total.best = Some((p, s));
            }
        }
    }
    total
}

pub fn brute_force_with(shape: &TorusShape, t: u64, opts: &OracleOptions) -> Result<OracleResult> {
    let n = shape.vertex_count();
    if n > MAX_ORACLE_VERTICES {
        return Err(Error::Domain(format!(
            "exhaustive search supports at most {MAX_ORACLE_VERTICES} vertices, shape {shape} has {n}"
        )));
    }
    if t.saturating_mul(2) > n {
        return Err(Error::Domain(format!(
            "set size {t} must lie in 0..={}",
            n / 2
        )));
    }
    if t == 0 {
        return Ok(OracleResult {
            min_perimeter: 0,
            witness: Vec::new(),
            subsets_examined: 1,
        });
    }
    let graph = MaskGraph::new(shape);
    let work = chunks(n as u32, t as u32, opts.prune_translations);
    let total: u128 = work.iter().map(|c| c.size(graph.n)).sum();

    if total > opts.budget as u128 {
        let mut remaining = opts.budget;
        let mut outcomes = Vec::new();
        for c in &work {
            if remaining == 0 {
                break;
            }
            let o = c.run(&graph, remaining);
            remaining -= o.examined;
            outcomes.push(o);
        }
        let partial = merge(outcomes);
        return Err(Error::BudgetExceeded {
            examined: partial.examined,
            total,
            best: partial.best.map(|(p, s)| {
                Box::new(OracleResult {
                    min_perimeter: p,
                    witness: mask_to_vertices(s),
                    subsets_examined: partial.examined,
                })
            }),
        });
    }

    let outcomes = map_ordered(opts.execution, &work, |c| c.run(&graph, u64::MAX));
    let merged = merge(outcomes);
    let (p, s) = merged.best.expect("non-empty search space");
    Ok(OracleResult {
        min_perimeter: p,
        witness: mask_to_vertices(s),
        subsets_examined: merged.examined,
    })
}

/// One set size of a shape survey.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyRow {
    pub t: u64,
    pub bound: f64,
    pub bound_exact: Option<u64>,
    pub argmin_r: usize,
    pub attaining_cut: Option<u64>,
    pub min_cuboid_cut: Option<u64>,
    pub oracle_min: u64,
}

impl SurveyRow {
    pub fn cuboid_violates_bound(&self, bound: &crate::isoperimetry::BoundResult) -> bool {
        self.min_cuboid_cut.is_some_and(|c| bound.violated_by(c))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSurvey {
    pub shape: TorusShape,
    pub rows: Vec<SurveyRow>,
    /// Sizes where some cuboid beats the bound.
    pub cuboid_violations: Vec<u64>,
    /// Sizes where the attaining cuboid's cut differs from the bound.
    pub attainment_failures: Vec<u64>,
    /// Sizes where an arbitrary subset beats the bound.
    pub conjecture_counterexamples: Vec<u64>,
}

fn survey_row(shape: &TorusShape, t: u64, budget: u64) -> Result<(SurveyRow, [bool; 3])> {
    let bound = bound_general_torus(shape, t)?;
    let oracle = brute_force_with(
        shape,
        t,
        &OracleOptions {
            budget,
            prune_translations: true,
            execution: Execution::Sequential,
        },
    )?;
    let attaining_cut = attaining_cuboid(shape, t, bound.argmin_r).map(|c| c.cut_size());
    let row = SurveyRow {
        t,
        bound: bound.value,
        bound_exact: bound.exact_value,
        argmin_r: bound.argmin_r,
        attaining_cut,
        min_cuboid_cut: min_cuboid_cut(shape, t).map(|(c, _)| c),
        oracle_min: oracle.min_perimeter,
    };
    let flags = [
        row.cuboid_violates_bound(&bound),
        attaining_cut.is_some_and(|c| !bound.attained_by(c)),
        bound.violated_by(oracle.min_perimeter),
    ];
    Ok((row, flags))
}

/// Bound, best cuboid, attaining cuboid and exhaustive minimum for every
/// `t` in `1..=|V|/2` of every shape. Jobs are spread over shapes and sizes.
pub fn survey_shapes(
    shapes: &[TorusShape],
    budget: u64,
    exec: Execution,
) -> Result<Vec<ShapeSurvey>> {
    let jobs: Vec<(usize, u64)> = shapes
        .iter()
        .enumerate()
        .flat_map(|(i, s)| (1..=s.vertex_count() / 2).map(move |t| (i, t)))
        .collect();
    let results = map_ordered(exec, &jobs, |&(i, t)| survey_row(&shapes[i], t, budget));

    let mut surveys: Vec<ShapeSurvey> = shapes
        .iter()
        .map(|s| ShapeSurvey {
            shape: s.clone(),
            rows: Vec::new(),
            cuboid_violations: Vec::new(),
            attainment_failures: Vec::new(),
            conjecture_counterexamples: Vec::new(),
        })
        .collect();
    for (&(i, t), res) in jobs.iter().zip(results) {
        let (row, [cuboid, attain, conj]) = res?;
        let s = &mut surveys[i];
        s.rows.push(row);
        if cuboid {
            s.cuboid_violations.push(t);
        }
        if attain {
            s.attainment_failures.push(t);
        }
        if conj {
            s.conjecture_counterexamples.push(t);
        }
    }
    Ok(surveys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{canonicalize, shapes_up_to};

    fn shape(dims: &[u32]) -> TorusShape {
        canonicalize(dims).unwrap()
    }

    fn plain(budget: u64, prune: bool, execution: Execution) -> OracleOptions {
        OracleOptions {
            budget,
            prune_translations: prune,
            execution,
        }
    }

    /// Straight loop over all 2^n subsets, no pruning, no chunking.
    fn naive_min(shape: &TorusShape, t: u64) -> (u64, Vec<u64>) {
        let g = TorusGraph::new(shape);
        let n = g.vertex_count() as usize;
        let mut best: Option<(u64, Vec<u64>)> = None;
        for mask in 0u64..(1 << n) {
            if mask.count_ones() as u64 != t {
                continue;
            }
            let members: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
            let p = g.perimeter(&members);
            let verts: Vec<u64> = (0..n as u64).filter(|&i| members[i as usize]).collect();
            let better = match &best {
                None => true,
                Some((bp, bv)) => p < *bp || (p == *bp && verts < *bv),
            };
            if better {
                best = Some((p, verts));
            }
        }
        best.unwrap()
    }

    #[test]
    fn square_torus() {
        let r = brute_force_min_perimeter(&shape(&[4, 4]), 4, 1_000_000).unwrap();
        assert_eq!(r.min_perimeter, 8);
        assert_eq!(r.witness.len(), 4);
        let g = TorusGraph::new(&shape(&[4, 4]));
        let mut members = vec![false; 16];
        for &v in &r.witness {
            members[v as usize] = true;
        }
        assert_eq!(g.perimeter(&members), 8);
    }

    #[test]
    fn cube_pairs() {
        // Two adjacent vertices of the single-edge 3-cube: 3 + 3 - 2.
        let r = brute_force_min_perimeter(&shape(&[2, 2, 2]), 2, 1_000_000).unwrap();
        assert_eq!(r.min_perimeter, 4);
        assert_eq!(r.witness, vec![0, 1]);
        let r = brute_force_min_perimeter(&shape(&[2, 2, 2]), 4, 1_000_000).unwrap();
        assert_eq!(r.min_perimeter, 4);
    }

    #[test]
    fn ring_singleton_and_empty() {
        assert_eq!(
            brute_force_min_perimeter(&shape(&[3]), 1, 10)
                .unwrap()
                .min_perimeter,
            2
        );
        let empty = brute_force_min_perimeter(&shape(&[4, 4]), 0, 10).unwrap();
        assert_eq!(empty.min_perimeter, 0);
        assert!(empty.witness.is_empty());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            brute_force_min_perimeter(&shape(&[6, 5]), 2, 10),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            brute_force_min_perimeter(&shape(&[4, 4]), 9, 10),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn budget_exhaustion_is_explicit() {
        let err = brute_force_min_perimeter(&shape(&[4, 4]), 4, 10).unwrap_err();
        match err {
            Error::BudgetExceeded {
                examined,
                total,
                best,
            } => {
                assert_eq!(examined, 10);
                assert_eq!(total, 455); // C(15, 3)
                assert!(best.is_some());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pruned_parallel_and_naive_agree() {
        for dims in shapes_up_to(16, 2, 16) {
            for mult in [1, 2] {
                let s = shape(&dims).with_length2_multiplicity(mult).unwrap();
                for t in 1..=s.vertex_count() / 2 {
                    let (p, w) = naive_min(&s, t);
                    for prune in [true, false] {
                        for exec in [Execution::Sequential, Execution::Parallel] {
                            let r = brute_force_with(&s, t, &plain(u64::MAX, prune, exec)).unwrap();
                            assert_eq!(
                                (r.min_perimeter, &r.witness),
                                (p, &w),
                                "{s} t={t} prune={prune}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn examined_counts() {
        let s = shape(&[4, 4]);
        let pruned =
            brute_force_with(&s, 4, &plain(u64::MAX, true, Execution::Sequential)).unwrap();
        let full = brute_force_with(&s, 4, &plain(u64::MAX, false, Execution::Sequential)).unwrap();
        assert_eq!(pruned.subsets_examined, 455);
        assert_eq!(full.subsets_examined, 1820);
    }

    #[test]
    fn survey_of_small_shapes() {
        let shapes: Vec<TorusShape> = shapes_up_to(12, 2, 12)
            .iter()
            .map(|d| shape(d).with_length2_multiplicity(2).unwrap())
            .collect();
        let seq = survey_shapes(&shapes, u64::MAX, Execution::Sequential).unwrap();
        let par = survey_shapes(&shapes, u64::MAX, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        for s in &seq {
            assert!(s.cuboid_violations.is_empty(), "{}", s.shape);
            assert!(s.attainment_failures.is_empty(), "{}", s.shape);
            assert_eq!(s.rows.len() as u64, s.shape.vertex_count() / 2);
        }
    }
}
