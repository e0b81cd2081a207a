//! Static flow model of the furthest-node pairing benchmark.
//!
//! Every node exchanges one message per round with its antipode. Traffic
//! follows dimension-ordered minimal routes, longest dimension first, and a
//! ring offset of exactly half the ring splits evenly between the two
//! directions. The predicted round time assumes the most loaded directed
//! link runs at full rate, so times are an idealized lower bound.

use serde::{Deserialize, Serialize};

use crate::bgq::{node_shape, PartitionGeometry};
use crate::error::{Error, Result};
use crate::graph::TorusGraph;
use crate::par::{map_ordered, Execution};
use crate::torus::TorusShape;

pub const DEFAULT_ROUNDS: u32 = 30;
pub const DEFAULT_WARMUP_ROUNDS: u32 = 4;
pub const DEFAULT_MESSAGE_GB: f64 = 0.1342;
pub const DEFAULT_LINK_GBPS: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    pub rounds_total: u32,
    pub warmup_rounds: u32,
    /// Message size in gigabytes.
    pub message_gb: f64,
    /// Link rate in gigabytes per second per direction.
    pub link_gbps: f64,
}

impl Default for TrafficSpec {
    fn default() -> Self {
        TrafficSpec {
            rounds_total: DEFAULT_ROUNDS,
            warmup_rounds: DEFAULT_WARMUP_ROUNDS,
            message_gb: DEFAULT_MESSAGE_GB,
            link_gbps: DEFAULT_LINK_GBPS,
        }
    }
}

impl TrafficSpec {
    pub fn validate(&self) -> Result<()> {
        if self.warmup_rounds >= self.rounds_total {
            return Err(Error::Domain(format!(
                "warm-up rounds ({}) must be fewer than total rounds ({})",
                self.warmup_rounds, self.rounds_total
            )));
        }
        if !(self.message_gb > 0.0 && self.message_gb.is_finite()) {
            return Err(Error::Domain(format!(
                "message size must be positive, got {}",
                self.message_gb
            )));
        }
        if !(self.link_gbps > 0.0 && self.link_gbps.is_finite()) {
            return Err(Error::Domain(format!(
                "link rate must be positive, got {}",
                self.link_gbps
            )));
        }
        Ok(())
    }

    pub fn counted_rounds(&self) -> u32 {
        self.rounds_total - self.warmup_rounds
    }
}

/// A perfect matching of the torus vertices given as a partner table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    shape: TorusShape,
    partner: Vec<u64>,
}

impl Pairing {
    pub fn shape(&self) -> &TorusShape {
        &self.shape
    }

    pub fn partner(&self, v: u64) -> u64 {
        self.partner[v as usize]
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }
}

/// Pairs every vertex with its antipode, half-way round each ring.
pub fn furthest_pairing(shape: &TorusShape) -> Result<Pairing> {
    if let Some(a) = shape.dims().iter().find(|&&a| a % 2 == 1) {
        return Err(Error::UnsupportedPattern(format!(
            "furthest-node pairing needs every dimension even, {shape} has length {a}"
        )));
    }
    let graph = TorusGraph::new(shape);
    let partner = (0..graph.vertex_count())
        .map(|v| (0..shape.rank()).fold(v, |u, d| graph.step(u, d, i64::from(shape.dims()[d] / 2))))
        .collect();
    Ok(Pairing {
        shape: shape.clone(),
        partner,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkLoad {
    pub from: u64,
    pub dim: usize,
    /// `true` for the link towards increasing coordinate.
    pub positive: bool,
    /// Gigabytes per round.
    pub load_gb: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub shape: TorusShape,
    /// Loaded directed links, ordered by source vertex, dimension, direction.
    pub per_link_load: Vec<LinkLoad>,
    /// Heaviest directed-link load per dimension, in messages per round.
    pub per_dimension_max_messages: Vec<f64>,
    pub bottleneck_messages: f64,
    /// Gigabytes per round on the most loaded directed link.
    pub bottleneck_load_gb: f64,
    pub predicted_round_time_s: f64,
    pub predicted_total_time_s: f64,
    pub counted_rounds: u32,
}

impl FlowResult {
    /// Completion-time ratio of `self` over `other`.
    pub fn time_ratio(&self, other: &FlowResult) -> f64 {
        self.predicted_total_time_s / other.predicted_total_time_s
    }

    pub fn total_load_gb(&self) -> f64 {
        self.per_link_load.iter().map(|l| l.load_gb).sum()
    }
}

struct LinkTable {
    rank: usize,
    load: Vec<f64>,
}

impl LinkTable {
    fn slot(&self, v: u64, dim: usize, positive: bool) -> usize {
        (v as usize * self.rank + dim) * 2 + usize::from(!positive)
    }

    fn add(&mut self, v: u64, dim: usize, positive: bool, amount: f64) {
        let i = self.slot(v, dim, positive);
        self.load[i] += amount;
    }
}

/// Routes one message per round from every vertex to its partner and
/// accumulates directed-link loads.
pub fn route_flows(pairing: &Pairing, traffic: &TrafficSpec) -> Result<FlowResult> {
    traffic.validate()?;
    let shape = pairing.shape();
    let graph = TorusGraph::new(shape);
    let rank = shape.rank();
    let mut table = LinkTable {
        rank,
        load: vec![0.0; graph.vertex_count() as usize * rank * 2],
    };
    let parallel_pairs = shape.length2_multiplicity() == 2;

    for src in 0..graph.vertex_count() {
        let dst = pairing.partner(src);
        let mut at = src;
        // Canonical order is non-increasing, so index order is longest first.
        for dim in 0..rank {
            let a = shape.dims()[dim];
            let offset = (graph.coord(dst, dim) + a - graph.coord(at, dim)) % a;
            if offset == 0 {
                continue;
            }
            let (forward, backward) = match (2 * offset).cmp(&a) {
                std::cmp::Ordering::Less => (1.0, 0.0),
                std::cmp::Ordering::Greater => (0.0, 1.0),
                std::cmp::Ordering::Equal if a == 2 && !parallel_pairs => (1.0, 0.0),
                std::cmp::Ordering::Equal => (0.5, 0.5),
            };
            if forward > 0.0 {
                let mut u = at;
                for _ in 0..offset {
                    table.add(u, dim, true, forward);
                    u = graph.step(u, dim, 1);
                }
            }
            if backward > 0.0 {
                let mut u = at;
                for _ in 0..a - offset {
                    table.add(u, dim, false, backward);
                    u = graph.step(u, dim, -1);
                }
            }
            at = graph.step(at, dim, i64::from(offset));
        }
        debug_assert_eq!(at, dst);
    }

    let mut per_dimension_max_messages = vec![0.0f64; rank];
    let mut per_link_load = Vec::new();
    for v in 0..graph.vertex_count() {
        for (dim, max) in per_dimension_max_messages.iter_mut().enumerate() {
            for positive in [true, false] {
                let messages = table.load[table.slot(v, dim, positive)];
                if messages > 0.0 {
                    *max = max.max(messages);
                    per_link_load.push(LinkLoad {
                        from: v,
                        dim,
                        positive,
                        load_gb: messages * traffic.message_gb,
                    });
                }
            }
        }
    }
    let bottleneck_messages = per_dimension_max_messages
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let bottleneck_load_gb = bottleneck_messages * traffic.message_gb;
    let predicted_round_time_s = bottleneck_load_gb / traffic.link_gbps;
    Ok(FlowResult {
        shape: shape.clone(),
        per_link_load,
        per_dimension_max_messages,
        bottleneck_messages,
        bottleneck_load_gb,
        predicted_round_time_s,
        predicted_total_time_s: predicted_round_time_s * f64::from(traffic.counted_rounds()),
        counted_rounds: traffic.counted_rounds(),
    })
}

pub fn simulate_shape(shape: &TorusShape, traffic: &TrafficSpec) -> Result<FlowResult> {
    traffic.validate()?;
    route_flows(&furthest_pairing(shape)?, traffic)
}

/// Runs the benchmark model on the node-level torus of a partition.
pub fn simulate_pairing_benchmark(
    geometry: &PartitionGeometry,
    traffic: &TrafficSpec,
) -> Result<FlowResult> {
    simulate_shape(&node_shape(geometry), traffic)
}

/// Independent simulations, in input order.
pub fn simulate_many(
    geometries: &[PartitionGeometry],
    traffic: &TrafficSpec,
    exec: Execution,
) -> Result<Vec<FlowResult>> {
    map_ordered(exec, geometries, |g| simulate_pairing_benchmark(g, traffic))
        .into_iter()
        .collect()
}
