//! Edge-isoperimetric analysis of torus networks and their partitions.
//!
//! * [`torus`]: canonical torus shapes, cuboid regions and exact cut counts.
//! * [`isoperimetry`]: lower bounds for cuboid perimeters and the cuboids
//!   attaining them, plus the hypercube solution.
//! * [`oracle`]: exhaustive minimum-perimeter search for small tori.
//! * [`bgq`]: Blue Gene/Q style machines built from 4x4x4x4x2 midplanes.
//! * [`policy`]: partition-geometry enumeration and allocation-policy audits.
//! * [`sim`]: a static flow model of the furthest-node pairing benchmark.
//! * [`golden`]: published Mira and JUQUEEN partition tables and a checker.
//! * [`report`]: text, CSV and JSON rendering of audit and comparison reports.

pub mod bgq;
pub mod error;
pub mod golden;
pub mod graph;
pub mod isoperimetry;
pub mod oracle;
pub mod par;
pub mod policy;
pub mod report;
pub mod sim;
pub mod torus;

pub use error::{Error, Result};
pub use par::Execution;
pub use torus::{
    canonicalize, cuboid_cut_size, cut_account, small_set_expansion_of, CuboidRegion, CutAccount,
    TorusShape,
};
