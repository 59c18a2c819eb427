//! Discrete approximations of self-similar sets and their natural measures.

mod cantor;
mod diagnostics;
mod discrete;
mod spec;

pub use cantor::{build_cantor, CantorSpec};
pub(crate) use diagnostics::box_dimension_of;
pub use diagnostics::{
    box_dimension, draw, frostman_ratio, occupied_boxes, sample, FrostmanReport, Samples,
};
pub use discrete::{AtomSampler, DiscreteMeasure, PointSource, MASS_TOL};
pub use spec::{SetSpec, SpecSampler, DEFAULT_ATOM_BUDGET};

/// Realizes `spec` at `depth` within the default atom budget.
pub fn realize(spec: &SetSpec, depth: u32) -> crate::Result<DiscreteMeasure> {
    spec.realize(depth, DEFAULT_ATOM_BUDGET)
}
