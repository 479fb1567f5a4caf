//! Seed curves of H-minimal graphs and the reduction of `(y, t)`-graphs to strips.
//!
//! A non-characteristic H-minimal graph `t = f(x, y)` is ruled by horizontal
//! lines orthogonal to its seed curves, the integral curves of the unit
//! field `ν̃^H`. On a graph over the `(y, t)` plane the seed is a line or a
//! circle; a line forces a characteristic point on each rule, and a circle
//! about `(x₀, 0)` turns the surface, after a left translation, into
//! `x = y cot(h̃₀⁻¹(t)/R)`.

mod cheb;
mod classify;
mod extract;
mod trace;

pub use cheb::{Chebyshev, PiecewiseChebyshev};
pub use classify::{
    classify_seed, coplanarity_residual, line_seed_characteristic, rule_line, translate_seed, ClassRule, RuleLine,
    SeedClassification, SeedKind, CLASSIFY_SAMPLES,
};
pub use extract::{
    extract_strip, reduce_graph, ExtractionSummary, ImplicitXyGraph, Reduction, StageRecord, StripExtraction,
    ANGLE_MARGIN, ANGLE_SCAN, HMIN_TOL,
};
pub use trace::{seed_trace, SeedData, SeedSample, TRACE_TOL};
