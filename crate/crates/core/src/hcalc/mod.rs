//! Horizontal calculus on surfaces: frame data, mean curvature, perimeter.

mod curvature;
mod frame;
mod perimeter;
pub mod quad;

pub use curvature::{
    bar_jets, burgers, hmean, hmean_defining, hmean_intrinsic, hmean_patch, hmean_strip, zyt_derivatives, At,
    BarJets, Zyt,
};
pub(crate) use curvature::solve_tangent;
pub use frame::{
    frame_derivatives, frame_from_defining, frame_from_patch, frame_from_patch_unchecked, pqw, pqw_ambient,
    pqw_dual, FrameData, EPS_CHAR,
};
pub use perimeter::{characteristic_scan, h_perimeter, sigma_h_integral, CharPoint};
pub use quad::{QuadResult, QuadratureSpec};
