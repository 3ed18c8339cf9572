//! The certificate engine over parametric spaces.
//!
//! Finite instances can only estimate the ends of a space; this module
//! decides them exactly on spaces with polynomial descriptions. Points of
//! the extension are polynomial germs in an unbounded parameter, chain
//! schemas certify that two infinite points are joined by step-bounded
//! chains far from the basepoint, and gap certificates certify that no such
//! chain exists at any scale. The engine checks certificates — it does not
//! search for them.

pub mod gap;
pub mod poly;
pub mod poly2;
pub mod report;
pub mod schema;
pub mod space;

pub use gap::{verify_gap_certificate, GapCertificate, GapVerification};
pub use poly::{
    nonneg_on_ray, parse_rational, positive_on_ray, rational_to_f64, rational_to_string, Poly,
    RayVerdict,
};
pub use poly2::{nonneg_on_strip, DomainVerdict, Poly2};
pub use report::{iota_report, IotaReport, PairStatus};
pub use schema::{
    instantiate as instantiate_schema, transport_schema, verify_chain_schema, ChainSchema,
    SchemaSegment, SchemaVerification,
};
pub use space::{
    finitely_close, formula_on_space, is_infinite, piece_of_point, point_on_space,
    squared_distance, Membership, ParametricSpace, Piece, SpaceMetric, SymbolicPoint,
};

#[cfg(test)]
pub(crate) mod fixtures {
    pub(crate) use crate::spaces::{
        flared_vase_parametric as flared_vase_space, grid_parametric as lattice_plane_space,
        grid_rectangle_schema as lattice_rectangle_schema, line_parametric as line_space,
        vase_cross_schema, vase_parametric as vase_space,
    };
}
