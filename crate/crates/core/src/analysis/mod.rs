//! Competitive-analysis tooling: potential audit, loose-competitiveness
//! evaluation and closed-form bound constants.

pub mod bounds;
pub mod loose;
pub mod potential;

pub use bounds::{
    bound_c_deterministic, bound_c_marking, bound_c_randomized, bound_c_technical, lower_bound_c,
    route_through_lemma, substitution_b, BoundQuery, LemmaRoute, TauKind, MARKING_ALPHA,
    MARKING_BETA,
};
pub use loose::{
    algorithm_cost, classify, evaluate_loose, is_bad, Algorithm, BadSetReport, KCosts, KRow,
    LooseParams, OptSource,
};
pub use potential::{
    audit_potential, audit_with_witness, potential, AuditEvent, AuditStep, PotentialAudit,
};
