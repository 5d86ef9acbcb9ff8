//! Machine-checkable monitors: a-priori boxes, necrosis monotonicity,
//! decay envelopes and parameter-condition gates.

pub mod envelopes;
pub mod monitors;
pub mod report;

pub use envelopes::{
    check_envelope, destruction_dominated_envelopes, destruction_dominates, eigen_t_star,
    eigenvalue_gated_envelopes, near_capacity_envelopes, DecayEnvelope, EnvelopeCheck,
    EnvelopePair, Gate, DEFAULT_ENVELOPE_SLACK,
};
pub use monitors::{
    agreement_check, apriori_bounds_monitor, final_decay_check, necrosis_bound,
    necrosis_saturation_check, phi_vanishing_check, BoundsMonitor, NecrosisMonotoneMonitor,
    NecrosisScaleMonitor, DEFAULT_BOUNDS_TOL, DEFAULT_MONOTONE_TOL,
};
pub use report::{NormSample, ProbeSeries, RunReport, Verdict, Violation};
