//! Outage probability analysis for two-hop multicarrier relay selection.
//!
//! The library models a two-hop OFDM system with K parallel Rayleigh-fading
//! subcarriers and a cluster of M relays, under decode-and-forward,
//! fixed-gain and variable-gain amplify-and-forward protocols. It provides
//!
//! * closed-form approximations and high-SNR asymptotics for the outage
//!   probability under bulk and per-subcarrier relay selection, built on
//!   inverse Laplace transforms of rational functions with repeated poles,
//! * a seeded, embarrassingly parallel Monte Carlo simulator of the full
//!   system for ground truth, and
//! * built-in verification suites tying the two together.
//!
//! Computation is data-parallel through rayon by default; disabling the
//! `parallel` feature swaps in a sequential engine with bit-identical
//! results.

pub mod bessel;
pub mod channel;
pub mod error;
pub mod laplace;
pub mod mc;
pub mod outage;
pub mod quad;
pub mod snr_dist;
pub mod sx;
pub mod verify;

pub use channel::{
    end_to_end_snr, gain_cdf, gain_pdf, sample_gain, HopGainParams, LinkRealization,
    ProtocolKind, SnrParams,
};
pub use error::{Error, Result};
pub use laplace::{invert_at, invert_at_residues, invert_simple_poles, Inversion, NodeMultiset};
pub use mc::{
    db_to_linear, estimate_curve, estimate_curve_both, estimate_curve_sequential,
    estimate_outage, estimate_outage_both, estimate_outage_sequential, run_trial,
    run_trial_detailed, CurvePoint, OutageCurve, OutageEstimate, SimConfig, TrialDetail,
    TrialInfo,
};
pub use outage::{
    bulk_outage, diversity_order, f_i_approx, f_psi, lift_series, ps_outage, Approx,
    LiftedSeries, OutageResult, SelectionScheme,
};
pub use snr_dist::{ProtocolDistribution, SeriesCoefficients};
pub use sx::{compositions, multinomial, pole_vector, sx, sx_value, Composition, SxQuery};
pub use verify::{run as run_verify, CheckResult, VerifyLevel, VerifyReport};
