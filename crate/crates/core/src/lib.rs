//! Energy-optimal power and blocklength allocation for a two-user
//! non-orthogonal downlink with finite-blocklength and reliability constraints.
//!
//! * [`special_fn`]: Gaussian tail `Q` and `Q^{-1}`.
//! * [`fbc_rate`]: the finite-blocklength rate model and its SINR/blocklength maps.
//! * [`noma`]: closed-form optimal allocations and the scheme dispatcher.
//! * [`tdma`]: the time-division baseline.
//! * [`sim`]: seeded Monte-Carlo sweeps over Rayleigh channels.

pub mod error;
pub mod fbc_rate;
pub mod noma;
pub mod sim;
pub mod special_fn;
pub mod tdma;

pub use error::{Error, Result};
pub use fbc_rate::{
    energy_curve, f_constraint, fbc_rate, gamma_of_m, lemma1_holds, lemma1_threshold, m_of_gamma,
    rate_point, RatePoint, UserSpec,
};
pub use noma::{
    label_users, solve_noma, solve_p1, solve_p2, solve_p3, Allocation, ChannelPair, NomaDecision,
    PowerBudget, Rejection, ReliabilityAccounting, Scheme, SolveOptions, SolveOutcome, Verdict,
};
pub use special_fn::{q_func, q_inv, ErrorProb};
pub use tdma::{solve_tdma, TdmaProfile};
