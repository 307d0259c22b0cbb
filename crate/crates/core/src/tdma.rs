//! Time-division baseline.
//!
//! User 1 transmits first for `m1` channel uses, then user 2 uses the rest of
//! the frame, `m2 = D2 - m1`. Handing user 2 all remaining time is optimal
//! because `m * Gamma(m)` never increases with `m`. The optimal `m1` is found
//! by enumerating every integer in `[m_hat, min(D1, D2 - m_hat)]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbc_rate::UserSpec;
use crate::noma::{
    Allocation, ChannelPair, PowerBudget, Rejection, Scheme, SolveOptions, SolveOutcome, Verdict,
};

/// Per-slot outcome for one choice of `m1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdmaCandidate {
    pub m1: u32,
    pub m2: u32,
    /// `None` when the slot needs more than `Pmax` (or the SINR bracket fails).
    pub allocation: Option<Allocation>,
}

/// Every admissible `m1` evaluated once, independent of `D1`.
///
/// The energy at a given `m1` depends on `D1` only through the upper end of the
/// search window, so a profile built for the widest window answers any
/// `D1 <= D2` by a prefix minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdmaProfile {
    pub d2: u32,
    pub first_m1: u32,
    pub candidates: Vec<TdmaCandidate>,
}

impl TdmaProfile {
    /// Evaluates all `m1` in `[m_hat1, D2 - m_hat2]`.
    pub fn build(
        ch: &ChannelPair,
        s1: &UserSpec,
        s2: &UserSpec,
        budget: PowerBudget,
        opts: &SolveOptions,
    ) -> Result<Self> {
        let d2 = s2.deadline;
        let first_m1 = s1.min_blocklength;
        let last_m1 = d2.saturating_sub(s2.min_blocklength);
        let (m1_model, m2_model) = (s1.model(), s2.model());
        let pmax = budget.watts();
        let mut candidates = Vec::with_capacity((last_m1 + 1).saturating_sub(first_m1) as usize);
        for m1 in first_m1..=last_m1 {
            let m2 = d2 - m1;
            let slot =
                |model: &crate::fbc_rate::RateModel, m: u32, g: f64| -> Result<Option<f64>> {
                    match model.sinr(m as f64, pmax * g, opts.tol) {
                        Ok(gamma) => Ok(Some(gamma)),
                        Err(Error::Bracket { .. }) => Ok(None),
                        Err(e) => Err(e),
                    }
                };
            let allocation = match (slot(&m1_model, m1, ch.g1)?, slot(&m2_model, m2, ch.g2)?) {
                (Some(gamma1), Some(gamma2)) => {
                    let (p1, p2) = (gamma1 / ch.g1, gamma2 / ch.g2);
                    (p1.max(p2) <= pmax).then(|| {
                        Allocation::new(Scheme::Tdma, m1 as f64, m2 as f64, p1, p2, gamma1, gamma2)
                    })
                }
                _ => None,
            };
            candidates.push(TdmaCandidate { m1, m2, allocation });
        }
        Ok(Self {
            d2,
            first_m1,
            candidates,
        })
    }

    /// Candidates with `m1 <= d1`.
    pub fn window(&self, d1: u32) -> &[TdmaCandidate] {
        let n = (d1 + 1).saturating_sub(self.first_m1) as usize;
        &self.candidates[..n.min(self.candidates.len())]
    }

    /// Cheapest allocation with `m1 <= d1`.
    pub fn best_within(&self, d1: u32) -> SolveOutcome {
        let window = self.window(d1);
        if window.is_empty() {
            return reject(Verdict::BlocklengthWindowEmpty);
        }
        window
            .iter()
            .filter_map(|c| c.allocation)
            .min_by(|a, b| a.energy.total_cmp(&b.energy))
            .map(SolveOutcome::Feasible)
            .unwrap_or_else(|| reject(Verdict::RateUnreachable))
    }
}

fn reject(verdict: Verdict) -> SolveOutcome {
    SolveOutcome::Infeasible {
        rejections: vec![Rejection {
            scheme: Scheme::Tdma,
            verdict,
            required_power: None,
        }],
    }
}

/// Energy-optimal TDMA allocation with user 1 first. Needs `D1 <= D2`.
pub fn solve_tdma(
    ch: &ChannelPair,
    s1: &UserSpec,
    s2: &UserSpec,
    budget: PowerBudget,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    if s1.deadline > s2.deadline {
        return Err(Error::Precondition(format!(
            "user 1 deadline {} must be at most user 2 deadline {}",
            s1.deadline, s2.deadline
        )));
    }
    if s1.min_blocklength
        > s1.deadline
            .min(s2.deadline.saturating_sub(s2.min_blocklength))
    {
        return Ok(reject(Verdict::BlocklengthWindowEmpty));
    }
    Ok(TdmaProfile::build(ch, s1, s2, budget, opts)?.best_within(s1.deadline))
}
