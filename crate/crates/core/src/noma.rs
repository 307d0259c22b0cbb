//! Closed-form energy-optimal allocations for the two-user non-orthogonal downlink.
//!
//! User 1 always has the shorter deadline (`D1 <= D2`). Three decoding
//! structures are covered:
//!
//! * [`Scheme::P1SicAtRx2`]: `g1 <= g2`. Receiver 2 cancels `x1` before decoding
//!   its own codeword; receiver 1 treats `x2` as noise.
//! * [`Scheme::P2FullLatency`]: `g1 > g2`, each user keeps its whole deadline and
//!   both receivers treat the other codeword as noise.
//! * [`Scheme::P3ShortLatency`]: `g1 > g2`, user 2 is squeezed into `D1` so that
//!   receiver 1 can cancel `x2`.
//!
//! Because `m * Gamma(m)` decreases in `m`, each optimum spends the full
//! deadline and the powers follow by inverting the SINR definitions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbc_rate::UserSpec;
use crate::special_fn::ErrorProb;

/// Squared channel magnitudes `|h1|^2`, `|h2|^2` with unit noise power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPair {
    pub g1: f64,
    pub g2: f64,
}

impl ChannelPair {
    pub fn new(g1: f64, g2: f64) -> Result<Self> {
        for g in [g1, g2] {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Domain {
                    what: "channel gain must be positive",
                    value: g,
                });
            }
        }
        Ok(Self { g1, g2 })
    }

    /// From channel magnitudes `|h1|`, `|h2|`.
    pub fn from_magnitudes(h1: f64, h2: f64) -> Result<Self> {
        Self::new(h1 * h1, h2 * h2)
    }

    pub fn swapped(self) -> Self {
        Self {
            g1: self.g2,
            g2: self.g1,
        }
    }
}

/// Total transmit power limit, linear units (1.0 corresponds to 30 dBm).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PowerBudget(f64);

impl PowerBudget {
    pub fn new(p_max: f64) -> Result<Self> {
        if p_max > 0.0 && p_max.is_finite() {
            Ok(Self(p_max))
        } else {
            Err(Error::Domain {
                what: "power budget must be positive",
                value: p_max,
            })
        }
    }

    pub fn from_dbm(dbm: f64) -> Result<Self> {
        Self::new(dbm_to_linear(dbm))
    }

    #[inline]
    pub fn watts(self) -> f64 {
        self.0
    }
}

/// `10^((dBm - 30) / 10)`.
pub fn dbm_to_linear(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "P1_SIC_AT_RX2")]
    P1SicAtRx2,
    #[serde(rename = "P2_FULL_LATENCY")]
    P2FullLatency,
    #[serde(rename = "P3_SHORT_LATENCY")]
    P3ShortLatency,
    #[serde(rename = "TDMA")]
    Tdma,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::P1SicAtRx2 => "P1_SIC_AT_RX2",
            Scheme::P2FullLatency => "P2_FULL_LATENCY",
            Scheme::P3ShortLatency => "P3_SHORT_LATENCY",
            Scheme::Tdma => "TDMA",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    PowerBudgetExceeded,
    /// `gamma1 * gamma2 >= 1`: mutual interference cannot be overcome at any power.
    SicProductGeOne,
    BlocklengthWindowEmpty,
    /// The SINR needed at the deadline exceeds `Pmax * g`.
    RateUnreachable,
}

/// Why one scheme has no allocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub scheme: Scheme,
    pub verdict: Verdict,
    /// Total (or per-slot, for TDMA) power the scheme would have needed, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub required_power: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub scheme: Scheme,
    pub m1: f64,
    pub m2: f64,
    pub p1: f64,
    pub p2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// `m1 * p1 + m2 * p2`.
    pub energy: f64,
}

impl Allocation {
    pub(crate) fn new(
        scheme: Scheme,
        m1: f64,
        m2: f64,
        p1: f64,
        p2: f64,
        gamma1: f64,
        gamma2: f64,
    ) -> Self {
        Self {
            scheme,
            m1,
            m2,
            p1,
            p2,
            gamma1,
            gamma2,
            energy: m1 * p1 + m2 * p2,
        }
    }

    pub fn total_power(&self) -> f64 {
        self.p1 + self.p2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveOutcome {
    Feasible(Allocation),
    Infeasible { rejections: Vec<Rejection> },
}

impl SolveOutcome {
    fn reject(scheme: Scheme, verdict: Verdict, required_power: Option<f64>) -> Self {
        SolveOutcome::Infeasible {
            rejections: vec![Rejection {
                scheme,
                verdict,
                required_power,
            }],
        }
    }

    pub fn allocation(&self) -> Option<&Allocation> {
        match self {
            SolveOutcome::Feasible(a) => Some(a),
            SolveOutcome::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveOutcome::Feasible(_))
    }

    pub fn energy(&self) -> Option<f64> {
        self.allocation().map(|a| a.energy)
    }

    pub fn rejections(&self) -> &[Rejection] {
        match self {
            SolveOutcome::Feasible(_) => &[],
            SolveOutcome::Infeasible { rejections } => rejections,
        }
    }
}

/// How the error target of a receiver that runs SIC is interpreted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReliabilityAccounting {
    /// The target is the decoder's own error probability, conditioned on a
    /// correct cancellation stage.
    #[default]
    PerStage,
    /// The target bounds the overall error including a failed cancellation;
    /// the decoder gets the conditional share `(eps_bar - eps_sic) / (1 - eps_sic)`.
    EndToEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Bisection bracket width for the SINR search.
    pub tol: f64,
    pub reliability: ReliabilityAccounting,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: crate::fbc_rate::DEFAULT_TOL,
            reliability: ReliabilityAccounting::PerStage,
        }
    }
}

/// Overall error of a receiver that first cancels a codeword decoded with
/// error `eps_sic` and then decodes its own with conditional error `eps_cond`.
pub fn overall_sic_error(eps_sic: f64, eps_cond: f64) -> f64 {
    eps_sic + (1.0 - eps_sic) * eps_cond
}

/// Inverse of [`overall_sic_error`] in its second argument.
pub fn conditional_sic_error(eps_overall: f64, eps_sic: f64) -> Result<ErrorProb> {
    let cond = (eps_overall - eps_sic) / (1.0 - eps_sic);
    ErrorProb::new(cond).map_err(|_| {
        Error::Precondition(format!(
            "overall error target {eps_overall} does not exceed the cancellation stage error {eps_sic}"
        ))
    })
}

/// Error probability the decoder of a SIC receiver must meet for its own
/// codeword, given the receiver's target and the error of the cancelled stage.
pub fn sic_decoder_target(
    own: ErrorProb,
    cancelled: ErrorProb,
    accounting: ReliabilityAccounting,
) -> Result<ErrorProb> {
    match accounting {
        ReliabilityAccounting::PerStage => Ok(own),
        ReliabilityAccounting::EndToEnd => conditional_sic_error(own.value(), cancelled.value()),
    }
}

fn check_order(s1: &UserSpec, s2: &UserSpec, strict: bool) -> Result<()> {
    let ok = if strict {
        s1.deadline < s2.deadline
    } else {
        s1.deadline <= s2.deadline
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "user 1 deadline {} must be {} user 2 deadline {}",
            s1.deadline,
            if strict { "below" } else { "at most" },
            s2.deadline
        )))
    }
}

/// SINR at deadline `m`, or `None` if `Pmax * g` is not enough.
fn sinr_at(m: u32, spec: &UserSpec, gamma_hi: f64, tol: f64) -> Result<Option<f64>> {
    match spec.model().sinr(m as f64, gamma_hi, tol) {
        Ok(g) => Ok(Some(g)),
        Err(Error::Bracket { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn finish(alloc: Allocation, budget: PowerBudget) -> SolveOutcome {
    let total = alloc.total_power();
    if total <= budget.watts() {
        SolveOutcome::Feasible(alloc)
    } else {
        SolveOutcome::reject(alloc.scheme, Verdict::PowerBudgetExceeded, Some(total))
    }
}

/// Weaker user 1 (`g1 <= g2`), SIC at receiver 2.
pub fn solve_p1(
    ch: &ChannelPair,
    s1: &UserSpec,
    s2: &UserSpec,
    budget: PowerBudget,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    const SCHEME: Scheme = Scheme::P1SicAtRx2;
    if ch.g1 > ch.g2 {
        return Err(Error::Precondition(format!(
            "P1 needs g1 <= g2 (got {} > {})",
            ch.g1, ch.g2
        )));
    }
    check_order(s1, s2, false)?;
    if s1.min_blocklength > s1.deadline || s2.min_blocklength > s2.deadline {
        return Ok(SolveOutcome::reject(
            SCHEME,
            Verdict::BlocklengthWindowEmpty,
            None,
        ));
    }
    let s2_own = s2.with_error_target(sic_decoder_target(
        s2.error_target,
        s1.error_target,
        opts.reliability,
    )?);
    let pmax = budget.watts();
    let Some(gamma1) = sinr_at(s1.deadline, s1, pmax * ch.g1, opts.tol)? else {
        return Ok(SolveOutcome::reject(SCHEME, Verdict::RateUnreachable, None));
    };
    let Some(gamma2) = sinr_at(s2.deadline, &s2_own, pmax * ch.g2, opts.tol)? else {
        return Ok(SolveOutcome::reject(SCHEME, Verdict::RateUnreachable, None));
    };
    let p1 = gamma1 * gamma2 / ch.g2 + gamma1 / ch.g1;
    let p2 = gamma2 / ch.g2;
    Ok(finish(
        Allocation::new(
            SCHEME,
            s1.deadline as f64,
            s2.deadline as f64,
            p1,
            p2,
            gamma1,
            gamma2,
        ),
        budget,
    ))
}

/// Stronger user 1 (`g1 > g2`), both users keep their deadlines, no SIC.
pub fn solve_p2(
    ch: &ChannelPair,
    s1: &UserSpec,
    s2: &UserSpec,
    budget: PowerBudget,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    const SCHEME: Scheme = Scheme::P2FullLatency;
    if ch.g1 <= ch.g2 {
        return Err(Error::Precondition(format!(
            "P2 needs g1 > g2 (got {} <= {})",
            ch.g1, ch.g2
        )));
    }
    check_order(s1, s2, true)?;
    if s1.min_blocklength > s1.deadline || s2.min_blocklength > s2.deadline {
        return Ok(SolveOutcome::reject(
            SCHEME,
            Verdict::BlocklengthWindowEmpty,
            None,
        ));
    }
    let pmax = budget.watts();
    let Some(gamma1) = sinr_at(s1.deadline, s1, pmax * ch.g1, opts.tol)? else {
        return Ok(SolveOutcome::reject(SCHEME, Verdict::RateUnreachable, None));
    };
    let Some(gamma2) = sinr_at(s2.deadline, s2, pmax * ch.g2, opts.tol)? else {
        return Ok(SolveOutcome::reject(SCHEME, Verdict::RateUnreachable, None));
    };
    let product = gamma1 * gamma2;
    if product >= 1.0 {
        return Ok(SolveOutcome::reject(SCHEME, Verdict::SicProductGeOne, None));
    }
    let denom = ch.g1 * ch.g2 * (1.0 - product);
    let p1 = (gamma1 * ch.g2 + product * ch.g1) / denom;
    let p2 = (gamma2 * ch.g1 + product * ch.g2) / denom;
    Ok(finish(
        Allocation::new(
            SCHEME,
            s1.deadline as f64,
            s2.deadline as f64,
            p1,
            p2,
            gamma1,
            gamma2,
        ),
        budget,
    ))
}

/// Stronger user 1 (`g1 > g2`), user 2 squeezed to `D1`, SIC at receiver 1.
pub fn solve_p3(
    ch: &ChannelPair,
    s1: &UserSpec,
    s2: &UserSpec,
    budget: PowerBudget,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    const SCHEME: Scheme = Scheme::P3ShortLatency;
    if ch.g1 <= ch.g2 {
        return Err(Error::Precondition(format!(
            "P3 needs g1 > g2 (got {} <= {})",
            ch.g1, ch.g2
        )));
    }
    check_order(s1, s2, true)?;
    let d1 = s1.deadline;
    if s1.min_blocklength > d1 || s2.min_blocklength > d1 {
        return Ok(SolveOutcome::reject(
            SCHEME,
            Verdict::BlocklengthWindowEmpty,
            None,
        ));
    }
    // receiver 1 cancels x2 first, so its own decoder gets the conditional share
    let s1_own = s1.with_error_target(sic_decoder_target(
        s1.error_target,
        s2.error_target,
        opts.reliability,
    )?);
    let pmax = budget.watts();
    let Some(gamma1) = sinr_at(d1, &s1_own, pmax * ch.g1, opts.tol)? else {
        return Ok(SolveOutcome::reject(SCHEME, Verdict::RateUnreachable, None));
    };
    let Some(gamma2) = sinr_at(d1, s2, pmax * ch.g2, opts.tol)? else {
        return Ok(SolveOutcome::reject(SCHEME, Verdict::RateUnreachable, None));
    };
    let p1 = gamma1 / ch.g1;
    let p2 = gamma1 * gamma2 / ch.g1 + gamma2 / ch.g2;
    Ok(finish(
        Allocation::new(SCHEME, d1 as f64, d1 as f64, p1, p2, gamma1, gamma2),
        budget,
    ))
}

/// Users reordered so that user 1 has the shorter deadline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Labeled {
    pub ch: ChannelPair,
    pub s1: UserSpec,
    pub s2: UserSpec,
    /// True when the caller's second user became user 1.
    pub swapped: bool,
}

/// Orders two users by deadline. On a tie the weaker channel becomes user 1,
/// so the SIC-at-receiver-2 structure applies.
pub fn label_users(ch: &ChannelPair, a: &UserSpec, b: &UserSpec) -> Labeled {
    let swap = match a.deadline.cmp(&b.deadline) {
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Equal => ch.g1 > ch.g2,
    };
    if swap {
        Labeled {
            ch: ch.swapped(),
            s1: *b,
            s2: *a,
            swapped: true,
        }
    } else {
        Labeled {
            ch: *ch,
            s1: *a,
            s2: *b,
            swapped: false,
        }
    }
}

/// Result of [`solve_noma`]: the chosen outcome plus every subproblem that was tried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NomaDecision {
    pub swapped: bool,
    pub outcome: SolveOutcome,
    pub candidates: Vec<SolveOutcome>,
}

/// Picks the applicable structure for the channel ordering and returns the
/// cheapest feasible allocation. Users may be given in any order.
pub fn solve_noma(
    ch: &ChannelPair,
    a: &UserSpec,
    b: &UserSpec,
    budget: PowerBudget,
    opts: &SolveOptions,
) -> Result<NomaDecision> {
    let l = label_users(ch, a, b);
    let candidates = if l.ch.g1 <= l.ch.g2 {
        vec![solve_p1(&l.ch, &l.s1, &l.s2, budget, opts)?]
    } else {
        vec![
            solve_p2(&l.ch, &l.s1, &l.s2, budget, opts)?,
            solve_p3(&l.ch, &l.s1, &l.s2, budget, opts)?,
        ]
    };
    let best = candidates
        .iter()
        .filter_map(SolveOutcome::allocation)
        .min_by(|x, y| x.energy.total_cmp(&y.energy))
        .copied();
    let outcome = match best {
        Some(a) => SolveOutcome::Feasible(a),
        None => SolveOutcome::Infeasible {
            rejections: candidates
                .iter()
                .flat_map(|c| c.rejections().iter().copied())
                .collect(),
        },
    };
    Ok(NomaDecision {
        swapped: l.swapped,
        outcome,
        candidates,
    })
}
