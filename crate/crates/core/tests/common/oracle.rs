//! Brute-force reference solvers used by the integration and acceptance tests.
//!
//! None of these call the closed-form power formulas or the SINR bisection of
//! the library. NOMA problems are searched over a log grid of SINR pairs; each
//! pair's blocklengths come from the closed-form `m(gamma)` and its powers from
//! a generic 2x2 solve of the SINR equations. TDMA uses its own SINR root
//! finder on the rate residual and a golden-section search over `m1`.

#![allow(dead_code)]

use std::f64::consts::LN_2;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use noma_fbc::{m_of_gamma, q_inv, UserSpec};

pub const GRID_POINTS: usize = 2000;
pub const GRID_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// `g1 <= g2`, receiver 2 cancels `x1`.
    SicAtRx2,
    /// No cancellation, deadlines `D1`, `D2`.
    FullLatency,
    /// Receiver 1 cancels `x2`, both blocks within `D1`.
    ShortLatency,
}

#[derive(Debug, Clone, Copy)]
pub struct OraclePoint {
    pub energy: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub m1: f64,
    pub m2: f64,
}

/// Solves `[[a, b], [c, d]] p = [e, f]`.
fn solve2(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Option<(f64, f64)> {
    let det = a * d - b * c;
    if det <= 0.0 {
        return None;
    }
    Some(((e * d - b * f) / det, (a * f - e * c) / det))
}

/// Powers that realize the SINR pair under the problem's interference model.
pub fn powers(problem: Problem, g1: f64, g2: f64, gamma1: f64, gamma2: f64) -> Option<(f64, f64)> {
    // gamma1 (p2 g1 [+1]) = p1 g1  ->  g1 p1 - gamma1 g1 p2 = gamma1  (interference at rx 1)
    // gamma2 (p1 g2 [+1]) = p2 g2  -> -gamma2 g2 p1 + g2 p2 = gamma2  (interference at rx 2)
    let (i1, i2) = match problem {
        Problem::SicAtRx2 => (true, false),
        Problem::FullLatency => (true, true),
        Problem::ShortLatency => (false, true),
    };
    let b = if i1 { -gamma1 * g1 } else { 0.0 };
    let c = if i2 { -gamma2 * g2 } else { 0.0 };
    solve2(g1, b, c, g2, gamma1, gamma2).filter(|&(p1, p2)| p1 >= 0.0 && p2 >= 0.0)
}

fn log_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn search(
    problem: Problem,
    g: (f64, f64),
    s1: &UserSpec,
    s2: &UserSpec,
    pmax: f64,
    axis1: &[f64],
    axis2: &[f64],
) -> Option<OraclePoint> {
    let (cap1, cap2) = match problem {
        Problem::ShortLatency => (s1.deadline as f64, s1.deadline as f64),
        _ => (s1.deadline as f64, s2.deadline as f64),
    };
    let admissible = |gamma: f64, s: &UserSpec, cap: f64| {
        let m = m_of_gamma(gamma, s).unwrap();
        (m >= s.min_blocklength as f64 && m <= cap).then_some(m)
    };
    let col1: Vec<Option<f64>> = axis1.iter().map(|&x| admissible(x, s1, cap1)).collect();
    let col2: Vec<Option<f64>> = axis2.iter().map(|&x| admissible(x, s2, cap2)).collect();
    let mut best: Option<OraclePoint> = None;
    for (i, &gamma1) in axis1.iter().enumerate() {
        let Some(m1) = col1[i] else { continue };
        for (j, &gamma2) in axis2.iter().enumerate() {
            let Some(m2) = col2[j] else { continue };
            let Some((p1, p2)) = powers(problem, g.0, g.1, gamma1, gamma2) else {
                continue;
            };
            if p1 + p2 > pmax {
                continue;
            }
            let energy = m1 * p1 + m2 * p2;
            if best.is_none_or(|b| energy < b.energy) {
                best = Some(OraclePoint {
                    energy,
                    gamma1,
                    gamma2,
                    m1,
                    m2,
                });
            }
        }
    }
    best
}

/// Minimum energy over the `GRID_POINTS x GRID_POINTS` log grid on
/// `[GRID_FLOOR, Pmax * max(g1, g2)]`.
pub fn noma_grid(
    problem: Problem,
    g1: f64,
    g2: f64,
    s1: &UserSpec,
    s2: &UserSpec,
    pmax: f64,
) -> Option<OraclePoint> {
    let axis = log_axis(GRID_FLOOR, pmax * g1.max(g2), GRID_POINTS);
    search(problem, (g1, g2), s1, s2, pmax, &axis, &axis)
}

/// Coarse grid followed by a second grid of the same size spanning two coarse
/// cells on either side of the coarse minimum.
pub fn noma_grid_refined(
    problem: Problem,
    g1: f64,
    g2: f64,
    s1: &UserSpec,
    s2: &UserSpec,
    pmax: f64,
) -> Option<OraclePoint> {
    let coarse = noma_grid(problem, g1, g2, s1, s2, pmax)?;
    let ratio = ((pmax * g1.max(g2)) / GRID_FLOOR).powf(1.0 / (GRID_POINTS - 1) as f64);
    let span = ratio.powi(2);
    let a1 = log_axis(coarse.gamma1 / span, coarse.gamma1 * span, GRID_POINTS);
    let a2 = log_axis(coarse.gamma2 / span, coarse.gamma2 * span, GRID_POINTS);
    let fine = search(problem, (g1, g2), s1, s2, pmax, &a1, &a2)?;
    Some(if fine.energy < coarse.energy {
        fine
    } else {
        coarse
    })
}

/// SINR on the rate curve at blocklength `m`, by bisection on the residual
/// `N/m - log2(1+x) + sqrt((1 - (1+x)^-2)/m) Q^{-1}(eps)/ln 2`.
pub fn sinr_by_residual(m: f64, s: &UserSpec) -> f64 {
    let q = q_inv(s.error_target.value()).unwrap() / LN_2;
    let n = s.payload_bits as f64;
    let residual = |x: f64| n / m - (1.0 + x).log2() + ((1.0 - (1.0 + x).powi(-2)) / m).sqrt() * q;
    let mut hi = 1.0;
    while residual(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// TDMA energy for a (possibly fractional) `m1`, `+inf` if a slot exceeds `Pmax`.
pub fn tdma_energy(m1: f64, g1: f64, g2: f64, s1: &UserSpec, s2: &UserSpec, pmax: f64) -> f64 {
    let m2 = s2.deadline as f64 - m1;
    let (p1, p2) = (sinr_by_residual(m1, s1) / g1, sinr_by_residual(m2, s2) / g2);
    if p1.max(p2) > pmax {
        f64::INFINITY
    } else {
        m1 * p1 + m2 * p2
    }
}

pub fn tdma_window(s1: &UserSpec, s2: &UserSpec) -> (f64, f64) {
    (
        s1.min_blocklength as f64,
        (s1.deadline.min(s2.deadline - s2.min_blocklength)) as f64,
    )
}

/// Continuous golden-section minimum of the TDMA energy over `m1`.
pub fn tdma_golden(g1: f64, g2: f64, s1: &UserSpec, s2: &UserSpec, pmax: f64) -> (f64, f64) {
    let (mut a, mut b) = tdma_window(s1, s2);
    let f = |m: f64| tdma_energy(m, g1, g2, s1, s2, pmax);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-6 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

/// Exhaustive integer enumeration of the TDMA energy.
pub fn tdma_enumerate(
    g1: f64,
    g2: f64,
    s1: &UserSpec,
    s2: &UserSpec,
    pmax: f64,
) -> Option<(f64, f64)> {
    let (lo, hi) = tdma_window(s1, s2);
    (lo as u32..=hi as u32)
        .map(|m| (m as f64, tdma_energy(m as f64, g1, g2, s1, s2, pmax)))
        .filter(|(_, e)| e.is_finite())
        .min_by(|x, y| x.1.total_cmp(&y.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    P1,
    P2,
    P3,
    Tdma,
}

#[derive(Debug, Clone, Copy)]
pub struct Instance {
    pub g1: f64,
    pub g2: f64,
    pub s1: UserSpec,
    pub s2: UserSpec,
    pub pmax: f64,
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Random instance with the channel ordering the family needs and `D1 < D2`.
/// Feasibility is not guaranteed.
pub fn random_instance<R: Rng>(rng: &mut R, family: Family) -> Instance {
    let (mut g1, mut g2) = (log_uniform(rng, 0.5, 50.0), log_uniform(rng, 0.5, 50.0));
    let swap = match family {
        Family::P1 => g1 > g2,
        Family::P2 | Family::P3 => g1 <= g2,
        Family::Tdma => false,
    };
    if swap {
        std::mem::swap(&mut g1, &mut g2);
    }
    let d1 = rng.gen_range(150..=800);
    let d2 = d1 + rng.gen_range(1..=2000);
    let mut user = |d: u32| {
        let n = rng.gen_range(80..=400);
        let eps = log_uniform(rng, 1e-9, 1e-3);
        UserSpec::new(n, eps, d, 100).unwrap()
    };
    let s1 = user(d1);
    let s2 = user(d2);
    Instance {
        g1,
        g2,
        s1,
        s2,
        pmax: 10f64.powf(rng.gen_range(0.0..1.5)),
    }
}

/// First `n` instances from a seeded stream that satisfy `keep`.
pub fn instances(
    family: Family,
    n: usize,
    seed: u64,
    mut keep: impl FnMut(&Instance) -> bool,
) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..100_000 {
        if out.len() == n {
            break;
        }
        let inst = random_instance(&mut rng, family);
        if keep(&inst) {
            out.push(inst);
        }
    }
    assert_eq!(out.len(), n, "could not draw {n} {family:?} instances");
    out
}
