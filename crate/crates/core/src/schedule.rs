//! Discretization of the eigenpath in its natural parametrization `v`, in
//! which `‖∂_v |x(v)⟩‖ ≤ 1`, together with the random evolution times and the
//! total-time and gate-cost estimates that follow from it.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::{gap_lower_bound, Variant};

pub const DEFAULT_C_Q: f64 = 1.0;

/// Slack allowed when checking `v` against `[v_a, v_b]`.
const V_RANGE_TOL: f64 = 1e-12;

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa >= 1.0) {
        return Err(Error::invalid(format!(
            "kappa must be finite and >= 1, got {kappa}"
        )));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// `√(1+κ²) / (√2 κ)`, the rate constant of the parametrization.
fn rate(kappa: f64) -> f64 {
    (1.0 + kappa * kappa).sqrt() / (SQRT_2 * kappa)
}

/// `(v_a, v_b)` with `s(v_a) = 0` and `s(v_b) = 1`.
pub fn v_bounds(kappa: f64) -> Result<(f64, f64)> {
    check_kappa(kappa)?;
    let root = (1.0 + kappa * kappa).sqrt();
    let p = SQRT_2 * kappa / root;
    // κ√(1+κ²) − κ² = κ / (√(1+κ²) + κ), without cancellation
    let v_a = p * (kappa / (root + kappa)).ln();
    let v_b = p * (root + 1.0).ln();
    Ok((v_a, v_b))
}

/// `s(v) = (e^{cv} + 2κ² − κ² e^{−cv}) / (2(1+κ²))`.
pub fn s_of_v(v: f64, kappa: f64) -> Result<f64> {
    let (v_a, v_b) = v_bounds(kappa)?;
    if !(v >= v_a - V_RANGE_TOL && v <= v_b + V_RANGE_TOL) {
        return Err(Error::invalid(format!(
            "v = {v} outside [{v_a}, {v_b}] for kappa = {kappa}"
        )));
    }
    Ok(s_of_v_unchecked(v, kappa).clamp(0.0, 1.0))
}

fn s_of_v_unchecked(v: f64, kappa: f64) -> f64 {
    let k2 = kappa * kappa;
    let cv = rate(kappa) * v;
    (cv.exp() + 2.0 * k2 - k2 * (-cv).exp()) / (2.0 * (1.0 + k2))
}

/// Inverse of [`s_of_v`].
pub fn v_of_s(s: f64, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("s must lie in [0, 1], got {s}")));
    }
    let k2 = kappa * kappa;
    // y = e^{cv} solves y² − m y − κ² = 0
    let m = 2.0 * (1.0 + k2) * s - 2.0 * k2;
    let y = if m >= 0.0 {
        (m + (m * m + 4.0 * k2).sqrt()) / 2.0
    } else {
        2.0 * k2 / ((m * m + 4.0 * k2).sqrt() - m)
    };
    Ok(y.ln() / rate(kappa))
}

/// `L* = √2 ln(12κ)`, an upper bound on the path length `v_b − v_a`.
pub fn path_length_bound(kappa: f64) -> Result<f64> {
    let (v_a, v_b) = v_bounds(kappa)?;
    let l = SQRT_2 * (12.0 * kappa).ln();
    debug_assert!(v_b - v_a <= l + 1e-12);
    Ok(l)
}

/// `q = ⌈C_q L*² / ε⌉`, at least 1.
pub fn num_steps(kappa: f64, epsilon: f64, c_q: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    if !(c_q > 0.0 && c_q.is_finite()) {
        return Err(Error::invalid(format!("C_q must be positive, got {c_q}")));
    }
    let l = path_length_bound(kappa)?;
    let q = (c_q * l * l / epsilon).ceil();
    if q > usize::MAX as f64 / 2.0 {
        return Err(Error::invalid(format!(
            "step count {q} is not representable"
        )));
    }
    Ok((q as usize).max(1))
}

/// Width of the uniform time distribution at a point with gap bound `gap_bound`.
pub fn time_width(gap_bound: f64, variant: Variant) -> f64 {
    match variant {
        Variant::GroundState => 2.0 * PI / gap_bound,
        Variant::GapAmplified => 2.0 * PI / gap_bound.sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchedulePoint {
    pub v: f64,
    pub s: f64,
    /// `Δ*(s)`.
    pub gap_bound: f64,
    /// Evolution times at this point are uniform on `[0, time_width]`.
    pub time_width: f64,
}

/// Invariants: `v_a < v¹ < … < v^q = v_b` with uniform spacing, `s^q = 1`,
/// every `time_width > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub kappa: f64,
    /// Target precision; `L*² / q` when `q` was given explicitly.
    pub epsilon: f64,
    pub variant: Variant,
    pub q: usize,
    pub v_a: f64,
    pub v_b: f64,
    /// `None` when `q` was given explicitly.
    pub c_q: Option<f64>,
    pub points: Vec<SchedulePoint>,
}

impl Schedule {
    /// `δ = (v_b − v_a) / q`.
    pub fn delta(&self) -> f64 {
        (self.v_b - self.v_a) / self.q as f64
    }

    /// `T = Σ_j ⟨t^j⟩ = Σ_j time_width_j / 2`.
    pub fn expected_total_time(&self) -> f64 {
        self.points.iter().map(|p| p.time_width / 2.0).sum()
    }

    /// Largest possible total time of one run, `2T`.
    pub fn max_total_time(&self) -> f64 {
        self.points.iter().map(|p| p.time_width).sum()
    }

    pub fn s_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.s)
    }
}

/// Schedule with `q` from [`num_steps`].
pub fn build_schedule(kappa: f64, epsilon: f64, variant: Variant, c_q: f64) -> Result<Schedule> {
    let q = num_steps(kappa, epsilon, c_q)?;
    let mut sched = build_schedule_with_steps(kappa, variant, q)?;
    sched.epsilon = epsilon;
    sched.c_q = Some(c_q);
    Ok(sched)
}

/// Schedule with an explicit step count; `epsilon` is set to the implied
/// `L*² / q`.
pub fn build_schedule_with_steps(kappa: f64, variant: Variant, q: usize) -> Result<Schedule> {
    if q == 0 {
        return Err(Error::invalid("step count must be at least 1"));
    }
    let (v_a, v_b) = v_bounds(kappa)?;
    let l = path_length_bound(kappa)?;
    let delta = (v_b - v_a) / q as f64;
    let points = (1..=q)
        .map(|j| {
            let (v, s) = if j == q {
                (v_b, 1.0)
            } else {
                let v = v_a + j as f64 * delta;
                (v, s_of_v_unchecked(v, kappa).clamp(0.0, 1.0))
            };
            let gap_bound = gap_lower_bound(s, kappa);
            SchedulePoint {
                v,
                s,
                gap_bound,
                time_width: time_width(gap_bound, variant),
            }
        })
        .collect();
    Ok(Schedule {
        kappa,
        epsilon: l * l / q as f64,
        variant,
        q,
        v_a,
        v_b,
        c_q: None,
        points,
    })
}

/// One independent uniform draw `t^j ∈ [0, time_width_j)` per point.
pub fn sample_times<R: Rng + ?Sized>(sched: &Schedule, rng: &mut R) -> Vec<f64> {
    sched
        .points
        .iter()
        .map(|p| rng.gen::<f64>() * p.time_width)
        .collect()
}

/// Closed-form upper bound on `T` for step size `delta`.
pub fn total_time_bound(kappa: f64, delta: f64, variant: Variant) -> Result<f64> {
    check_kappa(kappa)?;
    if !(delta > 0.0) {
        return Err(Error::invalid(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let k2 = kappa * kappa;
    Ok(match variant {
        Variant::GroundState => PI * (SQRT_2 * kappa * (1.0 + kappa) / delta + 2.0 * (k2 + 1.0)),
        Variant::GapAmplified => PI * (PI * kappa / (SQRT_2 * delta) + 2.0 * (k2 + 1.0).sqrt()),
    })
}

/// Symbol standing for the gate cost of one matrix-element rotation.
pub const ROTATION_COST_SYMBOL: &str = "C_M";

/// Query count for simulating total time `T` with a truncated-Taylor LCU:
/// `τ = 2(d+1)T`, `r = ⌈τ / ln 2⌉` segments, truncation order `K` minimal with
/// `(ln 2)^{K+1}/(K+1)! ≤ ε/r`, and `2rK` oracle queries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateCostModel {
    pub total_time: f64,
    pub d: usize,
    pub epsilon: f64,
    pub tau: f64,
    pub k: u32,
    pub r: u64,
    pub queries: u64,
}

impl GateCostModel {
    /// Gate count expressed in terms of [`ROTATION_COST_SYMBOL`].
    pub fn gate_cost_expression(&self) -> String {
        format!("{} * {}", self.queries, ROTATION_COST_SYMBOL)
    }
}

impl fmt::Display for GateCostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "T={:.16e} d={} epsilon={:.16e} tau={:.16e} r={} K={} queries={} gates={}",
            self.total_time,
            self.d,
            self.epsilon,
            self.tau,
            self.r,
            self.k,
            self.queries,
            self.gate_cost_expression()
        )
    }
}

pub fn gate_cost_estimate(total_time: f64, d: usize, epsilon: f64) -> Result<GateCostModel> {
    check_epsilon(epsilon)?;
    if !(total_time >= 1.0 && total_time.is_finite()) {
        return Err(Error::invalid(format!(
            "T must be finite and >= 1, got {total_time}"
        )));
    }
    if d == 0 {
        return Err(Error::invalid("sparsity d must be at least 1"));
    }
    let tau = 2.0 * (d as f64 + 1.0) * total_time;
    let r_f = (tau / LN_2).ceil();
    if r_f >= u64::MAX as f64 / 64.0 {
        return Err(Error::invalid(format!(
            "segment count {r_f} is not representable"
        )));
    }
    let r = r_f as u64;
    let target = (epsilon / r as f64).ln();
    // ln((ln 2)^{K+1} / (K+1)!) accumulated term by term
    let mut k = 1u32;
    let mut log_term = 2.0 * LN_2.ln() - 2f64.ln();
    while log_term > target {
        k += 1;
        log_term += LN_2.ln() - f64::from(k + 1).ln();
    }
    Ok(GateCostModel {
        total_time,
        d,
        epsilon,
        tau,
        k,
        r,
        queries: 2 * r * u64::from(k),
    })
}
