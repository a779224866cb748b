//! Closed-form constants for loose competitiveness.
//!
//! Evaluated in `f64`; the values are used as thresholds, never compared for
//! exact equality against simulation output.

use std::f64::consts::{E, LN_2};

use crate::error::{Error, Result};

fn in_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::InvalidParams(format!("{name} = {x} must lie in (0, 1]")));
    }
    Ok(())
}

/// Loose-competitiveness constant for any `k/(k-h+1)`-competitive algorithm:
/// `(e/delta) * ln(e/epsilon)`.
pub fn bound_c_deterministic(epsilon: f64, delta: f64) -> Result<f64> {
    in_unit_interval("epsilon", epsilon)?;
    in_unit_interval("delta", delta)?;
    Ok(E / delta * (1.0 - epsilon.ln()))
}

/// Constant for any `alpha + beta * ln(k/(k-h+1))`-competitive algorithm:
/// `e*alpha + e*beta * ln((1/delta) * ln(e/epsilon))`.
pub fn bound_c_randomized(alpha: f64, beta: f64, epsilon: f64, delta: f64) -> Result<f64> {
    in_unit_interval("epsilon", epsilon)?;
    in_unit_interval("delta", delta)?;
    if !alpha.is_finite() || !beta.is_finite() || alpha < 0.0 || beta < 0.0 {
        return Err(Error::InvalidParams("alpha and beta must be non-negative".into()));
    }
    let inner = (1.0 - epsilon.ln()) / delta;
    Ok(E * alpha + E * beta * inner.ln())
}

/// `(alpha, beta)` for the marking algorithm, which is
/// `1 + 2 ln 2 + 2 ln(k/(k-h+1))`-competitive for paging.
pub const MARKING_ALPHA: f64 = 1.0 + 2.0 * LN_2;
pub const MARKING_BETA: f64 = 2.0;

pub fn bound_c_marking(epsilon: f64, delta: f64) -> Result<f64> {
    bound_c_randomized(MARKING_ALPHA, MARKING_BETA, epsilon, delta)
}

/// Shape of the competitive ratio `tau(k, k-h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauKind {
    /// `k / (k - h + 1)`
    RatioKOverKmh1,
    /// `alpha + beta * ln(k / (k - h + 1))`
    LogForm { alpha: f64, beta: f64 },
}

impl TauKind {
    /// `tau(k, gap)` with `gap = k - h` (real-valued gap allowed).
    pub fn eval(&self, k: f64, gap: f64) -> f64 {
        let ratio = k / (gap + 1.0);
        match *self {
            TauKind::RatioKOverKmh1 => ratio,
            TauKind::LogForm { alpha, beta } => alpha + beta * ratio.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub tau: TauKind,
    pub b: f64,
}

/// `tau(n, b) * epsilon^{-(b+1)/(delta*n - b - 1)}`, valid for any
/// `0 < b` with `b + 1 < delta*n`.
pub fn bound_c_technical(q: BoundQuery, n: u64, epsilon: f64, delta: f64) -> Result<f64> {
    in_unit_interval("epsilon", epsilon)?;
    in_unit_interval("delta", delta)?;
    if n == 0 {
        return Err(Error::InvalidParams("n must be positive".into()));
    }
    let dn = delta * n as f64;
    if !(q.b > 0.0) || q.b >= dn {
        return Err(Error::InvalidParams(format!(
            "b = {} must satisfy 0 < b < delta*n = {dn}",
            q.b
        )));
    }
    let denom = dn - q.b - 1.0;
    if !(denom > 0.0) {
        return Err(Error::InvalidParams(format!(
            "delta*n - b - 1 = {denom} must be positive"
        )));
    }
    let exponent = -(q.b + 1.0) / denom;
    Ok(q.tau.eval(n as f64, q.b) * epsilon.powf(exponent))
}

/// The `b` that turns the technical bound into `e * tau(n, b)`:
/// `delta*n / ln(e/epsilon) - 1`.
pub fn substitution_b(n: u64, epsilon: f64, delta: f64) -> f64 {
    delta * n as f64 / (1.0 - epsilon.ln()) - 1.0
}

/// Outcome of routing a bound through the technical lemma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LemmaRoute {
    /// `b > 0`: the lemma applies and yields this constant.
    Applied { b: f64, c: f64 },
    /// `b <= 0`: the closed-form constant already exceeds the plain
    /// competitive ratio at every `k <= n`, so the claim holds directly.
    Trivial { b: f64 },
}

pub fn route_through_lemma(tau: TauKind, n: u64, epsilon: f64, delta: f64) -> Result<LemmaRoute> {
    let b = substitution_b(n, epsilon, delta);
    if b <= 0.0 {
        return Ok(LemmaRoute::Trivial { b });
    }
    let c = bound_c_technical(BoundQuery { tau, b }, n, epsilon, delta)?;
    Ok(LemmaRoute::Applied { b, c })
}

/// Lower-bound constant: `(1/(8 delta)) * log2(1/(2 epsilon))`.
pub fn lower_bound_c(epsilon: f64, delta: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParams(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParams(format!("delta = {delta} must lie in (0, 1/2)")));
    }
    Ok((1.0 / (2.0 * epsilon)).log2() / (8.0 * delta))
}
