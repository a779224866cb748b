//! Loose competitiveness: which cache sizes in `1..=n` are bad.
//!
//! A size `k` is bad when
//! `cost(A, k, r) > max(c * cost(OPT, k, r), epsilon * sum_{f in r} cost(f))`.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::file::RequestSequence;
use crate::landlord::{self, LandlordPolicy};
use crate::opt;
use crate::paging::{self, PagingAlgorithm, PagingTrace};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LooseParams {
    pub epsilon: Rational,
    pub delta: Rational,
    pub n: u64,
    pub c: Rational,
}

impl LooseParams {
    pub fn new(epsilon: Rational, delta: Rational, n: u64, c: Rational) -> Result<Self> {
        let one = rational::one();
        if !epsilon.is_positive() || epsilon > one {
            return Err(Error::InvalidParams("epsilon must lie in (0, 1]".into()));
        }
        if !delta.is_positive() || delta > one {
            return Err(Error::InvalidParams("delta must lie in (0, 1]".into()));
        }
        if n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if !c.is_positive() {
            return Err(Error::InvalidParams("c must be positive".into()));
        }
        Ok(LooseParams { epsilon, delta, n, c })
    }

    /// Converts a float-valued constant (from [`super::bounds`]) to its exact
    /// binary rational value.
    pub fn with_float_c(epsilon: Rational, delta: Rational, n: u64, c: f64) -> Result<Self> {
        let c = rational::from_f64(c)
            .ok_or_else(|| Error::InvalidParams(format!("c = {c} is not finite")))?;
        Self::new(epsilon, delta, n, c)
    }
}

/// An online (or offline) algorithm whose cost can be measured at any `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Algorithm {
    Landlord(LandlordPolicy),
    Lru,
    Fifo,
    Fwf,
    Marking { seed: u64 },
    Opt,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Landlord(_) => "landlord",
            Algorithm::Lru => "lru",
            Algorithm::Fifo => "fifo",
            Algorithm::Fwf => "fwf",
            Algorithm::Marking { .. } => "marking",
            Algorithm::Opt => "opt",
        }
    }
}

/// Retrieval cost of `alg` with cache size `k`. The direct paging
/// simulators need unit sizes; their cost is the sum of the missed costs.
pub fn algorithm_cost(seq: &RequestSequence, k: u64, alg: &Algorithm) -> Result<Rational> {
    let paging_alg = match alg {
        Algorithm::Landlord(policy) => return landlord::run_cost(seq, k, policy),
        Algorithm::Opt => return opt::opt_cost_fast_paging(seq, k),
        Algorithm::Lru => (PagingAlgorithm::Lru, None),
        Algorithm::Fifo => (PagingAlgorithm::Fifo, None),
        Algorithm::Fwf => (PagingAlgorithm::Fwf, None),
        Algorithm::Marking { seed } => (PagingAlgorithm::Marking, Some(*seed)),
    };
    if !seq.is_unit_size() {
        return Err(Error::InvalidParams(format!(
            "{} needs every file to have size 1",
            alg.name()
        )));
    }
    let run = paging::simulate_paging(
        &PagingTrace::from_sequence(seq),
        k as usize,
        paging_alg.0,
        paging_alg.1,
    )?;
    let requests = seq.requests();
    Ok(run
        .fault_positions
        .iter()
        .map(|&i| requests[i].cost.clone())
        .sum())
}

/// Where the optimal costs come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptSource {
    /// Compute exactly for each `k`.
    Exact,
    /// Precomputed `cost(OPT, k)` for `k = 1..=n`, in order.
    Supplied(Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KRow {
    pub k: u64,
    /// `None` when some request is larger than `k`.
    pub costs: Option<KCosts>,
    pub bad: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KCosts {
    pub alg_cost: Rational,
    pub opt_cost: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadSetReport {
    pub rows: Vec<KRow>,
    pub total_request_cost: Rational,
    pub bad_ks: Vec<u64>,
    /// Sizes excluded because a request does not fit.
    pub inapplicable: Vec<u64>,
    /// `|bad_ks| / (number of applicable k)`; zero if none apply.
    pub bad_fraction: Rational,
}

impl BadSetReport {
    pub fn below(&self, delta: &Rational) -> bool {
        self.bad_fraction < *delta
    }
}

pub fn is_bad(alg_cost: &Rational, opt_cost: &Rational, total: &Rational, epsilon: &Rational, c: &Rational) -> bool {
    let competitive = c * opt_cost;
    let negligible = epsilon * total;
    *alg_cost > competitive.max(negligible)
}

/// Classifies precomputed per-k costs (`None` marks an inapplicable `k`).
pub fn classify(
    per_k: Vec<(u64, Option<KCosts>)>,
    total_request_cost: Rational,
    epsilon: &Rational,
    c: &Rational,
) -> BadSetReport {
    let mut rows = Vec::with_capacity(per_k.len());
    let mut bad_ks = Vec::new();
    let mut inapplicable = Vec::new();
    for (k, costs) in per_k {
        let bad = match &costs {
            Some(kc) => is_bad(&kc.alg_cost, &kc.opt_cost, &total_request_cost, epsilon, c),
            None => {
                inapplicable.push(k);
                false
            }
        };
        if bad {
            bad_ks.push(k);
        }
        rows.push(KRow { k, costs, bad });
    }
    let applicable = rows.len() - inapplicable.len();
    let bad_fraction = if applicable == 0 {
        Rational::zero()
    } else {
        rational::ratio(bad_ks.len() as i64, applicable as i64)
    };
    BadSetReport {
        rows,
        total_request_cost,
        bad_ks,
        inapplicable,
        bad_fraction,
    }
}

pub fn evaluate_loose(
    seq: &RequestSequence,
    params: &LooseParams,
    alg: &Algorithm,
    opt_source: &OptSource,
) -> Result<BadSetReport> {
    if let OptSource::Supplied(costs) = opt_source {
        if costs.len() as u64 != params.n {
            return Err(Error::InvalidParams(format!(
                "{} optimal costs supplied for n = {}",
                costs.len(),
                params.n
            )));
        }
    }
    let max_size = seq.max_size();
    let mut per_k = Vec::with_capacity(params.n as usize);
    for k in 1..=params.n {
        if k < max_size {
            per_k.push((k, None));
            continue;
        }
        let alg_cost = algorithm_cost(seq, k, alg)?;
        let opt_cost = match opt_source {
            OptSource::Exact => opt::opt_cost_fast_paging(seq, k)?,
            OptSource::Supplied(costs) => costs[(k - 1) as usize].clone(),
        };
        per_k.push((k, Some(KCosts { alg_cost, opt_cost })));
    }
    Ok(classify(per_k, seq.total_request_cost(), &params.epsilon, &params.c))
}
