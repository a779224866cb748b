//! The Landlord file-caching algorithm.
//!
//! Every resident file holds a credit in `[0, cost]`. On a miss, rent is
//! charged to all residents in proportion to their size until the requested
//! file fits; files whose credit reaches exactly zero become evictable. On a
//! hit the credit may be raised toward the file's cost.
//!
//! All arithmetic is exact, so the zero test that triggers eviction is exact
//! and runs are reproducible bit for bit.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::file::{FileId, FileSpec, FutureIndex, RequestSequence};
use crate::rational::{self, Rational};

/// Order in which zero-credit files are considered for eviction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvictionSelector {
    /// No preference; candidates are taken in file-id order.
    AllZero,
    /// Least recently requested first.
    LruOrder,
    /// Longest resident first.
    FifoOrder,
    /// Soonest next request first. Needs lookahead into the trace.
    PessimalNextRequest,
}

impl EvictionSelector {
    pub const ALL: [EvictionSelector; 4] = [
        EvictionSelector::AllZero,
        EvictionSelector::LruOrder,
        EvictionSelector::FifoOrder,
        EvictionSelector::PessimalNextRequest,
    ];
}

/// How many zero-credit files a rent round evicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Greediness {
    /// Every zero-credit file.
    EvictAllZero,
    /// One at a time in selector order, stopping once the request fits.
    EvictUntilRoom,
}

impl Greediness {
    pub const ALL: [Greediness; 2] = [Greediness::EvictAllZero, Greediness::EvictUntilRoom];
}

/// Free parameters of Landlord.
///
/// `refresh_lambda` interpolates the hit-time credit refresh: the new credit
/// is `credit + lambda * (cost - credit)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LandlordPolicy {
    refresh_lambda: Rational,
    selector: EvictionSelector,
    greediness: Greediness,
}

impl LandlordPolicy {
    pub fn new(
        refresh_lambda: Rational,
        selector: EvictionSelector,
        greediness: Greediness,
    ) -> Result<Self> {
        if refresh_lambda.is_negative() || refresh_lambda > Rational::one() {
            return Err(Error::InvalidParams(format!(
                "refresh lambda {} outside [0, 1]",
                rational::format_rational(&refresh_lambda)
            )));
        }
        Ok(LandlordPolicy {
            refresh_lambda,
            selector,
            greediness,
        })
    }

    /// Full refresh, least-recent eviction: LRU on paging inputs.
    pub fn lru() -> Self {
        Self::fixed(rational::one(), EvictionSelector::LruOrder, Greediness::EvictUntilRoom)
    }

    /// No refresh, oldest-first eviction: FIFO on paging inputs.
    pub fn fifo() -> Self {
        Self::fixed(rational::zero(), EvictionSelector::FifoOrder, Greediness::EvictUntilRoom)
    }

    /// No refresh, evict everything at zero: flush-when-full on paging inputs.
    pub fn fwf() -> Self {
        Self::fixed(rational::zero(), EvictionSelector::AllZero, Greediness::EvictAllZero)
    }

    /// Flush-when-full that evicts one file at a time, soonest-needed first.
    pub fn pessimal() -> Self {
        Self::fixed(
            rational::zero(),
            EvictionSelector::PessimalNextRequest,
            Greediness::EvictUntilRoom,
        )
    }

    fn fixed(refresh_lambda: Rational, selector: EvictionSelector, greediness: Greediness) -> Self {
        LandlordPolicy {
            refresh_lambda,
            selector,
            greediness,
        }
    }

    pub fn refresh_lambda(&self) -> &Rational {
        &self.refresh_lambda
    }

    pub fn selector(&self) -> EvictionSelector {
        self.selector
    }

    pub fn greediness(&self) -> Greediness {
        self.greediness
    }

    pub fn needs_lookahead(&self) -> bool {
        self.selector == EvictionSelector::PessimalNextRequest
    }
}

/// One pass of the rent loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RentRound {
    /// Rent per unit of size charged in this round.
    pub delta: Rational,
    /// Residents whose credit is zero after the charge.
    pub zeroed: Vec<FileId>,
    /// Files evicted right after this round, in eviction order.
    pub evicted: Vec<FileId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestOutcome {
    pub was_hit: bool,
    pub retrieval_cost_paid: Rational,
    pub rent_rounds: Vec<RentRound>,
    /// All evictions caused by this request, in order.
    pub evicted: Vec<FileId>,
    /// Credit of the requested file once the request is served.
    pub credit_after: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resident {
    pub spec: FileSpec,
    pub credit: Rational,
    pub inserted_at: u64,
    pub last_request: u64,
}

/// Lookahead handle for the pessimal selector: the trace index plus the
/// position of the request being served.
#[derive(Debug, Clone, Copy)]
pub struct Lookahead<'a> {
    pub future: &'a FutureIndex,
    pub position: usize,
}

/// Landlord's cache: capacity, resident files and their credits.
#[derive(Debug, Clone)]
pub struct LandlordCache {
    capacity: u64,
    used: u64,
    clock: u64,
    residents: BTreeMap<FileId, Resident>,
}

impl LandlordCache {
    pub fn new(capacity: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidCapacity);
        }
        Ok(LandlordCache {
            capacity,
            used: 0,
            clock: 0,
            residents: BTreeMap::new(),
        })
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn len(&self) -> usize {
        self.residents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residents.is_empty()
    }

    pub fn contains(&self, id: &FileId) -> bool {
        self.residents.contains_key(id)
    }

    /// Credit of `id`; zero for non-residents.
    pub fn credit(&self, id: &FileId) -> Rational {
        self.residents
            .get(id)
            .map(|r| r.credit.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn residents(&self) -> impl Iterator<Item = &Resident> {
        self.residents.values()
    }

    /// Serves `g` without lookahead. Fails with `MissingLookahead` if the
    /// policy's selector needs the future.
    pub fn request(&mut self, g: &FileSpec, policy: &LandlordPolicy) -> Result<RequestOutcome> {
        self.request_with(g, policy, None)
    }

    pub fn request_with(
        &mut self,
        g: &FileSpec,
        policy: &LandlordPolicy,
        lookahead: Option<Lookahead<'_>>,
    ) -> Result<RequestOutcome> {
        if g.size > self.capacity {
            return Err(Error::RequestTooLarge {
                id: g.id.clone(),
                size: g.size,
                capacity: self.capacity,
                index: None,
            });
        }
        if policy.needs_lookahead() && lookahead.is_none() {
            return Err(Error::MissingLookahead);
        }
        self.clock += 1;
        let now = self.clock;

        if let Some(res) = self.residents.get_mut(&g.id) {
            let gap = &res.spec.cost - &res.credit;
            if !gap.is_zero() && !policy.refresh_lambda.is_zero() {
                res.credit += &policy.refresh_lambda * gap;
            }
            res.last_request = now;
            return Ok(RequestOutcome {
                was_hit: true,
                retrieval_cost_paid: Rational::zero(),
                rent_rounds: Vec::new(),
                evicted: Vec::new(),
                credit_after: res.credit.clone(),
            });
        }

        let mut rounds = Vec::new();
        let mut evicted = Vec::new();
        while self.capacity - self.used < g.size {
            let round = self.charge_rent(g.size, policy, lookahead);
            evicted.extend(round.evicted.iter().cloned());
            rounds.push(round);
        }

        self.used += g.size;
        self.residents.insert(
            g.id.clone(),
            Resident {
                spec: g.clone(),
                credit: g.cost.clone(),
                inserted_at: now,
                last_request: now,
            },
        );
        Ok(RequestOutcome {
            was_hit: false,
            retrieval_cost_paid: g.cost.clone(),
            rent_rounds: rounds,
            evicted,
            credit_after: g.cost.clone(),
        })
    }

    /// One rent round followed by evictions of zero-credit files.
    fn charge_rent(
        &mut self,
        needed: u64,
        policy: &LandlordPolicy,
        lookahead: Option<Lookahead<'_>>,
    ) -> RentRound {
        // The loop only runs while the cache is too full, so it is nonempty.
        let delta = self
            .residents
            .values()
            .map(|r| &r.credit / Rational::from_integer(r.spec.size.into()))
            .min()
            .expect("rent charged on an empty cache");

        let mut zeroed = Vec::new();
        for (id, r) in self.residents.iter_mut() {
            if !delta.is_zero() {
                r.credit -= &delta * Rational::from_integer(r.spec.size.into());
            }
            if r.credit.is_zero() {
                zeroed.push(id.clone());
            }
        }

        let mut candidates: Vec<&Resident> =
            zeroed.iter().map(|id| &self.residents[id]).collect();
        match policy.selector {
            EvictionSelector::AllZero => {}
            EvictionSelector::LruOrder => candidates.sort_by_key(|r| r.last_request),
            EvictionSelector::FifoOrder => candidates.sort_by_key(|r| r.inserted_at),
            EvictionSelector::PessimalNextRequest => {
                let la = lookahead.expect("lookahead checked on entry");
                candidates.sort_by_key(|r| {
                    let next = la.future.next_after(&r.spec.id, la.position);
                    (next.is_none(), next, r.inserted_at)
                });
            }
        }
        let order: Vec<FileId> = candidates.iter().map(|r| r.spec.id.clone()).collect();

        let mut evicted = Vec::new();
        for id in order {
            if policy.greediness == Greediness::EvictUntilRoom
                && self.capacity - self.used >= needed
            {
                break;
            }
            let r = self.residents.remove(&id).expect("candidate is resident");
            self.used -= r.spec.size;
            evicted.push(id);
        }

        RentRound {
            delta,
            zeroed,
            evicted,
        }
    }

    /// Checks the capacity and credit-range invariants.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let used: u64 = self.residents.values().map(|r| r.spec.size).sum();
        if used != self.used {
            return Err(format!("size bookkeeping {} != {}", self.used, used));
        }
        if used > self.capacity {
            return Err(format!("occupancy {used} exceeds capacity {}", self.capacity));
        }
        for r in self.residents.values() {
            if r.credit.is_negative() || r.credit > r.spec.cost {
                return Err(format!(
                    "credit of {} is {} outside [0, {}]",
                    r.spec.id,
                    rational::format_rational(&r.credit),
                    rational::format_rational(&r.spec.cost)
                ));
            }
        }
        Ok(())
    }
}

/// Result of folding Landlord over a whole trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub outcomes: Vec<RequestOutcome>,
    pub total_cost: Rational,
}

impl RunReport {
    pub fn fault_positions(&self) -> Vec<usize> {
        self.outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| !o.was_hit)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fault_count(&self) -> usize {
        self.outcomes.iter().filter(|o| !o.was_hit).count()
    }
}

/// Runs Landlord with cache size `k` over `seq`.
pub fn run_trace(seq: &RequestSequence, k: u64, policy: &LandlordPolicy) -> Result<RunReport> {
    let mut cache = LandlordCache::new(k)?;
    let future = policy.needs_lookahead().then(|| FutureIndex::new(seq));
    let mut outcomes = Vec::with_capacity(seq.len());
    let mut total_cost = Rational::zero();
    for (position, g) in seq.iter().enumerate() {
        let lookahead = future.as_ref().map(|future| Lookahead { future, position });
        let outcome = cache
            .request_with(g, policy, lookahead)
            .map_err(|e| match e {
                Error::RequestTooLarge {
                    id, size, capacity, ..
                } => Error::RequestTooLarge {
                    id,
                    size,
                    capacity,
                    index: Some(position),
                },
                other => other,
            })?;
        total_cost += &outcome.retrieval_cost_paid;
        outcomes.push(outcome);
    }
    Ok(RunReport {
        outcomes,
        total_cost,
    })
}

/// Total cost only.
pub fn run_cost(seq: &RequestSequence, k: u64, policy: &LandlordPolicy) -> Result<Rational> {
    run_trace(seq, k, policy).map(|r| r.total_cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn file(id: &str, size: u64, cost: i64) -> FileSpec {
        FileSpec::new(id, size, int(cost)).unwrap()
    }

    #[test]
    fn capacity_must_be_positive() {
        assert_eq!(LandlordCache::new(0).unwrap_err(), Error::InvalidCapacity);
        let c = LandlordCache::new(4).unwrap();
        assert_eq!((c.capacity(), c.len()), (4, 0));
    }

    #[test]
    fn minimal_capacity_fits_unit_request() {
        let mut c = LandlordCache::new(1).unwrap();
        let out = c.request(&FileSpec::unit("a"), &LandlordPolicy::lru()).unwrap();
        assert!(!out.was_hit);
        assert!(c.contains(&"a".into()));
    }

    #[test]
    fn cold_miss_sets_full_credit() {
        let mut c = LandlordCache::new(4).unwrap();
        let out = c.request(&file("g", 2, 5), &LandlordPolicy::lru()).unwrap();
        assert!(!out.was_hit);
        assert_eq!(out.retrieval_cost_paid, int(5));
        assert!(out.rent_rounds.is_empty());
        assert_eq!(c.credit(&"g".into()), int(5));
    }

    #[test]
    fn hit_at_full_credit_is_fixed_point() {
        for lambda in [int(0), ratio(1, 2), int(1)] {
            let p = LandlordPolicy::new(lambda, EvictionSelector::LruOrder, Greediness::EvictUntilRoom)
                .unwrap();
            let mut c = LandlordCache::new(4).unwrap();
            c.request(&file("g", 2, 5), &p).unwrap();
            let out = c.request(&file("g", 2, 5), &p).unwrap();
            assert!(out.was_hit);
            assert_eq!(out.retrieval_cost_paid, int(0));
            assert!(out.evicted.is_empty());
            assert_eq!(c.credit(&"g".into()), int(5));
        }
    }

    #[test]
    fn oversized_request_is_rejected() {
        let mut c = LandlordCache::new(2).unwrap();
        let err = c.request(&file("big", 3, 1), &LandlordPolicy::lru()).unwrap_err();
        assert!(matches!(err, Error::RequestTooLarge { size: 3, capacity: 2, .. }));

        let seq = RequestSequence::new(vec![file("a", 1, 1), file("big", 3, 1)]).unwrap();
        let err = run_trace(&seq, 2, &LandlordPolicy::lru()).unwrap_err();
        assert!(matches!(err, Error::RequestTooLarge { index: Some(1), .. }));
    }

    #[test]
    fn lambda_outside_unit_interval_is_rejected() {
        assert!(LandlordPolicy::new(ratio(3, 2), EvictionSelector::AllZero, Greediness::EvictAllZero).is_err());
        assert!(LandlordPolicy::new(int(-1), EvictionSelector::AllZero, Greediness::EvictAllZero).is_err());
    }

    #[test]
    fn partial_refresh_interpolates() {
        let p = LandlordPolicy::new(ratio(1, 2), EvictionSelector::LruOrder, Greediness::EvictUntilRoom)
            .unwrap();
        let mut c = LandlordCache::new(3).unwrap();
        c.request(&file("a", 2, 4), &p).unwrap();
        c.request(&file("b", 1, 2), &p).unwrap();
        // rent delta = min(4/2, 2/1) = 2 zeroes both
        let out = c.request(&file("c", 1, 3), &p).unwrap();
        assert_eq!(out.rent_rounds.len(), 1);
        assert_eq!(out.rent_rounds[0].delta, int(2));
        // LRU order evicts a first, which frees enough room
        assert_eq!(out.evicted, vec![FileId::new("a")]);
        assert_eq!(c.credit(&"b".into()), int(0));
        let hit = c.request(&file("b", 1, 2), &p).unwrap();
        assert_eq!(hit.credit_after, int(1));
    }

    #[test]
    fn zero_cost_file_is_evictable_in_zero_round() {
        let p = LandlordPolicy::fifo();
        let mut c = LandlordCache::new(2).unwrap();
        c.request(&file("free", 1, 0), &p).unwrap();
        c.request(&file("a", 1, 3), &p).unwrap();
        let out = c.request(&file("b", 1, 3), &p).unwrap();
        assert_eq!(out.rent_rounds.len(), 1);
        assert_eq!(out.rent_rounds[0].delta, int(0));
        assert_eq!(out.evicted, vec![FileId::new("free")]);
        assert_eq!(c.credit(&"a".into()), int(3));
    }

    #[test]
    fn pessimal_requires_lookahead() {
        let mut c = LandlordCache::new(2).unwrap();
        let err = c.request(&FileSpec::unit("a"), &LandlordPolicy::pessimal()).unwrap_err();
        assert_eq!(err, Error::MissingLookahead);
    }

    #[test]
    fn pessimal_evicts_soonest_needed() {
        // k = 2: after a b the cache is full; c forces a flush round.
        // a is needed at 4, b at 3, so b goes first.
        let seq = RequestSequence::paging(["a", "b", "c", "b", "a"]);
        let report = run_trace(&seq, 2, &LandlordPolicy::pessimal()).unwrap();
        assert_eq!(report.outcomes[2].evicted, vec![FileId::new("b")]);
    }

    #[test]
    fn fwf_flushes_everything() {
        let seq = RequestSequence::paging(["a", "b", "c", "a", "b"]);
        let report = run_trace(&seq, 2, &LandlordPolicy::fwf()).unwrap();
        assert_eq!(report.fault_count(), 5);
        assert_eq!(report.outcomes[2].evicted.len(), 2);
        assert_eq!(report.outcomes[4].evicted.len(), 2);
    }

    #[test]
    fn empty_trace_costs_nothing() {
        let report = run_trace(&RequestSequence::default(), 3, &LandlordPolicy::lru()).unwrap();
        assert!(report.outcomes.is_empty());
        assert_eq!(report.total_cost, int(0));
    }
}
