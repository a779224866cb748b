//! Potential-function audit of Landlord against an optimal schedule.
//!
//! The potential is
//! `(h-1) * sum_{f in LL} credit[f] + k * sum_{f in OPT} (cost(f) - credit[f])`
//! where LL is Landlord's cache (size `k`), OPT the optimal cache (size
//! `h`), and non-residents of LL have credit 0. The audit replays both
//! caches request by request, splits each request into elementary events and
//! checks the change of the potential at every event against its bound.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::file::{FileId, FileSpec, FutureIndex, RequestSequence};
use crate::landlord::{LandlordCache, LandlordPolicy, Lookahead};
use crate::opt::{self, OptMove};
use crate::rational::{self, Rational};

fn check_sizes(h: u64, k: u64) -> Result<()> {
    if h == 0 || h > k {
        return Err(Error::InvalidSizes { h, k });
    }
    Ok(())
}

/// Potential of a Landlord cache against the optimal cache contents.
pub fn potential<'a, I>(ll: &LandlordCache, opt_residents: I, h: u64, k: u64) -> Result<Rational>
where
    I: IntoIterator<Item = &'a FileSpec>,
{
    check_sizes(h, k)?;
    let landlord: Rational = ll.residents().map(|r| r.credit.clone()).sum();
    let optimal: Rational = opt_residents
        .into_iter()
        .map(|f| &f.cost - ll.credit(&f.id))
        .sum();
    Ok(Rational::from_integer((h - 1).into()) * landlord
        + Rational::from_integer(k.into()) * optimal)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuditEvent {
    OptEvict(FileId),
    OptRetrieve(FileId),
    RentRound { delta: Rational },
    LandlordEvict(FileId),
    LandlordRetrieve(FileId),
    CreditReset(FileId),
}

impl AuditEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            AuditEvent::OptEvict(_) => "opt-evict",
            AuditEvent::OptRetrieve(_) => "opt-retrieve",
            AuditEvent::RentRound { .. } => "rent-round",
            AuditEvent::LandlordEvict(_) => "landlord-evict",
            AuditEvent::LandlordRetrieve(_) => "landlord-retrieve",
            AuditEvent::CreditReset(_) => "credit-reset",
        }
    }
}

impl fmt::Display for AuditEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditEvent::RentRound { delta } => {
                write!(f, "rent-round delta={}", rational::format_rational(delta))
            }
            AuditEvent::OptEvict(id)
            | AuditEvent::OptRetrieve(id)
            | AuditEvent::LandlordEvict(id)
            | AuditEvent::LandlordRetrieve(id)
            | AuditEvent::CreditReset(id) => write!(f, "{} {id}", self.kind()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditStep {
    pub request: usize,
    pub event: AuditEvent,
    pub phi_before: Rational,
    pub phi_after: Rational,
    /// The change in potential must not exceed this.
    pub bound: Rational,
    pub satisfied: bool,
}

impl AuditStep {
    pub fn change(&self) -> Rational {
        &self.phi_after - &self.phi_before
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialAudit {
    pub h: u64,
    pub k: u64,
    pub steps: Vec<AuditStep>,
    pub landlord_cost: Rational,
    pub opt_cost: Rational,
    /// Disagreements between the audit's mirror of Landlord and the real cache.
    pub mirror_errors: Vec<String>,
}

impl PotentialAudit {
    pub fn violations(&self) -> impl Iterator<Item = &AuditStep> {
        self.steps.iter().filter(|s| !s.satisfied)
    }

    pub fn all_satisfied(&self) -> bool {
        self.mirror_errors.is_empty() && self.steps.iter().all(|s| s.satisfied)
    }

    /// `(k-h+1) * landlord_cost <= k * opt_cost`, exactly.
    pub fn competitive_bound_holds(&self) -> bool {
        Rational::from_integer((self.k - self.h + 1).into()) * &self.landlord_cost
            <= Rational::from_integer(self.k.into()) * &self.opt_cost
    }

    /// Sum of the per-event bounds; with a non-negative final potential this
    /// telescopes to the competitive inequality.
    pub fn bound_total(&self) -> Rational {
        self.steps.iter().map(|s| s.bound.clone()).sum()
    }
}

/// Audits Landlord at size `k` against the exhaustive optimum at size `h`.
pub fn audit_potential(
    seq: &RequestSequence,
    h: u64,
    k: u64,
    policy: &LandlordPolicy,
) -> Result<PotentialAudit> {
    check_sizes(h, k)?;
    let opt = opt::opt_cost(seq, h)?;
    audit_with_witness(seq, h, k, policy, &opt.witness)
}

/// Audits against a caller-supplied optimal (or any feasible) schedule.
pub fn audit_with_witness(
    seq: &RequestSequence,
    h: u64,
    k: u64,
    policy: &LandlordPolicy,
    witness: &[OptMove],
) -> Result<PotentialAudit> {
    check_sizes(h, k)?;
    if witness.len() != seq.len() {
        return Err(Error::InvalidParams(format!(
            "witness has {} moves for {} requests",
            witness.len(),
            seq.len()
        )));
    }
    let mut m = Mirror::new(h, k);
    let mut cache = LandlordCache::new(k)?;
    let future = policy.needs_lookahead().then(|| FutureIndex::new(seq));
    let kk = Rational::from_integer(k.into());
    let retrieve_gain = Rational::from_integer((k - h + 1).into());
    let mut steps = Vec::new();
    let mut mirror_errors = Vec::new();
    let mut landlord_cost = Rational::zero();
    let mut opt_cost = Rational::zero();

    for (i, (g, mv)) in seq.iter().zip(witness).enumerate() {
        if let OptMove::Miss { evicted } = mv {
            for f in evicted {
                m.step(&mut steps, i, AuditEvent::OptEvict(f.clone()), Rational::zero(), |m| {
                    m.opt.remove(f);
                });
            }
            m.step(&mut steps, i, AuditEvent::OptRetrieve(g.id.clone()), &kk * &g.cost, |m| {
                m.opt.insert(g.id.clone(), g.cost.clone());
            });
            opt_cost += &g.cost;
        }

        let lookahead = future.as_ref().map(|future| Lookahead { future, position: i });
        let outcome = cache.request_with(g, policy, lookahead).map_err(|e| match e {
            Error::RequestTooLarge { id, size, capacity, .. } => Error::RequestTooLarge {
                id,
                size,
                capacity,
                index: Some(i),
            },
            other => other,
        })?;

        if outcome.was_hit {
            let credit = outcome.credit_after.clone();
            m.step(&mut steps, i, AuditEvent::CreditReset(g.id.clone()), Rational::zero(), |m| {
                if let Some(entry) = m.ll.get_mut(&g.id) {
                    entry.1 = credit;
                }
            });
        } else {
            for round in &outcome.rent_rounds {
                let delta = round.delta.clone();
                m.step(
                    &mut steps,
                    i,
                    AuditEvent::RentRound { delta: delta.clone() },
                    Rational::zero(),
                    |m| {
                        for (size, credit) in m.ll.values_mut() {
                            *credit -= &delta * Rational::from_integer((*size).into());
                        }
                    },
                );
                for f in &round.evicted {
                    m.step(&mut steps, i, AuditEvent::LandlordEvict(f.clone()), Rational::zero(), |m| {
                        m.ll.remove(f);
                    });
                }
            }
            m.step(
                &mut steps,
                i,
                AuditEvent::LandlordRetrieve(g.id.clone()),
                -(&retrieve_gain * &g.cost),
                |m| {
                    m.ll.insert(g.id.clone(), (g.size, g.cost.clone()));
                },
            );
            landlord_cost += &outcome.retrieval_cost_paid;
        }

        if let Err(e) = m.matches(&cache) {
            mirror_errors.push(format!("request {i}: {e}"));
        }
    }

    Ok(PotentialAudit {
        h,
        k,
        steps,
        landlord_cost,
        opt_cost,
        mirror_errors,
    })
}

/// The audit's own copy of both caches, updated event by event.
struct Mirror {
    h1: Rational,
    k: Rational,
    /// Landlord: id -> (size, credit).
    ll: BTreeMap<FileId, (u64, Rational)>,
    /// Optimum: id -> cost.
    opt: BTreeMap<FileId, Rational>,
    phi: Rational,
}

impl Mirror {
    fn new(h: u64, k: u64) -> Self {
        Mirror {
            h1: Rational::from_integer((h - 1).into()),
            k: Rational::from_integer(k.into()),
            ll: BTreeMap::new(),
            opt: BTreeMap::new(),
            phi: Rational::zero(),
        }
    }

    fn phi(&self) -> Rational {
        let landlord: Rational = self.ll.values().map(|(_, c)| c.clone()).sum();
        let optimal: Rational = self
            .opt
            .iter()
            .map(|(id, cost)| match self.ll.get(id) {
                Some((_, credit)) => cost - credit,
                None => cost.clone(),
            })
            .sum();
        &self.h1 * landlord + &self.k * optimal
    }

    fn step(
        &mut self,
        steps: &mut Vec<AuditStep>,
        request: usize,
        event: AuditEvent,
        bound: Rational,
        apply: impl FnOnce(&mut Mirror),
    ) {
        let before = self.phi.clone();
        apply(self);
        let after = self.phi();
        let negative_credit = self.ll.values().any(|(_, c)| c.is_negative());
        let satisfied = &after - &before <= bound && !after.is_negative() && !negative_credit;
        self.phi = after.clone();
        steps.push(AuditStep {
            request,
            event,
            phi_before: before,
            phi_after: after,
            bound,
            satisfied,
        });
    }

    fn matches(&self, cache: &LandlordCache) -> std::result::Result<(), String> {
        if self.ll.len() != cache.len() {
            return Err(format!(
                "mirror holds {} files, cache holds {}",
                self.ll.len(),
                cache.len()
            ));
        }
        for (id, (_, credit)) in &self.ll {
            if !cache.contains(id) {
                return Err(format!("{id} missing from cache"));
            }
            if cache.credit(id) != *credit {
                return Err(format!("credit of {id} differs"));
            }
        }
        Ok(())
    }
}
