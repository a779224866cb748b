//! Exact offline optimum for general file caching.
//!
//! Exhaustive search memoized on (request index, resident set). A missed
//! file must be brought into the cache and files may only be evicted to make
//! room for it. Costs are rescaled to integers over their common
//! denominator, so the search itself runs on machine integers whenever the
//! total fits.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::file::{FileId, RequestSequence};
use crate::paging::{self, PagingTrace};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptLimits {
    pub max_distinct: usize,
    pub max_len: usize,
}

impl Default for OptLimits {
    fn default() -> Self {
        OptLimits {
            max_distinct: 12,
            max_len: 24,
        }
    }
}

/// Which eviction sets the search branches over on a miss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Only inclusion-minimal sets that make room.
    MinimalEvictions,
    /// Every subset of the residents that leaves room, including evicting
    /// when the file already fits.
    AllSubsets,
}

/// What the optimal schedule does at one request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptMove {
    Hit,
    Miss { evicted: Vec<FileId> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptResult {
    pub min_cost: Rational,
    /// One move per request.
    pub witness: Vec<OptMove>,
}

pub fn opt_cost(seq: &RequestSequence, k: u64) -> Result<OptResult> {
    opt_cost_with(seq, k, OptLimits::default(), SearchMode::MinimalEvictions)
}

pub fn opt_cost_with(
    seq: &RequestSequence,
    k: u64,
    limits: OptLimits,
    mode: SearchMode,
) -> Result<OptResult> {
    if k == 0 {
        return Err(Error::InvalidCapacity);
    }
    let inst = Instance::build(seq, k, limits)?;

    // Scale to integer costs: cost * lcm(denominators).
    let lcm = seq
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.cost.denom()));
    let scaled: Vec<BigInt> = inst
        .files
        .iter()
        .map(|(_, _, cost)| (cost * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let total: BigInt = inst.requests.iter().map(|&f| &scaled[f]).sum();

    let (best, moves) = if total.to_u128().is_some() {
        let costs: Vec<u128> = scaled.iter().map(|c| c.to_u128().unwrap()).collect();
        let (b, m) = Search::new(&inst, &costs, mode).solve();
        (BigInt::from(b), m)
    } else {
        Search::new(&inst, &scaled, mode).solve()
    };

    let witness = moves
        .into_iter()
        .map(|m| match m {
            None => OptMove::Hit,
            Some(mask) => OptMove::Miss {
                evicted: inst.ids_of(mask),
            },
        })
        .collect();
    Ok(OptResult {
        min_cost: Rational::new(best, lcm),
        witness,
    })
}

/// Belady when every request is unit size and unit cost, exhaustive search
/// otherwise.
pub fn opt_cost_fast_paging(seq: &RequestSequence, k: u64) -> Result<Rational> {
    if seq.is_paging() {
        let faults = paging::belady_opt(&PagingTrace::from_sequence(seq), k as usize)?;
        Ok(Rational::from_integer(faults.into()))
    } else {
        opt_cost(seq, k).map(|r| r.min_cost)
    }
}

/// Replays a witness through a forced-retrieval cache of size `k`, checking
/// every move is legal, and returns its total cost.
pub fn replay_witness(
    seq: &RequestSequence,
    k: u64,
    witness: &[OptMove],
) -> std::result::Result<Rational, String> {
    if witness.len() != seq.len() {
        return Err(format!(
            "witness has {} moves for {} requests",
            witness.len(),
            seq.len()
        ));
    }
    let mut sizes: BTreeMap<FileId, u64> = BTreeMap::new();
    let mut resident: BTreeSet<FileId> = BTreeSet::new();
    let mut used = 0u64;
    let mut cost = Rational::zero();
    for (i, (g, mv)) in seq.iter().zip(witness).enumerate() {
        sizes.insert(g.id.clone(), g.size);
        match mv {
            OptMove::Hit => {
                if !resident.contains(&g.id) {
                    return Err(format!("request {i}: hit on non-resident {}", g.id));
                }
            }
            OptMove::Miss { evicted } => {
                if resident.contains(&g.id) {
                    return Err(format!("request {i}: miss on resident {}", g.id));
                }
                for f in evicted {
                    if !resident.remove(f) {
                        return Err(format!("request {i}: evicts non-resident {f}"));
                    }
                    used -= sizes[f];
                }
                if used + g.size > k {
                    return Err(format!("request {i}: no room for {}", g.id));
                }
                used += g.size;
                resident.insert(g.id.clone());
                cost += &g.cost;
            }
        }
    }
    Ok(cost)
}

struct Instance {
    /// (id, size, cost) sorted by id.
    files: Vec<(FileId, u64, Rational)>,
    requests: Vec<usize>,
    capacity: u64,
}

impl Instance {
    fn build(seq: &RequestSequence, k: u64, limits: OptLimits) -> Result<Self> {
        if seq.len() > limits.max_len {
            return Err(Error::InstanceTooLarge(format!(
                "{} requests exceeds limit {}",
                seq.len(),
                limits.max_len
            )));
        }
        let mut distinct: BTreeMap<FileId, (u64, Rational)> = BTreeMap::new();
        for (index, r) in seq.iter().enumerate() {
            if r.size > k {
                return Err(Error::RequestTooLarge {
                    id: r.id.clone(),
                    size: r.size,
                    capacity: k,
                    index: Some(index),
                });
            }
            distinct
                .entry(r.id.clone())
                .or_insert_with(|| (r.size, r.cost.clone()));
        }
        if distinct.len() > limits.max_distinct.min(24) {
            return Err(Error::InstanceTooLarge(format!(
                "{} distinct files exceeds limit {}",
                distinct.len(),
                limits.max_distinct
            )));
        }
        let files: Vec<(FileId, u64, Rational)> = distinct
            .into_iter()
            .map(|(id, (s, c))| (id, s, c))
            .collect();
        let index_of: BTreeMap<&FileId, usize> =
            files.iter().enumerate().map(|(i, f)| (&f.0, i)).collect();
        let requests = seq.iter().map(|r| index_of[&r.id]).collect();
        Ok(Instance {
            files,
            requests,
            capacity: k,
        })
    }

    fn ids_of(&self, mask: u32) -> Vec<FileId> {
        (0..self.files.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.files[i].0.clone())
            .collect()
    }
}

struct Search<'a, C> {
    inst: &'a Instance,
    costs: &'a [C],
    mode: SearchMode,
    size_of: Vec<u64>,
    memo: Vec<Option<C>>,
}

impl<'a, C> Search<'a, C>
where
    C: Clone + Ord + Zero,
    for<'x> &'x C: Add<&'x C, Output = C>,
{
    fn new(inst: &'a Instance, costs: &'a [C], mode: SearchMode) -> Self {
        let d = inst.files.len();
        let mut size_of = vec![0u64; 1 << d];
        for mask in 1usize..(1 << d) {
            let low = mask.trailing_zeros() as usize;
            size_of[mask] = size_of[mask & (mask - 1)] + inst.files[low].1;
        }
        let memo = vec![None; (inst.requests.len() + 1) << d];
        Search {
            inst,
            costs,
            mode,
            size_of,
            memo,
        }
    }

    fn slot(&self, i: usize, mask: u32) -> usize {
        (i << self.inst.files.len()) | mask as usize
    }

    /// Eviction sets to branch over when `g` misses with residents `mask`.
    fn eviction_sets(&self, mask: u32, g: usize) -> Vec<u32> {
        let k = self.inst.capacity;
        let need = self.inst.files[g].1;
        let used = self.size_of[mask as usize];
        let fits = |evict: u32| used - self.size_of[evict as usize] + need <= k;
        let mut out = Vec::new();
        let mut sub = mask;
        loop {
            if fits(sub) {
                let keep = match self.mode {
                    SearchMode::AllSubsets => true,
                    SearchMode::MinimalEvictions => {
                        // Minimal: putting back any single member breaks the fit.
                        (0..self.inst.files.len())
                            .filter(|f| sub & (1 << f) != 0)
                            .all(|f| !fits(sub & !(1 << f)))
                    }
                };
                if keep {
                    out.push(sub);
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
        out
    }

    fn value(&mut self, i: usize, mask: u32) -> C {
        if i == self.inst.requests.len() {
            return C::zero();
        }
        let slot = self.slot(i, mask);
        if let Some(v) = &self.memo[slot] {
            return v.clone();
        }
        let g = self.inst.requests[i];
        let v = if mask & (1 << g) != 0 {
            self.value(i + 1, mask)
        } else {
            let mut best: Option<C> = None;
            for evict in self.eviction_sets(mask, g) {
                let rest = self.value(i + 1, (mask & !evict) | (1 << g));
                let total = &self.costs[g] + &rest;
                if best.as_ref().map_or(true, |b| total < *b) {
                    best = Some(total);
                }
            }
            best.expect("evicting every resident always makes room")
        };
        self.memo[slot] = Some(v.clone());
        v
    }

    /// Optimal cost and, per request, `None` for a hit or the evicted mask.
    fn solve(mut self) -> (C, Vec<Option<u32>>) {
        let best = self.value(0, 0);
        let mut moves = Vec::with_capacity(self.inst.requests.len());
        let mut mask = 0u32;
        for i in 0..self.inst.requests.len() {
            let g = self.inst.requests[i];
            if mask & (1 << g) != 0 {
                moves.push(None);
                continue;
            }
            let target = self.value(i, mask);
            let mut chosen: Option<(Vec<usize>, u32)> = None;
            for evict in self.eviction_sets(mask, g) {
                let next = (mask & !evict) | (1 << g);
                if &self.costs[g] + &self.value(i + 1, next) != target {
                    continue;
                }
                let members: Vec<usize> = (0..self.inst.files.len())
                    .filter(|f| evict & (1 << f) != 0)
                    .collect();
                if chosen.as_ref().map_or(true, |(m, _)| members < *m) {
                    chosen = Some((members, evict));
                }
            }
            let (_, evict) = chosen.expect("an optimal move exists");
            moves.push(Some(evict));
            mask = (mask & !evict) | (1 << g);
        }
        (best, moves)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::file::FileSpec;
    use crate::rational::{int, ratio};

    fn f(id: &str, size: u64, cost: Rational) -> FileSpec {
        FileSpec::new(id, size, cost).unwrap()
    }

    #[test]
    fn paging_abcab() {
        let seq = RequestSequence::paging(["a", "b", "c", "a", "b"]);
        let r = opt_cost(&seq, 2).unwrap();
        assert_eq!(r.min_cost, int(4));
        assert_eq!(replay_witness(&seq, 2, &r.witness).unwrap(), int(4));
        assert_eq!(opt_cost_fast_paging(&seq, 2).unwrap(), int(4));
    }

    #[test]
    fn forced_eviction_of_large_file() {
        // k=3, a(2,4) b(1,1) c(2,3) a(2,4): evicting b alone leaves a + c = 4 > 3,
        // so a must go at c and be fetched again: 4 + 1 + 3 + 4.
        let seq = RequestSequence::new(vec![
            f("a", 2, int(4)),
            f("b", 1, int(1)),
            f("c", 2, int(3)),
            f("a", 2, int(4)),
        ])
        .unwrap();
        let r = opt_cost(&seq, 3).unwrap();
        assert_eq!(r.min_cost, int(12));
        assert_eq!(replay_witness(&seq, 3, &r.witness).unwrap(), r.min_cost);
    }

    #[test]
    fn everything_fits() {
        let seq = RequestSequence::new(vec![
            f("a", 2, ratio(1, 3)),
            f("b", 1, int(2)),
            f("a", 2, ratio(1, 3)),
            f("b", 1, int(2)),
        ])
        .unwrap();
        assert_eq!(opt_cost(&seq, 3).unwrap().min_cost, ratio(7, 3));
    }

    #[test]
    fn limits_and_oversize() {
        let long = RequestSequence::paging((0..25).map(|i| format!("p{}", i % 3)));
        assert!(matches!(opt_cost(&long, 2), Err(Error::InstanceTooLarge(_))));
        let wide = RequestSequence::paging((0..13).map(|i| format!("p{i}")));
        assert!(matches!(opt_cost(&wide, 2), Err(Error::InstanceTooLarge(_))));
        let big = RequestSequence::new(vec![f("a", 3, int(1))]).unwrap();
        assert!(matches!(opt_cost(&big, 2), Err(Error::RequestTooLarge { .. })));
    }

    #[test]
    fn witness_prefers_lexicographic_ties() {
        // Both a and b are never requested again; evicting a is the
        // lexicographically smaller choice.
        let seq = RequestSequence::paging(["a", "b", "c"]);
        let r = opt_cost(&seq, 2).unwrap();
        assert_eq!(
            r.witness[2],
            OptMove::Miss {
                evicted: vec![FileId::new("a")]
            }
        );
    }

    #[test]
    fn replay_rejects_bad_witness() {
        let seq = RequestSequence::paging(["a", "b", "c"]);
        let bad = vec![
            OptMove::Miss { evicted: vec![] },
            OptMove::Miss { evicted: vec![] },
            OptMove::Miss { evicted: vec![] },
        ];
        assert!(replay_witness(&seq, 2, &bad).is_err());
    }
}
