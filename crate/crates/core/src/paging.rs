//! Uniform size, uniform cost caching: direct LRU/FIFO/FWF/marking
//! simulators, Belady's offline rule and k-phase decomposition.
//!
//! These are written independently of [`crate::landlord`] so the two can be
//! checked against each other.

use std::collections::{HashMap, HashSet, VecDeque};
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::file::{FileId, FutureIndex, RequestSequence};

/// A paging trace: every item implicitly has size 1 and cost 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PagingTrace {
    items: Vec<FileId>,
}

impl PagingTrace {
    pub fn new(items: Vec<FileId>) -> Self {
        PagingTrace { items }
    }

    pub fn from_strs<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<FileId>,
    {
        PagingTrace {
            items: items.into_iter().map(Into::into).collect(),
        }
    }

    /// Ids of `seq`, ignoring sizes and costs.
    pub fn from_sequence(seq: &RequestSequence) -> Self {
        PagingTrace { items: seq.ids() }
    }

    pub fn to_sequence(&self) -> RequestSequence {
        RequestSequence::paging(self.items.iter().cloned())
    }

    pub fn items(&self) -> &[FileId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn distinct_count(&self) -> usize {
        self.items.iter().collect::<HashSet<_>>().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PagingAlgorithm {
    Lru,
    Fifo,
    Fwf,
    Marking,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PagingRun {
    pub fault_positions: Vec<usize>,
}

impl PagingRun {
    pub fn fault_count(&self) -> usize {
        self.fault_positions.len()
    }
}

/// Simulates `alg` with cache size `k`. `seed` is required for (and only
/// used by) the marking algorithm.
pub fn simulate_paging(
    trace: &PagingTrace,
    k: usize,
    alg: PagingAlgorithm,
    seed: Option<u64>,
) -> Result<PagingRun> {
    if k == 0 {
        return Err(Error::InvalidCapacity);
    }
    let faults = match alg {
        PagingAlgorithm::Lru => lru(trace.items(), k),
        PagingAlgorithm::Fifo => fifo(trace.items(), k),
        PagingAlgorithm::Fwf => fwf(trace.items(), k).0,
        PagingAlgorithm::Marking => {
            let seed = seed.ok_or_else(|| {
                Error::InvalidParams("the marking algorithm requires a seed".into())
            })?;
            marking(trace.items(), k, seed)
        }
    };
    Ok(PagingRun {
        fault_positions: faults,
    })
}

fn lru(items: &[FileId], k: usize) -> Vec<usize> {
    let mut last_use: HashMap<&FileId, usize> = HashMap::with_capacity(k + 1);
    let mut faults = Vec::new();
    for (t, item) in items.iter().enumerate() {
        if last_use.contains_key(item) {
            last_use.insert(item, t);
            continue;
        }
        faults.push(t);
        if last_use.len() == k {
            let victim = *last_use
                .iter()
                .min_by_key(|(_, &used)| used)
                .map(|(id, _)| id)
                .expect("full cache is nonempty");
            last_use.remove(victim);
        }
        last_use.insert(item, t);
    }
    faults
}

fn fifo(items: &[FileId], k: usize) -> Vec<usize> {
    let mut queue: VecDeque<&FileId> = VecDeque::with_capacity(k);
    let mut resident: HashSet<&FileId> = HashSet::with_capacity(k);
    let mut faults = Vec::new();
    for (t, item) in items.iter().enumerate() {
        if resident.contains(item) {
            continue;
        }
        faults.push(t);
        if queue.len() == k {
            let oldest = queue.pop_front().expect("full queue");
            resident.remove(oldest);
        }
        queue.push_back(item);
        resident.insert(item);
    }
    faults
}

/// Returns (fault positions, flush positions).
fn fwf(items: &[FileId], k: usize) -> (Vec<usize>, Vec<usize>) {
    let mut resident: HashSet<&FileId> = HashSet::with_capacity(k);
    let mut faults = Vec::new();
    let mut flushes = Vec::new();
    for (t, item) in items.iter().enumerate() {
        if resident.contains(item) {
            continue;
        }
        faults.push(t);
        if resident.len() == k {
            resident.clear();
            flushes.push(t);
        }
        resident.insert(item);
    }
    (faults, flushes)
}

fn marking(items: &[FileId], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Slot order is deterministic so a seed fixes the eviction choices.
    let mut slots: Vec<(&FileId, bool)> = Vec::with_capacity(k);
    let mut faults = Vec::new();
    for (t, item) in items.iter().enumerate() {
        if let Some(slot) = slots.iter_mut().find(|(id, _)| *id == item) {
            slot.1 = true;
            continue;
        }
        faults.push(t);
        if slots.len() == k {
            if slots.iter().all(|&(_, marked)| marked) {
                slots.iter_mut().for_each(|s| s.1 = false);
            }
            let unmarked: Vec<usize> = (0..slots.len()).filter(|&i| !slots[i].1).collect();
            let victim = unmarked[rng.gen_range(0..unmarked.len())];
            slots.swap_remove(victim);
        }
        slots.push((item, true));
    }
    faults
}

/// Minimum number of faults with cache size `k` (farthest-in-future rule).
pub fn belady_opt(trace: &PagingTrace, k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidCapacity);
    }
    let seq = trace.to_sequence();
    let future = FutureIndex::new(&seq);
    let mut resident: Vec<&FileId> = Vec::with_capacity(k);
    let mut faults = 0;
    for (t, item) in trace.items().iter().enumerate() {
        if resident.contains(&item) {
            continue;
        }
        faults += 1;
        if resident.len() == k {
            let (victim, _) = resident
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| {
                    let na = future.next_after(a, t).unwrap_or(usize::MAX);
                    let nb = future.next_after(b, t).unwrap_or(usize::MAX);
                    // Farthest first; among never-again items prefer the smaller id.
                    na.cmp(&nb).then_with(|| b.cmp(a))
                })
                .expect("full cache is nonempty");
            resident.swap_remove(victim);
        }
        resident.push(item);
    }
    Ok(faults)
}

/// Splits the trace into k-phases: a new phase starts at each request that
/// makes flush-when-full (cache size `k`) empty its cache.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseDecomposition {
    pub phases: Vec<Range<usize>>,
}

impl PhaseDecomposition {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

pub fn decompose_phases(trace: &PagingTrace, k: usize) -> Result<PhaseDecomposition> {
    if k == 0 {
        return Err(Error::InvalidCapacity);
    }
    if trace.is_empty() {
        return Ok(PhaseDecomposition { phases: Vec::new() });
    }
    let (_, flushes) = fwf(trace.items(), k);
    let mut starts = vec![0];
    starts.extend(flushes);
    let phases = starts
        .iter()
        .zip(starts.iter().skip(1).chain(std::iter::once(&trace.len())))
        .map(|(&s, &e)| s..e)
        .collect();
    Ok(PhaseDecomposition { phases })
}
