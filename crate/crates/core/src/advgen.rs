//! Adversarial paging sequences on which flush-when-full is bad for more
//! than a `delta` fraction of the cache sizes `1..=n`.
//!
//! Construction: start from `k_0 = ceil((1-delta) n)` one-off requests. At
//! step `i`, keep `k_{i+1} - k_i` of the one-off requests (always the first),
//! turn every other one-off request into a fresh regular item, and double the
//! string. Levels follow `k_i = ceil(k_0 (1 + 1/(4c))^i)`; the final string
//! is the first one whose level exceeds `n`.
//!
//! A regular item created at step `i` then recurs with period `k_0 2^i`, and
//! every window of length `k_0 2^i` touches exactly `k_i` distinct items.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, ToPrimitive};

use crate::analysis::bounds;
use crate::error::{Error, Result};
use crate::file::FileId;
use crate::landlord::{self, LandlordPolicy};
use crate::paging::{self, PagingAlgorithm, PagingTrace};
use crate::rational::{self, Rational};

/// Longest sequence the generator will materialize.
pub const MAX_LENGTH: u64 = 1 << 24;

/// Periodicity class of an item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ItemLevel {
    /// Introduced at step `i`; recurs with period `k_0 * 2^i`.
    Regular(u32),
    /// Requested exactly once.
    Special,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvParams {
    pub epsilon: Rational,
    pub delta: Rational,
    pub n: u64,
    /// Lower-bound constant the sequence is built against.
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialSequence {
    pub items: Vec<FileId>,
    /// `k_0 < k_1 < ... < k_m`.
    pub k_levels: Vec<u64>,
    pub level_of_item: BTreeMap<FileId, ItemLevel>,
    /// Absent for sequences built from explicit levels.
    pub params: Option<AdvParams>,
}

impl AdversarialSequence {
    pub fn k0(&self) -> u64 {
        self.k_levels[0]
    }

    /// Number of doubling steps `m`.
    pub fn steps(&self) -> usize {
        self.k_levels.len() - 1
    }

    /// Window length `k_0 * 2^i` of level `i`.
    pub fn period(&self, i: usize) -> u64 {
        self.k0() << i
    }

    pub fn trace(&self) -> PagingTrace {
        PagingTrace::new(self.items.clone())
    }

    /// Periodicity of `id`; `None` for one-off requests.
    pub fn periodicity(&self, id: &FileId) -> Option<u64> {
        match self.level_of_item.get(id)? {
            ItemLevel::Regular(i) => Some(self.period(*i as usize)),
            ItemLevel::Special => None,
        }
    }

    /// Levels `i` with `k_i <= n` (all but the last when built from explicit levels).
    pub fn measured_levels(&self) -> Vec<usize> {
        match &self.params {
            Some(p) => (0..self.k_levels.len())
                .filter(|&i| self.k_levels[i] <= p.n)
                .collect(),
            None => (0..self.steps()).collect(),
        }
    }
}

fn check_params(epsilon: &Rational, delta: &Rational) -> Result<f64> {
    let half = rational::ratio(1, 2);
    if !epsilon.is_positive() || *epsilon >= half {
        return Err(Error::InvalidParams(
            "epsilon must lie in (0, 1/2) for a positive lower-bound constant".into(),
        ));
    }
    if !delta.is_positive() || *delta >= half {
        return Err(Error::InvalidParams("delta must lie in (0, 1/2)".into()));
    }
    bounds::lower_bound_c(rational::to_f64(epsilon), rational::to_f64(delta))
}

fn initial_level(delta: &Rational, n: u64) -> u64 {
    let k0 = (Rational::one() - delta) * Rational::from_integer(n.into());
    rational::ceil_u64(&k0).expect("k0 fits in u64")
}

/// `k_0, k_1, ...` up to and including the first level above `n`.
pub fn level_sequence(k0: u64, c: f64, n: u64) -> Vec<u64> {
    let growth = 1.0 + 1.0 / (4.0 * c);
    let mut levels = vec![k0];
    let mut i = 1;
    while *levels.last().unwrap() <= n {
        let k = (k0 as f64 * growth.powi(i)).ceil() as u64;
        levels.push(k);
        i += 1;
    }
    levels
}

/// Why a set of levels cannot be realized, if it cannot.
fn level_defect(levels: &[u64]) -> Option<String> {
    if levels.is_empty() || levels[0] == 0 {
        return Some("k_0 must be positive".into());
    }
    let mut available = levels[0];
    for (i, w) in levels.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Some(format!("levels stall at step {i}: k_{i} = {}, k_{} = {}", w[0], i + 1, w[1]));
        }
        let keep = w[1] - w[0];
        if keep > available {
            return Some(format!(
                "step {i} needs {keep} one-off requests but only {available} exist"
            ));
        }
        available = 2 * keep;
    }
    let m = levels.len() - 1;
    if m >= 64 || levels[0].checked_shl(m as u32).map_or(true, |len| len > MAX_LENGTH) {
        return Some(format!("sequence length k_0 * 2^{m} exceeds {MAX_LENGTH}"));
    }
    None
}

fn feasible(epsilon_c: f64, delta: &Rational, n: u64) -> std::result::Result<Vec<u64>, String> {
    let one_minus_delta = rational::to_f64(&(Rational::one() - delta));
    if !(n as f64 > 4.0 * epsilon_c / one_minus_delta) {
        return Err(format!("n must exceed 4c/(1-delta) = {}", 4.0 * epsilon_c / one_minus_delta));
    }
    let levels = level_sequence(initial_level(delta, n), epsilon_c, n);
    match level_defect(&levels) {
        Some(reason) => Err(reason),
        None => Ok(levels),
    }
}

const SEARCH_LIMIT: u64 = 1 << 20;

/// Smallest `n` for which the construction goes through.
pub fn minimal_n(epsilon: &Rational, delta: &Rational) -> Result<u64> {
    smallest_feasible_from(epsilon, delta, 1)
}

fn smallest_feasible_from(epsilon: &Rational, delta: &Rational, from: u64) -> Result<u64> {
    let c = check_params(epsilon, delta)?;
    (from..SEARCH_LIMIT)
        .find(|&n| feasible(c, delta, n).is_ok())
        .ok_or_else(|| Error::InvalidParams(format!("no feasible n below {SEARCH_LIMIT}")))
}

/// Builds the sequence for `(epsilon, delta, n)`.
pub fn build_sequence(epsilon: &Rational, delta: &Rational, n: u64) -> Result<AdversarialSequence> {
    let c = check_params(epsilon, delta)?;
    let levels = match feasible(c, delta, n) {
        Ok(levels) => levels,
        Err(_) => {
            let minimal = smallest_feasible_from(epsilon, delta, n + 1)?;
            return Err(Error::NTooSmall { n, minimal });
        }
    };
    let mut s = construct(&levels);
    s.params = Some(AdvParams {
        epsilon: epsilon.clone(),
        delta: delta.clone(),
        n,
        c,
    });
    Ok(s)
}

/// Builds the sequence for explicit levels `k_0 < ... < k_m`, bypassing the
/// level formula.
pub fn build_from_levels(levels: &[u64]) -> Result<AdversarialSequence> {
    if let Some(reason) = level_defect(levels) {
        return Err(Error::InvalidParams(reason));
    }
    Ok(construct(levels))
}

#[derive(Clone, Copy)]
enum Slot {
    OneOff,
    Regular(u32, u32),
}

fn construct(levels: &[u64]) -> AdversarialSequence {
    let mut s = vec![Slot::OneOff; levels[0] as usize];
    for (step, w) in levels.windows(2).enumerate() {
        let mut keep = w[1] - w[0];
        let mut fresh = 0u32;
        for slot in s.iter_mut() {
            if let Slot::OneOff = slot {
                if keep > 0 {
                    keep -= 1;
                } else {
                    *slot = Slot::Regular(step as u32, fresh);
                    fresh += 1;
                }
            }
        }
        s.extend_from_within(..);
    }

    let mut level_of_item = BTreeMap::new();
    let mut next_special = 0u64;
    let items = s
        .iter()
        .map(|slot| match *slot {
            Slot::OneOff => {
                let id = FileId::new(format!("x{next_special}"));
                next_special += 1;
                level_of_item.insert(id.clone(), ItemLevel::Special);
                id
            }
            Slot::Regular(step, j) => {
                let id = FileId::new(format!("r{step}.{j}"));
                level_of_item.entry(id.clone()).or_insert(ItemLevel::Regular(step));
                id
            }
        })
        .collect();

    AdversarialSequence {
        items,
        k_levels: levels.to_vec(),
        level_of_item,
        params: None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Length { expected: u64, actual: u64 },
    DistinctItems { expected: u64, actual: u64 },
    Periodicity { id: FileId, period: u64, detail: String },
    RepeatedSpecial { id: FileId, count: usize },
    UnknownItem { id: FileId },
    Window { level: usize, start: usize, distinct: u64, expected: u64 },
    PhaseLength { level: usize, phase: usize, length: usize, expected: u64 },
    PhaseStart { level: usize, phase: usize, id: FileId },
    LevelRatio { level: usize, ratio: f64, required: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Cap on sliding windows checked per level; `None` checks all.
    pub max_windows_per_level: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_windows_per_level: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub violations: Vec<Violation>,
    pub windows_checked: usize,
}

impl StructureReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_structure(s: &AdversarialSequence) -> StructureReport {
    verify_structure_with(s, VerifyOptions::default())
}

pub fn verify_structure_with(s: &AdversarialSequence, opts: VerifyOptions) -> StructureReport {
    let mut violations = Vec::new();
    let len = s.items.len();
    let m = s.steps();
    let expected_len = s.period(m);
    if len as u64 != expected_len {
        violations.push(Violation::Length {
            expected: expected_len,
            actual: len as u64,
        });
    }

    let mut positions: HashMap<&FileId, Vec<usize>> = HashMap::new();
    for (p, id) in s.items.iter().enumerate() {
        positions.entry(id).or_default().push(p);
    }
    let expected_distinct = s.k_levels[m];
    if positions.len() as u64 != expected_distinct {
        violations.push(Violation::DistinctItems {
            expected: expected_distinct,
            actual: positions.len() as u64,
        });
    }

    let mut ids: Vec<_> = positions.keys().copied().collect();
    ids.sort();
    for id in ids {
        let ps = &positions[id];
        match s.level_of_item.get(id) {
            None => violations.push(Violation::UnknownItem { id: id.clone() }),
            Some(ItemLevel::Special) => {
                if ps.len() != 1 {
                    violations.push(Violation::RepeatedSpecial {
                        id: id.clone(),
                        count: ps.len(),
                    });
                }
            }
            Some(ItemLevel::Regular(i)) => {
                let period = s.period(*i as usize);
                if let Some(detail) = periodicity_defect(ps, period as usize, len) {
                    violations.push(Violation::Periodicity {
                        id: id.clone(),
                        period,
                        detail,
                    });
                }
            }
        }
    }

    let mut windows_checked = 0;
    for (level, &k) in s.k_levels.iter().enumerate() {
        let width = s.period(level) as usize;
        if width > len {
            break;
        }
        let limit = opts.max_windows_per_level.unwrap_or(usize::MAX);
        windows_checked += check_windows(&s.items, width, k, limit, level, &mut violations);

        let phases = paging::decompose_phases(&s.trace(), k as usize)
            .expect("levels are positive");
        for (pi, range) in phases.phases.iter().enumerate() {
            if range.len() as u64 != width as u64 {
                violations.push(Violation::PhaseLength {
                    level,
                    phase: pi,
                    length: range.len(),
                    expected: width as u64,
                });
            }
            let first = &s.items[range.start];
            if s.periodicity(first).is_some_and(|p| p <= width as u64) {
                violations.push(Violation::PhaseStart {
                    level,
                    phase: pi,
                    id: first.clone(),
                });
            }
        }
    }

    if let Some(p) = &s.params {
        for i in s.measured_levels() {
            if i + 1 >= s.k_levels.len() {
                continue;
            }
            let ratio = s.k_levels[i] as f64 / (s.k_levels[i + 1] - s.k_levels[i]) as f64;
            if ratio < 2.0 * p.c {
                violations.push(Violation::LevelRatio {
                    level: i,
                    ratio,
                    required: 2.0 * p.c,
                });
            }
        }
    }

    StructureReport {
        violations,
        windows_checked,
    }
}

/// `positions` must be exactly `j, j + period, j + 2 period, ...` through
/// the end of the sequence, with `j < period`.
fn periodicity_defect(positions: &[usize], period: usize, len: usize) -> Option<String> {
    let first = positions[0];
    if first >= period {
        return Some(format!("first request at {first}, not within the first period"));
    }
    let expected: Vec<usize> = (first..len).step_by(period).collect();
    if positions != expected.as_slice() {
        return Some(format!("requested at {positions:?}, expected {expected:?}"));
    }
    None
}

fn check_windows(
    items: &[FileId],
    width: usize,
    expected: u64,
    limit: usize,
    level: usize,
    violations: &mut Vec<Violation>,
) -> usize {
    let mut counts: HashMap<&FileId, usize> = HashMap::new();
    for id in &items[..width] {
        *counts.entry(id).or_default() += 1;
    }
    let mut checked = 0;
    let mut start = 0;
    loop {
        if checked >= limit {
            break;
        }
        checked += 1;
        if counts.len() as u64 != expected {
            violations.push(Violation::Window {
                level,
                start,
                distinct: counts.len() as u64,
                expected,
            });
        }
        if start + width >= items.len() {
            break;
        }
        let out = &items[start];
        let c = counts.get_mut(out).expect("outgoing item is counted");
        *c -= 1;
        if *c == 0 {
            counts.remove(out);
        }
        *counts.entry(&items[start + width]).or_default() += 1;
        start += 1;
    }
    checked
}

/// Measured rates at one construction level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRates {
    pub level: usize,
    pub k: u64,
    pub period: u64,
    /// FWF faults over the whole sequence divided by its length.
    pub fwf_rate: Rational,
    pub fwf_expected: Rational,
    /// LRU faults after the first window, divided by the remaining length.
    pub lru_steady_rate: Rational,
    pub lru_expected: Rational,
    /// After the first window LRU faults exactly on items whose periodicity
    /// exceeds the window.
    pub lru_faults_match_long_periods: bool,
    pub fwf_ratio: f64,
}

/// Whole-sequence fault counts at one cache size in `k_0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeRates {
    pub k: u64,
    pub fwf_faults: u64,
    pub lru_faults: u64,
    pub pessimal_faults: u64,
    /// FWF faults exceed `epsilon * |s|`.
    pub fwf_above_epsilon: bool,
    /// FWF faults exceed `c` times LRU's.
    pub ratio_above_c: bool,
    /// Bad for FWF with LRU standing in for the optimum.
    pub fwf_bad: bool,
    pub pessimal_bad: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultRateReport {
    pub length: u64,
    pub levels: Vec<LevelRates>,
    pub sizes: Vec<SizeRates>,
}

impl FaultRateReport {
    pub fn fwf_bad_count(&self) -> usize {
        self.sizes.iter().filter(|s| s.fwf_bad).count()
    }

    pub fn pessimal_bad_count(&self) -> usize {
        self.sizes.iter().filter(|s| s.pessimal_bad).count()
    }
}

pub fn measure_fault_rates(s: &AdversarialSequence) -> Result<FaultRateReport> {
    let trace = s.trace();
    let len = s.items.len();
    let len_q = Rational::from_integer(len.into());

    let mut levels = Vec::new();
    for i in s.measured_levels() {
        if i + 1 >= s.k_levels.len() {
            continue;
        }
        let k = s.k_levels[i];
        let period = s.period(i);
        let fwf = paging::simulate_paging(&trace, k as usize, PagingAlgorithm::Fwf, None)?;
        let lru = paging::simulate_paging(&trace, k as usize, PagingAlgorithm::Lru, None)?;
        let steady: Vec<usize> = lru
            .fault_positions
            .iter()
            .copied()
            .filter(|&p| p as u64 >= period)
            .collect();
        let long_period: Vec<usize> = (period as usize..len)
            .filter(|&p| s.periodicity(&s.items[p]).map_or(true, |q| q > period))
            .collect();
        let fwf_rate = Rational::new(fwf.fault_count().into(), len.into());
        let lru_steady_rate = Rational::new(steady.len().into(), (len as u64 - period).into());
        let fwf_ratio = rational::to_f64(&fwf_rate) / rational::to_f64(&lru_steady_rate);
        levels.push(LevelRates {
            level: i,
            k,
            period,
            fwf_rate,
            fwf_expected: Rational::new(k.into(), period.into()),
            lru_steady_rate,
            lru_expected: Rational::new((s.k_levels[i + 1] - k).into(), period.into()),
            lru_faults_match_long_periods: steady == long_period,
            fwf_ratio,
        });
    }

    let mut sizes = Vec::new();
    if let Some(p) = &s.params {
        let c = rational::from_f64(p.c).expect("finite constant");
        let floor = &p.epsilon * &len_q;
        let seq = trace.to_sequence();
        for k in s.k0()..=p.n {
            let fwf = paging::simulate_paging(&trace, k as usize, PagingAlgorithm::Fwf, None)?
                .fault_count() as u64;
            let lru = paging::simulate_paging(&trace, k as usize, PagingAlgorithm::Lru, None)?
                .fault_count() as u64;
            let pessimal = landlord::run_trace(&seq, k, &LandlordPolicy::pessimal())?
                .fault_count() as u64;
            let lru_q = Rational::from_integer(lru.into());
            let threshold = (&c * &lru_q).max(floor.clone());
            let as_q = |x: u64| Rational::from_integer(x.into());
            sizes.push(SizeRates {
                k,
                fwf_faults: fwf,
                lru_faults: lru,
                pessimal_faults: pessimal,
                fwf_above_epsilon: as_q(fwf) > floor,
                ratio_above_c: as_q(fwf) > &c * &lru_q,
                fwf_bad: as_q(fwf) > threshold,
                pessimal_bad: as_q(pessimal) > threshold,
            });
        }
    }

    Ok(FaultRateReport {
        length: len as u64,
        levels,
        sizes,
    })
}

/// Number of sizes `k_0..=n`, to compare with `delta * n`.
pub fn range_size(s: &AdversarialSequence) -> Option<u64> {
    s.params.as_ref().map(|p| 1 + p.n - s.k0())
}

/// `delta * n` as a float, for reporting.
pub fn delta_n(p: &AdvParams) -> f64 {
    (&p.delta * Rational::from_integer(p.n.into()))
        .to_f64()
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn explicit_four_five_example() {
        let s = build_from_levels(&[4, 5]).unwrap();
        let names: Vec<&str> = s.items.iter().map(|i| i.as_str()).collect();
        assert_eq!(
            names,
            ["x0", "r0.0", "r0.1", "r0.2", "x1", "r0.0", "r0.1", "r0.2"]
        );
        let report = verify_structure(&s);
        assert!(report.is_clean(), "{:?}", report.violations);
        // single window of length 8 covers 5 distinct items
        assert_eq!(s.level_of_item.len(), 5);
    }

    #[test]
    fn smallest_case_for_eighth_quarter() {
        let (eps, delta) = (ratio(1, 8), ratio(1, 4));
        assert_eq!(minimal_n(&eps, &delta).unwrap(), 6);
        let s = build_sequence(&eps, &delta, 6).unwrap();
        assert_eq!(s.k_levels, vec![5, 7]);
        assert_eq!(s.items.len(), 10);
    }

    #[test]
    fn too_small_n_reports_minimum() {
        let err = build_sequence(&ratio(1, 8), &ratio(1, 4), 5).unwrap_err();
        assert_eq!(err, Error::NTooSmall { n: 5, minimal: 6 });
    }

    #[test]
    fn parameter_domain() {
        assert!(build_sequence(&ratio(1, 2), &ratio(1, 4), 50).is_err());
        assert!(build_sequence(&ratio(1, 8), &ratio(1, 2), 50).is_err());
        assert!(build_sequence(&ratio(0, 1), &ratio(1, 4), 50).is_err());
        assert!(build_from_levels(&[4, 4]).is_err());
        assert!(build_from_levels(&[2, 5]).is_err());
    }

    #[test]
    fn swapped_items_flag_periodicity() {
        let mut s = build_from_levels(&[4, 5, 7]).unwrap();
        assert!(verify_structure(&s).is_clean());
        // r0.0 sits at 1, 5, 9, 13; move one copy across a period boundary.
        s.items.swap(5, 6);
        let report = verify_structure(&s);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Periodicity { .. })));
    }

    #[test]
    fn window_sampling_bound_is_respected() {
        let s = build_from_levels(&[4, 5, 7]).unwrap();
        let r = verify_structure_with(&s, VerifyOptions { max_windows_per_level: Some(2) });
        assert!(r.is_clean());
        // widths 4 and 8 hit the cap; width 16 has a single window
        assert_eq!(r.windows_checked, 2 + 2 + 1);
    }
}
