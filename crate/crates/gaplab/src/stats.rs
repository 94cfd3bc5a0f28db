//! Gap statistics sweeps: reciprocal sums of elements with small successor
//! gaps, interval histograms against the Poisson law, gap CDFs, and dyadic
//! gap reports over sifted sets.
//!
//! Sweeps walk an element stream (primes or survivors) in ascending order,
//! qualify each element by comparing its successor gap against the threshold
//! scale `y(m)`, and accumulate compensated sums. Non-adaptive sweeps are
//! block-parallel with a fixed merge order; the adaptive family feeds its
//! own running sum back into the threshold and is sequential by contract.

use crate::error::{Error, Result};
use crate::exec;
use crate::kahan::KahanSum;
use crate::sieve::{self, SegmentSpec};
use crate::survivors::{self, SurvivorConfig, SurvivorMode};
use crate::thresholds::{AdaptiveState, SwitchPoint, ThresholdFamily, ThresholdSpec};

/// The element stream a sweep runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementSet {
    Primes,
    Survivors(SurvivorMode),
}

/// Running totals snapshotted at a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    /// Elements `<= x` are included in this snapshot.
    pub x: u64,
    /// Reciprocal sum of qualifying elements so far.
    pub sum: f64,
    /// Number of qualifying elements so far.
    pub count: u64,
    /// Threshold depth at the snapshot, where the family has one.
    pub k: Option<u32>,
}

/// Result of a reciprocal-sum sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocalSumReport {
    pub x: u64,
    /// Sum of `1/m` over qualifying elements `m <= x`.
    pub sum: f64,
    /// Number of qualifying elements.
    pub count: u64,
    pub checkpoints: Vec<Checkpoint>,
    /// Depth switches taken by the adaptive family; empty otherwise.
    pub switch_points: Vec<SwitchPoint>,
}

/// Calls `f(m, successor)` for each element of `set` in `[blo, bhi)`,
/// ascending. The successor of the window's last element is found past
/// `bhi` by extension, so every call is self-contained per block.
fn block_gaps(
    set: ElementSet,
    blo: u64,
    bhi: u64,
    base: &[u64],
    mut f: impl FnMut(u64, u64),
) -> Result<()> {
    let mut prev: Option<u64> = None;
    match set {
        ElementSet::Primes => {
            sieve::sieve_segment(blo, bhi, base).for_each(|p| {
                if let Some(q) = prev {
                    f(q, p);
                }
                prev = Some(p);
            });
            if let Some(last) = prev {
                f(last, sieve::next_prime_after(last)?);
            }
        }
        ElementSet::Survivors(mode) => {
            survivors::scan_window(mode, blo, bhi, |m| {
                if let Some(q) = prev {
                    f(q, m);
                }
                prev = Some(m);
            })?;
            if let Some(last) = prev {
                f(last, survivors::next_survivor_after(mode, last)?);
            }
        }
    }
    Ok(())
}

fn validate_element_set(set: ElementSet, x: u64) -> Result<()> {
    if let ElementSet::Survivors(mode) = set {
        SurvivorConfig::new(mode, x)?;
    }
    Ok(())
}

fn validate_checkpoints(checkpoints: &[u64], x: u64) -> Result<()> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "checkpoints must be strictly ascending".into(),
        ));
    }
    if checkpoints.first().is_some_and(|&c| c < 2) {
        return Err(Error::InvalidParameter("checkpoints must be >= 2".into()));
    }
    if checkpoints.last().is_some_and(|&c| c > x) {
        return Err(Error::InvalidParameter(format!(
            "checkpoints must not exceed x = {x}"
        )));
    }
    Ok(())
}

#[derive(Default)]
struct SweepTotals {
    sum: KahanSum,
    qualifying: u64,
    /// Elements at or above the domain floor, qualifying or not.
    total: u64,
}

/// Block-parallel sweep for the non-adaptive families.
fn sweep_fixed_family(
    x: u64,
    threshold: &ThresholdSpec,
    set: ElementSet,
    checkpoints: &[u64],
    threads: usize,
    segment_len: u64,
) -> Result<(SweepTotals, Vec<Checkpoint>)> {
    let floor = threshold.domain_floor();
    let block_list = exec::blocks_with_cuts(2, x + 1, segment_len, checkpoints);
    let base = match set {
        ElementSet::Primes => sieve::base_primes(sieve::isqrt(x)),
        ElementSet::Survivors(_) => Vec::new(),
    };

    let parts = exec::map_blocks(&block_list, threads, |blo, bhi| {
        let mut sum = KahanSum::new();
        let mut qualifying = 0u64;
        let mut total = 0u64;
        let mut failed: Option<Error> = None;
        block_gaps(set, blo, bhi, &base, |m, next| {
            if failed.is_some() || m < floor {
                return;
            }
            total += 1;
            match threshold.y(m as f64) {
                Ok(y) => {
                    if (next - m) as f64 <= y {
                        sum.add(1.0 / m as f64);
                        qualifying += 1;
                    }
                }
                Err(e) => failed = Some(e),
            }
        })?;
        if let Some(e) = failed {
            return Err(e);
        }
        Ok((sum, qualifying, total))
    })?;

    let k = match threshold.family() {
        ThresholdFamily::Divergent { k } | ThresholdFamily::Convergent { k, .. } => Some(k),
        _ => None,
    };
    let mut totals = SweepTotals::default();
    let mut snapshots = Vec::with_capacity(checkpoints.len());
    let mut ci = 0usize;
    for (&(_, bhi), (sum, qualifying, total)) in block_list.iter().zip(parts) {
        totals.sum.merge(sum);
        totals.qualifying += qualifying;
        totals.total += total;
        if ci < checkpoints.len() && checkpoints[ci] + 1 == bhi {
            snapshots.push(Checkpoint {
                x: checkpoints[ci],
                sum: totals.sum.value(),
                count: totals.qualifying,
                k,
            });
            ci += 1;
        }
    }
    // checkpoints equal to x have no interior block edge
    for &c in &checkpoints[ci..] {
        snapshots.push(Checkpoint {
            x: c,
            sum: totals.sum.value(),
            count: totals.qualifying,
            k,
        });
    }
    Ok((totals, snapshots))
}

/// Sequential sweep for the adaptive family.
fn sweep_adaptive(
    x: u64,
    k0: u32,
    set: ElementSet,
    checkpoints: &[u64],
) -> Result<(AdaptiveState, u64, Vec<Checkpoint>)> {
    let mut state = AdaptiveState::new(k0)?;
    let floor = crate::thresholds::domain_floor(k0)?;
    let mut total = 0u64;
    let mut snapshots = Vec::with_capacity(checkpoints.len());
    let mut ci = 0usize;
    let mut failed: Option<Error> = None;

    {
        let mut process = |m: u64, next: u64| {
            if failed.is_some() {
                return;
            }
            while ci < checkpoints.len() && checkpoints[ci] < m {
                snapshots.push(Checkpoint {
                    x: checkpoints[ci],
                    sum: state.running_sum(),
                    count: state.qualifying_count(),
                    k: Some(state.current_k()),
                });
                ci += 1;
            }
            if m < floor {
                return;
            }
            total += 1;
            match state.y(m as f64) {
                Ok(y) => state.observe(m, (next - m) as f64 <= y),
                Err(e) => failed = Some(e),
            }
        };
        match set {
            ElementSet::Primes => sieve::for_each_prime_gap(x, |r| process(r.p, r.p_next))?,
            ElementSet::Survivors(mode) => {
                let config = SurvivorConfig::new(mode, x)?;
                survivors::for_each_survivor_gap(&config, |r| process(r.m, r.m_next))?;
            }
        }
    }
    if let Some(e) = failed {
        return Err(e);
    }
    for &c in &checkpoints[ci..] {
        snapshots.push(Checkpoint {
            x: c,
            sum: state.running_sum(),
            count: state.qualifying_count(),
            k: Some(state.current_k()),
        });
    }
    Ok((state, total, snapshots))
}

/// Sum of `1/m` over elements `m <= x` whose successor gap is at most the
/// threshold scale `y(m)`, with snapshots at the given checkpoints.
///
/// Elements below the threshold's domain floor are skipped. Checkpoints must
/// be strictly ascending within `[2, x]`. Results are identical for every
/// thread count; the adaptive family requires `threads == 1`.
pub fn reciprocal_sum(
    x: u64,
    threshold: &ThresholdSpec,
    set: ElementSet,
    checkpoints: &[u64],
    threads: usize,
) -> Result<ReciprocalSumReport> {
    reciprocal_sum_with_segment(x, threshold, set, checkpoints, threads, sieve::DEFAULT_SEGMENT_LEN)
}

/// [`reciprocal_sum`] with an explicit block length; the report is the same
/// for every valid block length up to summation-order accuracy.
pub fn reciprocal_sum_with_segment(
    x: u64,
    threshold: &ThresholdSpec,
    set: ElementSet,
    checkpoints: &[u64],
    threads: usize,
    segment_len: u64,
) -> Result<ReciprocalSumReport> {
    if x < 2 {
        return Err(Error::InvalidParameter(format!(
            "reciprocal sum needs x >= 2, got {x}"
        )));
    }
    if threads == 0 {
        return Err(Error::InvalidParameter("threads must be >= 1".into()));
    }
    validate_element_set(set, x)?;
    validate_checkpoints(checkpoints, x)?;

    if let ThresholdFamily::Adaptive { k0 } = threshold.family() {
        if threads != 1 {
            return Err(Error::AdaptiveNeedsSequential);
        }
        let (state, _, snapshots) = sweep_adaptive(x, k0, set, checkpoints)?;
        return Ok(ReciprocalSumReport {
            x,
            sum: state.running_sum(),
            count: state.qualifying_count(),
            checkpoints: snapshots,
            switch_points: state.switch_points().to_vec(),
        });
    }
    let (totals, snapshots) =
        sweep_fixed_family(x, threshold, set, checkpoints, threads, segment_len)?;
    Ok(ReciprocalSumReport {
        x,
        sum: totals.sum.value(),
        count: totals.qualifying,
        checkpoints: snapshots,
        switch_points: Vec::new(),
    })
}

/// Empirical share of elements with a qualifying gap, next to the heuristic
/// exponential law `1 - exp(-lambda(x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapCdfReport {
    pub x: u64,
    pub threshold: ThresholdSpec,
    /// Elements at or above the domain floor whose gap qualifies.
    pub qualifying: u64,
    /// All elements at or above the domain floor.
    pub total: u64,
    /// `qualifying / total`.
    pub empirical: f64,
    /// `1 - exp(-lambda(x))`: the heuristic prediction, stated without any
    /// claim that the threshold family satisfies its side conditions.
    pub predicted: f64,
    pub lambda_at_x: f64,
}

/// Evaluates the empirical gap CDF at the threshold scale against the
/// exponential law. Requires `x` at or above the domain floor; the adaptive
/// family requires `threads == 1` and reports lambda at its final depth.
pub fn gap_cdf(
    x: u64,
    threshold: &ThresholdSpec,
    set: ElementSet,
    threads: usize,
) -> Result<GapCdfReport> {
    if threads == 0 {
        return Err(Error::InvalidParameter("threads must be >= 1".into()));
    }
    if x < threshold.domain_floor() {
        return Err(Error::Domain(format!(
            "gap cdf needs x >= the domain floor {}, got {x}",
            threshold.domain_floor()
        )));
    }
    validate_element_set(set, x)?;

    let (qualifying, total, lambda_at_x) = match threshold.family() {
        ThresholdFamily::Adaptive { k0 } => {
            if threads != 1 {
                return Err(Error::AdaptiveNeedsSequential);
            }
            let (state, total, _) = sweep_adaptive(x, k0, set, &[])?;
            (state.qualifying_count(), total, state.lambda(x as f64)?)
        }
        _ => {
            let (totals, _) = sweep_fixed_family(
                x,
                threshold,
                set,
                &[],
                threads,
                sieve::DEFAULT_SEGMENT_LEN,
            )?;
            (totals.qualifying, totals.total, threshold.lambda(x as f64)?)
        }
    };
    Ok(GapCdfReport {
        x,
        threshold: *threshold,
        qualifying,
        total,
        empirical: qualifying as f64 / total as f64,
        predicted: 1.0 - (-lambda_at_x).exp(),
        lambda_at_x,
    })
}

/// Histogram of prime counts in sliding windows `(n, n + h]`, `n = 1..=x`.
///
/// `counts[k]` is the number of windows holding exactly `k` primes for
/// `k <= kmax`; fuller windows land in `overflow`, and `overflow_weight`
/// keeps their total prime count so the first moment stays exact.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalHistogram {
    pub x: u64,
    /// Window length as a multiple of `ln x`.
    pub lambda0: f64,
    /// Window length.
    pub h: f64,
    pub counts: Vec<u64>,
    pub overflow: u64,
    pub overflow_weight: u64,
}

impl IntervalHistogram {
    /// Total number of windows; always `x`.
    pub fn windows(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }

    /// `sum of k * counts[k]` plus the overflow weight: the number of
    /// (window, prime) incidences.
    pub fn first_moment(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| k as u64 * c)
            .sum::<u64>()
            + self.overflow_weight
    }

    /// Poisson law `exp(-lambda0) lambda0^k / k!` the histogram is compared
    /// against.
    pub fn poisson_prediction(&self, k: usize) -> f64 {
        let mut v = (-self.lambda0).exp();
        for j in 1..=k {
            v *= self.lambda0 / j as f64;
        }
        v
    }
}

/// [`gallagher_histogram_h`] with the window length `h = lambda0 * ln x`.
pub fn gallagher_histogram(
    x: u64,
    lambda0: f64,
    kmax: usize,
    threads: usize,
) -> Result<IntervalHistogram> {
    if !(lambda0 > 0.0) || !lambda0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "window scale needs lambda0 > 0, got {lambda0}"
        )));
    }
    gallagher_histogram_h(x, lambda0 * (x as f64).ln(), kmax, threads)
}

/// Counts primes in every window `(n, n + h]` for integer `n <= x` and
/// histograms the counts. The comparison `q <= n + h` is taken over the
/// reals, so windows reach past `x` at the boundary.
pub fn gallagher_histogram_h(
    x: u64,
    h: f64,
    kmax: usize,
    threads: usize,
) -> Result<IntervalHistogram> {
    if x < 10 {
        return Err(Error::InvalidParameter(format!(
            "interval statistics need x >= 10, got {x}"
        )));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "window length must be positive, got {h}"
        )));
    }
    let block_list = exec::blocks(1, x + 1, sieve::DEFAULT_SEGMENT_LEN);
    let parts = exec::map_blocks(&block_list, threads, |blo, bhi| {
        // primes reachable from this block: in (blo, (bhi - 1) + h]
        let p_hi = ((bhi - 1) as f64 + h).floor() as u64 + 1;
        let primes = if blo + 1 < p_hi {
            sieve::primes_in_range(&SegmentSpec::new(blo + 1, p_hi)?)?
        } else {
            Vec::new()
        };
        let mut counts = vec![0u64; kmax + 1];
        let mut overflow = 0u64;
        let mut overflow_weight = 0u64;
        let (mut i, mut j) = (0usize, 0usize);
        for n in blo..bhi {
            while i < primes.len() && primes[i] <= n {
                i += 1;
            }
            if j < i {
                j = i;
            }
            while j < primes.len() && primes[j] as f64 <= n as f64 + h {
                j += 1;
            }
            let k = (j - i) as u64;
            if k as usize <= kmax {
                counts[k as usize] += 1;
            } else {
                overflow += 1;
                overflow_weight += k;
            }
        }
        Ok((counts, overflow, overflow_weight))
    })?;

    let mut counts = vec![0u64; kmax + 1];
    let mut overflow = 0u64;
    let mut overflow_weight = 0u64;
    for (c, o, w) in parts {
        for (dst, src) in counts.iter_mut().zip(c) {
            *dst += src;
        }
        overflow += o;
        overflow_weight += w;
    }
    Ok(IntervalHistogram {
        x,
        lambda0: h / (x as f64).ln(),
        h,
        counts,
        overflow,
        overflow_weight,
    })
}

/// The (window, prime) incidence count computed prime-by-prime: for each
/// prime `q`, the number of integers `n in [1, x]` with `n < q <= n + h`.
/// An independent route to [`IntervalHistogram::first_moment`]; the two
/// agree exactly because they count the same incidences with the same
/// comparison.
pub fn window_prime_moment(x: u64, h: f64, threads: usize) -> Result<u64> {
    if x < 2 {
        return Err(Error::InvalidParameter(format!(
            "moment needs x >= 2, got {x}"
        )));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "window length must be positive, got {h}"
        )));
    }
    let q_hi = (x as f64 + h).floor() as u64 + 1;
    let block_list = exec::blocks(2, q_hi, sieve::DEFAULT_SEGMENT_LEN);
    let base = sieve::base_primes(sieve::isqrt(q_hi - 1));
    let parts = exec::map_blocks(&block_list, threads, |blo, bhi| {
        let mut incidences = 0u64;
        sieve::sieve_segment(blo, bhi, &base).for_each(|q| {
            let n_max = (q - 1).min(x);
            let qf = q as f64;
            // least n >= 1 with q <= n + h, matching the histogram comparison
            let mut n_min = ((qf - h).ceil()).max(1.0) as u64;
            while qf > n_min as f64 + h {
                n_min += 1;
            }
            while n_min > 1 && qf <= (n_min - 1) as f64 + h {
                n_min -= 1;
            }
            if n_min <= n_max {
                incidences += n_max - n_min + 1;
            }
        });
        Ok(incidences)
    })?;
    Ok(parts.into_iter().sum())
}

/// Doubling blocks `(m, 2m]` anchored at `x0`, the last truncated at `x`.
pub fn dyadic_partition(x0: u64, x: u64) -> Result<Vec<(u64, u64)>> {
    if x0 < 2 || x0 >= x {
        return Err(Error::InvalidParameter(format!(
            "dyadic partition needs 2 <= x0 < x, got ({x0}, {x})"
        )));
    }
    let mut out = Vec::new();
    let mut m = x0;
    while m < x {
        let hi = (2 * m).min(x);
        out.push((m, hi));
        m = hi;
    }
    Ok(out)
}

/// One dyadic block `(lo, hi]` of a survivor gap report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivorGapReportRow {
    /// Exclusive left endpoint; lambda and y are frozen here.
    pub lo: u64,
    /// Inclusive right endpoint, truncated at the report bound.
    pub hi: u64,
    /// Survivors in the block.
    pub population: u64,
    /// Gaps at most `y(lo)`, the scale frozen at the left endpoint.
    pub qualifying_frozen: u64,
    /// Gaps at most `y(m)`, evaluated per element.
    pub qualifying_exact: u64,
    /// `(1 - exp(-lambda(lo))) * population`: the exponential-law guess for
    /// the frozen count.
    pub comparator: f64,
}

/// Dyadic gap report over a survivor set, with aggregate totals.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivorGapReport {
    pub x: u64,
    pub rows: Vec<SurvivorGapReportRow>,
    pub population: u64,
    pub qualifying_frozen: u64,
    pub qualifying_exact: u64,
    /// Sum of the row comparators.
    pub comparator: f64,
}

/// Splits `(max(2, domain floor), x]` dyadically and tabulates survivor gap
/// counts per block, frozen-scale and exact-scale, against the exponential
/// law. The adaptive family has no per-block scale and is refused.
pub fn survivor_gap_report(
    mode: SurvivorMode,
    threshold: &ThresholdSpec,
    x: u64,
    threads: usize,
) -> Result<SurvivorGapReport> {
    if matches!(threshold.family(), ThresholdFamily::Adaptive { .. }) {
        return Err(Error::Domain(
            "dyadic gap reports need a fixed threshold family, not the adaptive one".into(),
        ));
    }
    let x0 = threshold.domain_floor().max(2);
    if x <= x0 {
        return Err(Error::InvalidParameter(format!(
            "gap report needs x > {x0} for this threshold, got {x}"
        )));
    }
    validate_element_set(ElementSet::Survivors(mode), x)?;

    let dyadic = dyadic_partition(x0, x)?;
    let windows: Vec<(u64, u64)> = dyadic.iter().map(|&(lo, hi)| (lo + 1, hi + 1)).collect();
    let parts = exec::map_blocks(&windows, threads, |blo, bhi| {
        let lo = blo - 1;
        let y_frozen = threshold.y(lo as f64)?;
        let mut population = 0u64;
        let mut frozen = 0u64;
        let mut exact = 0u64;
        let mut failed: Option<Error> = None;
        block_gaps(ElementSet::Survivors(mode), blo, bhi, &[], |m, next| {
            if failed.is_some() {
                return;
            }
            population += 1;
            let gap = (next - m) as f64;
            if gap <= y_frozen {
                frozen += 1;
            }
            match threshold.y(m as f64) {
                Ok(y) => {
                    if gap <= y {
                        exact += 1;
                    }
                }
                Err(e) => failed = Some(e),
            }
        })?;
        if let Some(e) = failed {
            return Err(e);
        }
        Ok((population, frozen, exact))
    })?;

    let mut rows = Vec::with_capacity(dyadic.len());
    let mut report = SurvivorGapReport {
        x,
        rows: Vec::new(),
        population: 0,
        qualifying_frozen: 0,
        qualifying_exact: 0,
        comparator: 0.0,
    };
    let mut comparator_sum = KahanSum::new();
    for (&(lo, hi), (population, frozen, exact)) in dyadic.iter().zip(parts) {
        let lambda = threshold.lambda(lo as f64)?;
        let comparator = (1.0 - (-lambda).exp()) * population as f64;
        rows.push(SurvivorGapReportRow {
            lo,
            hi,
            population,
            qualifying_frozen: frozen,
            qualifying_exact: exact,
            comparator,
        });
        report.population += population;
        report.qualifying_frozen += frozen;
        report.qualifying_exact += exact;
        comparator_sum.add(comparator);
    }
    report.rows = rows;
    report.comparator = comparator_sum.value();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thresholds::ThresholdFamily;

    const HALF: SurvivorMode = SurvivorMode::VariableDelta { d_inv: 2 };

    fn fixed(lambda0: f64) -> ThresholdSpec {
        ThresholdSpec::new(ThresholdFamily::Fixed { lambda0 }).unwrap()
    }

    fn divergent(k: u32) -> ThresholdSpec {
        ThresholdSpec::new(ThresholdFamily::Divergent { k }).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn tiny_prime_sum_is_exact() {
        // all four primes <= 10 qualify at lambda = 10
        let r = reciprocal_sum(10, &fixed(10.0), ElementSet::Primes, &[], 1).unwrap();
        assert_eq!(r.count, 4);
        assert!((r.sum - 247.0 / 210.0).abs() < 1e-15);
        assert!(r.checkpoints.is_empty());
        assert!(r.switch_points.is_empty());
    }

    #[test]
    fn prime_sum_at_unit_lambda() {
        let r = reciprocal_sum(100, &fixed(1.0), ElementSet::Primes, &[], 1).unwrap();
        assert_eq!(r.count, 9); // 11, 17, 29, 41, 59, 67, 71, 79, 97
        assert!(rel(r.sum, 0.2775321617615558) < 1e-12);
    }

    #[test]
    fn survivor_sum_small_case() {
        let r = reciprocal_sum(30, &fixed(10.0), ElementSet::Survivors(HALF), &[], 1).unwrap();
        assert_eq!(r.count, 13);
        assert!(rel(r.sum, 1.934549882983143) < 1e-12);
    }

    #[test]
    fn checkpoints_snapshot_prefix_sums() {
        let r = reciprocal_sum(100, &fixed(1.0), ElementSet::Primes, &[10, 50, 100], 1).unwrap();
        assert_eq!(r.checkpoints.len(), 3);
        assert_eq!(r.checkpoints[0].x, 10);
        assert_eq!(r.checkpoints[0].count, 0);
        assert_eq!(r.checkpoints[0].sum, 0.0);
        assert_eq!(r.checkpoints[1].x, 50);
        assert_eq!(r.checkpoints[1].count, 4);
        let want = 1.0 / 11.0 + 1.0 / 17.0 + 1.0 / 29.0 + 1.0 / 41.0;
        assert!(rel(r.checkpoints[1].sum, want) < 1e-12);
        assert_eq!(r.checkpoints[2].count, r.count);
        assert_eq!(r.checkpoints[2].sum, r.sum);
        assert_eq!(r.checkpoints[0].k, None);
    }

    #[test]
    fn checkpoint_k_column_for_depth_families() {
        let r = reciprocal_sum(100, &divergent(2), ElementSet::Primes, &[50], 1).unwrap();
        assert_eq!(r.checkpoints[0].k, Some(2));
    }

    #[test]
    fn checkpoint_validation() {
        let t = fixed(1.0);
        assert!(reciprocal_sum(100, &t, ElementSet::Primes, &[50, 50], 1).is_err());
        assert!(reciprocal_sum(100, &t, ElementSet::Primes, &[60, 50], 1).is_err());
        assert!(reciprocal_sum(100, &t, ElementSet::Primes, &[101], 1).is_err());
        assert!(reciprocal_sum(100, &t, ElementSet::Primes, &[1], 1).is_err());
        assert!(reciprocal_sum(100, &t, ElementSet::Primes, &[], 0).is_err());
    }

    #[test]
    fn sweeps_are_thread_and_segment_invariant() {
        let t = divergent(2);
        let a = reciprocal_sum(50_000, &t, ElementSet::Primes, &[10_000], 1).unwrap();
        let b = reciprocal_sum(50_000, &t, ElementSet::Primes, &[10_000], 4).unwrap();
        assert_eq!(a, b); // same blocks, same merge order: bitwise equal
        let c = reciprocal_sum_with_segment(
            50_000,
            &t,
            ElementSet::Primes,
            &[10_000],
            1,
            1 << 9,
        )
        .unwrap();
        assert_eq!(a.count, c.count);
        assert!(rel(a.sum, c.sum) < 1e-12);
        assert!(rel(a.checkpoints[0].sum, c.checkpoints[0].sum) < 1e-12);
        assert_eq!(a.checkpoints[0].count, c.checkpoints[0].count);
    }

    #[test]
    fn adaptive_matches_divergent_before_any_switch() {
        let spec = ThresholdSpec::new(ThresholdFamily::Adaptive { k0: 2 }).unwrap();
        let a = reciprocal_sum(10_000, &spec, ElementSet::Primes, &[], 1).unwrap();
        let d = reciprocal_sum(10_000, &divergent(2), ElementSet::Primes, &[], 1).unwrap();
        assert_eq!(a.count, d.count);
        assert!(rel(a.sum, d.sum) < 1e-12);
        assert!(rel(a.sum, 0.925987121) < 1e-9); // frozen divergent(2) value
        assert!(a.switch_points.is_empty());
    }

    #[test]
    fn adaptive_requires_one_thread() {
        let spec = ThresholdSpec::new(ThresholdFamily::Adaptive { k0: 2 }).unwrap();
        match reciprocal_sum(100, &spec, ElementSet::Primes, &[], 2) {
            Err(Error::AdaptiveNeedsSequential) => {}
            other => panic!("expected sequential-only error, got {other:?}"),
        }
    }

    #[test]
    fn adaptive_checkpoints_carry_current_depth() {
        let spec = ThresholdSpec::new(ThresholdFamily::Adaptive { k0: 2 }).unwrap();
        let r = reciprocal_sum(1_000, &spec, ElementSet::Primes, &[100, 1_000], 1).unwrap();
        assert_eq!(r.checkpoints.len(), 2);
        assert_eq!(r.checkpoints[0].k, Some(2));
        assert_eq!(r.checkpoints[1].x, 1_000);
        assert_eq!(r.checkpoints[1].sum, r.sum);
    }

    #[test]
    fn cdf_small_case() {
        let r = gap_cdf(100, &fixed(1.0), ElementSet::Primes, 1).unwrap();
        assert_eq!(r.qualifying, 9);
        assert_eq!(r.total, 25);
        assert!(rel(r.empirical, 0.36) < 1e-15);
        assert!(rel(r.predicted, 1.0 - (-1.0f64).exp()) < 1e-15);
        assert_eq!(r.lambda_at_x, 1.0);
    }

    #[test]
    fn cdf_respects_domain_floor() {
        // divergent(3) floor is 16: prime 13 is excluded from the total
        let r = gap_cdf(100, &divergent(3), ElementSet::Primes, 1).unwrap();
        assert_eq!(r.total, 25 - 6);
        assert!(gap_cdf(10, &divergent(3), ElementSet::Primes, 1).is_err());
    }

    #[test]
    fn histogram_small_case() {
        let hist = gallagher_histogram(10, 1.0, 16, 1).unwrap();
        assert_eq!(hist.counts[0], 2); // n = 7, 8
        assert_eq!(hist.counts[1], 7);
        assert_eq!(hist.counts[2], 1); // n = 1 sees 2 and 3
        assert_eq!(hist.windows(), 10);
        assert_eq!(hist.overflow, 0);
        assert_eq!(hist.first_moment(), 9);
        assert_eq!(window_prime_moment(10, hist.h, 1).unwrap(), 9);
    }

    #[test]
    fn histogram_overflow_keeps_the_partition_and_moment() {
        let hist = gallagher_histogram_h(10, 10.0, 2, 1).unwrap();
        assert_eq!(hist.windows(), 10);
        assert!(hist.overflow > 0);
        assert_eq!(
            hist.first_moment(),
            window_prime_moment(10, 10.0, 1).unwrap()
        );
    }

    #[test]
    fn histogram_is_thread_invariant() {
        let a = gallagher_histogram(20_000, 1.0, 16, 1).unwrap();
        let b = gallagher_histogram(20_000, 1.0, 16, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.windows(), 20_000);
        assert_eq!(a.first_moment(), window_prime_moment(20_000, a.h, 1).unwrap());
    }

    #[test]
    fn histogram_validation() {
        assert!(gallagher_histogram(9, 1.0, 16, 1).is_err());
        assert!(gallagher_histogram(100, 0.0, 16, 1).is_err());
        assert!(gallagher_histogram_h(100, f64::NAN, 16, 1).is_err());
    }

    #[test]
    fn dyadic_partition_examples() {
        assert_eq!(dyadic_partition(2, 16).unwrap(), vec![(2, 4), (4, 8), (8, 16)]);
        assert_eq!(
            dyadic_partition(2, 20).unwrap(),
            vec![(2, 4), (4, 8), (8, 16), (16, 20)]
        );
        assert_eq!(dyadic_partition(5, 9).unwrap(), vec![(5, 9)]);
        assert!(dyadic_partition(1, 10).is_err());
        assert!(dyadic_partition(10, 10).is_err());
    }

    #[test]
    fn gap_report_small_case() {
        let report = survivor_gap_report(HALF, &fixed(1.0), 16, 1).unwrap();
        let rows = &report.rows;
        assert_eq!(rows.len(), 3);
        assert_eq!((rows[0].lo, rows[0].hi), (2, 4));
        assert_eq!((rows[2].lo, rows[2].hi), (8, 16));
        // survivors in (2,16]: 3,4 | 5,7 | 9,11,13
        assert_eq!([rows[0].population, rows[1].population, rows[2].population], [2, 2, 3]);
        assert_eq!(
            [
                rows[0].qualifying_exact,
                rows[1].qualifying_exact,
                rows[2].qualifying_exact
            ],
            [2, 0, 2]
        );
        assert_eq!(
            [
                rows[0].qualifying_frozen,
                rows[1].qualifying_frozen,
                rows[2].qualifying_frozen
            ],
            [0, 0, 2]
        );
        assert_eq!(report.population, 7);
        assert_eq!(report.qualifying_exact, 4);
        assert_eq!(report.qualifying_frozen, 2);
        let want = (1.0 - (-1.0f64).exp()) * 7.0;
        assert!(rel(report.comparator, want) < 1e-12);
    }

    #[test]
    fn gap_report_population_matches_enumeration() {
        let report = survivor_gap_report(HALF, &divergent(2), 10_000, 1).unwrap();
        let config = SurvivorConfig::new(HALF, 10_000).unwrap();
        let beyond_anchor = survivors::survivors_up_to(&config)
            .unwrap()
            .into_iter()
            .filter(|&m| m > 3)
            .count() as u64;
        assert_eq!(report.population, beyond_anchor);
        let par = survivor_gap_report(HALF, &divergent(2), 10_000, 4).unwrap();
        assert_eq!(report, par);
    }

    #[test]
    fn gap_report_refuses_adaptive() {
        let spec = ThresholdSpec::new(ThresholdFamily::Adaptive { k0: 2 }).unwrap();
        assert!(survivor_gap_report(HALF, &spec, 100, 1).is_err());
    }
}
