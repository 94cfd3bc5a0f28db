//! Singular series of offset tuples, truncated Euler products, and
//! first-moment sums over pair and triple correlations.
//!
//! The series of a tuple `H = {h_1 < ... < h_r}` is the product over primes
//! of `(1 - nu(p)/p) / (1 - 1/p)^r`, where `nu(p)` counts distinct residues
//! of `H` mod p. Products are truncated at a prime `P` drawn from a fixed
//! ladder, chosen so the bound `2 r^2 / (P - 1)` on the relative truncation
//! error meets the caller's target; past `max(span, 2r)` every factor is
//! `1 + O(r^2/p^2)`, which is where that bound comes from.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::exec;
use crate::kahan::KahanSum;
use crate::sieve::{self, SegmentSpec};
use crate::spf;

/// Truncation primes the series evaluator is allowed to stop at.
pub const TRUNCATION_LADDER: [u64; 4] = [10_000, 100_000, 1_000_000, 10_000_000];

/// Largest admitted relative-error target; beyond it the bound is meaningless.
pub const MAX_REL_ERR_TARGET: f64 = 0.1;

/// Truncation prime shared by the cached constants and the pairwise and
/// triple product formulas, so the two evaluation routes agree exactly.
const SHARED_TRUNCATION: u64 = 1_000_000;

/// A finite set of distinct nonnegative offsets, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tuple {
    offsets: Vec<u64>,
}

impl Tuple {
    pub fn new(mut offsets: Vec<u64>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::InvalidParameter("tuple must be non-empty".into()));
        }
        offsets.sort_unstable();
        if offsets.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "tuple offsets must be distinct, got {offsets:?}"
            )));
        }
        Ok(Self { offsets })
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest pairwise difference.
    pub fn span(&self) -> u64 {
        self.offsets[self.offsets.len() - 1] - self.offsets[0]
    }

    /// `nu(p)`: number of distinct residues of the offsets mod `p`.
    ///
    /// For `p > span` all pairwise differences are nonzero mod `p`, so the
    /// residues are distinct and `nu(p) = r` without any reduction.
    pub fn residue_count(&self, p: u64) -> u64 {
        if p > self.span() {
            return self.offsets.len() as u64;
        }
        let mut residues: Vec<u64> = self.offsets.iter().map(|&h| h % p).collect();
        residues.sort_unstable();
        residues.dedup();
        residues.len() as u64
    }

    /// Whether `nu(p) < p` for every prime; only primes `p <= r` can fail.
    pub fn is_admissible(&self) -> bool {
        let r = self.offsets.len() as u64;
        sieve::base_primes(r)
            .iter()
            .all(|&p| self.residue_count(p) < p)
    }
}

/// A truncated singular series value with its error certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularSeries {
    /// Truncated product; exactly 0 for inadmissible tuples.
    pub value: f64,
    /// Prime the product stopped at; 0 for inadmissible tuples.
    pub truncation_prime: u64,
    /// Bound on the relative truncation error; 0 for inadmissible tuples.
    pub tail_bound: f64,
    pub admissible: bool,
}

/// Evaluates the singular series of `tuple` to relative truncation error at
/// most `rel_err_target`, which must lie in `(0, MAX_REL_ERR_TARGET]`.
///
/// The truncation prime is the smallest ladder entry `P` with
/// `P >= span`, `P >= 2r`, and `2 r^2 / (P - 1) <= rel_err_target`; if even
/// the last ladder entry fails, the target is unreachable. Inadmissible
/// tuples short-circuit to an exact 0.
pub fn singular_series(tuple: &Tuple, rel_err_target: f64) -> Result<SingularSeries> {
    if !(rel_err_target > 0.0 && rel_err_target <= MAX_REL_ERR_TARGET) {
        return Err(Error::InvalidParameter(format!(
            "relative error target must be in (0, {MAX_REL_ERR_TARGET}], got {rel_err_target}"
        )));
    }
    if !tuple.is_admissible() {
        return Ok(SingularSeries {
            value: 0.0,
            truncation_prime: 0,
            tail_bound: 0.0,
            admissible: false,
        });
    }
    let r = tuple.len() as u64;
    let tail = |p: u64| 2.0 * (r * r) as f64 / (p - 1) as f64;
    let p_max = *TRUNCATION_LADDER.last().unwrap();
    let chosen = TRUNCATION_LADDER
        .iter()
        .copied()
        .find(|&p| p >= tuple.span() && p >= 2 * r && tail(p) <= rel_err_target)
        .ok_or(Error::TargetUnreachable {
            target: rel_err_target,
            p_max,
        })?;
    Ok(series_truncated_at(tuple, chosen))
}

/// The truncated product at a fixed `P`, summed in log space.
fn series_truncated_at(tuple: &Tuple, p_limit: u64) -> SingularSeries {
    let r = tuple.len() as u64;
    let mut log_sum = KahanSum::new();
    let spec = SegmentSpec::new(2, p_limit + 1).expect("ladder primes are in range");
    for p in sieve::prime_stream(&spec).expect("ladder primes are in range") {
        let nu = tuple.residue_count(p);
        let pf = p as f64;
        log_sum.add((-(nu as f64) / pf).ln_1p() - r as f64 * (-1.0 / pf).ln_1p());
    }
    SingularSeries {
        value: log_sum.value().exp(),
        truncation_prime: p_limit,
        tail_bound: 2.0 * (r * r) as f64 / (p_limit - 1) as f64,
        admissible: true,
    }
}

/// The pair constant: singular series of `{0, 2}` at the shared truncation
/// prime. Computed once.
pub fn twin_constant() -> f64 {
    static TWIN: OnceLock<f64> = OnceLock::new();
    *TWIN.get_or_init(|| {
        let tuple = Tuple::new(vec![0, 2]).expect("constant tuple");
        series_truncated_at(&tuple, SHARED_TRUNCATION).value
    })
}

/// Singular series of `{0, d}` through its closed form: 0 for odd `d`, and
/// the pair constant times `prod (p-1)/(p-2)` over odd primes dividing `d`
/// otherwise. Agrees with [`singular_series`] at the shared truncation prime
/// because the same factors are regrouped.
pub fn pair_value(d: u64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParameter("pair distance must be >= 1".into()));
    }
    if d % 2 == 1 {
        return Ok(0.0);
    }
    let mut m = d >> d.trailing_zeros();
    let mut product = 1.0;
    while m > 1 {
        let p = spf::spf(m)?;
        product *= (p - 1) as f64 / (p - 2) as f64;
        while m % p == 0 {
            m /= p;
        }
    }
    Ok(twin_constant() * product)
}

/// `sum of pair_value(d) for d = 1..=h`, block-parallel with a fixed merge
/// order. First moment of the pair correlation; tends to `h`.
pub fn pair_sum(h: u64, threads: usize) -> Result<f64> {
    if h == 0 {
        return Err(Error::InvalidParameter("pair sum needs h >= 1".into()));
    }
    twin_constant(); // initialize outside the parallel region
    let parts = exec::map_blocks(
        &exec::blocks(1, h + 1, sieve::DEFAULT_SEGMENT_LEN),
        threads,
        |blo, bhi| {
            let mut sum = KahanSum::new();
            let mut d = blo + (blo % 2);
            while d < bhi {
                sum.add(pair_value(d)?);
                d += 2;
            }
            Ok(sum)
        },
    )?;
    let mut total = KahanSum::new();
    for part in parts {
        total.merge(part);
    }
    Ok(total.value())
}

/// Product over `5 <= p <= P` of `(1 - 3/p)(1 - 1/p)^-3`: the triple-series
/// tail shared by every pair of distances. Computed once.
pub fn triple_tail_constant() -> f64 {
    static TAIL: OnceLock<f64> = OnceLock::new();
    *TAIL.get_or_init(|| {
        let mut log_sum = KahanSum::new();
        let spec = SegmentSpec::new(5, SHARED_TRUNCATION + 1).expect("fixed range");
        for p in sieve::prime_stream(&spec).expect("fixed range") {
            let pf = p as f64;
            log_sum.add((-3.0 / pf).ln_1p() - 3.0 * (-1.0 / pf).ln_1p());
        }
        log_sum.value().exp()
    })
}

/// Singular series of `{0, d1, d2}` for distinct positive distances, through
/// its closed form: explicit factors at 2 and 3, the shared tail, and a
/// correction `(p - nu(p))/(p - 3)` at each prime `5 <= p <= P` dividing
/// `d1 * d2 * (d1 - d2)`. Agrees with [`singular_series`] at the shared
/// truncation prime.
pub fn triple_term(d1: u64, d2: u64) -> Result<f64> {
    if d1 == 0 || d2 == 0 || d1 == d2 {
        return Err(Error::InvalidParameter(format!(
            "triple term needs distinct positive distances, got ({d1}, {d2})"
        )));
    }
    // factor at 2: nu = 1 needs both distances even, else nu = 2 kills it
    if d1 % 2 == 1 || d2 % 2 == 1 {
        return Ok(0.0);
    }
    let f2 = 4.0; // (1 - 1/2)(1 - 1/2)^-3

    let nu3 = distinct_residues(d1, d2, 3);
    let f3 = match nu3 {
        1 => 9.0 / 4.0,  // (1 - 1/3)(1 - 1/3)^-3
        2 => 9.0 / 8.0,  // (1 - 2/3)(1 - 1/3)^-3
        _ => return Ok(0.0),
    };

    let mut corrections = Vec::new();
    for n in [d1, d2, d1.abs_diff(d2)] {
        let mut m = n >> n.trailing_zeros();
        while m % 3 == 0 {
            m /= 3;
        }
        while m > 1 {
            let p = spf::spf(m)?;
            if p <= SHARED_TRUNCATION {
                corrections.push(p);
            }
            while m % p == 0 {
                m /= p;
            }
        }
    }
    corrections.sort_unstable();
    corrections.dedup();

    let mut product = f2 * f3 * triple_tail_constant();
    for p in corrections {
        let nu = distinct_residues(d1, d2, p);
        product *= (p - nu) as f64 / (p - 3) as f64;
    }
    Ok(product)
}

/// Distinct residues of `{0, d1, d2}` mod `p`.
fn distinct_residues(d1: u64, d2: u64, p: u64) -> u64 {
    let (a, b) = (d1 % p, d2 % p);
    if a == 0 && b == 0 {
        1
    } else if a == 0 || b == 0 || a == b {
        2
    } else {
        3
    }
}

/// Sum of [`triple_term`] over ordered pairs of distinct distances
/// `d1, d2 <= h`, block-parallel over `d1` with a fixed merge order.
/// Second moment of the triple correlation; tends to `h^2`.
pub fn triple_sum(h: u64, threads: usize) -> Result<f64> {
    if h < 3 {
        return Err(Error::InvalidParameter(format!(
            "triple sum needs h >= 3, got {h}"
        )));
    }
    triple_tail_constant();
    let parts = exec::map_blocks(&exec::blocks(1, h + 1, 1 << 12), threads, |blo, bhi| {
        let mut sum = KahanSum::new();
        let mut d1 = blo + (blo % 2);
        while d1 < bhi {
            let mut d2 = 2;
            while d2 <= h {
                if d2 != d1 {
                    sum.add(triple_term(d1, d2)?);
                }
                d2 += 2;
            }
            d1 += 2;
        }
        Ok(sum)
    })?;
    let mut total = KahanSum::new();
    for part in parts {
        total.merge(part);
    }
    Ok(total.value())
}

/// [`triple_sum`] evaluated over unordered pairs and doubled; agrees with
/// the ordered route to summation-order accuracy.
pub fn triple_sum_unordered(h: u64, threads: usize) -> Result<f64> {
    if h < 3 {
        return Err(Error::InvalidParameter(format!(
            "triple sum needs h >= 3, got {h}"
        )));
    }
    triple_tail_constant();
    let parts = exec::map_blocks(&exec::blocks(1, h + 1, 1 << 12), threads, |blo, bhi| {
        let mut sum = KahanSum::new();
        let mut d1 = blo + (blo % 2);
        while d1 < bhi {
            let mut d2 = d1 + 2;
            while d2 <= h {
                sum.add(triple_term(d1, d2)?);
                d2 += 2;
            }
            d1 += 2;
        }
        Ok(sum)
    })?;
    let mut total = KahanSum::new();
    for part in parts {
        total.merge(part);
    }
    Ok(2.0 * total.value())
}

/// Number of `n <= x` such that `n + o` is prime for every offset of the
/// tuple. Membership is intrinsic: shifted entries may exceed `x`.
pub fn tuple_count(x: u64, tuple: &Tuple, threads: usize) -> Result<u64> {
    if x < 1 {
        return Err(Error::InvalidParameter("tuple count needs x >= 1".into()));
    }
    let span = tuple.span();
    let offsets = tuple.offsets();
    let counts = exec::map_blocks(
        &exec::blocks(1, x + 1, sieve::DEFAULT_SEGMENT_LEN),
        threads,
        |blo, bhi| {
            // primality flags for [blo + min_offset, bhi - 1 + max_offset]
            let flag_lo = blo + offsets[0];
            let flag_hi = bhi + offsets[0] + span;
            let mut flags = vec![false; (flag_hi - flag_lo) as usize];
            if flag_hi > 2 {
                let spec = SegmentSpec::new(flag_lo.max(2), flag_hi)?;
                for p in sieve::prime_stream(&spec)? {
                    flags[(p - flag_lo) as usize] = true;
                }
            }
            let mut c = 0u64;
            for n in blo..bhi {
                if offsets.iter().all(|&o| flags[(n + o - flag_lo) as usize]) {
                    c += 1;
                }
            }
            Ok(c)
        },
    )?;
    Ok(counts.into_iter().sum())
}

/// A tuple count next to its first-order prediction
/// `series * x / (ln x)^r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TupleComparison {
    pub x: u64,
    pub count: u64,
    pub predicted: f64,
    /// `count / predicted`; not finite when the prediction is 0.
    pub ratio: f64,
    pub series: SingularSeries,
}

/// Counts the tuple up to `x` and compares with the singular-series
/// prediction at the given truncation target.
pub fn tuple_compare(
    x: u64,
    tuple: &Tuple,
    rel_err_target: f64,
    threads: usize,
) -> Result<TupleComparison> {
    if x < 2 {
        return Err(Error::InvalidParameter("tuple compare needs x >= 2".into()));
    }
    let series = singular_series(tuple, rel_err_target)?;
    let count = tuple_count(x, tuple, threads)?;
    let r = tuple.len() as i32;
    let predicted = series.value * x as f64 / (x as f64).ln().powi(r);
    Ok(TupleComparison {
        x,
        count,
        predicted,
        ratio: count as f64 / predicted,
        series,
    })
}
