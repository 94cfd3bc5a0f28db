//! Segmented sieve of Eratosthenes over bit-packed odd numbers, successor
//! search with bounded lookahead, and prime gap streams.
//!
//! Segments presieve multiples of 3 and 5 with a period-15 word pattern (the
//! odd-index image of a mod-30 wheel), then strike odd multiples of the
//! remaining base primes. Block decomposition never changes results, only
//! memory and parallel granularity.

use crate::error::{Error, Result};
use crate::exec;

/// Hard ceiling on range endpoints accepted by sieving entry points.
pub const RANGE_CEILING: u64 = 100_000_000_000;

/// Default elements per sieving block.
pub const DEFAULT_SEGMENT_LEN: u64 = 1 << 20;

/// Successor lookahead starts at `LOOKAHEAD_FACTOR * ln(n)` and doubles on
/// every miss; far beyond any known prime gap at reachable scale.
const LOOKAHEAD_FACTOR: f64 = 2000.0;
const MAX_EXTENSION_DOUBLINGS: u32 = 10;

pub(crate) fn isqrt(n: u64) -> u64 {
    n.isqrt()
}

/// Half-open sieving range `[lo, hi)` with a block length.
///
/// Results of every operation are independent of `segment_len` (merge
/// invariance); the field only tunes memory and parallel granularity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentSpec {
    lo: u64,
    hi: u64,
    segment_len: u64,
}

impl SegmentSpec {
    /// Builds a spec with the default segment length. `lo` below 2 is
    /// clamped to 2 (no primes exist there).
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        Self::with_segment_len(lo, hi, DEFAULT_SEGMENT_LEN)
    }

    pub fn with_segment_len(lo: u64, hi: u64, segment_len: u64) -> Result<Self> {
        let lo = lo.max(2);
        if lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "empty range: lo {lo} >= hi {hi}"
            )));
        }
        if hi > RANGE_CEILING + 1 {
            return Err(Error::RangeCeiling {
                requested: hi - 1,
                ceiling: RANGE_CEILING,
            });
        }
        if segment_len < 64 {
            return Err(Error::InvalidParameter(format!(
                "segment_len must be >= 64, got {segment_len}"
            )));
        }
        Ok(Self { lo, hi, segment_len })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn segment_len(&self) -> u64 {
        self.segment_len
    }

    pub(crate) fn blocks(&self) -> Vec<(u64, u64)> {
        exec::blocks(self.lo, self.hi, self.segment_len)
    }
}

/// Simple in-memory sieve: all primes `<= limit`, ascending.
pub(crate) fn base_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut primes = vec![2u64];
    if limit < 3 {
        return primes;
    }
    // index i <-> odd value 3 + 2i
    let n = ((limit - 1) / 2) as usize;
    let mut composite = vec![false; n];
    let mut i = 0usize;
    loop {
        let v = 3 + 2 * i as u64;
        if v * v > limit {
            break;
        }
        if !composite[i] {
            let mut idx = ((v * v - 3) / 2) as usize;
            while idx < n {
                composite[idx] = true;
                idx += v as usize;
            }
        }
        i += 1;
    }
    for (i, &c) in composite.iter().enumerate() {
        if !c {
            primes.push(3 + 2 * i as u64);
        }
    }
    primes
}

/// Composite-marking bitmap over the odd numbers of one block.
pub(crate) struct SegmentBitmap {
    start: u64,
    n_bits: usize,
    words: Vec<u64>,
    includes_two: bool,
}

/// Period-15 word pattern marking odd multiples of 3 and 5.
///
/// Bit `i` of the bitmap represents `start + 2i`; solving
/// `start + 2i = 0 (mod q)` gives one marked residue class of `i` per
/// wheel prime, and 64*15 bits cover a full period of the joint pattern.
fn presieve_template(start: u64) -> [u64; 15] {
    let i3 = (((3 - start % 3) % 3) * 2 % 3) as usize;
    let i5 = (((5 - start % 5) % 5) * 3 % 5) as usize;
    let mut template = [0u64; 15];
    for (w, word) in template.iter_mut().enumerate() {
        for j in 0..64 {
            let i = w * 64 + j;
            if i % 3 == i3 || i % 5 == i5 {
                *word |= 1 << j;
            }
        }
    }
    template
}

/// Sieves the block `[lo, hi)`. `base` must contain every prime up to
/// `isqrt(hi - 1)`; larger entries are ignored.
pub(crate) fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> SegmentBitmap {
    let lo = lo.max(2);
    let start = if lo % 2 == 0 { lo + 1 } else { lo };
    let n_bits = ((hi.saturating_sub(start) + 1) / 2) as usize;
    let n_words = n_bits.div_ceil(64);
    let mut words = vec![0u64; n_words];

    if n_bits > 0 {
        let template = presieve_template(start);
        for (w, word) in words.iter_mut().enumerate() {
            *word = template[w % 15];
        }
        // the wheel pattern marks 3 and 5 themselves; unmark them
        for q in [3u64, 5] {
            if q >= start && q < hi {
                let idx = ((q - start) / 2) as usize;
                words[idx / 64] &= !(1u64 << (idx % 64));
            }
        }
        for &p in base {
            if p < 7 {
                continue;
            }
            if p * p >= hi {
                break;
            }
            let mut m = p * p;
            if m < start {
                m = lo.div_ceil(p) * p;
                if m % 2 == 0 {
                    m += p;
                }
            }
            let mut idx = ((m - start) / 2) as usize;
            while idx < n_bits {
                words[idx / 64] |= 1u64 << (idx % 64);
                idx += p as usize;
            }
        }
    }

    SegmentBitmap {
        start,
        n_bits,
        words,
        includes_two: lo == 2 && hi > 2,
    }
}

impl SegmentBitmap {
    pub(crate) fn count(&self) -> u64 {
        let mut c = u64::from(self.includes_two);
        for (w, &word) in self.words.iter().enumerate() {
            let valid = (self.n_bits - w * 64).min(64);
            let mask = if valid == 64 { !0u64 } else { (1u64 << valid) - 1 };
            c += (!word & mask).count_ones() as u64;
        }
        c
    }

    pub(crate) fn for_each(&self, mut f: impl FnMut(u64)) {
        if self.includes_two {
            f(2);
        }
        for (w, &word) in self.words.iter().enumerate() {
            let valid = (self.n_bits - w * 64).min(64);
            let mask = if valid == 64 { !0u64 } else { (1u64 << valid) - 1 };
            let mut bits = !word & mask;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                f(self.start + 2 * (w * 64 + j) as u64);
                bits &= bits - 1;
            }
        }
    }

    pub(crate) fn collect(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.for_each(|p| out.push(p));
        out
    }

    fn first(&self) -> Option<u64> {
        if self.includes_two {
            return Some(2);
        }
        for (w, &word) in self.words.iter().enumerate() {
            let valid = (self.n_bits - w * 64).min(64);
            let mask = if valid == 64 { !0u64 } else { (1u64 << valid) - 1 };
            let bits = !word & mask;
            if bits != 0 {
                let j = bits.trailing_zeros() as usize;
                return Some(self.start + 2 * (w * 64 + j) as u64);
            }
        }
        None
    }
}

/// All primes in the range, collected. Intended for ranges that fit
/// comfortably in memory; use [`prime_stream`] to iterate lazily.
pub fn primes_in_range(spec: &SegmentSpec) -> Result<Vec<u64>> {
    Ok(prime_stream(spec)?.collect())
}

/// Lazy ascending iterator over the primes of a range, one segment at a time.
pub struct PrimeStream {
    blocks: std::vec::IntoIter<(u64, u64)>,
    base: Vec<u64>,
    current: std::vec::IntoIter<u64>,
}

pub fn prime_stream(spec: &SegmentSpec) -> Result<PrimeStream> {
    Ok(PrimeStream {
        blocks: spec.blocks().into_iter(),
        base: base_primes(isqrt(spec.hi - 1)),
        current: Vec::new().into_iter(),
    })
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if let Some(p) = self.current.next() {
                return Some(p);
            }
            let (blo, bhi) = self.blocks.next()?;
            self.current = sieve_segment(blo, bhi, &self.base).collect().into_iter();
        }
    }
}

/// Number of primes `<= x`.
pub fn prime_count(x: u64, threads: usize) -> Result<u64> {
    if x < 2 {
        return Ok(0);
    }
    if x > RANGE_CEILING {
        return Err(Error::RangeCeiling {
            requested: x,
            ceiling: RANGE_CEILING,
        });
    }
    prime_count_in(&SegmentSpec::new(2, x + 1)?, threads)
}

/// Number of primes in `[lo, hi)`, segment-parallel.
pub fn prime_count_in(spec: &SegmentSpec, threads: usize) -> Result<u64> {
    let base = base_primes(isqrt(spec.hi - 1));
    let counts = exec::map_blocks(&spec.blocks(), threads, |blo, bhi| {
        Ok(sieve_segment(blo, bhi, &base).count())
    })?;
    Ok(counts.into_iter().sum())
}

/// Least prime strictly greater than `n`.
///
/// Searches windows of `LOOKAHEAD_FACTOR * ln n` numbers, doubling on every
/// miss; the search may run past [`RANGE_CEILING`] because successors of
/// in-range elements are part of every gap contract.
pub fn next_prime_after(n: u64) -> Result<u64> {
    if n < 2 {
        return Ok(2);
    }
    let mut window = ((n as f64).ln() * LOOKAHEAD_FACTOR) as u64;
    window = window.max(64);
    let mut lo = n + 1;
    for _ in 0..=MAX_EXTENSION_DOUBLINGS {
        let hi = lo
            .checked_add(window)
            .ok_or(Error::ExtensionExhausted { from: n })?;
        let base = base_primes(isqrt(hi - 1));
        if let Some(p) = sieve_segment(lo, hi, &base).first() {
            return Ok(p);
        }
        lo = hi;
        window *= 2;
    }
    Err(Error::ExtensionExhausted { from: n })
}

/// A prime, its successor, and the gap between them.
///
/// `p_next` is the least prime greater than `p` and may exceed the bound of
/// the query that produced the record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeGapRecord {
    pub p: u64,
    pub p_next: u64,
    pub gap: u32,
}

impl PrimeGapRecord {
    fn new(p: u64, p_next: u64) -> Self {
        Self {
            p,
            p_next,
            gap: (p_next - p) as u32,
        }
    }
}

/// Calls `f` for every prime `p <= x`, with its successor gap, in ascending
/// order. The successor of the last prime is found past `x` by extension.
pub fn for_each_prime_gap<F: FnMut(&PrimeGapRecord)>(x: u64, f: F) -> Result<()> {
    for_each_prime_gap_with(x, DEFAULT_SEGMENT_LEN, f)
}

/// [`for_each_prime_gap`] with an explicit segment length; the record
/// sequence is the same for every valid segment length.
pub fn for_each_prime_gap_with<F: FnMut(&PrimeGapRecord)>(
    x: u64,
    segment_len: u64,
    mut f: F,
) -> Result<()> {
    if x < 2 {
        return Err(Error::InvalidParameter(format!(
            "gap stream needs x >= 2, got {x}"
        )));
    }
    let spec = SegmentSpec::with_segment_len(2, x + 1, segment_len)?;
    let base = base_primes(isqrt(x));
    let mut prev: Option<u64> = None;
    for (blo, bhi) in spec.blocks() {
        sieve_segment(blo, bhi, &base).for_each(|p| {
            if let Some(q) = prev {
                f(&PrimeGapRecord::new(q, p));
            }
            prev = Some(p);
        });
    }
    // x >= 2 guarantees at least one prime; its successor lies past x.
    let last = prev.expect("range [2, x] contains a prime");
    f(&PrimeGapRecord::new(last, next_prime_after(last)?));
    Ok(())
}

/// Collected variant of [`for_each_prime_gap`].
pub fn prime_gap_records(x: u64) -> Result<Vec<PrimeGapRecord>> {
    let mut out = Vec::new();
    for_each_prime_gap(x, |r| out.push(*r))?;
    Ok(out)
}
