//! Smallest-prime-factor tables over half-open ranges.

use crate::error::{Error, Result};
use crate::sieve::{self, RANGE_CEILING};

/// Smallest prime factor for every integer in `[lo, hi)`.
///
/// Primes map to themselves. Stored as `u32` with 0 as the prime sentinel:
/// a composite below the range ceiling has its least factor below
/// `sqrt(10^11) < 2^32`.
pub struct SpfTable {
    lo: u64,
    entries: Vec<u32>,
}

impl SpfTable {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.lo + self.entries.len() as u64
    }

    /// Smallest prime factor of `m`, which must lie in `[lo, hi)`.
    pub fn spf(&self, m: u64) -> u64 {
        let e = self.entries[(m - self.lo) as usize];
        if e == 0 {
            m
        } else {
            u64::from(e)
        }
    }
}

/// Builds the table for `[lo, hi)` by striking odd multiples of each base
/// prime from `p*p` upward; an entry is written only by the first prime that
/// reaches it, so ascending base order yields least factors.
pub fn spf_range(lo: u64, hi: u64) -> Result<SpfTable> {
    if lo < 2 || lo >= hi {
        return Err(Error::InvalidParameter(format!(
            "spf range needs 2 <= lo < hi, got [{lo}, {hi})"
        )));
    }
    if hi > RANGE_CEILING + 1 {
        return Err(Error::RangeCeiling {
            requested: hi - 1,
            ceiling: RANGE_CEILING,
        });
    }
    let len = (hi - lo) as usize;
    let mut entries = vec![0u32; len];

    let mut m = lo + (lo % 2);
    while m < hi {
        entries[(m - lo) as usize] = 2;
        m += 2;
    }

    for &p in &sieve::base_primes(sieve::isqrt(hi - 1)) {
        if p < 3 {
            continue;
        }
        if p * p >= hi {
            break;
        }
        let mut m = p * p;
        if m < lo {
            m = lo.div_ceil(p) * p;
            if m % 2 == 0 {
                m += p;
            }
        }
        while m < hi {
            let e = &mut entries[(m - lo) as usize];
            if *e == 0 {
                *e = p as u32;
            }
            m += 2 * p;
        }
    }

    Ok(SpfTable { lo, entries })
}

/// Smallest prime factor of a single integer, by trial division.
pub fn spf(m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::Domain(format!("spf needs m >= 2, got {m}")));
    }
    if m % 2 == 0 {
        return Ok(2);
    }
    let mut d = 3u64;
    while d * d <= m {
        if m % d == 0 {
            return Ok(d);
        }
        d += 2;
    }
    Ok(m)
}
