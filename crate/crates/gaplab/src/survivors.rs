//! Sifted integer sets defined by smallest-prime-factor conditions, their
//! gap streams, and exact cross-checks against residue counting.
//!
//! A "survivor" is an integer `m >= 2` whose smallest prime factor `s`
//! passes the mode's test: `s >= z` for a fixed cut, or `s^d >= m` for the
//! relative cut `spf(m) >= m^(1/d)`. Membership depends only on `m` and the
//! mode; the `x` in a config bounds enumeration, not membership, so records
//! near the boundary may reference successors beyond `x`.

use crate::error::{Error, Result};
use crate::exec;
use crate::sieve;
use crate::spf;

/// Default denominator for the relative mode: `spf(m) >= m^(1/10)`.
pub const DEFAULT_D_INV: u64 = 10;

/// Membership test for a sifted set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurvivorMode {
    /// `spf(m) >= z`.
    FixedZ { z: u64 },
    /// `spf(m)^d_inv >= m`, i.e. `spf(m) >= m^(1/d_inv)`.
    VariableDelta { d_inv: u64 },
}

/// A survivor mode with an enumeration bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurvivorConfig {
    mode: SurvivorMode,
    x: u64,
}

impl SurvivorConfig {
    /// Validates `z >= 3` or `d_inv >= 2`, and `x >= 2`. A cut `z > x` is
    /// allowed; it just makes the enumerated set empty.
    pub fn new(mode: SurvivorMode, x: u64) -> Result<Self> {
        match mode {
            SurvivorMode::FixedZ { z } if z < 3 => {
                return Err(Error::InvalidParameter(format!(
                    "fixed cut needs z >= 3, got {z}"
                )));
            }
            SurvivorMode::VariableDelta { d_inv } if d_inv < 2 => {
                return Err(Error::InvalidParameter(format!(
                    "relative cut needs d_inv >= 2, got {d_inv}"
                )));
            }
            _ => {}
        }
        if x < 2 {
            return Err(Error::InvalidParameter(format!(
                "survivor bound needs x >= 2, got {x}"
            )));
        }
        Ok(Self { mode, x })
    }

    pub fn mode(&self) -> SurvivorMode {
        self.mode
    }

    pub fn x(&self) -> u64 {
        self.x
    }
}

/// Whether `s^e >= m`, with early exit before any overflow.
fn pow_at_least(s: u64, e: u64, m: u64) -> bool {
    let mut acc: u64 = 1;
    for _ in 0..e {
        acc = match acc.checked_mul(s) {
            Some(v) => v,
            None => return true,
        };
        if acc >= m {
            return true;
        }
    }
    false
}

/// Membership given a precomputed smallest prime factor.
pub(crate) fn member_with_spf(mode: SurvivorMode, m: u64, s: u64) -> bool {
    match mode {
        SurvivorMode::FixedZ { z } => s >= z,
        SurvivorMode::VariableDelta { d_inv } => pow_at_least(s, d_inv, m),
    }
}

/// Membership of a single integer `m >= 2`.
pub fn is_survivor(mode: SurvivorMode, m: u64) -> Result<bool> {
    Ok(member_with_spf(mode, m, spf::spf(m)?))
}

/// Calls `f` for every survivor in `[lo, hi)`, ascending, using one factor
/// table for the whole window.
pub(crate) fn scan_window(
    mode: SurvivorMode,
    lo: u64,
    hi: u64,
    mut f: impl FnMut(u64),
) -> Result<()> {
    let lo = lo.max(2);
    if lo >= hi {
        return Ok(());
    }
    let table = spf::spf_range(lo, hi)?;
    for m in lo..hi {
        if member_with_spf(mode, m, table.spf(m)) {
            f(m);
        }
    }
    Ok(())
}

/// Calls `f` for every survivor `m <= x`, ascending.
pub fn for_each_survivor(config: &SurvivorConfig, mut f: impl FnMut(u64)) -> Result<()> {
    for (blo, bhi) in exec::blocks(2, config.x + 1, sieve::DEFAULT_SEGMENT_LEN) {
        scan_window(config.mode, blo, bhi, &mut f)?;
    }
    Ok(())
}

/// Collected variant of [`for_each_survivor`].
pub fn survivors_up_to(config: &SurvivorConfig) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for_each_survivor(config, |m| out.push(m))?;
    Ok(out)
}

/// Number of survivors `m <= x`, segment-parallel.
pub fn survivor_count(config: &SurvivorConfig, threads: usize) -> Result<u64> {
    let mode = config.mode;
    let counts = exec::map_blocks(
        &exec::blocks(2, config.x + 1, sieve::DEFAULT_SEGMENT_LEN),
        threads,
        |blo, bhi| {
            let mut c = 0u64;
            scan_window(mode, blo, bhi, |_| c += 1)?;
            Ok(c)
        },
    )?;
    Ok(counts.into_iter().sum())
}

/// Least survivor strictly greater than `n`, by extension windows that
/// double on every miss, like the prime successor search.
pub fn next_survivor_after(mode: SurvivorMode, n: u64) -> Result<u64> {
    let mut window = match mode {
        // survivors of a fixed cut can be sparse before z; jump the gap
        SurvivorMode::FixedZ { z } => ((z as f64).max(n as f64).ln() * 2_000.0) as u64,
        SurvivorMode::VariableDelta { .. } => ((n.max(2) as f64).ln() * 2_000.0) as u64,
    }
    .max(64);
    let mut lo = n + 1;
    for _ in 0..=10 {
        let hi = lo
            .checked_add(window)
            .ok_or(Error::ExtensionExhausted { from: n })?;
        let mut found = None;
        scan_window(mode, lo, hi, |m| {
            if found.is_none() {
                found = Some(m);
            }
        })?;
        if let Some(m) = found {
            return Ok(m);
        }
        lo = hi;
        window *= 2;
    }
    Err(Error::ExtensionExhausted { from: n })
}

/// A survivor, its successor in the same set, and the gap between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurvivorGapRecord {
    pub m: u64,
    pub m_next: u64,
    pub gap: u64,
}

/// Calls `f` for every survivor `m <= x` with its successor gap, ascending.
/// The successor of the last survivor is found past `x` by extension.
pub fn for_each_survivor_gap(
    config: &SurvivorConfig,
    mut f: impl FnMut(&SurvivorGapRecord),
) -> Result<()> {
    let mut prev: Option<u64> = None;
    for_each_survivor(config, |m| {
        if let Some(q) = prev {
            f(&SurvivorGapRecord {
                m: q,
                m_next: m,
                gap: m - q,
            });
        }
        prev = Some(m);
    })?;
    if let Some(last) = prev {
        let next = next_survivor_after(config.mode, last)?;
        f(&SurvivorGapRecord {
            m: last,
            m_next: next,
            gap: next - last,
        });
    }
    Ok(())
}

/// Collected variant of [`for_each_survivor_gap`].
pub fn survivor_gap_records(config: &SurvivorConfig) -> Result<Vec<SurvivorGapRecord>> {
    let mut out = Vec::new();
    for_each_survivor_gap(config, |r| out.push(*r))?;
    Ok(out)
}

/// Number of `m <= x` with `m` and `m + d` both survivors, `d >= 1`.
/// Membership of `m + d` is intrinsic; it may exceed `x`.
pub fn pair_count(config: &SurvivorConfig, d: u64, threads: usize) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidParameter("pair distance must be >= 1".into()));
    }
    shifted_count(config, &[0, d], threads)
}

/// Number of `m <= x` with `m`, `m + d1`, `m + d2` all survivors, for
/// `1 <= d1 < d2`.
pub fn triple_count(config: &SurvivorConfig, d1: u64, d2: u64, threads: usize) -> Result<u64> {
    if d1 == 0 || d1 >= d2 {
        return Err(Error::InvalidParameter(format!(
            "triple distances need 1 <= d1 < d2, got ({d1}, {d2})"
        )));
    }
    shifted_count(config, &[0, d1, d2], threads)
}

/// Counts `m in [2, x]` such that `m + o` is a survivor for every offset.
fn shifted_count(config: &SurvivorConfig, offsets: &[u64], threads: usize) -> Result<u64> {
    let mode = config.mode;
    let span = *offsets.last().unwrap();
    let counts = exec::map_blocks(
        &exec::blocks(2, config.x + 1, sieve::DEFAULT_SEGMENT_LEN),
        threads,
        move |blo, bhi| {
            let table = spf::spf_range(blo, bhi + span)?;
            let mut c = 0u64;
            for m in blo..bhi {
                if offsets
                    .iter()
                    .all(|&o| member_with_spf(mode, m + o, table.spf(m + o)))
                {
                    c += 1;
                }
            }
            Ok(c)
        },
    )?;
    Ok(counts.into_iter().sum())
}

/// Exact pair count for the fixed cut by counting residues mod the product
/// of primes below `z`: survivorship there means coprimality to that
/// product. Only feasible while the product stays at most 10^9.
pub fn crt_pair_oracle(x: u64, z: u64, d: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidParameter("pair distance must be >= 1".into()));
    }
    crt_shifted_count(x, z, &[0, d])
}

/// Exact triple count for the fixed cut by residue counting.
pub fn crt_triple_oracle(x: u64, z: u64, d1: u64, d2: u64) -> Result<u64> {
    if d1 == 0 || d1 >= d2 {
        return Err(Error::InvalidParameter(format!(
            "triple distances need 1 <= d1 < d2, got ({d1}, {d2})"
        )));
    }
    crt_shifted_count(x, z, &[0, d1, d2])
}

fn crt_shifted_count(x: u64, z: u64, offsets: &[u64]) -> Result<u64> {
    if z < 3 {
        return Err(Error::InvalidParameter(format!(
            "fixed cut needs z >= 3, got {z}"
        )));
    }
    if x < 2 {
        return Err(Error::InvalidParameter(format!(
            "oracle bound needs x >= 2, got {x}"
        )));
    }
    let mut w: u64 = 1;
    for p in sieve::base_primes(z - 1) {
        w = w.checked_mul(p).filter(|&v| v <= 1_000_000_000).ok_or_else(|| {
            Error::Overflow(format!("residue modulus for z = {z} exceeds 10^9"))
        })?;
    }

    // coprime[r] <=> gcd(r, w) = 1, by striking prime residue classes
    let mut coprime = vec![true; w as usize];
    for p in sieve::base_primes(z - 1) {
        let mut r = 0u64;
        while r < w {
            coprime[r as usize] = false;
            r += p;
        }
    }

    let qualifies =
        |rho: u64| offsets.iter().all(|&o| coprime[((rho + o) % w) as usize]);

    // m in [1, x] with m = rho (mod w), counted per residue class
    let mut count = 0u64;
    for rho in 1..=w {
        if rho <= x && qualifies(rho % w) {
            count += (x - rho) / w + 1;
        }
    }
    // the class of 1 counts m = 1, which is not a survivor
    if qualifies(1 % w) {
        count -= 1;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF: SurvivorMode = SurvivorMode::VariableDelta { d_inv: 2 };

    #[test]
    fn config_validation() {
        assert!(SurvivorConfig::new(SurvivorMode::FixedZ { z: 2 }, 100).is_err());
        assert!(SurvivorConfig::new(SurvivorMode::VariableDelta { d_inv: 1 }, 100).is_err());
        assert!(SurvivorConfig::new(HALF, 1).is_err());
        assert!(SurvivorConfig::new(SurvivorMode::FixedZ { z: 3 }, 2).is_ok());
        // a cut beyond the bound is legal and enumerates nothing
        let empty = SurvivorConfig::new(SurvivorMode::FixedZ { z: 11 }, 10).unwrap();
        assert_eq!(survivors_up_to(&empty).unwrap(), Vec::<u64>::new());
    }

    #[test]
    fn membership_matches_definition() {
        // spf(9) = 3 and 3^2 = 9, so the boundary case survives
        assert!(is_survivor(HALF, 9).unwrap());
        assert!(!is_survivor(HALF, 6).unwrap()); // spf 2, 4 < 6
        assert!(is_survivor(HALF, 4).unwrap()); // spf 2, 4 >= 4
        assert!(is_survivor(HALF, 97).unwrap()); // primes always survive
        assert!(is_survivor(SurvivorMode::FixedZ { z: 5 }, 25).unwrap());
        assert!(!is_survivor(SurvivorMode::FixedZ { z: 5 }, 21).unwrap());
        assert!(is_survivor(SurvivorMode::FixedZ { z: 3 }, 15).unwrap());
        assert!(is_survivor(SurvivorMode::VariableDelta { d_inv: 10 }, 1024).unwrap());
        assert!(!is_survivor(SurvivorMode::VariableDelta { d_inv: 10 }, 2050).unwrap());
        assert!(is_survivor(HALF, 1).is_err());
    }

    #[test]
    fn enumeration_matches_pointwise_membership() {
        for mode in [
            SurvivorMode::FixedZ { z: 3 },
            SurvivorMode::FixedZ { z: 7 },
            HALF,
            SurvivorMode::VariableDelta { d_inv: 10 },
        ] {
            let config = SurvivorConfig::new(mode, 500).unwrap();
            let listed = survivors_up_to(&config).unwrap();
            let filtered: Vec<u64> =
                (2..=500).filter(|&m| is_survivor(mode, m).unwrap()).collect();
            assert_eq!(listed, filtered, "{mode:?}");
        }
    }

    #[test]
    fn fixed_cut_three_lists_odd_numbers() {
        let config = SurvivorConfig::new(SurvivorMode::FixedZ { z: 3 }, 30).unwrap();
        let got = survivors_up_to(&config).unwrap();
        let want: Vec<u64> = (3..=30).step_by(2).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn relative_cut_half_below_thirty() {
        let config = SurvivorConfig::new(HALF, 30).unwrap();
        assert_eq!(
            survivors_up_to(&config).unwrap(),
            vec![2, 3, 4, 5, 7, 9, 11, 13, 17, 19, 23, 25, 29]
        );
    }

    #[test]
    fn counts_are_thread_invariant() {
        let config = SurvivorConfig::new(HALF, 100_000).unwrap();
        let seq = survivor_count(&config, 1).unwrap();
        let par = survivor_count(&config, 4).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq, survivors_up_to(&config).unwrap().len() as u64);
    }

    #[test]
    fn successor_search() {
        assert_eq!(next_survivor_after(HALF, 2).unwrap(), 3);
        assert_eq!(next_survivor_after(HALF, 5).unwrap(), 7);
        assert_eq!(next_survivor_after(SurvivorMode::FixedZ { z: 100 }, 2).unwrap(), 101);
        assert_eq!(
            next_survivor_after(SurvivorMode::FixedZ { z: 10_000 }, 2).unwrap(),
            10_007
        );
    }

    #[test]
    fn gap_stream_smallest_case() {
        let config = SurvivorConfig::new(HALF, 2).unwrap();
        assert_eq!(
            survivor_gap_records(&config).unwrap(),
            vec![SurvivorGapRecord { m: 2, m_next: 3, gap: 1 }]
        );
    }

    #[test]
    fn gap_stream_is_chained_and_complete() {
        let config = SurvivorConfig::new(SurvivorMode::FixedZ { z: 5 }, 1_000).unwrap();
        let records = survivor_gap_records(&config).unwrap();
        let listed = survivors_up_to(&config).unwrap();
        assert_eq!(records.len(), listed.len());
        for (r, &m) in records.iter().zip(&listed) {
            assert_eq!(r.m, m);
            assert_eq!(r.gap, r.m_next - r.m);
        }
        for w in records.windows(2) {
            assert_eq!(w[0].m_next, w[1].m);
        }
        // last successor extends past the bound
        assert!(records.last().unwrap().m_next > 1_000);
    }

    #[test]
    fn pair_and_triple_counts() {
        let config = SurvivorConfig::new(SurvivorMode::FixedZ { z: 3 }, 100).unwrap();
        // odd m in [3, 99] with m + 2 odd: all 49 of them
        assert_eq!(pair_count(&config, 2, 1).unwrap(), 49);
        // m and m + 1 cannot both be odd
        assert_eq!(pair_count(&config, 1, 1).unwrap(), 0);
        assert_eq!(triple_count(&config, 2, 4, 1).unwrap(), 49);
        assert!(triple_count(&config, 4, 2, 1).is_err());
        assert!(triple_count(&config, 2, 2, 1).is_err());
        assert!(pair_count(&config, 0, 1).is_err());
    }

    #[test]
    fn pair_count_matches_residue_oracle() {
        for z in [3u64, 5, 7] {
            let config = SurvivorConfig::new(SurvivorMode::FixedZ { z }, 10_000).unwrap();
            for d in 1..=12 {
                assert_eq!(
                    pair_count(&config, d, 1).unwrap(),
                    crt_pair_oracle(10_000, z, d).unwrap(),
                    "z = {z}, d = {d}"
                );
            }
        }
    }

    #[test]
    fn triple_count_matches_residue_oracle() {
        for z in [3u64, 5, 7] {
            let config = SurvivorConfig::new(SurvivorMode::FixedZ { z }, 3_000).unwrap();
            for d1 in 1..=4 {
                for d2 in (d1 + 1)..=6 {
                    assert_eq!(
                        triple_count(&config, d1, d2, 1).unwrap(),
                        crt_triple_oracle(3_000, z, d1, d2).unwrap(),
                        "z = {z}, ({d1}, {d2})"
                    );
                }
            }
        }
    }

    #[test]
    fn small_oracle_values() {
        assert_eq!(crt_pair_oracle(100, 3, 2).unwrap(), 49);
        assert_eq!(crt_pair_oracle(100, 7, 2).unwrap(), 9);
        assert_eq!(crt_pair_oracle(100, 5, 6).unwrap(), 32);
        assert_eq!(crt_triple_oracle(100, 3, 2, 4).unwrap(), 49);
    }

    #[test]
    fn oracle_modulus_overflow() {
        match crt_pair_oracle(1_000, 30, 2) {
            Err(Error::Overflow(_)) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn counts_are_intrinsic_at_the_boundary() {
        // m = 99 counts although 101 and 103 exceed the bound
        let config = SurvivorConfig::new(SurvivorMode::FixedZ { z: 3 }, 99).unwrap();
        assert_eq!(pair_count(&config, 2, 1).unwrap(), 49);
    }
}
