//! Trial-division oracles for cross-checking sieve output.

/// Smallest prime factor by trial division.
pub fn trial_spf(n: u64) -> u64 {
    assert!(n >= 2);
    if n % 2 == 0 {
        return 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 2;
    }
    n
}

pub fn trial_is_prime(n: u64) -> bool {
    n >= 2 && trial_spf(n) == n
}

/// All primes in `[lo, hi)`, slowly.
pub fn trial_primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..hi).filter(|&n| trial_is_prime(n)).collect()
}
