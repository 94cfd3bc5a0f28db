//! Block decomposition and the work-distribution helper behind every
//! segment-parallel sweep.
//!
//! Blocks are derived from the query alone, never from the thread count, and
//! per-block results are combined in ascending block order. That makes every
//! statistic in the crate reproducible for a given segment length no matter
//! how many threads run.

use crate::error::{Error, Result};

/// Splits `[lo, hi)` into consecutive blocks of at most `len` elements.
pub(crate) fn blocks(lo: u64, hi: u64, len: u64) -> Vec<(u64, u64)> {
    blocks_with_cuts(lo, hi, len, &[])
}

/// Splits `[lo, hi)` into blocks of at most `len` elements, forcing a block
/// boundary after every value in `cuts` (so a cut value is the last element
/// of its block). Cuts outside `[lo, hi)` are ignored.
pub(crate) fn blocks_with_cuts(lo: u64, hi: u64, len: u64, cuts: &[u64]) -> Vec<(u64, u64)> {
    debug_assert!(lo < hi && len >= 1);
    let mut edges: Vec<u64> = cuts
        .iter()
        .map(|&c| c.saturating_add(1))
        .filter(|&e| e > lo && e < hi)
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges.push(hi);

    let mut out = Vec::new();
    let mut start = lo;
    for edge in edges {
        let mut blo = start;
        while blo < edge {
            let bhi = edge.min(blo + len);
            out.push((blo, bhi));
            blo = bhi;
        }
        start = edge;
    }
    out
}

/// Applies `f` to every block, in parallel when `threads > 1`, and returns
/// the per-block results in ascending block order.
pub(crate) fn map_blocks<T, F>(block_list: &[(u64, u64)], threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> Result<T> + Sync,
{
    if threads == 0 {
        return Err(Error::InvalidParameter("threads must be >= 1".into()));
    }

    #[cfg(feature = "parallel")]
    if threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        // par_iter().map().collect() keeps input order for the Ok path.
        return pool.install(|| {
            block_list
                .par_iter()
                .map(|&(blo, bhi)| f(blo, bhi))
                .collect::<Result<Vec<T>>>()
        });
    }

    block_list.iter().map(|&(blo, bhi)| f(blo, bhi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_cover_range_exactly() {
        let bs = blocks(2, 1003, 100);
        assert_eq!(bs.first().unwrap().0, 2);
        assert_eq!(bs.last().unwrap().1, 1003);
        for w in bs.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        assert!(bs.iter().all(|&(a, b)| b - a <= 100 && a < b));
    }

    #[test]
    fn cuts_force_boundaries() {
        let bs = blocks_with_cuts(2, 101, 1000, &[10, 50, 400]);
        assert_eq!(bs, vec![(2, 11), (11, 51), (51, 101)]);
    }

    #[test]
    fn cut_at_last_element_is_ignored() {
        let bs = blocks_with_cuts(2, 11, 1000, &[10]);
        assert_eq!(bs, vec![(2, 11)]);
    }

    #[test]
    fn map_blocks_is_order_preserving() {
        let bs = blocks(0, 100, 7);
        let seq = map_blocks(&bs, 1, |a, b| Ok(a + b)).unwrap();
        let par = map_blocks(&bs, 4, |a, b| Ok(a + b)).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn zero_threads_is_rejected() {
        assert!(map_blocks(&[(0, 1)], 0, |a, _| Ok(a)).is_err());
    }
}
