//! Data-parallel helpers with a sequential fallback.
//!
//! Built with the `parallel` feature (default), `map_collect` and
//! `try_map_collect` fan work out over rayon. Without it they degrade to the
//! sequential versions. Results are always collected in input order and no
//! parallel reductions are performed, so outputs are bit-identical across
//! both execution modes and across runs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential twin of [`map_collect`], kept available in all builds so
/// benchmarks can compare the two paths directly.
pub fn map_collect_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Fallible ordered map; the first error wins.
pub fn try_map_collect<T, U, E, F>(items: &[T], f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Maps `f` over an index range `0..n`, preserving order.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential twin of [`map_range`].
pub fn map_range_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let items: Vec<u64> = (0..257).collect();
        let f = |x: &u64| (*x as f64).sqrt().sin();
        assert_eq!(map_collect(&items, f), map_collect_seq(&items, f));
    }

    #[test]
    fn try_map_propagates_error() {
        let items = [1i32, 2, -1, 4];
        let r: Result<Vec<i32>, String> = try_map_collect(&items, |x| {
            if *x < 0 {
                Err("negative".to_string())
            } else {
                Ok(*x * 2)
            }
        });
        assert!(r.is_err());
    }
}
