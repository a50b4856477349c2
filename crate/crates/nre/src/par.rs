//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these fan work out over rayon;
//! without it they run sequentially with identical results. Result order
//! is deterministic either way: `find_map_first` returns the leftmost
//! match and `map_collect` preserves input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn find_map_first<T, R, F>(items: &[T], f: F) -> Option<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    items.par_iter().find_map_first(f)
}

#[cfg(not(feature = "parallel"))]
pub fn find_map_first<T, R, F>(items: &[T], f: F) -> Option<R>
where
    F: Fn(&T) -> Option<R>,
{
    items.iter().find_map(f)
}

#[cfg(feature = "parallel")]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Sequential twin of [`map_collect`], always available for comparison.
pub fn map_collect_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn find_map_first_is_leftmost() {
        let items: Vec<u32> = (0..1000).collect();
        let hit = find_map_first(&items, |&x| if x % 7 == 3 { Some(x) } else { None });
        assert_eq!(hit, Some(3));
    }

    #[test]
    fn map_collect_preserves_order() {
        let items: Vec<u32> = (0..100).collect();
        assert_eq!(map_collect(&items, |&x| x * 2), map_collect_seq(&items, |&x| x * 2));
    }
}
