//! Thin switch between sequential and rayon-backed sweeps.
//!
//! Both paths are order-deterministic: mapped results keep input order and
//! searches return the first hit in input order, so toggling parallelism can
//! never change an output byte.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map_collect<T, R, F>(parallel: bool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// First `Some` in input order.
pub(crate) fn find_map_first<T, R, F>(parallel: bool, items: &[T], f: F) -> Option<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.par_iter().find_map_first(f);
    }
    let _ = parallel;
    items.iter().find_map(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_on_first_hit() {
        let items: Vec<u32> = (0..1000).collect();
        let probe = |v: &u32| if v % 7 == 3 { Some(*v) } else { None };
        let seq = find_map_first(false, &items, probe);
        let par = find_map_first(true, &items, probe);
        assert_eq!(seq, par);
        assert_eq!(seq, Some(3));
        assert_eq!(
            map_collect(true, &items, |v| v * 2),
            map_collect(false, &items, |v| v * 2)
        );
    }
}
