//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch to rayon when the
//! caller's [`Config`](crate::Config) asks for it; otherwise they run on
//! the calling thread. Results are always returned in input order, so
//! callers see identical output under both strategies.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(parallel: bool, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.into_par_iter().map(f).collect();
    }
    let _ = parallel;
    items.into_iter().map(f).collect()
}

/// Maps a fallible `f` over `0..n`, keeping the `Some` results in order and
/// stopping at the first error.
pub fn filter_map_range<R, E, F>(parallel: bool, n: u64, f: F) -> Result<Vec<R>, E>
where
    R: Send,
    E: Send,
    F: Fn(u64) -> Result<Option<R>, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        let results: Vec<Option<R>> = (0..n)
            .into_par_iter()
            .map(f)
            .collect::<Result<Vec<_>, E>>()?;
        return Ok(results.into_iter().flatten().collect());
    }
    let _ = parallel;
    let mut out = Vec::new();
    for i in 0..n {
        if let Some(r) = f(i)? {
            out.push(r);
        }
    }
    Ok(out)
}
