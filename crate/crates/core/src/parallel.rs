//! Worker pool used by the solver and the experiment driver.
//!
//! With the `parallel` feature and more than one worker, chunks are mapped
//! on a dedicated rayon pool; otherwise they run in order on the calling
//! thread. Either way results come back in chunk order, so callers see
//! identical output for any worker count.

use std::ops::Range;

pub struct Workers {
    count: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Workers {
    /// `count` of 0 or 1 means sequential.
    pub fn new(count: usize) -> Workers {
        let count = count.max(1);
        #[cfg(feature = "parallel")]
        {
            let pool =
                (count > 1).then(|| rayon::ThreadPoolBuilder::new().num_threads(count).build().expect("thread pool"));
            Workers { count, pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Workers { count }
        }
    }

    pub fn sequential() -> Workers {
        Workers::new(1)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Maps `f` over `items` split into chunks of `chunk` elements.
    pub fn map_chunks<I, T, F>(&self, items: &[I], chunk: usize, f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&[I]) -> T + Sync + Send,
    {
        let chunk = chunk.max(1);
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| items.par_chunks(chunk).map(&f).collect());
        }
        items.chunks(chunk).map(f).collect()
    }

    /// Maps `f` over `0..n` split into ranges of `chunk` indices.
    pub fn map_ranges<T, F>(&self, n: u64, chunk: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<u64>) -> T + Sync + Send,
    {
        let chunk = chunk.max(1);
        let ranges: Vec<Range<u64>> = (0..n.div_ceil(chunk)).map(|i| i * chunk..((i + 1) * chunk).min(n)).collect();
        self.map_chunks(&ranges, 1, |r| f(r[0].clone()))
    }
}

impl Default for Workers {
    fn default() -> Self {
        Workers::sequential()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_order_is_preserved() {
        let items: Vec<u32> = (0..1000).collect();
        let seq = Workers::sequential().map_chunks(&items, 7, |c| c.iter().sum::<u32>());
        let par = Workers::new(4).map_chunks(&items, 7, |c| c.iter().sum::<u32>());
        assert_eq!(seq, par);
        let ranges = Workers::new(3).map_ranges(10, 4, |r| r);
        assert_eq!(ranges, vec![0..4, 4..8, 8..10]);
    }
}
