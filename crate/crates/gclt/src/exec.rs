use std::num::NonZeroUsize;
use std::ops::Range;

use gclt_core::montecarlo::Executor;

/// Splits `0..len` into contiguous chunks, one scoped thread per chunk.
#[derive(Debug, Clone, Copy)]
pub struct Threaded {
    workers: NonZeroUsize,
}

impl Threaded {
    pub fn new(workers: usize) -> Self {
        Self {
            workers: NonZeroUsize::new(workers).unwrap_or(NonZeroUsize::MIN),
        }
    }

    /// One worker per available core.
    pub fn available() -> Self {
        Self {
            workers: std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN),
        }
    }

    pub fn workers(&self) -> usize {
        self.workers.get()
    }
}

impl Executor for Threaded {
    fn map_range<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<usize>) -> Vec<T> + Sync,
    {
        let w = self.workers.get().min(len.max(1));
        if w == 1 {
            return f(0..len);
        }
        let chunk = len.div_ceil(w);
        let f = &f;
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..len)
                .step_by(chunk)
                .map(|start| s.spawn(move || f(start..(start + chunk).min(len))))
                .collect();
            let mut out = Vec::with_capacity(len);
            for h in handles {
                out.extend(h.join().expect("worker panicked"));
            }
            out
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_concatenate_in_order() {
        for workers in [1, 2, 3, 8, 50] {
            let v = Threaded::new(workers).map_range(37, |r| r.collect::<Vec<_>>());
            assert_eq!(v, (0..37).collect::<Vec<_>>());
        }
        assert!(Threaded::new(4).map_range(0, |r| r.collect::<Vec<usize>>()).is_empty());
    }
}
