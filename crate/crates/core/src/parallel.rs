//! Static range partitioning of the candidate space and the fork-join
//! driver that runs skip-BF on each range.
//!
//! Windows are extracted once, up front, and every worker scans the same
//! read-only [`WindowTable`]. Each worker owns its output; the joining
//! thread concatenates per-worker motif lists in range order, which keeps
//! the merged list sorted.

use std::ops::Range;
use std::thread;
use std::time::{Duration, Instant};

use crate::dna::rank_limit;
use crate::error::{Error, Result};
use crate::search::{skip_bf_search_windows, MotifProblem, MotifResult, WindowTable};

/// Contiguous split of `[0, 4^l)` into `worker_count` ranges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    l: usize,
    ranges: Vec<Range<u64>>,
}

impl Partition {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn worker_count(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[Range<u64>] {
        &self.ranges
    }
}

/// Base size `floor(4^l / W)`; the first `4^l mod W` ranges get one extra.
pub fn make_partition(l: usize, worker_count: usize) -> Result<Partition> {
    if worker_count == 0 {
        return Err(Error::InvalidWorkerCount(0));
    }
    let total = rank_limit(l)?;
    let w = worker_count as u64;
    let (base, extra) = (total / w, total % w);
    let mut ranges = Vec::with_capacity(worker_count);
    let mut lo = 0u64;
    for i in 0..w {
        let hi = lo + base + u64::from(i < extra);
        ranges.push(lo..hi);
        lo = hi;
    }
    debug_assert_eq!(lo, total);
    Ok(Partition { l, ranges })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkerReport {
    pub range: Range<u64>,
    pub elapsed: Duration,
    pub candidates_examined: u64,
    pub windows_compared: u64,
    pub motif_count: usize,
}

#[derive(Clone, Debug)]
pub struct ParallelResult {
    /// `elapsed` here is the wall time of the whole fork-join.
    pub merged: MotifResult,
    pub per_worker: Vec<WorkerReport>,
}

/// Logical CPUs visible to this process, or 1 if unknown.
pub fn default_worker_count() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn parallel_search(problem: &MotifProblem, worker_count: usize) -> Result<ParallelResult> {
    let table = problem.window_table();
    parallel_search_windows(&table, worker_count)
}

pub fn parallel_search_windows(table: &WindowTable, worker_count: usize) -> Result<ParallelResult> {
    let partition = make_partition(table.l(), worker_count)?;
    let start = Instant::now();

    let outcomes: Vec<(Range<u64>, Result<MotifResult>)> = thread::scope(|scope| {
        let handles: Vec<_> = partition
            .ranges()
            .iter()
            .cloned()
            .map(|range| {
                let r = range.clone();
                (range, scope.spawn(move || skip_bf_search_windows(table, r)))
            })
            .collect();
        handles
            .into_iter()
            .map(|(range, h)| {
                let res = h.join().unwrap_or_else(|panic| {
                    let reason = panic
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| panic.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "worker panicked".to_string());
                    Err(Error::WorkerFailed {
                        lo: range.start,
                        hi: range.end,
                        reason,
                    })
                });
                (range, res)
            })
            .collect()
    });
    let elapsed = start.elapsed();

    let mut motifs = Vec::new();
    let mut candidates = 0u64;
    let mut compared = 0u64;
    let mut per_worker = Vec::with_capacity(outcomes.len());
    for (range, res) in outcomes {
        let r = match res {
            Ok(r) => r,
            Err(e @ Error::WorkerFailed { .. }) => return Err(e),
            Err(e) => {
                return Err(Error::WorkerFailed {
                    lo: range.start,
                    hi: range.end,
                    reason: e.to_string(),
                })
            }
        };
        candidates += r.candidates_examined;
        compared += r.windows_compared;
        per_worker.push(WorkerReport {
            range,
            elapsed: r.elapsed,
            candidates_examined: r.candidates_examined,
            windows_compared: r.windows_compared,
            motif_count: r.motifs.len(),
        });
        motifs.extend(r.motifs);
    }
    // Ranges are disjoint and ordered, so the concatenation is already
    // strictly increasing.
    debug_assert!(motifs.windows(2).all(|w| w[0] < w[1]));
    motifs.dedup();

    Ok(ParallelResult {
        merged: MotifResult {
            motifs,
            candidates_examined: candidates,
            windows_compared: compared,
            elapsed,
        },
        per_worker,
    })
}
