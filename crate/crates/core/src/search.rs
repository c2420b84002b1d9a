//! Sequential skip-brute-force search and the naive brute-force oracle.

use std::ops::Range;
use std::time::{Duration, Instant};

use crate::dna::{
    encode_sequence, packed_mismatches, rank_limit, reference_hamming, window_codes,
    EncodedSequence, LMerRank, Window, MAX_MOTIF_LEN,
};
use crate::error::{Error, Result};

/// A planted (l, d) instance: `n` sequences, motif length `l`, budget `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotifProblem {
    sequences: Vec<EncodedSequence>,
    l: usize,
    d: usize,
}

impl MotifProblem {
    pub fn new(sequences: Vec<EncodedSequence>, l: usize, d: usize) -> Result<Self> {
        if sequences.is_empty() {
            return Err(Error::InvalidProblem("no sequences".into()));
        }
        if l == 0 || l > MAX_MOTIF_LEN {
            return Err(Error::InvalidMotifLength(l));
        }
        let shortest = sequences
            .iter()
            .map(EncodedSequence::len)
            .min()
            .unwrap_or(0);
        if l > shortest {
            return Err(Error::MotifLongerThanSequence { l, len: shortest });
        }
        Ok(MotifProblem { sequences, l, d })
    }

    pub fn from_strs<S: AsRef<str>>(sequences: &[S], l: usize, d: usize) -> Result<Self> {
        let encoded = sequences
            .iter()
            .map(|s| encode_sequence(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(encoded, l, d)
    }

    pub fn sequences(&self) -> &[EncodedSequence] {
        &self.sequences
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `4^l`.
    pub fn rank_limit(&self) -> u64 {
        1u64 << (2 * self.l)
    }

    /// Extract every sequence's windows once.
    pub fn window_table(&self) -> WindowTable {
        let rows = self
            .sequences
            .iter()
            .map(|s| window_codes(s, self.l).expect("validated at construction"))
            .collect();
        WindowTable {
            l: self.l,
            d: self.d,
            rows,
        }
    }
}

/// Packed window codes for every sequence of a problem, row `i` holding
/// sequence `i`. Read-only once built; shared by all workers.
#[derive(Clone, Debug)]
pub struct WindowTable {
    l: usize,
    d: usize,
    rows: Vec<Vec<u64>>,
}

impl WindowTable {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn rank_limit(&self) -> u64 {
        1u64 << (2 * self.l)
    }

    pub fn total_windows(&self) -> u64 {
        self.rows.iter().map(|r| r.len() as u64).sum()
    }

    fn check_range(&self, range: &Range<u64>) -> Result<()> {
        let limit = self.rank_limit();
        if range.start > range.end || range.end > limit {
            return Err(Error::InvalidRange {
                lo: range.start,
                hi: range.end,
                limit,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotifResult {
    /// Every l-mer matching all sequences, strictly increasing by rank.
    pub motifs: Vec<LMerRank>,
    pub candidates_examined: u64,
    pub windows_compared: u64,
    pub elapsed: Duration,
}

impl MotifResult {
    pub fn ranks(&self) -> Vec<u64> {
        self.motifs.iter().map(|m| m.rank()).collect()
    }
}

/// Windows are scanned in fixed-size blocks without early exit inside a
/// block so the kernel vectorizes; the scan stops after the first block
/// containing a hit.
const SCAN_BLOCK: usize = 16;

/// Scan one sequence's windows for a hit within `d`. Returns whether one
/// was found and how many windows were compared before stopping.
#[inline]
fn scan_row(code: u64, row: &[u64], d: u32) -> (bool, u64) {
    let mut compared = 0u64;
    for block in row.chunks(SCAN_BLOCK) {
        compared += block.len() as u64;
        let hits: u32 = block
            .iter()
            .map(|&w| u32::from(packed_mismatches(code, w) <= d))
            .sum();
        if hits != 0 {
            return (true, compared);
        }
    }
    (false, compared)
}

/// True iff at least one window lies within Hamming distance `d` of
/// `candidate`.
pub fn sequence_matches(candidate: LMerRank, windows: &[Window], d: usize) -> Result<bool> {
    for w in windows {
        if w.len() != candidate.len() {
            return Err(Error::LengthMismatch {
                left: candidate.len(),
                right: w.len(),
            });
        }
        if packed_mismatches(candidate.rank(), w.lmer.rank()) as usize <= d {
            return Ok(true);
        }
    }
    Ok(false)
}

fn budget(d: usize) -> u32 {
    u32::try_from(d).unwrap_or(u32::MAX)
}

#[inline(always)]
fn skip_loop(rows: &[Vec<u64>], l: usize, d: u32, range: Range<u64>) -> (Vec<LMerRank>, u64) {
    let mut motifs = Vec::new();
    let mut compared = 0u64;
    'candidates: for code in range {
        for row in rows {
            let (hit, n) = scan_row(code, row, d);
            compared += n;
            if !hit {
                // skip rule: the remaining sequences are never examined
                continue 'candidates;
            }
        }
        motifs.push(LMerRank::new_unchecked(code, l));
    }
    (motifs, compared)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,popcnt")]
unsafe fn skip_loop_avx2(
    rows: &[Vec<u64>],
    l: usize,
    d: u32,
    range: Range<u64>,
) -> (Vec<LMerRank>, u64) {
    skip_loop(rows, l, d, range)
}

/// Same loop, compiled for AVX2 + POPCNT when the running CPU has them.
fn skip_loop_dispatch(
    rows: &[Vec<u64>],
    l: usize,
    d: u32,
    range: Range<u64>,
) -> (Vec<LMerRank>, u64) {
    #[cfg(target_arch = "x86_64")]
    if is_x86_feature_detected!("avx2") && is_x86_feature_detected!("popcnt") {
        // SAFETY: the required CPU features were detected at runtime.
        return unsafe { skip_loop_avx2(rows, l, d, range) };
    }
    skip_loop(rows, l, d, range)
}

/// Skip-BF over a prepared window table. The timer covers the candidate
/// loop only.
pub fn skip_bf_search_windows(table: &WindowTable, range: Range<u64>) -> Result<MotifResult> {
    table.check_range(&range)?;
    let d = budget(table.d);
    let start = Instant::now();
    let (motifs, compared) = skip_loop_dispatch(&table.rows, table.l, d, range.clone());
    Ok(MotifResult {
        motifs,
        candidates_examined: range.end - range.start,
        windows_compared: compared,
        elapsed: start.elapsed(),
    })
}

pub fn skip_bf_search(problem: &MotifProblem, range: Range<u64>) -> Result<MotifResult> {
    skip_bf_search_windows(&problem.window_table(), range)
}

/// Exhaustive baseline: every candidate against every window of every
/// sequence, no early exit of any kind.
pub fn naive_bf_search(problem: &MotifProblem) -> Result<MotifResult> {
    let table = problem.window_table();
    let d = budget(table.d);
    let start = Instant::now();
    let mut motifs = Vec::new();
    let mut compared = 0u64;
    for code in 0..table.rank_limit() {
        let mut sequences_hit = 0usize;
        for row in &table.rows {
            let mut hit = false;
            for &w in row {
                hit |= packed_mismatches(code, w) <= d;
            }
            compared += row.len() as u64;
            sequences_hit += usize::from(hit);
        }
        if sequences_hit == table.rows.len() {
            motifs.push(LMerRank::new_unchecked(code, table.l));
        }
    }
    Ok(MotifResult {
        motifs,
        candidates_examined: table.rank_limit(),
        windows_compared: compared,
        elapsed: start.elapsed(),
    })
}

/// Re-check a rank against the raw sequences with the per-position
/// reference kernel, bypassing the packed window table.
pub fn verify_motif(problem: &MotifProblem, rank: u64) -> bool {
    let Ok(limit) = rank_limit(problem.l) else {
        return false;
    };
    if rank >= limit {
        return false;
    }
    let candidate = LMerRank::new_unchecked(rank, problem.l).nucleotides();
    problem.sequences.iter().all(|seq| {
        let nts: Vec<_> = seq.iter().collect();
        nts.windows(problem.l)
            .any(|w| reference_hamming(&candidate, w).expect("equal lengths") <= problem.d)
    })
}
