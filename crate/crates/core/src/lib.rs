//! Exact planted (l, d) motif search with the skip-brute-force algorithm,
//! parallelised by splitting the candidate l-mer space into contiguous
//! rank ranges.
//!
//! ```
//! use skipbf::{parallel_search, MotifProblem};
//!
//! let problem = MotifProblem::from_strs(&["ACGTTGCA", "TTGCAACG"], 4, 0).unwrap();
//! let found = parallel_search(&problem, 2).unwrap();
//! let motifs: Vec<String> = found.merged.motifs.iter().map(|m| m.to_string()).collect();
//! assert!(motifs.contains(&"TTGC".to_string()));
//! ```

pub mod bench;
pub mod datagen;
pub mod dna;
pub mod error;
pub mod parallel;
pub mod search;

pub use crate::bench::{run_bench, BenchOutcome, BenchRecord, BenchSpec, BenchSummary};
pub use crate::datagen::{
    generate_dataset, read_dataset, write_dataset, Dataset, GenSpec, PlantRecord,
};
pub use crate::dna::{
    decode_lmer, encode_lmer, encode_sequence, extract_windows, hamming_distance, matches_within,
    EncodedSequence, LMerRank, Nucleotide, Window, MAX_MOTIF_LEN,
};
pub use crate::error::{Error, Result};
pub use crate::parallel::{make_partition, parallel_search, ParallelResult, Partition};
pub use crate::search::{
    naive_bf_search, sequence_matches, skip_bf_search, verify_motif, MotifProblem, MotifResult,
};
