//! Synthetic datasets under the fixed-number-of-mutations (FM) model.
//!
//! Every sequence gets exactly one planted instance of a random consensus,
//! mutated at exactly `d` distinct positions. The generator is
//! `ChaCha8Rng` seeded from the 64-bit seed, consumed in this order:
//!
//! 1. `l` consensus nucleotides, uniform;
//! 2. for each sequence in turn: `t` background nucleotides drawn from
//!    `background_probs`, the plant offset (uniform in `0..=t-l`), `d`
//!    distinct positions (`rand::seq::index::sample`, then sorted), and one
//!    replacement per position chosen uniformly among the 3 other bases.
//!
//! Output for a given `(GenSpec, seed)` is byte-identical across runs and
//! platforms.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dna::Nucleotide;
use crate::error::{Error, Result};

pub const FASTA_LINE_WIDTH: usize = 60;
pub const UNIFORM: [f64; 4] = [0.25; 4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub t: usize,
    pub l: usize,
    pub d: usize,
    pub seed: u64,
    #[serde(default = "uniform")]
    pub background_probs: [f64; 4],
}

fn uniform() -> [f64; 4] {
    UNIFORM
}

impl GenSpec {
    pub fn new(n: usize, t: usize, l: usize, d: usize, seed: u64) -> Self {
        GenSpec {
            n,
            t,
            l,
            d,
            seed,
            background_probs: UNIFORM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.n == 0 {
            return bad("need at least one sequence (n >= 1)".into());
        }
        if self.l == 0 {
            return bad("motif length must be at least 1".into());
        }
        if self.l > self.t {
            return bad(format!(
                "motif longer than sequence (l={} > t={})",
                self.l, self.t
            ));
        }
        if self.d > self.l {
            return bad(format!(
                "mutations exceed motif length (d={} > l={})",
                self.d, self.l
            ));
        }
        let p = &self.background_probs;
        if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return bad("background probabilities must be finite and non-negative".into());
        }
        if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("background probabilities must sum to 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plant {
    #[serde(rename = "seq")]
    pub sequence: usize,
    pub offset: usize,
    pub instance: String,
    pub mutated_positions: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlantRecord {
    pub consensus: String,
    pub plants: Vec<Plant>,
}

/// Generation parameters plus ground truth; the content of the sidecar.
#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    pub spec: GenSpec,
    pub record: PlantRecord,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub sequences: Vec<String>,
    pub truth: Truth,
}

impl Dataset {
    pub fn spec(&self) -> &GenSpec {
        &self.truth.spec
    }

    pub fn record(&self) -> &PlantRecord {
        &self.truth.record
    }

    /// Check that every plant sits where the record says, differs from the
    /// consensus at exactly the listed positions, and that the sequences
    /// have the advertised shape.
    pub fn check_consistency(&self) -> Result<()> {
        check_truth(&self.sequences, &self.truth)
    }
}

fn check_truth(sequences: &[String], truth: &Truth) -> Result<()> {
    let spec = &truth.spec;
    let rec = &truth.record;
    let fail = |m: String| Err(Error::Consistency(m));
    if sequences.len() != spec.n {
        return fail(format!(
            "expected {} sequences, found {}",
            spec.n,
            sequences.len()
        ));
    }
    if rec.consensus.len() != spec.l {
        return fail(format!(
            "consensus length {} != l={}",
            rec.consensus.len(),
            spec.l
        ));
    }
    if rec.plants.len() != spec.n {
        return fail(format!(
            "expected {} plants, found {}",
            spec.n,
            rec.plants.len()
        ));
    }
    for (i, (seq, plant)) in sequences.iter().zip(&rec.plants).enumerate() {
        if seq.len() != spec.t {
            return fail(format!(
                "sequence {i} has length {} != t={}",
                seq.len(),
                spec.t
            ));
        }
        if plant.sequence != i {
            return fail(format!("plant {i} refers to sequence {}", plant.sequence));
        }
        if plant.offset + spec.l > seq.len() {
            return fail(format!("plant {i} offset {} out of range", plant.offset));
        }
        if seq.get(plant.offset..plant.offset + spec.l) != Some(plant.instance.as_str()) {
            return fail(format!(
                "sequence {i} does not contain its instance at {}",
                plant.offset
            ));
        }
        let diffs: Vec<usize> = rec
            .consensus
            .bytes()
            .zip(plant.instance.bytes())
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(p, _)| p)
            .collect();
        if diffs.len() != spec.d || diffs != plant.mutated_positions {
            return fail(format!(
                "plant {i} differs from consensus at {diffs:?}, recorded {:?} (d={})",
                plant.mutated_positions, spec.d
            ));
        }
    }
    Ok(())
}

pub fn generate_dataset(spec: &GenSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let background =
        WeightedIndex::new(spec.background_probs).map_err(|e| Error::InvalidSpec(e.to_string()))?;

    let consensus: Vec<u8> = (0..spec.l).map(|_| rng.gen_range(0..4u8)).collect();

    let mut sequences = Vec::with_capacity(spec.n);
    let mut plants = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let mut seq: Vec<u8> = (0..spec.t)
            .map(|_| background.sample(&mut rng) as u8)
            .collect();
        let offset = rng.gen_range(0..=spec.t - spec.l);
        let mut positions = rand::seq::index::sample(&mut rng, spec.l, spec.d).into_vec();
        positions.sort_unstable();

        let mut instance = consensus.clone();
        for &p in &positions {
            instance[p] = (instance[p] + rng.gen_range(1..4u8)) % 4;
        }
        seq[offset..offset + spec.l].copy_from_slice(&instance);

        sequences.push(codes_to_string(&seq));
        plants.push(Plant {
            sequence: i,
            offset,
            instance: codes_to_string(&instance),
            mutated_positions: positions,
        });
    }

    Ok(Dataset {
        sequences,
        truth: Truth {
            spec: spec.clone(),
            record: PlantRecord {
                consensus: codes_to_string(&consensus),
                plants,
            },
        },
    })
}

fn codes_to_string(codes: &[u8]) -> String {
    codes
        .iter()
        .map(|&c| Nucleotide::from_code(c).expect("2-bit code").symbol())
        .collect()
}

/// On-disk shape of the truth sidecar.
#[derive(Serialize, Deserialize)]
struct TruthFile {
    n: usize,
    t: usize,
    l: usize,
    d: usize,
    seed: u64,
    #[serde(default = "uniform")]
    background_probs: [f64; 4],
    consensus: String,
    plants: Vec<Plant>,
}

impl From<&Truth> for TruthFile {
    fn from(t: &Truth) -> Self {
        TruthFile {
            n: t.spec.n,
            t: t.spec.t,
            l: t.spec.l,
            d: t.spec.d,
            seed: t.spec.seed,
            background_probs: t.spec.background_probs,
            consensus: t.record.consensus.clone(),
            plants: t.record.plants.clone(),
        }
    }
}

impl From<TruthFile> for Truth {
    fn from(f: TruthFile) -> Self {
        Truth {
            spec: GenSpec {
                n: f.n,
                t: f.t,
                l: f.l,
                d: f.d,
                seed: f.seed,
                background_probs: f.background_probs,
            },
            record: PlantRecord {
                consensus: f.consensus,
                plants: f.plants,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetPaths {
    pub fasta: PathBuf,
    pub truth: PathBuf,
}

impl DatasetPaths {
    /// `<prefix>.fasta` and `<prefix>.truth`.
    pub fn from_prefix(prefix: impl AsRef<Path>) -> Self {
        let prefix = prefix.as_ref().as_os_str();
        let with = |ext: &str| {
            let mut s = prefix.to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        DatasetPaths {
            fasta: with(".fasta"),
            truth: with(".truth"),
        }
    }
}

/// Sidecar location for a FASTA path: same stem, `.truth` extension.
pub fn truth_path_for(fasta: &Path) -> PathBuf {
    fasta.with_extension("truth")
}

pub fn write_fasta<W: Write>(mut out: W, sequences: &[String]) -> Result<()> {
    for (i, seq) in sequences.iter().enumerate() {
        writeln!(out, ">seq{i}")?;
        for chunk in seq.as_bytes().chunks(FASTA_LINE_WIDTH) {
            out.write_all(chunk)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Sequences in file order. Bodies may span lines; blank lines are
/// ignored; residues are validated and upper-cased.
pub fn read_fasta<R: BufRead>(input: R) -> Result<Vec<String>> {
    let mut seqs: Vec<String> = Vec::new();
    let mut header_line = 0;
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.starts_with('>') {
            if let Some(last) = seqs.last() {
                if last.is_empty() {
                    return Err(Error::Parse {
                        line: header_line,
                        reason: "record has no sequence".into(),
                    });
                }
            }
            seqs.push(String::new());
            header_line = lineno;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let Some(current) = seqs.last_mut() else {
            return Err(Error::Parse {
                line: lineno,
                reason: "sequence data before first '>' header".into(),
            });
        };
        for ch in line.trim().chars() {
            let nt = u8::try_from(ch)
                .ok()
                .and_then(Nucleotide::from_ascii)
                .ok_or(Error::InvalidCharacter {
                    position: current.len(),
                    character: ch,
                })?;
            current.push(nt.symbol());
        }
    }
    match seqs.last() {
        None => Err(Error::Parse {
            line: 1,
            reason: "no FASTA records".into(),
        }),
        Some(s) if s.is_empty() => Err(Error::Parse {
            line: header_line,
            reason: "record has no sequence".into(),
        }),
        Some(_) => Ok(seqs),
    }
}

pub fn write_dataset(dataset: &Dataset, prefix: impl AsRef<Path>) -> Result<DatasetPaths> {
    dataset.check_consistency()?;
    let paths = DatasetPaths::from_prefix(prefix);
    if let Some(dir) = paths.fasta.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_fasta(
        BufWriter::new(File::create(&paths.fasta)?),
        &dataset.sequences,
    )?;

    let mut json = serde_json::to_string_pretty(&TruthFile::from(&dataset.truth))
        .map_err(std::io::Error::from)?;
    json.push('\n');
    fs::write(&paths.truth, json)?;
    Ok(paths)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedDataset {
    pub sequences: Vec<String>,
    pub truth: Option<Truth>,
}

pub fn read_truth(path: &Path) -> Result<Truth> {
    let text = fs::read_to_string(path)?;
    let file: TruthFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        reason: format!("{}: {e}", path.display()),
    })?;
    Ok(file.into())
}

/// Read a FASTA file and, if a `.truth` sidecar sits next to it, the
/// ground truth. A sidecar that disagrees with the FASTA is an error.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<LoadedDataset> {
    let path = path.as_ref();
    let sequences = read_fasta(BufReader::new(File::open(path)?))?;
    let sidecar = truth_path_for(path);
    let truth = if sidecar.is_file() && sidecar != path {
        let truth = read_truth(&sidecar)?;
        check_truth(&sequences, &truth)?;
        Some(truth)
    } else {
        None
    };
    Ok(LoadedDataset { sequences, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hamming(a: &str, b: &str) -> usize {
        a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count()
    }

    #[test]
    fn challenge_shaped_dataset() {
        let ds = generate_dataset(&GenSpec::new(20, 600, 15, 4, 7)).unwrap();
        assert_eq!(ds.sequences.len(), 20);
        let cons = &ds.record().consensus;
        for (seq, plant) in ds.sequences.iter().zip(&ds.record().plants) {
            assert_eq!(seq.len(), 600);
            let inst = &seq[plant.offset..plant.offset + 15];
            assert_eq!(inst, plant.instance);
            assert_eq!(hamming(cons, inst), 4);
            assert_eq!(plant.mutated_positions.len(), 4);
        }
    }

    #[test]
    fn zero_mutations_full_length() {
        let ds = generate_dataset(&GenSpec::new(1, 10, 10, 0, 99)).unwrap();
        assert_eq!(ds.sequences[0], ds.record().consensus);
        assert!(ds.record().plants[0].mutated_positions.is_empty());
    }

    #[test]
    fn deterministic_for_seed() {
        let spec = GenSpec::new(5, 50, 8, 2, 1234);
        let a = generate_dataset(&spec).unwrap();
        let b = generate_dataset(&spec).unwrap();
        assert_eq!(a, b);
        let c = generate_dataset(&GenSpec { seed: 1235, ..spec }).unwrap();
        assert_ne!(a.sequences, c.sequences);

        let dir = tempfile::tempdir().unwrap();
        let pa = write_dataset(&a, dir.path().join("a")).unwrap();
        let pb = write_dataset(&b, dir.path().join("b")).unwrap();
        assert_eq!(fs::read(&pa.fasta).unwrap(), fs::read(&pb.fasta).unwrap());
        assert_eq!(fs::read(&pa.truth).unwrap(), fs::read(&pb.truth).unwrap());
    }

    #[test]
    fn frozen_output_for_seed() {
        // Pins the documented RNG consumption order; any change to it
        // changes these bytes.
        let ds = generate_dataset(&GenSpec::new(2, 12, 5, 1, 42)).unwrap();
        assert_eq!(ds.sequences, vec!["CGCGATTGCGTT", "CAACGAGATAGG"]);
        let rec = ds.record();
        assert_eq!(rec.consensus, "AGATT");
        assert_eq!(
            rec.plants,
            vec![
                Plant {
                    sequence: 0,
                    offset: 2,
                    instance: "CGATT".into(),
                    mutated_positions: vec![0],
                },
                Plant {
                    sequence: 1,
                    offset: 5,
                    instance: "AGATA".into(),
                    mutated_positions: vec![4],
                },
            ]
        );
    }

    #[test]
    fn spec_validation() {
        let err = |s: GenSpec| match generate_dataset(&s) {
            Err(Error::InvalidSpec(m)) => m,
            other => panic!("expected InvalidSpec, got {other:?}"),
        };
        assert!(err(GenSpec::new(0, 10, 5, 1, 0)).contains("n >= 1"));
        assert!(err(GenSpec::new(1, 10, 20, 1, 0)).contains("motif longer than sequence"));
        assert!(err(GenSpec::new(1, 10, 5, 6, 0)).contains("d=6"));
        assert!(err(GenSpec::new(1, 10, 0, 0, 0)).contains("at least 1"));
        let mut s = GenSpec::new(1, 10, 5, 1, 0);
        s.background_probs = [0.5, 0.5, 0.5, -0.5];
        assert!(err(s.clone()).contains("non-negative"));
        s.background_probs = [0.3, 0.3, 0.3, 0.3];
        assert!(err(s).contains("sum to 1"));
    }

    #[test]
    fn skewed_background() {
        let mut spec = GenSpec::new(4, 200, 6, 1, 5);
        spec.background_probs = [1.0, 0.0, 0.0, 0.0];
        let ds = generate_dataset(&spec).unwrap();
        for (seq, p) in ds.sequences.iter().zip(&ds.record().plants) {
            let outside = seq[..p.offset].bytes().chain(seq[p.offset + 6..].bytes());
            assert!(outside.into_iter().all(|b| b == b'A'));
        }
    }

    #[test]
    fn fasta_format() {
        let mut buf = Vec::new();
        write_fasta(&mut buf, &["ACGTA".to_string(), "TTTTT".to_string()]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            ">seq0\nACGTA\n>seq1\nTTTTT\n"
        );

        let long = "ACGT".repeat(40);
        let mut buf = Vec::new();
        write_fasta(&mut buf, std::slice::from_ref(&long)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1].len(), 60);
        assert_eq!(lines[2].len(), 60);
        assert_eq!(lines[3].len(), 40);
        assert_eq!(read_fasta(text.as_bytes()).unwrap(), vec![long]);
    }

    #[test]
    fn fasta_parse_errors() {
        assert!(matches!(
            read_fasta("ACGT\n>x\nAC\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_fasta("".as_bytes()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            read_fasta(">a\n>b\nAC\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_fasta(">a\nACGN\n".as_bytes()),
            Err(Error::InvalidCharacter {
                position: 3,
                character: 'N'
            })
        ));
        assert_eq!(
            read_fasta(">a\r\nac\r\n\r\ngt\r\n".as_bytes()).unwrap(),
            vec!["ACGT".to_string()]
        );
    }

    #[test]
    fn sidecar_disagreeing_with_fasta_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let ds = generate_dataset(&GenSpec::new(3, 30, 6, 2, 8)).unwrap();
        let paths = write_dataset(&ds, dir.path().join("x")).unwrap();
        let mut tampered = ds.sequences.clone();
        let flip = |c: char| if c == 'A' { 'C' } else { 'A' };
        let off = ds.record().plants[1].offset;
        let mut bytes: Vec<char> = tampered[1].chars().collect();
        bytes[off] = flip(bytes[off]);
        tampered[1] = bytes.into_iter().collect();
        write_fasta(File::create(&paths.fasta).unwrap(), &tampered).unwrap();
        assert!(matches!(
            read_dataset(&paths.fasta),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn write_rejects_inconsistent_record() {
        let mut ds = generate_dataset(&GenSpec::new(2, 20, 5, 1, 3)).unwrap();
        ds.truth.record.plants[0].offset = 99;
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            write_dataset(&ds, dir.path().join("bad")),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn fasta_without_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("plain.fa");
        fs::write(&p, ">x\nacgt\n").unwrap();
        let loaded = read_dataset(&p).unwrap();
        assert_eq!(loaded.sequences, vec!["ACGT".to_string()]);
        assert!(loaded.truth.is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn dataset_round_trip(n in 1usize..6, t in 1usize..130, l in 1usize..12, d in 0usize..12, seed in any::<u64>()) {
            prop_assume!(l <= t && d <= l);
            let ds = generate_dataset(&GenSpec::new(n, t, l, d, seed)).unwrap();
            ds.check_consistency().unwrap();
            let dir = tempfile::tempdir().unwrap();
            let paths = write_dataset(&ds, dir.path().join("ds")).unwrap();
            let back = read_dataset(&paths.fasta).unwrap();
            prop_assert_eq!(&back.sequences, &ds.sequences);
            prop_assert_eq!(back.truth.as_ref(), Some(&ds.truth));
        }
    }
}
