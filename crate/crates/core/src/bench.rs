//! Timed experiment harness: runtime vs. motif length, and speedup vs.
//! worker count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::{generate_dataset, GenSpec};
use crate::error::{Error, Result};
use crate::parallel::parallel_search_windows;
use crate::search::MotifProblem;

pub const CSV_HEADER: &str = "l,d,workers,rep,wall_seconds,candidates,motifs";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchSpec {
    /// `(l, d)` pairs.
    pub instances: Vec<(usize, usize)>,
    pub n: usize,
    pub t: usize,
    pub seed: u64,
    /// Distinct datasets per instance; repetition `r` uses dataset
    /// `r % datasets_per_instance`.
    pub datasets_per_instance: usize,
    pub workers: Vec<usize>,
    pub repetitions: usize,
    /// One discarded run per (instance, worker count) before timing.
    pub warmup: bool,
    /// CSV destination; rows are flushed as they are produced.
    pub output: Option<PathBuf>,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec::desk()
    }
}

impl BenchSpec {
    /// Runs in minutes on a desktop.
    pub fn desk() -> Self {
        BenchSpec {
            instances: vec![(9, 2), (10, 2), (11, 3)],
            n: 20,
            t: 600,
            seed: 42,
            datasets_per_instance: 3,
            workers: vec![1, 2, 4],
            repetitions: 3,
            warmup: true,
            output: None,
        }
    }

    /// The published instance set on 20 x 600 nt. The (15, 4) serial run
    /// alone takes more than a day on older hardware.
    pub fn full_scale() -> Self {
        BenchSpec {
            instances: vec![(11, 3), (12, 3), (13, 4), (14, 4), (15, 4)],
            workers: vec![1, 2, 4, 8, 16, 32, 64],
            datasets_per_instance: 1,
            repetitions: 1,
            ..BenchSpec::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.instances.is_empty() {
            return bad("no (l, d) instances");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1");
        }
        if self.datasets_per_instance == 0 {
            return bad("datasets_per_instance must be >= 1");
        }
        if self.workers.is_empty() || self.workers.contains(&0) {
            return bad("worker counts must be >= 1");
        }
        if self.workers.windows(2).any(|w| w[0] >= w[1]) {
            return bad("worker counts must be strictly ascending");
        }
        for &(l, d) in &self.instances {
            GenSpec::new(self.n, self.t, l, d, 0).validate()?;
            if l > crate::dna::MAX_MOTIF_LEN {
                return Err(Error::InvalidMotifLength(l));
            }
        }
        Ok(())
    }

    /// Seed for dataset `k` of instance `(l, d)`: a SplitMix64 step over
    /// the base seed mixed with the instance coordinates.
    pub fn dataset_seed(&self, l: usize, d: usize, k: usize) -> u64 {
        let mut z = self
            .seed
            .wrapping_add((l as u64) << 40)
            .wrapping_add((d as u64) << 20)
            .wrapping_add(k as u64)
            .wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub l: usize,
    pub d: usize,
    pub workers: usize,
    pub rep: usize,
    pub wall_seconds: f64,
    pub candidates: u64,
    pub motifs: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryCell {
    pub l: usize,
    pub d: usize,
    pub workers: usize,
    pub runs: usize,
    pub mean_seconds: f64,
    pub median_seconds: f64,
    /// `mean(W=1) / mean(W)`; `None` when no single-worker runs exist.
    pub speedup: Option<f64>,
    /// Same ratio over medians.
    pub speedup_median: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct BenchSummary {
    pub cells: Vec<SummaryCell>,
}

impl BenchSummary {
    pub fn cell(&self, l: usize, d: usize, workers: usize) -> Option<&SummaryCell> {
        self.cells
            .iter()
            .find(|c| c.l == l && c.d == d && c.workers == workers)
    }
}

#[derive(Clone, Debug)]
pub struct BenchOutcome {
    pub records: Vec<BenchRecord>,
    pub summary: BenchSummary,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

struct CsvSink {
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvSink {
    fn create(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(BufWriter::new(File::create(path)?));
        Ok(CsvSink { writer })
    }

    fn push(&mut self, rec: &BenchRecord) -> Result<()> {
        self.writer.serialize(rec)?;
        self.writer.flush()?;
        Ok(())
    }
}

/// One record per (instance, worker count, repetition). Searches run one
/// at a time; timing covers the search only, not window extraction.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchOutcome> {
    run_bench_with(spec, |_| {})
}

/// As [`run_bench`], calling `progress` after each record.
pub fn run_bench_with(
    spec: &BenchSpec,
    mut progress: impl FnMut(&BenchRecord),
) -> Result<BenchOutcome> {
    spec.validate()?;
    let mut sink = spec.output.as_deref().map(CsvSink::create).transpose()?;
    let mut records = Vec::new();

    for &(l, d) in &spec.instances {
        let tables = (0..spec.datasets_per_instance)
            .map(|k| {
                let gen = GenSpec::new(spec.n, spec.t, l, d, spec.dataset_seed(l, d, k));
                let ds = generate_dataset(&gen)?;
                Ok(MotifProblem::from_strs(&ds.sequences, l, d)?.window_table())
            })
            .collect::<Result<Vec<_>>>()?;

        let mut motif_counts: BTreeMap<usize, u64> = BTreeMap::new();
        for &w in &spec.workers {
            if spec.warmup {
                parallel_search_windows(&tables[0], w)?;
            }
            for rep in 0..spec.repetitions {
                let table = &tables[rep % tables.len()];
                let res = parallel_search_windows(table, w)?;
                let rec = BenchRecord {
                    l,
                    d,
                    workers: w,
                    rep,
                    wall_seconds: res.merged.elapsed.as_secs_f64().max(1e-9),
                    candidates: res.merged.candidates_examined,
                    motifs: res.merged.motifs.len() as u64,
                };
                let expected = *motif_counts.entry(rep).or_insert(rec.motifs);
                if expected != rec.motifs {
                    return Err(Error::Consistency(format!(
                        "({l},{d}) rep {rep}: {} motifs with {w} workers, {expected} earlier",
                        rec.motifs
                    )));
                }
                if let Some(s) = sink.as_mut() {
                    s.push(&rec)?;
                }
                progress(&rec);
                records.push(rec);
            }
        }
    }

    let summary = summarize(&records);
    Ok(BenchOutcome { records, summary })
}

/// Per-cell mean/median and speedup relative to the single-worker cell of
/// the same instance. Cells appear in first-seen order.
pub fn summarize(records: &[BenchRecord]) -> BenchSummary {
    let mut order: Vec<(usize, usize, usize)> = Vec::new();
    let mut times: BTreeMap<(usize, usize, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        let key = (r.l, r.d, r.workers);
        times
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r.wall_seconds);
    }
    let stats = |key: &(usize, usize, usize)| times.get(key).map(|v| (mean(v), median(v)));

    let cells = order
        .iter()
        .map(|key @ &(l, d, workers)| {
            let (mean_seconds, median_seconds) = stats(key).expect("key present");
            let base = stats(&(l, d, 1));
            SummaryCell {
                l,
                d,
                workers,
                runs: times[key].len(),
                mean_seconds,
                median_seconds,
                speedup: base.map(|(m, _)| m / mean_seconds),
                speedup_median: base.map(|(_, m)| m / median_seconds),
            }
        })
        .collect();
    BenchSummary { cells }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingCurve {
    pub d: usize,
    pub workers: usize,
    /// `(l, mean wall seconds)`, ascending in `l`.
    pub points: Vec<(usize, f64)>,
    /// `runtime(next) / runtime(prev)` for consecutive points.
    pub ratios: Vec<f64>,
}

/// Mean runtime per `l` for a fixed `(d, workers)` and the growth ratio
/// between consecutive lengths.
pub fn scaling_curve(records: &[BenchRecord], d: usize, workers: usize) -> ScalingCurve {
    let mut by_l: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.d == d && r.workers == workers) {
        by_l.entry(r.l).or_default().push(r.wall_seconds);
    }
    let points: Vec<(usize, f64)> = by_l.iter().map(|(&l, v)| (l, mean(v))).collect();
    let ratios = points.windows(2).map(|w| w[1].1 / w[0].1).collect();
    ScalingCurve {
        d,
        workers,
        points,
        ratios,
    }
}

pub fn write_csv(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<()> {
    if records.is_empty() {
        std::fs::write(path, format!("{CSV_HEADER}\n"))?;
        return Ok(());
    }
    let mut sink = CsvSink::create(path.as_ref())?;
    for r in records {
        sink.writer.serialize(r)?;
    }
    sink.writer.flush()?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<BenchRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            reason: format!("unexpected header {header:?}"),
        });
    }
    Ok(reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()?)
}

/// Aligned text tables: mean/median seconds per cell, then speedup with
/// one row per instance and one column per worker count.
pub fn render_summary(summary: &BenchSummary) -> String {
    let mut instances: Vec<(usize, usize)> = Vec::new();
    let mut workers: Vec<usize> = Vec::new();
    for c in &summary.cells {
        if !instances.contains(&(c.l, c.d)) {
            instances.push((c.l, c.d));
        }
        if !workers.contains(&c.workers) {
            workers.push(c.workers);
        }
    }
    workers.sort_unstable();

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<9} {:>7} {:>5} {:>12} {:>12}",
        "(l,d)", "workers", "runs", "mean_s", "median_s"
    );
    for c in &summary.cells {
        let _ = writeln!(
            out,
            "{:<9} {:>7} {:>5} {:>12.6} {:>12.6}",
            format!("({},{})", c.l, c.d),
            c.workers,
            c.runs,
            c.mean_seconds,
            c.median_seconds
        );
    }

    out.push_str("\nSpeedup over 1 worker (mean wall time)\n");
    let _ = write!(out, "{:<9}", "(l,d)");
    for w in &workers {
        let _ = write!(out, " {:>8}", format!("W={w}"));
    }
    out.push('\n');
    let mut speedups_per_w: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(l, d) in &instances {
        let _ = write!(out, "{:<9}", format!("({l},{d})"));
        for &w in &workers {
            match summary.cell(l, d, w).and_then(|c| c.speedup) {
                Some(s) => {
                    speedups_per_w.entry(w).or_default().push(s);
                    let _ = write!(out, " {s:>8.3}");
                }
                None => {
                    let _ = write!(out, " {:>8}", "-");
                }
            }
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<9}", "average");
    for w in &workers {
        match speedups_per_w.get(w) {
            Some(v) => {
                let _ = write!(out, " {:>8.3}", mean(v));
            }
            None => {
                let _ = write!(out, " {:>8}", "-");
            }
        }
    }
    out.push('\n');
    out
}

pub fn write_summary(summary: &BenchSummary, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_summary(summary))?;
    Ok(())
}
