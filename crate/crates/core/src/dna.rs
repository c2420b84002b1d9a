//! DNA alphabet, 2-bit packing and the Hamming matching kernels.
//!
//! Nucleotides are coded `A=0, C=1, G=2, T=3`. An l-mer is packed
//! big-endian into a `u64` (first nucleotide in the most significant
//! position), so the packed value of an l-mer *is* its lexicographic rank.

use std::fmt;

use crate::error::{Error, Result};

/// Longest supported motif: 31 nucleotides keep `4^l` inside a `u64`.
pub const MAX_MOTIF_LEN: usize = 31;

const NT_PER_WORD: usize = 32;
const LOW_BITS: u64 = 0x5555_5555_5555_5555;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Nucleotide {
    A = 0,
    C = 1,
    G = 2,
    T = 3,
}

impl Nucleotide {
    pub const ALL: [Nucleotide; 4] = [Nucleotide::A, Nucleotide::C, Nucleotide::G, Nucleotide::T];

    #[inline]
    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Case-insensitive; anything outside `ACGT` (including `N`) is rejected.
    #[inline]
    pub fn from_ascii(byte: u8) -> Option<Self> {
        match byte {
            b'A' | b'a' => Some(Nucleotide::A),
            b'C' | b'c' => Some(Nucleotide::C),
            b'G' | b'g' => Some(Nucleotide::G),
            b'T' | b't' => Some(Nucleotide::T),
            _ => None,
        }
    }

    #[inline]
    pub fn symbol(self) -> char {
        b"ACGT"[self as usize] as char
    }
}

impl fmt::Display for Nucleotide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A DNA sequence packed 2 bits per nucleotide, 32 nucleotides per word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EncodedSequence {
    words: Vec<u64>,
    len: usize,
}

impl EncodedSequence {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, index: usize) -> Option<Nucleotide> {
        if index >= self.len {
            return None;
        }
        let shift = 62 - 2 * (index % NT_PER_WORD);
        Nucleotide::from_code(((self.words[index / NT_PER_WORD] >> shift) & 3) as u8)
    }

    pub fn iter(&self) -> impl Iterator<Item = Nucleotide> + '_ {
        (0..self.len).map(move |i| self.get(i).expect("index in range"))
    }

    /// Packed code of the `l` nucleotides starting at `offset`.
    ///
    /// Caller guarantees `1 <= l <= MAX_MOTIF_LEN` and `offset + l <= len`.
    #[inline]
    fn packed_slice(&self, offset: usize, l: usize) -> u64 {
        let bit = 2 * offset;
        let word = bit / 64;
        let shift = bit % 64;
        let mut hi = self.words[word] << shift;
        if shift != 0 && word + 1 < self.words.len() {
            hi |= self.words[word + 1] >> (64 - shift);
        }
        hi >> (64 - 2 * l)
    }
}

impl fmt::Display for EncodedSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for nt in self.iter() {
            write!(f, "{nt}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for EncodedSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        encode_sequence(s)
    }
}

pub fn encode_sequence(text: &str) -> Result<EncodedSequence> {
    if text.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut words = vec![0u64; text.len().div_ceil(NT_PER_WORD)];
    for (i, ch) in text.char_indices() {
        let nt = u8::try_from(ch)
            .ok()
            .and_then(Nucleotide::from_ascii)
            .ok_or(Error::InvalidCharacter {
                position: i,
                character: ch,
            })?;
        words[i / NT_PER_WORD] |= u64::from(nt.code()) << (62 - 2 * (i % NT_PER_WORD));
    }
    Ok(EncodedSequence {
        words,
        len: text.len(),
    })
}

fn check_motif_len(l: usize) -> Result<()> {
    if l == 0 || l > MAX_MOTIF_LEN {
        Err(Error::InvalidMotifLength(l))
    } else {
        Ok(())
    }
}

/// `4^l`, the size of the candidate space.
pub fn rank_limit(l: usize) -> Result<u64> {
    check_motif_len(l)?;
    Ok(1u64 << (2 * l))
}

/// One l-mer, identified by its lexicographic rank in `[0, 4^l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LMerRank {
    rank: u64,
    l: u8,
}

impl LMerRank {
    pub fn new(rank: u64, l: usize) -> Result<Self> {
        let limit = rank_limit(l)?;
        if rank >= limit {
            return Err(Error::RankOutOfRange { rank, l });
        }
        Ok(LMerRank { rank, l: l as u8 })
    }

    /// Caller guarantees the rank is valid for `l`.
    #[inline]
    pub(crate) fn new_unchecked(rank: u64, l: usize) -> Self {
        debug_assert!((1..=MAX_MOTIF_LEN).contains(&l) && rank < (1u64 << (2 * l)));
        LMerRank { rank, l: l as u8 }
    }

    #[inline]
    pub fn rank(self) -> u64 {
        self.rank
    }

    #[inline]
    pub fn len(self) -> usize {
        self.l as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn nucleotides(self) -> Vec<Nucleotide> {
        (0..self.len())
            .map(|i| {
                let shift = 2 * (self.len() - 1 - i);
                Nucleotide::from_code(((self.rank >> shift) & 3) as u8).expect("2-bit code")
            })
            .collect()
    }
}

impl fmt::Display for LMerRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for nt in self.nucleotides() {
            write!(f, "{nt}")?;
        }
        Ok(())
    }
}

pub fn encode_lmer(text: &str) -> Result<LMerRank> {
    if text.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_motif_len(text.len())?;
    let seq = encode_sequence(text)?;
    Ok(LMerRank::new_unchecked(
        seq.packed_slice(0, text.len()),
        text.len(),
    ))
}

pub fn decode_lmer(rank: LMerRank) -> String {
    rank.to_string()
}

/// Validating variant for raw `(rank, l)` pairs.
pub fn decode_rank(rank: u64, l: usize) -> Result<String> {
    LMerRank::new(rank, l).map(decode_lmer)
}

/// A length-l substring of a sequence, carried as its packed code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub offset: usize,
    pub lmer: LMerRank,
}

impl Window {
    pub fn len(&self) -> usize {
        self.lmer.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// All `len - l + 1` windows of `seq`, in offset order.
pub fn extract_windows(seq: &EncodedSequence, l: usize) -> Result<Vec<Window>> {
    Ok(window_codes(seq, l)?
        .into_iter()
        .enumerate()
        .map(|(offset, code)| Window {
            offset,
            lmer: LMerRank::new_unchecked(code, l),
        })
        .collect())
}

/// Packed window codes only; this is what the search loops scan.
pub fn window_codes(seq: &EncodedSequence, l: usize) -> Result<Vec<u64>> {
    check_motif_len(l)?;
    if l > seq.len() {
        return Err(Error::MotifLongerThanSequence { l, len: seq.len() });
    }
    let mask = (1u64 << (2 * l)) - 1;
    let mut codes = Vec::with_capacity(seq.len() - l + 1);
    let mut code = seq.packed_slice(0, l);
    codes.push(code);
    for end in l..seq.len() {
        let next = seq.get(end).expect("index in range").code();
        code = ((code << 2) | u64::from(next)) & mask;
        codes.push(code);
    }
    Ok(codes)
}

/// Mismatch count between two packed l-mers: XOR, fold each 2-bit lane
/// to one bit, popcount.
#[inline(always)]
pub fn packed_mismatches(a: u64, b: u64) -> u32 {
    let x = a ^ b;
    ((x | (x >> 1)) & LOW_BITS).count_ones()
}

/// Plain per-position comparison; the oracle for [`packed_mismatches`].
pub fn reference_hamming(a: &[Nucleotide], b: &[Nucleotide]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

pub fn hamming_distance(candidate: LMerRank, window: &Window) -> Result<usize> {
    if candidate.len() != window.len() {
        return Err(Error::LengthMismatch {
            left: candidate.len(),
            right: window.len(),
        });
    }
    Ok(packed_mismatches(candidate.rank(), window.lmer.rank()) as usize)
}

pub fn matches_within(candidate: LMerRank, window: &Window, d: usize) -> Result<bool> {
    hamming_distance(candidate, window).map(|dist| dist <= d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn codes(s: &EncodedSequence) -> Vec<u8> {
        s.iter().map(Nucleotide::code).collect()
    }

    fn window(s: &str) -> Window {
        Window {
            offset: 0,
            lmer: encode_lmer(s).unwrap(),
        }
    }

    #[test]
    fn encode_examples() {
        let s = encode_sequence("ACGT").unwrap();
        assert_eq!(codes(&s), vec![0, 1, 2, 3]);
        assert_eq!(s.len(), 4);

        let s = encode_sequence("aCgT").unwrap();
        assert_eq!(codes(&s), vec![0, 1, 2, 3]);
        assert_eq!(s.to_string(), "ACGT");

        match encode_sequence("ACGN") {
            Err(Error::InvalidCharacter {
                position: 3,
                character: 'N',
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(encode_sequence(""), Err(Error::EmptyInput)));
        assert!(matches!(
            encode_sequence("ACé"),
            Err(Error::InvalidCharacter { position: 2, .. })
        ));
    }

    #[test]
    fn nucleotide_bijection() {
        for code in 0..4u8 {
            let nt = Nucleotide::from_code(code).unwrap();
            assert_eq!(nt.code(), code);
            assert_eq!(Nucleotide::from_ascii(nt.symbol() as u8), Some(nt));
        }
        assert_eq!(Nucleotide::from_code(4), None);
        assert!(Nucleotide::A < Nucleotide::C && Nucleotide::G < Nucleotide::T);
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_rank(0, 3).unwrap(), "AAA");
        assert_eq!(decode_rank(63, 3).unwrap(), "TTT");
        assert_eq!(decode_rank(27, 3).unwrap(), "CGT");
        assert!(matches!(
            decode_rank(64, 3),
            Err(Error::RankOutOfRange { rank: 64, l: 3 })
        ));
        assert!(matches!(
            LMerRank::new(0, 0),
            Err(Error::InvalidMotifLength(0))
        ));
        assert!(matches!(
            LMerRank::new(0, 32),
            Err(Error::InvalidMotifLength(32))
        ));
        assert_eq!(decode_rank((1u64 << 62) - 1, 31).unwrap(), "T".repeat(31));
    }

    #[test]
    fn rank_order_matches_lexicographic_enumeration() {
        // Independent enumeration: nested loops over the alphabet in order.
        let mut all = Vec::new();
        for a in "ACGT".chars() {
            for b in "ACGT".chars() {
                for c in "ACGT".chars() {
                    all.push(format!("{a}{b}{c}"));
                }
            }
        }
        for (i, s) in all.iter().enumerate() {
            assert_eq!(&decode_rank(i as u64, 3).unwrap(), s);
            assert_eq!(encode_lmer(s).unwrap().rank(), i as u64);
        }
        assert_eq!(all[27], "CGT");
    }

    #[test]
    fn rank_bijection_exhaustive_small_l() {
        for l in 1..=6 {
            let mut prev: Option<String> = None;
            for r in 0..rank_limit(l).unwrap() {
                let s = decode_rank(r, l).unwrap();
                assert_eq!(encode_lmer(&s).unwrap().rank(), r);
                if let Some(p) = prev {
                    assert!(p < s);
                }
                prev = Some(s);
            }
        }
    }

    #[test]
    fn window_examples() {
        let s = encode_sequence(&"ACGT".repeat(150)).unwrap();
        assert_eq!(s.len(), 600);
        assert_eq!(extract_windows(&s, 15).unwrap().len(), 586);

        let s = encode_sequence("GATTACA").unwrap();
        let w = extract_windows(&s, 7).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].offset, 0);
        assert_eq!(w[0].lmer.to_string(), "GATTACA");

        let s = encode_sequence("ACGTA").unwrap();
        let w: Vec<_> = extract_windows(&s, 2)
            .unwrap()
            .into_iter()
            .map(|w| (w.offset, w.lmer.to_string()))
            .collect();
        assert_eq!(
            w,
            vec![
                (0, "AC".to_string()),
                (1, "CG".to_string()),
                (2, "GT".to_string()),
                (3, "TA".to_string())
            ]
        );

        assert!(matches!(
            extract_windows(&s, 6),
            Err(Error::MotifLongerThanSequence { l: 6, len: 5 })
        ));
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(
            hamming_distance(encode_lmer("ACGT").unwrap(), &window("ACGT")).unwrap(),
            0
        );
        assert_eq!(
            hamming_distance(encode_lmer("AAAA").unwrap(), &window("TTTT")).unwrap(),
            4
        );
        assert_eq!(
            hamming_distance(encode_lmer("ACGTA").unwrap(), &window("ACCTA")).unwrap(),
            1
        );
        assert!(matches!(
            hamming_distance(encode_lmer("ACG").unwrap(), &window("ACGT")),
            Err(Error::LengthMismatch { left: 3, right: 4 })
        ));

        assert!(matches_within(encode_lmer("ACGT").unwrap(), &window("ACGT"), 0).unwrap());
        assert!(!matches_within(encode_lmer("AAAA").unwrap(), &window("TTTT"), 3).unwrap());
        assert!(matches_within(encode_lmer("ACGTA").unwrap(), &window("ACCTA"), 1).unwrap());
    }

    fn dna(max: usize) -> impl Strategy<Value = String> {
        proptest::collection::vec(
            prop_oneof![Just('A'), Just('C'), Just('G'), Just('T')],
            1..max,
        )
        .prop_map(|v| v.into_iter().collect())
    }

    fn nts(s: &str) -> Vec<Nucleotide> {
        s.bytes()
            .map(|b| Nucleotide::from_ascii(b).unwrap())
            .collect()
    }

    proptest! {
        #[test]
        fn sequence_round_trip(s in dna(300)) {
            prop_assert_eq!(encode_sequence(&s).unwrap().to_string(), s);
        }

        #[test]
        fn lowercase_normalizes(s in dna(100)) {
            let lower = s.to_ascii_lowercase();
            prop_assert_eq!(encode_sequence(&lower).unwrap(), encode_sequence(&s).unwrap());
        }

        #[test]
        fn rank_bijection_sampled(l in 1usize..=12, seed in any::<u64>()) {
            let r = seed % rank_limit(l).unwrap();
            let s = decode_rank(r, l).unwrap();
            prop_assert_eq!(s.len(), l);
            prop_assert_eq!(encode_lmer(&s).unwrap().rank(), r);
            let r2 = seed.rotate_left(17) % rank_limit(l).unwrap();
            let s2 = decode_rank(r2, l).unwrap();
            prop_assert_eq!(r < r2, s < s2);
        }

        #[test]
        fn windows_equal_slices(s in dna(120), l in 1usize..=31) {
            prop_assume!(l <= s.len());
            let seq = encode_sequence(&s).unwrap();
            let w = extract_windows(&seq, l).unwrap();
            prop_assert_eq!(w.len(), s.len() - l + 1);
            for win in &w {
                prop_assert_eq!(win.lmer.to_string(), &s[win.offset..win.offset + l]);
            }
        }

        #[test]
        fn packed_kernel_agrees_with_reference(
            (a, b) in (1usize..=31).prop_flat_map(|l| (
                proptest::collection::vec(0u8..4, l),
                proptest::collection::vec(0u8..4, l),
            ))
        ) {
            let sa: String = a.iter().map(|&c| Nucleotide::from_code(c).unwrap().symbol()).collect();
            let sb: String = b.iter().map(|&c| Nucleotide::from_code(c).unwrap().symbol()).collect();
            let packed = packed_mismatches(encode_lmer(&sa).unwrap().rank(), encode_lmer(&sb).unwrap().rank());
            prop_assert_eq!(packed as usize, reference_hamming(&nts(&sa), &nts(&sb)).unwrap());
        }

        #[test]
        fn hamming_metric_axioms(
            (x, y, z) in (1usize..=31).prop_flat_map(|l| (
                0u64..(1u64 << (2 * l)),
                0u64..(1u64 << (2 * l)),
                0u64..(1u64 << (2 * l)),
            ).prop_map(move |(x, y, z)| (
                LMerRank::new(x, l).unwrap(),
                LMerRank::new(y, l).unwrap(),
                LMerRank::new(z, l).unwrap(),
            )))
        ) {
            let w = |r: LMerRank| Window { offset: 0, lmer: r };
            let dxy = hamming_distance(x, &w(y)).unwrap();
            prop_assert_eq!(hamming_distance(x, &w(x)).unwrap(), 0);
            prop_assert_eq!(dxy, hamming_distance(y, &w(x)).unwrap());
            prop_assert!(hamming_distance(x, &w(z)).unwrap() <= dxy + hamming_distance(y, &w(z)).unwrap());
            prop_assert!(dxy <= x.len());
        }
    }
}
