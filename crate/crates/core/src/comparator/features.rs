use std::collections::BTreeMap;

use crate::text::tokens;

pub const DEFAULT_DIM: usize = 1 << 18;

/// Number of trailing indices reserved for the dense pair features.
const RESERVED: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    A,
    B,
}

impl Side {
    fn tag(self) -> u8 {
        match self {
            Side::A => b'A',
            Side::B => b'B',
        }
    }
}

/// 64-bit FNV-1a. Stable across platforms and releases, unlike
/// `DefaultHasher`.
pub(crate) fn fnv1a(parts: &[&[u8]]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            hash ^= 0x1f;
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
        for &b in *part {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
    }
    hash
}

pub(crate) fn shared_index(dim: usize) -> usize {
    dim - 2
}

pub(crate) fn length_diff_index(dim: usize) -> usize {
    dim - 1
}

fn ngram_index(side: Side, kind: u8, gram: &str, dim: usize) -> u32 {
    let h = fnv1a(&[&[side.tag()], &[kind], gram.as_bytes()]);
    (h % (dim - RESERVED) as u64) as u32
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub dim: usize,
    pub values: BTreeMap<u32, f64>,
}

impl FeatureVector {
    pub fn get(&self, index: usize) -> f64 {
        self.values.get(&(index as u32)).copied().unwrap_or(0.0)
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.values.iter().map(|(&i, &v)| weights[i as usize] * v).sum()
    }
}

/// Per-text state reused across many comparisons: hashed n-gram indices
/// for both sides plus the sorted token list.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedText {
    pub(crate) side_a: Vec<u32>,
    pub(crate) side_b: Vec<u32>,
    pub(crate) sorted_tokens: Vec<String>,
}

impl PreparedText {
    pub fn new(text: &str, dim: usize) -> Self {
        assert!(dim.is_power_of_two() && dim >= 4, "feature dimension must be a power of two >= 4");
        let toks = tokens(text);
        let grams = |side: Side| -> Vec<u32> {
            let mut idx: Vec<u32> = toks.iter().map(|t| ngram_index(side, b'u', t, dim)).collect();
            idx.extend(
                toks.windows(2)
                    .map(|w| ngram_index(side, b'b', &format!("{} {}", w[0], w[1]), dim)),
            );
            idx
        };
        let side_a = grams(Side::A);
        let side_b = grams(Side::B);
        let mut sorted_tokens = toks;
        sorted_tokens.sort();
        PreparedText {
            side_a,
            side_b,
            sorted_tokens,
        }
    }

    pub fn token_count(&self) -> usize {
        self.sorted_tokens.len()
    }

    pub(crate) fn grams(&self, side: Side) -> &[u32] {
        match side {
            Side::A => &self.side_a,
            Side::B => &self.side_b,
        }
    }
}

/// Size of the token multiset intersection.
pub(crate) fn shared_tokens(a: &PreparedText, b: &PreparedText) -> usize {
    let (x, y) = (&a.sorted_tokens, &b.sorted_tokens);
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub(crate) fn pair_vector(a: &PreparedText, b: &PreparedText, dim: usize) -> FeatureVector {
    let mut values = BTreeMap::new();
    for &i in a.grams(Side::A).iter().chain(b.grams(Side::B)) {
        *values.entry(i).or_insert(0.0) += 1.0;
    }
    let shared = shared_tokens(a, b) as f64;
    if shared != 0.0 {
        values.insert(shared_index(dim) as u32, shared);
    }
    let diff = a.token_count() as f64 - b.token_count() as f64;
    if diff != 0.0 {
        values.insert(length_diff_index(dim) as u32, diff);
    }
    FeatureVector { dim, values }
}

/// Side-tagged unigram and bigram counts for both texts, plus the shared
/// token count and the token-length difference (a minus b) in the two
/// highest indices. `dim` must be a power of two.
pub fn featurize_pair(text_a: &str, text_b: &str, dim: usize) -> FeatureVector {
    pair_vector(&PreparedText::new(text_a, dim), &PreparedText::new(text_b, dim), dim)
}
