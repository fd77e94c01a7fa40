use std::collections::BTreeMap;

use super::{AgreementMatrix, RankError};
use crate::text::tokens;

type TermVector = BTreeMap<String, f64>;

fn normalized_tf(text: &str) -> TermVector {
    let mut tf = TermVector::new();
    for t in tokens(text) {
        *tf.entry(t).or_insert(0.0) += 1.0;
    }
    let norm = tf.values().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        tf.values_mut().for_each(|v| *v /= norm);
    }
    tf
}

fn dot(a: &TermVector, b: &TermVector) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter_map(|(t, v)| large.get(t).map(|w| v * w))
        .sum()
}

/// Topical-similarity baseline: each outlet is the mean of its texts'
/// L2-normalized term-frequency vectors; entries are cosine similarities
/// between those centroids. An outlet whose texts hold no tokens has a zero
/// centroid and similarity 0 to everything, itself included.
pub fn centroid_similarity(corpora: &BTreeMap<String, Vec<String>>) -> Result<AgreementMatrix, RankError> {
    if corpora.is_empty() {
        return Err(RankError::EmptyInputs);
    }
    let mut centroids = Vec::with_capacity(corpora.len());
    for (outlet, texts) in corpora {
        if texts.is_empty() {
            return Err(RankError::EmptyCorpus(outlet.clone()));
        }
        let mut c = TermVector::new();
        for text in texts {
            for (t, v) in normalized_tf(text) {
                *c.entry(t).or_insert(0.0) += v;
            }
        }
        let n = texts.len() as f64;
        c.values_mut().for_each(|v| *v /= n);
        let norm = dot(&c, &c).sqrt();
        centroids.push((c, norm));
    }
    let k = centroids.len();
    let mut values = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let (ci, ni) = &centroids[i];
            let (cj, nj) = &centroids[j];
            let cos = if *ni == 0.0 || *nj == 0.0 {
                0.0
            } else if i == j {
                1.0
            } else {
                (dot(ci, cj) / (ni * nj)).clamp(-1.0, 1.0)
            };
            values[i][j] = cos;
            values[j][i] = cos;
        }
    }
    Ok(AgreementMatrix {
        outlets: corpora.keys().cloned().collect(),
        values,
    })
}
