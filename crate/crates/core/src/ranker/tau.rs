use std::collections::HashMap;
use std::hash::Hash;

use super::RankError;

/// Kendall's τ-a between two rankings of the same items, each given as
/// the items in ranked order. Runs in O(n log n) by counting inversions
/// with a merge sort. Rankings of fewer than two items are trivially
/// concordant and score 1.
pub fn kendall_tau<T: Eq + Hash>(rank_a: &[T], rank_b: &[T]) -> Result<f64, RankError> {
    let n = rank_a.len();
    if rank_b.len() != n {
        return Err(RankError::MismatchedItems(format!("lengths {} and {}", n, rank_b.len())));
    }
    let pos_b: HashMap<&T, usize> = rank_b.iter().enumerate().map(|(i, x)| (x, i)).collect();
    if pos_b.len() != n {
        return Err(RankError::MismatchedItems("duplicate items in second ranking".into()));
    }
    let mut seq = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for item in rank_a {
        let &p = pos_b
            .get(item)
            .ok_or_else(|| RankError::MismatchedItems("item sets differ".into()))?;
        if std::mem::replace(&mut seen[p], true) {
            return Err(RankError::MismatchedItems("duplicate items in first ranking".into()));
        }
        seq.push(p);
    }
    if n < 2 {
        return Ok(1.0);
    }
    let total = (n as u64) * (n as u64 - 1) / 2;
    let discordant = count_inversions(&mut seq);
    let concordant = total - discordant;
    Ok((concordant as i64 - discordant as i64) as f64 / total as f64)
}

fn count_inversions(v: &mut [usize]) -> u64 {
    let mut buf = vec![0; v.len()];
    merge_count(v, &mut buf)
}

fn merge_count(v: &mut [usize], buf: &mut [usize]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            inv += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    inv
}
