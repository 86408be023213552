//! Small combinatorial helpers: binomials, subset enumeration, shuffle signs.

use alloc::vec::Vec;

/// Exact binomial coefficient. Panics on overflow of u64, which does not
/// happen at the dimensions this crate works with.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial overflow")
}

/// Number of monomials of total degree `e` in `nvars` variables.
pub fn monomial_count(nvars: usize, e: u32) -> u64 {
    binomial(e as u64 + nvars as u64 - 1, nvars as u64 - 1)
}

/// All k-element subsets of `universe`, in lexicographic order.
pub fn k_subsets(universe: &[u8], k: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    if k > universe.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| universe[i]).collect());
        // advance the combination
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if idx[pos] != pos + universe.len() - k {
                idx[pos] += 1;
                for j in pos + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if pos == 0 {
                return out;
            }
        }
        if k == 0 {
            return out;
        }
    }
}

/// Merge two strictly increasing index lists into one, returning the merged
/// list and the shuffle sign, or `None` when they share an element.
///
/// The sign is the parity of the number of transpositions needed to sort the
/// concatenation `a ++ b`, i.e. the number of pairs `(x, y)` with `x` in `a`,
/// `y` in `b` and `y < x`.
pub fn merge_sign(a: &[u8], b: &[u8]) -> Option<(Vec<u8>, bool)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            // b[j] crosses every remaining element of a
            inversions += a.len() - i;
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, inversions % 2 == 1))
}
