//! Helpers for sorted `k`-subsets represented as ascending `Vec<usize>`.

/// Inserts `j` into the ascending slice `base`, returning a new ascending set.
pub(crate) fn with_element(base: &[usize], j: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(base.len() + 1);
    let at = base.partition_point(|&x| x < j);
    out.extend_from_slice(&base[..at]);
    out.push(j);
    out.extend_from_slice(&base[at..]);
    out
}

/// Removes the element at `index`.
pub(crate) fn without_index(set: &[usize], index: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(set.len().saturating_sub(1));
    out.extend_from_slice(&set[..index]);
    out.extend_from_slice(&set[index + 1..]);
    out
}

/// `set - remove + add`, assuming `remove ∈ set` and `add ∉ set - remove`.
pub(crate) fn swap_element(set: &[usize], remove: usize, add: usize) -> Vec<usize> {
    let index = set.binary_search(&remove).expect("element to remove is present");
    with_element(&without_index(set, index), add)
}

pub(crate) fn is_strictly_ascending(set: &[usize]) -> bool {
    set.windows(2).all(|w| w[0] < w[1])
}

/// Calls `visit` with every `k`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        visit(&current);
        // Advance the rightmost index that still has room.
        let mut i = k;
        while i > 0 && current[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        current[i - 1] += 1;
        for t in i..k {
            current[t] = current[t - 1] + 1;
        }
    }
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}
