//! Binomials, lexicographic subsets and permutation ranking.

use itertools::Itertools;

/// `C(n, k)`, zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    num_integer::binomial(n as u64, k as u64)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(k).collect()
}

/// All nonempty subsets of `items`, by size and then lexicographically.
pub fn nonempty_subcollections(items: &[usize]) -> Vec<Vec<usize>> {
    (1..=items.len())
        .flat_map(|r| items.iter().copied().combinations(r))
        .collect()
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// The permutation of `0..n` with lexicographic rank `rank`.
pub fn unrank_permutation(n: usize, mut rank: u128) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = factorial(i);
        let idx = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(idx));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, -1), 0);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(0, 0), 1);
    }

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(
            subsets(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(
            nonempty_subcollections(&[4, 7]),
            vec![vec![4], vec![7], vec![4, 7]]
        );
    }

    #[test]
    fn unranking_matches_itertools_order() {
        let all: Vec<Vec<usize>> = (0..4).permutations(4).collect();
        for (r, p) in all.iter().enumerate() {
            assert_eq!(&unrank_permutation(4, r as u128), p);
        }
    }
}
