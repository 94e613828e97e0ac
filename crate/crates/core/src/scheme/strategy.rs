use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{SystemParams, Variant};
use crate::linalg::{random_full_rank, vandermonde_raw, Matrix};
use crate::Result;

/// The squeeze: how many raw symbols each server returns per file, the
/// per-server mixing matrices, and (multi-file) the sum coefficients.
#[derive(Clone, Debug)]
pub struct CombinationStrategy {
    pub i_n: Vec<usize>,
    /// `C_n`, invertible `d x d`.
    pub c_n: Vec<Matrix>,
    /// `P x M` coefficients for the sums; `None` means plain sums over all files.
    pub d_matrix: Option<Matrix>,
}

/// Raw undesired symbols per server. Sums to [`SystemParams::expected_i`].
pub fn raw_counts(params: &SystemParams) -> Vec<usize> {
    let (n, k) = (params.n, params.k);
    let d = params.per_server();
    match params.variant {
        Variant::GeneralT2 | Variant::GrsT2 | Variant::MultiFile | Variant::CyclicAdjacent => {
            let mid = if params.variant == Variant::CyclicAdjacent {
                1
            } else {
                params.mu()
            };
            let tail = params.zeta();
            (0..n)
                .map(|i| {
                    if i < k {
                        d
                    } else if i < n - tail {
                        mid
                    } else {
                        0
                    }
                })
                .collect()
        }
        Variant::GeneralT => {
            let mut rest = params.expected_i() - k * d;
            let others = n - k;
            let base = rest / others;
            let extra = rest % others;
            (0..n)
                .map(|i| {
                    if i < k {
                        return d;
                    }
                    let want = (base + usize::from(i - k < extra)).min(d).min(rest);
                    rest -= want;
                    want
                })
                .collect()
        }
    }
}

/// Builds the strategy. Only the randomized variant consumes `seed`.
pub fn make_strategy(params: &SystemParams, seed: u64) -> Result<CombinationStrategy> {
    let field = params.field();
    let d = params.per_server();
    let i_n = raw_counts(params);
    let c_n = if params.variant.is_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..params.n)
            .map(|_| random_full_rank(field, d, &mut rng))
            .collect()
    } else {
        let nodes: Vec<u64> = (0..d as u64).collect();
        let mixer = vandermonde_raw(field, &nodes, d)?;
        i_n.iter()
            .map(|&i| {
                if i == 0 || i == d {
                    Matrix::identity(field, d)
                } else {
                    mixer.clone()
                }
            })
            .collect()
    };
    let d_matrix = if params.variant == Variant::MultiFile {
        let nodes: Vec<u64> = (0..params.m as u64).collect();
        Some(vandermonde_raw(field, &nodes, params.p)?)
    } else {
        None
    };
    Ok(CombinationStrategy { i_n, c_n, d_matrix })
}

impl CombinationStrategy {
    /// Same counts with every mixing matrix replaced by the identity. Used to
    /// show that unmixed partial downloads can miss the interference.
    pub fn without_mixing(&self) -> CombinationStrategy {
        CombinationStrategy {
            i_n: self.i_n.clone(),
            c_n: self
                .c_n
                .iter()
                .map(|c| Matrix::identity(c.field(), c.rows()))
                .collect(),
            d_matrix: self.d_matrix.clone(),
        }
    }

    pub fn total_raw(&self) -> usize {
        self.i_n.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_sum_to_i() {
        let cases = [
            SystemParams::new(Variant::GeneralT2, 2, 5, 2, 3, 1, 0, 1).unwrap(),
            SystemParams::new(Variant::GrsT2, 2, 5, 2, 2, 1, 0, 1).unwrap(),
            SystemParams::new(Variant::MultiFile, 3, 5, 2, 2, 2, 0, 1).unwrap(),
            SystemParams::new(Variant::CyclicAdjacent, 2, 5, 2, 3, 1, 5, 1).unwrap(),
            SystemParams::new(Variant::GeneralT, 2, 6, 3, 3, 1, 0, 1).unwrap(),
            SystemParams::new(Variant::GeneralT, 2, 7, 4, 2, 1, 0, 1).unwrap(),
        ];
        for p in cases {
            let c = raw_counts(&p);
            assert_eq!(c.iter().sum::<usize>(), p.expected_i(), "{p:?}");
            assert!(c.iter().all(|&i| i <= p.per_server()));
        }
    }

    #[test]
    fn cyclic_counts() {
        let p = SystemParams::new(Variant::CyclicAdjacent, 2, 5, 2, 3, 1, 5, 1).unwrap();
        assert_eq!(raw_counts(&p), vec![3, 3, 3, 1, 0]);
    }

    #[test]
    fn general_t_counts() {
        let p = SystemParams::new(Variant::GeneralT, 2, 6, 3, 3, 1, 0, 1).unwrap();
        assert_eq!(raw_counts(&p), vec![10, 10, 10, 5, 5, 5]);
    }
}
