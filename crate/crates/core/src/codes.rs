//! Storage codes and the matrices that shape undesired-file queries.
//!
//! `H` mixes the `U` rows into per-server vectors `Ũ` whose answers are
//! linearly dependent across servers. `H*` (built from exterior powers) gives
//! every server a subspace so that any `T'` of them meet in exactly one line.

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, subsets};
use crate::gf::Field;
use crate::linalg::{is_col_mds, is_row_mds, Matrix, Subspace};
use crate::{Error, Result};

/// Default cap on random searches.
pub const MAX_RETRIES: usize = 1000;

/// A generalized Reed–Solomon code: evaluations of polynomials of degree
/// `< k` at `alpha`, scaled by `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrsSpec {
    field: Field,
    k: usize,
    alpha: Vec<u64>,
    v: Vec<u64>,
}

impl GrsSpec {
    pub fn new(field: Field, k: usize, alpha: Vec<u64>, v: Vec<u64>) -> Result<Self> {
        let n = alpha.len();
        if v.len() != n {
            return Err(Error::DimensionMismatch(
                "alpha and v lengths differ".into(),
            ));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidParams(format!(
                "GRS dimension {k} with {n} points"
            )));
        }
        if n as u64 > field.modulus() {
            return Err(Error::FieldTooSmall {
                q: field.modulus(),
                need: n as u64,
            });
        }
        let alpha: Vec<u64> = alpha.into_iter().map(|a| field.reduce(a)).collect();
        let v: Vec<u64> = v.into_iter().map(|a| field.reduce(a)).collect();
        if alpha.iter().duplicates().next().is_some() {
            return Err(Error::DuplicateNodes);
        }
        if v.contains(&0) {
            return Err(Error::InvalidParams(
                "GRS multipliers must be nonzero".into(),
            ));
        }
        Ok(GrsSpec { field, k, alpha, v })
    }

    /// Points `0, 1, …, n-1` and unit multipliers.
    pub fn standard(field: Field, n: usize, k: usize) -> Result<Self> {
        Self::new(field, k, (0..n as u64).collect(), vec![1; n])
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[u64] {
        &self.alpha
    }

    pub fn v(&self) -> &[u64] {
        &self.v
    }
}

/// `k x N` generator with entry `(i, j) = v_j · alpha_j^i`.
pub fn grs_generator(spec: &GrsSpec) -> Matrix {
    let f = spec.field;
    let n = spec.n();
    let mut g = Matrix::zeros(f, spec.k, n);
    for j in 0..n {
        let mut p = spec.v[j];
        for i in 0..spec.k {
            g.set(i, j, p);
            p = f.mul(p, spec.alpha[j]);
        }
    }
    g
}

/// Row-equivalent `[I_K | A]` form of an MDS generator.
pub fn to_systematic(g: &Matrix) -> Result<Matrix> {
    let k = g.rows();
    let head: Vec<usize> = (0..k).collect();
    let inv = g.select_cols(&head).inverse().map_err(|_| Error::NotMds)?;
    Ok(&inv * g)
}

/// Dimension of the span of all component-wise products of a row of `g1`
/// with a row of `g2`.
pub fn schur_product_dim(g1: &Matrix, g2: &Matrix) -> Result<usize> {
    if g1.cols() != g2.cols() {
        return Err(Error::DimensionMismatch(
            "Schur product of different lengths".into(),
        ));
    }
    if g1.field() != g2.field() {
        return Err(Error::ModulusMismatch {
            left: g1.field().modulus(),
            right: g2.field().modulus(),
        });
    }
    let f = g1.field();
    let rows: Vec<Vec<u64>> = (0..g1.rows())
        .cartesian_product(0..g2.rows())
        .map(|(a, b)| {
            g1.row(a)
                .iter()
                .zip(g2.row(b))
                .map(|(&x, &y)| f.mul(x, y))
                .collect()
        })
        .collect();
    if rows.is_empty() {
        return Ok(0);
    }
    Ok(Matrix::from_rows(f, &rows)?.rank())
}

/// `H = (H'; I_t; H'')` for a systematic generator `[I_K | g_1 … g_{N-K}]`.
///
/// `H''` is drawn at random until `H` is row-MDS; `H'` is then forced by
/// `h̄_{k,τ} = g_{k,τ} + Σ_ℓ g_{k,ℓ+t} h_{ℓ,τ}`, which makes the mixed
/// symbols of the first `K` servers sum to those of the remaining servers.
pub fn build_h_generic(
    g_sys: &Matrix,
    t: usize,
    rng: &mut impl Rng,
    max_retries: usize,
) -> Result<Matrix> {
    let (k, n) = (g_sys.rows(), g_sys.cols());
    if t == 0 || n < k + t {
        return Err(Error::InvalidParams(format!(
            "need N >= K + T, got N={n} K={k} T={t}"
        )));
    }
    let free = n - k - t;
    let attempts = if free == 0 { 1 } else { max_retries.max(1) };
    for _ in 0..attempts {
        let tail = Matrix::random(g_sys.field(), free, t, rng);
        let h = h_from_tail(g_sys, t, &tail)?;
        if is_row_mds(&h, t) {
            return Ok(h);
        }
    }
    Err(Error::RetriesExhausted(attempts))
}

/// Completes `H` from a chosen `H''` block.
pub fn h_from_tail(g_sys: &Matrix, t: usize, tail: &Matrix) -> Result<Matrix> {
    let (k, n) = (g_sys.rows(), g_sys.cols());
    let f = g_sys.field();
    if tail.rows() + k + t != n || tail.cols() != t {
        return Err(Error::DimensionMismatch("H'' has the wrong shape".into()));
    }
    // Column g_j of the redundancy block sits at generator column k + j.
    let g = |row: usize, j: usize| g_sys.get(row, k + j);
    let mut h = Matrix::zeros(f, n, t);
    for row in 0..k {
        for tau in 0..t {
            let mut acc = g(row, tau);
            for l in 0..tail.rows() {
                acc = f.add(acc, f.mul(g(row, l + t), tail.get(l, tau)));
            }
            h.set(row, tau, acc);
        }
    }
    for tau in 0..t {
        h.set(k + tau, tau, 1);
    }
    for l in 0..tail.rows() {
        for tau in 0..t {
            h.set(k + t + l, tau, tail.get(l, tau));
        }
    }
    Ok(h)
}

/// `N x t` matrix whose transpose generates `GRS_t(alpha, 1)`.
pub fn build_h_grs(spec: &GrsSpec, t: usize) -> Result<Matrix> {
    if t == 0 || t > spec.n() {
        return Err(Error::InvalidParams(format!(
            "H width {t} with {} points",
            spec.n()
        )));
    }
    let unit = GrsSpec {
        k: t,
        v: vec![1; spec.n()],
        ..spec.clone()
    };
    Ok(grs_generator(&unit).transpose())
}

/// Coordinates of `u_1 ∧ … ∧ u_{T'}` (the rows of `vectors`) in the basis
/// `e_{i_1} ∧ … ∧ e_{i_{T'}}`, `i_1 < … < i_{T'}` in lexicographic order.
pub fn exterior_basis_coords(vectors: &Matrix) -> Vec<u64> {
    let tp = vectors.rows();
    subsets(vectors.cols(), tp)
        .into_iter()
        .map(|c| vectors.select_cols(&c).determinant().expect("square minor"))
        .collect()
}

/// Point on the moment curve for server `s` out of `count`: `(1, s, s², …)`
/// for all but the last server, which takes the point at infinity.
fn curve_point(field: Field, t: usize, s: usize, count: usize) -> Vec<u64> {
    if s + 1 == count {
        let mut p = vec![0; t];
        p[t - 1] = 1;
        return p;
    }
    let x = field.reduce(s as u64);
    (0..t as u64).map(|i| field.pow(x, i)).collect()
}

/// The subspace `{u ∧ ω}` of `Λ^{T'}(F_q^T)`.
fn wedge_subspace(field: Field, u: &[u64], small_t: usize) -> Subspace {
    let big_t = u.len();
    let rows: Vec<Vec<u64>> = subsets(big_t, small_t - 1)
        .into_iter()
        .map(|s| {
            let mut m = Matrix::zeros(field, small_t, big_t);
            for (c, &x) in u.iter().enumerate() {
                m.set(0, c, x);
            }
            for (r, &i) in s.iter().enumerate() {
                m.set(r + 1, i, 1);
            }
            exterior_basis_coords(&m)
        })
        .collect();
    Subspace::row_space(&Matrix::from_rows(field, &rows).expect("uniform rows"))
}

/// `count` subspaces of `Λ^{T'}(F_q^T)`, each of dimension `C(T-1, T'-1)`,
/// such that any `T'` meet in a line and, within any `T`, those lines are
/// independent.
pub fn exterior_subspaces(
    big_t: usize,
    small_t: usize,
    field: Field,
    count: usize,
) -> Result<Vec<Subspace>> {
    if small_t < 2 || small_t >= big_t {
        return Err(Error::InvalidParams(format!(
            "need 2 <= T' < T, got T'={small_t} T={big_t}"
        )));
    }
    let q = field.modulus();
    if (count as u64) > q + 1 {
        return Err(Error::FieldTooSmall {
            q,
            need: count as u64 - 1,
        });
    }
    Ok((0..count)
        .map(|s| wedge_subspace(field, &curve_point(field, big_t, s, count), small_t))
        .collect())
}

/// Stacks a basis of every server's exterior subspace:
/// a `C(T-1, T'-1)·N x C(T, T')` matrix.
pub fn build_h_star(
    n_servers: usize,
    big_t: usize,
    small_t: usize,
    field: Field,
) -> Result<Matrix> {
    let subs = exterior_subspaces(big_t, small_t, field, n_servers)?;
    let width = binomial(big_t as i64, small_t as i64) as usize;
    let parts: Vec<&Matrix> = subs.iter().map(|s| s.basis()).collect();
    Matrix::vstack(field, width, &parts)
}

/// Outcome of checking the two exterior-subspace properties.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExteriorCheck {
    /// Any `T'` subspaces meet in dimension exactly one.
    pub p1: bool,
    /// Within any `T` subspaces, the `C(T, T')` intersection lines are
    /// independent.
    pub p2: bool,
}

/// Exhaustively checks P1 and P2 on a family of subspaces.
pub fn check_exterior_properties(subs: &[Subspace], small_t: usize, big_t: usize) -> ExteriorCheck {
    let meet = |idx: &[usize]| -> Subspace {
        idx[1..].iter().fold(subs[idx[0]].clone(), |acc, &i| {
            acc.intersect(&subs[i]).expect("same ambient space")
        })
    };
    let p1 = subsets(subs.len(), small_t)
        .iter()
        .all(|s| meet(s).dim() == 1);
    let p2 = p1
        && subsets(subs.len(), big_t.min(subs.len()))
            .iter()
            .all(|group| {
                let lines: Vec<Vec<u64>> = group
                    .iter()
                    .copied()
                    .combinations(small_t)
                    .map(|s| meet(&s).basis().row(0).to_vec())
                    .collect();
                let m = Matrix::from_rows(subs[0].field(), &lines).expect("uniform rows");
                m.rank() == lines.len()
            });
    ExteriorCheck { p1, p2 }
}

/// Coarse classification used by rate formulas and strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeFlavor {
    GenericMds,
    Grs,
}

/// How the storage generator was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StorageFlavor {
    GenericMds,
    Grs(GrsSpec),
}

/// An `(N, K)` MDS storage code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StorageCode {
    n: usize,
    k: usize,
    generator: Matrix,
    flavor: StorageFlavor,
}

impl StorageCode {
    /// Wraps a generator, checking that it is MDS.
    pub fn from_generator(generator: Matrix) -> Result<Self> {
        let (k, n) = (generator.rows(), generator.cols());
        if k == 0 || !is_col_mds(&generator, k) {
            return Err(Error::NotMds);
        }
        Ok(StorageCode {
            n,
            k,
            generator,
            flavor: StorageFlavor::GenericMds,
        })
    }

    pub fn grs(spec: GrsSpec) -> Self {
        StorageCode {
            n: spec.n(),
            k: spec.k,
            generator: grs_generator(&spec),
            flavor: StorageFlavor::Grs(spec),
        }
    }

    /// A random systematic MDS code `[I | A]`.
    pub fn random_systematic(
        field: Field,
        n: usize,
        k: usize,
        rng: &mut impl Rng,
        max_retries: usize,
    ) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidParams(format!("({n},{k}) code")));
        }
        for _ in 0..max_retries.max(1) {
            let a = Matrix::random(field, k, n - k, rng);
            let g = Matrix::identity(field, k).hstack(&a)?;
            if is_col_mds(&g, k) {
                return Ok(StorageCode {
                    n,
                    k,
                    generator: g,
                    flavor: StorageFlavor::GenericMds,
                });
            }
        }
        Err(Error::RetriesExhausted(max_retries.max(1)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> Field {
        self.generator.field()
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn flavor(&self) -> &StorageFlavor {
        &self.flavor
    }

    pub fn code_flavor(&self) -> CodeFlavor {
        match self.flavor {
            StorageFlavor::GenericMds => CodeFlavor::GenericMds,
            StorageFlavor::Grs(_) => CodeFlavor::Grs,
        }
    }

    /// Generator column of server `n` (0-based).
    pub fn column(&self, n: usize) -> Vec<u64> {
        self.generator.col(n)
    }

    /// The matrix `H` with `t` columns matching this code.
    pub fn query_mixer(&self, t: usize, rng: &mut impl Rng) -> Result<Matrix> {
        match &self.flavor {
            StorageFlavor::Grs(spec) => build_h_grs(spec, t),
            StorageFlavor::GenericMds => {
                build_h_generic(&to_systematic(&self.generator)?, t, rng, MAX_RETRIES)
            }
        }
    }
}
