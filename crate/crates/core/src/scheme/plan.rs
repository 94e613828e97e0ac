use rand::seq::SliceRandom;
use rand::Rng;

use super::{SystemParams, Variant};
use crate::codes::{build_h_star, CodeFlavor, StorageCode};
use crate::combinatorics::{binomial, subsets};
use crate::gf::Field;
use crate::linalg::{random_full_rank, Matrix};
use crate::rates::deltas;
use crate::{Error, Result};

/// Vector `j` is stored (as a query row) at the servers of the `j`-th
/// lexicographic `K`-subset.
pub fn design_v_sets(n: usize, k: usize) -> Vec<Vec<usize>> {
    subsets(n, k)
}

/// Vector `i` goes to the `K` cyclically consecutive servers starting at `i`.
pub fn design_v_sets_cyclic(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            let mut s: Vec<usize> = (0..k).map(|r| (i + r) % n).collect();
            s.sort_unstable();
            s
        })
        .collect()
}

/// What a query row is made of, for diagnostics and audits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowRole {
    /// Row `j` of the desired basis.
    Vector(usize),
    /// A common undesired row, sent to every server.
    Common(usize),
    /// A mixed row built from the top-level `U` vectors.
    Tilde(usize),
    /// A mixed row of an intermediate level.
    Star {
        level: usize,
        block: usize,
        index: usize,
    },
    /// Overwritten by fault injection.
    Corrupted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FileRole {
    Desired,
    Undesired,
}

/// How a server's query set is presented to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transmission {
    /// The set rows in a secret random order.
    PermutedSet,
    /// The reduced row echelon basis of the set.
    Rref,
}

/// All queries for one file.
#[derive(Clone, Debug)]
pub struct FileQueries {
    pub role: FileRole,
    /// Invertible `L_col x L_col` basis the sets are drawn from.
    pub basis: Matrix,
    /// Per server: the unordered set rows.
    pub sets: Vec<Matrix>,
    pub labels: Vec<Vec<RowRole>>,
    /// Query row `i` of server `n` is set row `perms[n][i]` (permuted
    /// transmission only).
    pub perms: Vec<Vec<usize>>,
    /// What each server receives.
    pub queries: Vec<Matrix>,
}

impl FileQueries {
    /// The query for server `n` under an alternative row order.
    pub fn permuted_query(&self, n: usize, perm: &[usize]) -> Matrix {
        self.sets[n].select_rows(perm)
    }

    fn refresh(&mut self, n: usize, transmission: Transmission) {
        self.queries[n] = match transmission {
            Transmission::PermutedSet => self.sets[n].select_rows(&self.perms[n]),
            Transmission::Rref => self.sets[n].rref().0,
        };
    }
}

/// Which kind of row fault injection overwrites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultTarget {
    /// A mixed undesired row.
    Tilde,
    /// A common undesired row.
    Common,
    /// A desired basis row.
    Vector,
}

/// Where a fault was planted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultWitness {
    pub file: usize,
    pub server: usize,
    pub row: usize,
    pub replaced: RowRole,
}

/// The user's private query material for one retrieval.
#[derive(Clone, Debug)]
pub struct QueryPlan {
    params: SystemParams,
    code: StorageCode,
    v_sets: Vec<Vec<usize>>,
    server_vectors: Vec<Vec<usize>>,
    desired: Vec<usize>,
    files: Vec<FileQueries>,
    h: Matrix,
    h_star: Vec<Matrix>,
    transmission: Transmission,
}

fn combine(field: Field, width: usize, terms: &[(u64, &[u64])]) -> Vec<u64> {
    let mut out = vec![0; width];
    for &(c, row) in terms {
        if c == 0 {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(row) {
            *o = field.add(*o, field.mul(c, x));
        }
    }
    out
}

/// Builds the query plan for the given desired files.
pub fn build_query_plan(
    params: &SystemParams,
    code: &StorageCode,
    desired: &[usize],
    rng: &mut impl Rng,
) -> Result<QueryPlan> {
    params.validate()?;
    let field = params.field();
    let (n, k, t) = (params.n, params.k, params.t);
    if code.n() != n || code.k() != k || code.field() != field {
        return Err(Error::DimensionMismatch(format!(
            "code is ({}, {}) over F_{}, params need ({n}, {k}) over F_{}",
            code.n(),
            code.k(),
            code.field().modulus(),
            params.q
        )));
    }
    if matches!(params.variant, Variant::GrsT2 | Variant::GeneralT)
        && code.code_flavor() != CodeFlavor::Grs
    {
        return Err(Error::InvalidParams(format!(
            "variant {} needs a GRS code",
            params.variant.name()
        )));
    }
    let mut wanted = desired.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    if wanted.len() != params.p || wanted.iter().any(|&m| m >= params.m) {
        return Err(Error::InvalidParams(format!(
            "need {} distinct desired files below {}, got {desired:?}",
            params.p, params.m
        )));
    }

    let cyclic = params.variant == Variant::CyclicAdjacent;
    let v_sets = if cyclic {
        design_v_sets_cyclic(n, k)
    } else {
        design_v_sets(n, k)
    };
    let mut server_vectors = vec![Vec::new(); n];
    for (j, s) in v_sets.iter().enumerate() {
        for &srv in s {
            server_vectors[srv].push(j);
        }
    }
    let h = code.query_mixer(if cyclic { 2 } else { t }, rng)?;
    let h_star = (2..t)
        .map(|level| build_h_star(n, t, level, field))
        .collect::<Result<Vec<_>>>()?;
    let transmission = if params.variant == Variant::GeneralT {
        Transmission::Rref
    } else {
        Transmission::PermutedSet
    };

    let width = params.vector_count();
    let d = params.per_server();
    let mut files = Vec::with_capacity(params.m);
    for m in 0..params.m {
        let basis = random_full_rank(field, width, rng);
        let role = if wanted.contains(&m) {
            FileRole::Desired
        } else {
            FileRole::Undesired
        };
        let (rows, labels): (Vec<Vec<Vec<u64>>>, Vec<Vec<RowRole>>) = (0..n)
            .map(|srv| match role {
                FileRole::Desired => server_vectors[srv]
                    .iter()
                    .map(|&j| (basis.row(j).to_vec(), RowRole::Vector(j)))
                    .unzip(),
                FileRole::Undesired => undesired_rows(params, &basis, &h, &h_star, srv)
                    .into_iter()
                    .unzip(),
            })
            .unzip();
        let sets = rows
            .iter()
            .map(|r| {
                debug_assert_eq!(r.len(), d);
                Matrix::from_rows(field, r)
            })
            .collect::<Result<Vec<_>>>()?;
        let perms = (0..n)
            .map(|_| {
                let mut p: Vec<usize> = (0..d).collect();
                if transmission == Transmission::PermutedSet {
                    p.shuffle(rng);
                }
                p
            })
            .collect();
        let mut fq = FileQueries {
            role,
            basis,
            queries: sets.clone(),
            sets,
            labels,
            perms,
        };
        for srv in 0..n {
            fq.refresh(srv, transmission);
        }
        files.push(fq);
    }

    Ok(QueryPlan {
        params: params.clone(),
        code: code.clone(),
        v_sets,
        server_vectors,
        desired: wanted,
        files,
        h,
        h_star,
        transmission,
    })
}

/// Set rows of an undesired file at server `srv`: common rows, then the
/// intermediate levels, then the top-level mixed rows.
fn undesired_rows(
    params: &SystemParams,
    basis: &Matrix,
    h: &Matrix,
    h_star: &[Matrix],
    srv: usize,
) -> Vec<(Vec<u64>, RowRole)> {
    let field = params.field();
    let width = basis.cols();
    let (n, t, k) = (params.n, params.t, params.k);
    let mut out = Vec::new();

    if params.variant == Variant::CyclicAdjacent {
        for i in 0..k - 1 {
            out.push((basis.row(i).to_vec(), RowRole::Common(i)));
        }
        let u = [
            (h.get(srv, 0), basis.row(k - 1)),
            (h.get(srv, 1), basis.row(k)),
        ];
        out.push((combine(field, width, &u), RowRole::Tilde(0)));
        return out;
    }

    let delta: Vec<usize> = deltas(n as u64, t as u64, k as u64)
        .into_iter()
        .map(|x| x as usize)
        .collect();
    let mut next = 0;
    for i in 0..delta[t - 1] {
        out.push((basis.row(next).to_vec(), RowRole::Common(i)));
        next += 1;
    }
    for level in 2..t {
        let hs = &h_star[level - 2];
        let blocks = binomial(t as i64, level as i64) as usize;
        let per = binomial(t as i64 - 1, level as i64 - 1) as usize;
        for j in 0..delta[level - 1] {
            let u: Vec<&[u64]> = (0..blocks).map(|c| basis.row(next + c)).collect();
            next += blocks;
            for r in 0..per {
                let terms: Vec<(u64, &[u64])> = (0..blocks)
                    .map(|c| (hs.get(srv * per + r, c), u[c]))
                    .collect();
                out.push((
                    combine(field, width, &terms),
                    RowRole::Star {
                        level,
                        block: j,
                        index: r,
                    },
                ));
            }
        }
    }
    let d1 = delta[0];
    for j in 0..d1 {
        let terms: Vec<(u64, &[u64])> = (0..t)
            .map(|c| (h.get(srv, c), basis.row(next + c * d1 + j)))
            .collect();
        out.push((combine(field, width, &terms), RowRole::Tilde(j)));
    }
    out
}

impl QueryPlan {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn code(&self) -> &StorageCode {
        &self.code
    }

    /// Server sets of every `V` vector.
    pub fn v_sets(&self) -> &[Vec<usize>] {
        &self.v_sets
    }

    /// `V` vectors queried at server `n`, ascending.
    pub fn server_vectors(&self, n: usize) -> &[usize] {
        &self.server_vectors[n]
    }

    pub fn desired(&self) -> &[usize] {
        &self.desired
    }

    pub fn undesired(&self) -> Vec<usize> {
        (0..self.params.m)
            .filter(|m| !self.desired.contains(m))
            .collect()
    }

    pub fn files(&self) -> &[FileQueries] {
        &self.files
    }

    pub fn file(&self, m: usize) -> &FileQueries {
        &self.files[m]
    }

    /// Query for file `m` at server `n`.
    pub fn query(&self, m: usize, n: usize) -> &Matrix {
        &self.files[m].queries[n]
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    /// `H*` per intermediate level, starting at level 2.
    pub fn h_star(&self) -> &[Matrix] {
        &self.h_star
    }

    pub fn transmission(&self) -> Transmission {
        self.transmission
    }

    /// Functional of a query row at server `n`: coefficients over the `L`
    /// symbols of the file.
    pub fn functionals(&self, n: usize, rows: &Matrix) -> Matrix {
        let g =
            Matrix::new(self.code.field(), 1, self.params.k, self.code.column(n)).expect("column");
        g.kron(rows)
    }

    /// Every queried functional of file `m`, server by server.
    pub fn functional_matrix(&self, m: usize) -> Matrix {
        let parts: Vec<Matrix> = (0..self.params.n)
            .map(|n| self.functionals(n, &self.files[m].sets[n]))
            .collect();
        let refs: Vec<&Matrix> = parts.iter().collect();
        Matrix::vstack(self.code.field(), self.params.l(), &refs).expect("uniform widths")
    }

    /// Functional matrix of the first undesired file, or `None` when every
    /// file is desired.
    pub fn undesired_functional_matrix(&self) -> Option<Matrix> {
        self.undesired().first().map(|&m| self.functional_matrix(m))
    }

    /// Replaces one set row at server 0 by a random vector and marks it
    /// corrupted. Undesired targets hit the first undesired file, `Vector`
    /// hits the first desired file.
    pub fn inject_fault(
        &mut self,
        target: FaultTarget,
        rng: &mut impl Rng,
    ) -> Result<FaultWitness> {
        let file = match target {
            FaultTarget::Vector => Some(self.desired[0]),
            _ => self.undesired().first().copied(),
        }
        .ok_or_else(|| Error::NotApplicable("no undesired file to corrupt".into()))?;
        let server = 0;
        let fq = &mut self.files[file];
        let row = fq.labels[server]
            .iter()
            .position(|r| {
                matches!(
                    (target, r),
                    (FaultTarget::Tilde, RowRole::Tilde(_))
                        | (FaultTarget::Common, RowRole::Common(_))
                        | (FaultTarget::Vector, RowRole::Vector(_))
                )
            })
            .ok_or_else(|| Error::NotApplicable("no row of the requested kind".into()))?;
        let replaced = fq.labels[server][row];
        let field = self.code.field();
        let width = fq.sets[server].cols();
        let fresh: Vec<u64> = (0..width)
            .map(|_| rng.gen_range(0..field.modulus()))
            .collect();
        for (c, v) in fresh.into_iter().enumerate() {
            fq.sets[server].set(row, c, v);
        }
        fq.labels[server][row] = RowRole::Corrupted;
        fq.refresh(server, self.transmission);
        Ok(FaultWitness {
            file,
            server,
            row,
            replaced,
        })
    }
}
