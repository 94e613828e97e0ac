use rand::Rng;

use super::plan::{FileRole, QueryPlan, RowRole};
use super::strategy::CombinationStrategy;
use super::SystemParams;
use crate::codes::StorageCode;
use crate::linalg::{solve, Matrix};
use crate::{Error, Result};

/// The `M` files, each an `L_col x K` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileSet {
    pub files: Vec<Matrix>,
}

impl FileSet {
    pub fn random(params: &SystemParams, rng: &mut impl Rng) -> Self {
        let field = params.field();
        FileSet {
            files: (0..params.m)
                .map(|_| Matrix::random(field, params.vector_count(), params.k, rng))
                .collect(),
        }
    }
}

/// Coded storage: entry `[n][m]` is the column `W_m · g_n` held by server `n`.
pub fn store_files(files: &FileSet, code: &StorageCode) -> Result<Vec<Vec<Matrix>>> {
    let g = code.generator();
    let coded: Vec<Matrix> = files
        .files
        .iter()
        .map(|w| w.try_mul(g))
        .collect::<Result<_>>()?;
    Ok((0..code.n())
        .map(|n| coded.iter().map(|c| c.select_cols(&[n])).collect())
        .collect())
}

/// One server's reply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServerAnswer {
    pub server: usize,
    /// Per file, the first `I_n` mixed symbols.
    pub raw: Vec<Vec<u64>>,
    /// Combined symbols for positions `I_n..d`, position-major.
    pub sums: Vec<u64>,
}

impl ServerAnswer {
    pub fn symbol_count(&self) -> usize {
        self.raw.iter().map(Vec::len).sum::<usize>() + self.sums.len()
    }
}

/// Computes server `n`'s answer from its stored chunks (one per file).
pub fn server_answer(
    plan: &QueryPlan,
    strategy: &CombinationStrategy,
    n: usize,
    chunks: &[Matrix],
) -> Result<ServerAnswer> {
    let params = plan.params();
    let field = params.field();
    if chunks.len() != params.m {
        return Err(Error::DimensionMismatch(format!(
            "{} chunks for {} files",
            chunks.len(),
            params.m
        )));
    }
    let d = params.per_server();
    let i_n = strategy.i_n[n];
    let mixed: Vec<Vec<u64>> = chunks
        .iter()
        .enumerate()
        .map(|(m, chunk)| {
            let q = plan.query(m, n).try_mul(chunk)?;
            Ok(strategy.c_n[n].try_mul(&q)?.col(0))
        })
        .collect::<Result<_>>()?;
    let raw = mixed.iter().map(|v| v[..i_n].to_vec()).collect();
    let mut sums = Vec::new();
    for i in i_n..d {
        match &strategy.d_matrix {
            None => sums.push(mixed.iter().fold(0, |acc, v| field.add(acc, v[i]))),
            Some(dm) => {
                for p in 0..dm.rows() {
                    let s = mixed.iter().enumerate().fold(0, |acc, (m, v)| {
                        field.add(acc, field.mul(dm.get(p, m), v[i]))
                    });
                    sums.push(s);
                }
            }
        }
    }
    Ok(ServerAnswer {
        server: n,
        raw,
        sums,
    })
}

/// Decodes the desired files (in ascending file order) from all answers.
///
/// Fails with [`Error::SpanFailure`] when the raw undesired symbols of some
/// file do not determine the interference in the sums.
pub fn reconstruct(
    plan: &QueryPlan,
    strategy: &CombinationStrategy,
    answers: &[ServerAnswer],
) -> Result<Vec<Matrix>> {
    let params = plan.params();
    let field = params.field();
    let (n_srv, d) = (params.n, params.per_server());
    let combos = strategy.d_matrix.as_ref().map_or(1, Matrix::rows);
    if answers.len() != n_srv {
        return Err(Error::DimensionMismatch(format!(
            "{} answers for N={n_srv}",
            answers.len()
        )));
    }
    let mixed_rows = |m: usize, n: usize| strategy.c_n[n].try_mul(plan.query(m, n));

    // Interference of each undesired file at every summed position.
    let mut interference: Vec<Vec<Vec<u64>>> = vec![vec![vec![0; d]; n_srv]; params.m];
    for m in plan.undesired() {
        let mut have: Vec<Matrix> = Vec::new();
        let mut values = Vec::new();
        let mut need: Vec<Matrix> = Vec::new();
        let mut need_at = Vec::new();
        for n in 0..n_srv {
            let rows = mixed_rows(m, n)?;
            let i_n = strategy.i_n[n];
            let idx_have: Vec<usize> = (0..i_n).collect();
            let idx_need: Vec<usize> = (i_n..d).collect();
            have.push(plan.functionals(n, &rows.select_rows(&idx_have)));
            values.extend_from_slice(&answers[n].raw[m]);
            need.push(plan.functionals(n, &rows.select_rows(&idx_need)));
            need_at.extend(idx_need.iter().map(|&i| (n, i)));
        }
        if need_at.is_empty() {
            continue;
        }
        let have = Matrix::vstack(field, params.l(), &have.iter().collect::<Vec<_>>())?;
        let need = Matrix::vstack(field, params.l(), &need.iter().collect::<Vec<_>>())?;
        let coeffs = solve(&have.transpose(), &need.transpose()).map_err(|e| match e {
            Error::NoSolution => Error::SpanFailure { file: m },
            other => other,
        })?;
        let y = Matrix::column_vector(field, &values);
        let known = coeffs.transpose().try_mul(&y)?.col(0);
        for (&(n, i), v) in need_at.iter().zip(known) {
            interference[m][n][i] = v;
        }
    }

    // Desired mixed symbols, then the set values behind them.
    let desired = plan.desired();
    let d_inv = match &strategy.d_matrix {
        Some(dm) => Some(dm.select_cols(desired).inverse()?),
        None => None,
    };
    let mut set_values: Vec<Vec<Vec<u64>>> = vec![Vec::new(); params.m];
    for &m in desired {
        set_values[m] = vec![Vec::new(); n_srv];
    }
    for n in 0..n_srv {
        let i_n = strategy.i_n[n];
        let mut mixed: Vec<Vec<u64>> = desired.iter().map(|&m| answers[n].raw[m].clone()).collect();
        for (slot, i) in (i_n..d).enumerate() {
            let sums = &answers[n].sums[slot * combos..(slot + 1) * combos];
            let undesired = plan.undesired();
            match (&strategy.d_matrix, &d_inv) {
                (Some(dm), Some(inv)) => {
                    let b: Vec<u64> = (0..combos)
                        .map(|p| {
                            undesired.iter().fold(sums[p], |acc, &u| {
                                field.sub(acc, field.mul(dm.get(p, u), interference[u][n][i]))
                            })
                        })
                        .collect();
                    let x = inv.try_mul(&Matrix::column_vector(field, &b))?.col(0);
                    for (slot_m, v) in x.into_iter().enumerate() {
                        mixed[slot_m].push(v);
                    }
                }
                _ => {
                    let x = undesired
                        .iter()
                        .fold(sums[0], |acc, &u| field.sub(acc, interference[u][n][i]));
                    mixed[0].push(x);
                }
            }
        }
        let c_inv = strategy.c_n[n].inverse()?;
        for (slot_m, &m) in desired.iter().enumerate() {
            let queried = c_inv.try_mul(&Matrix::column_vector(field, &mixed[slot_m]))?;
            // Express the set rows in terms of the transmitted rows.
            let q = plan.query(m, n);
            let b = solve(&q.transpose(), &plan.file(m).sets[n].transpose())?.transpose();
            set_values[m][n] = b.try_mul(&queried)?.col(0);
        }
    }

    let width = params.vector_count();
    let k = params.k;
    let g = plan.code().generator();
    let mut out = Vec::with_capacity(desired.len());
    for &m in desired {
        let fq = plan.file(m);
        let mut r = Matrix::zeros(field, width, k);
        for (j, servers) in plan.v_sets().iter().enumerate() {
            let y: Vec<u64> = servers
                .iter()
                .map(|&n| {
                    fq.labels[n]
                        .iter()
                        .position(|&role| role == RowRole::Vector(j))
                        .map(|pos| set_values[m][n][pos])
                        .ok_or(Error::NoSolution)
                })
                .collect::<Result<_>>()?;
            let gs = g.select_cols(servers);
            let x = solve(&gs.transpose(), &Matrix::column_vector(field, &y))?;
            for c in 0..k {
                r.set(j, c, x.get(c, 0));
            }
        }
        out.push(fq.basis.inverse()?.try_mul(&r)?);
    }
    debug_assert!(
        plan.files()
            .iter()
            .filter(|f| f.role == FileRole::Desired)
            .count()
            == out.len()
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{build_code, build_query_plan, make_strategy, Variant};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn roundtrip(params: &SystemParams, desired: &[usize], seed: u64) -> Result<bool> {
        let code = build_code(params)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plan = build_query_plan(params, &code, desired, &mut rng)?;
        // The strategy seed must not replay the plan's stream.
        let strategy = make_strategy(params, rng.gen())?;
        let files = FileSet::random(params, &mut rng);
        let stored = store_files(&files, &code)?;
        let answers = (0..params.n)
            .map(|n| server_answer(&plan, &strategy, n, &stored[n]))
            .collect::<Result<Vec<_>>>()?;
        let got = reconstruct(&plan, &strategy, &answers)?;
        let want: Vec<Matrix> = plan
            .desired()
            .iter()
            .map(|&m| files.files[m].clone())
            .collect();
        Ok(got == want)
    }

    #[test]
    fn all_variants_decode() {
        let cases = [
            (
                SystemParams::new(Variant::GeneralT2, 2, 5, 2, 3, 1, 0, 1).unwrap(),
                vec![0],
            ),
            (
                SystemParams::new(Variant::GeneralT2, 3, 6, 2, 2, 1, 0, 2).unwrap(),
                vec![2],
            ),
            (
                SystemParams::new(Variant::GrsT2, 2, 5, 2, 2, 1, 0, 1).unwrap(),
                vec![1],
            ),
            (
                SystemParams::new(Variant::MultiFile, 3, 5, 2, 2, 2, 0, 1).unwrap(),
                vec![0, 2],
            ),
            (
                SystemParams::new(Variant::CyclicAdjacent, 2, 5, 2, 3, 1, 5, 1).unwrap(),
                vec![0],
            ),
        ];
        for (p, want) in cases {
            for seed in 0..3 {
                assert!(roundtrip(&p, &want, seed).unwrap(), "{p:?} seed {seed}");
            }
        }
    }

    #[test]
    fn general_t_decodes() {
        let p = SystemParams::new(Variant::GeneralT, 2, 6, 3, 3, 1, 0, 1).unwrap();
        assert!(roundtrip(&p, &[0], 5).unwrap());
    }

    #[test]
    fn answer_sizes() {
        let p = SystemParams::new(Variant::GrsT2, 2, 5, 2, 2, 1, 0, 1).unwrap();
        let code = build_code(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let plan = build_query_plan(&p, &code, &[0], &mut rng).unwrap();
        let s = make_strategy(&p, 0).unwrap();
        let files = FileSet::random(&p, &mut rng);
        let stored = store_files(&files, &code).unwrap();
        let sizes: Vec<usize> = (0..5)
            .map(|n| {
                server_answer(&plan, &s, n, &stored[n])
                    .unwrap()
                    .symbol_count()
            })
            .collect();
        // d = 4: first K servers send 8, then mu = 3 raw + 1 sum, then sums only.
        assert_eq!(sizes, vec![8, 8, 7, 4, 4]);
    }

    #[test]
    fn mixed_rows_balance_across_servers() {
        // Mixed undesired symbols of the first K servers sum to those of the rest.
        for (n, k, seed) in [(5, 3, 1u64), (6, 2, 2), (7, 3, 3)] {
            let p = SystemParams::new(Variant::GeneralT2, 2, n, 2, k, 1, 0, seed).unwrap();
            let code = build_code(&p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let plan = build_query_plan(&p, &code, &[0], &mut rng).unwrap();
            let files = FileSet::random(&p, &mut rng);
            let stored = store_files(&files, &code).unwrap();
            let f = p.field();
            for j in 0..p.mu() {
                let (mut head, mut tail) = (0, 0);
                for srv in 0..n {
                    let fq = plan.file(1);
                    let r = fq.labels[srv]
                        .iter()
                        .position(|&x| x == RowRole::Tilde(j))
                        .unwrap();
                    let v = fq.sets[srv]
                        .select_rows(&[r])
                        .try_mul(&stored[srv][1])
                        .unwrap()
                        .get(0, 0);
                    if srv < k {
                        head = f.add(head, v);
                    } else {
                        tail = f.add(tail, v);
                    }
                }
                assert_eq!(head, tail, "N={n} K={k} j={j}");
            }
        }
    }
}
