//! Checks that a plan is private, that a strategy decodes, and that the
//! undesired queries carry the intended redundancy.

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::codes::CodeFlavor;
use crate::combinatorics::{factorial, nonempty_subcollections, subsets, unrank_permutation};
use crate::linalg::{Matrix, Subspace};
use crate::parallel::Execution;
use crate::scheme::{sub_rng, CombinationStrategy, FileRole, QueryPlan, Transmission, Variant};

/// Exhaustive enumeration is never attempted beyond this many tuples.
pub const EXHAUSTIVE_CAP: u128 = 1_000_000;

/// Subspace dimensions seen by one coalition for one file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileProfile {
    pub file: usize,
    pub desired: bool,
    /// `dim ∩_{n∈A} Q_n` for every nonempty `A`, by size then lexicographically.
    pub intersections: Vec<usize>,
    /// Part of each intersection not reachable from the remaining servers.
    pub exclusive: Vec<usize>,
    /// `dim Σ_n Q_n`.
    pub joint: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoalitionProfile {
    pub servers: Vec<usize>,
    pub target_intersections: Vec<usize>,
    pub target_exclusive: Vec<usize>,
    pub files: Vec<FileProfile>,
}

impl CoalitionProfile {
    pub fn consistent(&self) -> bool {
        self.files.iter().all(|f| {
            f.intersections == self.target_intersections && f.exclusive == self.target_exclusive
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrivacyReport {
    pub coalitions: Vec<CoalitionProfile>,
    pub verdict: bool,
    /// First coalition whose files are distinguishable.
    pub witness: Option<Vec<usize>>,
}

/// Coalitions the adversary model allows.
pub fn coalitions(plan: &QueryPlan) -> Vec<Vec<usize>> {
    let p = plan.params();
    if p.variant == Variant::CyclicAdjacent {
        let mut out: Vec<Vec<usize>> = (0..p.n)
            .map(|i| {
                let mut s = vec![i, (i + 1) % p.n];
                s.sort_unstable();
                s
            })
            .collect();
        out.sort();
        out
    } else {
        subsets(p.n, p.t)
    }
}

fn meet(spaces: &[&Subspace]) -> Subspace {
    spaces[1..].iter().fold(spaces[0].clone(), |acc, s| {
        acc.intersect(s).expect("same ambient space")
    })
}

fn join(spaces: &[&Subspace], field: crate::Field, ambient: usize) -> Subspace {
    spaces
        .iter()
        .fold(Subspace::zero(field, ambient), |acc, s| {
            acc.sum(s).expect("same ambient space")
        })
}

/// Compares, for every coalition, the intersection structure of the query
/// spaces across all files against the incidence counts of the `V` design.
pub fn structural_privacy_audit(plan: &QueryPlan) -> PrivacyReport {
    let params = plan.params();
    let field = params.field();
    let width = params.vector_count();
    let spaces: Vec<Vec<Subspace>> = plan
        .files()
        .iter()
        .map(|f| f.queries.iter().map(Subspace::row_space).collect())
        .collect();

    let mut out = Vec::new();
    for coalition in coalitions(plan) {
        let subs = nonempty_subcollections(&coalition);
        let hit = |a: &[usize], exact: bool| {
            plan.v_sets()
                .iter()
                .filter(|s| {
                    let inside: Vec<usize> = coalition
                        .iter()
                        .copied()
                        .filter(|x| s.contains(x))
                        .collect();
                    if exact {
                        inside == a
                    } else {
                        a.iter().all(|x| s.contains(x))
                    }
                })
                .count()
        };
        let target_intersections = subs.iter().map(|a| hit(a, false)).collect();
        let target_exclusive = subs.iter().map(|a| hit(a, true)).collect();
        let files = plan
            .files()
            .iter()
            .enumerate()
            .map(|(m, f)| {
                let sp = &spaces[m];
                let mut intersections = Vec::new();
                let mut exclusive = Vec::new();
                for a in &subs {
                    let inside: Vec<&Subspace> = a.iter().map(|&n| &sp[n]).collect();
                    let rest: Vec<&Subspace> = coalition
                        .iter()
                        .filter(|n| !a.contains(n))
                        .map(|&n| &sp[n])
                        .collect();
                    let cap = meet(&inside);
                    let shared = cap
                        .intersect(&join(&rest, field, width))
                        .expect("same ambient space");
                    intersections.push(cap.dim());
                    exclusive.push(cap.dim() - shared.dim());
                }
                let all: Vec<&Subspace> = coalition.iter().map(|&n| &sp[n]).collect();
                FileProfile {
                    file: m,
                    desired: f.role == FileRole::Desired,
                    intersections,
                    exclusive,
                    joint: join(&all, field, width).dim(),
                }
            })
            .collect();
        out.push(CoalitionProfile {
            servers: coalition,
            target_intersections,
            target_exclusive,
            files,
        });
    }
    let witness = out
        .iter()
        .find(|c| !c.consistent())
        .map(|c| c.servers.clone());
    PrivacyReport {
        verdict: witness.is_none(),
        coalitions: out,
        witness,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SpanMode {
    /// Every permutation tuple.
    Exhaustive,
    /// Random permutation tuples.
    Sampled,
    /// The plan's own queries only (echelon transmission has no secret order).
    Single,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanWitness {
    pub file: usize,
    /// Row order per server, 0-based.
    pub perms: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanReport {
    pub mode: SpanMode,
    /// Size of the permutation-tuple space per undesired file, if it fits.
    pub tuple_space: Option<u128>,
    /// Checks run, summed over undesired files.
    pub trials: usize,
    pub failures: usize,
    pub verdict: bool,
    pub witness: Option<SpanWitness>,
}

fn tuple_space(d: usize, n: usize) -> Option<u128> {
    let f = factorial(d);
    (0..n).try_fold(1u128, |acc, _| acc.checked_mul(f))
}

fn decode_tuple(mut idx: u128, d: usize, n: usize) -> Vec<Vec<usize>> {
    let f = factorial(d);
    (0..n)
        .map(|_| {
            let r = idx % f;
            idx /= f;
            unrank_permutation(d, r)
        })
        .collect()
}

/// Whether the raw downloads of file `m` span every queried functional,
/// with server `n` holding rows in order `perms[n]`.
fn spans(
    plan: &QueryPlan,
    strategy: &CombinationStrategy,
    m: usize,
    perms: Option<&[Vec<usize>]>,
    want: usize,
) -> bool {
    let params = plan.params();
    let fq = plan.file(m);
    let parts: Vec<Matrix> = (0..params.n)
        .filter(|&n| strategy.i_n[n] > 0)
        .map(|n| {
            let q = match perms {
                Some(p) => fq.permuted_query(n, &p[n]),
                None => fq.queries[n].clone(),
            };
            let rows = strategy.c_n[n]
                .try_mul(&q)
                .expect("square mixer")
                .first_rows(strategy.i_n[n]);
            plan.functionals(n, &rows)
        })
        .collect();
    let refs: Vec<&Matrix> = parts.iter().collect();
    Matrix::vstack(params.field(), params.l(), &refs)
        .map(|m| m.rank() == want)
        .unwrap_or(false)
}

/// Checks that the strategy recovers the interference for every secret row
/// order the plan could have used: exhaustively when the tuple space is at
/// most `min(budget, 10^6)`, otherwise on `budget` random tuples.
pub fn strategy_completeness_check(
    plan: &QueryPlan,
    strategy: &CombinationStrategy,
    budget: usize,
    seed: u64,
    exec: Execution,
) -> SpanReport {
    let params = plan.params();
    let (n, d) = (params.n, params.per_server());
    let undesired = plan.undesired();
    let wants: Vec<usize> = undesired
        .iter()
        .map(|&m| plan.functional_matrix(m).rank())
        .collect();

    if plan.transmission() == Transmission::Rref {
        let bad = undesired
            .iter()
            .zip(&wants)
            .find(|(&m, &w)| !spans(plan, strategy, m, None, w));
        let witness = bad.map(|(&m, _)| SpanWitness {
            file: m,
            perms: plan.file(m).perms.clone(),
        });
        return SpanReport {
            mode: SpanMode::Single,
            tuple_space: Some(1),
            trials: undesired.len(),
            failures: usize::from(witness.is_some()),
            verdict: witness.is_none(),
            witness,
        };
    }

    let space = tuple_space(d, n);
    let exhaustive = space.is_some_and(|s| s <= (budget as u128).min(EXHAUSTIVE_CAP));
    let per_file = if exhaustive {
        space.unwrap() as usize
    } else {
        budget
    };
    let mut failures = 0;
    let mut witness = None;
    for (&m, &want) in undesired.iter().zip(&wants) {
        let results = exec.map(per_file, |i| {
            let perms = if exhaustive {
                decode_tuple(i as u128, d, n)
            } else {
                let mut rng = sub_rng(seed ^ m as u64, i as u64);
                (0..n)
                    .map(|_| {
                        let mut p: Vec<usize> = (0..d).collect();
                        p.shuffle(&mut rng);
                        p
                    })
                    .collect()
            };
            let ok = spans(plan, strategy, m, Some(&perms), want);
            (ok, perms)
        });
        for (ok, perms) in results {
            if !ok {
                failures += 1;
                if witness.is_none() {
                    witness = Some(SpanWitness { file: m, perms });
                }
            }
        }
    }
    SpanReport {
        mode: if exhaustive {
            SpanMode::Exhaustive
        } else {
            SpanMode::Sampled
        },
        tuple_space: space,
        trials: per_file * undesired.len(),
        failures,
        verdict: failures == 0,
        witness,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RedundancyReport {
    /// `(file, rank of its queried functionals)` per undesired file.
    pub ranks: Vec<(usize, usize)>,
    pub expected: usize,
    /// Whether the rank must equal `expected` rather than merely not exceed it.
    pub exact: bool,
    pub verdict: bool,
}

/// Rank of the undesired functionals against the scheme's `I`.
pub fn redundancy_audit(plan: &QueryPlan) -> RedundancyReport {
    let params = plan.params();
    let expected = params.expected_i();
    let exact = params.flavor == CodeFlavor::Grs;
    let ranks: Vec<(usize, usize)> = plan
        .undesired()
        .into_iter()
        .map(|m| (m, plan.functional_matrix(m).rank()))
        .collect();
    let verdict = ranks
        .iter()
        .all(|&(_, r)| if exact { r == expected } else { r <= expected });
    RedundancyReport {
        ranks,
        expected,
        exact,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{
        build_code, build_query_plan, make_strategy, FaultTarget, SystemParams, STREAM_PLAN,
    };

    fn setup(p: &SystemParams) -> (QueryPlan, CombinationStrategy) {
        let code = build_code(p).unwrap();
        let plan = build_query_plan(p, &code, &[0], &mut sub_rng(p.seed, STREAM_PLAN)).unwrap();
        (plan, make_strategy(p, p.seed).unwrap())
    }

    #[test]
    fn honest_plans_pass() {
        for p in [
            SystemParams::new(Variant::GeneralT2, 2, 5, 2, 3, 1, 0, 1).unwrap(),
            SystemParams::new(Variant::GrsT2, 2, 5, 2, 2, 1, 0, 1).unwrap(),
            SystemParams::new(Variant::CyclicAdjacent, 2, 5, 2, 3, 1, 5, 1).unwrap(),
        ] {
            let (plan, s) = setup(&p);
            assert!(structural_privacy_audit(&plan).verdict, "{p:?}");
            assert!(redundancy_audit(&plan).verdict, "{p:?}");
            let r = strategy_completeness_check(&plan, &s, 200, 7, Execution::default());
            assert!(r.verdict, "{p:?}: {r:?}");
        }
    }

    #[test]
    fn small_case_is_exhaustive() {
        let p = SystemParams::new(Variant::GeneralT2, 2, 4, 2, 2, 1, 3, 1).unwrap();
        let (plan, s) = setup(&p);
        let r = strategy_completeness_check(&plan, &s, 10_000, 0, Execution::default());
        assert_eq!(
            (r.mode, r.trials, r.failures),
            (SpanMode::Exhaustive, 1296, 0)
        );
    }

    #[test]
    fn corrupted_common_row_breaks_privacy() {
        let p = SystemParams::new(Variant::GrsT2, 2, 5, 2, 2, 1, 0, 1).unwrap();
        let (mut plan, _) = setup(&p);
        plan.inject_fault(FaultTarget::Common, &mut sub_rng(0, 0))
            .unwrap();
        let r = structural_privacy_audit(&plan);
        assert!(!r.verdict);
        assert!(r.witness.unwrap().contains(&0));
    }

    #[test]
    fn corrupted_tilde_row_breaks_redundancy() {
        let p = SystemParams::new(Variant::GrsT2, 2, 5, 2, 2, 1, 0, 1).unwrap();
        let (mut plan, s) = setup(&p);
        plan.inject_fault(FaultTarget::Tilde, &mut sub_rng(0, 0))
            .unwrap();
        assert!(!redundancy_audit(&plan).verdict);
        assert!(!strategy_completeness_check(&plan, &s, 50, 0, Execution::Sequential).verdict);
    }

    #[test]
    fn unmixed_strategy_misses_interference() {
        let p = SystemParams::new(Variant::GeneralT2, 2, 5, 2, 3, 1, 7, 1).unwrap();
        let (plan, s) = setup(&p);
        let r =
            strategy_completeness_check(&plan, &s.without_mixing(), 2000, 3, Execution::default());
        assert_eq!(r.mode, SpanMode::Sampled);
        assert!(r.failures > 0);
        assert!(r.witness.is_some());
    }
}
