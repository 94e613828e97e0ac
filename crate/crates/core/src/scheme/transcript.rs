use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::exec::{reconstruct, server_answer, store_files, FileSet};
use super::plan::{build_query_plan, QueryPlan};
use super::strategy::{make_strategy, CombinationStrategy};
use super::SystemParams;
use crate::codes::{CodeFlavor, GrsSpec, StorageCode, MAX_RETRIES};
use crate::parallel::Execution;
use crate::rates::Rational;
use crate::{Error, Result};

pub const STREAM_CODE: u64 = 1;
pub const STREAM_PLAN: u64 = 2;
pub const STREAM_STRATEGY: u64 = 3;
pub const STREAM_FILES: u64 = 4;
pub const STREAM_TRIALS: u64 = 5;

/// Independent deterministic stream `stream` of `seed`.
pub fn sub_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The storage code for a run: standard GRS, or a random systematic MDS code
/// drawn from the run seed.
pub fn build_code(params: &SystemParams) -> Result<StorageCode> {
    let field = params.field();
    match params.flavor {
        CodeFlavor::Grs => Ok(StorageCode::grs(GrsSpec::standard(
            field, params.n, params.k,
        )?)),
        CodeFlavor::GenericMds => StorageCode::random_systematic(
            field,
            params.n,
            params.k,
            &mut sub_rng(params.seed, STREAM_CODE),
            MAX_RETRIES,
        ),
    }
}

/// The plan a retrieval seeded with `seed` uses, including the uniformly
/// drawn desired files.
pub fn seeded_plan(params: &SystemParams, code: &StorageCode, seed: u64) -> Result<QueryPlan> {
    let mut rng = sub_rng(seed, STREAM_PLAN);
    let mut desired = sample(&mut rng, params.m, params.p).into_vec();
    desired.sort_unstable();
    build_query_plan(params, code, &desired, &mut rng)
}

/// The strategy a retrieval seeded with `seed` uses.
pub fn seeded_strategy(params: &SystemParams, seed: u64) -> Result<CombinationStrategy> {
    make_strategy(params, sub_rng(seed, STREAM_STRATEGY).gen())
}

/// Result of one full retrieval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub desired: Vec<usize>,
    pub i_n: Vec<usize>,
    pub answer_symbols: Vec<usize>,
    /// `None` on success, the decoding error otherwise.
    pub failure: Option<Error>,
}

impl TrialOutcome {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    pub fn download_total(&self) -> usize {
        self.answer_symbols.iter().sum()
    }
}

/// Runs one retrieval with fresh plan, strategy and files drawn from
/// `trial_seed`. Decoding failures (wrong output or a span failure) are
/// reported in the outcome; anything else is an error.
pub fn run_trial(
    params: &SystemParams,
    code: &StorageCode,
    trial_seed: u64,
) -> Result<TrialOutcome> {
    let plan = seeded_plan(params, code, trial_seed)?;
    let desired = plan.desired().to_vec();
    let strategy = seeded_strategy(params, trial_seed)?;
    let files = FileSet::random(params, &mut sub_rng(trial_seed, STREAM_FILES));
    let stored = store_files(&files, code)?;
    let answers = (0..params.n)
        .map(|n| server_answer(&plan, &strategy, n, &stored[n]))
        .collect::<Result<Vec<_>>>()?;
    let failure = match reconstruct(&plan, &strategy, &answers) {
        Ok(got) => {
            let ok = desired.iter().zip(&got).all(|(&m, w)| *w == files.files[m]);
            (!ok).then_some(Error::NoSolution)
        }
        Err(e @ Error::SpanFailure { .. }) => Some(e),
        Err(e) => return Err(e),
    };
    Ok(TrialOutcome {
        desired,
        i_n: strategy.i_n,
        answer_symbols: answers.iter().map(|a| a.symbol_count()).collect(),
        failure,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptParams {
    pub m: usize,
    pub n: usize,
    pub t: usize,
    pub k: usize,
    pub p: usize,
    pub variant: String,
    pub q: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerRecord {
    /// 1-based.
    pub server: usize,
    pub i_n: usize,
    pub answer_symbols: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonTrials {
    pub runs: usize,
    pub failures: usize,
}

/// Machine-readable record of a simulated run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub params: TranscriptParams,
    pub per_server: Vec<ServerRecord>,
    pub download_total: usize,
    pub l: usize,
    pub achieved_rate: Rational,
    pub closed_form_rate: Rational,
    pub success: bool,
    pub epsilon_trials: EpsilonTrials,
}

impl Transcript {
    /// Successful and on the closed-form rate.
    pub fn matches_closed_form(&self) -> bool {
        self.success && self.achieved_rate == self.closed_form_rate
    }
}

/// Runs `trials` independent retrievals (at least one) and summarizes them.
pub fn simulate(params: &SystemParams, trials: usize, exec: Execution) -> Result<Transcript> {
    let code = build_code(params)?;
    let trials = trials.max(1);
    let mut seeds = sub_rng(params.seed, STREAM_TRIALS);
    let seeds: Vec<u64> = (0..trials).map(|_| seeds.gen()).collect();
    let outcomes = exec
        .map(trials, |i| run_trial(params, &code, seeds[i]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let failures = outcomes.iter().filter(|o| !o.succeeded()).count();
    let first = &outcomes[0];
    let download_total = first.download_total();
    let l = params.l();
    Ok(Transcript {
        params: TranscriptParams {
            m: params.m,
            n: params.n,
            t: params.t,
            k: params.k,
            p: params.p,
            variant: params.variant.name().to_string(),
            q: params.q,
            seed: params.seed,
        },
        per_server: first
            .i_n
            .iter()
            .zip(&first.answer_symbols)
            .enumerate()
            .map(|(n, (&i_n, &answer_symbols))| ServerRecord {
                server: n + 1,
                i_n,
                answer_symbols,
            })
            .collect(),
        download_total,
        l,
        achieved_rate: Rational::new((params.p * l) as i128, download_total as i128),
        closed_form_rate: params.closed_form_rate()?,
        success: failures == 0,
        epsilon_trials: EpsilonTrials {
            runs: trials,
            failures,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::super::Variant;
    use super::*;

    #[test]
    fn simulate_hits_closed_form() {
        let p = SystemParams::new(Variant::GrsT2, 2, 5, 2, 2, 1, 0, 4).unwrap();
        let t = simulate(&p, 2, Execution::Sequential).unwrap();
        assert!(t.matches_closed_form());
        assert_eq!(t.achieved_rate, Rational::new(20, 31));
        assert_eq!(t.download_total, 31);
    }

    #[test]
    fn simulate_is_deterministic_across_modes() {
        let p = SystemParams::new(Variant::GeneralT2, 2, 5, 2, 3, 1, 0, 11).unwrap();
        let a = simulate(&p, 3, Execution::Sequential).unwrap();
        let b = simulate(&p, 3, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
