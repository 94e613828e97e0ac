//! The retrieval protocol: query plans (disguise), combination strategies
//! (squeeze), server answers and decoding.
//!
//! Indices are 0-based throughout the library. A file is an `L_col x K`
//! matrix and server `n` stores `W·g_n`, where `g_n` is column `n` of the
//! storage generator.

mod exec;
mod plan;
mod strategy;
mod transcript;

pub use exec::{reconstruct, server_answer, store_files, FileSet, ServerAnswer};
pub use plan::{
    build_query_plan, design_v_sets, design_v_sets_cyclic, FaultTarget, FaultWitness, FileQueries,
    FileRole, QueryPlan, RowRole, Transmission,
};
pub use strategy::{make_strategy, raw_counts, CombinationStrategy};
pub use transcript::{
    build_code, run_trial, seeded_plan, seeded_strategy, simulate, sub_rng, EpsilonTrials,
    ServerRecord, Transcript, TranscriptParams, TrialOutcome, STREAM_CODE, STREAM_FILES,
    STREAM_PLAN, STREAM_STRATEGY, STREAM_TRIALS,
};

use serde::{Deserialize, Serialize};

use crate::codes::CodeFlavor;
use crate::combinatorics::binomial;
use crate::gf::{smallest_prime_geq, Field};
use crate::rates::{self, Rational};
use crate::{Error, Result};

/// Which protocol is run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Any MDS storage code, two colluding servers.
    GeneralT2,
    /// GRS storage, two colluding servers, maximal squeezing.
    GrsT2,
    /// Retrieve `P` of `M` files at once.
    MultiFile,
    /// Only cyclically adjacent servers collude.
    CyclicAdjacent,
    /// GRS storage, `T >= 3` colluding servers, randomized strategy.
    GeneralT,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::GeneralT2,
        Variant::GrsT2,
        Variant::MultiFile,
        Variant::CyclicAdjacent,
        Variant::GeneralT,
    ];

    /// The name used on the command line and in transcripts.
    pub fn name(self) -> &'static str {
        match self {
            Variant::GeneralT2 => "general",
            Variant::GrsT2 => "grs",
            Variant::MultiFile => "multifile",
            Variant::CyclicAdjacent => "cyclic",
            Variant::GeneralT => "generalT",
        }
    }

    pub fn from_name(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == s)
    }

    /// Storage flavor used unless overridden.
    pub fn default_flavor(self) -> CodeFlavor {
        match self {
            Variant::GeneralT2 | Variant::CyclicAdjacent => CodeFlavor::GenericMds,
            Variant::GrsT2 | Variant::MultiFile | Variant::GeneralT => CodeFlavor::Grs,
        }
    }

    /// Whether the randomized (possibly failing) strategy is used.
    pub fn is_randomized(self) -> bool {
        self == Variant::GeneralT
    }
}

/// A validated parameter point `(M, N, T, K)` plus variant, field and seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemParams {
    pub m: usize,
    pub n: usize,
    pub t: usize,
    pub k: usize,
    /// Number of desired files; 1 except for [`Variant::MultiFile`].
    pub p: usize,
    pub variant: Variant,
    pub flavor: CodeFlavor,
    pub q: u64,
    pub seed: u64,
}

impl SystemParams {
    /// Builds and validates. `q = 0` selects the field automatically.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        variant: Variant,
        m: usize,
        n: usize,
        t: usize,
        k: usize,
        p: usize,
        q: u64,
        seed: u64,
    ) -> Result<Self> {
        Self::with_flavor(variant, variant.default_flavor(), m, n, t, k, p, q, seed)
    }

    /// Like [`SystemParams::new`] with an explicit storage flavor.
    #[allow(clippy::too_many_arguments)]
    pub fn with_flavor(
        variant: Variant,
        flavor: CodeFlavor,
        m: usize,
        n: usize,
        t: usize,
        k: usize,
        p: usize,
        q: u64,
        seed: u64,
    ) -> Result<Self> {
        let mut params = SystemParams {
            m,
            n,
            t,
            k,
            p,
            variant,
            flavor,
            q,
            seed,
        };
        params.check_shape()?;
        if q == 0 {
            params.q = params.auto_q();
        }
        params.validate()?;
        Ok(params)
    }

    fn check_shape(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        let (m, n, t, k, p) = (self.m, self.n, self.t, self.k, self.p);
        if m < 2 {
            return bad(format!("M={m}: at least two files are needed"));
        }
        if k == 0 {
            return bad("K=0".into());
        }
        if t == 0 || t >= n {
            return bad(format!("T={t} must satisfy 1 <= T < N={n}"));
        }
        match self.variant {
            Variant::GeneralT2 | Variant::GrsT2 | Variant::MultiFile | Variant::CyclicAdjacent
                if t != 2 =>
            {
                return bad(format!(
                    "variant {} needs T=2, got {t}",
                    self.variant.name()
                ));
            }
            Variant::GeneralT if t < 3 => {
                return bad(format!("variant generalT needs T>=3, got {t}"))
            }
            _ => {}
        }
        if n < k + t {
            return bad(format!("N={n} < K+T={}", k + t));
        }
        if matches!(self.variant, Variant::GrsT2 | Variant::GeneralT)
            && self.flavor != CodeFlavor::Grs
        {
            return bad(format!("variant {} needs GRS storage", self.variant.name()));
        }
        if self.variant == Variant::GeneralT2 && self.flavor != CodeFlavor::GenericMds {
            return bad("variant general uses generic MDS storage; use grs for GRS codes".into());
        }
        if matches!(self.variant, Variant::CyclicAdjacent | Variant::GeneralT) && m != 2 {
            return bad(format!(
                "variant {} is defined for M=2",
                self.variant.name()
            ));
        }
        let multi = self.variant == Variant::MultiFile;
        if (!multi && p != 1) || (multi && (p == 0 || p > m)) {
            return bad(format!("P={p} with M={m}"));
        }
        Ok(())
    }

    /// Full validation, including the field.
    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        Field::new(self.q)?;
        let need = self.min_field_size();
        if self.q < need {
            return Err(Error::FieldTooSmall { q: self.q, need });
        }
        Ok(())
    }

    /// Smallest `q` the constructions need.
    pub fn min_field_size(&self) -> u64 {
        let mut need = 2u64;
        if self.variant != Variant::GeneralT {
            // Distinct Vandermonde nodes for the intermediate servers.
            need = need.max(self.per_server() as u64);
        } else {
            need = need.max(self.n as u64 - 1);
        }
        if self.flavor == CodeFlavor::Grs {
            need = need.max(self.n as u64);
        }
        if self.variant == Variant::MultiFile {
            need = need.max(self.m as u64);
        }
        need
    }

    /// Default field: smallest prime covering the constructions, or at least
    /// 2^16 for the randomized strategy.
    pub fn auto_q(&self) -> u64 {
        let base = (self.n as u64)
            .max(binomial(self.n as i64 - 1, self.k as i64 - 1))
            .max(self.min_field_size());
        if self.variant.is_randomized() {
            smallest_prime_geq(base.max(1 << 16))
        } else {
            smallest_prime_geq(base)
        }
    }

    pub fn field(&self) -> Field {
        Field::new(self.q).expect("validated")
    }

    /// Number of `V` vectors, i.e. the row length of every query.
    pub fn vector_count(&self) -> usize {
        match self.variant {
            Variant::CyclicAdjacent => self.n,
            _ => binomial(self.n as i64, self.k as i64) as usize,
        }
    }

    /// Symbols per file, `L`.
    pub fn l(&self) -> usize {
        self.vector_count() * self.k
    }

    /// Queried symbols per server per file, `L/N`.
    pub fn per_server(&self) -> usize {
        self.l() / self.n
    }

    pub fn single_file(&self) -> bool {
        self.variant != Variant::MultiFile
    }

    /// Number of trailing servers that only send sums (two-collusion variants).
    pub fn zeta(&self) -> usize {
        let (n, k) = (self.n, self.k);
        match self.flavor {
            CodeFlavor::Grs => n - k - 1,
            CodeFlavor::GenericMds => 1.max(n.saturating_sub(2 * k)),
        }
    }

    /// `σ = C(N−2, K−2)`.
    pub fn sigma(&self) -> usize {
        binomial(self.n as i64 - 2, self.k as i64 - 2) as usize
    }

    /// `μ = C(N−2, K−1)`.
    pub fn mu(&self) -> usize {
        binomial(self.n as i64 - 2, self.k as i64 - 1) as usize
    }

    /// The number `I` of undesired symbols downloaded per undesired file.
    pub fn expected_i(&self) -> usize {
        let (n, k) = (self.n, self.k);
        match self.variant {
            Variant::GeneralT2 | Variant::GrsT2 | Variant::MultiFile => {
                self.l() - self.sigma() * (n - k) - self.mu() * self.zeta()
            }
            Variant::CyclicAdjacent => self.l() - (k - 1) * (n - k) - self.zeta(),
            Variant::GeneralT => {
                rates::general_t_dimension(n as u64, self.t as u64, k as u64) as usize
            }
        }
    }

    /// Closed-form rate for this parameter point.
    pub fn closed_form_rate(&self) -> Result<Rational> {
        let (m, n, t, k, p) = (
            self.m as u64,
            self.n as u64,
            self.t as u64,
            self.k as u64,
            self.p as u64,
        );
        match self.variant {
            Variant::GeneralT2 | Variant::GrsT2 | Variant::MultiFile => {
                rates::rate_multi(m, n, k, p, self.flavor)
            }
            Variant::CyclicAdjacent => rates::rate_cyclic(n, k, self.flavor),
            Variant::GeneralT => rates::rate_general_t(n, t, k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_degenerate_points() {
        let p = |v, m, n, t, k, pp| SystemParams::new(v, m, n, t, k, pp, 0, 1);
        assert!(p(Variant::GeneralT2, 1, 5, 2, 3, 1).is_err());
        assert!(p(Variant::GeneralT2, 2, 5, 2, 0, 1).is_err());
        assert!(p(Variant::GeneralT2, 2, 5, 5, 1, 1).is_err());
        assert!(p(Variant::GeneralT2, 2, 4, 2, 3, 1).is_err());
        assert!(p(Variant::GeneralT, 2, 6, 2, 3, 1).is_err());
        assert!(p(Variant::MultiFile, 3, 5, 2, 2, 4).is_err());
        let e = SystemParams::new(Variant::GrsT2, 2, 5, 2, 2, 1, 3, 1).unwrap_err();
        assert_eq!(e, Error::FieldTooSmall { q: 3, need: 5 });
        assert_eq!(
            SystemParams::new(Variant::GrsT2, 2, 5, 2, 2, 1, 6, 1).unwrap_err(),
            Error::NotPrime(6)
        );
    }

    #[test]
    fn auto_field() {
        let p = SystemParams::new(Variant::GeneralT2, 2, 5, 2, 3, 1, 0, 1).unwrap();
        assert_eq!(p.q, 7);
        let p = SystemParams::new(Variant::GrsT2, 2, 5, 2, 2, 1, 0, 1).unwrap();
        assert_eq!(p.q, 5);
        let p = SystemParams::new(Variant::GeneralT, 2, 6, 3, 3, 1, 0, 1).unwrap();
        assert_eq!(p.q, 65537);
        // The small-field layout works over F_3.
        assert!(SystemParams::new(Variant::GeneralT2, 2, 4, 2, 2, 1, 3, 1).is_ok());
    }

    #[test]
    fn counts() {
        let p = SystemParams::new(Variant::GeneralT2, 2, 5, 2, 3, 1, 7, 1).unwrap();
        assert_eq!(
            (p.l(), p.per_server(), p.sigma(), p.mu(), p.zeta()),
            (30, 6, 3, 3, 1)
        );
        assert_eq!(p.expected_i(), 21);
        let g = SystemParams::new(Variant::GrsT2, 2, 5, 2, 2, 1, 5, 1).unwrap();
        assert_eq!(g.expected_i(), 11);
        let c = SystemParams::new(Variant::CyclicAdjacent, 2, 5, 2, 3, 1, 5, 1).unwrap();
        assert_eq!((c.l(), c.expected_i()), (15, 10));
        let t3 = SystemParams::new(Variant::GeneralT, 2, 6, 3, 3, 1, 0, 1).unwrap();
        assert_eq!(t3.expected_i(), 45);
    }

    #[test]
    fn variant_names_roundtrip() {
        for v in Variant::ALL {
            assert_eq!(Variant::from_name(v.name()), Some(v));
        }
    }
}
