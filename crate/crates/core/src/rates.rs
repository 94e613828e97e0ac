//! Closed-form rates and capacity references, as exact rationals.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::codes::CodeFlavor;
use crate::combinatorics::binomial;
use crate::{Error, Result};

/// A reduced fraction with positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i128>);

impl Rational {
    /// Panics on a zero denominator.
    pub fn new(num: i128, den: i128) -> Self {
        Rational(Ratio::new(num, den))
    }

    pub fn num(&self) -> i128 {
        *self.0.numer()
    }

    pub fn den(&self) -> i128 {
        *self.0.denom()
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num(), self.den())
    }
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: i128,
    den: i128,
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalRepr {
            num: self.num(),
            den: self.den(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RationalRepr::deserialize(d)?;
        if r.den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Rational::new(r.num, r.den))
    }
}

fn na(msg: impl Into<String>) -> Error {
    Error::NotApplicable(msg.into())
}

fn need_gap(n: u64, k: u64) -> Result<()> {
    if k == 0 || n < k + 2 {
        return Err(na(format!("needs 1 <= K and N >= K + 2, got N={n} K={k}")));
    }
    Ok(())
}

/// `(1 + ρ + … + ρ^{M-1})^{-1}` with `ρ = (K+T-1)/N`.
pub fn fghk_rate(m: u64, n: u64, t: u64, k: u64) -> Result<Rational> {
    if m == 0 || n == 0 || t == 0 || k == 0 || k + t - 1 > n {
        return Err(na(format!("FGHK at ({m},{n},{t},{k})")));
    }
    let rho = Ratio::new((k + t - 1) as i128, n as i128);
    let mut sum = Ratio::from_integer(0);
    let mut p = Ratio::from_integer(1);
    for _ in 0..m {
        sum += p;
        p *= rho;
    }
    Ok(Rational(sum.recip()))
}

fn sq(x: u64) -> i128 {
    (x as i128) * (x as i128)
}

/// The `I`-term per undesired file, normalised so the rate is
/// `(N²−N) / ((N²−N) + term)` for the `T = 2` schemes.
fn t2_term(n: u64, k: u64, flavor: CodeFlavor) -> i128 {
    let (ni, ki) = (n as i128, k as i128);
    match flavor {
        CodeFlavor::Grs => ni * ki + ni - 2 * ki,
        CodeFlavor::GenericMds if n <= 2 * k => sq(n) - ni + sq(k) - ni * ki,
        CodeFlavor::GenericMds => 2 * ni * ki - sq(k) - ki,
    }
}

/// General-MDS two-collusion rate.
pub fn rate_theorem1(n: u64, k: u64) -> Result<Rational> {
    rate_multi(2, n, k, 1, CodeFlavor::GenericMds)
}

/// GRS two-collusion rate `(N²−N)/(N²+KN−2K)`.
pub fn rate_grs_t2(n: u64, k: u64) -> Result<Rational> {
    rate_multi(2, n, k, 1, CodeFlavor::Grs)
}

/// Rate for retrieving `p` of `m` files (with `p = 1` this is the
/// arbitrary-`M` single-file scheme).
pub fn rate_multi(m: u64, n: u64, k: u64, p: u64, flavor: CodeFlavor) -> Result<Rational> {
    need_gap(n, k)?;
    if p == 0 || p > m {
        return Err(na(format!("P={p} of M={m}")));
    }
    let base = sq(n) - n as i128;
    let pi = p as i128;
    Ok(Rational::new(
        pi * base,
        pi * base + (m - p) as i128 * t2_term(n, k, flavor),
    ))
}

/// Rate when only cyclically adjacent pairs collude.
pub fn rate_cyclic(n: u64, k: u64, flavor: CodeFlavor) -> Result<Rational> {
    need_gap(n, k)?;
    let (ni, ki) = (n as i128, k as i128);
    Ok(match flavor {
        CodeFlavor::Grs => Rational::new(ki * ni, ki * ni + sq(k) + 1),
        CodeFlavor::GenericMds if n <= 2 * k => {
            Rational::new(ki * ni, ki * ni + sq(k) - ki + ni - 1)
        }
        CodeFlavor::GenericMds => Rational::new(ni, ni + ki + 1),
    })
}

/// `δ_{T'} = C(N−T, K−T')` for `T' = 1..=T` (index `T'−1`).
pub fn deltas(n: u64, t: u64, k: u64) -> Vec<u64> {
    (1..=t)
        .map(|tp| binomial(n as i64 - t as i64, k as i64 - tp as i64))
        .collect()
}

/// `λ_{T'}` for `T' = 1..=T` (index `T'−1`).
pub fn lambdas(n: u64, t: u64, k: u64) -> Vec<u64> {
    (1..=t)
        .map(|tp| {
            if tp == 1 {
                (k + t - 1).min(n)
            } else {
                let a = n * binomial(t as i64 - 1, tp as i64 - 1);
                let b = k * binomial(t as i64, tp as i64);
                a.min(b)
            }
        })
        .collect()
}

/// Queried undesired dimension `Σ λ_{T'} δ_{T'}` of the GRS scheme for `T ≥ 3`.
pub fn general_t_dimension(n: u64, t: u64, k: u64) -> u64 {
    deltas(n, t, k)
        .iter()
        .zip(lambdas(n, t, k))
        .map(|(d, l)| d * l)
        .sum()
}

/// `L / (L + Σ λ δ)` with `L = C(N,K)·K`.
pub fn rate_general_t(n: u64, t: u64, k: u64) -> Result<Rational> {
    if t < 3 || k == 0 || n < k + t {
        return Err(na(format!("general-T rate at N={n} T={t} K={k}")));
    }
    let l = binomial(n as i64, k as i64) as i128 * k as i128;
    Ok(Rational::new(l, l + general_t_dimension(n, t, k) as i128))
}

/// The two-branch `T = 3` expression, kept separately as a cross-check.
pub fn rate_t3_piecewise(n: u64, k: u64) -> Result<Rational> {
    need_gap(n, k)?;
    let (ni, ki) = (n as i128, k as i128);
    let num = ni * (ni - 1) * (ni - 2);
    let den = if 2 * n > 3 * k {
        ni.pow(3) - ni * ni + ni * ki * ki + ki * ni * ni - ki.pow(3) + 3 * ki * ki - 8 * ni * ki
            + 4 * ki
    } else {
        ni.pow(3) - 3 * ni * ni + 3 * ni * ni * ki - 4 * ni * ki * ki - 3 * ni * ki
            + 2 * ki.pow(3)
            + 4 * ki
    };
    Ok(Rational::new(num, den))
}

/// Linear capacity of `(2, N, 2, 2)`: `(N²−N)/(N²+2N−4)`.
pub fn linear_capacity_k2(n: u64) -> Result<Rational> {
    if n < 4 {
        return Err(na(format!("linear capacity needs N >= 4, got {n}")));
    }
    let ni = n as i128;
    Ok(Rational::new(sq(n) - ni, sq(n) + 2 * ni - 4))
}

/// Capacity under cyclically adjacent collusion, `NK/(NK+K²+1)`.
pub fn cyclic_capacity(n: u64, k: u64) -> Result<Rational> {
    need_gap(n, k)?;
    let (ni, ki) = (n as i128, k as i128);
    Ok(Rational::new(ni * ki, ni * ki + sq(k) + 1))
}

/// Capacity for `K = N−1`: `(N²−N)/(2N²−3N+T)`.
pub fn sun_jafar_capacity(n: u64, t: u64) -> Result<Rational> {
    if n < 2 || t == 0 || t >= n {
        return Err(na(format!("K = N-1 capacity at N={n} T={t}")));
    }
    let (ni, ti) = (n as i128, t as i128);
    Ok(Rational::new(sq(n) - ni, 2 * sq(n) - 3 * ni + ti))
}

/// A labelled reference value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityRef {
    pub label: String,
    pub value: Rational,
}

/// All reference values that apply at `(M = 2, N, T, K)`.
pub fn capacity_refs(n: u64, t: u64, k: u64) -> Vec<CapacityRef> {
    let mut out = Vec::new();
    let mut push = |label: &str, r: Result<Rational>| {
        if let Ok(value) = r {
            out.push(CapacityRef {
                label: label.to_string(),
                value,
            });
        }
    };
    push("fghk_conjecture", fghk_rate(2, n, t, k));
    if k + 1 == n {
        push("capacity_k_eq_n_minus_1", sun_jafar_capacity(n, t));
    }
    if t == 2 && k == 2 {
        push("linear_capacity_k2", linear_capacity_k2(n));
    }
    if t == 2 {
        // Adjacent-only collusion is weaker, so this bounds the full
        // two-collusion capacity from above; the GRS rate bounds it from below.
        push("cyclic_capacity", cyclic_capacity(n, k));
        push("t2_lower_bound_grs", rate_grs_t2(n, k));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use CodeFlavor::{GenericMds, Grs};

    fn r(a: i128, b: i128) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn fghk_values() {
        assert_eq!(fghk_rate(2, 4, 2, 2).unwrap(), r(4, 7));
        assert_eq!(fghk_rate(2, 5, 2, 3).unwrap(), r(5, 9));
        assert_eq!(fghk_rate(2, 6, 3, 3).unwrap(), r(6, 11));
        assert_eq!(fghk_rate(2, 5, 2, 2).unwrap(), r(5, 8));
    }

    #[test]
    fn two_collusion_values() {
        assert_eq!(rate_theorem1(4, 2).unwrap(), r(3, 5));
        assert_eq!(rate_theorem1(5, 3).unwrap(), r(10, 17));
        assert_eq!(rate_theorem1(5, 2).unwrap(), r(10, 17));
        assert_eq!(rate_grs_t2(5, 2).unwrap(), r(20, 31));
        assert_eq!(rate_grs_t2(5, 3).unwrap(), r(20, 34));
        assert_eq!(rate_grs_t2(5, 3).unwrap().to_string(), "10/17");
    }

    #[test]
    fn multi_file_values() {
        assert_eq!(rate_multi(3, 5, 2, 2, Grs).unwrap(), r(40, 51));
        assert_eq!(rate_multi(3, 5, 2, 3, Grs).unwrap(), r(1, 1));
        assert_eq!(
            rate_multi(2, 5, 2, 1, Grs).unwrap(),
            rate_grs_t2(5, 2).unwrap()
        );
    }

    #[test]
    fn cyclic_values() {
        assert_eq!(rate_cyclic(5, 3, GenericMds).unwrap(), r(3, 5));
        assert_eq!(rate_cyclic(5, 3, Grs).unwrap(), r(15, 25));
        assert_eq!(rate_cyclic(7, 2, GenericMds).unwrap(), r(7, 10));
    }

    #[test]
    fn general_t_values() {
        assert_eq!(rate_general_t(6, 3, 3).unwrap(), r(4, 7));
        assert_eq!(rate_t3_piecewise(6, 3).unwrap(), r(120, 210));
        assert_eq!(general_t_dimension(6, 3, 3), 45);
        assert_eq!(
            deltas(7, 3, 3),
            vec![binomial(4, 2), binomial(4, 1), binomial(4, 0)]
        );
    }

    #[test]
    fn t3_branches_agree_with_general_formula() {
        for n in 5..=20u64 {
            for k in 1..=n - 3 {
                assert_eq!(
                    rate_general_t(n, 3, k).unwrap(),
                    rate_t3_piecewise(n, k).unwrap(),
                    "N={n} K={k}"
                );
            }
        }
    }

    #[test]
    fn references() {
        let refs = capacity_refs(4, 2, 3);
        let kn1 = refs
            .iter()
            .find(|c| c.label == "capacity_k_eq_n_minus_1")
            .unwrap();
        assert_eq!(kn1.value, r(12, 22));
        let lin = capacity_refs(7, 2, 2);
        assert!(lin
            .iter()
            .any(|c| c.label == "linear_capacity_k2" && c.value == r(42, 59)));
        let cyc = capacity_refs(5, 2, 3);
        assert!(cyc
            .iter()
            .any(|c| c.label == "cyclic_capacity" && c.value == r(15, 25)));
        assert!(!capacity_refs(6, 3, 3)
            .iter()
            .any(|c| c.label == "cyclic_capacity"));
    }

    #[test]
    fn out_of_domain() {
        assert!(matches!(rate_theorem1(4, 3), Err(Error::NotApplicable(_))));
        assert!(matches!(
            rate_general_t(5, 3, 3),
            Err(Error::NotApplicable(_))
        ));
        assert!(matches!(
            fghk_rate(2, 3, 2, 3),
            Err(Error::NotApplicable(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn always_reduced(n in 4u64..40, kk in 0u64..36) {
                let k = 1 + kk % (n - 3);
                for x in [rate_theorem1(n, k), rate_grs_t2(n, k), rate_cyclic(n, k, Grs)] {
                    let x = x.unwrap();
                    prop_assert_eq!(num_integer::gcd(x.num(), x.den()), 1);
                    prop_assert!(x.den() > 0);
                }
            }
        }
    }
}
