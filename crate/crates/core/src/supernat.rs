//! Supernatural numbers and the isomorphism criteria for the UHF-flavored
//! invariants built from them.
//!
//! A supernatural number is a map from the primes to `{0, 1, 2, ...} ∪ {∞}`.
//! We store a default exponent (`0` or `∞`) together with finitely many
//! exceptions, so both ordinary naturals and products like `∏_p p^∞` are
//! representable exactly.
//!
//! Three comparison regimes appear downstream:
//! - `Λ(N) ≅ Λ(M)` iff `N = M` ([`lambda_iso`]),
//! - `Υ(N) ≅ Υ(M)` iff `nN = mM` for some naturals `n, m` ([`upsilon_iso`]),
//! - sequences `(N_i) ~ (M_i)` via a permutation and per-index multipliers
//!   with equal products ([`seq_equiv`]).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// An exponent: a finite natural or `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Exp {
    Finite(u32),
    Inf,
}

impl Exp {
    fn add(self, other: Exp) -> Exp {
        match (self, other) {
            (Exp::Finite(a), Exp::Finite(b)) => Exp::Finite(a + b),
            _ => Exp::Inf,
        }
    }

    pub fn is_inf(self) -> bool {
        self == Exp::Inf
    }
}

impl fmt::Display for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exp::Finite(e) => write!(f, "{e}"),
            Exp::Inf => write!(f, "inf"),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// A supernatural number in canonical form: a default exponent (`0` or `∞`)
/// and finitely many exceptions, none equal to the default.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SupernaturalNumber {
    default: Exp,
    exceptions: BTreeMap<u64, Exp>,
}

impl SupernaturalNumber {
    /// The supernatural number `1` (all exponents zero).
    pub fn one() -> Self {
        SupernaturalNumber { default: Exp::Finite(0), exceptions: BTreeMap::new() }
    }

    /// `∏_p p^∞`, the largest supernatural number.
    pub fn omnibus() -> Self {
        SupernaturalNumber { default: Exp::Inf, exceptions: BTreeMap::new() }
    }

    /// Builds from a default exponent and exception map; non-prime keys are
    /// rejected and exceptions equal to the default are stripped.
    pub fn new(default: Exp, exceptions: BTreeMap<u64, Exp>) -> Result<Self> {
        if !matches!(default, Exp::Finite(0) | Exp::Inf) {
            return Err(Error::InvalidInput(format!(
                "default exponent must be 0 or inf, got {default}"
            )));
        }
        for &p in exceptions.keys() {
            if !is_prime(p) {
                return Err(Error::InvalidInput(format!("exception key {p} is not prime")));
            }
        }
        let exceptions = exceptions.into_iter().filter(|&(_, e)| e != default).collect();
        Ok(SupernaturalNumber { default, exceptions })
    }

    /// Embeds an ordinary natural number by trial-division factorization.
    pub fn from_natural(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("0 is not a supernatural number".into()));
        }
        let mut exceptions = BTreeMap::new();
        let mut rest = n;
        let mut p = 2;
        while p * p <= rest {
            let mut e = 0u32;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            if e > 0 {
                exceptions.insert(p, Exp::Finite(e));
            }
            p += 1;
        }
        if rest > 1 {
            exceptions.insert(rest, Exp::Finite(1));
        }
        Ok(SupernaturalNumber { default: Exp::Finite(0), exceptions })
    }

    /// Convenience constructor `p^∞`.
    pub fn prime_power_inf(p: u64) -> Result<Self> {
        Self::new(Exp::Finite(0), BTreeMap::from([(p, Exp::Inf)]))
    }

    /// The exponent at prime `p`.
    pub fn exponent(&self, p: u64) -> Exp {
        self.exceptions.get(&p).copied().unwrap_or(self.default)
    }

    pub fn default_exponent(&self) -> Exp {
        self.default
    }

    pub fn exceptions(&self) -> &BTreeMap<u64, Exp> {
        &self.exceptions
    }

    /// True if infinitely many primes divide it, counted with multiplicity.
    pub fn is_infinite(&self) -> bool {
        self.default.is_inf() || self.exceptions.values().any(|e| e.is_inf())
    }

    /// True if all exponents are finite and cofinitely zero.
    pub fn is_natural(&self) -> bool {
        !self.is_infinite()
    }

    /// The value as an ordinary natural; defined only when [`is_natural`]
    /// holds.
    ///
    /// [`is_natural`]: SupernaturalNumber::is_natural
    pub fn value(&self) -> Result<BigUint> {
        if self.is_infinite() {
            return Err(Error::Precondition("infinite supernatural number has no value".into()));
        }
        let mut v = BigUint::one();
        for (&p, &e) in &self.exceptions {
            let Exp::Finite(e) = e else { unreachable!() };
            v *= BigUint::from(p).pow(e);
        }
        Ok(v)
    }

    /// Pointwise exponent sum (the product `N·M`); `∞` absorbs.
    pub fn mul(&self, other: &SupernaturalNumber) -> SupernaturalNumber {
        self.merge(other, Exp::add)
    }

    /// Pointwise exponent maximum (the least common multiple).
    pub fn lcm(&self, other: &SupernaturalNumber) -> SupernaturalNumber {
        self.merge(other, Exp::max)
    }

    fn merge(
        &self,
        other: &SupernaturalNumber,
        f: impl Fn(Exp, Exp) -> Exp,
    ) -> SupernaturalNumber {
        let default = f(self.default, other.default);
        let exceptions = self
            .exceptions
            .keys()
            .chain(other.exceptions.keys())
            .map(|&p| (p, f(self.exponent(p), other.exponent(p))))
            .filter(|&(_, e)| e != default)
            .collect();
        SupernaturalNumber { default, exceptions }
    }

    /// Pointwise exponent comparison `self(p) <= other(p)` for all primes.
    pub fn divides(&self, other: &SupernaturalNumber) -> bool {
        if self.default > other.default {
            return false;
        }
        self.exceptions
            .keys()
            .chain(other.exceptions.keys())
            .all(|&p| self.exponent(p) <= other.exponent(p))
    }
}

impl fmt::Display for SupernaturalNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.default.is_inf() {
            write!(f, "all^inf")?;
            for (&p, &e) in &self.exceptions {
                write!(f, "*{p}^{e}")?;
            }
            return Ok(());
        }
        if self.exceptions.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (&p, &e) in &self.exceptions {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            match e {
                Exp::Finite(1) => write!(f, "{p}")?,
                e => write!(f, "{p}^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SupernaturalNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SupernaturalNumber({self})")
    }
}

// JSON form: {"default": "0"|"inf", "exp": {"2": "inf", "3": "4"}}.
// Exponents travel as strings so "inf" needs no special casing downstream.
#[derive(Serialize, Deserialize)]
struct SnRepr {
    default: String,
    exp: BTreeMap<String, String>,
}

fn exp_to_string(e: Exp) -> String {
    e.to_string()
}

fn exp_from_str(s: &str) -> std::result::Result<Exp, String> {
    if s == "inf" {
        Ok(Exp::Inf)
    } else {
        s.parse().map(Exp::Finite).map_err(|_| format!("bad exponent {s:?}"))
    }
}

impl Serialize for SupernaturalNumber {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        SnRepr {
            default: exp_to_string(self.default),
            exp: self
                .exceptions
                .iter()
                .map(|(&p, &e)| (p.to_string(), exp_to_string(e)))
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for SupernaturalNumber {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = SnRepr::deserialize(de)?;
        let default = exp_from_str(&repr.default).map_err(D::Error::custom)?;
        let mut exceptions = BTreeMap::new();
        for (p, e) in &repr.exp {
            let p: u64 = p.parse().map_err(|_| D::Error::custom(format!("bad prime {p:?}")))?;
            exceptions.insert(p, exp_from_str(e).map_err(D::Error::custom)?);
        }
        SupernaturalNumber::new(default, exceptions).map_err(D::Error::custom)
    }
}

/// `Λ(N) ≅ Λ(M)` iff the supernatural numbers are equal.
pub fn lambda_iso(n: &SupernaturalNumber, m: &SupernaturalNumber) -> bool {
    n == m
}

/// `Υ(N) ≅ Υ(M)` decision with minimal natural witnesses `(n, m)` such that
/// `n·N = m·M`; both arguments must be infinite.
pub fn upsilon_iso(
    n: &SupernaturalNumber,
    m: &SupernaturalNumber,
) -> Result<Option<(BigUint, BigUint)>> {
    for (name, x) in [("first", n), ("second", m)] {
        if !x.is_infinite() {
            return Err(Error::Precondition(format!(
                "{name} argument {x} is finite; the criterion applies to infinite supernatural numbers"
            )));
        }
    }
    // A finite multiplier changes only finitely many exponents, by finite
    // amounts: every `∞` must already match, and so must the defaults.
    if n.default != m.default {
        return Ok(None);
    }
    let mut wn = BigUint::one();
    let mut wm = BigUint::one();
    for &p in n.exceptions.keys().chain(m.exceptions.keys()) {
        match (n.exponent(p), m.exponent(p)) {
            (Exp::Inf, Exp::Inf) => {}
            (Exp::Inf, _) | (_, Exp::Inf) => return Ok(None),
            (Exp::Finite(a), Exp::Finite(b)) => {
                if b > a {
                    wn *= BigUint::from(p).pow(b - a);
                } else if a > b {
                    wm *= BigUint::from(p).pow(a - b);
                }
            }
        }
    }
    Ok(Some((wn, wm)))
}

/// A certificate for the sequence relation: a permutation `σ` and per-index
/// natural multipliers with `n_i·N_i = m_i·M_{σ(i)}` and `∏n_i = ∏m_i`.
///
/// Multipliers are stored as (finite) supernatural numbers, i.e. in factored
/// form; [`SupernaturalNumber::value`] recovers the ordinary natural.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqEquivWitness {
    /// `sigma[i]` is the index into the second sequence matched with `N_i`.
    pub sigma: Vec<usize>,
    pub n_multipliers: Vec<SupernaturalNumber>,
    pub m_multipliers: Vec<SupernaturalNumber>,
}

impl SeqEquivWitness {
    /// Re-verifies the certificate against the two sequences.
    pub fn verify(&self, ns: &[SupernaturalNumber], ms: &[SupernaturalNumber]) -> Result<()> {
        let k = ns.len();
        if ms.len() != k
            || self.sigma.len() != k
            || self.n_multipliers.len() != k
            || self.m_multipliers.len() != k
        {
            return Err(Error::InvalidInput("witness length mismatch".into()));
        }
        let mut seen = vec![false; k];
        for &j in &self.sigma {
            if j >= k || std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidInput("sigma is not a permutation".into()));
            }
        }
        let mut prod_n = SupernaturalNumber::one();
        let mut prod_m = SupernaturalNumber::one();
        for i in 0..k {
            let ni = &self.n_multipliers[i];
            let mi = &self.m_multipliers[i];
            if !ni.is_natural() || !mi.is_natural() {
                return Err(Error::InvalidInput("multipliers must be finite".into()));
            }
            if ni.mul(&ns[i]) != mi.mul(&ms[self.sigma[i]]) {
                return Err(Error::InvalidInput(format!(
                    "index {i}: {ni}*{} != {mi}*{}",
                    ns[i],
                    ms[self.sigma[i]]
                )));
            }
            prod_n = prod_n.mul(ni);
            prod_m = prod_m.mul(mi);
        }
        if prod_n != prod_m {
            return Err(Error::InvalidInput(format!(
                "multiplier products differ: {prod_n} vs {prod_m}"
            )));
        }
        Ok(())
    }
}

/// Decides the sequence relation on two lists of infinite supernatural
/// numbers, producing a verified witness when they are equivalent.
///
/// For a fixed permutation `σ`, the per-index equation `n_i·N_i = m_i·M_{σ(i)}`
/// forces `v_p(n_i) − v_p(m_i) = M_{σ(i)}(p) − N_i(p)` at every prime where
/// both exponents are finite, and leaves it free where both are `∞` (mixed
/// `∞`/finite is impossible). The product constraint `∏n_i = ∏m_i` is then
/// satisfiable iff, for every prime, the forced differences sum to zero or
/// some index has exponent `∞` there to absorb the slack.
pub fn seq_equiv(
    ns: &[SupernaturalNumber],
    ms: &[SupernaturalNumber],
) -> Result<Option<SeqEquivWitness>> {
    for x in ns.iter().chain(ms) {
        if !x.is_infinite() {
            return Err(Error::Precondition(format!(
                "sequence entry {x} is finite; the relation is defined on infinite supernatural numbers"
            )));
        }
    }
    let k = ns.len();
    if ms.len() != k {
        return Ok(None);
    }
    let mut indices: Vec<usize> = (0..k).collect();
    let mut found = None;
    permute(&mut indices, 0, &mut |sigma| {
        if found.is_none() {
            if let Some(w) = witness_for_sigma(ns, ms, sigma) {
                found = Some(w);
            }
        }
    });
    if let Some(w) = &found {
        w.verify(ns, ms)?;
    }
    Ok(found)
}

fn permute(items: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == items.len() {
        visit(items);
        return;
    }
    for i in at..items.len() {
        items.swap(at, i);
        permute(items, at + 1, visit);
        items.swap(at, i);
    }
}

fn witness_for_sigma(
    ns: &[SupernaturalNumber],
    ms: &[SupernaturalNumber],
    sigma: &[usize],
) -> Option<SeqEquivWitness> {
    let k = ns.len();
    // Pairwise compatibility: defaults equal, ∞ patterns equal.
    for i in 0..k {
        let (a, b) = (&ns[i], &ms[sigma[i]]);
        if a.default != b.default {
            return None;
        }
        for &p in a.exceptions.keys().chain(b.exceptions.keys()) {
            if a.exponent(p).is_inf() != b.exponent(p).is_inf() {
                return None;
            }
        }
    }
    let mut n_mult = vec![SupernaturalNumber::one(); k];
    let mut m_mult = vec![SupernaturalNumber::one(); k];
    let primes: std::collections::BTreeSet<u64> = ns
        .iter()
        .chain(ms)
        .flat_map(|x| x.exceptions.keys().copied())
        .collect();
    for p in primes {
        let mut total: i64 = 0;
        let mut absorber = None;
        for i in 0..k {
            match (ns[i].exponent(p), ms[sigma[i]].exponent(p)) {
                (Exp::Inf, Exp::Inf) => absorber = Some(i),
                (Exp::Finite(a), Exp::Finite(b)) => {
                    let d = i64::from(b) - i64::from(a);
                    total += d;
                    if d > 0 {
                        bump(&mut n_mult[i], p, d as u32);
                    } else if d < 0 {
                        bump(&mut m_mult[i], p, (-d) as u32);
                    }
                }
                _ => unreachable!("mixed inf/finite rejected above"),
            }
        }
        match (total, absorber) {
            (0, _) => {}
            (t, Some(j)) if t > 0 => bump(&mut m_mult[j], p, t as u32),
            (t, Some(j)) => bump(&mut n_mult[j], p, (-t) as u32),
            (_, None) => return None,
        }
    }
    Some(SeqEquivWitness { sigma: sigma.to_vec(), n_multipliers: n_mult, m_multipliers: m_mult })
}

fn bump(sn: &mut SupernaturalNumber, p: u64, by: u32) {
    let e = match sn.exponent(p) {
        Exp::Finite(e) => Exp::Finite(e + by),
        Exp::Inf => Exp::Inf,
    };
    sn.exceptions.insert(p, e);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sn(text: &str) -> SupernaturalNumber {
        // tiny builder: "2^inf*3" style, "1" for the empty product
        if text == "1" {
            return SupernaturalNumber::one();
        }
        let mut exceptions = BTreeMap::new();
        for part in text.split('*') {
            let (p, e) = match part.split_once('^') {
                Some((p, "inf")) => (p, Exp::Inf),
                Some((p, e)) => (p, Exp::Finite(e.parse().unwrap())),
                None => (part, Exp::Finite(1)),
            };
            let p: u64 = p.parse().unwrap();
            exceptions
                .entry(p)
                .and_modify(|old: &mut Exp| *old = old.add(e))
                .or_insert(e);
        }
        SupernaturalNumber::new(Exp::Finite(0), exceptions).unwrap()
    }

    #[test]
    fn mul_absorbs_into_infinity() {
        assert_eq!(sn("2^inf").mul(&sn("2^3")), sn("2^inf"));
    }

    #[test]
    fn lcm_is_pointwise_max() {
        assert_eq!(sn("2^inf*3").lcm(&sn("5^inf")), sn("2^inf*3*5^inf"));
    }

    #[test]
    fn divides_is_pointwise() {
        assert!(sn("2*3").divides(&sn("2^inf*3")));
        assert!(!sn("2^inf*3").divides(&sn("2*3")));
        assert!(sn("1").divides(&SupernaturalNumber::omnibus()));
    }

    #[test]
    fn from_natural_factors() {
        assert_eq!(SupernaturalNumber::from_natural(12).unwrap(), sn("2^2*3"));
        assert_eq!(sn("2^2*3").value().unwrap(), BigUint::from(12u32));
    }

    #[test]
    fn lambda_iso_is_structural_equality() {
        assert!(lambda_iso(&sn("2^inf"), &sn("2^inf")));
        assert!(!lambda_iso(&sn("2^inf"), &sn("2^inf*3")));
        // multiplying by 1 changes nothing
        assert!(lambda_iso(&sn("5^inf").mul(&sn("1")), &sn("5^inf")));
    }

    #[test]
    fn upsilon_iso_minimal_witness() {
        let w = upsilon_iso(&sn("2^inf*3"), &sn("2^inf")).unwrap().unwrap();
        assert_eq!(w, (BigUint::from(1u32), BigUint::from(3u32)));
        // witness check: 1 * 2^inf*3 = 3 * 2^inf
        assert_eq!(sn("2^inf*3"), sn("3").mul(&sn("2^inf")));
    }

    #[test]
    fn upsilon_iso_reflexive_and_symmetric() {
        let n = sn("2^inf*3^4*7");
        assert_eq!(
            upsilon_iso(&n, &n).unwrap().unwrap(),
            (BigUint::one(), BigUint::one())
        );
        let a = sn("2^inf*3");
        let b = sn("2^inf*5^2");
        let (x, y) = upsilon_iso(&a, &b).unwrap().unwrap();
        let (y2, x2) = upsilon_iso(&b, &a).unwrap().unwrap();
        assert_eq!((x, y), (x2, y2));
    }

    #[test]
    fn upsilon_iso_distinct_infinite_parts_rejected() {
        assert_eq!(upsilon_iso(&sn("2^inf"), &sn("3^inf")).unwrap(), None);
        assert_eq!(
            upsilon_iso(&sn("2^inf"), &SupernaturalNumber::omnibus()).unwrap(),
            None
        );
    }

    #[test]
    fn upsilon_iso_requires_infinite_inputs() {
        assert!(matches!(
            upsilon_iso(&sn("2^3"), &sn("2^inf")),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn seq_equiv_accepts_cross_multiplied_pair() {
        let ns = [sn("2^inf*3"), sn("5^inf")];
        let ms = [sn("2^inf"), sn("3*5^inf")];
        let w = seq_equiv(&ns, &ms).unwrap().expect("equivalent");
        w.verify(&ns, &ms).unwrap();
        assert_eq!(w.sigma, vec![0, 1]);
        assert_eq!(w.n_multipliers, vec![sn("1"), sn("3")]);
        assert_eq!(w.m_multipliers, vec![sn("3"), sn("1")]);
    }

    #[test]
    fn seq_equiv_normalizes_absorbed_exponents() {
        // 2^inf * 4 is structurally 2^inf
        let big = sn("2^inf").mul(&sn("2^2"));
        assert_eq!(big, sn("2^inf"));
        let w = seq_equiv(&[sn("2^inf")], &[big]).unwrap().expect("equal");
        assert_eq!(w.n_multipliers, vec![sn("1")]);
    }

    #[test]
    fn seq_equiv_rejects_unbalanced_finite_slack() {
        // n1 * 2^inf = m1 * 2^inf*3 forces n1 = 3 m1, contradicting n1 = m1
        assert!(seq_equiv(&[sn("2^inf")], &[sn("2^inf*3")]).unwrap().is_none());
    }

    #[test]
    fn seq_equiv_rejects_distinct_infinite_parts() {
        assert!(seq_equiv(&[sn("2^inf")], &[sn("3^inf")]).unwrap().is_none());
    }

    #[test]
    fn seq_equiv_length_mismatch_is_absence() {
        assert!(seq_equiv(&[sn("2^inf")], &[sn("2^inf"), sn("3^inf")])
            .unwrap()
            .is_none());
    }

    #[test]
    fn seq_equiv_uses_permutation() {
        let ns = [sn("5^inf*3"), sn("2^inf")];
        let ms = [sn("2^inf*3"), sn("5^inf")];
        let w = seq_equiv(&ns, &ms).unwrap().expect("equivalent");
        w.verify(&ns, &ms).unwrap();
        assert_eq!(w.sigma, vec![1, 0]);
    }

    #[test]
    fn seq_equiv_absorbs_slack_at_infinite_exponent() {
        // 3*2^inf = 2^inf*3 forces n_1 = 3; the product constraint is then
        // rescued by m_2 = 3, legal because 3*3^inf = 3^inf.
        let ns = [sn("2^inf"), sn("3^inf")];
        let ms = [sn("2^inf*3"), sn("3^inf")];
        let w = seq_equiv(&ns, &ms).unwrap().expect("equivalent");
        w.verify(&ns, &ms).unwrap();
        assert_eq!(w.sigma, vec![0, 1]);
        assert_eq!(w.n_multipliers, vec![sn("3"), sn("1")]);
        assert_eq!(w.m_multipliers, vec![sn("1"), sn("3")]);
    }

    #[test]
    fn serde_roundtrip_with_inf() {
        let n = SupernaturalNumber::new(
            Exp::Inf,
            BTreeMap::from([(3, Exp::Finite(4)), (7, Exp::Finite(0))]),
        )
        .unwrap();
        let json = serde_json::to_string(&n).unwrap();
        assert!(json.contains("\"default\":\"inf\""));
        let back: SupernaturalNumber = serde_json::from_str(&json).unwrap();
        assert_eq!(back, n);
    }

    #[test]
    fn non_prime_exception_rejected() {
        assert!(SupernaturalNumber::new(
            Exp::Finite(0),
            BTreeMap::from([(4, Exp::Finite(1))])
        )
        .is_err());
    }
}
