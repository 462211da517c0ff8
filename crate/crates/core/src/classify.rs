//! Decision procedures for the γ-family: diagonal products of the
//! boundary action of `F_n` with `k` odometers. Two systems are compared
//! through their symbolic invariants, and the verdict is reported across
//! the seven equivalent conditions of the classification theorem.

use serde::{Deserialize, Serialize};

use crate::ktheory::{tower_invariant, InvariantTriple};
use crate::supernat::{lambda_iso, seq_equiv, upsilon_iso, SeqEquivWitness, SupernaturalNumber};
use crate::{Error, Result};

/// A γ-system: the boundary action of `F_n` times odometers of the given
/// infinite supernatural types, pulled back along the first `k`
/// coordinate maps `F_n -> Z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaSpec {
    n: u32,
    ns: Vec<SupernaturalNumber>,
}

impl GammaSpec {
    pub fn new(n: u32, ns: Vec<SupernaturalNumber>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition("ambient rank must be at least 2".into()));
        }
        if ns.is_empty() || ns.len() > n as usize {
            return Err(Error::Precondition(format!(
                "need between 1 and {n} odometer types, got {}",
                ns.len()
            )));
        }
        for f in &ns {
            if !f.is_infinite() {
                return Err(Error::Precondition(format!("odometer type {f} is finite")));
            }
        }
        Ok(GammaSpec { n, ns })
    }

    pub fn rank(&self) -> u32 {
        self.n
    }

    pub fn factors(&self) -> &[SupernaturalNumber] {
        &self.ns
    }

    /// The symbolic K-theoretic invariant of the system.
    pub fn invariant(&self) -> Result<InvariantTriple> {
        tower_invariant(self.n, &self.ns)
    }
}

/// Decides isomorphism of the `(K₀, [1]₀)` invariants: the ranks must be
/// equal and the supernatural sequences equivalent; the witness carries
/// the permutation and multipliers.
pub fn invariant_iso(a: &GammaSpec, b: &GammaSpec) -> Result<Option<SeqEquivWitness>> {
    if a.n != b.n {
        return Ok(None);
    }
    seq_equiv(&a.ns, &b.ns)
}

/// Isomorphism of symbolic invariant triples: equal rank fields, matched
/// `Υ` summand multisets, isomorphic torsion groups, and equal unit
/// classes.
pub fn invariant_triples_iso(a: &InvariantTriple, b: &InvariantTriple) -> Result<bool> {
    Ok(a.k0_free_rank == b.k0_free_rank
        && a.k1_rank == b.k1_rank
        && a.unit == b.unit
        && lambda_iso(&a.torsion, &b.torsion)
        && upsilon_multisets_iso(&a.upsilon, &b.upsilon)?)
}

// perfect matching of the two summand lists under pairwise Υ-isomorphism
fn upsilon_multisets_iso(
    ns: &[SupernaturalNumber],
    ms: &[SupernaturalNumber],
) -> Result<bool> {
    if ns.len() != ms.len() {
        return Ok(false);
    }
    fn matching(
        i: usize,
        ns: &[SupernaturalNumber],
        ms: &[SupernaturalNumber],
        used: &mut [bool],
    ) -> Result<bool> {
        if i == ns.len() {
            return Ok(true);
        }
        for j in 0..ms.len() {
            if !used[j] && upsilon_iso(&ns[i], &ms[j])?.is_some() {
                used[j] = true;
                if matching(i + 1, ns, ms, used)? {
                    return Ok(true);
                }
                used[j] = false;
            }
        }
        Ok(false)
    }
    matching(0, ns, ms, &mut vec![false; ms.len()])
}

/// One of the seven equivalent conditions of the classification theorem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionStatus {
    pub id: u8,
    pub label: String,
    pub equivalent: bool,
    pub citation: String,
}

/// The full verdict on a pair of γ-systems.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub equivalent: bool,
    /// Permutation and multipliers realizing the sequence equivalence.
    pub witness: Option<SeqEquivWitness>,
    pub conditions: Vec<ConditionStatus>,
    /// Which invariant component differs, when inequivalent.
    pub distinguisher: Option<String>,
}

const CONDITION_LABELS: [(u8, &str); 7] = [
    (1, "strong orbit equivalence"),
    (2, "continuous orbit equivalence"),
    (3, "isomorphism of topological full groups"),
    (4, "isomorphism of commutators of topological full groups"),
    (5, "isomorphism of crossed products"),
    (6, "isomorphism of (K0, unit) invariants"),
    (7, "rank equality and equivalence of supernatural sequences"),
];

/// Decides equivalence of two γ-systems and reports all seven condition
/// labels (equal by the classification theorem; only the arithmetic
/// condition (7) and the invariant condition (6) are computed, and they
/// are required to agree).
pub fn classify_gammas(a: &GammaSpec, b: &GammaSpec) -> Result<Verdict> {
    let witness = invariant_iso(a, b)?;
    let ta = a.invariant()?;
    let tb = b.invariant()?;
    let by_triples = a.n == b.n && invariant_triples_iso(&ta, &tb)?;
    let equivalent = witness.is_some();
    if by_triples != equivalent {
        // the two decision routes are equivalent by the theorem; a split
        // indicates an implementation fault, not a mathematical outcome
        return Err(Error::NoConvergence(format!(
            "decision routes disagree: sequence equivalence {equivalent}, invariant triples {by_triples}"
        )));
    }
    let distinguisher = if equivalent { None } else { Some(distinguish(a, b, &ta, &tb)?) };
    let conditions = CONDITION_LABELS
        .iter()
        .map(|&(id, label)| ConditionStatus {
            id,
            label: label.to_string(),
            equivalent,
            citation: match id {
                6 => "invariant condition, decided via the symbolic triple".to_string(),
                7 => "arithmetic condition, decided via sequence equivalence".to_string(),
                _ => format!(
                    "corollary of condition 7 via the classification theorem, condition ({id})"
                ),
            },
        })
        .collect();
    Ok(Verdict { equivalent, witness, conditions, distinguisher })
}

fn distinguish(
    a: &GammaSpec,
    b: &GammaSpec,
    ta: &InvariantTriple,
    tb: &InvariantTriple,
) -> Result<String> {
    if a.n != b.n {
        return Ok(format!("ambient ranks differ: {} vs {}", a.n, b.n));
    }
    if a.ns.len() != b.ns.len() {
        return Ok(format!(
            "number of odometer coordinates differs: {} vs {}",
            a.ns.len(),
            b.ns.len()
        ));
    }
    if !lambda_iso(&ta.torsion, &tb.torsion) {
        return Ok(format!(
            "torsion invariants differ: Lambda({}) vs Lambda({})",
            ta.torsion, tb.torsion
        ));
    }
    if !upsilon_multisets_iso(&ta.upsilon, &tb.upsilon)? {
        return Ok("Upsilon summand multisets do not match".to_string());
    }
    Ok("product constraint fails: no multiplier assignment balances the coordinates".to_string())
}
