//! Free-group word algebra: reduced words, Nielsen automorphisms, and
//! abelianizations.
//!
//! A generator of `F_n` is encoded as a nonzero integer: `i` denotes the
//! generator `s_i` and `-i` its inverse. Words are kept freely reduced at all
//! times; the empty word is the identity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::matrix::IntMatrix;
use crate::{Error, Result};

/// A freely reduced word over the signed generator alphabet of `F_n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "ReducedWordRepr")]
pub struct ReducedWord {
    rank: u32,
    letters: Vec<i32>,
}

// re-validates and freely reduces letters arriving from serialized input
#[derive(Deserialize)]
struct ReducedWordRepr {
    rank: u32,
    letters: Vec<i32>,
}

impl TryFrom<ReducedWordRepr> for ReducedWord {
    type Error = Error;

    fn try_from(repr: ReducedWordRepr) -> Result<Self> {
        ReducedWord::from_letters(repr.rank, repr.letters)
    }
}

impl ReducedWord {
    /// The identity element of `F_n`.
    pub fn identity(rank: u32) -> Self {
        ReducedWord { rank, letters: Vec::new() }
    }

    /// The single generator `s_i` (`1 <= i <= rank`), or its inverse for
    /// negative `i`.
    pub fn generator(rank: u32, i: i32) -> Result<Self> {
        Self::from_letters(rank, vec![i])
    }

    /// Builds a word from a letter sequence, freely reducing it.
    pub fn from_letters(rank: u32, letters: Vec<i32>) -> Result<Self> {
        for &l in &letters {
            if l == 0 || l.unsigned_abs() > rank {
                return Err(Error::InvalidGenerator { index: l as i64, rank });
            }
        }
        let mut reduced: Vec<i32> = Vec::with_capacity(letters.len());
        for l in letters {
            if reduced.last() == Some(&-l) {
                reduced.pop();
            } else {
                reduced.push(l);
            }
        }
        Ok(ReducedWord { rank, letters: reduced })
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        ReducedWord {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }

    /// Freely reduced concatenation. Associative with identity the empty word.
    pub fn multiply(&self, other: &ReducedWord) -> Result<Self> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last() == Some(&-l) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Ok(ReducedWord { rank: self.rank, letters })
    }

    /// `self` raised to an integer power.
    pub fn pow(&self, exp: i64) -> Self {
        let base = if exp >= 0 { self.clone() } else { self.inverse() };
        let mut out = ReducedWord::identity(self.rank);
        for _ in 0..exp.unsigned_abs() {
            out = out.multiply(&base).expect("equal ranks");
        }
        out
    }

    /// Exponent-sum vector in `Z^n` (image in the abelianization).
    pub fn exponent_vector(&self) -> Vec<i64> {
        let mut v = vec![0i64; self.rank as usize];
        for &l in &self.letters {
            v[(l.unsigned_abs() - 1) as usize] += l.signum() as i64;
        }
        v
    }

    /// Splits `g = h c h^{-1}` with `c` cyclically reduced; returns `(h, c)`.
    pub fn cyclic_decomposition(&self) -> (ReducedWord, ReducedWord) {
        let mut letters = self.letters.clone();
        let mut head: Vec<i32> = Vec::new();
        while letters.len() >= 2 && letters.first() == letters.last().map(|l| -l).as_ref() {
            head.push(letters[0]);
            letters.remove(0);
            letters.pop();
        }
        (
            ReducedWord { rank: self.rank, letters: head },
            ReducedWord { rank: self.rank, letters },
        )
    }

    /// True if `self` is a prefix of `other`.
    pub fn is_prefix_of(&self, other: &ReducedWord) -> bool {
        other.letters.starts_with(&self.letters)
    }

    /// Parses the ASCII rendering used by [`fmt::Display`]: `a`, `b`, `c`, ...
    /// for generators, uppercase for inverses, `e` or the empty string for
    /// the identity.
    pub fn parse(rank: u32, text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for ch in text.chars() {
            if ch == 'e' && text.len() == 1 {
                break;
            }
            let l = if ch.is_ascii_lowercase() {
                ch as i32 - 'a' as i32 + 1
            } else if ch.is_ascii_uppercase() {
                -(ch as i32 - 'A' as i32 + 1)
            } else {
                return Err(Error::InvalidInput(format!("bad word character {ch:?}")));
            };
            letters.push(l);
        }
        Self::from_letters(rank, letters)
    }
}

impl fmt::Display for ReducedWord {
    /// ASCII rendering: `a`, `b`, `c`, ... with uppercase for inverses.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for &l in &self.letters {
            let idx = (l.unsigned_abs() - 1) as u8;
            if idx < 26 {
                let base = if l > 0 { b'a' } else { b'A' };
                write!(f, "{}", (base + idx) as char)?;
            } else {
                write!(f, "{}{}{}", if l > 0 { "s" } else { "S" }, "_", l.unsigned_abs())?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ReducedWord({self})")
    }
}

/// One Nielsen generator of `Aut(F_n)`, plus conjugations.
///
/// Automorphisms are represented only as sequences of these moves; arbitrary
/// endomorphisms and Whitehead-style recognition are out of scope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NielsenMove {
    /// `s_i -> s_{image[i-1]}` for a permutation of `{1..n}` (1-based images).
    Permutation { images: Vec<u32> },
    /// `s_target -> s_by * s_target`, all other generators fixed.
    LeftMultiply { target: u32, by: u32 },
    /// `s_target -> s_target^{-1}`, all other generators fixed.
    Inversion { target: u32 },
    /// `s_target -> s_by^m * s_target * s_by^{-m}`, all other generators fixed.
    Conjugation { target: u32, by: u32, power: i64 },
}

impl NielsenMove {
    /// Checks all referenced generator indices against `rank`.
    pub fn validate(&self, rank: u32) -> Result<()> {
        let check = |i: u32| -> Result<()> {
            if i == 0 || i > rank {
                Err(Error::InvalidGenerator { index: i as i64, rank })
            } else {
                Ok(())
            }
        };
        match self {
            NielsenMove::Permutation { images } => {
                if images.len() != rank as usize {
                    return Err(Error::NotAPermutation {
                        size: rank as usize,
                        reason: format!("{} images for rank {rank}", images.len()),
                    });
                }
                let mut seen = vec![false; rank as usize];
                for &i in images {
                    check(i)?;
                    if std::mem::replace(&mut seen[(i - 1) as usize], true) {
                        return Err(Error::NotAPermutation {
                            size: rank as usize,
                            reason: format!("image {i} repeated"),
                        });
                    }
                }
                Ok(())
            }
            NielsenMove::LeftMultiply { target, by } => {
                check(*target)?;
                check(*by)?;
                if target == by {
                    return Err(Error::InvalidInput(
                        "left-multiply requires two distinct generators".into(),
                    ));
                }
                Ok(())
            }
            NielsenMove::Inversion { target } => check(*target),
            NielsenMove::Conjugation { target, by, .. } => {
                check(*target)?;
                check(*by)?;
                if target == by {
                    return Err(Error::InvalidInput(
                        "conjugation requires two distinct generators".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Image of the signed generator `l` under this single move.
    pub fn image_of(&self, l: i32, rank: u32) -> ReducedWord {
        let g = l.unsigned_abs();
        let word = match self {
            NielsenMove::Permutation { images } => {
                vec![images[(g - 1) as usize] as i32]
            }
            NielsenMove::LeftMultiply { target, by } => {
                if g == *target {
                    vec![*by as i32, *target as i32]
                } else {
                    vec![g as i32]
                }
            }
            NielsenMove::Inversion { target } => {
                if g == *target {
                    vec![-(g as i32)]
                } else {
                    vec![g as i32]
                }
            }
            NielsenMove::Conjugation { target, by, power } => {
                if g == *target {
                    let t = ReducedWord::generator(rank, *by as i32).expect("validated");
                    let u = ReducedWord::generator(rank, g as i32).expect("validated");
                    let w = t
                        .pow(*power)
                        .multiply(&u)
                        .and_then(|x| x.multiply(&t.pow(-*power)))
                        .expect("equal ranks");
                    return if l > 0 { w } else { w.inverse() };
                } else {
                    vec![g as i32]
                }
            }
        };
        let w = ReducedWord::from_letters(rank, word).expect("validated move");
        if l > 0 {
            w
        } else {
            w.inverse()
        }
    }

    /// A move sequence realizing the inverse automorphism of this move.
    pub fn inverse_moves(&self) -> Vec<NielsenMove> {
        match self {
            NielsenMove::Permutation { images } => {
                let mut inv = vec![0u32; images.len()];
                for (i, &im) in images.iter().enumerate() {
                    inv[(im - 1) as usize] = i as u32 + 1;
                }
                vec![NielsenMove::Permutation { images: inv }]
            }
            // (s_t -> s_b s_t)^{-1} is s_t -> s_b^{-1} s_t, realized by
            // conjugating the left-multiply with an inversion of s_b.
            NielsenMove::LeftMultiply { target, by } => vec![
                NielsenMove::Inversion { target: *by },
                NielsenMove::LeftMultiply { target: *target, by: *by },
                NielsenMove::Inversion { target: *by },
            ],
            NielsenMove::Inversion { target } => vec![NielsenMove::Inversion { target: *target }],
            NielsenMove::Conjugation { target, by, power } => {
                vec![NielsenMove::Conjugation { target: *target, by: *by, power: -power }]
            }
        }
    }
}

/// Applies the composite automorphism given by `moves` (left-to-right) to `w`.
pub fn apply_automorphism(moves: &[NielsenMove], w: &ReducedWord) -> Result<ReducedWord> {
    let rank = w.rank();
    for m in moves {
        m.validate(rank)?;
    }
    let mut current = w.clone();
    for m in moves {
        let mut out = ReducedWord::identity(rank);
        for &l in current.letters() {
            out = out.multiply(&m.image_of(l, rank))?;
        }
        current = out;
    }
    Ok(current)
}

/// Matrix of the induced map on `Z^n = F_n^{ab}` in the generator basis.
///
/// Column `i` is the exponent vector of the image of `s_{i+1}` under the
/// composite automorphism; the result is invertible over the integers.
pub fn abelianization(moves: &[NielsenMove], rank: u32) -> Result<IntMatrix> {
    let n = rank as usize;
    let mut m = IntMatrix::zero(n, n);
    for i in 0..n {
        let gen = ReducedWord::generator(rank, i as i32 + 1)?;
        let image = apply_automorphism(moves, &gen)?;
        for (j, &e) in image.exponent_vector().iter().enumerate() {
            m.set(j, i, e.into());
        }
    }
    Ok(m)
}

/// An ordered list of distinct nontrivial words, optionally certified to be a
/// free basis of the subgroup it generates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumeratedBasis {
    elements: Vec<ReducedWord>,
    ambient_rank: u32,
    verified: bool,
}

impl EnumeratedBasis {
    /// Wraps the element list after the structural checks (distinct, no
    /// identity, consistent ranks). Does not certify freeness; see
    /// [`EnumeratedBasis::verify`].
    pub fn new(ambient_rank: u32, elements: Vec<ReducedWord>) -> Result<Self> {
        for w in &elements {
            if w.rank() != ambient_rank {
                return Err(Error::RankMismatch(ambient_rank, w.rank()));
            }
            if w.is_identity() {
                return Err(Error::InvalidInput("basis element is the identity".into()));
            }
        }
        let mut sorted: Vec<_> = elements.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidInput("basis elements are not distinct".into()));
        }
        Ok(EnumeratedBasis { elements, ambient_rank, verified: false })
    }

    pub fn elements(&self) -> &[ReducedWord] {
        &self.elements
    }

    pub fn ambient_rank(&self) -> u32 {
        self.ambient_rank
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    /// Certifies the list as a free basis of the subgroup it generates: the
    /// Stallings-folded graph of the elements must have first Betti number
    /// equal to the list length.
    pub fn verify(mut self) -> Result<Self> {
        let folded = crate::subgrp::fold_words(self.ambient_rank, &self.elements)?;
        if folded.betti() != self.elements.len() {
            return Err(Error::InvalidInput(format!(
                "not a free basis: folded graph has Betti number {}, expected {}",
                folded.betti(),
                self.elements.len()
            )));
        }
        self.verified = true;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(rank: u32, s: &str) -> ReducedWord {
        ReducedWord::parse(rank, s).unwrap()
    }

    #[test]
    fn multiply_reduces() {
        // (ab, b^{-1}a) -> aa
        let x = w(2, "ab");
        let y = w(2, "Ba");
        assert_eq!(x.multiply(&y).unwrap(), w(2, "aa"));
    }

    #[test]
    fn multiply_inverse_cancels() {
        let x = w(2, "abAAb");
        assert!(x.multiply(&x.inverse()).unwrap().is_identity());
    }

    #[test]
    fn multiply_matches_left_multiply_image() {
        // s_2 * s_1 = the image of s_1 under s_1 -> s_2 s_1
        let p = w(2, "b").multiply(&w(2, "a")).unwrap();
        assert_eq!(p, w(2, "ba"));
    }

    #[test]
    fn rank_mismatch_rejected() {
        let x = w(2, "a");
        let y = w(3, "c");
        assert!(matches!(x.multiply(&y), Err(Error::RankMismatch(2, 3))));
    }

    #[test]
    fn left_multiply_move_on_generator() {
        let psi = [NielsenMove::LeftMultiply { target: 1, by: 2 }];
        assert_eq!(apply_automorphism(&psi, &w(2, "a")).unwrap(), w(2, "ba"));
        assert_eq!(apply_automorphism(&psi, &w(2, "b")).unwrap(), w(2, "b"));
    }

    #[test]
    fn empty_move_sequence_is_identity() {
        let x = w(2, "abAB");
        assert_eq!(apply_automorphism(&[], &x).unwrap(), x);
    }

    #[test]
    fn conjugation_move() {
        // u -> t^1 u t^{-1} with t = s_1, u = s_2, applied to s_2
        let psi = [NielsenMove::Conjugation { target: 2, by: 1, power: 1 }];
        assert_eq!(apply_automorphism(&psi, &w(2, "b")).unwrap(), w(2, "abA"));
    }

    #[test]
    fn abelianization_of_left_multiply() {
        let psi = [NielsenMove::LeftMultiply { target: 1, by: 2 }];
        let m = abelianization(&psi, 2).unwrap();
        // e_1 -> e_1 + e_2, e_2 -> e_2
        assert_eq!(m.get(0, 0), &num_bigint::BigInt::from(1));
        assert_eq!(m.get(1, 0), &num_bigint::BigInt::from(1));
        assert_eq!(m.get(0, 1), &num_bigint::BigInt::from(0));
        assert_eq!(m.get(1, 1), &num_bigint::BigInt::from(1));
    }

    #[test]
    fn abelianization_of_swap_is_permutation_matrix() {
        let m = abelianization(&[NielsenMove::Permutation { images: vec![2, 1] }], 2).unwrap();
        assert_eq!(m.get(0, 1), &num_bigint::BigInt::from(1));
        assert_eq!(m.get(1, 0), &num_bigint::BigInt::from(1));
        assert_eq!(m.get(0, 0), &num_bigint::BigInt::from(0));
    }

    #[test]
    fn abelianization_of_conjugation_is_identity() {
        let m = abelianization(&[NielsenMove::Conjugation { target: 2, by: 1, power: 5 }], 3)
            .unwrap();
        assert!(m.is_identity());
    }

    #[test]
    fn cyclic_decomposition_of_conjugate() {
        let g = w(2, "baB");
        let (head, cycle) = g.cyclic_decomposition();
        assert_eq!(head, w(2, "b"));
        assert_eq!(cycle, w(2, "a"));
    }

    #[test]
    fn display_roundtrip() {
        let x = w(3, "abCBa");
        assert_eq!(ReducedWord::parse(3, &x.to_string()).unwrap(), x);
        assert_eq!(ReducedWord::identity(2).to_string(), "e");
    }

    #[test]
    fn deserialization_validates_and_reduces() {
        let x: ReducedWord =
            serde_json::from_str(r#"{"rank":2,"letters":[1,2,-2]}"#).unwrap();
        assert_eq!(x, w(2, "a"));
        // out-of-range letter rejected
        assert!(serde_json::from_str::<ReducedWord>(r#"{"rank":2,"letters":[3]}"#).is_err());
        assert!(serde_json::from_str::<ReducedWord>(r#"{"rank":2,"letters":[0]}"#).is_err());
        let y = w(2, "aBa");
        let round: ReducedWord = serde_json::from_str(&serde_json::to_string(&y).unwrap()).unwrap();
        assert_eq!(round, y);
    }
}
