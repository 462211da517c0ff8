//! K-theory of the diagonal boundary-times-cosets action.
//!
//! The action of `F_n` on (boundary) × (finite coset space) is encoded by a
//! `{0,1}` transition matrix `A = Σ_s A_s ⊗ B_s` over the symbol set
//! `S̃ × X`; the associated algebra has `K₀ = coker(I − Aᵗ)` with unit the
//! class of the all-ones vector, and `K₁ = ker(I − Aᵗ)`. Everything is
//! computed through certified Smith normal forms.
//!
//! The module also evaluates `K₀` classes of clopen × coset projections,
//! the maps induced on `K₀` by Nielsen automorphisms, the elementary
//! divisors of the connecting maps between tower levels, and the symbolic
//! invariant triple of infinite towers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::boundary::{theta_set, ClopenSet};
use crate::matrix::{CokernelClass, IntMatrix, SnfResult};
use crate::subgrp::SchreierGraph;
use crate::supernat::SupernaturalNumber;
use crate::words::{NielsenMove, ReducedWord};
use crate::{Error, Result};

/// Signed generator letter of the symbol slot, in `s_1..s_n, s_1^{-1}..s_n^{-1}` order.
pub fn symbol_letter(slot: usize, rank: u32) -> i32 {
    if slot < rank as usize {
        slot as i32 + 1
    } else {
        -((slot - rank as usize) as i32 + 1)
    }
}

/// Symbol slot of a signed generator letter.
pub fn symbol_slot(l: i32, rank: u32) -> usize {
    if l > 0 {
        (l - 1) as usize
    } else {
        (rank as i32 - l - 1) as usize
    }
}

/// The transition matrix `A = Σ_s A_s ⊗ B_s` of the diagonal action: entry
/// at row `(s, y)`, column `(t, x)` is `1` iff `t ≠ s⁻¹` and `y = s·x`.
/// Indices are `slot · index + coset`.
pub fn ck_matrix(graph: &SchreierGraph) -> IntMatrix {
    let n = graph.rank();
    let x = graph.index();
    let slots = 2 * n as usize;
    let mut a = IntMatrix::zero(slots * x, slots * x);
    for s in 0..slots {
        let sl = symbol_letter(s, n);
        for t in 0..slots {
            if symbol_letter(t, n) == -sl {
                continue;
            }
            for coset in 0..x {
                a.set(s * x + graph.act_vertex(coset, sl), t * x + coset, BigInt::one());
            }
        }
    }
    a
}

/// The `K₀` presentation of a diagonal action, retaining the Smith normal
/// form so that classes of projections can be evaluated in it.
pub struct DiagonalK0 {
    graph: SchreierGraph,
    snf: SnfResult,
    relation: IntMatrix,
    dim: usize,
}

impl DiagonalK0 {
    pub fn new(graph: SchreierGraph) -> Result<Self> {
        let a = ck_matrix(&graph);
        let relation = IntMatrix::identity(a.rows()).sub(&a.transpose())?;
        let snf = relation.smith_normal_form();
        let dim = relation.rows();
        Ok(DiagonalK0 { graph, snf, relation, dim })
    }

    pub fn graph(&self) -> &SchreierGraph {
        &self.graph
    }

    /// The relation matrix `I − Aᵗ`.
    pub fn relation(&self) -> &IntMatrix {
        &self.relation
    }

    pub fn snf(&self) -> &SnfResult {
        &self.snf
    }

    /// Rank of `K₁ = ker(I − Aᵗ)`.
    pub fn k1_rank(&self) -> usize {
        self.dim - self.snf.rank()
    }

    /// Class of an explicit vector on the symbol basis.
    pub fn class_of_vector(&self, v: &[BigInt]) -> Result<CokernelClass> {
        self.snf.cokernel_class(v)
    }

    /// The unit class (all-ones vector).
    pub fn unit_class(&self) -> CokernelClass {
        self.snf
            .cokernel_class(&vec![BigInt::one(); self.dim])
            .expect("dimension matches")
    }

    /// `K₀` class of the projection onto `C × {x}`.
    ///
    /// Each prefix is refined to uniform cylinders `[u·t]`, and the
    /// projection onto `[u·t] × {x}` is equivalent to the generator
    /// `(t, u⁻¹·x)`; the resulting sum is independent of the refinement
    /// depth in the cokernel.
    pub fn k0_class(&self, c: &ClopenSet, x: usize) -> Result<CokernelClass> {
        Ok(self.snf.cokernel_class(&self.k0_vector(c, x)?)?)
    }

    /// The symbol-basis vector underlying [`DiagonalK0::k0_class`].
    pub fn k0_vector(&self, c: &ClopenSet, x: usize) -> Result<Vec<BigInt>> {
        let n = self.graph.rank();
        if c.rank() != n {
            return Err(Error::RankMismatch(n, c.rank()));
        }
        if x >= self.graph.index() {
            return Err(Error::InvalidInput(format!(
                "coset {x} out of range for index {}",
                self.graph.index()
            )));
        }
        let mut v = vec![BigInt::zero(); self.dim];
        for cell in c.uniform_refinement(1) {
            let (head, last) = cell.split_at(cell.len() - 1);
            let inv = ReducedWord::from_letters(n, head.to_vec())?.inverse();
            let coset = self.graph.act_word(x, &inv);
            v[symbol_slot(last[0], n) * self.graph.index() + coset] += 1;
        }
        Ok(v)
    }

    /// The presentation as an abelian group with distinguished unit class.
    pub fn presentation(&self) -> FgAbelianWithUnit {
        let (free_rank, torsion) = self.snf.cokernel();
        FgAbelianWithUnit { free_rank, torsion, unit: self.unit_class() }
    }
}

/// A finitely generated abelian group `Z^free ⊕ ⊕ Z_{d_i}` with a
/// distinguished unit element in cokernel coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FgAbelianWithUnit {
    pub free_rank: usize,
    #[serde(with = "crate::matrix::decimal_vec")]
    pub torsion: Vec<BigInt>,
    pub unit: CokernelClass,
}

impl FgAbelianWithUnit {
    /// Order of the unit, defined when the unit is purely torsion
    /// (order `1` meaning the zero class).
    pub fn unit_order(&self) -> Result<BigInt> {
        if self.unit.free.iter().any(|c| !c.is_zero()) {
            return Err(Error::Precondition(
                "unit has a free component; its order is infinite".into(),
            ));
        }
        let mut order = BigInt::one();
        for (c, d) in self.unit.torsion.iter().zip(&self.torsion) {
            if !c.is_zero() {
                order = order.lcm(&(d / c.gcd(d)));
            }
        }
        Ok(order)
    }

    /// Isomorphism of pairs (group, unit) for purely-torsion units: the
    /// groups must be isomorphic and the unit orders equal (automorphisms
    /// of `Z^r ⊕ Z_d` act transitively on torsion elements of equal order).
    pub fn pair_iso(&self, other: &FgAbelianWithUnit) -> Result<bool> {
        Ok(self.free_rank == other.free_rank
            && self.torsion == other.torsion
            && self.unit_order()? == other.unit_order()?)
    }
}

/// The map induced on the `K₀` presentation `(⊕_i Z[p_{s_i}]) ⊕ Z_{n−1}[1]`
/// by an automorphism: a matrix on the free classes plus a `[1]`-component
/// per generator (the unit itself is fixed).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct K0AutoMap {
    pub rank: u32,
    /// Column `i` is the `[p_{s_j}]`-part of the image of `[p_{s_{i+1}}]`.
    pub free: IntMatrix,
    /// `[1]`-coefficient of the image of each `[p_{s_i}]`, mod `n − 1`.
    #[serde(with = "crate::matrix::decimal_vec")]
    pub unit_coeffs: Vec<BigInt>,
}

impl K0AutoMap {
    pub fn identity(rank: u32) -> Self {
        K0AutoMap {
            rank,
            free: IntMatrix::identity(rank as usize),
            unit_coeffs: vec![BigInt::zero(); rank as usize],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.free.is_identity() && self.unit_coeffs.iter().all(|c| c.is_zero())
    }

    fn reduce_units(&mut self) {
        let modulus = BigInt::from(self.rank) - BigInt::one();
        for c in &mut self.unit_coeffs {
            if modulus.is_zero() || modulus.is_one() {
                *c = BigInt::zero();
            } else {
                *c = ((&*c % &modulus) + &modulus) % &modulus;
            }
        }
    }
}

/// The `K₀` map of the composite automorphism given by `moves` (applied
/// left to right), on the presentation of the index-1 diagonal action:
/// permutations permute the `[p_s]`; `s_t ↦ s_b s_t` sends
/// `[p_{s_b}] ↦ [p_{s_b}] − [p_{s_t}]`; inversion of `s_u` sends
/// `[p_u] ↦ [1] − [p_u]`; conjugation `x ↦ t^m x t^{−m}` sends
/// `[p_t] ↦ [p_t] − m[1]`. `[1]` is always fixed.
pub fn k0_of_automorphism(moves: &[NielsenMove], rank: u32) -> Result<K0AutoMap> {
    let n = rank as usize;
    let mut total = K0AutoMap::identity(rank);
    for m in moves {
        m.validate(rank)?;
        let mut free = IntMatrix::identity(n);
        let mut units = vec![BigInt::zero(); n];
        match m {
            NielsenMove::Permutation { images } => {
                free = IntMatrix::zero(n, n);
                for (i, &im) in images.iter().enumerate() {
                    free.set((im - 1) as usize, i, BigInt::one());
                }
            }
            NielsenMove::LeftMultiply { target, by } => {
                free.set((*target - 1) as usize, (*by - 1) as usize, -BigInt::one());
            }
            NielsenMove::Inversion { target } => {
                let i = (*target - 1) as usize;
                free.set(i, i, -BigInt::one());
                units[i] = BigInt::one();
            }
            NielsenMove::Conjugation { by, power, .. } => {
                units[(*by - 1) as usize] = -BigInt::from(*power);
            }
        }
        // compose: x ↦ (F·x, u·x + c) after the map already accumulated
        let new_free = free.mul(&total.free)?;
        let mut new_units = Vec::with_capacity(n);
        for i in 0..n {
            let mut c = total.unit_coeffs[i].clone();
            for j in 0..n {
                c += &units[j] * total.free.get(j, i);
            }
            new_units.push(c);
        }
        total = K0AutoMap { rank, free: new_free, unit_coeffs: new_units };
        total.reduce_units();
    }
    Ok(total)
}

/// Elementary divisors of the free part of the connecting map into the
/// level-`k` presentation of the cyclic-kernel tower over `F_n`: the
/// classes `Σ_x [Ω(s_i) × {x}]` expressed in the basis classes
/// `[Θ(w; W) × {0}]` and `[∂ × {0}]` give an integer `m × n` matrix whose
/// divisors come out as `(1, …, 1, k)`.
pub fn connecting_divisors(rank: u32, k: usize) -> Result<Vec<BigInt>> {
    if k < 2 {
        return Err(Error::Precondition("tower step requires modulus k >= 2".into()));
    }
    let f = connecting_coefficients(rank, k)?;
    Ok(f.smith_normal_form().divisors)
}

/// The coefficient matrix behind [`connecting_divisors`]: row `w`, column
/// `i` holds the `[q_w]`-coefficient of `[p_{s_i}]` summed over cosets.
pub fn connecting_coefficients(rank: u32, k: usize) -> Result<IntMatrix> {
    let basis = SchreierGraph::cyclic_kernel(rank, 1, k)?.schreier_basis()?;
    let m = basis.rank();
    let k0 = DiagonalK0::new(basis.graph().clone())?;
    let dim = 2 * rank as usize * k;

    // columns of the solve matrix: q_1..q_m, r, then the relations
    let mut cols: Vec<Vec<BigInt>> = Vec::new();
    for w in 1..=m as i32 {
        cols.push(k0.k0_vector(&theta_set(&basis, w)?, 0)?);
    }
    cols.push(k0.k0_vector(&ClopenSet::full(rank), 0)?);
    let rel = k0.relation();
    for c in 0..rel.cols() {
        cols.push((0..rel.rows()).map(|r| rel.get(r, c).clone()).collect());
    }
    let mut system = IntMatrix::zero(dim, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, e) in col.iter().enumerate() {
            system.set(i, j, e.clone());
        }
    }
    let snf = system.smith_normal_form();

    let mut f = IntMatrix::zero(m, rank as usize);
    for i in 0..rank as usize {
        let mut p = vec![BigInt::zero(); dim];
        let omega = ClopenSet::omega(rank, i as i32 + 1)?;
        for x in 0..k {
            for (slot, e) in k0.k0_vector(&omega, x)?.into_iter().enumerate() {
                p[slot] += e;
            }
        }
        let coeffs = snf.solve(&p)?.ok_or_else(|| {
            Error::Precondition(format!(
                "class of generator {} does not lie in the level presentation",
                i + 1
            ))
        })?;
        for w in 0..m {
            f.set(w, i, coeffs[w].clone());
        }
    }
    Ok(f)
}

/// Finite or countably infinite rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank {
    Finite(u64),
    Aleph0,
}

impl Serialize for Rank {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rank::Finite(r) => ser.serialize_u64(*r),
            Rank::Aleph0 => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Rank {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(u64),
            Str(String),
        }
        match Repr::deserialize(de)? {
            Repr::Num(r) => Ok(Rank::Finite(r)),
            Repr::Str(s) if s == "inf" => Ok(Rank::Aleph0),
            Repr::Str(s) => Err(D::Error::custom(format!("bad rank {s:?}"))),
        }
    }
}

/// A rational class `p/q` mod 1, stored reduced with `0 <= p < q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnitClass {
    num: u64,
    den: u64,
}

impl UnitClass {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let num = num % den;
        let g = num.gcd(&den);
        Ok(UnitClass { num: num / g, den: den / g })
    }

    pub fn zero() -> Self {
        UnitClass { num: 0, den: 1 }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    /// The class multiplied by a natural number, mod 1.
    pub fn scale(&self, k: u64) -> Self {
        Self::new(self.num * k, self.den).expect("nonzero denominator")
    }
}

impl std::fmt::Display for UnitClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Serialize for UnitClass {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for UnitClass {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        let (p, q) = s
            .split_once('/')
            .ok_or_else(|| D::Error::custom(format!("bad unit class {s:?}")))?;
        let num = p.parse().map_err(D::Error::custom)?;
        let den = q.parse().map_err(D::Error::custom)?;
        UnitClass::new(num, den).map_err(D::Error::custom)
    }
}

/// The symbolic K-theoretic invariant of an infinite tower system:
/// `(⊕_i Υ(N_i)) ⊕ Z^{⊕∞} ⊕ Λ(T)` with a distinguished unit class and the
/// `K₁` rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantTriple {
    /// Multiset of infinite supernatural numbers, one `Υ` summand each.
    pub upsilon: Vec<SupernaturalNumber>,
    #[serde(rename = "freeRank")]
    pub k0_free_rank: Rank,
    /// `T` in the torsion summand `Λ(T)`.
    pub torsion: SupernaturalNumber,
    pub unit: UnitClass,
    #[serde(rename = "k1")]
    pub k1_rank: Rank,
}

impl InvariantTriple {
    /// Checks the structural constraint: the unit's reduced denominator
    /// divides the torsion supernatural number.
    pub fn validate(&self) -> Result<()> {
        let den = SupernaturalNumber::from_natural(self.unit.den)?;
        if !den.divides(&self.torsion) {
            return Err(Error::InvalidInput(format!(
                "unit denominator {} does not divide the torsion {}",
                self.unit.den, self.torsion
            )));
        }
        for n in &self.upsilon {
            if !n.is_infinite() {
                return Err(Error::InvalidInput(format!("finite Υ summand {n}")));
            }
        }
        Ok(())
    }
}

/// The invariant of the tower built over `F_n` from `k <= n` infinite
/// supernatural odometer factors:
/// `(⊕ Υ(N_i)) ⊕ Z^{⊕∞} ⊕ Λ((n−1)·N_1⋯N_k)`, unit `[1/(n−1)]`, `K₁`
/// of infinite rank.
pub fn tower_invariant(rank: u32, factors: &[SupernaturalNumber]) -> Result<InvariantTriple> {
    if rank < 2 {
        return Err(Error::Precondition("ambient rank must be at least 2".into()));
    }
    if factors.is_empty() || factors.len() > rank as usize {
        return Err(Error::Precondition(format!(
            "need between 1 and {rank} odometer factors, got {}",
            factors.len()
        )));
    }
    for f in factors {
        if !f.is_infinite() {
            return Err(Error::Precondition(format!("odometer factor {f} is finite")));
        }
    }
    let mut torsion = SupernaturalNumber::from_natural(rank as u64 - 1)?;
    for f in factors {
        torsion = torsion.mul(f);
    }
    let triple = InvariantTriple {
        upsilon: factors.to_vec(),
        k0_free_rank: Rank::Aleph0,
        torsion,
        unit: UnitClass::new(1, rank as u64 - 1)?,
        k1_rank: Rank::Aleph0,
    };
    triple.validate()?;
    Ok(triple)
}

/// The invariant after amplification by a `k × k` matrix factor: the unit
/// class is multiplied by `k` mod 1, everything else is unchanged.
pub fn skyscraper_invariant(t: &InvariantTriple, k: u64) -> Result<InvariantTriple> {
    if k == 0 {
        return Err(Error::Precondition("amplification factor must be positive".into()));
    }
    let mut out = t.clone();
    out.unit = out.unit.scale(k);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn divisors_i64(d: &[BigInt]) -> Vec<i64> {
        d.iter().map(|e| i64::try_from(e).unwrap()).collect()
    }

    #[test]
    fn ck_matrix_index_one_shape() {
        let a = ck_matrix(&SchreierGraph::trivial(2));
        assert_eq!((a.rows(), a.cols()), (4, 4));
        // zeros exactly at (s, s⁻¹)
        for s in 0..4 {
            for t in 0..4 {
                let expected = if symbol_letter(t, 2) == -symbol_letter(s, 2) { 0 } else { 1 };
                assert_eq!(a.get(s, t), &i(expected));
            }
        }
    }

    #[test]
    fn ck_matrix_row_sums() {
        let g = SchreierGraph::cyclic_kernel(2, 1, 2).unwrap();
        let a = ck_matrix(&g);
        assert_eq!((a.rows(), a.cols()), (8, 8));
        for r in 0..8 {
            let sum: BigInt = (0..8).map(|c| a.get(r, c).clone()).sum();
            assert_eq!(sum, i(3));
        }
    }

    #[test]
    fn relation_divisors_for_trivial_rank_two() {
        let k0 = DiagonalK0::new(SchreierGraph::trivial(2)).unwrap();
        assert_eq!(divisors_i64(&k0.snf().divisors), vec![1, 1, 0, 0]);
        let p = k0.presentation();
        assert_eq!((p.free_rank, p.torsion.len()), (2, 0));
        assert_eq!(p.unit_order().unwrap(), i(1));
        assert_eq!(k0.k1_rank(), 2);
    }

    #[test]
    fn boundary_presentation_rank_three() {
        let k0 = DiagonalK0::new(SchreierGraph::trivial(3)).unwrap();
        let p = k0.presentation();
        assert_eq!(p.free_rank, 3);
        assert_eq!(p.torsion, vec![i(2)]);
        assert_eq!(p.unit_order().unwrap(), i(2));
        assert_eq!(k0.k1_rank(), 3);
    }

    #[test]
    fn index_two_matches_rank_formula() {
        // m = 2(2−1)+1 = 3: K₀ ≅ Z³ ⊕ Z₂, K₁ rank 3
        let g = SchreierGraph::cyclic_kernel(2, 1, 2).unwrap();
        let k0 = DiagonalK0::new(g).unwrap();
        let p = k0.presentation();
        assert_eq!(p.free_rank, 3);
        assert_eq!(p.torsion, vec![i(2)]);
        assert_eq!(k0.k1_rank(), 3);
    }

    #[test]
    fn omega_class_is_a_generator() {
        let k0 = DiagonalK0::new(SchreierGraph::trivial(2)).unwrap();
        let omega = ClopenSet::omega(2, 1).unwrap();
        let direct = k0.k0_vector(&omega, 0).unwrap();
        assert_eq!(direct, vec![i(1), i(0), i(0), i(0)]);
    }

    #[test]
    fn full_space_class_is_the_unit() {
        let k0 = DiagonalK0::new(SchreierGraph::trivial(3)).unwrap();
        let full = k0.k0_class(&ClopenSet::full(3), 0).unwrap();
        assert_eq!(full, k0.unit_class());
    }

    #[test]
    fn k0_class_is_refinement_stable() {
        let g = SchreierGraph::cyclic_kernel(2, 1, 2).unwrap();
        let k0 = DiagonalK0::new(g).unwrap();
        let c = ClopenSet::from_prefixes(2, vec![vec![1, 2], vec![-2]]).unwrap();
        let shallow = k0.k0_class(&c, 1).unwrap();
        let mut deep = vec![BigInt::zero(); 8];
        for cell in c.uniform_refinement(4) {
            let single = ClopenSet::from_prefixes(2, vec![cell]).unwrap();
            for (j, e) in k0.k0_vector(&single, 1).unwrap().into_iter().enumerate() {
                deep[j] += e;
            }
        }
        assert_eq!(k0.class_of_vector(&deep).unwrap(), shallow);
    }

    #[test]
    fn theta_pair_classes_sum_to_full() {
        // [q_w] + [q_{w⁻¹}] = [r_W] on the index-2 cyclic kernel
        let basis = SchreierGraph::cyclic_kernel(2, 1, 2).unwrap().schreier_basis().unwrap();
        let k0 = DiagonalK0::new(basis.graph().clone()).unwrap();
        let r = k0.k0_vector(&ClopenSet::full(2), 0).unwrap();
        for w in 1..=3 {
            let plus = k0.k0_vector(&theta_set(&basis, w).unwrap(), 0).unwrap();
            let minus = k0.k0_vector(&theta_set(&basis, -w).unwrap(), 0).unwrap();
            let sum: Vec<BigInt> =
                plus.iter().zip(&minus).map(|(a, b)| a + b).collect();
            assert_eq!(
                k0.class_of_vector(&sum).unwrap(),
                k0.class_of_vector(&r).unwrap(),
                "basis letter {w}"
            );
        }
    }

    #[test]
    fn automorphism_map_of_left_multiply() {
        let map = k0_of_automorphism(
            &[NielsenMove::LeftMultiply { target: 1, by: 2 }],
            2,
        )
        .unwrap();
        // [p_{s₁}] fixed, [p_{s₂}] ↦ [p_{s₂}] − [p_{s₁}]
        assert_eq!(map.free.get(0, 0), &i(1));
        assert_eq!(map.free.get(0, 1), &i(-1));
        assert_eq!(map.free.get(1, 1), &i(1));
        assert_eq!(map.free.get(1, 0), &i(0));
        assert!(map.unit_coeffs.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn automorphism_map_of_conjugation() {
        // m = −1: [p_t] ↦ [p_t] + [1] (mod n−1 = 2)
        let map = k0_of_automorphism(
            &[NielsenMove::Conjugation { target: 2, by: 1, power: -1 }],
            3,
        )
        .unwrap();
        assert!(map.free.is_identity());
        assert_eq!(map.unit_coeffs, vec![i(1), i(0), i(0)]);
    }

    #[test]
    fn automorphism_map_identity_and_inverse_compose() {
        assert!(k0_of_automorphism(&[], 3).unwrap().is_identity());
        let m = NielsenMove::LeftMultiply { target: 1, by: 2 };
        let mut moves = vec![m.clone()];
        moves.extend(m.inverse_moves());
        assert!(k0_of_automorphism(&moves, 3).unwrap().is_identity());
    }

    #[test]
    fn connecting_divisors_examples() {
        assert_eq!(divisors_i64(&connecting_divisors(2, 2).unwrap()), vec![1, 2]);
        assert_eq!(divisors_i64(&connecting_divisors(3, 2).unwrap()), vec![1, 1, 2]);
    }

    #[test]
    fn tower_invariant_single_factor() {
        let two_inf = SupernaturalNumber::prime_power_inf(2).unwrap();
        let t = tower_invariant(3, &[two_inf.clone()]).unwrap();
        assert_eq!(t.upsilon, vec![two_inf.clone()]);
        // (3−1)·2^∞ = 2^∞
        assert_eq!(t.torsion, two_inf);
        assert_eq!(t.unit, UnitClass::new(1, 2).unwrap());
        assert_eq!(t.k0_free_rank, Rank::Aleph0);
        assert_eq!(t.k1_rank, Rank::Aleph0);
    }

    #[test]
    fn tower_invariant_rank_two_has_zero_unit() {
        let t = tower_invariant(2, &[SupernaturalNumber::prime_power_inf(2).unwrap()])
            .unwrap();
        assert_eq!(t.unit, UnitClass::zero());
    }

    #[test]
    fn tower_invariant_two_factors_absorbs() {
        let two = SupernaturalNumber::prime_power_inf(2).unwrap();
        let three = SupernaturalNumber::prime_power_inf(3).unwrap();
        let t = tower_invariant(3, &[two.clone(), three.clone()]).unwrap();
        assert_eq!(t.torsion, two.mul(&three));
    }

    #[test]
    fn skyscraper_scales_unit_only() {
        let two = SupernaturalNumber::prime_power_inf(2).unwrap();
        let t = tower_invariant(3, &[two]).unwrap();
        let doubled = skyscraper_invariant(&t, 2).unwrap();
        assert_eq!(doubled.unit, UnitClass::zero());
        assert_eq!(doubled.torsion, t.torsion);
        assert_eq!(skyscraper_invariant(&t, 1).unwrap(), t);
        let k = skyscraper_invariant(&tower_invariant(4, &[t.torsion.clone()]).unwrap(), 2)
            .unwrap();
        assert_eq!(k.unit, UnitClass::new(2, 3).unwrap());
    }

    #[test]
    fn invariant_serde_format() {
        let two = SupernaturalNumber::prime_power_inf(2).unwrap();
        let t = tower_invariant(3, &[two]).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"freeRank\":\"inf\""));
        assert!(json.contains("\"unit\":\"1/2\""));
        let back: InvariantTriple = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }
}
