//! Finite-level models of the boundary-times-odometer systems: explicit
//! level schedules, coset graphs of the kernels `ker(F_n -> ⊕_j Z/N(m,j))`,
//! a reachability certificate for minimality at a finite resolution, and
//! the kernel rank of the Pimsner–Voiculescu map on cylinder step
//! functions.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::matrix::IntMatrix;
use crate::subgrp::SchreierGraph;
use crate::supernat::{Exp, SupernaturalNumber};
use crate::words::ReducedWord;
use crate::{Error, Result};

/// A truncation schedule for a tower of finite quotients: at each level
/// exactly one coordinate `j` is refined by a factor `n(m, j) >= 2`, and
/// for each coordinate the product of its factors must exhaust `N_j` in
/// the limit (finitely checkable: each partial product divides `N_j`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OdometerTowerSpec {
    rank: u32,
    factors: Vec<SupernaturalNumber>,
    /// Per level, the 1-based refined coordinate and its factor.
    levels: Vec<(usize, u64)>,
}

impl OdometerTowerSpec {
    pub fn new(
        rank: u32,
        factors: Vec<SupernaturalNumber>,
        levels: Vec<(usize, u64)>,
    ) -> Result<Self> {
        if rank < 2 {
            return Err(Error::Precondition("ambient rank must be at least 2".into()));
        }
        if factors.is_empty() || factors.len() > rank as usize {
            return Err(Error::Precondition(format!(
                "need between 1 and {rank} odometer coordinates, got {}",
                factors.len()
            )));
        }
        for f in &factors {
            if !f.is_infinite() {
                return Err(Error::Precondition(format!("odometer type {f} is finite")));
            }
        }
        let mut partial: Vec<SupernaturalNumber> =
            vec![SupernaturalNumber::one(); factors.len()];
        for &(j, f) in &levels {
            if j == 0 || j > factors.len() {
                return Err(Error::InvalidInput(format!("coordinate {j} out of range")));
            }
            if f < 2 {
                return Err(Error::InvalidInput(format!("level factor {f} must be >= 2")));
            }
            partial[j - 1] = partial[j - 1].mul(&SupernaturalNumber::from_natural(f)?);
            if !partial[j - 1].divides(&factors[j - 1]) {
                return Err(Error::InvalidInput(format!(
                    "schedule exceeds coordinate {j}: {} does not divide {}",
                    partial[j - 1],
                    factors[j - 1]
                )));
            }
        }
        Ok(OdometerTowerSpec { rank, factors, levels })
    }

    /// A reproducible default schedule: coordinates are refined round-robin;
    /// on its `t`-th refinement a coordinate takes the product of every
    /// prime among its infinite-exponent primes seen so far (the pool grows
    /// with `t`, so each appears infinitely often in the limit) together
    /// with each prime still carrying leftover finite exponent.
    pub fn greedy(rank: u32, factors: Vec<SupernaturalNumber>, level_count: usize) -> Result<Self> {
        let k = factors.len();
        let mut remaining: Vec<BTreeMap<u64, u32>> = factors
            .iter()
            .map(|f| {
                f.exceptions()
                    .iter()
                    .filter_map(|(&p, &e)| match e {
                        Exp::Finite(e) if e > 0 => Some((p, e)),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        let mut activations = vec![0usize; k];
        let mut levels = Vec::with_capacity(level_count);
        for m in 0..level_count {
            let j = m % k;
            activations[j] += 1;
            let mut factor: u64 = 1;
            for p in prime_pool(&factors[j], activations[j]) {
                match factors[j].exponent(p) {
                    Exp::Inf => factor *= p,
                    Exp::Finite(_) => {
                        if let Some(e) = remaining[j].get_mut(&p) {
                            if *e > 0 {
                                factor *= p;
                                *e -= 1;
                            }
                        }
                    }
                }
            }
            if factor < 2 {
                return Err(Error::Precondition(format!(
                    "coordinate {} exhausted after {m} levels",
                    j + 1
                )));
            }
            levels.push((j + 1, factor));
        }
        Self::new(rank, factors, levels)
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn factors(&self) -> &[SupernaturalNumber] {
        &self.factors
    }

    pub fn levels(&self) -> &[(usize, u64)] {
        &self.levels
    }

    /// The per-coordinate moduli `N(m, j)` after `m` levels.
    pub fn moduli_at(&self, m: usize) -> Result<Vec<u64>> {
        if m > self.levels.len() {
            return Err(Error::InvalidInput(format!(
                "level {m} beyond the {}-level schedule",
                self.levels.len()
            )));
        }
        let mut moduli = vec![1u64; self.factors.len()];
        for &(j, f) in &self.levels[..m] {
            moduli[j - 1] = moduli[j - 1].checked_mul(f).ok_or_else(|| {
                Error::ResourceCap(format!("modulus overflow at coordinate {j}"))
            })?;
        }
        Ok(moduli)
    }

    /// The coset-space size after `m` levels.
    pub fn index_at(&self, m: usize) -> Result<u64> {
        self.moduli_at(m)?.iter().try_fold(1u64, |acc, &f| {
            acc.checked_mul(f)
                .ok_or_else(|| Error::ResourceCap("index overflow".into()))
        })
    }
}

// the first few primes plus the explicit primes of N, as a growing pool
fn prime_pool(n: &SupernaturalNumber, t: usize) -> Vec<u64> {
    let mut pool: Vec<u64> = n.exceptions().keys().copied().collect();
    if n.default_exponent().is_inf() {
        let mut p = 2u64;
        let mut count = 0;
        while count < t {
            if !pool.contains(&p) {
                pool.push(p);
            }
            count += 1;
            p = (p + 1..).find(|&q| (2..q).take_while(|d| d * d <= q).all(|d| q % d != 0)).unwrap();
        }
    }
    pool.sort_unstable();
    pool
}

/// The order of the level-`m` cyclic quotient (`Z_{k_m}`, +1) of the
/// odometer of type `N` along an explicit divisor chain; level 0 is the
/// trivial system.
pub fn odometer_level(n: &SupernaturalNumber, m: usize, schedule: &[u64]) -> Result<u64> {
    if !n.is_infinite() {
        return Err(Error::Precondition(format!("odometer type {n} is finite")));
    }
    let mut prev = 1u64;
    for &k in schedule {
        if k == 0 || k % prev != 0 {
            return Err(Error::InvalidInput(format!(
                "schedule is not a divisor chain at {k} (previous {prev})"
            )));
        }
        if !SupernaturalNumber::from_natural(k)?.divides(n) {
            return Err(Error::InvalidInput(format!("{k} does not divide {n}")));
        }
        prev = k;
    }
    if m > schedule.len() {
        return Err(Error::InvalidInput(format!(
            "level {m} beyond the {}-level schedule",
            schedule.len()
        )));
    }
    Ok(if m == 0 { 1 } else { schedule[m - 1] })
}

/// The Schreier graph of `ker(F_n -> ⊕_j Z/N(m, j))` at level `m`, with
/// vertices the mixed-radix tuples and the spanning tree chosen so the
/// transversal of `(v_1, …, v_k)` is `s_1^{v_1} ⋯ s_k^{v_k}`.
pub fn tower_level_graph(spec: &OdometerTowerSpec, m: usize, cap: usize) -> Result<SchreierGraph> {
    let moduli = spec.moduli_at(m)?;
    let index = spec.index_at(m)?;
    if index as usize > cap {
        return Err(Error::ResourceCap(format!("index {index} exceeds the cap {cap}")));
    }
    let index = index as usize;
    let k = moduli.len();
    // digit strides: coordinate j varies fastest for small j
    let mut stride = vec![1usize; k];
    for j in 1..k {
        stride[j] = stride[j - 1] * moduli[j - 1] as usize;
    }
    let digit = |v: usize, j: usize| (v / stride[j]) % moduli[j] as usize;

    let perms: Vec<Vec<usize>> = (0..spec.rank() as usize)
        .map(|j| {
            (0..index)
                .map(|v| {
                    if j < k {
                        let d = digit(v, j);
                        v - d * stride[j] + ((d + 1) % moduli[j] as usize) * stride[j]
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let graph = SchreierGraph::from_permutations(spec.rank(), &perms)?;
    let mut tree = Vec::with_capacity(index.saturating_sub(1));
    for v in 1..index {
        let j = (0..k).rev().find(|&j| digit(v, j) > 0).expect("nonzero vertex");
        tree.push((v, v - stride[j], j as i32 + 1));
    }
    graph.with_tree(&tree)
}

/// A finite-resolution model of a diagonal system: the coset graph plus
/// the cylinder depth at which the boundary is resolved.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FiniteLevelSystem {
    pub graph: SchreierGraph,
    pub boundary_depth: usize,
}

/// Reachability table over all (depth-`d` cylinder, coset) states under
/// group elements of length at most the cap. Certification at a finite
/// level; the minimality of the limit system is a separate (cited)
/// statement.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MinimalityCertificate {
    pub certified: bool,
    pub word_length_cap: usize,
    /// The enumerated (cylinder prefix, coset) states.
    pub states: Vec<(Vec<i32>, usize)>,
    /// `reachable[s][t]`: some `g` with `|g| <= cap` moves state `s` onto
    /// a set meeting state `t`.
    pub reachable: Vec<Vec<bool>>,
}

fn next_letters(rank: u32, last: Option<i32>) -> Vec<i32> {
    let banned = last.map(|l| -l);
    (1..=rank as i32).flat_map(|j| [j, -j]).filter(|&l| Some(l) != banned).collect()
}

fn reduced_words_of_length(rank: u32, len: usize) -> Vec<Vec<i32>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &out {
            for l in next_letters(rank, w.last().copied()) {
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

// Does the set h·(∂ ∖ [forbidden]) intersect [u']? The translate is not a
// cylinder: the continuation letter −(last of h) cancels into h, so the
// image recursively contains translates by shorter heads.
fn head_image_meets(h: &[i32], forbidden: i32, uprime: &[i32]) -> bool {
    match h.split_last() {
        None => uprime.first().is_none_or(|&l| l != forbidden),
        Some((&last, rest)) => {
            // non-cancelling continuations give the cylinders [h·a]
            let direct = if uprime.len() <= h.len() {
                h[..uprime.len()] == *uprime
            } else {
                uprime[..h.len()] == *h
                    && uprime[h.len()] != forbidden
                    && uprime[h.len()] != -last
            };
            // the cancelling continuation strips the last letter of h
            direct || (-last != forbidden && head_image_meets(rest, last, uprime))
        }
    }
}

// Does g·[u] intersect [u']? g·[u] is the cylinder of reduce(g·u) when the
// cancellation leaves part of u standing, and a translated co-cylinder
// otherwise.
fn image_meets(g: &ReducedWord, u: &[i32], uprime: &[i32]) -> Result<bool> {
    let rank = g.rank();
    if u.is_empty() {
        return Ok(true); // g·∂ = ∂ meets every cylinder
    }
    let r = g.multiply(&ReducedWord::from_letters(rank, u.to_vec())?)?;
    let cancelled = (g.letters().len() + u.len() - r.letters().len()) / 2;
    if cancelled < u.len() {
        let r = r.letters();
        let k = r.len().min(uprime.len());
        return Ok(r[..k] == uprime[..k]);
    }
    // u fully swallowed: h = g with |u| letters removed at the end
    let h = &g.letters()[..g.letters().len() - u.len()];
    Ok(head_image_meets(h, -u[u.len() - 1], uprime))
}

/// Certifies that every (depth-`d` cylinder, coset) state can be moved to
/// meet every other by some group element of length at most `cap`.
pub fn check_minimality_finite_level(
    sys: &FiniteLevelSystem,
    cap: usize,
) -> Result<MinimalityCertificate> {
    let rank = sys.graph.rank();
    let index = sys.graph.index();
    let words = reduced_words_of_length(rank, sys.boundary_depth);
    let mut states = Vec::new();
    let mut state_id = HashMap::new();
    for w in &words {
        for x in 0..index {
            state_id.insert((w.clone(), x), states.len());
            states.push((w.clone(), x));
        }
    }
    let mut reachable = vec![vec![false; states.len()]; states.len()];
    let mut elements = Vec::new();
    for len in 0..=cap {
        for g in reduced_words_of_length(rank, len) {
            elements.push(ReducedWord::from_letters(rank, g)?);
        }
    }
    for (s, (u, x)) in states.iter().enumerate() {
        for g in &elements {
            let y = sys.graph.act_word(*x, g);
            for (t, (uprime, xprime)) in states.iter().enumerate() {
                if *xprime == y && !reachable[s][t] && image_meets(g, u, uprime)? {
                    reachable[s][t] = true;
                }
            }
        }
    }
    let certified = reachable.iter().all(|row| row.iter().all(|&b| b));
    Ok(MinimalityCertificate { certified, word_length_cap: cap, states, reachable })
}

/// The kernel rank of the Pimsner–Voiculescu map on depth-`d` cylinder
/// step functions, with its certification data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PvRankReport {
    pub rank: usize,
    /// Number of columns `n · (depth-d states)` of the difference map.
    pub columns: usize,
    /// Rank of the difference map itself.
    pub matrix_rank: usize,
    /// True when the coset-function lower bound met the modular-rank upper
    /// bound, pinning the integer nullity exactly.
    pub certified: bool,
}

/// Rank of `ker(Σ_s (f_s − f_s ∘ s⁻¹))` on `Z`-valued depth-`d` cylinder
/// step functions over (boundary × cosets).
///
/// The nullity is certified by a sandwich: explicit kernel vectors coming
/// from coset-only functions (computed by an exact Smith normal form of
/// the small coset difference map, then verified in the big matrix) give
/// a lower bound, and the sparse matrix rank over a prime field gives an
/// upper bound. The two agree on every system in scope; disagreement
/// reports a convergence error rather than an uncertified number.
pub fn pv_kernel_rank(sys: &FiniteLevelSystem, depth: usize) -> Result<PvRankReport> {
    let rank = sys.graph.rank();
    let n = rank as usize;
    let index = sys.graph.index();
    let words = reduced_words_of_length(rank, depth);
    let rows_words = reduced_words_of_length(rank, depth + 1);
    let row_id: HashMap<&[i32], usize> =
        rows_words.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    let row_count = rows_words.len() * index;
    let columns = n * words.len() * index;

    // expand a (word, coset) cylinder of depth `depth − 1 ..= depth + 1`
    // into depth-(depth+1) rows
    let expand = |w: &[i32], x: usize, sign: i64, col: &mut HashMap<usize, i64>| {
        let mut stack = vec![w.to_vec()];
        while let Some(v) = stack.pop() {
            if v.len() == depth + 1 {
                *col.entry(row_id[v.as_slice()] * index + x).or_insert(0) += sign;
            } else {
                for l in next_letters(rank, v.last().copied()) {
                    let mut e = v.clone();
                    e.push(l);
                    stack.push(e);
                }
            }
        }
    };

    let mut cols: Vec<Vec<(usize, i64)>> = Vec::with_capacity(columns);
    for s in 1..=n as i32 {
        for u in &words {
            for x in 0..index {
                let mut col = HashMap::new();
                expand(u, x, 1, &mut col);
                let sx = sys.graph.act_vertex(x, s);
                if u.is_empty() {
                    // s·∂ = ∂
                    expand(&[], sx, -1, &mut col);
                } else if u == &[-s] {
                    // s·[s⁻¹] = ∂ ∖ [s]: every row word not starting with s
                    for v in &rows_words {
                        if v[0] != s {
                            *col.entry(row_id[v.as_slice()] * index + sx).or_insert(0) -= 1;
                        }
                    }
                } else if u.first() == Some(&-s) {
                    expand(&u[1..], sx, -1, &mut col);
                } else {
                    let mut su = vec![s];
                    su.extend_from_slice(u);
                    expand(&su, sx, -1, &mut col);
                }
                let mut entries: Vec<(usize, i64)> =
                    col.into_iter().filter(|&(_, v)| v != 0).collect();
                entries.sort_unstable();
                cols.push(entries);
            }
        }
    }

    // Sibling collapse: for depth >= 2 and any reduced s·z·a, the rows of
    // (s·z·a, s·x) and (s·z·a', s·x) differ by exactly the two unit
    // entries on the columns (s, z·a, x) and (s, z·a', x), so every kernel
    // vector (over Z or mod p) is constant across the sibling family
    // {(s, z·a, x) : a}. Each family is verified by an explicit integer
    // row subtraction before its columns are summed into one; the
    // collapsed matrix then has the same nullity with a (2n−1)-fold fewer
    // columns and mostly duplicated rows.
    let mut class_of: Vec<usize> = (0..columns).collect();
    let mut class_count = columns;
    if depth >= 2 {
        let mut row_maps: Vec<HashMap<usize, i64>> = vec![HashMap::new(); row_count];
        for (c, col) in cols.iter().enumerate() {
            for &(r, v) in col {
                row_maps[r].insert(c, v);
            }
        }
        let word_id: HashMap<&[i32], usize> =
            words.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
        let prev_words = reduced_words_of_length(rank, depth - 1);
        let col_id = |s: i32, u: &[i32], x: usize| {
            ((s as usize - 1) * words.len() + word_id[u]) * index + x
        };
        let mut next_class = 0usize;
        for s in 1..=n as i32 {
            for z in &prev_words {
                if z[0] == -s {
                    continue;
                }
                for x in 0..index {
                    let y = sys.graph.act_vertex(x, s);
                    let letters = next_letters(rank, z.last().copied());
                    let mut w = vec![s];
                    w.extend_from_slice(z);
                    for pair in letters.windows(2) {
                        let mut u1 = z.clone();
                        u1.push(pair[0]);
                        let mut u2 = z.clone();
                        u2.push(pair[1]);
                        let mut v1 = w.clone();
                        v1.push(pair[0]);
                        let mut v2 = w.clone();
                        v2.push(pair[1]);
                        let r1 = &row_maps[row_id[v1.as_slice()] * index + y];
                        let r2 = &row_maps[row_id[v2.as_slice()] * index + y];
                        let c1 = col_id(s, &u1, x);
                        let c2 = col_id(s, &u2, x);
                        // row(v1) − row(v2) must be −e_{c1} + e_{c2}
                        let mut expected = r1.clone();
                        *expected.entry(c1).or_insert(0) += 1;
                        *expected.entry(c2).or_insert(0) -= 1;
                        expected.retain(|_, v| *v != 0);
                        if &expected != r2 {
                            return Err(Error::NoConvergence(
                                "sibling row identity failed; cannot collapse".into(),
                            ));
                        }
                    }
                    for a in letters {
                        let mut u = z.clone();
                        u.push(a);
                        class_of[col_id(s, &u, x)] = next_class;
                    }
                    next_class += 1;
                }
            }
            // columns whose prefix cancels against s keep their own class
            for u in words.iter().filter(|u| u[0] == -s) {
                for x in 0..index {
                    class_of[col_id(s, u, x)] = next_class;
                    next_class += 1;
                }
            }
        }
        class_count = next_class;
    }
    let mut class_cols: Vec<HashMap<usize, i64>> = vec![HashMap::new(); class_count];
    for (c, col) in cols.iter().enumerate() {
        for &(r, v) in col {
            *class_cols[class_of[c]].entry(r).or_insert(0) += v;
        }
    }
    let mut row_major: Vec<HashMap<usize, i64>> = vec![HashMap::new(); row_count];
    for (class, col) in class_cols.iter().enumerate() {
        for (&r, &v) in col {
            if v != 0 {
                row_major[r].insert(class, v);
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut distinct_rows: Vec<Vec<(usize, i64)>> = Vec::new();
    for row in row_major {
        let mut entries: Vec<(usize, i64)> = row.into_iter().collect();
        if entries.is_empty() {
            continue;
        }
        entries.sort_unstable();
        if seen.insert(entries.clone()) {
            distinct_rows.push(entries);
        }
    }
    let collapsed_rank = sparse_rank_mod_p(distinct_rows);
    let upper = class_count - collapsed_rank;
    let matrix_rank = columns - upper;
    let lower = coset_kernel_bound(sys, depth, &cols, row_count)?;
    if lower != upper {
        return Err(Error::NoConvergence(format!(
            "kernel rank sandwich open: certified lower bound {lower}, modular upper bound {upper}"
        )));
    }
    Ok(PvRankReport { rank: upper, columns, matrix_rank, certified: true })
}

// Lower bound: kernel vectors of the coset-only difference map (exact
// integer kernel of an index × n·index matrix), lifted to constants on
// the boundary factor and re-verified against the sparse columns.
fn coset_kernel_bound(
    sys: &FiniteLevelSystem,
    depth: usize,
    cols: &[Vec<(usize, i64)>],
    row_count: usize,
) -> Result<usize> {
    let n = sys.graph.rank() as usize;
    let index = sys.graph.index();
    let mut small = IntMatrix::zero(index, n * index);
    for s in 0..n {
        for x in 0..index {
            let col = s * index + x;
            let mut e = small.get(x, col).clone();
            e += 1;
            small.set(x, col, e);
            let sx = sys.graph.act_vertex(x, s as i32 + 1);
            let mut e = small.get(sx, col).clone();
            e -= 1;
            small.set(sx, col, e);
        }
    }
    let kernel = small.smith_normal_form().kernel_basis();
    let per_symbol = reduced_words_of_length(sys.graph.rank(), depth).len() * index;
    for vec in &kernel {
        // lift: coefficient of column (s, u, x) is vec[s·index + x]
        let mut acc = vec![BigInt::from(0); row_count];
        for s in 0..n {
            for u_idx in 0..per_symbol / index {
                for x in 0..index {
                    let c = &vec[s * index + x];
                    if c == &BigInt::from(0) {
                        continue;
                    }
                    let col = &cols[s * per_symbol + u_idx * index + x];
                    for &(r, v) in col {
                        acc[r] += c * v;
                    }
                }
            }
        }
        if acc.iter().any(|e| e != &BigInt::from(0)) {
            return Err(Error::NoConvergence(
                "lifted coset kernel vector fails to annihilate the difference map".into(),
            ));
        }
    }
    Ok(kernel.len())
}

// Deterministic sparse Gaussian elimination over F_p, p < 2^31:
// right-looking, always pivoting on a row of minimal current support and,
// within it, the column held by the fewest rows (Markowitz-style), which
// keeps fill-in low on these locally-coupled cylinder systems.
fn sparse_rank_mod_p(input: Vec<Vec<(usize, i64)>>) -> usize {
    use std::cmp::Reverse;
    use std::collections::{BinaryHeap, HashSet};
    const P: u64 = 2_147_483_629;
    let inv = |a: u64| -> u64 {
        // Fermat inverse
        let mut base = a % P;
        let mut e = P - 2;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % P;
            }
            base = base * base % P;
            e >>= 1;
        }
        acc
    };
    let mut rows: Vec<Option<HashMap<usize, u64>>> = input
        .into_iter()
        .map(|r| {
            let m: HashMap<usize, u64> = r
                .into_iter()
                .filter_map(|(c, v)| {
                    let v = v.rem_euclid(P as i64) as u64;
                    (v != 0).then_some((c, v))
                })
                .collect();
            Some(m)
        })
        .collect();
    let mut col_rows: HashMap<usize, HashSet<usize>> = HashMap::new();
    let mut heap = BinaryHeap::new();
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_ref().expect("fresh");
        for &c in row.keys() {
            col_rows.entry(c).or_default().insert(i);
        }
        if !row.is_empty() {
            heap.push(Reverse((row.len(), i)));
        }
    }
    let mut rank = 0usize;
    while let Some(Reverse((len, i))) = heap.pop() {
        let Some(pivot_row) = rows[i].clone() else { continue };
        if pivot_row.len() != len || pivot_row.is_empty() {
            continue; // stale heap entry
        }
        let (&pc, &pv) = pivot_row
            .iter()
            .min_by_key(|(&c, _)| (col_rows[&c].len(), c))
            .expect("nonempty");
        let pinv = inv(pv);
        let touched: Vec<usize> =
            col_rows[&pc].iter().copied().filter(|&j| j != i).collect();
        for j in touched {
            let row = rows[j].as_mut().expect("alive rows only in col_rows");
            let factor = row[&pc] * pinv % P;
            for (&c, &v) in &pivot_row {
                let e = row.entry(c).or_insert(0);
                let fresh = *e == 0;
                *e = (*e + (P - factor) * v % P) % P;
                if *e == 0 {
                    row.remove(&c);
                    col_rows.get_mut(&c).expect("tracked").remove(&j);
                } else if fresh {
                    col_rows.entry(c).or_default().insert(j);
                }
            }
            if row.is_empty() {
                rows[j] = None;
            } else {
                heap.push(Reverse((row.len(), j)));
            }
        }
        for &c in pivot_row.keys() {
            col_rows.get_mut(&c).expect("tracked").remove(&i);
        }
        rows[i] = None;
        rank += 1;
    }
    rank
}
