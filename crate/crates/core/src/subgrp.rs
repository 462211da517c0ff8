//! Finite-index subgroups of `F_n` as Schreier coset graphs.
//!
//! A subgroup of index `k` is represented by the action of the generators on
//! its `k` cosets, with the basepoint `0` standing for the subgroup itself.
//! A spanning tree of the coset graph yields a transversal and a Schreier
//! free basis: one element `t_orig · s · t_term^{-1}` per non-tree edge, of
//! total rank `k(n-1) + 1`.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::words::{EnumeratedBasis, ReducedWord};
use crate::{Error, Result};

/// The Schreier coset graph of a finite-index subgroup of `F_n`, with a
/// chosen spanning tree and the transversal it defines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchreierGraph {
    rank: u32,
    /// `targets[v][j-1]` is `v · s_j`.
    targets: Vec<Vec<usize>>,
    /// `inv_targets[v][j-1]` is `v · s_j^{-1}`.
    inv_targets: Vec<Vec<usize>>,
    /// For `v != 0`: the tree edge `(parent, letter)` with `parent·letter = v`.
    tree_parent: Vec<Option<(usize, i32)>>,
    /// Reduced word read along the tree from the basepoint to each vertex.
    transversal: Vec<ReducedWord>,
}

impl SchreierGraph {
    /// Builds the graph of the basepoint stabilizer from one permutation of
    /// `{0..X}` per generator. The spanning tree is breadth-first from the
    /// basepoint, exploring `s_1 < s_1^{-1} < s_2 < ...`.
    pub fn from_permutations(rank: u32, perms: &[Vec<usize>]) -> Result<Self> {
        if perms.len() != rank as usize {
            return Err(Error::RankMismatch(rank, perms.len() as u32));
        }
        let size = perms.first().map_or(0, |p| p.len());
        if size == 0 {
            return Err(Error::InvalidInput("empty coset space".into()));
        }
        let mut inv_perms = Vec::with_capacity(perms.len());
        for p in perms {
            if p.len() != size {
                return Err(Error::NotAPermutation {
                    size,
                    reason: format!("length {} differs from {size}", p.len()),
                });
            }
            let mut inv = vec![usize::MAX; size];
            for (x, &y) in p.iter().enumerate() {
                if y >= size {
                    return Err(Error::NotAPermutation {
                        size,
                        reason: format!("image {y} out of range"),
                    });
                }
                if inv[y] != usize::MAX {
                    return Err(Error::NotAPermutation {
                        size,
                        reason: format!("image {y} repeated"),
                    });
                }
                inv[y] = x;
            }
            inv_perms.push(inv);
        }
        let targets: Vec<Vec<usize>> =
            (0..size).map(|v| perms.iter().map(|p| p[v]).collect()).collect();
        let inv_targets: Vec<Vec<usize>> =
            (0..size).map(|v| inv_perms.iter().map(|p| p[v]).collect()).collect();

        let mut graph = SchreierGraph {
            rank,
            targets,
            inv_targets,
            tree_parent: vec![None; size],
            transversal: vec![ReducedWord::identity(rank); size],
        };
        graph.bfs_tree()?;
        Ok(graph)
    }

    /// The index-1 graph (the whole group).
    pub fn trivial(rank: u32) -> Self {
        Self::from_permutations(rank, &vec![vec![0]; rank as usize]).expect("one fixed point")
    }

    /// The kernel of `F_n -> Z_k` sending `s_j` to `1` and every other
    /// generator to `0`. Vertices are residues mod `k`; the spanning tree is
    /// the `s_j`-path `0 -> 1 -> ... -> k-1`, so the Schreier basis comes out
    /// as `{s_j^k} ∪ {s_j^l t s_j^{-l} : t != s_j, 0 <= l < k}`.
    pub fn cyclic_kernel(rank: u32, j: u32, k: usize) -> Result<Self> {
        if j == 0 || j > rank {
            return Err(Error::InvalidGenerator { index: j as i64, rank });
        }
        if k == 0 {
            return Err(Error::InvalidInput("modulus must be at least 1".into()));
        }
        let perms: Vec<Vec<usize>> = (1..=rank)
            .map(|g| {
                (0..k).map(|v| if g == j { (v + 1) % k } else { v }).collect()
            })
            .collect();
        let mut graph = Self::from_permutations(rank, &perms)?;
        // Replace the BFS tree by the generator path.
        let s = ReducedWord::generator(rank, j as i32)?;
        for v in 1..k {
            graph.tree_parent[v] = Some((v - 1, j as i32));
            graph.transversal[v] = s.pow(v as i64);
        }
        Ok(graph)
    }

    /// Replaces the spanning tree by explicit `(vertex, parent, letter)`
    /// edges rooted at vertex 0 and recomputes the transversal words.
    pub fn with_tree(mut self, edges: &[(usize, usize, i32)]) -> Result<Self> {
        let size = self.index();
        if edges.len() != size - 1 {
            return Err(Error::InvalidInput(format!(
                "{} tree edges for {size} vertices",
                edges.len()
            )));
        }
        let mut parents = vec![None; size];
        for &(v, p, l) in edges {
            if v == 0 || v >= size || p >= size || self.act_vertex(p, l) != v {
                return Err(Error::InvalidInput(format!("bad tree edge ({v}, {p}, {l})")));
            }
            if parents[v].replace((p, l)).is_some() {
                return Err(Error::InvalidInput(format!("vertex {v} has two tree parents")));
            }
        }
        self.tree_parent = parents;
        // Recompute transversals in tree order; detect cycles by exhaustion.
        let mut done = vec![false; size];
        done[0] = true;
        self.transversal[0] = ReducedWord::identity(self.rank);
        for _ in 0..size {
            for v in 1..size {
                if !done[v] {
                    let (p, l) = self.tree_parent[v].expect("all parents set");
                    if done[p] {
                        self.transversal[v] = self.transversal[p]
                            .multiply(&ReducedWord::generator(self.rank, l)?)?;
                        done[v] = true;
                    }
                }
            }
        }
        if done.iter().any(|d| !d) {
            return Err(Error::InvalidInput("tree edges do not form a spanning tree".into()));
        }
        Ok(self)
    }

    fn bfs_tree(&mut self) -> Result<()> {
        let size = self.index();
        let mut visited = vec![false; size];
        visited[0] = true;
        let mut queue = std::collections::VecDeque::from([0usize]);
        let mut order = vec![0usize];
        while let Some(v) = queue.pop_front() {
            for j in 1..=self.rank as i32 {
                for l in [j, -j] {
                    let w = self.act_vertex(v, l);
                    if !visited[w] {
                        visited[w] = true;
                        self.tree_parent[w] = Some((v, l));
                        self.transversal[w] = self.transversal[v]
                            .multiply(&ReducedWord::generator(self.rank, l)?)?;
                        queue.push_back(w);
                        order.push(w);
                    }
                }
            }
        }
        if order.len() < size {
            return Err(Error::NotTransitive { orbit: order });
        }
        Ok(())
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    /// Number of cosets.
    pub fn index(&self) -> usize {
        self.targets.len()
    }

    /// `v · s_l` for a signed generator letter `l`.
    pub fn act_vertex(&self, v: usize, l: i32) -> usize {
        if l > 0 {
            self.targets[v][(l - 1) as usize]
        } else {
            self.inv_targets[v][(-l - 1) as usize]
        }
    }

    /// Coset reached from `v` by reading `w` left to right.
    pub fn act_word(&self, v: usize, w: &ReducedWord) -> usize {
        w.letters().iter().fold(v, |u, &l| self.act_vertex(u, l))
    }

    /// True if `w` lies in the subgroup (its loop returns to the basepoint).
    pub fn contains(&self, w: &ReducedWord) -> bool {
        self.act_word(0, w) == 0
    }

    /// True if the edge `(v, l)` belongs to the spanning tree.
    pub fn is_tree_edge(&self, v: usize, l: i32) -> bool {
        let w = self.act_vertex(v, l);
        self.tree_parent[w] == Some((v, l)) || self.tree_parent[v] == Some((w, -l))
    }

    pub fn transversal(&self, v: usize) -> &ReducedWord {
        &self.transversal[v]
    }

    /// The permutation of the coset space induced by each generator, in
    /// target-table form.
    pub fn permutations(&self) -> Vec<Vec<usize>> {
        (1..=self.rank as usize)
            .map(|j| (0..self.index()).map(|v| self.targets[v][j - 1]).collect())
            .collect()
    }

    /// The Schreier free basis attached to the spanning tree, one element per
    /// non-tree edge in generator-major order, certified by folding.
    pub fn schreier_basis(self) -> Result<SchreierBasis> {
        let mut elements = Vec::new();
        let mut edge_letters = BTreeMap::new();
        for j in 1..=self.rank as i32 {
            for v in 0..self.index() {
                if !self.is_tree_edge(v, j) {
                    let w = self.act_vertex(v, j);
                    let word = self.transversal[v]
                        .multiply(&ReducedWord::generator(self.rank, j)?)?
                        .multiply(&self.transversal[w].inverse())?;
                    elements.push(word);
                    edge_letters.insert((v, j as u32), elements.len() as i32);
                }
            }
        }
        let expected = self.index() * (self.rank as usize - 1) + 1;
        if elements.len() != expected {
            return Err(Error::Precondition(format!(
                "{} non-tree edges, expected {expected}",
                elements.len()
            )));
        }
        let basis = EnumeratedBasis::new(self.rank, elements)?.verify()?;
        Ok(SchreierBasis { graph: self, basis, edge_letters })
    }
}

/// A Schreier graph together with its free basis and the edge-to-letter map.
#[derive(Clone, Debug)]
pub struct SchreierBasis {
    graph: SchreierGraph,
    basis: EnumeratedBasis,
    /// Non-tree edge `(vertex, generator)` to 1-based basis letter.
    edge_letters: BTreeMap<(usize, u32), i32>,
}

impl SchreierBasis {
    pub fn graph(&self) -> &SchreierGraph {
        &self.graph
    }

    pub fn basis(&self) -> &EnumeratedBasis {
        &self.basis
    }

    /// Rank of the subgroup as a free group.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// The signed basis letter crossed when traversing edge `(v, l)`, or
    /// `None` for a tree edge.
    pub fn crossing(&self, v: usize, l: i32) -> Option<i32> {
        if l > 0 {
            self.edge_letters.get(&(v, l as u32)).copied()
        } else {
            let w = self.graph.act_vertex(v, l);
            self.edge_letters.get(&(w, (-l) as u32)).map(|&x| -x)
        }
    }

    /// Rewrites `w` as a word over the basis alphabet by reading its loop's
    /// non-tree crossings; `None` if `w` is not in the subgroup.
    pub fn rewrite(&self, w: &ReducedWord) -> Result<Option<ReducedWord>> {
        if w.rank() != self.graph.rank {
            return Err(Error::RankMismatch(self.graph.rank, w.rank()));
        }
        let mut v = 0usize;
        let mut crossings = Vec::new();
        for &l in w.letters() {
            if let Some(x) = self.crossing(v, l) {
                crossings.push(x);
            }
            v = self.graph.act_vertex(v, l);
        }
        if v != 0 {
            return Ok(None);
        }
        Ok(Some(ReducedWord::from_letters(self.rank() as u32, crossings)?))
    }

    /// Evaluates a basis word back to an ambient-group word.
    pub fn evaluate(&self, u: &ReducedWord) -> Result<ReducedWord> {
        if u.rank() as usize != self.rank() {
            return Err(Error::RankMismatch(self.rank() as u32, u.rank()));
        }
        let mut out = ReducedWord::identity(self.graph.rank);
        for &l in u.letters() {
            let e = &self.basis.elements()[(l.unsigned_abs() - 1) as usize];
            let factor = if l > 0 { e.clone() } else { e.inverse() };
            out = out.multiply(&factor)?;
        }
        Ok(out)
    }
}

/// The kernel of `Γ -> Γ^{ab} ⊗ Z_q`, for `Γ` the subgroup of a Schreier
/// basis, flattened to a Schreier graph over the ambient group. The index
/// multiplies by `q^rank(Γ)`.
pub fn mod_q_abelian_kernel(sub: &SchreierBasis, q: u64, cap: usize) -> Result<SchreierGraph> {
    if q < 2 || (2..q).take_while(|d| d * d <= q).any(|d| q % d == 0) {
        return Err(Error::Precondition(format!("{q} is not prime")));
    }
    let r = sub.rank();
    let base = sub.graph().index();
    // coset space = (coset of Γ) × (Z_q)^r; encode as v * q^r + mixed radix
    let mut size = base;
    for _ in 0..r {
        size = size
            .checked_mul(q as usize)
            .filter(|&s| s <= cap)
            .ok_or_else(|| Error::ResourceCap(format!(
                "coset space {base}*{q}^{r} exceeds cap {cap}"
            )))?;
    }
    let qr = size / base;
    let encode = |v: usize, vec: &[u64]| -> usize {
        let mut code = 0usize;
        for &c in vec.iter().rev() {
            code = code * q as usize + c as usize;
        }
        v * qr + code
    };
    let rank = sub.graph().rank();
    let mut perms = vec![vec![0usize; size]; rank as usize];
    for v in 0..base {
        let mut vec = vec![0u64; r];
        for code in 0..qr {
            let mut c = code;
            for slot in vec.iter_mut() {
                *slot = (c % q as usize) as u64;
                c /= q as usize;
            }
            for j in 1..=rank as i32 {
                let mut image = vec.clone();
                if let Some(x) = sub.crossing(v, j) {
                    let idx = (x.unsigned_abs() - 1) as usize;
                    let delta = if x > 0 { 1 } else { q - 1 };
                    image[idx] = (image[idx] + delta) % q;
                }
                perms[(j - 1) as usize][encode(v, &vec)] =
                    encode(sub.graph().act_vertex(v, j), &image);
            }
        }
    }
    SchreierGraph::from_permutations(rank, &perms)
}

/// A Stallings-folded labeled graph; only its Betti number is exposed, which
/// certifies free bases (a list of words is a basis of the subgroup it
/// generates iff the folded flower has Betti number equal to the list size).
pub struct FoldedGraph {
    vertices: usize,
    edges: usize,
}

impl FoldedGraph {
    /// First Betti number `|E| - |V| + 1`.
    pub fn betti(&self) -> usize {
        self.edges + 1 - self.vertices
    }
}

/// Builds the flower of the given words at a common basepoint and folds it.
pub fn fold_words(rank: u32, words: &[ReducedWord]) -> Result<FoldedGraph> {
    for w in words {
        if w.rank() != rank {
            return Err(Error::RankMismatch(rank, w.rank()));
        }
    }
    // half-edges (v, l, w); folding merges targets of equally labeled edges
    let mut edges: Vec<(usize, i32, usize)> = Vec::new();
    let mut next = 1usize;
    for word in words {
        let mut at = 0usize;
        for (i, &l) in word.letters().iter().enumerate() {
            let to = if i + 1 == word.len() {
                0
            } else {
                next += 1;
                next - 1
            };
            edges.push((at, l, to));
            at = to;
        }
    }
    let mut parent: Vec<usize> = (0..next).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    loop {
        let mut out_map: BTreeMap<(usize, i32), usize> = BTreeMap::new();
        let mut merged = false;
        for &(v, l, w) in &edges {
            for (from, lab, to) in [(v, l, w), (w, -l, v)] {
                let from = find(&mut parent, from);
                let to = find(&mut parent, to);
                match out_map.get(&(from, lab)) {
                    Some(&prev) if prev != to => {
                        let a = find(&mut parent, prev);
                        parent[a] = to;
                        merged = true;
                    }
                    _ => {
                        out_map.insert((from, lab), to);
                    }
                }
            }
            if merged {
                break;
            }
        }
        if !merged {
            break;
        }
    }
    let mut edge_set = std::collections::BTreeSet::new();
    let mut vertex_set = std::collections::BTreeSet::new();
    vertex_set.insert(find(&mut parent, 0));
    for &(v, l, w) in &edges {
        let (a, b) = (find(&mut parent, v), find(&mut parent, w));
        vertex_set.insert(a);
        vertex_set.insert(b);
        if l > 0 {
            edge_set.insert((a, l, b));
        } else {
            edge_set.insert((b, -l, a));
        }
    }
    Ok(FoldedGraph { vertices: vertex_set.len(), edges: edge_set.len() })
}

// JSON form: {"n": n, "edges": [[targets of s_1..s_n] per vertex],
// "tree": [[vertex, parent, letter], ...]}.
#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: u32,
    edges: Vec<Vec<usize>>,
    tree: Vec<(usize, usize, i32)>,
}

impl Serialize for SchreierGraph {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr {
            n: self.rank,
            edges: self.targets.clone(),
            tree: self
                .tree_parent
                .iter()
                .enumerate()
                .filter_map(|(v, p)| p.map(|(parent, l)| (v, parent, l)))
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for SchreierGraph {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = GraphRepr::deserialize(de)?;
        let perms: Vec<Vec<usize>> = (0..repr.n as usize)
            .map(|j| {
                repr.edges
                    .iter()
                    .map(|row| {
                        row.get(j).copied().ok_or_else(|| {
                            D::Error::custom(format!("vertex row shorter than rank {}", repr.n))
                        })
                    })
                    .collect::<std::result::Result<_, _>>()
            })
            .collect::<std::result::Result<_, _>>()?;
        let graph =
            SchreierGraph::from_permutations(repr.n, &perms).map_err(D::Error::custom)?;
        if repr.tree.is_empty() {
            return Ok(graph); // default BFS tree
        }
        graph.with_tree(&repr.tree).map_err(D::Error::custom)
    }
}
