//! Piece decompositions, decomposition paths and loops, and the measured
//! geometric constants.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use super::MetricTree;
use crate::error::{Error, Result};
use crate::numeric::Rational;
use crate::union_find::DisjointSet;

/// An ordered family of subtrees `X_0, X_1, ...` given by vertex sets,
/// with a basepoint in `X_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieceDecomposition {
    pieces: Vec<Vec<usize>>,
    basepoint: usize,
}

impl PieceDecomposition {
    pub fn new(pieces: Vec<Vec<usize>>, basepoint: usize) -> Result<Self> {
        let mut pieces = pieces;
        if pieces.is_empty() {
            return Err(Error::Decomposition("no pieces".into()));
        }
        for (i, p) in pieces.iter_mut().enumerate() {
            p.sort_unstable();
            p.dedup();
            if p.len() < 2 {
                return Err(Error::Decomposition(format!("piece {i} is degenerate")));
            }
        }
        if pieces[0].binary_search(&basepoint).is_err() {
            return Err(Error::Decomposition(format!("basepoint {basepoint} is not in the first piece")));
        }
        Ok(PieceDecomposition { pieces, basepoint })
    }

    pub fn pieces(&self) -> &[Vec<usize>] {
        &self.pieces
    }

    pub fn piece(&self, n: usize) -> &[usize] {
        &self.pieces[n]
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn contains(&self, n: usize, v: usize) -> bool {
        self.pieces[n].binary_search(&v).is_ok()
    }

    /// Pieces containing `v`.
    pub fn pieces_of(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.pieces.len()).filter(move |&n| self.contains(n, v))
    }
}

/// Data extracted from a validated tree-like decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeLike {
    /// `p_n`, the single point where `X_n` meets earlier pieces; entry 0 is
    /// the basepoint.
    pub branch_points: Vec<usize>,
    // piece holding the edge from each vertex to its parent
    edge_piece: Vec<Option<usize>>,
}

impl TreeLike {
    pub fn edge_piece(&self, tree: &MetricTree, a: usize, b: usize) -> Option<usize> {
        if tree.parent(a) == Some(b) {
            self.edge_piece[a]
        } else if tree.parent(b) == Some(a) {
            self.edge_piece[b]
        } else {
            None
        }
    }
}

/// A sequence `z_0, ..., z_m` with `{z_(i-1), z_i} ⊆ X_(n_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionPath {
    pub points: Vec<usize>,
    pub pieces: Vec<usize>,
}

impl DecompositionPath {
    pub fn hops(&self) -> usize {
        self.pieces.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopKind {
    Trivial,
    NonTrivial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionLoop {
    pub path: DecompositionPath,
    pub kind: LoopKind,
}

pub fn validate_treelike(tree: &MetricTree, decomp: &PieceDecomposition) -> Result<TreeLike> {
    let all: Vec<usize> = (0..tree.vertex_count()).collect();
    validate_treelike_on(tree, decomp, &all)
}

/// Check that the pieces are connected subtrees covering `ground` and that
/// each piece after the first meets the earlier ones in exactly one point.
pub fn validate_treelike_on(tree: &MetricTree, decomp: &PieceDecomposition, ground: &[usize]) -> Result<TreeLike> {
    let n = tree.vertex_count();
    let mut in_ground = vec![false; n];
    for &v in ground {
        in_ground[v] = true;
    }
    let mut seen = vec![false; n];
    let mut branch_points = vec![decomp.basepoint()];
    for (k, piece) in decomp.pieces().iter().enumerate() {
        if let Some(&v) = piece.iter().find(|&&v| v >= n || !in_ground[v]) {
            return Err(Error::Decomposition(format!("piece {k} contains vertex {v} outside the tree")));
        }
        if !connected(tree, piece) {
            return Err(Error::Decomposition(format!("piece {k} is not connected")));
        }
        if k > 0 {
            let shared: Vec<usize> = piece.iter().copied().filter(|&v| seen[v]).collect();
            if shared.len() != 1 {
                return Err(Error::Decomposition(format!(
                    "piece {k} meets the earlier pieces in {} points",
                    shared.len()
                )));
            }
            branch_points.push(shared[0]);
        }
        for &v in piece {
            seen[v] = true;
        }
    }
    if let Some(&v) = ground.iter().find(|&&v| !seen[v]) {
        return Err(Error::Decomposition(format!("vertex {v} is not covered")));
    }
    if let Some(l) = find_nontrivial_loop(decomp) {
        return Err(Error::Decomposition(format!("non-trivial loop through points {:?}", l.path.points)));
    }
    let mut edge_piece = vec![None; n];
    for &v in ground {
        if let Some(p) = tree.parent(v) {
            if in_ground[p] {
                let owners: Vec<usize> = decomp.pieces_of(v).filter(|&k| decomp.contains(k, p)).collect();
                if owners.len() != 1 {
                    return Err(Error::Decomposition(format!("edge {v}-{p} lies in {} pieces", owners.len())));
                }
                edge_piece[v] = Some(owners[0]);
            }
        }
    }
    Ok(TreeLike { branch_points, edge_piece })
}

fn connected(tree: &MetricTree, piece: &[usize]) -> bool {
    let inside = |v: usize| piece.binary_search(&v).is_ok();
    let mut seen = vec![false; piece.len()];
    let mut queue = VecDeque::from([piece[0]]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &w in tree.neighbors(u) {
            if inside(w) {
                let i = piece.binary_search(&w).unwrap();
                if !seen[i] {
                    seen[i] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
    }
    count == piece.len()
}

/// Classify a candidate loop `z_0, ..., z_m = z_0` through pieces
/// `n_1, ..., n_m`, checking that it is a simple decomposition loop.
pub fn classify_loop(decomp: &PieceDecomposition, points: &[usize], pieces: &[usize]) -> Result<LoopKind> {
    let m = pieces.len();
    let bad = |why: &str| Err(Error::Decomposition(format!("not a simple decomposition loop: {why}")));
    if m == 0 || points.len() != m + 1 || points[0] != points[m] {
        return bad("wrong shape");
    }
    for i in 0..m {
        if pieces[i] >= decomp.len() {
            return bad("unknown piece");
        }
        if !decomp.contains(pieces[i], points[i]) || !decomp.contains(pieces[i], points[i + 1]) {
            return bad("consecutive points do not share the given piece");
        }
    }
    for i in 1..=m {
        for j in i + 1..=m {
            if points[i] == points[j] {
                return bad("repeated point");
            }
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            if pieces[i] == pieces[j] && !(i == 0 && j == m - 1) {
                return bad("repeated piece");
            }
        }
    }
    for &z in &points[1..m] {
        if decomp.pieces_of(z).count() < 2 {
            return bad("interior point is not a branch point");
        }
    }
    let same = m == 2 && decomp.piece(pieces[0]) == decomp.piece(pieces[1]);
    Ok(if same { LoopKind::Trivial } else { LoopKind::NonTrivial })
}

/// Search the incidence graph between pieces and shared points for a cycle
/// that yields a non-trivial simple loop.
pub fn find_nontrivial_loop(decomp: &PieceDecomposition) -> Option<DecompositionLoop> {
    let np = decomp.len();
    let mut shared: Vec<usize> = Vec::new();
    let mut count = alloc::collections::BTreeMap::new();
    for p in decomp.pieces() {
        for &v in p {
            *count.entry(v).or_insert(0usize) += 1;
        }
    }
    for (&v, &c) in &count {
        if c >= 2 {
            shared.push(v);
        }
    }
    // nodes: pieces 0..np, then shared points
    let total = np + shared.len();
    let mut ds = DisjointSet::new(total);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (si, &v) in shared.iter().enumerate() {
        for k in decomp.pieces_of(v) {
            let a = k;
            let b = np + si;
            if ds.union(a, b) {
                adj[a].push(b);
                adj[b].push(a);
                continue;
            }
            // cycle: forest path from b back to a, then the new edge
            let route = forest_path(&adj, b, a);
            let mut pieces = Vec::new();
            let mut points = Vec::new();
            for &node in &route {
                if node < np {
                    pieces.push(node);
                } else {
                    points.push(shared[node - np]);
                }
            }
            // route is q_0, P_1, q_1, ..., q_(r-1), P_r; the new edge closes it at q_0
            let mut z = points.clone();
            z.push(points[0]);
            let path = DecompositionPath { points: z, pieces };
            let kind = classify_loop(decomp, &path.points, &path.pieces).unwrap_or(LoopKind::NonTrivial);
            let two_point_duplicate = path.pieces.len() == 2 && decomp.piece(path.pieces[0]).len() == 2;
            if kind == LoopKind::Trivial && two_point_duplicate {
                continue;
            }
            return Some(DecompositionLoop { path, kind: LoopKind::NonTrivial });
        }
    }
    None
}

fn forest_path(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for &w in &adj[u] {
            if prev[w] == usize::MAX {
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    let mut route = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[cur];
        route.push(cur);
    }
    route.reverse();
    route
}

/// The decomposition path induced on the tree arc from `x` to `y`: break
/// points where the arc passes from one piece to the next.
pub fn decomposition_path(tree: &MetricTree, tl: &TreeLike, x: usize, y: usize) -> DecompositionPath {
    let verts = tree.path(x, y);
    let mut points = vec![x];
    let mut pieces: Vec<usize> = Vec::new();
    for w in verts.windows(2) {
        let p = tl.edge_piece(tree, w[0], w[1]).expect("edge inside the decomposed subtree");
        if pieces.last() == Some(&p) {
            *points.last_mut().unwrap() = w[1];
        } else {
            pieces.push(p);
            points.push(w[1]);
        }
    }
    DecompositionPath { points, pieces }
}

/// `z_j ∉ X_(n_i)` whenever `i < j`.
pub fn is_minimal(decomp: &PieceDecomposition, path: &DecompositionPath) -> bool {
    for (h, &p) in path.pieces.iter().enumerate() {
        for &z in &path.points[(h + 2).min(path.points.len())..] {
            if decomp.contains(p, z) {
                return false;
            }
        }
    }
    true
}

/// Measured constants of a decomposition over a set of vertex pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricConstants {
    /// `max d(x, y) / max_i d(z_(i-1), z_i)` over minimal paths.
    pub c2: Rational,
    /// `max Σ_i d(z_(i-1), z_i) / d(x, y)`.
    pub c3: Rational,
    pub pairs: usize,
    pub non_minimal: usize,
}

impl GeometricConstants {
    pub fn c(&self) -> Rational {
        if self.c2 > self.c3 {
            self.c2.clone()
        } else {
            self.c3.clone()
        }
    }
}

pub fn geometric_constants(tree: &MetricTree, decomp: &PieceDecomposition, tl: &TreeLike) -> GeometricConstants {
    let all: Vec<usize> = (0..tree.vertex_count()).collect();
    geometric_constants_on(tree, decomp, tl, &all)
}

/// Constants over all pairs drawn from `vertices`.
pub fn geometric_constants_on(
    tree: &MetricTree,
    decomp: &PieceDecomposition,
    tl: &TreeLike,
    vertices: &[usize],
) -> GeometricConstants {
    let one = Rational::from_integer(1.into());
    let mut out = GeometricConstants { c2: one.clone(), c3: one, pairs: 0, non_minimal: 0 };
    for (i, &x) in vertices.iter().enumerate() {
        for &y in &vertices[i + 1..] {
            let path = decomposition_path(tree, tl, x, y);
            out.pairs += 1;
            if !is_minimal(decomp, &path) {
                out.non_minimal += 1;
            }
            let mut sum = Rational::zero();
            let mut top = Rational::zero();
            for w in path.points.windows(2) {
                let d = tree.d(w[0], w[1]);
                sum += d;
                if *d > top {
                    top = d.clone();
                }
            }
            let dxy = tree.d(x, y);
            let r2 = dxy / &top;
            if r2 > out.c2 {
                out.c2 = r2;
            }
            let r3 = sum / dxy;
            if r3 > out.c3 {
                out.c3 = r3;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::GluePlan;
    use super::*;

    #[test]
    fn arcs_of_a_chain() {
        let t = MetricTree::build(&GluePlan::chain(3, 1).unwrap()).unwrap();
        let d = t.arc_decomposition();
        let tl = validate_treelike(&t, &d).unwrap();
        assert_eq!(tl.branch_points, vec![0, t.vertex(1, 0), t.vertex(2, 0)]);
        let path = decomposition_path(&t, &tl, t.vertex(0, 0), t.vertex(2, 2));
        assert_eq!(path.hops(), 3);
        assert!(is_minimal(&d, &path));
        let c = geometric_constants(&t, &d, &tl);
        assert_eq!(c.c2, Rational::from_integer(3.into()));
        assert_eq!(c.c3, Rational::from_integer(1.into()));
        assert_eq!(c.non_minimal, 0);
    }

    #[test]
    fn single_piece_constants() {
        let t = MetricTree::build(&GluePlan::chain(1, 3).unwrap()).unwrap();
        let d = t.arc_decomposition();
        let tl = validate_treelike(&t, &d).unwrap();
        let c = geometric_constants(&t, &d, &tl);
        assert_eq!((c.c2.clone(), c.c3.clone()), (Rational::from_integer(1.into()), Rational::from_integer(1.into())));
    }

    #[test]
    fn duplicated_piece_fails_uniqueness() {
        let t = MetricTree::build(&GluePlan::chain(2, 1).unwrap()).unwrap();
        let mut pieces = t.arc_decomposition().pieces().to_vec();
        pieces.push(pieces[1].clone());
        let d = PieceDecomposition::new(pieces, 0).unwrap();
        let err = validate_treelike(&t, &d).unwrap_err();
        assert!(matches!(err, Error::Decomposition(ref m) if m.contains("3 points")), "{err}");
        assert!(find_nontrivial_loop(&d).is_some());
    }

    #[test]
    fn loops_are_classified() {
        let t = MetricTree::build(&GluePlan::chain(2, 1).unwrap()).unwrap();
        let d = t.arc_decomposition();
        let (x, p) = (t.vertex(0, 0), t.vertex(1, 0));
        assert_eq!(classify_loop(&d, &[x, p, x], &[0, 0]).unwrap(), LoopKind::Trivial);
        assert!(classify_loop(&d, &[x, p, x], &[0, 1]).is_err());
        assert!(find_nontrivial_loop(&d).is_none());
        let glued = PieceDecomposition::new(vec![vec![0, 1, 2], vec![1, 2, 3, 4]], 0).unwrap();
        let l = find_nontrivial_loop(&glued).unwrap();
        assert_eq!(l.kind, LoopKind::NonTrivial);
    }
}
