//! Splitting subtrees into arcs, and the arc decomposition of a whole tree.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::debv::{debv, Debv};
use super::decomposition::{geometric_constants_on, validate_treelike_on, GeometricConstants, TreeLike};
use super::{MetricTree, PieceDecomposition};
use crate::error::{Error, Result};
use crate::numeric::Rational;

/// An arc of a subtree, as a vertex path, with the point where it meets
/// the earlier arcs (for the first arc: the requested point).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubArc {
    pub path: Vec<usize>,
    pub branch: usize,
}

/// Split the subtree spanned by `piece` into arcs `γ_1, γ_2, ...` with
/// `p ∈ γ_1`, each later arc meeting the union of the earlier ones in a
/// single point.
///
/// The covering arcs run from the smallest leaf `l_0` of the subtree to each
/// other leaf. The first one through `p` is cut at `p`; every later one
/// contributes the part beyond its last point already covered.
pub fn subtree_arcs(tree: &MetricTree, piece: &[usize], p: usize) -> Result<Vec<SubArc>> {
    let n = tree.vertex_count();
    let mut inside = vec![false; n];
    for &v in piece {
        inside[v] = true;
    }
    if !inside[p] {
        return Err(Error::Decomposition(format!("vertex {p} is not in the subtree")));
    }
    let degree = |v: usize| tree.neighbors(v).iter().filter(|&&w| inside[w]).count();
    let mut leaves: Vec<usize> = piece.iter().copied().filter(|&v| degree(v) <= 1).collect();
    leaves.sort_unstable();
    leaves.dedup();
    if leaves.len() < 2 {
        return Err(Error::Decomposition("a subtree needs two leaves".into()));
    }
    let l0 = leaves[0];
    let mut covering: Vec<Vec<usize>> = leaves[1..].iter().map(|&l| tree.path(l0, l)).collect();
    for path in &covering {
        if let Some(&v) = path.iter().find(|&&v| !inside[v]) {
            return Err(Error::Decomposition(format!("vertex set is not connected at {v}")));
        }
    }
    let first = covering.iter().position(|c| c.contains(&p)).expect("covering arcs contain every vertex");
    let head = covering.remove(first);
    let cut = head.iter().position(|&v| v == p).unwrap();
    let mut out = Vec::new();
    if cut > 0 {
        out.push(SubArc { path: head[..=cut].to_vec(), branch: p });
    }
    if cut + 1 < head.len() {
        out.push(SubArc { path: head[cut..].to_vec(), branch: p });
    }
    let mut covered = vec![false; n];
    for &v in &head {
        covered[v] = true;
    }
    for path in covering {
        let t = path.iter().rposition(|&v| covered[v]).unwrap();
        if t + 1 == path.len() {
            continue;
        }
        for &v in &path[t..] {
            covered[v] = true;
        }
        out.push(SubArc { path: path[t..].to_vec(), branch: path[t] });
    }
    Ok(out)
}

/// `γ_{n,m}^j`: arc `m` of piece `j` (counted within level `n`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexedArc {
    pub n: u32,
    pub j: usize,
    pub m: usize,
    pub arc: SubArc,
}

#[derive(Clone, Debug)]
pub struct ArcDecomposition {
    pub debv: Debv,
    pub arcs: Vec<IndexedArc>,
    pub decomposition: PieceDecomposition,
    pub treelike: TreeLike,
    /// Constants of the DEBV pieces; `max(c2, c3)` is the measured `C_1`.
    pub debv_constants: GeometricConstants,
    /// Largest constant of the arcs inside a single piece.
    pub piece_constant: Rational,
    pub arc_constants: GeometricConstants,
}

impl ArcDecomposition {
    /// Product of the per-stage constants.
    pub fn predicted(&self) -> Rational {
        self.debv_constants.c() * &self.piece_constant
    }

    pub fn within_prediction(&self) -> bool {
        self.arc_constants.c() <= self.predicted()
    }
}

/// DEBV pieces split into arcs, indexed lexicographically by `(n, j, m)`,
/// validated and measured.
pub fn full_arc_decomposition(tree: &MetricTree, depth: Option<u32>) -> Result<ArcDecomposition> {
    let dv = debv(tree, depth)?;
    let ground = dv.covered().to_vec();
    let pieces = dv.decomposition()?;
    let debv_tl = validate_treelike_on(tree, &pieces, &ground)?;
    let debv_constants = geometric_constants_on(tree, &pieces, &debv_tl, &ground);
    let mut arcs = Vec::new();
    let mut piece_constant = Rational::from_integer(1.into());
    let mut level = 0;
    let mut j = 0;
    for piece in &dv.pieces {
        if piece.level != level {
            level = piece.level;
            j = 0;
        }
        j += 1;
        let split = subtree_arcs(tree, &piece.vertices, piece.attach)?;
        let local = PieceDecomposition::new(split.iter().map(|a| a.path.clone()).collect(), piece.attach)?;
        let local_tl = validate_treelike_on(tree, &local, &piece.vertices)?;
        let c = geometric_constants_on(tree, &local, &local_tl, &piece.vertices).c();
        if c > piece_constant {
            piece_constant = c;
        }
        for (m, arc) in split.into_iter().enumerate() {
            arcs.push(IndexedArc { n: piece.level, j, m: m + 1, arc });
        }
    }
    let decomposition = PieceDecomposition::new(arcs.iter().map(|a| a.arc.path.clone()).collect(), dv.basepoint())?;
    let treelike = validate_treelike_on(tree, &decomposition, &ground)?;
    let arc_constants = geometric_constants_on(tree, &decomposition, &treelike, &ground);
    Ok(ArcDecomposition { debv: dv, arcs, decomposition, treelike, debv_constants, piece_constant, arc_constants })
}

#[cfg(test)]
mod tests {
    use super::super::GluePlan;
    use super::*;

    fn star() -> MetricTree {
        MetricTree::build(&GluePlan::star(3, 2).unwrap()).unwrap()
    }

    #[test]
    fn arc_from_endpoint() {
        let t = MetricTree::build(&GluePlan::chain(1, 2).unwrap()).unwrap();
        let all: Vec<usize> = (0..t.vertex_count()).collect();
        let arcs = subtree_arcs(&t, &all, 0).unwrap();
        assert_eq!(arcs.len(), 1);
        assert_eq!(arcs[0].path.len(), t.vertex_count());
    }

    #[test]
    fn star_split_at_center() {
        let t = star();
        let all: Vec<usize> = (0..t.vertex_count()).collect();
        let arcs = subtree_arcs(&t, &all, t.vertex(0, 0)).unwrap();
        assert_eq!(arcs.len(), 3);
        assert!(arcs.iter().all(|a| a.branch == t.vertex(0, 0)));
    }

    #[test]
    fn star_split_at_leaf() {
        let t = star();
        let all: Vec<usize> = (0..t.vertex_count()).collect();
        let leaf = t.leaves()[0];
        let arcs = subtree_arcs(&t, &all, leaf).unwrap();
        assert_eq!(arcs.len(), 2);
        assert_eq!(arcs[0].path.len(), 9);
        assert_eq!(arcs[1].branch, t.vertex(0, 0));
    }

    #[test]
    fn star_full_decomposition() {
        let d = full_arc_decomposition(&star(), None).unwrap();
        assert!(d.arcs.len() <= 6);
        assert!(d.within_prediction());
    }
}
