//! Decomposition of a tree by nested nets of its leaves.
//!
//! Level `n` uses a greedy net of the leaves at scale `2^(1-n) diam(T)`,
//! extending the previous net (level 1 starts from a diametral pair). `T_n`
//! is the subtree spanned by the net, and the pieces of level `n` are the
//! components of the closure of `T_n \ T_(n-1)`, computed on sampled
//! segments with shared endpoints kept. Each meets `T_(n-1)` in one point.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{MetricTree, PieceDecomposition};
use crate::error::{Error, Result};
use crate::numeric::Rational;
use crate::union_find::DisjointSet;

const MAX_LEVELS: u32 = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct DebvPiece {
    pub level: u32,
    pub vertices: Vec<usize>,
    /// Where the piece meets `T_(level-1)`; the basepoint for level 1.
    pub attach: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DebvLevel {
    pub n: u32,
    pub radius: Rational,
    pub net: Vec<usize>,
    /// Vertices of `T_n`.
    pub subtree: Vec<usize>,
    pub pieces: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Debv {
    pub levels: Vec<DebvLevel>,
    pub pieces: Vec<DebvPiece>,
    /// Every leaf is in the last net, so the pieces cover the tree.
    pub complete: bool,
    pub warnings: Vec<String>,
}

impl Debv {
    pub fn basepoint(&self) -> usize {
        self.levels[0].net[0]
    }

    pub fn decomposition(&self) -> Result<PieceDecomposition> {
        PieceDecomposition::new(self.pieces.iter().map(|p| p.vertices.clone()).collect(), self.basepoint())
    }

    /// Vertices covered by the pieces.
    pub fn covered(&self) -> &[usize] {
        &self.levels.last().unwrap().subtree
    }
}

/// Build `depth` levels, or as many as needed to reach every leaf.
pub fn debv(tree: &MetricTree, depth: Option<u32>) -> Result<Debv> {
    let leaves = tree.leaves();
    if leaves.len() < 2 {
        return Err(Error::Decomposition("the tree needs at least two leaves".into()));
    }
    let diam = tree.diameter();
    let (mut a, mut b) = (leaves[0], leaves[1]);
    for (i, &x) in leaves.iter().enumerate() {
        for &y in &leaves[i + 1..] {
            if tree.d(x, y) > tree.d(a, b) {
                (a, b) = (x, y);
            }
        }
    }
    let n = tree.vertex_count();
    let mut net: Vec<usize> = vec![a, b];
    let mut in_net = vec![false; n];
    in_net[a] = true;
    in_net[b] = true;
    let mut prev_edges = vec![false; n];
    let mut prev_vertices = vec![false; n];
    let mut levels = Vec::new();
    let mut pieces = Vec::new();
    let limit = depth.unwrap_or(MAX_LEVELS);
    let mut level = 1u32;
    while level <= limit {
        let radius = &diam / Rational::from_integer((1i64 << (level - 1).min(62)).into());
        for &l in &leaves {
            if !in_net[l] && net.iter().all(|&m| *tree.d(l, m) > radius) {
                in_net[l] = true;
                net.push(l);
            }
        }
        let (edges, vertices) = span(tree, &net);
        let mut ds = DisjointSet::new(n);
        let mut touched = vec![false; n];
        for v in 0..n {
            if edges[v] && !prev_edges[v] {
                let p = tree.parent(v).unwrap();
                ds.union(v, p);
                touched[v] = true;
                touched[p] = true;
            }
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for (v, &t) in touched.iter().enumerate() {
            if t {
                let r = ds.find(v);
                match groups.iter_mut().find(|(root, _)| *root == r) {
                    Some((_, g)) => g.push(v),
                    None => groups.push((r, vec![v])),
                }
            }
        }
        let count = groups.len();
        for (_, g) in groups {
            let attach = if level == 1 {
                a
            } else {
                let shared: Vec<usize> = g.iter().copied().filter(|&v| prev_vertices[v]).collect();
                if shared.len() != 1 {
                    return Err(Error::Decomposition(format!(
                        "level {level} component meets the previous subtree in {} points",
                        shared.len()
                    )));
                }
                shared[0]
            };
            pieces.push(DebvPiece { level, vertices: g, attach });
        }
        let subtree: Vec<usize> = (0..n).filter(|&v| vertices[v]).collect();
        levels.push(DebvLevel { n: level, radius, net: net.clone(), subtree, pieces: count });
        prev_edges = edges;
        prev_vertices = vertices;
        let done = leaves.iter().all(|&l| in_net[l]);
        if done && depth.is_none() {
            break;
        }
        level += 1;
    }
    let complete = leaves.iter().all(|&l| in_net[l]);
    let mut warnings = Vec::new();
    if !complete {
        let missing = leaves.iter().filter(|&&l| !in_net[l]).count();
        warnings
            .push(format!("{missing} leaves are not in the level-{} net; pieces cover a proper subtree", levels.len()));
    }
    Ok(Debv { levels, pieces, complete, warnings })
}

/// Edges (keyed by child vertex) and vertices of the subtree spanned by `net`.
fn span(tree: &MetricTree, net: &[usize]) -> (Vec<bool>, Vec<bool>) {
    let n = tree.vertex_count();
    let mut edges = vec![false; n];
    let mut vertices = vec![false; n];
    vertices[net[0]] = true;
    for &x in &net[1..] {
        let path = tree.path(net[0], x);
        for w in path.windows(2) {
            vertices[w[0]] = true;
            vertices[w[1]] = true;
            let child = if tree.parent(w[0]) == Some(w[1]) { w[0] } else { w[1] };
            edges[child] = true;
        }
    }
    (edges, vertices)
}

#[cfg(test)]
mod tests {
    use super::super::{validate_treelike, GluePlan};
    use super::*;

    #[test]
    fn single_arc_is_one_piece() {
        let t = MetricTree::build(&GluePlan::chain(1, 3).unwrap()).unwrap();
        let d = debv(&t, None).unwrap();
        assert!(d.complete);
        assert_eq!(d.pieces.len(), 1);
        assert_eq!(d.pieces[0].vertices.len(), t.vertex_count());
    }

    #[test]
    fn star_third_arm_enters_later() {
        let t = MetricTree::build(&GluePlan::star(3, 2).unwrap()).unwrap();
        let d = debv(&t, None).unwrap();
        assert!(d.complete);
        assert_eq!(d.pieces.len(), 2);
        assert_eq!(d.pieces[0].level, 1);
        assert_eq!(d.pieces[1].level, 2);
        assert_eq!(d.pieces[1].attach, t.vertex(0, 0));
        let decomp = d.decomposition().unwrap();
        validate_treelike(&t, &decomp).unwrap();
    }

    #[test]
    fn shallow_depth_warns() {
        let t = MetricTree::build(&GluePlan::star(3, 2).unwrap()).unwrap();
        let d = debv(&t, Some(1)).unwrap();
        assert!(!d.complete);
        assert_eq!(d.warnings.len(), 1);
    }
}
