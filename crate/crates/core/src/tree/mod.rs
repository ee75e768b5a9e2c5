//! Quasiconformal trees glued from quasiarcs, and their decompositions.
//!
//! A [`MetricTree`] is a finite tree of arcs: arc `i >= 1` has its
//! coordinate `0` attached to a grid point of an earlier arc. Vertices are
//! the sampled grid points; the distance is the sum of the (scaled) arc
//! distances along the unique path, so the result is 1-bounded turning.

mod arcs;
mod chain;
mod debv;
mod decomposition;

pub use arcs::{full_arc_decomposition, subtree_arcs, ArcDecomposition, IndexedArc, SubArc};
pub use chain::{chain_lift, ChainLift};
pub use debv::{debv, Debv, DebvLevel, DebvPiece};
pub use decomposition::{
    classify_loop, decomposition_path, find_nontrivial_loop, geometric_constants, geometric_constants_on, is_minimal,
    validate_treelike, validate_treelike_on, DecompositionLoop, DecompositionPath, GeometricConstants, LoopKind,
    PieceDecomposition, TreeLike,
};

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arc::QuasiArc;
use crate::dyadic::{DiameterTree, GeneratorKind};
use crate::error::{Error, Result};
use crate::numeric::{rational_to_f64, Dyadic, Rational};

/// One arc of a glue plan.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcSpec {
    pub tree: DiameterTree,
    pub scale: Rational,
}

/// Coordinate `0` of `arc` is identified with the point `at` of `host`.
#[derive(Clone, Debug, PartialEq)]
pub struct Attachment {
    pub arc: usize,
    pub host: usize,
    pub at: Dyadic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GluePlan {
    pub arcs: Vec<ArcSpec>,
    pub attach: Vec<Attachment>,
}

impl GluePlan {
    /// A single arc.
    pub fn single(tree: DiameterTree) -> Self {
        GluePlan { arcs: vec![ArcSpec { tree, scale: Rational::one() }], attach: Vec::new() }
    }

    /// `arms` unit Euclidean arcs sharing the endpoint `0`.
    pub fn star(arms: usize, resolution: u32) -> Result<Self> {
        let tree = DiameterTree::generate(GeneratorKind::EuclideanRaw, resolution)?;
        let arcs = (0..arms.max(1)).map(|_| ArcSpec { tree: tree.clone(), scale: Rational::one() }).collect();
        let attach = (1..arms).map(|i| Attachment { arc: i, host: 0, at: Dyadic::ZERO }).collect();
        Ok(GluePlan { arcs, attach })
    }

    /// `len` unit Euclidean arcs joined end to end.
    pub fn chain(len: usize, resolution: u32) -> Result<Self> {
        let tree = DiameterTree::generate(GeneratorKind::EuclideanRaw, resolution)?;
        let arcs = (0..len.max(1)).map(|_| ArcSpec { tree: tree.clone(), scale: Rational::one() }).collect();
        let attach = (1..len).map(|i| Attachment { arc: i, host: i - 1, at: Dyadic::ONE }).collect();
        Ok(GluePlan { arcs, attach })
    }

    /// Random quasiarcs with random scales, each attached at a random grid
    /// point of a random earlier arc.
    pub fn random(seed: u64, arcs: usize, resolution: u32) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scales = [(1, 1), (1, 2), (3, 4), (1, 4), (3, 2)];
        let mut specs = Vec::with_capacity(arcs);
        let mut attach = Vec::new();
        for i in 0..arcs.max(1) {
            let kind = if rng.gen_bool(0.2) {
                GeneratorKind::Euclidean
            } else {
                GeneratorKind::Random { seed: rng.gen(), p_halve: rng.gen_range(0.3..0.9) }
            };
            let (p, q) = scales[rng.gen_range(0..scales.len())];
            specs.push(ArcSpec {
                tree: DiameterTree::generate(kind, resolution)?,
                scale: Rational::new(p.into(), q.into()),
            });
            if i > 0 {
                let host = rng.gen_range(0..i);
                let j = rng.gen_range(0..=(1u64 << resolution));
                attach.push(Attachment { arc: i, host, at: Dyadic::grid(j, resolution) });
            }
        }
        Ok(GluePlan { arcs: specs, attach })
    }
}

#[derive(Clone, Debug)]
pub struct MetricTree {
    arcs: Vec<QuasiArc>,
    scales: Vec<Rational>,
    // host arc and host grid index of each arc's coordinate 0
    hosts: Vec<Option<(usize, usize)>>,
    arc_depth: Vec<usize>,
    vertex_of: Vec<Vec<usize>>,
    coord: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    n: usize,
    dist: Vec<Rational>,
    dist_f64: Vec<f64>,
}

impl MetricTree {
    pub fn build(plan: &GluePlan) -> Result<Self> {
        let m = plan.arcs.len();
        if m == 0 {
            return Err(Error::Plan("no arcs".into()));
        }
        let mut hosts: Vec<Option<(usize, usize)>> = vec![None; m];
        let mut arcs = Vec::with_capacity(m);
        let mut scales = Vec::with_capacity(m);
        for (i, spec) in plan.arcs.iter().enumerate() {
            if spec.scale <= Rational::zero() {
                return Err(Error::Plan(format!("arc {i} has non-positive scale")));
            }
            arcs.push(QuasiArc::from_tree(spec.tree.clone())?);
            scales.push(spec.scale.clone());
        }
        for a in &plan.attach {
            if a.arc == 0 || a.arc >= m {
                return Err(Error::Plan(format!("arc {} cannot be attached", a.arc)));
            }
            if a.host >= a.arc {
                return Err(Error::Plan(format!("arc {} must attach to an earlier arc, not {}", a.arc, a.host)));
            }
            if hosts[a.arc].is_some() {
                return Err(Error::Plan(format!("arc {} attached twice", a.arc)));
            }
            let idx = arcs[a.host]
                .point_index(&a.at)
                .map_err(|_| Error::Plan(format!("attachment point {} is not on the grid of arc {}", a.at, a.host)))?;
            hosts[a.arc] = Some((a.host, idx));
        }
        if let Some(i) = (1..m).find(|&i| hosts[i].is_none()) {
            return Err(Error::Plan(format!("arc {i} is not attached")));
        }
        let mut arc_depth = vec![0usize; m];
        for i in 1..m {
            arc_depth[i] = arc_depth[hosts[i].unwrap().0] + 1;
        }
        let mut vertex_of: Vec<Vec<usize>> = Vec::with_capacity(m);
        let mut coord = Vec::new();
        let mut neighbors: Vec<Vec<usize>> = Vec::new();
        for (i, arc) in arcs.iter().enumerate() {
            let mut ids = Vec::with_capacity(arc.point_count());
            for p in 0..arc.point_count() {
                let id = match (p, hosts[i]) {
                    (0, Some((h, at))) => vertex_of[h][at],
                    _ => {
                        coord.push((i, p));
                        neighbors.push(Vec::new());
                        coord.len() - 1
                    }
                };
                ids.push(id);
            }
            for w in ids.windows(2) {
                neighbors[w[0]].push(w[1]);
                neighbors[w[1]].push(w[0]);
            }
            vertex_of.push(ids);
        }
        let n = coord.len();
        let mut parent = vec![None; n];
        let mut depth = vec![0usize; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut t = MetricTree {
            arcs,
            scales,
            hosts,
            arc_depth,
            vertex_of,
            coord,
            neighbors,
            parent,
            depth,
            n,
            dist: Vec::new(),
            dist_f64: Vec::new(),
        };
        let mut dist: Vec<Rational> = Vec::with_capacity(n * n);
        for u in 0..n {
            for v in 0..n {
                dist.push(if v < u { dist[v * n + u].clone() } else { t.glued_distance(t.coord[u], t.coord[v]) });
            }
        }
        t.dist_f64 = dist.iter().map(rational_to_f64).collect();
        t.dist = dist;
        Ok(t)
    }

    fn glued_distance(&self, (mut a, mut s): (usize, usize), (mut b, mut t): (usize, usize)) -> Rational {
        let mut total = Rational::zero();
        while a != b {
            if self.arc_depth[a] >= self.arc_depth[b] {
                total += &self.scales[a] * self.arcs[a].d(s, 0).to_rational();
                (a, s) = self.hosts[a].unwrap();
            } else {
                total += &self.scales[b] * self.arcs[b].d(t, 0).to_rational();
                (b, t) = self.hosts[b].unwrap();
            }
        }
        total + &self.scales[a] * self.arcs[a].d(s, t).to_rational()
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc(&self, i: usize) -> &QuasiArc {
        &self.arcs[i]
    }

    pub fn scale(&self, i: usize) -> &Rational {
        &self.scales[i]
    }

    /// Vertex at grid index `p` of arc `i`.
    pub fn vertex(&self, i: usize, p: usize) -> usize {
        self.vertex_of[i][p]
    }

    /// Vertices of arc `i` in coordinate order.
    pub fn arc_vertices(&self, i: usize) -> &[usize] {
        &self.vertex_of[i]
    }

    /// Arc and grid index where a vertex was created.
    pub fn coordinate(&self, v: usize) -> (usize, usize) {
        self.coord[v]
    }

    pub fn d(&self, u: usize, v: usize) -> &Rational {
        &self.dist[u * self.n + v]
    }

    pub fn d_f64(&self, u: usize, v: usize) -> f64 {
        self.dist_f64[u * self.n + v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Parent in the combinatorial tree rooted at vertex 0.
    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.neighbors[v].len() <= 1).collect()
    }

    pub fn diameter(&self) -> Rational {
        self.dist.iter().fold(Rational::zero(), |m, d| if *d > m { d.clone() } else { m })
    }

    /// Vertices along the unique path from `u` to `v`, inclusive.
    pub fn path(&self, u: usize, v: usize) -> Vec<usize> {
        let (mut a, mut b) = (u, v);
        let mut head = Vec::new();
        let mut tail = Vec::new();
        while self.depth[a] > self.depth[b] {
            head.push(a);
            a = self.parent[a].unwrap();
        }
        while self.depth[b] > self.depth[a] {
            tail.push(b);
            b = self.parent[b].unwrap();
        }
        while a != b {
            head.push(a);
            tail.push(b);
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        head.push(a);
        head.extend(tail.into_iter().rev());
        head
    }

    /// The decomposition into the glued arcs, based at vertex 0.
    pub fn arc_decomposition(&self) -> PieceDecomposition {
        let pieces = self.vertex_of.clone();
        PieceDecomposition::new(pieces, 0).expect("arcs form a decomposition")
    }

    /// `max |f(u) - f(v)| / d(u, v)` over vertex pairs in `set` (all
    /// vertices if `None`).
    pub fn lipschitz_on(&self, f: &[Rational], set: Option<&[usize]>) -> Rational {
        let all: Vec<usize>;
        let vs = match set {
            Some(s) => s,
            None => {
                all = (0..self.n).collect();
                &all
            }
        };
        let mut best = Rational::zero();
        for (i, &u) in vs.iter().enumerate() {
            for &v in &vs[i + 1..] {
                let diff = &f[u] - &f[v];
                let diff = if diff < Rational::zero() { -diff } else { diff };
                let r = diff / self.d(u, v);
                if r > best {
                    best = r;
                }
            }
        }
        best
    }

    /// `max diam(path(u, v)) / d(u, v)` over vertex pairs, where the
    /// diameter of a path is taken over its vertices.
    pub fn bounded_turning_ratio(&self) -> Rational {
        let mut worst = Rational::one();
        for u in 0..self.n {
            // depth-first from u, carrying the current path and its diameter
            let mut path: Vec<usize> = vec![u];
            let mut diam: Vec<Rational> = vec![Rational::zero()];
            let mut stack: Vec<(usize, usize)> = self.neighbors[u].iter().map(|&v| (v, 1)).collect();
            while let Some((v, len)) = stack.pop() {
                path.truncate(len);
                diam.truncate(len);
                let mut m = diam[len - 1].clone();
                for &a in &path {
                    if *self.d(a, v) > m {
                        m = self.d(a, v).clone();
                    }
                }
                if m > *self.d(u, v) {
                    let r = &m / self.d(u, v);
                    if r > worst {
                        worst = r;
                    }
                }
                let prev = path[len - 1];
                path.push(v);
                diam.push(m);
                stack.extend(self.neighbors[v].iter().filter(|&&w| w != prev).map(|&w| (w, len + 1)));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_distances() {
        let t = MetricTree::build(&GluePlan::star(3, 2).unwrap()).unwrap();
        let leaves = t.leaves();
        assert_eq!(leaves.len(), 3);
        for (i, &a) in leaves.iter().enumerate() {
            for &b in &leaves[i + 1..] {
                assert_eq!(*t.d(a, b), Rational::from_integer(2.into()));
            }
        }
        assert_eq!(t.vertex_count(), 13);
        assert_eq!(t.bounded_turning_ratio(), Rational::one());
    }

    #[test]
    fn chain_paths() {
        let t = MetricTree::build(&GluePlan::chain(3, 1).unwrap()).unwrap();
        let (a, b) = (t.vertex(0, 0), t.vertex(2, 2));
        assert_eq!(*t.d(a, b), Rational::from_integer(3.into()));
        assert_eq!(t.path(a, b).len(), 7);
    }

    #[test]
    fn plan_errors() {
        let mut plan = GluePlan::chain(2, 1).unwrap();
        plan.attach[0].at = "1/4".parse().unwrap();
        assert!(matches!(MetricTree::build(&plan), Err(Error::Plan(_))));
        plan.attach.clear();
        assert!(matches!(MetricTree::build(&plan), Err(Error::Plan(_))));
    }
}
