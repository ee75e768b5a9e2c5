//! The chain metric `d_Δ` on the grid `V_K`.
//!
//! `d_Δ(x, y)` is the least total diameter of a chain of dyadic edges whose
//! consecutive members meet and whose union contains `x` and `y`. Chains
//! never need edges deeper than `K`, and after discarding nested members a
//! chain is a walk along shared endpoints. So the distance is a shortest
//! path in the graph on `V_K` with one edge `(min e, max e, Δ(e))` per
//! dyadic edge of generation `<= K`, entered from `x` and left towards `y`
//! through any edge containing the point (the point may be interior to the
//! first and last chain members).

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::dyadic::{DiameterTree, DyadicEdge};
use crate::error::{Error, Result};
use crate::function::SampledFunction;
use crate::numeric::{Dyadic, Rational, Scalar};

/// Largest resolution for which all pairwise distances are tabulated.
pub const MAX_ARC_RESOLUTION: u32 = 10;

/// Weighted graph on `V_K` with one edge per dyadic edge of generation `<= K`.
#[derive(Clone, Debug)]
pub struct ChainGraph {
    resolution: u32,
    adj: Vec<Vec<(usize, Dyadic)>>,
    // dyadic edges containing each grid point: (left, right, Δ)
    incident: Vec<Vec<(usize, usize, Dyadic)>>,
}

impl ChainGraph {
    pub fn new(tree: &DiameterTree, resolution: u32) -> Self {
        let n = (1usize << resolution) + 1;
        let mut adj = vec![Vec::new(); n];
        let mut incident = vec![Vec::new(); n];
        for e in DyadicEdge::up_to(resolution) {
            let (l, r) = e.grid_span(resolution);
            let w = tree.delta(&e);
            adj[l].push((r, w));
            adj[r].push((l, w));
            for p in incident.iter_mut().take(r + 1).skip(l) {
                p.push((l, r, w));
            }
        }
        ChainGraph { resolution, adj, incident }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Dyadic edges (as grid spans with diameters) containing grid point `i`.
    pub fn incident(&self, i: usize) -> &[(usize, usize, Dyadic)] {
        &self.incident[i]
    }

    /// Multi-source Dijkstra; each source carries an initial cost.
    pub fn shortest_from(&self, sources: &[(usize, Dyadic)]) -> Vec<Option<Dyadic>> {
        let mut best: Vec<Option<Dyadic>> = vec![None; self.adj.len()];
        let mut heap = BinaryHeap::new();
        for &(s, c) in sources {
            if best[s].is_none_or(|b| c < b) {
                best[s] = Some(c);
                heap.push(Reverse((c, s)));
            }
        }
        while let Some(Reverse((c, u))) = heap.pop() {
            if best[u].is_some_and(|b| b < c) {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nc = c + w;
                if best[v].is_none_or(|b| nc < b) {
                    best[v] = Some(nc);
                    heap.push(Reverse((nc, v)));
                }
            }
        }
        best
    }

    /// `d_Δ` between two grid points.
    pub fn chain_distance(&self, x: usize, y: usize) -> Dyadic {
        self.distances_from(x)[y]
    }

    /// `d_Δ(x, ·)` on all of `V_K`.
    pub fn distances_from(&self, x: usize) -> Vec<Dyadic> {
        let sources: Vec<(usize, Dyadic)> = self.incident[x].iter().flat_map(|&(l, r, w)| [(l, w), (r, w)]).collect();
        let reach = self.shortest_from(&sources);
        (0..self.adj.len())
            .map(|y| {
                if y == x {
                    return Dyadic::ZERO;
                }
                let mut best: Option<Dyadic> = None;
                for &(l, r, w) in &self.incident[y] {
                    if l <= x && x <= r {
                        best = Some(best.map_or(w, |b| b.min(w)));
                    }
                    for end in [l, r] {
                        if let Some(c) = reach[end] {
                            let c = c + w;
                            best = Some(best.map_or(c, |b| b.min(c)));
                        }
                    }
                }
                best.expect("chain graph is connected")
            })
            .collect()
    }
}

/// `[0, 1]` with the metric `d_Δ`, sampled on `V_K`.
#[derive(Clone, Debug)]
pub struct QuasiArc {
    tree: DiameterTree,
    resolution: u32,
    n: usize,
    dist: Vec<Dyadic>,
}

impl QuasiArc {
    /// Tabulate all distances on `V_K`; `K` must be at least the tree's
    /// resolution so that every step below `K` halves.
    pub fn new(tree: DiameterTree, resolution: u32) -> Result<Self> {
        if resolution < tree.resolution() || resolution > MAX_ARC_RESOLUTION {
            return Err(Error::Resolution { got: resolution, min: tree.resolution(), max: MAX_ARC_RESOLUTION });
        }
        let graph = ChainGraph::new(&tree, resolution);
        let n = graph.node_count();
        let mut dist = Vec::with_capacity(n * n);
        for x in 0..n {
            dist.extend(graph.distances_from(x));
        }
        Ok(QuasiArc { tree, resolution, n, dist })
    }

    /// Sampled at the tree's own resolution.
    pub fn from_tree(tree: DiameterTree) -> Result<Self> {
        let k = tree.resolution();
        QuasiArc::new(tree, k)
    }

    pub fn tree(&self) -> &DiameterTree {
        &self.tree
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn point(&self, i: usize) -> Dyadic {
        Dyadic::grid(i as u64, self.resolution)
    }

    pub fn point_index(&self, x: &Dyadic) -> Result<usize> {
        x.grid_index(self.resolution)
            .map(|j| j as usize)
            .ok_or_else(|| Error::OffGrid { point: format!("{x}"), resolution: self.resolution })
    }

    /// Distance between grid points given by index.
    pub fn d(&self, i: usize, j: usize) -> Dyadic {
        self.dist[i * self.n + j]
    }

    pub fn distance(&self, x: &Dyadic, y: &Dyadic) -> Result<Dyadic> {
        Ok(self.d(self.point_index(x)?, self.point_index(y)?))
    }

    /// `max d(a, b)` over grid points `u <= a, b <= v`.
    pub fn diameter(&self, u: usize, v: usize) -> Dyadic {
        let (u, v) = (u.min(v), u.max(v));
        let mut m = Dyadic::ZERO;
        for a in u..=v {
            for b in a..=v {
                m = m.max(self.d(a, b));
            }
        }
        m
    }

    /// Edges of generation `<= K` with `d(min e, max e) != Δ(e)`.
    pub fn edge_distance_mismatches(&self) -> Vec<DyadicEdge> {
        DyadicEdge::up_to(self.resolution)
            .filter(|e| {
                let (l, r) = e.grid_span(self.resolution);
                self.d(l, r) != self.tree.delta(e)
            })
            .collect()
    }

    /// `max diam([u, v]) / d(u, v)` over `u < v`; the metric is 1-bounded
    /// turning exactly when this is 1.
    pub fn bounded_turning_ratio(&self) -> Rational {
        let mut worst = Rational::from_integer(1.into());
        for u in 0..self.n {
            let mut diam = Dyadic::ZERO;
            for v in u + 1..self.n {
                for a in u..v {
                    diam = diam.max(self.d(a, v));
                }
                let duv = self.d(u, v);
                if diam > duv {
                    let r = diam.to_rational() / duv.to_rational();
                    if r > worst {
                        worst = r;
                    }
                }
            }
        }
        worst
    }

    /// First violated metric axiom, if any.
    pub fn metric_violation(&self) -> Option<String> {
        let n = self.n;
        for i in 0..n {
            if !self.d(i, i).is_zero() {
                return Some(format!("d(x, x) != 0 at {}", self.point(i)));
            }
            for j in 0..n {
                if i != j && !(self.d(i, j) > Dyadic::ZERO) {
                    return Some(format!("d({}, {}) is not positive", self.point(i), self.point(j)));
                }
                if self.d(i, j) != self.d(j, i) {
                    return Some(format!("asymmetric at {}, {}", self.point(i), self.point(j)));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let dij = self.d(i, j);
                for m in 0..n {
                    if self.d(i, m) + self.d(m, j) < dij {
                        return Some(format!(
                            "triangle inequality fails for {}, {}, {}",
                            self.point(i),
                            self.point(m),
                            self.point(j)
                        ));
                    }
                }
            }
        }
        None
    }

    fn check_function<S: Scalar>(&self, f: &SampledFunction<S>) -> Result<()> {
        if f.resolution() != self.resolution {
            return Err(Error::Length { expected: self.n, got: f.len() });
        }
        Ok(())
    }

    /// `max |f(x) - f(y)| / d(x, y)` over all pairs of grid points.
    pub fn lipschitz_norm<S: Scalar>(&self, f: &SampledFunction<S>) -> Result<S> {
        self.check_function(f)?;
        let v = f.values();
        let mut best = S::zero();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let r = (v[i].clone() - v[j].clone()).abs_val() / S::from_dyadic(&self.d(i, j));
                if r > best {
                    best = r;
                }
            }
        }
        Ok(best)
    }

    /// `max |f(max e) - f(min e)| / Δ(e)` over dyadic edges of generation `<= K`.
    pub fn lipschitz_dyadic_local<S: Scalar>(&self, f: &SampledFunction<S>) -> Result<S> {
        self.check_function(f)?;
        let v = f.values();
        let mut best = S::zero();
        for e in DyadicEdge::up_to(self.resolution) {
            let (l, r) = e.grid_span(self.resolution);
            let q = (v[r].clone() - v[l].clone()).abs_val() / S::from_dyadic(&self.tree.delta(&e));
            if q > best {
                best = q;
            }
        }
        Ok(best)
    }
}
