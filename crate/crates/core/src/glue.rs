//! Gluing functions defined on the pieces of a tree-like decomposition:
//! Lipschitz functions (`Φ`, `Ψ`), Lipschitz light maps, and bi-Lipschitz
//! embeddings into `ℓ^p`-sums.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::float::FloatCore;
use num_traits::Float;

use crate::arc::QuasiArc;
use crate::error::{Error, Result};
use crate::numeric::{rational_to_f64, Rational, Scalar, FLOAT_TOLERANCE};
use crate::tree::{geometric_constants, GeometricConstants, MetricTree, PieceDecomposition, TreeLike};
use crate::union_find::DisjointSet;

/// Functions `f_n` on the pieces, aligned with each piece's vertex list.
#[derive(Clone, Debug, PartialEq)]
pub struct PieceFamily<S> {
    pub values: Vec<Vec<S>>,
}

/// `Φ(f)_n = f|X_n - f(p_n)`.
pub fn phi<S: Scalar>(decomp: &PieceDecomposition, tl: &TreeLike, f: &[S]) -> Result<PieceFamily<S>> {
    if !f[decomp.basepoint()].is_zero_val() {
        return Err(Error::NonzeroAtBase);
    }
    let values = decomp
        .pieces()
        .iter()
        .enumerate()
        .map(|(n, piece)| {
            let base = f[tl.branch_points[n]].clone();
            piece.iter().map(|&v| f[v].clone() - base.clone()).collect()
        })
        .collect();
    Ok(PieceFamily { values })
}

/// Glue in index order: `g = g(p_m) + f_m` on `X_m`.
pub fn psi<S: Scalar>(
    tree: &MetricTree,
    decomp: &PieceDecomposition,
    tl: &TreeLike,
    family: &PieceFamily<S>,
) -> Result<Vec<S>> {
    if family.values.len() != decomp.len() {
        return Err(Error::Length { expected: decomp.len(), got: family.values.len() });
    }
    let mut g: Vec<Option<S>> = vec![None; tree.vertex_count()];
    for (m, piece) in decomp.pieces().iter().enumerate() {
        let fm = &family.values[m];
        if fm.len() != piece.len() {
            return Err(Error::Length { expected: piece.len(), got: fm.len() });
        }
        let p = tl.branch_points[m];
        let at = piece.binary_search(&p).expect("branch point lies in its piece");
        if !fm[at].is_zero_val() {
            return Err(Error::Domain(format!("f_{m} does not vanish at its branch point {p}")));
        }
        let offset = if m == 0 { S::zero() } else { g[p].clone().expect("branch point glued earlier") };
        for (&v, val) in piece.iter().zip(fm) {
            if g[v].is_none() {
                g[v] = Some(offset.clone() + val.clone());
            }
        }
    }
    Ok(g.into_iter().map(|v| v.unwrap_or_else(S::zero)).collect())
}

/// Exact Lipschitz norm of each family member on its piece.
pub fn family_norms(tree: &MetricTree, decomp: &PieceDecomposition, family: &PieceFamily<Rational>) -> Vec<Rational> {
    decomp
        .pieces()
        .iter()
        .zip(&family.values)
        .map(|(piece, vals)| {
            let mut f = vec![Rational::from_integer(0.into()); tree.vertex_count()];
            for (&v, x) in piece.iter().zip(vals) {
                f[v] = x.clone();
            }
            tree.lipschitz_on(&f, Some(piece))
        })
        .collect()
}

/// Outcome of gluing an exact family with `Ψ`.
#[derive(Clone, Debug)]
pub struct PsiReport {
    pub glued: Vec<Rational>,
    pub family_sup: Rational,
    pub glued_norm: Rational,
    pub constants: GeometricConstants,
}

impl PsiReport {
    /// `‖Ψ(f)‖ <= C₃ sup_n ‖f_n‖`.
    pub fn within_bound(&self) -> bool {
        self.glued_norm <= &self.constants.c3 * &self.family_sup
    }
}

pub fn psi_report(
    tree: &MetricTree,
    decomp: &PieceDecomposition,
    tl: &TreeLike,
    family: &PieceFamily<Rational>,
) -> Result<PsiReport> {
    let glued = psi(tree, decomp, tl, family)?;
    let family_sup = family_norms(tree, decomp, family).into_iter().fold(Rational::from_integer(0.into()), |m, x| {
        if x > m {
            x
        } else {
            m
        }
    });
    let glued_norm = tree.lipschitz_on(&glued, None);
    let constants = geometric_constants(tree, decomp, tl);
    Ok(PsiReport { glued, family_sup, glued_norm, constants })
}

/// A finite metric space with float distances, for the lightness estimator.
pub trait FiniteMetric {
    fn len(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> f64;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl FiniteMetric for MetricTree {
    fn len(&self) -> usize {
        self.vertex_count()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.d_f64(i, j)
    }
}

impl FiniteMetric for QuasiArc {
    fn len(&self) -> usize {
        self.point_count()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.d(i, j).to_f64()
    }
}

/// The vertices of a tree listed in `vertices`, with the induced metric.
pub struct Subspace<'a> {
    pub tree: &'a MetricTree,
    pub vertices: &'a [usize],
}

impl FiniteMetric for Subspace<'_> {
    fn len(&self) -> usize {
        self.vertices.len()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.tree.d_f64(self.vertices[i], self.vertices[j])
    }
}

/// `n` equally spaced points on a circle of length `circumference`, with
/// the arc-length metric.
pub struct SampledCircle {
    pub n: usize,
    pub circumference: f64,
}

impl FiniteMetric for SampledCircle {
    fn len(&self) -> usize {
        self.n
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        let k = i.abs_diff(j);
        let k = k.min(self.n - k);
        self.circumference * k as f64 / self.n as f64
    }
}

/// Points in the plane with the Euclidean metric.
pub struct PlanarPoints {
    pub points: Vec<(f64, f64)>,
}

impl PlanarPoints {
    /// A segment of length `radius` from the origin followed by a circular
    /// arc of the same radius about the origin and angle `angle`, `n`
    /// samples on each. The distance to the origin is constant on the arc.
    pub fn plateau(radius: f64, angle: f64, n: usize) -> Self {
        let mut points: Vec<(f64, f64)> = (0..=n).map(|i| (radius * i as f64 / n as f64, 0.0)).collect();
        for i in 1..=n {
            let t = angle * i as f64 / n as f64;
            points.push((radius * Float::cos(t), radius * Float::sin(t)));
        }
        PlanarPoints { points }
    }
}

impl FiniteMetric for PlanarPoints {
    fn len(&self) -> usize {
        self.points.len()
    }
    fn dist(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.points[i], self.points[j]);
        Float::hypot(a.0 - b.0, a.1 - b.1)
    }
}

/// Largest distance between consecutive samples along an index path.
pub fn mesh<M: FiniteMetric + ?Sized>(space: &M) -> f64 {
    (1..space.len()).map(|i| space.dist(i - 1, i)).fold(0.0, f64::max)
}

/// Largest edge of a tree.
pub fn tree_mesh(tree: &MetricTree) -> f64 {
    (0..tree.vertex_count()).filter_map(|v| tree.parent(v).map(|p| tree.d_f64(v, p))).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LightnessRow {
    pub r: f64,
    pub windows: usize,
    pub max_diameter: f64,
    pub ratio: f64,
    /// `2 mesh / r`.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LightnessReport {
    pub rows: Vec<LightnessRow>,
    /// `max_r max diam / r`.
    pub q_hat: f64,
    pub slack: f64,
}

/// For each `r` and each window `E = [a, a + r]` with `a` stepping by
/// `r/2` over the range of `f`, the largest diameter of an `r`-component
/// of `f^-1(E)`, divided by `r`.
pub fn lightness_estimate<M: FiniteMetric + ?Sized>(
    space: &M,
    f: &[f64],
    r_grid: &[f64],
    mesh: f64,
) -> Result<LightnessReport> {
    if r_grid.is_empty() {
        return Err(Error::Domain("empty radius grid".into()));
    }
    if f.len() != space.len() {
        return Err(Error::Length { expected: space.len(), got: f.len() });
    }
    if let Some(r) = r_grid.iter().find(|r| r.is_nan() || **r <= 0.0) {
        return Err(Error::Domain(format!("radius {r} is not positive")));
    }
    let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut rows = Vec::new();
    for &r in r_grid {
        let tol = r * FLOAT_TOLERANCE;
        let mut max_diameter: f64 = 0.0;
        let mut windows = 0;
        let mut a = lo;
        loop {
            windows += 1;
            let pre: Vec<usize> = (0..f.len()).filter(|&i| f[i] >= a - tol && f[i] <= a + r + tol).collect();
            max_diameter = max_diameter.max(largest_component(space, &pre, r + tol));
            if a + r >= hi {
                break;
            }
            a += r / 2.0;
        }
        rows.push(LightnessRow { r, windows, max_diameter, ratio: max_diameter / r, slack: 2.0 * mesh / r });
    }
    let q_hat = rows.iter().map(|row| row.ratio).fold(0.0, f64::max);
    let slack = rows.iter().map(|row| row.slack).fold(0.0, f64::max);
    Ok(LightnessReport { rows, q_hat, slack })
}

fn largest_component<M: FiniteMetric + ?Sized>(space: &M, pts: &[usize], r: f64) -> f64 {
    let m = pts.len();
    let mut ds = DisjointSet::new(m);
    for i in 0..m {
        for j in i + 1..m {
            if space.dist(pts[i], pts[j]) <= r {
                ds.union(i, j);
            }
        }
    }
    let roots: Vec<usize> = (0..m).map(|i| ds.find(i)).collect();
    let mut best: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            if roots[i] == roots[j] {
                best = best.max(space.dist(pts[i], pts[j]));
            }
        }
    }
    best
}

/// `d(p, ·)`.
pub fn basepoint_coordinate<M: FiniteMetric + ?Sized>(space: &M, p: usize) -> Vec<f64> {
    (0..space.len()).map(|i| space.dist(p, i)).collect()
}

/// `t ↦ min(t mod c, c - t mod c)`: wrap onto a circle of length `c`,
/// then take the distance to the point `0` of the circle.
pub fn circle_fold(values: &[f64], c: f64) -> Vec<f64> {
    values
        .iter()
        .map(|&t| {
            let s = t - c * FloatCore::floor(t / c);
            s.min(c - s)
        })
        .collect()
}

/// Per-piece measurements and the glued map's lightness.
#[derive(Clone, Debug)]
pub struct GlueLightReport {
    pub glued: Vec<f64>,
    /// `(L_n, Q_n)`, each at least 1.
    pub per_piece: Vec<(f64, f64)>,
    pub l: f64,
    pub q: f64,
    pub c: f64,
    /// `C Q (1 + 2 L C²)`.
    pub q_prime: f64,
    pub measured: LightnessReport,
    pub lipschitz: f64,
}

impl GlueLightReport {
    pub fn passes(&self) -> bool {
        self.measured.q_hat <= self.q_prime + self.measured.slack
    }
}

pub fn predicted_lightness(c: f64, l: f64, q: f64) -> f64 {
    c * q * (1.0 + 2.0 * l * c * c)
}

/// Glue per-piece maps with `Ψ` and compare the measured lightness of the
/// result with the bound predicted from the measured per-piece `(L, Q)`.
pub fn glue_light(
    tree: &MetricTree,
    decomp: &PieceDecomposition,
    tl: &TreeLike,
    family: &PieceFamily<f64>,
    r_grid: &[f64],
) -> Result<GlueLightReport> {
    let constants = geometric_constants(tree, decomp, tl);
    let c = rational_to_f64(&constants.c());
    let mesh = tree_mesh(tree);
    let mut per_piece = Vec::new();
    for (piece, vals) in decomp.pieces().iter().zip(&family.values) {
        let sub = Subspace { tree, vertices: piece };
        let lip = lipschitz_f64(&sub, vals).max(1.0);
        let q = lightness_estimate(&sub, vals, r_grid, mesh)?.q_hat.max(1.0);
        per_piece.push((lip, q));
    }
    let l = per_piece.iter().map(|p| p.0).fold(1.0, f64::max);
    let q = per_piece.iter().map(|p| p.1).fold(1.0, f64::max);
    let glued = psi(tree, decomp, tl, family)?;
    let measured = lightness_estimate(tree, &glued, r_grid, mesh)?;
    let lipschitz = lipschitz_f64(tree, &glued);
    Ok(GlueLightReport { glued, per_piece, l, q, c, q_prime: predicted_lightness(c, l, q), measured, lipschitz })
}

pub fn lipschitz_f64<M: FiniteMetric + ?Sized>(space: &M, f: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            let d = space.dist(i, j);
            if d > 0.0 {
                best = best.max(FloatCore::abs(f[i] - f[j]) / d);
            }
        }
    }
    best
}

/// Glued embedding into `(⊕_n ℓ^∞(X_n))_p`.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub p: f64,
    /// Offset of each piece's block in a coordinate vector.
    pub block_start: Vec<usize>,
    pub coords: Vec<Vec<f64>>,
    pub lipschitz: f64,
    pub co_lipschitz: f64,
    pub distortion: f64,
    pub constants: GeometricConstants,
}

impl Embedding {
    pub fn c(&self) -> f64 {
        rational_to_f64(&self.constants.c())
    }

    /// Both `Lip` and `coLip` at most `C`, up to float tolerance.
    pub fn within_bound(&self) -> bool {
        let c = self.c() * (1.0 + 1e-12);
        self.lipschitz <= c && self.co_lipschitz <= c
    }

    pub fn norm(&self, u: usize, v: usize) -> f64 {
        let mut total: f64 = 0.0;
        for n in 0..self.block_start.len() {
            let end = self.block_start.get(n + 1).copied().unwrap_or(self.coords[u].len());
            let block = (self.block_start[n]..end)
                .map(|i| FloatCore::abs(self.coords[u][i] - self.coords[v][i]))
                .fold(0.0, f64::max);
            total += Float::powf(block, self.p);
        }
        Float::powf(total, 1.0 / self.p)
    }
}

/// Each piece embeds isometrically into `ℓ^∞(X_n)` by
/// `x ↦ (d(x, y) - d(p_n, y))_y`; the blocks are glued by
/// `φ(x) = φ(p_m) + ι_m φ_m(x)` on `X_m`.
pub fn l1_embedding(tree: &MetricTree, decomp: &PieceDecomposition, tl: &TreeLike, p: f64) -> Result<Embedding> {
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(Error::Domain(format!("p = {p} is outside [1, ∞)")));
    }
    let mut block_start = Vec::with_capacity(decomp.len());
    let mut dim = 0;
    for piece in decomp.pieces() {
        block_start.push(dim);
        dim += piece.len();
    }
    let n = tree.vertex_count();
    let mut coords: Vec<Option<Vec<f64>>> = vec![None; n];
    for (m, piece) in decomp.pieces().iter().enumerate() {
        let pm = tl.branch_points[m];
        let base = if m == 0 { vec![0.0; dim] } else { coords[pm].clone().expect("branch point embedded earlier") };
        for &x in piece {
            if coords[x].is_some() {
                continue;
            }
            let mut c = base.clone();
            for (k, &y) in piece.iter().enumerate() {
                c[block_start[m] + k] += tree.d_f64(x, y) - tree.d_f64(pm, y);
            }
            coords[x] = Some(c);
        }
    }
    let coords: Vec<Vec<f64>> = coords.into_iter().map(|c| c.unwrap_or_else(|| vec![0.0; dim])).collect();
    let constants = geometric_constants(tree, decomp, tl);
    let mut e = Embedding { p, block_start, coords, lipschitz: 0.0, co_lipschitz: 0.0, distortion: 0.0, constants };
    for u in 0..n {
        for v in u + 1..n {
            let d = tree.d_f64(u, v);
            let r = e.norm(u, v) / d;
            e.lipschitz = e.lipschitz.max(r);
            e.co_lipschitz = e.co_lipschitz.max(1.0 / r);
        }
    }
    e.distortion = e.lipschitz * e.co_lipschitz;
    Ok(e)
}
