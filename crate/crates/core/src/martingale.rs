//! Martingale differences and integrals between Lipschitz functions on a
//! quasiarc and sequences of bounded step functions.
//!
//! `D_n(f) = (f_aff(n) - f_aff(n-1))^(n)`, where `f_aff(n)` is `f`
//! interpolated linearly across the atoms of `At_n` and `^(n)` divides
//! increments by the `d_n`-length `H¹_n` of each cell. `I_n` integrates a
//! step function against `H¹_n`; `I = Σ I_n` inverts `D`.

use alloc::vec::Vec;

use crate::arc::QuasiArc;
use crate::dyadic::DyadicEdge;
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::function::{SampledFunction, StepFunction};
use crate::numeric::{Dyadic, Rational, Scalar};

fn check_len<S: Scalar>(filt: &Filtration, f: &SampledFunction<S>) -> Result<()> {
    if f.resolution() != filt.resolution() {
        return Err(Error::Length { expected: filt.cell_count() + 1, got: f.len() });
    }
    Ok(())
}

fn check_step<S: Scalar>(filt: &Filtration, g: &StepFunction<S>) -> Result<()> {
    if g.resolution() != filt.resolution() {
        return Err(Error::Length { expected: filt.cell_count(), got: g.values().len() });
    }
    Ok(())
}

/// `f_aff(n)`: equal to `f` off the atoms of `At_n`, affine (in the
/// Euclidean parameter) across each atom. `f_aff(-1) = 0`.
pub fn affinize<S: Scalar>(filt: &Filtration, f: &SampledFunction<S>, n: i64) -> Result<SampledFunction<S>> {
    check_len(filt, f)?;
    let k = filt.resolution();
    if n < 0 {
        return Ok(SampledFunction::zero(k));
    }
    let mut out = f.clone();
    let v = out.values_mut();
    for a in filt.atoms(n as u32) {
        let (l, r) = a.grid_span(k);
        let rise = v[r].clone() - v[l].clone();
        let depth = k - a.gen();
        for p in l + 1..r {
            let t = Dyadic::new((p - l) as i128, depth);
            v[p] = v[l].clone() + rise.clone() * S::from_dyadic(&t);
        }
    }
    Ok(out)
}

/// `f^(n)`: on each cell, the increment of `f` divided by `H¹_n(cell)`.
pub fn derivative<S: Scalar>(filt: &Filtration, f: &SampledFunction<S>, n: u32) -> Result<StepFunction<S>> {
    check_len(filt, f)?;
    let v = f.values();
    let values = (0..filt.cell_count())
        .map(|c| {
            let scale = Dyadic::pow2(filt.h1_exponent(n, c) as i32);
            (v[c + 1].clone() - v[c].clone()) * S::from_dyadic(&scale)
        })
        .collect();
    StepFunction::new(filt.resolution(), values)
}

/// First atom of `At_n` on which `g` is not constant.
pub fn measurability_defect<S: Scalar>(filt: &Filtration, g: &StepFunction<S>, n: u32) -> Option<DyadicEdge> {
    let k = filt.resolution();
    let v = g.values();
    filt.atoms(n).iter().copied().find(|a| {
        let (l, r) = a.grid_span(k);
        v[l + 1..r].iter().any(|x| !x.close_to(&v[l]))
    })
}

/// `E^(n-1)(g)` for `A_n`-measurable `g`: averages over the atoms of
/// `At_(n-1)`, identity on `Diff_(n-1)`. `E^(-1) = 0`.
pub fn cond_expect<S: Scalar>(filt: &Filtration, g: &StepFunction<S>, n: u32) -> Result<StepFunction<S>> {
    check_step(filt, g)?;
    if let Some(a) = measurability_defect(filt, g, n) {
        return Err(Error::NotMeasurable { level: n, atom: alloc::format!("{a}") });
    }
    let k = filt.resolution();
    if n == 0 {
        return Ok(StepFunction::zero(k));
    }
    let mut out = g.clone();
    let v = out.values_mut();
    for a in filt.atoms(n - 1) {
        let (l, r) = a.grid_span(k);
        let sum = v[l..r].iter().cloned().fold(S::zero(), |s, x| s + x);
        let mean = sum * S::from_dyadic(&Dyadic::pow2(-((k - a.gen()) as i32)));
        v[l..r].fill(mean);
    }
    Ok(out)
}

/// `I_n(g)(x)`: the integral of `g` against `H¹_n` over `[0, x]`.
pub fn integral<S: Scalar>(filt: &Filtration, g: &StepFunction<S>, n: u32) -> Result<SampledFunction<S>> {
    check_step(filt, g)?;
    let mut acc = S::zero();
    let mut values = Vec::with_capacity(filt.cell_count() + 1);
    values.push(acc.clone());
    for (c, x) in g.values().iter().enumerate() {
        acc = acc + x.clone() * S::from_dyadic(&filt.h1(n, c));
        values.push(acc.clone());
    }
    SampledFunction::new(filt.resolution(), values)
}

/// `(D_n f)` for `n = 0..=n_max`. Both formulas for `D_n` are evaluated
/// and must agree.
pub fn martingale_d<S: Scalar>(filt: &Filtration, f: &SampledFunction<S>) -> Result<Vec<StepFunction<S>>> {
    check_len(filt, f)?;
    if !f.values()[0].is_zero_val() {
        return Err(Error::NonzeroAtBase);
    }
    let mut prev = affinize(filt, f, -1)?;
    let mut out = Vec::with_capacity(filt.n_max() as usize + 1);
    for n in 0..=filt.n_max() {
        let cur = affinize(filt, f, n as i64)?;
        let g = derivative(filt, &cur, n)?;
        let projected = g.sub(&cond_expect(filt, &g, n)?);
        let direct = derivative(filt, &cur.sub(&prev), n)?;
        if !projected.close_to(&direct) {
            return Err(Error::RouteMismatch { level: n });
        }
        out.push(projected);
        prev = cur;
    }
    Ok(out)
}

/// Check that `g` is an admissible level-`n` entry: `A_n`-measurable and
/// killed by `E^(n-1)`.
pub fn check_level<S: Scalar>(filt: &Filtration, g: &StepFunction<S>, n: u32) -> Result<()> {
    let e = cond_expect(filt, g, n)?;
    if let Some(c) = e.values().iter().position(|x| !x.is_zero_val()) {
        let atom = if n == 0 {
            DyadicEdge::ROOT
        } else {
            filt.atom_of_cell(n - 1, c).unwrap_or(DyadicEdge::cell(filt.resolution(), c as u64))
        };
        return Err(Error::NotInKernel { level: n, atom: alloc::format!("{atom}") });
    }
    Ok(())
}

/// `I(seq) = Σ_n I_n(g_n)`, after validating every entry.
pub fn total_integral<S: Scalar>(filt: &Filtration, seq: &[StepFunction<S>]) -> Result<SampledFunction<S>> {
    let mut total = SampledFunction::zero(filt.resolution());
    for (n, g) in seq.iter().enumerate() {
        check_level(filt, g, n as u32)?;
        total = total.add(&integral(filt, g, n as u32)?);
    }
    Ok(total)
}

/// `sup_n ||g_n||_∞`.
pub fn sequence_norm<S: Scalar>(seq: &[StepFunction<S>]) -> S {
    seq.iter().map(StepFunction::sup_norm).fold(S::zero(), |m, v| if v > m { v } else { m })
}

/// A function separating `x` and `y` built from a single atom.
#[derive(Clone, Debug)]
pub struct SeparatingWitness {
    pub u: Dyadic,
    pub v: Dyadic,
    /// Dyadic edge `[u, v] ⊆ [x, y]` with `d(x, y) <= 4 d(u, v)`.
    pub edge: DyadicEdge,
    pub level: u32,
    pub atom: DyadicEdge,
    /// `I_(level+1)(±(1_e0 - 1_e1))`, held constant outside `[u, v]`.
    pub function: SampledFunction<Rational>,
    pub gain: Rational,
    pub d_uv: Dyadic,
    pub d_xy: Dyadic,
    pub lipschitz_dk: Rational,
}

impl SeparatingWitness {
    pub fn gain_ok(&self) -> bool {
        self.gain >= self.d_uv.to_rational()
    }

    pub fn lipschitz_ok(&self) -> bool {
        self.lipschitz_dk <= Rational::from_integer(4.into())
    }

    pub fn certified(&self) -> bool {
        self.gain_ok() && self.lipschitz_ok() && self.d_xy <= self.d_uv.scale_pow2(2)
    }
}

pub fn separating_witness(arc: &QuasiArc, filt: &Filtration, x: &Dyadic, y: &Dyadic) -> Result<SeparatingWitness> {
    let k = arc.resolution();
    if filt.resolution() != k {
        return Err(Error::Resolution { got: filt.resolution(), min: k, max: k });
    }
    let (xi, yi) = (arc.point_index(x)?, arc.point_index(y)?);
    let (xi, yi) = (xi.min(yi), xi.max(yi));
    let none = || Error::NoWitness { x: alloc::format!("{x}"), y: alloc::format!("{y}") };
    if xi == yi {
        return Err(none());
    }
    let mut best: Option<(DyadicEdge, Dyadic)> = None;
    for e in DyadicEdge::up_to(k).skip(1) {
        let (l, r) = e.grid_span(k);
        if xi <= l && r <= yi {
            let d = arc.d(l, r);
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((e, d));
            }
        }
    }
    let (edge, d_uv) = best.ok_or_else(none)?;
    let d_xy = arc.d(xi, yi);
    if d_xy > d_uv.scale_pow2(2) {
        return Err(none());
    }
    let (level, atom) = filt.diff_witness(&edge)?;
    let [c0, _] = atom.children();
    let sign: i64 = if c0.contains_edge(&edge) { 1 } else { -1 };
    let (al, ar) = atom.grid_span(k);
    let mid = (al + ar) / 2;
    let g: Vec<Rational> = (0..filt.cell_count())
        .map(|c| {
            let s = if c < al || c >= ar {
                0
            } else if c < mid {
                sign
            } else {
                -sign
            };
            Rational::from_integer(s.into())
        })
        .collect();
    let raw = integral(filt, &StepFunction::new(k, g)?, level + 1)?;
    let (ul, ur) = edge.grid_span(k);
    let rv = raw.values();
    let function = SampledFunction::new(k, (0..arc.point_count()).map(|p| rv[p.clamp(ul, ur)].clone()).collect())?;
    let gain = rv[ur].clone() - rv[ul].clone();
    let lipschitz_dk = filt.approx_metric(level)?.lipschitz_norm(&function)?;
    Ok(SeparatingWitness {
        u: edge.left(),
        v: edge.right(),
        edge,
        level,
        atom,
        function,
        gain,
        d_uv,
        d_xy,
        lipschitz_dk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{DiameterTree, GeneratorKind};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn euclidean_identity() {
        let t = DiameterTree::generate(GeneratorKind::Euclidean, 3).unwrap();
        let filt = Filtration::from_tree(t).unwrap();
        let f = SampledFunction::from_fn(3, |x| x.to_rational());
        let d = martingale_d(&filt, &f).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d[0].values().iter().all(|v| *v == q(1, 1)));
        assert!(d[1].is_zero());
        let back = total_integral(&filt, &d).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn conditional_expectation_rejects_rough_input() {
        let t = DiameterTree::generate(GeneratorKind::Snowflake { period: 2 }, 4).unwrap();
        let filt = Filtration::from_tree(t).unwrap();
        let mut g = StepFunction::<Rational>::zero(4);
        g.values_mut()[0] = q(1, 1);
        assert!(matches!(cond_expect(&filt, &g, 1), Err(Error::NotMeasurable { level: 1, .. })));
        assert!(cond_expect(&filt, &g, 2).is_ok());
    }

    #[test]
    fn integral_of_kernel_element_vanishes_on_diffuse_points() {
        let t = DiameterTree::generate(GeneratorKind::Snowflake { period: 2 }, 4).unwrap();
        let filt = Filtration::from_tree(t).unwrap();
        // level-2 entry: +1 then -1 on the halves of each generation-2 atom
        let g = StepFunction::new(4, (0..16).map(|c| if c % 4 < 2 { q(1, 1) } else { q(-1, 1) }).collect()).unwrap();
        assert!(check_level(&filt, &g, 2).is_ok());
        let f = integral(&filt, &g, 2).unwrap();
        for p in filt.diff_points(1) {
            assert_eq!(f.values()[p], q(0, 1));
        }
    }

    #[test]
    fn witness_on_euclidean() {
        let t = DiameterTree::generate(GeneratorKind::Euclidean, 3).unwrap();
        let arc = QuasiArc::from_tree(t.clone()).unwrap();
        let filt = Filtration::from_tree(t).unwrap();
        let x: Dyadic = "1/2".parse().unwrap();
        let y: Dyadic = "3/4".parse().unwrap();
        let w = separating_witness(&arc, &filt, &x, &y).unwrap();
        assert_eq!((w.level, w.atom), (0, DyadicEdge::ROOT));
        assert!(w.certified());
    }
}
