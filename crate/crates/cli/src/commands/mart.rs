use anyhow::{bail, Result};
use num_traits::Zero;
use qctree_core::martingale::{
    check_level, cond_expect, martingale_d, separating_witness, sequence_norm, total_integral,
};
use qctree_core::numeric::format_rational;
use qctree_core::{Filtration, QuasiArc, Rational, SampledFunction, Scalar, StepFunction};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::{dy, load_tree, parse_point, rat, rng};
use crate::formats::{function_json, read_function, read_sequence, sequence_file};
use crate::report::write_json;
use crate::{Common, MartCmd, Report};

/// Relative tolerance for float round trips.
const FLOAT_ROUNDTRIP_TOL: f64 = 1e-9;

pub fn run(common: &Common, cmd: &MartCmd, config: Value) -> Result<Report> {
    match cmd {
        MartCmd::D { tree, f, out } => {
            common.exact_only()?;
            let (t, k) = load_tree(common, tree)?;
            let arc = QuasiArc::new(t.clone(), k)?;
            let filt = Filtration::new(t, k)?;
            let f = read_function(f, k)?;
            let seq = martingale_d(&filt, &f)?;
            let mut report = Report::new("mart d", config);
            let lip = arc.lipschitz_norm(&f)?;
            let sup = sequence_norm(&seq);
            report.measure("levels", seq.len());
            report.measure("lipschitz_norm", rat(&lip));
            report.measure("sequence_sup", rat(&sup));
            for (n, g) in seq.iter().enumerate() {
                let ok = check_level(&filt, g, n as u32);
                report.check(
                    &format!("level_{n}_admissible"),
                    ok.is_ok(),
                    ok.err().map(|e| e.to_string()).unwrap_or_default(),
                );
            }
            let two = Rational::from_integer(2.into());
            report.check(
                "sup_D_at_most_2_lip",
                sup <= &two * &lip,
                format!("{} vs 2·{}", format_rational(&sup), format_rational(&lip)),
            );
            match out {
                Some(p) => write_json(p, &sequence_file(&seq))?,
                None => report.measure("sequence", serde_json::to_value(sequence_file(&seq))?),
            }
            Ok(report)
        }
        MartCmd::I { tree, seq, out } => {
            common.exact_only()?;
            let (t, k) = load_tree(common, tree)?;
            let n0 = t.doubling_index();
            let arc = QuasiArc::new(t.clone(), k)?;
            let filt = Filtration::new(t, k)?;
            let seq = read_sequence(seq, k)?;
            let levels = filt.n_max() as usize + 1;
            if seq.len() > levels {
                bail!("sequence has {} levels but the filtration stops at n = {}", seq.len(), filt.n_max());
            }
            let f = total_integral(&filt, &seq)?;
            let mut report = Report::new("mart i", config);
            let lip = arc.lipschitz_norm(&f)?;
            let sup = sequence_norm(&seq);
            report.measure("doubling_index", n0);
            report.measure("lipschitz_norm", rat(&lip));
            report.measure("sequence_sup", rat(&sup));
            let bound = Rational::from_integer((64 * n0).into()) * &sup;
            report.check(
                "lip_at_most_64_n0_sup",
                lip <= bound,
                format!("{} vs {}", format_rational(&lip), format_rational(&bound)),
            );
            let mut padded = seq.clone();
            padded.resize(levels, StepFunction::zero(k));
            report.check("d_of_i_is_identity", martingale_d(&filt, &f)? == padded, "");
            match out {
                Some(p) => write_json(p, &function_json(&f))?,
                None => report.measure("function", serde_json::to_value(function_json(&f))?),
            }
            Ok(report)
        }
        MartCmd::Roundtrip { tree, trials } => {
            let seed = common.require_seed()?;
            let (t, k) = load_tree(common, tree)?;
            let filt = Filtration::new(t, k)?;
            let mut r = rng(seed);
            let fs: Vec<_> = (0..*trials).map(|_| random_function(&mut r, k)).collect();
            let seqs: Vec<_> = (0..*trials).map(|_| random_sequence(&mut r, &filt)).collect::<Result<_>>()?;
            let mut report = Report::new("mart roundtrip", config);
            report.measure("trials", *trials);
            if common.float {
                report.measure("arithmetic", "float");
                report.measure("tolerance", FLOAT_ROUNDTRIP_TOL);
                let conv_f = |f: &SampledFunction<Rational>| {
                    SampledFunction::new(k, f.values().iter().map(f64::from_rational).collect()).unwrap()
                };
                let conv_g = |g: &StepFunction<Rational>| {
                    StepFunction::new(k, g.values().iter().map(f64::from_rational).collect()).unwrap()
                };
                let fs: Vec<_> = fs.iter().map(conv_f).collect();
                let seqs: Vec<Vec<_>> = seqs.iter().map(|s| s.iter().map(conv_g).collect()).collect();
                let (e1, e2) = round_trip_errors(&filt, &fs, &seqs)?;
                report.measure("max_error_i_of_d", e1);
                report.measure("max_error_d_of_i", e2);
                report.check("i_of_d_is_identity", e1 <= FLOAT_ROUNDTRIP_TOL, format!("max error {e1:e}"));
                report.check("d_of_i_is_identity", e2 <= FLOAT_ROUNDTRIP_TOL, format!("max error {e2:e}"));
            } else {
                report.measure("arithmetic", "exact");
                let (e1, e2) = round_trip_errors(&filt, &fs, &seqs)?;
                report.measure("max_error_i_of_d", rat(&e1));
                report.measure("max_error_d_of_i", rat(&e2));
                report.check("i_of_d_is_identity", e1.is_zero(), format!("max error {}", format_rational(&e1)));
                report.check("d_of_i_is_identity", e2.is_zero(), format!("max error {}", format_rational(&e2)));
            }
            Ok(report)
        }
        MartCmd::Witness { tree, x, y, out } => {
            common.exact_only()?;
            let (t, k) = load_tree(common, tree)?;
            let arc = QuasiArc::new(t.clone(), k)?;
            let filt = Filtration::new(t, k)?;
            let w = separating_witness(&arc, &filt, &parse_point(x)?, &parse_point(y)?)?;
            let mut report = Report::new("mart witness", config);
            report.measure("u", dy(&w.u));
            report.measure("v", dy(&w.v));
            report.measure("edge", w.edge.to_string());
            report.measure("level", w.level);
            report.measure("atom", w.atom.to_string());
            report.measure("gain", rat(&w.gain));
            report.measure("d_uv", dy(&w.d_uv));
            report.measure("d_xy", dy(&w.d_xy));
            report.measure("lipschitz_dk", rat(&w.lipschitz_dk));
            report.check("gain_at_least_d_uv", w.gain_ok(), "");
            report.check("lipschitz_dk_at_most_4", w.lipschitz_ok(), "");
            report.check("d_xy_at_most_4_d_uv", w.d_xy <= w.d_uv.scale_pow2(2), "");
            if let Some(p) = out {
                write_json(p, &function_json(&w.function))?;
            }
            Ok(report)
        }
    }
}

/// `max |I(D f) - f|` and `max |D(I seq) - seq|` over the trials.
fn round_trip_errors<S: Scalar>(
    filt: &Filtration,
    fs: &[SampledFunction<S>],
    seqs: &[Vec<StepFunction<S>>],
) -> Result<(S, S)> {
    let worst = |a: &[S], b: &[S], acc: S| {
        a.iter().zip(b).map(|(x, y)| (x.clone() - y.clone()).abs_val()).fold(acc, |m, v| if v > m { v } else { m })
    };
    let mut e1 = S::zero();
    for f in fs {
        let back = total_integral(filt, &martingale_d(filt, f)?)?;
        e1 = worst(back.values(), f.values(), e1);
    }
    let mut e2 = S::zero();
    for seq in seqs {
        let again = martingale_d(filt, &total_integral(filt, seq)?)?;
        for (g, h) in again.iter().zip(seq) {
            e2 = worst(g.values(), h.values(), e2);
        }
    }
    Ok((e1, e2))
}

/// Small rationals with `f(0) = 0`, either independent or accumulated.
fn random_function(r: &mut ChaCha8Rng, k: u32) -> SampledFunction<Rational> {
    let denom = [1i64, 2, 3, 4, 8][r.gen_range(0..5)];
    let cumulative = r.gen_bool(0.5);
    let mut acc = <Rational as Zero>::zero();
    let values = (0..=(1usize << k))
        .map(|i| {
            if i == 0 {
                return <Rational as Zero>::zero();
            }
            let step = Rational::new(r.gen_range(-6i64..=6).into(), denom.into());
            acc = if cumulative { &acc + step } else { step };
            acc.clone()
        })
        .collect();
    SampledFunction::new(k, values).expect("length 2^K + 1")
}

/// `g_n = h_n - E^(n-1) h_n` with `h_n` constant on the atoms of `At_n`.
fn random_sequence(r: &mut ChaCha8Rng, filt: &Filtration) -> Result<Vec<StepFunction<Rational>>> {
    let k = filt.resolution();
    (0..=filt.n_max())
        .map(|n| {
            let mut h: Vec<Rational> =
                (0..filt.cell_count()).map(|_| Rational::new(r.gen_range(-5i64..=5).into(), 4.into())).collect();
            for a in filt.atoms(n) {
                let (l, rr) = a.grid_span(k);
                let first = h[l].clone();
                h[l..rr].fill(first);
            }
            let h = StepFunction::new(k, h)?;
            Ok(h.sub(&cond_expect(filt, &h, n)?))
        })
        .collect()
}
