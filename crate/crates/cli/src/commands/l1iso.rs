use anyhow::{bail, Result};
use qctree_core::l1::{quotient_norm, quotient_norm_brute, FiniteMeasureSpace, KernelMode, QuotientIso};
use qctree_core::numeric::format_rational;
use qctree_core::Rational;
use rand::Rng;
use serde_json::Value;

use super::rng;
use crate::{Common, L1Cmd, Report};

pub fn run(common: &Common, cmd: &L1Cmd, config: Value) -> Result<Report> {
    common.exact_only()?;
    let seed = common.require_seed()?;
    let L1Cmd::Bench { sizes, blocks } = cmd;
    let sizes: Vec<usize> = sizes
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| anyhow::anyhow!("bad size `{s}`")))
        .collect::<Result<_>>()?;
    if sizes.is_empty() {
        bail!("--sizes is empty");
    }
    let (k_bound, q_bound) = (Rational::from_integer(64.into()), Rational::from_integer(128.into()));
    let mut report = Report::new("l1iso bench", config);
    let mut rows = Vec::new();
    let mut r = rng(seed);
    for &size in &sizes {
        let b = (*blocks).clamp(2, size.max(2));
        let space = FiniteMeasureSpace::random_dyadic(seed.wrapping_add(size as u64), size, b)?;
        let groups = space.group_blocks(b)?;
        for mode in [KernelMode::Atom(0), KernelMode::Atomless(groups)] {
            let name = match mode {
                KernelMode::Atom(_) => "atom",
                KernelMode::Atomless(_) => "atomless",
            };
            let qi = QuotientIso::new(&space, mode)?;
            let k = &qi.kernel;
            let tag = format!("size_{size}_{name}");
            for (op, m, bound) in &k.norms {
                report.check(
                    &format!("{tag}_{op}_norm"),
                    m <= bound,
                    format!("{} ≤ {}", format_rational(m), format_rational(bound)),
                );
            }
            report.check(&format!("{tag}_round_trips"), k.round_trips(), "");
            report.check(
                &format!("{tag}_quotient_norms"),
                qi.norms_within_bounds(),
                format!("{} ≤ 2, {} ≤ 1", format_rational(&qi.forward_norm), format_rational(&qi.inverse_norm)),
            );
            report.check(
                &format!("{tag}_kernel_distortion"),
                k.distortion() <= k_bound,
                format_rational(&k.distortion()),
            );
            report.check(
                &format!("{tag}_quotient_distortion"),
                qi.distortion() <= q_bound,
                format_rational(&qi.distortion()),
            );
            let norms =
                k.norms.iter().map(|(op, m, _)| format!("{op}={}", format_rational(m))).collect::<Vec<_>>().join(" ");
            rows.push(vec![
                size.to_string(),
                name.to_string(),
                norms,
                format_rational(&k.distortion()),
                format_rational(&qi.distortion()),
            ]);
        }
        let mut agree = true;
        for _ in 0..10 {
            let g: Vec<Rational> =
                (0..size).map(|_| Rational::new(r.gen_range(-9i64..=9).into(), r.gen_range(1i64..=4).into())).collect();
            agree &= quotient_norm(&space, &g).0 == quotient_norm_brute(&space, &g);
        }
        report.check(&format!("size_{size}_median_equals_scan"), agree, "");
    }
    report.table("sizes", &["size", "mode", "norms", "kernel_distortion", "quotient_distortion"], rows);
    Ok(report)
}
