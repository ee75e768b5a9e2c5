use anyhow::{bail, Result};
use num_traits::Zero;
use qctree_core::glue::{
    basepoint_coordinate, circle_fold, family_norms, glue_light, l1_embedding, phi, psi, tree_mesh, PieceFamily,
    Subspace,
};
use qctree_core::numeric::{format_rational, parse_rational, rational_to_f64};
use qctree_core::tree::{full_arc_decomposition, geometric_constants, validate_treelike, TreeLike};
use qctree_core::{MetricTree, PieceDecomposition, Rational};
use rand::Rng;
use serde_json::Value;

use super::tree::constants_json;
use super::{max_rat, parse_list, rat, rng};
use crate::formats::read_plan;
use crate::{Common, DecompKind, GlueCmd, LightMap, Report};

fn decompose(tree: &MetricTree, kind: DecompKind) -> Result<(PieceDecomposition, TreeLike)> {
    Ok(match kind {
        DecompKind::Arcs => {
            let d = tree.arc_decomposition();
            let tl = validate_treelike(tree, &d)?;
            (d, tl)
        }
        DecompKind::DebvArcs => {
            let ad = full_arc_decomposition(tree, None)?;
            (ad.decomposition, ad.treelike)
        }
    })
}

pub fn run(common: &Common, cmd: &GlueCmd, config: Value) -> Result<Report> {
    match cmd {
        GlueCmd::Psi { plan, decomp, trials } => {
            common.exact_only()?;
            let seed = common.require_seed()?;
            let tree = MetricTree::build(&read_plan(plan)?)?;
            let (d, tl) = decompose(&tree, *decomp)?;
            let consts = geometric_constants(&tree, &d, &tl);
            let c = consts.c();
            let mut r = rng(seed);
            let (mut inverse_fails, mut bound_fails) = (0usize, 0usize);
            let mut worst = Rational::zero();
            for _ in 0..*trials {
                let values = d
                    .pieces()
                    .iter()
                    .zip(&tl.branch_points)
                    .map(|(piece, &p)| {
                        piece
                            .iter()
                            .map(|&v| {
                                if v == p {
                                    Rational::zero()
                                } else {
                                    Rational::new(r.gen_range(-8i64..=8).into(), 4.into())
                                }
                            })
                            .collect()
                    })
                    .collect();
                let fam = PieceFamily { values };
                let glued = psi(&tree, &d, &tl, &fam)?;
                if phi(&d, &tl, &glued)? != fam {
                    inverse_fails += 1;
                }
                let sup = max_rat(family_norms(&tree, &d, &fam));
                let norm = tree.lipschitz_on(&glued, None);
                if norm > &c * &sup {
                    bound_fails += 1;
                }
                if !sup.is_zero() {
                    let ratio = norm / sup;
                    if ratio > worst {
                        worst = ratio;
                    }
                }
            }
            let mut report = Report::new("glue psi", config);
            report.measure("pieces", d.len());
            report.measure("constants", constants_json(&consts));
            report.measure("max_norm_over_sup", rat(&worst));
            report.check("phi_of_psi_is_identity", inverse_fails == 0, format!("{inverse_fails} failures"));
            report.check(
                "psi_norm_at_most_c_sup",
                bound_fails == 0,
                format!("{bound_fails} failures, C = {}", format_rational(&c)),
            );
            Ok(report)
        }
        GlueCmd::Light { plan, r_grid, map, fold } => {
            let tree = MetricTree::build(&read_plan(plan)?)?;
            let d = tree.arc_decomposition();
            let tl = validate_treelike(&tree, &d)?;
            let mesh = tree_mesh(&tree);
            let r_grid: Vec<f64> = match r_grid {
                Some(s) => parse_list(s)?.iter().map(rational_to_f64).collect(),
                None => (1..=5).map(|j| mesh * f64::from(1u32 << j)).collect(),
            };
            let fraction = rational_to_f64(&parse_rational(fold)?);
            if fraction <= 0.0 {
                bail!("--fold must be positive");
            }
            let circle = fraction * rational_to_f64(&tree.diameter());
            let values = d
                .pieces()
                .iter()
                .zip(&tl.branch_points)
                .map(|(piece, &p)| {
                    let sub = Subspace { tree: &tree, vertices: piece };
                    let at = piece.iter().position(|&v| v == p).expect("branch point lies in its piece");
                    let coord = basepoint_coordinate(&sub, at);
                    match map {
                        LightMap::Distance => coord,
                        LightMap::Circle => circle_fold(&coord, circle),
                    }
                })
                .collect();
            let g = glue_light(&tree, &d, &tl, &PieceFamily { values }, &r_grid)?;
            let mut report = Report::new("glue light", config);
            report.measure("arithmetic", "float");
            report.measure("mesh", mesh);
            report.measure("c", g.c);
            report.measure("l", g.l);
            report.measure("q", g.q);
            report.measure("q_prime", g.q_prime);
            report.measure("q_hat", g.measured.q_hat);
            report.measure("slack", g.measured.slack);
            report.measure("lipschitz", g.lipschitz);
            let rows = g
                .measured
                .rows
                .iter()
                .map(|row| {
                    vec![
                        format!("{:e}", row.r),
                        row.windows.to_string(),
                        format!("{:e}", row.max_diameter),
                        format!("{:e}", row.ratio),
                        format!("{:e}", row.slack),
                    ]
                })
                .collect();
            report.table("per_r", &["r", "windows", "max_diameter", "ratio", "slack"], rows);
            let pieces = g
                .per_piece
                .iter()
                .enumerate()
                .map(|(n, (l, q))| vec![n.to_string(), format!("{l:e}"), format!("{q:e}")])
                .collect();
            report.table("per_piece", &["piece", "l", "q"], pieces);
            report.check(
                "q_hat_within_prediction",
                g.passes(),
                format!("Q̂ {} vs Q′ {} + slack {}", g.measured.q_hat, g.q_prime, g.measured.slack),
            );
            Ok(report)
        }
        GlueCmd::Embed { plan, p } => {
            let tree = MetricTree::build(&read_plan(plan)?)?;
            let ad = full_arc_decomposition(&tree, None)?;
            let e = l1_embedding(&tree, &ad.decomposition, &ad.treelike, *p)?;
            let mut report = Report::new("glue embed", config);
            report.measure("arithmetic", "float");
            report.measure("dimension", e.coords.first().map_or(0, Vec::len));
            report.measure("blocks", e.block_start.len());
            report.measure("lipschitz", e.lipschitz);
            report.measure("co_lipschitz", e.co_lipschitz);
            report.measure("distortion", e.distortion);
            report.measure("constants", constants_json(&e.constants));
            report.check("lip_and_colip_at_most_c", e.within_bound(), format!("C = {}", e.c()));
            report.check(
                "distortion_at_most_c",
                e.distortion <= e.c() * (1.0 + 1e-12),
                format!("{} vs {}", e.distortion, e.c()),
            );
            Ok(report)
        }
    }
}
