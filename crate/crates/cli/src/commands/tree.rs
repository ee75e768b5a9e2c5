use anyhow::Result;
use num_traits::One;
use qctree_core::tree::{
    debv, find_nontrivial_loop, full_arc_decomposition, geometric_constants_on, validate_treelike_on,
    GeometricConstants, GluePlan,
};
use qctree_core::MetricTree;
use serde_json::{json, Value};

use super::rat;
use crate::formats::{read_plan, PlanFile};
use crate::report::write_json;
use crate::{Common, PlanKind, Report, TreeCmd};

pub(crate) fn constants_json(c: &GeometricConstants) -> Value {
    json!({"c2": rat(&c.c2), "c3": rat(&c.c3), "c": rat(&c.c()), "pairs": c.pairs, "non_minimal": c.non_minimal})
}

pub fn run(common: &Common, cmd: &TreeCmd, config: Value) -> Result<Report> {
    common.exact_only()?;
    match cmd {
        TreeCmd::Gen { kind, arcs, out } => {
            let k = common.resolution.unwrap_or(3);
            let plan = match kind {
                PlanKind::Star => GluePlan::star(*arcs, k)?,
                PlanKind::Chain => GluePlan::chain(*arcs, k)?,
                PlanKind::Random => GluePlan::random(common.require_seed()?, *arcs, k)?,
            };
            let tree = MetricTree::build(&plan)?;
            let mut report = Report::new("tree gen", config);
            report.measure("vertices", tree.vertex_count());
            report.measure("diameter", rat(&tree.diameter()));
            let file = PlanFile::from_plan(&plan);
            match out {
                Some(p) => write_json(p, &file)?,
                None => report.measure("plan", serde_json::to_value(&file)?),
            }
            Ok(report)
        }
        TreeCmd::Debv { plan, depth } => {
            let tree = MetricTree::build(&read_plan(plan)?)?;
            let dv = debv(&tree, *depth)?;
            let mut report = Report::new("tree debv", config);
            report.measure("vertices", tree.vertex_count());
            report.measure("pieces", dv.pieces.len());
            report.measure("complete", dv.complete);
            report.measure("warnings", dv.warnings.clone());
            let rows = dv
                .levels
                .iter()
                .map(|l| {
                    vec![
                        l.n.to_string(),
                        qctree_core::numeric::format_rational(&l.radius),
                        l.net.len().to_string(),
                        l.subtree.len().to_string(),
                        l.pieces.to_string(),
                    ]
                })
                .collect();
            report.table("levels", &["n", "radius", "net", "subtree", "pieces"], rows);
            let decomp = dv.decomposition()?;
            let ground = dv.covered().to_vec();
            match validate_treelike_on(&tree, &decomp, &ground) {
                Ok(tl) => {
                    report.check("treelike", true, "");
                    let c = geometric_constants_on(&tree, &decomp, &tl, &ground);
                    report.check("paths_minimal", c.non_minimal == 0, format!("{} non-minimal", c.non_minimal));
                    report.measure("constants", constants_json(&c));
                }
                Err(e) => report.check("treelike", false, e.to_string()),
            }
            let lp = find_nontrivial_loop(&decomp);
            report.check("no_nontrivial_loop", lp.is_none(), lp.map(|l| format!("{l:?}")).unwrap_or_default());
            Ok(report)
        }
        TreeCmd::Decompose { plan, depth } => {
            let tree = MetricTree::build(&read_plan(plan)?)?;
            let ad = full_arc_decomposition(&tree, *depth)?;
            let mut report = Report::new("tree decompose", config);
            report.measure("vertices", tree.vertex_count());
            report.measure("debv_pieces", ad.debv.pieces.len());
            report.measure("arcs", ad.arcs.len());
            report.measure("debv_constants", constants_json(&ad.debv_constants));
            report.measure("arc_constants", constants_json(&ad.arc_constants));
            report.measure("piece_constant", rat(&ad.piece_constant));
            report.measure("predicted", rat(&ad.predicted()));
            let ratio = tree.bounded_turning_ratio();
            report.measure("bounded_turning_ratio", rat(&ratio));
            let rows = ad
                .arcs
                .iter()
                .map(|a| {
                    vec![
                        a.n.to_string(),
                        a.j.to_string(),
                        a.m.to_string(),
                        a.arc.path.len().to_string(),
                        a.arc.branch.to_string(),
                    ]
                })
                .collect();
            report.table("arcs", &["n", "j", "m", "vertices", "branch"], rows);
            report.check("bounded_turning_1", ratio.is_one(), format!("ratio {}", ratio));
            let lp = find_nontrivial_loop(&ad.decomposition);
            report.check("no_nontrivial_loop", lp.is_none(), lp.map(|l| format!("{l:?}")).unwrap_or_default());
            report.check("debv_paths_minimal", ad.debv_constants.non_minimal == 0, "");
            report.check("arc_paths_minimal", ad.arc_constants.non_minimal == 0, "");
            report.check(
                "within_prediction",
                ad.within_prediction(),
                format!("C {} vs {}", ad.arc_constants.c(), ad.predicted()),
            );
            Ok(report)
        }
    }
}
