use anyhow::{bail, Result};
use num_traits::One;
use qctree_core::{DiameterTree, GeneratorKind, QuasiArc};
use serde_json::Value;

use super::{dy, load_tree, parse_point, rat};
use crate::formats::TreeFile;
use crate::report::write_json;
use crate::{ArcCmd, ArcKind, Common, Report};

pub fn run(common: &Common, cmd: &ArcCmd, config: Value) -> Result<Report> {
    common.exact_only()?;
    match cmd {
        ArcCmd::Gen { kind, period, p_halve, out } => {
            let Some(k) = common.resolution else { bail!("arc gen needs --resolution") };
            let gen = match kind {
                ArcKind::Euclidean => GeneratorKind::Euclidean,
                ArcKind::EuclideanRaw => GeneratorKind::EuclideanRaw,
                ArcKind::Snowflake => GeneratorKind::Snowflake { period: *period },
                ArcKind::Random => GeneratorKind::Random { seed: common.require_seed()?, p_halve: *p_halve },
            };
            let tree = DiameterTree::generate(gen, k)?;
            let file = TreeFile::from_tree(&tree);
            let mut report = Report::new("arc gen", config);
            match out {
                Some(p) => write_json(p, &file)?,
                None => report.measure("tree", serde_json::to_value(&file)?),
            }
            report.measure("doubling_index", tree.doubling_index());
            report.measure("n_max", tree.n_max());
            Ok(report)
        }
        ArcCmd::Dist { tree, x, y } => {
            let (t, k) = load_tree(common, tree)?;
            let arc = QuasiArc::new(t, k)?;
            let (x, y) = (parse_point(x)?, parse_point(y)?);
            let d = arc.distance(&x, &y)?;
            let mut report = Report::new("arc dist", config);
            report.measure("x", dy(&x));
            report.measure("y", dy(&y));
            report.measure("distance", dy(&d));
            Ok(report)
        }
        ArcCmd::Check { tree } => {
            let (t, k) = load_tree(common, tree)?;
            let (n0, n_max) = (t.doubling_index(), t.n_max());
            let arc = QuasiArc::new(t, k)?;
            let mut report = Report::new("arc check", config);
            report.measure("resolution", k);
            report.measure("points", arc.point_count());
            report.measure("doubling_index", n0);
            report.measure("n_max", n_max);
            report.measure("diameter", dy(&arc.d(0, arc.point_count() - 1)));
            let violation = arc.metric_violation();
            report.check("metric_axioms", violation.is_none(), violation.unwrap_or_default());
            let bad = arc.edge_distance_mismatches();
            let detail = bad.first().map(|e| format!("{} edges, first {e}", bad.len())).unwrap_or_default();
            report.check("edge_distance_identity", bad.is_empty(), detail);
            let ratio = arc.bounded_turning_ratio();
            report.measure("bounded_turning_ratio", rat(&ratio));
            report.check("bounded_turning_1", ratio.is_one(), format!("ratio {ratio}"));
            Ok(report)
        }
    }
}
