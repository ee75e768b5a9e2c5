use anyhow::{bail, Result};
use qctree_core::{Dyadic, Filtration};
use serde_json::{json, Value};

use super::{dy, load_tree};
use crate::{Common, FiltrationCmd, Report};

pub fn run(common: &Common, cmd: &FiltrationCmd, config: Value) -> Result<Report> {
    common.exact_only()?;
    let FiltrationCmd::Atoms { tree, n, .. } = cmd;
    let (t, k) = load_tree(common, tree)?;
    let filt = Filtration::new(t.clone(), k)?;
    let n = *n;
    if n > filt.n_max() + 1 {
        bail!("level {n} is past the last active level {}", filt.n_max());
    }
    let mut report = Report::new("filtration atoms", config);
    let atoms: Vec<Value> =
        filt.atoms(n).iter().map(|a| json!({"id": a.to_string(), "delta": dy(&t.delta(a))})).collect();
    report.measure("level", n);
    report.measure("n_max", filt.n_max());
    report.measure("atoms", atoms);
    report.measure("atom_measure", dy(&filt.atom_measure(n)));
    report.measure("diffuse_measure", dy(&(Dyadic::ONE - filt.atom_measure(n))));

    let nested = n == 0
        || filt.atoms(n).iter().all(|a| {
            let (l, _) = a.grid_span(k);
            filt.atom_of_cell(n - 1, l).is_some_and(|b| b.contains_edge(a))
        });
    report.check("atoms_nested_in_previous_level", nested, "");

    let ru = filt.ru_decomposition(0..=filt.n_max() + 1);
    let all_nested = ru.iter().all(|r| r.nested);
    report.check("nesting_all_levels", all_nested, "");
    let monotone = ru.windows(2).all(|w| w[0].diff_measure <= w[1].diff_measure);
    report.check("diff_monotone", monotone, "");
    let rows = ru
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.atom_count.to_string(),
                r.atom_measure.to_string(),
                r.diff_measure.to_string(),
                r.remainder_measure.to_string(),
                r.nested.to_string(),
            ]
        })
        .collect();
    report.table("levels", &["n", "atoms", "atom_measure", "diff_measure", "remainder_measure", "nested"], rows);
    Ok(report)
}
