//! On-disk formats: diameter trees, sampled functions, martingale sequences
//! and glue plans. All numbers are strings holding exact rationals
//! (`"p/q"`, integers or decimals).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use qctree_core::numeric::{format_rational, parse_rational};
use qctree_core::tree::{ArcSpec, Attachment, GluePlan};
use qctree_core::{DiameterTree, Dyadic, Rational, SampledFunction, StepFunction};
use serde::{Deserialize, Serialize};

/// `halving` lists the halving bit of every edge of generation `< K` in
/// breadth-first order, as a string of `0`/`1`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TreeFile {
    pub resolution: u32,
    pub normalized: bool,
    pub halving: String,
}

impl TreeFile {
    pub fn from_tree(t: &DiameterTree) -> Self {
        TreeFile {
            resolution: t.resolution(),
            normalized: t.is_normalized(),
            halving: t.halving_bits().iter().map(|&b| if b { '1' } else { '0' }).collect(),
        }
    }

    pub fn to_tree(&self) -> Result<DiameterTree> {
        let bits = self
            .halving
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(anyhow!("halving bits must be 0 or 1, found `{c}`")),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DiameterTree::from_bits(self.resolution, self.normalized, bits)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SequenceFile {
    pub n_max: u32,
    pub levels: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeRef {
    Path(String),
    Inline(TreeFile),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanArc {
    pub tree: TreeRef,
    pub scale: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanAttach {
    pub arc: usize,
    pub host: usize,
    pub at: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanFile {
    pub arcs: Vec<PlanArc>,
    pub attach: Vec<PlanAttach>,
}

impl PlanFile {
    pub fn from_plan(plan: &GluePlan) -> Self {
        PlanFile {
            arcs: plan
                .arcs
                .iter()
                .map(|a| PlanArc {
                    tree: TreeRef::Inline(TreeFile::from_tree(&a.tree)),
                    scale: format_rational(&a.scale),
                })
                .collect(),
            attach: plan.attach.iter().map(|a| PlanAttach { arc: a.arc, host: a.host, at: a.at.to_string() }).collect(),
        }
    }

    /// Tree paths are relative to `base`, the directory of the plan file.
    pub fn to_plan(&self, base: &Path) -> Result<GluePlan> {
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for (i, a) in self.arcs.iter().enumerate() {
            let tree = match &a.tree {
                TreeRef::Inline(t) => t.to_tree(),
                TreeRef::Path(p) => read_tree(&base.join(p)),
            }
            .with_context(|| format!("arc {i}"))?;
            let scale = parse_rational(&a.scale).with_context(|| format!("arc {i} scale"))?;
            arcs.push(ArcSpec { tree, scale });
        }
        let attach = self
            .attach
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let at: Dyadic = a.at.parse().with_context(|| format!("attachment {i}"))?;
                Ok(Attachment { arc: a.arc, host: a.host, at })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GluePlan { arcs, attach })
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

pub fn read_tree(path: &Path) -> Result<DiameterTree> {
    read_json::<TreeFile>(path)?.to_tree().with_context(|| format!("invalid tree in {}", path.display()))
}

pub fn read_plan(path: &Path) -> Result<GluePlan> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    read_json::<PlanFile>(path)?.to_plan(&base).with_context(|| format!("invalid plan in {}", path.display()))
}

fn parse_values(items: &[String]) -> Result<Vec<Rational>> {
    items.iter().enumerate().map(|(i, s)| parse_rational(s).with_context(|| format!("entry {i}"))).collect()
}

fn render(values: &[Rational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}

/// A JSON array of `2^K + 1` values on `V_K`.
pub fn read_function(path: &Path, resolution: u32) -> Result<SampledFunction<Rational>> {
    let items: Vec<String> = read_json(path)?;
    let values = parse_values(&items).with_context(|| format!("in {}", path.display()))?;
    SampledFunction::new(resolution, values).with_context(|| format!("in {}", path.display()))
}

pub fn function_json(f: &SampledFunction<Rational>) -> Vec<String> {
    render(f.values())
}

pub fn read_sequence(path: &Path, resolution: u32) -> Result<Vec<StepFunction<Rational>>> {
    let file: SequenceFile = read_json(path)?;
    if file.levels.len() != file.n_max as usize + 1 {
        bail!("{}: n_max is {} but {} levels are listed", path.display(), file.n_max, file.levels.len());
    }
    file.levels
        .iter()
        .enumerate()
        .map(|(n, level)| {
            let values = parse_values(level).with_context(|| format!("{}: level {n}", path.display()))?;
            StepFunction::new(resolution, values).with_context(|| format!("{}: level {n}", path.display()))
        })
        .collect()
}

pub fn sequence_file(seq: &[StepFunction<Rational>]) -> SequenceFile {
    SequenceFile { n_max: seq.len().saturating_sub(1) as u32, levels: seq.iter().map(|g| render(g.values())).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qctree_core::GeneratorKind;

    #[test]
    fn tree_file_round_trip() {
        let t = DiameterTree::generate(GeneratorKind::Snowflake { period: 2 }, 4).unwrap();
        let file = TreeFile::from_tree(&t);
        assert_eq!(file.halving.len(), 15);
        assert_eq!(file.to_tree().unwrap(), t);
    }

    #[test]
    fn plan_file_round_trip() {
        let plan = GluePlan::random(3, 4, 2).unwrap();
        let file = PlanFile::from_plan(&plan);
        let text = serde_json::to_string(&file).unwrap();
        let back: PlanFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_plan(Path::new(".")).unwrap(), plan);
    }

    #[test]
    fn bad_bits_are_rejected() {
        let file = TreeFile { resolution: 2, normalized: false, halving: "1x1".into() };
        assert!(file.to_tree().is_err());
    }
}
