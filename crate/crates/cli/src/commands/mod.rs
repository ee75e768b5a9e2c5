//! One module per command group. Each returns a [`Report`](crate::Report);
//! errors are input errors.

use std::path::Path;

use anyhow::{Context, Result};
use qctree_core::numeric::{format_rational, parse_rational};
use qctree_core::{DiameterTree, Dyadic, Rational};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::formats::read_tree;
use crate::Common;

pub mod arc;
pub mod filtration;
pub mod glue;
pub mod l1iso;
pub mod mart;
pub mod tree;

/// The tree in `path` and the working resolution: `--resolution` if given,
/// otherwise the tree's own.
pub(crate) fn load_tree(common: &Common, path: &Path) -> Result<(DiameterTree, u32)> {
    let tree = read_tree(path)?;
    let k = common.resolution.unwrap_or(tree.resolution());
    Ok((tree, k))
}

pub(crate) fn rat(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

pub(crate) fn dy(d: &Dyadic) -> Value {
    Value::String(d.to_string())
}

pub(crate) fn parse_point(s: &str) -> Result<Dyadic> {
    s.parse().with_context(|| format!("`{s}` is not a dyadic point"))
}

pub(crate) fn parse_list(s: &str) -> Result<Vec<Rational>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_rational(t).with_context(|| format!("bad list entry `{t}`")))
        .collect()
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn max_rat(items: impl IntoIterator<Item = Rational>) -> Rational {
    items.into_iter().fold(Rational::from_integer(0.into()), |m, x| if x > m { x } else { m })
}
