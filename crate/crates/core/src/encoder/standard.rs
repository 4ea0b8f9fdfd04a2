//! Baseline encoding with one binary per predicate occurrence.

use super::{encode_skeleton, EncodeError, Encoded, EncoderConfig, EncodingStats, OrNodeStats, Sense, VarKind};
use crate::formula::{Combination, StlTree};
use crate::system::LinearSystem;

/// Leaves are binary, internal nodes continuous; an Or-node is bounded by the
/// sum of its children.
pub fn encode_standard(
    tree: &StlTree,
    sys: &LinearSystem,
    x0: &[f64],
    horizon: usize,
    cfg: &EncoderConfig,
) -> Result<Encoded, EncodeError> {
    let (mut model, vars, resolved, kids) = encode_skeleton(tree, sys, x0, horizon, cfg, VarKind::Binary)?;
    let mut or_nodes = Vec::new();
    for (id, n) in tree.preorder().into_iter().enumerate() {
        if n.combination() != Some(Combination::Or) {
            continue;
        }
        let mut terms = vec![(vars.sat[id], 1.0)];
        terms.extend(kids[id].iter().map(|&c| (vars.sat[c], -1.0)));
        model.add_constraint(format!("or_{id}"), terms, Sense::Le, 0.0);
        or_nodes.push(OrNodeStats {
            node: id,
            children: kids[id].len(),
            binaries: 0,
        });
    }
    let stats = EncodingStats::from_model(cfg.encoding, &model, tree, or_nodes);
    Ok((model, vars, stats, resolved))
}
