//! Encoding with continuous satisfaction variables and log-SOS1 disjunctions.

use super::{encode_skeleton, encode_sos1_log, EncodeError, Encoded, EncoderConfig, EncodingStats, LinExpr, OrNodeStats, VarKind};
use crate::formula::{Combination, StlTree};
use crate::system::LinearSystem;

/// Every Or-node with children `z_1..z_N` and own variable `z` gets an SOS1
/// block on `[1 - z, z_1, .., z_N]`, i.e. `ceil(log2(N + 1))` binaries.
pub fn encode_proposed(
    tree: &StlTree,
    sys: &LinearSystem,
    x0: &[f64],
    horizon: usize,
    cfg: &EncoderConfig,
) -> Result<Encoded, EncodeError> {
    let (mut model, vars, resolved, kids) = encode_skeleton(tree, sys, x0, horizon, cfg, VarKind::Continuous)?;
    let mut or_nodes = Vec::new();
    for (id, n) in tree.preorder().into_iter().enumerate() {
        if n.combination() != Some(Combination::Or) {
            continue;
        }
        let mut lambda = Vec::with_capacity(kids[id].len() + 1);
        lambda.push(LinExpr {
            constant: 1.0,
            terms: vec![(vars.sat[id], -1.0)],
        });
        lambda.extend(kids[id].iter().map(|&c| LinExpr::from(vars.sat[c])));
        let block = encode_sos1_log(&mut model, &lambda, id)?;
        or_nodes.push(OrNodeStats {
            node: id,
            children: kids[id].len(),
            binaries: block.selectors.len(),
        });
    }
    let stats = EncodingStats::from_model(cfg.encoding, &model, tree, or_nodes);
    Ok((model, vars, stats, resolved))
}
