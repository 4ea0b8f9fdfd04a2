//! Logarithmic SOS1 encoding.
//!
//! Entries are indexed `0..n` and padded with zeros up to the next power of
//! two. Selector bit `k` is tied to bit `k` of the entry index: entries whose
//! index has the bit set sum to at most `zeta_k`, the others to at most
//! `1 - zeta_k`. With `sum = 1` the only feasible points for an integral
//! selector are unit vectors.

use super::model::{LinExpr, MilpModel, Sense, VarId, VarRole};
use super::EncodeError;
use crate::formula::log2_ceil;

#[derive(Debug, Clone, PartialEq)]
pub struct Sos1Block {
    /// Selector binaries, least significant bit first.
    pub selectors: Vec<VarId>,
    /// Length after padding (a power of two).
    pub padded_len: usize,
}

/// Constrains `lambda` (each expected in `[0, 1]`) to be SOS1 using
/// `ceil(log2 n)` binaries named `zeta_<owner>_<k>`.
pub fn encode_sos1_log(model: &mut MilpModel, lambda: &[LinExpr], owner: usize) -> Result<Sos1Block, EncodeError> {
    let n = lambda.len();
    if n == 0 {
        return Err(EncodeError::EmptySos1);
    }
    let bits = log2_ceil(n);
    let padded_len = 1usize << bits;

    let mut sum = LinExpr::default();
    for e in lambda {
        sum.constant += e.constant;
        sum.terms.extend_from_slice(&e.terms);
    }
    model.add_expr_constraint(format!("sos_{owner}_sum"), sum, Sense::Eq, 1.0);

    let mut selectors = Vec::with_capacity(bits);
    for k in 0..bits {
        let zeta = model.add_binary(format!("zeta_{owner}_{k}"), VarRole::Sos1Selector { node: owner, k });
        selectors.push(zeta);
        let mut ones = LinExpr::default();
        let mut zeros = LinExpr::default();
        // padding entries (index >= n) are identically zero
        for (j, e) in lambda.iter().enumerate() {
            let side = if (j >> k) & 1 == 1 { &mut ones } else { &mut zeros };
            side.constant += e.constant;
            side.terms.extend_from_slice(&e.terms);
        }
        ones.terms.push((zeta, -1.0));
        model.add_expr_constraint(format!("sos_{owner}_{k}_one"), ones, Sense::Le, 0.0);
        zeros.terms.push((zeta, 1.0));
        model.add_expr_constraint(format!("sos_{owner}_{k}_zero"), zeros, Sense::Le, 1.0);
    }
    Ok(Sos1Block {
        selectors,
        padded_len,
    })
}
