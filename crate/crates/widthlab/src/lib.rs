//! Exact combinatorics of DNF width, plus fair-odds betting strategies that
//! wager on the characteristic sequence of a language, length by length.
//!
//! The crate has three layers:
//!
//! * [`boolfn`]: bit strings under the length-then-lex enumeration, truth
//!   tables, terms, subcubes, DNF formulas, and per-length language models,
//!   together with their text formats.
//! * [`width`] and [`machines`]: exact width oracles (per-point maximal
//!   monochromatic subcubes, cover-based cross-checks, decision-tree depth)
//!   and query-bounded nondeterministic machines that witness small width.
//! * [`martingale`], [`width_bettor`], [`langgen`], [`harness`]: an exact
//!   rational betting framework (no floats anywhere in capital accounting),
//!   a strategy that exploits small-width languages, seeded language
//!   generators, and a deterministic experiment harness with CSV/JSON output.
//!
//! All randomness is driven by explicit seeds; identical inputs produce
//! byte-identical outputs.

pub mod boolfn;
pub mod harness;
pub mod langgen;
pub mod machines;
pub mod martingale;
pub mod width;
pub mod width_bettor;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by fallible operations. Contract violations (mismatched
/// arities, desynchronized prefixes) panic instead; see the per-module docs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("arity {0} exceeds the materialized-table limit of {max}", max = boolfn::MAX_TABLE_ARITY)]
    ArityTooLarge(u32),

    #[error("bit-string length {0} exceeds the representable limit of {max}", max = boolfn::MAX_BITSTRING_LEN)]
    LengthTooLarge(u32),

    #[error("decision-tree depth supports arity <= {max}, got {0}", max = width::MAX_DEPTH_ARITY)]
    DepthArityTooLarge(u32),

    #[error("value {0} is not a true point of the function")]
    NotATruePoint(u64),

    #[error("stake {stake} exceeds current capital {capital}")]
    StakeExceedsCapital { stake: String, capital: String },

    #[error("capital arithmetic went negative: {0}")]
    NegativeCapital(String),

    #[error("machine accepted-set arity {0} exceeds the limit of {max}", max = machines::MAX_MACHINE_TABLE_ARITY)]
    MachineArityTooLarge(u32),

    #[error("malformed machine: {0}")]
    MalformedMachine(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("infeasible generator parameters: {0}")]
    InfeasibleGen(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Mask of the `n` low-order bits, valid for `0 <= n <= 64`.
pub(crate) fn low_mask(n: u32) -> u64 {
    assert!(n <= 64, "mask width {n} out of range");
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Masks of `weight`-bit subsets of the `width` low-order bits, in increasing
/// numeric order (Gosper's hack). The numeric order of subset masks is the
/// colexicographic combination order; it is fixed so that search witnesses
/// are reproducible.
pub(crate) fn masks_of_weight(width: u32, weight: u32) -> impl Iterator<Item = u64> {
    assert!(width <= 63, "subset enumeration capped at 63 bits");
    let limit = 1u64 << width;
    let mut next = if weight > width {
        None
    } else {
        Some(low_mask(weight))
    };
    std::iter::from_fn(move || {
        let cur = next?;
        if cur >= limit {
            next = None;
            return None;
        }
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack: smallest weight-preserving successor.
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some(r | (((cur ^ r) >> 2) / c))
        };
        Some(cur)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_mask_edges() {
        assert_eq!(low_mask(0), 0);
        assert_eq!(low_mask(1), 1);
        assert_eq!(low_mask(63), u64::MAX >> 1);
        assert_eq!(low_mask(64), u64::MAX);
    }

    #[test]
    fn masks_of_weight_matches_binomials() {
        // Cross-check counts against a Pascal triangle and order against sortedness.
        let mut pascal = vec![vec![1u64]];
        for n in 1..=12usize {
            let prev = &pascal[n - 1];
            let mut row = vec![1u64];
            for k in 1..n {
                row.push(prev[k - 1] + prev[k]);
            }
            row.push(1);
            pascal.push(row);
        }
        for n in 0..=12u32 {
            for k in 0..=n {
                let masks: Vec<u64> = masks_of_weight(n, k).collect();
                assert_eq!(masks.len() as u64, pascal[n as usize][k as usize]);
                assert!(masks.windows(2).all(|w| w[0] < w[1]));
                assert!(masks.iter().all(|m| m.count_ones() == k));
            }
        }
        assert_eq!(masks_of_weight(4, 5).count(), 0);
        assert_eq!(masks_of_weight(0, 0).collect::<Vec<_>>(), vec![0]);
    }
}
