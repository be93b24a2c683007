//! Deterministic language generation from JSON specs.
//!
//! A spec lists one slice per length; every slice kind is reproducible from
//! the spec plus a seed, and the resulting model's provenance string records
//! both. The `witnessed` kind builds the geometry the betting strategy is
//! designed to exploit: a planted low-member (the witness) whose wide
//! implicant guarantees that at least one boundary subcube, the designated
//! one, lies wholly inside the slice and multiplies its pot fully. Optional
//! noise terms add members the strategy never wagers on, pinning down that
//! its winnings come from the planted structure alone.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boolfn::{BitString, LanguageModel, Subcube, Term, TruthTable};
use crate::machines::NdQueryMachine;
use crate::width_bettor::partition_blocks;
use crate::{low_mask, Error, Result};

/// One slice of a generated language.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SliceSpec {
    /// No members at this length.
    Empty { n: u32 },
    /// Each string a member independently with the given density.
    Random {
        n: u32,
        density: f64,
        seed: Option<u64>,
    },
    /// A union of random terms, each fixing exactly `width` positions.
    Planted {
        n: u32,
        width: u32,
        terms: u32,
        seed: Option<u64>,
    },
    /// A low witness with a wide planted implicant around it, so that the
    /// blockwise boundary subcube of a designated block is wholly inside
    /// the slice. `final_block` moves the designated block to the last
    /// (possibly short) block; `noise_cubes` adds wide members the betting
    /// strategy never touches.
    Witnessed {
        n: u32,
        block: u32,
        free: u32,
        witness: u64,
        #[serde(default)]
        final_block: bool,
        #[serde(default)]
        noise_cubes: u32,
        seed: Option<u64>,
    },
    /// The accepted set of a machine, from a file or inline text.
    Machine {
        #[serde(default)]
        file: Option<String>,
        #[serde(default)]
        text: Option<String>,
        #[serde(default)]
        arity: Option<u32>,
    },
}

/// A full language spec: one entry per slice, lengths strictly distinct.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    #[serde(default)]
    pub seed: u64,
    pub slices: Vec<SliceSpec>,
}

impl GenSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

/// The construction details of one witnessed slice, for checking the
/// strategy's accounting against what was planted.
#[derive(Clone, Debug)]
pub struct WitnessedPlan {
    pub n: u32,
    pub witness: BitString,
    /// The boundary subcube guaranteed to lie wholly inside the slice.
    pub designated: Subcube,
    /// The wide implicant around the witness; its subcube is all members.
    pub planted: Term,
    pub noise: Vec<Term>,
}

/// A generated language along with any witnessed-slice plans, index-aligned
/// with the spec's slice list.
pub struct GenOutput {
    pub language: LanguageModel,
    pub plans: Vec<Option<WitnessedPlan>>,
}

fn slice_seed(spec_seed: u64, index: usize, own: Option<u64>) -> u64 {
    own.unwrap_or_else(|| spec_seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Builds the language a spec describes. Byte-identical output for equal
/// specs: every random choice flows from the per-slice seed.
pub fn generate(spec: &GenSpec) -> Result<GenOutput> {
    let mut language = LanguageModel::new(format!("gen:{}", spec.to_json()));
    let mut plans = vec![];
    let mut lengths = std::collections::BTreeSet::new();
    for (idx, slice) in spec.slices.iter().enumerate() {
        let seed = |own: Option<u64>| slice_seed(spec.seed, idx, own);
        let (table, plan) = match slice {
            SliceSpec::Empty { n } => (TruthTable::new_false(*n)?, None),
            SliceSpec::Random { n, density, seed: s } => {
                (gen_random(*n, *density, seed(*s))?, None)
            }
            SliceSpec::Planted {
                n,
                width,
                terms,
                seed: s,
            } => (gen_planted(*n, *width, *terms, seed(*s))?, None),
            SliceSpec::Witnessed {
                n,
                block,
                free,
                witness,
                final_block,
                noise_cubes,
                seed: s,
            } => {
                let (table, plan) = gen_witnessed(
                    *n,
                    *block,
                    *free,
                    *witness,
                    *final_block,
                    *noise_cubes,
                    seed(*s),
                )?;
                (table, Some(plan))
            }
            SliceSpec::Machine { file, text, arity } => {
                let source = match (file, text) {
                    (Some(path), None) => std::fs::read_to_string(path)?,
                    (None, Some(t)) => t.clone(),
                    _ => {
                        return Err(Error::InvalidConfig(
                            "machine slice needs exactly one of file or text".into(),
                        ))
                    }
                };
                let machine = match arity {
                    Some(a) => NdQueryMachine::from_text_with_arity(&source, *a)?,
                    None => NdQueryMachine::from_text(&source)?,
                };
                (machine.accepted_set()?, None)
            }
        };
        if !lengths.insert(table.arity()) {
            return Err(Error::InvalidConfig(format!(
                "two slices at length {}",
                table.arity()
            )));
        }
        language.insert_slice(table);
        plans.push(plan);
    }
    Ok(GenOutput { language, plans })
}

fn gen_random(n: u32, density: f64, seed: u64) -> Result<TruthTable> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidConfig(format!(
            "density {density} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Values are drawn in ascending string order, which pins the table for
    // a given seed.
    TruthTable::from_fn(n, |_| rng.gen_bool(density))
}

fn gen_planted(n: u32, width: u32, terms: u32, seed: u64) -> Result<TruthTable> {
    if width > n {
        return Err(Error::InvalidConfig(format!(
            "planted width {width} exceeds length {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions: Vec<u32> = (1..=n).collect();
    let mut table = TruthTable::new_false(n)?;
    for _ in 0..terms {
        let fixed: Vec<u32> = positions
            .choose_multiple(&mut rng, width as usize)
            .copied()
            .collect();
        let mask = position_mask(n, &fixed);
        let values = mask & rng.gen::<u64>();
        table.set_subcube(values, low_mask(n) & !mask);
    }
    Ok(table)
}

fn position_mask(n: u32, positions: &[u32]) -> u64 {
    positions.iter().fold(0u64, |m, &p| m | 1 << (n - p))
}

fn gen_witnessed(
    n: u32,
    block: u32,
    free: u32,
    witness: u64,
    final_block: bool,
    noise_cubes: u32,
    seed: u64,
) -> Result<(TruthTable, WitnessedPlan)> {
    let infeasible = |msg: String| Err(Error::InfeasibleGen(msg));
    if n > 24 {
        return infeasible(format!("witnessed slices materialize only up to length 24, got {n}"));
    }
    if free < 1 || free > block || block > n {
        return infeasible(format!("need 1 <= free <= block <= n, gotn {n} block {block} free {free}"));
    }
    if witness >= n as u64 {
        return infeasible(format!(
            "witness value {witness} not below {n}; the scout would never find it"
        ));
    }
    let blocks = partition_blocks(n, block);
    let nblocks = blocks.len();
    let planted_dim = nblocks as u32 * free;
    if planted_dim > n {
        return infeasible(format!(
            "planted dimension {planted_dim} exceeds length {n}"
        ));
    }
    let (final_lo, final_hi) = *blocks.last().expect("at least one block");
    let final_size = final_hi - final_lo + 1;
    // The witness's one-bits must sit inside the final block, so that every
    // other position is free to join the planted implicant and every planted
    // point stays above the witness.
    if final_size < 64 && witness >= 1u64 << final_size {
        return infeasible(format!(
            "witness {witness} has one-bits outside the final block (size {final_size})"
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Pick the designated block and its freed positions.
    let designated_idx = if final_block {
        nblocks - 1
    } else {
        if nblocks < 2 {
            return infeasible("no non-final block to designate; set final_block".into());
        }
        rng.gen_range(0..nblocks - 1)
    };
    let (dlo, dhi) = blocks[designated_idx];
    let designated_positions: Vec<u32> = (dlo..=dhi)
        .filter(|&p| witness & (1 << (n - p)) == 0)
        .collect();
    if designated_positions.len() < free as usize {
        return infeasible(format!(
            "designated block has only {} zero positions of the witness, need {free}",
            designated_positions.len()
        ));
    }
    let mut designated_free: Vec<u32> = designated_positions
        .choose_multiple(&mut rng, free as usize)
        .copied()
        .collect();
    designated_free.sort_unstable();

    // Spread the rest of the planted implicant's freed positions over the
    // other non-final blocks.
    let mut pool: Vec<u32> = blocks[..nblocks - 1]
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != designated_idx)
        .flat_map(|(_, &(lo, hi))| lo..=hi)
        .collect();
    let rest = planted_dim - free;
    if (pool.len() as u32) < rest {
        return infeasible(format!(
            "only {} spare non-final positions for {rest} more freed positions",
            pool.len()
        ));
    }
    pool.sort_unstable();
    let mut planted_free: Vec<u32> = pool
        .choose_multiple(&mut rng, rest as usize)
        .copied()
        .collect();
    planted_free.extend_from_slice(&designated_free);
    planted_free.sort_unstable();

    let planted_free_mask = position_mask(n, &planted_free);
    debug_assert_eq!(witness & planted_free_mask, 0);
    let planted_mask = low_mask(n) & !planted_free_mask;
    let planted = Term::new(n, planted_mask, witness & planted_mask);

    let mut table = TruthTable::new_false(n)?;
    table.set_subcube(witness, planted_free_mask);

    // Noise members: whole-block terms fixing free+1 ones inside one
    // non-final block. Their points carry more ones in that block than any
    // boundary subcube point of any scout-findable witness can, so the
    // strategy never wagers on them; and their high fixed one keeps them
    // above the witness.
    let mut noise = vec![];
    if noise_cubes > 0 {
        if free + 1 > block {
            return infeasible(format!(
                "noise needs free+1 <= block, got block {block} free {free}"
            ));
        }
        if nblocks < 2 {
            return infeasible("noise needs a non-final block".into());
        }
        if block > n - planted_dim {
            return infeasible(format!(
                "noise terms fix {block} positions, widening the slice past {}",
                n - planted_dim
            ));
        }
        if final_size < 64 && n as u64 > 1u64 << final_size {
            return infeasible(format!(
                "scout candidates reach one-bits outside the final block (size {final_size}), \
                 so noise cannot stay off the betting targets"
            ));
        }
        for _ in 0..noise_cubes {
            let (lo, hi) = blocks[rng.gen_range(0..nblocks - 1)];
            let block_positions: Vec<u32> = (lo..=hi).collect();
            let mut ones: Vec<u32> = block_positions
                .choose_multiple(&mut rng, free as usize + 1)
                .copied()
                .collect();
            ones.sort_unstable();
            let mask = position_mask(n, &block_positions);
            let values = position_mask(n, &ones);
            let term = Term::new(n, mask, values);
            table.set_subcube(values, low_mask(n) & !mask);
            noise.push(term);
        }
    }

    let plan = WitnessedPlan {
        n,
        witness: BitString::new(n, witness).expect("witness in range"),
        designated: Subcube::new(
            n,
            low_mask(n) & !position_mask(n, &designated_free),
            witness & !position_mask(n, &designated_free),
        ),
        planted,
        noise,
    };
    Ok((table, plan))
}
