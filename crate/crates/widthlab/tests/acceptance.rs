//! End-to-end acceptance checks. Each test prints one PASS/FAIL line
//! (run with --nocapture to see them stream) and fails hard on FAIL.

use std::collections::BTreeSet;

use num::rational::BigRational;
use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use widthlab::boolfn::{BitString, TruthTable};
use widthlab::harness::{run_experiment, write_outputs, ExperimentConfig, LangSource, StrategySpec};
use widthlab::langgen::{GenSpec, SliceSpec};
use widthlab::machines::random_machine;
use widthlab::martingale::{sample_prefixes, verify_averaging};
use widthlab::width::{decision_tree_depth, dnf_width, width_at_most_by_cover};
use widthlab::width_bettor::{
    bet_set, bet_set_bound, boundary_subcube_count, boundary_subcubes, CubeFate,
    SliceOutcome, WidthBettor,
};

fn conclude(num: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("{verdict} criterion {num:02} ({name}): {detail}");
    assert!(pass, "criterion {num:02} ({name}): {detail}");
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn preset_spec(preset: &str) -> StrategySpec {
    StrategySpec {
        preset: Some(preset.into()),
        ..Default::default()
    }
}

fn gen_config(seed: u64, slices: Vec<SliceSpec>, preset: &str, max_length: u32) -> ExperimentConfig {
    ExperimentConfig {
        language: LangSource::Gen {
            spec: GenSpec { seed, slices },
        },
        strategy: preset_spec(preset),
        max_length,
    }
}

#[test]
fn criterion_01_exact_averaging_on_sampled_prefixes() {
    let prefixes = sample_prefixes(1000, 4, 12, 42);
    let mut checked = 0;
    for preset in ["loglog", "desk"] {
        let params = preset_spec(preset).resolve().expect("preset resolves");
        let mut bettor = WidthBettor::new(params).expect("valid params");
        let violation = verify_averaging(&mut bettor, &prefixes).expect("replays succeed");
        if let Some(v) = violation {
            conclude(
                1,
                "exact averaging",
                false,
                &format!(
                    "preset {preset} violates averaging at prefix {}: parent {} children {} / {}",
                    v.prefix_index, v.d_parent, v.d_zero, v.d_one
                ),
            );
        }
        checked += prefixes.len();
    }
    conclude(
        1,
        "exact averaging",
        true,
        &format!("d(p) = (d(p0)+d(p1))/2 exactly on {checked} replayed prefixes across both presets"),
    );
}

#[test]
fn criterion_02_empty_language_scout_gains() {
    let mut details = vec![];
    let mut pass = true;
    for preset in ["loglog", "desk"] {
        let exp = run_experiment(&gen_config(1, vec![], preset, 12)).expect("run succeeds");
        let summaries = exp.trace.length_summaries();
        for n in [4u32, 8, 12] {
            let want = ratio((1i64 << n) - 1, (n as i64) * (n as i64));
            let got = &summaries.iter().find(|s| s.length == n).expect("length ran").gain;
            pass &= *got == want;
            if *got != want {
                details.push(format!("{preset} n={n}: gain {got} want {want}"));
            }
        }
    }
    let detail = if pass {
        "every active length n in {4, 8, 12} gains exactly (2^n - 1)/n^2 on both presets".into()
    } else {
        details.join("; ")
    };
    conclude(2, "empty-language sweep", pass, &detail);
}

#[test]
fn criterion_03_planted_witness_pays_in_full() {
    let mut pass = true;
    let mut details = vec![];
    for (i, witness) in [0u64, 1, 3, 7].into_iter().enumerate() {
        let slices = vec![SliceSpec::Witnessed {
            n: 16,
            block: 4,
            free: 2,
            witness,
            final_block: false,
            noise_cubes: 1,
            seed: None,
        }];
        let exp = run_experiment(&gen_config(100 + i as u64, slices, "desk", 16))
            .expect("run succeeds");
        let plan = exp.plans[0].as_ref().expect("witnessed slice planned");
        let record = exp.records.iter().find(|r| r.n == 16).expect("length 16 ran");
        let found = matches!(&record.outcome, SliceOutcome::Witness(w) if w.value() == witness);
        let designated = record
            .cubes
            .iter()
            .find(|c| c.cube == plan.designated)
            .expect("designated subcube deployed");
        let paid = designated.fate == CubeFate::Survived
            && designated.bets_won == 3
            && designated.pot_final == designated.pot_initial.times_pow2(3);
        let row = exp.report.lengths.iter().find(|r| r.n == 16).expect("report row");
        let reconciled = row.matched && exp.report.all_matched;
        pass &= found && paid && reconciled;
        if !(found && paid && reconciled) {
            details.push(format!(
                "witness {witness}: found={found} fate={} won={} reconciled={reconciled}",
                designated.fate, designated.bets_won
            ));
        }
    }
    let detail = if pass {
        "designated subcube survives with pot * 8 exactly and gains reconcile, witnesses {0, 1, 3, 7}"
            .into()
    } else {
        details.join("; ")
    };
    conclude(3, "planted witness payout", pass, &detail);
}

#[test]
fn criterion_04_boundary_subcube_counts() {
    let frozen = [(16u64, 4u32, 2u32, 24u128), (64, 6, 3, 204), (256, 8, 6, 896)];
    let mut pass = true;
    let mut details = vec![];
    for (n, block, free, want) in frozen {
        let got = boundary_subcube_count(n, block, free);
        pass &= got == want;
        if got != want {
            details.push(format!("count({n},{block},{free}) = {got}, want {want}"));
        }
    }
    // Cross-check the closed form against materialized subcube lists.
    let mut crosschecked = 0;
    for (n, block, free) in [(16u32, 4u32, 2u32), (24, 4, 2), (64, 6, 3), (40, 5, 3), (9, 3, 2)] {
        for w in [0u64, 1, 3, (1u64 << (n - 1)) | 1, u64::MAX >> (64 - n)] {
            let bits = BitString::new(n, w).expect("in range");
            let got = boundary_subcubes(&bits, block, free).len() as u128;
            let want = boundary_subcube_count(n as u64, block, free);
            pass &= got == want;
            if got != want {
                details.push(format!("enumeration at n={n} w={w}: {got} vs {want}"));
            }
            crosschecked += 1;
        }
    }
    let detail = if pass {
        format!("counts 24/204/896 frozen and the closed form matches {crosschecked} enumerations")
    } else {
        details.join("; ")
    };
    conclude(4, "boundary subcube counts", pass, &detail);
}

#[test]
fn criterion_05_width_agrees_with_cover_oracle() {
    let mut checked = 0u64;
    // Exhaustive at arity 4.
    for table in 0..=u16::MAX {
        let f = TruthTable::from_fn(4, |v| (table >> v) & 1 == 1).expect("arity 4");
        let width = dnf_width(&f).width();
        for w in 0..=4 {
            let cover = width_at_most_by_cover(&f, w);
            if cover != (width <= w) {
                conclude(
                    5,
                    "width vs cover oracle",
                    false,
                    &format!("arity-4 table {table:#06x}: cover({w})={cover} but width={width}"),
                );
            }
            checked += 1;
        }
    }
    // Randomized at arities 5 through 10, mixed densities.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for arity in 5u32..=10 {
        for i in 0..200 {
            let density = [0.05, 0.25, 0.5, 0.75, 0.95][i % 5];
            let f = TruthTable::from_fn(arity, |_| rng.gen_bool(density)).expect("small arity");
            let width = dnf_width(&f).width();
            for w in 0..=arity {
                let cover = width_at_most_by_cover(&f, w);
                if cover != (width <= w) {
                    conclude(
                        5,
                        "width vs cover oracle",
                        false,
                        &format!("arity {arity} sample {i}: cover({w})={cover} but width={width}"),
                    );
                }
                checked += 1;
            }
        }
    }
    conclude(
        5,
        "width vs cover oracle",
        true,
        &format!("zero disagreements across {checked} (function, w) pairs, arity 4 exhaustive plus 1200 random"),
    );
}

#[test]
fn criterion_06_machines_respect_their_query_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut widest = 0;
    for i in 0..500u64 {
        let arity = rng.gen_range(2..=10);
        let bound = rng.gen_range(1..=arity);
        let budget = rng.gen_range(10..=60);
        let m = random_machine(arity, bound, budget, 6000 + i).expect("generator succeeds");
        if m.query_bound() > bound {
            conclude(
                6,
                "machine dnf equivalence",
                false,
                &format!(
                    "machine {i} (arity {arity}): inferred bound {} exceeds requested {bound}",
                    m.query_bound()
                ),
            );
        }
        let set = m.accepted_set().expect("arity under the table cap");
        let dnf = m.to_dnf();
        if dnf.to_table().expect("same arity") != set {
            conclude(
                6,
                "machine dnf equivalence",
                false,
                &format!("machine {i} (arity {arity}): DNF table differs from accepted set"),
            );
        }
        let width = dnf_width(&set).width();
        if width > m.query_bound() {
            conclude(
                6,
                "machine dnf equivalence",
                false,
                &format!(
                    "machine {i} (arity {arity}): intrinsic width {width} exceeds query bound {}",
                    m.query_bound()
                ),
            );
        }
        widest = widest.max(width);
    }
    conclude(
        6,
        "machine dnf equivalence",
        true,
        &format!("500 machines: DNF tabulates to the accepted set and dnf width <= query bound (max width seen {widest})"),
    );
}

#[test]
fn criterion_07_width_bounded_by_depth() {
    let mut checked = 0u64;
    for arity in 1u32..=4 {
        for table in 0u64..(1 << (1u64 << arity)) {
            let f = TruthTable::from_fn(arity, |v| (table >> v) & 1 == 1).expect("small arity");
            let width = dnf_width(&f).width();
            let depth = decision_tree_depth(&f).expect("small arity");
            if width > depth {
                conclude(
                    7,
                    "width bounded by depth",
                    false,
                    &format!("arity-{arity} table {table:#x}: width {width} > depth {depth}"),
                );
            }
            checked += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for arity in 5u32..=8 {
        for i in 0..200 {
            let density = [0.1, 0.3, 0.5, 0.7, 0.9][i % 5];
            let f = TruthTable::from_fn(arity, |_| rng.gen_bool(density)).expect("small arity");
            let width = dnf_width(&f).width();
            let depth = decision_tree_depth(&f).expect("under the depth cap");
            if width > depth {
                conclude(
                    7,
                    "width bounded by depth",
                    false,
                    &format!("arity {arity} sample {i}: width {width} > depth {depth}"),
                );
            }
            checked += 1;
        }
    }
    conclude(
        7,
        "width bounded by depth",
        true,
        &format!("dnf width <= decision tree depth on {checked} functions, arity 4 exhaustive plus 800 random"),
    );
}

/// Rebuilds the betting target set from scratch: the first n strings, plus
/// every point above each witness candidate inside each block-boundary
/// subcube. Written independently of the library's enumeration.
fn local_bet_set(n: u32, block: u32, free: u32) -> BTreeSet<u128> {
    let seg_start = (1u128 << n) - 1;
    let mut out: BTreeSet<u128> = (0..n as u128).map(|v| seg_start + v).collect();
    for w in 0..n as u64 {
        let mut lo = 1u32;
        while lo <= n {
            let hi = (lo + block - 1).min(n);
            let width = hi - lo + 1;
            if width >= free {
                // Enumerate the {free}-subsets of this block's positions
                // as bitmasks over [0, width).
                for subset in 0u32..(1 << width) {
                    if subset.count_ones() != free {
                        continue;
                    }
                    let mut free_mask = 0u64;
                    for j in 0..width {
                        if subset & (1 << j) != 0 {
                            let position = lo + j;
                            free_mask |= 1 << (n - position);
                        }
                    }
                    let base = w & !free_mask;
                    let mut sub = free_mask;
                    loop {
                        let point = base | sub;
                        if point > w {
                            out.insert(seg_start + point as u128);
                        }
                        if sub == 0 {
                            break;
                        }
                        sub = (sub - 1) & free_mask;
                    }
                }
            }
            lo = hi + 1;
        }
    }
    out
}

#[test]
fn criterion_08_bet_set_matches_and_stays_polynomial() {
    let mut compared = 0;
    for preset in ["loglog", "desk"] {
        let params = preset_spec(preset).resolve().expect("preset resolves");
        for n in 1..=64u32 {
            let got = bet_set(n, &params);
            let want = if params.active(n) {
                local_bet_set(n, params.block_size(n), params.free_bits(n))
            } else {
                BTreeSet::new()
            };
            if got != want {
                conclude(
                    8,
                    "bet set enumeration and bound",
                    false,
                    &format!(
                        "preset {preset} length {n}: {} targets vs {} rebuilt independently",
                        got.len(),
                        want.len()
                    ),
                );
            }
            if got.len() as u128 > bet_set_bound(n, &params) {
                conclude(
                    8,
                    "bet set enumeration and bound",
                    false,
                    &format!(
                        "preset {preset} length {n}: {} targets exceed the closed form {}",
                        got.len(),
                        bet_set_bound(n, &params)
                    ),
                );
            }
            compared += 1;
        }
        // The closed-form target bound stays under 4 n^2 b^4 at every
        // active length up to 2^16.
        for n in 1..=(1u32 << 16) {
            if !params.active(n) {
                continue;
            }
            let b = params.block_size(n) as u128;
            let cap = 4 * (n as u128) * (n as u128) * b * b * b * b;
            let bound = bet_set_bound(n, &params);
            if bound > cap {
                conclude(
                    8,
                    "bet set enumeration and bound",
                    false,
                    &format!("preset {preset} length {n}: bound {bound} exceeds 4 n^2 b^4 = {cap}"),
                );
            }
        }
    }
    conclude(
        8,
        "bet set enumeration and bound",
        true,
        &format!("{compared} target sets match an independent rebuild; bounds stay under 4 n^2 b^4 through 2^16"),
    );
}

#[test]
fn criterion_09_random_languages_stay_modest() {
    let mut exceeded = 0;
    let threshold = BigRational::from_integer(400.into());
    let params = preset_spec("loglog").resolve().expect("preset resolves");
    let targets: Vec<BTreeSet<u128>> = (0..=12u32)
        .map(|n| if n == 0 { BTreeSet::new() } else { bet_set(n, &params) })
        .collect();
    let floor = BigRational::from_integer(4.into()) - params.budget(12).ratio();
    for i in 0..100u64 {
        let slices = (1..=12u32)
            .map(|n| SliceSpec::Random {
                n,
                density: 0.5,
                seed: None,
            })
            .collect();
        let exp = run_experiment(&gen_config(9000 + i, slices, "loglog", 12)).expect("run succeeds");
        assert!(exp.report.all_matched, "language {i} failed reconciliation");
        for step in &exp.trace.steps {
            if step.bet.is_some() {
                assert!(
                    targets[step.length as usize].contains(&step.index),
                    "language {i}: wagered on index {} outside the length-{} target set",
                    step.index,
                    step.length
                );
            }
        }
        assert!(
            exp.trace.min_capital().ratio() >= &floor,
            "language {i}: capital fell under the worst-case floor"
        );
        if exp.trace.max_capital().ratio() > &threshold {
            exceeded += 1;
        }
    }
    conclude(
        9,
        "random languages stay modest",
        exceeded <= 5,
        &format!(
            "{exceeded}/100 density-1/2 languages ever push capital above 400 (allowed: 5); \
             every wager stayed inside the precomputed target sets"
        ),
    );
}

#[test]
fn criterion_10_byte_identical_reruns() {
    let dir = tempfile::tempdir().expect("tempdir");
    let slices = vec![
        SliceSpec::Witnessed {
            n: 12,
            block: 4,
            free: 2,
            witness: 1,
            final_block: false,
            noise_cubes: 0,
            seed: None,
        },
        SliceSpec::Random {
            n: 8,
            density: 0.4,
            seed: None,
        },
        SliceSpec::Planted {
            n: 6,
            width: 2,
            terms: 2,
            seed: None,
        },
    ];
    let config = gen_config(10, slices, "loglog", 12);
    let mut rounds = vec![];
    for round in 0..2 {
        let exp = run_experiment(&config).expect("run succeeds");
        let report = dir.path().join(format!("report{round}.json"));
        let trace = dir.path().join(format!("trace{round}.csv"));
        let lengths = dir.path().join(format!("lengths{round}.csv"));
        write_outputs(&exp, Some(&report), Some(&trace), Some(&lengths)).expect("writes succeed");
        rounds.push((
            std::fs::read(report).expect("report bytes"),
            std::fs::read(trace).expect("trace bytes"),
            std::fs::read(lengths).expect("lengths bytes"),
        ));
    }
    let pass = rounds[0] == rounds[1];
    conclude(
        10,
        "byte-identical reruns",
        pass,
        if pass {
            "report.json, trace.csv, and lengths.csv are byte-identical across two runs"
        } else {
            "rerun artifacts differ"
        },
    );
}
