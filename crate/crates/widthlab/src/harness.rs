//! Experiment orchestration: resolve a config, run the strategy over a
//! language, and reconcile observed capital movements against an
//! independently computed prediction.
//!
//! The predictor never consults the strategy's bookkeeping. It rederives
//! each segment's net gain from the language alone: where the first member
//! sits, which boundary subcubes die before staking, which lose their pot,
//! and which double through every point above the witness. Requiring the
//! two sides to agree exactly, as rationals, is the harness's core check.

use std::path::Path;

use num::rational::BigRational;
use num::Zero;
use serde::{Deserialize, Serialize};

use crate::boolfn::{BitString, LanguageModel, TruthTable};
use crate::langgen::{self, GenSpec, WitnessedPlan};
use crate::martingale::{format_ratio, run, sample_prefixes, verify_averaging, Trace};
use crate::width_bettor::{
    bet_set, bet_set_bound, boundary_subcubes, BettorParams, CubeFate, LengthRecord, SliceOutcome,
    StakeRule, WidthBettor, WidthSchedule,
};
use crate::{Error, Result};

/// Longest run a config may request; keeps full-enumeration runs tractable.
pub const MAX_RUN_LENGTH: u32 = 20;

/// Where the language under test comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum LangSource {
    /// A language model text file.
    File { path: String },
    /// A generation spec evaluated in place.
    Gen {
        #[serde(flatten)]
        spec: GenSpec,
    },
}

/// Strategy selection: a named preset, optionally overridden field by field.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    /// "loglog" (default) or "desk".
    #[serde(default)]
    pub preset: Option<String>,
    /// Fixed block size; requires `free` as well.
    #[serde(default)]
    pub block: Option<u32>,
    /// Fixed freed-position count; requires `block` as well.
    #[serde(default)]
    pub free: Option<u32>,
    /// Constant stake per pool as `num/den`, replacing 1/n^2.
    #[serde(default)]
    pub stake: Option<String>,
    /// Initial capital as `num/den`, replacing 4.
    #[serde(default)]
    pub initial: Option<String>,
}

impl StrategySpec {
    pub fn resolve(&self) -> Result<BettorParams> {
        let mut params = match self.preset.as_deref() {
            None | Some("loglog") => BettorParams::loglog(),
            Some("desk") => BettorParams::desk(),
            Some(other) => {
                return Err(Error::InvalidConfig(format!(
                    "unknown preset {other:?}, expected loglog or desk"
                )))
            }
        };
        match (self.block, self.free) {
            (Some(block), Some(free)) => {
                params.schedule = WidthSchedule::Fixed { block, free };
            }
            (None, None) => {}
            _ => {
                return Err(Error::InvalidConfig(
                    "block and free must be given together".into(),
                ))
            }
        }
        if let Some(stake) = &self.stake {
            params.stake = StakeRule::Constant(stake.parse()?);
        }
        if let Some(initial) = &self.initial {
            params.initial = initial.parse()?;
        }
        params.validate()?;
        Ok(params)
    }
}

/// A full experiment: language, strategy, and how far to run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub language: LangSource,
    #[serde(default)]
    pub strategy: StrategySpec,
    pub max_length: u32,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One boundary subcube's settled accounting, rendered for the report.
#[derive(Clone, Debug, Serialize)]
pub struct CubeReport {
    pub term: String,
    pub fate: String,
    pub bets_won: u32,
    pub pot_initial: String,
    pub pot_final: String,
    /// Survived with a doubling for every point above the witness.
    pub full_payout: bool,
    /// Survived yet missed a doubling it had points for. The update rule
    /// makes this impossible; it is reported so a violation would surface.
    pub short_payout: bool,
}

/// One length's observed row next to its prediction.
#[derive(Clone, Debug, Serialize)]
pub struct LengthReport {
    pub n: u32,
    pub active: bool,
    pub outcome: String,
    pub witness: Option<String>,
    pub stake: String,
    pub boundary_subcubes: u64,
    pub capital_start: String,
    pub capital_end: String,
    pub capital_max: String,
    pub observed_gain: String,
    pub predicted_gain: String,
    pub matched: bool,
    pub cubes: Vec<CubeReport>,
}

/// The reconciled outcome of a run.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub provenance: String,
    pub strategy: String,
    pub max_length: u32,
    pub initial_capital: String,
    pub final_capital: String,
    pub max_capital: String,
    pub all_matched: bool,
    pub lengths: Vec<LengthReport>,
}

/// Everything a finished run produces.
pub struct Experiment {
    pub language: LanguageModel,
    pub params: BettorParams,
    pub trace: Trace,
    pub records: Vec<LengthRecord>,
    pub report: Report,
    /// Construction plans for witnessed slices, when the language was
    /// generated; index-aligned with the gen spec's slices.
    pub plans: Vec<Option<WitnessedPlan>>,
}

fn describe(params: &BettorParams) -> String {
    let schedule = match params.schedule {
        WidthSchedule::LogLog => "loglog".to_string(),
        WidthSchedule::Fixed { block, free } => format!("fixed(block={block},free={free})"),
    };
    let stake = match &params.stake {
        StakeRule::InverseSquare => "inverse-square".to_string(),
        StakeRule::Constant(c) => format!("constant({c})"),
    };
    format!("schedule={schedule} stake={stake} initial={}", params.initial)
}

/// The independently predicted net gain over the length-n segment, with the
/// witness the scout will find, if any. Pure set logic over the language.
pub fn predict_segment(lang: &LanguageModel, params: &BettorParams, n: u32) -> PredictedSegment {
    if !params.active(n) {
        return PredictedSegment {
            gain: BigRational::zero(),
            witness: None,
        };
    }
    let alpha = params.stake_at(n).into_ratio();
    let first_member = lang.slice(n).and_then(|t| t.true_points().next());
    let scout_finds = first_member.filter(|&w| w < n as u64);
    let Some(w) = scout_finds else {
        // The scout wins all n of its wagers and the second pool stays put.
        let factor = BigRational::from_integer((1u64 << n).into());
        return PredictedSegment {
            gain: alpha.clone() * factor - alpha,
            witness: None,
        };
    };
    let witness = BitString::new(n, w).expect("member in range");
    let cubes = boundary_subcubes(&witness, params.block_size(n), params.free_bits(n));
    let share = &alpha / BigRational::from_integer(cubes.len().into());
    let mut gain = -alpha; // the scout's pool dies on the witness
    for cube in &cubes {
        if w & cube.free_mask() != 0 {
            // The subcube dips below the witness; the revealed non-member
            // there retires it before it ever stakes. No movement.
            continue;
        }
        let mut holed = false;
        let mut above = 0u32;
        for p in cube.points() {
            if p <= w {
                continue;
            }
            above += 1;
            if !lang.member_value(n, p) {
                holed = true;
                break;
            }
        }
        if holed {
            gain -= &share;
        } else {
            let factor = BigRational::from_integer((1u64 << above).into());
            gain += &share * factor - &share;
        }
    }
    PredictedSegment {
        gain,
        witness: Some(witness),
    }
}

/// What [`predict_segment`] concludes for one length.
pub struct PredictedSegment {
    pub gain: BigRational,
    pub witness: Option<BitString>,
}

/// Loads the language a source describes.
pub fn load_language(source: &LangSource) -> Result<(LanguageModel, Vec<Option<WitnessedPlan>>)> {
    match source {
        LangSource::File { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidConfig(format!("cannot read language file {path}: {e}")))?;
            let model = LanguageModel::from_text(&text, format!("file:{path}"))?;
            Ok((model, vec![]))
        }
        LangSource::Gen { spec } => {
            let out = langgen::generate(spec)?;
            Ok((out.language, out.plans))
        }
    }
}

/// Runs a config end to end: resolve the strategy, check its budget, run
/// the full enumeration, and reconcile every length against the predictor.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment> {
    if config.max_length > MAX_RUN_LENGTH {
        return Err(Error::InvalidConfig(format!(
            "max_length {} exceeds the run cap {MAX_RUN_LENGTH}",
            config.max_length
        )));
    }
    let params = config.strategy.resolve()?;
    let budget = params.budget(config.max_length);
    if budget.ratio() > params.initial.ratio() {
        return Err(Error::InvalidConfig(format!(
            "stakes need {budget} but initial capital is only {}",
            params.initial
        )));
    }
    let (language, plans) = load_language(&config.language)?;
    let mut strategy = WidthBettor::new(params.clone())?;
    let trace = run(&mut strategy, &language, config.max_length)?;
    let records = strategy.length_records();

    let summaries = trace.length_summaries();
    let mut lengths = vec![];
    let mut all_matched = true;
    for record in &records {
        let summary = summaries
            .iter()
            .find(|s| s.length == record.n)
            .expect("every traversed length is summarized");
        let predicted = predict_segment(&language, &params, record.n);
        let matched = predicted.gain == summary.gain;
        all_matched &= matched;
        let witness = match &record.outcome {
            SliceOutcome::Witness(w) => Some(w.to_string()),
            _ => None,
        };
        let cubes = record
            .cubes
            .iter()
            .map(|c| {
                let above = match &record.outcome {
                    SliceOutcome::Witness(w) => {
                        c.cube.points().filter(|&p| p > w.value()).count() as u32
                    }
                    _ => 0,
                };
                CubeReport {
                    term: c.cube.term().to_string(),
                    fate: c.fate.to_string(),
                    bets_won: c.bets_won,
                    pot_initial: c.pot_initial.to_string(),
                    pot_final: c.pot_final.to_string(),
                    full_payout: c.fate == CubeFate::Survived
                        && c.bets_won == (1u32 << params.free_bits(record.n)) - 1,
                    short_payout: c.fate == CubeFate::Survived && c.bets_won != above,
                }
            })
            .collect();
        lengths.push(LengthReport {
            n: record.n,
            active: record.active,
            outcome: record.outcome.kind().to_string(),
            witness,
            stake: record.stake.to_string(),
            boundary_subcubes: record.cubes.len() as u64,
            capital_start: summary.capital_start.to_string(),
            capital_end: summary.capital_end.to_string(),
            capital_max: summary.capital_max.to_string(),
            observed_gain: format_ratio(&summary.gain),
            predicted_gain: format_ratio(&predicted.gain),
            matched,
            cubes,
        });
    }

    let report = Report {
        provenance: language.provenance().to_string(),
        strategy: describe(&params),
        max_length: config.max_length,
        initial_capital: trace.initial.to_string(),
        final_capital: trace.final_capital().to_string(),
        max_capital: trace.max_capital().to_string(),
        all_matched,
        lengths,
    };
    Ok(Experiment {
        language,
        params,
        trace,
        records,
        report,
        plans,
    })
}

/// Writes the run's artifacts. Every file is a pure function of the config,
/// so rerunning a config reproduces each byte.
pub fn write_outputs(
    exp: &Experiment,
    report: Option<&Path>,
    trace: Option<&Path>,
    lengths: Option<&Path>,
) -> Result<()> {
    if let Some(path) = report {
        let mut text = serde_json::to_string_pretty(&exp.report)?;
        text.push('\n');
        std::fs::write(path, text)?;
    }
    if let Some(path) = trace {
        let mut buf = vec![];
        exp.trace.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    if let Some(path) = lengths {
        let mut buf = vec![];
        exp.trace.write_summary_csv(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    Ok(())
}

/// A quick standalone health check of the whole pipeline: a few canned
/// experiments with known-good expectations. Returns the printable result
/// table and whether every line passed.
pub fn self_check() -> (String, bool) {
    let mut lines = vec![];
    let mut all = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        all &= pass;
        lines.push(format!(
            "{} {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        ));
    };

    // Fair-odds averaging on sampled prefixes.
    {
        let mut s = WidthBettor::new(BettorParams::loglog()).expect("valid preset");
        let prefixes = sample_prefixes(50, 3, 7, 17);
        let violation = verify_averaging(&mut s, &prefixes).expect("replay succeeds");
        check(
            "averaging",
            violation.is_none(),
            match violation {
                None => "d(p) = (d(p0)+d(p1))/2 on 50 sampled prefixes".into(),
                Some(v) => format!("violated at prefix {}", v.prefix_index),
            },
        );
    }

    // Scout sweep of an empty slice.
    {
        let config = ExperimentConfig {
            language: LangSource::Gen {
                spec: GenSpec {
                    seed: 0,
                    slices: vec![],
                },
            },
            strategy: StrategySpec {
                preset: Some("desk".into()),
                ..Default::default()
            },
            max_length: 4,
        };
        match run_experiment(&config) {
            Ok(exp) => {
                let row = &exp.report.lengths[4];
                let pass = row.observed_gain == "15/16" && exp.report.all_matched;
                check(
                    "empty-slice sweep",
                    pass,
                    format!("length-4 gain {} (want 15/16)", row.observed_gain),
                );
            }
            Err(e) => check("empty-slice sweep", false, format!("run failed: {e}")),
        }
    }

    // Planted witness: designated subcube pays out in full and the
    // predictor reconciles every length.
    {
        let config = ExperimentConfig {
            language: LangSource::Gen {
                spec: GenSpec {
                    seed: 3,
                    slices: vec![crate::langgen::SliceSpec::Witnessed {
                        n: 12,
                        block: 4,
                        free: 2,
                        witness: 3,
                        final_block: false,
                        noise_cubes: 1,
                        seed: None,
                    }],
                },
            },
            strategy: StrategySpec {
                preset: Some("desk".into()),
                ..Default::default()
            },
            max_length: 12,
        };
        match run_experiment(&config) {
            Ok(exp) => {
                let plan = exp.plans[0].as_ref().expect("witnessed slice has a plan");
                let rec = exp.records.iter().find(|r| r.n == 12).expect("length 12 ran");
                let designated = rec
                    .cubes
                    .iter()
                    .find(|c| c.cube == plan.designated)
                    .expect("designated subcube deployed");
                let pass = exp.report.all_matched
                    && designated.fate == CubeFate::Survived
                    && designated.pot_final == designated.pot_initial.times_pow2(3);
                check(
                    "planted witness",
                    pass,
                    format!(
                        "designated {} {} at x{}, reconciled {}",
                        designated.cube.term(),
                        designated.fate,
                        1u32 << designated.bets_won,
                        exp.report.all_matched,
                    ),
                );
            }
            Err(e) => check("planted witness", false, format!("run failed: {e}")),
        }
    }

    // Betting targets stay inside the arithmetic bound.
    {
        let p = BettorParams::loglog();
        let pass = (1..=32u32)
            .filter(|&n| p.active(n))
            .all(|n| bet_set(n, &p).len() as u128 <= bet_set_bound(n, &p));
        check(
            "bet-set bound",
            pass,
            "materialized target sets within the arithmetic bound up to length 32".into(),
        );
    }

    // The two width oracles agree, exhaustively at arity 3.
    {
        use crate::width::{dnf_width, width_at_most_by_cover};
        let mut disagreements = 0;
        for table in 0u64..256 {
            let f = TruthTable::from_fn(3, |v| (table >> v) & 1 == 1).expect("arity 3");
            let width = dnf_width(&f).width();
            for w in 0..=3 {
                if width_at_most_by_cover(&f, w) != (width <= w) {
                    disagreements += 1;
                }
            }
        }
        check(
            "width oracle agreement",
            disagreements == 0,
            format!("{disagreements} disagreements over all 256 arity-3 functions"),
        );
    }

    // Query-bounded machines accept sets whose width obeys the bound.
    {
        use crate::machines::random_machine;
        use crate::width::dnf_width;
        let mut failures = 0;
        for seed in 0..30 {
            let m = random_machine(6, 3, 40, seed).expect("generator succeeds");
            let set = m.accepted_set().expect("small arity");
            let equivalent = m.to_dnf().to_table().map(|t| t == set).unwrap_or(false);
            if !equivalent || dnf_width(&set).width() > m.query_bound() {
                failures += 1;
            }
        }
        check(
            "machine width bound",
            failures == 0,
            format!("{failures} failures over 30 random machines (arity 6, bound 3)"),
        );
    }

    (lines.join("\n"), all)
}
