use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use widthlab::boolfn::TruthTable;
use widthlab::harness::{self, ExperimentConfig, LangSource, Report, StrategySpec};
use widthlab::langgen::{self, GenSpec};
use widthlab::machines::NdQueryMachine;
use widthlab::martingale::{sample_prefixes, verify_averaging};
use widthlab::width::{decision_tree_depth, dnf_width};
use widthlab::width_bettor::{bet_set, bet_set_bound, WidthBettor};

/// Exact DNF width measurements and fair-odds betting runs over language
/// prefixes, with every capital movement kept as a rational number.
#[derive(Parser)]
#[command(name = "widthlab", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Strategy parameters shared by the betting subcommands.
#[derive(Args)]
struct StrategyArgs {
    /// Named parameter set: loglog (default) or desk.
    #[arg(long)]
    preset: Option<String>,
    /// Fixed block size, overriding the preset schedule.
    #[arg(long, requires = "free")]
    block: Option<u32>,
    /// Fixed count of freed positions per block.
    #[arg(long, requires = "block")]
    free: Option<u32>,
    /// Constant stake per pool as num/den, replacing 1/n^2.
    #[arg(long)]
    stake: Option<String>,
    /// Starting capital as num/den.
    #[arg(long)]
    initial: Option<String>,
}

impl StrategyArgs {
    fn spec(&self) -> StrategySpec {
        StrategySpec {
            preset: self.preset.clone(),
            block: self.block,
            free: self.free,
            stake: self.stake.clone(),
            initial: self.initial.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Computes the exact DNF width of a truth table file.
    Width {
        /// Truth table text file (arity header, then the value rows).
        table: PathBuf,
        /// Also print a minimum-width disjunction covering the function.
        #[arg(long)]
        dnf: bool,
    },
    /// Computes the exact decision tree depth of a truth table file.
    Depth { table: PathBuf },
    /// Runs the betting strategy over a language and reconciles each
    /// length's gain against the set-logic prediction.
    Simulate {
        /// Full experiment config as a JSON file; replaces the flags below.
        #[arg(long, conflicts_with_all = ["lang", "max_length"])]
        config: Option<PathBuf>,
        /// Language file path, or gen:{...} with an inline generation spec.
        #[arg(long)]
        lang: Option<String>,
        /// Last string length to bet through (at most 20).
        #[arg(long)]
        max_length: Option<u32>,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Write the reconciled per-length report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the per-bet capital trajectory as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the per-length capital summary as CSV.
        #[arg(long)]
        lengths: Option<PathBuf>,
        /// Suppress the per-length table on stdout.
        #[arg(long)]
        quiet: bool,
    },
    /// Prints the strategy's betting targets for one length.
    Betset {
        /// String length to enumerate (at most 24 for materialization).
        #[arg(long)]
        length: u32,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Print each target's global index, one per line.
        #[arg(long)]
        elements: bool,
    },
    /// Checks the exact averaging law d(p) = (d(p0)+d(p1))/2 on sampled
    /// prefixes by full replay.
    Verify {
        #[command(flatten)]
        strategy: StrategyArgs,
        /// How many prefixes to sample.
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Shortest segment the sampled prefixes may end in.
        #[arg(long, default_value_t = 3)]
        min_seg: u32,
        /// Longest segment the sampled prefixes may end in.
        #[arg(long, default_value_t = 10)]
        max_seg: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Generates a language file from a slice-by-slice spec.
    Gen {
        /// Generation spec as inline JSON.
        #[arg(long, conflicts_with = "spec_file")]
        spec: Option<String>,
        /// Generation spec as a JSON file.
        #[arg(long)]
        spec_file: Option<PathBuf>,
        /// Output language file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Converts a nondeterministic query machine to its DNF.
    #[command(name = "machine-to-dnf")]
    MachineDnf {
        machine: PathBuf,
        /// Input arity, when larger than the highest queried position.
        #[arg(long)]
        arity: Option<u32>,
    },
    /// Tabulates the language a query machine accepts.
    MachineTable {
        machine: PathBuf,
        #[arg(long)]
        arity: Option<u32>,
    },
    /// Runs the built-in pipeline health checks.
    SelfCheck,
}

fn parse_lang(s: &str) -> Result<LangSource> {
    if let Some(json) = s.strip_prefix("gen:") {
        let spec = GenSpec::from_json(json).context("parsing the inline generation spec")?;
        Ok(LangSource::Gen { spec })
    } else {
        Ok(LangSource::File { path: s.into() })
    }
}

fn read_table(path: &PathBuf) -> Result<TruthTable> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(TruthTable::from_text(&text)?)
}

fn read_machine(path: &PathBuf, arity: Option<u32>) -> Result<NdQueryMachine> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let m = match arity {
        Some(a) => NdQueryMachine::from_text_with_arity(&text, a)?,
        None => NdQueryMachine::from_text(&text)?,
    };
    Ok(m)
}

fn print_length_table(report: &Report) {
    println!(
        "{:>3}  {:6}  {:10}  {:12}  {:>9}  {:>5}  {:>16}  {:>16}  match",
        "n", "active", "outcome", "witness", "stake", "cubes", "predicted", "observed"
    );
    for row in &report.lengths {
        println!(
            "{:>3}  {:6}  {:10}  {:12}  {:>9}  {:>5}  {:>16}  {:>16}  {}",
            row.n,
            if row.active { "yes" } else { "no" },
            row.outcome,
            row.witness.as_deref().unwrap_or("-"),
            row.stake,
            row.boundary_subcubes,
            row.predicted_gain,
            row.observed_gain,
            if row.matched { "yes" } else { "NO" },
        );
    }
    println!();
    println!("strategy        {}", report.strategy);
    println!("initial capital {}", report.initial_capital);
    println!("final capital   {}", report.final_capital);
    println!("max capital     {}", report.max_capital);
    println!(
        "reconciliation  {}",
        if report.all_matched {
            "every length matches the prediction exactly"
        } else {
            "MISMATCH between observed and predicted gains"
        }
    );
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Width { table, dnf } => {
            let t = read_table(&table)?;
            let report = dnf_width(&t);
            println!("width {}", report.width());
            if dnf {
                println!("{}", report.to_dnf(t.arity()));
            }
        }
        Command::Depth { table } => {
            let t = read_table(&table)?;
            println!("depth {}", decision_tree_depth(&t)?);
        }
        Command::Simulate {
            config,
            lang,
            max_length,
            strategy,
            report,
            trace,
            lengths,
            quiet,
        } => {
            let config = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    ExperimentConfig::from_json(&text)?
                }
                None => {
                    let (Some(lang), Some(max_length)) = (lang, max_length) else {
                        bail!("either --config or both --lang and --max-length are required");
                    };
                    ExperimentConfig {
                        language: parse_lang(&lang)?,
                        strategy: strategy.spec(),
                        max_length,
                    }
                }
            };
            let exp = harness::run_experiment(&config)?;
            harness::write_outputs(
                &exp,
                report.as_deref(),
                trace.as_deref(),
                lengths.as_deref(),
            )?;
            if !quiet {
                print_length_table(&exp.report);
            }
            for (flag, path) in [("report", report), ("trace", trace), ("lengths", lengths)] {
                if let Some(p) = path {
                    eprintln!("wrote {flag} to {}", p.display());
                }
            }
            if !exp.report.all_matched {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Betset {
            length,
            strategy,
            elements,
        } => {
            let params = strategy.spec().resolve()?;
            if length > 24 {
                bail!("refusing to materialize targets beyond length 24");
            }
            let set = bet_set(length, &params);
            println!(
                "length {length}: {} targets, bound {}",
                set.len(),
                bet_set_bound(length, &params)
            );
            if elements {
                for idx in &set {
                    println!("{idx}");
                }
            }
        }
        Command::Verify {
            strategy,
            count,
            min_seg,
            max_seg,
            seed,
        } => {
            let params = strategy.spec().resolve()?;
            let mut bettor = WidthBettor::new(params)?;
            let prefixes = sample_prefixes(count, min_seg, max_seg, seed);
            match verify_averaging(&mut bettor, &prefixes)? {
                None => println!(
                    "averaging holds exactly on {} prefixes (segments {min_seg}..={max_seg}, seed {seed})",
                    prefixes.len()
                ),
                Some(v) => {
                    println!(
                        "averaging VIOLATED at prefix {}: d(p)={} but (d(p0)+d(p1))/2 averages {} and {}",
                        v.prefix_index, v.d_parent, v.d_zero, v.d_one
                    );
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Gen { spec, spec_file, out } => {
            let text = match (spec, spec_file) {
                (Some(inline), None) => inline,
                (None, Some(path)) => std::fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?,
                _ => bail!("exactly one of --spec or --spec-file is required"),
            };
            let spec = GenSpec::from_json(&text)?;
            let output = langgen::generate(&spec)?;
            for plan in output.plans.iter().flatten() {
                eprintln!(
                    "witnessed slice n={}: witness {} planted {} designated {} noise {}",
                    plan.n,
                    plan.witness,
                    plan.planted,
                    plan.designated.term(),
                    plan.noise.len()
                );
            }
            let rendered = output.language.to_text();
            match out {
                Some(path) => {
                    std::fs::write(&path, rendered)?;
                    eprintln!("wrote language to {}", path.display());
                }
                None => print!("{rendered}"),
            }
        }
        Command::MachineDnf { machine, arity } => {
            let m = read_machine(&machine, arity)?;
            println!("arity {}", m.arity());
            println!("query bound {}", m.query_bound());
            println!("{}", m.to_dnf());
        }
        Command::MachineTable { machine, arity } => {
            let m = read_machine(&machine, arity)?;
            print!("{}", m.accepted_set()?.to_text());
        }
        Command::SelfCheck => {
            let (table, ok) = harness::self_check();
            println!("{table}");
            if !ok {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
