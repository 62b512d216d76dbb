use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use regender::training::Parameterization;
use regender::Error;
use regender_cli::{
    cmd_augment, cmd_build_lexicon, cmd_eval_bias, cmd_eval_intrinsic, cmd_intervene, cmd_train,
    load_config, AugmentArgs, BiasArgs, InterveneArgs, IntrinsicArgs, LexiconArgs, TrainArgs,
};

/// Agreement-preserving gender reinflection over dependency treebanks.
#[derive(Parser)]
#[command(name = "regender", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Caps the number of worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trains a linear or neural model; writes the model and a loss history.
    Train {
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long)]
        parameterization: Option<Parameterization>,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Swaps the gender of each animate noun and reinflects the sentence.
    Intervene {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Only the sentence with this id.
        #[arg(long)]
        sentence: Option<String>,
        /// Only the noun at this 1-based position.
        #[arg(long)]
        position: Option<usize>,
    },
    /// Counterfactual data augmentation.
    Augment {
        #[arg(long, required_unless_present = "swap")]
        model: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
        /// Naive noun swapping without agreement.
        #[arg(long)]
        swap: bool,
        #[arg(long)]
        text: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Tag F1 and form accuracy against gold counterfactuals.
    EvalIntrinsic {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long = "model")]
        models: Vec<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Stereotyping and grammaticality under original, swap and MRF corpora.
    EvalBias {
        #[arg(long)]
        original: Option<PathBuf>,
        #[arg(long)]
        swap: Option<PathBuf>,
        #[arg(long)]
        mrf: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["original", "swap", "mrf"])]
        fixture: Option<PathBuf>,
        #[arg(long)]
        queries: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Builds an inflection lexicon TSV from a treebank.
    BuildLexicon {
        #[arg(long)]
        treebank: Option<PathBuf>,
        #[arg(long)]
        supplement: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> regender::Result<()> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| Error::Config(format!("--jobs: {}", e)))?;
    }
    let cfg = load_config(cli.config.as_deref(), cli.seed)?;
    match cli.command {
        Command::Train {
            train,
            dev,
            parameterization,
            out,
            history,
        } => {
            let s = cmd_train(
                &cfg,
                &TrainArgs {
                    train,
                    dev,
                    parameterization,
                    model_out: out,
                    history_out: history,
                },
            )?;
            println!(
                "final dev loss {:.6} bits after {} epochs (uniform {:.6})",
                s.final_dev_bits, s.epochs, s.uniform_dev_bits
            );
        }
        Command::Intervene {
            model,
            input,
            out,
            report,
            sentence,
            position,
        } => {
            let n = cmd_intervene(
                &cfg,
                &InterveneArgs {
                    model,
                    input,
                    output: out,
                    report,
                    sentence,
                    position,
                },
            )?;
            println!("{} counterfactual sentences written", n);
        }
        Command::Augment {
            model,
            input,
            out,
            swap,
            text,
            report,
        } => {
            let s = cmd_augment(
                &cfg,
                &AugmentArgs {
                    model,
                    input,
                    output: out,
                    swap,
                    text,
                    report,
                },
            )?;
            println!(
                "{} sentences in, {} out, {} without variants",
                s.input, s.output, s.failures
            );
        }
        Command::EvalIntrinsic {
            source,
            gold,
            models,
            out,
        } => {
            let table = cmd_eval_intrinsic(
                &cfg,
                &IntrinsicArgs {
                    source,
                    gold,
                    models,
                    output: out,
                },
            )?;
            print!("{}", table);
        }
        Command::EvalBias {
            original,
            swap,
            mrf,
            fixture,
            queries,
            out,
            plot,
        } => {
            let report = cmd_eval_bias(
                &cfg,
                &BiasArgs {
                    original,
                    swap,
                    mrf,
                    fixture,
                    queries,
                    output: out,
                    plot,
                },
            )?;
            println!("condition\tmean_abs_stereotype\tmean_grammaticality");
            for a in &report.aggregates {
                println!(
                    "{}\t{:.4}\t{:.4}",
                    a.condition, a.mean_abs_stereotype, a.mean_grammaticality
                );
            }
        }
        Command::BuildLexicon {
            treebank,
            supplement,
            out,
        } => {
            let n = cmd_build_lexicon(
                &cfg,
                &LexiconArgs {
                    treebank,
                    supplement,
                    output: out,
                },
            )?;
            println!("{} lexicon entries", n);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
