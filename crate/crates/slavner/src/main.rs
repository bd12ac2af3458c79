use clap::{Parser, Subcommand};

use slavner::commands;

/// NER and lemmatization toolkit for Polish, Czech and Russian.
#[derive(Parser)]
#[command(name = "slavner", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Convert(commands::ConvertArgs),
    Adapt(commands::AdaptArgs),
    TrainNer(commands::TrainNerArgs),
    TrainLemma(commands::TrainLemmaArgs),
    Predict(commands::PredictArgs),
    Evaluate(commands::EvaluateArgs),
    PackageSubmission(commands::PackageArgs),
    ValidateSubmission(commands::ValidateArgs),
}

fn run(cli: &Cli) -> slavner::Result<()> {
    match &cli.command {
        Command::Convert(args) => commands::convert(args),
        Command::Adapt(args) => commands::adapt(args),
        Command::TrainNer(args) => commands::train_ner(args),
        Command::TrainLemma(args) => commands::train_lemma(args),
        Command::Predict(args) => commands::predict(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::PackageSubmission(args) => commands::package_submission(args),
        Command::ValidateSubmission(args) => commands::validate_submission(args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
