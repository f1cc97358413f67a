use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bsm", version, about = "Evaluate, step, typecheck and audit big-step semantics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a program and print one outcome document per result.
    Eval(EvalArgs),
    /// Print every partial evaluation tree of the first branch.
    Step(StepArgs),
    /// Print the type of a program.
    Typecheck(TypecheckArgs),
    /// Audit the soundness conditions on an enumerated corpus.
    Soundness(SoundnessArgs),
    /// Decide a judgment of an inference system with corules.
    Corules(CorulesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Lang {
    /// Simply-typed λ-calculus with recursive types and choice.
    Lambda,
    /// Featherweight Java with λ-expressions.
    Fj,
    /// Imperative Featherweight Java.
    Impfj,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    #[default]
    Plain,
    Wrong,
    Div,
    Trace,
    Total,
}

/// Premise order of λ-calculus application.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum AppOrder {
    #[default]
    App,
    AppR,
    AppLate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Flavor {
    #[default]
    Must,
    May,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    #[default]
    Maxelem,
}

pub fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Args)]
pub struct LangArgs {
    #[arg(long, value_enum)]
    pub lang: Lang,
    /// Built-in fixture. For `fj` and `impfj` a class table prepended to the
    /// input (`lambda`, `imperative`, `loop`, `none`); for `lambda` audits a
    /// predicate variant (`typed`, `fool`, `drop-succ`).
    #[arg(long)]
    pub fixture: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub lang: LangArgs,
    #[arg(long, value_enum, default_value_t)]
    pub mode: Mode,
    #[arg(long, env = "BSM_FUEL", default_value_t = 1000, value_parser = positive)]
    pub fuel: usize,
    #[arg(long, value_enum, default_value_t)]
    pub strategy: AppOrder,
    /// Explore every branch instead of only the first.
    #[arg(long)]
    pub exhaustive: bool,
    /// Program text, or a path to a file containing it.
    pub input: String,
}

#[derive(Debug, Args)]
pub struct StepArgs {
    #[command(flatten)]
    pub lang: LangArgs,
    #[arg(long, default_value_t = 100, value_parser = positive)]
    pub max_steps: usize,
    #[arg(long, value_enum, default_value_t)]
    pub strategy: AppOrder,
    pub input: String,
}

#[derive(Debug, Args)]
pub struct TypecheckArgs {
    #[command(flatten)]
    pub lang: LangArgs,
    pub input: String,
}

#[derive(Debug, Args)]
pub struct SoundnessArgs {
    #[command(flatten)]
    pub lang: LangArgs,
    #[arg(long, value_enum, default_value_t)]
    pub flavor: Flavor,
    #[arg(long, default_value_t = 3, value_parser = positive)]
    pub depth: usize,
    #[arg(long, env = "BSM_FUEL", default_value_t = 200, value_parser = positive)]
    pub fuel: usize,
}

#[derive(Debug, Args)]
pub struct CorulesArgs {
    #[arg(long, value_enum, default_value_t)]
    pub demo: Demo,
    /// A judgment such as `maxElem([|1,2], 2)`, or a bare list to list
    /// every derivable maximum.
    pub goal: String,
    /// Upper bound on the judgments explored.
    #[arg(long, default_value_t = 10_000, value_parser = positive)]
    pub cap: usize,
}
