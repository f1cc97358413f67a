//! Big-step semantics presented as a rule oracle.
//!
//! Instead of materializing rule schemas, a language answers two questions:
//! which rules can start on a configuration ([`LanguageSemantics::start`]) and
//! how a partially applied rule continues once its current premise has a
//! result ([`LanguageSemantics::advance`]). Premises are evaluated left to
//! right; an [`Activation`] records what a partial rule has seen so far.

use std::collections::HashSet;
use std::fmt::{self, Debug, Display};
use std::hash::Hash;

pub type RuleName = &'static str;

/// The judgment `config ⇒ result`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Judgment<C, R> {
    pub config: C,
    pub result: R,
}

impl<C, R> Judgment<C, R> {
    pub fn new(config: C, result: R) -> Self {
        Judgment { config, result }
    }
}

impl<C: Display, R: Display> Display for Judgment<C, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⇒ {}", self.config, self.result)
    }
}

/// A rule applied up to (but excluding) its current premise.
///
/// Activations are values: two partial rules with the same conclusion, the
/// same completed premises and the same demanded configuration must be
/// represented by equal activations, and `advance` answers for all rules
/// sharing that prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Activation<C, R, B> {
    pub rule: RuleName,
    pub bindings: B,
    pub conclusion: C,
    pub completed: Vec<Judgment<C, R>>,
    /// Configuration of the current premise.
    pub demanded: C,
}

impl<C: Clone, R: Clone, B> Activation<C, R, B> {
    pub fn first(rule: RuleName, bindings: B, conclusion: C, demanded: C) -> Self {
        Activation { rule, bindings, conclusion, completed: Vec::new(), demanded }
    }

    /// One-based index of the current premise.
    pub fn premise_index(&self) -> usize {
        self.completed.len() + 1
    }

    /// The activation after the current premise evaluated to `result`, now demanding `next`.
    pub fn then<B2>(&self, result: R, rule: RuleName, bindings: B2, next: C) -> Activation<C, R, B2> {
        let mut completed = self.completed.clone();
        completed.push(Judgment::new(self.demanded.clone(), result));
        Activation { rule, bindings, conclusion: self.conclusion.clone(), completed, demanded: next }
    }

    /// Same premises with results and bindings mapped.
    pub fn map<R2, B2>(&self, bindings: B2, f: impl Fn(&R) -> R2) -> Activation<C, R2, B2> {
        Activation {
            rule: self.rule,
            bindings,
            conclusion: self.conclusion.clone(),
            completed: self
                .completed
                .iter()
                .map(|j| Judgment::new(j.config.clone(), f(&j.result)))
                .collect(),
            demanded: self.demanded.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StartStep<C, R, B> {
    /// A rule without premises.
    Axiom { rule: RuleName, result: R },
    /// A rule whose first premise is `activation.demanded`.
    FirstPremise(Activation<C, R, B>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Continuation<C, R, B> {
    /// The rule is complete and concludes with `result`.
    Finished { rule: RuleName, result: R },
    /// The rule needs another premise, `activation.demanded`.
    Demand(Activation<C, R, B>),
}

pub trait LanguageSemantics {
    type Config: Clone + Eq + Hash + Debug + Display;
    type Res: Clone + Eq + Hash + Debug + Display;
    /// Language-private state carried by activations.
    type Bindings: Clone + Eq + Hash + Debug;

    fn start(&self, c: &Self::Config) -> Vec<StartStepOf<Self>>;

    fn advance(&self, a: &ActivationOf<Self>, r: &Self::Res) -> Vec<ContinuationOf<Self>>;

    /// Upper bound on the number of premises of any rule concluding on `c`.
    fn premise_bound(&self, c: &Self::Config) -> usize;
}

pub type ActivationOf<L> = Activation<
    <L as LanguageSemantics>::Config,
    <L as LanguageSemantics>::Res,
    <L as LanguageSemantics>::Bindings,
>;
pub type StartStepOf<L> =
    StartStep<<L as LanguageSemantics>::Config, <L as LanguageSemantics>::Res, <L as LanguageSemantics>::Bindings>;
pub type ContinuationOf<L> = Continuation<
    <L as LanguageSemantics>::Config,
    <L as LanguageSemantics>::Res,
    <L as LanguageSemantics>::Bindings,
>;
pub type JudgmentOf<L> = Judgment<<L as LanguageSemantics>::Config, <L as LanguageSemantics>::Res>;

impl<L: LanguageSemantics + ?Sized> LanguageSemantics for &L {
    type Config = L::Config;
    type Res = L::Res;
    type Bindings = L::Bindings;

    fn start(&self, c: &Self::Config) -> Vec<StartStepOf<Self>> {
        (**self).start(c)
    }

    fn advance(&self, a: &ActivationOf<Self>, r: &Self::Res) -> Vec<ContinuationOf<Self>> {
        (**self).advance(a, r)
    }

    fn premise_bound(&self, c: &Self::Config) -> usize {
        (**self).premise_bound(c)
    }
}

fn dedup<T: Clone + Eq + Hash>(items: Vec<T>) -> Vec<T> {
    let mut seen = HashSet::new();
    items.into_iter().filter(|x| seen.insert(x.clone())).collect()
}

/// `start` with structurally equal steps merged, checking activation shape in debug builds.
pub fn start<L: LanguageSemantics>(sem: &L, c: &L::Config) -> Vec<StartStepOf<L>> {
    let steps = dedup(sem.start(c));
    if cfg!(debug_assertions) {
        for s in &steps {
            if let StartStep::FirstPremise(a) = s {
                debug_assert!(a.completed.is_empty() && &a.conclusion == c, "malformed first activation {a:?}");
                debug_assert!(sem.premise_bound(c) >= 1, "premise bound exceeded on {c}");
            }
        }
    }
    steps
}

/// `advance` with structurally equal continuations merged, checking the
/// activation extension law and the premise bound in debug builds.
pub fn advance<L: LanguageSemantics>(sem: &L, a: &ActivationOf<L>, r: &L::Res) -> Vec<ContinuationOf<L>> {
    let conts = dedup(sem.advance(a, r));
    if cfg!(debug_assertions) {
        for k in &conts {
            if let Continuation::Demand(b) = k {
                debug_assert!(
                    b.conclusion == a.conclusion
                        && b.completed.len() == a.completed.len() + 1
                        && b.completed[..a.completed.len()] == a.completed[..]
                        && b.completed.last().map(|j| (&j.config, &j.result)) == Some((&a.demanded, r)),
                    "demand does not extend its activation: {a:?} -> {b:?}"
                );
                debug_assert!(
                    b.premise_index() <= sem.premise_bound(&a.conclusion),
                    "premise bound exceeded on {}",
                    a.conclusion
                );
            }
        }
    }
    conts
}

/// A complete rule instance as seen through the oracle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RuleInstance<C, R> {
    pub rule: RuleName,
    pub premises: Vec<Judgment<C, R>>,
    pub conclusion: Judgment<C, R>,
}

/// All rule instances concluding on `c` whose premise results are drawn from
/// `results_of`, found by driving `start` and `advance`.
pub fn rule_instances<L: LanguageSemantics>(
    sem: &L,
    c: &L::Config,
    results_of: &dyn Fn(&L::Config) -> Vec<L::Res>,
) -> HashSet<RuleInstance<L::Config, L::Res>> {
    let mut out = HashSet::new();
    let mut todo = Vec::new();
    for s in start(sem, c) {
        match s {
            StartStep::Axiom { rule, result } => {
                out.insert(RuleInstance { rule, premises: Vec::new(), conclusion: Judgment::new(c.clone(), result) });
            }
            StartStep::FirstPremise(a) => todo.push(a),
        }
    }
    while let Some(a) = todo.pop() {
        for r in results_of(&a.demanded) {
            for k in advance(sem, &a, &r) {
                match k {
                    Continuation::Finished { rule, result } => {
                        let mut premises = a.completed.clone();
                        premises.push(Judgment::new(a.demanded.clone(), r.clone()));
                        out.insert(RuleInstance { rule, premises, conclusion: Judgment::new(c.clone(), result) });
                    }
                    Continuation::Demand(b) => todo.push(b),
                }
            }
        }
    }
    out
}
