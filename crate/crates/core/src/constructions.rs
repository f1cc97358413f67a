//! Semantics transformers: explicit errors, divergence, traces and the
//! combination of errors with divergence. Each wraps a base oracle and keeps
//! the base activation in its bindings.

use std::collections::HashSet;
use std::fmt::{self, Debug, Display};
use std::hash::Hash;

use crate::bigstep::{
    self, Activation, ActivationOf, Continuation, ContinuationOf, LanguageSemantics, RuleName, StartStep,
    StartStepOf,
};
use crate::pet::{run, DivergenceCertificate, Outcome, Strategy, StuckInfo};

pub const WRONG_CONFIG: RuleName = "wrong-config";
pub const WRONG_RESULT: RuleName = "wrong-result";
pub const PROP_WRONG: RuleName = "prop-wrong";
pub const PROP_DIV: RuleName = "prop-div";
pub const PROP_TRACE: RuleName = "prop-trace";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WrResult<R> {
    Ok(R),
    Wrong,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InfResult<R> {
    Ok(R),
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TotResult<R> {
    Ok(R),
    Wrong,
    Infinity,
}

impl<R: Display> Display for WrResult<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WrResult::Ok(r) => write!(f, "{r}"),
            WrResult::Wrong => write!(f, "wrong"),
        }
    }
}

impl<R: Display> Display for InfResult<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfResult::Ok(r) => write!(f, "{r}"),
            InfResult::Infinity => write!(f, "∞"),
        }
    }
}

impl<R: Display> Display for TotResult<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TotResult::Ok(r) => write!(f, "{r}"),
            TotResult::Wrong => write!(f, "wrong"),
            TotResult::Infinity => write!(f, "∞"),
        }
    }
}

/// A finite word `prefix` followed by `period` repeated forever; finite when
/// `period` is empty. Kept in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalTrace<C> {
    prefix: Vec<C>,
    period: Vec<C>,
}

impl<C: Clone + Eq> RationalTrace<C> {
    pub fn new(prefix: Vec<C>, period: Vec<C>) -> Self {
        let mut t = RationalTrace { prefix, period };
        let n = t.period.len();
        if let Some(p) = (1..=n).find(|&p| n % p == 0 && (p..n).all(|i| t.period[i] == t.period[i - p])) {
            t.period.truncate(p);
        }
        while !t.period.is_empty() && t.prefix.last().is_some() && t.prefix.last() == t.period.last() {
            t.prefix.pop();
            t.period.rotate_right(1);
        }
        t
    }

    pub fn prefix(&self) -> &[C] {
        &self.prefix
    }

    pub fn period(&self) -> &[C] {
        &self.period
    }

    pub fn is_finite(&self) -> bool {
        self.period.is_empty()
    }

    /// `word · self`.
    pub fn after(&self, word: &[C]) -> Self {
        let mut prefix = word.to_vec();
        prefix.extend_from_slice(&self.prefix);
        RationalTrace::new(prefix, self.period.clone())
    }

    /// The first `n` elements of the (possibly infinite) word.
    pub fn take(&self, n: usize) -> Vec<C> {
        let mut out: Vec<C> = self.prefix.iter().take(n).cloned().collect();
        if !self.period.is_empty() {
            out.extend(self.period.iter().cycle().take(n - out.len()).cloned());
        }
        out
    }
}

impl<C: Display> Display for RationalTrace<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[C]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" · ");
        if self.period.is_empty() {
            write!(f, "{}", join(&self.prefix))
        } else if self.prefix.is_empty() {
            write!(f, "({})^ω", join(&self.period))
        } else {
            write!(f, "{} · ({})^ω", join(&self.prefix), join(&self.period))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TraceResult<C, R> {
    /// A finite trace, starting with the evaluated configuration, and the result.
    Fin(Vec<C>, R),
    /// An infinite, eventually periodic trace.
    Inf(RationalTrace<C>),
}

impl<C: Display, R: Display> Display for TraceResult<C, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceResult::Fin(t, r) => {
                let t: Vec<_> = t.iter().map(|c| c.to_string()).collect();
                write!(f, "⟨{}, {}⟩", t.join(" · "), r)
            }
            TraceResult::Inf(t) => write!(f, "{t}"),
        }
    }
}

/// Lifts a base activation into a transformer activation carrying it as bindings.
fn lift<C: Clone, R: Clone, B: Clone, R2>(a: Activation<C, R, B>, f: impl Fn(&R) -> R2) -> Activation<C, R2, Activation<C, R, B>> {
    let lifted = a.map(a.clone(), f);
    Activation { bindings: a, ..lifted }
}

/// Adds `wrong` for configurations no rule applies to and for premise results
/// no rule accepts, propagating it upward.
#[derive(Clone, Debug)]
pub struct WrongSemantics<S>(pub S);

pub fn wrong_oracle<S: LanguageSemantics>(sem: S) -> WrongSemantics<S> {
    WrongSemantics(sem)
}

impl<S: LanguageSemantics> LanguageSemantics for WrongSemantics<S> {
    type Config = S::Config;
    type Res = WrResult<S::Res>;
    type Bindings = ActivationOf<S>;

    fn start(&self, c: &S::Config) -> Vec<StartStepOf<Self>> {
        let base = bigstep::start(&self.0, c);
        if base.is_empty() {
            return vec![StartStep::Axiom { rule: WRONG_CONFIG, result: WrResult::Wrong }];
        }
        base.into_iter().map(|s| lift_start(s, |r: &S::Res| WrResult::Ok(r.clone()))).collect()
    }

    fn advance(&self, a: &ActivationOf<Self>, r: &WrResult<S::Res>) -> Vec<ContinuationOf<Self>> {
        let WrResult::Ok(r) = r else {
            return vec![Continuation::Finished { rule: PROP_WRONG, result: WrResult::Wrong }];
        };
        let base = bigstep::advance(&self.0, &a.bindings, r);
        if base.is_empty() {
            return vec![Continuation::Finished { rule: WRONG_RESULT, result: WrResult::Wrong }];
        }
        base.into_iter().map(|k| lift_cont(k, |r: &S::Res| WrResult::Ok(r.clone()))).collect()
    }

    fn premise_bound(&self, c: &S::Config) -> usize {
        self.0.premise_bound(c)
    }
}

fn lift_start<C: Clone, R: Clone, B: Clone, R2>(
    s: StartStep<C, R, B>,
    f: impl Fn(&R) -> R2,
) -> StartStep<C, R2, Activation<C, R, B>> {
    match s {
        StartStep::Axiom { rule, result } => StartStep::Axiom { rule, result: f(&result) },
        StartStep::FirstPremise(a) => StartStep::FirstPremise(lift(a, f)),
    }
}

fn lift_cont<C: Clone, R: Clone, B: Clone, R2>(
    k: Continuation<C, R, B>,
    f: impl Fn(&R) -> R2,
) -> Continuation<C, R2, Activation<C, R, B>> {
    match k {
        Continuation::Finished { rule, result } => Continuation::Finished { rule, result: f(&result) },
        Continuation::Demand(a) => Continuation::Demand(lift(a, f)),
    }
}

/// Adds the result `∞`, propagated from any premise. Together with the
/// coaxioms `c ⇒ ∞` (see [`DivSemantics::is_coaxiom`]) this gives divergence
/// under the corule interpretation.
#[derive(Clone, Debug)]
pub struct DivSemantics<S>(pub S);

pub fn div_oracle<S: LanguageSemantics>(sem: S) -> DivSemantics<S> {
    DivSemantics(sem)
}

impl<S: LanguageSemantics> DivSemantics<S> {
    pub fn is_coaxiom(&self, _c: &S::Config, r: &InfResult<S::Res>) -> bool {
        matches!(r, InfResult::Infinity)
    }
}

impl<S: LanguageSemantics> LanguageSemantics for DivSemantics<S> {
    type Config = S::Config;
    type Res = InfResult<S::Res>;
    type Bindings = ActivationOf<S>;

    fn start(&self, c: &S::Config) -> Vec<StartStepOf<Self>> {
        bigstep::start(&self.0, c)
            .into_iter()
            .map(|s| lift_start(s, |r: &S::Res| InfResult::Ok(r.clone())))
            .collect()
    }

    fn advance(&self, a: &ActivationOf<Self>, r: &InfResult<S::Res>) -> Vec<ContinuationOf<Self>> {
        match r {
            InfResult::Infinity => vec![Continuation::Finished { rule: PROP_DIV, result: InfResult::Infinity }],
            InfResult::Ok(r) => bigstep::advance(&self.0, &a.bindings, r)
                .into_iter()
                .map(|k| lift_cont(k, |r: &S::Res| InfResult::Ok(r.clone())))
                .collect(),
        }
    }

    fn premise_bound(&self, c: &S::Config) -> usize {
        self.0.premise_bound(c)
    }
}

/// Results carry the trace of configurations visited by the derivation.
#[derive(Clone, Debug)]
pub struct TraceSemantics<S>(pub S);

pub fn trace_oracle<S: LanguageSemantics>(sem: S) -> TraceSemantics<S> {
    TraceSemantics(sem)
}

/// `c · σ1 ⋯ σn` over the finite traces of the completed premises.
fn trace_word<C: Clone, R, B>(a: &Activation<C, TraceResult<C, R>, B>) -> Vec<C> {
    let mut word = vec![a.conclusion.clone()];
    for j in &a.completed {
        if let TraceResult::Fin(t, _) = &j.result {
            word.extend(t.iter().cloned());
        }
    }
    word
}

fn strip<C, R: Clone>(r: &TraceResult<C, R>) -> R {
    match r {
        TraceResult::Fin(_, r) => r.clone(),
        TraceResult::Inf(_) => unreachable!("completed trace premises are finite"),
    }
}

impl<S: LanguageSemantics> LanguageSemantics for TraceSemantics<S> {
    type Config = S::Config;
    type Res = TraceResult<S::Config, S::Res>;
    type Bindings = ActivationOf<S>;

    fn start(&self, c: &S::Config) -> Vec<StartStepOf<Self>> {
        bigstep::start(&self.0, c)
            .into_iter()
            .map(|s| match s {
                StartStep::Axiom { rule, result } => {
                    StartStep::Axiom { rule, result: TraceResult::Fin(vec![c.clone()], result) }
                }
                StartStep::FirstPremise(a) => StartStep::FirstPremise(Activation {
                    rule: a.rule,
                    conclusion: a.conclusion.clone(),
                    completed: Vec::new(),
                    demanded: a.demanded.clone(),
                    bindings: a,
                }),
            })
            .collect()
    }

    fn advance(&self, a: &ActivationOf<Self>, r: &Self::Res) -> Vec<ContinuationOf<Self>> {
        match r {
            TraceResult::Inf(t) => {
                vec![Continuation::Finished { rule: PROP_TRACE, result: TraceResult::Inf(t.after(&trace_word(a))) }]
            }
            TraceResult::Fin(sigma, base_r) => bigstep::advance(&self.0, &a.bindings, base_r)
                .into_iter()
                .map(|k| match k {
                    Continuation::Finished { rule, result } => {
                        let mut word = trace_word(a);
                        word.extend(sigma.iter().cloned());
                        Continuation::Finished { rule, result: TraceResult::Fin(word, result) }
                    }
                    Continuation::Demand(b) => {
                        let mut completed = a.completed.clone();
                        completed.push(bigstep::Judgment::new(a.demanded.clone(), r.clone()));
                        debug_assert!(completed.iter().map(|j| strip(&j.result)).eq(b.completed.iter().map(|j| j.result.clone())));
                        Continuation::Demand(Activation {
                            rule: b.rule,
                            conclusion: b.conclusion.clone(),
                            completed,
                            demanded: b.demanded.clone(),
                            bindings: b,
                        })
                    }
                })
                .collect(),
        }
    }

    fn premise_bound(&self, c: &S::Config) -> usize {
        self.0.premise_bound(c)
    }
}

/// Errors and divergence together.
#[derive(Clone, Debug)]
pub struct TotalSemantics<S>(pub S);

pub fn total_oracle<S: LanguageSemantics>(sem: S) -> TotalSemantics<S> {
    TotalSemantics(sem)
}

impl<S: LanguageSemantics> LanguageSemantics for TotalSemantics<S> {
    type Config = S::Config;
    type Res = TotResult<S::Res>;
    type Bindings = ActivationOf<S>;

    fn start(&self, c: &S::Config) -> Vec<StartStepOf<Self>> {
        let base = bigstep::start(&self.0, c);
        if base.is_empty() {
            return vec![StartStep::Axiom { rule: WRONG_CONFIG, result: TotResult::Wrong }];
        }
        base.into_iter().map(|s| lift_start(s, |r: &S::Res| TotResult::Ok(r.clone()))).collect()
    }

    fn advance(&self, a: &ActivationOf<Self>, r: &TotResult<S::Res>) -> Vec<ContinuationOf<Self>> {
        match r {
            TotResult::Wrong => vec![Continuation::Finished { rule: PROP_WRONG, result: TotResult::Wrong }],
            TotResult::Infinity => vec![Continuation::Finished { rule: PROP_DIV, result: TotResult::Infinity }],
            TotResult::Ok(r) => {
                let base = bigstep::advance(&self.0, &a.bindings, r);
                if base.is_empty() {
                    return vec![Continuation::Finished { rule: WRONG_RESULT, result: TotResult::Wrong }];
                }
                base.into_iter().map(|k| lift_cont(k, |r: &S::Res| TotResult::Ok(r.clone()))).collect()
            }
        }
    }

    fn premise_bound(&self, c: &S::Config) -> usize {
        self.0.premise_bound(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WrongOutcome<C, R> {
    Ok(R),
    Wrong,
    Diverges(DivergenceCertificate<C, R>),
    OutOfFuel,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DivOutcome<C, R> {
    Ok(R),
    Infinity(DivergenceCertificate<C, R>),
    /// Evaluation got stuck: no judgment is derivable.
    NoJudgment(StuckInfo<C, R>),
    OutOfFuel,
}

impl<C, R: Clone> DivOutcome<C, R> {
    pub fn inf_result(&self) -> Option<InfResult<R>> {
        match self {
            DivOutcome::Ok(r) => Some(InfResult::Ok(r.clone())),
            DivOutcome::Infinity(_) => Some(InfResult::Infinity),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TraceOutcome<C, R> {
    Result(TraceResult<C, R>),
    Stuck(StuckInfo<C, R>),
    OutOfFuel,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TotalOutcome<C, R> {
    Ok(R),
    Wrong,
    Infinity(DivergenceCertificate<C, R>),
    OutOfFuel,
}

impl<C, R: Clone> TotalOutcome<C, R> {
    pub fn tot_result(&self) -> Option<TotResult<R>> {
        match self {
            TotalOutcome::Ok(r) => Some(TotResult::Ok(r.clone())),
            TotalOutcome::Wrong => Some(TotResult::Wrong),
            TotalOutcome::Infinity(_) => Some(TotResult::Infinity),
            TotalOutcome::OutOfFuel => None,
        }
    }
}

fn collect<T: Clone + Eq + Hash>(items: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut seen = HashSet::new();
    items.into_iter().filter(|x| seen.insert(x.clone())).collect()
}

fn ok_part<R: Clone>(r: &WrResult<R>) -> R {
    match r {
        WrResult::Ok(r) => r.clone(),
        WrResult::Wrong => unreachable!("wrong premises never complete a cycle prefix"),
    }
}

/// Evaluation with explicit errors. `wrong` is reported exactly when the base
/// semantics gets stuck.
pub fn eval_wrong<S: LanguageSemantics>(
    sem: &S,
    c: &S::Config,
    fuel: usize,
    strategy: Strategy,
) -> Vec<WrongOutcome<S::Config, S::Res>> {
    collect(run(&WrongSemantics(sem), c, fuel, strategy).into_iter().map(|o| match o {
        Outcome::Converged { result: WrResult::Ok(r), .. } => WrongOutcome::Ok(r),
        Outcome::Converged { result: WrResult::Wrong, .. } => WrongOutcome::Wrong,
        Outcome::Diverges { certificate, .. } => WrongOutcome::Diverges(certificate.map_results(ok_part)),
        Outcome::OutOfFuel { .. } => WrongOutcome::OutOfFuel,
        Outcome::Stuck { .. } => unreachable!("the wrong construction never gets stuck"),
    }))
}

pub fn eval_div<S: LanguageSemantics>(
    sem: &S,
    c: &S::Config,
    fuel: usize,
    strategy: Strategy,
) -> Vec<DivOutcome<S::Config, S::Res>> {
    let base = |r: &InfResult<S::Res>| match r {
        InfResult::Ok(r) => r.clone(),
        InfResult::Infinity => unreachable!("divergent premises never complete a cycle prefix"),
    };
    collect(run(&DivSemantics(sem), c, fuel, strategy).into_iter().map(|o| match o {
        Outcome::Converged { result: InfResult::Ok(r), .. } => DivOutcome::Ok(r),
        Outcome::Converged { result: InfResult::Infinity, .. } => {
            unreachable!("no rule introduces ∞ during stepping")
        }
        Outcome::Diverges { certificate, .. } => DivOutcome::Infinity(certificate.map_results(base)),
        Outcome::Stuck { info, .. } => DivOutcome::NoJudgment(StuckInfo {
            kind: info.kind,
            config: info.config,
            position: info.position,
            rule: info.rule,
            premise_index: info.premise_index,
            offending: info.offending.map(|r| base(&r)),
        }),
        Outcome::OutOfFuel { .. } => DivOutcome::OutOfFuel,
    }))
}

/// Builds the rational trace witnessed by a certificate over trace results.
pub fn certificate_trace<C: Clone + Eq + Hash, R: Clone>(cert: &DivergenceCertificate<C, TraceResult<C, R>>) -> RationalTrace<C> {
    let word = |entries: &[crate::pet::WitnessEntry<C, TraceResult<C, R>>]| {
        let mut w = Vec::new();
        for e in entries {
            w.push(e.config.clone());
            for j in &e.premises {
                if let TraceResult::Fin(t, _) = &j.result {
                    w.extend(t.iter().cloned());
                }
            }
        }
        w
    };
    RationalTrace::new(word(&cert.stem), word(&cert.cycle))
}

pub fn eval_trace<S: LanguageSemantics>(
    sem: &S,
    c: &S::Config,
    fuel: usize,
    strategy: Strategy,
) -> Vec<TraceOutcome<S::Config, S::Res>> {
    collect(run(&TraceSemantics(sem), c, fuel, strategy).into_iter().map(|o| match o {
        Outcome::Converged { result, .. } => TraceOutcome::Result(result),
        Outcome::Diverges { certificate, .. } => {
            TraceOutcome::Result(TraceResult::Inf(certificate_trace(&certificate)))
        }
        Outcome::Stuck { info, .. } => TraceOutcome::Stuck(StuckInfo {
            kind: info.kind,
            config: info.config,
            position: info.position,
            rule: info.rule,
            premise_index: info.premise_index,
            offending: info.offending.map(|r| strip(&r)),
        }),
        Outcome::OutOfFuel { .. } => TraceOutcome::OutOfFuel,
    }))
}

pub fn eval_total<S: LanguageSemantics>(
    sem: &S,
    c: &S::Config,
    fuel: usize,
    strategy: Strategy,
) -> Vec<TotalOutcome<S::Config, S::Res>> {
    let base = |r: &TotResult<S::Res>| match r {
        TotResult::Ok(r) => r.clone(),
        _ => unreachable!("cycle prefixes only hold converging premises"),
    };
    collect(run(&TotalSemantics(sem), c, fuel, strategy).into_iter().map(|o| match o {
        Outcome::Converged { result: TotResult::Ok(r), .. } => TotalOutcome::Ok(r),
        Outcome::Converged { result: TotResult::Wrong, .. } => TotalOutcome::Wrong,
        Outcome::Converged { result: TotResult::Infinity, .. } => {
            unreachable!("no rule introduces ∞ during stepping")
        }
        Outcome::Diverges { certificate, .. } => TotalOutcome::Infinity(certificate.map_results(base)),
        Outcome::OutOfFuel { .. } => TotalOutcome::OutOfFuel,
        Outcome::Stuck { .. } => unreachable!("the total construction never gets stuck"),
    }))
}

/// Forgets traces: `⟨σ, r⟩ ↦ r` and infinite traces to `∞`.
pub fn trace_forget<C, R: Clone>(r: &TraceResult<C, R>) -> InfResult<R> {
    match r {
        TraceResult::Fin(_, r) => InfResult::Ok(r.clone()),
        TraceResult::Inf(_) => InfResult::Infinity,
    }
}

/// Projection of a trace outcome onto the divergence outcome shape.
pub fn forget_outcome<C: Clone, R: Clone>(o: &TraceOutcome<C, R>) -> Option<InfResult<R>> {
    match o {
        TraceOutcome::Result(r) => Some(trace_forget(r)),
        _ => None,
    }
}
