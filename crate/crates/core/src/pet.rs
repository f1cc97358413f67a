//! Partial evaluation trees and the small-step relation over them.
//!
//! A tree starts as the leaf `c ⇒ ?` and grows one transition at a time:
//! a start node either closes with an axiom or opens its first premise, a
//! partial node either finishes, demands one more premise, or lets its last
//! (unfinished) child take a step. Only the rightmost path of unknown
//! results (the active path) ever changes.

use std::collections::HashSet;
use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::sync::Arc;

use thiserror::Error;

use crate::bigstep::{self, Activation, Continuation, Judgment, LanguageSemantics, RuleName, StartStep};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum UnResult<R> {
    Known(R),
    Unknown,
}

impl<R> UnResult<R> {
    pub fn known(&self) -> Option<&R> {
        match self {
            UnResult::Known(r) => Some(r),
            UnResult::Unknown => None,
        }
    }

    pub fn is_known(&self) -> bool {
        matches!(self, UnResult::Known(_))
    }
}

impl<R: Display> Display for UnResult<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnResult::Known(r) => write!(f, "{r}"),
            UnResult::Unknown => write!(f, "?"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuleTag<C, R, B> {
    /// An unevaluated leaf.
    Start,
    /// A rule applied up to its last child.
    Partial(Activation<C, R, B>),
    /// A rule applied in full.
    Rule(RuleName),
}

impl<C, R, B> RuleTag<C, R, B> {
    pub fn label(&self) -> String {
        match self {
            RuleTag::Start => "start".to_string(),
            RuleTag::Partial(a) => format!("partial({},{})", a.rule, a.completed.len() + 1),
            RuleTag::Rule(r) => r.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pet<C, R, B> {
    pub config: C,
    pub result: UnResult<R>,
    pub tag: RuleTag<C, R, B>,
    pub children: Vec<Arc<Pet<C, R, B>>>,
}

pub type PetOf<L> =
    Pet<<L as LanguageSemantics>::Config, <L as LanguageSemantics>::Res, <L as LanguageSemantics>::Bindings>;

impl<C: Clone, R: Clone, B: Clone> Pet<C, R, B> {
    pub fn leaf(config: C) -> Self {
        Pet { config, result: UnResult::Unknown, tag: RuleTag::Start, children: Vec::new() }
    }

    pub fn is_complete(&self) -> bool {
        self.result.is_known()
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Every node with its position (child indices from the root).
    pub fn nodes(&self) -> Vec<(Vec<usize>, &Pet<C, R, B>)> {
        let mut out = Vec::new();
        let mut todo = vec![(Vec::new(), self)];
        while let Some((pos, t)) = todo.pop() {
            for (i, c) in t.children.iter().enumerate().rev() {
                let mut p = pos.clone();
                p.push(i);
                todo.push((p, c.as_ref()));
            }
            out.push((pos, t));
        }
        out
    }

    /// Nodes on the active path, root first; empty for a complete tree.
    fn active_nodes(&self) -> Vec<&Pet<C, R, B>> {
        let mut out = Vec::new();
        let mut t = self;
        while !t.is_complete() {
            out.push(t);
            match t.children.last() {
                Some(c) if !c.is_complete() => t = c,
                _ => break,
            }
        }
        out
    }
}

impl<C: Display, R: Display, B> Display for Pet<C, R, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go<C: Display, R: Display, B>(t: &Pet<C, R, B>, indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            writeln!(f, "{:indent$}{} ⇒ {}  [{}]", "", t.config, t.result, t.tag.label(), indent = indent)?;
            for c in &t.children {
                go(c, indent + 2, f)?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

/// One transition from `t`. Complete and stuck trees have no successors.
pub fn step<L: LanguageSemantics>(sem: &L, t: &PetOf<L>) -> Vec<PetOf<L>> {
    if t.is_complete() {
        return Vec::new();
    }
    match &t.tag {
        RuleTag::Start => bigstep::start(sem, &t.config)
            .into_iter()
            .map(|s| match s {
                StartStep::Axiom { rule, result } => Pet {
                    config: t.config.clone(),
                    result: UnResult::Known(result),
                    tag: RuleTag::Rule(rule),
                    children: Vec::new(),
                },
                StartStep::FirstPremise(a) => Pet {
                    config: t.config.clone(),
                    result: UnResult::Unknown,
                    children: vec![Arc::new(Pet::leaf(a.demanded.clone()))],
                    tag: RuleTag::Partial(a),
                },
            })
            .collect(),
        RuleTag::Partial(a) => {
            let last = t.children.last().expect("partial node without children");
            match &last.result {
                UnResult::Known(r) => bigstep::advance(sem, a, r)
                    .into_iter()
                    .map(|k| match k {
                        Continuation::Finished { rule, result } => Pet {
                            config: t.config.clone(),
                            result: UnResult::Known(result),
                            tag: RuleTag::Rule(rule),
                            children: t.children.clone(),
                        },
                        Continuation::Demand(b) => {
                            let mut children = t.children.clone();
                            children.push(Arc::new(Pet::leaf(b.demanded.clone())));
                            Pet { config: t.config.clone(), result: UnResult::Unknown, tag: RuleTag::Partial(b), children }
                        }
                    })
                    .collect(),
                UnResult::Unknown => step(sem, last)
                    .into_iter()
                    .map(|c| {
                        let mut children = t.children.clone();
                        *children.last_mut().unwrap() = Arc::new(c);
                        Pet { config: t.config.clone(), result: UnResult::Unknown, tag: t.tag.clone(), children }
                    })
                    .collect(),
            }
        }
        RuleTag::Rule(_) => unreachable!("rule-tagged node with unknown result"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StuckKind {
    /// No rule starts on the configuration.
    NoRule,
    /// No rule sharing the applied prefix accepts the last premise's result.
    NoContinuation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StuckInfo<C, R> {
    pub kind: StuckKind,
    /// Configuration of the node where evaluation cannot proceed.
    pub config: C,
    pub position: Vec<usize>,
    /// Rule and one-based premise index for [`StuckKind::NoContinuation`].
    pub rule: Option<RuleName>,
    pub premise_index: Option<usize>,
    pub offending: Option<R>,
}

/// Classifies an irreducible incomplete tree by its deepest active node.
pub fn stuck_info<C: Clone, R: Clone, B: Clone>(t: &Pet<C, R, B>) -> Option<StuckInfo<C, R>> {
    let path = t.active_nodes();
    let deepest = *path.last()?;
    let pos: Vec<usize> = path[..path.len() - 1].iter().map(|n| n.children.len() - 1).collect();
    Some(match &deepest.tag {
        RuleTag::Partial(a) => StuckInfo {
            kind: StuckKind::NoContinuation,
            config: deepest.config.clone(),
            position: pos,
            rule: Some(a.rule),
            premise_index: Some(a.premise_index()),
            offending: deepest.children.last().and_then(|c| c.result.known().cloned()),
        },
        _ => StuckInfo {
            kind: StuckKind::NoRule,
            config: deepest.config.clone(),
            position: pos,
            rule: None,
            premise_index: None,
            offending: None,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathEntry<C> {
    pub config: C,
    /// Rule family, or `start` for an unevaluated leaf.
    pub rule: RuleName,
    pub premise_index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("the tree is complete and has no active path")]
pub struct CompleteTree;

pub fn active_path<C: Clone, R: Clone, B: Clone>(t: &Pet<C, R, B>) -> Result<Vec<PathEntry<C>>, CompleteTree> {
    if t.is_complete() {
        return Err(CompleteTree);
    }
    Ok(t.active_nodes()
        .into_iter()
        .map(|n| match &n.tag {
            RuleTag::Partial(a) => PathEntry { config: n.config.clone(), rule: a.rule, premise_index: Some(a.premise_index()) },
            _ => PathEntry { config: n.config.clone(), rule: "start", premise_index: None },
        })
        .collect())
}

/// The information order: `t2` extends `t1`. Known subtrees are compared by labels.
pub fn tree_leq<C: Eq, R: Eq, B>(t1: &Pet<C, R, B>, t2: &Pet<C, R, B>) -> bool {
    if t1.config != t2.config {
        return false;
    }
    match &t1.result {
        UnResult::Known(_) => same_labels(t1, t2),
        UnResult::Unknown => {
            t1.children.len() <= t2.children.len()
                && t1.children.iter().zip(&t2.children).all(|(a, b)| tree_leq(a, b))
        }
    }
}

fn same_labels<C: Eq, R: Eq, B>(t1: &Pet<C, R, B>, t2: &Pet<C, R, B>) -> bool {
    t1.config == t2.config
        && t1.result == t2.result
        && t1.children.len() == t2.children.len()
        && t1.children.iter().zip(&t2.children).all(|(a, b)| same_labels(a, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantKind {
    /// An unknown child below a known parent.
    UnknownBelowKnown,
    /// More than one unknown node at the same depth.
    TwoUnknownsAtDepth,
    /// A complete root over an unknown node.
    CompleteRootWithHole,
    /// Tag inconsistent with the node's result or children.
    MalformedTag,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind:?} at position {position:?}")]
pub struct InvariantViolation {
    pub kind: InvariantKind,
    pub position: Vec<usize>,
}

pub fn check_pet_invariants<C: Clone + Eq, R: Clone + Eq, B: Clone>(
    t: &Pet<C, R, B>,
) -> Result<(), InvariantViolation> {
    let mut unknown_at_depth: Vec<usize> = Vec::new();
    for (pos, n) in t.nodes() {
        let fail = |kind| Err(InvariantViolation { kind, position: pos.clone() });
        if !n.is_complete() {
            if unknown_at_depth.len() <= pos.len() {
                unknown_at_depth.resize(pos.len() + 1, 0);
            }
            unknown_at_depth[pos.len()] += 1;
            if unknown_at_depth[pos.len()] > 1 {
                return fail(InvariantKind::TwoUnknownsAtDepth);
            }
            if t.is_complete() {
                return fail(InvariantKind::CompleteRootWithHole);
            }
        }
        if n.is_complete() && n.children.iter().any(|c| !c.is_complete()) {
            return fail(InvariantKind::UnknownBelowKnown);
        }
        let tag_ok = match &n.tag {
            RuleTag::Start => !n.is_complete() && n.children.is_empty(),
            RuleTag::Rule(_) => n.is_complete(),
            RuleTag::Partial(a) => {
                !n.is_complete()
                    && a.conclusion == n.config
                    && n.children.len() == a.completed.len() + 1
                    && n.children.last().map(|c| &c.config) == Some(&a.demanded)
                    && a.completed.iter().zip(&n.children).all(|(j, c)| {
                        c.config == j.config && c.result.known() == Some(&j.result)
                    })
            }
        };
        if !tag_ok {
            return fail(InvariantKind::MalformedTag);
        }
    }
    Ok(())
}

/// One link of a divergence witness: `config` applies `rule` with the given
/// completed premises and demands `demanded` at `premise_index`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WitnessEntry<C, R> {
    pub config: C,
    pub rule: RuleName,
    pub premise_index: usize,
    pub premises: Vec<Judgment<C, R>>,
    pub demanded: C,
}

impl<C: Clone, R: Clone> WitnessEntry<C, R> {
    pub fn map_results<R2>(&self, f: &impl Fn(&R) -> R2) -> WitnessEntry<C, R2> {
        WitnessEntry {
            config: self.config.clone(),
            rule: self.rule,
            premise_index: self.premise_index,
            premises: self.premises.iter().map(|j| Judgment::new(j.config.clone(), f(&j.result))).collect(),
            demanded: self.demanded.clone(),
        }
    }
}

/// Evidence that the first stem configuration (or the cycle entry, when the
/// stem is empty) has an infinite computation. The stem leads from the
/// evaluated configuration into the cycle; the last cycle entry demands the
/// first one again.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DivergenceCertificate<C, R> {
    pub stem: Vec<WitnessEntry<C, R>>,
    pub cycle: Vec<WitnessEntry<C, R>>,
}

impl<C: Clone + Eq + Hash, R: Clone> DivergenceCertificate<C, R> {
    pub fn entry(&self) -> &C {
        &self.cycle[0].config
    }

    /// Configurations of the witness set.
    pub fn configs(&self) -> HashSet<C> {
        self.stem.iter().chain(&self.cycle).map(|e| e.config.clone()).collect()
    }

    pub fn map_results<R2>(&self, f: impl Fn(&R) -> R2) -> DivergenceCertificate<C, R2> {
        DivergenceCertificate {
            stem: self.stem.iter().map(|e| e.map_results(&f)).collect(),
            cycle: self.cycle.iter().map(|e| e.map_results(&f)).collect(),
        }
    }

    fn entries(&self) -> impl Iterator<Item = (&WitnessEntry<C, R>, &C)> {
        let all: Vec<&WitnessEntry<C, R>> = self.stem.iter().chain(&self.cycle).collect();
        let entry = &self.cycle[0].config;
        (0..all.len()).map(move |k| (all[k], all.get(k + 1).map(|e| &e.config).unwrap_or(entry)))
    }
}

/// Looks for a repeated configuration on the active path.
fn detect_cycle<C: Clone + Eq, R: Clone, B: Clone>(t: &Pet<C, R, B>) -> Option<DivergenceCertificate<C, R>> {
    let path = t.active_nodes();
    let (last, above) = path.split_last()?;
    let j = above.iter().position(|n| n.config == last.config)?;
    let entry = |n: &&Pet<C, R, B>| match &n.tag {
        RuleTag::Partial(a) => WitnessEntry {
            config: n.config.clone(),
            rule: a.rule,
            premise_index: a.premise_index(),
            premises: a.completed.clone(),
            demanded: a.demanded.clone(),
        },
        _ => unreachable!("inner active node must be partial"),
    };
    Some(DivergenceCertificate { stem: above[..j].iter().map(entry).collect(), cycle: above[j..].iter().map(entry).collect() })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Outcome<C, R, B> {
    Converged { result: R, tree: Pet<C, R, B>, steps: usize },
    Stuck { info: StuckInfo<C, R>, tree: Pet<C, R, B>, steps: usize },
    Diverges { certificate: DivergenceCertificate<C, R>, tree: Pet<C, R, B>, steps: usize },
    OutOfFuel { tree: Pet<C, R, B>, steps: usize },
}

pub type OutcomeOf<L> =
    Outcome<<L as LanguageSemantics>::Config, <L as LanguageSemantics>::Res, <L as LanguageSemantics>::Bindings>;

impl<C, R, B> Outcome<C, R, B> {
    pub fn tree(&self) -> &Pet<C, R, B> {
        match self {
            Outcome::Converged { tree, .. }
            | Outcome::Stuck { tree, .. }
            | Outcome::Diverges { tree, .. }
            | Outcome::OutOfFuel { tree, .. } => tree,
        }
    }

    pub fn steps(&self) -> usize {
        match self {
            Outcome::Converged { steps, .. }
            | Outcome::Stuck { steps, .. }
            | Outcome::Diverges { steps, .. }
            | Outcome::OutOfFuel { steps, .. } => *steps,
        }
    }

    pub fn result(&self) -> Option<&R> {
        match self {
            Outcome::Converged { result, .. } => Some(result),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Converged { .. } => "converged",
            Outcome::Stuck { .. } => "stuck",
            Outcome::Diverges { .. } => "diverges",
            Outcome::OutOfFuel { .. } => "out_of_fuel",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    /// Follow the first successor at every step.
    #[default]
    First,
    /// Explore every successor, merging structurally equal trees.
    Exhaustive,
}

/// Evaluates `c` for at most `fuel` transitions per branch.
pub fn run<L: LanguageSemantics>(sem: &L, c: &L::Config, fuel: usize, strategy: Strategy) -> Vec<OutcomeOf<L>> {
    run_observed(sem, c, fuel, strategy, &mut |_| {})
}

/// The outcome of the first branch.
pub fn run_first<L: LanguageSemantics>(sem: &L, c: &L::Config, fuel: usize) -> OutcomeOf<L> {
    run(sem, c, fuel, Strategy::First).pop().expect("first run yields one outcome")
}

/// Like [`run`], calling `observer` on every tree produced, the initial leaf included.
pub fn run_observed<L: LanguageSemantics>(
    sem: &L,
    c: &L::Config,
    fuel: usize,
    strategy: Strategy,
    observer: &mut dyn FnMut(&PetOf<L>),
) -> Vec<OutcomeOf<L>> {
    let mut outcomes = Vec::new();
    let mut seen_outcomes = HashSet::new();
    let mut push = |o: OutcomeOf<L>, out: &mut Vec<OutcomeOf<L>>| {
        if seen_outcomes.insert(o.clone()) {
            out.push(o);
        }
    };
    let root = Pet::leaf(c.clone());
    observer(&root);
    let mut frontier = vec![root];
    for steps in 0..=fuel {
        let mut next = Vec::new();
        let mut seen = HashSet::new();
        for t in frontier {
            let succs = step(sem, &t);
            if succs.is_empty() {
                let info = stuck_info(&t).expect("incomplete tree on the frontier");
                push(Outcome::Stuck { info, tree: t, steps }, &mut outcomes);
                continue;
            }
            if steps == fuel {
                push(Outcome::OutOfFuel { tree: t, steps }, &mut outcomes);
                continue;
            }
            let succs = match strategy {
                Strategy::First => succs.into_iter().take(1).collect(),
                Strategy::Exhaustive => succs,
            };
            for s in succs {
                observer(&s);
                if let UnResult::Known(r) = &s.result {
                    let result = r.clone();
                    push(Outcome::Converged { result, tree: s, steps: steps + 1 }, &mut outcomes);
                } else if let Some(certificate) = detect_cycle(&s) {
                    push(Outcome::Diverges { certificate, tree: s, steps: steps + 1 }, &mut outcomes);
                } else if seen.insert(s.clone()) {
                    next.push(s);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    outcomes
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("certificate has an empty cycle")]
    EmptyCycle,
    #[error("entry {index} does not demand the next configuration")]
    BrokenLink { index: usize },
    #[error("entry {index} cannot be replayed through start/advance")]
    NotReplayable { index: usize },
    #[error("premise {premise} of entry {index} does not converge to the recorded result")]
    PremiseDoesNotConverge { index: usize, premise: usize },
}

/// Validates a certificate: every link demands the next configuration, each
/// entry can be replayed through the oracle, and every premise before the
/// demanded one converges to its recorded result within `fuel`.
pub fn divergence_certificate_check<L: LanguageSemantics>(
    sem: &L,
    cert: &DivergenceCertificate<L::Config, L::Res>,
    fuel: usize,
) -> Result<(), CertificateError> {
    if cert.cycle.is_empty() {
        return Err(CertificateError::EmptyCycle);
    }
    for (index, (e, next)) in cert.entries().enumerate() {
        if &e.demanded != next || e.premise_index != e.premises.len() + 1 {
            return Err(CertificateError::BrokenLink { index });
        }
        for (premise, j) in e.premises.iter().enumerate() {
            let ok = run(sem, &j.config, fuel, Strategy::Exhaustive)
                .iter()
                .any(|o| o.result() == Some(&j.result));
            if !ok {
                return Err(CertificateError::PremiseDoesNotConverge { index, premise: premise + 1 });
            }
        }
        if !replays(sem, e) {
            return Err(CertificateError::NotReplayable { index });
        }
    }
    Ok(())
}

fn replays<L: LanguageSemantics>(sem: &L, e: &WitnessEntry<L::Config, L::Res>) -> bool {
    let config_at = |k: usize| if k < e.premises.len() { &e.premises[k].config } else { &e.demanded };
    let mut todo: Vec<_> = bigstep::start(sem, &e.config)
        .into_iter()
        .filter_map(|s| match s {
            StartStep::FirstPremise(a) if &a.demanded == config_at(0) => Some(a),
            _ => None,
        })
        .collect();
    while let Some(a) = todo.pop() {
        let k = a.completed.len();
        if k == e.premises.len() {
            if a.rule == e.rule {
                return true;
            }
            continue;
        }
        for cont in bigstep::advance(sem, &a, &e.premises[k].result) {
            if let Continuation::Demand(b) = cont {
                if &b.demanded == config_at(k + 1) {
                    todo.push(b);
                }
            }
        }
    }
    false
}
