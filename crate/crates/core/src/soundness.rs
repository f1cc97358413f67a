//! Soundness audits parameterized by an indexed predicate.
//!
//! A predicate assigns indices (types, typically) to configurations and says
//! which results satisfy an index. The audits explore every branch of the
//! stepper within a fuel bound and attribute failures to the local
//! conditions: LP (local preservation), ∃P and ∀P (progress of the rule
//! oracle), may-progress, and membership of premises in the predicate.

use std::fmt::{self, Debug, Display};
use std::hash::Hash;

use rayon::prelude::*;

use crate::bigstep::{LanguageSemantics, RuleName};
use crate::pet::{run, Outcome, OutcomeOf, Pet, Strategy, StuckInfo, StuckKind};

pub trait IndexedPredicate<C, R> {
    type Index: Clone + Eq + Debug;

    /// Indices ι with `c ∈ C_ι`; empty when `c` is outside the predicate.
    fn indices_of_config(&self, c: &C) -> Vec<Self::Index>;

    fn holds_result(&self, r: &R, idx: &Self::Index) -> bool;

    fn contains(&self, c: &C) -> bool {
        !self.indices_of_config(c).is_empty()
    }
}

impl<C, R, P: IndexedPredicate<C, R> + ?Sized> IndexedPredicate<C, R> for &P {
    type Index = P::Index;

    fn indices_of_config(&self, c: &C) -> Vec<Self::Index> {
        (**self).indices_of_config(c)
    }

    fn holds_result(&self, r: &R, idx: &Self::Index) -> bool {
        (**self).holds_result(r, idx)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// A complete rule concluded a result outside the index of its configuration.
    Lp,
    /// A configuration in the predicate has no applicable rule.
    ExistsP,
    /// A partial rule on a configuration in the predicate rejects a well-behaved premise result.
    ForallP,
    /// Every branch of a configuration in the predicate gets stuck.
    MayP,
    /// A premise of a configuration in the predicate left the predicate.
    Preservation,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Lp => "LP",
            Condition::ExistsP => "ExistsP",
            Condition::ForallP => "ForallP",
            Condition::MayP => "MayP",
            Condition::Preservation => "Preservation",
        }
    }
}

impl Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation<C, R> {
    pub condition: Condition,
    /// The audited configuration; re-running it reproduces the violation.
    pub root: C,
    /// Node where the condition fails.
    pub at: C,
    pub position: Vec<usize>,
    pub rule: Option<RuleName>,
    pub premise_index: Option<usize>,
    pub offending: Option<R>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<C, R> {
    Pass,
    Fail(Vec<Violation<C, R>>),
    /// Some branch ran out of fuel before anything conclusive was found.
    Inconclusive,
}

impl<C, R> Verdict<C, R> {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn violations(&self) -> &[Violation<C, R>] {
        match self {
            Verdict::Fail(v) => v,
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditStats {
    pub audited: usize,
    pub skipped: usize,
    pub converged: usize,
    pub stuck: usize,
    pub diverges: usize,
    pub out_of_fuel: usize,
    pub inconclusive: usize,
}

#[derive(Clone, Debug)]
pub struct AuditReport<C, R> {
    pub violations: Vec<Violation<C, R>>,
    /// Verdict per audited configuration, in corpus order.
    pub members: Vec<(C, Verdict<C, R>)>,
    pub stats: AuditStats,
}

impl<C, R> AuditReport<C, R> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, condition: Condition) -> usize {
        self.violations.iter().filter(|v| v.condition == condition).count()
    }
}

fn combine<C, R>(mut violations: Vec<Violation<C, R>>, inconclusive: bool) -> Verdict<C, R> {
    if !violations.is_empty() {
        violations.dedup_by(|a, b| a.condition == b.condition && a.position == b.position);
        Verdict::Fail(violations)
    } else if inconclusive {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    }
}

/// LP at every complete node and predicate membership of every premise
/// under a member configuration.
fn tree_violations<C, R, B, P>(pred: &P, root: &C, t: &Pet<C, R, B>) -> Vec<Violation<C, R>>
where
    C: Clone + Eq,
    R: Clone + Eq,
    B: Clone,
    P: IndexedPredicate<C, R>,
{
    let mut out = Vec::new();
    for (pos, n) in t.nodes() {
        let indices = pred.indices_of_config(&n.config);
        if indices.is_empty() {
            continue;
        }
        if let Some(r) = n.result.known() {
            if indices.iter().any(|i| !pred.holds_result(r, i)) {
                out.push(Violation {
                    condition: Condition::Lp,
                    root: root.clone(),
                    at: n.config.clone(),
                    position: pos.clone(),
                    rule: None,
                    premise_index: None,
                    offending: Some(r.clone()),
                });
            }
        }
        for (i, c) in n.children.iter().enumerate() {
            if !pred.contains(&c.config) {
                let mut p = pos.clone();
                p.push(i);
                out.push(Violation {
                    condition: Condition::Preservation,
                    root: root.clone(),
                    at: c.config.clone(),
                    position: p,
                    rule: None,
                    premise_index: Some(i + 1),
                    offending: None,
                });
            }
        }
    }
    out
}

fn progress_violation<C, R, P>(pred: &P, root: &C, info: &StuckInfo<C, R>, tree_premise_ok: bool) -> Option<Violation<C, R>>
where
    C: Clone,
    R: Clone,
    P: IndexedPredicate<C, R>,
{
    if !pred.contains(&info.config) {
        return None;
    }
    let condition = match info.kind {
        StuckKind::NoRule => Condition::ExistsP,
        StuckKind::NoContinuation if tree_premise_ok => Condition::ForallP,
        StuckKind::NoContinuation => return None,
    };
    Some(Violation {
        condition,
        root: root.clone(),
        at: info.config.clone(),
        position: info.position.clone(),
        rule: info.rule,
        premise_index: info.premise_index,
        offending: info.offending.clone(),
    })
}

/// Whether the offending premise of a stuck tree is itself well-behaved, so
/// that the failure belongs to the partial rule rather than to the premise.
fn stuck_premise_ok<C, R, B, P>(pred: &P, t: &Pet<C, R, B>, info: &StuckInfo<C, R>) -> bool
where
    C: Clone,
    R: Clone,
    B: Clone,
    P: IndexedPredicate<C, R>,
{
    let mut n = t;
    for &i in &info.position {
        n = &n.children[i];
    }
    let Some(last) = n.children.last() else { return true };
    let Some(r) = last.result.known() else { return true };
    pred.indices_of_config(&last.config).iter().all(|i| pred.holds_result(r, i))
}

fn audit_outcomes<L, P>(pred: &P, c: &L::Config, outcomes: &[OutcomeOf<L>], progress: bool, preservation: bool) -> Verdict<L::Config, L::Res>
where
    L: LanguageSemantics,
    P: IndexedPredicate<L::Config, L::Res>,
{
    let mut violations = Vec::new();
    let mut inconclusive = false;
    for o in outcomes {
        if preservation {
            violations.extend(tree_violations(pred, c, o.tree()));
        }
        match o {
            Outcome::Stuck { info, tree, .. } if progress => {
                let ok = stuck_premise_ok(pred, tree, info);
                violations.extend(progress_violation(pred, c, info, ok));
            }
            Outcome::OutOfFuel { .. } => inconclusive = true,
            _ => {}
        }
    }
    combine(violations, inconclusive)
}

/// Preservation: LP at every complete node of every explored tree, and
/// premises of member configurations stay in the predicate.
pub fn audit_preservation<L, P>(sem: &L, pred: &P, c: &L::Config, fuel: usize) -> Verdict<L::Config, L::Res>
where
    L: LanguageSemantics,
    P: IndexedPredicate<L::Config, L::Res>,
{
    let outcomes = run(sem, c, fuel, Strategy::Exhaustive);
    audit_outcomes::<L, P>(pred, c, &outcomes, false, true)
}

/// Progress: no branch gets stuck on a member configuration. A missing rule
/// is an ∃P failure, a rejected premise result a ∀P failure.
pub fn audit_progress<L, P>(sem: &L, pred: &P, c: &L::Config, fuel: usize) -> Verdict<L::Config, L::Res>
where
    L: LanguageSemantics,
    P: IndexedPredicate<L::Config, L::Res>,
{
    let outcomes = run(sem, c, fuel, Strategy::Exhaustive);
    audit_outcomes::<L, P>(pred, c, &outcomes, true, false)
}

fn tally<C, R, B>(stats: &mut AuditStats, outcomes: &[Outcome<C, R, B>]) {
    for o in outcomes {
        match o {
            Outcome::Converged { .. } => stats.converged += 1,
            Outcome::Stuck { .. } => stats.stuck += 1,
            Outcome::Diverges { .. } => stats.diverges += 1,
            Outcome::OutOfFuel { .. } => stats.out_of_fuel += 1,
        }
    }
}

fn report<L, F>(corpus: &[L::Config], per_member: F) -> AuditReport<L::Config, L::Res>
where
    L: LanguageSemantics,
    L::Config: Send + Sync,
    L::Res: Send + Sync,
    L::Bindings: Send + Sync,
    F: Fn(&L::Config) -> Option<(Verdict<L::Config, L::Res>, Vec<OutcomeOf<L>>)> + Sync,
{
    let results: Vec<_> = corpus.par_iter().map(|c| (c.clone(), per_member(c))).collect();
    let mut stats = AuditStats::default();
    let mut members = Vec::new();
    let mut violations = Vec::new();
    for (c, r) in results {
        let Some((verdict, outcomes)) = r else {
            stats.skipped += 1;
            continue;
        };
        stats.audited += 1;
        tally(&mut stats, &outcomes);
        if matches!(verdict, Verdict::Inconclusive) {
            stats.inconclusive += 1;
        }
        violations.extend(verdict.violations().iter().cloned());
        members.push((c, verdict));
    }
    AuditReport { violations, members, stats }
}

/// Soundness-must: on every member of `corpus` inside the predicate, no
/// branch goes wrong, i.e. gets stuck, and preservation holds.
pub fn soundness_must_audit<L, P>(sem: &L, pred: &P, corpus: &[L::Config], fuel: usize) -> AuditReport<L::Config, L::Res>
where
    L: LanguageSemantics + Sync,
    P: IndexedPredicate<L::Config, L::Res> + Sync,
    L::Config: Send + Sync,
    L::Res: Send + Sync,
    L::Bindings: Send + Sync,
{
    report::<L, _>(corpus, |c| {
        if !pred.contains(c) {
            return None;
        }
        let outcomes = run(sem, c, fuel, Strategy::Exhaustive);
        let verdict = audit_outcomes::<L, P>(pred, c, &outcomes, true, true);
        Some((verdict, outcomes))
    })
}

/// Progress only, per member; the input to [`check_progress_implies_may`].
pub fn progress_audit<L, P>(sem: &L, pred: &P, corpus: &[L::Config], fuel: usize) -> AuditReport<L::Config, L::Res>
where
    L: LanguageSemantics + Sync,
    P: IndexedPredicate<L::Config, L::Res> + Sync,
    L::Config: Send + Sync,
    L::Res: Send + Sync,
    L::Bindings: Send + Sync,
{
    report::<L, _>(corpus, |c| {
        if !pred.contains(c) {
            return None;
        }
        let outcomes = run(sem, c, fuel, Strategy::Exhaustive);
        let verdict = audit_outcomes::<L, P>(pred, c, &outcomes, true, false);
        Some((verdict, outcomes))
    })
}

/// Soundness-may: every member has some branch that converges or diverges.
pub fn soundness_may_audit<L, P>(sem: &L, pred: &P, corpus: &[L::Config], fuel: usize) -> AuditReport<L::Config, L::Res>
where
    L: LanguageSemantics + Sync,
    P: IndexedPredicate<L::Config, L::Res> + Sync,
    L::Config: Send + Sync,
    L::Res: Send + Sync,
    L::Bindings: Send + Sync,
{
    report::<L, _>(corpus, |c| {
        if !pred.contains(c) {
            return None;
        }
        let outcomes = run(sem, c, fuel, Strategy::Exhaustive);
        let good = outcomes.iter().any(|o| matches!(o, Outcome::Converged { .. } | Outcome::Diverges { .. }));
        let verdict = if good {
            Verdict::Pass
        } else if outcomes.iter().any(|o| matches!(o, Outcome::OutOfFuel { .. })) {
            Verdict::Inconclusive
        } else {
            let info = outcomes
                .iter()
                .find_map(|o| match o {
                    Outcome::Stuck { info, .. } => Some(info),
                    _ => None,
                })
                .expect("exploration yields an outcome");
            Verdict::Fail(vec![Violation {
                condition: Condition::MayP,
                root: c.clone(),
                at: info.config.clone(),
                position: info.position.clone(),
                rule: info.rule,
                premise_index: info.premise_index,
                offending: info.offending.clone(),
            }])
        };
        Some((verdict, outcomes))
    })
}

/// Progress implies may-progress: configurations that pass the progress
/// audit must pass the may audit. Returns the counterexamples otherwise.
pub fn check_progress_implies_may<C: Clone + Eq, R>(
    progress: &AuditReport<C, R>,
    may: &AuditReport<C, R>,
) -> Result<(), Vec<C>> {
    let bad: Vec<C> = progress
        .members
        .iter()
        .filter(|(_, v)| v.is_pass())
        .filter(|(c, _)| may.members.iter().any(|(d, w)| d == c && w.is_fail()))
        .map(|(c, _)| c.clone())
        .collect();
    if bad.is_empty() { Ok(()) } else { Err(bad) }
}
