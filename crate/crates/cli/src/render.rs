//! JSON documents for trees, outcomes and audit reports.

use bsm_core::bigstep::LanguageSemantics;
use bsm_core::pet::{DivergenceCertificate, PetOf, StuckInfo, WitnessEntry};
use bsm_core::soundness::{AuditReport, AuditStats, Violation};
use bsm_lang::fj::imperative::ImperativeFj;
use bsm_lang::fj::minifj::MiniFj;
use bsm_lang::lambda::LambdaSemantics;
use serde_json::{json, Value};

/// How a language prints its configurations and results.
pub trait Show: LanguageSemantics {
    fn show_config(&self, c: &Self::Config) -> String {
        c.to_string()
    }

    fn show_result(&self, r: &Self::Res) -> String {
        r.to_string()
    }
}

/// Ω and ω are printed by name.
impl Show for LambdaSemantics {
    fn show_config(&self, c: &Self::Config) -> String {
        c.show_abbrev()
    }

    fn show_result(&self, r: &Self::Res) -> String {
        r.to_expr().show_abbrev()
    }
}

impl Show for MiniFj {}

impl Show for ImperativeFj {}

pub fn tree<L: Show>(sem: &L, t: &PetOf<L>) -> Value {
    json!({
        "config": sem.show_config(&t.config),
        "result": t.result.known().map_or_else(|| "?".to_string(), |r| sem.show_result(r)),
        "rule": t.tag.label(),
        "children": t.children.iter().map(|c| tree(sem, c)).collect::<Vec<_>>(),
    })
}

fn entry<L: Show>(sem: &L, e: &WitnessEntry<L::Config, L::Res>) -> Value {
    json!({
        "config": sem.show_config(&e.config),
        "rule": e.rule,
        "premise_index": e.premise_index,
        "premises": e.premises.iter().map(|j| json!({
            "config": sem.show_config(&j.config),
            "result": sem.show_result(&j.result),
        })).collect::<Vec<_>>(),
        "demanded": sem.show_config(&e.demanded),
    })
}

pub fn certificate<L: Show>(sem: &L, c: &DivergenceCertificate<L::Config, L::Res>) -> Value {
    json!({
        "stem": c.stem.iter().map(|e| entry(sem, e)).collect::<Vec<_>>(),
        "cycle": c.cycle.iter().map(|e| entry(sem, e)).collect::<Vec<_>>(),
    })
}

pub fn stuck<L: Show>(sem: &L, s: &StuckInfo<L::Config, L::Res>) -> Value {
    json!({
        "kind": "stuck",
        "at": sem.show_config(&s.config),
        "position": s.position,
        "reason": match s.kind {
            bsm_core::pet::StuckKind::NoRule => "no-rule",
            bsm_core::pet::StuckKind::NoContinuation => "no-continuation",
        },
        "rule": s.rule,
        "premise_index": s.premise_index,
        "offending": s.offending.as_ref().map(|r| sem.show_result(r)),
    })
}

pub fn trace<L: Show>(sem: &L, prefix: &[L::Config], period: &[L::Config]) -> Value {
    let show = |cs: &[L::Config]| cs.iter().map(|c| sem.show_config(c)).collect::<Vec<_>>();
    json!({ "prefix": show(prefix), "period": show(period) })
}

fn stats(s: &AuditStats) -> Value {
    json!({
        "audited": s.audited,
        "skipped": s.skipped,
        "converged": s.converged,
        "stuck": s.stuck,
        "diverges": s.diverges,
        "out_of_fuel": s.out_of_fuel,
        "inconclusive": s.inconclusive,
    })
}

pub fn violation<L: Show>(sem: &L, v: &Violation<L::Config, L::Res>) -> Value {
    json!({
        "condition": v.condition.name(),
        "root": sem.show_config(&v.root),
        "at": sem.show_config(&v.at),
        "position": v.position,
        "rule": v.rule,
        "premise_index": v.premise_index,
        "offending": v.offending.as_ref().map(|r| sem.show_result(r)),
    })
}

pub fn report<L: Show>(sem: &L, r: &AuditReport<L::Config, L::Res>) -> Value {
    json!({
        "passed": r.passed(),
        "stats": stats(&r.stats),
        "violations": r.violations.iter().map(|v| violation(sem, v)).collect::<Vec<_>>(),
    })
}
