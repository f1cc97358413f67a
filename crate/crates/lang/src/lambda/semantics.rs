use bsm_core::bigstep::{ActivationOf, ContinuationOf, StartStepOf};
use bsm_core::{Activation, Continuation, LanguageSemantics, RuleName, StartStep};

use super::{Expr, Value};

/// Premise order of the application rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum AppStrategy {
    /// `e1 ⇒ λx.e`, `e2 ⇒ v2`, `e[v2/x] ⇒ v`.
    #[default]
    LeftToRight,
    /// `e2 ⇒ v2`, `e1 ⇒ λx.e`, `e[v2/x] ⇒ v`.
    RightToLeft,
    /// `e1 ⇒ v1`, `e2 ⇒ v2`, `v1 ⇒ λx.e`, `e[v2/x] ⇒ v`: a non-function
    /// operator is only detected after the argument is evaluated.
    Late,
}

impl AppStrategy {
    pub fn rule(self) -> RuleName {
        match self {
            AppStrategy::LeftToRight => "app",
            AppStrategy::RightToLeft => "app-r",
            AppStrategy::Late => "app-late",
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LambdaSemantics {
    pub strategy: AppStrategy,
    /// Removes the successor rule; used to exhibit an ∃P failure.
    pub drop_succ: bool,
}

impl LambdaSemantics {
    pub fn new(strategy: AppStrategy) -> Self {
        LambdaSemantics { strategy, drop_succ: false }
    }
}

fn lambda_parts(v: &Value) -> Option<(&str, &Expr)> {
    match v {
        Value::Abs(x, _, b) => Some((x, b)),
        Value::Nat(_) => None,
    }
}

impl LanguageSemantics for LambdaSemantics {
    type Config = Expr;
    type Res = Value;
    type Bindings = ();

    fn start(&self, c: &Expr) -> Vec<StartStepOf<Self>> {
        let first = |rule, d: &Expr| StartStep::FirstPremise(Activation::first(rule, (), c.clone(), d.clone()));
        match c {
            Expr::Nat(_) | Expr::Abs(..) => {
                vec![StartStep::Axiom { rule: "val", result: c.as_value().expect("values") }]
            }
            Expr::Var(_) => vec![],
            Expr::App(e1, e2) => match self.strategy {
                AppStrategy::RightToLeft => vec![first(self.strategy.rule(), e2)],
                _ => vec![first(self.strategy.rule(), e1)],
            },
            Expr::Succ(_) if self.drop_succ => vec![],
            Expr::Succ(e) => vec![first("succ", e)],
            Expr::Choice(e1, e2) if e1 == e2 => vec![first("choice-1", e1)],
            Expr::Choice(e1, e2) => vec![first("choice-1", e1), first("choice-2", e2)],
        }
    }

    fn advance(&self, a: &ActivationOf<Self>, r: &Value) -> Vec<ContinuationOf<Self>> {
        let demand = |next: Expr| vec![Continuation::Demand(a.then(r.clone(), a.rule, (), next))];
        let finish = |result: Value| vec![Continuation::Finished { rule: a.rule, result }];
        let k = a.completed.len();
        match &a.conclusion {
            Expr::Succ(_) => match r {
                Value::Nat(n) => finish(Value::Nat(n + 1)),
                Value::Abs(..) => vec![],
            },
            Expr::Choice(..) => finish(r.clone()),
            Expr::App(e1, e2) => match (self.strategy, k) {
                (AppStrategy::LeftToRight, 0) => match lambda_parts(r) {
                    Some(_) => demand((**e2).clone()),
                    None => vec![],
                },
                (AppStrategy::LeftToRight, 1) => {
                    let (x, body) = lambda_parts(&a.completed[0].result).expect("checked at premise 1");
                    demand(body.subst(x, &r.to_expr()))
                }
                (AppStrategy::RightToLeft, 0) => demand((**e1).clone()),
                (AppStrategy::RightToLeft, 1) => match lambda_parts(r) {
                    Some((x, body)) => demand(body.subst(x, &a.completed[0].result.to_expr())),
                    None => vec![],
                },
                (AppStrategy::Late, 0) => demand((**e2).clone()),
                (AppStrategy::Late, 1) => demand(a.completed[0].result.to_expr()),
                (AppStrategy::Late, 2) => match lambda_parts(r) {
                    Some((x, body)) => demand(body.subst(x, &a.completed[1].result.to_expr())),
                    None => vec![],
                },
                (AppStrategy::Late, 3) | (_, 2) => finish(r.clone()),
                _ => vec![],
            },
            _ => vec![],
        }
    }

    fn premise_bound(&self, c: &Expr) -> usize {
        match c {
            Expr::App(..) if self.strategy == AppStrategy::Late => 4,
            Expr::App(..) => 3,
            Expr::Succ(_) | Expr::Choice(..) => 1,
            _ => 0,
        }
    }
}
