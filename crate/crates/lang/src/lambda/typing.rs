use bsm_core::soundness::IndexedPredicate;
use thiserror::Error;

use super::types::{type_equal, LType};
use super::{Expr, Value};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("`{0}` has type {1}, which is not a function type")]
    NotAFunction(String, LType),
    #[error("argument `{0}` has type {1}, expected {2}")]
    ArgumentMismatch(String, LType, LType),
    #[error("`{0}` has type {1}, expected nat")]
    NotNat(String, LType),
    #[error("choice branches have types {0} and {1}")]
    ChoiceMismatch(LType, LType),
}

/// Church-style typing; the type of a well-typed term is unique.
pub fn typecheck(ctx: &[(String, LType)], e: &Expr) -> Result<LType, TypeError> {
    match e {
        Expr::Var(x) => ctx
            .iter()
            .rev()
            .find(|(y, _)| y == x)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| TypeError::UnboundVariable(x.clone())),
        Expr::Nat(_) => Ok(LType::nat()),
        Expr::Abs(x, t, b) => {
            let mut inner = ctx.to_vec();
            inner.push((x.clone(), t.clone()));
            Ok(LType::arrow(t, &typecheck(&inner, b)?))
        }
        Expr::App(f, a) => {
            let tf = typecheck(ctx, f)?;
            let ta = typecheck(ctx, a)?;
            let Some((dom, cod)) = tf.as_arrow() else {
                return Err(TypeError::NotAFunction(f.to_string(), tf));
            };
            if type_equal(&dom, &ta) {
                Ok(cod)
            } else {
                Err(TypeError::ArgumentMismatch(a.to_string(), ta, dom))
            }
        }
        Expr::Succ(a) => {
            let t = typecheck(ctx, a)?;
            if t.is_nat() { Ok(t) } else { Err(TypeError::NotNat(a.to_string(), t)) }
        }
        Expr::Choice(a, b) => {
            let ta = typecheck(ctx, a)?;
            let tb = typecheck(ctx, b)?;
            if type_equal(&ta, &tb) { Ok(ta) } else { Err(TypeError::ChoiceMismatch(ta, tb)) }
        }
    }
}

/// Closed well-typed terms indexed by their type. With `fool` set, the
/// ill-typed `0 0` is also admitted at `nat`, which breaks ∀P.
#[derive(Clone, Copy, Debug, Default)]
pub struct SimpleTypes {
    pub fool: bool,
}

impl IndexedPredicate<Expr, Value> for SimpleTypes {
    type Index = LType;

    fn indices_of_config(&self, c: &Expr) -> Vec<LType> {
        if self.fool && *c == Expr::App(Box::new(Expr::Nat(0)), Box::new(Expr::Nat(0))) {
            return vec![LType::nat()];
        }
        typecheck(&[], c).into_iter().collect()
    }

    fn holds_result(&self, r: &Value, idx: &LType) -> bool {
        typecheck(&[], &r.to_expr()).is_ok_and(|t| type_equal(&t, idx))
    }
}
