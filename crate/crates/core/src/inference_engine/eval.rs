use std::collections::BTreeMap;

use super::EngineError;
use crate::knowledge_model::{SettingValue, Settings};
use crate::rule_dsl::{Atom, Expr, Test, TestOp, TestRhs};

pub type Bindings = BTreeMap<String, Atom>;

/// Evaluates an action expression. `str-cat` renders integers in decimal
/// and strings and symbols without quotes.
pub fn eval_expr(expr: &Expr, bindings: &Bindings, globals: &BTreeMap<String, Atom>) -> Result<Atom, EngineError> {
    match expr {
        Expr::Literal(a) => Ok(a.clone()),
        Expr::Variable(v) => bindings.get(v).cloned().ok_or_else(|| EngineError::Unbound(v.clone())),
        Expr::Global(g) => globals.get(g).cloned().ok_or_else(|| EngineError::UndeclaredGlobal(g.clone())),
        Expr::StrCat(parts) => {
            let mut out = String::new();
            for p in parts {
                out.push_str(&eval_expr(p, bindings, globals)?.text());
            }
            Ok(Atom::String(out))
        }
        Expr::Setting(name) => Err(EngineError::Guard(format!("setting {name} used outside a test"))),
    }
}

enum Operand<'a> {
    Atom(Atom),
    Setting(&'a str, &'a SettingValue),
}

fn operand<'a>(
    expr: &'a Expr,
    bindings: &Bindings,
    globals: &BTreeMap<String, Atom>,
    settings: &'a Settings,
) -> Result<Operand<'a>, EngineError> {
    match expr {
        Expr::Setting(name) => settings
            .get(name)
            .map(|v| Operand::Setting(name, v))
            .ok_or_else(|| EngineError::Guard(format!("unknown setting {name}"))),
        other => eval_expr(other, bindings, globals).map(Operand::Atom),
    }
}

fn scalar(op: &Operand<'_>) -> Result<Atom, EngineError> {
    match op {
        Operand::Atom(a) => Ok(a.clone()),
        Operand::Setting(_, SettingValue::Integer { value }) => Ok(Atom::Integer(*value)),
        Operand::Setting(_, SettingValue::OrdinalThreshold { value, .. }) => Ok(Atom::Symbol(value.clone())),
        Operand::Setting(name, v) => Err(EngineError::Guard(format!("{} setting {name} is not a single value", v.kind_name()))),
    }
}

/// Position of `op` on an ordinal scale, or its integer value.
fn ordinal_pair(lhs: &Operand<'_>, rhs: &Operand<'_>, settings: &Settings) -> Result<(i64, i64), EngineError> {
    let (a, b) = (scalar(lhs)?, scalar(rhs)?);
    if let (Atom::Integer(x), Atom::Integer(y)) = (&a, &b) {
        return Ok((*x, *y));
    }
    let threshold_scale = [lhs, rhs].into_iter().find_map(|o| match o {
        Operand::Setting(_, SettingValue::OrdinalThreshold { scale, .. }) => Some(scale.as_str()),
        _ => None,
    });
    let scale_name = match threshold_scale {
        Some(s) => s.to_string(),
        None => settings
            .names()
            .find(|n| settings.scale(n).is_some_and(|pts| pts.contains(&a.text()) && pts.contains(&b.text())))
            .ok_or_else(|| EngineError::Guard(format!("{a} and {b} are not comparable")))?
            .to_string(),
    };
    let points = settings
        .scale(&scale_name)
        .ok_or_else(|| EngineError::Guard(format!("unknown scale {scale_name}")))?;
    let rank = |x: &Atom| {
        points
            .iter()
            .position(|p| *p == x.text() && !matches!(x, Atom::Integer(_)))
            .map(|i| i as i64)
            .ok_or_else(|| EngineError::Guard(format!("{x} is not on scale {scale_name}")))
    };
    Ok((rank(&a)?, rank(&b)?))
}

pub fn eval_test(
    test: &Test,
    bindings: &Bindings,
    globals: &BTreeMap<String, Atom>,
    settings: &Settings,
) -> Result<bool, EngineError> {
    let lhs = operand(&test.lhs, bindings, globals, settings)?;
    match (test.op, &test.rhs) {
        (TestOp::Member, TestRhs::Atoms(alternatives)) => Ok(alternatives.contains(&scalar(&lhs)?)),
        (TestOp::Member, TestRhs::Expr(rhs)) => {
            let value = scalar(&lhs)?;
            Ok(match operand(rhs, bindings, globals, settings)? {
                Operand::Setting(_, SettingValue::IntegerSet { value: set }) => {
                    matches!(value, Atom::Integer(n) if set.contains(&n))
                }
                Operand::Setting(_, SettingValue::OrdinalScale { value: points }) => {
                    matches!(&value, Atom::Symbol(s) if points.contains(s))
                }
                other => scalar(&other)? == value,
            })
        }
        (op, TestRhs::Expr(rhs)) => {
            let rhs = operand(rhs, bindings, globals, settings)?;
            match op {
                TestOp::Eq => Ok(scalar(&lhs)? == scalar(&rhs)?),
                TestOp::Neq => Ok(scalar(&lhs)? != scalar(&rhs)?),
                TestOp::Gte => ordinal_pair(&lhs, &rhs, settings).map(|(a, b)| a >= b),
                TestOp::Lte => ordinal_pair(&lhs, &rhs, settings).map(|(a, b)| a <= b),
                TestOp::Member => unreachable!("handled above"),
            }
        }
        (op, TestRhs::Atoms(_)) => Err(EngineError::Guard(format!("{} takes a single operand", op.keyword()))),
    }
}
