use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::api::{ApiRegistry, CallableKind, ParamType};
use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaticErrorKind {
    UnknownCallable,
    Arity,
    Recursion,
    UnknownVariable,
    Misuse,
    EntryParams,
    RepeatBound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticError {
    pub kind: StaticErrorKind,
    pub message: String,
    pub span: Span,
}

impl fmt::Display for StaticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.message, self.span)
    }
}

/// Static checks over a program against the callables currently in scope.
pub fn analyze(func: &Function, registry: &ApiRegistry) -> Vec<StaticError> {
    let mut errors = Vec::new();
    if !func.params.is_empty() {
        errors.push(StaticError {
            kind: StaticErrorKind::EntryParams,
            message: format!(
                "function `{}` must take no parameters to be run as a program",
                func.name
            ),
            span: func.span,
        });
    }
    let mut scope: BTreeSet<String> = func.params.iter().cloned().collect();
    check_block(&func.body, func, registry, &mut scope, &mut errors);
    if let Some(cycle) = find_cycle(func, registry) {
        errors.push(StaticError {
            kind: StaticErrorKind::Recursion,
            message: format!("recursive call cycle: {}", cycle.join(" -> ")),
            span: func.span,
        });
    }
    errors
}

fn check_block(
    body: &[Stmt],
    func: &Function,
    registry: &ApiRegistry,
    scope: &mut BTreeSet<String>,
    errors: &mut Vec<StaticError>,
) {
    for stmt in body {
        match stmt {
            Stmt::Let { name, value, .. } => {
                check_expr(value, func, registry, scope, errors, false);
                scope.insert(name.clone());
            }
            Stmt::If {
                branches,
                otherwise,
                ..
            } => {
                for (cond, block) in branches {
                    check_expr(cond, func, registry, scope, errors, false);
                    check_block(block, func, registry, scope, errors);
                }
                if let Some(block) = otherwise {
                    check_block(block, func, registry, scope, errors);
                }
            }
            Stmt::Repeat { count, body, span } => {
                if *count < 1 {
                    errors.push(StaticError {
                        kind: StaticErrorKind::RepeatBound,
                        message: format!("repeat bound must be positive, got {count}"),
                        span: *span,
                    });
                }
                check_block(body, func, registry, scope, errors);
            }
            Stmt::Chat { args, .. } => {
                for a in args {
                    check_expr(a, func, registry, scope, errors, false);
                }
            }
            Stmt::Call(call) => check_call(call, func, registry, scope, errors, true, false),
        }
    }
}

fn check_expr(
    expr: &Expr,
    func: &Function,
    registry: &ApiRegistry,
    scope: &BTreeSet<String>,
    errors: &mut Vec<StaticError>,
    in_predicate: bool,
) {
    match expr {
        Expr::Var(name, span) => {
            if !scope.contains(name) {
                errors.push(StaticError {
                    kind: StaticErrorKind::UnknownVariable,
                    message: format!("unknown variable `{name}`"),
                    span: *span,
                });
            }
        }
        Expr::Unary(_, e) => check_expr(e, func, registry, scope, errors, in_predicate),
        Expr::Binary(_, a, b) => {
            check_expr(a, func, registry, scope, errors, in_predicate);
            check_expr(b, func, registry, scope, errors, in_predicate);
        }
        Expr::Call(call) => check_call(call, func, registry, scope, errors, false, in_predicate),
        _ => {}
    }
}

fn check_call(
    call: &Call,
    func: &Function,
    registry: &ApiRegistry,
    scope: &BTreeSet<String>,
    errors: &mut Vec<StaticError>,
    statement: bool,
    in_predicate: bool,
) {
    let mut push = |kind, message: String| {
        errors.push(StaticError {
            kind,
            message,
            span: call.span,
        })
    };
    let (kind, min, max, params) = if call.name == func.name {
        // self-calls are reported by the cycle check
        (
            CallableKind::Skill,
            func.params.len(),
            func.params.len(),
            Vec::new(),
        )
    } else {
        match registry.lookup(&call.name) {
            Some(sig) => (
                sig.kind,
                sig.min_arity(),
                sig.max_arity(),
                sig.params.iter().map(|p| p.ty).collect(),
            ),
            None => {
                push(
                    StaticErrorKind::UnknownCallable,
                    format!("unknown callable `{}`", call.name),
                );
                for a in &call.args {
                    check_expr(a, func, registry, scope, errors, in_predicate);
                }
                return;
            }
        }
    };
    let n = call.args.len();
    if n < min || n > max {
        let expected = if min == max {
            format!("{min}")
        } else {
            format!("{min} to {max}")
        };
        push(
            StaticErrorKind::Arity,
            format!(
                "`{}` takes {expected} argument(s) but {n} were given",
                call.name
            ),
        );
    }
    match kind {
        CallableKind::Query if statement => push(
            StaticErrorKind::Misuse,
            format!("query `{}` used as a statement has no effect", call.name),
        ),
        CallableKind::Skill if !statement => push(
            StaticErrorKind::Misuse,
            format!("skill `{}` cannot be used as a value", call.name),
        ),
        CallableKind::Primitive | CallableKind::Skill if in_predicate => push(
            StaticErrorKind::Misuse,
            format!(
                "`{}` cannot be called inside an exploreUntil condition; use queries only",
                call.name
            ),
        ),
        _ => {}
    }
    for (i, a) in call.args.iter().enumerate() {
        let predicate = params.get(i) == Some(&ParamType::Predicate);
        check_expr(a, func, registry, scope, errors, in_predicate || predicate);
    }
}

fn callees(func: &Function, registry: &ApiRegistry, program: &str) -> Vec<String> {
    let mut out = Vec::new();
    func.for_each_call(&mut |call, _| {
        if call.name == program || registry.skill(&call.name).is_some() {
            out.push(call.name.clone());
        }
    });
    out.sort();
    out.dedup();
    out
}

/// First skill-call cycle reachable from `func`, as a closed path of names.
pub fn find_cycle(func: &Function, registry: &ApiRegistry) -> Option<Vec<String>> {
    fn dfs(
        name: &str,
        func: &Function,
        registry: &ApiRegistry,
        program: &Function,
        path: &mut Vec<String>,
        done: &mut BTreeSet<String>,
    ) -> Option<Vec<String>> {
        if let Some(i) = path.iter().position(|p| p == name) {
            let mut cycle = path[i..].to_vec();
            cycle.push(name.to_string());
            return Some(cycle);
        }
        if done.contains(name) {
            return None;
        }
        path.push(name.to_string());
        for callee in callees(func, registry, &program.name) {
            let next: &Function = if callee == program.name {
                program
            } else {
                match registry.skill(&callee) {
                    Some(f) => f,
                    None => continue,
                }
            };
            if let Some(c) = dfs(&callee, next, registry, program, path, done) {
                return Some(c);
            }
        }
        path.pop();
        done.insert(name.to_string());
        None
    }
    dfs(
        &func.name,
        func,
        registry,
        func,
        &mut Vec::new(),
        &mut BTreeSet::new(),
    )
}

/// Upper bound on primitive calls one run of `func` can make.
pub fn static_bound(func: &Function, registry: &ApiRegistry) -> u64 {
    fn block(body: &[Stmt], registry: &ApiRegistry, depth: u32) -> u64 {
        body.iter()
            .map(|s| stmt(s, registry, depth))
            .fold(0u64, u64::saturating_add)
    }
    fn call(c: &Call, registry: &ApiRegistry, depth: u32) -> u64 {
        let own = match registry.lookup(&c.name).map(|s| s.kind) {
            Some(CallableKind::Primitive) => 1,
            Some(CallableKind::Skill) if depth < 64 => registry
                .skill(&c.name)
                .map(|f| block(&f.body, registry, depth + 1))
                .unwrap_or(0),
            Some(CallableKind::Skill) => u64::MAX,
            _ => 0,
        };
        c.args
            .iter()
            .map(|a| expr(a, registry, depth))
            .fold(own, u64::saturating_add)
    }
    fn expr(e: &Expr, registry: &ApiRegistry, depth: u32) -> u64 {
        match e {
            Expr::Unary(_, a) => expr(a, registry, depth),
            Expr::Binary(_, a, b) => expr(a, registry, depth).saturating_add(expr(b, registry, depth)),
            Expr::Call(c) => call(c, registry, depth),
            _ => 0,
        }
    }
    fn stmt(s: &Stmt, registry: &ApiRegistry, depth: u32) -> u64 {
        match s {
            Stmt::Let { value, .. } => expr(value, registry, depth),
            Stmt::If {
                branches,
                otherwise,
                ..
            } => {
                let conds = branches
                    .iter()
                    .map(|(c, _)| expr(c, registry, depth))
                    .fold(0u64, u64::saturating_add);
                let arms = branches
                    .iter()
                    .map(|(_, b)| block(b, registry, depth))
                    .chain(otherwise.iter().map(|b| block(b, registry, depth)))
                    .max()
                    .unwrap_or(0);
                conds.saturating_add(arms)
            }
            Stmt::Repeat { count, body, .. } => {
                block(body, registry, depth).saturating_mul((*count).max(0) as u64)
            }
            Stmt::Chat { args, .. } => args
                .iter()
                .map(|a| expr(a, registry, depth))
                .fold(0u64, u64::saturating_add),
            Stmt::Call(c) => call(c, registry, depth),
        }
    }
    block(&func.body, registry, 0)
}
