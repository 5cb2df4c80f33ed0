use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::*;

/// Canonical source text for a function, four-space indented.
pub fn print(func: &Function) -> String {
    let mut out = format!("fn {}({}) {{\n", func.name, func.params.join(", "));
    block(&mut out, &func.body, 1);
    out.push_str("}\n");
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn block(out: &mut String, body: &[Stmt], depth: usize) {
    for stmt in body {
        indent(out, depth);
        match stmt {
            Stmt::Let { name, value, .. } => {
                out.push_str(&format!("let {name} = {};\n", expr(value)));
            }
            Stmt::If {
                branches,
                otherwise,
                ..
            } => {
                for (i, (cond, body)) in branches.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" else ");
                    }
                    out.push_str(&format!("if {} {{\n", expr(cond)));
                    block(out, body, depth + 1);
                    indent(out, depth);
                    out.push('}');
                }
                if let Some(body) = otherwise {
                    out.push_str(" else {\n");
                    block(out, body, depth + 1);
                    indent(out, depth);
                    out.push('}');
                }
                out.push('\n');
            }
            Stmt::Repeat { count, body, .. } => {
                out.push_str(&format!("repeat {count} {{\n"));
                block(out, body, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
            Stmt::Chat { args, .. } => {
                out.push_str(&format!("chat({});\n", list(args)));
            }
            Stmt::Call(call) => {
                out.push_str(&format!("{};\n", call_text(call)));
            }
        }
    }
}

fn list(args: &[Expr]) -> String {
    args.iter().map(expr).collect::<Vec<_>>().join(", ")
}

fn call_text(call: &Call) -> String {
    format!("{}({})", call.name, list(&call.args))
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders an expression; compound operands are always parenthesized.
pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Int(n) => format!("{n}"),
        Expr::Str(s) => quote(s),
        Expr::Bool(b) => format!("{b}"),
        Expr::Var(name, _) => name.clone(),
        Expr::Call(call) => call_text(call),
        Expr::Unary(op, inner) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            format!("{sym}{}", operand(inner))
        }
        Expr::Binary(op, a, b) => format!("{} {} {}", operand(a), op.symbol(), operand(b)),
    }
}

fn operand(e: &Expr) -> String {
    match e {
        Expr::Binary(..) | Expr::Unary(..) => format!("({})", expr(e)),
        // a negative literal would otherwise re-parse as a negation
        Expr::Int(n) if *n < 0 => format!("({n})"),
        _ => expr(e),
    }
}
