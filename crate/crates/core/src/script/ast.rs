use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Source location. Compares equal to every other span so that trees parsed
/// from differently formatted text can be compared structurally.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Let {
        name: String,
        value: Expr,
        span: Span,
    },
    If {
        /// `if` and every `else if`, in order.
        branches: Vec<(Expr, Vec<Stmt>)>,
        otherwise: Option<Vec<Stmt>>,
        span: Span,
    },
    Repeat {
        count: i64,
        body: Vec<Stmt>,
        span: Span,
    },
    Chat {
        args: Vec<Expr>,
        span: Span,
    },
    Call(Call),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub name: String,
    pub args: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 5,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Str(String),
    Bool(bool),
    Var(String, Span),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Call),
}

impl Function {
    /// Visits every call in the body, including calls nested in expressions.
    pub fn for_each_call<'a>(&'a self, f: &mut impl FnMut(&'a Call, CallPosition)) {
        walk_block(&self.body, f);
    }
}

/// Where a call appears.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallPosition {
    Statement,
    Expression,
}

fn walk_block<'a>(body: &'a [Stmt], f: &mut impl FnMut(&'a Call, CallPosition)) {
    for stmt in body {
        match stmt {
            Stmt::Let { value, .. } => walk_expr(value, f),
            Stmt::If {
                branches,
                otherwise,
                ..
            } => {
                for (cond, block) in branches {
                    walk_expr(cond, f);
                    walk_block(block, f);
                }
                if let Some(block) = otherwise {
                    walk_block(block, f);
                }
            }
            Stmt::Repeat { body, .. } => walk_block(body, f),
            Stmt::Chat { args, .. } => args.iter().for_each(|a| walk_expr(a, f)),
            Stmt::Call(call) => {
                f(call, CallPosition::Statement);
                call.args.iter().for_each(|a| walk_expr(a, f));
            }
        }
    }
}

fn walk_expr<'a>(expr: &'a Expr, f: &mut impl FnMut(&'a Call, CallPosition)) {
    match expr {
        Expr::Unary(_, e) => walk_expr(e, f),
        Expr::Binary(_, a, b) => {
            walk_expr(a, f);
            walk_expr(b, f);
        }
        Expr::Call(call) => {
            f(call, CallPosition::Expression);
            call.args.iter().for_each(|a| walk_expr(a, f));
        }
        _ => {}
    }
}
