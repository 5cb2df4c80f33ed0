use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::api::{self, ApiRegistry, CallableKind, ParamType};
use super::ast::*;
use crate::world::{AgentState, BlockPos, OpOutcome, PrimitiveError, World};

pub const DEFAULT_BUDGET: u32 = 2000;
const MAX_STATEMENTS: u64 = 1_000_000;
const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecConfig {
    /// Maximum primitive calls per program run.
    pub budget: u32,
    /// Maximum statements and expression evaluations per program run.
    pub max_statements: u64,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            budget: DEFAULT_BUDGET,
            max_statements: MAX_STATEMENTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Extraction,
    Parse,
    Static,
    Runtime,
    BudgetExceeded,
}

impl ErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Extraction => "ExtractionError",
            ErrorKind::Parse => "SyntaxError",
            ErrorKind::Static => "StaticError",
            ErrorKind::Runtime => "RuntimeError",
            ErrorKind::BudgetExceeded => "BudgetExceeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub function: String,
    pub line: u32,
    pub col: u32,
}

/// An execution error as fed back to the next code-generation round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecError {
    pub kind: ErrorKind,
    pub message: String,
    pub line: u32,
    pub col: u32,
    /// Innermost frame last.
    pub trace: Vec<Frame>,
}

impl ExecError {
    pub fn new(kind: ErrorKind, message: impl Into<String>, span: Span) -> Self {
        ExecError {
            kind,
            message: message.into(),
            line: span.line,
            col: span.col,
            trace: Vec::new(),
        }
    }
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.message)?;
        if self.line > 0 {
            write!(f, " at line {}, col {}", self.line, self.col)?;
        }
        for frame in self.trace.iter().rev() {
            write!(
                f,
                "\n    in {} (line {}, col {})",
                frame.function, frame.line, frame.col
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub primitive: String,
    pub args: Vec<String>,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionOutcome {
    pub feedback: Vec<String>,
    pub error: Option<ExecError>,
    pub primitive_trace: Vec<TraceEntry>,
    pub end_state: AgentState,
    pub steps_used: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Str(String),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Str(s) => f.write_str(s),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Str(_) => "string",
            Value::Bool(_) => "bool",
        }
    }
}

type Env = BTreeMap<String, Value>;

fn unary(op: UnOp, v: Value) -> Result<Value, String> {
    match (op, v) {
        (UnOp::Neg, Value::Int(n)) => n
            .checked_neg()
            .map(Value::Int)
            .ok_or_else(|| "integer overflow".to_string()),
        (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
        (UnOp::Neg, v) => Err(format!("cannot negate a {}", v.type_name())),
        (UnOp::Not, v) => Err(format!("`!` needs a bool, got a {}", v.type_name())),
    }
}

/// Non-short-circuit binary operators.
fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, String> {
    use Value::*;
    let overflow = || "integer overflow".to_string();
    Ok(match (op, a, b) {
        (BinOp::Add, Int(x), Int(y)) => Int(x.checked_add(y).ok_or_else(overflow)?),
        (BinOp::Add, Str(x), y) => Str(format!("{x}{y}")),
        (BinOp::Add, x, Str(y)) => Str(format!("{x}{y}")),
        (BinOp::Sub, Int(x), Int(y)) => Int(x.checked_sub(y).ok_or_else(overflow)?),
        (BinOp::Mul, Int(x), Int(y)) => Int(x.checked_mul(y).ok_or_else(overflow)?),
        (BinOp::Div | BinOp::Rem, Int(_), Int(0)) => return Err("division by zero".into()),
        (BinOp::Div, Int(x), Int(y)) => Int(x.checked_div(y).ok_or_else(overflow)?),
        (BinOp::Rem, Int(x), Int(y)) => Int(x.checked_rem(y).ok_or_else(overflow)?),
        (BinOp::Lt, Int(x), Int(y)) => Bool(x < y),
        (BinOp::Le, Int(x), Int(y)) => Bool(x <= y),
        (BinOp::Gt, Int(x), Int(y)) => Bool(x > y),
        (BinOp::Ge, Int(x), Int(y)) => Bool(x >= y),
        (BinOp::Eq, x, y) => Bool(x == y),
        (BinOp::Ne, x, y) => Bool(x != y),
        (op, x, y) => {
            return Err(format!(
                "operator `{}` does not apply to {} and {}",
                op.symbol(),
                x.type_name(),
                y.type_name()
            ))
        }
    })
}

fn as_bool(v: Value, what: &str) -> Result<bool, String> {
    match v {
        Value::Bool(b) => Ok(b),
        other => Err(format!("{what} must be true or false, got a {}", other.type_name())),
    }
}

fn query(world: &World, name: &str, args: &[Value]) -> Result<Value, String> {
    let str_arg = |i: usize| match args.get(i) {
        Some(Value::Str(s)) => Ok(s.as_str()),
        Some(v) => Err(format!("{name} expects a string, got a {}", v.type_name())),
        None => Err(format!("{name} is missing an argument")),
    };
    let int_arg = |i: usize| match args.get(i) {
        Some(Value::Int(n)) => Ok(*n),
        Some(v) => Err(format!("{name} expects an int, got a {}", v.type_name())),
        None => Err(format!("{name} is missing an argument")),
    };
    let pos = world.position();
    Ok(match name {
        "inventory_count" => Value::Int(world.inventory_count(str_arg(0)?) as i64),
        "block_nearby" => Value::Bool(world.block_nearby(str_arg(0)?)),
        "entity_nearby" => Value::Bool(world.entity_nearby(str_arg(0)?)),
        "position_x" => Value::Int(pos.x as i64),
        "position_y" => Value::Int(pos.y as i64),
        "position_z" => Value::Int(pos.z as i64),
        "block_at" => Value::Str(world.block_at(BlockPos::new(
            coord(int_arg(0)?)?,
            coord(int_arg(1)?)?,
            coord(int_arg(2)?)?,
        ))),
        "health" => Value::Int(world.health() as i64),
        "hunger" => Value::Int(world.hunger() as i64),
        _ => return Err(format!("unknown query `{name}`")),
    })
}

fn coord(n: i64) -> Result<i32, String> {
    i32::try_from(n).map_err(|_| format!("coordinate {n} is out of range"))
}

/// Evaluates a side-effect-free expression; used for exploreUntil conditions.
fn eval_pure(expr: &Expr, env: &Env, world: &World) -> Result<Value, String> {
    match expr {
        Expr::Int(n) => Ok(Value::Int(*n)),
        Expr::Str(s) => Ok(Value::Str(s.clone())),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Var(name, _) => env
            .get(name)
            .cloned()
            .ok_or_else(|| format!("unknown variable `{name}`")),
        Expr::Unary(op, e) => unary(*op, eval_pure(e, env, world)?),
        Expr::Binary(BinOp::And, a, b) => Ok(Value::Bool(
            as_bool(eval_pure(a, env, world)?, "operand of `&&`")?
                && as_bool(eval_pure(b, env, world)?, "operand of `&&`")?,
        )),
        Expr::Binary(BinOp::Or, a, b) => Ok(Value::Bool(
            as_bool(eval_pure(a, env, world)?, "operand of `||`")?
                || as_bool(eval_pure(b, env, world)?, "operand of `||`")?,
        )),
        Expr::Binary(op, a, b) => binary(*op, eval_pure(a, env, world)?, eval_pure(b, env, world)?),
        Expr::Call(call) => {
            let args = call
                .args
                .iter()
                .map(|a| eval_pure(a, env, world))
                .collect::<Result<Vec<_>, _>>()?;
            query(world, &call.name, &args)
        }
    }
}

struct Interp<'a> {
    world: &'a mut World,
    registry: &'a ApiRegistry,
    program: &'a Function,
    config: ExecConfig,
    steps: u32,
    statements: u64,
    feedback: Vec<String>,
    trace: Vec<TraceEntry>,
    stack: Vec<Frame>,
}

/// Runs a program's entry function against the world. Stations placed by the
/// program are recycled afterwards whether or not it failed.
pub fn execute(
    func: &Function,
    world: &mut World,
    registry: &ApiRegistry,
    config: &ExecConfig,
) -> ExecutionOutcome {
    let mut it = Interp {
        world,
        registry,
        program: func,
        config: *config,
        steps: 0,
        statements: 0,
        feedback: Vec::new(),
        trace: Vec::new(),
        stack: Vec::new(),
    };
    let result = if !func.params.is_empty() {
        Err(ExecError::new(
            ErrorKind::Runtime,
            format!("function `{}` must take no parameters to be run as a program", func.name),
            func.span,
        ))
    } else {
        it.stack.push(Frame {
            function: func.name.clone(),
            line: func.span.line,
            col: func.span.col,
        });
        let mut env = Env::new();
        it.block(&func.body, &mut env)
    };
    let Interp {
        world,
        steps,
        feedback,
        trace,
        ..
    } = it;
    world.recycle_stations();
    ExecutionOutcome {
        feedback,
        error: result.err(),
        primitive_trace: trace,
        end_state: world.observe(),
        steps_used: steps,
    }
}

impl Interp<'_> {
    fn fail(&self, kind: ErrorKind, message: impl Into<String>, span: Span) -> ExecError {
        let mut e = ExecError::new(kind, message, span);
        e.trace = self.stack.clone();
        e
    }

    fn tick_statement(&mut self, span: Span) -> Result<(), ExecError> {
        self.statements += 1;
        if self.statements > self.config.max_statements {
            return Err(self.fail(
                ErrorKind::BudgetExceeded,
                format!(
                    "statement budget of {} exhausted",
                    self.config.max_statements
                ),
                span,
            ));
        }
        Ok(())
    }

    fn block(&mut self, body: &[Stmt], env: &mut Env) -> Result<(), ExecError> {
        for stmt in body {
            self.stmt(stmt, env)?;
        }
        Ok(())
    }

    fn stmt(&mut self, stmt: &Stmt, env: &mut Env) -> Result<(), ExecError> {
        match stmt {
            Stmt::Let { name, value, span } => {
                self.tick_statement(*span)?;
                let v = self.expr(value, env, *span)?;
                env.insert(name.clone(), v);
            }
            Stmt::If {
                branches,
                otherwise,
                span,
            } => {
                self.tick_statement(*span)?;
                for (cond, body) in branches {
                    let v = self.expr(cond, env, *span)?;
                    let taken = as_bool(v, "if condition")
                        .map_err(|m| self.fail(ErrorKind::Runtime, m, *span))?;
                    if taken {
                        return self.block(body, env);
                    }
                }
                if let Some(body) = otherwise {
                    self.block(body, env)?;
                }
            }
            Stmt::Repeat { count, body, span } => {
                if *count < 1 {
                    return Err(self.fail(
                        ErrorKind::Runtime,
                        format!("repeat bound must be positive, got {count}"),
                        *span,
                    ));
                }
                for _ in 0..*count {
                    self.tick_statement(*span)?;
                    self.block(body, env)?;
                }
            }
            Stmt::Chat { args, span } => {
                self.tick_statement(*span)?;
                let mut msg = String::new();
                for a in args {
                    let v = self.expr(a, env, *span)?;
                    msg.push_str(&v.to_string());
                }
                self.feedback.push(msg);
            }
            Stmt::Call(call) => {
                self.tick_statement(call.span)?;
                self.call(call, env, true)?;
            }
        }
        Ok(())
    }

    fn expr(&mut self, expr: &Expr, env: &mut Env, span: Span) -> Result<Value, ExecError> {
        self.tick_statement(span)?;
        let rt = |m: String| (ErrorKind::Runtime, m);
        let res: Result<Value, (ErrorKind, String)> = match expr {
            Expr::Int(n) => Ok(Value::Int(*n)),
            Expr::Str(s) => Ok(Value::Str(s.clone())),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Var(name, vspan) => {
                return env.get(name).cloned().ok_or_else(|| {
                    self.fail(ErrorKind::Runtime, format!("unknown variable `{name}`"), *vspan)
                })
            }
            Expr::Unary(op, e) => {
                let v = self.expr(e, env, span)?;
                unary(*op, v).map_err(rt)
            }
            Expr::Binary(op @ (BinOp::And | BinOp::Or), a, b) => {
                let what = format!("operand of `{}`", op.symbol());
                let left = self.expr(a, env, span)?;
                let left = as_bool(left, &what).map_err(|m| self.fail(ErrorKind::Runtime, m, span))?;
                if (*op == BinOp::And) != left {
                    return Ok(Value::Bool(left));
                }
                let right = self.expr(b, env, span)?;
                as_bool(right, &what).map(Value::Bool).map_err(rt)
            }
            Expr::Binary(op, a, b) => {
                let x = self.expr(a, env, span)?;
                let y = self.expr(b, env, span)?;
                binary(*op, x, y).map_err(rt)
            }
            Expr::Call(call) => return self.call(call, env, false),
        };
        res.map_err(|(kind, m)| self.fail(kind, m, span))
    }

    fn call(&mut self, call: &Call, env: &mut Env, statement: bool) -> Result<Value, ExecError> {
        let span = call.span;
        if call.name == self.program.name {
            return self.call_skill(self.program, call, env);
        }
        let Some(sig) = self.registry.lookup(&call.name) else {
            return Err(self.fail(
                ErrorKind::Runtime,
                format!("unknown callable `{}`", call.name),
                span,
            ));
        };
        let n = call.args.len();
        if n < sig.min_arity() || n > sig.max_arity() {
            return Err(self.fail(
                ErrorKind::Runtime,
                format!(
                    "`{}` takes {} to {} argument(s) but {n} were given",
                    call.name,
                    sig.min_arity(),
                    sig.max_arity()
                ),
                span,
            ));
        }
        match sig.kind {
            CallableKind::Skill => {
                if !statement {
                    return Err(self.fail(
                        ErrorKind::Runtime,
                        format!("skill `{}` cannot be used as a value", call.name),
                        span,
                    ));
                }
                let registry = self.registry;
                let func = registry.skill(&call.name).expect("looked up above");
                self.call_skill(func, call, env)
            }
            CallableKind::Query => {
                let mut args = Vec::new();
                for a in &call.args {
                    args.push(self.expr(a, env, span)?);
                }
                query(self.world, &call.name, &args)
                    .map_err(|m| self.fail(ErrorKind::Runtime, m, span))
            }
            CallableKind::Primitive => {
                let sig = sig.clone();
                self.primitive(&sig, call, env)
            }
        }
    }

    fn call_skill(&mut self, func: &Function, call: &Call, env: &mut Env) -> Result<Value, ExecError> {
        if call.args.len() != func.params.len() {
            return Err(self.fail(
                ErrorKind::Runtime,
                format!(
                    "`{}` takes {} argument(s) but {} were given",
                    func.name,
                    func.params.len(),
                    call.args.len()
                ),
                call.span,
            ));
        }
        if self.stack.len() >= MAX_DEPTH {
            return Err(self.fail(
                ErrorKind::Runtime,
                format!("call depth limit of {MAX_DEPTH} exceeded"),
                call.span,
            ));
        }
        let mut inner = Env::new();
        for (p, a) in func.params.iter().zip(&call.args) {
            let v = self.expr(a, env, call.span)?;
            inner.insert(p.clone(), v);
        }
        self.stack.push(Frame {
            function: func.name.clone(),
            line: call.span.line,
            col: call.span.col,
        });
        self.block(&func.body, &mut inner)?;
        self.stack.pop();
        Ok(Value::Bool(true))
    }

    fn primitive(
        &mut self,
        sig: &api::Signature,
        call: &Call,
        env: &mut Env,
    ) -> Result<Value, ExecError> {
        let span = call.span;
        let mut args: Vec<Value> = Vec::new();
        let mut predicate: Option<&Expr> = None;
        for (i, p) in sig.params.iter().enumerate() {
            match (call.args.get(i), &p.default) {
                (Some(e), _) if p.ty == ParamType::Predicate => {
                    predicate = Some(e);
                    args.push(Value::Bool(false));
                }
                (Some(e), _) => {
                    let v = self.expr(e, env, span)?;
                    let ok = matches!(
                        (p.ty, &v),
                        (ParamType::Int, Value::Int(_)) | (ParamType::Str, Value::Str(_))
                    );
                    if !ok {
                        return Err(self.fail(
                            ErrorKind::Runtime,
                            format!(
                                "{} expects {} to be a {}, got a {}",
                                sig.name,
                                p.name,
                                if p.ty == ParamType::Int { "int" } else { "string" },
                                v.type_name()
                            ),
                            span,
                        ));
                    }
                    args.push(v);
                }
                (None, Some(api::Default::Int(n))) => args.push(Value::Int(*n)),
                (None, Some(api::Default::Str(s))) => args.push(Value::Str(s.to_string())),
                (None, None) => {
                    return Err(self.fail(
                        ErrorKind::Runtime,
                        format!("{} is missing {}", sig.name, p.name),
                        span,
                    ))
                }
            }
        }
        if self.steps >= self.config.budget {
            return Err(self.fail(
                ErrorKind::BudgetExceeded,
                format!(
                    "primitive call budget of {} exhausted",
                    self.config.budget
                ),
                span,
            ));
        }
        self.steps += 1;
        let s = |i: usize| match &args[i] {
            Value::Str(s) => s.clone(),
            _ => String::new(),
        };
        let n = |i: usize| match &args[i] {
            Value::Int(n) => *n,
            _ => 0,
        };
        let pos = |i: usize| -> Result<BlockPos, String> {
            Ok(BlockPos::new(coord(n(i))?, coord(n(i + 1))?, coord(n(i + 2))?))
        };
        let rendered: Vec<String> = args
            .iter()
            .zip(&sig.params)
            .map(|(v, p)| match v {
                _ if p.ty == ParamType::Predicate => "<condition>".to_string(),
                Value::Str(s) => format!("\"{s}\""),
                v => v.to_string(),
            })
            .collect();
        let mut pred_error: Option<String> = None;
        let result: Result<OpOutcome, String> = {
            let world = &mut *self.world;
            let r = match sig.name.as_str() {
                "exploreUntil" => {
                    let cond = predicate.expect("exploreUntil has a condition parameter");
                    let snapshot = env.clone();
                    world.explore_until(&s(0), n(1), |w| {
                        match eval_pure(cond, &snapshot, w).and_then(|v| as_bool(v, "exploreUntil condition")) {
                            Ok(b) => b,
                            Err(m) => {
                                pred_error.get_or_insert(m);
                                true
                            }
                        }
                    })
                }
                "mineBlock" => world.mine_block(&s(0), n(1)),
                "craftItem" => world.craft_item(&s(0), n(1)),
                "placeItem" => match pos(1) {
                    Ok(p) => world.place_item(&s(0), p),
                    Err(m) => Err(PrimitiveError::Precondition(m)),
                },
                "smeltItem" => world.smelt_item(&s(0), &s(1), n(2)),
                "killMob" => world.kill_mob(&s(0), n(1)),
                "getItemFromChest" => match pos(0) {
                    Ok(p) => world.get_item_from_chest(p, &s(3), n(4)),
                    Err(m) => Err(PrimitiveError::Precondition(m)),
                },
                "depositItemIntoChest" => match pos(0) {
                    Ok(p) => world.deposit_item_into_chest(p, &s(3), n(4)),
                    Err(m) => Err(PrimitiveError::Precondition(m)),
                },
                "goto" => match pos(0) {
                    Ok(p) => world.goto(p, n(3)),
                    Err(m) => Err(PrimitiveError::Precondition(m)),
                },
                "equip" => world.equip(&s(0), &s(1)),
                "consume" => world.consume(&s(0)),
                other => Err(PrimitiveError::Precondition(format!(
                    "primitive `{other}` is not implemented"
                ))),
            };
            r.map_err(|e| e.to_string())
        };
        if let Some(m) = pred_error {
            self.trace.push(TraceEntry {
                primitive: sig.name.clone(),
                args: rendered,
                result: format!("error: {m}"),
            });
            return Err(self.fail(ErrorKind::Runtime, m, span));
        }
        match result {
            Ok(outcome) => {
                self.feedback.extend(outcome.feedback.iter().cloned());
                self.trace.push(TraceEntry {
                    primitive: sig.name.clone(),
                    args: rendered,
                    result: if outcome.success { "ok" } else { "incomplete" }.to_string(),
                });
                Ok(Value::Bool(outcome.success))
            }
            Err(m) => {
                self.trace.push(TraceEntry {
                    primitive: sig.name.clone(),
                    args: rendered,
                    result: format!("error: {m}"),
                });
                Err(self.fail(ErrorKind::Runtime, m, span))
            }
        }
    }
}
