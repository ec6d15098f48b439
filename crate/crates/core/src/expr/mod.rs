//! Surface expressions `f(x, y)`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | 'y' | 'pi' | 'e' | ident
//!          | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-2^2`
//! is `-(2^2) = -4`. Any other identifier is a named parameter bound through
//! a [`ParamEnv`] at evaluation time.

mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Integer exponents up to this magnitude are evaluated by repeated
/// multiplication.
pub const MAX_EXACT_INTEGER_POWER: i32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unexpected character `{ch}` at byte {offset}")]
    UnexpectedCharacter { offset: usize, ch: char },
    #[error("invalid number `{text}` at byte {offset}")]
    InvalidNumber { offset: usize, text: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { offset: usize, name: String },
    #[error("function `{name}` at byte {offset} takes 1 argument, got {found}")]
    Arity {
        offset: usize,
        name: String,
        found: usize,
    },
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::Syntax { offset, .. }
            | ParseError::UnexpectedCharacter { offset, .. }
            | ParseError::InvalidNumber { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::Arity { offset, .. } => Some(*offset),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("`{0}` is not a valid parameter name")]
    InvalidName(String),
    #[error("`{0}` is reserved and cannot be used as a parameter")]
    Reserved(String),
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: String, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    X,
    Y,
}

impl Variable {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "x" => Some(Variable::X),
            "y" => Some(Variable::Y),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "pi" => Some(Constant::Pi),
            "e" => Some(Constant::E),
            _ => None,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Function {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Exp,
    Log,
    Abs,
}

impl Function {
    pub const ALL: [Function; 7] = [
        Function::Sin,
        Function::Cos,
        Function::Tan,
        Function::Sqrt,
        Function::Exp,
        Function::Log,
        Function::Abs,
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        Function::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Sqrt => "sqrt",
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Abs => "abs",
        }
    }

    /// `log` is the natural logarithm.
    pub fn eval(self, v: f64) -> f64 {
        match self {
            Function::Sin => v.sin(),
            Function::Cos => v.cos(),
            Function::Tan => v.tan(),
            Function::Sqrt => v.sqrt(),
            Function::Exp => v.exp(),
            Function::Log => v.ln(),
            Function::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Variable),
    Const(Constant),
    Param(String),
    Neg(Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Function, Box<Expr>),
}

/// Returns true for names that cannot be parameters.
pub fn is_reserved(name: &str) -> bool {
    Variable::from_name(name).is_some()
        || Constant::from_name(name).is_some()
        || Function::from_name(name).is_some()
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Expr {
    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn parse(source: &str) -> Result<Expr, ParseError> {
        parser::parse(source)
    }

    /// Names of the parameters the expression refers to.
    pub fn free_parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_parameters(&mut out);
        out
    }

    fn collect_parameters(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Const(_) => {}
            Expr::Param(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(inner) | Expr::Call(_, inner) => inner.collect_parameters(out),
            Expr::Binary(_, lhs, rhs) => {
                lhs.collect_parameters(out);
                rhs.collect_parameters(out);
            }
        }
    }

    /// Evaluates at `(x, y)`. Domain errors (division by zero, `log` of a
    /// non-positive value, ...) produce non-finite results, not errors.
    pub fn evaluate(&self, x: f64, y: f64, env: &ParamEnv) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(Variable::X) => x,
            Expr::Var(Variable::Y) => y,
            Expr::Const(c) => c.value(),
            Expr::Param(name) => env
                .get(name)
                .ok_or_else(|| EvalError::UnboundParameter(name.clone()))?,
            Expr::Neg(inner) => -inner.evaluate(x, y, env)?,
            Expr::Call(f, arg) => f.eval(arg.evaluate(x, y, env)?),
            Expr::Binary(op, lhs, rhs) => {
                let a = lhs.evaluate(x, y, env)?;
                let b = rhs.evaluate(x, y, env)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => a / b,
                    BinaryOp::Pow => power(a, b),
                }
            }
        })
    }

    /// Binding strength used when printing; higher binds tighter.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinaryOp::Pow, ..) => 4,
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 0,
            _ => 5,
        }
    }
}

/// `base^exponent`; small integer exponents use repeated multiplication so
/// results do not depend on the platform's `pow`.
pub fn power(base: f64, exponent: f64) -> f64 {
    let max = f64::from(MAX_EXACT_INTEGER_POWER);
    if exponent.fract() == 0.0 && exponent.abs() <= max {
        let n = exponent.abs() as u32;
        let mut acc = 1.0;
        for _ in 0..n {
            acc *= base;
        }
        if exponent < 0.0 {
            1.0 / acc
        } else {
            acc
        }
    } else {
        base.powf(exponent)
    }
}

struct Operand<'a>(&'a Expr, u8);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.precedence() < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Prints source text that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Variable::X) => f.write_str("x"),
            Expr::Var(Variable::Y) => f.write_str("y"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Param(name) => f.write_str(name),
            Expr::Neg(inner) => write!(f, "-{}", Operand(inner, 3)),
            Expr::Call(func, arg) => write!(f, "{}({})", func.name(), arg),
            Expr::Binary(op, lhs, rhs) => {
                let (left, right) = match op {
                    BinaryOp::Add | BinaryOp::Sub => (1, 2),
                    BinaryOp::Mul | BinaryOp::Div => (2, 3),
                    BinaryOp::Pow => (5, 3),
                };
                write!(f, "{} {} {}", Operand(lhs, left), op.symbol(), Operand(rhs, right))
            }
        }
    }
}

/// Parameter bindings, e.g. `a` and `b` in `sin((x-y)/a)*cos((x+y)/b)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamEnv {
    values: BTreeMap<String, f64>,
}

impl ParamEnv {
    pub fn new() -> Self {
        ParamEnv::default()
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
        if !is_identifier(name) {
            return Err(ParamError::InvalidName(name.to_string()));
        }
        if is_reserved(name) {
            return Err(ParamError::Reserved(name.to_string()));
        }
        if !value.is_finite() {
            return Err(ParamError::NonFinite {
                name: name.to_string(),
                value,
            });
        }
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    pub fn with(mut self, name: &str, value: f64) -> Result<Self, ParamError> {
        self.set(name, value)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Fails with the first parameter of `ast` that has no binding.
    pub fn check_bound(&self, ast: &Expr) -> Result<(), EvalError> {
        match ast
            .free_parameters()
            .into_iter()
            .find(|name| !self.values.contains_key(name))
        {
            Some(name) => Err(EvalError::UnboundParameter(name)),
            None => Ok(()),
        }
    }
}

pub fn parse(source: &str) -> Result<Expr, ParseError> {
    Expr::parse(source)
}

pub fn evaluate(ast: &Expr, x: f64, y: f64, env: &ParamEnv) -> Result<f64, EvalError> {
    ast.evaluate(x, y, env)
}

pub fn free_parameters(ast: &Expr) -> BTreeSet<String> {
    ast.free_parameters()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn var(v: Variable) -> Expr {
        Expr::Var(v)
    }

    fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    fn call(f: Function, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    fn eval(src: &str) -> f64 {
        parse(src).unwrap().evaluate(0.0, 0.0, &ParamEnv::new()).unwrap()
    }

    #[test]
    fn figure_expressions_parse_to_expected_trees() {
        let sum = Expr::binary(BinaryOp::Add, var(Variable::X), var(Variable::Y));
        assert_eq!(parse("sin(x+y)").unwrap(), call(Function::Sin, sum.clone()));
        assert_eq!(parse("x").unwrap(), var(Variable::X));

        let diff = Expr::binary(BinaryOp::Sub, var(Variable::X), var(Variable::Y));
        let expected = Expr::binary(
            BinaryOp::Mul,
            call(Function::Sin, Expr::binary(BinaryOp::Div, diff, param("a"))),
            call(Function::Cos, Expr::binary(BinaryOp::Div, sum, param("b"))),
        );
        assert_eq!(parse("sin((x-y)/a)*cos((x+y)/b)").unwrap(), expected);
    }

    #[test]
    fn precedence_lock() {
        assert_eq!(eval("2+3*4"), 14.0);
        assert_eq!(eval("2*3^2"), 18.0);
        assert_eq!(eval("-2^2"), -4.0);
        assert_eq!(eval("2^3^2"), 512.0);
        assert_eq!(eval("2^-1"), 0.5);
        assert_eq!(eval("8-3-2"), 3.0);
        assert_eq!(eval("8/4/2"), 1.0);
        assert_eq!(eval("-3*2"), -6.0);
        assert_eq!(eval("(-2)^2"), 4.0);
    }

    #[test]
    fn constants() {
        assert_eq!(eval("pi"), std::f64::consts::PI);
        assert_eq!(eval("e"), std::f64::consts::E);
        assert_eq!(eval("log(e)"), 1.0);
    }

    #[test]
    fn evaluation_examples() {
        let env = ParamEnv::new();
        assert_eq!(parse("sin(x+y)").unwrap().evaluate(0.0, 0.0, &env).unwrap(), 0.0);
        // sin(2) to 40 digits: 0.9092974268256816953960198659117448427023
        let v = parse("sin(x^2+y^2)").unwrap().evaluate(1.0, 1.0, &env).unwrap();
        assert!((v - 0.909_297_426_825_681_695_4).abs() < 1e-12);
        let v = parse("sin(x+y)/(x+y)").unwrap().evaluate(1.0, -1.0, &env).unwrap();
        assert!(!v.is_finite());
    }

    #[test]
    fn domain_errors_are_non_finite() {
        assert!(eval("log(0)").is_infinite());
        assert!(eval("log(-1)").is_nan());
        assert!(eval("sqrt(-1)").is_nan());
        assert!(eval("1/0").is_infinite());
        assert!(eval("(-8)^(1/3)").is_nan());
    }

    #[test]
    fn integer_powers_use_multiplication() {
        assert_eq!(power(3.0, 4.0), 81.0);
        assert_eq!(power(2.0, -3.0), 0.125);
        assert_eq!(power(-2.0, 3.0), -8.0);
        assert_eq!(power(5.0, 0.0), 1.0);
        assert_eq!(power(2.0, 17.0), 2f64.powf(17.0));
        assert_eq!(power(4.0, 0.5), 2.0);
    }

    #[test]
    fn unbound_parameter_is_named() {
        let ast = parse("a*x + b").unwrap();
        let env = ParamEnv::new().with("a", 2.0).unwrap();
        assert_eq!(
            ast.evaluate(1.0, 1.0, &env),
            Err(EvalError::UnboundParameter("b".into()))
        );
        assert_eq!(env.check_bound(&ast), Err(EvalError::UnboundParameter("b".into())));
        let env = env.with("b", 1.0).unwrap();
        assert_eq!(ast.evaluate(1.0, 1.0, &env), Ok(3.0));
    }

    #[test]
    fn free_parameter_sets() {
        assert!(parse("sin(x+y)").unwrap().free_parameters().is_empty());
        let names: Vec<_> = parse("sin((x-y)/a)*cos((x+y)/b)")
            .unwrap()
            .free_parameters()
            .into_iter()
            .collect();
        assert_eq!(names, ["a", "b"]);
        let names: Vec<_> = parse("a + a*x").unwrap().free_parameters().into_iter().collect();
        assert_eq!(names, ["a"]);
        assert!(parse("pi*e*x").unwrap().free_parameters().is_empty());
    }

    #[test]
    fn param_env_rejects_reserved_names() {
        let mut env = ParamEnv::new();
        assert!(matches!(env.set("x", 1.0), Err(ParamError::Reserved(_))));
        assert!(matches!(env.set("sin", 1.0), Err(ParamError::Reserved(_))));
        assert!(matches!(env.set("pi", 1.0), Err(ParamError::Reserved(_))));
        assert!(matches!(env.set("2a", 1.0), Err(ParamError::InvalidName(_))));
        assert!(matches!(env.set("a", f64::NAN), Err(ParamError::NonFinite { .. })));
        assert!(env.set("alpha_2", 1.0).is_ok());
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("sin((") {
            Err(ParseError::Syntax { offset, expected, found }) => {
                assert_eq!(offset, 5);
                assert!(expected.contains(&"number".to_string()));
                assert_eq!(found, "end of input");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("x +* y"), Err(ParseError::Syntax { offset: 3, .. })));
        assert!(matches!(parse("(x"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x y"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("sin x"), Err(ParseError::Syntax { offset: 4, .. })));
        assert_eq!(parse("   "), Err(ParseError::Empty));
    }

    #[test]
    fn function_errors() {
        assert_eq!(
            parse("1 + sinh(x)"),
            Err(ParseError::UnknownFunction { offset: 4, name: "sinh".into() })
        );
        assert_eq!(
            parse("sin(x, y)"),
            Err(ParseError::Arity { offset: 0, name: "sin".into(), found: 2 })
        );
        assert_eq!(
            parse("cos()"),
            Err(ParseError::Arity { offset: 0, name: "cos".into(), found: 0 })
        );
    }

    #[test]
    fn display_is_readable() {
        let ast = parse("sin((x-y)/a)*cos((x+y)/b)").unwrap();
        assert_eq!(ast.to_string(), "sin((x - y) / a) * cos((x + y) / b)");
        assert_eq!(parse("-2^2").unwrap().to_string(), "-2 ^ 2");
        assert_eq!(parse("(-2)^2").unwrap().to_string(), "(-2) ^ 2");
        assert_eq!(parse("(2^3)^2").unwrap().to_string(), "(2 ^ 3) ^ 2");
        assert_eq!(parse("a-(b-c)").unwrap().to_string(), "a - (b - c)");
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Expr::Num),
            (0u32..1000).prop_map(|n| Expr::Num(f64::from(n))),
            Just(Expr::Var(Variable::X)),
            Just(Expr::Var(Variable::Y)),
            Just(Expr::Const(Constant::Pi)),
            Just(Expr::Const(Constant::E)),
            "[a-d][a-z0-9_]{0,3}"
                .prop_filter("reserved", |s| !is_reserved(s))
                .prop_map(Expr::Param),
        ];
        leaf.prop_recursive(6, 48, 2, |inner| {
            let op = prop_oneof![
                Just(BinaryOp::Add),
                Just(BinaryOp::Sub),
                Just(BinaryOp::Mul),
                Just(BinaryOp::Div),
                Just(BinaryOp::Pow),
            ];
            let func = proptest::sample::select(Function::ALL.to_vec());
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (func, inner.clone()).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
                (op, inner.clone(), inner).prop_map(|(op, a, b)| Expr::binary(op, a, b)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn unparse_round_trips(ast in arb_expr()) {
            let text = ast.to_string();
            let reparsed = parse(&text).unwrap();
            prop_assert_eq!(&reparsed, &ast, "printed as {}", text);
        }

        #[test]
        fn evaluation_is_total(
            ast in arb_expr(),
            x in -1e3f64..1e3,
            y in -1e3f64..1e3,
        ) {
            let mut env = ParamEnv::new();
            for name in ast.free_parameters() {
                env.set(&name, 1.5).unwrap();
            }
            prop_assert!(ast.evaluate(x, y, &env).is_ok());
        }
    }
}
