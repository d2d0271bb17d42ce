//! Expressions for ω²(t) supplied on the command line or in config files.
//!
//! Grammar (lowest to highest binding):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          (right-associative)
//! primary := number | 't' | name | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! so `-t^2` is `-(t^2)` and `t^-2` is `t^(-2)`. Named constants are bound at
//! parse time; the only free variable is `t`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {position}: expected {}", expected.join(" or "))]
    Syntax {
        position: usize,
        expected: Vec<&'static str>,
    },
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("`{name}` takes {expected} argument(s), got {found} (byte {position})")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        position: usize,
    },
    #[error("invalid constant name `{0}`")]
    InvalidConstant(String),
    #[error("non-finite value at t = {t} in `{subexpr}`")]
    NonFinite { t: f64, subexpr: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
            BinaryOp::Pow => 4,
        }
    }

    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
            BinaryOp::Pow => a.powf(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
    Cosh,
    Sech,
    Abs,
    Pow,
}

impl Function {
    pub const ALL: [Function; 10] = [
        Function::Sin,
        Function::Cos,
        Function::Exp,
        Function::Log,
        Function::Sqrt,
        Function::Tanh,
        Function::Cosh,
        Function::Sech,
        Function::Abs,
        Function::Pow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Sqrt => "sqrt",
            Function::Tanh => "tanh",
            Function::Cosh => "cosh",
            Function::Sech => "sech",
            Function::Abs => "abs",
            Function::Pow => "pow",
        }
    }

    pub fn from_name(name: &str) -> Option<Function> {
        Function::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Function::Pow => 2,
            _ => 1,
        }
    }

    /// Applies the function. `args` has exactly `arity()` entries.
    pub fn apply(self, args: &[f64]) -> f64 {
        let x = args[0];
        match self {
            Function::Sin => x.sin(),
            Function::Cos => x.cos(),
            Function::Exp => x.exp(),
            Function::Log => {
                if x > 0.0 {
                    x.ln()
                } else {
                    f64::NAN
                }
            }
            Function::Sqrt => x.sqrt(),
            Function::Tanh => x.tanh(),
            Function::Cosh => x.cosh(),
            Function::Sech => 1.0 / x.cosh(),
            Function::Abs => x.abs(),
            Function::Pow => x.powf(args[1]),
        }
    }
}

/// Abstract syntax tree of an ω²(t) expression.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Number(f64),
    Time,
    /// A named constant, already bound to its value.
    Constant { name: String, value: f64 },
    Neg(Box<ExprNode>),
    Binary {
        op: BinaryOp,
        lhs: Box<ExprNode>,
        rhs: Box<ExprNode>,
    },
    Call { func: Function, args: Vec<ExprNode> },
}

const NEG_PRECEDENCE: u8 = 3;
const ATOM_PRECEDENCE: u8 = 5;

impl ExprNode {
    pub fn binary(op: BinaryOp, lhs: ExprNode, rhs: ExprNode) -> Self {
        ExprNode::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn call(func: Function, args: Vec<ExprNode>) -> Self {
        ExprNode::Call { func, args }
    }

    fn precedence(&self) -> u8 {
        match self {
            ExprNode::Neg(_) => NEG_PRECEDENCE,
            ExprNode::Binary { op, .. } => op.precedence(),
            _ => ATOM_PRECEDENCE,
        }
    }

    /// Evaluates the tree at time `t`. Any non-finite intermediate is an error.
    pub fn eval(&self, t: f64) -> Result<f64, ExprError> {
        let value = match self {
            ExprNode::Number(x) => *x,
            ExprNode::Time => t,
            ExprNode::Constant { value, .. } => *value,
            ExprNode::Neg(inner) => -inner.eval(t)?,
            ExprNode::Binary { op, lhs, rhs } => op.apply(lhs.eval(t)?, rhs.eval(t)?),
            ExprNode::Call { func, args } => {
                let mut values = [0.0; 2];
                for (slot, arg) in values.iter_mut().zip(args) {
                    *slot = arg.eval(t)?;
                }
                func.apply(&values[..args.len()])
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(ExprError::NonFinite {
                t,
                subexpr: self.to_string(),
            })
        }
    }

    /// True when the tree does not reference `t`.
    pub fn is_constant(&self) -> bool {
        match self {
            ExprNode::Time => false,
            ExprNode::Number(_) | ExprNode::Constant { .. } => true,
            ExprNode::Neg(inner) => inner.is_constant(),
            ExprNode::Binary { lhs, rhs, .. } => lhs.is_constant() && rhs.is_constant(),
            ExprNode::Call { args, .. } => args.iter().all(ExprNode::is_constant),
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_precedence: u8) -> fmt::Result {
        if self.precedence() < min_precedence {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Prints with the minimum parentheses needed to parse back to the same tree.
impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprNode::Number(x) => {
                if *x < 0.0 || (*x == 0.0 && x.is_sign_negative()) {
                    write!(f, "({x:?})")
                } else {
                    write!(f, "{x:?}")
                }
            }
            ExprNode::Time => f.write_str("t"),
            ExprNode::Constant { name, .. } => f.write_str(name),
            ExprNode::Neg(inner) => {
                f.write_str("-")?;
                inner.fmt_child(f, NEG_PRECEDENCE)
            }
            ExprNode::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                if *op == BinaryOp::Pow {
                    lhs.fmt_child(f, ATOM_PRECEDENCE)?;
                    write!(f, "^")?;
                    rhs.fmt_child(f, NEG_PRECEDENCE)
                } else {
                    lhs.fmt_child(f, p)?;
                    write!(f, "{}", op.symbol())?;
                    rhs.fmt_child(f, p + 1)
                }
            }
            ExprNode::Call { func, args } => {
                write!(f, "{}(", func.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{arg}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token<'a> {
    Number(f64),
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    /// Returns the next token and its byte offset.
    fn next(&mut self) -> Result<(Token<'a>, usize), ExprError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let Some(&c) = bytes.get(start) else {
            return Ok((Token::End, start));
        };
        let single = match c {
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            b',' => Some(Token::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if c.is_ascii_digit() || c == b'.' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut exp_end = end + 1;
                if exp_end < bytes.len() && (bytes[exp_end] == b'+' || bytes[exp_end] == b'-') {
                    exp_end += 1;
                }
                let digits_start = exp_end;
                while exp_end < bytes.len() && bytes[exp_end].is_ascii_digit() {
                    exp_end += 1;
                }
                if exp_end > digits_start {
                    end = exp_end;
                }
            }
            let text = &self.src[start..end];
            return match text.parse::<f64>() {
                Ok(value) => {
                    self.pos = end;
                    Ok((Token::Number(value), start))
                }
                Err(_) => Err(ExprError::Syntax {
                    position: start,
                    expected: vec!["number"],
                }),
            };
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = start + 1;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            return Ok((Token::Ident(&self.src[start..end]), start));
        }
        Err(ExprError::Syntax {
            position: start,
            expected: vec!["operator", "operand"],
        })
    }
}

const OPERAND: [&str; 4] = ["number", "identifier", "'('", "'-'"];

struct Parser<'a, 'c> {
    lexer: Lexer<'a>,
    current: Token<'a>,
    position: usize,
    constants: &'c BTreeMap<String, f64>,
}

impl<'a, 'c> Parser<'a, 'c> {
    fn advance(&mut self) -> Result<(), ExprError> {
        let (tok, pos) = self.lexer.next()?;
        self.current = tok;
        self.position = pos;
        Ok(())
    }

    fn syntax(&self, expected: &[&'static str]) -> ExprError {
        ExprError::Syntax {
            position: self.position,
            expected: expected.to_vec(),
        }
    }

    fn expr(&mut self) -> Result<ExprNode, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.current {
                Token::Plus => BinaryOp::Add,
                Token::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = ExprNode::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<ExprNode, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.current {
                Token::Star => BinaryOp::Mul,
                Token::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = ExprNode::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<ExprNode, ExprError> {
        if self.current == Token::Minus {
            self.advance()?;
            return Ok(ExprNode::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprNode, ExprError> {
        let base = self.primary()?;
        if self.current == Token::Caret {
            self.advance()?;
            let exponent = self.unary()?;
            return Ok(ExprNode::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<ExprNode, ExprError> {
        match self.current {
            Token::Number(x) => {
                self.advance()?;
                Ok(ExprNode::Number(x))
            }
            Token::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                if self.current != Token::RParen {
                    return Err(self.syntax(&["')'", "operator"]));
                }
                self.advance()?;
                Ok(inner)
            }
            Token::Ident(name) => {
                let position = self.position;
                self.advance()?;
                if let Some(func) = Function::from_name(name) {
                    return self.call(func, position);
                }
                if name == "t" {
                    return Ok(ExprNode::Time);
                }
                if let Some(&value) = self.constants.get(name) {
                    return Ok(ExprNode::Constant {
                        name: name.to_string(),
                        value,
                    });
                }
                if name == "pi" {
                    return Ok(ExprNode::Constant {
                        name: name.to_string(),
                        value: std::f64::consts::PI,
                    });
                }
                Err(ExprError::UnknownIdentifier {
                    name: name.to_string(),
                    position,
                })
            }
            _ => Err(self.syntax(&OPERAND)),
        }
    }

    fn call(&mut self, func: Function, position: usize) -> Result<ExprNode, ExprError> {
        if self.current != Token::LParen {
            return Err(self.syntax(&["'('"]));
        }
        self.advance()?;
        let mut args = vec![self.expr()?];
        while self.current == Token::Comma {
            self.advance()?;
            args.push(self.expr()?);
        }
        if self.current != Token::RParen {
            return Err(self.syntax(&["')'", "','", "operator"]));
        }
        self.advance()?;
        if args.len() != func.arity() {
            return Err(ExprError::Arity {
                name: func.name().to_string(),
                expected: func.arity(),
                found: args.len(),
                position,
            });
        }
        Ok(ExprNode::call(func, args))
    }
}

fn valid_constant_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && name != "t"
        && Function::from_name(name).is_none()
}

/// Parses `source` with the given named constants inlined.
pub fn parse(source: &str, constants: &BTreeMap<String, f64>) -> Result<ExprNode, ExprError> {
    if let Some(bad) = constants.keys().find(|k| !valid_constant_name(k)) {
        return Err(ExprError::InvalidConstant(bad.clone()));
    }
    let mut parser = Parser {
        lexer: Lexer {
            src: source,
            pos: 0,
        },
        current: Token::End,
        position: 0,
        constants,
    };
    parser.advance()?;
    let node = parser.expr()?;
    if parser.current != Token::End {
        return Err(parser.syntax(&["operator", "end of input"]));
    }
    Ok(node)
}

/// Parses a source string that uses no named constants besides `pi`.
pub fn parse_plain(source: &str) -> Result<ExprNode, ExprError> {
    parse(source, &BTreeMap::new())
}
