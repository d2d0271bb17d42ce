//! The recursive-descent parser against a table-driven Pratt evaluator that
//! shares no code with it, plus a print/parse round-trip property.

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdho::omega_expr::{parse, BinaryOp, ExprNode, Function};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Op(char),
    Open,
    Close,
    Comma,
}

fn lex(src: &str) -> Vec<Tok> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                i += 1;
                if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
                    i += 1;
                }
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push(Tok::Num(src[start..i].parse().unwrap()));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push(Tok::Name(src[start..i].to_string()));
        } else {
            out.push(match c {
                '(' => Tok::Open,
                ')' => Tok::Close,
                ',' => Tok::Comma,
                _ => Tok::Op(c),
            });
            i += 1;
        }
    }
    out
}

/// (left binding power, right binding power) for infix operators.
const INFIX: [(char, u8, u8); 5] = [('+', 1, 2), ('-', 1, 2), ('*', 3, 4), ('/', 3, 4), ('^', 8, 7)];
const PREFIX_MINUS: u8 = 5;

struct Pratt<'a> {
    toks: Vec<Tok>,
    pos: usize,
    t: f64,
    consts: &'a BTreeMap<String, f64>,
}

impl Pratt<'_> {
    fn next(&mut self) -> Option<Tok> {
        let tok = self.toks.get(self.pos).cloned();
        self.pos += 1;
        tok
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    /// Value of the expression, `None` when any intermediate is non-finite.
    fn expr(&mut self, min_bp: u8) -> Option<f64> {
        let mut lhs = match self.next()? {
            Tok::Num(x) => x,
            Tok::Op('-') => -self.expr(PREFIX_MINUS)?,
            Tok::Open => {
                let v = self.expr(0)?;
                assert_eq!(self.next(), Some(Tok::Close));
                v
            }
            Tok::Name(n) if n == "t" => self.t,
            Tok::Name(n) if n == "pi" => std::f64::consts::PI,
            Tok::Name(n) if self.consts.contains_key(&n) => self.consts[&n],
            Tok::Name(n) => {
                assert_eq!(self.next(), Some(Tok::Open));
                let a = self.expr(0)?;
                let v = if n == "pow" {
                    assert_eq!(self.next(), Some(Tok::Comma));
                    let b = self.expr(0)?;
                    a.powf(b)
                } else {
                    match n.as_str() {
                        "sin" => a.sin(),
                        "cos" => a.cos(),
                        "exp" => a.exp(),
                        "log" => a.ln(),
                        "sqrt" => a.sqrt(),
                        "tanh" => a.tanh(),
                        "cosh" => a.cosh(),
                        "sech" => 1.0 / a.cosh(),
                        "abs" => a.abs(),
                        other => panic!("unknown function {other}"),
                    }
                };
                assert_eq!(self.next(), Some(Tok::Close));
                v
            }
            other => panic!("unexpected {other:?}"),
        };
        lhs.is_finite().then_some(())?;
        loop {
            let Some(Tok::Op(op)) = self.peek().cloned() else { break };
            let &(_, lbp, rbp) = INFIX.iter().find(|(c, _, _)| *c == op).unwrap();
            if lbp < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.expr(rbp)?;
            lhs = match op {
                '+' => lhs + rhs,
                '-' => lhs - rhs,
                '*' => lhs * rhs,
                '/' => lhs / rhs,
                _ => lhs.powf(rhs),
            };
            lhs.is_finite().then_some(())?;
        }
        Some(lhs)
    }
}

fn oracle(src: &str, t: f64, consts: &BTreeMap<String, f64>) -> Option<f64> {
    let mut p = Pratt {
        toks: lex(src),
        pos: 0,
        t,
        consts,
    };
    let v = p.expr(0);
    assert!(v.is_none() || p.pos == p.toks.len(), "trailing input in {src}");
    v
}

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> String {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        return match rng.gen_range(0..5) {
            0 => "t".into(),
            1 => "w0".into(),
            2 => "pi".into(),
            3 => format!("{}", rng.gen_range(0..20)),
            _ => ["0.5", "1.25e-1", "3.", ".75", "2E1"][rng.gen_range(0..5)].into(),
        };
    }
    match rng.gen_range(0..6) {
        0 => format!("-{}", random_expr(rng, depth - 1)),
        1 => format!("({})", random_expr(rng, depth - 1)),
        2 => {
            let f = ["sin", "cos", "exp", "log", "sqrt", "tanh", "cosh", "sech", "abs"]
                [rng.gen_range(0..9)];
            format!("{f}({})", random_expr(rng, depth - 1))
        }
        3 => format!("pow({}, {})", random_expr(rng, depth - 1), random_expr(rng, depth - 1)),
        _ => {
            let op = ["+", "-", "*", "/", "^"][rng.gen_range(0..5)];
            let gap = if rng.gen_bool(0.5) { " " } else { "" };
            format!("{}{gap}{op}{gap}{}", random_expr(rng, depth - 1), random_expr(rng, depth - 1))
        }
    }
}

#[test]
fn precedence_matches_pratt_oracle_on_random_expressions() {
    let consts: BTreeMap<String, f64> = [("w0".to_string(), 1.5)].into();
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let mut finite = 0;
    for _ in 0..200 {
        let src = random_expr(&mut rng, 4);
        let ast = parse(&src, &consts).unwrap_or_else(|e| panic!("{src}: {e}"));
        for t in [-0.7, 0.0, 0.3, 2.0] {
            let ours = ast.eval(t).ok();
            let theirs = oracle(&src, t, &consts);
            assert_eq!(ours, theirs, "{src} at t = {t}");
            finite += ours.is_some() as usize;
        }
    }
    // the comparison is meaningless if almost everything overflows
    assert!(finite > 400, "only {finite} finite evaluations");
}

#[test]
fn documented_examples() {
    let consts: BTreeMap<String, f64> = [("w0".to_string(), 1.0), ("a".to_string(), 1.0)].into();
    assert_eq!(oracle("-t^2", 2.0, &consts), Some(-4.0));
    let ast = parse("w0^2*exp(-a*t)", &consts).unwrap();
    for t in [0.0, 0.5, 3.0] {
        assert_eq!(ast.eval(t).ok(), oracle("w0^2*exp(-a*t)", t, &consts));
        assert_eq!(ast.eval(t).unwrap(), (-t).exp());
    }
}

fn leaf() -> impl Strategy<Value = ExprNode> {
    prop_oneof![
        Just(ExprNode::Time),
        (0.0f64..1e6).prop_map(ExprNode::Number),
        Just(ExprNode::Constant {
            name: "k".into(),
            value: 2.5
        }),
    ]
}

fn tree() -> impl Strategy<Value = ExprNode> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        let op = prop_oneof![
            Just(BinaryOp::Add),
            Just(BinaryOp::Sub),
            Just(BinaryOp::Mul),
            Just(BinaryOp::Div),
            Just(BinaryOp::Pow),
        ];
        let unary_fn = proptest::sample::select(
            Function::ALL.iter().copied().filter(|f| *f != Function::Pow).collect::<Vec<_>>(),
        );
        prop_oneof![
            inner.clone().prop_map(|e| ExprNode::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(op, l, r)| ExprNode::binary(op, l, r)),
            (unary_fn, inner.clone()).prop_map(|(f, a)| ExprNode::call(f, vec![a])),
            (inner.clone(), inner).prop_map(|(a, b)| ExprNode::call(Function::Pow, vec![a, b])),
        ]
    })
}

proptest! {
    #[test]
    fn display_round_trips(ast in tree()) {
        let consts: BTreeMap<String, f64> = [("k".to_string(), 2.5)].into();
        let text = ast.to_string();
        let back = parse(&text, &consts).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, ast, "{}", text);
    }
}
