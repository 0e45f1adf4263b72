//! Parser and evaluator for the radial formula grammar.
//!
//! Formulas are infix expressions in one declared variable with the
//! functions `exp`, `log`, `sinh`, `cosh`, `tanh`, `sqrt`, `pow` and the
//! constants `pi`, `e` (grammar reference: `docs/grammar.md`).
//!
//! Evaluation is forward-mode: a single pass produces the plain value and
//! derivative together with the sign/log-magnitude pair and logarithmic
//! derivative `f'/f`. The log pair stays exact where the plain value has
//! left `f64` range, e.g. `exp(-r^3)` at `r = 20` evaluates to
//! `log_abs = -8000`, `dlog = -1200`. Derivatives are exact chain-rule
//! propagation, never finite differences.

use crate::logdomain::LogNum;
use std::f64::consts::LN_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
}

/// Expression tree over one free variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

/// One evaluation record: plain and log-domain views of `f` at a point.
#[derive(Debug, Clone, Copy)]
pub struct EvalRec {
    /// Plain `f(x)`; may have under/overflowed.
    pub value: f64,
    /// Plain `f'(x)`; may have under/overflowed.
    pub deriv: f64,
    /// Sign and `log|f(x)|`, exact across the full log range.
    pub log: LogNum,
    /// Logarithmic derivative `f'(x)/f(x)`.
    pub dlog: f64,
}

impl EvalRec {
    fn constant(c: f64) -> Self {
        EvalRec {
            value: c,
            deriv: 0.0,
            log: LogNum::from_value(c),
            dlog: 0.0,
        }
    }

    fn invalid() -> Self {
        EvalRec {
            value: f64::NAN,
            deriv: f64::NAN,
            log: LogNum {
                sign: 1,
                log_abs: f64::NAN,
            },
            dlog: f64::NAN,
        }
    }

    /// Log pair usable: finite-or-infinite `log_abs`, finite `dlog`.
    pub fn log_usable(&self) -> bool {
        !self.log.log_abs.is_nan() && !self.dlog.is_nan()
    }
}

fn log_abs_sinh(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        return f64::NEG_INFINITY;
    }
    if a < 1e-8 {
        // sinh x = x (1 + x²/6 + ...)
        return a.ln() + (a * a / 6.0).ln_1p();
    }
    a - LN_2 + (-(-2.0 * a).exp()).ln_1p()
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    if a < 1e-8 {
        return (a * a / 2.0).ln_1p();
    }
    a - LN_2 + (-2.0 * a).exp().ln_1p()
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

impl Expr {
    /// Evaluate value, derivative and log-domain data at `x`.
    pub fn eval(&self, x: f64) -> EvalRec {
        match self {
            Expr::Num(c) => EvalRec::constant(*c),
            Expr::Var => EvalRec {
                value: x,
                deriv: 1.0,
                log: LogNum::from_value(x),
                dlog: 1.0 / x,
            },
            Expr::Neg(a) => {
                let a = a.eval(x);
                EvalRec {
                    value: -a.value,
                    deriv: -a.deriv,
                    log: a.log.neg(),
                    dlog: a.dlog,
                }
            }
            Expr::Add(a, b) => Self::add_rec(a.eval(x), b.eval(x)),
            Expr::Sub(a, b) => {
                let b = b.eval(x);
                let neg_b = EvalRec {
                    value: -b.value,
                    deriv: -b.deriv,
                    log: b.log.neg(),
                    dlog: b.dlog,
                };
                Self::add_rec(a.eval(x), neg_b)
            }
            Expr::Mul(a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                EvalRec {
                    value: a.value * b.value,
                    deriv: a.deriv * b.value + a.value * b.deriv,
                    log: a.log.mul(b.log),
                    dlog: a.dlog + b.dlog,
                }
            }
            Expr::Div(a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                EvalRec {
                    value: a.value / b.value,
                    deriv: (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value),
                    log: a.log.div(b.log),
                    dlog: a.dlog - b.dlog,
                }
            }
            Expr::Pow(a, b) => Self::pow_rec(a.eval(x), b.eval(x)),
            Expr::Call(f, a) => Self::call_rec(*f, a.eval(x)),
        }
    }

    fn add_rec(a: EvalRec, b: EvalRec) -> EvalRec {
        let log = a.log.add(b.log);
        let dlog = if a.log.is_zero() {
            b.dlog
        } else if b.log.is_zero() {
            a.dlog
        } else if log.is_zero() {
            f64::NAN
        } else {
            // (f+g)'/(f+g) = dlog_f · f/(f+g) + dlog_g · g/(f+g)
            let wa = (a.log.sign * log.sign) as f64 * (a.log.log_abs - log.log_abs).exp();
            let wb = (b.log.sign * log.sign) as f64 * (b.log.log_abs - log.log_abs).exp();
            wa * a.dlog + wb * b.dlog
        };
        EvalRec {
            value: a.value + b.value,
            deriv: a.deriv + b.deriv,
            log,
            dlog,
        }
    }

    fn pow_rec(a: EvalRec, b: EvalRec) -> EvalRec {
        if a.log.sign > 0 {
            // f^g = exp(g log f)
            let log_abs = b.value * a.log.log_abs;
            let dlog = b.deriv * a.log.log_abs + b.value * a.dlog;
            let log = LogNum::new(1, log_abs);
            let value = if a.value.is_finite() && a.value > 0.0 {
                a.value.powf(b.value)
            } else {
                log.value()
            };
            EvalRec {
                value,
                deriv: dlog * value,
                log,
                dlog,
            }
        } else if b.deriv == 0.0 && b.value.fract() == 0.0 && b.value.abs() < 1e15 {
            let log = a.log.powf(b.value);
            let dlog = b.value * a.dlog;
            let value = if a.value.is_finite() {
                a.value.powf(b.value)
            } else {
                log.value()
            };
            EvalRec {
                value,
                deriv: dlog * value,
                log,
                dlog,
            }
        } else {
            EvalRec::invalid()
        }
    }

    fn call_rec(f: Func, a: EvalRec) -> EvalRec {
        match f {
            Func::Exp => {
                let value = a.value.exp();
                EvalRec {
                    value,
                    deriv: value * a.deriv,
                    log: LogNum::new(1, a.value),
                    dlog: a.deriv,
                }
            }
            Func::Log => {
                if a.log.sign <= 0 {
                    return EvalRec::invalid();
                }
                let value = a.log.log_abs;
                EvalRec {
                    value,
                    deriv: a.dlog,
                    log: LogNum::from_value(value),
                    dlog: a.dlog / value,
                }
            }
            Func::Sinh => {
                let x = a.value;
                let dlog = a.deriv * coth(x);
                EvalRec {
                    value: x.sinh(),
                    deriv: x.cosh() * a.deriv,
                    log: LogNum::new(if x > 0.0 { 1 } else if x < 0.0 { -1 } else { 0 }, log_abs_sinh(x)),
                    dlog,
                }
            }
            Func::Cosh => EvalRec {
                value: a.value.cosh(),
                deriv: a.value.sinh() * a.deriv,
                log: LogNum::new(1, log_cosh(a.value)),
                dlog: a.value.tanh() * a.deriv,
            },
            Func::Tanh => {
                let x = a.value;
                let t = x.tanh();
                let log_abs = if x.abs() < 1e-300 {
                    x.abs().ln()
                } else {
                    t.abs().ln()
                };
                // (tanh)'/tanh = 2/sinh(2x)
                let dlog = if x.abs() > 350.0 {
                    0.0
                } else {
                    2.0 / (2.0 * x).sinh() * a.deriv
                };
                EvalRec {
                    value: t,
                    deriv: (1.0 - t * t) * a.deriv,
                    log: LogNum::new(if x > 0.0 { 1 } else if x < 0.0 { -1 } else { 0 }, log_abs),
                    dlog,
                }
            }
            Func::Sqrt => {
                if a.log.sign < 0 {
                    return EvalRec::invalid();
                }
                let value = a.value.sqrt();
                EvalRec {
                    value,
                    deriv: 0.5 * a.deriv / value,
                    log: a.log.powf(0.5),
                    dlog: 0.5 * a.dlog,
                }
            }
        }
    }

    /// Plain value only.
    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).value
    }

    /// Replace the free variable by its negation, turning `f(t)` into
    /// `f(-t)`.
    pub fn reflect(&self) -> Expr {
        match self {
            Expr::Num(c) => Expr::Num(*c),
            Expr::Var => Expr::Neg(Box::new(Expr::Var)),
            Expr::Add(a, b) => Expr::Add(Box::new(a.reflect()), Box::new(b.reflect())),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.reflect()), Box::new(b.reflect())),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.reflect()), Box::new(b.reflect())),
            Expr::Div(a, b) => Expr::Div(Box::new(a.reflect()), Box::new(b.reflect())),
            Expr::Pow(a, b) => Expr::Pow(Box::new(a.reflect()), Box::new(b.reflect())),
            Expr::Neg(a) => Expr::Neg(Box::new(a.reflect())),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.reflect())),
        }
    }

    /// Parse `source` as a formula in the variable `var`.
    pub fn parse(source: &str, var: &str) -> Result<Expr, ExprError> {
        Parser::new(source, var)?.parse()
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    var: String,
}

impl Parser {
    fn new(source: &str, var: &str) -> Result<Self, ExprError> {
        let mut toks = Vec::new();
        let bytes = source.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            match c {
                ' ' | '\t' | '\n' | '\r' => i += 1,
                '+' => {
                    toks.push((i, Tok::Plus));
                    i += 1;
                }
                '-' => {
                    toks.push((i, Tok::Minus));
                    i += 1;
                }
                '*' => {
                    toks.push((i, Tok::Star));
                    i += 1;
                }
                '/' => {
                    toks.push((i, Tok::Slash));
                    i += 1;
                }
                '^' => {
                    toks.push((i, Tok::Caret));
                    i += 1;
                }
                '(' => {
                    toks.push((i, Tok::LParen));
                    i += 1;
                }
                ')' => {
                    toks.push((i, Tok::RParen));
                    i += 1;
                }
                ',' => {
                    toks.push((i, Tok::Comma));
                    i += 1;
                }
                '0'..='9' | '.' => {
                    let start = i;
                    while i < bytes.len()
                        && (bytes[i].is_ascii_digit() || bytes[i] == b'.' || bytes[i] == b'e'
                            || bytes[i] == b'E'
                            || ((bytes[i] == b'+' || bytes[i] == b'-')
                                && i > start
                                && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E')))
                    {
                        i += 1;
                    }
                    let text = &source[start..i];
                    let n = text.parse::<f64>().map_err(|_| ExprError::Parse {
                        position: start,
                        message: format!("invalid number `{text}`"),
                    })?;
                    toks.push((start, Tok::Num(n)));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < bytes.len()
                        && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    toks.push((start, Tok::Ident(source[start..i].to_string())));
                }
                other => {
                    return Err(ExprError::Parse {
                        position: i,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
        Ok(Parser {
            toks,
            pos: 0,
            var: var.to_string(),
        })
    }

    fn parse(mut self) -> Result<Expr, ExprError> {
        let e = self.expr()?;
        if let Some((p, t)) = self.toks.get(self.pos) {
            return Err(ExprError::Parse {
                position: *p,
                message: format!("unexpected token `{}`", tok_text(t)),
            });
        }
        Ok(e)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprError> {
        match self.bump() {
            Some((_, t)) if t == want => Ok(()),
            Some((p, t)) => Err(ExprError::Parse {
                position: p,
                message: format!("expected {what}, found `{}`", tok_text(&t)),
            }),
            None => Err(ExprError::Parse {
                position: usize::MAX,
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            // right-associative exponent
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        match self.bump() {
            Some((_, Tok::Num(n))) => Ok(Expr::Num(n)),
            Some((_, Tok::LParen)) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some((p, Tok::Ident(name))) => self.ident(p, name),
            Some((p, t)) => Err(ExprError::Parse {
                position: p,
                message: format!("expected a value, found `{}`", tok_text(&t)),
            }),
            None => Err(ExprError::Parse {
                position: usize::MAX,
                message: "expected a value, found end of input".into(),
            }),
        }
    }

    fn ident(&mut self, pos: usize, name: String) -> Result<Expr, ExprError> {
        if let Some(Tok::LParen) = self.peek() {
            self.pos += 1;
            let first = self.expr()?;
            let func = match name.as_str() {
                "exp" => Func::Exp,
                "log" | "ln" => Func::Log,
                "sinh" => Func::Sinh,
                "cosh" => Func::Cosh,
                "tanh" => Func::Tanh,
                "sqrt" => Func::Sqrt,
                "pow" => {
                    self.expect(Tok::Comma, "`,`")?;
                    let second = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Pow(Box::new(first), Box::new(second)));
                }
                other => {
                    return Err(ExprError::Parse {
                        position: pos,
                        message: format!("unknown function `{other}`"),
                    })
                }
            };
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::Call(func, Box::new(first)));
        }
        if name == self.var {
            Ok(Expr::Var)
        } else {
            match name.as_str() {
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "e" => Ok(Expr::Num(std::f64::consts::E)),
                other => Err(ExprError::Parse {
                    position: pos,
                    message: format!("unknown identifier `{other}`"),
                }),
            }
        }
    }
}

fn tok_text(t: &Tok) -> String {
    match t {
        Tok::Num(n) => n.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Plus => "+".into(),
        Tok::Minus => "-".into(),
        Tok::Star => "*".into(),
        Tok::Slash => "/".into(),
        Tok::Caret => "^".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
        Tok::Comma => ",".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s, "r").unwrap()
    }

    #[test]
    fn parses_precedence_and_associativity() {
        assert_eq!(p("1 + 2 * 3").value(0.0), 7.0);
        assert_eq!(p("2 ^ 3 ^ 2").value(0.0), 512.0);
        assert_eq!(p("-2 ^ 2").value(0.0), -4.0);
        assert_eq!(p("(1 + 2) * 3").value(0.0), 9.0);
        assert_eq!(p("pow(2, 10)").value(0.0), 1024.0);
    }

    #[test]
    fn parse_error_names_the_token() {
        let err = Expr::parse("sinh(r) + $", "r").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('$'), "message should name the token: {msg}");
        let err = Expr::parse("sinh(r", "r").unwrap_err();
        assert!(err.to_string().contains("end of input"));
        let err = Expr::parse("foo(r)", "r").unwrap_err();
        assert!(err.to_string().contains("foo"));
    }

    #[test]
    fn chain_rule_matches_central_differences() {
        let exprs = [
            "sinh(r)",
            "r^3 * exp(-r)",
            "cosh(r) / (1 + r^2)",
            "exp(-0.5 * r^2) + sqrt(r)",
            "log(1 + r) * tanh(r)",
            "pow(1 + r, 2.5)",
        ];
        for src in exprs {
            let e = p(src);
            for &x in &[0.3_f64, 0.7, 1.5, 2.0, 4.2] {
                let h = 1e-6 * x.max(1.0);
                let fd = (e.value(x + h) - e.value(x - h)) / (2.0 * h);
                let got = e.eval(x).deriv;
                assert!(
                    (got - fd).abs() <= 1e-6 * fd.abs().max(1.0),
                    "{src} at {x}: ad {got} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn log_domain_survives_extreme_exponents() {
        // exp(-r^3) at r = 20: log g = -8000, g'/g = -3 r^2 = -1200
        let e = p("exp(-r^3)");
        let rec = e.eval(20.0);
        assert_eq!(rec.value, 0.0); // plain value underflows
        assert!((rec.log.log_abs + 8000.0).abs() < 1e-9);
        assert!((rec.dlog + 1200.0).abs() < 1e-9);
        assert!(rec.log_usable());

        let e = p("exp(r^3)");
        let rec = e.eval(20.0);
        assert!(rec.value.is_infinite());
        assert!((rec.log.log_abs - 8000.0).abs() < 1e-9);
        assert!((rec.dlog - 1200.0).abs() < 1e-9);
    }

    #[test]
    fn sinh_log_values() {
        let e = p("sinh(r)");
        let rec = e.eval(1.0);
        assert!((rec.log.log_abs - 1.0f64.sinh().ln()).abs() < 1e-14);
        assert!((rec.dlog - 1.0 / 1.0f64.tanh()).abs() < 1e-14);
        // far out, log sinh r ≈ r - log 2
        let rec = e.eval(800.0);
        assert!((rec.log.log_abs - (800.0 - std::f64::consts::LN_2)).abs() < 1e-9);
        assert!((rec.dlog - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflect_negates_the_variable() {
        let e = p("exp(r^3)").reflect();
        let rec = e.eval(2.0);
        assert!((rec.value - (-8.0f64).exp()).abs() < 1e-18);
    }

    #[test]
    fn dlog_of_sum_uses_weights() {
        // f = e^{-r} + e^{-2r}: f'/f = (-e^{-r} - 2 e^{-2r})/(e^{-r}+e^{-2r})
        let e = p("exp(-r) + exp(-2*r)");
        let x = 3.0_f64;
        let f = (-x).exp() + (-2.0 * x).exp();
        let fp = -(-x).exp() - 2.0 * (-2.0 * x).exp();
        let rec = e.eval(x);
        assert!((rec.dlog - fp / f).abs() < 1e-12);
    }
}
