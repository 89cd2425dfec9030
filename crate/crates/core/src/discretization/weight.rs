//! Weight functions `f`, `g` given as small arithmetic expressions in `x`.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' base)?
//! base   := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')' | '-' base
//! func   := 'sin' | 'cos' | 'exp' | 'abs'
//! ```

use std::fmt;

use serde::Serialize;

use super::grid::GridDomain;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
}

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Num(f64),
    X,
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>),
}

impl Expr {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Call(f, e) => {
                let v = e.eval(x);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Abs => v.abs(),
                }
            }
            Expr::Bin(op, l, r) => {
                let (a, b) = (l.eval(x), r.eval(x));
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' => a / b,
                    '^' => a.powf(b),
                    _ => unreachable!("parser only builds known operators"),
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, position: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(c as char, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Bin(c as char, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.base()?;
            return Ok(Expr::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        let start = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            None => self.err(start, "unexpected end of expression"),
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.base()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let mut end = self.pos;
                while end < self.src.len() && self.src[end].is_ascii_alphanumeric() {
                    end += 1;
                }
                let word = std::str::from_utf8(&self.src[self.pos..end]).unwrap_or("");
                let func = match word {
                    "x" => {
                        self.pos = end;
                        return Ok(Expr::X);
                    }
                    "pi" => {
                        self.pos = end;
                        return Ok(Expr::Num(std::f64::consts::PI));
                    }
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "abs" => Func::Abs,
                    _ => return self.err(start, format!("unknown identifier `{word}`")),
                };
                self.pos = end;
                if self.peek() != Some(b'(') {
                    return self.err(self.pos, format!("expected `(` after `{word}`"));
                }
                self.pos += 1;
                let arg = self.expr()?;
                self.expect_close()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Some(c) => self.err(start, format!("unexpected character `{}`", c as char)),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.peek() {
            Some(b')') => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => self.err(self.pos, format!("expected `)`, found `{}`", c as char)),
            None => self.err(self.pos, "expected `)`, found end of expression"),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let mut end = start;
        while end < s.len() && s[end].is_ascii_digit() {
            end += 1;
        }
        if end < s.len() && s[end] == b'.' {
            end += 1;
            while end < s.len() && s[end].is_ascii_digit() {
                end += 1;
            }
        }
        // exponent only when followed by digits, so `2exp(x)` is not swallowed
        if end < s.len() && (s[end] == b'e' || s[end] == b'E') {
            let mut k = end + 1;
            if k < s.len() && (s[k] == b'+' || s[k] == b'-') {
                k += 1;
            }
            if k < s.len() && s[k].is_ascii_digit() {
                while k < s.len() && s[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = std::str::from_utf8(&s[start..end]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) => {
                self.pos = end;
                Ok(Expr::Num(v))
            }
            Err(_) => self.err(start, format!("malformed number `{text}`")),
        }
    }
}

/// A parsed weight expression.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    text: String,
    expr: Expr,
}

impl WeightSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut parser = Parser {
            src: text.as_bytes(),
            pos: 0,
        };
        let expr = parser.expr()?;
        if let Some(c) = parser.peek() {
            return parser.err(parser.pos, format!("unexpected trailing `{}`", c as char));
        }
        Ok(Self {
            text: text.to_string(),
            expr,
        })
    }

    /// Constant weight.
    pub fn constant(c: f64) -> Self {
        Self {
            text: format!("{c}"),
            expr: Expr::Num(c),
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.expr.eval(x)
    }

    /// Nodal values on `grid` together with their sign class.
    pub fn sample(&self, grid: &GridDomain) -> Result<SampledWeight> {
        let values = grid
            .nodes()
            .map(|x| {
                let v = self.eval(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Eval {
                        expression: self.text.clone(),
                        x,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let sign = SignClass::of(&values);
        Ok(SampledWeight { values, sign })
    }

    pub fn sign_class(&self, grid: &GridDomain) -> Result<SignClass> {
        Ok(self.sample(grid)?.sign)
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Parse a weight expression.
pub fn parse_weight(expression: &str) -> Result<WeightSpec> {
    WeightSpec::parse(expression)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    /// Strictly positive at every node.
    Positive,
    /// Nonnegative at every node, zero somewhere.
    NonNegative,
    /// Strictly negative at every node.
    Negative,
    /// Nonpositive at every node, zero somewhere.
    NonPositive,
    SignChanging,
}

impl SignClass {
    fn of(values: &[f64]) -> Self {
        let pos = values.iter().any(|&v| v > 0.0);
        let neg = values.iter().any(|&v| v < 0.0);
        let zero = values.iter().any(|&v| v == 0.0);
        match (pos, neg, zero) {
            (true, true, _) => SignClass::SignChanging,
            (true, false, false) => SignClass::Positive,
            (true, false, true) => SignClass::NonNegative,
            (false, true, false) => SignClass::Negative,
            (false, true, true) => SignClass::NonPositive,
            (false, false, _) => SignClass::NonNegative,
        }
    }

    /// True when the positive part does not vanish identically.
    pub fn has_positive_part(self) -> bool {
        matches!(
            self,
            SignClass::Positive | SignClass::NonNegative | SignClass::SignChanging
        )
    }
}

/// Weight values at the interior nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWeight {
    values: Vec<f64>,
    sign: SignClass,
}

impl SampledWeight {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sign(&self) -> SignClass {
        self.sign
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// True when some node carries a strictly positive value.
    pub fn has_positive_part(&self) -> bool {
        self.values.iter().any(|&v| v > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64) -> f64 {
        WeightSpec::parse(s).unwrap().eval(x)
    }

    #[test]
    fn precedence_and_functions() {
        assert_eq!(ev("1 + 2*3", 0.0), 7.0);
        assert_eq!(ev("(1 + 2)*3", 0.0), 9.0);
        assert_eq!(ev("2^3", 0.0), 8.0);
        assert_eq!(ev("-x^2", 3.0), 9.0); // unary minus binds to the base
        assert_eq!(ev("0 - x^2", 3.0), -9.0);
        assert_eq!(ev("8/2/2", 0.0), 2.0);
        assert_eq!(ev("10 - 3 - 2", 0.0), 5.0);
        assert!((ev("sin(pi*x)", 0.5) - 1.0).abs() < 1e-15);
        assert!((ev("cos(0) + exp(0) + abs(-2)", 0.0) - 4.0).abs() < 1e-15);
        assert_eq!(ev("1.5e2", 0.0), 150.0);
        assert_eq!(ev(".5", 0.0), 0.5);
        // no implicit multiplication
        assert!(WeightSpec::parse("2exp(x)").is_err());
    }

    #[test]
    fn parse_errors_carry_positions() {
        match WeightSpec::parse("sin(pi*x") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 8),
            other => panic!("{other:?}"),
        }
        match WeightSpec::parse("1 + y") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(WeightSpec::parse(""), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(WeightSpec::parse("1 2"), Err(Error::Parse { position: 2, .. })));
        assert!(matches!(WeightSpec::parse("2^^3"), Err(Error::Parse { .. })));
        assert!(matches!(WeightSpec::parse("sin x"), Err(Error::Parse { .. })));
    }

    #[test]
    fn sign_classes_on_symmetric_grid() {
        let g = GridDomain::new(-1.0, 1.0, 31, 0.4, 2.0).unwrap();
        assert_eq!(WeightSpec::parse("1").unwrap().sign_class(&g).unwrap(), SignClass::Positive);
        assert_eq!(
            WeightSpec::parse("x").unwrap().sign_class(&g).unwrap(),
            SignClass::SignChanging
        );
        assert_eq!(WeightSpec::parse("-1").unwrap().sign_class(&g).unwrap(), SignClass::Negative);
        assert_eq!(
            WeightSpec::parse("x^2").unwrap().sign_class(&g).unwrap(),
            SignClass::NonNegative
        );
    }

    #[test]
    fn non_finite_node_is_an_eval_error() {
        // x = 0 is the middle node of this grid
        let g = GridDomain::new(-1.0, 1.0, 31, 0.4, 2.0).unwrap();
        assert!(matches!(
            WeightSpec::parse("1/x").unwrap().sample(&g),
            Err(Error::Eval { .. })
        ));
    }
}
