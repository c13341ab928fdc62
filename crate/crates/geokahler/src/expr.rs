//! Parser and evaluator for the closed-form expressions that describe metric
//! components, vector fields and scalar functions.
//!
//! Grammar (EBNF, also documented in `docs/expr-grammar.md`):
//!
//! ```text
//! expr   := term { ("+" | "-") term }
//! term   := factor { ("*" | "/") factor }
//! factor := unary [ "^" factor ]              (right associative)
//! unary  := "-" unary | atom
//! atom   := number | ident | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! Identifiers are case sensitive. An identifier is either a chart
//! coordinate, a declared parameter, or one of the built-in functions
//! `sin cos tan sinh cosh exp log sqrt abs` (which must be applied).

use std::collections::BTreeMap;
use std::fmt;

use crate::error::ExprError;
use crate::jet::Jet;

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, j: &Jet) -> Jet {
        match self {
            Func::Sin => j.sin(),
            Func::Cos => j.cos(),
            Func::Tan => j.tan(),
            Func::Sinh => j.sinh(),
            Func::Cosh => j.cosh(),
            Func::Exp => j.exp(),
            Func::Log => j.ln(),
            Func::Sqrt => j.sqrt(),
            Func::Abs => j.abs(),
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Chart coordinate, stored by index into the chart's coordinate list.
    Coord(usize),
    /// Named parameter, resolved against a parameter map at evaluation time.
    Param(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Fun(Func, Box<Expr>),
}

impl Expr {
    /// Evaluate on jet-valued coordinates. `coords[i]` is the jet of the
    /// i-th chart coordinate (usually a seeded variable).
    pub fn eval(&self, coords: &[Jet], params: &Params) -> Jet {
        let (dim, order) = (coords[0].dim, coords[0].order);
        match self {
            Expr::Num(c) => Jet::constant(dim, order, *c),
            Expr::Coord(i) => coords[*i],
            Expr::Param(name) => Jet::constant(dim, order, params[name]),
            Expr::Add(a, b) => a.eval(coords, params).add(&b.eval(coords, params)),
            Expr::Sub(a, b) => a.eval(coords, params).sub(&b.eval(coords, params)),
            Expr::Mul(a, b) => a.eval(coords, params).mul(&b.eval(coords, params)),
            Expr::Div(a, b) => a.eval(coords, params).div(&b.eval(coords, params)),
            Expr::Pow(a, b) => {
                let base = a.eval(coords, params);
                // Integer constant exponents go through repeated
                // multiplication so that negative bases are legal.
                if let Expr::Num(e) = **b {
                    if e.fract() == 0.0 && e.abs() <= 64.0 {
                        return base.powi(e as i64);
                    }
                }
                let e = b.eval(coords, params);
                if e.max_deriv_abs() == 0.0 && e.v.fract() == 0.0 && e.v.abs() <= 64.0 {
                    return base.powi(e.v as i64);
                }
                base.powf(&e)
            }
            Expr::Neg(a) => a.eval(coords, params).neg(),
            Expr::Fun(f, a) => f.apply(&a.eval(coords, params)),
        }
    }

    /// Evaluate the plain value (order-0 jets).
    pub fn eval_value(&self, p: &[f64], params: &Params) -> f64 {
        let dim = p.len().max(1);
        let mut coords: Vec<Jet> = p.iter().map(|&x| Jet::constant(dim, 0, x)).collect();
        if coords.is_empty() {
            coords.push(Jet::constant(1, 0, 0.0));
        }
        self.eval(&coords, params).v
    }

    /// Symbolic derivative with respect to coordinate `i`.
    /// Used for the parameter function f(tau) where f' is needed exactly.
    pub fn diff(&self, i: usize) -> Expr {
        use Expr::*;
        fn bx(e: Expr) -> Box<Expr> {
            Box::new(e)
        }
        match self {
            Num(_) | Param(_) => Num(0.0),
            Coord(j) => Num(if *j == i { 1.0 } else { 0.0 }),
            Add(a, b) => Add(bx(a.diff(i)), bx(b.diff(i))),
            Sub(a, b) => Sub(bx(a.diff(i)), bx(b.diff(i))),
            Mul(a, b) => Add(
                bx(Mul(bx(a.diff(i)), b.clone())),
                bx(Mul(a.clone(), bx(b.diff(i)))),
            ),
            Div(a, b) => Sub(
                bx(Div(bx(a.diff(i)), b.clone())),
                bx(Div(
                    bx(Mul(a.clone(), bx(b.diff(i)))),
                    bx(Mul(b.clone(), b.clone())),
                )),
            ),
            Pow(a, b) => {
                if let Num(e) = **b {
                    // d(a^e) = e a^(e-1) a'
                    Mul(
                        bx(Mul(bx(Num(e)), bx(Pow(a.clone(), bx(Num(e - 1.0)))))),
                        bx(a.diff(i)),
                    )
                } else {
                    // a^b = exp(b log a)
                    Mul(
                        bx(Pow(a.clone(), b.clone())),
                        bx(Add(
                            bx(Mul(bx(b.diff(i)), bx(Fun(Func::Log, a.clone())))),
                            bx(Div(bx(Mul(b.clone(), bx(a.diff(i)))), a.clone())),
                        )),
                    )
                }
            }
            Neg(a) => Neg(bx(a.diff(i))),
            Fun(f, a) => {
                let da = a.diff(i);
                let outer = match f {
                    Func::Sin => Fun(Func::Cos, a.clone()),
                    Func::Cos => Neg(bx(Fun(Func::Sin, a.clone()))),
                    Func::Tan => Div(
                        bx(Num(1.0)),
                        bx(Mul(
                            bx(Fun(Func::Cos, a.clone())),
                            bx(Fun(Func::Cos, a.clone())),
                        )),
                    ),
                    Func::Sinh => Fun(Func::Cosh, a.clone()),
                    Func::Cosh => Fun(Func::Sinh, a.clone()),
                    Func::Exp => Fun(Func::Exp, a.clone()),
                    Func::Log => Div(bx(Num(1.0)), a.clone()),
                    Func::Sqrt => Div(
                        bx(Num(0.5)),
                        bx(Fun(Func::Sqrt, a.clone())),
                    ),
                    Func::Abs => Div(a.clone(), bx(Fun(Func::Abs, a.clone()))),
                };
                Mul(bx(outer), bx(da))
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, names: &[String], min: u8) -> fmt::Result {
        let prec = self.precedence();
        let need_parens = prec < min;
        if need_parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Num(c) => {
                if *c >= 0.0 {
                    write!(f, "{c}")?;
                } else {
                    write!(f, "({c})")?;
                }
            }
            Expr::Coord(i) => write!(f, "{}", names[*i])?,
            Expr::Param(n) => write!(f, "{n}")?,
            Expr::Add(a, b) => {
                a.fmt_prec(f, names, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, names, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, names, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, names, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, names, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, names, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, names, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, names, 3)?;
            }
            Expr::Pow(a, b) => {
                a.fmt_prec(f, names, 5)?;
                write!(f, "^")?;
                b.fmt_prec(f, names, 4)?;
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, names, 3)?;
            }
            Expr::Fun(fun, a) => {
                write!(f, "{}(", fun.name())?;
                a.fmt_prec(f, names, 0)?;
                write!(f, ")")?;
            }
        }
        if need_parens {
            write!(f, ")")?;
        }
        Ok(())
    }

    /// Render with the given coordinate names; printing then parsing yields a
    /// structurally equal tree.
    pub fn display<'a>(&'a self, coord_names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: self,
            names: coord_names,
        }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt_prec(f, self.names, 0)
    }
}

// ------------------------------------------------------------------ lexer

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
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next_tok(&mut self) -> Result<Option<(Tok, usize)>, ExprError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_digit() || self.src[end] == b'.')
                {
                    end += 1;
                }
                if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                    let mut e = end + 1;
                    if e < self.src.len() && (self.src[e] == b'+' || self.src[e] == b'-') {
                        e += 1;
                    }
                    if e < self.src.len() && self.src[e].is_ascii_digit() {
                        while e < self.src.len() && self.src[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let val = text.parse::<f64>().map_err(|_| ExprError::Syntax {
                    offset: start,
                    msg: format!("invalid number `{text}`"),
                })?;
                self.pos = end;
                Tok::Num(val)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                self.pos = end;
                Tok::Ident(text.to_string())
            }
            other => {
                return Err(ExprError::Syntax {
                    offset: start,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok(Some((tok, start)))
    }
}

// ----------------------------------------------------------------- parser

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end_offset: usize,
    coord_names: Vec<String>,
    param_names: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.idx)
            .map(|(_, o)| *o)
            .unwrap_or(self.end_offset)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprError> {
        let off = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(ExprError::Syntax {
                offset: off,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.unary()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let exp = self.factor()?; // right associative
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Fun(f, Box::new(arg)));
                }
                if let Some(i) = self.coord_names.iter().position(|c| *c == name) {
                    return Ok(Expr::Coord(i));
                }
                if self.param_names.iter().any(|p| *p == name) {
                    return Ok(Expr::Param(name));
                }
                Err(ExprError::UnknownIdent { name, offset: off })
            }
            _ => Err(ExprError::Syntax {
                offset: off,
                msg: "expected a number, identifier or `(`".into(),
            }),
        }
    }
}

/// Parse expression text against a list of coordinate names and declared
/// parameter names.
pub fn parse_expr(
    text: &str,
    coord_names: &[String],
    param_names: &[String],
) -> Result<Expr, ExprError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next_tok()? {
        toks.push(t);
    }
    let mut p = Parser {
        toks,
        idx: 0,
        end_offset: text.len(),
        coord_names: coord_names.to_vec(),
        param_names: param_names.to_vec(),
    };
    let e = p.expr()?;
    if p.idx != p.toks.len() {
        return Err(ExprError::Syntax {
            offset: p.offset(),
            msg: "trailing input".into(),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn pythagorean_identity() {
        let e = parse_expr("sin(x)^2 + cos(x)^2", &names(&["x"]), &[]).unwrap();
        for x in [-2.0, 0.0, 0.3, 10.0] {
            assert_relative_eq!(e.eval_value(&[x], &Params::new()), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rational_with_params() {
        // hand evaluation: a=2, th=0, r=1: 2*2*1/(1+4) = 4/5
        let e = parse_expr(
            "2*a*cos(th)/(r^2 + a^2*cos(th)^2)",
            &names(&["r", "th"]),
            &names(&["a"]),
        )
        .unwrap();
        let mut p = Params::new();
        p.insert("a".into(), 2.0);
        assert_relative_eq!(e.eval_value(&[1.0, 0.0], &p), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn syntax_error_offset() {
        let err = parse_expr("x + ", &names(&["x"]), &[]).unwrap_err();
        match err {
            ExprError::Syntax { offset, .. } => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_named() {
        let err = parse_expr("x + zz", &names(&["x"]), &[]).unwrap_err();
        match err {
            ExprError::UnknownIdent { name, offset } => {
                assert_eq!(name, "zz");
                assert_eq!(offset, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn power_right_associative() {
        let e = parse_expr("2^3^2", &[], &[]).unwrap();
        assert_relative_eq!(e.eval_value(&[], &Params::new()), 512.0);
    }

    #[test]
    fn print_parse_roundtrip() {
        let ns = names(&["x", "y"]);
        for src in [
            "x + y*2 - 3/(x - 1)",
            "-x^2 + sin(x*y)",
            "sqrt(abs(x))*exp(-y)",
            "x^(y + 1)",
            "-(x + y)",
            "2*a*cos(x)/(y^2 + a^2*cos(x)^2)",
        ] {
            let e = parse_expr(src, &ns, &names(&["a"])).unwrap();
            let printed = format!("{}", e.display(&ns));
            let e2 = parse_expr(&printed, &ns, &names(&["a"])).unwrap();
            assert_eq!(e, e2, "roundtrip failed for `{src}` -> `{printed}`");
        }
    }

    #[test]
    fn symbolic_derivative() {
        let ns = names(&["x"]);
        let e = parse_expr("x^2*sin(x)", &ns, &[]).unwrap();
        let de = e.diff(0);
        let x = 0.8;
        assert_relative_eq!(
            de.eval_value(&[x], &Params::new()),
            2.0 * x * x.sin() + x * x * x.cos(),
            epsilon = 1e-14
        );
    }
}
