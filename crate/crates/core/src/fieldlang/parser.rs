//! Recursive-descent parser for field expressions.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' exponent)*
//! exponent := '-' exponent | atom
//! atom     := number | 'pi' | 'i' | var | func '(' expr ')' | '(' expr ')'
//! ```

use super::ast::{BinOp, Func, Node, Var};
use super::Kind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v = text.parse::<f64>().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number '{text}'"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(Error::Syntax {
                        offset: i,
                        message: format!("unexpected character '{c}'"),
                    })
                }
            };
            out.push((i, tok));
            i += c.len_utf8();
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    kind: Kind,
    /// Offsets of abs/re/im calls, outermost first.
    nonanalytic: Vec<usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { offset, message: message.into() })
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Node::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let mut base = self.atom()?;
        while *self.peek() == Tok::Op('^') {
            self.bump();
            let at = self.offset();
            let exp = self.exponent()?;
            if self.kind == Kind::Complex && exp.as_integer().is_none() {
                return self.err(at, "complex fields admit only integer exponents");
            }
            base = Node::bin(BinOp::Pow, base, exp);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Node::neg(self.exponent()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Node> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => self.ident(at, &name),
            Tok::RParen => self.err(at, "unbalanced ')'"),
            Tok::End => self.err(at, "unexpected end of input"),
            Tok::Op(c) => self.err(at, format!("unexpected operator '{c}'")),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        let at = self.offset();
        match self.bump() {
            Tok::RParen => Ok(()),
            _ => self.err(at, "expected ')'"),
        }
    }

    fn ident(&mut self, at: usize, name: &str) -> Result<Node> {
        if let Some(func) = Func::from_name(name) {
            if *self.peek() != Tok::LParen {
                return self.err(self.offset(), format!("expected '(' after {name}"));
            }
            match (func.is_analytic(), self.kind) {
                (true, _) => {}
                (false, Kind::Complex) => self.nonanalytic.push(at),
                (false, _) if func == Func::Abs => {
                    return self.err(at, "abs is not differentiable and is not allowed in real fields")
                }
                (false, _) => return self.err(at, format!("{name} requires a complex field")),
            }
            self.bump();
            let arg = self.expr()?;
            self.expect_rparen()?;
            return Ok(Node::call(func, arg));
        }
        let node = match name {
            "pi" => Node::Pi,
            "i" if self.kind == Kind::Complex => Node::Imag,
            "x" => Node::Var(Var::X),
            "y" => Node::Var(Var::Y),
            "z" => Node::Var(Var::Z),
            _ => return self.err(at, format!("unknown identifier '{name}'")),
        };
        let allowed = match (self.kind, &node) {
            (Kind::Complex, Node::Var(v)) => *v == Var::Z,
            (Kind::Real2d, Node::Var(v)) => *v != Var::Z,
            _ => true,
        };
        if !allowed {
            return self.err(at, format!("variable '{name}' is not declared for {} fields", self.kind));
        }
        Ok(node)
    }
}

/// Parse `src` as an expression of the given kind.
pub fn parse_node(src: &str, kind: Kind) -> Result<Node> {
    if src.trim().is_empty() {
        return Err(Error::Syntax { offset: 0, message: "empty expression".into() });
    }
    let mut p = Parser { toks: lex(src)?, pos: 0, kind, nonanalytic: Vec::new() };
    let root = p.expr()?;
    match p.peek() {
        Tok::End => {}
        Tok::RParen => return p.err(p.offset(), "unbalanced ')'"),
        _ => return p.err(p.offset(), "unexpected trailing input"),
    }
    // abs/re/im may only wrap the whole expression (abs(f)^2 included)
    if let Some(&first) = p.nonanalytic.first() {
        if p.nonanalytic.len() > 1 {
            return p.err(p.nonanalytic[1], "abs/re/im may only appear once, at the top level");
        }
        let top = match &root {
            Node::Call(f, _) => !f.is_analytic(),
            Node::Bin(BinOp::Pow, base, exp) => {
                matches!(**base, Node::Call(Func::Abs, _)) && exp.as_integer() == Some(2)
            }
            _ => false,
        };
        if !top {
            return p.err(first, "abs/re/im may only wrap the whole expression");
        }
    }
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Node {
        Node::Var(Var::X)
    }
    fn y() -> Node {
        Node::Var(Var::Y)
    }

    #[test]
    fn sum_of_squares() {
        let n = parse_node("x^2+y^2", Kind::Real2d).unwrap();
        let sq = |v| Node::bin(BinOp::Pow, v, Node::Num(2.0));
        assert_eq!(n, Node::bin(BinOp::Add, sq(x()), sq(y())));
    }

    #[test]
    fn complex_difference() {
        let n = parse_node("z^2-1", Kind::Complex).unwrap();
        let want = Node::bin(
            BinOp::Sub,
            Node::bin(BinOp::Pow, Node::Var(Var::Z), Node::Num(2.0)),
            Node::Num(1.0),
        );
        assert_eq!(n, want);
    }

    #[test]
    fn unbalanced_paren_offset() {
        let e = parse_node("x^2+)", Kind::Real2d).unwrap_err();
        assert!(matches!(e, Error::Syntax { offset: 4, .. }), "{e:?}");
    }

    #[test]
    fn precedence_and_associativity() {
        // unary minus binds looser than ^
        assert_eq!(
            parse_node("-x^2", Kind::Real2d).unwrap(),
            Node::neg(Node::bin(BinOp::Pow, x(), Node::Num(2.0)))
        );
        // left associativity
        assert_eq!(
            parse_node("x-y-x", Kind::Real2d).unwrap(),
            Node::bin(BinOp::Sub, Node::bin(BinOp::Sub, x(), y()), x())
        );
        assert_eq!(
            parse_node("x/y*x", Kind::Real2d).unwrap(),
            Node::bin(BinOp::Mul, Node::bin(BinOp::Div, x(), y()), x())
        );
    }

    #[test]
    fn wrong_kind_variable() {
        let e = parse_node("x+z", Kind::Real2d).unwrap_err();
        assert!(matches!(e, Error::Syntax { offset: 2, .. }));
        let e = parse_node("z+x", Kind::Complex).unwrap_err();
        assert!(matches!(e, Error::Syntax { offset: 2, .. }));
        assert!(parse_node("x*y*z", Kind::Real3d).is_ok());
    }

    #[test]
    fn unknown_identifier() {
        let e = parse_node("tan(x)", Kind::Real2d).unwrap_err();
        assert!(matches!(e, Error::Syntax { offset: 0, .. }));
    }

    #[test]
    fn abs_rejected_on_real_fields() {
        assert!(parse_node("abs(x)", Kind::Real2d).is_err());
        assert!(parse_node("re(x)", Kind::Real2d).is_err());
    }

    #[test]
    fn complex_exponents_must_be_integers() {
        assert!(parse_node("z^0.5", Kind::Complex).is_err());
        assert!(parse_node("z^-2", Kind::Complex).is_ok());
        assert!(parse_node("x^0.5", Kind::Real2d).is_ok());
    }

    #[test]
    fn nonanalytic_wrappers_only_at_top() {
        assert!(parse_node("abs(z^2-1)", Kind::Complex).is_ok());
        assert!(parse_node("abs(z^2-1)^2", Kind::Complex).is_ok());
        assert!(parse_node("re(exp(z))", Kind::Complex).is_ok());
        let e = parse_node("1+abs(z)", Kind::Complex).unwrap_err();
        assert!(matches!(e, Error::Syntax { offset: 2, .. }));
        let e = parse_node("abs(re(z))", Kind::Complex).unwrap_err();
        assert!(matches!(e, Error::Syntax { offset: 4, .. }));
    }

    #[test]
    fn numbers_with_exponents() {
        assert_eq!(parse_node("1.5e-3", Kind::Real2d).unwrap(), Node::Num(1.5e-3));
        assert!(parse_node("1.2.3", Kind::Real2d).is_err());
    }

    #[test]
    fn empty_and_trailing() {
        assert!(parse_node("   ", Kind::Real2d).is_err());
        let e = parse_node("x y", Kind::Real2d).unwrap_err();
        assert!(matches!(e, Error::Syntax { offset: 2, .. }));
    }
}
