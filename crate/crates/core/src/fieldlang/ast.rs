use std::fmt;

/// Coordinate variables. In complex fields `z` denotes the complex variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Re,
    Im,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Re => "re",
            Func::Im => "im",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "re" => Func::Re,
            "im" => Func::Im,
            _ => return None,
        })
    }

    /// abs, re and im are not complex-differentiable.
    pub fn is_analytic(self) -> bool {
        !matches!(self, Func::Abs | Func::Re | Func::Im)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Pi,
    /// The imaginary unit `i`.
    Imag,
    Var(Var),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn bin(op: BinOp, l: Node, r: Node) -> Self {
        Node::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn neg(n: Node) -> Self {
        Node::Neg(Box::new(n))
    }

    pub fn call(f: Func, n: Node) -> Self {
        Node::Call(f, Box::new(n))
    }

    /// `Some(n)` when the node is an integer literal, optionally negated.
    pub fn as_integer(&self) -> Option<i32> {
        match self {
            Node::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => Some(*v as i32),
            Node::Neg(inner) => inner.as_integer().map(|n| -n),
            _ => None,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Node::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Node::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Node::Neg(_) => 3,
            Node::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, n: &Node, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({n})")
    } else {
        write!(f, "{n}")
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v}"),
            Node::Pi => f.write_str("pi"),
            Node::Imag => f.write_str("i"),
            Node::Var(Var::X) => f.write_str("x"),
            Node::Var(Var::Y) => f.write_str("y"),
            Node::Var(Var::Z) => f.write_str("z"),
            Node::Neg(inner) => {
                f.write_str("-")?;
                write_child(f, inner, inner.precedence() < 3)
            }
            Node::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Node::Bin(op, l, r) => {
                let p = self.precedence();
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                if *op == BinOp::Pow {
                    // exponent grammar admits only atoms and negated atoms
                    write_child(f, l, l.precedence() < p)?;
                    f.write_str(sym)?;
                    write_child(f, r, r.precedence() < 5)
                } else {
                    write_child(f, l, l.precedence() < p)?;
                    f.write_str(sym)?;
                    write_child(f, r, r.precedence() <= p)
                }
            }
        }
    }
}
