//! Payoff-expression grammar: numeric literals, profile variables `x[n,i]`,
//! conditional-probability variables `q[e]`, the four arithmetic operators
//! with standard precedence, and the functions `max`, `min`, `abs`.
//!
//! Parsing resolves every variable reference against a declared scope, so an
//! expression that parses evaluates totally on the profile space; the only
//! evaluation-time failure is division by zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::myopic::PayoffFamily;
use crate::profile::{Layout, MixedProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Func {
    Max,
    Min,
    Abs,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Expr {
    Num(f64),
    /// Probability of `action` of `player` in the profile.
    ProfVar { player: usize, action: usize },
    /// Conditional probability of one endpoint within its class.
    CondVar { endpoint: usize },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Declared names that expressions may reference.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    /// Player names with their action names, in declaration order.
    pub players: Option<Vec<(String, Vec<String>)>>,
    /// Endpoint names of a common-knowledge class.
    pub endpoints: Option<Vec<String>>,
}

impl Scope {
    pub fn for_players(players: Vec<(String, Vec<String>)>) -> Self {
        Scope {
            players: Some(players),
            endpoints: None,
        }
    }

    pub fn for_endpoints(endpoints: Vec<String>) -> Self {
        Scope {
            players: None,
            endpoints: Some(endpoints),
        }
    }
}

/// A parsed expression together with its source text.
#[derive(Clone, Debug, Serialize)]
pub struct PayoffExpression {
    pub source: String,
    pub ast: Expr,
}

/// Values an expression is evaluated against.
#[derive(Clone, Copy, Debug, Default)]
pub struct EvalInput<'a> {
    pub profile: Option<&'a MixedProfile>,
    pub conditional: Option<&'a [f64]>,
}

pub fn parse_expression(src: &str, scope: &Scope) -> Result<PayoffExpression> {
    if src.trim().is_empty() {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: "empty expression".into(),
        });
    }
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        scope,
    };
    let ast = p.expr()?;
    if p.pos < p.tokens.len() {
        let t = &p.tokens[p.pos];
        return Err(Error::Parse {
            line: t.line,
            col: t.col,
            msg: format!("unexpected trailing `{}`", t.kind.describe()),
        });
    }
    Ok(PayoffExpression {
        source: src.to_string(),
        ast,
    })
}

impl Expr {
    pub fn eval(&self, input: &EvalInput) -> Result<f64> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::ProfVar { player, action } => {
                let profile = input.profile.ok_or_else(|| {
                    Error::Eval("expression references x[..] but no profile was supplied".into())
                })?;
                profile.prob(*player, *action)
            }
            Expr::CondVar { endpoint } => {
                let q = input.conditional.ok_or_else(|| {
                    Error::Eval("expression references q[..] but no conditional was supplied".into())
                })?;
                q[*endpoint]
            }
            Expr::Neg(e) => -e.eval(input)?,
            Expr::Add(a, b) => a.eval(input)? + b.eval(input)?,
            Expr::Sub(a, b) => a.eval(input)? - b.eval(input)?,
            Expr::Mul(a, b) => a.eval(input)? * b.eval(input)?,
            Expr::Div(a, b) => {
                let den = b.eval(input)?;
                if den == 0.0 {
                    return Err(Error::Eval("division by zero".into()));
                }
                a.eval(input)? / den
            }
            Expr::Call(f, args) => {
                let vals: Vec<f64> = args
                    .iter()
                    .map(|a| a.eval(input))
                    .collect::<Result<_>>()?;
                match f {
                    Func::Max => vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    Func::Min => vals.iter().cloned().fold(f64::INFINITY, f64::min),
                    Func::Abs => vals[0].abs(),
                }
            }
        };
        if !v.is_finite() {
            return Err(Error::Eval("expression produced a non-finite value".into()));
        }
        Ok(v)
    }

    /// Source form with minimal parentheses; `parse . pretty` is the identity
    /// on parsed expressions.
    pub fn pretty(&self) -> String {
        self.pretty_prec(0)
    }

    fn pretty_prec(&self, min_prec: u8) -> String {
        let (s, prec) = match self {
            Expr::Num(v) => (format!("{v}"), 4),
            Expr::ProfVar { player, action } => (format!("x[{},{}]", player + 1, action + 1), 4),
            Expr::CondVar { endpoint } => (format!("q[{}]", endpoint + 1), 4),
            Expr::Neg(e) => (format!("-{}", e.pretty_prec(3)), 3),
            Expr::Add(a, b) => (format!("{} + {}", a.pretty_prec(1), b.pretty_prec(2)), 1),
            Expr::Sub(a, b) => (format!("{} - {}", a.pretty_prec(1), b.pretty_prec(2)), 1),
            Expr::Mul(a, b) => (format!("{}*{}", a.pretty_prec(2), b.pretty_prec(3)), 2),
            Expr::Div(a, b) => (format!("{}/{}", a.pretty_prec(2), b.pretty_prec(3)), 2),
            Expr::Call(f, args) => {
                let name = match f {
                    Func::Max => "max",
                    Func::Min => "min",
                    Func::Abs => "abs",
                };
                let args: Vec<String> = args.iter().map(|a| a.pretty_prec(0)).collect();
                (format!("{name}({})", args.join(", ")), 4)
            }
        };
        if prec < min_prec {
            format!("({s})")
        } else {
            s
        }
    }
}

/// A family given by one expression per flat (player, action) coordinate.
pub struct ExprFamily {
    layout: Layout,
    exprs: Vec<PayoffExpression>,
}

impl ExprFamily {
    pub fn new(layout: Layout, exprs: Vec<PayoffExpression>) -> Result<Self> {
        if exprs.len() != layout.flat_len() {
            return Err(Error::Dimension(format!(
                "need one expression per coordinate: {} vs {}",
                exprs.len(),
                layout.flat_len()
            )));
        }
        Ok(ExprFamily { layout, exprs })
    }

    pub fn expressions(&self) -> &[PayoffExpression] {
        &self.exprs
    }
}

impl PayoffFamily for ExprFamily {
    fn layout(&self) -> &Layout {
        &self.layout
    }
    fn eval_into(&self, x: &MixedProfile, out: &mut [f64]) -> Result<()> {
        let input = EvalInput {
            profile: Some(x),
            conditional: None,
        };
        for (o, e) in out.iter_mut().zip(&self.exprs) {
            *o = e.ast.eval(&input)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Num(v) => format!("{v}"),
            TokenKind::Ident(s) => s.clone(),
            TokenKind::LParen => "(".into(),
            TokenKind::RParen => ")".into(),
            TokenKind::LBracket => "[".into(),
            TokenKind::RBracket => "]".into(),
            TokenKind::Comma => ",".into(),
            TokenKind::Plus => "+".into(),
            TokenKind::Minus => "-".into(),
            TokenKind::Star => "*".into(),
            TokenKind::Slash => "/".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |i: &mut usize, col: &mut usize| {
            *i += 1;
            *col += 1;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(&mut i, &mut col),
            '(' => {
                out.push(Token { kind: TokenKind::LParen, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            ')' => {
                out.push(Token { kind: TokenKind::RParen, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            '[' => {
                out.push(Token { kind: TokenKind::LBracket, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            ']' => {
                out.push(Token { kind: TokenKind::RBracket, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            ',' => {
                out.push(Token { kind: TokenKind::Comma, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            '+' => {
                out.push(Token { kind: TokenKind::Plus, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            '-' => {
                out.push(Token { kind: TokenKind::Minus, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            '*' => {
                out.push(Token { kind: TokenKind::Star, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            '/' => {
                out.push(Token { kind: TokenKind::Slash, line: tl, col: tc });
                advance(&mut i, &mut col);
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    advance(&mut i, &mut col);
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while i < j {
                            advance(&mut i, &mut col);
                        }
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            advance(&mut i, &mut col);
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v: f64 = text.parse().map_err(|_| Error::Parse {
                    line: tl,
                    col: tc,
                    msg: format!("malformed number `{text}`"),
                })?;
                out.push(Token { kind: TokenKind::Num(v), line: tl, col: tc });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    advance(&mut i, &mut col);
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Token { kind: TokenKind::Ident(text), line: tl, col: tc });
            }
            other => {
                return Err(Error::Parse {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    scope: &'a Scope,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> Error {
        let (line, col) = match self.tokens.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self
                .tokens
                .last()
                .map(|t| (t.line, t.col + t.kind.describe().len()))
                .unwrap_or((1, 1)),
        };
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<()> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err_here(format!(
                "expected `{}`, found `{}`",
                kind.describe(),
                t.kind.describe()
            ))),
            None => Err(self.err_here(format!("expected `{}`, found end of input", kind.describe()))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().map(|t| t.kind.clone()) {
                Some(TokenKind::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(TokenKind::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().map(|t| t.kind.clone()) {
                Some(TokenKind::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(TokenKind::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Minus)) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token { kind: TokenKind::Num(v), .. }) => Ok(Expr::Num(v)),
            Some(Token { kind: TokenKind::LParen, .. }) => {
                let e = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            Some(Token { kind: TokenKind::Ident(name), line, col }) => {
                match name.as_str() {
                    "x" => self.profile_var(line, col),
                    "q" => self.conditional_var(line, col),
                    "max" => self.call(Func::Max, 2),
                    "min" => self.call(Func::Min, 2),
                    "abs" => self.call(Func::Abs, 1),
                    other => Err(Error::Parse {
                        line,
                        col,
                        msg: format!("unknown identifier `{other}`"),
                    }),
                }
            }
            Some(t) => Err(Error::Parse {
                line: t.line,
                col: t.col,
                msg: format!("expected a value, found `{}`", t.kind.describe()),
            }),
            None => Err(self.err_here("unexpected end of input")),
        }
    }

    fn call(&mut self, f: Func, min_args: usize) -> Result<Expr> {
        self.expect(TokenKind::LParen)?;
        let mut args = vec![self.expr()?];
        while matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Comma)) {
            self.pos += 1;
            args.push(self.expr()?);
        }
        self.expect(TokenKind::RParen)?;
        if f == Func::Abs && args.len() != 1 {
            return Err(self.err_here("abs takes exactly one argument"));
        }
        if args.len() < min_args && f != Func::Abs {
            return Err(self.err_here("max/min take at least two arguments"));
        }
        Ok(Expr::Call(f, args))
    }

    fn profile_var(&mut self, line: usize, col: usize) -> Result<Expr> {
        self.expect(TokenKind::LBracket)?;
        let players = self.scope.players.as_ref().ok_or(Error::Parse {
            line,
            col,
            msg: "x[..] variables are not available in this context".into(),
        })?;
        let pref = self.reference()?;
        let player = resolve(&pref, players.len(), |i| &players[i].0).map_err(|msg| Error::Parse {
            line,
            col,
            msg,
        })?;
        self.expect(TokenKind::Comma)?;
        let aref = self.reference()?;
        let actions = &players[player].1;
        let action = resolve(&aref, actions.len(), |i| &actions[i]).map_err(|msg| Error::Parse {
            line,
            col,
            msg,
        })?;
        self.expect(TokenKind::RBracket)?;
        Ok(Expr::ProfVar { player, action })
    }

    fn conditional_var(&mut self, line: usize, col: usize) -> Result<Expr> {
        self.expect(TokenKind::LBracket)?;
        let endpoints = self.scope.endpoints.as_ref().ok_or(Error::Parse {
            line,
            col,
            msg: "q[..] variables are not available in this context".into(),
        })?;
        let eref = self.reference()?;
        let endpoint =
            resolve(&eref, endpoints.len(), |i| &endpoints[i]).map_err(|msg| Error::Parse {
                line,
                col,
                msg,
            })?;
        self.expect(TokenKind::RBracket)?;
        Ok(Expr::CondVar { endpoint })
    }

    fn reference(&mut self) -> Result<Reference> {
        match self.next() {
            Some(Token { kind: TokenKind::Num(v), line, col }) => {
                if v.fract() != 0.0 || v < 1.0 {
                    Err(Error::Parse {
                        line,
                        col,
                        msg: format!("index must be a positive integer, got {v}"),
                    })
                } else {
                    Ok(Reference::Index(v as usize))
                }
            }
            Some(Token { kind: TokenKind::Ident(s), .. }) => Ok(Reference::Name(s)),
            Some(t) => Err(Error::Parse {
                line: t.line,
                col: t.col,
                msg: format!("expected a name or index, found `{}`", t.kind.describe()),
            }),
            None => Err(self.err_here("expected a name or index")),
        }
    }
}

enum Reference {
    Index(usize),
    Name(String),
}

fn resolve<'n>(
    r: &Reference,
    count: usize,
    name_of: impl Fn(usize) -> &'n String,
) -> std::result::Result<usize, String> {
    match r {
        Reference::Index(i) => {
            if *i >= 1 && *i <= count {
                Ok(i - 1)
            } else {
                Err(format!("index {i} out of range 1..={count}"))
            }
        }
        Reference::Name(n) => (0..count)
            .find(|&i| name_of(i) == n)
            .ok_or_else(|| format!("unknown identifier `{n}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::SimplexPoint;

    fn voting_scope() -> Scope {
        Scope::for_players(vec![("1".into(), vec!["T".into(), "C".into()])])
    }

    fn profile(p: f64) -> MixedProfile {
        MixedProfile::new(vec![SimplexPoint::new(vec![p, 1.0 - p]).unwrap()])
    }

    #[test]
    fn parses_and_evaluates_voting_payoff() {
        let e = parse_expression("1 - 5*x[1,T]", &voting_scope()).unwrap();
        for p in [0.0, 0.25, 1.0] {
            let x = profile(p);
            let v = e
                .ast
                .eval(&EvalInput { profile: Some(&x), conditional: None })
                .unwrap();
            assert!((v - (1.0 - 5.0 * p)).abs() < 1e-15);
        }
    }

    #[test]
    fn max_of_probabilities() {
        let scope = Scope::for_players(vec![("1".into(), vec!["H".into(), "T".into()])]);
        let e = parse_expression("max(x[1,H], 1 - x[1,H])", &scope).unwrap();
        let x = profile(0.3);
        let v = e
            .ast
            .eval(&EvalInput { profile: Some(&x), conditional: None })
            .unwrap();
        assert!((v - 0.7).abs() < 1e-15);
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_expression("x[1,T", &voting_scope()) {
            Err(Error::Parse { line, col, msg }) => {
                assert_eq!(line, 1);
                assert!(col >= 5, "column {col}");
                assert!(msg.contains("]"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_is_reported() {
        match parse_expression("1 + bogus", &voting_scope()) {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("unknown identifier")),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_expression("x[1,Z]", &voting_scope()) {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("unknown identifier")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn division_guard() {
        let e = parse_expression("1/(x[1,T] - x[1,T])", &voting_scope()).unwrap();
        let x = profile(0.5);
        match e.ast.eval(&EvalInput { profile: Some(&x), conditional: None }) {
            Err(Error::Eval(msg)) => assert!(msg.contains("division")),
            other => panic!("expected eval error, got {other:?}"),
        }
    }

    #[test]
    fn conditional_variables() {
        let scope = Scope::for_endpoints(vec!["e1".into(), "e2".into()]);
        let e = parse_expression("2*q[e1] - q[e2]", &scope).unwrap();
        let q = [0.75, 0.25];
        let v = e
            .ast
            .eval(&EvalInput { profile: None, conditional: Some(&q) })
            .unwrap();
        assert!((v - 1.25).abs() < 1e-15);
        // q vars are rejected in profile-only scopes
        assert!(parse_expression("q[e1]", &voting_scope()).is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let scope = voting_scope();
        let e = parse_expression("2 - 1 - 1 + 2*3/2", &scope).unwrap();
        let v = e.ast.eval(&EvalInput::default()).unwrap();
        assert!((v - 3.0).abs() < 1e-15);
    }

    #[test]
    fn pretty_round_trip_is_idempotent() {
        use rand::SeedableRng;
        let scope = voting_scope();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let src = random_expr_source(&mut rng, 0);
            let parsed = parse_expression(&src, &scope).unwrap();
            let printed = parsed.ast.pretty();
            let reparsed = parse_expression(&printed, &scope).unwrap();
            assert_eq!(parsed.ast, reparsed.ast, "source `{src}` printed `{printed}`");
            assert_eq!(printed, reparsed.ast.pretty());
        }
    }

    fn random_expr_source<R: rand::Rng>(rng: &mut R, depth: usize) -> String {
        if depth > 3 || rng.gen_bool(0.3) {
            return match rng.gen_range(0..3) {
                0 => format!("{:.2}", rng.gen_range(0.0..9.0)),
                1 => "x[1,T]".to_string(),
                _ => "x[1,C]".to_string(),
            };
        }
        let a = random_expr_source(rng, depth + 1);
        let b = random_expr_source(rng, depth + 1);
        match rng.gen_range(0..7) {
            0 => format!("({a}) + ({b})"),
            1 => format!("({a}) - ({b})"),
            2 => format!("({a}) * ({b})"),
            3 => format!("({a}) / (1 + abs({b}))"),
            4 => format!("max({a}, {b})"),
            5 => format!("min({a}, {b})"),
            _ => format!("-({a})"),
        }
    }
}
