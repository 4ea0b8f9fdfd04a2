//! Text syntax for specifications.
//!
//! ```text
//! phi      := orexpr
//! orexpr   := andexpr { "|" andexpr }
//! andexpr  := untilexpr { "&" untilexpr }
//! untilexpr:= unary [ "U[" int "," int "]" unary ]
//! unary    := "G[" int "," int "]" unary | "F[" int "," int "]" unary
//!           | "!" unary | "(" phi ")" | atom
//! atom     := "in(" ident ")" | "out(" ident ")" | linatom
//! linatom  := linexpr ("<=" | ">=") linexpr
//! ```
//!
//! Output coordinates are written `y1 .. yp`. Negation applies only to
//! predicates and region tests and is folded into them while parsing, so
//! results are always in positive normal form.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Interval, Predicate};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at line {line}, column {column}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("negation can only be applied to predicates and regions")]
    NegationOfNonPredicate,
    #[error("malformed interval: {0}")]
    MalformedInterval(String),
    #[error("non-linear expression")]
    NonLinear,
    #[error("unknown output variable `{0}`")]
    UnknownVariable(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error("invalid region file: {0}")]
    Json(String),
    #[error("region `{0}` has an empty or inverted axis")]
    EmptyBox(String),
    #[error("duplicate region `{0}`")]
    Duplicate(String),
    #[error("region `{name}` has dimension {got}, expected {expected}")]
    Dimension { name: String, expected: usize, got: usize },
}

/// What a region stands for in a scenario; only affects plotting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Obstacle,
    Goal,
    #[default]
    Target,
    Key,
    Door,
}

/// Axis-aligned box in output space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionJson", into = "RegionJson")]
pub struct RegionDef {
    pub name: String,
    /// Per-axis `(min, max)`.
    pub bounds: Vec<(f64, f64)>,
    pub kind: RegionKind,
    pub color: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RegionJson {
    name: String,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    #[serde(default)]
    kind: RegionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    color: Option<String>,
}

impl TryFrom<RegionJson> for RegionDef {
    type Error = RegionError;

    fn try_from(r: RegionJson) -> Result<Self, Self::Error> {
        let mut def = RegionDef::new(r.name, vec![(r.xmin, r.xmax), (r.ymin, r.ymax)])?;
        def.kind = r.kind;
        def.color = r.color;
        Ok(def)
    }
}

impl From<RegionDef> for RegionJson {
    fn from(r: RegionDef) -> Self {
        let (xmin, xmax) = r.bounds.first().copied().unwrap_or((0.0, 0.0));
        let (ymin, ymax) = r.bounds.get(1).copied().unwrap_or((0.0, 0.0));
        RegionJson {
            name: r.name,
            xmin,
            xmax,
            ymin,
            ymax,
            kind: r.kind,
            color: r.color,
        }
    }
}

impl RegionDef {
    pub fn new(name: impl Into<String>, bounds: Vec<(f64, f64)>) -> Result<Self, RegionError> {
        let name = name.into();
        if bounds.iter().any(|&(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(RegionError::EmptyBox(name));
        }
        Ok(Self {
            name,
            bounds,
            kind: RegionKind::default(),
            color: None,
        })
    }

    pub fn with_kind(mut self, kind: RegionKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Face half-spaces, lower then upper per axis. Their conjunction is the box.
    pub fn faces(&self) -> Vec<Predicate> {
        let p = self.dim();
        let axis = |i: usize| if p == 2 { ["x", "y"][i].to_string() } else { format!("y{}", i + 1) };
        let mut out = Vec::with_capacity(2 * p);
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            let mut a = vec![0.0; p];
            a[i] = -1.0;
            out.push(Predicate::new(format!("{}.{}>={}", self.name, axis(i), lo), a, -lo));
            let mut a = vec![0.0; p];
            a[i] = 1.0;
            out.push(Predicate::new(format!("{}.{}<={}", self.name, axis(i), hi), a, hi));
        }
        out
    }

    /// `in(R)`: conjunction of the faces.
    pub fn inside(&self) -> Formula {
        Formula::And(self.faces().into_iter().map(Formula::Pred).collect())
    }

    /// `out(R)`: disjunction of the negated faces.
    pub fn outside(&self) -> Formula {
        Formula::Or(self.faces().iter().map(|f| Formula::Pred(f.negated())).collect())
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.bounds.iter().zip(y).all(|(&(lo, hi), &v)| lo <= v && v <= hi)
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }
}

#[derive(Debug, Deserialize)]
struct RegionFile {
    regions: Vec<RegionDef>,
}

/// Reads `{"regions": [{"name", "xmin", "xmax", "ymin", "ymax"}]}`. Extra keys are ignored.
pub fn load_regions(json: &str) -> Result<BTreeMap<String, RegionDef>, RegionError> {
    let file: RegionFile = serde_json::from_str(json).map_err(|e| RegionError::Json(e.to_string()))?;
    region_map(file.regions)
}

pub fn region_map(regions: Vec<RegionDef>) -> Result<BTreeMap<String, RegionDef>, RegionError> {
    let mut map = BTreeMap::new();
    for r in regions {
        if map.contains_key(&r.name) {
            return Err(RegionError::Duplicate(r.name));
        }
        map.insert(r.name.clone(), r);
    }
    Ok(map)
}

/// Specification text plus the regions it may reference.
#[derive(Debug, Clone)]
pub struct SpecSource {
    pub text: String,
    pub regions: BTreeMap<String, RegionDef>,
    /// Output dimension `p`.
    pub dim: usize,
}

impl SpecSource {
    pub fn new(text: impl Into<String>, regions: BTreeMap<String, RegionDef>) -> Self {
        let dim = regions.values().next().map_or(2, RegionDef::dim);
        Self {
            text: text.into(),
            regions,
            dim,
        }
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }
}

pub fn parse(src: &SpecSource) -> Result<Formula, ParseError> {
    for r in src.regions.values() {
        if r.dim() != src.dim {
            return Err(ParseError {
                kind: ParseErrorKind::Syntax(format!(
                    "region `{}` has dimension {}, spec has dimension {}",
                    r.name,
                    r.dim(),
                    src.dim
                )),
                line: 1,
                column: 1,
            });
        }
    }
    let tokens = lex(&src.text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        src,
    };
    let f = p.phi()?;
    p.expect_eof()?;
    Ok(f)
}

/// Parses a single linear atom such as `2*y1 - 3*y2 <= 5` into `a·y - b <= 0` form.
pub fn parse_linear_atom(text: &str, dim: usize) -> Result<Predicate, ParseError> {
    let tokens = lex(text)?;
    let src = SpecSource {
        text: text.to_string(),
        regions: BTreeMap::new(),
        dim,
    };
    let mut p = Parser {
        tokens,
        pos: 0,
        src: &src,
    };
    let pred = p.linatom()?;
    p.expect_eof()?;
    Ok(pred)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Amp,
    Pipe,
    Bang,
    Le,
    Ge,
    Plus,
    Minus,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l, col) = (line, column);
        let mut advance = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                column = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Pipe),
            '!' => Some(Tok::Bang),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '<' | '>' => {
                if chars.get(i + 1) != Some(&'=') {
                    return Err(ParseError {
                        kind: ParseErrorKind::Syntax(format!("expected `{c}=`")),
                        line: l,
                        column: col,
                    });
                }
                advance = 2;
                Some(if c == '<' { Tok::Le } else { Tok::Ge })
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                advance = j - i;
                Some(Tok::Number(chars[i..j].iter().collect()))
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                advance = j - i;
                Some(Tok::Ident(chars[i..j].iter().collect()))
            }
            other => {
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{other}`")),
                    line: l,
                    column: col,
                })
            }
        };
        if let Some(tok) = tok {
            out.push(Token {
                tok,
                line: l,
                column: col,
            });
        }
        i += advance;
        column += advance;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a SpecSource,
}

/// Result of `unary`: negation can only be pushed through these shapes.
enum Unary {
    Formula(Formula),
    /// A predicate or a region test, which can absorb a `!`.
    Negatable(Formula),
}

impl Unary {
    fn into_formula(self) -> Formula {
        match self {
            Unary::Formula(f) | Unary::Negatable(f) => f,
        }
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, kind: ParseErrorKind) -> ParseError {
        let t = &self.tokens[self.pos];
        ParseError {
            kind,
            line: t.line,
            column: t.column,
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.err_here(ParseErrorKind::Syntax(format!(
                "expected {tok}, found {}",
                self.peek()
            ))))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            t => Err(self.err_here(ParseErrorKind::Syntax(format!("unexpected {t}")))),
        }
    }

    fn phi(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.andexpr()?];
        while *self.peek() == Tok::Pipe {
            self.bump();
            parts.push(self.andexpr()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn andexpr(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.untilexpr()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            parts.push(self.untilexpr()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn untilexpr(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?.into_formula();
        if self.is_temporal("U") {
            self.bump();
            let window = self.interval()?;
            let rhs = self.unary()?.into_formula();
            return Ok(Formula::Until(window, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn is_temporal(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == op) && *self.peek_at(1) == Tok::LBracket
    }

    fn is_region_test(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "in" || s == "out") && *self.peek_at(1) == Tok::LParen
    }

    fn unary(&mut self) -> Result<Unary, ParseError> {
        if self.is_temporal("G") || self.is_temporal("F") {
            let always = matches!(self.peek(), Tok::Ident(s) if s == "G");
            self.bump();
            let window = self.interval()?;
            let body = Box::new(self.unary()?.into_formula());
            return Ok(Unary::Formula(if always {
                Formula::Always(window, body)
            } else {
                Formula::Eventually(window, body)
            }));
        }
        match self.peek().clone() {
            Tok::Bang => {
                let at = self.bump();
                match self.unary()? {
                    Unary::Negatable(f) => Ok(Unary::Negatable(negate_atom(f))),
                    Unary::Formula(_) => Err(ParseError {
                        kind: ParseErrorKind::NegationOfNonPredicate,
                        line: at.line,
                        column: at.column,
                    }),
                }
            }
            Tok::LParen => {
                self.bump();
                // parentheses around a bare predicate or region test keep it negatable
                let save = self.pos;
                if let Ok(Unary::Negatable(f)) = self.unary() {
                    if *self.peek() == Tok::RParen {
                        self.bump();
                        return Ok(Unary::Negatable(f));
                    }
                }
                self.pos = save;
                let inner = self.phi()?;
                self.expect(Tok::RParen)?;
                Ok(Unary::Formula(inner))
            }
            _ if self.is_region_test() => {
                let inside = matches!(self.peek(), Tok::Ident(s) if s == "in");
                self.bump();
                self.expect(Tok::LParen)?;
                let name_tok = self.tokens[self.pos].clone();
                let name = match self.bump().tok {
                    Tok::Ident(s) => s,
                    t => {
                        return Err(ParseError {
                            kind: ParseErrorKind::Syntax(format!("expected region name, found {t}")),
                            line: name_tok.line,
                            column: name_tok.column,
                        })
                    }
                };
                let region = self.src.regions.get(&name).ok_or(ParseError {
                    kind: ParseErrorKind::UnknownRegion(name.clone()),
                    line: name_tok.line,
                    column: name_tok.column,
                })?;
                self.expect(Tok::RParen)?;
                Ok(Unary::Negatable(if inside {
                    region.inside()
                } else {
                    region.outside()
                }))
            }
            Tok::Ident(_) | Tok::Number(_) | Tok::Minus | Tok::Plus => {
                Ok(Unary::Negatable(Formula::Pred(self.linatom()?)))
            }
            t => Err(self.err_here(ParseErrorKind::Syntax(format!("unexpected {t}")))),
        }
    }

    fn integer(&mut self) -> Result<usize, ParseError> {
        let t = self.tokens[self.pos].clone();
        let located = |kind| ParseError {
            kind,
            line: t.line,
            column: t.column,
        };
        match &t.tok {
            Tok::Minus => Err(located(ParseErrorKind::MalformedInterval(
                "negative endpoint".into(),
            ))),
            Tok::Number(s) => {
                self.bump();
                s.parse::<usize>().map_err(|_| {
                    located(ParseErrorKind::MalformedInterval(format!(
                        "`{s}` is not a non-negative integer"
                    )))
                })
            }
            other => Err(located(ParseErrorKind::Syntax(format!(
                "expected integer, found {other}"
            )))),
        }
    }

    fn interval(&mut self) -> Result<Interval, ParseError> {
        self.expect(Tok::LBracket)?;
        let (line, column) = {
            let t = &self.tokens[self.pos];
            (t.line, t.column)
        };
        let start = self.integer()?;
        self.expect(Tok::Comma)?;
        let end = self.integer()?;
        self.expect(Tok::RBracket)?;
        Interval::new(start, end).map_err(|_| ParseError {
            kind: ParseErrorKind::MalformedInterval(format!("start {start} exceeds end {end}")),
            line,
            column,
        })
    }

    fn linatom(&mut self) -> Result<Predicate, ParseError> {
        let start = self.pos;
        let (lhs_a, lhs_c) = self.linexpr()?;
        let le = match self.peek() {
            Tok::Le => true,
            Tok::Ge => false,
            t => {
                return Err(self.err_here(ParseErrorKind::Syntax(format!(
                    "expected `<=` or `>=`, found {t}"
                ))))
            }
        };
        self.bump();
        let (rhs_a, rhs_c) = self.linexpr()?;
        // lhs - rhs <= 0  (or >= 0)
        let mut a: Vec<f64> = lhs_a.iter().zip(&rhs_a).map(|(l, r)| l - r).collect();
        let mut b = rhs_c - lhs_c;
        if !le {
            a.iter_mut().for_each(|v| *v = -*v);
            b = -b;
        }
        let name = self.tokens[start..self.pos]
            .iter()
            .map(|t| match &t.tok {
                Tok::Ident(s) | Tok::Number(s) => s.clone(),
                Tok::Le => " <= ".into(),
                Tok::Ge => " >= ".into(),
                Tok::Plus => " + ".into(),
                Tok::Minus => "-".into(),
                Tok::Star => "*".into(),
                _ => String::new(),
            })
            .collect::<String>();
        Ok(Predicate::new(name, a, b))
    }

    /// Returns (coefficients, constant).
    fn linexpr(&mut self) -> Result<(Vec<f64>, f64), ParseError> {
        let mut a = vec![0.0; self.src.dim];
        let mut c = 0.0;
        let mut sign = 1.0;
        loop {
            while matches!(self.peek(), Tok::Plus | Tok::Minus) {
                if *self.peek() == Tok::Minus {
                    sign = -sign;
                }
                self.bump();
            }
            let (coef, var) = self.term()?;
            match var {
                Some(i) => a[i] += sign * coef,
                None => c += sign * coef,
            }
            sign = 1.0;
            if !matches!(self.peek(), Tok::Plus | Tok::Minus) {
                break;
            }
        }
        Ok((a, c))
    }

    /// `factor { "*" factor }` with at most one variable factor.
    fn term(&mut self) -> Result<(f64, Option<usize>), ParseError> {
        let mut coef = 1.0;
        let mut var = None;
        loop {
            let t = self.tokens[self.pos].clone();
            match &t.tok {
                Tok::Number(s) => {
                    self.bump();
                    coef *= s.parse::<f64>().map_err(|_| ParseError {
                        kind: ParseErrorKind::Syntax(format!("bad number `{s}`")),
                        line: t.line,
                        column: t.column,
                    })?;
                }
                Tok::Ident(s) => {
                    let idx = self.variable_index(s).ok_or(ParseError {
                        kind: ParseErrorKind::UnknownVariable(s.clone()),
                        line: t.line,
                        column: t.column,
                    })?;
                    if var.is_some() {
                        return Err(ParseError {
                            kind: ParseErrorKind::NonLinear,
                            line: t.line,
                            column: t.column,
                        });
                    }
                    self.bump();
                    var = Some(idx);
                }
                Tok::Minus => {
                    self.bump();
                    coef = -coef;
                    continue;
                }
                other => {
                    return Err(self.err_here(ParseErrorKind::Syntax(format!(
                        "expected number or output variable, found {other}"
                    ))))
                }
            }
            if *self.peek() == Tok::Star {
                self.bump();
            } else {
                return Ok((coef, var));
            }
        }
    }

    fn variable_index(&self, s: &str) -> Option<usize> {
        let idx: usize = s.strip_prefix('y')?.parse().ok()?;
        (1..=self.src.dim).contains(&idx).then(|| idx - 1)
    }
}

fn negate_atom(f: Formula) -> Formula {
    match f {
        Formula::Pred(p) => Formula::Pred(p.negated()),
        // region tests only: conjunction/disjunction of predicates
        Formula::And(cs) => Formula::Or(cs.into_iter().map(negate_atom).collect()),
        Formula::Or(cs) => Formula::And(cs.into_iter().map(negate_atom).collect()),
        other => other,
    }
}

/// Prints formulas in the input syntax; regions are printed expanded into faces.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
            match g {
                Formula::And(_) | Formula::Or(_) | Formula::Until(..) => write!(f, "({g})"),
                _ => write!(f, "{g}"),
            }
        }
        match self {
            Formula::Pred(p) => {
                for (i, a) in p.a.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{a}*y{}", i + 1)?;
                }
                if p.a.is_empty() {
                    f.write_str("0")?;
                }
                write!(f, " <= {}", p.b)
            }
            Formula::And(cs) | Formula::Or(cs) => {
                let sep = if matches!(self, Formula::And(_)) { " & " } else { " | " };
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    operand(f, c)?;
                }
                Ok(())
            }
            Formula::Always(i, g) => {
                write!(f, "G{i} ")?;
                operand(f, g)
            }
            Formula::Eventually(i, g) => {
                write!(f, "F{i} ")?;
                operand(f, g)
            }
            Formula::Until(i, g, h) => {
                operand(f, g)?;
                write!(f, " U{i} ")?;
                operand(f, h)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Signal;

    fn regions() -> BTreeMap<String, RegionDef> {
        region_map(vec![
            RegionDef::new("A", vec![(0.0, 1.0), (0.0, 1.0)]).unwrap(),
            RegionDef::new("O", vec![(4.0, 6.0), (4.0, 6.0)]).unwrap(),
            RegionDef::new("G1", vec![(8.0, 9.0), (8.0, 9.0)]).unwrap(),
        ])
        .unwrap()
    }

    fn parse_str(s: &str) -> Result<Formula, ParseError> {
        parse(&SpecSource::new(s, regions()))
    }

    #[test]
    fn in_region_expands_to_faces() {
        let f = parse_str("in(A)").unwrap();
        let Formula::And(cs) = &f else { panic!("{f:?}") };
        let got: Vec<(Vec<f64>, f64)> = cs
            .iter()
            .map(|c| match c {
                Formula::Pred(p) => (p.a.clone(), p.b),
                _ => panic!(),
            })
            .collect();
        assert_eq!(
            got,
            vec![
                (vec![-1.0, 0.0], -0.0),
                (vec![1.0, 0.0], 1.0),
                (vec![0.0, -1.0], -0.0),
                (vec![0.0, 1.0], 1.0),
            ]
        );
    }

    #[test]
    fn reach_avoid_shape() {
        let f = parse_str("G[0,10] out(O) & F[0,10] in(G1)").unwrap();
        let o = regions()["O"].clone();
        let g = regions()["G1"].clone();
        let expect = Formula::And(vec![
            Formula::always(0, 10, o.outside()).unwrap(),
            Formula::eventually(0, 10, g.inside()).unwrap(),
        ]);
        assert_eq!(f, expect);
        let Formula::And(cs) = &f else { panic!() };
        let Formula::Always(_, body) = &cs[0] else { panic!() };
        assert!(matches!(&**body, Formula::Or(v) if v.len() == 4));
    }

    #[test]
    fn negation_rules() {
        assert_eq!(
            parse_str("!(G[0,2] in(A))").unwrap_err().kind,
            ParseErrorKind::NegationOfNonPredicate
        );
        assert!(parse_str("!(G[0,2] a)").is_err());
        assert_eq!(parse_str("!in(A)").unwrap(), parse_str("out(A)").unwrap());
        assert_eq!(parse_str("!out(A)").unwrap(), parse_str("in(A)").unwrap());
        assert_eq!(parse_str("!!y1 <= 2").unwrap(), parse_str("y1 <= 2").unwrap());
        assert_eq!(
            parse_str("!(y1 <= 2)").unwrap(),
            Formula::Pred(Predicate::new("", vec![-1.0, 0.0], -2.0))
        );
    }

    #[test]
    fn linear_atoms() {
        let p = parse_linear_atom("y1 <= 2", 2).unwrap();
        assert_eq!((p.a, p.b), (vec![1.0, 0.0], 2.0));
        let p = parse_linear_atom("y1 >= 2", 2).unwrap();
        assert_eq!((p.a, p.b), (vec![-1.0, 0.0], -2.0));
        let p = parse_linear_atom("2*y1 - 3*y2 <= 5", 2).unwrap();
        assert_eq!((p.a.clone(), p.b), (vec![2.0, -3.0], 5.0));
        // g(1, 1) = 2 - 3 - 5 = -6
        assert_eq!(p.robustness(&[1.0, 1.0]), 6.0);
        assert_eq!(
            parse_linear_atom("y1*y2 <= 1", 2).unwrap_err().kind,
            ParseErrorKind::NonLinear
        );
        assert_eq!(
            parse_linear_atom("y3 <= 1", 2).unwrap_err().kind,
            ParseErrorKind::UnknownVariable("y3".into())
        );
        let p = parse_linear_atom("y1 + 1 <= y2 - 2", 2).unwrap();
        assert_eq!((p.a, p.b), (vec![1.0, -1.0], -3.0));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_str("F[0,3] in(A) &\n  in(Nope)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownRegion("Nope".into()));
        assert_eq!((e.line, e.column), (2, 6));
        let e = parse_str("F[5,3] in(A)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::MalformedInterval(_)));
        let e = parse_str("F[-1,3] in(A)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::MalformedInterval(_)));
        let e = parse_str("F[0,3] in(A) )").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(e.column, 14);
    }

    #[test]
    fn precedence_and_grouping() {
        // | binds loosest, & next, then U, then prefix operators
        let f = parse_str("in(A) | in(O) & F[0,1] in(G1)").unwrap();
        assert!(matches!(&f, Formula::Or(cs) if cs.len() == 2 && matches!(cs[1], Formula::And(_))));
        let f = parse_str("G[0,2] in(A) U[0,3] in(G1)").unwrap();
        assert!(matches!(&f, Formula::Until(_, l, _) if matches!(**l, Formula::Always(..))));
        let flat = parse_str("y1 <= 1 | y1 <= 2 | y1 <= 3").unwrap();
        assert!(matches!(&flat, Formula::Or(cs) if cs.len() == 3));
        let nested = parse_str("y1 <= 1 | (y1 <= 2 | y1 <= 3)").unwrap();
        assert!(matches!(&nested, Formula::Or(cs) if cs.len() == 2));
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "F[0,5] (G[0,2] in(A) | G[0,2] in(O)) & G[0,5] out(O) & F[0,5] in(G1)",
            "out(O) U[1,4] in(A)",
            "2*y1 - 3*y2 <= 5 | y1 >= 0.25",
            "(in(A) & in(O)) & in(G1)",
        ] {
            let f = parse_str(s).unwrap();
            let again = parse_str(&f.to_string()).unwrap();
            assert_eq!(f, again, "{s} -> {f}");
        }
    }

    #[test]
    fn region_membership_robustness() {
        let a = regions()["O"].clone();
        let inside = Signal::new(vec![vec![5.0, 4.5]]).unwrap();
        let outside = Signal::new(vec![vec![3.0, 5.0]]).unwrap();
        assert!(a.inside().robustness(&inside, 0).unwrap() > 0.0);
        assert!(a.outside().robustness(&inside, 0).unwrap() < 0.0);
        assert!(a.inside().robustness(&outside, 0).unwrap() < 0.0);
        assert!(a.outside().robustness(&outside, 0).unwrap() > 0.0);
    }

    #[test]
    fn region_file() {
        let json = r#"{"regions": [{"name": "A", "xmin": 0, "xmax": 1, "ymin": 2, "ymax": 3, "kind": "goal"}]}"#;
        let m = load_regions(json).unwrap();
        assert_eq!(m["A"].bounds, vec![(0.0, 1.0), (2.0, 3.0)]);
        assert_eq!(m["A"].kind, RegionKind::Goal);
        let bad = r#"{"regions": [{"name": "A", "xmin": 1, "xmax": 1, "ymin": 2, "ymax": 3}]}"#;
        assert!(load_regions(bad).is_err());
        let dup = r#"{"regions": [{"name": "A", "xmin": 0, "xmax": 1, "ymin": 2, "ymax": 3},
                                  {"name": "A", "xmin": 0, "xmax": 1, "ymin": 2, "ymax": 3}]}"#;
        assert_eq!(load_regions(dup).unwrap_err(), RegionError::Duplicate("A".into()));
    }
}
