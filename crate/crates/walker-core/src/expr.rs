//! Exact scalar arithmetic for the engine: arbitrary-precision rationals,
//! sparse multivariate polynomials over the chart variables, polynomial
//! matrices, and the expression parser used by scenario files.
//!
//! Charts on the cotangent bundle of an n-dimensional base carry 2n
//! variables: base coordinates `x1..xn` and fiber coordinates `x1p..xnp`
//! (the ASCII spelling of x1', .., xn').  All arithmetic is exact; no
//! floating point appears anywhere in this crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Exact rational scalar.  Always in lowest terms with positive denominator
/// (maintained by `BigRational` itself).
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational `num/den`.  Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Whether a variable lives on the base or on the cotangent fiber.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    Base,
    Fiber,
}

/// A chart variable: base `x<k>` or fiber `x<k>p`, with 1-based index `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId {
    pub kind: VarKind,
    pub index: usize,
}

impl VarId {
    pub fn base(index: usize) -> Self {
        VarId { kind: VarKind::Base, index }
    }

    pub fn fiber(index: usize) -> Self {
        VarId { kind: VarKind::Fiber, index }
    }

    /// Exponent-vector slot for a chart with base dimension `n`.
    ///
    /// Fiber variables occupy slots `0..n`, base variables slots `n..2n`.
    /// This layout makes the monomial order below rank fiber variables
    /// before base variables, which matches how Walker-metric entries are
    /// conventionally displayed (fiber powers leading).
    pub fn slot(&self, n: usize) -> usize {
        match self.kind {
            VarKind::Fiber => self.index - 1,
            VarKind::Base => n + self.index - 1,
        }
    }

    /// Inverse of `slot`.
    pub fn from_slot(slot: usize, n: usize) -> VarId {
        if slot < n {
            VarId::fiber(slot + 1)
        } else {
            VarId::base(slot - n + 1)
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            VarKind::Base => format!("x{}", self.index),
            VarKind::Fiber => format!("x{}p", self.index),
        }
    }
}

/// Exponent vector of a monomial.  Ordered by total degree first, then
/// lexicographically on the slot layout (fiber variables take precedence);
/// this graded order is fixed globally so printing and term iteration are
/// deterministic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial { exps: vec![0; nvars] }
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn exp(&self, slot: usize) -> u32 {
        self.exps[slot]
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Errors from polynomial operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolyError {
    /// Operands belong to charts of different base dimension.
    DimensionMismatch { left: usize, right: usize },
    /// A point assignment does not cover the polynomial's variables.
    MissingAssignment { expected: usize, got: usize },
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::DimensionMismatch { left, right } => {
                write!(f, "chart dimension mismatch: {left} vs {right}")
            }
            PolyError::MissingAssignment { expected, got } => {
                write!(
                    f,
                    "point assigns {got} variables but polynomial has {expected}"
                )
            }
        }
    }
}

impl std::error::Error for PolyError {}

/// Sparse multivariate polynomial with exact rational coefficients over the
/// 2n chart variables.  Invariant: no stored coefficient is zero, so
/// structural equality is semantic equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    /// Zero polynomial over a chart of base dimension `n`.
    pub fn zero(n: usize) -> Self {
        Poly { n, terms: BTreeMap::new() }
    }

    /// Constant polynomial.
    pub fn constant(n: usize, value: Rat) -> Self {
        let mut p = Poly::zero(n);
        if !value.is_zero() {
            p.terms.insert(Monomial::one(2 * n), value);
        }
        p
    }

    pub fn from_int(n: usize, value: i64) -> Self {
        Poly::constant(n, rat_int(value))
    }

    /// The variable `v` as a polynomial.
    pub fn var(n: usize, v: VarId) -> Self {
        assert!(v.index >= 1 && v.index <= n, "variable index out of range");
        let mut m = Monomial::one(2 * n);
        m.exps[v.slot(n)] = 1;
        let mut p = Poly::zero(n);
        p.terms.insert(m, Rat::one());
        p
    }

    /// Base dimension of the underlying chart.
    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn nvars(&self) -> usize {
        2 * self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.total_degree() == 0)
    }

    /// Constant term (zero if absent).
    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&Monomial::one(2 * self.n))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// As a constant rational, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_constant() {
            Some(self.constant_term())
        } else {
            None
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    /// Highest total degree in the fiber variables across all terms.
    pub fn fiber_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.exps[..self.n].iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Whether the polynomial involves only base variables.
    pub fn is_base_only(&self) -> bool {
        self.fiber_degree() == 0
    }

    /// Iterate terms in ascending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    fn insert_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly, PolyError> {
        if self.n != other.n {
            return Err(PolyError::DimensionMismatch { left: self.n, right: other.n });
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        if self.n != other.n {
            return Err(PolyError::DimensionMismatch { left: self.n, right: other.n });
        }
        let mut out = Poly::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn neg_ref(&self) -> Poly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::zero(self.n);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= k;
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::constant(self.n, Rat::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Exact partial derivative with respect to `v`.
    pub fn diff(&self, v: VarId) -> Poly {
        let slot = v.slot(self.n);
        let mut out = Poly::zero(self.n);
        for (m, c) in &self.terms {
            let e = m.exps[slot];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.exps[slot] = e - 1;
            out.insert_term(m2, c * rat_int(e as i64));
        }
        out
    }

    /// Evaluate at a total point assignment.
    pub fn eval(&self, pt: &PointAssignment) -> Result<Rat, PolyError> {
        if pt.base_dim() != self.n {
            return Err(PolyError::MissingAssignment {
                expected: 2 * self.n,
                got: 2 * pt.base_dim(),
            });
        }
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (slot, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    term *= num_traits::pow(pt.slot_value(slot).clone(), e as usize);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Transplant into a chart of base dimension `new_n`, renaming variables
    /// through `map`.  Used by tests that adjoin auxiliary symbolic
    /// variables (for instance, treating vector components as symbols).
    pub fn embed(&self, new_n: usize, map: impl Fn(VarId) -> VarId) -> Poly {
        let mut out = Poly::zero(new_n);
        for (m, c) in &self.terms {
            let mut m2 = Monomial::one(2 * new_n);
            for (slot, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    let v = VarId::from_slot(slot, self.n);
                    let w = map(v);
                    assert!(w.index >= 1 && w.index <= new_n, "embed target out of range");
                    m2.exps[w.slot(new_n)] += e;
                }
            }
            out.insert_term(m2, c.clone());
        }
        out
    }

    /// Group terms by their fiber-variable exponents.  Returns, for each
    /// distinct fiber exponent vector (length n), the base-only polynomial
    /// multiplying that fiber monomial.
    pub fn fiber_profile(&self) -> BTreeMap<Vec<u32>, Poly> {
        let mut out: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let fiber: Vec<u32> = m.exps[..self.n].to_vec();
            let mut m2 = m.clone();
            for slot in 0..self.n {
                m2.exps[slot] = 0;
            }
            out.entry(fiber)
                .or_insert_with(|| Poly::zero(self.n))
                .insert_term(m2, c.clone());
        }
        out
    }
}

macro_rules! impl_poly_binop {
    ($trait:ident, $method:ident, $imp:expr) => {
        impl std::ops::$trait<&Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                let f: fn(&Poly, &Poly) -> Poly = $imp;
                f(self, rhs)
            }
        }
    };
}

impl_poly_binop!(Add, add, |a, b| a.checked_add(b).expect("chart mismatch"));
impl_poly_binop!(Sub, sub, |a, b| a
    .checked_add(&b.neg_ref())
    .expect("chart mismatch"));
impl_poly_binop!(Mul, mul, |a, b| a.checked_mul(b).expect("chart mismatch"));

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.neg_ref()
    }
}

fn fmt_coeff_times_monomial(f: &mut fmt::Formatter<'_>, c: &Rat, vars: &str) -> fmt::Result {
    if vars.is_empty() {
        write!(f, "{c}")
    } else if c.is_one() {
        write!(f, "{vars}")
    } else {
        write!(f, "{c}*{vars}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            // Print base variables first inside each term, so entries read
            // like "1/2*x2*x2p^2*x3p".
            let mut vars = String::new();
            let n = self.n;
            let slots: Vec<usize> = (n..2 * n).chain(0..n).collect();
            for slot in slots {
                let e = m.exps[slot];
                if e == 0 {
                    continue;
                }
                if !vars.is_empty() {
                    vars.push('*');
                }
                vars.push_str(&VarId::from_slot(slot, n).name());
                if e > 1 {
                    vars.push_str(&format!("^{e}"));
                }
            }
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            fmt_coeff_times_monomial(f, &c.abs(), &vars)?;
        }
        Ok(())
    }
}

/// Total assignment of rational values to all 2n chart variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointAssignment {
    n: usize,
    /// Values in slot layout (fiber `0..n`, base `n..2n`).
    vals: Vec<Rat>,
}

impl PointAssignment {
    /// Build from base values `x1..xn` and fiber values `x1p..xnp`.
    pub fn new(base: Vec<Rat>, fiber: Vec<Rat>) -> Self {
        assert_eq!(base.len(), fiber.len(), "base/fiber arity mismatch");
        let n = base.len();
        let mut vals = fiber;
        vals.extend(base);
        PointAssignment { n, vals }
    }

    pub fn origin(n: usize) -> Self {
        PointAssignment { n, vals: vec![Rat::zero(); 2 * n] }
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, v: VarId) -> &Rat {
        &self.vals[v.slot(self.n)]
    }

    pub fn set(&mut self, v: VarId, value: Rat) {
        let slot = v.slot(self.n);
        self.vals[slot] = value;
    }

    fn slot_value(&self, slot: usize) -> &Rat {
        &self.vals[slot]
    }

    /// All values listed in coordinate order `x1..xn, x1p..xnp`.
    pub fn coords(&self) -> Vec<Rat> {
        let mut out: Vec<Rat> = self.vals[self.n..].to_vec();
        out.extend_from_slice(&self.vals[..self.n]);
        out
    }
}

impl fmt::Display for PointAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Dense matrix of polynomials over a fixed chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    n: usize,
    nrows: usize,
    ncols: usize,
    data: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(n: usize, nrows: usize, ncols: usize) -> Self {
        PolyMatrix {
            n,
            nrows,
            ncols,
            data: vec![Poly::zero(n); nrows * ncols],
        }
    }

    pub fn identity(n: usize, dim: usize) -> Self {
        let mut m = PolyMatrix::zeros(n, dim, dim);
        for i in 0..dim {
            *m.get_mut(i, i) = Poly::constant(n, Rat::one());
        }
        m
    }

    pub fn from_fn(
        n: usize,
        nrows: usize,
        ncols: usize,
        mut f: impl FnMut(usize, usize) -> Poly,
    ) -> Self {
        let mut m = PolyMatrix::zeros(n, nrows, ncols);
        for r in 0..nrows {
            for c in 0..ncols {
                *m.get_mut(r, c) = f(r, c);
            }
        }
        m
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, r: usize, c: usize) -> &Poly {
        &self.data[r * self.ncols + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut Poly {
        &mut self.data[r * self.ncols + c]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Poly::is_zero)
    }

    pub fn transpose(&self) -> PolyMatrix {
        PolyMatrix::from_fn(self.n, self.ncols, self.nrows, |r, c| self.get(c, r).clone())
    }

    pub fn add(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        PolyMatrix::from_fn(self.n, self.nrows, self.ncols, |r, c| {
            self.get(r, c) + other.get(r, c)
        })
    }

    pub fn sub(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        PolyMatrix::from_fn(self.n, self.nrows, self.ncols, |r, c| {
            self.get(r, c) - other.get(r, c)
        })
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.ncols, other.nrows, "inner dimension mismatch");
        PolyMatrix::from_fn(self.n, self.nrows, other.ncols, |r, c| {
            let mut acc = Poly::zero(self.n);
            for k in 0..self.ncols {
                acc = &acc + &(self.get(r, k) * other.get(k, c));
            }
            acc
        })
    }

    pub fn scale(&self, k: &Rat) -> PolyMatrix {
        PolyMatrix::from_fn(self.n, self.nrows, self.ncols, |r, c| self.get(r, c).scale(k))
    }

    pub fn scale_poly(&self, p: &Poly) -> PolyMatrix {
        PolyMatrix::from_fn(self.n, self.nrows, self.ncols, |r, c| self.get(r, c) * p)
    }

    /// Exact determinant by cofactor expansion (intended for the small
    /// matrices this crate works with).
    pub fn det(&self) -> Poly {
        assert_eq!(self.nrows, self.ncols, "determinant of non-square matrix");
        let dim = self.nrows;
        if dim == 0 {
            return Poly::constant(self.n, Rat::one());
        }
        if dim == 1 {
            return self.get(0, 0).clone();
        }
        let mut acc = Poly::zero(self.n);
        for c in 0..dim {
            if self.get(0, c).is_zero() {
                continue;
            }
            let minor = PolyMatrix::from_fn(self.n, dim - 1, dim - 1, |r2, c2| {
                self.get(r2 + 1, if c2 < c { c2 } else { c2 + 1 }).clone()
            });
            let term = self.get(0, c) * &minor.det();
            acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Expression parser.
//
// Grammar (no implicit multiplication, "^" binds tightest):
//   expr   := term (("+" | "-") term)*
//   term   := factor ("*" factor)*
//   factor := atom ("^" uint)?
//   atom   := rational | ident | "(" expr ")" | "-" atom
//   rational := uint ("/" uint)?
//   ident  := "x" <k>  |  "x" <k> "p"      (1 <= k <= n)
// ---------------------------------------------------------------------------

/// Parse error with 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// Abstract syntax of a parsed expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprAst {
    Rational(Rat),
    Var(VarId),
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, u32),
    Neg(Box<ExprAst>),
}

impl ExprAst {
    /// Expand into canonical polynomial form over a chart of base dim `n`.
    pub fn to_poly(&self, n: usize) -> Poly {
        match self {
            ExprAst::Rational(r) => Poly::constant(n, r.clone()),
            ExprAst::Var(v) => Poly::var(n, *v),
            ExprAst::Add(a, b) => &a.to_poly(n) + &b.to_poly(n),
            ExprAst::Sub(a, b) => &a.to_poly(n) - &b.to_poly(n),
            ExprAst::Mul(a, b) => &a.to_poly(n) * &b.to_poly(n),
            ExprAst::Pow(a, e) => a.to_poly(n).pow(*e),
            ExprAst::Neg(a) => a.to_poly(n).neg_ref(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.pos];
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let b = self.src[self.pos];
            if b.is_ascii_whitespace() {
                self.bump();
                continue;
            }
            let (line, col) = (self.line, self.col);
            let tok = match b {
                b'+' => {
                    self.bump();
                    Tok::Plus
                }
                b'-' => {
                    self.bump();
                    Tok::Minus
                }
                b'*' => {
                    self.bump();
                    Tok::Star
                }
                b'/' => {
                    self.bump();
                    Tok::Slash
                }
                b'^' => {
                    self.bump();
                    Tok::Caret
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'0'..=b'9' => {
                    let mut digits = String::new();
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        digits.push(self.bump() as char);
                    }
                    Tok::Num(digits.parse::<BigInt>().expect("digit string"))
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let mut ident = String::new();
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_alphanumeric()
                            || self.src[self.pos] == b'_')
                    {
                        ident.push(self.bump() as char);
                    }
                    Tok::Ident(ident)
                }
                _ => {
                    return Err(self.error(format!(
                        "unexpected character '{}'",
                        b as char
                    )))
                }
            };
            out.push(Spanned { tok, line, col });
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    n: usize,
    end_line: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn error_here(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError { line, col, msg: msg.into() }
    }

    fn advance(&mut self) -> Option<Spanned> {
        let s = self.toks.get(self.pos).cloned();
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.advance();
                Ok(())
            }
            _ => Err(self.error_here(format!("expected {what}"))),
        }
    }

    fn parse_expr(&mut self) -> Result<ExprAst, ParseError> {
        let mut acc = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.advance();
                    let rhs = self.parse_term()?;
                    acc = ExprAst::Add(Box::new(acc), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.advance();
                    let rhs = self.parse_term()?;
                    acc = ExprAst::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<ExprAst, ParseError> {
        let mut acc = self.parse_factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.advance();
            let rhs = self.parse_factor()?;
            acc = ExprAst::Mul(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<ExprAst, ParseError> {
        // Unary minus binds looser than '^', so "-x1^2" means "-(x1^2)".
        if let Some(Tok::Minus) = self.peek() {
            self.advance();
            let inner = self.parse_factor()?;
            return Ok(ExprAst::Neg(Box::new(inner)));
        }
        let atom = self.parse_atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.advance();
            let e = self.parse_exponent()?;
            return Ok(ExprAst::Pow(Box::new(atom), e));
        }
        Ok(atom)
    }

    fn parse_exponent(&mut self) -> Result<u32, ParseError> {
        match self.peek() {
            Some(Tok::Num(_)) => {
                let Some(Spanned { tok: Tok::Num(v), line, col }) = self.advance() else {
                    unreachable!()
                };
                u32::try_from(&v).map_err(|_| ParseError {
                    line,
                    col,
                    msg: format!("exponent {v} too large"),
                })
            }
            Some(Tok::Minus) | Some(Tok::LParen) => {
                Err(self.error_here("negative or non-integer exponent"))
            }
            _ => Err(self.error_here("expected nonnegative integer exponent")),
        }
    }

    fn parse_atom(&mut self) -> Result<ExprAst, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(_)) => {
                let Some(Spanned { tok: Tok::Num(num), .. }) = self.advance() else {
                    unreachable!()
                };
                // Optional "/ uint" makes a rational literal.
                if let Some(Tok::Slash) = self.peek() {
                    self.advance();
                    match self.advance() {
                        Some(Spanned { tok: Tok::Num(den), line, col }) => {
                            if den.is_zero() {
                                return Err(ParseError {
                                    line,
                                    col,
                                    msg: "zero denominator".to_string(),
                                });
                            }
                            Ok(ExprAst::Rational(BigRational::new(num, den)))
                        }
                        _ => Err(self.error_here("expected denominator after '/'")),
                    }
                } else {
                    Ok(ExprAst::Rational(BigRational::from_integer(num)))
                }
            }
            Some(Tok::Ident(_)) => {
                let Some(Spanned { tok: Tok::Ident(name), line, col }) = self.advance() else {
                    unreachable!()
                };
                let v = parse_var_name(&name, self.n).ok_or(ParseError {
                    line,
                    col,
                    msg: format!(
                        "unknown identifier '{}' (expected x1..x{} or x1p..x{}p)",
                        name, self.n, self.n
                    ),
                })?;
                Ok(ExprAst::Var(v))
            }
            Some(Tok::LParen) => {
                self.advance();
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            _ => Err(self.error_here("expected a rational, variable, '(' or '-'")),
        }
    }
}

/// Recognize "x<k>" / "x<k>p" with 1 <= k <= n.
pub fn parse_var_name(name: &str, n: usize) -> Option<VarId> {
    let rest = name.strip_prefix('x')?;
    let (digits, fiber) = match rest.strip_suffix('p') {
        Some(d) => (d, true),
        None => (rest, false),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let k: usize = digits.parse().ok()?;
    if k < 1 || k > n {
        return None;
    }
    Some(if fiber { VarId::fiber(k) } else { VarId::base(k) })
}

/// Parse an expression into its AST over a chart of base dimension `n`.
pub fn parse_ast(src: &str, n: usize) -> Result<ExprAst, ParseError> {
    let mut end_line = 1;
    let mut end_col = 1;
    for ch in src.chars() {
        if ch == '\n' {
            end_line += 1;
            end_col = 1;
        } else {
            end_col += 1;
        }
    }
    let toks = Lexer::new(src).tokenize()?;
    let mut parser = Parser { toks, pos: 0, n, end_line, end_col };
    let ast = parser.parse_expr()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.error_here("unexpected trailing input"));
    }
    Ok(ast)
}

/// Parse an expression directly to canonical polynomial form.
pub fn parse_expr(src: &str, n: usize) -> Result<Poly, ParseError> {
    Ok(parse_ast(src, n)?.to_poly(n))
}
