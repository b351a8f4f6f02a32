//! Charts, affine data on the base manifold, and Walker metrics on the
//! cotangent bundle.
//!
//! A Walker metric in adapted coordinates `(x1..xn, x1p..xnp)` is
//!
//! ```text
//!     g = 2 dx^i . dx^{i'} + B_ij dx^i dx^j
//! ```
//!
//! with `B` symmetric and polynomial.  As a matrix in the coordinate frame
//! (base indices first, then fiber indices) it is `[[B, I], [I, 0]]`, whose
//! inverse `[[0, I], [I, -B]]` is again polynomial.  Total indices `a` in
//! `0..2n` refer to the frame vectors `d/dx^{a+1}` for `a < n` and
//! `d/dx^{(a-n+1)'}` otherwise.

use crate::expr::{rat_int, Poly, PolyMatrix, PointAssignment, Rat, VarId};
use num_traits::Zero;
use std::fmt;

/// Errors from constructing geometric data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeomError {
    DimensionMismatch { what: String },
    IndexOutOfRange { what: String },
    NotBaseOnly { what: String },
    NotSymmetric { what: String },
    ModelMismatch { what: String },
}

impl fmt::Display for GeomError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeomError::DimensionMismatch { what } => write!(f, "dimension mismatch: {what}"),
            GeomError::IndexOutOfRange { what } => write!(f, "index out of range: {what}"),
            GeomError::NotBaseOnly { what } => {
                write!(f, "expression depends on fiber variables: {what}")
            }
            GeomError::NotSymmetric { what } => write!(f, "not symmetric: {what}"),
            GeomError::ModelMismatch { what } => write!(f, "model form violated: {what}"),
        }
    }
}

impl std::error::Error for GeomError {}

/// Adapted coordinate chart on the cotangent bundle of an n-dimensional base.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Chart {
    n: usize,
}

impl Chart {
    pub fn new(n: usize) -> Result<Chart, GeomError> {
        if n == 0 {
            return Err(GeomError::IndexOutOfRange { what: "base dimension must be >= 1".into() });
        }
        Ok(Chart { n })
    }

    /// Base dimension n.
    pub fn base_dim(&self) -> usize {
        self.n
    }

    /// Total dimension 2n of the cotangent bundle.
    pub fn total_dim(&self) -> usize {
        2 * self.n
    }

    /// Variable names in coordinate order `x1..xn, x1p..xnp`.
    pub fn var_names(&self) -> Vec<String> {
        let mut out: Vec<String> = (1..=self.n).map(|k| VarId::base(k).name()).collect();
        out.extend((1..=self.n).map(|k| VarId::fiber(k).name()));
        out
    }

    /// Parse an expression over this chart into canonical polynomial form.
    pub fn parse(&self, src: &str) -> Result<Poly, crate::expr::ParseError> {
        crate::expr::parse_expr(src, self.n)
    }

    /// The coordinate vector label for a total index `a` in `0..2n`,
    /// e.g. "d1" or "d2p".
    pub fn frame_name(&self, a: usize) -> String {
        if a < self.n {
            format!("d{}", a + 1)
        } else {
            format!("d{}p", a - self.n + 1)
        }
    }
}

fn ensure_base_only(p: &Poly, what: &str) -> Result<(), GeomError> {
    if p.is_base_only() {
        Ok(())
    } else {
        Err(GeomError::NotBaseOnly { what: format!("{what} = {p}") })
    }
}

/// Torsion-free affine connection on the base: Christoffel symbols
/// `Gamma_{ij}^k` (0-based indices), symmetric in `(i, j)`, with
/// coefficients depending on base variables only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineConnection {
    n: usize,
    gamma: Vec<Poly>,
}

impl AffineConnection {
    pub fn flat(n: usize) -> Self {
        AffineConnection { n, gamma: vec![Poly::zero(n); n * n * n] }
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// Set `Gamma_{ij}^k` (and its mirror `Gamma_{ji}^k`).
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: Poly) -> Result<(), GeomError> {
        if i >= self.n || j >= self.n || k >= self.n {
            return Err(GeomError::IndexOutOfRange {
                what: format!("Gamma[{},{},{}] with n={}", i + 1, j + 1, k + 1, self.n),
            });
        }
        if value.base_dim() != self.n {
            return Err(GeomError::DimensionMismatch {
                what: format!("Gamma entry over chart n={}", value.base_dim()),
            });
        }
        ensure_base_only(&value, &format!("Gamma[{},{},{}]", i + 1, j + 1, k + 1))?;
        let a = self.idx(i, j, k);
        let b = self.idx(j, i, k);
        self.gamma[a] = value.clone();
        self.gamma[b] = value;
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Poly {
        &self.gamma[self.idx(i, j, k)]
    }

    pub fn is_flat_symbols(&self) -> bool {
        self.gamma.iter().all(Poly::is_zero)
    }
}

/// Symmetric (0,2)-tensor field on the base with base-only coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymTensor2Base {
    n: usize,
    phi: Vec<Poly>,
}

impl SymTensor2Base {
    pub fn zero(n: usize) -> Self {
        SymTensor2Base { n, phi: vec![Poly::zero(n); n * n] }
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    /// Set `Phi_{ij}` (and its mirror).
    pub fn set(&mut self, i: usize, j: usize, value: Poly) -> Result<(), GeomError> {
        if i >= self.n || j >= self.n {
            return Err(GeomError::IndexOutOfRange {
                what: format!("Phi[{},{}] with n={}", i + 1, j + 1, self.n),
            });
        }
        ensure_base_only(&value, &format!("Phi[{},{}]", i + 1, j + 1))?;
        self.phi[i * self.n + j] = value.clone();
        self.phi[j * self.n + i] = value;
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.phi[i * self.n + j]
    }

    pub fn is_zero(&self) -> bool {
        self.phi.iter().all(Poly::is_zero)
    }

    pub fn add(&self, other: &SymTensor2Base) -> SymTensor2Base {
        assert_eq!(self.n, other.n);
        SymTensor2Base {
            n: self.n,
            phi: self
                .phi
                .iter()
                .zip(&other.phi)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, k: &Rat) -> SymTensor2Base {
        SymTensor2Base { n: self.n, phi: self.phi.iter().map(|p| p.scale(k)).collect() }
    }
}

/// (1,1)-tensor field on the base: entries `T_i^r` with base-only
/// coefficients (`i` the lower index).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndoBase {
    n: usize,
    t: Vec<Poly>,
}

impl EndoBase {
    pub fn zero(n: usize) -> Self {
        EndoBase { n, t: vec![Poly::zero(n); n * n] }
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    /// Set `T_i^r`.
    pub fn set(&mut self, i: usize, r: usize, value: Poly) -> Result<(), GeomError> {
        if i >= self.n || r >= self.n {
            return Err(GeomError::IndexOutOfRange {
                what: format!("T[{},{}] with n={}", i + 1, r + 1, self.n),
            });
        }
        ensure_base_only(&value, &format!("T[{},{}]", i + 1, r + 1))?;
        self.t[i * self.n + r] = value;
        Ok(())
    }

    pub fn get(&self, i: usize, r: usize) -> &Poly {
        &self.t[i * self.n + r]
    }
}

/// Vector field on the base with base-only polynomial components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorFieldBase {
    n: usize,
    comps: Vec<Poly>,
}

impl VectorFieldBase {
    pub fn zero(n: usize) -> Self {
        VectorFieldBase { n, comps: vec![Poly::zero(n); n] }
    }

    pub fn from_components(comps: Vec<Poly>) -> Result<Self, GeomError> {
        let n = comps.len();
        for (i, c) in comps.iter().enumerate() {
            if c.base_dim() != n {
                return Err(GeomError::DimensionMismatch {
                    what: format!("vector component {} over chart n={}", i + 1, c.base_dim()),
                });
            }
            ensure_base_only(c, &format!("X[{}]", i + 1))?;
        }
        Ok(VectorFieldBase { n, comps })
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize) -> &Poly {
        &self.comps[i]
    }

    pub fn set(&mut self, i: usize, value: Poly) -> Result<(), GeomError> {
        if i >= self.n {
            return Err(GeomError::IndexOutOfRange {
                what: format!("X[{}] with n={}", i + 1, self.n),
            });
        }
        ensure_base_only(&value, &format!("X[{}]", i + 1))?;
        self.comps[i] = value;
        Ok(())
    }
}

/// Walker metric `g = 2 dx^i . dx^{i'} + B_ij dx^i dx^j` on the cotangent
/// bundle, stored through its symmetric polynomial block `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkerMetric {
    chart: Chart,
    b: Vec<Poly>,
}

impl WalkerMetric {
    /// Build from the symmetric block `B` (an n-by-n polynomial matrix).
    pub fn new(chart: Chart, b: PolyMatrix) -> Result<Self, GeomError> {
        let n = chart.base_dim();
        if b.nrows() != n || b.ncols() != n || b.base_dim() != n {
            return Err(GeomError::DimensionMismatch {
                what: format!("B block is {}x{} over n={}", b.nrows(), b.ncols(), b.base_dim()),
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if b.get(i, j) != b.get(j, i) {
                    return Err(GeomError::NotSymmetric {
                        what: format!("B[{},{}] != B[{},{}]", i + 1, j + 1, j + 1, i + 1),
                    });
                }
            }
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(b.get(i, j).clone());
            }
        }
        Ok(WalkerMetric { chart, b: data })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn base_dim(&self) -> usize {
        self.chart.base_dim()
    }

    pub fn total_dim(&self) -> usize {
        self.chart.total_dim()
    }

    /// Entry `B_ij` (0-based).
    pub fn b(&self, i: usize, j: usize) -> &Poly {
        &self.b[i * self.base_dim() + j]
    }

    /// Full 2n-by-2n coordinate matrix `[[B, I], [I, 0]]`.
    pub fn metric_full(&self) -> PolyMatrix {
        let n = self.base_dim();
        PolyMatrix::from_fn(n, 2 * n, 2 * n, |a, b| {
            if a < n && b < n {
                self.b(a, b).clone()
            } else if (a < n && b == a + n) || (b < n && a == b + n) {
                Poly::constant(n, rat_int(1))
            } else {
                Poly::zero(n)
            }
        })
    }

    /// Exact inverse `[[0, I], [I, -B]]`.
    pub fn metric_inverse(&self) -> PolyMatrix {
        let n = self.base_dim();
        PolyMatrix::from_fn(n, 2 * n, 2 * n, |a, b| {
            if a >= n && b >= n {
                self.b(a - n, b - n).neg_ref()
            } else if (a < n && b == a + n) || (b < n && a == b + n) {
                Poly::constant(n, rat_int(1))
            } else {
                Poly::zero(n)
            }
        })
    }

    /// Metric entry `g_ab` for total indices.
    pub fn g(&self, a: usize, b: usize) -> Poly {
        let n = self.base_dim();
        if a < n && b < n {
            self.b(a, b).clone()
        } else if (a < n && b == a + n) || (b < n && a == b + n) {
            Poly::constant(n, rat_int(1))
        } else {
            Poly::zero(n)
        }
    }

    /// Inverse-metric entry `g^ab` for total indices.
    pub fn g_inv(&self, a: usize, b: usize) -> Poly {
        let n = self.base_dim();
        if a >= n && b >= n {
            self.b(a - n, b - n).neg_ref()
        } else if (a < n && b == a + n) || (b < n && a == b + n) {
            Poly::constant(n, rat_int(1))
        } else {
            Poly::zero(n)
        }
    }

    /// Evaluate `B` at a point.
    pub fn b_at(&self, pt: &PointAssignment) -> Result<Vec<Vec<Rat>>, crate::expr::PolyError> {
        let n = self.base_dim();
        let mut out = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                out[i][j] = self.b(i, j).eval(pt)?;
            }
        }
        Ok(out)
    }

    /// Evaluate `g(u, v)` at a point, for component vectors in the
    /// coordinate frame.
    pub fn metric_eval(&self, pt: &PointAssignment, u: &[Rat], v: &[Rat]) -> Rat {
        let n = self.base_dim();
        assert_eq!(u.len(), 2 * n);
        assert_eq!(v.len(), 2 * n);
        let b = self.b_at(pt).expect("chart mismatch in metric_eval");
        let mut acc = Rat::zero();
        for i in 0..n {
            for j in 0..n {
                acc += &b[i][j] * (&u[i] * &v[j]);
            }
            acc += &u[i] * &v[n + i];
            acc += &u[n + i] * &v[i];
        }
        acc
    }
}

/// Tangent vector at a point, with its causal norm cached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentVec {
    comps: Vec<Rat>,
    eps: Rat,
}

impl TangentVec {
    pub fn new(m: &WalkerMetric, pt: &PointAssignment, comps: Vec<Rat>) -> Self {
        assert_eq!(comps.len(), m.total_dim(), "component count");
        let eps = m.metric_eval(pt, &comps, &comps);
        TangentVec { comps, eps }
    }

    pub fn comps(&self) -> &[Rat] {
        &self.comps
    }

    pub fn eps(&self) -> &Rat {
        &self.eps
    }

    pub fn is_null(&self) -> bool {
        self.eps.is_zero()
    }
}

impl fmt::Display for TangentVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}
