//! Spectral analysis of curvature operators, exactly over the rationals.
//!
//! Provides rational matrices with characteristic polynomials
//! (Faddeev-LeVerrier) and Jordan-profile extraction (rational eigenvalues via
//! the rational root theorem, block sizes via rank sequences), together with
//! deterministic samplers and the pointwise scans used to test curvature
//! properties: Jacobi-operator spectrum across causal classes, Jordan-form
//! constancy, nilpotency on null vectors, the cubic derivative operator built
//! from the covariant derivative of the curvature, and the squared skew
//! curvature operator on nondegenerate planes.
//!
//! Samplers draw coordinates and components from a fixed small-height
//! rational pool and are seeded, so every scan is reproducible.  Causal
//! character of sampled vectors is not approximate: one fiber component is
//! solved exactly so that `g(v,v)` equals the requested value.

use crate::curvature::{NablaRiemann, RiemannTensor};
use crate::expr::{rat, rat_int, PointAssignment, Poly, PolyMatrix, Rat, VarId};
use crate::geometry::WalkerMetric;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Render a rational as `p` or `p/q`.
pub fn rat_display(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Render a component vector as `(a, b, ...)`.
pub fn vector_display(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(rat_display).collect();
    format!("({})", parts.join(", "))
}

// ---------------------------------------------------------------------------
// Rational matrices
// ---------------------------------------------------------------------------

/// Square matrix over the rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    dim: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(dim: usize) -> Self {
        RatMatrix { dim, data: vec![Rat::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = RatMatrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Rat::one();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut m = RatMatrix::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = f(r, c);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[r * self.dim + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rat::is_zero)
    }

    pub fn trace(&self) -> Rat {
        let mut t = Rat::zero();
        for i in 0..self.dim {
            t += self.get(i, i);
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        RatMatrix::from_fn(d, |r, c| {
            let mut acc = Rat::zero();
            for k in 0..d {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                acc += a * other.get(k, c);
            }
            acc
        })
    }

    pub fn sub(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.dim, other.dim);
        RatMatrix::from_fn(self.dim, |r, c| self.get(r, c) - other.get(r, c))
    }

    pub fn scale(&self, k: &Rat) -> RatMatrix {
        RatMatrix::from_fn(self.dim, |r, c| self.get(r, c) * k)
    }

    /// `self + k * identity`.
    pub fn add_scalar(&self, k: &Rat) -> RatMatrix {
        let mut m = self.clone();
        for i in 0..self.dim {
            let v = m.get(i, i) + k;
            m.set(i, i, v);
        }
        m
    }

    /// `self - lambda * identity`.
    pub fn sub_scalar(&self, lambda: &Rat) -> RatMatrix {
        self.add_scalar(&-lambda.clone())
    }

    /// Rank over the rationals (exact Gaussian elimination).
    pub fn rank(&self) -> usize {
        let d = self.dim;
        let mut a = self.data.clone();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..d {
            let pivot = (row..d).find(|&r| !a[r * d + col].is_zero());
            let Some(p) = pivot else { continue };
            for c in 0..d {
                a.swap(p * d + c, row * d + c);
            }
            for r in (row + 1)..d {
                if a[r * d + col].is_zero() {
                    continue;
                }
                let factor = &a[r * d + col] / &a[row * d + col];
                for c in col..d {
                    let v = &a[r * d + c] - &(&factor * &a[row * d + c]);
                    a[r * d + c] = v;
                }
            }
            row += 1;
            rank += 1;
            if row == d {
                break;
            }
        }
        rank
    }
}

// ---------------------------------------------------------------------------
// Univariate polynomials over the rationals
// ---------------------------------------------------------------------------

/// Univariate polynomial with rational coefficients, stored in ascending
/// order of degree.  Displayed with indeterminate `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<Rat>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        UniPoly { coeffs: vec![Rat::one()] }
    }

    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        let mut p = UniPoly { coeffs };
        p.trim();
        p
    }

    /// Convenience constructor from integer coefficients, ascending.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        UniPoly::from_coeffs(coeffs.iter().map(|&x| rat_int(x)).collect())
    }

    /// The monomial `t^k`.
    pub fn power_of_t(k: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = Rat::one();
        UniPoly { coeffs }
    }

    /// The linear factor `t - r`.
    pub fn linear(r: &Rat) -> Self {
        UniPoly::from_coeffs(vec![-r.clone(), Rat::one()])
    }

    fn trim(&mut self) {
        while self.coeffs.last().map_or(false, Rat::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = &acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * rat_int(k as i64))
            .collect();
        UniPoly::from_coeffs(coeffs)
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k) + other.coeff(k)).collect();
        UniPoly::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k) - other.coeff(k)).collect();
        UniPoly::from_coeffs(coeffs)
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        UniPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, k: &Rat) -> UniPoly {
        UniPoly::from_coeffs(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn pow(&self, e: usize) -> UniPoly {
        let mut acc = UniPoly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Long division: `self = q * div + r` with `deg r < deg div`.
    pub fn divrem(&self, div: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!div.is_zero(), "division by zero polynomial");
        let dd = div.degree();
        let lead = div.coeffs[dd].clone();
        let mut rem = self.clone();
        let mut q = vec![Rat::zero(); self.coeffs.len().saturating_sub(dd)];
        while !rem.is_zero() && rem.degree() >= dd {
            let k = rem.degree() - dd;
            let f = &rem.coeffs[rem.degree()] / &lead;
            q[k] = f.clone();
            for (j, c) in div.coeffs.iter().enumerate() {
                let v = &rem.coeffs[k + j] - &(&f * c);
                rem.coeffs[k + j] = v;
            }
            rem.trim();
        }
        (UniPoly::from_coeffs(q), rem)
    }

    pub fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let lead = self.coeffs[self.degree()].clone();
        self.scale(&lead.recip())
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == 0
    }

    /// `self / gcd(self, self')`: same roots, each simple.
    pub fn squarefree_part(&self) -> UniPoly {
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.monic();
        }
        self.divrem(&g).0.monic()
    }

    /// Extract rational roots with multiplicities.  Returns
    /// `(roots, cofactor, search_complete)`: the cofactor has no rational
    /// roots when the search is complete; an incomplete search (coefficients
    /// too large to factor) may leave rational roots in the cofactor.
    pub fn rational_roots(&self) -> (Vec<(Rat, usize)>, UniPoly, bool) {
        let mut roots: Vec<(Rat, usize)> = vec![];
        if self.is_zero() {
            return (roots, self.clone(), true);
        }
        let mut p = self.clone();
        let mut zero_mult = 0usize;
        while p.degree() > 0 && p.coeffs[0].is_zero() {
            p = p.divrem(&UniPoly::power_of_t(1)).0;
            zero_mult += 1;
        }
        if zero_mult > 0 {
            roots.push((Rat::zero(), zero_mult));
        }
        if p.degree() == 0 {
            return (roots, UniPoly::one(), true);
        }

        let mut den_lcm = BigInt::one();
        for c in &p.coeffs {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let scale = Rat::from_integer(den_lcm);
        let int_coeffs: Vec<BigInt> =
            p.coeffs.iter().map(|c| (c * &scale).to_integer()).collect();
        let (nums, ok_n) = divisors_capped(&int_coeffs[0]);
        let (dens, ok_d) = divisors_capped(&int_coeffs[int_coeffs.len() - 1]);
        let mut complete = ok_n && ok_d;

        let mut candidates: BTreeSet<Rat> = BTreeSet::new();
        for nu in &nums {
            for de in &dens {
                let r = Rat::new(nu.clone(), de.clone());
                candidates.insert(r.clone());
                candidates.insert(-r);
                if candidates.len() > 200_000 {
                    complete = false;
                    break;
                }
            }
        }
        for cand in candidates {
            let mut mult = 0usize;
            while p.degree() > 0 && p.eval(&cand).is_zero() {
                p = p.divrem(&UniPoly::linear(&cand)).0;
                mult += 1;
            }
            if mult > 0 {
                roots.push((cand, mult));
            }
        }
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        (roots, p.monic(), complete)
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for k in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[k];
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let coeff_part = if mag.is_one() && k > 0 { None } else { Some(rat_display(&mag)) };
            match (coeff_part, k) {
                (None, 1) => write!(f, "t")?,
                (None, _) => write!(f, "t^{k}")?,
                (Some(s), 0) => write!(f, "{s}")?,
                (Some(s), 1) => write!(f, "{s}*t")?,
                (Some(s), _) => write!(f, "{s}*t^{k}")?,
            }
        }
        Ok(())
    }
}

/// Divisors of `|x|`, with a completeness flag.  Trial division is capped;
/// very large coefficients yield a partial divisor list flagged incomplete.
fn divisors_capped(x: &BigInt) -> (Vec<BigInt>, bool) {
    let ax = x.abs();
    let Some(v) = ax.to_i128() else {
        return (vec![BigInt::one()], false);
    };
    if v == 0 {
        return (vec![BigInt::one()], false);
    }
    let mut rest = v;
    let mut primes: Vec<(i128, u32)> = vec![];
    let mut d: i128 = 2;
    while d <= 1_000_000 && d * d <= rest {
        if rest % d == 0 {
            let mut e = 0;
            while rest % d == 0 {
                rest /= d;
                e += 1;
            }
            primes.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    let mut complete = true;
    if rest > 1 {
        // No factor up to 1e6: `rest` is prime iff below 1e12.
        if rest >= 1_000_000_000_000 {
            complete = false;
        }
        primes.push((rest, 1));
    }
    let mut divs: Vec<i128> = vec![1];
    'outer: for (p, e) in primes {
        let base_len = divs.len();
        let mut pk: i128 = 1;
        for _ in 0..e {
            pk = match pk.checked_mul(p) {
                Some(x) => x,
                None => {
                    complete = false;
                    break 'outer;
                }
            };
            for i in 0..base_len {
                if divs.len() >= 16384 {
                    complete = false;
                    break 'outer;
                }
                match divs[i].checked_mul(pk) {
                    Some(x) => divs.push(x),
                    None => complete = false,
                }
            }
        }
    }
    (divs.into_iter().map(BigInt::from).collect(), complete)
}

/// Characteristic polynomial `det(t I - M)` by the Faddeev-LeVerrier
/// recursion, exact over the rationals.
pub fn char_poly(m: &RatMatrix) -> UniPoly {
    let n = m.dim();
    let mut coeffs = vec![Rat::zero(); n + 1];
    coeffs[n] = Rat::one();
    let mut aux = RatMatrix::identity(n);
    for k in 1..=n {
        let am = m.mul(&aux);
        let ck = -(am.trace() / rat_int(k as i64));
        coeffs[n - k] = ck.clone();
        if k < n {
            aux = am.add_scalar(&ck);
        }
    }
    UniPoly::from_coeffs(coeffs)
}

// ---------------------------------------------------------------------------
// Jordan profiles
// ---------------------------------------------------------------------------

/// Jordan normal-form data of a rational matrix, as far as it is determined
/// over the rationals.  Rational eigenvalues carry exact block sizes; an
/// irrational remainder of the characteristic polynomial is kept as a
/// cofactor.  If the cofactor is squarefree all of its eigenvalues are
/// simple, so the structure is still fully determined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JordanReport {
    pub char_poly: UniPoly,
    /// `(eigenvalue, block sizes descending)`, eigenvalues ascending.
    pub rational: Vec<(Rat, Vec<usize>)>,
    /// Part of the characteristic polynomial without rational roots.
    pub irrational_cofactor: Option<UniPoly>,
    pub irrational_squarefree: bool,
    /// False when the rational-root search was capped (huge coefficients).
    pub search_complete: bool,
}

impl JordanReport {
    /// Whether the block structure is fully pinned down over the rationals.
    pub fn fully_determined(&self) -> bool {
        self.search_complete
            && (self.irrational_cofactor.is_none() || self.irrational_squarefree)
    }

    pub fn is_diagonalizable(&self) -> Option<bool> {
        if !self.fully_determined() {
            return None;
        }
        Some(self.rational.iter().all(|(_, blocks)| blocks.iter().all(|&b| b == 1)))
    }

    pub fn is_nilpotent(&self) -> bool {
        self.char_poly == UniPoly::power_of_t(self.char_poly.degree())
    }

    /// Canonical descriptor, e.g. `0:[1] 1:[1] 1/4:[2 2]`, used to compare
    /// profiles across samples.
    pub fn key(&self) -> String {
        let mut parts: Vec<String> = self
            .rational
            .iter()
            .map(|(v, blocks)| {
                let bs: Vec<String> = blocks.iter().map(usize::to_string).collect();
                format!("{}:[{}]", rat_display(v), bs.join(" "))
            })
            .collect();
        if let Some(cof) = &self.irrational_cofactor {
            let tag = if self.irrational_squarefree { "simple" } else { "unresolved" };
            parts.push(format!("irr({cof}):{tag}"));
        }
        if !self.search_complete {
            parts.push("(search incomplete)".to_string());
        }
        parts.join(" ")
    }
}

/// Compute the Jordan profile of a matrix: rational eigenvalues with exact
/// block sizes (from the rank sequence of powers of `M - lambda I`), plus
/// the irrational cofactor of the characteristic polynomial.
pub fn jordan_analyze(m: &RatMatrix) -> JordanReport {
    let p = char_poly(m);
    let (roots, cofactor, complete) = p.rational_roots();
    let mut rational = vec![];
    for (lambda, alg_mult) in roots {
        let shifted = m.sub_scalar(&lambda);
        let mut ranks = vec![m.dim()];
        let mut pw = RatMatrix::identity(m.dim());
        loop {
            pw = pw.mul(&shifted);
            let r = pw.rank();
            let stable = *ranks.last().unwrap() == r;
            ranks.push(r);
            if stable || ranks.len() > alg_mult + 1 {
                break;
            }
        }
        let ge = |k: usize| -> usize {
            if k == 0 || k >= ranks.len() {
                return 0;
            }
            ranks[k - 1].saturating_sub(ranks[k])
        };
        let mut blocks = vec![];
        for k in 1..ranks.len() {
            let exact = ge(k).saturating_sub(ge(k + 1));
            for _ in 0..exact {
                blocks.push(k);
            }
        }
        blocks.sort_unstable_by(|a, b| b.cmp(a));
        debug_assert_eq!(blocks.iter().sum::<usize>(), alg_mult);
        rational.push((lambda, blocks));
    }
    let irrational_cofactor = if cofactor.degree() > 0 { Some(cofactor) } else { None };
    let irrational_squarefree =
        irrational_cofactor.as_ref().map_or(true, UniPoly::is_squarefree);
    JordanReport {
        char_poly: p,
        rational,
        irrational_cofactor,
        irrational_squarefree,
        search_complete: complete,
    }
}

/// Least `k` with `M^k = 0`, or `None` if `M` is not nilpotent.
pub fn nilpotency_index(m: &RatMatrix) -> Option<usize> {
    if m.is_zero() {
        return Some(1);
    }
    let mut pw = m.clone();
    for k in 1..=m.dim() {
        if pw.is_zero() {
            return Some(k);
        }
        pw = pw.mul(m);
    }
    if pw.is_zero() {
        return Some(m.dim());
    }
    None
}

// ---------------------------------------------------------------------------
// Curvature evaluated at a point
// ---------------------------------------------------------------------------

/// All curvature and metric data of a Walker metric evaluated at one point,
/// ready for repeated operator assembly.
#[derive(Clone, Debug)]
pub struct CurvatureAtPoint {
    n: usize,
    mixed: Vec<Rat>,
    g: RatMatrix,
}

impl CurvatureAtPoint {
    pub fn evaluate(m: &WalkerMetric, r: &RiemannTensor, pt: &PointAssignment) -> Self {
        let n = m.base_dim();
        let t = 2 * n;
        let mut mixed = vec![Rat::zero(); t * t * t * t];
        for a in 0..t {
            for b in 0..t {
                for c in 0..t {
                    for d in 0..t {
                        let p = r.mixed(a, b, c, d);
                        if p.is_zero() {
                            continue;
                        }
                        mixed[((a * t + b) * t + c) * t + d] =
                            p.eval(pt).expect("chart mismatch");
                    }
                }
            }
        }
        let g = RatMatrix::from_fn(t, |a, b| m.g(a, b).eval(pt).expect("chart mismatch"));
        CurvatureAtPoint { n, mixed, g }
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    fn mx(&self, a: usize, b: usize, c: usize, d: usize) -> &Rat {
        let t = 2 * self.n;
        &self.mixed[((a * t + b) * t + c) * t + d]
    }

    pub fn metric_pair(&self, u: &[Rat], v: &[Rat]) -> Rat {
        let t = 2 * self.n;
        let mut acc = Rat::zero();
        for a in 0..t {
            if u[a].is_zero() {
                continue;
            }
            for b in 0..t {
                let g = self.g.get(a, b);
                if g.is_zero() || v[b].is_zero() {
                    continue;
                }
                acc += &(&u[a] * &v[b]) * g;
            }
        }
        acc
    }

    /// Jacobi operator `w -> R(w, v) v` as a matrix acting on components.
    pub fn jacobi(&self, v: &[Rat]) -> RatMatrix {
        let t = 2 * self.n;
        // Contract the two `v` slots stepwise.
        let mut c1 = vec![Rat::zero(); t * t * t]; // (b, k, d)
        for b in 0..t {
            for m in 0..t {
                if v[m].is_zero() {
                    continue;
                }
                for k in 0..t {
                    for d in 0..t {
                        let r = self.mx(b, m, k, d);
                        if r.is_zero() {
                            continue;
                        }
                        c1[(b * t + k) * t + d] += &v[m] * r;
                    }
                }
            }
        }
        let mut out = RatMatrix::zeros(t);
        for b in 0..t {
            for k in 0..t {
                if v[k].is_zero() {
                    continue;
                }
                for d in 0..t {
                    let r = &c1[(b * t + k) * t + d];
                    if r.is_zero() {
                        continue;
                    }
                    let cur = out.get(d, b) + &(&v[k] * r);
                    out.set(d, b, cur);
                }
            }
        }
        out
    }

    /// `(1 / g(v,v)) * jacobi(v)`; `None` for null `v`.
    pub fn reduced_jacobi(&self, v: &[Rat]) -> Option<RatMatrix> {
        let eps = self.metric_pair(v, v);
        if eps.is_zero() {
            return None;
        }
        Some(self.jacobi(v).scale(&eps.recip()))
    }

    /// Skew curvature operator `z -> R(x, y) z` as a matrix.
    pub fn skew_curvature(&self, x: &[Rat], y: &[Rat]) -> RatMatrix {
        let t = 2 * self.n;
        let mut c1 = vec![Rat::zero(); t * t * t]; // (b, c, d)
        for a in 0..t {
            if x[a].is_zero() {
                continue;
            }
            for b in 0..t {
                for c in 0..t {
                    for d in 0..t {
                        let r = self.mx(a, b, c, d);
                        if r.is_zero() {
                            continue;
                        }
                        c1[(b * t + c) * t + d] += &x[a] * r;
                    }
                }
            }
        }
        let mut out = RatMatrix::zeros(t);
        for b in 0..t {
            if y[b].is_zero() {
                continue;
            }
            for c in 0..t {
                for d in 0..t {
                    let r = &c1[(b * t + c) * t + d];
                    if r.is_zero() {
                        continue;
                    }
                    let cur = out.get(d, c) + &(&y[b] * r);
                    out.set(d, c, cur);
                }
            }
        }
        out
    }
}

/// Covariant derivative of the curvature evaluated at a point, with the
/// inverse metric for raising the last index.
#[derive(Clone, Debug)]
pub struct NablaRiemannAtPoint {
    n: usize,
    data: Vec<Rat>,
    ginv: RatMatrix,
}

impl NablaRiemannAtPoint {
    pub fn evaluate(m: &WalkerMetric, nr: &NablaRiemann, pt: &PointAssignment) -> Self {
        let n = m.base_dim();
        let t = 2 * n;
        let mut data = vec![Rat::zero(); t * t * t * t * t];
        for a in 0..t {
            for b in 0..t {
                for c in 0..t {
                    for d in 0..t {
                        for e in 0..t {
                            let p = nr.get(a, b, c, d, e);
                            if p.is_zero() {
                                continue;
                            }
                            data[(((a * t + b) * t + c) * t + d) * t + e] =
                                p.eval(pt).expect("chart mismatch");
                        }
                    }
                }
            }
        }
        let ginv =
            RatMatrix::from_fn(t, |a, b| m.g_inv(a, b).eval(pt).expect("chart mismatch"));
        NablaRiemannAtPoint { n, data, ginv }
    }

    fn nr(&self, a: usize, b: usize, c: usize, d: usize, e: usize) -> &Rat {
        let t = 2 * self.n;
        &self.data[(((a * t + b) * t + c) * t + d) * t + e]
    }

    /// Derivative operator `w -> ((nabla_v R)(w, v) v)^sharp`: contract `v`
    /// into the derivative slot and the middle pair, raise the last index.
    pub fn szabo_operator(&self, v: &[Rat]) -> RatMatrix {
        let t = 2 * self.n;
        // s1(b,c,d,u) = sum_a v^a (nabla_a R)_{b c d u}
        let mut s1 = vec![Rat::zero(); t * t * t * t];
        for a in 0..t {
            if v[a].is_zero() {
                continue;
            }
            for b in 0..t {
                for c in 0..t {
                    for d in 0..t {
                        for u in 0..t {
                            let r = self.nr(a, b, c, d, u);
                            if r.is_zero() {
                                continue;
                            }
                            s1[((b * t + c) * t + d) * t + u] += &v[a] * r;
                        }
                    }
                }
            }
        }
        // s2(b,d,u) = sum_c v^c s1(b,c,d,u); s3(b,u) = sum_d v^d s2(b,d,u)
        let mut s3 = vec![Rat::zero(); t * t];
        for b in 0..t {
            for c in 0..t {
                if v[c].is_zero() {
                    continue;
                }
                for d in 0..t {
                    if v[d].is_zero() {
                        continue;
                    }
                    for u in 0..t {
                        let r = &s1[((b * t + c) * t + d) * t + u];
                        if r.is_zero() {
                            continue;
                        }
                        s3[b * t + u] += &(&v[c] * &v[d]) * r;
                    }
                }
            }
        }
        let mut out = RatMatrix::zeros(t);
        for b in 0..t {
            for u in 0..t {
                let r = &s3[b * t + u];
                if r.is_zero() {
                    continue;
                }
                for f in 0..t {
                    let gi = self.ginv.get(u, f);
                    if gi.is_zero() {
                        continue;
                    }
                    let cur = out.get(f, b) + &(r * gi);
                    out.set(f, b, cur);
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Symbolic operators (components as polynomials)
// ---------------------------------------------------------------------------

/// Variable reserved for component `a` of a symbolic tangent vector over a
/// base-dimension-`n` chart embedded in the doubled chart of base dimension
/// `2n`: base components use base variables `n+1 ..= 2n`, fiber components
/// use fiber variables `n+1 ..= 2n`.
pub fn symbolic_component_var(n: usize, a: usize) -> VarId {
    if a < n {
        VarId::base(n + a + 1)
    } else {
        VarId::fiber(n + (a - n) + 1)
    }
}

/// Generic tangent vector with independent variable components, living in
/// the doubled chart.
pub fn symbolic_vector(n: usize) -> Vec<Poly> {
    (0..2 * n).map(|a| Poly::var(2 * n, symbolic_component_var(n, a))).collect()
}

/// Embed a polynomial into a chart with more base dimensions, keeping every
/// variable's name.
pub fn embed_to(p: &Poly, big_n: usize) -> Poly {
    if p.base_dim() == big_n {
        return p.clone();
    }
    p.embed(big_n, |v| v)
}

/// Jacobi operator with polynomial vector components: entry `(d, b)` equals
/// `sum_{m,k} v^m v^k R_{b m k}^d`.  The components may live in a larger
/// chart than the curvature (see [`symbolic_vector`]); curvature entries are
/// embedded as needed.
pub fn jacobi_symbolic(r: &RiemannTensor, v: &[Poly]) -> PolyMatrix {
    let t = 2 * r.base_dim();
    assert_eq!(v.len(), t, "vector component count");
    let big_n = v[0].base_dim();
    let mut c1 = vec![Poly::zero(big_n); t * t * t];
    for b in 0..t {
        for m in 0..t {
            if v[m].is_zero() {
                continue;
            }
            for k in 0..t {
                for d in 0..t {
                    let rp = r.mixed(b, m, k, d);
                    if rp.is_zero() {
                        continue;
                    }
                    let idx = (b * t + k) * t + d;
                    c1[idx] = &c1[idx] + &(&v[m] * &embed_to(rp, big_n));
                }
            }
        }
    }
    let mut out = PolyMatrix::zeros(big_n, t, t);
    for b in 0..t {
        for k in 0..t {
            if v[k].is_zero() {
                continue;
            }
            for d in 0..t {
                let rp = &c1[(b * t + k) * t + d];
                if rp.is_zero() {
                    continue;
                }
                *out.get_mut(d, b) = &*out.get(d, b) + &(&v[k] * rp);
            }
        }
    }
    out
}

/// `g(u, v)` with polynomial components, embedding the metric if the
/// components live in a larger chart.
pub fn metric_pair_symbolic(m: &WalkerMetric, u: &[Poly], v: &[Poly]) -> Poly {
    let t = m.total_dim();
    assert_eq!(u.len(), t);
    assert_eq!(v.len(), t);
    let big_n = u[0].base_dim();
    let mut acc = Poly::zero(big_n);
    for a in 0..t {
        if u[a].is_zero() {
            continue;
        }
        for b in 0..t {
            let g = m.g(a, b);
            if g.is_zero() || v[b].is_zero() {
                continue;
            }
            acc = &acc + &(&(&u[a] * &v[b]) * &embed_to(&g, big_n));
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Deterministic sampling
// ---------------------------------------------------------------------------

/// How many points and vectors a scan draws, and with which seed.
#[derive(Clone, Copy, Debug)]
pub struct SampleScheme {
    pub points: usize,
    pub vectors_per_point: usize,
    pub seed: u64,
}

impl Default for SampleScheme {
    fn default() -> Self {
        SampleScheme { points: 8, vectors_per_point: 8, seed: 7 }
    }
}

/// Seeded source of small-height rational points and tangent vectors.
pub struct Sampler {
    rng: ChaCha8Rng,
    n: usize,
}

impl Sampler {
    pub fn new(n: usize, seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), n }
    }

    /// A rational with numerator in `-2..=2` and denominator in `1..=3`.
    pub fn small_rat(&mut self) -> Rat {
        rat(self.rng.gen_range(-2..=2), self.rng.gen_range(1..=3))
    }

    fn small_rat_nonzero(&mut self) -> Rat {
        loop {
            let r = self.small_rat();
            if !r.is_zero() {
                return r;
            }
        }
    }

    pub fn point(&mut self) -> PointAssignment {
        let base: Vec<Rat> = (0..self.n).map(|_| self.small_rat()).collect();
        let fiber: Vec<Rat> = (0..self.n).map(|_| self.small_rat()).collect();
        PointAssignment::new(base, fiber)
    }

    /// A tangent vector with `g(v,v)` exactly equal to `target`, solved via
    /// one fiber component.  Always has a nonzero base component.
    pub fn causal_vector(
        &mut self,
        m: &WalkerMetric,
        pt: &PointAssignment,
        target: &Rat,
    ) -> Vec<Rat> {
        let n = self.n;
        let b = m.b_at(pt).expect("chart mismatch");
        let i0 = self.rng.gen_range(0..n);
        let mut comps = vec![Rat::zero(); 2 * n];
        for (i, c) in comps.iter_mut().enumerate().take(n) {
            *c = if i == i0 { self.small_rat_nonzero() } else { self.small_rat() };
        }
        for c in comps.iter_mut().skip(n) {
            *c = self.small_rat();
        }
        // g(v,v) = sum_ij B_ij a_i a_j + 2 sum_i a_i a_{i'}
        let mut partial = Rat::zero();
        for i in 0..n {
            for j in 0..n {
                partial += &(&comps[i] * &comps[j]) * &b[i][j];
            }
        }
        for i in 0..n {
            if i != i0 {
                partial += &(&comps[i] * &comps[n + i]) * &rat_int(2);
            }
        }
        comps[n + i0] = (target - partial) / (&comps[i0] * &rat_int(2));
        debug_assert_eq!(&m.metric_eval(pt, &comps, &comps), target);
        comps
    }

    /// A nonzero vector with all base components zero; always null.
    pub fn fiber_vector(&mut self) -> Vec<Rat> {
        let n = self.n;
        let mut comps = vec![Rat::zero(); 2 * n];
        for c in comps.iter_mut().skip(n) {
            *c = self.small_rat();
        }
        if comps.iter().all(Rat::is_zero) {
            comps[n] = Rat::one();
        }
        comps
    }

    /// A vector with all components drawn freely (at least one nonzero).
    pub fn raw_vector(&mut self) -> Vec<Rat> {
        let n = self.n;
        let mut comps: Vec<Rat> = (0..2 * n).map(|_| self.small_rat()).collect();
        if comps.iter().all(Rat::is_zero) {
            let k = self.rng.gen_range(0..2 * n);
            comps[k] = Rat::one();
        }
        comps
    }
}

// ---------------------------------------------------------------------------
// Scans
// ---------------------------------------------------------------------------

/// A sample that violated the property a scan was probing.
#[derive(Clone, Debug)]
pub struct ScanCounterexample {
    pub point: PointAssignment,
    pub vector: Vec<Rat>,
    pub detail: String,
}

impl fmt::Display for ScanCounterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "at point {} with vector {}: {}",
            self.point,
            vector_display(&self.vector),
            self.detail
        )
    }
}

/// Outcome of comparing reduced Jacobi characteristic polynomials across
/// unit vectors of both causal characters.
#[derive(Clone, Debug)]
pub struct OssermanReport {
    pub samples_per_class: usize,
    pub spacelike_poly: Option<UniPoly>,
    pub timelike_poly: Option<UniPoly>,
    /// Every sampled polynomial matched the first one of its class.
    pub consistent: bool,
    /// The two per-class polynomials agree.
    pub polys_match_across_classes: bool,
    pub counterexample: Option<ScanCounterexample>,
}

/// Compare `char(eps^-1 J(v))` across sampled unit spacelike and unit
/// timelike vectors.  The scan refutes the property on any mismatch; it can
/// never prove it, only fail to refute it.
pub fn osserman_verdict(m: &WalkerMetric, r: &RiemannTensor, scheme: &SampleScheme) -> OssermanReport {
    let n = m.base_dim();
    let mut sampler = Sampler::new(n, scheme.seed);
    let mut report = OssermanReport {
        samples_per_class: 0,
        spacelike_poly: None,
        timelike_poly: None,
        consistent: true,
        polys_match_across_classes: false,
        counterexample: None,
    };
    for _ in 0..scheme.points {
        let pt = sampler.point();
        let cap = CurvatureAtPoint::evaluate(m, r, &pt);
        for _ in 0..scheme.vectors_per_point {
            for target in [1i64, -1] {
                let v = sampler.causal_vector(m, &pt, &rat_int(target));
                let jr = cap.reduced_jacobi(&v).expect("unit vector is not null");
                let p = char_poly(&jr);
                let slot = if target > 0 {
                    &mut report.spacelike_poly
                } else {
                    &mut report.timelike_poly
                };
                match slot {
                    None => *slot = Some(p),
                    Some(first) => {
                        if *first != p && report.counterexample.is_none() {
                            report.consistent = false;
                            report.counterexample = Some(ScanCounterexample {
                                point: pt.clone(),
                                vector: v.clone(),
                                detail: format!(
                                    "char poly {p} differs from first-seen {first}"
                                ),
                            });
                        }
                    }
                }
                if target > 0 {
                    report.samples_per_class += 1;
                }
            }
        }
    }
    report.polys_match_across_classes = report.spacelike_poly == report.timelike_poly;
    report
}

/// Outcome of comparing Jordan profiles of the reduced Jacobi operator
/// across unit vectors, separately per causal class.
#[derive(Clone, Debug)]
pub struct JordanScanReport {
    pub spacelike_profiles: BTreeMap<String, usize>,
    pub timelike_profiles: BTreeMap<String, usize>,
    pub samples_per_class: usize,
    pub extra_samples: usize,
    /// Samples whose profile could not be fully resolved over the rationals.
    pub undetermined_samples: usize,
}

impl JordanScanReport {
    pub fn constant_spacelike(&self) -> bool {
        self.spacelike_profiles.len() <= 1
    }

    pub fn constant_timelike(&self) -> bool {
        self.timelike_profiles.len() <= 1
    }

    pub fn constant(&self) -> bool {
        self.constant_spacelike() && self.constant_timelike()
    }
}

/// Scan Jordan profiles of the reduced Jacobi operator over sampled unit
/// vectors, plus explicitly supplied `(point, vector)` samples (used to
/// inject special directions that random draws would be unlikely to hit).
/// Null extra vectors are ignored.
pub fn jordan_osserman_verdict(
    m: &WalkerMetric,
    r: &RiemannTensor,
    scheme: &SampleScheme,
    extra: &[(PointAssignment, Vec<Rat>)],
) -> JordanScanReport {
    let n = m.base_dim();
    let mut sampler = Sampler::new(n, scheme.seed);
    let mut report = JordanScanReport {
        spacelike_profiles: BTreeMap::new(),
        timelike_profiles: BTreeMap::new(),
        samples_per_class: 0,
        extra_samples: 0,
        undetermined_samples: 0,
    };
    let record = |report: &mut JordanScanReport,
                      cap: &CurvatureAtPoint,
                      v: &[Rat]|
     -> Option<()> {
        let eps = cap.metric_pair(v, v);
        if eps.is_zero() {
            return None;
        }
        let jr = cap.jacobi(v).scale(&eps.recip());
        let profile = jordan_analyze(&jr);
        if !profile.fully_determined() {
            report.undetermined_samples += 1;
        }
        let map = if eps.is_positive() {
            &mut report.spacelike_profiles
        } else {
            &mut report.timelike_profiles
        };
        *map.entry(profile.key()).or_insert(0) += 1;
        Some(())
    };
    for _ in 0..scheme.points {
        let pt = sampler.point();
        let cap = CurvatureAtPoint::evaluate(m, r, &pt);
        for _ in 0..scheme.vectors_per_point {
            for target in [1i64, -1] {
                let v = sampler.causal_vector(m, &pt, &rat_int(target));
                record(&mut report, &cap, &v);
            }
            report.samples_per_class += 1;
        }
    }
    for (pt, v) in extra {
        let cap = CurvatureAtPoint::evaluate(m, r, pt);
        if record(&mut report, &cap, v).is_some() {
            report.extra_samples += 1;
        }
    }
    report
}

/// Outcome of probing nilpotency of the Jacobi operator on null vectors.
#[derive(Clone, Debug)]
pub struct NullNilpotencyReport {
    pub all_nilpotent: bool,
    /// Nilpotency index -> number of null samples attaining it.
    pub index_counts: BTreeMap<usize, usize>,
    pub samples: usize,
    pub counterexample: Option<ScanCounterexample>,
}

impl NullNilpotencyReport {
    pub fn distinct_indices(&self) -> usize {
        self.index_counts.len()
    }
}

/// Check that `J(v)` is nilpotent for sampled null vectors, recording the
/// distribution of nilpotency indices.  Samples alternate between pure fiber
/// vectors (always null) and null vectors with nonzero base part.
pub fn null_nilpotency_profile(
    m: &WalkerMetric,
    r: &RiemannTensor,
    scheme: &SampleScheme,
) -> NullNilpotencyReport {
    let n = m.base_dim();
    let mut sampler = Sampler::new(n, scheme.seed);
    let mut report = NullNilpotencyReport {
        all_nilpotent: true,
        index_counts: BTreeMap::new(),
        samples: 0,
        counterexample: None,
    };
    for _ in 0..scheme.points {
        let pt = sampler.point();
        let cap = CurvatureAtPoint::evaluate(m, r, &pt);
        for kv in 0..scheme.vectors_per_point {
            let v = if kv % 2 == 0 {
                sampler.fiber_vector()
            } else {
                sampler.causal_vector(m, &pt, &Rat::zero())
            };
            debug_assert!(cap.metric_pair(&v, &v).is_zero());
            let j = cap.jacobi(&v);
            report.samples += 1;
            match nilpotency_index(&j) {
                Some(k) => *report.index_counts.entry(k).or_insert(0) += 1,
                None => {
                    report.all_nilpotent = false;
                    if report.counterexample.is_none() {
                        report.counterexample = Some(ScanCounterexample {
                            point: pt.clone(),
                            vector: v.clone(),
                            detail: format!(
                                "Jacobi operator is not nilpotent (char poly {})",
                                char_poly(&j)
                            ),
                        });
                    }
                }
            }
        }
    }
    report
}

/// Outcome of scanning the derivative operator
/// `w -> ((nabla_v R)(w, v) v)^sharp` over unit vectors of both classes.
#[derive(Clone, Debug)]
pub struct SzaboReport {
    /// Characteristic polynomial (display form) -> count, across all samples.
    pub polys: BTreeMap<String, usize>,
    pub all_nilpotent: bool,
    pub nonzero_operator_seen: bool,
    pub samples: usize,
}

impl SzaboReport {
    pub fn constant(&self) -> bool {
        self.polys.len() <= 1
    }
}

/// Scan characteristic polynomials of the derivative operator built from
/// `nabla R` over sampled unit vectors (both causal classes).
pub fn szabo_verdict(
    m: &WalkerMetric,
    nr: &NablaRiemann,
    scheme: &SampleScheme,
) -> SzaboReport {
    let n = m.base_dim();
    let t = 2 * n;
    let mut sampler = Sampler::new(n, scheme.seed);
    let mut report = SzaboReport {
        polys: BTreeMap::new(),
        all_nilpotent: true,
        nonzero_operator_seen: false,
        samples: 0,
    };
    let nilpotent_poly = UniPoly::power_of_t(t);
    for _ in 0..scheme.points {
        let pt = sampler.point();
        let nrp = NablaRiemannAtPoint::evaluate(m, nr, &pt);
        for _ in 0..scheme.vectors_per_point {
            for target in [1i64, -1] {
                let v = sampler.causal_vector(m, &pt, &rat_int(target));
                let op = nrp.szabo_operator(&v);
                if !op.is_zero() {
                    report.nonzero_operator_seen = true;
                }
                let p = char_poly(&op);
                if p != nilpotent_poly {
                    report.all_nilpotent = false;
                }
                *report.polys.entry(p.to_string()).or_insert(0) += 1;
                report.samples += 1;
            }
        }
    }
    report
}

/// Outcome of scanning the squared skew curvature operator over
/// nondegenerate planes, grouped by plane type.
#[derive(Clone, Debug)]
pub struct SkewCurvatureReport {
    /// Plane class -> (characteristic polynomial -> count).
    pub class_polys: BTreeMap<String, BTreeMap<String, usize>>,
    pub degenerate_skipped: usize,
    pub samples: usize,
}

impl SkewCurvatureReport {
    pub fn constant_per_class(&self) -> bool {
        self.class_polys.values().all(|m| m.len() <= 1)
    }
}

/// For sampled plane bases `(x, y)` compute the plane-invariant operator
/// `delta^-1 (R(x,y))^2` with `delta = g(x,x) g(y,y) - g(x,y)^2`, and group
/// its characteristic polynomial by plane type: `definite+` / `definite-`
/// (`delta > 0`, sign of `g(x,x)`) or `indefinite` (`delta < 0`).
/// Degenerate planes (`delta = 0`) are skipped and counted.
pub fn skew_curvature_verdict(
    m: &WalkerMetric,
    r: &RiemannTensor,
    scheme: &SampleScheme,
) -> SkewCurvatureReport {
    let n = m.base_dim();
    let mut sampler = Sampler::new(n, scheme.seed);
    let mut report = SkewCurvatureReport {
        class_polys: BTreeMap::new(),
        degenerate_skipped: 0,
        samples: 0,
    };
    for _ in 0..scheme.points {
        let pt = sampler.point();
        let cap = CurvatureAtPoint::evaluate(m, r, &pt);
        for _ in 0..scheme.vectors_per_point {
            let x = sampler.raw_vector();
            let y = sampler.raw_vector();
            let gxx = cap.metric_pair(&x, &x);
            let gyy = cap.metric_pair(&y, &y);
            let gxy = cap.metric_pair(&x, &y);
            let delta = &(&gxx * &gyy) - &(&gxy * &gxy);
            if delta.is_zero() {
                report.degenerate_skipped += 1;
                continue;
            }
            let class = if delta.is_positive() {
                if gxx.is_positive() {
                    "definite+"
                } else {
                    "definite-"
                }
            } else {
                "indefinite"
            };
            let sk = cap.skew_curvature(&x, &y);
            let q = sk.mul(&sk).scale(&delta.recip());
            let p = char_poly(&q);
            *report
                .class_polys
                .entry(class.to_string())
                .or_default()
                .entry(p.to_string())
                .or_insert(0) += 1;
            report.samples += 1;
        }
    }
    report
}
