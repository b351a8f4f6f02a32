//! Curvature of Walker metrics and of affine connections.
//!
//! Two independent computation paths are kept side by side and never merged:
//! closed-form component families special to the Walker coordinate form
//! (`christoffel_walker`, `riemann_walker`), and the general Levi-Civita /
//! curvature formulas valid for any metric (`christoffel_general`,
//! `riemann_general`).  Tests require the two paths to agree exactly.
//!
//! Curvature conventions: `R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z
//! - nabla_{[X,Y]} Z`, components `R(d_a, d_b) d_c = R_abc^d d_d`, Ricci
//! `rho(b,c) = R_abc^a` (contraction on first and last index), scalar
//! `tau = g^{bc} rho_bc`.

use crate::expr::{rat, rat_int, Poly, PolyMatrix, Rat, VarId};
use crate::extension::modified_extension_c;
use crate::geometry::{AffineConnection, GeomError, SymTensor2Base, WalkerMetric};
use num_traits::Zero;

/// Coordinate variable for a total index `a` in `0..2n`.
pub fn total_var(n: usize, a: usize) -> VarId {
    if a < n {
        VarId::base(a + 1)
    } else {
        VarId::fiber(a - n + 1)
    }
}

/// Christoffel symbols `Gamma_ab^c` of a metric on the cotangent bundle,
/// indexed by total indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChristoffelBundle {
    n: usize,
    data: Vec<Poly>,
}

impl ChristoffelBundle {
    fn zeros(n: usize) -> Self {
        let d = 2 * n;
        ChristoffelBundle { n, data: vec![Poly::zero(n); d * d * d] }
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        let d = 2 * self.n;
        (a * d + b) * d + c
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> &Poly {
        &self.data[self.idx(a, b, c)]
    }

    fn set(&mut self, a: usize, b: usize, c: usize, p: Poly) {
        let i = self.idx(a, b, c);
        self.data[i] = p;
    }

    /// Whether the symbols exhibit the Walker vanishing pattern: any symbol
    /// with a fiber lower index and base upper index vanishes, and symbols
    /// with both lower indices on the fiber vanish entirely.
    pub fn has_walker_vanishing_pattern(&self) -> bool {
        let n = self.n;
        for a in 0..2 * n {
            for b in 0..2 * n {
                for c in 0..2 * n {
                    let fiber_lower = a >= n || b >= n;
                    let both_fiber = a >= n && b >= n;
                    if ((fiber_lower && c < n) || both_fiber) && !self.get(a, b, c).is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Closed-form Christoffel symbols in Walker coordinates.  With `B` the
/// base-base metric block (summation over base index `s`):
///
/// ```text
///   Gamma_ij^k      = -1/2 d_{k'} B_ij
///   Gamma_{i'}j^{k'} = 1/2 d_{i'} B_jk
///   Gamma_ij^{k'}   = 1/2 (-d_k B_ij + d_j B_ik + d_i B_jk
///                           + B_ks d_{s'} B_ij)
/// ```
///
/// and all other families vanish.
pub fn christoffel_walker(m: &WalkerMetric) -> ChristoffelBundle {
    let n = m.base_dim();
    let mut out = ChristoffelBundle::zeros(n);
    let half = rat(1, 2);
    let db = |p: &Poly, i: usize| p.diff(VarId::base(i + 1));
    let df = |p: &Poly, i: usize| p.diff(VarId::fiber(i + 1));

    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // Gamma_ij^k
                out.set(i, j, k, df(m.b(i, j), k).scale(&-half.clone()));
                // Gamma_{i'}j^{k'} (and its mirror in the lower pair)
                let g = df(m.b(j, k), i).scale(&half);
                out.set(n + i, j, n + k, g.clone());
                out.set(j, n + i, n + k, g);
                // Gamma_ij^{k'}
                let mut acc = &(&db(m.b(i, k), j) + &db(m.b(j, k), i)) - &db(m.b(i, j), k);
                for s in 0..n {
                    acc = &acc + &(m.b(k, s) * &df(m.b(i, j), s));
                }
                out.set(i, j, n + k, acc.scale(&half));
            }
        }
    }
    out
}

/// General Levi-Civita formula
/// `Gamma_ab^c = 1/2 g^{cd} (d_a g_bd + d_b g_ad - d_d g_ab)`,
/// used as an independent oracle for `christoffel_walker`.
pub fn christoffel_general(m: &WalkerMetric) -> ChristoffelBundle {
    let n = m.base_dim();
    let dim = 2 * n;
    let g = m.metric_full();
    let ginv = m.metric_inverse();
    let half = rat(1, 2);
    let mut out = ChristoffelBundle::zeros(n);
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                let mut acc = Poly::zero(n);
                for d in 0..dim {
                    if ginv.get(c, d).is_zero() {
                        continue;
                    }
                    let term = &(&g.get(b, d).diff(total_var(n, a))
                        + &g.get(a, d).diff(total_var(n, b)))
                        - &g.get(a, b).diff(total_var(n, d));
                    acc = &acc + &(ginv.get(c, d) * &term);
                }
                out.set(a, b, c, acc.scale(&half));
            }
        }
    }
    out
}

/// Riemann curvature with both index positions, over total indices:
/// `mixed(a,b,c,d) = R_abc^d` and `lowered(a,b,c,d) = R_abcd = R_abc^e g_ed`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RiemannTensor {
    n: usize,
    mixed: Vec<Poly>,
    lowered: Vec<Poly>,
}

impl RiemannTensor {
    pub fn base_dim(&self) -> usize {
        self.n
    }

    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        let t = 2 * self.n;
        ((a * t + b) * t + c) * t + d
    }

    pub fn mixed(&self, a: usize, b: usize, c: usize, d: usize) -> &Poly {
        &self.mixed[self.idx(a, b, c, d)]
    }

    pub fn lowered(&self, a: usize, b: usize, c: usize, d: usize) -> &Poly {
        &self.lowered[self.idx(a, b, c, d)]
    }

    fn from_mixed(m: &WalkerMetric, mixed: Vec<Poly>) -> Self {
        let n = m.base_dim();
        let t = 2 * n;
        let mut r = RiemannTensor { n, mixed, lowered: vec![Poly::zero(n); t * t * t * t] };
        for a in 0..t {
            for b in 0..t {
                for c in 0..t {
                    for d in 0..t {
                        let mut acc = Poly::zero(n);
                        for e in 0..t {
                            let ged = m.g(e, d);
                            if ged.is_zero() || r.mixed(a, b, c, e).is_zero() {
                                continue;
                            }
                            acc = &acc + &(r.mixed(a, b, c, e) * &ged);
                        }
                        let i = r.idx(a, b, c, d);
                        r.lowered[i] = acc;
                    }
                }
            }
        }
        r
    }
}

/// Curvature of a Christoffel bundle via the general coordinate formula
/// `R_abc^d = d_a Gamma_bc^d - d_b Gamma_ac^d
///            + Gamma_ae^d Gamma_bc^e - Gamma_be^d Gamma_ac^e`.
pub fn riemann_general(m: &WalkerMetric, gamma: &ChristoffelBundle) -> RiemannTensor {
    let n = m.base_dim();
    let t = 2 * n;
    let mut mixed = vec![Poly::zero(n); t * t * t * t];
    for a in 0..t {
        for b in 0..t {
            for c in 0..t {
                for d in 0..t {
                    let mut acc = &gamma.get(b, c, d).diff(total_var(n, a))
                        - &gamma.get(a, c, d).diff(total_var(n, b));
                    for e in 0..t {
                        if !gamma.get(b, c, e).is_zero() {
                            acc = &acc + &(gamma.get(a, e, d) * gamma.get(b, c, e));
                        }
                        if !gamma.get(a, c, e).is_zero() {
                            acc = &acc - &(gamma.get(b, e, d) * gamma.get(a, c, e));
                        }
                    }
                    mixed[((a * t + b) * t + c) * t + d] = acc;
                }
            }
        }
    }
    RiemannTensor::from_mixed(m, mixed)
}

/// Closed-form Walker curvature: the six component families below are
/// populated directly from `B`, every other component is zero up to the
/// antisymmetry `R_abc^d = -R_bac^d`.  Base indices `i j k h`, fiber
/// counterparts primed, sums over base indices `s, t`.
pub fn riemann_walker(m: &WalkerMetric) -> RiemannTensor {
    let n = m.base_dim();
    let t = 2 * n;
    let db = |p: &Poly, i: usize| p.diff(VarId::base(i + 1));
    let df = |p: &Poly, i: usize| p.diff(VarId::fiber(i + 1));
    let quarter = rat(1, 4);
    let half = rat(1, 2);

    // R_ijk^h = -1/2 (d_i d_{h'} B_jk - d_j d_{h'} B_ik)
    //           -1/4 (d_{s'} B_ik d_{h'} B_js - d_{s'} B_jk d_{h'} B_is)
    let f_base = |i: usize, j: usize, k: usize, h: usize| -> Poly {
        let mut acc = (&db(&df(m.b(j, k), h), i) - &db(&df(m.b(i, k), h), j))
            .scale(&-half.clone());
        let mut s_acc = Poly::zero(n);
        for s in 0..n {
            s_acc = &s_acc + &(&df(m.b(i, k), s) * &df(m.b(j, s), h));
            s_acc = &s_acc - &(&df(m.b(j, k), s) * &df(m.b(i, s), h));
        }
        acc = &acc - &s_acc.scale(&quarter);
        acc
    };

    // R_ijk^{h'}: second-derivative block plus the four bracketed products
    // and the two total-derivative terms.
    let f_base_up_fiber = |i: usize, j: usize, k: usize, h: usize| -> Poly {
        let p2 = &(&db(&db(m.b(i, h), k), j) - &db(&db(m.b(i, k), h), j))
            + &(&db(&db(m.b(j, k), h), i) - &db(&db(m.b(j, h), k), i));
        let mut acc = p2.scale(&-half.clone());
        let mut s_acc = Poly::zero(n);
        for s in 0..n {
            let bracket = |x: usize, y: usize| -> Poly {
                // d_h B_{y s} - d_s B_{y h} - d_y B_{s h} - B_{h t} d_{t'} B_{y s}
                // with (x, y) the pair whose fiber derivative multiplies it;
                // `x` only fixes which B_{x k} factor is used by the caller.
                let _ = x;
                let mut e = &(&db(m.b(y, s), h) - &db(m.b(y, h), s)) - &db(m.b(s, h), y);
                for tt in 0..n {
                    e = &e - &(m.b(h, tt) * &df(m.b(y, s), tt));
                }
                e
            };
            s_acc = &s_acc + &(&df(m.b(i, k), s) * &bracket(i, j));
            s_acc = &s_acc - &(&df(m.b(j, k), s) * &bracket(j, i));

            let bracket2 = |y: usize| -> Poly {
                // d_s B_{y k} - d_k B_{y s} - d_y B_{k s} - B_{s t} d_{t'} B_{y k}
                let mut e = &(&db(m.b(y, k), s) - &db(m.b(y, s), k)) - &db(m.b(k, s), y);
                for tt in 0..n {
                    e = &e - &(m.b(s, tt) * &df(m.b(y, k), tt));
                }
                e
            };
            s_acc = &s_acc - &(&df(m.b(j, h), s) * &bracket2(i));
            s_acc = &s_acc + &(&df(m.b(i, h), s) * &bracket2(j));

            s_acc = &s_acc + &db(&(m.b(h, s) * &df(m.b(i, k), s)), j).scale(&rat_int(2));
            s_acc = &s_acc - &db(&(m.b(h, s) * &df(m.b(j, k), s)), i).scale(&rat_int(2));
        }
        acc = &acc - &s_acc.scale(&quarter);
        acc
    };

    // R_{i'}jk^h = -1/2 d_{i'} d_{h'} B_jk
    let f_fiber_up_base = |i: usize, j: usize, k: usize, h: usize| -> Poly {
        df(&df(m.b(j, k), h), i).scale(&-half.clone())
    };

    // R_{i'}jk^{h'} = -1/2 (d_h d_{i'} B_jk - d_k d_{i'} B_jh)
    //   -1/4 (d_{s'} B_jk d_{i'} B_sh + d_{s'} B_jh d_{i'} B_sk
    //         - 2 d_{i'} (B_hs d_{s'} B_jk))
    let f_fiber_up_fiber = |i: usize, j: usize, k: usize, h: usize| -> Poly {
        let mut acc = (&db(&df(m.b(j, k), i), h) - &db(&df(m.b(j, h), i), k))
            .scale(&-half.clone());
        let mut s_acc = Poly::zero(n);
        for s in 0..n {
            s_acc = &s_acc + &(&df(m.b(j, k), s) * &df(m.b(s, h), i));
            s_acc = &s_acc + &(&df(m.b(j, h), s) * &df(m.b(s, k), i));
            s_acc = &s_acc - &df(&(m.b(h, s) * &df(m.b(j, k), s)), i).scale(&rat_int(2));
        }
        acc = &acc - &s_acc.scale(&quarter);
        acc
    };

    // R_ij{k'}^{h'} = -1/2 (d_j d_{k'} B_ih - d_i d_{k'} B_jh)
    //   -1/4 (d_{k'} B_is d_{s'} B_jh - d_{k'} B_js d_{s'} B_ih)
    let f_mixed_fiber = |i: usize, j: usize, k: usize, h: usize| -> Poly {
        let mut acc = (&db(&df(m.b(i, h), k), j) - &db(&df(m.b(j, h), k), i))
            .scale(&-half.clone());
        let mut s_acc = Poly::zero(n);
        for s in 0..n {
            s_acc = &s_acc + &(&df(m.b(i, s), k) * &df(m.b(j, h), s));
            s_acc = &s_acc - &(&df(m.b(j, s), k) * &df(m.b(i, h), s));
        }
        acc = &acc - &s_acc.scale(&quarter);
        acc
    };

    // R_{i'}j{k'}^{h'} = 1/2 d_{i'} d_{k'} B_jh
    let f_double_fiber = |i: usize, j: usize, k: usize, h: usize| -> Poly {
        df(&df(m.b(j, h), k), i).scale(&half)
    };

    // One canonical value per lower pattern with the first pair ordered as
    // (base, base) or (fiber, base); everything else follows from the
    // antisymmetry in the first two slots or vanishes.
    let component = |a: usize, b: usize, c: usize, d: usize, sign: i64| -> Poly {
        let v = if a < n && b < n {
            let (i, j) = (a, b);
            if c < n {
                let k = c;
                if d < n {
                    f_base(i, j, k, d)
                } else {
                    f_base_up_fiber(i, j, k, d - n)
                }
            } else if d < n {
                Poly::zero(n)
            } else {
                f_mixed_fiber(i, j, c - n, d - n)
            }
        } else {
            // a fiber, b base
            let (i, j) = (a - n, b);
            if c < n {
                let k = c;
                if d < n {
                    f_fiber_up_base(i, j, k, d)
                } else {
                    f_fiber_up_fiber(i, j, k, d - n)
                }
            } else if d < n {
                Poly::zero(n)
            } else {
                f_double_fiber(i, j, c - n, d - n)
            }
        };
        if sign < 0 {
            v.neg_ref()
        } else {
            v
        }
    };

    let mut mixed = vec![Poly::zero(n); t * t * t * t];
    for a in 0..t {
        for b in 0..t {
            for c in 0..t {
                for d in 0..t {
                    let v = if a >= n && b >= n {
                        Poly::zero(n)
                    } else if a < n && b >= n {
                        component(b, a, c, d, -1)
                    } else if a >= n || b < n {
                        component(a, b, c, d, 1)
                    } else {
                        unreachable!()
                    };
                    mixed[((a * t + b) * t + c) * t + d] = v;
                }
            }
        }
    }
    RiemannTensor::from_mixed(m, mixed)
}

/// Curvature and Ricci tensor of an affine connection on the base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineCurvature {
    n: usize,
    r: Vec<Poly>,
    ricci: Vec<Poly>,
}

impl AffineCurvature {
    pub fn base_dim(&self) -> usize {
        self.n
    }

    /// `R_ijk^l` of the base connection.
    pub fn r(&self, i: usize, j: usize, k: usize, l: usize) -> &Poly {
        &self.r[((i * self.n + j) * self.n + k) * self.n + l]
    }

    /// `rho_jk = R_ijk^i`.
    pub fn ricci(&self, j: usize, k: usize) -> &Poly {
        &self.ricci[j * self.n + k]
    }

    pub fn is_flat(&self) -> bool {
        self.r.iter().all(Poly::is_zero)
    }

    pub fn is_ricci_flat(&self) -> bool {
        self.ricci.iter().all(Poly::is_zero)
    }

    /// Symmetric part of the Ricci tensor.
    pub fn ricci_sym(&self) -> SymTensor2Base {
        let mut out = SymTensor2Base::zero(self.n);
        let half = rat(1, 2);
        for j in 0..self.n {
            for k in j..self.n {
                let v = (&self.ricci(j, k).clone() + self.ricci(k, j)).scale(&half);
                out.set(j, k, v).expect("ricci entries are base-only");
            }
        }
        out
    }

    /// Antisymmetric part `1/2 (rho_jk - rho_kj)` as a full matrix.
    pub fn ricci_alt(&self, j: usize, k: usize) -> Poly {
        (&self.ricci(j, k).clone() - self.ricci(k, j)).scale(&rat(1, 2))
    }

    pub fn ricci_is_symmetric(&self) -> bool {
        (0..self.n).all(|j| (0..self.n).all(|k| self.ricci(j, k) == self.ricci(k, j)))
    }

    pub fn ricci_is_skew(&self) -> bool {
        (0..self.n)
            .all(|j| (0..self.n).all(|k| self.ricci(j, k) == &self.ricci(k, j).neg_ref()))
    }
}

/// Curvature of a base affine connection:
/// `R_ijk^l = d_i Gamma_jk^l - d_j Gamma_ik^l
///            + Gamma_im^l Gamma_jk^m - Gamma_jm^l Gamma_ik^m`.
pub fn affine_curvature(nabla: &AffineConnection) -> AffineCurvature {
    let n = nabla.base_dim();
    let mut r = vec![Poly::zero(n); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = &nabla.get(j, k, l).diff(VarId::base(i + 1))
                        - &nabla.get(i, k, l).diff(VarId::base(j + 1));
                    for m in 0..n {
                        acc = &acc + &(nabla.get(i, m, l) * nabla.get(j, k, m));
                        acc = &acc - &(nabla.get(j, m, l) * nabla.get(i, k, m));
                    }
                    r[((i * n + j) * n + k) * n + l] = acc;
                }
            }
        }
    }
    let mut ricci = vec![Poly::zero(n); n * n];
    for j in 0..n {
        for k in 0..n {
            let mut acc = Poly::zero(n);
            for i in 0..n {
                acc = &acc + &r[((i * n + j) * n + k) * n + i];
            }
            ricci[j * n + k] = acc;
        }
    }
    AffineCurvature { n, r, ricci }
}

/// Ricci tensor, scalar curvature, and trace-free Ricci tensor of a metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvatureSummary {
    pub ricci: PolyMatrix,
    pub scalar: Poly,
    pub traceless: PolyMatrix,
}

pub fn curvature_summary(m: &WalkerMetric, r: &RiemannTensor) -> CurvatureSummary {
    let n = m.base_dim();
    let t = 2 * n;
    let ricci = PolyMatrix::from_fn(n, t, t, |b, c| {
        let mut acc = Poly::zero(n);
        for a in 0..t {
            acc = &acc + r.mixed(a, b, c, a);
        }
        acc
    });
    let mut scalar = Poly::zero(n);
    for b in 0..t {
        for c in 0..t {
            let g = m.g_inv(b, c);
            if g.is_zero() {
                continue;
            }
            scalar = &scalar + &(&g * ricci.get(b, c));
        }
    }
    let gfull = m.metric_full();
    let factor = scalar.scale(&rat(1, t as i64));
    let traceless = PolyMatrix::from_fn(n, t, t, |b, c| {
        ricci.get(b, c) - &(&factor * &gfull.get(b, c))
    });
    CurvatureSummary { ricci, scalar, traceless }
}

/// Result of the Einstein test for the one-parameter modified extension.
#[derive(Clone, Debug)]
pub struct EinsteinReport {
    pub metric: WalkerMetric,
    pub is_einstein: bool,
    /// Trace-free Ricci tensor (zero iff Einstein).
    pub residual: PolyMatrix,
    pub scalar: Poly,
    /// The closed-form criterion `Phi = 4 / (c (n-1)) * rho^{nabla,s}`,
    /// when applicable (`c != 0` and `n >= 2`).
    pub criterion: Option<bool>,
    pub note: Option<String>,
}

/// Decide whether `g_{nabla, Phi, c}` is Einstein, both directly (trace-free
/// Ricci vanishes) and through the closed-form criterion on `Phi`.
pub fn einstein_check(
    nabla: &AffineConnection,
    phi: Option<&SymTensor2Base>,
    c: &Rat,
) -> Result<EinsteinReport, GeomError> {
    let n = nabla.base_dim();
    let m = modified_extension_c(nabla, phi, c)?;
    let r = riemann_walker(&m);
    let summary = curvature_summary(&m, &r);
    let is_einstein = summary.traceless.is_zero();

    let (criterion, note) = if c.is_zero() || n < 2 {
        (
            None,
            Some(
                "closed-form criterion inapplicable (c = 0 or n < 2); \
                 direct trace-free Ricci test used"
                    .to_string(),
            ),
        )
    } else {
        let rho_s = affine_curvature(nabla).ricci_sym();
        let factor = rat_int(4) / (c * rat_int(n as i64 - 1));
        let want = rho_s.scale(&factor);
        let phi_actual = phi.cloned().unwrap_or_else(|| SymTensor2Base::zero(n));
        (Some(phi_actual == want), None)
    };

    Ok(EinsteinReport {
        metric: m,
        is_einstein,
        residual: summary.traceless.clone(),
        scalar: summary.scalar,
        criterion,
        note,
    })
}

/// Covariant derivative of the lowered curvature tensor:
/// `data(a; b,c,d,e) = (nabla_a R)_{bcde}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NablaRiemann {
    n: usize,
    data: Vec<Poly>,
}

impl NablaRiemann {
    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize, e: usize) -> &Poly {
        let t = 2 * self.n;
        &self.data[(((a * t + b) * t + c) * t + d) * t + e]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Poly::is_zero)
    }
}

pub fn covariant_derivative_riemann(
    gamma: &ChristoffelBundle,
    r: &RiemannTensor,
) -> NablaRiemann {
    let n = gamma.base_dim();
    let t = 2 * n;
    let mut data = vec![Poly::zero(n); t * t * t * t * t];
    for a in 0..t {
        for b in 0..t {
            for c in 0..t {
                for d in 0..t {
                    for e in 0..t {
                        let mut acc = r.lowered(b, c, d, e).diff(total_var(n, a));
                        for f in 0..t {
                            if !gamma.get(a, b, f).is_zero() {
                                acc = &acc - &(gamma.get(a, b, f) * r.lowered(f, c, d, e));
                            }
                            if !gamma.get(a, c, f).is_zero() {
                                acc = &acc - &(gamma.get(a, c, f) * r.lowered(b, f, d, e));
                            }
                            if !gamma.get(a, d, f).is_zero() {
                                acc = &acc - &(gamma.get(a, d, f) * r.lowered(b, c, f, e));
                            }
                            if !gamma.get(a, e, f).is_zero() {
                                acc = &acc - &(gamma.get(a, e, f) * r.lowered(b, c, d, f));
                            }
                        }
                        data[(((a * t + b) * t + c) * t + d) * t + e] = acc;
                    }
                }
            }
        }
    }
    NablaRiemann { n, data }
}

/// Covariant derivative of a (1,1)-tensor field `J` on the bundle
/// (matrix entry `J.get(b, c)` is `J^b_c`):
/// `(nabla_a J)^b_c = d_a J^b_c + Gamma_ad^b J^d_c - Gamma_ac^d J^b_d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NablaEndo {
    n: usize,
    data: Vec<Poly>,
}

impl NablaEndo {
    pub fn get(&self, a: usize, b: usize, c: usize) -> &Poly {
        let t = 2 * self.n;
        &self.data[(a * t + b) * t + c]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Poly::is_zero)
    }
}

pub fn covariant_derivative_endo(gamma: &ChristoffelBundle, j: &PolyMatrix) -> NablaEndo {
    let n = gamma.base_dim();
    let t = 2 * n;
    assert_eq!(j.nrows(), t);
    assert_eq!(j.ncols(), t);
    let mut data = vec![Poly::zero(n); t * t * t];
    for a in 0..t {
        for b in 0..t {
            for c in 0..t {
                let mut acc = j.get(b, c).diff(total_var(n, a));
                for d in 0..t {
                    if !j.get(d, c).is_zero() {
                        acc = &acc + &(gamma.get(a, d, b) * j.get(d, c));
                    }
                    if !gamma.get(a, c, d).is_zero() {
                        acc = &acc - &(gamma.get(a, c, d) * j.get(b, d));
                    }
                }
                data[(a * t + b) * t + c] = acc;
            }
        }
    }
    NablaEndo { n, data }
}

/// Symmetry checks for a curvature tensor (exact, on the lowered tensor).
pub fn curvature_symmetries_hold(r: &RiemannTensor) -> bool {
    let t = 2 * r.base_dim();
    for a in 0..t {
        for b in 0..t {
            for c in 0..t {
                for d in 0..t {
                    if r.lowered(a, b, c, d) != &r.lowered(b, a, c, d).neg_ref() {
                        return false;
                    }
                    if r.lowered(a, b, c, d) != &r.lowered(a, b, d, c).neg_ref() {
                        return false;
                    }
                    if r.lowered(a, b, c, d) != r.lowered(c, d, a, b) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// First Bianchi identity `R_abcd + R_bcad + R_cabd = 0` on the lowered
/// tensor.
pub fn first_bianchi_holds(r: &RiemannTensor) -> bool {
    let t = 2 * r.base_dim();
    for a in 0..t {
        for b in 0..t {
            for c in 0..t {
                for d in 0..t {
                    let s = &(&r.lowered(a, b, c, d).clone() + r.lowered(b, c, a, d))
                        + r.lowered(c, a, b, d);
                    if !s.is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Second Bianchi identity
/// `(nabla_a R)_{bcde} + (nabla_b R)_{cade} + (nabla_c R)_{abde} = 0`.
pub fn second_bianchi_holds(nr: &NablaRiemann) -> bool {
    let t = 2 * nr.base_dim();
    for a in 0..t {
        for b in 0..t {
            for c in 0..t {
                for d in 0..t {
                    for e in 0..t {
                        let s = &(&nr.get(a, b, c, d, e).clone() + nr.get(b, c, a, d, e))
                            + nr.get(c, a, b, d, e);
                        if !s.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::geometry::Chart;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_walker(rng: &mut ChaCha8Rng, n: usize) -> WalkerMetric {
        let chart = Chart::new(n).unwrap();
        let mut b = PolyMatrix::zeros(n, n, n);
        for i in 0..n {
            for j in i..n {
                let mut entry = Poly::zero(n);
                for _ in 0..rng.gen_range(0..3) {
                    let mut term =
                        Poly::constant(n, rat(rng.gen_range(-3..=3), rng.gen_range(1..=2)));
                    // Keep fiber degree at most 2, matching the extension
                    // constructions.
                    for _ in 0..rng.gen_range(0..2) {
                        term = &term * &Poly::var(n, VarId::fiber(rng.gen_range(1..=n)));
                    }
                    for _ in 0..rng.gen_range(0..2) {
                        term = &term * &Poly::var(n, VarId::base(rng.gen_range(1..=n)));
                    }
                    entry = &entry + &term;
                }
                *b.get_mut(i, j) = entry.clone();
                *b.get_mut(j, i) = entry;
            }
        }
        WalkerMetric::new(chart, b).unwrap()
    }

    fn random_base_poly(rng: &mut ChaCha8Rng, n: usize) -> Poly {
        let mut q = Poly::zero(n);
        for _ in 0..rng.gen_range(0..3) {
            let mut term = Poly::constant(n, rat(rng.gen_range(-3..=3), rng.gen_range(1..=2)));
            for _ in 0..rng.gen_range(0..3) {
                term = &term * &Poly::var(n, VarId::base(rng.gen_range(1..=n)));
            }
            q = &q + &term;
        }
        q
    }

    pub(crate) fn random_connection(rng: &mut ChaCha8Rng, n: usize) -> AffineConnection {
        let mut nabla = AffineConnection::flat(n);
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    if rng.gen_bool(0.4) {
                        nabla.set(i, j, k, random_base_poly(rng, n)).unwrap();
                    }
                }
            }
        }
        nabla
    }

    pub(crate) fn random_phi(rng: &mut ChaCha8Rng, n: usize) -> SymTensor2Base {
        let mut phi = SymTensor2Base::zero(n);
        for i in 0..n {
            for j in i..n {
                phi.set(i, j, random_base_poly(rng, n)).unwrap();
            }
        }
        phi
    }

    fn sec6_metric() -> (AffineConnection, WalkerMetric) {
        let mut nabla = AffineConnection::flat(3);
        nabla.set(0, 0, 2, Poly::var(3, VarId::base(2))).unwrap();
        let m = modified_extension_c(&nabla, None, &rat_int(1)).unwrap();
        (nabla, m)
    }

    #[test]
    fn closed_form_christoffel_agrees_with_general_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3] {
            for _ in 0..4 {
                let m = random_walker(&mut rng, n);
                assert_eq!(christoffel_walker(&m), christoffel_general(&m));
            }
        }
    }

    #[test]
    fn general_christoffel_shows_walker_vanishing_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_walker(&mut rng, 3);
        assert!(christoffel_general(&m).has_walker_vanishing_pattern());
    }

    #[test]
    fn closed_form_curvature_agrees_with_general_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3] {
            for _ in 0..3 {
                let m = random_walker(&mut rng, n);
                let gamma = christoffel_general(&m);
                let want = riemann_general(&m, &gamma);
                let got = riemann_walker(&m);
                let t = 2 * n;
                for a in 0..t {
                    for b in 0..t {
                        for c in 0..t {
                            for d in 0..t {
                                assert_eq!(
                                    got.mixed(a, b, c, d),
                                    want.mixed(a, b, c, d),
                                    "R_[{a}{b}{c}]^[{d}] for n={n}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lowered_curvature_has_standard_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_walker(&mut rng, 2);
        let r = riemann_walker(&m);
        assert!(curvature_symmetries_hold(&r));
        assert!(first_bianchi_holds(&r));
        let (_, m6) = sec6_metric();
        let r6 = riemann_walker(&m6);
        assert!(curvature_symmetries_hold(&r6));
        assert!(first_bianchi_holds(&r6));
    }

    #[test]
    fn degree_three_fixture_curvature_spot_values() {
        let (_, m) = sec6_metric();
        let r = riemann_walker(&m);
        // R_1212 and R_1313 on the lowered tensor.
        assert_eq!(
            r.lowered(0, 1, 0, 1),
            &parse_expr("1/2*x2p*x3p*(x2*x2p - 4)", 3).unwrap()
        );
        assert_eq!(r.lowered(0, 2, 0, 2), &parse_expr("1/2*x2*x3p^3", 3).unwrap());
    }

    #[test]
    fn metric_ricci_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_walker(&mut rng, 2);
        let r = riemann_walker(&m);
        let s = curvature_summary(&m, &r);
        for b in 0..4 {
            for c in 0..4 {
                assert_eq!(s.ricci.get(b, c), s.ricci.get(c, b));
            }
        }
    }

    #[test]
    fn trace_free_ricci_identity_for_modified_extensions() {
        // rho_0 = 2 pi* rho^{nabla,s} - 1/2 c (n-1) pi* Phi, exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3] {
            for _ in 0..3 {
                let nabla = random_connection(&mut rng, n);
                let phi = random_phi(&mut rng, n);
                let c = rat(rng.gen_range(-3..=3), rng.gen_range(1..=2));
                let m = modified_extension_c(&nabla, Some(&phi), &c).unwrap();
                let r = riemann_walker(&m);
                let s = curvature_summary(&m, &r);
                let rho_s = affine_curvature(&nabla).ricci_sym();
                let t = 2 * n;
                let coeff = -(c.clone() * rat_int(n as i64 - 1)) / rat_int(2);
                for b in 0..t {
                    for cc in 0..t {
                        let want = if b < n && cc < n {
                            &rho_s.get(b, cc).scale(&rat_int(2))
                                + &phi.get(b, cc).scale(&coeff)
                        } else {
                            Poly::zero(n)
                        };
                        assert_eq!(s.traceless.get(b, cc), &want, "rho_0[{b},{cc}] n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn scalar_curvature_of_modified_extension_is_dimensional_multiple_of_c() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3] {
            for _ in 0..3 {
                let nabla = random_connection(&mut rng, n);
                let phi = random_phi(&mut rng, n);
                let c = rat(rng.gen_range(-3..=3), rng.gen_range(1..=2));
                let m = modified_extension_c(&nabla, Some(&phi), &c).unwrap();
                let r = riemann_walker(&m);
                let s = curvature_summary(&m, &r);
                let want = Poly::constant(n, c * rat_int((n * (n + 1)) as i64));
                assert_eq!(s.scalar, want, "tau = n (n+1) c for n={n}");
            }
        }
    }

    #[test]
    fn einstein_check_on_fixture_and_criterion_fallback() {
        let (nabla, _) = sec6_metric();
        let rep = einstein_check(&nabla, None, &rat_int(1)).unwrap();
        assert!(rep.is_einstein);
        assert_eq!(rep.criterion, Some(true));
        assert_eq!(rep.scalar, Poly::from_int(3, 12));

        let rep0 = einstein_check(&nabla, None, &Rat::zero()).unwrap();
        assert_eq!(rep0.criterion, None);
        assert!(rep0.note.is_some());
        assert!(rep0.is_einstein, "extension of a Ricci-flat connection with c=0");
    }

    #[test]
    fn base_fixture_connections_have_expected_affine_ricci() {
        // Gamma_{11}^3 = x2 (n=3): Ricci flat but not flat.
        let mut nabla = AffineConnection::flat(3);
        nabla.set(0, 0, 2, Poly::var(3, VarId::base(2))).unwrap();
        let ac = affine_curvature(&nabla);
        assert!(ac.is_ricci_flat());
        assert!(!ac.is_flat());

        // Gamma_{12}^2 = -x2/2 (n=2): rho = -x2^2/4 dx1 x dx1 - 1/2 dx1 x dx2,
        // neither symmetric nor skew.
        let mut nabla2 = AffineConnection::flat(2);
        nabla2.set(0, 1, 1, parse_expr("-1/2*x2", 2).unwrap()).unwrap();
        let ac2 = affine_curvature(&nabla2);
        assert_eq!(ac2.ricci(0, 0), &parse_expr("-1/4*x2^2", 2).unwrap());
        assert_eq!(ac2.ricci(0, 1), &parse_expr("-1/2", 2).unwrap());
        assert_eq!(ac2.ricci(1, 0), &Poly::zero(2));
        assert_eq!(ac2.ricci(1, 1), &Poly::zero(2));
        assert!(!ac2.ricci_is_symmetric() && !ac2.ricci_is_skew());
    }

    #[test]
    fn covariant_derivative_of_metric_vanishes() {
        // The Levi-Civita connection makes g parallel; as a consequence the
        // covariant derivative of the identity endomorphism vanishes too.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_walker(&mut rng, 2);
        let gamma = christoffel_walker(&m);
        let id = PolyMatrix::identity(2, 4);
        assert!(covariant_derivative_endo(&gamma, &id).is_zero());
    }

    #[test]
    fn second_bianchi_on_small_random_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_walker(&mut rng, 2);
        let gamma = christoffel_walker(&m);
        let r = riemann_walker(&m);
        let nr = covariant_derivative_riemann(&gamma, &r);
        assert!(second_bianchi_holds(&nr));
    }
}
