//! Lifts from the base to the cotangent bundle and the extension metrics
//! built from affine data.
//!
//! The momentum function of a base vector field is `iota X = x_{i'} X^i`;
//! a (1,1)-tensor lifts to the fiberwise one-form `(iota T)_i = x_{r'} T_i^r`.
//! The extension of a torsion-free connection has Walker block
//! `B_ij = -2 x_{k'} Gamma_{ij}^k`, and the modified variants add fiber
//! quadratic terms and a pullback of a symmetric tensor.

use crate::expr::{rat, Poly, PolyMatrix, Rat, VarId};
use crate::geometry::{
    AffineConnection, Chart, EndoBase, GeomError, SymTensor2Base, VectorFieldBase, WalkerMetric,
};

/// Vector field on the cotangent bundle (components in the coordinate
/// frame, full polynomial coefficients).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorFieldTotal {
    n: usize,
    comps: Vec<Poly>,
}

impl VectorFieldTotal {
    pub fn new(n: usize, comps: Vec<Poly>) -> Self {
        assert_eq!(comps.len(), 2 * n);
        VectorFieldTotal { n, comps }
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize) -> &Poly {
        &self.comps[a]
    }

    pub fn comps(&self) -> &[Poly] {
        &self.comps
    }

    /// Apply as a derivation to a function on the cotangent bundle.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut acc = Poly::zero(self.n);
        for (a, coeff) in self.comps.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            let v = if a < self.n {
                VarId::base(a + 1)
            } else {
                VarId::fiber(a - self.n + 1)
            };
            acc = &acc + &(coeff * &f.diff(v));
        }
        acc
    }
}

/// Momentum function `iota X = x_{i'} X^i` of a base vector field.
pub fn iota_vector(x: &VectorFieldBase) -> Poly {
    let n = x.base_dim();
    let mut acc = Poly::zero(n);
    for i in 0..n {
        acc = &acc + &(&Poly::var(n, VarId::fiber(i + 1)) * x.get(i));
    }
    acc
}

/// Fiberwise one-form `(iota T)_i = x_{r'} T_i^r` of a (1,1)-tensor.
pub fn iota_endo(t: &EndoBase) -> Vec<Poly> {
    let n = t.base_dim();
    (0..n)
        .map(|i| {
            let mut acc = Poly::zero(n);
            for r in 0..n {
                acc = &acc + &(&Poly::var(n, VarId::fiber(r + 1)) * t.get(i, r));
            }
            acc
        })
        .collect()
}

/// Lie bracket of base vector fields.
pub fn lie_bracket_base(x: &VectorFieldBase, y: &VectorFieldBase) -> VectorFieldBase {
    let n = x.base_dim();
    assert_eq!(n, y.base_dim());
    let mut out = VectorFieldBase::zero(n);
    for k in 0..n {
        let mut acc = Poly::zero(n);
        for i in 0..n {
            acc = &acc + &(x.get(i) * &y.get(k).diff(VarId::base(i + 1)));
            acc = &acc - &(y.get(i) * &x.get(k).diff(VarId::base(i + 1)));
        }
        out.set(k, acc).expect("bracket components are base-only");
    }
    out
}

/// Covariant derivative `nabla_X Y` of base vector fields.
pub fn nabla_apply(
    nabla: &AffineConnection,
    x: &VectorFieldBase,
    y: &VectorFieldBase,
) -> VectorFieldBase {
    let n = nabla.base_dim();
    assert_eq!(n, x.base_dim());
    assert_eq!(n, y.base_dim());
    let mut out = VectorFieldBase::zero(n);
    for k in 0..n {
        let mut acc = Poly::zero(n);
        for i in 0..n {
            acc = &acc + &(x.get(i) * &y.get(k).diff(VarId::base(i + 1)));
            for j in 0..n {
                acc = &acc + &(&(x.get(i) * y.get(j)) * nabla.get(i, j, k));
            }
        }
        out.set(k, acc).expect("covariant derivative components are base-only");
    }
    out
}

/// Complete lift of a base vector field to the cotangent bundle.
///
/// In adapted coordinates `X^C = X^i d_i - x_{j'} (d_i X^j) d_{i'}`; this is
/// the unique lift satisfying `X^C(iota Z) = iota [X, Z]` for all base
/// fields `Z` (checked by the tests below).
pub fn complete_lift(x: &VectorFieldBase) -> VectorFieldTotal {
    let n = x.base_dim();
    let mut comps = Vec::with_capacity(2 * n);
    for i in 0..n {
        comps.push(x.get(i).clone());
    }
    for i in 0..n {
        let mut acc = Poly::zero(n);
        for j in 0..n {
            acc = &acc
                - &(&Poly::var(n, VarId::fiber(j + 1)) * &x.get(j).diff(VarId::base(i + 1)));
        }
        comps.push(acc);
    }
    VectorFieldTotal::new(n, comps)
}

fn connection_block(nabla: &AffineConnection) -> PolyMatrix {
    let n = nabla.base_dim();
    PolyMatrix::from_fn(n, n, n, |i, j| {
        let mut acc = Poly::zero(n);
        for k in 0..n {
            acc = &acc - &(&Poly::var(n, VarId::fiber(k + 1)) * nabla.get(i, j, k)).scale(&rat(2, 1));
        }
        acc
    })
}

/// Extension metric of a torsion-free connection:
/// `B_ij = -2 x_{k'} Gamma_{ij}^k`.
pub fn riemannian_extension(nabla: &AffineConnection) -> WalkerMetric {
    let n = nabla.base_dim();
    let chart = Chart::new(n).expect("connection has positive dimension");
    WalkerMetric::new(chart, connection_block(nabla)).expect("block is symmetric by construction")
}

/// Modified extension with two (1,1)-tensors:
/// `B_ij = 1/2 x_{r'} x_{s'} (T_i^r S_j^s + T_j^r S_i^s) + Phi_ij
///         - 2 x_{k'} Gamma_{ij}^k`.
pub fn modified_extension(
    nabla: &AffineConnection,
    phi: Option<&SymTensor2Base>,
    t: &EndoBase,
    s: &EndoBase,
) -> Result<WalkerMetric, GeomError> {
    let n = nabla.base_dim();
    for (what, dim) in [
        ("T", t.base_dim()),
        ("S", s.base_dim()),
        ("Phi", phi.map(|p| p.base_dim()).unwrap_or(n)),
    ] {
        if dim != n {
            return Err(GeomError::DimensionMismatch {
                what: format!("{what} has base dim {dim}, connection has {n}"),
            });
        }
    }
    let chart = Chart::new(n)?;
    let mut b = connection_block(nabla);
    let half = rat(1, 2);
    for i in 0..n {
        for j in 0..n {
            let mut acc = b.get(i, j).clone();
            for r in 0..n {
                for sx in 0..n {
                    let xr = Poly::var(n, VarId::fiber(r + 1));
                    let xs = Poly::var(n, VarId::fiber(sx + 1));
                    let quad = &(&xr * &xs)
                        * &(&(t.get(i, r) * s.get(j, sx)) + &(t.get(j, r) * s.get(i, sx)));
                    acc = &acc + &quad.scale(&half);
                }
            }
            if let Some(phi) = phi {
                acc = &acc + phi.get(i, j);
            }
            *b.get_mut(i, j) = acc;
        }
    }
    WalkerMetric::new(chart, b)
}

/// One-parameter modified extension:
/// `B_ij = c x_{i'} x_{j'} + Phi_ij - 2 x_{k'} Gamma_{ij}^k`.
pub fn modified_extension_c(
    nabla: &AffineConnection,
    phi: Option<&SymTensor2Base>,
    c: &Rat,
) -> Result<WalkerMetric, GeomError> {
    let n = nabla.base_dim();
    if let Some(p) = phi {
        if p.base_dim() != n {
            return Err(GeomError::DimensionMismatch {
                what: format!("Phi has base dim {}, connection has {n}", p.base_dim()),
            });
        }
    }
    let chart = Chart::new(n)?;
    let mut b = connection_block(nabla);
    for i in 0..n {
        for j in 0..n {
            let xi = Poly::var(n, VarId::fiber(i + 1));
            let xj = Poly::var(n, VarId::fiber(j + 1));
            let mut acc = &b.get(i, j).clone() + &(&xi * &xj).scale(c);
            if let Some(phi) = phi {
                acc = &acc + phi.get(i, j);
            }
            *b.get_mut(i, j) = acc;
        }
    }
    WalkerMetric::new(chart, b)
}

/// Four-dimensional Walker block combining a vector field, a (1,1)-tensor,
/// a connection, and a symmetric tensor:
/// `B_ij = (iota X) x_{i'} x_{j'}
///         + 1/2 ((iota T)_i x_{j'} + (iota T)_j x_{i'})
///         + Phi_ij - 2 x_{k'} Gamma_{ij}^k`.
pub fn selfdual_walker_build(
    x: &VectorFieldBase,
    t: &EndoBase,
    nabla: &AffineConnection,
    phi: Option<&SymTensor2Base>,
) -> Result<WalkerMetric, GeomError> {
    let n = nabla.base_dim();
    if n != 2 {
        return Err(GeomError::DimensionMismatch {
            what: format!("this construction is four-dimensional (base dim 2), got n={n}"),
        });
    }
    for (what, dim) in [
        ("X", x.base_dim()),
        ("T", t.base_dim()),
        ("Phi", phi.map(|p| p.base_dim()).unwrap_or(n)),
    ] {
        if dim != n {
            return Err(GeomError::DimensionMismatch {
                what: format!("{what} has base dim {dim}, connection has {n}"),
            });
        }
    }
    let chart = Chart::new(n)?;
    let ix = iota_vector(x);
    let it = iota_endo(t);
    let half = rat(1, 2);
    let mut b = connection_block(nabla);
    for i in 0..n {
        for j in 0..n {
            let xi = Poly::var(n, VarId::fiber(i + 1));
            let xj = Poly::var(n, VarId::fiber(j + 1));
            let mut acc = b.get(i, j).clone();
            acc = &acc + &(&ix * &(&xi * &xj));
            acc = &acc + &(&(&it[i] * &xj) + &(&it[j] * &xi)).scale(&half);
            if let Some(phi) = phi {
                acc = &acc + phi.get(i, j);
            }
            *b.get_mut(i, j) = acc;
        }
    }
    WalkerMetric::new(chart, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, rat_int};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_base_poly(rng: &mut ChaCha8Rng, n: usize) -> Poly {
        let mut q = Poly::zero(n);
        for _ in 0..rng.gen_range(0..4) {
            let mut term = Poly::constant(n, rat(rng.gen_range(-4..=4), rng.gen_range(1..=3)));
            for _ in 0..rng.gen_range(0..3) {
                term = &term * &Poly::var(n, VarId::base(rng.gen_range(1..=n)));
            }
            q = &q + &term;
        }
        q
    }

    fn random_vf(rng: &mut ChaCha8Rng, n: usize) -> VectorFieldBase {
        let mut x = VectorFieldBase::zero(n);
        for i in 0..n {
            x.set(i, random_base_poly(rng, n)).unwrap();
        }
        x
    }

    fn random_connection(rng: &mut ChaCha8Rng, n: usize) -> AffineConnection {
        let mut nabla = AffineConnection::flat(n);
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    if rng.gen_bool(0.5) {
                        nabla.set(i, j, k, random_base_poly(rng, n)).unwrap();
                    }
                }
            }
        }
        nabla
    }

    #[test]
    fn complete_lift_satisfies_defining_identity() {
        // X^C is characterized by X^C(iota Z) = iota [X, Z].
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3] {
            for _ in 0..10 {
                let x = random_vf(&mut rng, n);
                let z = random_vf(&mut rng, n);
                let lhs = complete_lift(&x).apply(&iota_vector(&z));
                let rhs = iota_vector(&lie_bracket_base(&x, &z));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn extension_metric_pairs_complete_lifts() {
        // g(X^C, Y^C) = -iota(nabla_X Y + nabla_Y X) for the extension of
        // any torsion-free connection.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3] {
            for _ in 0..8 {
                let nabla = random_connection(&mut rng, n);
                let m = riemannian_extension(&nabla);
                let x = random_vf(&mut rng, n);
                let y = random_vf(&mut rng, n);
                let xc = complete_lift(&x);
                let yc = complete_lift(&y);
                let mut lhs = Poly::zero(n);
                for a in 0..2 * n {
                    for b in 0..2 * n {
                        lhs = &lhs + &(&(xc.get(a) * yc.get(b)) * &m.g(a, b));
                    }
                }
                let sum = {
                    let xy = nabla_apply(&nabla, &x, &y);
                    let yx = nabla_apply(&nabla, &y, &x);
                    let mut s = VectorFieldBase::zero(n);
                    for k in 0..n {
                        s.set(k, &xy.get(k).clone() + yx.get(k)).unwrap();
                    }
                    s
                };
                let rhs = iota_vector(&sum).neg_ref();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn modified_extension_is_symmetric_in_tensor_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let n = 3;
            let nabla = random_connection(&mut rng, n);
            let mut t = EndoBase::zero(n);
            let mut s = EndoBase::zero(n);
            for i in 0..n {
                for r in 0..n {
                    t.set(i, r, random_base_poly(&mut rng, n)).unwrap();
                    s.set(i, r, random_base_poly(&mut rng, n)).unwrap();
                }
            }
            let a = modified_extension(&nabla, None, &t, &s).unwrap();
            let b = modified_extension(&nabla, None, &s, &t).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn one_parameter_case_agrees_with_two_tensor_form() {
        // T = c id, S = id in the two-tensor form reproduces the
        // one-parameter extension.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 3;
        let c = rat(-7, 3);
        let nabla = random_connection(&mut rng, n);
        let mut t = EndoBase::zero(n);
        let mut s = EndoBase::zero(n);
        for i in 0..n {
            t.set(i, i, Poly::constant(n, c.clone())).unwrap();
            s.set(i, i, Poly::from_int(n, 1)).unwrap();
        }
        let a = modified_extension(&nabla, None, &t, &s).unwrap();
        let b = modified_extension_c(&nabla, None, &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degree_three_fixture_block_matches_expected_matrix() {
        // n = 3, Gamma_{11}^3 = x2, Phi = 0, c = 1.
        let mut nabla = AffineConnection::flat(3);
        nabla.set(0, 0, 2, Poly::var(3, VarId::base(2))).unwrap();
        let m = modified_extension_c(&nabla, None, &rat_int(1)).unwrap();
        let want = [
            ["x1p^2 - 2*x2*x3p", "x1p*x2p", "x1p*x3p"],
            ["x1p*x2p", "x2p^2", "x2p*x3p"],
            ["x1p*x3p", "x2p*x3p", "x3p^2"],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.b(i, j), &parse_expr(want[i][j], 3).unwrap(), "B[{i}][{j}]");
            }
        }
    }

    #[test]
    fn four_dim_fixture_block_matches_expected_matrix() {
        // n = 2, Gamma_{12}^2 = -x2/2, Phi_11 = -x2^2/4, Phi_12 = -1/4, c = 4.
        let mut nabla = AffineConnection::flat(2);
        nabla.set(0, 1, 1, parse_expr("-1/2*x2", 2).unwrap()).unwrap();
        let mut phi = SymTensor2Base::zero(2);
        phi.set(0, 0, parse_expr("-1/4*x2^2", 2).unwrap()).unwrap();
        phi.set(0, 1, parse_expr("-1/4", 2).unwrap()).unwrap();
        let m = modified_extension_c(&nabla, Some(&phi), &rat_int(4)).unwrap();
        assert_eq!(m.b(0, 0), &parse_expr("4*x1p^2 - 1/4*x2^2", 2).unwrap());
        assert_eq!(m.b(0, 1), &parse_expr("4*x1p*x2p + x2*x2p - 1/4", 2).unwrap());
        assert_eq!(m.b(1, 1), &parse_expr("4*x2p^2", 2).unwrap());
    }

    #[test]
    fn fiber_degree_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 2;
        let nabla = random_connection(&mut rng, n);
        let ext = riemannian_extension(&nabla);
        let modc = modified_extension_c(&nabla, None, &rat_int(5)).unwrap();
        let x = random_vf(&mut rng, n);
        let mut t = EndoBase::zero(n);
        t.set(0, 1, random_base_poly(&mut rng, n)).unwrap();
        let built = selfdual_walker_build(&x, &t, &nabla, None).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!(ext.b(i, j).fiber_degree() <= 1);
                assert!(modc.b(i, j).fiber_degree() <= 2);
                assert!(built.b(i, j).fiber_degree() <= 3);
            }
        }
    }

    #[test]
    fn four_dim_build_rejects_other_dimensions() {
        let nabla = AffineConnection::flat(3);
        let x = VectorFieldBase::zero(3);
        let t = EndoBase::zero(3);
        assert!(selfdual_walker_build(&x, &t, &nabla, None).is_err());
    }
}
