//! Fully symbolic checks of the Jacobi operator of the six-dimensional
//! fixture (base connection `Gamma_11^3 = x2`, deformation parameter 1):
//!
//! * the operator of a generic vector matches a transcribed closed form,
//!   entry by entry, with symbolic vector components;
//! * its power traces equal those of the spectrum {0, e, e/4, e/4, e/4, e/4}
//!   (e the causal norm), which by Newton's identities pins the
//!   characteristic polynomial of `J(v)` to `t (t - e) (t - e/4)^4` for
//!   every tangent vector — exact quantifier coverage, no sampling.

use walker_core::curvature::riemann_walker;
use walker_core::expr::{parse_expr, rat, rat_int, Poly, VarId};
use walker_core::extension::modified_extension_c;
use walker_core::geometry::{AffineConnection, WalkerMetric};
use walker_core::spectral::{jacobi_symbolic, metric_pair_symbolic, symbolic_vector};

fn fixture() -> WalkerMetric {
    let n = 3;
    let mut nabla = AffineConnection::flat(n);
    nabla.set(0, 0, 2, Poly::var(n, VarId::base(2))).unwrap();
    modified_extension_c(&nabla, None, &rat_int(1)).unwrap()
}

/// Entries of four times the Jacobi operator in the frame
/// `(d1, d2, d3, d1', d2', d3')`, as expressions in the chart variables
/// (`x1..x3`, `x1p..x3p`) and the vector components (`x4..x6` for the base
/// part, `x4p..x6p` for the fiber part), plus an integer multiple of the
/// causal norm on the diagonal.
const TABLE: [[(&str, i64); 6]; 6] = [
    [
        (
            "x2p^2*x5^2 + 2*x2p*x3p*x5*x6 + x3p^2*x6^2 \
             + x1p*(x2p*x4*x5 + x3p*x4*x6) + 2*(2*x4*x4p + x5*x5p + x6*x6p)",
            0,
        ),
        (
            "-x1p*x2p*x4^2 - x2p^2*x4*x5 - x2p*x3p*x4*x6 + 2*x4*x5p",
            0,
        ),
        (
            "-x1p*x3p*x4^2 - x2p*x3p*x4*x5 - x3p^2*x4*x6 + 2*x4*x6p",
            0,
        ),
        ("-4*x4^2", 0),
        ("-4*x4*x5", 0),
        ("-4*x4*x6", 0),
    ],
    [
        (
            "-x1p^2*x4*x5 + 2*x2*x3p*x4*x5 - x1p*(x2p*x5^2 + x3p*x5*x6) + 2*x5*x4p",
            0,
        ),
        (
            "-x1p*x2p*x4*x5 - x2p^2*x5^2 - x2p*x3p*x5*x6 + 2*x5*x5p",
            1,
        ),
        (
            "-x1p*x3p*x4*x5 - x2p*x3p*x5^2 - x3p^2*x5*x6 + 2*x5*x6p",
            0,
        ),
        ("-4*x4*x5", 0),
        ("-4*x5^2", 0),
        ("-4*x5*x6", 0),
    ],
    [
        (
            "-4*x4*x5 - x1p^2*x4*x6 + 2*x2*x3p*x4*x6 - x1p*(x2p*x5*x6 + x3p*x6^2) + 2*x6*x4p",
            0,
        ),
        (
            "4*x4^2 - x1p*x2p*x4*x6 - x2p^2*x5*x6 - x2p*x3p*x6^2 + 2*x6*x5p",
            0,
        ),
        (
            "-x1p*x3p*x4*x6 - x2p*x3p*x5*x6 - x3p^2*x6^2 + 2*x6*x6p",
            1,
        ),
        ("-4*x4*x6", 0),
        ("-4*x5*x6", 0),
        ("-4*x6^2", 0),
    ],
    [
        (
            "8*x2p*x3p*x5^2 + 8*x3p^2*x5*x6 - 4*x1p^2*x4*x4p + 8*x2*x3p*x4*x4p - 4*x4p^2 \
             - x1p*(4*x2p*x5*x4p - x3p*(4*x4*x5 - 4*x6*x4p)) + 8*x5*x6p",
            0,
        ),
        (
            "-4*x3p^2*x4*x6 - x2p^2*x5*x4p - x2p*x3p*(8*x4*x5 + x6*x4p) - 3*x1p^2*x4*x5p \
             + 6*x2*x3p*x4*x5p - x1p*(x2p*(x4*x4p + 3*x5*x5p) + x3p*(4*x4^2 + 3*x6*x5p)) \
             - 4*(x4p*x5p + x4*x6p)",
            0,
        ),
        (
            "-x2p*x3p*x5*x4p - x3p^2*(4*x4*x5 + x6*x4p) - 3*x1p^2*x4*x6p + 6*x2*x3p*x4*x6p \
             - 4*x4p*x6p - x1p*(3*x2p*x5*x6p + x3p*(x4*x4p + 3*x6*x6p))",
            0,
        ),
        (
            "-3*x2p^2*x5^2 - 6*x2p*x3p*x5*x6 - 3*x3p^2*x6^2 \
             - x1p*(3*x2p*x4*x5 + 3*x3p*x4*x6) - 4*x4*x4p - 6*x5*x5p - 6*x6*x6p",
            4,
        ),
        (
            "3*x1p^2*x4*x5 - 6*x2*x3p*x4*x5 + x1p*(3*x2p*x5^2 + 3*x3p*x5*x6) + 2*x5*x4p",
            0,
        ),
        (
            "-4*x4*x5 + 3*x1p^2*x4*x6 - 6*x2*x3p*x4*x6 \
             + x1p*(3*x2p*x5*x6 + 3*x3p*x6^2) + 2*x6*x4p",
            0,
        ),
    ],
    [
        (
            "-4*x3p^2*x4*x6 - 3*x2p^2*x5*x4p - x2p*x3p*(4*x4*x5 + 3*x6*x4p) \
             + 2*x2*x3p*x4*x5p - x1p^2*x4*x5p \
             - x1p*(x3p*x6*x5p + x2p*(3*x4*x4p + x5*x5p)) - 4*(x4p*x5p + x4*x6p)",
            0,
        ),
        (
            "-4*x1p*x2p*x4*x5p - 4*x2p^2*x5*x5p - 4*x5p^2 + 4*x2p*x3p*(x4^2 - x6*x5p)",
            0,
        ),
        (
            "x3p^2*(4*x4^2 - x6*x5p) - 3*x2p^2*x5*x6p - 4*x5p*x6p \
             - x1p*(x3p*x4*x5p + 3*x2p*x4*x6p) - x2p*x3p*(x5*x5p + 3*x6*x6p)",
            0,
        ),
        (
            "3*x1p*x2p*x4^2 + 3*x2p^2*x4*x5 + 3*x2p*x3p*x4*x6 + 2*x4*x5p",
            0,
        ),
        (
            "3*x1p*x2p*x4*x5 + 3*x2p^2*x5^2 + 3*x2p*x3p*x5*x6 + 2*x5*x5p",
            1,
        ),
        (
            "4*x4^2 + 3*x1p*x2p*x4*x6 + 3*x2p^2*x5*x6 + 3*x2p*x3p*x6^2 + 2*x6*x5p",
            0,
        ),
    ],
    [
        (
            "-3*x2p*x3p*x5*x4p - 3*x3p^2*x6*x4p - x1p^2*x4*x6p + 2*x2*x3p*x4*x6p \
             - 4*x4p*x6p - x1p*(x2p*x5*x6p + x3p*(3*x4*x4p + x6*x6p))",
            0,
        ),
        (
            "-3*x3p^2*x6*x5p - x2p^2*x5*x6p - 4*x5p*x6p \
             - x1p*(3*x3p*x4*x5p + x2p*x4*x6p) - x2p*x3p*(3*x5*x5p + x6*x6p)",
            0,
        ),
        (
            "-4*x1p*x3p*x4*x6p - 4*x2p*x3p*x5*x6p - 4*x3p^2*x6*x6p - 4*x6p^2",
            0,
        ),
        (
            "3*x1p*x3p*x4^2 + 3*x2p*x3p*x4*x5 + 3*x3p^2*x4*x6 + 2*x4*x6p",
            0,
        ),
        (
            "3*x1p*x3p*x4*x5 + 3*x2p*x3p*x5^2 + 3*x3p^2*x5*x6 + 2*x5*x6p",
            0,
        ),
        (
            "3*x1p*x3p*x4*x6 + 3*x2p*x3p*x5*x6 + 3*x3p^2*x6^2 + 2*x6*x6p",
            1,
        ),
    ],
];

#[test]
fn symbolic_operator_matches_transcribed_closed_form() {
    let m = fixture();
    let r = riemann_walker(&m);
    let v = symbolic_vector(3);
    let eps = metric_pair_symbolic(&m, &v, &v);
    let four_j = jacobi_symbolic(&r, &v).scale(&rat_int(4));

    let mut mismatches = Vec::new();
    let labels = ["1", "2", "3", "1p", "2p", "3p"];
    for (row, row_entries) in TABLE.iter().enumerate() {
        for (col, (expr, eps_mult)) in row_entries.iter().enumerate() {
            let mut expected = parse_expr(expr, 6).unwrap();
            if *eps_mult != 0 {
                expected = &expected + &eps.scale(&rat_int(*eps_mult));
            }
            let actual = four_j.get(row, col);
            if *actual != expected {
                mismatches.push(format!(
                    "entry ({}, {}): transcribed {expected}, engine gives {actual}",
                    labels[row], labels[col]
                ));
            }
        }
    }
    assert!(
        mismatches.is_empty(),
        "{} of 36 entries differ:\n{}",
        mismatches.len(),
        mismatches.join("\n")
    );
}

#[test]
fn power_traces_pin_the_spectrum_for_every_vector() {
    let m = fixture();
    let r = riemann_walker(&m);
    let v = symbolic_vector(3);
    let eps = metric_pair_symbolic(&m, &v, &v);
    let j = jacobi_symbolic(&r, &v);

    // tr(J^k) for the spectrum {0, e, e/4 (x4)} is e^k (4^(k-1) + 1) / 4^(k-1).
    let mut power = j.clone();
    let mut eps_power = eps.clone();
    for k in 1..=6u32 {
        if k > 1 {
            power = power.mul(&j);
            eps_power = &eps_power * &eps;
        }
        let mut trace = Poly::zero(6);
        for d in 0..6 {
            trace = &trace + power.get(d, d);
        }
        let denom = 4i64.pow(k - 1);
        let expected = eps_power.scale(&rat(denom + 1, denom));
        assert_eq!(trace, expected, "trace of J^{k}");
    }
}
