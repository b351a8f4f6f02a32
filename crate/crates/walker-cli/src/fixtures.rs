//! Built-in scenarios: ready-to-run inputs covering each construction and
//! the analysis commands, usable as documentation of the file format.

pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    pub source: &'static str,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "osserman-33",
        summary: "six-dimensional metric with constant Jacobi spectrum but varying Jordan form",
        source: "\
# Three-dimensional base with a single Christoffel symbol Gamma[1,1,3] = x2,\n\
# one-parameter deformation c = 1.  The sampled reduced Jacobi spectrum is\n\
# constant, yet the Jordan form varies within each causal class, the\n\
# derivative operators are nilpotent, and the skew-curvature spectrum varies.\n\
dim = 3\n\
construction = modified_c\n\
connection { Gamma[1,1,3] = x2 }\n\
c = 1\n\
\n\
command osserman { points = 8, samples = 8, seed = 7 }\n\
command jordan { expect = no }\n\
command szabo { points = 4, samples = 8, seed = 7 }\n\
command ip { expect = no }\n\
command nullnilp { points = 1, samples = 32, seed = 7 }\n",
    },
    Fixture {
        name: "paraform-n2",
        summary: "four-dimensional para-complex space form with parameter 1",
        source: "\
# Flat surface connection, deformation parameter 1: the deformed extension\n\
# carries a parallel para-complex structure of constant sectional parameter.\n\
dim = 2\n\
construction = modified_c\n\
c = 1\n\
\n\
command parakaehler { }\n\
command einstein { }\n",
    },
    Fixture {
        name: "paraform-n3",
        summary: "six-dimensional para-complex space form with parameter -1",
        source: "\
# Flat three-dimensional base, deformation parameter -1; the parakaehler\n\
# command also verifies the full curvature component table in this dimension.\n\
dim = 3\n\
construction = modified_c\n\
c = -1\n\
\n\
command parakaehler { }\n\
command einstein { }\n",
    },
    Fixture {
        name: "einstein-surface",
        summary: "explicit Einstein self-dual metric with scalar curvature 24",
        source: "\
# The curved-surface Einstein metric entered explicitly: connection entry\n\
# Gamma[1,2,2] = -1/2*x2 (mirror completed by symmetry), deformation tensor\n\
# Phi, and parameter c = 4.\n\
dim = 2\n\
construction = modified_c\n\
connection { Gamma[1,2,2] = -1/2*x2 }\n\
Phi { [1,1] = -1/4*x2^2, [1,2] = -1/4 }\n\
c = 4\n\
\n\
command curvature { }\n\
command einstein { }\n\
command selfdual { }\n",
    },
    Fixture {
        name: "ricciflat-selfdual",
        summary: "Ricci-flat self-dual metric from the potential x1*x2",
        source: "\
# Scalar potential phi = x1*x2 induces a surface connection with\n\
# skew-symmetric Ricci tensor; the resulting metric is Ricci-flat and\n\
# self-dual.\n\
dim = 2\n\
construction = ricci_flat_selfdual\n\
phi = x1*x2\n\
\n\
command curvature { }\n\
command einstein { }\n\
command selfdual { }\n",
    },
    Fixture {
        name: "typeii-build",
        summary: "Einstein self-dual family built from a curved surface connection",
        source: "\
# The same Einstein metric as einstein-surface, produced by the constructor\n\
# from the connection and the prescribed scalar curvature tau = 24.\n\
dim = 2\n\
construction = type_ii\n\
connection { Gamma[1,2,2] = -1/2*x2 }\n\
tau = 24\n\
\n\
command einstein { }\n\
command selfdual { }\n\
command osserman { }\n",
    },
];

pub fn find(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}
