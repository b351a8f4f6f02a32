//! Scenario files: a small line-oriented key-value format with brace-delimited
//! blocks describing the affine input data, the metric construction to apply,
//! and a list of analysis commands.
//!
//! ```text
//! dim = 3
//! construction = modified_c
//! connection { Gamma[1,1,3] = x2 }
//! c = 1
//!
//! command osserman { points = 8, samples = 8, seed = 7 }
//! ```
//!
//! Indices in the file are 1-based; they are stored 0-based internally.
//! Entries inside a block are separated by newlines or commas.  `#` starts a
//! comment that runs to the end of the line.  `Gamma[i,j,k]` with `i != j`
//! may be given for either index order; the missing mirror is filled in by
//! torsion-free symmetry (with a note), and conflicting mirrors are an error.

use std::collections::BTreeMap;
use std::fmt;

use walker_core::expr::{parse_expr, Poly, PointAssignment, Rat};
use walker_core::geometry::{AffineConnection, EndoBase, SymTensor2Base, VectorFieldBase};

/// Which metric construction the scenario applies to its affine data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    /// Plain cotangent-bundle extension of the connection.
    Extension,
    /// Extension deformed by endomorphisms `T`, `S` and a symmetric tensor.
    Modified,
    /// One-parameter deformation (`T = c id`, `S = id`); requires `c`.
    ModifiedC,
    /// Four-dimensional family with cubic fiber dependence from `X`, `T`.
    SelfdualBuild,
    /// Einstein family from a curved surface connection; requires `tau`.
    TypeII,
    /// Ricci-flat family from a scalar potential; requires `phi`.
    RicciFlatSelfdual,
}

impl Construction {
    pub fn keyword(self) -> &'static str {
        match self {
            Construction::Extension => "extension",
            Construction::Modified => "modified",
            Construction::ModifiedC => "modified_c",
            Construction::SelfdualBuild => "selfdual_build",
            Construction::TypeII => "type_ii",
            Construction::RicciFlatSelfdual => "ricci_flat_selfdual",
        }
    }

    fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "extension" => Construction::Extension,
            "modified" => Construction::Modified,
            "modified_c" => Construction::ModifiedC,
            "selfdual_build" => Construction::SelfdualBuild,
            "type_ii" => Construction::TypeII,
            "ricci_flat_selfdual" => Construction::RicciFlatSelfdual,
            _ => return None,
        })
    }
}

/// Analysis commands a scenario can request, in the order given.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandSpec {
    pub name: CommandName,
    /// Sample points for scanning commands.
    pub points: Option<usize>,
    /// Vectors per point for scanning commands.
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Expected verdict for verdict commands (defaults to `yes`).
    pub expect: Option<bool>,
    /// Explicit evaluation point `(base ; fiber)`.
    pub point: Option<PointAssignment>,
    /// Explicit tangent vector, `2 dim` components.
    pub vector: Option<Vec<Rat>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandName {
    /// Scalar curvature, Ricci-flatness, Einstein status (informational).
    Curvature,
    /// Verdict: trace-free Ricci tensor vanishes.
    Einstein,
    /// Verdict: anti-self-dual Weyl part vanishes (two-dimensional base).
    Selfdual,
    /// Verdict: the five structure checks plus parameter recovery.
    Parakaehler,
    /// Verdict: sampled reduced Jacobi characteristic polynomial constant.
    Osserman,
    /// Verdict: sampled Jordan profiles constant per causal class.
    Jordan,
    /// Verdict: sampled derivative-curvature spectra constant.
    Szabo,
    /// Verdict: sampled skew-curvature spectra constant per plane class.
    Ip,
    /// Verdict: Jacobi operators of sampled null vectors all nilpotent.
    Nullnilp,
    /// Jacobi operator at an explicit point and vector (informational).
    Jacobi,
}

impl CommandName {
    pub fn keyword(self) -> &'static str {
        match self {
            CommandName::Curvature => "curvature",
            CommandName::Einstein => "einstein",
            CommandName::Selfdual => "selfdual",
            CommandName::Parakaehler => "parakaehler",
            CommandName::Osserman => "osserman",
            CommandName::Jordan => "jordan",
            CommandName::Szabo => "szabo",
            CommandName::Ip => "ip",
            CommandName::Nullnilp => "nullnilp",
            CommandName::Jacobi => "jacobi",
        }
    }

    fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "curvature" => CommandName::Curvature,
            "einstein" => CommandName::Einstein,
            "selfdual" => CommandName::Selfdual,
            "parakaehler" => CommandName::Parakaehler,
            "osserman" => CommandName::Osserman,
            "jordan" => CommandName::Jordan,
            "szabo" => CommandName::Szabo,
            "ip" => CommandName::Ip,
            "nullnilp" => CommandName::Nullnilp,
            "jacobi" => CommandName::Jacobi,
            _ => return None,
        })
    }

    /// Whether the command contributes to the process exit status.
    pub fn is_verdict(self) -> bool {
        !matches!(self, CommandName::Curvature | CommandName::Jacobi)
    }

    /// Whether the command draws randomized samples (accepts points / samples
    /// / seed parameters).
    pub fn is_sampling(self) -> bool {
        matches!(
            self,
            CommandName::Osserman
                | CommandName::Jordan
                | CommandName::Szabo
                | CommandName::Ip
                | CommandName::Nullnilp
        )
    }
}

/// A parsed, validated scenario.  Index keys are 0-based and symmetric data
/// is stored in completed form, so two scenarios compare equal exactly when
/// they describe the same input.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub dim: usize,
    pub construction: Construction,
    /// `(i, j, k) -> Gamma_ij^k`, both index orders present, zero entries
    /// omitted.
    pub gamma: BTreeMap<(usize, usize, usize), Poly>,
    /// `(i, j) -> Phi_ij`, both index orders present.
    pub phi_tensor: BTreeMap<(usize, usize), Poly>,
    pub t_endo: BTreeMap<(usize, usize), Poly>,
    pub s_endo: BTreeMap<(usize, usize), Poly>,
    pub x_field: BTreeMap<usize, Poly>,
    pub c: Option<Rat>,
    pub tau: Option<Rat>,
    pub potential: Option<Poly>,
    pub commands: Vec<CommandSpec>,
}

impl Scenario {
    pub fn connection(&self) -> AffineConnection {
        let mut nabla = AffineConnection::flat(self.dim);
        for (&(i, j, k), v) in &self.gamma {
            if i <= j {
                nabla.set(i, j, k, v.clone()).expect("validated indices");
            }
        }
        nabla
    }

    pub fn phi(&self) -> Option<SymTensor2Base> {
        if self.phi_tensor.is_empty() {
            return None;
        }
        let mut phi = SymTensor2Base::zero(self.dim);
        for (&(i, j), v) in &self.phi_tensor {
            if i <= j {
                phi.set(i, j, v.clone()).expect("validated indices");
            }
        }
        Some(phi)
    }

    pub fn t(&self) -> EndoBase {
        endo_from(self.dim, &self.t_endo)
    }

    pub fn s(&self) -> EndoBase {
        endo_from(self.dim, &self.s_endo)
    }

    pub fn x(&self) -> VectorFieldBase {
        let mut x = VectorFieldBase::zero(self.dim);
        for (&i, v) in &self.x_field {
            x.set(i, v.clone()).expect("validated indices");
        }
        x
    }

    /// Canonical text form; parsing it back yields an equal scenario.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("dim = {}\n", self.dim));
        out.push_str(&format!("construction = {}\n", self.construction.keyword()));
        if !self.gamma.is_empty() {
            out.push_str("connection {\n");
            for (&(i, j, k), v) in &self.gamma {
                if i <= j {
                    out.push_str(&format!(
                        "  Gamma[{},{},{}] = {v}\n",
                        i + 1,
                        j + 1,
                        k + 1
                    ));
                }
            }
            out.push_str("}\n");
        }
        if !self.phi_tensor.is_empty() {
            out.push_str("Phi {\n");
            for (&(i, j), v) in &self.phi_tensor {
                if i <= j {
                    out.push_str(&format!("  [{},{}] = {v}\n", i + 1, j + 1));
                }
            }
            out.push_str("}\n");
        }
        for (label, map) in [("T", &self.t_endo), ("S", &self.s_endo)] {
            if !map.is_empty() {
                out.push_str(&format!("{label} {{\n"));
                for (&(i, j), v) in map.iter() {
                    out.push_str(&format!("  [{},{}] = {v}\n", i + 1, j + 1));
                }
                out.push_str("}\n");
            }
        }
        if !self.x_field.is_empty() {
            out.push_str("X {\n");
            for (&i, v) in &self.x_field {
                out.push_str(&format!("  [{}] = {v}\n", i + 1));
            }
            out.push_str("}\n");
        }
        if let Some(c) = &self.c {
            out.push_str(&format!("c = {c}\n"));
        }
        if let Some(tau) = &self.tau {
            out.push_str(&format!("tau = {tau}\n"));
        }
        if let Some(p) = &self.potential {
            out.push_str(&format!("phi = {p}\n"));
        }
        for cmd in &self.commands {
            out.push('\n');
            out.push_str(&format!("command {}", cmd.name.keyword()));
            let mut params: Vec<String> = Vec::new();
            if let Some(p) = cmd.points {
                params.push(format!("points = {p}"));
            }
            if let Some(s) = cmd.samples {
                params.push(format!("samples = {s}"));
            }
            if let Some(s) = cmd.seed {
                params.push(format!("seed = {s}"));
            }
            if let Some(e) = cmd.expect {
                params.push(format!("expect = {}", if e { "yes" } else { "no" }));
            }
            if let Some(pt) = &cmd.point {
                params.push(format!("point = {}", point_display(pt)));
            }
            if let Some(v) = &cmd.vector {
                params.push(format!("vector = {}", tuple_display(v)));
            }
            if params.is_empty() {
                out.push_str(" { }\n");
            } else {
                out.push_str(&format!(" {{ {} }}\n", params.join(", ")));
            }
        }
        out
    }
}

fn endo_from(n: usize, map: &BTreeMap<(usize, usize), Poly>) -> EndoBase {
    let mut t = EndoBase::zero(n);
    for (&(i, r), v) in map {
        t.set(i, r, v.clone()).expect("validated indices");
    }
    t
}

fn point_display(pt: &PointAssignment) -> String {
    let base: Vec<String> = pt.coords()[..pt.base_dim()]
        .iter()
        .map(|r| r.to_string())
        .collect();
    let fiber: Vec<String> = pt.coords()[pt.base_dim()..]
        .iter()
        .map(|r| r.to_string())
        .collect();
    format!("({} ; {})", base.join(", "), fiber.join(", "))
}

fn tuple_display(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(|r| r.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Parse failure with a 1-based position in the scenario text.
#[derive(Clone, Debug)]
pub struct ScenarioError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ScenarioError {}

/// Parse a scenario.  Returns the scenario together with human-readable
/// notes (currently: torsion-free completions applied to one-sided
/// `Gamma[i,j,k]` entries).
pub fn parse_scenario(text: &str) -> Result<(Scenario, Vec<String>), ScenarioError> {
    Parser::new(text).run()
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

struct RawEntry {
    line: usize,
    col: usize,
    indices: Vec<usize>,
    expr_line: usize,
    expr_col: usize,
    expr: String,
}

impl Parser {
    fn new(text: &str) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err<T>(&self, line: usize, col: usize, message: impl Into<String>) -> Result<T, ScenarioError> {
        Err(ScenarioError { line, col, message: message.into() })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    /// Skip spaces, tabs, carriage returns, and comments; `and_newlines`
    /// controls whether newlines are also consumed.
    fn skip_trivia(&mut self, and_newlines: bool) {
        while let Some(c) = self.peek() {
            match c {
                ' ' | '\t' | '\r' => {
                    self.bump();
                }
                '#' => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '\n' if and_newlines => {
                    self.bump();
                }
                _ => break,
            }
        }
    }

    fn expect_char(&mut self, want: char) -> Result<(), ScenarioError> {
        self.skip_trivia(false);
        let (line, col) = (self.line, self.col);
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => self.err(line, col, format!("expected `{want}`, found `{c}`")),
            None => self.err(line, col, format!("expected `{want}`, found end of input")),
        }
    }

    fn read_word(&mut self) -> Option<(String, usize, usize)> {
        self.skip_trivia(true);
        let (line, col) = (self.line, self.col);
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if word.is_empty() {
            None
        } else {
            Some((word, line, col))
        }
    }

    fn read_unsigned(&mut self) -> Result<(u64, usize, usize), ScenarioError> {
        self.skip_trivia(false);
        let (line, col) = (self.line, self.col);
        let mut digits = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if digits.is_empty() {
            return self.err(line, col, "expected an integer");
        }
        match digits.parse::<u64>() {
            Ok(v) => Ok((v, line, col)),
            Err(_) => self.err(line, col, format!("integer `{digits}` is out of range")),
        }
    }

    /// Capture raw value text until a top-level `,`, `}`, `;`, `)`
    /// (when `stop_tuple`), newline, comment, or end of input.  Parentheses
    /// nest.
    fn capture_value(&mut self, stop_tuple: bool) -> (String, usize, usize) {
        self.skip_trivia(false);
        let (line, col) = (self.line, self.col);
        let mut out = String::new();
        let mut depth = 0usize;
        while let Some(c) = self.peek() {
            match c {
                '\n' | '#' => break,
                '(' => {
                    depth += 1;
                    out.push(c);
                    self.bump();
                }
                ')' => {
                    if depth == 0 {
                        if stop_tuple {
                            break;
                        }
                        out.push(c);
                        self.bump();
                    } else {
                        depth -= 1;
                        out.push(c);
                        self.bump();
                    }
                }
                ',' | '}' if depth == 0 => break,
                ';' if depth == 0 && stop_tuple => break,
                _ => {
                    out.push(c);
                    self.bump();
                }
            }
        }
        (out.trim_end().to_string(), line, col)
    }

    fn parse_value_poly(&mut self, n: usize) -> Result<(Poly, usize, usize), ScenarioError> {
        let (raw, line, col) = self.capture_value(false);
        if raw.is_empty() {
            return self.err(line, col, "expected an expression");
        }
        match parse_expr(&raw, n) {
            Ok(p) => Ok((p, line, col)),
            Err(e) => {
                // Captured values never span lines, so the inner line is 1.
                self.err(line, col + e.col - 1, e.msg)
            }
        }
    }

    fn parse_value_rational(&mut self) -> Result<(Rat, usize, usize), ScenarioError> {
        let (raw, line, col) = self.capture_value(false);
        if raw.is_empty() {
            return self.err(line, col, "expected a rational number");
        }
        let p = match parse_expr(&raw, 1) {
            Ok(p) => p,
            Err(e) => return self.err(line, col + e.col - 1, e.msg),
        };
        match p.as_constant() {
            Some(r) => Ok((r, line, col)),
            None => self.err(line, col, format!("`{raw}` is not a constant rational")),
        }
    }

    /// `[i]`, `[i,j]`, or `[i,j,k]` with `want` indices, range-checked
    /// against `n`.
    fn parse_index_group(&mut self, want: usize, n: usize) -> Result<(Vec<usize>, usize, usize), ScenarioError> {
        self.skip_trivia(true);
        let (gline, gcol) = (self.line, self.col);
        self.expect_char('[')?;
        let mut indices = Vec::new();
        loop {
            let (v, line, col) = self.read_unsigned()?;
            let idx = v as usize;
            if idx < 1 || idx > n {
                return self.err(line, col, format!("index {idx} is out of range 1..{n}"));
            }
            indices.push(idx - 1);
            self.skip_trivia(false);
            match self.peek() {
                Some(',') => {
                    self.bump();
                }
                Some(']') => {
                    self.bump();
                    break;
                }
                _ => return self.err(self.line, self.col, "expected `,` or `]` in index list"),
            }
        }
        if indices.len() != want {
            return self.err(
                gline,
                gcol,
                format!("expected {want} indices, found {}", indices.len()),
            );
        }
        Ok((indices, gline, gcol))
    }

    /// After an opening `{`: a sequence of entries separated by newlines or
    /// commas, each `prefix[indices] = value`, until the closing `}`.
    fn parse_block_entries(
        &mut self,
        prefix: Option<&str>,
        want_indices: usize,
        n: usize,
    ) -> Result<Vec<RawEntry>, ScenarioError> {
        self.expect_char('{')?;
        let mut entries = Vec::new();
        loop {
            self.skip_trivia(true);
            match self.peek() {
                Some('}') => {
                    self.bump();
                    break;
                }
                Some(',') => {
                    self.bump();
                    continue;
                }
                None => return self.err(self.line, self.col, "unclosed `{` block"),
                _ => {}
            }
            let (eline, ecol) = (self.line, self.col);
            if let Some(prefix) = prefix {
                match self.read_word() {
                    Some((w, line, col)) if w == prefix => {
                        let _ = (line, col);
                    }
                    Some((w, line, col)) => {
                        return self.err(line, col, format!("expected `{prefix}[...]`, found `{w}`"))
                    }
                    None => {
                        return self.err(self.line, self.col, format!("expected `{prefix}[...]`"))
                    }
                }
            }
            let (indices, _, _) = self.parse_index_group(want_indices, n)?;
            self.expect_char('=')?;
            let (raw, vline, vcol) = self.capture_value(false);
            if raw.is_empty() {
                return self.err(vline, vcol, "expected an expression");
            }
            entries.push(RawEntry {
                line: eline,
                col: ecol,
                indices,
                expr_line: vline,
                expr_col: vcol,
                expr: raw,
            });
        }
        Ok(entries)
    }

    /// `(r1, ..., rk)` or `(b1, ..., bn ; f1, ..., fn)`.
    fn parse_tuple(&mut self) -> Result<(Vec<Rat>, Option<usize>), ScenarioError> {
        self.skip_trivia(false);
        self.expect_char('(')?;
        let mut values = Vec::new();
        let mut split = None;
        loop {
            self.skip_trivia(true);
            if self.peek() == Some(')') {
                self.bump();
                break;
            }
            let (raw, line, col) = self.capture_value(true);
            if raw.is_empty() {
                return self.err(line, col, "expected a rational number");
            }
            let p = match parse_expr(&raw, 1) {
                Ok(p) => p,
                Err(e) => return self.err(line, col + e.col - 1, e.msg),
            };
            match p.as_constant() {
                Some(r) => values.push(r),
                None => return self.err(line, col, format!("`{raw}` is not a constant rational")),
            }
            self.skip_trivia(true);
            match self.peek() {
                Some(',') => {
                    self.bump();
                }
                Some(';') => {
                    if split.is_some() {
                        return self.err(self.line, self.col, "`;` may appear only once");
                    }
                    split = Some(values.len());
                    self.bump();
                }
                Some(')') => {
                    self.bump();
                    break;
                }
                _ => return self.err(self.line, self.col, "expected `,`, `;`, or `)`"),
            }
        }
        Ok((values, split))
    }

    fn run(mut self) -> Result<(Scenario, Vec<String>), ScenarioError> {
        let mut dim: Option<(usize, usize, usize)> = None;
        let mut construction: Option<Construction> = None;
        let mut c: Option<Rat> = None;
        let mut tau: Option<Rat> = None;
        let mut potential: Option<Poly> = None;
        let mut gamma_raw: Vec<RawEntry> = Vec::new();
        let mut phi_raw: Vec<RawEntry> = Vec::new();
        let mut t_raw: Vec<RawEntry> = Vec::new();
        let mut s_raw: Vec<RawEntry> = Vec::new();
        let mut x_raw: Vec<RawEntry> = Vec::new();
        let mut seen_blocks: Vec<&'static str> = Vec::new();
        let mut commands: Vec<CommandSpec> = Vec::new();

        macro_rules! require_dim {
            ($line:expr, $col:expr, $what:expr) => {
                match dim {
                    Some((n, _, _)) => n,
                    None => return self.err($line, $col, format!("`dim` must be set before {}", $what)),
                }
            };
        }

        loop {
            self.skip_trivia(true);
            if self.peek().is_none() {
                break;
            }
            let (word, line, col) = match self.read_word() {
                Some(w) => w,
                None => {
                    return self.err(
                        self.line,
                        self.col,
                        format!("unexpected character `{}`", self.peek().unwrap()),
                    )
                }
            };
            match word.as_str() {
                "dim" => {
                    if dim.is_some() {
                        return self.err(line, col, "duplicate key `dim`");
                    }
                    self.expect_char('=')?;
                    let (v, vline, vcol) = self.read_unsigned()?;
                    let n = v as usize;
                    if n == 0 {
                        return self.err(vline, vcol, "dim must be at least 1");
                    }
                    dim = Some((n, line, col));
                }
                "construction" => {
                    if construction.is_some() {
                        return self.err(line, col, "duplicate key `construction`");
                    }
                    self.expect_char('=')?;
                    match self.read_word() {
                        Some((w, wline, wcol)) => match Construction::from_keyword(&w) {
                            Some(k) => construction = Some(k),
                            None => {
                                return self.err(
                                    wline,
                                    wcol,
                                    format!(
                                        "unknown construction `{w}` (expected extension, modified, \
                                         modified_c, selfdual_build, type_ii, or ricci_flat_selfdual)"
                                    ),
                                )
                            }
                        },
                        None => return self.err(self.line, self.col, "expected a construction name"),
                    }
                }
                "c" => {
                    if c.is_some() {
                        return self.err(line, col, "duplicate key `c`");
                    }
                    self.expect_char('=')?;
                    c = Some(self.parse_value_rational()?.0);
                }
                "tau" => {
                    if tau.is_some() {
                        return self.err(line, col, "duplicate key `tau`");
                    }
                    self.expect_char('=')?;
                    tau = Some(self.parse_value_rational()?.0);
                }
                "phi" => {
                    if potential.is_some() {
                        return self.err(line, col, "duplicate key `phi`");
                    }
                    let n = require_dim!(line, col, "`phi`");
                    self.expect_char('=')?;
                    let (p, pline, pcol) = self.parse_value_poly(n)?;
                    if !p.is_base_only() {
                        return self.err(pline, pcol, "the potential may use base variables only");
                    }
                    potential = Some(p);
                }
                "connection" => {
                    let n = require_dim!(line, col, "the connection block");
                    if seen_blocks.contains(&"connection") {
                        return self.err(line, col, "duplicate block `connection`");
                    }
                    seen_blocks.push("connection");
                    gamma_raw = self.parse_block_entries(Some("Gamma"), 3, n)?;
                }
                "Phi" => {
                    let n = require_dim!(line, col, "the Phi block");
                    if seen_blocks.contains(&"Phi") {
                        return self.err(line, col, "duplicate block `Phi`");
                    }
                    seen_blocks.push("Phi");
                    phi_raw = self.parse_block_entries(None, 2, n)?;
                }
                "T" => {
                    let n = require_dim!(line, col, "the T block");
                    if seen_blocks.contains(&"T") {
                        return self.err(line, col, "duplicate block `T`");
                    }
                    seen_blocks.push("T");
                    t_raw = self.parse_block_entries(None, 2, n)?;
                }
                "S" => {
                    let n = require_dim!(line, col, "the S block");
                    if seen_blocks.contains(&"S") {
                        return self.err(line, col, "duplicate block `S`");
                    }
                    seen_blocks.push("S");
                    s_raw = self.parse_block_entries(None, 2, n)?;
                }
                "X" => {
                    let n = require_dim!(line, col, "the X block");
                    if seen_blocks.contains(&"X") {
                        return self.err(line, col, "duplicate block `X`");
                    }
                    seen_blocks.push("X");
                    x_raw = self.parse_block_entries(None, 1, n)?;
                }
                "command" => {
                    let n = require_dim!(line, col, "commands");
                    commands.push(self.parse_command(n)?);
                }
                other => {
                    return self.err(line, col, format!("unknown key `{other}`"));
                }
            }
        }

        let (n, _, _) = match dim {
            Some(d) => d,
            None => return self.err(self.line, self.col, "missing `dim`"),
        };
        let construction = match construction {
            Some(k) => k,
            None => return self.err(self.line, self.col, "missing `construction`"),
        };

        let mut notes = Vec::new();
        let gamma = symmetrize_entries(&gamma_raw, n, "Gamma", Some(&mut notes))?;
        let phi_tensor = two_index(symmetrize_entries(&phi_raw, n, "Phi", None)?);
        let t_endo = plain_entries(&t_raw, n, "T")?;
        let s_endo = plain_entries(&s_raw, n, "S")?;
        let x_field = vector_entries(&x_raw, n)?;

        let scenario = Scenario {
            dim: n,
            construction,
            gamma,
            phi_tensor,
            t_endo,
            s_endo,
            x_field,
            c,
            tau,
            potential,
            commands,
        };
        validate_semantics(&scenario)?;
        Ok((scenario, notes))
    }

    fn parse_command(&mut self, n: usize) -> Result<CommandSpec, ScenarioError> {
        let (name_word, nline, ncol) = match self.read_word() {
            Some(w) => w,
            None => return self.err(self.line, self.col, "expected a command name"),
        };
        let name = match CommandName::from_keyword(&name_word) {
            Some(k) => k,
            None => {
                return self.err(
                    nline,
                    ncol,
                    format!(
                        "unknown command `{name_word}` (expected curvature, einstein, selfdual, \
                         parakaehler, osserman, jordan, szabo, ip, nullnilp, or jacobi)"
                    ),
                )
            }
        };
        let mut spec = CommandSpec {
            name,
            points: None,
            samples: None,
            seed: None,
            expect: None,
            point: None,
            vector: None,
        };
        self.expect_char('{')?;
        loop {
            self.skip_trivia(true);
            match self.peek() {
                Some('}') => {
                    self.bump();
                    break;
                }
                Some(',') => {
                    self.bump();
                    continue;
                }
                None => return self.err(self.line, self.col, "unclosed command block"),
                _ => {}
            }
            let (key, kline, kcol) = match self.read_word() {
                Some(w) => w,
                None => {
                    return self.err(
                        self.line,
                        self.col,
                        format!("unexpected character `{}`", self.peek().unwrap()),
                    )
                }
            };
            self.expect_char('=')?;
            match key.as_str() {
                "points" | "samples" | "seed" => {
                    if !name.is_sampling() {
                        return self.err(
                            kline,
                            kcol,
                            format!("`{key}` does not apply to command `{}`", name.keyword()),
                        );
                    }
                    let (v, vline, vcol) = self.read_unsigned()?;
                    let slot = match key.as_str() {
                        "points" => &mut spec.points,
                        "samples" => &mut spec.samples,
                        _ => {
                            if spec.seed.replace(v).is_some() {
                                return self.err(kline, kcol, "duplicate parameter `seed`");
                            }
                            continue;
                        }
                    };
                    if v == 0 {
                        return self.err(vline, vcol, format!("`{key}` must be positive"));
                    }
                    if slot.replace(v as usize).is_some() {
                        return self.err(kline, kcol, format!("duplicate parameter `{key}`"));
                    }
                }
                "expect" => {
                    if !name.is_verdict() {
                        return self.err(
                            kline,
                            kcol,
                            format!("`expect` does not apply to command `{}`", name.keyword()),
                        );
                    }
                    let value = match self.read_word() {
                        Some((w, wline, wcol)) => match w.as_str() {
                            "yes" => true,
                            "no" => false,
                            _ => return self.err(wline, wcol, "expected `yes` or `no`"),
                        },
                        None => return self.err(self.line, self.col, "expected `yes` or `no`"),
                    };
                    if spec.expect.replace(value).is_some() {
                        return self.err(kline, kcol, "duplicate parameter `expect`");
                    }
                }
                "point" => {
                    let (values, split) = self.parse_tuple()?;
                    let split = match split {
                        Some(s) => s,
                        None => {
                            return self.err(
                                kline,
                                kcol,
                                "a point is written `(base coords ; fiber coords)`",
                            )
                        }
                    };
                    if split != n || values.len() != 2 * n {
                        return self.err(
                            kline,
                            kcol,
                            format!("a point needs {n} base and {n} fiber coordinates"),
                        );
                    }
                    let base = values[..n].to_vec();
                    let fiber = values[n..].to_vec();
                    if spec
                        .point
                        .replace(PointAssignment::new(base, fiber))
                        .is_some()
                    {
                        return self.err(kline, kcol, "duplicate parameter `point`");
                    }
                }
                "vector" => {
                    let (values, split) = self.parse_tuple()?;
                    if split.is_some() {
                        return self.err(kline, kcol, "a vector has no `;` separator");
                    }
                    if values.len() != 2 * n {
                        return self.err(
                            kline,
                            kcol,
                            format!("a vector needs {} components", 2 * n),
                        );
                    }
                    if spec.vector.replace(values).is_some() {
                        return self.err(kline, kcol, "duplicate parameter `vector`");
                    }
                }
                other => {
                    return self.err(
                        kline,
                        kcol,
                        format!(
                            "unknown parameter `{other}` (expected points, samples, seed, expect, \
                             point, or vector)"
                        ),
                    )
                }
            }
        }
        if name == CommandName::Jacobi {
            if spec.point.is_none() || spec.vector.is_none() {
                return self.err(nline, ncol, "command `jacobi` needs `point` and `vector`");
            }
        }
        if (spec.point.is_some() || spec.vector.is_some())
            && !matches!(name, CommandName::Jacobi | CommandName::Jordan)
        {
            return self.err(
                nline,
                ncol,
                format!("`point`/`vector` do not apply to command `{}`", name.keyword()),
            );
        }
        if name == CommandName::Jordan && (spec.point.is_some() != spec.vector.is_some()) {
            return self.err(nline, ncol, "`point` and `vector` must be given together");
        }
        Ok(spec)
    }
}

/// Build a symmetric entry map from raw entries: exact duplicates are errors,
/// mirrored conflicts are errors, one-sided mirrors are completed (recording
/// a note when a note sink is supplied).
fn symmetrize_entries(
    raw: &[RawEntry],
    n: usize,
    label: &str,
    mut notes: Option<&mut Vec<String>>,
) -> Result<BTreeMap<(usize, usize, usize), Poly>, ScenarioError> {
    let mut given: BTreeMap<Vec<usize>, (Poly, usize, usize)> = BTreeMap::new();
    for e in raw {
        let p = parse_entry_expr(e, n)?;
        if given.contains_key(&e.indices) {
            return Err(ScenarioError {
                line: e.line,
                col: e.col,
                message: format!("duplicate key `{}`", entry_name(label, &e.indices)),
            });
        }
        given.insert(e.indices.clone(), (p, e.line, e.col));
    }
    let mut out: BTreeMap<(usize, usize, usize), Poly> = BTreeMap::new();
    for (indices, (p, line, col)) in &given {
        if p.is_zero() {
            continue;
        }
        let mirrored = mirror_indices(indices);
        if let Some((q, _, _)) = given.get(&mirrored) {
            if indices != &mirrored && q != p {
                return Err(ScenarioError {
                    line: *line,
                    col: *col,
                    message: format!(
                        "`{}` conflicts with `{}`; symmetric entries must agree",
                        entry_name(label, indices),
                        entry_name(label, &mirrored)
                    ),
                });
            }
        } else if indices != &mirrored {
            if let Some(notes) = notes.as_deref_mut() {
                notes.push(format!(
                    "completed {} = {p} from {} by symmetry",
                    entry_name(label, &mirrored),
                    entry_name(label, indices),
                ));
            }
        }
        out.insert(key3(indices), p.clone());
        out.insert(key3(&mirrored), p.clone());
    }
    Ok(out)
}

fn mirror_indices(indices: &[usize]) -> Vec<usize> {
    let mut m = indices.to_vec();
    m.swap(0, 1);
    m
}

fn key3(indices: &[usize]) -> (usize, usize, usize) {
    match indices.len() {
        3 => (indices[0], indices[1], indices[2]),
        2 => (indices[0], indices[1], 0),
        _ => unreachable!("entry arity checked by the parser"),
    }
}

fn entry_name(label: &str, indices: &[usize]) -> String {
    let parts: Vec<String> = indices.iter().map(|i| (i + 1).to_string()).collect();
    format!("{label}[{}]", parts.join(","))
}

fn parse_entry_expr(e: &RawEntry, n: usize) -> Result<Poly, ScenarioError> {
    match parse_expr(&e.expr, n) {
        Ok(p) => {
            if !p.is_base_only() {
                return Err(ScenarioError {
                    line: e.expr_line,
                    col: e.expr_col,
                    message: "affine data may use base variables only".to_string(),
                });
            }
            Ok(p)
        }
        Err(err) => Err(ScenarioError {
            line: e.expr_line,
            col: e.expr_col + err.col - 1,
            message: err.msg,
        }),
    }
}

fn plain_entries(
    raw: &[RawEntry],
    n: usize,
    label: &str,
) -> Result<BTreeMap<(usize, usize), Poly>, ScenarioError> {
    let mut out = BTreeMap::new();
    for e in raw {
        let p = parse_entry_expr(e, n)?;
        let key = (e.indices[0], e.indices[1]);
        if out.contains_key(&key) {
            return Err(ScenarioError {
                line: e.line,
                col: e.col,
                message: format!("duplicate key `{}`", entry_name(label, &e.indices)),
            });
        }
        if !p.is_zero() {
            out.insert(key, p);
        }
    }
    Ok(out)
}

fn vector_entries(raw: &[RawEntry], n: usize) -> Result<BTreeMap<usize, Poly>, ScenarioError> {
    let mut out = BTreeMap::new();
    for e in raw {
        let p = parse_entry_expr(e, n)?;
        let key = e.indices[0];
        if out.contains_key(&key) {
            return Err(ScenarioError {
                line: e.line,
                col: e.col,
                message: format!("duplicate key `{}`", entry_name("X", &e.indices)),
            });
        }
        if !p.is_zero() {
            out.insert(key, p);
        }
    }
    Ok(out)
}

/// Convert the three-index symmetric map used for `Gamma` storage back to the
/// two-index form used by `Phi`.
fn two_index(map: BTreeMap<(usize, usize, usize), Poly>) -> BTreeMap<(usize, usize), Poly> {
    map.into_iter().map(|((i, j, _), p)| ((i, j), p)).collect()
}


/// Cross-field checks once the whole file is read.
fn validate_semantics(s: &Scenario) -> Result<(), ScenarioError> {
    let at_end = |message: String| ScenarioError { line: 1, col: 1, message };
    let k = s.construction;
    let forbid = |cond: bool, what: &str| -> Result<(), ScenarioError> {
        if cond {
            Err(at_end(format!(
                "`{what}` does not apply to construction `{}`",
                k.keyword()
            )))
        } else {
            Ok(())
        }
    };
    match k {
        Construction::Extension => {
            forbid(!s.phi_tensor.is_empty(), "Phi")?;
            forbid(!s.t_endo.is_empty(), "T")?;
            forbid(!s.s_endo.is_empty(), "S")?;
            forbid(!s.x_field.is_empty(), "X")?;
            forbid(s.c.is_some(), "c")?;
            forbid(s.tau.is_some(), "tau")?;
            forbid(s.potential.is_some(), "phi")?;
        }
        Construction::Modified => {
            forbid(!s.x_field.is_empty(), "X")?;
            forbid(s.c.is_some(), "c")?;
            forbid(s.tau.is_some(), "tau")?;
            forbid(s.potential.is_some(), "phi")?;
        }
        Construction::ModifiedC => {
            forbid(!s.t_endo.is_empty(), "T")?;
            forbid(!s.s_endo.is_empty(), "S")?;
            forbid(!s.x_field.is_empty(), "X")?;
            forbid(s.tau.is_some(), "tau")?;
            forbid(s.potential.is_some(), "phi")?;
            if s.c.is_none() {
                return Err(at_end("construction `modified_c` needs `c`".to_string()));
            }
        }
        Construction::SelfdualBuild => {
            forbid(!s.s_endo.is_empty(), "S")?;
            forbid(s.c.is_some(), "c")?;
            forbid(s.tau.is_some(), "tau")?;
            forbid(s.potential.is_some(), "phi")?;
            if s.dim != 2 {
                return Err(at_end(
                    "construction `selfdual_build` needs dim = 2".to_string(),
                ));
            }
        }
        Construction::TypeII => {
            forbid(!s.phi_tensor.is_empty(), "Phi")?;
            forbid(!s.t_endo.is_empty(), "T")?;
            forbid(!s.s_endo.is_empty(), "S")?;
            forbid(!s.x_field.is_empty(), "X")?;
            forbid(s.c.is_some(), "c")?;
            forbid(s.potential.is_some(), "phi")?;
            if s.tau.is_none() {
                return Err(at_end("construction `type_ii` needs `tau`".to_string()));
            }
            if s.dim != 2 {
                return Err(at_end("construction `type_ii` needs dim = 2".to_string()));
            }
        }
        Construction::RicciFlatSelfdual => {
            forbid(!s.gamma.is_empty(), "connection")?;
            forbid(!s.t_endo.is_empty(), "T")?;
            forbid(!s.s_endo.is_empty(), "S")?;
            forbid(!s.x_field.is_empty(), "X")?;
            forbid(s.c.is_some(), "c")?;
            forbid(s.tau.is_some(), "tau")?;
            if s.potential.is_none() {
                return Err(at_end(
                    "construction `ricci_flat_selfdual` needs `phi`".to_string(),
                ));
            }
            if s.dim != 2 {
                return Err(at_end(
                    "construction `ricci_flat_selfdual` needs dim = 2".to_string(),
                ));
            }
        }
    }
    Ok(())
}
