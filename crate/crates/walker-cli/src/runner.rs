//! Execute a parsed scenario: build the metric, run each command against the
//! curvature engine, and collect a deterministic report.

use walker_core::curvature::{
    christoffel_walker, covariant_derivative_riemann, curvature_summary, einstein_check,
    riemann_walker, CurvatureSummary, RiemannTensor,
};
use walker_core::extension::{
    modified_extension, modified_extension_c, riemannian_extension, selfdual_walker_build,
};
use walker_core::fourdim::{build_ricci_flat_selfdual, build_type_ii, selfdual_check};
use walker_core::geometry::WalkerMetric;
use walker_core::parakaehler::{
    build_para_structure, component_table_n3, detect_space_form, nijenhuis,
    sectional_identity_holds,
};
use walker_core::spectral::{
    char_poly, jordan_analyze, jordan_osserman_verdict, nilpotency_index,
    null_nilpotency_profile, osserman_verdict, skew_curvature_verdict, szabo_verdict,
    CurvatureAtPoint, SampleScheme,
};

use crate::report::{yesno, CommandReport, CommandStatus, Report};
use crate::scenario::{CommandName, CommandSpec, Construction, Scenario};

/// Run every command of the scenario.  `label` names the scenario in the
/// report; `seed_override` replaces the seed of all sampling commands.
pub fn run_scenario(
    scenario: &Scenario,
    notes: Vec<String>,
    label: &str,
    seed_override: Option<u64>,
) -> Report {
    let mut report = Report {
        scenario: label.to_string(),
        dim: scenario.dim,
        construction: scenario.construction.keyword().to_string(),
        notes,
        metric: Vec::new(),
        commands: Vec::new(),
        construction_error: None,
    };
    let (m, extra_notes) = match build_metric(scenario) {
        Ok(x) => x,
        Err(msg) => {
            report.construction_error = Some(msg);
            return report;
        }
    };
    report.notes.extend(extra_notes);
    let n = scenario.dim;
    for i in 0..n {
        for j in i..n {
            report
                .metric
                .push((format!("B[{},{}]", i + 1, j + 1), m.b(i, j).to_string()));
        }
    }
    let r = riemann_walker(&m);
    let summary = curvature_summary(&m, &r);
    for spec in &scenario.commands {
        report
            .commands
            .push(execute(scenario, &m, &r, &summary, spec, seed_override));
    }
    report
}

fn build_metric(scenario: &Scenario) -> Result<(WalkerMetric, Vec<String>), String> {
    let mut notes = Vec::new();
    let nabla = scenario.connection();
    let phi = scenario.phi();
    let m = match scenario.construction {
        Construction::Extension => riemannian_extension(&nabla),
        Construction::Modified => {
            modified_extension(&nabla, phi.as_ref(), &scenario.t(), &scenario.s())
                .map_err(|e| e.to_string())?
        }
        Construction::ModifiedC => {
            let c = scenario.c.as_ref().expect("validated by the parser");
            modified_extension_c(&nabla, phi.as_ref(), c).map_err(|e| e.to_string())?
        }
        Construction::SelfdualBuild => {
            selfdual_walker_build(&scenario.x(), &scenario.t(), &nabla, phi.as_ref())
                .map_err(|e| e.to_string())?
        }
        Construction::TypeII => {
            let tau = scenario.tau.as_ref().expect("validated by the parser");
            let m = build_type_ii(&nabla, tau).map_err(|e| e.to_string())?;
            notes.push(format!(
                "derived deformation parameter c = {}",
                tau / walker_core::expr::rat_int(6)
            ));
            m
        }
        Construction::RicciFlatSelfdual => {
            let potential = scenario.potential.as_ref().expect("validated by the parser");
            let (derived, m) =
                build_ricci_flat_selfdual(potential, phi.as_ref()).map_err(|e| e.to_string())?;
            for i in 0..scenario.dim {
                for j in i..scenario.dim {
                    for k in 0..scenario.dim {
                        let v = derived.get(i, j, k);
                        if !v.is_zero() {
                            notes.push(format!(
                                "derived connection Gamma[{},{},{}] = {v}",
                                i + 1,
                                j + 1,
                                k + 1
                            ));
                        }
                    }
                }
            }
            m
        }
    };
    Ok((m, notes))
}

fn scheme_for(spec: &CommandSpec, seed_override: Option<u64>) -> SampleScheme {
    let default = SampleScheme::default();
    SampleScheme {
        points: spec.points.unwrap_or(default.points),
        vectors_per_point: spec.samples.unwrap_or(default.vectors_per_point),
        seed: seed_override.unwrap_or_else(|| spec.seed.unwrap_or(default.seed)),
    }
}

fn push_scheme(out: &mut CommandReport, scheme: &SampleScheme) {
    out.push("evidence", "sampled");
    out.push("points", scheme.points.to_string());
    out.push("samples_per_point", scheme.vectors_per_point.to_string());
    out.push("seed", scheme.seed.to_string());
}

fn execute(
    scenario: &Scenario,
    m: &WalkerMetric,
    r: &RiemannTensor,
    summary: &CurvatureSummary,
    spec: &CommandSpec,
    seed_override: Option<u64>,
) -> CommandReport {
    let mut out = CommandReport::new(spec.name.keyword());
    let expect = spec.expect.unwrap_or(true);
    match spec.name {
        CommandName::Curvature => {
            out.push("scalar", summary.scalar.to_string());
            out.push("ricci_flat", yesno(summary.ricci.is_zero()));
            out.push("einstein", yesno(summary.traceless.is_zero()));
        }
        CommandName::Einstein => {
            let outcome = summary.traceless.is_zero();
            out.push("einstein", yesno(outcome));
            out.push("scalar", summary.scalar.to_string());
            if scenario.construction == Construction::ModifiedC {
                let check = einstein_check(
                    &scenario.connection(),
                    scenario.phi().as_ref(),
                    scenario.c.as_ref().expect("validated by the parser"),
                );
                match check {
                    Ok(rep) => {
                        if let Some(criterion) = rep.criterion {
                            out.push("closed_form_criterion", yesno(criterion));
                        }
                        if let Some(note) = rep.note {
                            out.push("note", note);
                        }
                    }
                    Err(e) => out.push("note", e.to_string()),
                }
            }
            out.verdict(outcome, expect);
        }
        CommandName::Selfdual => match selfdual_check(m, r, summary) {
            Ok(rep) => {
                out.push("self_dual", yesno(rep.is_self_dual));
                out.verdict(rep.is_self_dual, expect);
            }
            Err(e) => out.status = CommandStatus::Error(e.to_string()),
        },
        CommandName::Parakaehler => match build_para_structure(m) {
            Ok(ps) => {
                let gamma = christoffel_walker(m);
                let checks = [
                    ("squares_to_identity", ps.squares_to_identity()),
                    ("anti_compatible", ps.anti_compatible(m)),
                    ("integrable", nijenhuis(ps.j()).is_zero()),
                    ("closed_form", ps.omega_is_closed()),
                    ("parallel", ps.is_parallel(&gamma)),
                    ("sectional_identity", sectional_identity_holds(m, r, &ps)),
                ];
                let mut all = true;
                for (name, ok) in checks {
                    out.push(name, yesno(ok));
                    all &= ok;
                }
                let detected = detect_space_form(m, r, summary);
                match &detected {
                    Some(c) => out.push("recovered_c", c.to_string()),
                    None => out.push("recovered_c", "none"),
                }
                all &= detected.is_some();
                if scenario.dim == 3 {
                    match component_table_n3(r, ps.c()) {
                        Ok(rows) => {
                            let passed = rows.iter().filter(|row| row.holds).count();
                            out.push("table_rows", format!("{passed}/{} hold", rows.len()));
                            all &= passed == rows.len();
                        }
                        Err(e) => {
                            out.push("table_rows", e.to_string());
                            all = false;
                        }
                    }
                }
                out.verdict(all, expect);
            }
            Err(e) => out.status = CommandStatus::Error(e.to_string()),
        },
        CommandName::Osserman => {
            let scheme = scheme_for(spec, seed_override);
            push_scheme(&mut out, &scheme);
            let rep = osserman_verdict(m, r, &scheme);
            out.push("samples_per_class", rep.samples_per_class.to_string());
            out.push(
                "spacelike_poly",
                rep.spacelike_poly
                    .as_ref()
                    .map_or_else(|| "none".to_string(), |p| p.to_string()),
            );
            out.push(
                "timelike_poly",
                rep.timelike_poly
                    .as_ref()
                    .map_or_else(|| "none".to_string(), |p| p.to_string()),
            );
            let outcome = rep.consistent && rep.polys_match_across_classes;
            out.push("constant", yesno(outcome));
            if let Some(ce) = &rep.counterexample {
                out.push("counterexample", ce.to_string());
            }
            out.verdict(outcome, expect);
        }
        CommandName::Jordan => {
            let scheme = scheme_for(spec, seed_override);
            push_scheme(&mut out, &scheme);
            let mut extras = Vec::new();
            if let (Some(pt), Some(v)) = (&spec.point, &spec.vector) {
                extras.push((pt.clone(), v.clone()));
            }
            let rep = jordan_osserman_verdict(m, r, &scheme, &extras);
            out.push("samples_per_class", rep.samples_per_class.to_string());
            if rep.extra_samples > 0 {
                out.push("extra_samples", rep.extra_samples.to_string());
            }
            if rep.undetermined_samples > 0 {
                out.push("undetermined_samples", rep.undetermined_samples.to_string());
            }
            for (class, profiles) in [
                ("spacelike", &rep.spacelike_profiles),
                ("timelike", &rep.timelike_profiles),
            ] {
                out.push(
                    &format!("{class}_profiles"),
                    format!("{} distinct", profiles.len()),
                );
                for (profile, count) in profiles.iter() {
                    out.push(&format!("{class}_profile"), format!("{profile} (x{count})"));
                }
            }
            let outcome = rep.constant();
            out.push("constant", yesno(outcome));
            out.verdict(outcome, expect);
        }
        CommandName::Szabo => {
            let scheme = scheme_for(spec, seed_override);
            push_scheme(&mut out, &scheme);
            let gamma = christoffel_walker(m);
            let nr = covariant_derivative_riemann(&gamma, r);
            let rep = szabo_verdict(m, &nr, &scheme);
            out.push("locally_symmetric", yesno(nr.is_zero()));
            out.push("samples", rep.samples.to_string());
            out.push("all_nilpotent", yesno(rep.all_nilpotent));
            out.push("nonzero_operator_seen", yesno(rep.nonzero_operator_seen));
            for (poly, count) in rep.polys.iter() {
                out.push("char_poly", format!("{poly} (x{count})"));
            }
            let outcome = rep.constant();
            out.push("constant", yesno(outcome));
            out.verdict(outcome, expect);
        }
        CommandName::Ip => {
            let scheme = scheme_for(spec, seed_override);
            push_scheme(&mut out, &scheme);
            let rep = skew_curvature_verdict(m, r, &scheme);
            out.push("samples", rep.samples.to_string());
            out.push("degenerate_skipped", rep.degenerate_skipped.to_string());
            for (class, polys) in rep.class_polys.iter() {
                out.push(
                    &format!("class[{class}]"),
                    format!("{} distinct char polys", polys.len()),
                );
            }
            let outcome = rep.constant_per_class();
            out.push("constant", yesno(outcome));
            out.verdict(outcome, expect);
        }
        CommandName::Nullnilp => {
            let scheme = scheme_for(spec, seed_override);
            push_scheme(&mut out, &scheme);
            let rep = null_nilpotency_profile(m, r, &scheme);
            out.push("samples", rep.samples.to_string());
            out.push("all_nilpotent", yesno(rep.all_nilpotent));
            for (index, count) in rep.index_counts.iter() {
                out.push("nilpotency_index", format!("{index} (x{count})"));
            }
            if let Some(ce) = &rep.counterexample {
                out.push("counterexample", ce.to_string());
            }
            out.verdict(rep.all_nilpotent, expect);
        }
        CommandName::Jacobi => {
            let pt = spec.point.as_ref().expect("validated by the parser");
            let v = spec.vector.as_ref().expect("validated by the parser");
            let cap = CurvatureAtPoint::evaluate(m, r, pt);
            let eps = cap.metric_pair(v, v);
            out.push("point", pt.to_string());
            out.push("epsilon", eps.to_string());
            let j = cap.jacobi(v);
            out.push("char_poly", char_poly(&j).to_string());
            out.push("jordan_profile", jordan_analyze(&j).key());
            if eps == walker_core::expr::rat_int(0) {
                match nilpotency_index(&j) {
                    Some(k) => out.push("nilpotency_index", k.to_string()),
                    None => out.push("nilpotency_index", "not nilpotent"),
                }
            } else {
                let reduced = cap
                    .reduced_jacobi(v)
                    .expect("nonzero epsilon admits a reduced operator");
                out.push("reduced_char_poly", char_poly(&reduced).to_string());
                out.push("reduced_jordan_profile", jordan_analyze(&reduced).key());
            }
        }
    }
    out
}
