//! The named experiments. Each returns a report whose assertions decide the exit code.

use std::f64::consts::PI;

use abring_core::connection::{
    geometric_holonomy, holonomy_matrix, holonomy_matrix_regauged, w_matrix_closed, w_matrix_extrapolated,
    w_matrix_ordered, AnalyticConnection, RegaugedConnection,
};
use abring_core::gauge::{regauge_holonomy, regauge_w, RegaugeFunction};
use abring_core::propagator::{
    basis_fidelities, cn_evolve_by, exact_final_by, extra_phase_integral, phase_decompose, propagate, wrap_phase,
    PhaseDecomposition, Tracking, DEFAULT_PHASE_PANELS,
};
use abring_core::ring::{current_expectation, eigenenergy, eigenfunction_by, eigenfunction_periodic, velocity_expectation};
use abring_core::{EigenIndex, FluxSchedule, Gauge, Window};
use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{Experiment, ScenarioConfig};
use crate::report::{Assertion, Report, Table};

pub fn run(experiment: Experiment, cfg: &ScenarioConfig) -> Result<Report> {
    match experiment {
        Experiment::Spectrum => run_spectrum(cfg),
        Experiment::Cycle => run_cycle(cfg),
        Experiment::Holonomy => run_holonomy(cfg),
        Experiment::WConvergence => run_w_convergence(cfg),
        Experiment::Propagate => run_propagate(cfg),
        Experiment::PhaseAudit => run_phase_audit(cfg),
    }
}

fn flux_grid(cfg: &ScenarioConfig) -> Vec<f64> {
    let s = &cfg.spectrum;
    if s.points == 1 {
        return vec![s.phi_min];
    }
    (0..s.points)
        .map(|i| s.phi_min + (s.phi_max - s.phi_min) * i as f64 / (s.points - 1) as f64)
        .collect()
}

fn whole_turns(s: &FluxSchedule) -> Result<i64> {
    let turns = s.flux_change().round();
    if (s.flux_change() - turns).abs() > 1e-9 {
        bail!("the flux change {} is not a whole number of flux quanta", s.flux_change());
    }
    Ok(turns as i64)
}

fn phases_json(p: &PhaseDecomposition) -> Value {
    json!({
        "fidelity": p.fidelity,
        "total_phase": p.total_phase,
        "dynamical_phase": p.dynamical_phase,
        "extra_phase": p.extra_phase,
        "residual": p.residual,
        "final_index": p.final_index,
        "start_basis_index": p.start_basis_index,
    })
}

/// `(phi, k, E_k, v_k, j_k)` rows with the anholonomy residual and degeneracy flags.
pub fn run_spectrum(cfg: &ScenarioConfig) -> Result<Report> {
    let mut report = Report::new(Experiment::Spectrum, cfg);
    let ring = &cfg.ring;
    let mut table = Table::new(
        "spectrum",
        &["phi", "k", "energy", "velocity", "current", "anholonomy_residual", "degenerate"],
    );
    let mut worst = 0.0f64;
    let mut degeneracies = Vec::new();
    for phi in flux_grid(cfg) {
        for k in cfg.window.indices() {
            let e = eigenenergy(k, phi, ring);
            let residual = eigenenergy(k, phi + 1.0, ring) - eigenenergy(k - 1, phi, ring);
            worst = worst.max(residual.abs() / e.abs().max(1.0));
            let partner = cfg
                .window
                .indices()
                .find(|&q| q != k && (eigenenergy(q, phi, ring) - e).abs() <= 1e-12 * e.abs().max(1.0));
            if let Some(q) = partner {
                if k < q {
                    degeneracies.push(json!({ "phi": phi, "k": [k, q], "energy": e }));
                }
            }
            table.push(vec![
                phi.into(),
                k.into(),
                e.into(),
                velocity_expectation(k, phi, ring).into(),
                current_expectation(k, phi, ring).into(),
                residual.into(),
                partner.is_some().into(),
            ]);
        }
    }
    report.note("max_scaled_anholonomy_residual", worst);
    report.note("degeneracies", Value::Array(degeneracies));
    report.check(Assertion::at_most("eigenvalue anholonomy E_k(phi+1) = E_(k-1)(phi)", worst, 1e-15));
    report.tables.push(table);
    Ok(report)
}

/// Closed form and grid solution after a whole number of flux quanta.
pub fn run_cycle(cfg: &ScenarioConfig) -> Result<Report> {
    let mut report = Report::new(Experiment::Cycle, cfg);
    let (ring, s, k) = (&cfg.ring, &cfg.schedule, cfg.state.k);
    let turns = whole_turns(s)?;
    let expected = k - turns;
    let solver = cfg.solver.with_gauge(Gauge::ByersYang);

    let exact = exact_final_by(k, s, ring, solver.nx).context("closed-form final state")?;
    let numeric = cn_evolve_by(k, s, ring, &solver).context("grid propagation")?;
    let phases = phase_decompose(&numeric, k, s, ring).context("phase decomposition")?;

    let basis = Window::new(expected - 10, expected + 10)?;
    let exact_fid = basis_fidelities(&exact.state, basis, s.phi_start, ring)?;
    let numeric_fid = basis_fidelities(&numeric, basis, s.phi_start, ring)?;
    let mut table = Table::new("cycle_fidelities", &["k", "fidelity_exact", "fidelity_numeric"]);
    for ((kk, fe), (_, fnum)) in exact_fid.iter().zip(&numeric_fid) {
        table.push(vec![(*kk).into(), (*fe).into(), (*fnum).into()]);
    }
    let winner = numeric_fid.iter().cloned().fold((basis.kmin(), -1.0), |best, x| if x.1 > best.1 { x } else { best });

    report.note("k", k);
    report.note("expected_index", expected);
    report.note("winner_index", winner.0);
    report.note("winner_fidelity", winner.1);
    report.note("gentle_schedule", exact.gentle);
    report.note("phases_exact", phases_json(&exact.phases));
    report.note("phases_numeric", phases_json(&phases));
    report.note("norm", numeric.norm_sq());
    report.check(Assertion::holds(
        "winner index is k minus the number of flux quanta",
        winner.0 == expected,
        format!("winner {} expected {expected}", winner.0),
    ));
    report.check(Assertion::at_least("winner fidelity", winner.1, 0.999));
    report.check(Assertion::at_least(
        "closed-form and grid final states agree",
        exact.state.fidelity(&numeric)?,
        0.999,
    ));
    report.tables.push(table);
    Ok(report)
}

/// `M`, `W` and `M^(g)` with permutation deviations and the regauge-covariance check.
pub fn run_holonomy(cfg: &ScenarioConfig) -> Result<Report> {
    let mut report = Report::new(Experiment::Holonomy, cfg);
    let (ring, window, s) = (&cfg.ring, cfg.window, &cfg.schedule);
    if window.len() < 5 {
        bail!("the holonomy window needs at least 5 states, got {}", window.len());
    }
    let steps = cfg.holonomy.steps;
    let interior = window.interior();
    let analytic = AnalyticConnection { window };

    let m = holonomy_matrix(window, s.phi_start, cfg.holonomy.nx, ring)?;
    let w = w_matrix_ordered(&analytic, s.phi_start, s.phi_end, 1)?;
    let mg = geometric_holonomy(&analytic, s.phi_start, s.phi_end, steps)?;

    let m_dev = m.permutation_deviation(interior);
    let w_dev = w.max_deviation(interior, |a, b| w_matrix_closed(a, b, s.phi_start, s.phi_end));
    report.note("m_permutation_deviation", m_dev);
    report.note("w_closed_form_deviation", w_dev);
    report.note("w_unitarity_defect", w.unitarity_defect());
    report.check(Assertion::at_most("M is the shift permutation", m_dev, 1e-10));
    report.check(Assertion::at_most("W is unitary", w.unitarity_defect(), w.unitarity_tolerance()));
    if let Ok(turns) = whole_turns(s) {
        report.note("mg_permutation_deviation", mg.max_deviation(interior, |a, b| shift(a, b, turns)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.holonomy.eta_seed);
    let eta = RegaugeFunction::random(window, &mut rng);
    let field = RegaugedConnection::new(analytic, &eta)?;
    let w_err = w_matrix_extrapolated(&field, s.phi_start, s.phi_end, steps)?.max_abs_diff(&regauge_w(&w, &eta)?)?;
    let m_regauged = holonomy_matrix_regauged(window, s.phi_start, cfg.holonomy.nx, ring, &eta)?;
    let m_err = m_regauged.max_abs_diff(&regauge_holonomy(&m, &eta)?)?;
    let modulus = m_regauged
        .entries()
        .iter()
        .zip(m.entries().iter())
        .map(|(x, y)| (x.norm() - y.norm()).abs())
        .fold(0.0, f64::max);
    report.note("regauge_w_error", w_err);
    report.note("regauge_m_error", m_err);
    report.check(Assertion::at_most("W follows its regauge law", w_err, 1e-8));
    report.check(Assertion::at_most("M follows its regauge law", m_err, 1e-8));
    report.check(Assertion::at_most("|M| is regauge invariant", modulus, 1e-8));

    report.tables.push(Table::from_matrix("matrix_m", &m));
    report.tables.push(Table::from_matrix("matrix_w", &w));
    report.tables.push(Table::from_matrix("matrix_mg", &mg));
    Ok(report)
}

fn shift(a: EigenIndex, b: EigenIndex, turns: i64) -> num_complex::Complex64 {
    num_complex::Complex64::new(if a == b - turns { 1.0 } else { 0.0 }, 0.0)
}

/// Truncated `W` against the closed form on a fixed central block for growing windows.
pub fn run_w_convergence(cfg: &ScenarioConfig) -> Result<Report> {
    let mut report = Report::new(Experiment::WConvergence, cfg);
    let s = &cfg.schedule;
    let wc = &cfg.w_convergence;
    let block = Window::symmetric(wc.block_half_width);
    let mut table = Table::new("w_convergence", &["n", "max_block_error"]);
    let mut errors = Vec::new();
    for &n in &wc.sizes {
        let window = Window::centered(n);
        if window.intersect(&block) != Some(block) {
            bail!("window of {n} states does not contain the block {block}");
        }
        let w = w_matrix_ordered(&AnalyticConnection { window }, s.phi_start, s.phi_end, 1)?;
        let err = w.max_deviation(block, |a, b| w_matrix_closed(a, b, s.phi_start, s.phi_end));
        table.push(vec![n.into(), err.into()]);
        errors.push(err);
    }
    let monotone = errors.windows(2).all(|p| p[1] <= p[0]);
    let last = errors.last().copied().unwrap_or(0.0);
    report.note("errors", errors.clone());
    report.check(Assertion::holds("error is nonincreasing in N", monotone, format!("{errors:?}")));
    report.check(Assertion::at_most("error at the largest N", last, wc.tolerance));
    report.tables.push(table);
    Ok(report)
}

/// A single grid run with recorded norm and overlaps.
pub fn run_propagate(cfg: &ScenarioConfig) -> Result<Report> {
    let mut report = Report::new(Experiment::Propagate, cfg);
    let (ring, s, k, solver) = (&cfg.ring, &cfg.schedule, cfg.state.k, &cfg.solver);
    let tracked = cfg.tracked();
    let (initial, references) = match solver.gauge {
        Gauge::ByersYang => (
            eigenfunction_by(k, s.phi_start, ring, solver.nx)?,
            tracked.iter().map(|&q| eigenfunction_by(q, s.phi_start, ring, solver.nx)).collect::<Result<Vec<_>, _>>()?,
        ),
        Gauge::Periodic => {
            let init = eigenfunction_periodic(k, ring, solver.nx)?;
            let init = abring_core::WavefunctionGrid::from_parts(init.into_samples(), Gauge::Periodic, s.phi_start, ring.circumference);
            let refs = tracked.iter().map(|&q| eigenfunction_periodic(q, ring, solver.nx)).collect::<Result<Vec<_>, _>>()?;
            (init, refs)
        }
    };
    let run = propagate(initial, s, ring, solver, Some(Tracking { every: cfg.propagate.record_every, references: &references }))
        .context("grid propagation")?;

    let mut header = vec!["t".to_string(), "phi".into(), "norm".into()];
    for q in &tracked {
        header.push(format!("re_{q}"));
        header.push(format!("im_{q}"));
    }
    let mut table = Table { name: "propagation".into(), header, rows: Vec::new() };
    for r in &run.records {
        let mut row: Vec<Value> = vec![r.t.into(), r.phi.into(), r.norm.into()];
        for z in &r.overlaps {
            row.push(z.re.into());
            row.push(z.im.into());
        }
        table.push(row);
    }
    let velocity = run.state.velocity_expectation();
    let expected_velocity = velocity_expectation(k, s.phi_end, ring);
    report.note("steps", run.steps);
    report.note("norm_drift", run.norm_drift);
    report.note("final_velocity", velocity);
    report.note("expected_velocity", expected_velocity);
    report.note("within_accuracy_bound", solver.within_accuracy_bound(s, ring, cfg.window));
    if let Some(last) = run.records.last() {
        let fid: Vec<Value> = tracked.iter().zip(&last.overlaps).map(|(q, z)| json!({ "k": q, "fidelity": z.norm_sqr() })).collect();
        report.note("final_fidelities", Value::Array(fid));
    }
    report.check(Assertion::at_most("norm drift", run.norm_drift, 1e-12));
    report.check(Assertion::at_most("velocity of the evolved state", (velocity - expected_velocity).abs(), 1e-3));
    report.tables.push(table);
    Ok(report)
}

/// Extra phase from quadrature and from a grid run.
pub fn run_phase_audit(cfg: &ScenarioConfig) -> Result<Report> {
    let mut report = Report::new(Experiment::PhaseAudit, cfg);
    let (ring, s, k) = (&cfg.ring, &cfg.schedule, cfg.state.k);
    let expected = PI * s.flux_change();
    let integral = extra_phase_integral(k, s, ring, DEFAULT_PHASE_PANELS)?;
    let solver = cfg.solver.with_gauge(Gauge::ByersYang);
    let state = cn_evolve_by(k, s, ring, &solver).context("grid propagation")?;
    let phases = phase_decompose(&state, k, s, ring).context("phase decomposition")?;
    let numeric_extra = wrap_phase(phases.total_phase - phases.dynamical_phase);

    report.note("expected_extra_phase", expected);
    report.note("quadrature_extra_phase", integral);
    report.note("quadrature_error", integral - expected);
    report.note("numeric_extra_phase", numeric_extra);
    report.note("numeric_expected", wrap_phase(-expected));
    report.note("numeric_difference", phases.residual);
    report.note("phases", phases_json(&phases));
    report.check(Assertion::at_most("quadrature of E~ - E equals pi (phi'' - phi')", (integral - expected).abs(), 1e-10));
    report.check(Assertion::at_most("numeric extra phase", phases.residual.abs(), 1e-2));

    let mut table = Table::new("phase_audit", &["quantity", "value"]);
    for (name, v) in [
        ("expected_extra_phase", expected),
        ("quadrature_extra_phase", integral),
        ("numeric_extra_phase", numeric_extra),
        ("total_phase", phases.total_phase),
        ("dynamical_phase", phases.dynamical_phase),
        ("residual", phases.residual),
        ("fidelity", phases.fidelity),
    ] {
        table.push(vec![name.into(), v.into()]);
    }
    report.tables.push(table);
    Ok(report)
}
