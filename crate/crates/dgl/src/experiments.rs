//! One runner per subcommand. Each returns the summary plus the artifact
//! files it wants written next to it.

use dgl_core::canonical::{counterexample_report, cross_oracle, CounterexampleThresholds, FockSpace};
use dgl_core::evolve::{evolve_sea_observed, hamiltonian_with, EvolveOptions};
use dgl_core::linalg::{hermitian_eigh, identity, max_abs, max_abs_diff};
use dgl_core::observables::{compare_records, record_run, GaugeComparisonReport, RecordOptions, RunRecord};
use dgl_core::potential::EMPotential;
use dgl_core::twopoint::{appendix_audit, build_g, build_q, build_r, ode_residual, TwoPointState};
use dgl_core::{GaugeFunction, ModeBank, C64};
use serde_json::json;

use crate::config::{ExperimentConfig, ExperimentKind, OraclePotential, PotentialKind};
use crate::output::{counterexample_csv, series_csv};
use crate::report::{Checks, Summary};
use crate::RunError;

/// Summary and extra files (name, contents) of a finished run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Summary,
    pub files: Vec<(String, String)>,
}

pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig, threads: usize) -> Result<Outcome, RunError> {
    if let Some(declared) = cfg.experiment {
        if declared != kind {
            return Err(RunError::Config(format!(
                "`experiment`: config is for {} but the subcommand is {}",
                declared.name(),
                kind.name()
            )));
        }
    }
    let checks = Checks::new(kind, &cfg.tolerances)?;
    match kind {
        ExperimentKind::Evolve => evolve(cfg, checks),
        ExperimentKind::GaugeCheck => gauge_check(cfg, checks, threads),
        ExperimentKind::CanonicalDemo => canonical_demo(cfg, checks),
        ExperimentKind::Identities => identities(cfg, checks),
        ExperimentKind::Convergence => convergence(cfg, checks, threads),
        ExperimentKind::CrossOracle => cross_oracle_suite(cfg, checks),
    }
}

/// Runs both closures, on two threads when the budget allows.
fn paired<A: Send, B: Send>(threads: usize, a: impl FnOnce() -> A + Send, b: impl FnOnce() -> B + Send) -> (A, B) {
    if threads >= 2 {
        std::thread::scope(|s| {
            let left = s.spawn(a);
            let right = b();
            (left.join().expect("paired run panicked"), right)
        })
    } else {
        (a(), b())
    }
}

fn record_stats(record: &RunRecord) -> serde_json::Value {
    json!({
        "snapshots": record.times.len(),
        "steps": record.stats.steps,
        "max_norm_drift": record.stats.max_norm_drift,
        "max_gram_residual": record.max_gram_residual,
        "max_abs_current": record.max_abs_current(),
        "max_abs_density": record.max_abs_density(),
        "max_abs_total_charge": record.max_abs_total_charge(),
    })
}

fn evolve(cfg: &ExperimentConfig, mut checks: Checks) -> Result<Outcome, RunError> {
    let bank = cfg.bank()?;
    let pot = cfg.potential()?;
    let opts = cfg.evolve_options()?;
    let keep = RecordOptions { keep_phi: false, dual_route: cfg.output.dual_route };
    let record = record_run(&bank, &pot, &opts, keep)?;

    checks.check("gram_residual", record.max_gram_residual);
    checks.check("total_charge", record.max_abs_total_charge());
    if let Some(dual) = record.dual_route_residual {
        checks.check("dual_route", dual);
    }
    checks.check("imaginary_residue", record.max_imaginary_residue);
    let min_energy = record.energy.iter().copied().fold(f64::INFINITY, f64::min);
    checks.check("negative_energy", (-min_energy).max(0.0));
    if record.times.len() >= 3 {
        checks.check("continuity", record.continuity_residual()?);
    }
    if cfg.potential.kind == PotentialKind::PureGauge {
        checks.check("pure_gauge_current", record.max_abs_current());
        checks.check("pure_gauge_density", record.max_abs_density());
    }
    checks.diagnostic("max_abs_current", record.max_abs_current());
    checks.diagnostic("max_sea_energy", record.energy.iter().copied().fold(0.0, f64::max));

    let details = json!({ "potential": pot.provenance(), "run": record_stats(&record) });
    let mut files = Vec::new();
    if cfg.output.series {
        files.push(("series.csv".to_string(), series_csv(&record, bank.grid())));
    }
    Ok(Outcome { summary: Summary::completed(ExperimentKind::Evolve, cfg, checks, details), files })
}

/// Both runs of a gauge comparison, kept for their series.
struct GaugePair {
    report: GaugeComparisonReport,
    base: RunRecord,
    moved: RunRecord,
}

fn gauge_pair(
    bank: &ModeBank,
    pot: &EMPotential,
    chi: &GaugeFunction,
    opts: &EvolveOptions,
    tolerance: f64,
    threads: usize,
) -> Result<GaugePair, RunError> {
    chi.check_initial(opts.t0)?;
    let moved_pot = pot.gauge_transform(chi, bank.grid())?;
    let keep = RecordOptions { keep_phi: true, dual_route: false };
    let (base, moved) = paired(threads, || record_run(bank, pot, opts, keep), || record_run(bank, &moved_pot, opts, keep));
    let (base, moved) = (base?, moved?);
    let report = compare_records(bank, opts, chi, &base, &moved, tolerance)?;
    Ok(GaugePair { report, base, moved })
}

fn gauge_check(cfg: &ExperimentConfig, mut checks: Checks, threads: usize) -> Result<Outcome, RunError> {
    let bank = cfg.bank()?;
    let pot = cfg.potential()?;
    let chi = cfg.chi()?;
    chi.check_grid(bank.grid()).map_err(|e| RunError::Config(format!("`chi`: {e}")))?;
    let opts = cfg.evolve_options()?;
    let pair = gauge_pair(&bank, &pot, &chi, &opts, checks.tolerance("max_dj"), threads)?;

    checks.check("max_dj", pair.report.max_dj);
    checks.check("phase_residual", pair.report.phase_residual);
    checks.check("total_charge", pair.base.max_abs_total_charge().max(pair.moved.max_abs_total_charge()));
    checks.diagnostic("max_drho", pair.report.max_drho);
    checks.diagnostic("max_abs_current", pair.base.max_abs_current());

    let details = json!({
        "comparison": pair.report,
        "base": { "potential": pot.provenance(), "run": record_stats(&pair.base) },
        "transformed": { "run": record_stats(&pair.moved) },
    });
    let mut files = Vec::new();
    if cfg.output.series {
        files.push(("series_base.csv".to_string(), series_csv(&pair.base, bank.grid())));
        files.push(("series_transformed.csv".to_string(), series_csv(&pair.moved, bank.grid())));
    }
    Ok(Outcome { summary: Summary::completed(ExperimentKind::GaugeCheck, cfg, checks, details), files })
}

fn convergence(cfg: &ExperimentConfig, mut checks: Checks, threads: usize) -> Result<Outcome, RunError> {
    let levels = &cfg
        .convergence
        .as_ref()
        .ok_or_else(|| RunError::Config("`convergence`: this experiment needs a [convergence] table".into()))?
        .levels;
    if levels.len() < 2 {
        return Err(RunError::Config("`convergence.levels`: need at least two levels".into()));
    }
    let chi = cfg.chi()?;
    let mut reports = Vec::with_capacity(levels.len());
    for level in levels {
        let bank = cfg.bank_with(level.sites)?;
        let pot = cfg.potential_on(level.sites)?;
        let opts = cfg.evolve_options_with(level.dt)?;
        chi.check_grid(bank.grid()).map_err(|e| RunError::Config(format!("`convergence.levels`: {e}")))?;
        let pair = gauge_pair(&bank, &pot, &chi, &opts, checks.tolerance("max_dj"), threads)?;
        reports.push(pair.report);
    }

    for r in &reports {
        let tag = format!("N={},dt={:e}", r.sites, r.dt);
        checks.check_named("max_dj", format!("max_dj[{tag}]"), r.max_dj);
        checks.check_named("phase_residual", format!("phase_residual[{tag}]"), r.phase_residual);
        checks.diagnostic(format!("max_drho[{tag}]"), r.max_drho);
    }
    let monotone = reports.windows(2).fold(0.0_f64, |a, w| a.max(w[1].max_dj - w[0].max_dj));
    checks.check("monotone_violation", monotone);
    let last = &reports[reports.len() - 2..];
    checks.check("final_reduction", last[0].max_dj / last[1].max_dj);
    checks.diagnostic("final_phase_reduction", last[0].phase_residual / last[1].phase_residual);

    let details = json!({ "levels": reports });
    Ok(Outcome { summary: Summary::completed(ExperimentKind::Convergence, cfg, checks, details), files: Vec::new() })
}

fn identities(cfg: &ExperimentConfig, mut checks: Checks) -> Result<Outcome, RunError> {
    let bank = cfg.bank()?;
    let pot = cfg.potential()?;
    let opts = cfg.evolve_options()?;
    let (pm, pp) = bank.projectors();
    let id = identity(bank.dimension());
    let phi0 = bank.negative_sea();

    let g_v = bank.vacuum_g();
    checks.check_named("projector_algebra", "p_minus_idempotent".into(), max_abs_diff(&(&pm * &pm), &pm));
    checks.check_named("projector_algebra", "p_plus_idempotent".into(), max_abs_diff(&(&pp * &pp), &pp));
    checks.check_named("projector_algebra", "projectors_orthogonal".into(), max_abs(&(&pm * &pp)));
    checks.check_named("projector_algebra", "projectors_complete".into(), max_abs_diff(&(&pm + &pp), &id));
    checks.check_named("projector_algebra", "vacuum_g_involution".into(), max_abs_diff(&(&g_v * &g_v), &id));

    let q0 = build_q(&phi0, &phi0);
    let initial = appendix_audit(&q0, &pm, &pp)?;
    checks.check_named("initial_two_point", "initial_appendix".into(), initial.max());
    checks.check_named("initial_two_point", "initial_r_equals_2p_minus".into(), max_abs_diff(&build_r(&q0), &(&pm * C64::new(2.0, 0.0))));
    checks.check_named("initial_two_point", "initial_g_equals_vacuum_g".into(), max_abs_diff(&build_g(&q0, &pp)?, &g_v));

    let mut worst = dgl_core::twopoint::ResidualReport::default();
    let mut g_hermiticity = 0.0_f64;
    let mut snapshots = 0usize;
    evolve_sea_observed(&bank, &pot, &opts, |_, t, phi| {
        let state = TwoPointState::new(t, phi, &phi0, &pm, &pp)?;
        worst.absorb(&state.residuals);
        g_hermiticity = g_hermiticity.max(state.g_hermiticity);
        snapshots += 1;
        Ok(())
    })?;
    for entry in &worst.entries {
        let key = match entry.name {
            "g_squared_identity" => "g_squared",
            "r_routes_agree" => "r_routes",
            "g_bar_equals_g_adjoint" | "r_hermitian" | "half_r_idempotent" | "half_r_trace" => "two_point_structure",
            _ => "appendix",
        };
        checks.check_named(key, entry.name.to_string(), entry.value);
    }
    checks.diagnostic("g_hermiticity", g_hermiticity);

    let centre = opts.t0 + opts.dt * ((0.5 * (opts.t_end - opts.t0) / opts.dt).round()).max(1.0);
    let coarse = ode_check(&bank, &pot, &opts, centre, opts.dt)?;
    let fine = ode_check(&bank, &pot, &opts, centre, 0.5 * opts.dt)?;
    checks.check("ode_relative", coarse);
    checks.diagnostic("ode_relative_half_step", fine);
    let ratio = coarse / fine;
    checks.check("ode_ratio_low", ratio);
    checks.check("ode_ratio_high", ratio);

    let details = json!({ "potential": pot.provenance(), "snapshots": snapshots, "ode_centre": centre });
    Ok(Outcome { summary: Summary::completed(ExperimentKind::Identities, cfg, checks, details), files: Vec::new() })
}

/// Relative residual of the `G` equation of motion at `centre`, using the
/// snapshots one step either side.
fn ode_check(bank: &ModeBank, pot: &EMPotential, base: &EvolveOptions, centre: f64, dt: f64) -> Result<f64, RunError> {
    let (_, pp) = bank.projectors();
    let phi0 = bank.negative_sea();
    let opts = EvolveOptions::new(base.t0, centre + dt, dt).every(1).with_coupling(base.coupling);
    let total = opts.step_count()?;
    let mut gs = Vec::with_capacity(3);
    evolve_sea_observed(bank, pot, &opts, |step, _, phi| {
        if step + 2 >= total {
            gs.push(build_g(&build_q(phi, &phi0), &pp)?);
        }
        Ok(())
    })?;
    let h = hamiltonian_with(bank, pot, centre, base.coupling)?;
    let r = ode_residual(&gs[0], &gs[1], &gs[2], &h, dt);
    Ok(r.absolute / r.scale)
}

fn canonical_demo(cfg: &ExperimentConfig, mut checks: Checks) -> Result<Outcome, RunError> {
    let bank = cfg.bank()?;
    let opts = cfg.evolve_options()?;
    let chi = cfg.chi()?;
    chi.check_grid(bank.grid()).map_err(|e| RunError::Config(format!("`chi`: {e}")))?;
    let selection = FockSpace::lowest_momentum_pairs(&bank, cfg.canonical.modes)
        .map_err(|e| RunError::Config(format!("`canonical.modes`: {e}")))?;
    let space = FockSpace::new(&bank, &selection).map_err(|e| RunError::Config(format!("`canonical.modes`: {e}")))?;

    let ac = space.anticommutator_residuals();
    checks.check_named("anticommutator", "anticommutator_mixed".into(), ac.mixed);
    checks.check_named("anticommutator", "anticommutator_same".into(), ac.same);

    if cfg.canonical.modes <= dgl_core::canonical::MAX_DENSE_MODES {
        let (values, vectors) = hermitian_eigh(&space.free_hamiltonian_full()?);
        checks.check("ground_energy", values[0].abs());
        let sea_weight = vectors[(space.vacuum_ket() as usize, 0)].norm_sqr();
        checks.check("ground_state_defect", 1.0 - sea_weight);
        checks.check("spectral_gap", values[1] - values[0]);
    }

    let thresholds = CounterexampleThresholds {
        energy_witness: checks.tolerance("max_energy"),
        current_witness: checks.tolerance("current_deviation"),
        floor: checks.tolerance("negative_energy"),
    };
    let report = counterexample_report(&space, &chi, &opts, thresholds)?;
    checks.check("max_energy", report.max_energy);
    checks.check("negative_energy", (-report.min_energy).max(0.0));
    checks.check("current_deviation", report.max_current_deviation);
    checks.check("norm_drift", report.max_norm_drift);
    let min_fidelity = report.vacuum_fidelity.iter().copied().fold(1.0, f64::min);
    checks.diagnostic("min_vacuum_fidelity", min_fidelity);

    let details = json!({
        "modes": report.modes,
        "eps_r": space.eps_r(),
        "sector_dimension": space.sector_dimension(),
        "thresholds": report.thresholds,
        "thresholds_are_artifact_choices": true,
        "energy_violation": report.energy_violation,
        "floor_respected": report.floor_respected,
        "current_violation": report.current_violation,
    });
    let files = vec![
        ("counterexample.csv".to_string(), counterexample_csv(&report)),
        ("counterexample.json".to_string(), {
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            text
        }),
    ];
    Ok(Outcome { summary: Summary::completed(ExperimentKind::CanonicalDemo, cfg, checks, details), files })
}

fn cross_oracle_suite(cfg: &ExperimentConfig, mut checks: Checks) -> Result<Outcome, RunError> {
    let bank = cfg.bank()?;
    let opts = cfg.evolve_options()?;
    let space = FockSpace::complete(&bank).map_err(|e| RunError::Config(format!("`grid.sites`: {e}")))?;
    let mut rows = Vec::new();
    for &which in &cfg.cross_oracle.potentials {
        let (name, pot) = match which {
            OraclePotential::Zero => ("zero", EMPotential::zero(cfg.grid.length)?),
            OraclePotential::PureGauge => {
                let chi = if cfg.chi.is_some() { cfg.chi()? } else { cfg.uniform_chi()? };
                let pot = EMPotential::pure_gauge(chi, bank.grid()).map_err(|e| RunError::Config(format!("`chi`: {e}")))?;
                ("pure_gauge", pot)
            }
            OraclePotential::Pulse => ("pulse", cfg.reference_pulse()?),
        };
        let report = cross_oracle(&space, &pot, &opts)?;
        checks.check_named("current_difference", format!("current_difference[{name}]"), report.max_current_difference);
        let mut row = json!({ "potential": name, "report": report });
        if cfg.cross_oracle.refine {
            let half = opts.every(2 * opts.snapshot_every);
            let half = EvolveOptions { dt: 0.5 * opts.dt, ..half };
            let fine = cross_oracle(&space, &pot, &half)?;
            checks.diagnostic(format!("current_difference_half_step[{name}]"), fine.max_current_difference);
            row["half_step"] = json!(fine);
        }
        rows.push(row);
    }
    let details = json!({ "modes": space.mode_count(), "sector_dimension": space.sector_dimension(), "potentials": rows });
    Ok(Outcome { summary: Summary::completed(ExperimentKind::CrossOracle, cfg, checks, details), files: Vec::new() })
}
