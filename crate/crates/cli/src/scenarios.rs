//! Scenario runners. Each turns a resolved configuration into a table and
//! the series to plot.

use rayon::prelude::*;

use pdc_core::dynamics::evolve_lossless_in;
use pdc_core::oracles::{mc_summary, FockConfig, FockObservable, FockState, McConfig, McScenario};
use pdc_core::{
    b_correlator, closed_form_ratio, delta_kernel, entanglement_threshold, evolve_lossless,
    evolve_lossy, exact_ratio, exact_threshold, j_squared, qc_ratio, quadrature_moments,
    separability_ratio, total_number, CorrelatorSpec, Extended, GaussianMoments, LossyParams,
    ModeIndex, StatKind, SteadyParams,
};

use crate::config::{range, RunConfig, Scenario};
use crate::error::CliError;
use crate::output::{Cell, Plot, Series, Table};

pub struct Report {
    pub table: Table,
    pub plot: Option<Plot>,
    /// Names of failed self-check suites.
    pub failures: Vec<String>,
}

impl Report {
    fn new(table: Table, plot: Option<Plot>) -> Self {
        Self {
            table,
            plot,
            failures: Vec::new(),
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    match config.scenario {
        Scenario::Steady => steady(config),
        Scenario::Lossy => lossy(config),
        Scenario::Correlators => correlators(config),
        Scenario::Threshold => threshold(config),
        Scenario::SelfCheck => self_check(config),
    }
}

/// Ratio with the empty state mapped to its limit `0`.
fn ratio_or_limit(moments: &GaussianMoments) -> Result<f64, CliError> {
    if total_number(moments) == 0.0 {
        return Ok(0.0);
    }
    Ok(separability_ratio(moments)?.ratio)
}

/// Lossless state plus its ratio, with `⟨J²⟩` taken from double-double
/// moments so that large gains keep their cancellation.
fn lossless_point(r: f64, n0: f64, stat: StatKind) -> Result<(GaussianMoments, f64), CliError> {
    let params = SteadyParams::new(r, n0, stat)?;
    let extended = evolve_lossless_in::<Extended>(&params)?;
    let moments = extended.to_f64();
    let n = total_number(&extended);
    let ratio = if n == 0.0 {
        0.0
    } else {
        j_squared(&extended) / n
    };
    Ok((moments, ratio))
}

fn classical_noise(config: &RunConfig) -> Result<Option<f64>, CliError> {
    if config.text("n0_classical")? == "matched" {
        return Ok(None);
    }
    config.positive("n0_classical").map(Some)
}

fn steady(config: &RunConfig) -> Result<Report, CliError> {
    let sweep = config.choice("sweep", &["r", "n0"])?;
    let fixed_noise = classical_noise(config)?;
    let points: Vec<(f64, f64)> = if sweep == "r" {
        let n0 = config.non_negative("n0")?;
        range(config, "r", false)?
            .into_iter()
            .map(|r| (r, n0))
            .collect()
    } else {
        let r = config.non_negative("r")?;
        range(config, "n0", false)?
            .into_iter()
            .map(|n0| (r, n0))
            .collect()
    };

    let rows = points
        .par_iter()
        .map(|&(r, n0)| {
            let n0c = fixed_noise.unwrap_or(n0 + 0.5);
            let (q, ratio_q) = lossless_point(r, n0, StatKind::Quantum)?;
            let (c, ratio_c) = lossless_point(r, n0c, StatKind::Classical)?;
            let pair = |m: &GaussianMoments| m.pair_amplitude(ModeIndex::AH, ModeIndex::BV).norm();
            let entangled = total_number(&q) > 0.0 && ratio_q < 0.5;
            Ok(vec![
                Cell::Real(if sweep == "r" { r } else { n0 }),
                Cell::Real(q.occupation(ModeIndex::AH)),
                Cell::Real(c.occupation(ModeIndex::AH)),
                Cell::Real(pair(&q)),
                Cell::Real(pair(&c)),
                Cell::Real(ratio_q),
                Cell::Real(ratio_c),
                Cell::Int(entangled as i64),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table::new(&[
        sweep,
        "n_quantum",
        "n_classical",
        "A_quantum",
        "A_classical",
        "ratio_quantum",
        "ratio_classical",
        "entangled",
    ]);
    table.rows = rows;
    let plot = table.plot(0, &[5, 6], "<J^2>/<N>");
    Ok(Report::new(table, Some(plot)))
}

fn lossy(config: &RunConfig) -> Result<Report, CliError> {
    let quantum = LossyParams {
        kappa0: config.non_negative("kappa0")?,
        coupling_decay: config.non_negative("coupling_decay")?,
        loss_rate: config.non_negative("loss_rate")?,
        n0: config.non_negative("n0")?,
        t_max: config.positive("t_max")?,
        dt: config.positive("dt")?,
        stat: StatKind::Quantum,
    };
    if quantum.dt > quantum.t_max {
        return Err(config.invalid("dt", format!("must not exceed t_max ({})", quantum.t_max)));
    }
    let classical = quantum.with_stat(StatKind::Classical, config.positive("n0_classical")?);
    let t_stride = config.positive("t_stride")?;

    let (q, c) = rayon::join(|| evolve_lossy(&quantum), || evolve_lossy(&classical));
    let (q, c) = (q?, c?);
    let h = quantum.t_max / quantum.steps() as f64;
    let stride = ((t_stride / h).round() as usize).max(1);

    let mut table = Table::new(&[
        "t",
        "delta_eff",
        "n_q",
        "n_c",
        "ratio_q",
        "ratio_c",
        "total_n_q",
    ]);
    for k in (0..q.len()).step_by(stride) {
        let t = q.times[k];
        table.rows.push(vec![
            Cell::Real(t),
            Cell::Real(delta_kernel(&quantum, t, 0.0)?),
            Cell::Real(q.moments[k].occupation(ModeIndex::AH)),
            Cell::Real(c.moments[k].occupation(ModeIndex::AH)),
            Cell::Real(ratio_or_limit(&q.moments[k])?),
            Cell::Real(separability_ratio(&c.moments[k])?.ratio),
            Cell::Real(total_number(&q.moments[k])),
        ]);
    }
    let plot = table.plot(0, &[4, 5], "<J^2>/<N>");
    Ok(Report::new(table, Some(plot)))
}

/// Largest correlator order; `2n` factors must fit the Wick cap.
const MAX_ORDER: usize = 8;

fn correlators(config: &RunConfig) -> Result<Report, CliError> {
    let n0 = config.non_negative("n0")?;
    let r_values = range(config, "r", false)?;
    let order_max = config.count("order_max")?;
    if order_max > MAX_ORDER {
        return Err(config.invalid(
            "order_max",
            format!("must be ≤ {MAX_ORDER}, got {order_max}"),
        ));
    }
    let family = config.choice("family", &["worst", "single"])?;
    let params = SteadyParams::new(0.0, n0, StatKind::Quantum)?;

    // ratios[n-1][i] is the reported ratio at r_values[i]
    let ratios = (1..=order_max as u32)
        .into_par_iter()
        .map(|n| {
            let specs = if family == "single" {
                vec![CorrelatorSpec::new(n, n, n, n)?]
            } else {
                CorrelatorSpec::all_of_order(n)
            };
            let mut worst: Vec<f64> = vec![1.0; r_values.len()];
            for spec in specs {
                for (i, point) in qc_ratio(&spec, &params, &r_values)?.iter().enumerate() {
                    if (point.ratio - 1.0).abs() >= (worst[i] - 1.0).abs() {
                        worst[i] = point.ratio;
                    }
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>, pdc_core::Error>>()?;

    let mut table = Table::new(&["r", "n", "ratio_qc"]);
    for (i, &r) in r_values.iter().enumerate() {
        for (n, row) in ratios.iter().enumerate() {
            table.rows.push(vec![
                Cell::Real(r),
                Cell::Int(n as i64 + 1),
                Cell::Real(row[i]),
            ]);
        }
    }
    let series = ratios
        .iter()
        .enumerate()
        .map(|(n, row)| Series {
            name: format!("n={}", n + 1),
            points: r_values.iter().copied().zip(row.iter().copied()).collect(),
        })
        .collect();
    let plot = Plot {
        x_label: "r".into(),
        y_label: "ratio_qc".into(),
        series,
    };
    Ok(Report::new(table, Some(plot)))
}

fn threshold(config: &RunConfig) -> Result<Report, CliError> {
    let log = config.choice("spacing", &["linear", "log"])? == "log";
    let mut table = Table::new(&["n0", "r_star", "r_star_exact"]);
    for n0 in range(config, "n0", log)? {
        table.rows.push(vec![
            Cell::Real(n0),
            Cell::Real(entanglement_threshold(n0)?),
            Cell::Real(exact_threshold(n0)?),
        ]);
    }
    let plot = table.plot(0, &[1, 2], "r*");
    Ok(Report::new(table, Some(plot)))
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.value.abs() < self.tolerance
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

const GRID_R: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 3.0];
const GRID_N0: [f64; 5] = [0.0, 0.1, 0.3, 1.0, 5.0];

fn grid_check(
    name: &'static str,
    only_r0: bool,
    reference: fn(&SteadyParams) -> f64,
) -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for stat in [StatKind::Quantum, StatKind::Classical] {
        for &r in GRID_R.iter().filter(|&&r| !only_r0 || r == 0.0) {
            for n0 in GRID_N0 {
                let n0 = if stat == StatKind::Classical {
                    n0 + 0.5
                } else {
                    n0
                };
                let params = SteadyParams::new(r, n0, stat)?;
                let ratio = ratio_or_limit(&evolve_lossless(&params)?)?;
                worst = worst.max(rel(ratio, reference(&params)));
            }
        }
    }
    Ok(Check {
        name,
        value: worst,
        tolerance: 1e-9,
    })
}

fn self_check(config: &RunConfig) -> Result<Report, CliError> {
    let samples = config.count("samples")?;
    let seed: u64 = config.parsed("seed", "an unsigned 64-bit integer")?;
    let mut checks = vec![
        grid_check("wick_vs_closed_form_at_zero_gain", true, closed_form_ratio)?,
        grid_check("wick_vs_moment_closed_form", false, exact_ratio)?,
    ];

    let mut singlet: f64 = 0.0;
    for r in [0.0, 1.0, 3.0, 5.0] {
        let state = evolve_lossless_in::<Extended>(&SteadyParams::new(r, 0.0, StatKind::Quantum)?)?;
        singlet = singlet.max(j_squared(&state).abs());
    }
    checks.push(Check {
        name: "singlet_at_zero_noise",
        value: singlet,
        tolerance: 1e-9,
    });

    let mut threshold_gap: f64 = 0.0;
    for n0 in [0.01, 0.1, 1.0, 10.0] {
        let params = SteadyParams::new(exact_threshold(n0)?, n0, StatKind::Quantum)?;
        threshold_gap =
            threshold_gap.max((ratio_or_limit(&evolve_lossless(&params)?)? - 0.5).abs());
    }
    checks.push(Check {
        name: "moment_threshold_consistency",
        value: threshold_gap,
        tolerance: 1e-8,
    });

    let mut bridge: f64 = 0.0;
    for r in [0.5, 1.0, 2.0] {
        for n0 in [0.0, 0.3, 1.0] {
            let q = evolve_lossless(&SteadyParams::new(r, n0, StatKind::Quantum)?)?;
            let c = evolve_lossless(&SteadyParams::new(r, n0 + 0.5, StatKind::Classical)?)?;
            let (i, j) = (ModeIndex::AH, ModeIndex::BV);
            bridge =
                bridge.max((q.pair_amplitude(i, j).norm() - c.pair_amplitude(i, j).norm()).abs());
        }
    }
    checks.push(Check {
        name: "anomalous_bridge",
        value: bridge,
        tolerance: 1e-12,
    });

    let mut fock: f64 = 0.0;
    let specs = [
        CorrelatorSpec::new(2, 1, 1, 1)?,
        CorrelatorSpec::new(2, 0, 0, 0)?,
    ];
    for r in [0.1, 0.3, 0.5] {
        let state = FockState::evolve(&FockConfig::for_gain(r, 1e-12)?)?;
        let wick = evolve_lossless(&SteadyParams::new(r, 0.0, StatKind::Quantum)?)?;
        fock = fock.max(rel(
            state.expectation(FockObservable::TotalN).value,
            total_number(&wick),
        ));
        for spec in specs {
            let f = state.expectation(FockObservable::BCorrelator(spec)).value;
            fock = fock.max(rel(f, b_correlator(&wick, &spec)?));
        }
    }
    checks.push(Check {
        name: "fock_vs_wick",
        value: fock,
        tolerance: 1e-6,
    });

    let lossy = LossyParams {
        kappa0: 1.0,
        coupling_decay: 0.1,
        loss_rate: 0.1,
        n0: 0.3,
        t_max: 50.0,
        dt: 1e-3,
        stat: StatKind::Quantum,
    };
    let mut lossy_gap: f64 = 0.0;
    for params in [lossy, lossy.with_stat(StatKind::Classical, 0.8)] {
        let trajectory = evolve_lossy(&params)?;
        for k in (0..trajectory.len()).step_by(500) {
            let ode = &trajectory.moments[k];
            let quad = quadrature_moments(&params, trajectory.times[k])?;
            let gap = (*ode.normal() - *quad.normal())
                .max_abs()
                .max((*ode.anomalous() - *quad.anomalous()).max_abs());
            lossy_gap = lossy_gap.max(gap);
        }
    }
    checks.push(Check {
        name: "lossy_rk4_vs_quadrature",
        value: lossy_gap,
        tolerance: 1e-6,
    });

    let mut z_max: f64 = 0.0;
    let mut reproducible = true;
    for (i, r) in [0.0, 0.5, 2.0].into_iter().enumerate() {
        let params = SteadyParams::new(r, 0.8, StatKind::Classical)?;
        let mc = McConfig {
            samples,
            seed: seed.wrapping_add(i as u64),
            scenario: McScenario::Lossless(params),
        };
        let first = mc_summary(&mc)?;
        reproducible &= first == mc_summary(&mc)?;
        let report = separability_ratio(&evolve_lossless(&params)?)?;
        let ratio = first.ratio.expect("classical states are populated");
        for (estimate, exact) in [
            (first.total_n, report.total_n),
            (first.j_squared, report.j_squared),
            (ratio, report.ratio),
        ] {
            z_max = z_max.max(((estimate.mean - exact) / estimate.standard_error).abs());
        }
    }
    checks.push(Check {
        name: "monte_carlo_vs_wick_z",
        value: z_max,
        tolerance: 4.0,
    });
    checks.push(Check {
        name: "monte_carlo_rerun_differs",
        value: if reproducible { 0.0 } else { 1.0 },
        tolerance: 0.5,
    });

    let mut table = Table::new(&["suite", "value", "tolerance", "pass"]);
    let mut failures = Vec::new();
    for check in &checks {
        if !check.passed() {
            failures.push(check.name.to_string());
        }
        table.rows.push(vec![
            Cell::Text(check.name.to_string()),
            Cell::Real(check.value),
            Cell::Real(check.tolerance),
            Cell::Int(check.passed() as i64),
        ]);
    }
    Ok(Report {
        table,
        plot: None,
        failures,
    })
}
