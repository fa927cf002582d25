//! Subcommand pipelines. Each one computes every artifact in memory first,
//! so a failing run leaves nothing behind.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sglab::diophantine::{
    check_condition_a, check_condition_b, construct_failing_subsequence, small_divisors, DiophantineReport,
    FailingSubsequence, ModelSequence, SubsequenceOutcome,
};
use sglab::evolution::{
    counterexample_hypoellipticity, counterexample_solvability, decay_classify, solve_using, CoefficientField,
    DecayReport, DecaySamples, EvolutionProblem, SparseField,
};
use sglab::grid::{assemble_operator, direct_norm, Grid};
use sglab::io::{
    decay_table, diophantine_table, eigenvalues_table, encode_eig, format_real, render_svg, smalldiv_table,
    solve_table, weyl_table, Axes, CsvTable, Scale, Series,
};
use sglab::linalg::symmetric_eigenvalues;
use sglab::spectral::{
    eigendecompose, reference_resolution, series_norm, synthesize, two_resolution_window, weyl_fit,
    weyl_fit_sequence, CoefficientVector, EigenDecomposition, NORM_EQUIVALENCE_BOUND,
};
use sglab::{Error, Result};

use crate::config::{CounterexampleMode, Forcing, RunConfig, SequenceChoice, WeylMode};

/// Relative tolerance of the two-resolution agreement window.
const WINDOW_TOLERANCE: f64 = 0.01;
/// Rows of the small-divisor table written by `diophantine`.
const SMALLDIV_ROWS: u64 = 1000;
/// Highest time frequency of seeded forcing terms.
const FORCING_BAND: i64 = 3;

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: Vec<String>,
}

impl Outcome {
    fn csv(&mut self, name: &str, table: &CsvTable) {
        self.artifacts.push(Artifact {
            name: name.into(),
            bytes: table.to_bytes(),
        });
    }

    fn svg(&mut self, enabled: bool, name: &str, series: &[Series], axes: Axes) -> Result<()> {
        if enabled {
            self.artifacts.push(Artifact {
                name: name.into(),
                bytes: render_svg(series, &axes)?.into_bytes(),
            });
        }
        Ok(())
    }

    fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }
}

fn axes(title: &str, x: &str, y: &str, scale: Scale) -> Axes {
    Axes {
        title: title.into(),
        x_label: x.into(),
        y_label: y.into(),
        x_scale: scale,
        y_scale: scale,
    }
}

fn measured(config: &RunConfig) -> Result<(Grid, EigenDecomposition)> {
    let grid = config.grid();
    let eig = eigendecompose(&assemble_operator(&grid, config.spec))?;
    Ok((grid, eig))
}

pub fn spectrum(config: &RunConfig, svg: bool) -> Result<Outcome> {
    let (_, eig) = measured(config)?;
    let mut out = Outcome::default();
    out.csv("eigenvalues.csv", &eigenvalues_table(&eig));
    out.artifacts.push(Artifact {
        name: "spectrum.sgarc".into(),
        bytes: encode_eig(&eig, None),
    });
    let points: Vec<(f64, f64)> = eig
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, &l)| ((i + 1) as f64, l))
        .collect();
    out.svg(
        svg,
        "spectrum.svg",
        &[Series {
            label: "eigenvalues".into(),
            points,
        }],
        axes("Spectrum", "j", "lambda_j", Scale::Log),
    )?;
    out.note(format!("dimension {}", eig.dim()));
    out.note(format!("trusted_count {}", eig.trusted_count()));
    out.note(format!("lambda_1 {}", format_real(eig.eigenvalue(1))));
    out.note(format!("orthonormality_defect {:.3e}", eig.orthonormality_defect()));
    Ok(out)
}

pub fn weyl(config: &RunConfig, svg: bool) -> Result<Outcome> {
    let mut out = Outcome::default();
    let (lambdas, fit, logcorrected) = match config.weyl_mode {
        WeylMode::Synthetic { exponent, count } => {
            let lambdas: Vec<f64> = (1..=count).map(|j| (j as f64).powf(exponent)).collect();
            let hi = config.j_hi.unwrap_or(count);
            let fit = weyl_fit_sequence(&lambdas, config.j_lo..=hi, exponent)?;
            out.note(format!("synthetic sequence j^{exponent}"));
            (lambdas, fit, false)
        }
        WeylMode::Measured => {
            let (_, eig) = measured(config)?;
            let (l_ref, n_ref) = reference_resolution(config.half_width, config.points);
            let reference = assemble_operator(&Grid::new(l_ref, n_ref)?, config.spec);
            let ref_values = symmetric_eigenvalues(reference.matrix(), reference.dim())?;
            let window = two_resolution_window(&eig, &ref_values, WINDOW_TOLERANCE);
            let hi = config.j_hi.unwrap_or(window);
            if hi > window {
                return Err(Error::Range(format!(
                    "j_hi = {hi} exceeds the certified window of {window} modes"
                )));
            }
            out.note(format!("reference resolution L = {l_ref}, N = {n_ref}"));
            out.note(format!("certified window {window}"));
            let fit = weyl_fit(&eig, config.spec, config.j_lo..=hi)?;
            let logcorrected = config.spec.m() == config.spec.mu();
            (eig.eigenvalues().to_vec(), fit, logcorrected)
        }
    };
    let table = weyl_table(&lambdas, &fit, logcorrected);
    out.csv("weyl.csv", &table);
    let data: Vec<(f64, f64)> = (fit.j_lo..=fit.j_hi).map(|j| (j as f64, lambdas[j - 1])).collect();
    let law: Vec<(f64, f64)> = (fit.j_lo..=fit.j_hi).map(|j| (j as f64, fit.fitted(j, logcorrected))).collect();
    out.svg(
        svg,
        "weyl.svg",
        &[
            Series {
                label: "lambda_j".into(),
                points: data,
            },
            Series {
                label: "fit".into(),
                points: law,
            },
        ],
        axes("Eigenvalue growth", "j", "lambda_j", Scale::Log),
    )?;
    out.note(format!("fit range [{}, {}]", fit.j_lo, fit.j_hi));
    out.note(format!("slope_plain {}", format_real(fit.slope_plain)));
    out.note(format!("slope_logcorrected {}", format_real(fit.slope_logcorrected)));
    out.note(format!("predicted_exponent {}", format_real(fit.predicted_exponent)));
    Ok(out)
}

pub fn norms(config: &RunConfig, svg: bool) -> Result<Outcome> {
    let (grid, eig) = measured(config)?;
    let trusted = eig.trusted_count();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut table = CsvTable::new(&["vector", "series_norm", "direct_norm", "ratio"]);
    let mut ratios = Vec::new();
    let mut row = |label: String, coefficients: CoefficientVector| -> Result<()> {
        let v: Vec<f64> = synthesize(&coefficients, &eig)?.iter().map(|c| c.re).collect();
        let series = series_norm(&coefficients, &eig, 1)?;
        let direct = direct_norm(&v, 2, 2, &grid)?;
        let ratio = if direct > 0.0 { series / direct } else { f64::NAN };
        let ratio_cell = if ratio.is_nan() { String::new() } else { format_real(ratio) };
        table.push(vec![label, format_real(series), format_real(direct), ratio_cell]);
        if ratio.is_finite() {
            ratios.push(ratio);
        }
        Ok(())
    };
    row("zero".into(), CoefficientVector::from_real(&vec![0.0; trusted]))?;
    row("phi_1".into(), CoefficientVector::unit(1, trusted))?;
    for i in 0..config.vectors {
        let c: Vec<f64> = (0..trusted).map(|_| rng.gen_range(-1.0..1.0)).collect();
        row(format!("random_{}", i + 1), CoefficientVector::from_real(&c))?;
    }
    let sweep = &ratios[1..];
    let lo = sweep.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sweep.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = Outcome::default();
    out.csv("norms.csv", &table);
    let points: Vec<(f64, f64)> = sweep.iter().enumerate().map(|(i, &r)| ((i + 1) as f64, r)).collect();
    out.svg(
        svg,
        "norms.svg",
        &[Series {
            label: "series / direct".into(),
            points,
        }],
        axes("Norm ratio", "vector", "ratio", Scale::Linear),
    )?;
    out.note(format!("seed {}", config.seed));
    out.note(format!("trusted modes {trusted}"));
    if !sweep.is_empty() {
        out.note(format!("ratio range [{}, {}]", format_real(lo), format_real(hi)));
        let c = NORM_EQUIVALENCE_BOUND;
        out.note(format!("within [1/c, c] for c = {c}: {}", lo >= 1.0 / c && hi <= c));
    }
    Ok(out)
}

fn scan_sequence(config: &RunConfig) -> Result<ModelSequence> {
    match &config.sequence {
        SequenceChoice::Model(m) => Ok(m.clone()),
        SequenceChoice::Measured => Ok(ModelSequence::measured(&measured(config)?.1)),
    }
}

fn report_notes(out: &mut Outcome, name: &str, report: &DiophantineReport) {
    out.note(format!("condition {name}: {}", report.verdict.label()));
    for e in &report.epsilons {
        out.note(format!(
            "  epsilon {}: C = {}, C(j >= 10) = {}",
            e.epsilon,
            format_real(e.constant),
            format_real(e.asymptotic_constant)
        ));
    }
    if report.resonance_count > 0 {
        out.note(format!("  resonant indices: {}", report.resonance_count));
    }
}

fn subsequence_table(s: &FailingSubsequence) -> CsvTable {
    let mut t = CsvTable::new(&["k", "j", "tau", "constant", "log10_gap_bound", "certified"]);
    for e in &s.entries {
        t.push(vec![
            e.k.to_string(),
            e.j.to_string(),
            e.tau.to_string(),
            format_real(e.constant),
            format_real(e.log10_gap_bound()),
            e.certified().to_string(),
        ]);
    }
    t
}

pub fn diophantine(config: &RunConfig, svg: bool) -> Result<Outcome> {
    let alpha = config.alpha.build()?;
    let seq = scan_sequence(config)?;
    let j_max = match &seq {
        ModelSequence::Measured(v) => config.j_max.min(v.len() as u64),
        _ => config.j_max,
    };
    let a = check_condition_a(&alpha, &seq, j_max, &config.epsilons)?;
    let b = check_condition_b(&alpha, &seq, j_max, &config.epsilons)?;
    let mut out = Outcome::default();
    out.note(format!("alpha {}", alpha.describe()));
    out.note(format!("j_max {j_max}{}", if a.indicative { " (indicative)" } else { "" }));
    report_notes(&mut out, "A", &a);
    report_notes(&mut out, "B", &b);
    out.csv("diophantine_A.csv", &diophantine_table(&a));
    out.csv("diophantine_B.csv", &diophantine_table(&b));
    let table = small_divisors(config.omega, &seq, j_max.min(SMALLDIV_ROWS))?;
    out.csv("smalldiv.csv", &smalldiv_table(&table));
    match construct_failing_subsequence(&alpha, config.k) {
        Ok(SubsequenceOutcome::Subsequence(s)) => {
            out.note(format!("failing subsequence of length {}", s.entries.len()));
            out.csv("subsequence.csv", &subsequence_table(&s));
        }
        Ok(SubsequenceOutcome::ResonanceDominated { period }) => {
            out.note(format!("failing subsequence: every multiple of {period} is resonant"));
        }
        Err(e) => out.note(format!("failing subsequence: {e}")),
    }
    let trail: Vec<(f64, f64)> = a
        .epsilons
        .last()
        .map(|e| e.trail.iter().filter(|(w, _)| w.gap > 0.0).map(|(w, _)| (w.j as f64, w.gap)).collect())
        .unwrap_or_default();
    out.svg(
        svg,
        "diophantine.svg",
        &[Series {
            label: "record gaps".into(),
            points: trail,
        }],
        axes("Record small gaps", "j", "|tau - alpha lambda_j|", Scale::Log),
    )?;
    Ok(out)
}

fn forcing_field(config: &RunConfig, lambdas: &[f64]) -> CoefficientField {
    let grid = config.time;
    let modes = lambdas.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut freq = CoefficientField::zeros(grid, modes, sglab::evolution::Domain::Frequency);
    let band = match config.forcing {
        Forcing::Synthetic => FORCING_BAND,
        _ => grid.max_frequency() / 2,
    };
    for (j, &lambda) in lambdas.iter().enumerate() {
        match config.forcing {
            Forcing::Zero => {}
            Forcing::Synthetic | Forcing::Random => {
                let scale = if config.forcing == Forcing::Synthetic {
                    (-lambda.sqrt()).exp()
                } else {
                    1.0
                };
                for k in -band..=band {
                    let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    let idx = grid.index_of(k).expect("band inside grid");
                    freq.row_mut(j)[idx] = scale * c;
                }
            }
            Forcing::Resonant => {
                let z = config.omega * lambda;
                let k = -z.re.round();
                if z.im.abs() <= 1e-12 && (z.re + k).abs() <= 1e-12 {
                    if let Some(idx) = grid.index_of(k as i64) {
                        freq.row_mut(j)[idx] = Complex64::new(1.0, 0.0);
                    }
                }
            }
        }
    }
    freq.to_time()
}

fn classify_or_note(out: &mut Outcome, samples: Result<DecaySamples>, m_max: f64, what: &str) -> Result<DecayReport> {
    let report = samples.and_then(|s| decay_classify(&s, m_max));
    match &report {
        Ok(r) => out.note(format!("{what}: {}", r.verdict.label())),
        Err(Error::InsufficientData { usable, required }) => {
            out.note(format!("{what}: not classified ({usable} usable modes, {required} required)"))
        }
        Err(_) => {}
    }
    report
}

pub fn solve(config: &RunConfig, svg: bool) -> Result<Outcome> {
    let lambdas: Vec<f64> = match &config.lambdas {
        Some(l) => l.clone(),
        None => {
            let (_, eig) = measured(config)?;
            if config.modes > eig.trusted_count() {
                return Err(Error::Range(format!(
                    "modes = {} exceeds the {} trusted eigenpairs",
                    config.modes,
                    eig.trusted_count()
                )));
            }
            eig.trusted_eigenvalues()[..config.modes].to_vec()
        }
    };
    let rhs = forcing_field(config, &lambdas);
    let problem = EvolutionProblem::new(config.omega, lambdas.clone(), rhs.clone())?;
    let (u, report) = solve_using(&problem, config.strategy)?;
    let mut out = Outcome::default();
    out.note(format!("seed {}", config.seed));
    out.note(format!("modes {}, T = {}", lambdas.len(), config.time.points()));
    out.note(format!("resonant modes {}", report.resonances.len()));
    out.note(format!("residuals within bounds: {}", report.residuals_within_bounds()));
    if let Some((lo, hi)) = report.theta_range {
        out.note(format!("theta range [{}, {}]", format_real(lo), format_real(hi)));
    }
    out.csv("solve.csv", &solve_table(&report));
    let f_report = classify_or_note(
        &mut out,
        DecaySamples::from_field(&rhs, &lambdas, &config.gamma_list),
        config.m_max,
        "forcing",
    );
    let u_report = classify_or_note(
        &mut out,
        DecaySamples::from_field(&u, &lambdas, &config.gamma_list),
        config.m_max,
        "solution",
    );
    for (name, r) in [("decay_f.csv", f_report), ("decay.csv", u_report)] {
        match r {
            Ok(r) => out.csv(name, &decay_table(&r)),
            Err(Error::InsufficientData { .. }) => out.csv(name, &CsvTable::new(&["gamma", "slope", "ci_low", "ci_high", "verdict"])),
            Err(e) => return Err(e),
        }
    }
    let sup = |field: &CoefficientField| -> Vec<(f64, f64)> {
        let time = field.to_time();
        lambdas
            .iter()
            .enumerate()
            .map(|(j, &l)| (l, time.row(j).iter().fold(0.0f64, |m, v| m.max(v.norm()))))
            .filter(|&(_, s)| s > 0.0)
            .collect()
    };
    out.svg(
        svg,
        "solve.svg",
        &[
            Series {
                label: "sup |f_j|".into(),
                points: sup(&rhs),
            },
            Series {
                label: "sup |u_j|".into(),
                points: sup(&u),
            },
        ],
        axes("Mode amplitudes", "lambda_j", "sup_t", Scale::Log),
    )?;
    Ok(out)
}

fn witnesses(config: &RunConfig) -> Result<FailingSubsequence> {
    let alpha = config.alpha.build()?;
    match construct_failing_subsequence(&alpha, config.k)? {
        SubsequenceOutcome::Subsequence(s) => Ok(s),
        SubsequenceOutcome::ResonanceDominated { period } => Err(Error::Certification(format!(
            "{} is rational (every multiple of {period} is resonant); no failing subsequence exists",
            alpha.describe()
        ))),
    }
}

fn log10(ln: f64) -> f64 {
    ln / std::f64::consts::LN_10
}

fn sparse_series(label: &str, field: &SparseField) -> Series {
    Series {
        label: label.into(),
        points: field.tracks.iter().map(|t| (t.ln_lambda, t.ln_modulus)).collect(),
    }
}

pub fn counterexample(config: &RunConfig, svg: bool) -> Result<Outcome> {
    let w = witnesses(config)?;
    let mut out = Outcome::default();
    out.note(format!("alpha {}", w.alpha));
    match config.counterexample {
        CounterexampleMode::Hypoellipticity => {
            let c = counterexample_hypoellipticity(&w)?;
            let mut t = CsvTable::new(&["k", "j", "tau", "u_modulus", "log10_f_sup", "residual", "gap_bound_holds"]);
            for (i, (ut, ft)) in c.u.tracks.iter().zip(&c.f.tracks).enumerate() {
                let modulus = ut.sample(config.time).iter().fold(0.0f64, |m, v| m.max(v.norm()));
                t.push(vec![
                    (i + 1).to_string(),
                    ut.j.to_string(),
                    ut.tau.to_string(),
                    format_real(modulus),
                    format_real(log10(ft.ln_modulus)),
                    c.residuals[i].to_string(),
                    c.gap_bounds_hold[i].to_string(),
                ]);
            }
            out.csv("counterexample.csv", &t);
            let f = c.f.classify(config.m_max)?;
            let u = c.u.classify(config.m_max)?;
            out.csv("decay_f.csv", &decay_table(&f));
            out.csv("decay_u.csv", &decay_table(&u));
            out.note(format!("exact identity Lu = f: {}", c.exact_identity()));
            out.note(format!("max ||u_j| - 1| on the grid: {:.3e}", c.unit_modulus_defect(config.time)));
            out.note(format!("forcing slope {} ({})", format_real(f.slopes[0].slope), f.verdict.label()));
            out.note(format!("solution: {}", u.verdict.label()));
            out.svg(
                svg,
                "counterexample.svg",
                &[sparse_series("log |f_j|", &c.f), sparse_series("log |u_j|", &c.u)],
                axes("Hypoellipticity counterexample", "log lambda_j", "log sup_t", Scale::Linear),
            )?;
        }
        CounterexampleMode::Solvability => {
            let c = counterexample_solvability(&w, config.l_max, config.m_cert)?;
            let mut header = vec!["ell".to_string(), "log10_j".into(), "witnessed".into(), "ln_pairing".into()];
            header.extend((0..=config.m_cert).map(|m| format!("ln_value_M{m}")));
            let mut t = CsvTable {
                header,
                rows: Vec::new(),
            };
            for r in &c.rows {
                let mut row = vec![
                    r.ell.to_string(),
                    r.decimal_exponent.to_string(),
                    r.witnessed.to_string(),
                    format_real(r.ln_pairing),
                ];
                row.extend(r.ln_values.iter().map(|&v| format_real(v)));
                t.push(row);
            }
            out.csv("certificate.csv", &t);
            let mut ft = CsvTable::new(&["ell", "j", "tau", "log10_f_sup", "log10_u_sup"]);
            for (i, (f, u)) in c.f.tracks.iter().zip(&c.u.tracks).enumerate() {
                ft.push(vec![
                    (i + 1).to_string(),
                    f.j.to_string(),
                    f.tau.to_string(),
                    format_real(log10(f.ln_modulus)),
                    format_real(log10(u.ln_modulus)),
                ]);
            }
            out.csv("forcing.csv", &ft);
            let f = c.f.classify(config.m_max)?;
            out.csv("decay_f.csv", &decay_table(&f));
            let growth = c.u.growth()?;
            out.note(format!("forcing slope {} ({})", format_real(f.slopes[0].slope), f.verdict.label()));
            out.note(format!("forcing admissible: {}", c.admissible));
            out.note(format!("solution growth super-polynomial: {}", growth.super_polynomial));
            for m in 0..=config.m_cert {
                out.note(format!(
                    "M = {m}: certified increasing for ell > {}: {} ({} steps)",
                    2 * m,
                    c.certified_increasing(m),
                    c.certified_steps(m)
                ));
            }
            let series: Vec<Series> = (0..=config.m_cert)
                .map(|m| Series {
                    label: format!("M = {m}"),
                    points: c.rows.iter().map(|r| (r.ell as f64, r.ln_values[m as usize])).collect(),
                })
                .collect();
            out.svg(
                svg,
                "certificate.svg",
                &series,
                axes("Dual pairing certificate", "ell", "log value", Scale::Linear),
            )?;
        }
    }
    Ok(out)
}
