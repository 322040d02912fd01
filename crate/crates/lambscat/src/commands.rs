//! Command implementations behind the CLI: analyze, simulate, scatter, lp.
//!
//! Every command reads one [`RunConfig`], writes CSV/JSON files with fixed
//! formatting (floats at 17 significant digits) into the output directory and
//! returns a serializable report. Identical configs produce byte-identical
//! outputs.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::RunConfig;
use crate::dynamics::{evolve, Trajectory};
use crate::error::{Error, Result};
use crate::model::{gamma, NormalizedModel};
use crate::poly::{
    build_p_closed_form, build_p_vandermonde, classify_roots, find_roots, RootSet,
};
use crate::potential::{GrowthCondition, Potential};
use crate::scattering::{
    build_lp_semigroup, dft_frequencies, dissipativity_min_eigenvalue, incoming_rep,
    lp_evolve_check, outgoing_rep, scattering_relation_error, translation_covariance_check,
    TransferFunction, TranslationRep,
};
use crate::spectral::{point_spectrum, pp_empty_check, SpectralData};

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_file(dir, name, &text)
}

#[derive(Debug, Serialize)]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexPair {
    fn from(z: Complex64) -> Self {
        ComplexPair { re: z.re, im: z.im }
    }
}

#[derive(Debug, Serialize)]
pub struct RootReport {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    pub class: &'static str,
    /// λ = z² for eigenvalue-type roots.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct PolynomialReport {
    pub degree: usize,
    pub coeffs_closed_form: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs_vandermonde: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vandermonde_error: Option<String>,
    pub max_rel_discrepancy: f64,
}

#[derive(Debug, Serialize)]
pub struct EigenvalueCrossCheck {
    pub from_gamma: Vec<f64>,
    pub from_roots: Vec<f64>,
    pub max_disagreement: f64,
    pub gamma_residuals: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub schema: u32,
    pub model: NormalizedModel,
    pub essential_spectrum: String,
    pub pp_empty: bool,
    pub polynomial: PolynomialReport,
    pub roots: Vec<RootReport>,
    pub point_spectrum: SpectralData,
    pub cross_check: EigenvalueCrossCheck,
}

fn root_reports(roots: &RootSet) -> Vec<RootReport> {
    roots
        .roots
        .iter()
        .map(|r| {
            let class = if r.value.re < 0.0 { "eigenvalue" } else { "resonance" };
            RootReport {
                re: r.value.re,
                im: r.value.im,
                multiplicity: r.multiplicity,
                class,
                lambda: (r.value.re < 0.0).then_some(r.value.re * r.value.re),
            }
        })
        .collect()
}

/// Spectral analysis: boundary polynomial by both constructions, classified
/// roots, point spectrum with cross-check residuals.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<AnalyzeReport> {
    let model = cfg.resolve_model()?;
    let p = build_p_closed_form(&model);
    let (pv, pv_err) = match build_p_vandermonde(&model) {
        Ok(pv) => (Some(pv), None),
        Err(e) => (None, Some(format!("{e}"))),
    };
    let max_rel_discrepancy = match &pv {
        Some(pv) => {
            let scale = p.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
            p.coeffs
                .iter()
                .zip(&pv.coeffs)
                .map(|(a, b)| (a - b).abs() / scale)
                .fold(0.0, f64::max)
        }
        None => f64::NAN,
    };
    let roots = classify_roots(&model, &find_roots(&p)?)?;
    let sd = point_spectrum(&model)?;
    let mut from_roots: Vec<f64> = roots
        .eigen_roots
        .iter()
        .map(|r| r.value.re * r.value.re)
        .collect();
    from_roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut from_gamma = sd.eigenvalues.clone();
    from_gamma.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let max_disagreement = if from_gamma.len() == from_roots.len() {
        from_gamma
            .iter()
            .zip(&from_roots)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let gamma_residuals = sd
        .eigenvalues
        .iter()
        .map(|&l| {
            gamma(&model, Complex64::new(l, 0.0))
                .map(|g| (g + model.theta).norm())
                .unwrap_or(f64::NAN)
        })
        .collect();
    Ok(AnalyzeReport {
        schema: 1,
        essential_spectrum: "(-inf, 0]".into(),
        pp_empty: sd.pp_empty,
        polynomial: PolynomialReport {
            degree: p.degree(),
            coeffs_closed_form: p.coeffs.clone(),
            coeffs_vandermonde: pv.map(|q| q.coeffs),
            vandermonde_error: pv_err,
            max_rel_discrepancy,
        },
        roots: root_reports(&roots),
        point_spectrum: sd,
        cross_check: EigenvalueCrossCheck {
            from_gamma,
            from_roots,
            max_disagreement,
            gamma_residuals,
        },
        model,
    })
}

pub fn write_analyze(report: &AnalyzeReport, dir: &Path) -> Result<()> {
    write_json(dir, "analysis.json", report)
}

#[derive(Debug, Serialize)]
pub struct DecayFitReport {
    pub window: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    pub min_re_root: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_error: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub schema: u32,
    pub state_dim: usize,
    pub polynomial_degree: usize,
    pub energy_initial: f64,
    pub energy_drift: f64,
    pub boundary_residual_max: f64,
    pub decay_fit: DecayFitReport,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_condition: Option<GrowthCondition>,
}

pub struct SimulateOutput {
    pub summary: SimulateSummary,
    pub trajectory: Trajectory,
}

/// Time evolution driven by the `[sim]` block, with optional anharmonic
/// potential from `[nonlinear]`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimulateOutput> {
    let model = cfg.resolve_model()?;
    let data = cfg.resolve_data(&model)?;
    let sim = cfg
        .sim
        .as_ref()
        .ok_or_else(|| Error::Config("simulate needs a [sim] block".into()))?;
    let potential = cfg.resolve_potential(&model)?;
    let growth = potential.as_ref().map(|p| p.growth_condition());
    let pot_dyn: Option<&dyn Potential> = potential.as_ref().map(|p| p as &dyn Potential);
    let traj = evolve(&model, &data, sim.t_final, sim.dt, pot_dyn)?;

    let p = build_p_closed_form(&model);
    let roots = classify_roots(&model, &find_roots(&p)?)?;
    let min_re = roots.min_resonance_decay().unwrap_or(f64::NAN);
    let window = sim
        .decay_window
        .unwrap_or((sim.t_final / 2.0, sim.t_final));
    let slope = traj.decay_fit(window.0, window.1);
    let rel_error = slope.map(|s| ((-s) - min_re).abs() / min_re.abs());
    let summary = SimulateSummary {
        schema: 1,
        state_dim: traj.state_dim,
        polynomial_degree: p.degree(),
        energy_initial: traj.energy_samples.first().map(|(_, e)| e.total).unwrap_or(0.0),
        energy_drift: traj.energy_drift(),
        boundary_residual_max: traj.boundary_residual_max(),
        decay_fit: DecayFitReport {
            window,
            slope,
            min_re_root: min_re,
            rel_error,
        },
        warnings: traj.warnings.clone(),
        growth_condition: growth,
    };
    Ok(SimulateOutput {
        summary,
        trajectory: traj,
    })
}

pub fn write_simulate(cfg: &RunConfig, out: &SimulateOutput, dir: &Path) -> Result<()> {
    let traj = &out.trajectory;
    let n = traj.n();
    if cfg.wants_format("csv") {
        // trajectory rows at the energy sample times
        let mut csv = String::from("t");
        for i in 1..=n {
            write!(csv, ",y{i}").unwrap();
        }
        for i in 1..=n {
            write!(csv, ",ydot{i}").unwrap();
        }
        csv.push_str(",b,E,E_drift\n");
        let e0 = out.summary.energy_initial;
        for (t, e) in &traj.energy_samples {
            let (b, y, yd) = traj.state_at(*t)?;
            csv.push_str(&fmt_f(*t));
            for v in y.iter().chain(yd.iter()) {
                csv.push(',');
                csv.push_str(&fmt_f(*v));
            }
            let drift = if e0 != 0.0 { (e.total - e0).abs() / e0.abs() } else { 0.0 };
            for v in [b, e.total, drift] {
                csv.push(',');
                csv.push_str(&fmt_f(v));
            }
            csv.push('\n');
        }
        write_file(dir, "trajectory.csv", &csv)?;

        let sim = cfg.sim.as_ref().expect("checked in cmd_simulate");
        let mut snap = String::from("t,x,phi,phidot\n");
        let pts = sim.snapshot_points.max(2);
        let xs: Vec<f64> = (0..pts)
            .map(|i| sim.snapshot_x_max * i as f64 / (pts - 1) as f64)
            .collect();
        for &t in &sim.snapshot_times {
            for (x, (phi, phidot)) in xs.iter().zip(traj.field_snapshot(t, &xs)?) {
                for (i, v) in [t, *x, phi, phidot].iter().enumerate() {
                    if i > 0 {
                        snap.push(',');
                    }
                    snap.push_str(&fmt_f(*v));
                }
                snap.push('\n');
            }
        }
        write_file(dir, "snapshots.csv", &snap)?;
    }
    if cfg.wants_format("json") {
        write_json(dir, "summary.json", &out.summary)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ParsevalReport {
    pub energy: f64,
    /// ||f-||² over the full window (incoming run).
    pub norm_sq_f_minus: f64,
    /// ||f+||² over the full window (outgoing run).
    pub norm_sq_f_plus: f64,
    /// |E - ||f-||²| / E, unitarity of the incoming representation.
    pub rel_residual_minus: f64,
    /// |E - ||f+||²| / E, unitarity of the outgoing representation.
    pub rel_residual_plus: f64,
    /// |E - (||f-||²_{[0,X]} + ||f+||²_{[-X,0]})| / E, energy splitting of
    /// the initial data into incoming and outgoing halves.
    pub rel_residual_split: f64,
}

#[derive(Debug, Serialize)]
pub struct ScatterChecks {
    pub schema: u32,
    pub x_max: f64,
    pub h: f64,
    pub truncation_mass: f64,
    pub parseval: ParsevalReport,
    pub dft_relation_error: f64,
    pub covariance_time: f64,
    pub covariance_sup_discrepancy: f64,
}

pub struct ScatterOutput {
    pub checks: ScatterChecks,
    pub rep: TranslationRep,
    pub transfer: Vec<(f64, Complex64)>,
}

/// Translation representations, the scattering multiplier and the full check
/// battery (Parseval, multiplier relation, translation covariance).
pub fn cmd_scatter(cfg: &RunConfig) -> Result<ScatterOutput> {
    let model = cfg.resolve_model()?;
    let data = cfg.resolve_data(&model)?;
    let sc = cfg
        .scatter
        .as_ref()
        .ok_or_else(|| Error::Config("scatter needs a [scatter] block".into()))?;
    let out = outgoing_rep(&model, &data, sc.x_max, sc.h)?;
    let inc = incoming_rep(&model, &data, sc.x_max, sc.h)?;
    let rep = TranslationRep::merged(&out, &inc)?;
    let e = rep.energy;
    let nm = rep.norm_sq_minus_on(-rep.x_max, rep.x_max);
    let np = rep.norm_sq_plus_on(-rep.x_max, rep.x_max);
    let split = out.norm_sq_minus_on(0.0, rep.x_max) + out.norm_sq_plus_on(-rep.x_max, 0.0);
    let rel = |v: f64| if e != 0.0 { (e - v).abs() / e } else { v.abs() };
    let dft_relation_error = scattering_relation_error(&model, &rep)?;
    let covariance_sup_discrepancy =
        translation_covariance_check(&model, &data, sc.covariance_time, sc.x_max, sc.h)?;
    let tf = TransferFunction::new(build_p_closed_form(&model));
    let transfer: Vec<(f64, Complex64)> = dft_frequencies(rep.x_max, rep.h)
        .into_iter()
        .map(|k| (k, tf.eval(k)))
        .collect();
    Ok(ScatterOutput {
        checks: ScatterChecks {
            schema: 1,
            x_max: rep.x_max,
            h: rep.h,
            truncation_mass: rep.truncation_mass,
            parseval: ParsevalReport {
                energy: e,
                norm_sq_f_minus: nm,
                norm_sq_f_plus: np,
                rel_residual_minus: rel(nm),
                rel_residual_plus: rel(np),
                rel_residual_split: rel(split),
            },
            dft_relation_error,
            covariance_time: sc.covariance_time,
            covariance_sup_discrepancy,
        },
        rep,
        transfer,
    })
}

pub fn write_scatter(cfg: &RunConfig, out: &ScatterOutput, dir: &Path) -> Result<()> {
    if cfg.wants_format("csv") {
        let mut reps = String::from("x,f_minus,f_plus\n");
        for (j, x) in out.rep.grid.iter().enumerate() {
            for (i, v) in [*x, out.rep.f_minus[j], out.rep.f_plus[j]].iter().enumerate() {
                if i > 0 {
                    reps.push(',');
                }
                reps.push_str(&fmt_f(*v));
            }
            reps.push('\n');
        }
        write_file(dir, "reps.csv", &reps)?;

        let mut tr = String::from("kappa,re_s,im_s,abs_s\n");
        for (k, s) in &out.transfer {
            for (i, v) in [*k, s.re, s.im, s.norm()].iter().enumerate() {
                if i > 0 {
                    tr.push(',');
                }
                tr.push_str(&fmt_f(*v));
            }
            tr.push('\n');
        }
        write_file(dir, "transfer.csv", &tr)?;
    }
    if cfg.wants_format("json") {
        write_json(dir, "checks.json", &out.checks)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct LpContractionSample {
    pub t: f64,
    pub gram_norm: f64,
    pub max_deviation: f64,
}

#[derive(Debug, Serialize)]
pub struct LpReport {
    pub schema: u32,
    pub polynomial_degree: usize,
    pub dim: usize,
    pub roots: Vec<RootReport>,
    pub generator: Vec<Vec<ComplexPair>>,
    pub gram: Vec<Vec<ComplexPair>>,
    pub dissipativity_min_eigenvalue: f64,
    pub contraction: Vec<LpContractionSample>,
}

/// The finite-dimensional semigroup data: generator, gram matrix and
/// contraction-norm samples on a t-grid.
pub fn cmd_lp(cfg: &RunConfig) -> Result<LpReport> {
    let model = cfg.resolve_model()?;
    if !pp_empty_check(&model) {
        let eigenvalues = point_spectrum(&model)?.eigenvalues;
        return Err(Error::PointSpectrumPresent { eigenvalues });
    }
    let p = build_p_closed_form(&model);
    let roots = classify_roots(&model, &find_roots(&p)?)?;
    let sg = build_lp_semigroup(&roots)?;
    let mut contraction = Vec::new();
    for k in 0..=20 {
        let t = k as f64 * 0.5;
        let chk = lp_evolve_check(&sg, t)?;
        contraction.push(LpContractionSample {
            t,
            gram_norm: chk.gram_norm,
            max_deviation: chk.max_deviation,
        });
    }
    let as_rows = |m: &[Complex64]| -> Vec<Vec<ComplexPair>> {
        (0..sg.dim)
            .map(|i| (0..sg.dim).map(|j| m[i * sg.dim + j].into()).collect())
            .collect()
    };
    Ok(LpReport {
        schema: 1,
        polynomial_degree: p.degree(),
        dim: sg.dim,
        roots: root_reports(&roots),
        generator: as_rows(&sg.generator),
        gram: as_rows(&sg.gram),
        dissipativity_min_eigenvalue: dissipativity_min_eigenvalue(&sg),
        contraction,
    })
}

pub fn write_lp(report: &LpReport, dir: &Path) -> Result<()> {
    write_json(dir, "lp.json", report)
}
