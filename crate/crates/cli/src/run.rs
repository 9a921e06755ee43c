//! The pipelines behind each subcommand. Each returns its files in memory;
//! nothing touches the disk here.

use crate::config::{GridSpec, ModelParams};
use crate::error::{CliError, CliResult, Stage};
use crate::formats::{self, Table};
use crate::output::Artifacts;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use spread_core::analysis::features::peak_plateau;
use spread_core::analysis::{
    coefficient_stats, correlation_hole, ensemble_reduce, fit_bn_linear, fit_bn_power, fit_decay_exponent,
    fit_goe_profile, Baseline, Binning, DecayOptions, FitResult, PeakPlateau,
};
use spread_core::evolution::linear_grid;
use spread_core::hamiltonians::realization_seed;
use spread_core::models::{frm_background, frm_saturation};
use spread_core::special::form_factor_b2;
use spread_core::tridiag::{lanczos_with_basis, KrylovBasis};
use spread_core::{
    build_spin_sector, domain_wall_state, eval_survival, householder_hessenberg, ldos_summary, moments_of_model,
    moments_to_lanczos_with, sample_goe, AutocorrModel, KrylovEvolution, LanczosCoefficients, Precision,
    RecursionOptions, SectorHamiltonian, SpinChainSpec, SpreadComplexitySeries, StateVector,
};

/// Largest dimension for which `--dump-matrix` also writes a CSV copy.
pub const MATRIX_CSV_LIMIT: usize = 64;

/// Default decay-fit window in units of `1/sigma0`.
pub const DECAY_WINDOW: [f64; 2] = [3.0, 20.0];

/// Points of the dense grid the decay fit is evaluated on.
const DECAY_POINTS: usize = 4000;

#[derive(Debug, Clone, Serialize)]
pub struct FitJson {
    pub model: &'static str,
    pub n1: f64,
    pub n2: f64,
    pub rms: f64,
    pub window: [f64; 2],
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature: Option<f64>,
}

impl From<&FitResult> for FitJson {
    fn from(f: &FitResult) -> Self {
        FitJson {
            model: f.model.tag(),
            n1: f.n1,
            n2: f.n2,
            rms: f.rms,
            window: [f.window.0, f.window.1],
            points: f.points,
            curvature: f.curvature,
        }
    }
}

fn fit_json(f: &FitResult) -> FitJson {
    FitJson::from(f)
}

/// A fit or feature as JSON, or `{"error": ...}` when the analysis declined it.
fn outcome<T, J: Serialize>(r: spread_core::Result<T>, f: impl FnOnce(&T) -> J) -> Value {
    match r {
        Ok(v) => serde_json::to_value(f(&v)).expect("serializable"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn peak_json(p: &PeakPlateau) -> Value {
    json!({ "C_peak": p.c_peak, "t_peak": p.t_peak, "C_plateau": p.c_plateau, "ratio": p.ratio })
}

fn series_json(c_bar: f64, f_bar: f64, k: usize) -> Value {
    json!({ "C_bar": c_bar, "F_bar": f_bar, "K": k })
}

/// `C(t) / (b1^2 t^2)` at `t = 0.01 / b1`.
pub fn early_growth_ratio(ev: &KrylovEvolution, b1: f64) -> spread_core::Result<f64> {
    let t = 0.01 / b1;
    let c = ev.series(&[t])?.c[0];
    Ok(c / (b1 * b1 * t * t))
}

// ---------------------------------------------------------------- model

#[derive(Debug, Clone, Serialize)]
pub struct ModelJob {
    #[serde(skip)]
    pub params: ModelParams,
    pub model: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub formal: bool,
    pub precision_bits: Option<usize>,
    pub grid: GridSpec,
    pub window: Option<[f64; 2]>,
}

pub fn run_model(job: &ModelJob) -> CliResult<Artifacts> {
    let model = job.params.build()?;
    if !model.is_amplitude() {
        return run_survival_model(&model, job);
    }
    if job.k == 0 {
        return Err(CliError::Config("--K must be at least 1".into()));
    }
    let precision = job.precision_bits.map_or(Precision::Exact, Precision::Bits);
    let order = (2 * job.k - 1).max(2);
    let mu = moments_of_model(&model, order, precision).stage("models/moments_of_model")?;
    let opts = RecursionOptions { formal: job.formal, precision_bits: job.precision_bits };
    let lc = moments_to_lanczos_with(&mu, job.k, opts).stage("moment-lanczos/moments_to_lanczos")?;
    let mut out = Artifacts::default();
    out.add("coeffs.csv", formats::coeffs_csv(&lc));
    let window = job.window.map(|w| (w[0] as usize, w[1] as usize));
    let power = outcome(fit_bn_power(lc.b(), window), fit_json);
    let linear = outcome(fit_bn_linear(lc.b(), window), fit_json);

    if lc.is_formal() {
        let depth = mu.positive_depth();
        let hankel = mu.hankel_determinants(order / 2).stage("moment-lanczos/hankel_determinants")?;
        let magnitudes: Vec<f64> = lc.b().iter().map(|b| b.abs()).collect();
        out.json(
            "fits.json",
            &json!({
                "formal": true,
                "positive_depth": depth,
                "hankel_determinants": hankel,
                "power_abs_b": outcome(fit_bn_power(&magnitudes, window), fit_json),
                "linear": linear,
            }),
        );
        return Ok(out);
    }

    let ev = KrylovEvolution::new(&lc).stage("krylov-evolution/evolve_amplitudes")?;
    let times = job.grid.times(model.sigma0(), lc.dim())?;
    let series = ev.series(&times).stage("krylov-evolution/spread_complexity")?;
    let avg = ev.long_time_average();
    out.add("series.csv", formats::series_csv(&series));
    out.json("series.json", &series_json(avg.c_bar, avg.f_bar, lc.dim()));
    let early = if lc.dim() > 1 {
        Some(early_growth_ratio(&ev, lc.b1()).stage("krylov-evolution/spread_complexity")?)
    } else {
        None
    };
    out.json(
        "fits.json",
        &json!({
            "formal": false,
            "power": power,
            "linear": linear,
            "peak_plateau": outcome(peak_plateau(&series.times, &series.c), peak_json),
            "early_growth_ratio": early,
            "norm_error": series.norm_error,
        }),
    );
    Ok(out)
}

/// Decay fit of a survival-probability model on a dense grid over `window` (in
/// units of `1/sigma0`).
pub fn survival_decay_fit(model: &AutocorrModel, window: [f64; 2]) -> spread_core::Result<FitResult> {
    let s = model.sigma0();
    let (lo, hi) = (window[0] / s, window[1] / s);
    let times = linear_grid(lo, hi, DECAY_POINTS)?;
    let f = times.iter().map(|&t| eval_survival(model, t)).collect::<spread_core::Result<Vec<_>>>()?;
    let opts = match *model {
        AutocorrModel::FrmSurvival { dim } => DecayOptions {
            baseline: Baseline::Series(
                times.iter().map(|&t| frm_background(dim, t)).collect::<spread_core::Result<_>>()?,
            ),
            envelope: true,
        },
        AutocorrModel::SpinPhenomenological(p) => {
            let n = p.dim as f64;
            let back = times
                .iter()
                .map(|&t| Ok(p.fbar - (1.0 - p.fbar) / (n - 1.0) * form_factor_b2(p.sigma0 * t / n)?))
                .collect::<spread_core::Result<_>>()?;
            DecayOptions { baseline: Baseline::Series(back), envelope: false }
        }
        _ => DecayOptions::default(),
    };
    fit_decay_exponent(&times, &f, (lo, hi), &opts)
}

fn run_survival_model(model: &AutocorrModel, job: &ModelJob) -> CliResult<Artifacts> {
    let dim = match *model {
        AutocorrModel::FrmSurvival { dim } => dim,
        AutocorrModel::SpinPhenomenological(p) => p.dim,
        _ => unreachable!("amplitude models are handled by the caller"),
    };
    let times = job.grid.times(model.sigma0(), dim)?;
    let f = times
        .iter()
        .map(|&t| eval_survival(model, t))
        .collect::<spread_core::Result<Vec<_>>>()
        .stage("models/eval_survival")?;
    let fbar = match *model {
        AutocorrModel::FrmSurvival { dim } => frm_saturation(dim),
        AutocorrModel::SpinPhenomenological(p) => p.fbar,
        _ => unreachable!(),
    };
    let window = job.window.unwrap_or(DECAY_WINDOW);
    let mut out = Artifacts::default();
    out.add(
        "survival.csv",
        formats::csv_table(&["t", "F"], times.iter().zip(&f).map(|(t, f)| vec![formats::num(*t), formats::num(*f)])),
    );
    out.json(
        "fits.json",
        &json!({
            "decay": outcome(survival_decay_fit(model, window), fit_json),
            "decay_window_sigma0_t": window,
            "correlation_hole": outcome(correlation_hole(&times, &f, window[1] / model.sigma0(), fbar), |h| {
                json!({ "F_min": h.f_min, "t_min": h.t_min, "depth": h.depth })
            }),
            "F_bar": fbar,
        }),
    );
    Ok(out)
}

// ---------------------------------------------------------------- ensembles

/// One realization: coefficients, optional Krylov basis, and the matrix.
pub struct Realization {
    pub seed: u64,
    pub ham: SectorHamiltonian,
    pub lc: LanczosCoefficients,
    pub basis: Option<KrylovBasis>,
}

/// Householder at full depth, Lanczos otherwise or when the basis is wanted.
pub fn tridiagonalize(
    ham: &SectorHamiltonian,
    psi: &StateVector,
    k: usize,
    want_basis: bool,
) -> spread_core::Result<(LanczosCoefficients, Option<KrylovBasis>)> {
    if k >= ham.dim() && !want_basis {
        Ok((householder_hessenberg(ham, psi)?, None))
    } else {
        let (lc, basis) = lanczos_with_basis(ham, psi, k.min(ham.dim()))?;
        Ok((lc, want_basis.then_some(basis)))
    }
}

/// Runs `count` realizations on the current rayon pool. Results come back in
/// seed order whatever the scheduling; the first failure in seed order wins.
fn realize<F>(master: u64, count: usize, stage: &'static str, job: F) -> CliResult<Vec<Realization>>
where
    F: Fn(u64) -> spread_core::Result<Realization> + Sync,
{
    let results: Vec<_> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let seed = realization_seed(master, i);
            job(seed).map_err(|e| spread_core::Error::Realization { seed, source: Box::new(e) })
        })
        .collect();
    let mut out = results.into_iter().collect::<spread_core::Result<Vec<_>>>().stage(stage)?;
    out.sort_by_key(|r| r.seed);
    Ok(out)
}

struct EnsembleOutput {
    series: Vec<SpreadComplexitySeries>,
    mean_c: Vec<f64>,
    mean_f: Vec<f64>,
    c_bar: f64,
    f_bar: f64,
}

/// Series for every realization on a shared grid plus their pointwise means.
fn evolve_ensemble(runs: &[Realization], times: &[f64], out: &mut Artifacts) -> CliResult<EnsembleOutput> {
    let per: Vec<_> = runs
        .par_iter()
        .map(|r| -> spread_core::Result<_> {
            let ev = KrylovEvolution::new(&r.lc)?;
            Ok((ev.series(times)?, ev.long_time_average()))
        })
        .collect();
    let per = per.into_iter().collect::<spread_core::Result<Vec<_>>>().stage("krylov-evolution/spread_complexity")?;
    let c = ensemble_reduce(runs.iter().zip(&per).map(|(r, p)| (r.seed, p.0.c.clone())).collect())
        .stage("analysis/ensemble_average")?;
    let f = ensemble_reduce(runs.iter().zip(&per).map(|(r, p)| (r.seed, p.0.f.clone())).collect())
        .stage("analysis/ensemble_average")?;
    let m = per.len() as f64;
    let c_bar = per.iter().map(|p| p.1.c_bar).sum::<f64>() / m;
    let f_bar = per.iter().map(|p| p.1.f_bar).sum::<f64>() / m;
    for (r, p) in runs.iter().zip(&per) {
        out.add(format!("series_s{}.csv", r.seed), formats::series_csv(&p.0));
    }
    out.add("series.csv", formats::series_columns(times, &c.mean, &f.mean));
    out.add(
        "series_stderr.csv",
        formats::csv_table(
            &["t", "C_err", "F_err"],
            times
                .iter()
                .zip(&c.stderr)
                .zip(&f.stderr)
                .map(|((t, c), f)| vec![formats::num(*t), formats::num(*c), formats::num(*f)]),
        ),
    );
    Ok(EnsembleOutput { series: per.into_iter().map(|p| p.0).collect(), mean_c: c.mean, mean_f: f.mean, c_bar, f_bar })
}

fn dump(out: &mut Artifacts, runs: &[Realization], matrix: bool) {
    for r in runs {
        if matrix {
            out.add(format!("hamiltonian_s{}.ksh1", r.seed), formats::matrix_binary(&r.ham.h));
            if r.ham.dim() <= MATRIX_CSV_LIMIT {
                out.add(format!("hamiltonian_s{}.csv", r.seed), formats::matrix_csv(&r.ham.h));
            }
        }
        if let Some(b) = &r.basis {
            out.add(format!("krylov_s{}.ksb1", r.seed), formats::basis_binary(b));
        }
    }
}

/// Pointwise mean of the coefficient profiles over their common length.
fn mean_profile(runs: &[Realization]) -> Vec<f64> {
    let len = runs.iter().map(|r| r.lc.b().len()).min().unwrap_or(0);
    (0..len).map(|i| runs.iter().map(|r| r.lc.b()[i]).sum::<f64>() / runs.len() as f64).collect()
}

// ---------------------------------------------------------------- frm

#[derive(Debug, Clone, Serialize)]
pub struct FrmJob {
    pub dim: usize,
    pub realizations: usize,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub seed: u64,
    pub grid: GridSpec,
    pub dump_matrix: bool,
    pub dump_basis: bool,
}

impl FrmJob {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.realizations as u64).map(|i| realization_seed(self.seed, i)).collect()
    }
}

pub fn run_frm(job: &FrmJob) -> CliResult<Artifacts> {
    if job.dim < 2 {
        return Err(CliError::Config(format!("--dim must be at least 2 for a GOE quench, got {}", job.dim)));
    }
    if job.realizations == 0 {
        return Err(CliError::Config("--realizations must be at least 1".into()));
    }
    let k = job.k.unwrap_or(job.dim).clamp(1, job.dim);
    let runs = realize(job.seed, job.realizations, "matrix-lanczos/tridiagonalize", |seed| {
        let ham = sample_goe(job.dim, seed)?;
        let psi = StateVector::basis(job.dim, 0)?;
        let (lc, basis) = tridiagonalize(&ham, &psi, k, job.dump_basis)?;
        Ok(Realization { seed, ham, lc, basis })
    })?;
    let mut out = Artifacts::default();
    for r in &runs {
        out.add(format!("coeffs_s{}.csv", r.seed), formats::coeffs_csv(&r.lc));
    }
    dump(&mut out, &runs, job.dump_matrix);
    let n = job.dim as f64;
    let sigma0 = (n / 2.0).sqrt();
    let times = job.grid.times(sigma0, k)?;
    let ens = evolve_ensemble(&runs, &times, &mut out)?;
    out.json("series.json", &series_json(ens.c_bar, ens.f_bar, k));
    let profile = mean_profile(&runs);
    let b1_mean = runs.iter().map(|r| r.lc.b1()).sum::<f64>() / runs.len() as f64;
    let per_seed: Vec<Value> = runs
        .iter()
        .zip(&ens.series)
        .map(|(r, s)| {
            json!({
                "seed": r.seed,
                "b1": r.lc.b1(),
                "K": r.lc.dim(),
                "peak_plateau": outcome(peak_plateau(&s.times, &s.c), peak_json),
            })
        })
        .collect();
    out.json(
        "fits.json",
        &json!({
            "goe_profile": outcome(fit_goe_profile(&profile, job.dim, None), fit_json),
            "b1_mean": b1_mean,
            "b1_reference": (n / 2.0).sqrt() + (1.0 / (2.0 * n)).sqrt(),
            "peak_plateau": outcome(peak_plateau(&times, &ens.mean_c), peak_json),
            "correlation_hole": outcome(correlation_hole(&times, &ens.mean_f, DECAY_WINDOW[1] / sigma0, ens.f_bar), |h| {
                json!({ "F_min": h.f_min, "t_min": h.t_min, "depth": h.depth })
            }),
            "per_seed": per_seed,
        }),
    );
    Ok(out)
}

// ---------------------------------------------------------------- spin

#[derive(Debug, Clone, Serialize)]
pub struct SpinJob {
    pub sites: usize,
    pub h: f64,
    pub g: f64,
    pub realizations: usize,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub seed: u64,
    pub grid: GridSpec,
    pub compare: bool,
    pub dump_matrix: bool,
    pub dump_basis: bool,
}

impl SpinJob {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.realizations as u64).map(|i| realization_seed(self.seed, i)).collect()
    }
}

pub fn run_spin(job: &SpinJob) -> CliResult<Artifacts> {
    let mut out = spin_single(job)?;
    if job.compare && job.sites >= 4 {
        let smaller = SpinJob { sites: job.sites - 2, compare: false, ..job.clone() };
        out.nest(&format!("L{}", smaller.sites), spin_single(&smaller)?);
    }
    Ok(out)
}

fn spin_single(job: &SpinJob) -> CliResult<Artifacts> {
    let spec0 = SpinChainSpec { g: job.g, ..SpinChainSpec::new(job.sites, job.h, job.seed) };
    spec0.validate().stage("hamiltonians/build_spin_sector")?;
    if job.realizations == 0 {
        return Err(CliError::Config("--realizations must be at least 1".into()));
    }
    let dim = spec0.sector_dim();
    let k = job.k.unwrap_or(dim).clamp(1, dim);
    let runs = realize(job.seed, job.realizations, "matrix-lanczos/tridiagonalize", |seed| {
        let ham = build_spin_sector(&SpinChainSpec { seed, ..spec0 })?;
        let psi = domain_wall_state(&ham)?;
        let (lc, basis) = tridiagonalize(&ham, &psi, k, job.dump_basis)?;
        Ok(Realization { seed, ham, lc, basis })
    })?;
    let mut out = Artifacts::default();
    for r in &runs {
        out.add(format!("coeffs_s{}.csv", r.seed), formats::coeffs_csv(&r.lc));
    }
    dump(&mut out, &runs, job.dump_matrix);
    let sets: Vec<LanczosCoefficients> = runs.iter().map(|r| r.lc.clone()).collect();
    let stats = coefficient_stats(&sets, Binning::FreedmanDiaconis).stage("analysis/coefficient_stats")?;
    out.add("hist_a.csv", formats::histogram_csv(&stats.hist_a));
    out.add("hist_b.csv", formats::histogram_csv(&stats.hist_b));
    out.json(
        "stats.json",
        &json!({
            "realizations": stats.realizations,
            "binning": "freedman-diaconis",
            "var_a": stats.var_a,
            "var_b": stats.var_b,
            "pooled_var_a": stats.pooled_var_a,
            "pooled_var_b": stats.pooled_var_b,
            "per_realization": runs.iter().zip(&stats.per_realization)
                .map(|(r, p)| json!({ "seed": r.seed, "var_a": p.0, "var_b": p.1, "K": r.lc.dim() }))
                .collect::<Vec<_>>(),
        }),
    );
    let first = &runs[0];
    let sigma0 = ldos_summary(&first.ham, &domain_wall_state(&first.ham).stage("hamiltonians/domain_wall_state")?)
        .stage("hamiltonians/ldos_summary")?
        .sigma0;
    if !(sigma0 > 0.0) {
        return Err(CliError::Config("the domain wall is an eigenstate (g = 0?); nothing evolves".into()));
    }
    let times = job.grid.times(sigma0, k)?;
    let ens = evolve_ensemble(&runs, &times, &mut out)?;
    out.json("series.json", &series_json(ens.c_bar, ens.f_bar, k));
    out.json(
        "fits.json",
        &json!({
            "sigma0": sigma0,
            "dim": dim,
            "peak_plateau": outcome(peak_plateau(&times, &ens.mean_c), peak_json),
            "correlation_hole": outcome(correlation_hole(&times, &ens.mean_f, DECAY_WINDOW[1] / sigma0, ens.f_bar), |h| {
                json!({ "F_min": h.f_min, "t_min": h.t_min, "depth": h.depth })
            }),
        }),
    );
    Ok(out)
}

// ---------------------------------------------------------------- fit

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    Power,
    Linear,
    Goe,
    Decay,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitJob {
    pub input: String,
    #[serde(skip)]
    pub bytes: Vec<u8>,
    pub kind: FitKind,
    pub window: Option<[f64; 2]>,
    pub dim: Option<usize>,
    pub baseline: Option<f64>,
    pub envelope: bool,
}

pub fn run_fit(job: &FitJob) -> CliResult<Artifacts> {
    let table = Table::parse(&job.bytes).map_err(|e| CliError::Config(format!("{}: {e}", job.input)))?;
    let column = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| CliError::Config(format!("{}: no column \"{name}\" in {:?}", job.input, table.header)))
    };
    let index_window = job.window.map(|w| (w[0] as usize, w[1] as usize));
    let fit = match job.kind {
        FitKind::Power | FitKind::Linear | FitKind::Goe => {
            let n = column("n")?;
            let b = column("b_n")?;
            // drop the b_0 = 0 row
            let b: Vec<f64> = n.iter().zip(b).filter(|(n, _)| **n >= 1.0).map(|(_, b)| *b).collect();
            match job.kind {
                FitKind::Power => fit_bn_power(&b, index_window),
                FitKind::Linear => fit_bn_linear(&b, index_window),
                _ => fit_goe_profile(&b, job.dim.unwrap_or(b.len() + 1), index_window),
            }
        }
        FitKind::Decay => {
            let window = job.window.ok_or_else(|| CliError::Config("decay fits need --window LO,HI in t".into()))?;
            let opts = DecayOptions {
                baseline: job.baseline.map_or(Baseline::None, Baseline::Constant),
                envelope: job.envelope,
            };
            fit_decay_exponent(column("t")?, column("F")?, (window[0], window[1]), &opts)
        }
    }
    .stage("analysis/fit")?;
    let mut out = Artifacts::default();
    out.json("fits.json", &json!({ "input": job.input, "fit": FitJson::from(&fit) }));
    Ok(out)
}

// ---------------------------------------------------------------- b2-table

pub const B2_TIMES: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 10.0];

pub fn run_b2_table(times: &[f64]) -> CliResult<Artifacts> {
    let rows = times
        .iter()
        .map(|&t| Ok(vec![formats::num(t), formats::num(form_factor_b2(t)?)]))
        .collect::<spread_core::Result<Vec<_>>>()
        .stage("models/eval_b2")?;
    let mut out = Artifacts::default();
    out.add("b2.csv", formats::csv_table(&["t", "B2"], rows));
    Ok(out)
}
