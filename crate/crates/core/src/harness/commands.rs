//! Configuration-driven entry points behind the command-line subcommands.

use nalgebra::DMatrix;

use crate::arma::{simulate, ArmaModel};
use crate::error::{Error, Result};
use crate::estimator::{fit, FitConfig, FitResult};
use crate::noise::sub_gaussian_sigma;
use crate::param_space::distance;
use crate::theory::{
    burn_in_times, dependency_matrix_markov, empirical_info, expected_info_mc, fisher_info,
    fit_dependency_growth, isometry_event_rates, linearized_offset, martingale_offset,
    mean_square_gap, min_eigenvalue, parameter_error_bound, quad_ident_constant_mc,
    smoothness_constants_mc, taylor_decomposition_check, theorem1_bound, BurnInReport,
    ConstantSet, IsometryConstants, DEFAULT_RATE_CONSTANT,
};

use super::config::{arma_from_kv, class_from_kv, fit_config_from_kv, noise_from_kv, KvConfig};
use super::io::{format_float, TrajectoryData};
use super::seed::derive_seed;

pub type Report = Vec<(String, String)>;

fn float_list(v: &[f64]) -> String {
    v.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(",")
}

struct ReportBuilder(Report);

impl ReportBuilder {
    fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.0.push((key.into(), format_float(v)));
        self
    }
    fn int(&mut self, key: &str, v: usize) -> &mut Self {
        self.0.push((key.into(), v.to_string()));
        self
    }
    fn text(&mut self, key: &str, v: impl ToString) -> &mut Self {
        self.0.push((key.into(), v.to_string()));
        self
    }
}

/// Master seed: the override if given, else `key`, else 0.
fn master_seed(kv: &KvConfig, key: &str, seed: Option<u64>) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None => kv.get_or(key, 0),
    }
}

/// Simulates `simulate.length` samples of the configured ARMA model.
pub fn simulate_from_kv(kv: &KvConfig, seed: Option<u64>) -> Result<TrajectoryData> {
    kv.reject_unknown(&["model.", "noise.", "simulate.", "class.radius", "fit.", "output"])?;
    let params = arma_from_kv(kv)?;
    let noise = noise_from_kv(kv)?;
    let len: usize = kv.require("simulate.length")?;
    if len == 0 {
        return Err(Error::Config("simulate.length must be positive".into()));
    }
    let traj = simulate(&params, &noise, len, master_seed(kv, "simulate.seed", seed)?)?;
    Ok(TrajectoryData { y: traj.y, w: traj.w })
}

/// Model orders from `model.p`/`model.q`, or from the coefficient lists.
pub fn orders_from_kv(kv: &KvConfig) -> Result<ArmaModel> {
    let count = |order: &str, list: &str| -> Result<usize> {
        match kv.get::<usize>(order)? {
            Some(n) => Ok(n),
            None => Ok(kv.list::<f64>(list)?.map_or(0, |v| v.len())),
        }
    };
    let m = ArmaModel::new(count("model.p", "model.ar")?, count("model.q", "model.ma")?);
    if m.p + m.q == 0 {
        return Err(Error::Config("model order is zero; set model.p or model.q".into()));
    }
    Ok(m)
}

pub fn fit_report(model: &ArmaModel, result: &FitResult) -> Report {
    let mut r = ReportBuilder(Vec::new());
    r.int("p", model.p)
        .int("q", model.q)
        .text("theta_hat", float_list(&result.theta_hat))
        .num("loss", result.loss)
        .int("starts_used", result.starts_used)
        .int("iterations_total", result.iterations_total)
        .text("converged", result.converged);
    r.0
}

/// Fits the configured ARMA orders to a trajectory.
pub fn fit_from_kv(kv: &KvConfig, data: &TrajectoryData) -> Result<Report> {
    kv.reject_unknown(&["model.", "noise.", "class.radius", "fit.", "simulate.", "output"])?;
    let model = orders_from_kv(kv)?;
    let class = class_from_kv(kv, model.p + model.q)?;
    let cfg = fit_config_from_kv(kv)?;
    let result = fit(&model, &data.y, &class, &cfg)?;
    Ok(fit_report(&model, &result))
}

pub fn burn_in_report(k: &ConstantSet) -> Result<Report> {
    let b: BurnInReport = burn_in_times(k)?;
    let mut r = ReportBuilder(Vec::new());
    r.num("T1", b.t1)
        .num("T21", b.t21)
        .num("T22", b.t22)
        .num("T23", b.t23)
        .num("T2", b.t2)
        .num("T3", b.t3)
        .num("T0", b.t0)
        .num("C1", b.c1)
        .num("C2", b.c2)
        .num("C3", b.c3)
        .num("C4", b.c4)
        .num("C5", b.c5)
        .text("floored", if b.floored.is_empty() { "none".to_string() } else { b.floored.join(",") });
    Ok(r.0)
}

/// Parses `chain.transition` (rows separated by `;`, entries by `,`).
pub fn transition_from_kv(kv: &KvConfig) -> Result<DMatrix<f64>> {
    let raw = kv
        .raw("chain.transition")
        .ok_or_else(|| Error::Config("missing chain.transition".into()))?;
    let rows: Vec<Vec<f64>> = raw
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("chain.transition: cannot parse `{s}`")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config("chain.transition must be square".into()));
    }
    Ok(DMatrix::from_row_iterator(n, n, rows.into_iter().flatten()))
}

pub const DEPMATRIX_HEADER: [&str; 4] = ["T", "spectral_norm", "spectral_norm_sq", "fitted_bound"];

/// Norm of the dependency matrix over `chain.grid`, with the fitted
/// envelope `b1 T^{b2}` for the squared norm.
pub fn depmatrix_from_kv(kv: &KvConfig) -> Result<Vec<Vec<String>>> {
    kv.reject_unknown(&["chain.", "output"])?;
    let p = transition_from_kv(kv)?;
    let initial: Vec<f64> = match kv.list("chain.initial")? {
        Some(v) => v,
        None => vec![1.0 / p.nrows() as f64; p.nrows()],
    };
    let grid: Vec<usize> = kv
        .list("chain.grid")?
        .ok_or_else(|| Error::Config("missing chain.grid".into()))?;
    let rows = if grid.len() >= 3 {
        let growth = fit_dependency_growth(&p, &initial, &grid)?;
        growth
            .norms
            .iter()
            .map(|&(t, n)| (t, n, growth.b1 * (t as f64).powf(growth.b2)))
            .collect::<Vec<_>>()
    } else {
        grid.iter()
            .map(|&t| {
                let n = dependency_matrix_markov(&p, &initial, t)?.spectral_norm;
                Ok((t, n, f64::NAN))
            })
            .collect::<Result<_>>()?
    };
    Ok(rows
        .into_iter()
        .map(|(t, n, b)| vec![t.to_string(), format_float(n), format_float(n * n), format_float(b)])
        .collect())
}

/// Offsets, information matrices, isometry rates and Monte Carlo
/// assumption constants at one horizon.
pub fn diagnose_from_kv(kv: &KvConfig, seed: Option<u64>) -> Result<Report> {
    kv.reject_unknown(&["model.", "noise.", "class.radius", "fit.", "diagnose.", "output"])?;
    let truth = arma_from_kv(kv)?;
    let noise = noise_from_kv(kv)?;
    let model = ArmaModel::new(truth.p(), truth.q());
    let d = model.p + model.q;
    let class = class_from_kv(kv, d)?;
    let theta_star = truth.theta();
    if !class.contains(&theta_star) {
        return Err(Error::Config("true parameter lies outside the parameter ball".into()));
    }
    let horizon: usize = kv.get_or("diagnose.horizon", 512)?;
    let n_mc: usize = kv.get_or("diagnose.n_mc", 50)?;
    let net_eps: f64 = kv.get_or("diagnose.net_epsilon", 0.2)?;
    let b1: f64 = kv.get_or("diagnose.b1", 1.0)?;
    let b2: f64 = kv.get_or("diagnose.b2", 0.0)?;
    let gamma: f64 = kv.get_or("diagnose.gamma", 0.25)?;
    let c: f64 = kv.get_or("diagnose.bound_c", DEFAULT_RATE_CONSTANT)?;
    if horizon <= d || n_mc < 2 {
        return Err(Error::Config(format!(
            "diagnose.horizon must exceed {d} and diagnose.n_mc must be at least 2"
        )));
    }
    let seed = master_seed(kv, "diagnose.seed", seed)?;

    let traj = simulate(&truth, &noise, horizon, derive_seed(seed, b"diagnose-sim", 0))?;
    let w = traj.w.clone().expect("simulated trajectories carry noise");
    let fit_cfg = FitConfig { truth_start: Some(theta_star.clone()), ..fit_config_from_kv(kv)? };
    let fitted = fit(&model, &traj.y, &class, &fit_cfg)?;
    let theta_hat = &fitted.theta_hat;
    let loss_star = crate::estimator::loss(&model, &theta_star, &traj.y)?;

    let smooth = smoothness_constants_mc(&model, &class, &theta_star, &noise, horizon, net_eps, 4, derive_seed(seed, b"diagnose-smooth", 0))?;
    let ident = quad_ident_constant_mc(&model, &class, &theta_star, &noise, horizon, net_eps, n_mc, derive_seed(seed, b"diagnose-ident", 0))?;
    let info = expected_info_mc(&model, &theta_star, &noise, horizon, n_mc, derive_seed(seed, b"diagnose-info", 0))?;
    let sigma_hat = empirical_info(&model, &theta_star, &traj.y)?;
    let sigma_w = sub_gaussian_sigma(&noise);
    let fisher = fisher_info(&info.sigma_bar, sigma_w)?;

    let offset = martingale_offset(&model, theta_hat, &theta_star, &traj.y, &w)?;
    let lin = linearized_offset(&model, theta_hat, &theta_star, &traj.y, &w)?;
    let gap = mean_square_gap(&model, theta_hat, &theta_star, &traj.y)?;
    let taylor = taylor_decomposition_check(&model, theta_hat, &theta_star, &traj.y, &w, smooth.l2, smooth.l3)?;
    let iso_constants = IsometryConstants { lambda0: info.lambda0, b1, b2, l1: smooth.l1 };
    let iso = isometry_event_rates(&model, &theta_star, &noise, horizon, n_mc, derive_seed(seed, b"diagnose-iso", 0), n_mc, &iso_constants)?;

    let constants = ConstantSet {
        d_theta: d,
        sigma_w,
        b_theta: class.radius(),
        l1: smooth.l1,
        l2: smooth.l2,
        l3: smooth.l3,
        a: ident.a,
        lambda0: info.lambda0,
        b1,
        b2,
        gamma,
    };
    let param_bound = parameter_error_bound(ident.a, offset, smooth.l1, class.radius(), horizon)?;

    let mut r = ReportBuilder(Vec::new());
    r.int("T", horizon)
        .int("n_mc", n_mc)
        .text("theta_star", float_list(&theta_star))
        .text("theta_hat", float_list(theta_hat))
        .num("loss_hat", fitted.loss)
        .num("loss_star", loss_star)
        .num("param_error_sq", distance(theta_hat, &theta_star).powi(2))
        .num("parameter_error_bound", param_bound)
        .num("martingale_offset", offset)
        .num("linearized_offset", lin)
        .num("mean_square_gap", gap)
        .text("basic_inequality_holds", gap <= offset + 1e-12 * loss_star)
        .num("taylor_lhs", taylor.lhs)
        .num("taylor_rhs", taylor.rhs)
        .text("taylor_holds", taylor.holds)
        .num("sigma_hat_min_eigenvalue", min_eigenvalue(&sigma_hat))
        .text("sigma_bar", float_list(info.sigma_bar.as_slice()))
        .num("lambda0", info.lambda0)
        .num("fisher_trace", fisher.trace())
        .num("isometry_upper_violation_rate", iso.upper_violation_rate)
        .num("isometry_lower_violation_rate", iso.lower_violation_rate)
        .num("isometry_predicted_upper", iso.predicted_upper)
        .num("isometry_predicted_lower", iso.predicted_lower)
        .num("a", ident.a)
        .int("a_points_used", ident.points_used)
        .num("L1", smooth.l1)
        .num("L2", smooth.l2)
        .num("L3", smooth.l3)
        .int("smoothness_samples", smooth.samples)
        .num("theorem1_bound", theorem1_bound(&constants, horizon, c)?);
    match burn_in_times(&constants) {
        Ok(b) => {
            r.num("T0", b.t0);
        }
        Err(e) => {
            r.text("T0", format!("unavailable ({e})"));
        }
    }
    Ok(r.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_and_fit_round_trip() {
        let kv = KvConfig::parse(
            "model.ar = 0.5\nnoise.kind = uniform\nsimulate.length = 200\nclass.radius = 0.99\nfit.n_starts = 2",
        )
        .unwrap();
        let data = simulate_from_kv(&kv, Some(3)).unwrap();
        assert_eq!(data.y.len(), 200);
        assert_eq!(data, simulate_from_kv(&kv, Some(3)).unwrap());
        let report = fit_from_kv(&kv, &data).unwrap();
        let get = |k: &str| report.iter().find(|(key, _)| key == k).unwrap().1.clone();
        assert_eq!(get("p"), "1");
        let a: f64 = get("theta_hat").parse().unwrap();
        let closed = crate::estimator::closed_form_ar1(&data.y, &crate::param_space::ParameterClass::new(1, 0.99).unwrap()).unwrap();
        assert!((a - closed).abs() < 1e-6);
    }

    #[test]
    fn transition_parsing() {
        let kv = KvConfig::parse("chain.transition = 0.7, 0.3; 0.3, 0.7\nchain.grid = 4, 8, 16").unwrap();
        let p = transition_from_kv(&kv).unwrap();
        assert_eq!(p, DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.3, 0.7]));
        let rows = depmatrix_from_kv(&kv).unwrap();
        assert_eq!(rows.len(), 3);
        let bad = KvConfig::parse("chain.transition = 0.7, 0.3; 0.3\nchain.grid = 4").unwrap();
        assert_eq!(depmatrix_from_kv(&bad).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn diagnose_small() {
        let kv = KvConfig::parse(
            "model.ar = 0.5\nmodel.ma = 0.3\nnoise.kind = rademacher\nclass.radius = 0.95\n\
             diagnose.horizon = 128\ndiagnose.n_mc = 8\ndiagnose.net_epsilon = 0.3\nfit.n_starts = 2",
        )
        .unwrap();
        let report = diagnose_from_kv(&kv, Some(5)).unwrap();
        let get = |k: &str| report.iter().find(|(key, _)| key == k).unwrap().1.clone();
        assert_eq!(get("basic_inequality_holds"), "true");
        assert_eq!(get("taylor_holds"), "true");
        assert!(get("lambda0").parse::<f64>().unwrap() > 0.0);
    }
}
