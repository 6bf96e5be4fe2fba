//! One function per command, each turning a validated configuration into a
//! [`Table`].

use rand_chacha::ChaCha8Rng;

use jcir_core::charfn::{jcir_cf, riccati_oracle, FrequencyPoint};
use jcir_core::ergodicity::ergodic_rate_fit;
use jcir_core::inversion::{default_grid, density_from_cf, lower_bound_check};
use jcir_core::model::{check_admissible, first_moment};
use jcir_core::rng::{sample_batch, StreamFactory};
use jcir_core::simulate::{euler_path_with_rng, skeleton_chain_with, MarginalSampler, PathConfig};
use jcir_core::JcirParams;

use crate::config::{Command, GridOptions, RunConfig, SimulateMethod};
use crate::table::{Cell, Table};
use crate::CliError;

const QUAD_TOL: f64 = 1e-10;
const ODE_TOL: f64 = 1e-12;

/// Validates `cfg` and runs its command.
pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = cfg.validate()?;
    let factory = StreamFactory::new(cfg.seed, cfg.command.name());
    match cfg.command {
        Command::Check => check(cfg, &p),
        Command::Cf => cf(cfg, &p),
        Command::Simulate => simulate(cfg, &p, &factory),
        Command::Skeleton => skeleton(cfg, &p, &factory),
        Command::Density => density(cfg.density.as_ref().expect("validated"), &p),
        Command::Lowerbound => lowerbound(cfg.lowerbound.as_ref().expect("validated"), &p),
        Command::Ergodicity => ergodicity(cfg, &p, &factory),
    }
}

fn check(cfg: &RunConfig, p: &JcirParams) -> Result<Table, CliError> {
    let tol = cfg.check_options().quad_tol;
    let r = check_admissible(p.nu(), tol)?;
    let m1 = first_moment(p.nu(), tol)?;
    let mut t = Table::new(vec![
        "int_xi_wedge_1",
        "int_tail_xi",
        "int_xi_log",
        "first_moment",
        "small_jumps_ok",
        "large_jumps_ok",
        "ergodic_ok",
    ]);
    t.push(vec![
        r.int_xi_wedge_1.into(),
        r.int_tail_xi.into(),
        r.int_xi_log.into(),
        m1.into(),
        r.small_jumps_ok.into(),
        r.large_jumps_ok.into(),
        r.ergodic_ok.into(),
    ]);
    Ok(t)
}

fn cf(cfg: &RunConfig, p: &JcirParams) -> Result<Table, CliError> {
    let o = cfg.cf.as_ref().expect("validated");
    let mut header = vec!["v", "re", "im", "phi_re", "phi_im", "psi_re", "psi_im"];
    if o.oracle {
        header.extend(["oracle_re", "oracle_im", "rel_err"]);
    }
    let mut t = Table::new(header);
    for i in 0..o.n_points {
        let v = if o.n_points == 1 {
            o.v_min
        } else {
            o.v_min + (o.v_max - o.v_min) * i as f64 / (o.n_points - 1) as f64
        };
        let u = FrequencyPoint::imaginary(v);
        let c = jcir_cf(o.t, o.x, u, p, o.quad_tol)?;
        let mut row: Vec<Cell> = vec![
            v.into(),
            c.value.re.into(),
            c.value.im.into(),
            c.phi.re.into(),
            c.phi.im.into(),
            c.psi.re.into(),
            c.psi.im.into(),
        ];
        if o.oracle {
            let (phi, psi) = riccati_oracle(o.t, u, p, ODE_TOL)?;
            let oracle = (phi + o.x * psi).exp();
            row.extend([
                oracle.re.into(),
                oracle.im.into(),
                ((c.value - oracle).norm() / oracle.norm()).into(),
            ]);
        }
        t.push(row);
    }
    Ok(t)
}

fn simulate(cfg: &RunConfig, p: &JcirParams, factory: &StreamFactory) -> Result<Table, CliError> {
    let o = cfg.simulate.as_ref().expect("validated");
    let paths: Vec<Vec<(f64, f64)>> = match o.method {
        SimulateMethod::Exact => {
            let sampler = MarginalSampler::new(o.horizon, p, QUAD_TOL)?;
            sample_batch(factory, o.n_paths, |rng: &mut ChaCha8Rng| {
                Ok::<_, jcir_core::Error>(vec![(0.0, o.x0), (o.horizon, sampler.sample(o.x0, rng)?)])
            })?
        }
        SimulateMethod::Euler => {
            let path_cfg = PathConfig {
                x0: o.x0,
                horizon: o.horizon,
                dt: o.dt.expect("validated"),
                seed: cfg.seed,
            };
            sample_batch(factory, o.n_paths, |rng: &mut ChaCha8Rng| {
                euler_path_with_rng(&path_cfg, p, rng)
            })?
        }
    };
    let mut t = Table::new(vec!["path", "step", "t", "x"]);
    for (i, path) in paths.iter().enumerate() {
        for (k, &(time, x)) in path.iter().enumerate() {
            t.push(vec![i.into(), k.into(), time.into(), x.into()]);
        }
    }
    Ok(t)
}

fn skeleton(cfg: &RunConfig, p: &JcirParams, factory: &StreamFactory) -> Result<Table, CliError> {
    let o = cfg.skeleton.as_ref().expect("validated");
    let step = MarginalSampler::new(o.delta, p, QUAD_TOL)?;
    let chains = sample_batch(factory, o.n_chains, |rng: &mut ChaCha8Rng| {
        skeleton_chain_with(o.x0, o.n_steps, &step, rng)
    })?;
    let mut t = Table::new(vec!["chain", "n", "t", "x"]);
    for (i, chain) in chains.iter().enumerate() {
        for (n, &x) in chain.states.iter().enumerate() {
            t.push(vec![i.into(), n.into(), (n as f64 * chain.delta).into(), x.into()]);
        }
    }
    Ok(t)
}

fn grid(o: &GridOptions, p: &JcirParams) -> Result<Vec<f64>, CliError> {
    match o.explicit_grid() {
        Some(g) => Ok(g),
        None => Ok(default_grid(o.t, o.x, p, o.n_y, &o.inversion_config())?),
    }
}

fn density(o: &GridOptions, p: &JcirParams) -> Result<Table, CliError> {
    let ys = grid(o, p)?;
    let d = density_from_cf(o.t, o.x, &ys, p, &o.inversion_config())?;
    let mut t = Table::new(vec!["y", "density"]);
    t.note("span", d.span);
    t.note("inv_error_bound", d.inv_error_bound);
    t.note("mass", d.mass);
    for (&y, &v) in d.y_grid.iter().zip(&d.p_values) {
        t.push(vec![y.into(), v.into()]);
    }
    Ok(t)
}

fn lowerbound(o: &GridOptions, p: &JcirParams) -> Result<Table, CliError> {
    let ys = grid(o, p)?;
    let r = lower_bound_check(o.t, o.x, &ys, p, o.lower_bound_tol(), &o.inversion_config())?;
    let mut t = Table::new(vec!["y", "p", "f", "c_f", "margin"]);
    t.note("lambda_t", r.lambda_t);
    t.note("c_t", r.c_t);
    t.note("min_margin", r.min_margin);
    t.note("violations", r.violations);
    t.note("tol", r.tol);
    t.note("inv_error_bound", r.inv_error_bound);
    for i in 0..r.y_grid.len() {
        t.push(vec![
            r.y_grid[i].into(),
            r.p_values[i].into(),
            r.f_values[i].into(),
            (r.c_t * r.f_values[i]).into(),
            r.margin[i].into(),
        ]);
    }
    Ok(t)
}

fn ergodicity(cfg: &RunConfig, p: &JcirParams, factory: &StreamFactory) -> Result<Table, CliError> {
    let o = cfg.ergodicity.as_ref().expect("validated");
    let r = ergodic_rate_fit(&o.x, o.delta, o.n_max, p, o.n_mc, factory)?;
    let mut t = Table::new(vec![
        "row",
        "x",
        "n",
        "t",
        "tv_hat",
        "tv_se",
        "beta_hat",
        "beta_se",
        "intercept",
        "fit_r2",
        "fit_start",
        "fit_end",
        "monotone_ok",
        "lyapunov_ok",
        "beta_agree",
    ]);
    t.note("noise_floor", r.noise_floor);
    t.note("t_ref", r.t_ref);
    t.note("m_bound", r.m_bound);
    t.note("m_hat", r.m_hat);
    t.note("intercept_slope", r.intercept_slope.map_or(Cell::Empty, Cell::Float));
    let blank = |n: usize| std::iter::repeat_n(Cell::Empty, n);
    for s in &r.starts {
        for &(n, tv, se) in &s.tv_series {
            let mut row: Vec<Cell> = vec![
                "tv".into(),
                s.x.into(),
                n.into(),
                (n as f64 * r.delta).into(),
                tv.into(),
                se.into(),
            ];
            row.extend(blank(9));
            t.push(row);
        }
    }
    for s in &r.starts {
        let mut row: Vec<Cell> = vec!["fit".into(), s.x.into()];
        row.extend(blank(4));
        row.extend([
            s.beta_hat.into(),
            s.beta_se.into(),
            s.intercept.into(),
            s.fit_r2.into(),
            s.fit_range.0.into(),
            s.fit_range.1.into(),
            s.monotone_ok.into(),
        ]);
        row.extend(blank(2));
        t.push(row);
    }
    let mut summary: Vec<Cell> = vec!["summary".into()];
    summary.extend(blank(5));
    summary.extend([r.beta_hat().into(), Cell::Empty, Cell::Empty, r.fit_r2().into()]);
    summary.extend(blank(2));
    summary.extend([r.monotone_ok().into(), r.lyapunov_ok.into(), r.beta_agree.into()]);
    t.push(summary);
    Ok(t)
}
