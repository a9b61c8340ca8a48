//! Subcommand bodies. Each reads a resolved scenario and fills an output
//! directory.

use serde::Serialize;

use netlq::coding::Quantizer;
use netlq::design::{
    example1_curves, gamma1_example4, gamma_rc_ic, min_gamma, optimize_envelope, restricted_control_u1,
    symmetric_envelope, ConstraintSet, EnvelopeDesign, GammaCurve, PreSample, TwoStepSetup,
};
use netlq::estimation::{filter_error_variance, two_step_posterior, wbar_moments};
use netlq::exec::Executor;
use netlq::lqcore::gain_schedule;
use netlq::sim::{simulate, sweep, RunResult};

use crate::config::Resolved;
use crate::failure::Failure;
use crate::output::{col, num, Artifacts, Column};

type Outcome = Result<(), Failure>;

pub fn gains(r: &Resolved, out: &mut Artifacts) -> Outcome {
    let s = gain_schedule(&r.file.plant, &r.file.cost);
    let t_end = s.horizon();
    let opt = |v: &[f64], t: usize| v.get(t).map_or(String::new(), |&x| num(x));
    let rows = (0..=t_end + 1).map(|t| vec![t.to_string(), opt(&s.k_star, t), num(s.beta[t]), opt(&s.lambda, t), num(s.alpha[t])]);
    out.csv(
        "gains.csv",
        "gain schedule; k_star and lambda stop at T",
        &[col("t", "step"), col("k_star", "1"), col("beta", "1"), col("lambda", "1"), col("alpha", "1")],
        rows,
    )?;
    out.json("gains.json", "gain schedule arrays", &s)
}

pub fn fig_dual_effect(r: &Resolved, out: &mut Artifacts) -> Outcome {
    let f = &r.file;
    let e = &f.experiment;
    let grid = e.u0_grid.points();
    let c = example1_curves(&f.plant, &f.cost, e.theta, &grid)?;
    let at_ce = example1_curves(&f.plant, &f.cost, e.theta, &[c.u0_ce])?;
    let curve_rows = |g: &GammaCurve| g.grid.iter().zip(&g.values).map(|(u, v)| vec![num(*u), num(*v)]).collect::<Vec<_>>();
    out.csv("gamma.csv", "weighted distortion against u0", &[col("u0", "control"), col("gamma", "cost")], curve_rows(&c.gamma))?;
    out.csv("cost.csv", "expected total cost against u0", &[col("u0", "control"), col("cost", "cost")], curve_rows(&c.j))?;
    let at = |u: f64| {
        let i = grid.iter().position(|&g| g == u).expect("grid point");
        (c.gamma.values[i], c.j.values[i])
    };
    let (ga, ja) = at(c.j.argmin);
    let (gg, jg) = at(c.gamma.argmin);
    let markers = vec![
        vec!["u0_ce".into(), num(c.u0_ce), num(at_ce.gamma.values[0]), num(at_ce.j.values[0])],
        vec!["argmin_cost".into(), num(c.j.argmin), num(ga), num(ja)],
        vec!["argmin_gamma".into(), num(c.gamma.argmin), num(gg), num(jg)],
    ];
    out.csv(
        "markers.csv",
        "certainty-equivalence control and grid minimizers",
        &[col("marker", "label"), col("u0", "control"), col("gamma", "cost"), col("cost", "cost")],
        markers,
    )
}

pub fn fig_example3(r: &Resolved, out: &mut Artifacts) -> Outcome {
    let f = &r.file;
    let e = &f.experiment;
    let qz0 = Quantizer::new(vec![e.delta0])?;
    let qz1 = Quantizer::new(vec![e.delta1])?;
    let i = e.z0 - 1;
    let mut wbar = Vec::new();
    let mut var = Vec::new();
    for alpha in e.alpha_grid.points() {
        let post = two_step_posterior(&f.plant, alpha, &qz0, &qz1)?;
        if !post.empty_rows().is_empty() {
            return Err(netlq::Error::InconsistentObservations(format!("z0 = {} has zero probability", e.z0)).into());
        }
        wbar.push(vec![num(alpha), num(wbar_moments(&post, alpha)[i].second_moment)]);
        var.push(vec![num(alpha), num(filter_error_variance(&post)[i])]);
    }
    out.csv(
        "wbar.csv",
        "second moment of the estimate increment given z0, against the control alpha applied after z0",
        &[col("alpha", "control"), col("wbar_second_moment", "state^2")],
        wbar,
    )?;
    out.csv(
        "error_variance.csv",
        "expected filtering error variance of x1 given z0, against alpha",
        &[col("alpha", "control"), col("error_variance", "state^2")],
        var,
    )
}

/// Γ curves over `δ1` for each `u0`, and their minima over `min_set`.
fn two_step_figure(
    r: &Resolved,
    out: &mut Artifacts,
    value_col: Column,
    objective: &dyn Fn(f64, &[f64]) -> netlq::Result<GammaCurve>,
    min_set: &ConstraintSet,
) -> Outcome {
    let e = &r.file.experiment;
    let grid = e.delta1_grid.points();
    let mut curves = Vec::new();
    let mut minima = Vec::new();
    for &u0 in &e.u0_values {
        let g = objective(u0, &grid)?;
        curves.extend(grid.iter().zip(&g.values).map(|(d, v)| vec![num(u0), num(*d), num(*v)]));
        let f = |d: f64| objective(u0, &[d]).map(|c| c.values[0]).unwrap_or(f64::NAN);
        let m = min_gamma(&f, e.delta1_grid.window(), min_set)?;
        minima.push(vec![num(u0), num(m.argmin), num(m.min_value)]);
    }
    out.csv(
        "gamma.csv",
        "objective against the time-1 threshold, one curve per u0",
        &[col("u0", "control"), col("delta1", "state"), value_col],
        curves,
    )?;
    out.csv(
        "minima.csv",
        "minimum over delta1 (restricted to the feasible set, if any) per u0",
        &[col("u0", "control"), col("argmin", "state"), col("min_value", value_col.unit)],
        minima,
    )
}

fn setup(r: &Resolved) -> TwoStepSetup {
    TwoStepSetup { delta0: r.file.experiment.delta0, z0: r.file.experiment.z0 }
}

pub fn fig_symmetry(r: &Resolved, out: &mut Artifacts) -> Outcome {
    let (pl, c, s) = (r.file.plant, r.file.cost, setup(r));
    two_step_figure(r, out, col("gamma", "cost"), &|u0, g| gamma1_example4(&pl, &c, s, u0, g), &ConstraintSet::Unconstrained)
}

pub fn fig_constrained_encoder(r: &Resolved, out: &mut Artifacts) -> Outcome {
    let (pl, c, s) = (r.file.plant, r.file.cost, setup(r));
    let set = r.file.experiment.encoder_set.clone();
    two_step_figure(r, out, col("gamma", "cost"), &|u0, g| gamma1_example4(&pl, &c, s, u0, g), &set)
}

fn control_figure(r: &Resolved, out: &mut Artifacts, set: &ConstraintSet) -> Outcome {
    let (pl, c, s) = (r.file.plant, r.file.cost, setup(r));
    two_step_figure(
        r,
        out,
        col("control_cost", "cost"),
        &|u0, g| gamma_rc_ic(&pl, &c, s, u0, g, set),
        &ConstraintSet::Unconstrained,
    )?;
    let rows = r
        .file
        .experiment
        .xhat_grid
        .points()
        .into_iter()
        .map(|x| Ok(vec![num(x), num(restricted_control_u1(pl.a, &c, x, set)?)]))
        .collect::<netlq::Result<Vec<_>>>()?;
    out.csv(
        "policy.csv",
        "best feasible terminal control against the estimate",
        &[col("xhat", "state"), col("u1", "control")],
        rows,
    )
}

pub fn fig_constrained_control(r: &Resolved, out: &mut Artifacts) -> Outcome {
    control_figure(r, out, &r.file.experiment.control_set.clone())
}

pub fn fig_interval_control(r: &Resolved, out: &mut Artifacts) -> Outcome {
    control_figure(r, out, &r.file.experiment.interval_set.clone())
}

#[derive(Serialize)]
struct DesignSummary {
    expected_cost: f64,
    kappa: Option<f64>,
    asymmetry: f64,
    design: EnvelopeDesign,
}

impl DesignSummary {
    fn new(design: EnvelopeDesign) -> Self {
        let kappa = match design.pre_sample {
            PreSample::Zoh { kappa } => Some(kappa),
            PreSample::PredictorLinear => None,
        };
        DesignSummary { expected_cost: design.expected_cost, kappa, asymmetry: design.asymmetry(), design }
    }
}

#[derive(Serialize)]
struct LawSummary {
    law: &'static str,
    symmetric: DesignSummary,
    optimized: DesignSummary,
}

pub fn et_envelope(r: &Resolved, out: &mut Artifacts) -> Outcome {
    let f = &r.file;
    let opts = &f.experiment.envelope;
    let mut laws = Vec::new();
    for (law, regime) in [("predictor_linear", PreSample::PredictorLinear), ("zoh", PreSample::Zoh { kappa: f64::NAN })] {
        let symmetric = DesignSummary::new(symmetric_envelope(&f.plant, &f.cost, regime, opts)?);
        let optimized = DesignSummary::new(optimize_envelope(&f.plant, &f.cost, regime, opts)?);
        laws.push(LawSummary { law, symmetric, optimized });
    }
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for l in &laws {
        for (name, d) in [("symmetric", &l.symmetric), ("optimized", &l.optimized)] {
            let env = &d.design.envelope;
            for t in 1..=env.horizon() {
                let iv = env.interval(t);
                rows.push(vec![
                    l.law.to_string(),
                    name.to_string(),
                    t.to_string(),
                    num(iv.lo),
                    num(iv.hi),
                    num(d.design.means[t]),
                    num(d.design.sample_probs[t - 1]),
                ]);
            }
            summary.push(vec![
                l.law.to_string(),
                name.to_string(),
                num(d.expected_cost),
                d.kappa.map_or(String::new(), num),
                num(d.asymmetry),
            ]);
        }
    }
    out.csv(
        "envelope.csv",
        "silence intervals, pre-sample predictor and sample-time law; the interval at T is moot",
        &[
            col("law", "label"),
            col("design", "label"),
            col("t", "step"),
            col("lower", "state"),
            col("upper", "state"),
            col("mean", "state"),
            col("sample_prob", "probability"),
        ],
        rows,
    )?;
    out.csv(
        "summary.csv",
        "expected cost, constant pre-sample control and asymmetry per design",
        &[
            col("law", "label"),
            col("design", "label"),
            col("expected_cost", "cost"),
            col("kappa", "control"),
            col("asymmetry", "state"),
        ],
        summary,
    )?;
    out.json("summary.json", "full envelope designs", &laws)
}

const RESULT_COLUMNS: [Column; 6] = [
    col("mean_cost", "cost"),
    col("std_error", "cost"),
    col("n_paths", "count"),
    col("comm_cost_mean", "cost"),
    col("infeasible_fraction", "probability"),
    col("seed", "seed"),
];

fn result_row(r: &RunResult) -> Vec<String> {
    vec![
        num(r.mean_cost),
        num(r.std_error),
        r.n_paths.to_string(),
        num(r.comm_cost_mean),
        num(r.infeasible_fraction),
        r.seed.to_string(),
    ]
}

pub fn simulate_cmd(r: &Resolved, out: &mut Artifacts, exec: &Executor) -> Outcome {
    let f = &r.file;
    let e = &f.experiment;
    let sc = f.scenario();
    match &e.sweep {
        None => {
            let res = simulate(&sc, e.paths, e.seed, exec)?;
            out.csv("result.csv", "Monte Carlo cost estimate", &RESULT_COLUMNS, [result_row(&res)])?;
            out.json("result.json", "Monte Carlo cost estimate", &res)
        }
        Some(s) => {
            let res = sweep(&sc, &s.axis, &s.values, e.paths, e.seed, exec)?;
            let mut columns = vec![col("value", "axis")];
            columns.extend(RESULT_COLUMNS);
            let rows = s.values.iter().zip(&res).map(|(v, r)| {
                let mut row = vec![num(*v)];
                row.extend(result_row(r));
                row
            });
            out.csv("sweep.csv", &format!("Monte Carlo cost against {}", s.axis), &columns, rows)?;
            out.json("sweep.json", "Monte Carlo cost estimates per axis value", &res)
        }
    }
}
