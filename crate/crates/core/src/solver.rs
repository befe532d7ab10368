//! Explicit time integration of ∂_t f = Q(f, f) and the O(s) study.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bounds::InequalityCheck;
use crate::collision::{
    entropy, l1k_norm, max_loss_frequency, CollisionOperator, Kernel, RadialDistribution, SolverConfig, MAX_SOFTNESS,
};
use crate::error::{Error, Result};

/// Relative mass/energy drift above which a run is flagged.
pub const DRIFT_TOL: f64 = 1e-2;

/// |f| may not exceed this multiple of the initial max.
const BLOWUP_FACTOR: f64 = 1e3;

/// Initial data library.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    Maxwellian { mass: f64, temperature: f64 },
    /// Two centred Maxwellians; `weight` is the mass fraction of the first.
    Bimodal { mass: f64, t1: f64, t2: f64, weight: f64 },
    /// amplitude·(1 − r²/R²)⁴ on r < R.
    CompactBump { amplitude: f64, radius: f64 },
}

fn gaussian(t: f64, r: f64) -> f64 {
    (2.0 * PI * t).powf(-1.5) * (-r * r / (2.0 * t)).exp()
}

impl InitialData {
    pub fn unit_maxwellian() -> Self {
        InitialData::Maxwellian { mass: 1.0, temperature: 1.0 }
    }

    /// Equal-mass mixture at temperatures 1/2 and 3/2 (mean temperature 1).
    pub fn bimodal() -> Self {
        InitialData::Bimodal { mass: 1.0, t1: 0.5, t2: 1.5, weight: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("initial data: {name} = {v} must be positive")))
            }
        };
        match *self {
            InitialData::Maxwellian { mass, temperature } => {
                pos("mass", mass)?;
                pos("temperature", temperature)
            }
            InitialData::Bimodal { mass, t1, t2, weight } => {
                pos("mass", mass)?;
                pos("t1", t1)?;
                pos("t2", t2)?;
                if (0.0..=1.0).contains(&weight) {
                    Ok(())
                } else {
                    Err(Error::Config(format!("initial data: weight = {weight} must lie in [0, 1]")))
                }
            }
            InitialData::CompactBump { amplitude, radius } => {
                pos("amplitude", amplitude)?;
                pos("radius", radius)
            }
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            InitialData::Maxwellian { mass, temperature } => mass * gaussian(temperature, r),
            InitialData::Bimodal { mass, t1, t2, weight } => {
                mass * (weight * gaussian(t1, r) + (1.0 - weight) * gaussian(t2, r))
            }
            InitialData::CompactBump { amplitude, radius } => {
                let u = 1.0 - (r / radius).powi(2);
                if u > 0.0 {
                    amplitude * u.powi(4)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample(&self, cfg: &SolverConfig) -> Result<RadialDistribution> {
        self.validate()?;
        RadialDistribution::from_fn(cfg.grid()?, cfg.interp, |r| self.eval(r))
    }
}

/// Maxwellian with the mass and energy of `f`.
pub fn equilibrium_of(f: &RadialDistribution) -> Result<RadialDistribution> {
    let mass = f.mass();
    if !(mass > 0.0) {
        return Err(Error::Domain(format!("equilibrium needs positive mass, got {mass}")));
    }
    let temperature = f.energy() / (3.0 * mass);
    RadialDistribution::from_fn(f.grid.clone(), f.interp, |r| mass * gaussian(temperature, r))
}

/// Diagnostics of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub entropy: f64,
    /// |f|_{L¹_k} for each configured k.
    pub l1k: Vec<f64>,
    pub min_f: f64,
}

impl Diagnostics {
    fn of(t: f64, f: &RadialDistribution, k_weights: &[f64]) -> Self {
        Self {
            t,
            mass: f.mass(),
            energy: f.energy(),
            entropy: entropy(f),
            l1k: k_weights.iter().map(|&k| l1k_norm(f, k)).collect(),
            min_f: f.min_value(),
        }
    }
}

/// One flow: snapshot and diagnostics per time level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeSeries {
    pub kernel: String,
    pub dt: f64,
    pub k_weights: Vec<f64>,
    pub times: Vec<f64>,
    pub snapshots: Vec<RadialDistribution>,
    pub diagnostics: Vec<Diagnostics>,
    /// Largest relative conservation defect of any operator evaluation.
    pub max_mass_defect: f64,
    pub max_energy_defect: f64,
}

impl TimeSeries {
    pub fn initial(&self) -> &RadialDistribution {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &RadialDistribution {
        self.snapshots.last().expect("time series is never empty")
    }

    /// max_t |m(t) − m(0)| / |m(0)| for mass and energy.
    pub fn drift(&self) -> (f64, f64) {
        let d0 = &self.diagnostics[0];
        let rel = |x: f64, x0: f64| if x == x0 { 0.0 } else { ((x - x0) / x0).abs() };
        self.diagnostics.iter().fold((0.0, 0.0), |(m, e), d| {
            (f64::max(m, rel(d.mass, d0.mass)), f64::max(e, rel(d.energy, d0.energy)))
        })
    }

    /// Mass or energy drift above [`DRIFT_TOL`].
    pub fn flagged(&self) -> bool {
        let (m, e) = self.drift();
        !(m <= DRIFT_TOL && e <= DRIFT_TOL)
    }

    /// CSV: `t,mass,energy,entropy,l1k_<k>...,min_f`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mass,energy,entropy");
        for k in &self.k_weights {
            let _ = write!(out, ",l1k_{k}");
        }
        out.push_str(",min_f\n");
        for d in &self.diagnostics {
            let _ = write!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", d.t, d.mass, d.energy, d.entropy);
            for v in &d.l1k {
                let _ = write!(out, ",{v:.16e}");
            }
            let _ = writeln!(out, ",{:.16e}", d.min_f);
        }
        out
    }
}

/// The default step 0.25 / max ν with the hard-sphere loss frequency of
/// the initial data, or the configured dt.
pub fn time_step(f_in: &RadialDistribution, cfg: &SolverConfig) -> f64 {
    cfg.dt.unwrap_or_else(|| 0.25 / max_loss_frequency(f_in, 1.0))
}

/// One explicit midpoint (RK2) step f ↦ f + dt·Q(f + dt/2·Q(f)).
///
/// Rejects dt > 0.5 / max ν and reports instability once |f| exceeds 10³
/// times `initial_max`. Returns the new state and the largest relative
/// conservation defects of the two operator evaluations.
pub fn step(f: &RadialDistribution, op: &CollisionOperator, dt: f64, initial_max: f64) -> Result<(RadialDistribution, f64, f64)> {
    let bound = 0.5 / max_loss_frequency(f, op.kernel().gamma());
    if dt > bound {
        return Err(Error::StepTooLarge { dt, bound });
    }
    let q1 = op.eval(f)?;
    let half = f.axpy(0.5 * dt, &q1.q);
    let q2 = op.eval(&half)?;
    let next = f.axpy(dt, &q2.q);
    let max_abs = next.max_abs();
    if !max_abs.is_finite() || max_abs > BLOWUP_FACTOR * initial_max {
        return Err(Error::Instability { max_abs, initial_max });
    }
    let dm = q1.relative_mass_defect().max(q2.relative_mass_defect());
    let de = q1.relative_energy_defect().max(q2.relative_energy_defect());
    Ok((next, dm, de))
}

/// Integrate from f_in to cfg.t_end with a uniform step no larger than dt.
pub fn run(f_in: &RadialDistribution, kernel: Kernel, cfg: &SolverConfig, dt: f64) -> Result<TimeSeries> {
    let op = CollisionOperator::new(kernel, cfg)?;
    let n_steps = (cfg.t_end / dt).ceil().max(1.0) as usize;
    let h = cfg.t_end / n_steps as f64;
    let initial_max = f_in.max_abs();
    let mut ts = TimeSeries {
        kernel: op.kernel().label(),
        dt: h,
        k_weights: cfg.k_weights.clone(),
        times: vec![0.0],
        snapshots: vec![f_in.clone()],
        diagnostics: vec![Diagnostics::of(0.0, f_in, &cfg.k_weights)],
        max_mass_defect: 0.0,
        max_energy_defect: 0.0,
    };
    let mut f = f_in.clone();
    for i in 1..=n_steps {
        let (next, dm, de) = step(&f, &op, h, initial_max)?;
        f = next;
        let t = if i == n_steps { cfg.t_end } else { i as f64 * h };
        ts.max_mass_defect = ts.max_mass_defect.max(dm);
        ts.max_energy_defect = ts.max_energy_defect.max(de);
        ts.times.push(t);
        ts.diagnostics.push(Diagnostics::of(t, &f, &cfg.k_weights));
        ts.snapshots.push(f.clone());
    }
    Ok(ts)
}

/// |F^s(t)|_{L¹_k} with F^s = (f^s − f^0)/s, per time and k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorSeries {
    pub s: f64,
    pub k_weights: Vec<f64>,
    pub times: Vec<f64>,
    /// `norms[i][j]`: time i, k_weights[j].
    pub norms: Vec<Vec<f64>>,
}

impl ErrorSeries {
    fn between(flow_s: &TimeSeries, flow_0: &TimeSeries, s: f64) -> Result<Self> {
        if flow_s.times != flow_0.times {
            return Err(Error::Config("paired flows must share their time levels".into()));
        }
        let norms = flow_s
            .snapshots
            .iter()
            .zip(&flow_0.snapshots)
            .map(|(a, b)| {
                let scaled = a.axpy(-1.0, b);
                let scaled = scaled.with_values(scaled.values.iter().map(|v| v / s).collect());
                flow_s.k_weights.iter().map(|&k| l1k_norm(&scaled, k)).collect()
            })
            .collect();
        Ok(Self { s, k_weights: flow_s.k_weights.clone(), times: flow_s.times.clone(), norms })
    }

    /// sup over the horizon, per k.
    pub fn sup(&self) -> Vec<f64> {
        (0..self.k_weights.len())
            .map(|j| self.norms.iter().map(|n| n[j]).fold(0.0, f64::max))
            .collect()
    }

    /// Values at the final time, per k.
    pub fn at_end(&self) -> Vec<f64> {
        self.norms.last().cloned().unwrap_or_default()
    }

    /// CSV: `t,F_l1k_<k>...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for k in &self.k_weights {
            let _ = write!(out, ",F_l1k_{k}");
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.norms) {
            let _ = write!(out, "{t:.16e}");
            for v in row {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

/// The inverse-power flow, the hard-sphere flow and their scaled difference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairRun {
    pub flow_s: TimeSeries,
    pub flow_0: TimeSeries,
    pub error: ErrorSeries,
}

fn check_softness(s: f64) -> Result<()> {
    if s > 0.0 && s < MAX_SOFTNESS {
        Ok(())
    } else {
        Err(Error::Domain(format!("softness s = {s} must lie in (0, 1/8)")))
    }
}

/// Both flows from f_in on a shared grid and step, horizon cfg.t_end.
pub fn run_pair(f_in: &RadialDistribution, s: f64, cfg: &SolverConfig) -> Result<PairRun> {
    check_softness(s)?;
    let dt = time_step(f_in, cfg);
    let (flow_s, flow_0) = rayon::join(
        || Kernel::inverse_power(s).and_then(|k| run(f_in, k, cfg, dt)),
        || run(f_in, Kernel::HardSphere, cfg, dt),
    );
    let (flow_s, flow_0) = (flow_s?, flow_0?);
    let error = ErrorSeries::between(&flow_s, &flow_0, s)?;
    Ok(PairRun { flow_s, flow_0, error })
}

/// Per-s results of a convergence study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyRow {
    pub s: f64,
    /// sup_t |F^s|_{L¹_k}, per k.
    pub sup_error: Vec<f64>,
    /// |f^s(T) − f^0(T)|_{L¹_k} / s, per k.
    pub scaled_at_end: Vec<f64>,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub entropy_violations: usize,
}

/// sup_t |F^s|_{L¹_k} across a decreasing list of s, with the same study
/// repeated on the equilibrium of the data as a discretization floor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub schema: u32,
    pub k_weights: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub rows: Vec<StudyRow>,
    /// max/min over s of sup_t |F^s|_{L¹_k}, per k.
    pub ratio_max_min: Vec<f64>,
    /// Per k: some consecutive pair grew by more than 2×.
    pub growth_flagged: Vec<bool>,
    /// Same study on the Maxwellian with the data's mass and energy.
    pub floor: Vec<StudyRow>,
    /// min over s of sup_error / floor sup_error, per k.
    pub floor_margin: Vec<f64>,
    pub hard_sphere: TimeSeries,
    pub error_series: Vec<ErrorSeries>,
}

impl ConvergenceStudy {
    /// CSV: one row per s, `s,sup_F_l1k_<k>...,scaled_at_T_l1k_<k>...,floor_sup_F_l1k_<k>...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s");
        for prefix in ["sup_F_l1k", "scaled_at_T_l1k", "floor_sup_F_l1k"] {
            for k in &self.k_weights {
                let _ = write!(out, ",{prefix}_{k}");
            }
        }
        out.push('\n');
        for (row, floor) in self.rows.iter().zip(&self.floor) {
            let _ = write!(out, "{:.16e}", row.s);
            for v in row.sup_error.iter().chain(&row.scaled_at_end).chain(&floor.sup_error) {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

fn study_rows(f_in: &RadialDistribution, s_list: &[f64], cfg: &SolverConfig, dt: f64) -> Result<(TimeSeries, Vec<StudyRow>, Vec<ErrorSeries>)> {
    let flow_0 = run(f_in, Kernel::HardSphere, cfg, dt)?;
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for &s in s_list {
        let flow_s = run(f_in, Kernel::inverse_power(s)?, cfg, dt)?;
        let err = ErrorSeries::between(&flow_s, &flow_0, s)?;
        let (mass_drift, energy_drift) = flow_s.drift();
        rows.push(StudyRow {
            s,
            sup_error: err.sup(),
            scaled_at_end: err.at_end(),
            mass_drift,
            energy_drift,
            entropy_violations: entropy_monotonicity_check(&flow_s, ENTROPY_SLACK).failures.len(),
        });
        series.push(err);
    }
    Ok((flow_0, rows, series))
}

/// Relative per-step slack of the entropy check.
pub const ENTROPY_SLACK: f64 = 1e-5;

pub fn convergence_study(f_in: &RadialDistribution, s_list: &[f64], cfg: &SolverConfig) -> Result<ConvergenceStudy> {
    if s_list.is_empty() {
        return Err(Error::Config("s_list is empty".into()));
    }
    for &s in s_list {
        check_softness(s)?;
    }
    if !s_list.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::Config("s_list must be strictly decreasing".into()));
    }
    let dt = time_step(f_in, cfg);
    let (hard_sphere, rows, error_series) = study_rows(f_in, s_list, cfg, dt)?;
    let eq = equilibrium_of(f_in)?;
    let (_, floor, _) = study_rows(&eq, s_list, cfg, dt)?;

    let nk = cfg.k_weights.len();
    let column = |rows: &[StudyRow], j: usize| rows.iter().map(|r| r.sup_error[j]).collect::<Vec<_>>();
    let ratio_max_min = (0..nk)
        .map(|j| {
            let c = column(&rows, j);
            c.iter().copied().fold(0.0, f64::max) / c.iter().copied().fold(f64::INFINITY, f64::min)
        })
        .collect();
    let growth_flagged = (0..nk).map(|j| column(&rows, j).windows(2).any(|w| w[1] > 2.0 * w[0])).collect();
    let floor_margin = (0..nk)
        .map(|j| {
            column(&rows, j)
                .iter()
                .zip(column(&floor, j))
                .map(|(a, b)| a / b)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(ConvergenceStudy {
        schema: 1,
        k_weights: cfg.k_weights.clone(),
        t_end: cfg.t_end,
        dt: hard_sphere.dt,
        rows,
        ratio_max_min,
        growth_flagged,
        floor,
        floor_margin,
        hard_sphere,
        error_series,
    })
}

fn record(name: String, grid: String, points: usize, worst: f64, at: (&str, f64), threshold: Option<f64>, failures: Vec<String>) -> InequalityCheck {
    let passed = worst.is_finite() && failures.is_empty() && threshold.is_none_or(|t| worst <= t);
    InequalityCheck {
        name,
        param_grid: grid,
        points,
        worst_ratio: worst,
        worst_point: BTreeMap::from([(at.0.to_string(), at.1)]),
        slack: 0.0,
        threshold,
        passed,
        empirical: Some(worst),
        failures,
    }
}

/// sup_t |f(t)|_{L¹_k} / |f_in|_{L¹_k}; passes when finite.
pub fn moment_propagation_check(series: &TimeSeries, k: f64) -> InequalityCheck {
    let norms: Vec<f64> = series.snapshots.iter().map(|f| l1k_norm(f, k)).collect();
    let base = norms[0];
    let (mut worst, mut at) = (f64::NEG_INFINITY, 0.0);
    for (t, n) in series.times.iter().zip(&norms) {
        let r = n / base;
        if !(r <= worst) {
            worst = r;
            at = *t;
        }
    }
    record(
        format!("moment_propagation_k{k}"),
        format!("{} time levels in [0, {}], {}", series.times.len(), series.times.last().unwrap(), series.kernel),
        norms.len(),
        worst,
        ("t", at),
        None,
        Vec::new(),
    )
}

/// H(t_{n+1}) ≤ H(t_n) + slack·|H(t_n)| for every step. The ratio is the
/// largest increase in units of the allowance (≤ 1 passes).
pub fn entropy_monotonicity_check(series: &TimeSeries, rel_slack: f64) -> InequalityCheck {
    let d = &series.diagnostics;
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0.0;
    let mut failures = Vec::new();
    for w in d.windows(2) {
        let allowance = rel_slack * w[0].entropy.abs().max(f64::MIN_POSITIVE);
        let ratio = (w[1].entropy - w[0].entropy) / allowance;
        if !(ratio <= worst) {
            worst = ratio;
            at = w[1].t;
        }
        if !(ratio <= 1.0) {
            failures.push(format!("H rose from {:.6e} to {:.6e} at t = {}", w[0].entropy, w[1].entropy, w[1].t));
        }
    }
    if d.len() < 2 {
        worst = 0.0;
    }
    record(
        "entropy_monotonicity".into(),
        format!("{} steps, relative slack {rel_slack:e}, {}", d.len().saturating_sub(1), series.kernel),
        d.len().saturating_sub(1),
        worst,
        ("t", at),
        Some(1.0),
        failures,
    )
}
