use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::Value;

use qmarket_core::fock::exact_series;
use qmarket_core::pilotwave::{
    integrate_portfolio, quantum_potential, Grid2, PotentialField, QPath, SplitStepper, WaveField,
};
use qmarket_core::reservoir::KWindow;
use qmarket_core::reservoir_generated::{
    compare_traders, critical_gamma1, delta_pi_model3, discretized_oracle_model3, model3_series, Crossing,
    Model3Params,
};
use qmarket_core::reservoir_info::{delta_pi_model2, discretized_oracle_model2, model2_series, OracleRun};
use qmarket_core::{dominant_frequency, peak_to_peak, portfolio_series, Error as CoreError, TimeSeries};

use crate::config::{
    ExperimentConfig, Model1Trader, OperatorConfig, OutputConfig, PathConfig, PilotWaveConfig, TimeConfig,
};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_g15, line_svg, push_row, series_csv, write_file};

/// Closed-form series for every trader of an operator model.
pub fn trader_series(cfg: &ExperimentConfig) -> CliResult<Vec<(String, TimeSeries)>> {
    let mut out = Vec::new();
    match cfg {
        ExperimentConfig::Model1(c) => {
            let grid = c.time.grid(None)?;
            for t in &c.traders {
                out.push((t.name.clone(), portfolio_series(&t.params()?, &t.init(), &grid)?));
            }
        }
        ExperimentConfig::Model2(c) => {
            for t in &c.traders {
                let spec = t.spec()?;
                let grid = c.time.grid(Some(1.0 / spec.decay().gamma_prime))?;
                out.push((t.name.clone(), model2_series(&spec, &t.init(), &grid)?));
            }
        }
        ExperimentConfig::Model3(c) => {
            for t in &c.traders {
                let p = t.params()?;
                let grid = c.time.grid(Some(1.0 / p.decay_rate()))?;
                out.push((t.name.clone(), model3_series(&p, &t.init(), &grid, t.full_integral)?));
            }
        }
        ExperimentConfig::PilotWave(_) => {
            return Err(CliError::config("pilotwave has no closed-form trader series"));
        }
    }
    Ok(out)
}

fn emit_series(output: &OutputConfig, series: &[(String, TimeSeries)], label: &str) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, s) in series {
        let csv = output.dir.join(format!("{name}.csv"));
        write_file(&csv, &series_csv(s))?;
        written.push(csv);
        if output.svg {
            let svg = output.dir.join(format!("{name}.svg"));
            let title = format!("{label}: portfolio of {name}");
            write_file(&svg, &line_svg(&title, "t", "π(t)", &s.times, &s.portfolio))?;
            written.push(svg);
        }
    }
    Ok(written)
}

/// Writes one CSV (and optionally one SVG) per trader; returns the paths.
pub fn simulate(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    match cfg {
        ExperimentConfig::PilotWave(c) => simulate_pilotwave(c),
        _ => {
            let label = match cfg.kind() {
                crate::config::ModelKind::Model1 => "model1",
                crate::config::ModelKind::Model2 => "model2",
                _ => "model3",
            };
            emit_series(cfg.output(), &trader_series(cfg)?, label)
        }
    }
}

/// Result of the pilot-wave run.
pub struct PilotRun {
    pub times: Vec<f64>,
    pub pi1: Vec<f64>,
    pub pi2: Vec<f64>,
    pub final_potential: PotentialField,
}

pub fn run_pilotwave(c: &PilotWaveConfig) -> CliResult<PilotRun> {
    let g = c.grid;
    let grid = Grid2::new(g.n1, g.n2, g.q1_min, g.q2_min, g.dq1, g.dq2)?;
    let packets = c.wave.clone();
    let mut psi = WaveField::from_fn(grid, c.hbar, c.mass, |a, b| {
        packets
            .iter()
            .map(|p| {
                let (x, y) = (a - p.center[0], b - p.center[1]);
                let env = (-(x * x) / (4.0 * p.sigma[0] * p.sigma[0]) - y * y / (4.0 * p.sigma[1] * p.sigma[1])).exp();
                Complex64::from_polar(p.amplitude * env, p.momentum[0] * a + p.momentum[1] * b)
            })
            .sum()
    })?;
    let hard = PotentialField::hard_from_fn(grid, |a, b| c.potential.at(a, b))?;
    let times = c.time.grid(None)?;
    if times[times.len() - 1] <= 0.0 {
        return Err(CliError::config("pilotwave needs t_max > 0"));
    }
    let dt = (times[1] - times[0]) / c.steps_per_sample as f64;
    let stepper = SplitStepper::new(grid, c.hbar, c.mass, &hard, dt)?;
    let floor = |w: &WaveField| c.r_floor_rel * w.amplitude().into_iter().fold(0.0, f64::max);
    let mut frames = Vec::with_capacity(times.len());
    frames.push((times[0], quantum_potential(&psi, floor(&psi))?));
    for &t in &times[1..] {
        for _ in 0..c.steps_per_sample {
            stepper.step(&mut psi)?;
        }
        frames.push((t, quantum_potential(&psi, floor(&psi))?));
    }
    let path = match &c.path {
        PathConfig::Constant([a, b]) => QPath::Constant(*a, *b),
        PathConfig::Samples(rows) => QPath::Samples(rows.iter().map(|r| (r[0], r[1], r[2])).collect()),
    };
    let points = integrate_portfolio((c.pi0[0], c.pi0[1]), &hard, &frames, &path, &times)?;
    let final_potential = frames.pop().expect("at least one frame").1.with_hard(hard.v)?;
    Ok(PilotRun {
        times,
        pi1: points.iter().map(|p| p.pi1).collect(),
        pi2: points.iter().map(|p| p.pi2).collect(),
        final_potential,
    })
}

fn simulate_pilotwave(c: &PilotWaveConfig) -> CliResult<Vec<PathBuf>> {
    let run = run_pilotwave(c)?;
    let mut written = Vec::new();
    for (name, pi) in [("trader1", &run.pi1), ("trader2", &run.pi2)] {
        // Only the portfolio is defined at this stage; the other columns are nan.
        let mut s = TimeSeries::with_capacity(run.times.len());
        for (&t, &p) in run.times.iter().zip(pi.iter()) {
            s.push(t, f64::NAN, f64::NAN, f64::NAN, f64::NAN);
            *s.portfolio.last_mut().expect("pushed") = p;
        }
        let path = c.output.dir.join(format!("{name}.csv"));
        write_file(&path, &series_csv(&s))?;
        written.push(path);
        if c.output.svg {
            let path = c.output.dir.join(format!("{name}.svg"));
            write_file(&path, &line_svg(&format!("pilotwave: portfolio of {name}"), "t", "π(t)", &run.times, pi))?;
            written.push(path);
        }
    }
    let path = c.output.dir.join("potential.csv");
    write_file(&path, &field_csv(&run.final_potential))?;
    written.push(path);
    Ok(written)
}

/// Flat grid layout: one row per node, `q₁` slow. Masked `U` is `nan`.
pub fn field_csv(f: &PotentialField) -> String {
    let g = f.grid;
    let mut out = String::from("q1,q2,V,U,R,masked\n");
    for i in 0..g.n1 {
        for j in 0..g.n2 {
            let idx = g.index(i, j);
            let u = if f.mask[idx] { f64::NAN } else { f.u[idx] };
            push_row(&mut out, &[g.q1(i), g.q2(j), f.v[idx], u, f.r[idx], f.mask[idx] as u8 as f64]);
        }
    }
    out
}

// ---------------------------------------------------------------- sweeps

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    DeltaPi,
    Amplitude,
    DominantFrequency,
    Ordering,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParam {
    /// `<trader name>.<field>`.
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepParam {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        (0..self.steps)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub schema: u64,
    pub parameters: Vec<SweepParam>,
    pub objective: Objective,
    pub output: PathBuf,
}

impl SweepSpec {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let spec: Self = serde_json::from_str(&text)?;
        if spec.schema != crate::config::SCHEMA_VERSION {
            return Err(CliError::config(format!("unsupported sweep schema {}", spec.schema)));
        }
        Ok(spec)
    }

    fn validate(&self, base: &Value) -> CliResult<()> {
        if self.parameters.is_empty() || self.parameters.len() > 2 {
            return Err(CliError::config("a sweep takes one or two parameters"));
        }
        for p in &self.parameters {
            if !p.min.is_finite() || !p.max.is_finite() {
                return Err(CliError::config(format!("sweep range of {} must be finite", p.name)));
            }
            match p.steps {
                0 => return Err(CliError::config(format!("{}: steps must be ≥ 1", p.name))),
                1 if p.min != p.max => {
                    return Err(CliError::config(format!("{}: a single step needs min = max", p.name)))
                }
                _ => {}
            }
            locate(base, &p.name)?;
        }
        if self.parameters.len() == 2 && self.parameters[0].name == self.parameters[1].name {
            return Err(CliError::config("the two sweep parameters must differ"));
        }
        Ok(())
    }
}

/// Index of the trader and field named by `trader.field`.
fn locate(cfg: &Value, name: &str) -> CliResult<(usize, String)> {
    let unknown = || CliError::config(format!("unknown sweep parameter {name:?}; expected <trader>.<numeric field>"));
    let (trader, field) = name.split_once('.').ok_or_else(unknown)?;
    let traders = cfg.get("traders").and_then(Value::as_array).ok_or_else(unknown)?;
    let idx = traders
        .iter()
        .position(|t| t.get("name").and_then(Value::as_str) == Some(trader))
        .ok_or_else(unknown)?;
    match traders[idx].get(field) {
        Some(v) if v.is_number() => Ok((idx, field.to_string())),
        _ => Err(unknown()),
    }
}

fn assign(cfg: &mut Value, name: &str, value: f64) -> CliResult<()> {
    let (idx, field) = locate(cfg, name)?;
    let json = if value.fract() == 0.0 && value.abs() < 1e15 && cfg["traders"][idx][&field].is_u64() {
        Value::from(value as u64)
    } else {
        serde_json::Number::from_f64(value)
            .map(Value::Number)
            .ok_or_else(|| CliError::config(format!("{name}: value {value} is not representable")))?
    };
    cfg["traders"][idx][&field] = json;
    Ok(())
}

fn objective_columns(cfg: &ExperimentConfig, objective: Objective) -> CliResult<Vec<String>> {
    let names: Vec<String> = match cfg {
        ExperimentConfig::Model1(c) => c.traders.iter().map(|t| t.name.clone()).collect(),
        ExperimentConfig::Model2(c) => c.traders.iter().map(|t| t.name.clone()).collect(),
        ExperimentConfig::Model3(c) => c.traders.iter().map(|t| t.name.clone()).collect(),
        ExperimentConfig::PilotWave(_) => return Err(CliError::config("sweeps are defined for model1, model2 and model3")),
    };
    Ok(match objective {
        Objective::DeltaPi => names.iter().map(|n| format!("delta_pi_{n}")).collect(),
        Objective::Amplitude => names.iter().map(|n| format!("amplitude_{n}")).collect(),
        Objective::DominantFrequency => names.iter().map(|n| format!("dominant_frequency_{n}")).collect(),
        Objective::Ordering => {
            if !matches!(cfg, ExperimentConfig::Model3(_)) || names.len() != 2 {
                return Err(CliError::config("the ordering objective needs a model3 config with exactly two traders"));
            }
            vec![format!("delta_pi_{}", names[0]), format!("delta_pi_{}", names[1]), "sign".into()]
        }
    })
}

/// Objective values at one configuration.
pub fn evaluate(cfg: &ExperimentConfig, objective: Objective) -> CliResult<Vec<f64>> {
    match objective {
        Objective::DeltaPi => match cfg {
            ExperimentConfig::Model2(c) => c
                .traders
                .iter()
                .map(|t| {
                    let spec = t.spec()?;
                    Ok(delta_pi_model2((t.shares + t.cash) as f64, spec.nominal_density())?)
                })
                .collect(),
            ExperimentConfig::Model3(c) => c
                .traders
                .iter()
                .map(|t| Ok(delta_pi_model3(&t.params()?, t.loi as f64)?))
                .collect(),
            _ => Err(CliError::config("delta_pi is defined for model2 and model3")),
        },
        Objective::Amplitude => Ok(trader_series(cfg)?.iter().map(|(_, s)| peak_to_peak(&s.portfolio)).collect()),
        Objective::DominantFrequency => Ok(trader_series(cfg)?
            .iter()
            .map(|(_, s)| dominant_frequency(&s.times, &s.portfolio))
            .collect()),
        Objective::Ordering => match cfg {
            ExperimentConfig::Model3(c) if c.traders.len() == 2 => {
                let (a, b) = (&c.traders[0], &c.traders[1]);
                if a.loi != b.loi {
                    return Err(CliError::config("ordering compares traders with equal I"));
                }
                let cmp = compare_traders(&a.params()?, &b.params()?, a.loi as f64)?;
                let sign = match cmp.ordering {
                    Ordering::Less => -1.0,
                    Ordering::Equal => 0.0,
                    Ordering::Greater => 1.0,
                };
                Ok(vec![cmp.delta1, cmp.delta2, sign])
            }
            _ => Err(CliError::config("the ordering objective needs a model3 config with exactly two traders")),
        },
    }
}

/// Thread pool honouring `QMARKET_THREADS`.
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("QMARKET_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| CliError::config(format!("QMARKET_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::numerical(format!("thread pool: {e}")))
}

/// Evaluates the objective on the parameter grid; returns the CSV text.
pub fn sweep(base: &Value, spec: &SweepSpec) -> CliResult<String> {
    spec.validate(base)?;
    let base_cfg = ExperimentConfig::from_value(base.clone())?;
    let columns = objective_columns(&base_cfg, spec.objective)?;

    let axes: Vec<Vec<f64>> = spec.parameters.iter().map(SweepParam::values).collect();
    let mut points: Vec<Vec<f64>> = axes[0].iter().map(|&v| vec![v]).collect();
    if let Some(second) = axes.get(1) {
        points = points
            .into_iter()
            .flat_map(|p| second.iter().map(move |&v| vec![p[0], v]))
            .collect();
    }
    let pool = thread_pool()?;
    let results: Vec<CliResult<Vec<f64>>> = pool.install(|| {
        points
            .par_iter()
            .map(|point| {
                let mut cfg = base.clone();
                for (p, &v) in spec.parameters.iter().zip(point) {
                    assign(&mut cfg, &p.name, v)?;
                }
                evaluate(&ExperimentConfig::from_value(cfg)?, spec.objective)
            })
            .collect()
    });

    let mut out = String::new();
    let header: Vec<String> = spec.parameters.iter().map(|p| p.name.clone()).chain(columns).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (point, res) in points.iter().zip(results) {
        let row: Vec<f64> = point.iter().copied().chain(res?).collect();
        push_row(&mut out, &row);
    }
    Ok(out)
}

// ---------------------------------------------------------- oracle check

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub text: String,
    pub passed: bool,
}

/// Default discretised band for a Model II trader: resonance ± max(40, 200γ′/Ω).
pub fn default_window_model2(spec: &qmarket_core::reservoir_info::ReservoirSpecII) -> CliResult<KWindow> {
    let half = 40.0f64.max(200.0 * spec.decay().gamma_prime / spec.omega_slope);
    Ok(KWindow::new(spec.resonance() - half, spec.resonance() + half, 4001)?)
}

/// Default band for Model III: centred between `ωˢ` and `ωᶜ` so that the
/// finite-band level shifts of the two trader modes cancel.
pub fn default_window_model3(p: &Model3Params) -> CliResult<KWindow> {
    let slope = p.omega_r_slope;
    let centre = 0.5 * (p.omega_s + p.omega_c) / slope;
    let half = (20.0 / slope)
        .max(2.0 * (p.omega_loi / slope - centre).abs() + 5.0 / slope)
        .max(200.0 * p.decay_rate() / slope)
        .max(20.0);
    Ok(KWindow::new(centre - half, centre + half, 4001)?)
}

fn oracle_outcome(res: qmarket_core::Result<OracleRun>, text: &mut String, name: &str) -> CliResult<Option<OracleRun>> {
    match res {
        Ok(run) => Ok(Some(run)),
        Err(CoreError::WindowTooNarrow { fraction }) => {
            let _ = writeln!(
                text,
                "trader={name} WARNING boundary_leakage={} exceeds 0.01; widen the k window result=FAIL",
                fmt_g15(fraction)
            );
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn oracle_check(cfg: &ExperimentConfig) -> CliResult<OracleReport> {
    let mut text = String::new();
    let mut passed = true;
    match cfg {
        ExperimentConfig::Model1(c) => {
            let _ = writeln!(text, "oracle-check model=model1 reference=fock-sector tolerance=1e-08");
            let grid = c.time.grid(None)?;
            for t in &c.traders {
                check_model1_total(t)?;
                let fast = portfolio_series(&t.params()?, &t.init(), &grid)?;
                let exact = exact_series(&t.params()?, &t.init(), &grid)?;
                let mut worst = 0.0f64;
                for (a, b) in [
                    (&fast.n_shares, &exact.n_shares),
                    (&fast.n_cash, &exact.n_cash),
                    (&fast.n_loi, &exact.n_loi),
                ] {
                    worst = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(worst, f64::max);
                }
                let ok = worst < 1e-8;
                passed &= ok;
                let _ = writeln!(text, "trader={} max_discrepancy={} result={}", t.name, fmt_g15(worst), verdict(ok));
            }
        }
        ExperimentConfig::Model2(c) => {
            let _ = writeln!(text, "oracle-check model=model2 reference=discretized-band tolerance=0.05");
            for t in &c.traders {
                let spec = t.spec()?;
                let grid = c.time.grid(Some(1.0 / spec.decay().gamma_prime))?;
                let window = match &t.oracle {
                    Some(w) => w.build()?,
                    None => default_window_model2(&spec)?,
                };
                let Some(run) = oracle_outcome(discretized_oracle_model2(&spec, &t.init(), &window, &grid), &mut text, &t.name)?
                else {
                    passed = false;
                    continue;
                };
                let closed = model2_series(&spec, &t.init(), &grid)?;
                let pi0 = (t.shares + t.cash) as f64;
                let d_oracle = run.series.portfolio.last().copied().unwrap_or(pi0) - pi0;
                let d_closed = closed.portfolio.last().copied().unwrap_or(pi0) - pi0;
                let target = delta_pi_model2(pi0, spec.nominal_density())?;
                let rel = relative(d_oracle, d_closed);
                let drift = drift(&run.series.conserved);
                let ok = rel <= 0.05 && drift <= 1e-6;
                passed &= ok;
                let _ = writeln!(
                    text,
                    "trader={} delta_pi_oracle={} delta_pi_closed_form={} delta_pi_limit={} relative_discrepancy={} conservation_drift={} leakage={} n_k={} result={}",
                    t.name,
                    fmt_g15(d_oracle),
                    fmt_g15(d_closed),
                    fmt_g15(target),
                    fmt_g15(rel),
                    fmt_g15(drift),
                    fmt_g15(run.leakage),
                    window.n_k,
                    verdict(ok)
                );
            }
        }
        ExperimentConfig::Model3(c) => {
            let _ = writeln!(text, "oracle-check model=model3 reference=discretized-band tolerance=0.1");
            for t in &c.traders {
                let p = t.params()?;
                let grid = c.time.grid(Some(1.0 / p.decay_rate()))?;
                let window = match &t.oracle {
                    Some(w) => w.build()?,
                    None => default_window_model3(&p)?,
                };
                let Some(run) = oracle_outcome(discretized_oracle_model3(&p, &t.init(), &window, &grid), &mut text, &t.name)?
                else {
                    passed = false;
                    continue;
                };
                let closed = model3_series(&p, &t.init(), &grid, t.full_integral)?;
                let pi0 = (t.shares + t.cash) as f64;
                let d_oracle = run.series.portfolio.last().copied().unwrap_or(pi0) - pi0;
                let d_closed = closed.portfolio.last().copied().unwrap_or(pi0) - pi0;
                let limit = delta_pi_model3(&p, t.loi as f64)?;
                let diff = (d_oracle - d_closed).abs();
                let drift = drift(&run.series.conserved);
                let ok = diff <= (0.1 * d_closed.abs()).max(1e-9) && drift <= 1e-6;
                passed &= ok;
                let _ = writeln!(
                    text,
                    "trader={} delta_pi_oracle={} delta_pi_closed_form={} delta_pi_limit={} abs_discrepancy={} conservation_drift={} leakage={} n_k={} result={}",
                    t.name,
                    fmt_g15(d_oracle),
                    fmt_g15(d_closed),
                    fmt_g15(limit),
                    fmt_g15(diff),
                    fmt_g15(drift),
                    fmt_g15(run.leakage),
                    window.n_k,
                    verdict(ok)
                );
            }
        }
        ExperimentConfig::PilotWave(_) => {
            return Err(CliError::config("oracle-check is defined for model1, model2 and model3"));
        }
    }
    let _ = writeln!(text, "overall={}", verdict(passed));
    Ok(OracleReport { text, passed })
}

fn check_model1_total(t: &Model1Trader) -> CliResult<()> {
    if t.init().total() > 8 {
        return Err(CliError::config(format!(
            "trader {}: oracle-check needs S + K + I ≤ 8, got {}",
            t.name,
            t.init().total()
        )));
    }
    Ok(())
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn drift(values: &[f64]) -> f64 {
    values.first().map_or(0.0, |&m0| values.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max))
}

// --------------------------------------------------------------- figures

/// The three closed-market parameter sets of the figures, as configs.
pub fn figure_configs(out: &Path) -> Vec<(String, ExperimentConfig)> {
    let trader = |name: &str, ws: f64, wc: f64, big: f64| Model1Trader {
        name: name.into(),
        omega_s: ws,
        omega_c: wc,
        omega_loi: big,
        lambda_inf: 0.5,
        shares: 30,
        cash: 15,
        loi: 5,
    };
    let cfg = |traders: Vec<Model1Trader>| {
        ExperimentConfig::Model1(OperatorConfig {
            schema: crate::config::SCHEMA_VERSION,
            model: "model1".into(),
            traders,
            time: TimeConfig {
                t_max: Some(20.0),
                decay_times: None,
                n_samples: 2001,
            },
            output: OutputConfig {
                dir: out.to_path_buf(),
                svg: true,
            },
        })
    };
    vec![
        (
            "figure1".into(),
            cfg(vec![trader("figure1_omega20", 20.0, 20.0, 3.0), trader("figure1_omega2", 2.0, 2.0, 3.0)]),
        ),
        (
            "figure2".into(),
            cfg(vec![trader("figure2_trader1", 1.0, 2.0, 5.0), trader("figure2_trader2", 1.0, 2.0, 1.0)]),
        ),
        (
            "figure3".into(),
            cfg(vec![trader("figure3_trader1", 1.0, 2.0, 10.0), trader("figure3_trader2", 1.0, 2.0, 1.0)]),
        ),
    ]
}

pub fn figures(out: &Path) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (label, cfg) in figure_configs(out) {
        written.extend(emit_series(cfg.output(), &trader_series(&cfg)?, &label)?);
    }
    Ok(written)
}

// -------------------------------------------------------------- critical

#[derive(Debug, Clone)]
pub struct CriticalArgs {
    pub omega1: f64,
    pub omega2: f64,
    pub gamma2: f64,
    pub omega_s: f64,
    pub omega_c: f64,
    pub omega_r_slope: f64,
    pub lambda_inf: f64,
    pub loi: f64,
    pub upper: Option<f64>,
}

pub fn critical(a: &CriticalArgs) -> CliResult<String> {
    let base = Model3Params {
        omega_s: a.omega_s,
        omega_c: a.omega_c,
        omega_loi: a.omega2,
        omega_r_slope: a.omega_r_slope,
        lambda_inf: a.lambda_inf,
        gamma: a.gamma2,
        n_r_density: qmarket_core::reservoir::Density::Constant(0.0),
    };
    base.validate()?;
    Ok(match critical_gamma1(a.omega1, a.omega2, a.gamma2, &base, a.loi, a.upper)? {
        Crossing::Root { gamma1, residual } => {
            format!("crossing gamma1={} residual={}\n", fmt_g15(gamma1), fmt_g15(residual))
        }
        Crossing::NoCrossing => "no_crossing\n".into(),
    })
}

