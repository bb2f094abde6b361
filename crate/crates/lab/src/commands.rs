//! One function per subcommand.

use std::io::Write;

use horolab_core::approx::{approximant, ApproxParams};
use horolab_core::experiment::{
    discrepancy_experiment, prime_nonconcentration, smallaps_experiment, sieve_bound, sparse_bound,
    venkatesh_scan, ExperimentRecord, SieveSetup, DEFAULT_BETA,
};
use horolab_core::modular::{fundamental_period, invariant_height, r_parameter, reduce_point};
use horolab_core::observable::TestFunction;
use horolab_core::orbit::{OrbitPlan, Weighting};
use horolab_core::sieve::{
    goldston_lemma1, goldston_lemma2, nu_average, nu_progression_average, siegel_walfisz_check,
    DivisorWeight, NuWeights, SieveLevel, SieveTable,
};
use horolab_core::SurfacePoint;
use serde::Serialize;

use crate::exec::Parallel;
use crate::options::{OutFormat, Options};
use crate::output::{write_json, write_rows};
use crate::{parse, sample, Command, LabError};

/// θ used when neither `--theta` nor `--R` is given.
pub const DEFAULT_THETA: f64 = 0.1;
pub const DEFAULT_FUNCTION: &str = "height:Y=2,w=0.25";

/// Row of the sieve calibration table. `k` holds the divisor parameter for
/// the identities, the modulus for progressions and `N` for the ν average.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CalibrationRow {
    pub op: String,
    #[serde(rename = "R")]
    pub r: f64,
    pub k: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Debug, Serialize)]
struct PointRow {
    x: f64,
    y: f64,
    gamma: [i64; 4],
}

#[derive(Debug, Serialize)]
struct ElementRow {
    rep: String,
    gamma: [i64; 4],
    y0: f64,
}

#[derive(Debug, Serialize)]
struct PeriodRow {
    #[serde(rename = "T")]
    t: f64,
    #[serde(rename = "yT")]
    y_t: f64,
    m: i64,
    n: i64,
    y0: f64,
}

#[derive(Debug, Serialize)]
struct RRow {
    #[serde(rename = "T")]
    t: f64,
    r: f64,
    #[serde(rename = "yT")]
    y_t: f64,
}

fn usage(msg: impl Into<String>) -> LabError {
    LabError::Usage(msg.into())
}

impl Options {
    pub fn point(&self) -> Result<SurfacePoint, LabError> {
        match &self.g {
            Some(g) => Ok(SurfacePoint::new(parse::element(g)?)?),
            None => Ok(sample::haar_point(&mut sample::rng(self.seed.unwrap_or(0)))),
        }
    }

    pub fn function(&self) -> Result<TestFunction, LabError> {
        parse::test_function(self.f.as_deref().unwrap_or(DEFAULT_FUNCTION))
    }

    pub fn weighting(&self) -> Result<Weighting, LabError> {
        parse::weighting(self.weight.as_deref().unwrap_or("uniform"))
    }

    pub fn times(&self) -> Result<Vec<f64>, LabError> {
        match &self.t {
            Some(ts) if !ts.is_empty() => Ok(ts.clone()),
            _ => Err(usage("--T is required")),
        }
    }

    pub fn theta_or_default(&self) -> f64 {
        self.theta.unwrap_or(DEFAULT_THETA)
    }

    pub fn beta_or_default(&self) -> f64 {
        self.beta.unwrap_or(DEFAULT_BETA)
    }

    fn format(&self, default: OutFormat) -> OutFormat {
        self.out.unwrap_or(default)
    }
}

fn table(limit: f64) -> Result<SieveTable, LabError> {
    if !(limit >= 0.0) {
        return Err(usage(format!("table limit must be non-negative, got {limit}")));
    }
    Ok(SieveTable::new((limit.ceil() as u64).max(100))?)
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(0.0, f64::max)
}

/// Runs one subcommand, writing its output to `out`.
pub fn run(command: Command, opts: &Options, out: &mut dyn Write) -> Result<(), LabError> {
    let exec = Parallel::new(opts.threads)?;
    match command {
        Command::SieveCheck => sieve_check(opts, out),
        Command::SwCheck => {
            let row = sw_row(opts)?;
            write_rows(&[row], opts.format(OutFormat::Csv), out)
        }
        Command::Reduce => reduce(opts, out),
        Command::FundamentalPeriod => {
            let p = opts.point()?;
            let rows = opts
                .times()?
                .into_iter()
                .map(|t| {
                    let pd = fundamental_period(&p, t)?;
                    Ok(PeriodRow {
                        t,
                        y_t: pd.y_t,
                        m: pd.witness.0,
                        n: pd.witness.1,
                        y0: pd.y0,
                    })
                })
                .collect::<Result<Vec<_>, LabError>>()?;
            write_rows(&rows, opts.format(OutFormat::Json), out)
        }
        Command::RParam => {
            let p = opts.point()?;
            let rows = opts
                .times()?
                .into_iter()
                .map(|t| {
                    Ok(RRow {
                        t,
                        r: r_parameter(&p, t)?,
                        y_t: fundamental_period(&p, t.min(horolab_core::modular::MAX_PERIOD_TIME))?.y_t,
                    })
                })
                .collect::<Result<Vec<_>, LabError>>()?;
            write_rows(&rows, opts.format(OutFormat::Json), out)
        }
        Command::Approx => {
            let t = opts.times()?[0];
            let params = ApproxParams {
                t,
                t0: opts.t0.unwrap_or(0.0),
                k: opts.window.unwrap_or_else(|| t.cbrt()),
                delta: opts.delta.unwrap_or(0.1),
                eta: opts.eta,
                samples: opts.samples.unwrap_or(200),
            };
            if opts.format(OutFormat::Json) != OutFormat::Json {
                return Err(usage("approx writes JSON only"));
            }
            write_json(&approximant(&opts.point()?, &params)?, out)
        }
        Command::OrbitSum => {
            let rows = orbit_sums(opts, &exec)?;
            write_rows(&rows, opts.format(OutFormat::Csv), out)
        }
        Command::Discrepancy => {
            let ts = opts.times()?;
            let weight = opts.weighting()?;
            let table = table(if weight == Weighting::Uniform { 0.0 } else { max_of(&ts) })?;
            let setup = SieveSetup {
                table: &table,
                level: opts.r,
                theta: opts.theta_or_default(),
                beta: opts.beta_or_default(),
            };
            let rows = discrepancy_experiment(&opts.point()?, &ts, weight, &opts.function()?, &setup, &exec)?;
            write_rows(&rows, opts.format(OutFormat::Csv), out)
        }
        Command::Primes => {
            let t = opts.times()?[0];
            let table = table(t)?;
            let report =
                prime_nonconcentration(&opts.point()?, t, &opts.function()?, opts.theta_or_default(), &table, &exec)?;
            write_rows(&[report], opts.format(OutFormat::Json), out)
        }
        Command::Venkatesh => {
            let t = opts.times()?[0];
            let s = opts.s.clone().unwrap_or_else(|| vec![1.0]);
            let rows = venkatesh_scan(&opts.point()?, t, &s, &opts.function()?, opts.beta_or_default(), &exec)?;
            write_rows(&rows, opts.format(OutFormat::Csv), out)
        }
        Command::Smallaps => {
            let period = opts.period.ok_or_else(|| usage("--period is required"))?;
            let q = opts.q.ok_or_else(|| usage("--q is required"))?;
            let s = steps(opts.s.as_deref().unwrap_or(&[1.0]))?;
            let rows = smallaps_experiment(
                period,
                opts.x0.unwrap_or(0.0),
                q,
                &s,
                opts.window.unwrap_or(1e5),
                &opts.function()?,
                opts.beta_or_default(),
                &exec,
            )?;
            write_rows(&rows, opts.format(OutFormat::Csv), out)
        }
    }
}

fn steps(s: &[f64]) -> Result<Vec<u64>, LabError> {
    s.iter()
        .map(|&x| {
            if x >= 1.0 && x.fract() == 0.0 && x < 9.0e15 {
                Ok(x as u64)
            } else {
                Err(usage(format!("steps must be positive integers here, got {x}")))
            }
        })
        .collect()
}

fn reduce(opts: &Options, out: &mut dyn Write) -> Result<(), LabError> {
    let format = opts.format(OutFormat::Json);
    match (&opts.z, &opts.g) {
        (Some(z), None) => {
            let (w, gamma) = reduce_point(parse::point(z)?)?;
            let row = PointRow {
                x: w.re,
                y: w.im,
                gamma: gamma.entries(),
            };
            write_rows(&[row], format, out)
        }
        (None, Some(_)) => {
            let p = opts.point()?;
            let row = ElementRow {
                rep: p.rep().to_string(),
                gamma: p.reducer().entries(),
                y0: invariant_height(&p),
            };
            write_rows(&[row], format, out)
        }
        _ => Err(usage("reduce needs exactly one of --z or --g")),
    }
}

/// Orbit sums for every `(T, s)`, sorted by `T` then `s`.
pub fn orbit_sums(opts: &Options, exec: &Parallel) -> Result<Vec<ExperimentRecord>, LabError> {
    let mut ts = opts.times()?;
    ts.sort_by(f64::total_cmp);
    let mut ss = opts.s.clone().unwrap_or_else(|| vec![1.0]);
    ss.sort_by(f64::total_cmp);
    let weight = opts.weighting()?;
    let f = opts.function()?;
    let xi = opts.point()?;
    let (theta, beta) = (opts.theta_or_default(), opts.beta_or_default());
    let arithmetic = weight != Weighting::Uniform;
    let table = table(if arithmetic { max_of(&ts) } else { 0.0 })?;
    let mut rows = Vec::new();
    for &t in &ts {
        let level = match opts.r {
            Some(r) => SieveLevel::new(r)?,
            None => SieveLevel::from_exponent(t, theta)?,
        };
        let nu = match weight {
            Weighting::Nu | Weighting::Progression { .. } => Some(NuWeights::new(level, &table)?),
            _ => None,
        };
        let r = r_parameter(&xi, t)?;
        let y_t = fundamental_period(&xi, t.min(horolab_core::modular::MAX_PERIOD_TIME))?.y_t;
        for &s in &ss {
            let plan = OrbitPlan::discrete(&xi, t, s, weight, f.kind, arithmetic.then_some(&table), nu.as_ref())?;
            let sum = horolab_core::experiment::PlanExecutor::run(exec, &plan)?;
            rows.push(ExperimentRecord {
                t,
                s,
                weight: weight.label().into(),
                sum,
                integral: f.integral,
                discrepancy: (sum - f.integral).abs(),
                r,
                y_t,
                bound: if arithmetic { sieve_bound(r, theta, level.r()) } else { sparse_bound(s, r, beta) },
                theta,
                beta,
                level: level.r(),
            });
        }
    }
    Ok(rows)
}

fn sieve_check(opts: &Options, out: &mut dyn Write) -> Result<(), LabError> {
    let op = opts.op.as_deref().unwrap_or("calibration");
    let rows = match op {
        "calibration" => calibration()?,
        _ => sieve_rows(op, opts)?,
    };
    write_rows(&rows, opts.format(OutFormat::Csv), out)
}

/// Identity rows for one `--op`.
pub fn sieve_rows(op: &str, opts: &Options) -> Result<Vec<CalibrationRow>, LabError> {
    let ks = opts.k.clone().unwrap_or_else(|| vec![1]);
    let row = |r: f64, k: u64, lhs: f64, rhs: f64| CalibrationRow {
        op: op.into(),
        r,
        k,
        lhs,
        rhs,
        residual: lhs - rhs,
    };
    match op {
        "lemma1" | "lemma1-phi" => {
            let r = opts.r.unwrap_or(1e4);
            let t = table(r)?;
            let kind = if op == "lemma1" { DivisorWeight::Unit } else { DivisorWeight::Phi };
            ks.iter()
                .map(|&k| {
                    let c = goldston_lemma1(r, k, kind, &t)?;
                    Ok(row(r, k, c.lhs, c.rhs))
                })
                .collect()
        }
        "lemma2" => {
            let r = opts.r.unwrap_or(1e5);
            let t = table(r)?;
            ks.iter()
                .map(|&k| {
                    let c = goldston_lemma2(r, k, &t)?;
                    Ok(row(r, k, c.lhs, c.rhs))
                })
                .collect()
        }
        "progression" => {
            let r = opts.r.unwrap_or(50.0);
            let (q, j) = (opts.q.unwrap_or(1), opts.j.unwrap_or(1));
            let (start, len) = (opts.start.unwrap_or(1), opts.len.unwrap_or(1_000_000));
            let limit = q
                .checked_mul(start.saturating_add(len))
                .and_then(|v| v.checked_add(j))
                .ok_or_else(|| usage("progression range overflows"))?;
            let t = table(limit as f64)?;
            let rep = nu_progression_average(start, len, q, j, &SieveLevel::new(r)?, &t)?;
            Ok(vec![row(r, q, rep.lhs, rep.main_term)])
        }
        "nu-average" => {
            let r = opts.r.unwrap_or(100.0);
            let n = opts.len.unwrap_or(10_000_000);
            let t = table(n as f64)?;
            Ok(vec![row(r, n, nu_average(n, &SieveLevel::new(r)?, &t)?, 1.0)])
        }
        "sw" => Ok(vec![sw_row(opts)?]),
        _ => Err(usage(format!(
            "unknown --op {op:?}; expected lemma1, lemma1-phi, lemma2, progression, nu-average, sw or calibration"
        ))),
    }
}

/// `siegel_walfisz_check` for the indicator of `n ≡ j (mod q)`.
fn sw_row(opts: &Options) -> Result<CalibrationRow, LabError> {
    let r = opts.r.unwrap_or(20.0);
    let (q, j) = (opts.q.unwrap_or(3), opts.j.unwrap_or(1));
    let (start, len) = (opts.start.unwrap_or(1), opts.len.unwrap_or(10_000_000));
    if q == 0 || q > 1 << 20 {
        return Err(usage(format!("--q must lie in 1..=2^20, got {q}")));
    }
    let f: Vec<f64> = (0..q).map(|n| if n == j % q { 1.0 } else { 0.0 }).collect();
    let t = table(start.saturating_add(len) as f64)?;
    let rep = siegel_walfisz_check(start, len, &f, &SieveLevel::new(r)?, &t)?;
    Ok(CalibrationRow {
        op: "sw".into(),
        r,
        k: q,
        lhs: rep.weighted,
        rhs: rep.coprime_side,
        residual: rep.residual,
    })
}

/// The fixed set of sieve checks whose residuals are kept as calibration
/// values.
pub fn calibration() -> Result<Vec<CalibrationRow>, LabError> {
    let mut rows = Vec::new();
    let with = |r: f64, k: &[u64]| Options {
        r: Some(r),
        k: Some(k.to_vec()),
        ..Options::default()
    };
    rows.extend(sieve_rows("lemma1", &with(1e4, &[1, 2, 3, 4, 6]))?);
    rows.extend(sieve_rows("lemma1-phi", &with(1e4, &[2]))?);
    rows.extend(sieve_rows("lemma2", &with(1e5, &[1, 2]))?);
    for q in 1..=3 {
        let opts = Options {
            q: Some(q),
            j: Some(1),
            ..with(50.0, &[])
        };
        rows.extend(sieve_rows("progression", &opts)?);
    }
    rows.extend(sieve_rows("nu-average", &with(100.0, &[]))?);
    rows.extend(sieve_rows("sw", &with(20.0, &[]))?);
    Ok(rows)
}
