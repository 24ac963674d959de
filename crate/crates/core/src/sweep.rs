//! Parameter sweeps: one trajectory per value of a swept parameter, laid
//! out as a flat `t,axis,k,trusted,method` grid.
//!
//! Everything here is `f64`. Cells (one axis value each) are independent
//! and may be evaluated in parallel; rows are assembled afterwards in a
//! fixed order, so output bytes do not depend on scheduling.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::oracle::{solve_abm_fractional, solve_exact_classical, Method, Trajectory};
use crate::series::{build_series, DEFAULT_ORDER, MAX_ORDER};

/// ABM steps per output interval.
pub const ABM_SUBSTEPS: usize = 16;
/// Exact CSV header.
pub const CSV_HEADER: &str = "t,axis,k,trusted,method";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    P,
    Q,
    Mu,
    Alpha,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::P => "p",
            Axis::Q => "q",
            Axis::Mu => "mu",
            Axis::Alpha => "alpha",
        }
    }

    pub fn get(self, params: &ModelParams<f64>) -> f64 {
        match self {
            Axis::P => params.p,
            Axis::Q => params.q,
            Axis::Mu => params.mu,
            Axis::Alpha => params.alpha,
        }
    }

    pub fn set(self, params: ModelParams<f64>, value: f64) -> ModelParams<f64> {
        match self {
            Axis::P => ModelParams { p: value, ..params },
            Axis::Q => ModelParams { q: value, ..params },
            Axis::Mu => ModelParams {
                mu: value,
                ..params
            },
            Axis::Alpha => ModelParams {
                alpha: value,
                ..params
            },
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(Axis::P),
            "q" => Ok(Axis::Q),
            "mu" => Ok(Axis::Mu),
            "alpha" => Ok(Axis::Alpha),
            _ => Err(Error::Config(format!(
                "unknown axis {s:?}; expected p, q, mu or alpha"
            ))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Backend selection. `Both` runs the series next to the matching oracle:
/// the closed form where α = 1, ABM otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMethod {
    Series,
    Abm,
    Exact,
    Both,
}

impl SweepMethod {
    pub fn name(self) -> &'static str {
        match self {
            SweepMethod::Series => "series",
            SweepMethod::Abm => "abm",
            SweepMethod::Exact => "exact",
            SweepMethod::Both => "both",
        }
    }

    /// Backends run for one parameter set, series first.
    pub fn backends(self, params: &ModelParams<f64>) -> Vec<Method> {
        match self {
            SweepMethod::Series => vec![Method::Series],
            SweepMethod::Abm => vec![Method::AbmFractional],
            SweepMethod::Exact => vec![Method::ExactClassical],
            SweepMethod::Both if params.is_classical() => {
                vec![Method::Series, Method::ExactClassical]
            }
            SweepMethod::Both => vec![Method::Series, Method::AbmFractional],
        }
    }
}

impl FromStr for SweepMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(SweepMethod::Series),
            "abm" => Ok(SweepMethod::Abm),
            "exact" => Ok(SweepMethod::Exact),
            "both" => Ok(SweepMethod::Both),
            _ => Err(Error::Config(format!(
                "unknown method {s:?}; expected series, abm, exact or both"
            ))),
        }
    }
}

impl fmt::Display for SweepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `count` evenly spaced points from `min` to `max`, both included exactly.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let step = (max - min) / (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        max
                    } else {
                        min + step * i as f64
                    }
                })
                .collect()
        }
    }
}

/// Single trajectory from the chosen backend(s) on `samples` evenly spaced
/// times in `[0, t_max]`. `Both` yields the series followed by its oracle.
pub fn run_solve(
    params: &ModelParams<f64>,
    t_max: f64,
    samples: usize,
    method: SweepMethod,
    order: usize,
) -> Result<Vec<Trajectory<f64>>> {
    params.validate()?;
    check_time_grid(t_max, samples)?;
    let times = linspace(0.0, t_max, samples);
    method
        .backends(params)
        .into_iter()
        .map(|m| solve_on_grid(params, &times, m, order))
        .collect()
}

fn check_time_grid(t_max: f64, samples: usize) -> Result<()> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::param(
            "t_max",
            format!("must be finite and > 0, got {t_max}"),
        ));
    }
    if samples < 2 {
        return Err(Error::param(
            "samples",
            format!("need at least 2, got {samples}"),
        ));
    }
    Ok(())
}

/// `times` must be an evenly spaced grid starting at 0.
fn solve_on_grid(
    params: &ModelParams<f64>,
    times: &[f64],
    method: Method,
    order: usize,
) -> Result<Trajectory<f64>> {
    match method {
        Method::Series => Trajectory::from_series(&build_series(params, order)?, times),
        Method::ExactClassical => solve_exact_classical(params, times),
        Method::AbmFractional => {
            let intervals = times.len() - 1;
            let t_end = *times.last().expect("grid has two or more points");
            let fine = solve_abm_fractional(params, t_end, intervals * ABM_SUBSTEPS)?;
            let values: Vec<f64> = (0..=intervals)
                .map(|i| fine.values[i * ABM_SUBSTEPS])
                .collect();
            Ok(Trajectory {
                times: times.to_vec(),
                trusted: vec![true; values.len()],
                values,
                method,
            })
        }
    }
}

/// Largest relative series-vs-oracle gap over the samples where the
/// series is trusted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub oracle: Method,
    pub max_relative_gap: f64,
    /// Time of the largest gap; `None` when no sample is trusted.
    pub at_t: Option<f64>,
    pub trusted_samples: usize,
    pub samples: usize,
}

pub fn compare_backends(
    params: &ModelParams<f64>,
    t_max: f64,
    samples: usize,
    order: usize,
) -> Result<Comparison> {
    let runs = run_solve(params, t_max, samples, SweepMethod::Both, order)?;
    let (series, oracle) = (&runs[0], &runs[1]);
    let mut cmp = Comparison {
        oracle: oracle.method,
        max_relative_gap: 0.0,
        at_t: None,
        trusted_samples: 0,
        samples,
    };
    for i in 0..samples {
        if !series.trusted[i] {
            continue;
        }
        cmp.trusted_samples += 1;
        let gap = ((series.values[i] - oracle.values[i]) / oracle.values[i]).abs();
        if cmp.at_t.is_none() || gap > cmp.max_relative_gap || gap.is_nan() {
            cmp.max_relative_gap = gap;
            cmp.at_t = Some(series.times[i]);
        }
    }
    Ok(cmp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    pub base: ModelParams<f64>,
    pub axis: Axis,
    pub axis_min: f64,
    pub axis_max: f64,
    pub axis_count: usize,
    pub t_max: f64,
    pub t_count: usize,
    pub order: usize,
    pub method: SweepMethod,
}

pub const PRESET_NAMES: [&str; 5] = [
    "fig-ktq",
    "fig-ktp",
    "fig-ktmu",
    "fig-ktq-frac",
    "fig-ktalpha",
];

impl Default for SweepConfig {
    /// The `fig-ktq` preset.
    fn default() -> Self {
        Self {
            base: ModelParams::reference(),
            axis: Axis::Q,
            axis_min: 0.05,
            axis_max: 0.45,
            axis_count: 21,
            t_max: 2.0,
            t_count: 41,
            order: DEFAULT_ORDER,
            method: SweepMethod::Series,
        }
    }
}

impl SweepConfig {
    /// Named figure presets. Axis ranges are illustrative choices within
    /// conventional economic ranges; the figures they imitate publish none.
    pub fn preset(name: &str) -> Result<Self> {
        let d = Self::default();
        let frac = ModelParams::reference().with_alpha(0.8);
        let cfg = match name {
            "fig-ktq" => d,
            "fig-ktp" => Self {
                axis: Axis::P,
                axis_min: 0.25,
                axis_max: 1.0,
                ..d
            },
            "fig-ktmu" => Self {
                axis: Axis::Mu,
                axis_min: 0.1,
                axis_max: 0.9,
                ..d
            },
            "fig-ktq-frac" => Self { base: frac, ..d },
            "fig-ktalpha" => Self {
                base: frac,
                axis: Axis::Alpha,
                axis_min: 0.5,
                axis_max: 1.0,
                ..d
            },
            _ => {
                return Err(Error::Config(format!(
                    "unknown preset {name:?}; available: {}",
                    PRESET_NAMES.join(", ")
                )))
            }
        };
        Ok(cfg)
    }

    pub fn axis_values(&self) -> Vec<f64> {
        linspace(self.axis_min, self.axis_max, self.axis_count)
    }

    pub fn times(&self) -> Vec<f64> {
        linspace(0.0, self.t_max, self.t_count)
    }

    pub fn cell_params(&self, axis_value: f64) -> ModelParams<f64> {
        self.axis.set(self.base, axis_value)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axis_count < 2 {
            return Err(Error::param(
                "axis_count",
                format!("need at least 2, got {}", self.axis_count),
            ));
        }
        if !(self.axis_min <= self.axis_max) {
            return Err(Error::param("axis_min", "must not exceed axis_max"));
        }
        check_time_grid(self.t_max, self.t_count)
            .map_err(|_| Error::param("t", "t_max must be finite and > 0 with samples >= 2"))?;
        if !(1..=MAX_ORDER).contains(&self.order) {
            return Err(Error::param(
                "order",
                format!("must lie in 1..={MAX_ORDER}, got {}", self.order),
            ));
        }
        for v in self.axis_values() {
            let params = self.cell_params(v);
            params.validate()?;
            if self.method == SweepMethod::Exact && !params.is_classical() {
                return Err(Error::param(
                    "method",
                    format!(
                        "exact needs alpha = 1 everywhere on the axis, got {}",
                        params.alpha
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Flat `key = value` form accepted by [`SweepConfig::parse`].
    pub fn to_config_string(&self) -> String {
        let b = &self.base;
        format!(
            "p = {}\nq = {}\nmu = {}\nalpha = {}\nk0 = {}\naxis = {}\naxis_min = {}\naxis_max = {}\naxis_count = {}\nt_max = {}\nsamples = {}\norder = {}\nmethod = {}\n",
            b.p, b.q, b.mu, b.alpha, b.k0, self.axis, self.axis_min, self.axis_max,
            self.axis_count, self.t_max, self.t_count, self.order, self.method
        )
    }

    /// Parses a flat `key = value` file.
    ///
    /// Blank lines and lines starting with `#` are skipped. An optional
    /// `preset` key (which must come first) selects the starting point;
    /// otherwise unspecified keys keep the `fig-ktq` defaults. Unknown and
    /// repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim().trim_matches('"'));
            if seen.contains(&key) {
                return Err(err(format!("duplicate key {key:?}")));
            }
            let num = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| err(format!("{key}: not a number: {value:?}")))
            };
            let int = || -> Result<usize> {
                value
                    .parse::<usize>()
                    .map_err(|_| err(format!("{key}: not a nonnegative integer: {value:?}")))
            };
            match key {
                "preset" => {
                    if !seen.is_empty() {
                        return Err(err("preset must be the first key".into()));
                    }
                    cfg = Self::preset(value)?;
                }
                "p" => cfg.base.p = num()?,
                "q" => cfg.base.q = num()?,
                "mu" => cfg.base.mu = num()?,
                "alpha" => cfg.base.alpha = num()?,
                "k0" => cfg.base.k0 = num()?,
                "axis" => cfg.axis = value.parse().map_err(|e: Error| err(e.to_string()))?,
                "axis_min" => cfg.axis_min = num()?,
                "axis_max" => cfg.axis_max = num()?,
                "axis_count" => cfg.axis_count = int()?,
                "t_max" => cfg.t_max = num()?,
                "samples" => cfg.t_count = int()?,
                "order" => cfg.order = int()?,
                "method" => cfg.method = value.parse().map_err(|e: Error| err(e.to_string()))?,
                _ => return Err(err(format!("unknown key {key:?}"))),
            }
            seen.push(key);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub axis: f64,
    pub k: f64,
    pub trusted: bool,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

/// Evaluates every cell of the sweep.
///
/// Rows are ordered by time, then axis value, then backend (series first).
/// A backend that fails on a cell, e.g. ABM losing positivity, yields
/// untrusted `NaN` rows for that cell instead of aborting the sweep. The
/// result is identical whether `parallel` is set or not.
pub fn run_sweep(config: &SweepConfig, parallel: bool) -> Result<SweepGrid> {
    config.validate()?;
    let times = config.times();
    let axis_values = config.axis_values();
    let cell = |&v: &f64| -> Vec<Trajectory<f64>> {
        let params = config.cell_params(v);
        config
            .method
            .backends(&params)
            .into_iter()
            .map(|m| {
                solve_on_grid(&params, &times, m, config.order).unwrap_or_else(|e| {
                    log::warn!("sweep: {} failed at {} = {v}: {e}", m.label(), config.axis);
                    Trajectory {
                        times: times.clone(),
                        values: vec![f64::NAN; times.len()],
                        trusted: vec![false; times.len()],
                        method: m,
                    }
                })
            })
            .collect()
    };
    let cells: Vec<Vec<Trajectory<f64>>> = if parallel {
        axis_values.par_iter().map(cell).collect()
    } else {
        axis_values.iter().map(cell).collect()
    };

    let mut rows = Vec::with_capacity(times.len() * cells.iter().map(Vec::len).sum::<usize>());
    for (ti, &t) in times.iter().enumerate() {
        for (&v, runs) in axis_values.iter().zip(&cells) {
            for tr in runs {
                let k = tr.values[ti];
                rows.push(SweepRow {
                    t,
                    axis: v,
                    k,
                    trusted: tr.trusted[ti] && k.is_finite(),
                    method: tr.method,
                });
            }
        }
    }
    Ok(SweepGrid {
        config: *config,
        rows,
    })
}

/// Writes rows as CSV: exact header, LF endings, numbers with 17
/// significant digits so that parsing and re-emitting is lossless.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: csv::Error| Error::Config(format!("csv write: {e}"));
    w.write_record(CSV_HEADER.split(',')).map_err(io)?;
    for r in rows {
        w.write_record([
            format!("{:.16e}", r.t),
            format!("{:.16e}", r.axis),
            format!("{:.16e}", r.k),
            r.trusted.to_string(),
            r.method.label().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("csv write: {e}")))?;
    Ok(())
}

pub fn to_csv_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// Reads rows written by [`write_csv`]; the header must match exactly.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let bad = |msg: String| Error::Config(format!("csv: {msg}"));
    let header = r.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(bad(format!("header must be {CSV_HEADER:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = i + 2;
        if rec.len() != 5 {
            return Err(bad(format!("line {line}: expected 5 fields")));
        }
        let num = |j: usize| {
            rec[j]
                .parse::<f64>()
                .map_err(|_| bad(format!("line {line}: bad number {:?}", &rec[j])))
        };
        let trusted = match &rec[3] {
            "true" => true,
            "false" => false,
            other => return Err(bad(format!("line {line}: bad flag {other:?}"))),
        };
        let method = Method::from_label(&rec[4])
            .ok_or_else(|| bad(format!("line {line}: bad method {:?}", &rec[4])))?;
        rows.push(SweepRow {
            t: num(0)?,
            axis: num(1)?,
            k: num(2)?,
            trusted,
            method,
        });
    }
    Ok(rows)
}

/// Run metadata kept next to, not inside, the CSV.
#[derive(Debug, Clone, Serialize)]
pub struct SweepMetadata<'a> {
    pub tool_version: &'static str,
    pub config: &'a SweepConfig,
    pub rows: usize,
    pub untrusted_rows: usize,
    pub unix_time: u64,
}

pub fn metadata_json(grid: &SweepGrid) -> String {
    let meta = SweepMetadata {
        tool_version: env!("CARGO_PKG_VERSION"),
        config: &grid.config,
        rows: grid.rows.len(),
        untrusted_rows: grid.rows.iter().filter(|r| !r.trusted).count(),
        unix_time: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    serde_json::to_string_pretty(&meta).expect("metadata is plain data")
}

/// Gnuplot script that draws `csv_path` as one surface per backend,
/// skipping untrusted rows.
pub fn gnuplot_script(config: &SweepConfig, csv_path: &str) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set xlabel 't'\n");
    s.push_str(&format!("set ylabel '{}'\n", config.axis));
    s.push_str("set zlabel 'k'\n");
    s.push_str("set ticslevel 0\n");
    let plots: Vec<String> = [Method::Series, Method::ExactClassical, Method::AbmFractional]
        .into_iter()
        .filter(|m| config.method.backends(&config.cell_params(config.axis_min)).contains(m)
            || config.method.backends(&config.cell_params(config.axis_max)).contains(m))
        .map(|m| {
            format!(
                "'{csv_path}' using 1:2:((strcol(5) eq '{l}' && strcol(4) eq 'true') ? $3 : NaN) with points pt 7 ps 0.4 title '{l}'",
                l = m.label()
            )
        })
        .collect();
    s.push_str(&format!("splot {}\n", plots.join(", \\\n      ")));
    s
}
