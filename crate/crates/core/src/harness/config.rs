//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! [plant]
//! kind = linear_ex11
//! disturbance = 5, 10
//! [controller]
//! lambda = 1e-4
//! ```
//!
//! Matrices are written as rows separated by `;` with comma-separated entries.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::HarnessError;
use crate::controller::{ControllerConfig, Lambda, Preview, Variant};
use crate::edlm::{Dims, Pjm};
use crate::estimator::{ResetPolicy, UpdateMode};
use crate::linalg::SingularPolicy;
use crate::plants::{benchmark_initial_inputs, benchmark_initial_outputs, PlantDef, ReferenceDef};

#[derive(Clone, Debug, PartialEq)]
pub enum PlantSelector {
    Ex11,
    Ex12,
    Ex2,
    UserLinear {
        output_coeffs: Vec<DMatrix<f64>>,
        input_coeffs: Vec<DMatrix<f64>>,
    },
    RandomLinear {
        outputs: usize,
        inputs: usize,
        output_lags: usize,
        input_lags: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantSpec {
    pub selector: PlantSelector,
    pub disturbance: Option<(DVector<f64>, i64)>,
    /// `y(1), y(2), ...`; control starts at the last of these.
    pub initial_outputs: Vec<DVector<f64>>,
    /// `u(1), u(2), ...`.
    pub initial_inputs: Vec<DVector<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Law {
    Mfapc,
    Mfac,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorSettings {
    pub eta: f64,
    pub mu: f64,
    pub initial: DMatrix<f64>,
    pub reset: ResetPolicy,
    pub mode: UpdateMode,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PjmSource {
    /// Jacobians of the true plant map.
    Analytic,
    Estimated(EstimatorSettings),
    /// A fixed matrix.
    Frozen(DMatrix<f64>),
    /// The online estimate reached at step `at`, then held for a fresh run.
    FrozenFromEstimate { settings: EstimatorSettings, at: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub plant: PlantSpec,
    pub reference: ReferenceDef<f64>,
    pub law: Law,
    pub controller: ControllerConfig<f64>,
    pub pjm_source: PjmSource,
    pub steps: usize,
    /// Record the frozen-loop pole radius at every step.
    pub analysis: bool,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn dims(&self) -> Dims {
        self.controller.dims
    }

    /// Fresh plant in its initial state.
    pub fn build_plant(&self) -> Result<PlantDef<f64>, HarnessError> {
        let mut plant = match &self.plant.selector {
            PlantSelector::Ex11 => PlantDef::ex11(),
            PlantSelector::Ex12 => PlantDef::ex12(),
            PlantSelector::Ex2 => PlantDef::ex2(),
            PlantSelector::UserLinear {
                output_coeffs,
                input_coeffs,
            } => PlantDef::user_linear(output_coeffs.clone(), input_coeffs.clone()).map_err(config_err)?,
            PlantSelector::RandomLinear {
                outputs,
                inputs,
                output_lags,
                input_lags,
            } => PlantDef::random_linear(*outputs, *inputs, *output_lags, *input_lags, self.seed)
                .map_err(config_err)?,
        };
        if let Some((w, start)) = &self.plant.disturbance {
            plant = plant.with_disturbance(w.clone(), *start).map_err(config_err)?;
        }
        plant
            .reset_state(&self.plant.initial_outputs, &self.plant.initial_inputs)
            .map_err(config_err)?;
        Ok(plant)
    }

    /// Time of the first control action.
    pub fn first_control_step(&self) -> i64 {
        self.plant.initial_outputs.len() as i64
    }

    /// Controller settings of the law actually run (the one-step law uses unit horizons).
    pub fn effective_controller(&self) -> Result<ControllerConfig<f64>, HarnessError> {
        match self.law {
            Law::Mfapc => Ok(self.controller.clone()),
            Law::Mfac => {
                let Lambda::Scalar(l) = self.controller.lambda else {
                    return Err(HarnessError::Config("the one-step law takes a scalar lambda".into()));
                };
                ControllerConfig::new(self.controller.dims, 1, 1, Lambda::Scalar(l))
                    .map(|c| c.with_singular_policy(self.controller.singular_policy))
                    .map_err(config_err)
            }
        }
    }

    /// Replaces one numeric parameter, for sweeps.
    pub fn with_param(&self, param: &str, value: f64) -> Result<Self, HarnessError> {
        let mut out = self.clone();
        match param {
            "lambda" => out.controller.lambda = Lambda::Scalar(value),
            "eta" | "mu" => {
                let settings = match &mut out.pjm_source {
                    PjmSource::Estimated(s) | PjmSource::FrozenFromEstimate { settings: s, .. } => s,
                    _ => return Err(HarnessError::Config(format!("{param} needs an estimated pjm source"))),
                };
                if param == "eta" {
                    settings.eta = value;
                } else {
                    settings.mu = value;
                }
            }
            other => return Err(HarnessError::Config(format!("unknown sweep parameter `{other}`"))),
        }
        out.controller.validate().map_err(config_err)?;
        Ok(out)
    }
}

fn config_err(e: crate::Error) -> HarnessError {
    HarnessError::Config(e.to_string())
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct Sections {
    map: BTreeMap<String, BTreeMap<String, Entry>>,
}

const SECTIONS: [&str; 4] = ["plant", "controller", "estimator", "run"];

impl Sections {
    fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut map: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                if !SECTIONS.contains(&name.as_str()) {
                    return Err(HarnessError::Config(format!("line {line_no}: unknown section [{name}]")));
                }
                map.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(HarnessError::Config(format!("line {line_no}: expected `key = value`")));
            };
            let Some(section) = &current else {
                return Err(HarnessError::Config(format!("line {line_no}: key outside of a section")));
            };
            let key = key.trim().to_string();
            let entries = map.entry(section.clone()).or_default();
            if entries.contains_key(&key) {
                return Err(HarnessError::Config(format!("line {line_no}: duplicate key `{key}` in [{section}]")));
            }
            entries.insert(
                key,
                Entry {
                    value: value.trim().to_string(),
                    line: line_no,
                    used: false,
                },
            );
        }
        Ok(Sections { map })
    }

    fn get(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let e = self.map.get_mut(section)?.get_mut(key)?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    fn str_or(&mut self, section: &str, key: &str, default: &str) -> String {
        self.get(section, key).map(|(v, _)| v).unwrap_or_else(|| default.to_string())
    }

    fn required(&mut self, section: &str, key: &str) -> Result<(String, usize), HarnessError> {
        self.get(section, key)
            .ok_or_else(|| HarnessError::Config(format!("missing `{key}` in [{section}]")))
    }

    fn parsed<V: std::str::FromStr>(&mut self, section: &str, key: &str) -> Result<Option<V>, HarnessError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| HarnessError::Config(format!("line {line}: cannot parse `{key} = {v}`"))),
        }
    }

    fn matrix(&mut self, section: &str, key: &str) -> Result<Option<DMatrix<f64>>, HarnessError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => parse_matrix(&v)
                .map(Some)
                .map_err(|m| HarnessError::Config(format!("line {line}: `{key}`: {m}"))),
        }
    }

    fn vector(&mut self, section: &str, key: &str) -> Result<Option<DVector<f64>>, HarnessError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => parse_row(&v)
                .map(|r| Some(DVector::from_vec(r)))
                .map_err(|m| HarnessError::Config(format!("line {line}: `{key}`: {m}"))),
        }
    }

    fn finish(&self) -> Result<(), HarnessError> {
        for (section, entries) in &self.map {
            for (key, e) in entries {
                if !e.used {
                    return Err(HarnessError::Config(format!(
                        "line {}: unknown key `{key}` in [{section}]",
                        e.line
                    )));
                }
            }
        }
        Ok(())
    }
}

fn parse_row(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            x.parse::<f64>().map_err(|_| format!("`{x}` is not a number"))
        })
        .collect()
}

/// Parses `a, b; c, d` into a row-major matrix.
pub fn parse_matrix(s: &str) -> Result<DMatrix<f64>, String> {
    let rows: Vec<Vec<f64>> = s.split(';').map(parse_row).collect::<Result<_, _>>()?;
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err("rows have different lengths".into());
    }
    Ok(DMatrix::from_row_iterator(rows.len(), cols, rows.into_iter().flatten()))
}

fn rows_as_vectors(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    m.row_iter().map(|r| r.transpose()).collect()
}

fn numbered_matrices(sections: &mut Sections, prefix: &str) -> Result<Vec<DMatrix<f64>>, HarnessError> {
    let mut out = Vec::new();
    for i in 1.. {
        match sections.matrix("plant", &format!("{prefix}_{i}"))? {
            Some(m) => out.push(m),
            None => break,
        }
    }
    Ok(out)
}

fn parse_plant(s: &mut Sections) -> Result<(PlantSpec, usize, usize), HarnessError> {
    let kind = s.required("plant", "kind")?.0;
    let (selector, outputs, inputs) = match kind.as_str() {
        "linear_ex11" => (PlantSelector::Ex11, 2, 2),
        "linear_ex12" => (PlantSelector::Ex12, 2, 3),
        "nonlinear_ex2" => (PlantSelector::Ex2, 2, 2),
        "user_linear" => {
            let output_coeffs = numbered_matrices(s, "output_coeff")?;
            let input_coeffs = numbered_matrices(s, "input_coeff")?;
            let first = input_coeffs
                .first()
                .ok_or_else(|| HarnessError::Config("user_linear needs `input_coeff_1`".into()))?;
            let (o, i) = first.shape();
            (
                PlantSelector::UserLinear {
                    output_coeffs,
                    input_coeffs,
                },
                o,
                i,
            )
        }
        "random_linear" => {
            let outputs = s.parsed("plant", "outputs")?.unwrap_or(2);
            let inputs = s.parsed("plant", "inputs")?.unwrap_or(2);
            let output_lags = s.parsed("plant", "output_lags")?.unwrap_or(1);
            let input_lags = s.parsed("plant", "input_lags")?.unwrap_or(2);
            (
                PlantSelector::RandomLinear {
                    outputs,
                    inputs,
                    output_lags,
                    input_lags,
                },
                outputs,
                inputs,
            )
        }
        other => return Err(HarnessError::Config(format!("unknown plant kind `{other}`"))),
    };
    let disturbance = match s.vector("plant", "disturbance")? {
        Some(w) => Some((w, s.parsed("plant", "disturbance_start")?.unwrap_or(1))),
        None => None,
    };
    let initial_outputs = match s.matrix("plant", "initial_outputs")? {
        Some(m) => rows_as_vectors(&m),
        None => benchmark_initial_outputs(outputs),
    };
    let initial_inputs = match s.matrix("plant", "initial_inputs")? {
        Some(m) => rows_as_vectors(&m),
        None => benchmark_initial_inputs(inputs),
    };
    Ok((
        PlantSpec {
            selector,
            disturbance,
            initial_outputs,
            initial_inputs,
        },
        outputs,
        inputs,
    ))
}

fn parse_reference(s: &mut Sections, outputs: usize) -> Result<ReferenceDef<f64>, HarnessError> {
    let kind = s.str_or("run", "reference", "square_pm3");
    match kind.as_str() {
        "square_pm3" => Ok(ReferenceDef::square_pm3(outputs)),
        "mixed_ex2" => Ok(ReferenceDef::MixedEx2),
        "step" => {
            let v = s
                .vector("run", "reference_value")?
                .unwrap_or_else(|| DVector::from_element(outputs, 1.0));
            Ok(ReferenceDef::Step(v))
        }
        "table" => {
            let m = s
                .matrix("run", "reference_table")?
                .ok_or_else(|| HarnessError::Config("table reference needs `reference_table`".into()))?;
            Ok(ReferenceDef::Table(rows_as_vectors(&m)))
        }
        other => Err(HarnessError::Config(format!("unknown reference `{other}`"))),
    }
}

fn parse_controller(s: &mut Sections, outputs: usize, inputs: usize) -> Result<(Law, ControllerConfig<f64>), HarnessError> {
    let law = match s.str_or("controller", "law", "mfapc").as_str() {
        "mfapc" => Law::Mfapc,
        "mfac" => Law::Mfac,
        other => return Err(HarnessError::Config(format!("unknown law `{other}`"))),
    };
    let output_order = s.parsed("controller", "output_order")?.unwrap_or(1);
    let input_order = s.parsed("controller", "input_order")?.unwrap_or(2);
    let default_horizon = if law == Law::Mfac { 1 } else { 2 };
    let horizon = s.parsed("controller", "horizon")?.unwrap_or(default_horizon);
    let control_horizon = s.parsed("controller", "control_horizon")?.unwrap_or(horizon);
    let lambda = match s.vector("controller", "lambda")? {
        None => Lambda::Scalar(1.0),
        Some(v) if v.len() == 1 => Lambda::Scalar(v[0]),
        Some(v) => Lambda::Diagonal(v),
    };
    let dims = Dims::new(outputs, inputs, output_order, input_order).map_err(config_err)?;
    let variant = match s.str_or("controller", "variant", "standard").as_str() {
        "standard" => Variant::Standard,
        "pi" => Variant::Pi {
            kp: s
                .matrix("controller", "kp")?
                .unwrap_or_else(|| DMatrix::zeros(outputs, outputs)),
            ki: s
                .matrix("controller", "ki")?
                .unwrap_or_else(|| DMatrix::identity(outputs, outputs)),
        },
        "iterative" => Variant::Iterative {
            max_iters: s.parsed("controller", "max_iters")?.unwrap_or(3),
        },
        other => return Err(HarnessError::Config(format!("unknown controller variant `{other}`"))),
    };
    let preview = match s.str_or("controller", "preview", "full").as_str() {
        "full" => Preview::Full,
        "hold" => Preview::Hold,
        other => return Err(HarnessError::Config(format!("unknown preview mode `{other}`"))),
    };
    let policy = match s.str_or("controller", "singular", "min_norm").as_str() {
        "min_norm" => SingularPolicy::MinimumNorm,
        "error" => SingularPolicy::Error,
        other => return Err(HarnessError::Config(format!("unknown singular policy `{other}`"))),
    };
    if law == Law::Mfac && !matches!(variant, Variant::Standard) {
        return Err(HarnessError::Config("the one-step law has no variants".into()));
    }
    let cfg = ControllerConfig::new(dims, horizon, control_horizon, lambda)
        .and_then(|c| c.with_variant(variant))
        .map_err(config_err)?
        .with_preview(preview)
        .with_singular_policy(policy);
    Ok((law, cfg))
}

fn parse_estimator(s: &mut Sections, dims: Dims) -> Result<PjmSource, HarnessError> {
    let source = s.str_or("estimator", "source", "analytic");
    let settings = |s: &mut Sections| -> Result<EstimatorSettings, HarnessError> {
        let eta = s.parsed("estimator", "eta")?.unwrap_or(1.5);
        let mu = s.parsed("estimator", "mu")?.unwrap_or(1.0);
        let initial = match s.get("estimator", "init") {
            None => DMatrix::from_element(dims.outputs, dims.width(), 0.01),
            Some((v, line)) => match v.parse::<f64>() {
                Ok(x) => DMatrix::from_element(dims.outputs, dims.width(), x),
                Err(_) => parse_matrix(&v).map_err(|m| HarnessError::Config(format!("line {line}: `init`: {m}")))?,
            },
        };
        Pjm::from_stacked(dims, &initial).map_err(config_err)?;
        let reset = match s.get("estimator", "reset") {
            None => ResetPolicy::Off,
            Some((v, _)) if v == "off" => ResetPolicy::Off,
            Some((v, line)) => ResetPolicy::NormThreshold(
                v.parse()
                    .map_err(|_| HarnessError::Config(format!("line {line}: `reset` must be `off` or a threshold")))?,
            ),
        };
        let mode = match s.str_or("estimator", "mode", "direct").as_str() {
            "direct" => UpdateMode::Direct,
            "rank_one" => UpdateMode::RankOne,
            other => return Err(HarnessError::Config(format!("unknown estimator mode `{other}`"))),
        };
        if !(eta > 0.0 && mu > 0.0) {
            return Err(HarnessError::Config("eta and mu must be positive".into()));
        }
        Ok(EstimatorSettings {
            eta,
            mu,
            initial,
            reset,
            mode,
        })
    };
    match source.as_str() {
        "analytic" => Ok(PjmSource::Analytic),
        "estimated" => Ok(PjmSource::Estimated(settings(s)?)),
        "frozen" => {
            if let Some(m) = s.matrix("estimator", "matrix")? {
                Pjm::from_stacked(dims, &m).map_err(config_err)?;
                Ok(PjmSource::Frozen(m))
            } else {
                let at: i64 = s
                    .parsed("estimator", "freeze_at")?
                    .ok_or_else(|| HarnessError::Config("frozen source needs `matrix` or `freeze_at`".into()))?;
                Ok(PjmSource::FrozenFromEstimate {
                    settings: settings(s)?,
                    at,
                })
            }
        }
        other => Err(HarnessError::Config(format!("unknown pjm source `{other}`"))),
    }
}

/// Parses a configuration file.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let mut s = Sections::parse(text)?;
    let (plant, outputs, inputs) = parse_plant(&mut s)?;
    let reference = parse_reference(&mut s, outputs)?;
    let (law, controller) = parse_controller(&mut s, outputs, inputs)?;
    let pjm_source = parse_estimator(&mut s, controller.dims)?;
    let name = s.str_or("run", "name", "experiment");
    let steps: usize = s.parsed("run", "steps")?.unwrap_or(300);
    let analysis = s.parsed("run", "analysis")?.unwrap_or(false);
    let seed = s.parsed("run", "seed")?.unwrap_or(0);
    s.finish()?;
    if steps == 0 {
        return Err(HarnessError::Config("steps must be >= 1".into()));
    }
    if plant.initial_outputs.iter().any(|y| y.len() != outputs) || plant.initial_inputs.iter().any(|u| u.len() != inputs) {
        return Err(HarnessError::Config("initial samples do not match the plant dimensions".into()));
    }
    if reference.outputs() != outputs {
        return Err(HarnessError::Config("reference does not match the plant outputs".into()));
    }
    let cfg = ExperimentConfig {
        name,
        plant,
        reference,
        law,
        controller,
        pjm_source,
        steps,
        analysis,
        seed,
    };
    cfg.build_plant()?;
    Ok(cfg)
}
