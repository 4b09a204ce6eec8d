//! Config-driven closed-loop experiments.

mod builtin;
mod config;
mod run;
mod trace;

use std::path::PathBuf;

use nalgebra::{Complex, DVector};

pub use builtin::{builtin, builtin_names, BUILTIN};
pub use config::{
    parse_config, parse_matrix, EstimatorSettings, ExperimentConfig, Law, PjmSource, PlantSelector, PlantSpec,
};
pub use run::{analysis_pjm, run_experiment, simulate, DIVERGENCE_BOUND};
pub use trace::{
    export_csv, fmt_sig, mean_abs_error, read_csv, summarize, SegmentStats, SimTrace, Summary, TraceRow,
    STEADY_WINDOW,
};

use crate::analysis::{closed_loop_t, steady_state_error, ReferenceKind, SteadyState};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("step {step}: {source}")]
    Runtime {
        step: i64,
        #[source]
        source: crate::Error,
    },
    #[error("trajectory diverged at step {step}")]
    Divergence { step: i64 },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 1 configuration, 2 runtime, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Runtime { .. } | HarnessError::Divergence { .. } => 2,
            HarnessError::Io { .. } => 3,
        }
    }
}

/// Loads a built-in configuration by name, or a file by path.
pub fn load_config(spec: &str) -> Result<ExperimentConfig, HarnessError> {
    let name = spec.strip_suffix(".cfg").unwrap_or(spec);
    if let Some(text) = builtin(name) {
        if !std::path::Path::new(spec).exists() {
            return parse_config(text);
        }
    }
    let text = std::fs::read_to_string(spec).map_err(|source| HarnessError::Io {
        path: PathBuf::from(spec),
        source,
    })?;
    parse_config(&text)
}

/// Runs one configuration per value of `param`, in parallel.
pub fn sweep(
    cfg: &ExperimentConfig,
    param: &str,
    values: &[f64],
) -> Result<Vec<(f64, Result<SimTrace, HarnessError>)>, HarnessError> {
    let configs = values
        .iter()
        .map(|&v| cfg.with_param(param, v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| scope.spawn(move || run_experiment(c)))
            .collect();
        values
            .iter()
            .zip(handles)
            .map(|(&v, h)| (v, h.join().expect("sweep worker panicked")))
            .collect()
    }))
}

/// Frozen-loop stability report of a configuration.
#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub poles: Vec<Complex<f64>>,
    pub max_modulus: f64,
    pub stable: bool,
    /// Step-reference error towards all-ones; `None` when the loop is unstable.
    pub step_error: Option<SteadyState<f64>>,
    pub ramp_error: Option<SteadyState<f64>>,
}

pub fn analyze(cfg: &ExperimentConfig) -> Result<AnalysisReport, HarnessError> {
    let pjm = analysis_pjm(cfg)?;
    let ctrl = cfg.effective_controller()?;
    let cl = closed_loop_t(&pjm, &ctrl).map_err(|source| HarnessError::Runtime { step: 0, source })?;
    let report = cl.poles().map_err(|source| HarnessError::Runtime { step: 0, source })?;
    let ones = DVector::from_element(cfg.dims().outputs, 1.0);
    let stable = report.is_stable();
    let (step_error, ramp_error) = if stable {
        (
            steady_state_error(&pjm, &ctrl, &ReferenceKind::Step(ones.clone())).ok(),
            steady_state_error(&pjm, &ctrl, &ReferenceKind::Ramp(ones)).ok(),
        )
    } else {
        (None, None)
    };
    Ok(AnalysisReport {
        poles: report.roots,
        max_modulus: report.max_modulus,
        stable,
        step_error,
        ramp_error,
    })
}

impl AnalysisReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        if self.stable {
            s.push_str(&format!("STABLE, max|pole|={}\n", fmt_sig(self.max_modulus)));
        } else {
            s.push_str(&format!("UNSTABLE, max|pole|={}\n", fmt_sig(self.max_modulus)));
        }
        s.push_str("poles:\n");
        for p in &self.poles {
            s.push_str(&format!("  {:.9} {:+.9}i  |z|={:.9}\n", p.re, p.im, p.norm()));
        }
        let line = |label: &str, e: &Option<SteadyState<f64>>| match e {
            Some(ss) => {
                let vals: Vec<String> = ss.error.iter().map(|&x| fmt_sig(x)).collect();
                let warn = if ss.warning { " (extrapolation did not settle)" } else { "" };
                format!("{label}: [{}]{warn}\n", vals.join(", "))
            }
            None => format!("{label}: n/a\n"),
        };
        s.push_str(&line("steady_state_error_step", &self.step_error));
        s.push_str(&line("steady_state_error_ramp", &self.ramp_error));
        s
    }
}
