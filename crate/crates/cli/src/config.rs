//! Flat JSON run configurations.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use ipl_core::collision::{Interp, QuadCounts, SolverConfig};
use ipl_core::solver::InitialData;

use crate::CliError;

/// Parse a JSON document, reporting schema violations with their field path.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Config(inner.to_string())
        } else {
            CliError::Config(format!("{path}: {inner}"))
        }
    })
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<(T, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((parse(text)?, bytes))
}

fn default_table_nodes() -> usize {
    ipl_core::kernel::DEFAULT_NODES
}

fn default_tol() -> f64 {
    ipl_core::kernel::DEFAULT_QUAD_TOL
}

/// `kernel-eval`: s values and θ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEvalConfig {
    #[serde(default)]
    pub s: Vec<f64>,
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default = "default_table_nodes")]
    pub table_nodes: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for KernelEvalConfig {
    fn default() -> Self {
        Self { s: Vec::new(), theta: Vec::new(), table_nodes: default_table_nodes(), tol: default_tol() }
    }
}

fn default_interp() -> Interp {
    SolverConfig::default().interp
}

fn default_remainder_tol() -> f64 {
    SolverConfig::default().remainder_tol
}

/// Solver fields shared by `solve` and `converge`.
macro_rules! solver_fields {
    ($(#[$m:meta])* $name:ident { $($extra:tt)* }) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            pub n_r: usize,
            pub v_max: f64,
            pub n_quad: QuadCounts,
            pub theta_cut: f64,
            #[serde(default)]
            pub dt: Option<f64>,
            pub t_end: f64,
            pub k_weights: Vec<f64>,
            #[serde(default = "default_interp")]
            pub interp: Interp,
            #[serde(default = "default_remainder_tol")]
            pub remainder_tol: f64,
            pub initial: InitialData,
            $($extra)*
        }

        impl $name {
            pub fn solver(&self) -> SolverConfig {
                SolverConfig {
                    n_r: self.n_r,
                    v_max: self.v_max,
                    n_quad: self.n_quad,
                    theta_cut: self.theta_cut,
                    dt: self.dt,
                    t_end: self.t_end,
                    k_weights: self.k_weights.clone(),
                    interp: self.interp,
                    remainder_tol: self.remainder_tol,
                }
            }
        }
    };
}

solver_fields!(
    /// `solve`: one inverse-power/hard-sphere pair.
    SolveConfig { pub s: f64, }
);

solver_fields!(
    /// `converge`: the study over a decreasing list of s.
    ConvergeConfig { pub s_list: Vec<f64>, }
);
