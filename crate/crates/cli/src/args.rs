use std::path::PathBuf;

use clap::{Args, ValueEnum};
use krein_dual::lattice::{bkc_qbh, harmonic_chain_qbh, BkcParams, HarmonicChainParams};
use krein_dual::{QbhModel, Tolerances};
use serde::Serialize;

use crate::output::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    HarmonicChain,
    Bkc,
}

/// Where the model comes from: a preset with its parameters, or a JSON file.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, conflicts_with = "model_file")]
    pub model: Option<Preset>,
    /// JSON model file ({"n_modes", "K", "Delta"}).
    #[arg(long)]
    pub model_file: Option<PathBuf>,

    /// Mass (harmonic chain).
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Onsite stiffness (harmonic chain).
    #[arg(long, default_value_t = 2.0)]
    pub co: f64,
    /// Nearest-neighbour stiffness (harmonic chain).
    #[arg(long, default_value_t = 2.0)]
    pub cnn: f64,

    /// Hopping (BKC).
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Pairing (BKC).
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    /// Boundary strength in [0, 1] (BKC).
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Boundary angle in radians (BKC).
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub phi: f64,

    /// Number of sites.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
}

impl ModelArgs {
    pub fn chain(&self) -> HarmonicChainParams {
        HarmonicChainParams { m: self.m, c_o: self.co, c_nn: self.cnn, n: self.n }
    }

    pub fn bkc(&self) -> BkcParams {
        BkcParams { t: self.t, delta: self.delta, s: self.s, phi: self.phi, n: self.n }
    }

    pub fn load(&self) -> Result<QbhModel, CliError> {
        match (&self.model, &self.model_file) {
            (Some(Preset::HarmonicChain), _) => Ok(harmonic_chain_qbh(&self.chain())?),
            (Some(Preset::Bkc), _) => Ok(bkc_qbh(&self.bkc())?),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Failed(format!("cannot read {}: {e}", path.display())))?;
                Ok(QbhModel::from_json(&text)?)
            }
            (None, None) => Err(CliError::Failed(
                "no model given; pass --model harmonic-chain|bkc or --model-file PATH".into(),
            )),
        }
    }

    /// Only the parameters that matter for the chosen source.
    pub fn manifest(&self) -> serde_json::Value {
        match (&self.model, &self.model_file) {
            (Some(Preset::HarmonicChain), _) => serde_json::json!({
                "model": "harmonic-chain", "m": self.m, "co": self.co, "cnn": self.cnn, "n": self.n
            }),
            (Some(Preset::Bkc), _) => serde_json::json!({
                "model": "bkc", "t": self.t, "delta": self.delta, "s": self.s, "phi": self.phi, "n": self.n
            }),
            (None, Some(path)) => serde_json::json!({ "model_file": path }),
            (None, None) => serde_json::Value::Null,
        }
    }
}

/// Harmonic-chain parameters for the band and hopping commands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 2.0)]
    pub co: f64,
    #[arg(long, default_value_t = 2.0)]
    pub cnn: f64,
    #[arg(long, default_value_t = 30)]
    pub n: usize,
}

impl ChainArgs {
    pub fn params(&self) -> HarmonicChainParams {
        HarmonicChainParams { m: self.m, c_o: self.co, c_nn: self.cnn, n: self.n }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ToleranceArgs {
    /// Largest |Im ω| counted as real.
    #[arg(long)]
    pub tol_imag: Option<f64>,
    /// Largest admissible condition number of the τ₃-Gram matrix.
    #[arg(long)]
    pub cond_max: Option<f64>,
    /// Largest admissible pairing left in the dual.
    #[arg(long)]
    pub tol_pairing: Option<f64>,
    /// Generic matrix-identity tolerance.
    #[arg(long)]
    pub tol_invariant: Option<f64>,
}

impl ToleranceArgs {
    pub fn resolve(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(v) = self.tol_imag {
            tol.imag = v;
        }
        if let Some(v) = self.cond_max {
            tol.cond_max = v;
        }
        if let Some(v) = self.tol_pairing {
            tol.pairing = v;
        }
        if let Some(v) = self.tol_invariant {
            tol.invariant = v;
        }
        tol
    }
}
