//! Run configuration: a TOML file naming a preset, optional top-level
//! overrides of any preset value, and `[grid]` / `[scenario]` tables.

use std::path::Path;

use serde::Deserialize;

use qba_core::cascade::linear_grid;
use qba_core::{Preset, Quadrature, Scenario, System, TransferModel};

use crate::error::CliError;

macro_rules! preset_fields {
    ($($name:ident),* $(,)?) => {
        #[derive(Debug, Default, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct RunConfig {
            pub preset: Option<String>,
            $(pub $name: Option<f64>,)*
            pub grid: Option<GridConfig>,
            pub scenario: Option<ScenarioConfig>,
        }

        impl RunConfig {
            fn apply_overrides(&self, v: &mut Preset) {
                $(if let Some(x) = self.$name { v.$name = x; })*
            }
        }

        /// `(key, value)` pairs of a preset, in declaration order.
        pub fn preset_listing(v: &Preset) -> Vec<(&'static str, f64)> {
            vec![$((stringify!($name), v.$name)),*]
        }
    };
}

preset_fields!(
    mech_freq_hz,
    mech_linewidth_hz,
    t_bath_k,
    m_eff_kg,
    x_zpf_m,
    kappa_hz,
    port_ratio,
    detuning_hz,
    g0_hz,
    n_photons,
    eta_mm,
    spin_linewidth_hz,
    spin_intrinsic_linewidth_hz,
    n_spin,
    spin_cooperativity,
    spin_detuning_hz,
    eta1,
    detection_efficiency,
    homodyne_visibility,
    spin_detection_efficiency,
    interstage_rotation_deg,
    n_wn,
);

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start_hz: Option<f64>,
    pub stop_hz: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: Option<String>,
    /// `amplitude`, `phase` or `angle:<rad>`.
    pub quadrature: Option<String>,
    /// `full`, `broadband` or `nsb`.
    pub model: Option<String>,
    /// Fixes the homodyne frame instead of deriving it from the cavity.
    pub detection_angle_rad: Option<f64>,
}

const DEFAULT_GRID: (f64, f64, usize) = (1.2e6, 1.36e6, 1601);

/// Everything a command needs, resolved from a config file.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub quadrature: Quadrature<f64>,
    pub system: System,
    pub grid_hz: Vec<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let name = self.preset.as_deref().unwrap_or("fig23");
        let mut values = Preset::by_name(name).map_err(|e| CliError::Config(format!("preset: {e}")))?;
        self.apply_overrides(&mut values);

        let sc = self.scenario.as_ref();
        let scenario: Scenario = sc
            .and_then(|s| s.kind.as_deref())
            .unwrap_or("mech-only")
            .parse()
            .map_err(|e| CliError::Config(format!("scenario.kind: {e}")))?;
        let quadrature: Quadrature<f64> = sc
            .and_then(|s| s.quadrature.as_deref())
            .unwrap_or("phase")
            .parse()
            .map_err(|e| CliError::Config(format!("scenario.quadrature: {e}")))?;
        let model = match sc.and_then(|s| s.model.as_deref()).unwrap_or("full") {
            "full" => TransferModel::Full,
            "broadband" => TransferModel::Broadband,
            "nsb" => TransferModel::Nsb,
            other => {
                return Err(CliError::Config(format!(
                    "scenario.model: expected full, broadband or nsb, got `{other}`"
                )))
            }
        };

        let mut system = values.system(scenario, quadrature).map_err(CliError::Model)?;
        system.model = model;
        system.cascade.detection_angle_override = sc.and_then(|s| s.detection_angle_rad);
        system.validate().map_err(CliError::Model)?;

        let g = self.grid.as_ref();
        let start = g.and_then(|g| g.start_hz).unwrap_or(DEFAULT_GRID.0);
        let stop = g.and_then(|g| g.stop_hz).unwrap_or(DEFAULT_GRID.1);
        let points = g.and_then(|g| g.points).unwrap_or(DEFAULT_GRID.2);
        if !(start.is_finite() && stop.is_finite() && start >= 0.0 && stop > start) {
            return Err(CliError::Config(format!("grid: need 0 <= start_hz < stop_hz, got {start} .. {stop}")));
        }
        if points < 2 {
            return Err(CliError::Config(format!("grid.points: need at least 2, got {points}")));
        }
        Ok(Resolved { quadrature, system, grid_hz: linear_grid(start, stop, points) })
    }
}
