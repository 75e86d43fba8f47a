//! Parameter presets for the benchmark protocols.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CboError, Result};
use crate::params::NoiseMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "isotropic-table2")]
    IsotropicTable2,
    #[serde(rename = "isotropic-table3")]
    IsotropicTable3,
    #[serde(rename = "anisotropic-table4")]
    AnisotropicTable4,
    #[serde(rename = "anisotropic-table5")]
    AnisotropicTable5,
    #[serde(rename = "fig1a")]
    Fig1a,
    #[serde(rename = "fig1b")]
    Fig1b,
}

/// Values a preset fills in before explicit config keys are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetDefaults {
    pub objective: Option<&'static str>,
    pub dim: usize,
    pub noise_mode: NoiseMode,
    pub lambda: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub n_particles: usize,
    pub init_mean: f64,
    pub init_variance: f64,
    pub repetitions: usize,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::IsotropicTable2,
        Preset::IsotropicTable3,
        Preset::AnisotropicTable4,
        Preset::AnisotropicTable5,
        Preset::Fig1a,
        Preset::Fig1b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::IsotropicTable2 => "isotropic-table2",
            Preset::IsotropicTable3 => "isotropic-table3",
            Preset::AnisotropicTable4 => "anisotropic-table4",
            Preset::AnisotropicTable5 => "anisotropic-table5",
            Preset::Fig1a => "fig1a",
            Preset::Fig1b => "fig1b",
        }
    }

    pub fn defaults(self) -> PresetDefaults {
        let isotropic = PresetDefaults {
            objective: None,
            dim: 15,
            noise_mode: NoiseMode::Isotropic,
            lambda: 1.0,
            sigma: 0.3,
            alpha: 1e5,
            dt: 0.02,
            n_steps: 200,
            n_particles: 300,
            init_mean: 0.0,
            init_variance: 1.0,
            repetitions: 1000,
        };
        match self {
            Preset::IsotropicTable2 => isotropic,
            Preset::IsotropicTable3 => PresetDefaults { n_particles: 600, ..isotropic },
            Preset::AnisotropicTable4 => PresetDefaults {
                dim: 20,
                noise_mode: NoiseMode::Anisotropic,
                sigma: 5.0,
                n_steps: 1000,
                n_particles: 600,
                init_variance: 100.0,
                ..isotropic
            },
            Preset::AnisotropicTable5 => PresetDefaults {
                noise_mode: NoiseMode::Anisotropic,
                sigma: 1.0,
                ..isotropic
            },
            Preset::Fig1a | Preset::Fig1b => PresetDefaults {
                objective: Some(if self == Preset::Fig1a { "ackley_fig1" } else { "rastrigin_fig1" }),
                dim: 4,
                sigma: 1.0,
                dt: 0.01,
                n_steps: 5000,
                n_particles: 100,
                init_mean: 1.0,
                init_variance: 2000.0,
                repetitions: 100,
                ..isotropic
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = CboError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            CboError::config(format!(
                "preset: unknown preset `{s}` (valid: {})",
                Preset::ALL.map(|p| p.name()).join(", ")
            ))
        })
    }
}

/// One benchmark table: objectives crossed with `K`, `M` and `N` grids.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub name: &'static str,
    pub preset: Preset,
    pub objectives: &'static [&'static str],
    pub k_values: &'static [usize],
    pub m_values: &'static [f64],
    pub n_values: &'static [usize],
}

const M_PAIR: &[f64] = &[1.0, f64::INFINITY];

pub const TABLES: [TableSpec; 4] = [
    TableSpec {
        name: "table2",
        preset: Preset::IsotropicTable2,
        objectives: &["ackley", "griewank", "salomon"],
        k_values: &[200],
        m_values: M_PAIR,
        n_values: &[150, 300, 600, 900, 1200],
    },
    TableSpec {
        name: "table3",
        preset: Preset::IsotropicTable3,
        objectives: &["rastrigin", "alpine"],
        k_values: &[200, 500],
        m_values: M_PAIR,
        n_values: &[300, 600, 900, 1200, 1500],
    },
    TableSpec {
        name: "table4",
        preset: Preset::AnisotropicTable4,
        objectives: &["rastrigin", "ackley", "griewank", "salomon"],
        k_values: &[1000],
        m_values: M_PAIR,
        n_values: &[75, 150, 300, 600, 900],
    },
    TableSpec {
        name: "table5",
        preset: Preset::AnisotropicTable5,
        objectives: &["alpine"],
        k_values: &[200, 500, 1000],
        m_values: M_PAIR,
        n_values: &[300, 600, 900, 1200, 1500],
    },
];

pub fn table(name: &str) -> Result<&'static TableSpec> {
    TABLES.iter().find(|t| t.name == name).ok_or_else(|| {
        CboError::config(format!(
            "preset: unknown table `{name}` (valid: table2, table3, table4, table5)"
        ))
    })
}

/// Default `σ × M` grid for the phase-diagram presets.
pub const PHASE_SIGMAS: &[f64] = &[0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0];
pub const PHASE_MS: &[f64] = &[0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, f64::INFINITY];
