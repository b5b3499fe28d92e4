//! Declarative experiment configuration (TOML).
//!
//! Files spell out every numeric grid; defaults live here in code and are
//! echoed into the run manifest so a config plus its manifest is always
//! reproducible.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{Scheme, StepperConfig};
use crate::error::{Error, Result};
use crate::estimates::SampleSpec;
use crate::group::GroupKind;
use crate::model::{Seminorm, WeightBase};
use crate::registry::CurveSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Identities,
    Estimates,
    Trotter,
    Convergence,
    Continuity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub name: String,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeminormSection {
    pub kind: String,
    #[serde(default = "one")]
    pub scale: f64,
    /// Ladder index, wsup only.
    #[serde(default)]
    pub index: u32,
    /// Ladder base, wsup only: "poly" or "geometric".
    #[serde(default = "poly")]
    pub base: String,
}

fn one() -> f64 {
    1.0
}

fn poly() -> String {
    "poly".into()
}

impl Default for SeminormSection {
    fn default() -> Self {
        SeminormSection {
            kind: "frobenius".into(),
            scale: 1.0,
            index: 0,
            base: poly(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSection {
    pub scheme: String,
    pub steps_per_unit: usize,
    pub breakpoint_refinement: bool,
}

impl Default for StepperSection {
    fn default() -> Self {
        StepperSection {
            scheme: "midpoint".into(),
            steps_per_unit: 1024,
            breakpoint_refinement: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterSection {
    pub ell: f64,
    pub tau_grid: usize,
    pub n_list: Vec<usize>,
    pub eps: Vec<f64>,
    /// Optional gate: fail (exit 2) when the fitted log-log slope of
    /// sup_error vs n exceeds this value.
    #[serde(default)]
    pub slope_gate: Option<f64>,
}

impl Default for TrotterSection {
    fn default() -> Self {
        TrotterSection {
            ell: 2.0,
            tau_grid: 41,
            n_list: vec![16, 32, 64, 128, 256, 512, 1024],
            eps: crate::trotter::DEFAULT_EPS.to_vec(),
            slope_gate: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatesSection {
    pub samples: usize,
    pub radius: f64,
    pub max_factors: usize,
    /// Scales tried (in order) for the dominating seminorm.
    pub scale_grid: Vec<f64>,
    /// When set, an extra control run uses the dominating seminorm rescaled
    /// by this factor; with a deliberately small value it should report
    /// violations (probe power).
    #[serde(default)]
    pub control_scale: Option<f64>,
}

impl Default for EstimatesSection {
    fn default() -> Self {
        EstimatesSection {
            samples: 100,
            radius: 0.5,
            max_factors: 8,
            scale_grid: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            control_scale: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesSection {
    pub steps_list: Vec<usize>,
}

impl Default for IdentitiesSection {
    fn default() -> Self {
        IdentitiesSection {
            steps_list: vec![256, 1024],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuitySection {
    pub levels: usize,
    pub l_interval: [f64; 2],
}

impl Default for ContinuitySection {
    fn default() -> Self {
        ContinuitySection {
            levels: 3,
            l_interval: [0.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub group: String,
    /// Output directory; CSV and manifest are written inside it.
    pub output: String,
    #[serde(default)]
    pub seed: u64,
    pub curve: CurveSection,
    #[serde(default)]
    pub seminorm: SeminormSection,
    #[serde(default)]
    pub stepper: StepperSection,
    #[serde(default)]
    pub trotter: TrotterSection,
    #[serde(default)]
    pub estimates: EstimatesSection,
    #[serde(default)]
    pub identities: IdentitiesSection,
    #[serde(default)]
    pub continuity: ContinuitySection,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn group(&self) -> Result<GroupKind> {
        GroupKind::parse(&self.group).map_err(|e| Error::Config(format!("group: {e}")))
    }

    pub fn curve_spec(&self) -> CurveSpec {
        CurveSpec {
            name: self.curve.name.clone(),
            params: self.curve.params.clone(),
        }
    }

    pub fn seminorm(&self) -> Result<Seminorm> {
        let space = self.group()?.model_space();
        let s = &self.seminorm;
        match s.kind.as_str() {
            "frobenius" => Ok(Seminorm::frobenius(space, s.scale)),
            "opnorm" => Ok(Seminorm::op_norm(space, s.scale)),
            "wsup" => {
                let base = match s.base.as_str() {
                    "poly" => WeightBase::Poly,
                    "geometric" => WeightBase::Geometric,
                    other => {
                        return Err(Error::Config(format!(
                            "seminorm.base: unknown ladder \"{other}\""
                        )))
                    }
                };
                Ok(Seminorm::weighted_sup(space, s.index, base, s.scale))
            }
            other => Err(Error::Config(format!(
                "seminorm.kind: unknown seminorm \"{other}\""
            ))),
        }
    }

    pub fn stepper(&self) -> Result<StepperConfig> {
        let scheme = match self.stepper.scheme.as_str() {
            "left-euler" => Scheme::LeftEuler,
            "midpoint" => Scheme::Midpoint,
            other => {
                return Err(Error::Config(format!(
                    "stepper.scheme: unknown scheme \"{other}\""
                )))
            }
        };
        if self.stepper.steps_per_unit == 0 {
            return Err(Error::Config("stepper.steps_per_unit: must be ≥ 1".into()));
        }
        Ok(StepperConfig {
            scheme,
            steps_per_unit: self.stepper.steps_per_unit,
            breakpoint_refinement: self.stepper.breakpoint_refinement,
        })
    }

    pub fn sample_spec(&self) -> SampleSpec {
        SampleSpec {
            samples: self.estimates.samples,
            radius: self.estimates.radius,
            max_factors: self.estimates.max_factors,
            seed: self.seed,
        }
    }

    /// Full echo (with defaults filled in) for the manifest.
    pub fn echo_toml(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_else(|e| format!("<echo failed: {e}>"))
    }

    pub fn validate(&self) -> Result<()> {
        self.group()?;
        self.seminorm()?;
        self.stepper()?;
        if self.trotter.n_list.is_empty() {
            return Err(Error::Config("trotter.n_list: must be nonempty".into()));
        }
        if self.trotter.eps.is_empty() {
            return Err(Error::Config("trotter.eps: must be nonempty".into()));
        }
        if self.trotter.tau_grid < 2 {
            return Err(Error::Config("trotter.tau_grid: must be ≥ 2".into()));
        }
        if self.identities.steps_list.is_empty() {
            return Err(Error::Config(
                "identities.steps_list: must be nonempty".into(),
            ));
        }
        if self.estimates.scale_grid.is_empty() {
            return Err(Error::Config(
                "estimates.scale_grid: must be nonempty".into(),
            ));
        }
        if self.continuity.levels == 0 {
            return Err(Error::Config("continuity.levels: must be ≥ 1".into()));
        }
        Ok(())
    }
}
