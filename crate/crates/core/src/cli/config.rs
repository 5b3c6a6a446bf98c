//! Run configuration: TOML, or JSON with the same schema.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::eos::EquationOfState;
use crate::equilibrium::SolveOptions;
use crate::error::Error;
use crate::mass::GridSpec;
use crate::rotation::RotationLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    LaneEmden,
    Solve,
    Oblateness,
    MassCurve,
    KernelCheck,
    HlCheck,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub eos: EosSection,
    #[serde(default)]
    pub rotation: RotationSection,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub mass: Option<MassSection>,
    #[serde(default)]
    pub oblateness: OblatenessSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EosSection {
    /// Exactly one of `nu` and `gamma`.
    Polytrope {
        nu: Option<f64>,
        gamma: Option<f64>,
        #[serde(default = "one")]
        a_const: f64,
    },
    WhiteDwarf {
        a: f64,
        b: f64,
        c: f64,
    },
}

impl Default for EosSection {
    fn default() -> Self {
        EosSection::Polytrope {
            nu: Some(1.5),
            gamma: None,
            a_const: 1.0,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RotationSection {
    #[default]
    None,
    /// Uniform rotation given by the dimensionless parameter.
    Beta {
        beta: f64,
    },
    /// Uniform rotation in physical units.
    Constant {
        omega: f64,
    },
    Differential {
        varpi: Vec<f64>,
        omega: Vec<f64>,
    },
    AngularMomentum {
        m: Vec<f64>,
        j: Vec<f64>,
    },
}

impl RotationSection {
    pub fn law(&self) -> Option<RotationLaw> {
        match self {
            RotationSection::Constant { omega } => Some(RotationLaw::Constant { omega: *omega }),
            RotationSection::Differential { varpi, omega } => Some(RotationLaw::Differential {
                varpi: varpi.clone(),
                omega: omega.clone(),
            }),
            RotationSection::AngularMomentum { m, j } => Some(RotationLaw::AngularMomentum {
                m: m.clone(),
                j: j.clone(),
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub newton: bool,
    pub hl_threshold: f64,
    pub r0_fraction: f64,
    pub certify: bool,
    /// Increasing β values; when nonempty, `solve` runs a continuation.
    pub beta_schedule: Vec<f64>,
    /// Tolerance of the radial ODE.
    pub ode_tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = SolveOptions::default();
        Self {
            tol: o.tol,
            max_iter: o.max_iter,
            damping: o.damping,
            newton: o.newton,
            hl_threshold: o.hl_threshold,
            r0_fraction: o.r0_fraction,
            certify: o.certify,
            beta_schedule: Vec::new(),
            ode_tol: 1e-12,
        }
    }
}

impl SolverSection {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            damping: self.damping,
            newton: self.newton,
            hl_threshold: self.hl_threshold,
            r0_fraction: self.r0_fraction,
            certify: self.certify,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    /// Central enthalpy.
    pub u_o: f64,
    pub g_grav: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            u_o: 1.0,
            g_grav: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Used when `--out` is not given.
    pub dir: Option<String>,
    pub csv: bool,
    pub json: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            csv: true,
            json: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassSection {
    /// Target mass; when absent, the mass of the nonrotating star with `rho_ref`.
    pub m_target: Option<f64>,
    pub rho_ref: Option<f64>,
    pub omega2: Vec<f64>,
    pub bracket: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OblatenessSection {
    pub beta: f64,
    pub zeta: Vec<f64>,
    /// Also run the full nonlinear solve and report the measured oblateness.
    pub measure: bool,
}

impl Default for OblatenessSection {
    fn default() -> Self {
        Self {
            beta: 1e-3,
            zeta: vec![0.0, 0.5, 1.0],
            measure: false,
        }
    }
}

fn scoped(section: &str, e: Error) -> CliError {
    match e {
        Error::InvalidParameter { name, reason } => CliError::Config {
            field: format!("{section}.{name}"),
            reason,
        },
        other => CliError::Config {
            field: section.into(),
            reason: other.to_string(),
        },
    }
}

fn bad(field: &str, reason: &str) -> CliError {
    CliError::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(field, "must be finite and positive"))
    }
}

/// `section.key` at the error span of a TOML document.
fn toml_field(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    let Some(span) = span.filter(|s| s.end <= text.len()) else {
        return "config".into();
    };
    let line_start = text[..span.start].rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next().unwrap_or("");
    let key = match line.split_once('=') {
        Some((k, _)) => k,
        None => &text[span.clone()],
    }
    .trim()
    .trim_matches('"');
    let section = text[..line_start]
        .lines()
        .rev()
        .find_map(|l| l.trim().strip_prefix('[').and_then(|l| l.strip_suffix(']')))
        .map(str::trim);
    let simple = !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    match (section, simple) {
        (Some(sec), true) => format!("{sec}.{key}"),
        (None, true) => key.to_string(),
        (Some(sec), false) => sec.to_string(),
        (None, false) => "config".into(),
    }
}

impl RunConfig {
    /// Parse by file extension: `.json` as JSON, anything else as TOML.
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let cfg: RunConfig = if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        {
            serde_json::from_str(text).map_err(|e| bad("config", &e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| CliError::Config {
                field: toml_field(text, e.span()),
                reason: e.message().to_string(),
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn eos(&self) -> Result<EquationOfState, CliError> {
        let eos = match &self.eos {
            EosSection::Polytrope { nu, gamma, a_const } => match (nu, gamma) {
                (Some(nu), None) => EquationOfState::polytrope_index(*nu, *a_const),
                (None, Some(g)) => EquationOfState::polytrope(*g, *a_const),
                _ => return Err(bad("eos", "give exactly one of nu and gamma")),
            },
            EosSection::WhiteDwarf { a, b, c } => EquationOfState::white_dwarf(*a, *b, *c),
        };
        eos.map_err(|e| scoped("eos", e))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.eos()?;
        self.grid.validate().map_err(|e| scoped("grid", e))?;
        let s = &self.solver;
        self.solver
            .options()
            .validate()
            .map_err(|e| scoped("solver", e))?;
        positive("solver.ode_tol", s.ode_tol)?;
        if s.beta_schedule
            .iter()
            .any(|b| !(b.is_finite() && *b >= 0.0))
        {
            return Err(bad(
                "solver.beta_schedule",
                "entries must be finite and nonnegative",
            ));
        }
        if s.beta_schedule.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(bad("solver.beta_schedule", "must be strictly increasing"));
        }
        positive("physics.u_o", self.physics.u_o)?;
        positive("physics.g_grav", self.physics.g_grav)?;
        match &self.rotation {
            RotationSection::None => {}
            RotationSection::Beta { beta } => {
                if !(beta.is_finite() && *beta >= 0.0) {
                    return Err(bad("rotation.beta", "must be finite and nonnegative"));
                }
            }
            r => r
                .law()
                .unwrap()
                .validate()
                .map_err(|e| scoped("rotation", e))?,
        }
        let ob = &self.oblateness;
        if !(ob.beta.is_finite() && ob.beta >= 0.0) {
            return Err(bad("oblateness.beta", "must be finite and nonnegative"));
        }
        if ob.zeta.iter().any(|z| !(z.abs() <= 1.0)) {
            return Err(bad("oblateness.zeta", "entries must lie in [-1, 1]"));
        }
        if let Some(m) = &self.mass {
            match (m.m_target, m.rho_ref) {
                (Some(v), None) => positive("mass.m_target", v)?,
                (None, Some(v)) => positive("mass.rho_ref", v)?,
                _ => return Err(bad("mass", "give exactly one of m_target and rho_ref")),
            }
            if m.omega2.is_empty() {
                return Err(bad("mass.omega2", "must not be empty"));
            }
            if m.omega2.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(bad("mass.omega2", "entries must be finite and nonnegative"));
            }
            if !(m.bracket[0] > 0.0 && m.bracket[1] > m.bracket[0] && m.bracket[1].is_finite()) {
                return Err(bad("mass.bracket", "need 0 < lo < hi"));
            }
        }
        match self.command {
            Command::MassCurve if self.mass.is_none() => Err(bad("mass", "required by mass-curve")),
            Command::Solve | Command::HlCheck
                if !s.beta_schedule.is_empty()
                    && !matches!(self.rotation, RotationSection::None) =>
            {
                Err(bad(
                    "solver.beta_schedule",
                    "cannot be combined with a rotation section",
                ))
            }
            _ => Ok(()),
        }
    }
}
