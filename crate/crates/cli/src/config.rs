use std::path::Path;

use anyhow::{bail, Context};
use nonlocal_core::kernels::{frac_laplacian_kernel, holder_coefficient_kernel, truncated_kernel, KernelSpec};
use nonlocal_core::{Analytic, Domain1D, Rhs};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Seminorm,
    Solve,
    Caccioppoli,
    FitExponent,
    Counterexample,
    VerifyKernel,
    PartsIdentity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Seminorm => "seminorm",
            Command::Solve => "solve",
            Command::Caccioppoli => "caccioppoli",
            Command::FitExponent => "fit-exponent",
            Command::Counterexample => "counterexample",
            Command::VerifyKernel => "verify-kernel",
            Command::PartsIdentity => "parts-identity",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub kernel: Option<KernelSection>,
    pub domain: Option<DomainSection>,
    pub rhs: Option<RhsSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    /// `fractional`, `truncated` or `holder`.
    pub family: String,
    pub s: f64,
    pub cutoff: Option<f64>,
    /// Holder family: `a(x, y) = center + amplitude · sin(x + y)`.
    pub center: Option<f64>,
    pub amplitude: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub a: f64,
    pub b: f64,
    pub mesh_size: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhsSection {
    /// `constant`, `power` or `bump`.
    pub kind: String,
    pub value: Option<f64>,
    pub center: Option<f64>,
    pub gamma: Option<f64>,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// `ramp`, `power`, `bump` or `solution`.
    pub function: Option<String>,
    pub alpha: Option<f64>,
    pub at: Option<f64>,
    pub center: Option<f64>,
    pub radius: Option<f64>,
    pub s: Option<f64>,
    pub sigma: Option<f64>,
    pub p: Option<f64>,
    pub l: Option<usize>,
    pub lambda: Option<f64>,
    pub sub_a: Option<f64>,
    pub sub_b: Option<f64>,
    pub z_min: Option<f64>,
    pub z_max: Option<f64>,
    pub x0: Option<f64>,
    pub r: Option<f64>,
    pub eps_k_min: Option<i32>,
    pub eps_k_max: Option<i32>,
    pub samples: Option<usize>,
    pub cases: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: None,
            formats: default_formats(),
        }
    }
}

fn default_formats() -> Vec<String> {
    vec!["csv".into()]
}

/// Raw text plus the parsed form; the text feeds the manifest hash.
pub struct Loaded {
    pub text: String,
    pub config: RunConfig,
}

pub fn load(path: &Path) -> anyhow::Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    config.validate()?;
    Ok(Loaded { text, config })
}

fn need<'a, T>(section: &'a Option<T>, name: &str, cmd: Command) -> anyhow::Result<&'a T> {
    section
        .as_ref()
        .with_context(|| format!("command `{}` needs a [{name}] section", cmd.name()))
}

impl RunConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        let cmd = self.command;
        let uses_solution = self.analysis.function.as_deref() == Some("solution");
        match cmd {
            Command::Solve | Command::Caccioppoli => {
                need(&self.kernel, "kernel", cmd)?;
                need(&self.domain, "domain", cmd)?;
                need(&self.rhs, "rhs", cmd)?;
            }
            Command::Seminorm | Command::FitExponent => {
                if self.analysis.function.is_none() {
                    bail!("command `{}` needs analysis.function", cmd.name());
                }
                if uses_solution {
                    need(&self.kernel, "kernel", cmd)?;
                    need(&self.domain, "domain", cmd)?;
                    need(&self.rhs, "rhs", cmd)?;
                }
            }
            Command::VerifyKernel | Command::PartsIdentity => {
                need(&self.kernel, "kernel", cmd)?;
            }
            Command::Counterexample => {}
        }
        if let Some(t) = self.analysis.tolerance {
            if !(t > 0.0) {
                bail!("analysis.tolerance must be positive, got {t}");
            }
        }
        if let Some(f) = &self.output.formats.iter().find(|f| f.as_str() != "csv") {
            bail!("unsupported output format `{f}`");
        }
        Ok(())
    }

    pub fn tolerance(&self) -> f64 {
        self.analysis.tolerance.unwrap_or(1e-6)
    }

    pub fn seed(&self) -> u64 {
        self.analysis.seed.unwrap_or(0x5eed)
    }

    pub fn kernel(&self) -> anyhow::Result<KernelSpec> {
        let k = need(&self.kernel, "kernel", self.command)?;
        let spec = match k.family.as_str() {
            "fractional" => frac_laplacian_kernel(k.s)?,
            "truncated" => truncated_kernel(k.s, k.cutoff.context("kernel.cutoff is required")?)?,
            "holder" => {
                let c = k.center.unwrap_or(2.0);
                let amp = k.amplitude.unwrap_or(1.0);
                if !(amp >= 0.0 && c - amp > 0.0) {
                    bail!("holder kernel needs 0 <= amplitude < center");
                }
                // |sin(u + 2z) - sin(u)| ≤ 2|z| ≤ 2|z|^s for |z| < 1
                holder_coefficient_kernel(k.s, move |x, y| c + amp * (x + y).sin(), c - amp, c + amp, 2.0 * amp)?
            }
            other => bail!("unknown kernel family `{other}`"),
        };
        Ok(spec)
    }

    pub fn domain(&self) -> anyhow::Result<(Domain1D, usize)> {
        let d = need(&self.domain, "domain", self.command)?;
        Ok((Domain1D::new(d.a, d.b)?, d.mesh_size))
    }

    pub fn rhs(&self) -> anyhow::Result<Rhs> {
        let r = need(&self.rhs, "rhs", self.command)?;
        Ok(match r.kind.as_str() {
            "constant" => Rhs::constant(r.value.unwrap_or(1.0)),
            "power" => Rhs::power_singularity(
                r.center.unwrap_or(0.0),
                r.gamma.context("rhs.gamma is required for kind = \"power\"")?,
            )?,
            "bump" => {
                let b = Analytic::bump(
                    r.center.unwrap_or(0.0),
                    r.radius.context("rhs.radius is required for kind = \"bump\"")?,
                    r.value.unwrap_or(1.0),
                );
                Rhs::function(move |x| nonlocal_core::RealFn::eval(&b, x))
            }
            other => bail!("unknown rhs kind `{other}`"),
        })
    }

    /// `Ω'` from `analysis.sub_a/sub_b`, falling back to the problem domain.
    pub fn subdomain(&self) -> anyhow::Result<Domain1D> {
        match (self.analysis.sub_a, self.analysis.sub_b) {
            (Some(a), Some(b)) => Ok(Domain1D::new(a, b)?),
            (None, None) => Ok(self.domain()?.0),
            _ => bail!("analysis.sub_a and analysis.sub_b must be given together"),
        }
    }

    /// A built-in function from the analysis section (not `solution`).
    pub fn builtin_function(&self) -> anyhow::Result<Analytic> {
        let a = &self.analysis;
        Ok(match a.function.as_deref().unwrap_or("") {
            "ramp" => Analytic::positive_power(1.0, a.at.unwrap_or(0.0)),
            "power" => Analytic::positive_power(
                a.alpha.context("analysis.alpha is required for function = \"power\"")?,
                a.at.unwrap_or(0.0),
            ),
            "bump" => Analytic::bump(a.center.unwrap_or(0.0), a.radius.context("analysis.radius is required")?, 1.0),
            other => bail!("unknown analysis.function `{other}`"),
        })
    }
}
