use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use unsemi_core::rational::parse_rational;
use unsemi_core::verify::Interval;
use unsemi_core::VerifyConfig;

/// Sampling and tolerance flags shared by the commands that run the solver.
/// Values given here override the config file, which overrides defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML or JSON file with any subset of the verify settings
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Base box, one `lo:hi` per variable or a single one for all
    #[arg(long = "box", value_name = "LO:HI[,LO:HI..]", allow_hyphen_values = true)]
    pub base_box: Option<String>,
    /// Grid points per base axis
    #[arg(long)]
    pub grid_res: Option<usize>,
    /// Number of solver starts
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Acceptance bound on |P| for points on the variety
    #[arg(long)]
    pub delta: Option<f64>,
    /// Band around zero in which float atom values count as zero
    #[arg(long)]
    pub tau: Option<f64>,
    /// Atom distance below which soundness misses are skipped
    #[arg(long)]
    pub eps_boundary: Option<f64>,
    /// Edge radius of the component proximity graph
    #[arg(long)]
    pub eps_prox: Option<f64>,
    /// Interval bounding every auxiliary variable while solving
    #[arg(long, value_name = "LO:HI", allow_hyphen_values = true)]
    pub aux_box: Option<String>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<VerifyConfig> {
        let mut cfg = match &self.config {
            Some(path) => load(path)?,
            None => VerifyConfig::default(),
        };
        if let Some(b) = &self.base_box {
            cfg.base_box = b.split(',').map(parse_interval).collect::<Result<_>>()?;
        }
        if let Some(b) = &self.aux_box {
            cfg.aux_box = parse_interval(b)?;
        }
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        set!(grid_res => grid_res, samples => n_samples, seed => seed, delta => delta_variety,
             tau => tau_membership, eps_boundary => eps_boundary, eps_prox => eps_proximity);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load(path: &PathBuf) -> Result<VerifyConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    };
    Ok(cfg)
}

/// `lo:hi` with rational endpoints, e.g. `-3/2:2`.
pub fn parse_interval(s: &str) -> Result<Interval> {
    let Some((lo, hi)) = s.trim().split_once(':') else {
        bail!("interval `{s}` is not of the form lo:hi");
    };
    let lo = parse_rational(lo.trim()).with_context(|| format!("interval `{s}`"))?;
    let hi = parse_rational(hi.trim()).with_context(|| format!("interval `{s}`"))?;
    Ok(Interval::new(lo, hi)?)
}
