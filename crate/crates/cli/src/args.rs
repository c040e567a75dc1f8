use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "cvqkd",
    version,
    about = "Key rates and eavesdropper information for continuous-variable QKD"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Secret key rate at one parameter point.
    Rate(Params),
    /// Eavesdropper (Holevo) information at one parameter point.
    Chi(Params),
    /// Regenerate the data table behind a figure.
    Sweep {
        #[arg(value_enum)]
        figure: Figure,
        #[command(flatten)]
        params: Params,
    },
    /// Run the built-in validation suites.
    Validate(Params),
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolArg {
    #[value(alias = "asymmetric-min-leak")]
    #[serde(alias = "asymmetric-min-leak")]
    Asym,
    Heralding,
    SqueezedHomodyne,
    CoherentHeterodyne,
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum AttackArg {
    Symmetric,
    General,
    EqualNoise,
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig4,
    Fig5,
    Fig6,
}

/// Every option accepted by any subcommand. A `--config` file holds the same
/// keys as the long flag names; flags given on the command line win.
#[derive(Args, Deserialize, Debug, Default, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Protocol: asym, heralding, squeezed-homodyne, coherent-heterodyne.
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolArg>,
    /// Modulation variance (shot-noise units).
    #[arg(long = "v-sig", allow_negative_numbers = true)]
    #[serde(rename = "v-sig")]
    pub v_sig: Option<f64>,
    /// Squeezed-quadrature variance (shot-noise units).
    #[arg(long = "v-sqz", allow_negative_numbers = true)]
    #[serde(rename = "v-sqz")]
    pub v_sqz: Option<f64>,
    /// Squeezing in dB; alternative to --v-sqz.
    #[arg(long = "sqz-db", allow_negative_numbers = true)]
    #[serde(rename = "sqz-db")]
    pub sqz_db: Option<f64>,
    /// EPR variance (entanglement-based form). For the comparison protocols
    /// this is the modulation V; omit it to optimize V.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Squeezing parameter of the outgoing mode (entanglement-based form).
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Channel transmissivity.
    #[arg(long = "T", allow_negative_numbers = true)]
    #[serde(rename = "T")]
    pub t: Option<f64>,
    /// Transmissivity of the x quadrature.
    #[arg(long = "T-x", allow_negative_numbers = true)]
    #[serde(rename = "T-x")]
    pub t_x: Option<f64>,
    /// Transmissivity of the p quadrature.
    #[arg(long = "T-p", allow_negative_numbers = true)]
    #[serde(rename = "T-p")]
    pub t_p: Option<f64>,
    /// Excess noise referred to the channel input (default 0).
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    /// Excess noise on the x quadrature.
    #[arg(long = "xi-x", allow_negative_numbers = true)]
    #[serde(rename = "xi-x")]
    pub xi_x: Option<f64>,
    /// Excess noise on the p quadrature.
    #[arg(long = "xi-p", allow_negative_numbers = true)]
    #[serde(rename = "xi-p")]
    pub xi_p: Option<f64>,
    /// Reconciliation efficiency (default 0.95).
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Attack model for the asymmetric protocol (default symmetric).
    #[arg(long, value_enum)]
    pub attack: Option<AttackArg>,
    /// Largest fiber distance in km.
    #[arg(long = "d-max", allow_negative_numbers = true)]
    #[serde(rename = "d-max")]
    pub d_max: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    pub points: Option<usize>,
    /// Fiber loss in dB/km (default 0.2).
    #[arg(long = "loss-db-per-km", allow_negative_numbers = true)]
    #[serde(rename = "loss-db-per-km")]
    pub loss_db_per_km: Option<f64>,
    /// Output format (default csv, or json when --out ends in .json).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Tolerance of the one-dimensional optimizers.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Multiply the key rate by a sifting probability (0.5 when given without a value).
    #[arg(long, num_args = 0..=1, default_missing_value = "0.5", allow_negative_numbers = true)]
    pub sifting: Option<f64>,
    /// Flat TOML file of flag values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! flag_table {
    ($($field:ident => $flag:literal),* $(,)?) => {
        impl Params {
            /// Fills every unset flag from `file`.
            fn merged_with(self, file: Params) -> Params {
                Params {
                    $($field: self.$field.or(file.$field),)*
                    config: self.config,
                }
            }

            /// Long names of the flags that carry a value.
            pub fn provided(&self) -> Vec<&'static str> {
                let mut out = Vec::new();
                $(if self.$field.is_some() { out.push($flag); })*
                out
            }
        }
    };
}

flag_table! {
    protocol => "protocol",
    v_sig => "v-sig",
    v_sqz => "v-sqz",
    sqz_db => "sqz-db",
    mu => "mu",
    r => "r",
    t => "T",
    t_x => "T-x",
    t_p => "T-p",
    xi => "xi",
    xi_x => "xi-x",
    xi_p => "xi-p",
    beta => "beta",
    attack => "attack",
    d_max => "d-max",
    points => "points",
    loss_db_per_km => "loss-db-per-km",
    format => "format",
    out => "out",
    jobs => "jobs",
    tol => "tol",
    sifting => "sifting",
}

impl Params {
    /// Applies the `--config` file, if any.
    pub fn resolve(self) -> Result<Params, CliError> {
        match self.config.clone() {
            None => Ok(self),
            Some(path) => Ok(self.merged_with(load_config(&path)?)),
        }
    }

    /// Rejects flags the command does not use.
    pub fn only(&self, command: &str, allowed: &[&str]) -> Result<(), CliError> {
        for flag in self.provided() {
            if !allowed.contains(&flag) {
                return Err(CliError::Usage(format!(
                    "--{flag} is not used by `{command}`"
                )));
            }
        }
        Ok(())
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_else(|| match &self.out {
            Some(p)
                if p.extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("json")) =>
            {
                Format::Json
            }
            _ => Format::Csv,
        })
    }
}

fn load_config(path: &Path) -> Result<Params, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}
