//! The resolved run configuration shared by every subcommand.

use std::path::PathBuf;

use fsjn_core::rational::{parse_rational, rat};
use fsjn_core::Rational;

use crate::CliError;

/// Defaults: horizon 64, brute-force cap 14, materialization cap 18,
/// tolerance 1/16, seed 0, output directory `.`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// How many indices analyses and materializations walk.
    pub horizon: u64,
    /// Largest block size exhaustive sign-vector sweeps may enumerate.
    pub brute_force_cap: u64,
    /// Most measures eagerly embedded in a generator handle file.
    pub materialization_cap: u64,
    /// Tolerance for windowed (non-exact) checks.
    pub tolerance: Rational,
    /// Where report and handle files are written.
    pub output_dir: PathBuf,
    /// Seed for every randomized sweep; embedded in reports.
    pub seed: u64,
}

impl RunConfig {
    /// Resolves the configuration from optional flag values.
    pub fn resolve(
        horizon: Option<u64>,
        cap: Option<u64>,
        tolerance: Option<&str>,
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> Result<RunConfig, CliError> {
        let tolerance = match tolerance {
            Some(s) => parse_rational(s)
                .map_err(|e| CliError::Usage(format!("bad --tolerance: {e}")))?,
            None => rat(1, 16),
        };
        if tolerance <= rat(0, 1) {
            return Err(CliError::Usage(String::from("--tolerance must be positive")));
        }
        let config = RunConfig {
            horizon: horizon.unwrap_or(64),
            brute_force_cap: 14,
            materialization_cap: cap.unwrap_or(18),
            tolerance,
            output_dir: out.unwrap_or_else(|| PathBuf::from(".")),
            seed: seed.unwrap_or(0),
        };
        if config.materialization_cap == 0 {
            return Err(CliError::Usage(String::from("--cap must be at least 1")));
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_contract() {
        let c = RunConfig::resolve(None, None, None, None, None).unwrap();
        assert_eq!(c.horizon, 64);
        assert_eq!(c.brute_force_cap, 14);
        assert_eq!(c.materialization_cap, 18);
        assert_eq!(c.tolerance, rat(1, 16));
        assert_eq!(c.seed, 0);
        assert_eq!(c.output_dir, PathBuf::from("."));
    }

    #[test]
    fn bad_tolerances_are_usage_errors() {
        assert!(RunConfig::resolve(None, None, Some("0"), None, None).is_err());
        assert!(RunConfig::resolve(None, None, Some("x/y"), None, None).is_err());
        assert!(RunConfig::resolve(None, Some(0), None, None, None).is_err());
        let c = RunConfig::resolve(None, None, Some("1/8"), None, None).unwrap();
        assert_eq!(c.tolerance, rat(1, 8));
    }
}
