//! State ingestion: a JSON file or one of the built-in generators.

use std::path::PathBuf;

use clap::Args;
use cohcert::channels::maximally_coherent;
use cohcert::linalg::json::density_from_json_str;
use cohcert::linalg::{random_density_matrix, DensityMatrix, PureState};
use cohcert::{Error, Result};
use serde::Serialize;

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct StateArgs {
    /// Density matrix JSON file: {"dim", "re", "im"}.
    #[arg(long, value_name = "FILE")]
    pub state: Option<PathBuf>,
    /// Real amplitudes of a pure state, normalized on load.
    #[arg(long, value_name = "a1,a2,...", value_delimiter = ',', allow_negative_numbers = true)]
    pub pure: Option<Vec<f64>>,
    /// Seeded random mixed state.
    #[arg(long, value_name = "dim,rank,seed")]
    pub random: Option<String>,
    /// Maximally coherent state of dimension d.
    #[arg(long, value_name = "d")]
    pub maxcoh: Option<usize>,
}

/// How the state was obtained; echoed into the report body.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    File { path: String },
    Pure { amplitudes: Vec<f64> },
    Random { dim: usize, rank: usize, seed: u64 },
    Maxcoh { dim: usize },
}

fn parse_random(spec: &str) -> Result<(usize, usize, u64)> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || Error::Parse(format!("--random expects dim,rank,seed, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let dim = parts[0].parse().map_err(|_| bad())?;
    let rank = parts[1].parse().map_err(|_| bad())?;
    let seed = parts[2].parse().map_err(|_| bad())?;
    Ok((dim, rank, seed))
}

impl StateArgs {
    pub fn load(&self) -> Result<(DensityMatrix, Source)> {
        if let Some(path) = &self.state {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
            let rho = density_from_json_str(&text)?;
            cohcert::linalg::check_dim(rho.dim())?;
            return Ok((rho, Source::File { path: path.display().to_string() }));
        }
        if let Some(a) = &self.pure {
            let psi = PureState::from_real(a)?;
            cohcert::linalg::check_dim(psi.dim())?;
            return Ok((psi.to_density(), Source::Pure { amplitudes: a.clone() }));
        }
        if let Some(spec) = &self.random {
            let (dim, rank, seed) = parse_random(spec)?;
            cohcert::linalg::check_dim(dim)?;
            return Ok((random_density_matrix(dim, rank, seed)?, Source::Random { dim, rank, seed }));
        }
        if let Some(d) = self.maxcoh {
            cohcert::linalg::check_dim(d)?;
            return Ok((maximally_coherent(d, None)?.to_density(), Source::Maxcoh { dim: d }));
        }
        Err(Error::InvalidArgument("no state source given".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_spec_parsing() {
        assert_eq!(parse_random("3, 2, 7").unwrap(), (3, 2, 7));
        assert!(parse_random("3,2").is_err());
        assert!(parse_random("x,2,1").is_err());
    }
}
