//! JSON state files: `{"dims": [..], "re": [[..]], "im": [[..]]}`.

use std::path::Path;

use entcont::linops::{CMatrix, DimensionProfile};
use entcont::statekit::DensityMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let d = rho.dim();
        let dims = rho.profile().map(|p| p.locals().to_vec()).unwrap_or_else(|| vec![d]);
        let re = (0..d).map(|i| (0..d).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..d).map(|i| (0..d).map(|j| m[(i, j)].im).collect()).collect();
        StateFile { dims, re, im }
    }

    pub fn to_state(&self) -> Result<DensityMatrix, CliError> {
        let d = self.re.len();
        let square = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if d == 0 || !square(&self.re) || !square(&self.im) {
            return Err(CliError::Format("re and im must be square arrays of equal size".into()));
        }
        let m = CMatrix::from_fn(d, d, |i, j| Complex64::new(self.re[i][j], self.im[i][j]));
        let profile = DimensionProfile::new(&self.dims)?;
        Ok(DensityMatrix::new(m)?.with_profile(profile)?)
    }
}

pub fn to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string(&StateFile::from_state(rho)).expect("state file serializes")
}

pub fn from_json(text: &str) -> Result<DensityMatrix, CliError> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| CliError::Format(e.to_string()))?;
    file.to_state()
}

pub fn read_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = std::fs::read_to_string(path)?;
    from_json(&text)
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> Result<(), CliError> {
    std::fs::write(path, to_json(rho) + "\n")?;
    Ok(())
}
