pub mod capacity;
pub mod dstar;
pub mod landscape;
pub mod partition;
pub mod radius;
pub mod scaling;
pub mod verify;

use std::path::PathBuf;

use assocmem::patterns::{load_vectors, Format, VectorSet};

use crate::CliError;

pub(crate) fn read_vectors(path: &PathBuf) -> Result<VectorSet, CliError> {
    let file =
        std::fs::File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    load_vectors(std::io::BufReader::new(file), Format::from_path(path))
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Formats a float for file names: `1` for 1.0, `0.5` for 0.5.
pub(crate) fn tag(x: f64) -> String {
    format!("{x}")
}
