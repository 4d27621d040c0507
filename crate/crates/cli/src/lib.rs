//! Shared pieces of the `stackdram` command line: data-file lookup, node
//! resolution, the validation suite and case-study descriptions.

pub mod case_study;
pub mod nodes;
pub mod validate;

use std::path::{Path, PathBuf};

/// Environment variable naming the default data directory.
pub const DATA_DIR_ENV: &str = "STACKDRAM_DATA_DIR";

/// Default data directory: `$STACKDRAM_DATA_DIR`, else `./data` when it
/// exists, else the data directory of the source tree.
pub fn data_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        return PathBuf::from(dir);
    }
    let local = PathBuf::from("data");
    if local.is_dir() {
        return local;
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Resolves `path` against the directory holding `file`, unless absolute.
pub fn relative_to(file: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        file.parent().unwrap_or_else(|| Path::new(".")).join(path)
    }
}
