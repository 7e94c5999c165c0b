//! Instance directories, configuration lookup and the solution file format.

use std::fs;
use std::path::{Path, PathBuf};

use bbqp_core::engine::{shipped, CmcsConfig};
use bbqp_core::{BbqpInstance, Solution};

use crate::error::{CliError, CliResult};

pub const INSTANCE_EXTENSION: &str = "bbqp";

/// Registry file used when none is given: `best_known.tsv` next to the
/// instances.
pub fn default_registry(dir: &Path) -> PathBuf {
    dir.join("best_known.tsv")
}

/// Identifier of an instance file: its stem.
pub fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Expands directories to their `*.bbqp` files, sorted by name; plain files
/// are kept as given.
pub fn instance_paths(inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .map_err(|e| CliError::io(format!("{}: {e}", input.display())))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == INSTANCE_EXTENSION))
                .collect();
            found.sort();
            out.extend(found);
        } else if input.exists() {
            out.push(input.clone());
        } else {
            return Err(CliError::io(format!("{}: no such file or directory", input.display())));
        }
    }
    if out.is_empty() {
        return Err(CliError::io("no instance files found"));
    }
    Ok(out)
}

pub fn load_instances(inputs: &[PathBuf]) -> CliResult<Vec<(String, BbqpInstance)>> {
    instance_paths(inputs)?
        .into_iter()
        .map(|p| Ok((instance_id(&p), BbqpInstance::load(&p)?)))
        .collect()
}

/// Loads a configuration file, or one of the shipped configurations by name
/// (`mchh`, `reduced`, `two_row`) when no such file exists.
pub fn load_config(spec: &str) -> CliResult<CmcsConfig> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(config) = shipped::by_name(spec) {
            return Ok(config);
        }
    }
    let config = CmcsConfig::load(path)?;
    config.validate()?;
    Ok(config)
}

/// Solution file: the `x` bits, the `y` bits and the objective, one per line.
pub fn solution_text(sol: &Solution) -> String {
    format!(
        "{}\n{}\n{}\n",
        Solution::bits(sol.x()),
        Solution::bits(sol.y()),
        sol.objective()
    )
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}
