use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use anyhow::{anyhow, Context};
use combimots::chem::io::{read_blocks, read_fragments, read_templates, Fragment};
use combimots::chem::{BuildingBlock, ReactionTemplate};
use combimots::pareto::ObjectiveSpec;
use sha2::{Digest, Sha256};

use crate::{CliError, CliResult};

pub fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::input(anyhow!("cannot open {}: {e}", path.display())))
}

pub fn blocks(path: &Path) -> CliResult<Vec<BuildingBlock>> {
    read_blocks(BufReader::new(open(path)?))
        .with_context(|| path.display().to_string())
        .map_err(CliError::input)
}

pub fn templates(path: &Path) -> CliResult<Vec<ReactionTemplate>> {
    read_templates(open(path)?)
        .with_context(|| path.display().to_string())
        .map_err(CliError::input)
}

pub fn fragments(path: &Path) -> CliResult<Vec<Fragment>> {
    read_fragments(BufReader::new(open(path)?))
        .with_context(|| path.display().to_string())
        .map_err(CliError::input)
}

pub fn objectives(path: Option<&Path>) -> CliResult<ObjectiveSpec> {
    let Some(path) = path else {
        return Ok(ObjectiveSpec::dual_target_default());
    };
    let spec: ObjectiveSpec = serde_json::from_reader(BufReader::new(open(path)?))
        .with_context(|| path.display().to_string())
        .map_err(CliError::input)?;
    spec.validate()
        .with_context(|| path.display().to_string())
        .map_err(CliError::input)?;
    Ok(spec)
}

/// Hex SHA-256 of a file's contents.
pub fn digest(path: &Path) -> CliResult<String> {
    let mut bytes = Vec::new();
    open(path)?
        .read_to_end(&mut bytes)
        .map_err(|e| CliError::input(anyhow!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
