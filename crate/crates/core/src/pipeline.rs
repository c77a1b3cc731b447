//! Input text to assembled network.

use crate::assembly::{assemble, Assembly, AssemblyError};
use crate::defaults::Defaults;
use crate::input::{apply_overrides, parse_with, InputError, LogicalNetwork};
use crate::junction::JunctionError;
use crate::odr::check_consistency;
use crate::segment::build_segment;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("input: {0}")]
    Input(#[from] InputError),
    #[error("build: segment {}: {}: {}", .0.segment, .0.pos, .0.message)]
    Build(JunctionError),
    #[error("assemble: {0}")]
    Assemble(#[from] AssemblyError),
    #[error("check: {}", .0.join("; "))]
    Consistency(Vec<String>),
}

impl PipelineError {
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::Input(_) => "input",
            PipelineError::Build(_) => "build",
            PipelineError::Assemble(_) => "assemble",
            PipelineError::Consistency(_) => "check",
        }
    }

    /// The message without the stage prefix.
    pub fn detail(&self) -> String {
        match self {
            PipelineError::Input(e) => e.to_string(),
            PipelineError::Build(e) => format!("segment {}: {}: {}", e.segment, e.pos, e.message),
            PipelineError::Assemble(e) => e.to_string(),
            PipelineError::Consistency(p) => p.join("\n"),
        }
    }

    /// 1 for problems in the input, 2 for geometry that cannot be built.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Input(_) => 1,
            PipelineError::Assemble(
                AssemblyError::Curvature { .. } | AssemblyError::Unreachable { .. } | AssemblyError::Lanes { .. },
            ) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub logical: LogicalNetwork,
    pub assembly: Assembly,
}

pub fn generate(text: &str, overrides: &[(String, String)], defaults: &Defaults) -> Result<Generated, PipelineError> {
    let text = apply_overrides(text, overrides)?;
    let logical = parse_with(&text, defaults)?;
    let built = logical
        .segments
        .iter()
        .map(|s| build_segment(s, defaults))
        .collect::<Result<Vec<_>, _>>()
        .map_err(PipelineError::Build)?;
    let assembly = assemble(&logical, built, defaults)?;
    let problems = check_consistency(&assembly.network);
    if !problems.is_empty() {
        return Err(PipelineError::Consistency(problems));
    }
    Ok(Generated { logical, assembly })
}
