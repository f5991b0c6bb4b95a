use std::fmt;
use std::fs;
use std::path::Path;

use ncp_core::codec::{self, CodecError};
use ncp_core::justification::{self, Deviation, JustifyError, RecompileError};
use ncp_core::presets::Preset;
use ncp_core::{collab, validator, Storyform};

use crate::style;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Findings = 1,
}

/// Anything that ends a command with exit status 2.
#[derive(Debug)]
pub struct Failure(String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

type Outcome = Result<Status, Failure>;

fn read(path: &Path) -> Result<Storyform, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| {
        Failure(format!(
            "{}: {}",
            path.display(),
            CodecError::Encoding {
                offset: e.valid_up_to()
            }
        ))
    })?;
    let (storyform, warnings) =
        codec::parse_with_warnings(text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    for w in warnings {
        style::warning(&format!("{}: {w}", path.display()));
    }
    Ok(storyform)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))
}

pub fn validate(file: &Path) -> Outcome {
    let s = read(file)?;
    let report = validator::validate(&s);
    for d in &report.diagnostics {
        println!("{d}");
    }
    let errors = report.errors().count();
    let warnings = report.warnings().count();
    style::note(&format!("{}: {errors} error(s), {warnings} warning(s)", file.display()));
    Ok(if report.valid { Status::Ok } else { Status::Findings })
}

pub fn fmt(file: &Path, in_place: bool) -> Outcome {
    let s = read(file)?;
    let text = codec::serialize(&s);
    if in_place {
        write(file, &text)?;
    } else {
        print!("{text}");
    }
    Ok(Status::Ok)
}

fn report_blocking(e: &JustifyError) {
    let JustifyError::Structure(diagnostics) = e;
    for d in diagnostics {
        println!("{d}");
    }
    style::error("structural errors block justification");
}

pub fn beats(file: &Path, phases: bool) -> Outcome {
    let s = read(file)?;
    let beats = match justification::justify(&s) {
        Ok(b) => b,
        Err(e) => {
            report_blocking(&e);
            return Ok(Status::Findings);
        }
    };
    for b in &beats {
        let mut line = format!("{}\t{}\t{}", b.index, b.perspective(), b.path.positions_text());
        if phases {
            line.push('\t');
            line.push_str(b.phase.as_str());
        }
        if let Some(k) = b.resolution_kind {
            line.push('\t');
            line.push_str(k.as_str());
        }
        println!("{line}");
    }
    Ok(Status::Ok)
}

pub fn diff(a: &Path, b: &Path) -> Outcome {
    let changes = collab::diff(&read(a)?, &read(b)?);
    print!("{}", changes.render());
    Ok(if changes.is_empty() {
        Status::Ok
    } else {
        Status::Findings
    })
}

pub fn merge(base: &Path, ours: &Path, theirs: &Path, out: &Path) -> Outcome {
    let result = collab::merge3(&read(base)?, &read(ours)?, &read(theirs)?);
    write(out, &codec::serialize(&result.merged))?;
    for c in &result.conflicts {
        println!("{c}");
    }
    if result.is_clean() {
        Ok(Status::Ok)
    } else {
        style::warning(&format!(
            "{} conflict(s); base values kept in {}",
            result.conflicts.len(),
            out.display()
        ));
        Ok(Status::Findings)
    }
}

pub fn recompile(file: &Path, at: usize, sets: &[String], out: &Path) -> Outcome {
    let s = read(file)?;
    let mut deviation = Deviation::new();
    for text in sets {
        let (path, value) = Deviation::parse_change(text).map_err(|e| Failure(e.to_string()))?;
        deviation = deviation.set(path, value);
    }
    match justification::recompile(&s, at, &deviation) {
        Ok(next) => {
            if next.assignment != s.assignment {
                style::note("perspective assignment repaired to the nearest valid configuration");
            }
            write(out, &codec::serialize(&next))?;
            Ok(Status::Ok)
        }
        Err(RecompileError::Justify(e)) => {
            report_blocking(&e);
            Ok(Status::Findings)
        }
        Err(e) => Err(Failure(e.to_string())),
    }
}

pub fn init(preset: &str, out: &Path) -> Outcome {
    let preset: Preset = preset
        .parse()
        .map_err(|e: ncp_core::presets::UnknownPreset| Failure(e.to_string()))?;
    write(out, preset.document())?;
    Ok(Status::Ok)
}

pub fn export_markdown(file: &Path) -> Outcome {
    print!("{}", codec::export_markdown(&read(file)?));
    Ok(Status::Ok)
}
