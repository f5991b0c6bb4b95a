//! `ncp`: command-line tools for Narrative Context Protocol storyforms.
//!
//! Exit status is 0 on success, 1 when validation errors or merge
//! conflicts are found (or, for `diff`, when the inputs differ), and 2 on
//! usage, parse or I/O errors. Machine-readable results go to standard
//! output as tab-separated lines; everything meant for people goes to
//! standard error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod style;

#[derive(Debug, Parser)]
#[command(name = "ncp", version, about = "Parse, validate, sequence and merge NCP storyforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a storyform and print its diagnostics.
    Validate { file: PathBuf },
    /// Print (or rewrite) a storyform in canonical form.
    Fmt {
        /// Rewrite the file in place.
        #[arg(long)]
        write: bool,
        file: PathBuf,
    },
    /// Print the justified storybeat sequence.
    Beats {
        /// Include each beat's phase.
        #[arg(long)]
        phases: bool,
        file: PathBuf,
    },
    /// Print the structural differences between two storyforms.
    Diff { a: PathBuf, b: PathBuf },
    /// Three-way merge two storyforms against a common base.
    Merge {
        base: PathBuf,
        ours: PathBuf,
        theirs: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Apply deviations and regenerate the beats after a cut point.
    Recompile {
        file: PathBuf,
        /// Number of beats already experienced.
        #[arg(long)]
        at: usize,
        /// A deviation, as PATH=VALUE. May be repeated.
        #[arg(long = "set", value_name = "PATH=VALUE")]
        set: Vec<String>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Write a preset storyform.
    Init {
        #[arg(long)]
        preset: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print a human-readable outline.
    Export {
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
        file: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Markdown,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Validate { file } => commands::validate(&file),
        Command::Fmt { write, file } => commands::fmt(&file, write),
        Command::Beats { phases, file } => commands::beats(&file, phases),
        Command::Diff { a, b } => commands::diff(&a, &b),
        Command::Merge {
            base,
            ours,
            theirs,
            out,
        } => commands::merge(&base, &ours, &theirs, &out),
        Command::Recompile { file, at, set, out } => commands::recompile(&file, at, &set, &out),
        Command::Init { preset, out } => commands::init(&preset, &out),
        Command::Export {
            format: Format::Markdown,
            file,
        } => commands::export_markdown(&file),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            style::error(&e.to_string());
            ExitCode::from(2)
        }
    }
}
