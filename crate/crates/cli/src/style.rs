//! Minimal styling for messages on standard error. Disabled by `NO_COLOR`
//! or when standard error is not a terminal.

use std::io::IsTerminal;

fn enabled() -> bool {
    std::env::var_os("NO_COLOR").is_none() && std::io::stderr().is_terminal()
}

fn paint(code: &str, text: &str) -> String {
    if enabled() {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_owned()
    }
}

pub fn error(message: &str) {
    eprintln!("{}: {message}", paint("1;31", "error"));
}

pub fn warning(message: &str) {
    eprintln!("{}: {message}", paint("1;33", "warning"));
}

pub fn note(message: &str) {
    eprintln!("{}", paint("2", message));
}
