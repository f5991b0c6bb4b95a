//! Human-readable outline of a storyform.

use std::fmt::Write;

use crate::model::{Perspective, Storyform, StorypointNode};

/// Renders a deterministic Markdown outline: title, dynamics table, one
/// section per perspective, then beats and annotations when present.
pub fn export_markdown(s: &Storyform) -> String {
    let mut out = String::new();
    let _ = render(s, &mut out);
    out
}

fn render(s: &Storyform, out: &mut String) -> std::fmt::Result {
    writeln!(out, "# {}", one_line(&s.title))?;
    writeln!(out)?;
    writeln!(out, "NCP version {}", s.version)?;
    writeln!(out)?;

    let d = &s.dynamics;
    writeln!(out, "## Dynamics")?;
    writeln!(out)?;
    writeln!(out, "| Dynamic | Value |")?;
    writeln!(out, "| --- | --- |")?;
    writeln!(out, "| Resolve | {} |", d.resolve.label())?;
    writeln!(out, "| Outcome | {} |", d.outcome.label())?;
    writeln!(out, "| Judgment | {} |", d.judgment.label())?;
    writeln!(out, "| Narrative Alignment | {} |", d.alignment.label())?;
    if let Some(a) = &d.attunement {
        writeln!(out, "| Attunement | {} |", one_line(a).replace('|', "\\|"))?;
    }

    for &p in Perspective::ALL {
        writeln!(out)?;
        let form = s.assignment.form(p).map_or("unassigned", |f| f.label());
        writeln!(out, "## {} ({}): {}", p.label(), p.as_str().to_uppercase(), form)?;
        writeln!(out)?;
        match s.storypoints.get(&p) {
            Some(root) => render_node(root, None, 0, out)?,
            None => writeln!(out, "_No storypoints._")?,
        }
    }

    if let Some(beats) = &s.beats {
        let mut ordered: Vec<_> = beats.iter().collect();
        ordered.sort_by_key(|b| b.index);
        writeln!(out)?;
        writeln!(out, "## Storybeats")?;
        writeln!(out)?;
        for b in ordered {
            let term = s.storypoint(&b.path).map(|n| one_line(&n.term));
            write!(
                out,
                "- {}. {} `{}`",
                b.index,
                b.perspective().label(),
                b.path.positions_text()
            )?;
            if let Some(t) = term {
                write!(out, " **{t}**")?;
            }
            write!(out, ": {}", b.phase.label())?;
            if let Some(k) = b.resolution_kind {
                write!(out, " ({})", k.label())?;
            }
            if let Some(st) = &b.storytelling {
                write!(out, ". {}", one_line(st))?;
            }
            writeln!(out)?;
        }
    }

    if !s.annotations.is_empty() {
        writeln!(out)?;
        writeln!(out, "## Annotations")?;
        writeln!(out)?;
        for (path, note) in &s.annotations {
            writeln!(out, "- `{}`: {}", path, one_line(note))?;
        }
    }
    Ok(())
}

fn render_node(node: &StorypointNode, label: Option<&str>, depth: usize, out: &mut String) -> std::fmt::Result {
    let indent = "  ".repeat(depth);
    write!(out, "{indent}- ")?;
    if let Some(l) = label {
        write!(out, "{l}: ")?;
    }
    write!(out, "**{}**", one_line(&node.term))?;
    if let Some(st) = &node.storytelling {
        write!(out, " ({})", one_line(st))?;
    }
    writeln!(out)?;
    if let Some(q) = &node.quad {
        for (pos, child) in q.iter() {
            render_node(child, Some(pos.label()), depth + 1, out)?;
        }
    }
    Ok(())
}

/// Collapses line breaks so free text cannot break the outline structure.
fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
