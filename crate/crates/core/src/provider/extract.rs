use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractionMethod {
    FencedBlock,
    DirectiveHeuristic,
    WholeResponse,
}

impl ExtractionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtractionMethod::FencedBlock => "fenced-block",
            ExtractionMethod::DirectiveHeuristic => "directive-heuristic",
            ExtractionMethod::WholeResponse => "whole-response",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsmArtifact {
    pub assembly_text: String,
    pub extraction_method: ExtractionMethod,
    pub fence_language_hint: Option<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("response is empty")]
    EmptyResponse,
}

const ASM_HINTS: [&str; 6] = ["asm", "s", "assembly", "gas", "nasm", ""];

struct Fence<'a> {
    hint: String,
    body: Vec<&'a str>,
}

fn fence_open(line: &str) -> Option<&str> {
    let t = line.trim_start();
    (line.len() - t.len() <= 3).then_some(())?;
    t.strip_prefix("```")
}

fn fences(text: &str) -> Vec<Fence<'_>> {
    let mut out = Vec::new();
    let mut current: Option<Fence> = None;
    for line in text.lines() {
        match (&mut current, fence_open(line)) {
            (None, Some(info)) => {
                let hint = info.split_whitespace().next().unwrap_or("").trim_start_matches('{').to_ascii_lowercase();
                current = Some(Fence { hint, body: Vec::new() });
            }
            (Some(_), Some(rest)) if rest.trim().is_empty() => out.push(current.take().unwrap()),
            (Some(f), _) => f.body.push(line),
            (None, None) => {}
        }
    }
    // An unterminated fence still counts; truncated responses are common.
    out.extend(current);
    out
}

fn strip_comment(line: &str) -> &str {
    let mut end = line.len();
    for pat in ["//", "# ", "#\t", "/*"] {
        if let Some(i) = line.find(pat) {
            end = end.min(i);
        }
    }
    if line.trim_end().ends_with('#') {
        end = end.min(line.trim_end().len() - 1);
    }
    &line[..end]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineKind {
    Blank,
    Directive,
    Label,
    Code,
    Prose,
    Fence,
}

fn classify(line: &str) -> LineKind {
    static LABEL: OnceLock<Regex> = OnceLock::new();
    let label = LABEL.get_or_init(|| Regex::new(r"^[A-Za-z_.$][A-Za-z0-9_.$]*:").unwrap());
    if fence_open(line).is_some() {
        return LineKind::Fence;
    }
    let t = line.trim();
    if t.is_empty() {
        return LineKind::Blank;
    }
    let code = strip_comment(t).trim();
    if code.is_empty() {
        // Comment-only lines travel with the surrounding code.
        return LineKind::Blank;
    }
    if code.starts_with('.') && code[1..].starts_with(|c: char| c.is_ascii_alphabetic()) {
        return LineKind::Directive;
    }
    // Three or more plain words make a sentence; `loop: addi t0, t0, 1` is
    // a label, "Note: this uses the stack" is not.
    let words = code.split_whitespace().filter(|w| is_word(w)).count();
    if words >= 3 {
        LineKind::Prose
    } else if label.is_match(code) {
        LineKind::Label
    } else {
        LineKind::Code
    }
}

/// A plain word: letters only, optionally followed by sentence punctuation.
/// A trailing comma marks an operand (`add sp, sp, #16`), not a word.
fn is_word(w: &str) -> bool {
    if w.ends_with(',') {
        return false;
    }
    let core = w.trim_end_matches(['.', ';', ':', '!', '?', ')']).trim_start_matches('(');
    !core.is_empty() && core.chars().all(|c| c.is_alphabetic() || c == '\'')
}

fn directive_region(text: &str) -> Option<String> {
    let lines: Vec<&str> = text.lines().collect();
    let kinds: Vec<LineKind> = lines.iter().map(|l| classify(l)).collect();
    let mut best: Option<(usize, usize, usize)> = None; // (start, end, weight)
    let mut i = 0;
    while i < lines.len() {
        if matches!(kinds[i], LineKind::Prose | LineKind::Fence) {
            i += 1;
            continue;
        }
        let start = i;
        while i < lines.len() && !matches!(kinds[i], LineKind::Prose | LineKind::Fence) {
            i += 1;
        }
        let run = &kinds[start..i];
        let anchored = run.iter().any(|k| matches!(k, LineKind::Directive | LineKind::Label));
        let weight = run.iter().filter(|k| **k != LineKind::Blank).count();
        if anchored && best.is_none_or(|(_, _, w)| weight > w) {
            best = Some((start, i, weight));
        }
    }
    let (mut s, mut e, _) = best?;
    while s < e && lines[s].trim().is_empty() {
        s += 1;
    }
    while e > s && lines[e - 1].trim().is_empty() {
        e -= 1;
    }
    let mut out = lines[s..e].join("\n");
    out.push('\n');
    Some(out)
}

/// Pulls the assembly listing out of a model response.
///
/// Preference order: the first non-empty fenced block whose language hint
/// is assembly-like (`asm`, `s`, `assembly`, `gas`, `nasm` or none); else the
/// largest contiguous run of non-prose lines containing a directive or
/// label; else the whole response.
pub fn extract_assembly(raw_text: &str) -> Result<AsmArtifact, ExtractError> {
    if raw_text.trim().is_empty() {
        return Err(ExtractError::EmptyResponse);
    }
    for f in fences(raw_text) {
        if ASM_HINTS.contains(&f.hint.as_str()) && f.body.iter().any(|l| !l.trim().is_empty()) {
            let mut text = f.body.join("\n");
            text.push('\n');
            return Ok(AsmArtifact {
                assembly_text: text,
                extraction_method: ExtractionMethod::FencedBlock,
                fence_language_hint: Some(f.hint),
            });
        }
    }
    if let Some(text) = directive_region(raw_text) {
        return Ok(AsmArtifact {
            assembly_text: text,
            extraction_method: ExtractionMethod::DirectiveHeuristic,
            fence_language_hint: None,
        });
    }
    Ok(AsmArtifact {
        assembly_text: raw_text.to_string(),
        extraction_method: ExtractionMethod::WholeResponse,
        fence_language_hint: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_asm_fence() {
        let r = "Here you go:\n```asm\n\t.globl kernel\nkernel:\n\tret\n```\nDone.";
        let a = extract_assembly(r).unwrap();
        assert_eq!(a.extraction_method, ExtractionMethod::FencedBlock);
        assert_eq!(a.fence_language_hint.as_deref(), Some("asm"));
        assert_eq!(a.assembly_text, "\t.globl kernel\nkernel:\n\tret\n");
    }

    #[test]
    fn first_assembly_like_fence_wins() {
        let r = "```c\nint x;\n```\n```\nfirst:\n```\n```x86asm\nsecond:\n```\n```s\nthird:\n```";
        let a = extract_assembly(r).unwrap();
        assert_eq!(a.assembly_text, "first:\n");
        assert_eq!(a.fence_language_hint.as_deref(), Some(""));
    }

    #[test]
    fn hint_is_case_insensitive_and_empty_blocks_skipped() {
        let r = "```ASM\n\n```\n```GAS\n\tnop\n```";
        let a = extract_assembly(r).unwrap();
        assert_eq!(a.assembly_text, "\tnop\n");
        assert_eq!(a.fence_language_hint.as_deref(), Some("gas"));
    }

    #[test]
    fn unfenced_listing_after_prose() {
        let r = "Sure, here is the assembly for the saxpy kernel on x86-64.\n\
                 It follows the System V calling convention closely.\n\n\
                 \t.text\n\t.globl saxpy\n\t.type saxpy, @function\nsaxpy:\n\
                 \ttestl %edi, %edi   # n <= 0?\n\tjle .Ldone\n.Ldone:\n\tret\n\n\
                 Let me know if you need anything else.";
        let a = extract_assembly(r).unwrap();
        assert_eq!(a.extraction_method, ExtractionMethod::DirectiveHeuristic);
        assert!(a.assembly_text.starts_with("\t.text\n"));
        assert!(a.assembly_text.ends_with("\tret\n"));
        assert!(!a.assembly_text.contains("Sure"));
        assert!(!a.assembly_text.contains("Let me know"));
    }

    #[test]
    fn prose_only_is_whole_response() {
        let r = "I am unable to produce assembly for this request.";
        let a = extract_assembly(r).unwrap();
        assert_eq!(a.extraction_method, ExtractionMethod::WholeResponse);
        assert_eq!(a.assembly_text, r);
    }

    #[test]
    fn blank_is_empty_response() {
        assert_eq!(extract_assembly(" \n\t\r\n"), Err(ExtractError::EmptyResponse));
    }

    #[test]
    fn line_classes() {
        assert_eq!(classify("\t.globl main"), LineKind::Directive);
        assert_eq!(classify("saxpy:"), LineKind::Label);
        assert_eq!(classify(".L3:"), LineKind::Directive);
        assert_eq!(classify("\taddi sp, sp, -16  # make room for the frame"), LineKind::Code);
        assert_eq!(classify("\tmov x0, #0"), LineKind::Code);
        assert_eq!(classify("\tadd sp, sp, #16"), LineKind::Code);
        assert_eq!(classify("\tmv s0, sp"), LineKind::Code);
        assert_eq!(classify("This is the kernel you asked for."), LineKind::Prose);
        assert_eq!(classify("Note: this uses the stack"), LineKind::Prose);
    }

    proptest! {
        #[test]
        fn total_and_pure(s in "\\PC{0,400}") {
            let a = extract_assembly(&s);
            prop_assert_eq!(a.clone(), extract_assembly(&s));
            match a {
                Ok(art) => prop_assert!(!art.assembly_text.trim().is_empty()),
                Err(ExtractError::EmptyResponse) => prop_assert!(s.trim().is_empty()),
            }
        }
    }
}
