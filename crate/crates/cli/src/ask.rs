//! Line-oriented elicitation loop behind `ahp ask`.

use std::io::{BufRead, Write};

use ahp_core::document::parse_ratio;
use ahp_core::elicitation::allowed_values_hint;
use ahp_core::{
    consistency_report, derive_priorities_eigen, verbal_to_value, Direction, ElicitationSession, Hierarchy,
    Intensity, SolverOptions, VerbalJudgment,
};

use crate::ops::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AskOutcome {
    Complete,
    /// The user quit or input ended with comparisons still pending.
    Stopped,
}

enum Answer {
    Value(f64),
    Quit,
}

/// `5`, `1/3`, `0.25`, `strong`, `strong second`, `very-strong first`.
fn parse_answer(line: &str) -> Result<Answer, String> {
    let line = line.trim();
    if matches!(line, "q" | "quit" | "exit") {
        return Ok(Answer::Quit);
    }
    if let Ok(v) = parse_ratio(line) {
        return Ok(Answer::Value(v));
    }
    let mut words = line.split_whitespace();
    let intensity: Intensity = words.next().unwrap_or("").parse()?;
    let direction = match words.next() {
        None | Some("first") => Direction::FirstOverSecond,
        Some("second") => Direction::SecondOverFirst,
        Some(w) => return Err(format!("expected `first` or `second` after the intensity, got `{w}`")),
    };
    if let Some(extra) = words.next() {
        return Err(format!("unexpected `{extra}`"));
    }
    Ok(Answer::Value(verbal_to_value(VerbalJudgment::new(intensity, direction))))
}

struct Prompt<'a, R: ?Sized, W: ?Sized> {
    h: &'a Hierarchy,
    input: &'a mut R,
    out: &'a mut W,
}

impl<R: BufRead + ?Sized, W: Write + ?Sized> Prompt<'_, R, W> {
    fn label(&self, id: &str) -> String {
        self.h.node(id).map_or_else(|| id.to_string(), |n| n.label.clone())
    }

    fn read_line(&mut self) -> Result<Option<String>, Failure> {
        self.out.flush()?;
        let mut line = String::new();
        if self.input.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        Ok(Some(line))
    }

    /// Asks one comparison until a valid answer is recorded. `false` means stop.
    fn ask_pair(&mut self, s: &mut ElicitationSession, node: &str, pair: (usize, usize)) -> Result<bool, Failure> {
        let q = s.question(self.h, node, pair)?;
        loop {
            writeln!(self.out, "[{}] {}", self.label(node), q.text)?;
            write!(self.out, "> ")?;
            let Some(line) = self.read_line()? else { return Ok(false) };
            if line.trim().is_empty() {
                continue;
            }
            match parse_answer(&line) {
                Ok(Answer::Quit) => return Ok(false),
                Ok(Answer::Value(v)) => match s.record_judgment(node, pair, v) {
                    Ok(()) => return Ok(true),
                    Err(e) => writeln!(self.out, "  {e}")?,
                },
                Err(e) => writeln!(self.out, "  {e}; allowed values are {}", allowed_values_hint())?,
            }
        }
    }

    /// Reports consistency of a completed node and offers the worst judgment
    /// for revision until the node is acceptable or the user declines.
    fn review(&mut self, s: &mut ElicitationSession, node: &str, opts: &SolverOptions) -> Result<bool, Failure> {
        loop {
            let m = s.matrix(node)?;
            let pv = derive_priorities_eigen(&m, opts)?;
            let r = consistency_report(&m, &pv)?;
            let verdict = if r.consistent { "consistent" } else { "inconsistent" };
            writeln!(self.out, "  {} done: CR = {:.3} ({verdict})", self.label(node), r.cr)?;
            let (false, Some(w)) = (r.consistent, r.worst_judgment) else { return Ok(true) };
            let items = m.item_ids();
            writeln!(
                self.out,
                "  Most inconsistent: {} vs {} (entered {:.3}, weights imply {:.3}). Revise it? [y/N]",
                self.label(&items[w.row]),
                self.label(&items[w.col]),
                m.get(w.row, w.col),
                w.implied
            )?;
            write!(self.out, "> ")?;
            let Some(line) = self.read_line()? else { return Ok(false) };
            if !matches!(line.trim(), "y" | "Y" | "yes") {
                return Ok(true);
            }
            if !self.ask_pair(s, node, (w.row, w.col))? {
                return Ok(false);
            }
        }
    }
}

/// Asks every pending comparison in schedule order, reviewing each node as it
/// completes.
pub fn run_ask<R: BufRead + ?Sized, W: Write + ?Sized>(
    h: &Hierarchy,
    s: &mut ElicitationSession,
    opts: &SolverOptions,
    input: &mut R,
    out: &mut W,
) -> Result<AskOutcome, Failure> {
    let mut p = Prompt { h, input, out };
    writeln!(
        p.out,
        "Answer with a ratio (5, 1/3), or an intensity word (equal, weak, strong, very_strong, absolute) \
         followed by `second` when the second item is the more important. `quit` saves and stops."
    )?;
    while let Some((node, pair)) = s.pending().into_iter().next() {
        if !p.ask_pair(s, &node, pair)? {
            return Ok(AskOutcome::Stopped);
        }
        if s.judgment_set(&node)?.is_complete() && !p.review(s, &node, opts)? {
            return Ok(AskOutcome::Stopped);
        }
    }
    writeln!(p.out, "All comparisons answered.")?;
    Ok(AskOutcome::Complete)
}
