use std::io::{self, BufRead, Write};

use super::Failure;
use crate::elicitation::{
    comparison_report, Allocation, BallsAllocation, ComparisonReport, ElicitationSession,
    ExtremeJudgment, Extremes, MidpointSplit, Payload, Stage, StudyContext, DEFAULT_TOTAL_BALLS,
};

enum Halt {
    Eof,
    Io(io::Error),
}

impl From<io::Error> for Halt {
    fn from(e: io::Error) -> Self {
        Halt::Io(e)
    }
}

type Ask<T> = Result<T, Halt>;

struct Prompter<'a> {
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
}

impl Prompter<'_> {
    fn line(&mut self, prompt: &str) -> Ask<String> {
        write!(self.out, "{prompt}: ")?;
        self.out.flush()?;
        let mut buf = String::new();
        if self.input.read_line(&mut buf)? == 0 {
            writeln!(self.out)?;
            return Err(Halt::Eof);
        }
        Ok(buf.trim().to_string())
    }

    fn text(&mut self, prompt: &str) -> Ask<String> {
        loop {
            let s = self.line(prompt)?;
            if !s.is_empty() {
                return Ok(s);
            }
            writeln!(self.out, "  an answer is required")?;
        }
    }

    /// Parses a value, falling back to `default` on a blank line.
    fn parsed<T: std::str::FromStr>(&mut self, prompt: &str, default: Option<T>) -> Ask<Option<T>> {
        loop {
            let s = self.line(prompt)?;
            if s.is_empty() {
                return Ok(default);
            }
            match s.parse() {
                Ok(v) => return Ok(Some(v)),
                Err(_) => writeln!(self.out, "  `{s}` is not a valid value")?,
            }
        }
    }

    fn required<T: std::str::FromStr>(&mut self, prompt: &str) -> Ask<T> {
        loop {
            if let Some(v) = self.parsed(prompt, None)? {
                return Ok(v);
            }
            writeln!(self.out, "  an answer is required")?;
        }
    }

    fn list<T: std::str::FromStr>(&mut self, prompt: &str, len: usize) -> Ask<Option<Vec<T>>> {
        loop {
            let s = self.line(prompt)?;
            if s.is_empty() {
                return Ok(None);
            }
            let parsed: Result<Vec<T>, _> = s.split(',').map(|p| p.trim().parse()).collect();
            match parsed {
                Ok(v) if v.len() == len => return Ok(Some(v)),
                Ok(v) => writeln!(self.out, "  expected {len} values, got {}", v.len())?,
                Err(_) => writeln!(self.out, "  could not read `{s}` as a comma-separated list")?,
            }
        }
    }

    fn context(&mut self) -> Ask<Payload> {
        Ok(Payload::Context(StudyContext {
            population: self.text("Study population")?,
            sample_size_estimate: self.required("Expected number of participants")?,
            treatment: self.text("Treatment")?,
            control: self.text("Control")?,
            outcome_measure: self.text("Outcome measure")?,
            analysis_plan: self.text("Planned analysis")?,
            effect_units: self.text("Units of the effect")?,
        }))
    }

    fn judgment(&mut self, which: &str) -> Ask<ExtremeJudgment> {
        Ok(ExtremeJudgment {
            effect: self.required(&format!("{which} plausible effect for any group of units"))?,
            description: self.line("Which units are these")?,
            uncertainty: self.parsed("How far off could that value be [0]", Some(0.0))?.unwrap_or(0.0),
            tail_share: self.parsed("Share of units at or beyond it (blank to skip)", None)?,
        })
    }

    fn allocation(&mut self, session: &ElicitationSession) -> Ask<Payload> {
        let (lo, hi) = session
            .extremes()
            .map(|e| (e.smallest.effect, e.largest.effect))
            .unwrap_or((0.0, 1.0));
        loop {
            let method = self.line("Allocate with balls in bins or a midpoint split? (balls/midpoint) [balls]")?;
            match method.as_str() {
                "" | "balls" => {
                    let k: usize = self.parsed("Number of bins [5]", Some(5))?.unwrap_or(5);
                    let total: u32 = self
                        .parsed(&format!("Total balls [{DEFAULT_TOTAL_BALLS}]"), Some(DEFAULT_TOTAL_BALLS))?
                        .unwrap_or(DEFAULT_TOTAL_BALLS);
                    let equal = BallsAllocation::equal_bins(lo, hi, k.max(1), total);
                    let edges = match self.list::<f64>(
                        &format!("Bin edges, {} values (blank for {:?})", k + 1, equal.bin_edges),
                        k + 1,
                    )? {
                        Some(e) => e,
                        None => equal.bin_edges.clone(),
                    };
                    let balls = loop {
                        match self.list::<u32>(&format!("Balls per bin, {k} counts summing to {total}"), k)? {
                            Some(b) => break b,
                            None => writeln!(self.out, "  an answer is required")?,
                        }
                    };
                    return Ok(Payload::Allocation {
                        allocation: Allocation::Balls(BallsAllocation {
                            bin_edges: edges,
                            balls,
                            total_balls: total,
                        }),
                    });
                }
                "midpoint" => {
                    let lower: f64 = self.required(&format!(
                        "Share of affected units between {lo} and the midpoint {}",
                        (lo + hi) / 2.0
                    ))?;
                    return Ok(Payload::Allocation {
                        allocation: Allocation::Midpoint(MidpointSplit::new(lower, 1.0 - lower)),
                    });
                }
                other => writeln!(self.out, "  unknown method `{other}`")?,
            }
        }
    }

    fn ask(&mut self, session: &ElicitationSession) -> Ask<Payload> {
        match session.stage() {
            Stage::Context => self.context(),
            Stage::AtePre => Ok(Payload::AtePre {
                ate_pre: self.required("Your best guess of the average treatment effect")?,
            }),
            Stage::Extremes => {
                let largest = self.judgment("Largest")?;
                let smallest = self.judgment("Smallest")?;
                Ok(Payload::Extremes(Extremes { largest, smallest }))
            }
            Stage::Allocation => self.allocation(session),
            Stage::NullShare => Ok(Payload::NullShare {
                p_null: self.required("Share of units the treatment cannot affect at all (0-1)")?,
            }),
            Stage::Derived => {
                if let Ok(r) = comparison_report(session) {
                    self.show(&r)?;
                }
                Ok(Payload::Reflection {
                    text: self.line("Your reaction to the comparison")?,
                })
            }
            Stage::Compared => unreachable!("completed sessions take no input"),
        }
    }

    fn show(&mut self, r: &ComparisonReport) -> io::Result<()> {
        writeln!(self.out, "  ATE_pre    {}", r.ate_pre)?;
        writeln!(self.out, "  ATE_post   {}", r.ate_post)?;
        writeln!(self.out, "  {}", r.summary)?;
        for w in &r.warnings {
            writeln!(self.out, "  warning: {w}")?;
        }
        for p in &r.prompts {
            writeln!(self.out, "  - {p}")?;
        }
        Ok(())
    }
}

/// Asks for each remaining stage on `input`, saving after every accepted
/// step. Rejected answers are reported and asked again. Returns the session
/// as far as it got; it is short of `Compared` only when input ran out.
pub fn run_wizard<F>(
    mut session: ElicitationSession,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    mut save: F,
) -> Result<ElicitationSession, Failure>
where
    F: FnMut(&ElicitationSession) -> io::Result<()>,
{
    let mut p = Prompter { input, out };
    while session.stage() != Stage::Compared {
        let stage = session.stage();
        writeln!(p.out, "[{stage}]")?;
        let payload = match p.ask(&session) {
            Ok(payload) => payload,
            Err(Halt::Io(e)) => return Err(e.into()),
            Err(Halt::Eof) => {
                writeln!(p.out, "input ended at stage `{stage}`")?;
                return Ok(session);
            }
        };
        match session.advance(payload) {
            Ok(next) => {
                session = next;
                save(&session)?;
            }
            Err(e) => writeln!(p.out, "  rejected: {e}")?,
        }
    }
    let report = comparison_report(&session)?;
    writeln!(p.out, "[{}]", Stage::Compared)?;
    p.show(&report)?;
    if let Some(text) = &report.reflection {
        writeln!(p.out, "  reflection: {text}")?;
    }
    Ok(session)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCRIPT: &str = "\
adults
200
calls
usual care
attendance
difference in means
percentage points
0.1
0.4
keen attendees
0
0.1
0
already lost

0.2
balls
4
20

2,3,5,10
0.5
looks low
";

    #[test]
    fn scripted_walk() {
        let mut input = SCRIPT.as_bytes();
        let mut out = Vec::new();
        let mut saves = 0;
        let s = run_wizard(ElicitationSession::new("w"), &mut input, &mut out, |_| {
            saves += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(s.stage(), Stage::Compared);
        assert_eq!(saves, 6);
        // midpoints .05,.15,.25,.35 with balls 2,3,5,10 out of 20, half nulls
        let expected = 0.5 * (0.05 * 2.0 + 0.15 * 3.0 + 0.25 * 5.0 + 0.35 * 10.0) / 20.0;
        assert!((s.ate_post().unwrap() - expected).abs() < 1e-12);
        assert_eq!(s.reflection(), Some("looks low"));
    }

    #[test]
    fn bad_answers_are_asked_again() {
        let script = SCRIPT.replacen("200\n", "lots\n200\n", 1).replacen("0.5\nlooks", "1.5\n0.5\nlooks", 1);
        let mut input = script.as_bytes();
        let mut out = Vec::new();
        let s = run_wizard(ElicitationSession::new("w"), &mut input, &mut out, |_| Ok(())).unwrap();
        assert_eq!(s.stage(), Stage::Compared);
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("`lots` is not a valid value"));
        assert!(text.contains("rejected"));
    }

    #[test]
    fn eof_stops_early() {
        let mut input = "adults\n200\n".as_bytes();
        let mut out = Vec::new();
        let s = run_wizard(ElicitationSession::new("w"), &mut input, &mut out, |_| Ok(())).unwrap();
        assert_eq!(s.stage(), Stage::Context);
        assert!(String::from_utf8(out).unwrap().contains("input ended at stage `context`"));
    }
}
