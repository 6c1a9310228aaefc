//! Per-step trace rows and their CSV form: `step,total_unhappy,mover,from,to`.

use std::fmt;
use std::io::Write;

use crate::model::AgentType;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraceOptions {
    pub record_total_unhappy_per_step: bool,
    pub record_moves: bool,
}

impl TraceOptions {
    pub fn all() -> Self {
        TraceOptions {
            record_total_unhappy_per_step: true,
            record_moves: true,
        }
    }

    pub fn enabled(&self) -> bool {
        self.record_total_unhappy_per_step || self.record_moves
    }
}

/// Who moved. Clique agents in the count-first engine have no identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mover {
    Agent(usize),
    Clique(AgentType),
    Path(AgentType),
}

impl fmt::Display for Mover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mover::Agent(i) => write!(f, "{i}"),
            Mover::Clique(AgentType::A) => f.write_str("clique-A"),
            Mover::Clique(AgentType::B) => f.write_str("clique-B"),
            Mover::Path(AgentType::A) => f.write_str("path-A"),
            Mover::Path(AgentType::B) => f.write_str("path-B"),
        }
    }
}

/// A move endpoint: a concrete vertex, or an interchangeable clique site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Vertex(usize),
    Clique,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Vertex(v) => write!(f, "{v}"),
            Site::Clique => f.write_str("clique"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveRecord {
    pub mover: Mover,
    pub from: Site,
    pub to: Site,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub step: u64,
    pub total_unhappy: Option<u64>,
    pub movement: Option<MoveRecord>,
}

impl TraceRow {
    pub(crate) fn new(options: &TraceOptions, step: u64, total_unhappy: u64, movement: Option<MoveRecord>) -> Self {
        TraceRow {
            step,
            total_unhappy: options.record_total_unhappy_per_step.then_some(total_unhappy),
            movement: if options.record_moves { movement } else { None },
        }
    }
}

pub const TRACE_HEADER: &str = "step,total_unhappy,mover,from,to";

pub fn write_trace_csv<W: Write>(mut out: W, rows: &[TraceRow]) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for row in rows {
        let unhappy = row.total_unhappy.map(|u| u.to_string()).unwrap_or_default();
        match row.movement {
            Some(m) => writeln!(out, "{},{},{},{},{}", row.step, unhappy, m.mover, m.from, m.to)?,
            None => writeln!(out, "{},{},,,", row.step, unhappy)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = vec![
            TraceRow {
                step: 0,
                total_unhappy: Some(2),
                movement: Some(MoveRecord {
                    mover: Mover::Clique(AgentType::B),
                    from: Site::Clique,
                    to: Site::Vertex(7),
                }),
            },
            TraceRow {
                step: 1,
                total_unhappy: Some(0),
                movement: None,
            },
        ];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,total_unhappy,mover,from,to\n0,2,clique-B,clique,7\n1,0,,,\n"
        );
    }
}
