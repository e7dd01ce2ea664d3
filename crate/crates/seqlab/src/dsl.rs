//! Line-oriented pulse-sequence language.
//!
//! ```text
//! # Ramsey sequence with time-bin read-out
//! pulse mu1 area=0.5pi duration=20ns
//! pulse mu2 rabi=4MHz duration=250ns
//! wait 30ns
//! pulse mu1 area=0.5pi phase=0.25pi duration=20ns
//! readout bin=1
//! ```
//!
//! A pulse takes either `rabi=` or `area=` plus a `duration=`; `detuning=`
//! and `phase=` default to zero. `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use qutrit_core::qcore::{DriveSegment, Field, PulseSequence, Segment};

use crate::units::{self, Kind};

/// Sequence text plus the name used in diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSource {
    pub name: String,
    pub text: String,
}

impl SequenceSource {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        SequenceSource { name: name.into(), text: text.into() }
    }

    pub fn from_path(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(SequenceSource::new(path.display().to_string(), text))
    }

    /// File stem, used as the sequence label.
    fn label(&self) -> &str {
        Path::new(&self.name).file_stem().and_then(|s| s.to_str()).unwrap_or(&self.name)
    }
}

/// Position of a diagnostic, 1-based, columns in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("{file}:{}:{}: expected {expected}, found `{found}`", span.line, span.column)]
    Syntax { file: String, span: Span, expected: String, found: String },
    #[error("{file}:{}:{}: error[{}]: {kind}", span.line, span.column, kind.code())]
    Semantic { file: String, span: Span, kind: SemanticError },
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { span, .. } | ParseError::Semantic { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SemanticError {
    #[error("`area=` needs a `duration=` to derive the Rabi frequency")]
    AreaWithoutDuration,
    #[error("pulse has no `duration=`")]
    MissingDuration,
    #[error("pulse needs `rabi=` or `area=`")]
    MissingStrength,
    #[error("pulse gives both `rabi=` and `area=`")]
    ConflictingStrength,
    #[error("`{0}=` given twice")]
    DuplicateKey(String),
    #[error("read-out bin {0} appears twice")]
    DuplicateBin(u8),
    #[error("read-out bin {bin} follows bin {previous}; bins must increase")]
    BinOrder { previous: u8, bin: u8 },
    #[error("duration must be positive")]
    NonPositiveDuration,
    #[error("{0}")]
    InvalidValue(qutrit_core::Error),
}

impl SemanticError {
    pub fn code(&self) -> &'static str {
        match self {
            SemanticError::AreaWithoutDuration => "E100",
            SemanticError::MissingDuration => "E101",
            SemanticError::MissingStrength => "E102",
            SemanticError::ConflictingStrength => "E103",
            SemanticError::DuplicateKey(_) => "E104",
            SemanticError::DuplicateBin(_) => "E105",
            SemanticError::BinOrder { .. } => "E106",
            SemanticError::NonPositiveDuration => "E107",
            SemanticError::InvalidValue(_) => "E108",
        }
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (true, Some((b, c))) => {
                tokens.push(Token { text: &line[b..byte], column: c + 1 });
                start = None;
            }
            (false, None) => start = Some((byte, col)),
            _ => {}
        }
    }
    if let Some((b, c)) = start {
        tokens.push(Token { text: &line[b..], column: c + 1 });
    }
    tokens
}

struct LineParser<'s> {
    file: &'s str,
    line: usize,
    end_column: usize,
}

impl LineParser<'_> {
    fn syntax(&self, column: usize, expected: impl Into<String>, found: &str) -> ParseError {
        ParseError::Syntax {
            file: self.file.to_string(),
            span: Span { line: self.line, column },
            expected: expected.into(),
            found: found.to_string(),
        }
    }

    fn semantic(&self, column: usize, kind: SemanticError) -> ParseError {
        ParseError::Semantic { file: self.file.to_string(), span: Span { line: self.line, column }, kind }
    }

    fn end_of_line(&self, expected: &str) -> ParseError {
        self.syntax(self.end_column, expected, "end of line")
    }

    fn quantity(&self, tok: &Token, text: &str, offset: usize, kind: Kind) -> Result<f64, ParseError> {
        units::parse(text, kind).ok_or_else(|| self.syntax(tok.column + offset, kind.describe(), text))
    }

    fn statement(&self, tokens: &[Token], last_bin: &mut u8) -> Result<Segment, ParseError> {
        let head = &tokens[0];
        match head.text {
            "pulse" => self.pulse(tokens),
            "wait" => {
                let Some(tok) = tokens.get(1) else {
                    return Err(self.end_of_line(Kind::Time.describe()));
                };
                let t = self.quantity(tok, tok.text, 0, Kind::Time)?;
                self.no_more(&tokens[2..])?;
                if t <= 0.0 {
                    return Err(self.semantic(tok.column, SemanticError::NonPositiveDuration));
                }
                Ok(Segment::Wait(t))
            }
            "readout" => {
                let expected = "`bin=1`, `bin=2` or `bin=3`";
                let Some(tok) = tokens.get(1) else {
                    return Err(self.end_of_line(expected));
                };
                let bin = match tok.text {
                    "bin=1" => 1,
                    "bin=2" => 2,
                    "bin=3" => 3,
                    other => return Err(self.syntax(tok.column, expected, other)),
                };
                self.no_more(&tokens[2..])?;
                if bin == *last_bin {
                    return Err(self.semantic(tok.column, SemanticError::DuplicateBin(bin)));
                }
                if bin < *last_bin {
                    return Err(self.semantic(tok.column, SemanticError::BinOrder { previous: *last_bin, bin }));
                }
                *last_bin = bin;
                Ok(Segment::Readout(bin))
            }
            other => Err(self.syntax(head.column, "`pulse`, `wait` or `readout`", other)),
        }
    }

    fn no_more(&self, rest: &[Token]) -> Result<(), ParseError> {
        match rest.first() {
            Some(tok) => Err(self.syntax(tok.column, "end of line", tok.text)),
            None => Ok(()),
        }
    }

    fn pulse(&self, tokens: &[Token]) -> Result<Segment, ParseError> {
        let expected_field = "field `mu1` or `mu2`";
        let Some(field_tok) = tokens.get(1) else {
            return Err(self.end_of_line(expected_field));
        };
        let field = match field_tok.text {
            "mu1" => Field::Mu1,
            "mu2" => Field::Mu2,
            other => return Err(self.syntax(field_tok.column, expected_field, other)),
        };

        let mut rabi = None;
        let mut area = None;
        let mut detuning = None;
        let mut phase = None;
        let mut duration: Option<(f64, usize)> = None;
        for tok in &tokens[2..] {
            let Some((key, value)) = tok.text.split_once('=') else {
                return Err(self.syntax(tok.column, "`key=value`", tok.text));
            };
            let offset = key.chars().count() + 1;
            let (slot, kind): (&mut Option<(f64, usize)>, Kind) = match key {
                "rabi" => (&mut rabi, Kind::Frequency),
                "area" => (&mut area, Kind::Angle),
                "detuning" => (&mut detuning, Kind::Frequency),
                "phase" => (&mut phase, Kind::Angle),
                "duration" => (&mut duration, Kind::Time),
                other => {
                    return Err(self.syntax(
                        tok.column,
                        "one of `rabi`, `area`, `detuning`, `phase`, `duration`",
                        other,
                    ))
                }
            };
            if slot.is_some() {
                return Err(self.semantic(tok.column, SemanticError::DuplicateKey(key.to_string())));
            }
            *slot = Some((self.quantity(tok, value, offset, kind)?, tok.column + offset));
        }

        let (duration, duration_col) = match (duration, area) {
            (Some(d), _) => d,
            (None, Some(_)) => return Err(self.semantic(field_tok.column, SemanticError::AreaWithoutDuration)),
            (None, None) => return Err(self.semantic(field_tok.column, SemanticError::MissingDuration)),
        };
        if duration <= 0.0 {
            return Err(self.semantic(duration_col, SemanticError::NonPositiveDuration));
        }
        let rabi = match (rabi, area) {
            (Some(_), Some((_, col))) => return Err(self.semantic(col, SemanticError::ConflictingStrength)),
            (Some((w, _)), None) => w,
            (None, Some((a, _))) => a / duration,
            (None, None) => return Err(self.semantic(field_tok.column, SemanticError::MissingStrength)),
        };
        let value = |slot: Option<(f64, usize)>| slot.map_or(0.0, |(v, _)| v);
        DriveSegment::new(field, rabi, value(detuning), value(phase), duration)
            .map(Segment::Drive)
            .map_err(|e| self.semantic(field_tok.column, SemanticError::InvalidValue(e)))
    }
}

/// Parses a sequence; segments come out in file order, in rad/s and s.
pub fn parse_sequence(src: &SequenceSource) -> Result<PulseSequence, ParseError> {
    let mut segments = Vec::new();
    let mut last_bin = 0u8;
    for (index, raw) in src.text.lines().enumerate() {
        let code = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(code);
        if tokens.is_empty() {
            continue;
        }
        let parser = LineParser { file: &src.name, line: index + 1, end_column: code.trim_end().chars().count() + 1 };
        segments.push(parser.statement(&tokens, &mut last_bin)?);
    }
    PulseSequence::new(src.label(), segments).map_err(|e| ParseError::Semantic {
        file: src.name.clone(),
        span: Span { line: 1, column: 1 },
        kind: SemanticError::InvalidValue(e),
    })
}

/// Canonical text of a sequence: pulses in `rabi=` form, zero detuning
/// and phase omitted. Parsing the output gives back the same segments.
pub fn print_sequence(seq: &PulseSequence) -> String {
    let mut out = String::new();
    for seg in &seq.segments {
        match seg {
            Segment::Drive(d) => {
                let _ = write!(out, "pulse {} rabi={}", d.field.name(), units::format(d.rabi, Kind::Frequency));
                if d.detuning != 0.0 {
                    let _ = write!(out, " detuning={}", units::format(d.detuning, Kind::Frequency));
                }
                if d.phase != 0.0 {
                    let _ = write!(out, " phase={}", units::format(d.phase, Kind::Angle));
                }
                let _ = writeln!(out, " duration={}", units::format(d.duration, Kind::Time));
            }
            Segment::Wait(t) => {
                let _ = writeln!(out, "wait {}", units::format(*t, Kind::Time));
            }
            Segment::Readout(bin) => {
                let _ = writeln!(out, "readout bin={bin}");
            }
        }
    }
    out
}
