use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Upper bound on the complete write/control/read-out sequence, in seconds.
pub const CANONICAL_BOUND_S: f64 = 1.8e-6;

/// Which microwave field a drive segment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    /// Couples `|R1> <-> |R2>`.
    Mu1,
    /// Couples `|R2> <-> |R3>`.
    Mu2,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Mu1 => "mu1",
            Field::Mu2 => "mu2",
        }
    }

    /// Index of the lower level of the driven transition.
    pub(crate) fn lower_level(self) -> usize {
        match self {
            Field::Mu1 => 0,
            Field::Mu2 => 1,
        }
    }
}

/// One square microwave pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSegment {
    pub field: Field,
    /// Rabi frequency, rad/s.
    pub rabi: f64,
    /// Detuning, rad/s. Positive is blue detuning of the drive.
    pub detuning: f64,
    /// Drive phase, rad.
    pub phase: f64,
    /// Duration, s.
    pub duration: f64,
}

impl DriveSegment {
    pub fn new(field: Field, rabi: f64, detuning: f64, phase: f64, duration: f64) -> Result<Self> {
        let seg = DriveSegment { field, rabi, detuning, phase, duration };
        seg.validate()?;
        Ok(seg)
    }

    /// Resonant pulse with zero phase.
    pub fn resonant(field: Field, rabi: f64, duration: f64) -> Result<Self> {
        Self::new(field, rabi, 0.0, 0.0, duration)
    }

    /// Resonant pulse of the given area (`rabi * duration`, rad).
    pub fn with_area(field: Field, area: f64, duration: f64) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(Error::InvalidParameter { name: "duration", value: duration });
        }
        Self::new(field, area / duration, 0.0, 0.0, duration)
    }

    pub fn area(&self) -> f64 {
        self.rabi * self.duration
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi.is_finite() && self.rabi >= 0.0) {
            return Err(Error::InvalidParameter { name: "rabi", value: self.rabi });
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidParameter { name: "detuning", value: self.detuning });
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidParameter { name: "phase", value: self.phase });
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidParameter { name: "duration", value: self.duration });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Drive(DriveSegment),
    /// Free evolution for the given number of seconds.
    Wait(f64),
    /// Retrieval of the `|R1>` population into time bin 1, 2 or 3.
    Readout(u8),
}

impl Segment {
    /// Duration in seconds. Read-out windows are treated as instantaneous.
    pub fn duration(&self) -> f64 {
        match self {
            Segment::Drive(d) => d.duration,
            Segment::Wait(t) => *t,
            Segment::Readout(_) => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Segment::Drive(d) => d.validate(),
            Segment::Wait(t) if !(t.is_finite() && *t > 0.0) => {
                Err(Error::InvalidParameter { name: "wait duration", value: *t })
            }
            Segment::Wait(_) => Ok(()),
            Segment::Readout(bin) if !(1..=3).contains(bin) => Err(Error::ReadoutBin(*bin)),
            Segment::Readout(_) => Ok(()),
        }
    }
}

impl From<DriveSegment> for Segment {
    fn from(d: DriveSegment) -> Self {
        Segment::Drive(d)
    }
}

/// Ordered list of segments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSequence {
    pub label: String,
    pub segments: Vec<Segment>,
}

impl PulseSequence {
    pub fn new(label: impl Into<String>, segments: Vec<Segment>) -> Result<Self> {
        let seq = PulseSequence { label: label.into(), segments };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        let mut last_bin = 0u8;
        for seg in &self.segments {
            seg.validate()?;
            if let Segment::Readout(bin) = *seg {
                if bin <= last_bin {
                    return Err(Error::ReadoutOrder { previous: last_bin, bin });
                }
                last_bin = bin;
            }
        }
        Ok(())
    }

    pub fn push(&mut self, seg: impl Into<Segment>) {
        self.segments.push(seg.into());
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    /// True when the whole sequence fits in [`CANONICAL_BOUND_S`].
    pub fn within_canonical_bound(&self) -> bool {
        self.total_duration() < CANONICAL_BOUND_S
    }

    pub fn has_readout(&self) -> bool {
        self.segments.iter().any(|s| matches!(s, Segment::Readout(_)))
    }

    /// Splits into the control part (everything before the first read-out)
    /// and the read-out part.
    pub fn split_at_readout(&self) -> (&[Segment], &[Segment]) {
        let idx = self.segments.iter().position(|s| matches!(s, Segment::Readout(_))).unwrap_or(self.segments.len());
        self.segments.split_at(idx)
    }

    /// Concatenation `self || other`.
    pub fn concat(&self, other: &PulseSequence) -> PulseSequence {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        PulseSequence { label: self.label.clone(), segments }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    #[test]
    fn rejects_bad_drive_parameters() {
        assert!(DriveSegment::new(Field::Mu1, -1.0, 0.0, 0.0, 1e-9).is_err());
        assert!(DriveSegment::new(Field::Mu1, 1.0, f64::NAN, 0.0, 1e-9).is_err());
        assert!(DriveSegment::new(Field::Mu1, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(DriveSegment::new(Field::Mu1, 1.0, 0.0, 0.0, -1e-9).is_err());
    }

    #[test]
    fn readout_bins_must_increase() {
        let err = PulseSequence::new("x", vec![Segment::Readout(2), Segment::Readout(1)]);
        assert_eq!(err, Err(Error::ReadoutOrder { previous: 2, bin: 1 }));
        let dup = PulseSequence::new("x", vec![Segment::Readout(1), Segment::Readout(1)]);
        assert!(dup.is_err());
        assert!(PulseSequence::new("x", vec![Segment::Readout(4)]).is_err());
    }

    #[test]
    fn total_duration_sums_segments() {
        let p = DriveSegment::with_area(Field::Mu1, PI / 2.0, 20e-9).unwrap();
        let seq =
            PulseSequence::new("ramsey", vec![p.into(), Segment::Wait(250e-9), p.into(), Segment::Readout(1)]).unwrap();
        assert!((seq.total_duration() - 290e-9).abs() < 1e-20);
        assert!(seq.within_canonical_bound());
        let (control, readout) = seq.split_at_readout();
        assert_eq!(control.len(), 3);
        assert_eq!(readout.len(), 1);
    }
}
