use core::ops::Index;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{vector_norm, Vector};

/// Amplitudes `(c1, c2, c3)` on `|R1>, |R2>, |R3>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QutritState(pub Vector<3>);

impl QutritState {
    pub fn new(c1: C64, c2: C64, c3: C64) -> Result<Self> {
        let s = QutritState([c1, c2, c3]);
        let n = s.norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter { name: "state norm", value: n });
        }
        Ok(s)
    }

    /// Builds a state from arbitrary amplitudes, rescaling to unit norm.
    pub fn normalized(c1: C64, c2: C64, c3: C64) -> Result<Self> {
        let n = vector_norm(&[c1, c2, c3]);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidParameter { name: "state norm", value: n });
        }
        Ok(QutritState([c1 / n, c2 / n, c3 / n]))
    }

    /// Basis state `|R_level>`, with `level` in `1..=3`.
    pub fn basis(level: usize) -> Self {
        assert!((1..=3).contains(&level), "level must be 1, 2 or 3");
        let mut amps = [C64::new(0.0, 0.0); 3];
        amps[level - 1] = C64::new(1.0, 0.0);
        QutritState(amps)
    }

    pub fn ground() -> Self {
        Self::basis(1)
    }

    pub fn amplitudes(&self) -> &Vector<3> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        vector_norm(&self.0)
    }

    pub fn populations(&self) -> [f64; 3] {
        self.0.map(|c| c.norm_sqr())
    }
}

impl Index<usize> for QutritState {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}
