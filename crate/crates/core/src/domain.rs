//! Spatial intervals with sampling helpers.

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("invalid interval [{lo}, {hi}]: bounds must be finite with lo < hi")]
    InvalidBounds { lo: f64, hi: f64 },
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, DomainError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(DomainError::InvalidBounds { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `n` equally spaced points including both endpoints (`n >= 2`).
    pub fn uniform_samples(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "need at least two sample points");
        let h = self.length() / (n - 1) as f64;
        (0..n).map(|i| self.lo + i as f64 * h).collect()
    }

    /// `n` Chebyshev points of the first kind, mapped to the interval.
    /// All interior, clustered toward the endpoints — good for detecting
    /// coefficient mismatches that vanish at special points.
    pub fn chebyshev_samples(&self, n: usize) -> Vec<f64> {
        assert!(n >= 1);
        let c = self.mid();
        let r = 0.5 * self.length();
        (0..n)
            .map(|i| {
                let theta = std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * n as f64);
                c + r * theta.cos()
            })
            .collect()
    }

    /// Shrinks the interval by `margin` on each side.
    pub fn shrunk(&self, margin: f64) -> Result<Self, DomainError> {
        Interval::new(self.lo + margin, self.hi - margin)
    }
}
