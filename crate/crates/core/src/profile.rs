//! Profile functions for the two arbitrary waves in a general solution.
//!
//! Solutions of rank (k, m) involve derivatives of the travelling profiles up
//! to the rank order, so each profile supports exact derivatives of any
//! requested order. Derivative orders above [`MAX_DERIVATIVE_ORDER`] never
//! occur for the families shipped here; the cap exists so a runaway caller
//! fails loudly instead of looping.

/// Highest derivative order any shipped construction requests.
pub const MAX_DERIVATIVE_ORDER: usize = 16;

/// A smooth profile `f(ξ)` with exact derivatives of every order.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileFunction {
    /// Identically zero.
    Zero,
    /// `amplitude · exp(-((ξ-center)/width)²)`
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `amplitude · sin(freq·ξ + phase)`
    Sinusoid {
        amplitude: f64,
        freq: f64,
        phase: f64,
    },
    /// `Σ coeffs[i] · ξ^i`
    Polynomial { coeffs: Vec<f64> },
}

impl ProfileFunction {
    pub fn gaussian(amplitude: f64, center: f64, width: f64) -> Self {
        assert!(width > 0.0, "Gaussian width must be positive");
        ProfileFunction::Gaussian {
            amplitude,
            center,
            width,
        }
    }

    pub fn sinusoid(amplitude: f64, freq: f64, phase: f64) -> Self {
        ProfileFunction::Sinusoid {
            amplitude,
            freq,
            phase,
        }
    }

    pub fn polynomial(coeffs: &[f64]) -> Self {
        ProfileFunction::Polynomial {
            coeffs: coeffs.to_vec(),
        }
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.deriv(0, xi)
    }

    /// Exact `k`-th derivative at `ξ`.
    ///
    /// Panics if `k > MAX_DERIVATIVE_ORDER`; the shipped solution families
    /// stay far below the cap.
    pub fn deriv(&self, k: usize, xi: f64) -> f64 {
        assert!(
            k <= MAX_DERIVATIVE_ORDER,
            "derivative order {k} exceeds cap {MAX_DERIVATIVE_ORDER}"
        );
        match self {
            ProfileFunction::Zero => 0.0,
            ProfileFunction::Gaussian {
                amplitude,
                center,
                width,
            } => {
                // d^k/dξ^k e^{-z²} = (-1/w)^k H_k(z) e^{-z²} with z = (ξ-c)/w,
                // H_k the physicists' Hermite polynomials.
                let z = (xi - center) / width;
                let h = hermite(k, z);
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                amplitude * sign * width.powi(-(k as i32)) * h * (-z * z).exp()
            }
            ProfileFunction::Sinusoid {
                amplitude,
                freq,
                phase,
            } => {
                // Each derivative multiplies by freq and advances phase by π/2.
                amplitude
                    * freq.powi(k as i32)
                    * (freq * xi + phase + k as f64 * std::f64::consts::FRAC_PI_2).sin()
            }
            ProfileFunction::Polynomial { coeffs } => {
                let mut acc = 0.0;
                for (i, &c) in coeffs.iter().enumerate().skip(k) {
                    let mut fall = 1.0;
                    for j in 0..k {
                        fall *= (i - j) as f64;
                    }
                    acc += c * fall * xi.powi((i - k) as i32);
                }
                acc
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ProfileFunction::Zero => true,
            ProfileFunction::Polynomial { coeffs } => coeffs.iter().all(|&c| c == 0.0),
            _ => false,
        }
    }
}

fn hermite(k: usize, z: f64) -> f64 {
    // H_0 = 1, H_1 = 2z, H_{k+1} = 2z H_k - 2k H_{k-1}
    match k {
        0 => 1.0,
        1 => 2.0 * z,
        _ => {
            let mut hm = 1.0;
            let mut h = 2.0 * z;
            for j in 1..k {
                let next = 2.0 * z * h - 2.0 * j as f64 * hm;
                hm = h;
                h = next;
            }
            h
        }
    }
}
