//! Reflection and transmission probabilities from a transfer matrix, plus
//! the closed forms for single rectangles and the squeezed well.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::potential::{SqueezeExponent, SqueezeSpec};
use crate::transfer::{TransferMatrix, BRANCH_THRESHOLD};
use crate::units::Energy;

/// Maximum `|det Λ - 1|`, relative to the squared entry scale, accepted by
/// [`scatter`].
pub const DET_TOLERANCE: f64 = 1e-8;

/// Band around `√d·a/π ∈ ℕ` classified as resonant.
pub const RESONANCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringResult {
    /// `λ₁₁ - λ₂₂`
    pub u: f64,
    /// `kλ₁₂ + λ₂₁/k`
    pub v: f64,
    pub refl_prob: f64,
    pub trans_prob: f64,
}

impl ScatteringResult {
    pub fn from_uv(u: f64, v: f64) -> Self {
        let s = u * u + v * v;
        let denom = 4.0 + s;
        Self {
            u,
            v,
            refl_prob: s / denom,
            trans_prob: 4.0 / denom,
        }
    }
}

pub fn scatter(m: &TransferMatrix, energy: Energy) -> Result<ScatteringResult> {
    let e = energy.value();
    if !(e > 0.0) {
        return Err(Error::NonPositiveEnergy(e));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("transfer matrix"));
    }
    let det = m.det();
    if (det - 1.0).abs() > DET_TOLERANCE * m.max_abs().max(1.0).powi(2) {
        return Err(Error::Determinant(det));
    }
    let k = e.sqrt();
    Ok(ScatteringResult::from_uv(
        m.l11 - m.l22,
        k * m.l12 + m.l21 / k,
    ))
}

/// Transmission through a single rectangle of height `v` and width `l`,
/// written directly in terms of `E` and `V`.
pub fn rectangle_transmission(v: f64, l: f64, energy: Energy) -> Result<f64> {
    let e = energy.value();
    if !(e > 0.0) {
        return Err(Error::NonPositiveEnergy(e));
    }
    let q2 = e - v;
    // sin²(ql)/(E - V), continued analytically below the barrier top.
    let ratio = if q2.abs() < BRANCH_THRESHOLD {
        l * l
    } else if q2 > 0.0 {
        (q2.sqrt() * l).sin().powi(2) / q2
    } else {
        ((-q2).sqrt() * l).sinh().powi(2) / (-q2)
    };
    Ok(1.0 / (1.0 + v * v / (4.0 * e) * ratio))
}

/// Zero-range barrier of strength `α` (nm⁻¹) at wave number `k`.
pub fn delta_transmission(alpha: f64, k: f64) -> f64 {
    let x = alpha / (2.0 * k);
    1.0 / (1.0 + x * x)
}

/// Closed-form transmission of the ν = 2 squeezed well at finite ε.
pub fn well_transmission_eps(spec: &SqueezeSpec, energy: Energy) -> Result<f64> {
    spec.validate()?;
    if spec.exponent != SqueezeExponent::Resonant {
        return Err(invalid("nu", "closed form applies to the ν = 2 well only"));
    }
    let e = energy.value();
    if !(e > 0.0) {
        return Err(Error::NonPositiveEnergy(e));
    }
    let d = spec.amplitude;
    let eps2_e = spec.epsilon * spec.epsilon * e;
    let s = ((eps2_e + d).sqrt() * spec.a).sin();
    Ok(1.0 / (1.0 + d * d / (4.0 * eps2_e * (eps2_e + d)) * s * s))
}

/// Resonant thicknesses `a_n = nπ/√d` for `n = 1..=n_max`.
pub fn resonance_set(d: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(d.is_finite() && d > 0.0) {
        return Err(invalid("d", format!("must be > 0, got {d}")));
    }
    let root = d.sqrt();
    Ok((1..=n_max).map(|n| n as f64 * PI / root).collect())
}

/// `Some(n)` when `(d, a)` lies within `tol` of the resonance line `n`.
pub fn resonance_index(d: f64, a: f64, tol: f64) -> Option<u32> {
    let x = d.sqrt() * a / PI;
    let n = x.round();
    (n >= 1.0 && (x - n).abs() < tol).then_some(n as u32)
}
