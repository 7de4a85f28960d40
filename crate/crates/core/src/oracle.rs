//! Independent checks for the transfer-matrix path: a fixed-step Numerov
//! integrator and the even/odd square-well conditions.
//!
//! Production numbers never come from here.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::potential::PotentialProfile;
use crate::transfer::TransferMatrix;
use crate::units::Energy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumerovConfig {
    /// Initial step (nm).
    pub step: f64,
    /// Zero-potential margin added on both sides (nm).
    pub padding: f64,
    pub max_halvings: u32,
    /// Accepted change between step `h` and `h/2`.
    pub gate: f64,
}

impl Default for NumerovConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            padding: 1.0,
            max_halvings: 5,
            gate: 1e-8,
        }
    }
}

impl NumerovConfig {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid("step", format!("must be > 0, got {}", self.step)));
        }
        if !(self.padding >= 0.0) {
            return Err(invalid(
                "padding",
                format!("must be ≥ 0, got {}", self.padding),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumerovTransmission {
    pub trans_prob: f64,
    /// Step at which the gate passed.
    pub step: f64,
    /// `|T(2h) - T(h)|` at that step.
    pub change: f64,
}

/// Advance `(ψ, ψ')` across an interval of constant `f = V - E`.
///
/// `direction` is `+1` for left-to-right and `-1` for right-to-left.
fn numerov_interval(
    psi: Complex64,
    dpsi: Complex64,
    f: f64,
    length: f64,
    direction: f64,
    max_step: f64,
) -> (Complex64, Complex64) {
    let n = ((length / max_step).ceil() as usize).max(2);
    let h = length / n as f64;
    let h2f = h * h * f;
    // Along the direction of travel the derivative flips sign for -1.
    let d0 = dpsi * direction;

    // Starting value one step in, from the local Taylor expansion of
    // ψ'' = fψ.
    let c = 1.0 + h2f / 2.0 + h2f * h2f / 24.0 + h2f * h2f * h2f / 720.0;
    let s = h * (1.0 + h2f / 6.0 + h2f * h2f / 120.0 + h2f * h2f * h2f / 5040.0);
    let mut prev = psi;
    let mut cur = psi * c + d0 * s;

    let a = h2f / 12.0;
    let (gain, lag, norm) = (2.0 * (1.0 + 5.0 * a), 1.0 - a, 1.0 - a);
    let mut before_last = prev;
    for _ in 1..=n {
        let next = (cur * gain - prev * lag) / norm;
        before_last = prev;
        prev = cur;
        cur = next;
    }
    // prev is node n (end of interval), cur the virtual node n+1.
    let end = prev;
    let slope = (cur - before_last) * ((1.0 - h2f / 6.0) / (2.0 * h));
    (end, slope * direction)
}

fn padded(profile: &PotentialProfile, padding: f64) -> Vec<(f64, f64)> {
    let mut pieces = Vec::with_capacity(profile.segments().len() + 2);
    if padding > 0.0 {
        pieces.push((padding, 0.0));
    }
    pieces.extend(profile.segments().iter().map(|s| (s.width, s.height)));
    if padding > 0.0 {
        pieces.push((padding, 0.0));
    }
    pieces
}

fn transmission_at_step(pieces: &[(f64, f64)], e: f64, step: f64) -> f64 {
    let k = e.sqrt();
    let ik = Complex64::new(0.0, k);
    // Pure outgoing wave e^{ikx} on the right, phase reference x = 0 there.
    let mut psi = Complex64::new(1.0, 0.0);
    let mut dpsi = ik;
    let mut x = 0.0;
    for &(width, height) in pieces.iter().rev() {
        (psi, dpsi) = numerov_interval(psi, dpsi, height - e, width, -1.0, step);
        x -= width;
    }
    // ψ = A e^{ikx} + B e^{-ikx} on the left; T = 1/A.
    let incoming = (psi + dpsi / ik) * 0.5 * Complex64::new(0.0, -k * x).exp();
    1.0 / incoming.norm_sqr()
}

/// |T|² from direct integration of the Schrödinger equation.
pub fn numerov_transmission(
    profile: &PotentialProfile,
    energy: Energy,
    cfg: &NumerovConfig,
) -> Result<NumerovTransmission> {
    cfg.validate()?;
    let e = energy.value();
    if !(e > 0.0) {
        return Err(Error::NonPositiveEnergy(e));
    }
    let pieces = padded(profile, cfg.padding);
    gated(cfg, |h| transmission_at_step(&pieces, e, h)).map(|(t, step, change)| {
        NumerovTransmission {
            trans_prob: t,
            step,
            change,
        }
    })
}

fn gated<F>(cfg: &NumerovConfig, run: F) -> Result<(f64, f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut h = cfg.step;
    let mut coarse = run(h);
    let mut change = f64::INFINITY;
    for _ in 0..=cfg.max_halvings {
        let fine = run(h / 2.0);
        change = (fine - coarse).abs();
        if change < cfg.gate {
            return Ok((fine, h / 2.0, change));
        }
        h /= 2.0;
        coarse = fine;
    }
    Err(Error::ConvergenceGate { step: h, change })
}

/// Transfer matrix obtained by integrating the two unit initial conditions
/// `(1, 0)` and `(0, 1)` across the profile with a fixed step.
pub fn numerov_transfer(
    profile: &PotentialProfile,
    energy: Energy,
    step: f64,
) -> Result<TransferMatrix> {
    if !(step > 0.0) {
        return Err(invalid("step", format!("must be > 0, got {step}")));
    }
    let e = energy.value();
    let run = |psi0: f64, dpsi0: f64| {
        let mut psi = Complex64::new(psi0, 0.0);
        let mut dpsi = Complex64::new(dpsi0, 0.0);
        for s in profile.segments() {
            (psi, dpsi) = numerov_interval(psi, dpsi, s.height - e, s.width, 1.0, step);
        }
        (psi.re, dpsi.re)
    };
    let (a, da) = run(1.0, 0.0);
    let (b, db) = run(0.0, 1.0);
    let m = TransferMatrix::new(a, b, da, db);
    if !m.is_finite() {
        return Err(Error::NonFinite("Numerov propagation"));
    }
    Ok(m)
}

/// Bound levels `κ` (descending) of a symmetric well of the given depth
/// (nm⁻², positive) and width, from the even and odd matching conditions
/// `k tan(kL/2) = κ` and `-k cot(kL/2) = κ`.
pub fn square_well_levels(depth: f64, width: f64) -> Vec<f64> {
    if !(depth > 0.0 && width > 0.0) {
        return Vec::new();
    }
    // Dimensionless z = kL/2 with z² + (κL/2)² = z0².
    let z0 = 0.5 * width * depth.sqrt();
    let outside = |z: f64| (z0 * z0 - z * z).max(0.0).sqrt();
    let even = |z: f64| z * z.sin() - outside(z) * z.cos();
    let odd = |z: f64| z * z.cos() + outside(z) * z.sin();

    let mut levels = Vec::new();
    let mut j = 0.0;
    loop {
        let base = j * PI;
        if base >= z0 {
            break;
        }
        let hi = (base + FRAC_PI_2).min(z0);
        if let Some(z) = refine(&even, base, hi) {
            levels.push(2.0 * outside(z) / width);
        }
        let lo = base + FRAC_PI_2;
        if lo < z0 {
            if let Some(z) = refine(&odd, lo, (base + PI).min(z0)) {
                levels.push(2.0 * outside(z) / width);
            }
        }
        j += 1.0;
    }
    levels.retain(|&k| k > 0.0);
    levels.sort_by(|a, b| b.total_cmp(a));
    levels
}

fn refine<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if (f_lo < 0.0) == (f_hi < 0.0) {
        return None;
    }
    while hi - lo > 1e-15 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Segment;
    use crate::units::UnitSystem;

    #[test]
    fn free_space_is_transparent() {
        let p = PotentialProfile::rectangle(5.0, 0.0).unwrap();
        let t = numerov_transmission(&p, Energy::new(0.1), &NumerovConfig::default()).unwrap();
        assert!((t.trans_prob - 1.0).abs() < 1e-9, "{t:?}");
    }

    #[test]
    fn reference_well_levels() {
        let u = UnitSystem::default();
        let levels = square_well_levels(u.to_internal(0.5).value(), 7.0);
        assert_eq!(levels.len(), 3);
        for (got, want) in levels
            .iter()
            .zip([1.088_192_100, 0.901_037_846, 0.505_279_914])
        {
            assert!((got - want).abs() < 1e-8, "{got}");
        }
    }

    #[test]
    fn narrow_well_approaches_delta_binding() {
        // κ → depth·width/2 as width → 0.
        let depth = 1.3;
        for &w in &[1e-2, 1e-3, 1e-4] {
            let levels = square_well_levels(depth, w);
            assert_eq!(levels.len(), 1);
            let want = depth * w / 2.0;
            assert!((levels[0] - want).abs() < 0.01 * want, "{w}: {}", levels[0]);
        }
    }

    #[test]
    fn empty_for_degenerate_input() {
        assert!(square_well_levels(0.0, 1.0).is_empty());
        assert!(square_well_levels(1.0, -1.0).is_empty());
    }

    #[test]
    fn numerov_matrix_is_unimodular() {
        let p = PotentialProfile::new(vec![
            Segment::new(2.0, -0.7).unwrap(),
            Segment::new(1.0, 0.4).unwrap(),
        ]);
        let m = numerov_transfer(&p, Energy::new(0.05), 1e-3).unwrap();
        assert!((m.det() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gate_failure_is_reported() {
        let p = PotentialProfile::rectangle(5.0, -2.0).unwrap();
        let cfg = NumerovConfig {
            step: 0.5,
            max_halvings: 0,
            gate: 1e-14,
            ..Default::default()
        };
        assert!(matches!(
            numerov_transmission(&p, Energy::new(0.1), &cfg),
            Err(Error::ConvergenceGate { .. })
        ));
        assert!(numerov_transmission(&p, Energy::new(-0.1), &NumerovConfig::default()).is_err());
    }
}
