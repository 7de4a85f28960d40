//! Tunneling through a squeezed prewell combined with a B-layer: finite-ε
//! transmission, its ε → 0 limit and the transmission maps behind the
//! peak-to-valley comparison.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::potential::{BilayerSpec, Ordering, PotentialProfile, SqueezeSpec};
use crate::scattering::{resonance_index, scatter, ScatteringResult, RESONANCE_TOLERANCE};
use crate::transfer::{bilayer_matrix, profile_matrix, TransferMatrix};
use crate::units::Energy;

/// ε → 0 transmission of the prewell–B structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitTransmission {
    pub on_sigma: bool,
    /// Resonance index `n` when on Σ.
    pub resonance: Option<u32>,
    pub t_limit: f64,
    pub u_limit: Option<f64>,
    pub v_limit: Option<f64>,
}

/// Limits of `u_ε`, `v_ε` on the resonance line `n`: `(-1)ⁿ` times the
/// bare `(u_b, v_b)` rotated by `kρ`, clockwise for WB and counter-clockwise
/// for BW.
pub fn limit_uv(b: &TransferMatrix, k: f64, rho: f64, n: u32, ordering: Ordering) -> (f64, f64) {
    let u_b = b.l11 - b.l22;
    let v_b = k * b.l12 + b.l21 / k;
    let (s, c) = (k * rho).sin_cos();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let orient = match ordering {
        Ordering::Wb => 1.0,
        Ordering::Bw => -1.0,
    };
    (
        sign * (u_b * c - orient * v_b * s),
        sign * (v_b * c + orient * u_b * s),
    )
}

/// Limit transmission `T_w · T_b`, with `T_w ∈ {0, 1}` decided by the
/// resonance classifier.
pub fn limit_transmission(spec: &BilayerSpec, energy: Energy) -> Result<LimitTransmission> {
    spec.validate()?;
    let e = energy.value();
    if !(e > 0.0) {
        return Err(crate::error::Error::NonPositiveEnergy(e));
    }
    let Some(n) = resonance_index(spec.prewell.amplitude, spec.prewell.a, RESONANCE_TOLERANCE)
    else {
        return Ok(LimitTransmission {
            on_sigma: false,
            resonance: None,
            t_limit: 0.0,
            u_limit: None,
            v_limit: None,
        });
    };
    let b = profile_matrix(&spec.b_layer, energy)?;
    let (u, v) = limit_uv(&b, e.sqrt(), spec.gap_rho, n, spec.ordering);
    Ok(LimitTransmission {
        on_sigma: true,
        resonance: Some(n),
        t_limit: ScatteringResult::from_uv(u, v).trans_prob,
        u_limit: Some(u),
        v_limit: Some(v),
    })
}

/// Full-structure scattering at finite ε.
pub fn bilayer_transmission(spec: &BilayerSpec, energy: Energy) -> Result<ScatteringResult> {
    scatter(&bilayer_matrix(spec, energy)?, energy)
}

/// `q·|sin(ql)|` of the realized prewell, the quantity that diverges as
/// ε → 0 off the resonance set and vanishes on it.
pub fn prewell_divergence(prewell: &SqueezeSpec, energy: Energy) -> Result<f64> {
    let w = prewell.realize()?;
    let q = (energy.value() - w.height).sqrt();
    Ok(q * (q * w.width).sin().abs())
}

/// Parameters of a transmission map over prewell thickness `a` and
/// rectangular-barrier width `l_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakValleyConfig {
    /// Prewell depth (nm⁻²).
    pub d: f64,
    /// Barrier height (nm⁻²).
    pub barrier: f64,
    pub energy: Energy,
    pub rho: f64,
    pub ordering: Ordering,
    pub a_grid: Vec<f64>,
    pub lb_grid: Vec<f64>,
    pub eps: Vec<f64>,
    /// Barrier width at which the peak-to-valley ratio is taken.
    pub ratio_lb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakValley {
    pub epsilon: f64,
    pub peak: f64,
    pub valley: f64,
    /// `peak / valley`; infinite if the valley is exactly zero.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakValleyReport {
    pub config: PeakValleyConfig,
    /// `transmission[e][i][j]` at `eps[e]`, `a_grid[i]`, `lb_grid[j]`.
    pub transmission: Vec<Vec<Vec<f64>>>,
    pub ratios: Vec<PeakValley>,
}

impl PeakValleyConfig {
    fn spec(&self, a: f64, lb: f64, eps: f64) -> Result<BilayerSpec> {
        Ok(BilayerSpec {
            prewell: SqueezeSpec::well(self.d, a, eps),
            gap_rho: self.rho,
            b_layer: PotentialProfile::rectangle(lb, self.barrier)?,
            ordering: self.ordering,
        })
    }

    pub fn transmission(&self, a: f64, lb: f64, eps: f64) -> Result<f64> {
        Ok(bilayer_transmission(&self.spec(a, lb, eps)?, self.energy)?.trans_prob)
    }
}

/// Transmission grids per ε plus the peak-to-valley ratio along `a` at
/// `ratio_lb`.
pub fn peak_valley_report(config: &PeakValleyConfig) -> Result<PeakValleyReport> {
    let positive = |v: &[f64]| v.iter().all(|&x| x > 0.0 && x.is_finite());
    if config.a_grid.is_empty() || config.lb_grid.is_empty() || config.eps.is_empty() {
        return Err(invalid("grid", "a, l_b and ε grids must be non-empty"));
    }
    if !(positive(&config.a_grid) && positive(&config.lb_grid) && positive(&config.eps)) {
        return Err(invalid("grid", "all grid values must be positive"));
    }
    let transmission = config
        .eps
        .iter()
        .map(|&eps| {
            config
                .a_grid
                .par_iter()
                .map(|&a| {
                    config
                        .lb_grid
                        .iter()
                        .map(|&lb| config.transmission(a, lb, eps))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let ratios = config
        .eps
        .iter()
        .map(|&eps| {
            let line = config
                .a_grid
                .par_iter()
                .map(|&a| config.transmission(a, config.ratio_lb, eps))
                .collect::<Result<Vec<_>>>()?;
            let peak = line.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let valley = line.iter().copied().fold(f64::INFINITY, f64::min);
            Ok(PeakValley {
                epsilon: eps,
                peak,
                valley,
                ratio: peak / valley,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PeakValleyReport {
        config: config.clone(),
        transmission,
        ratios,
    })
}
