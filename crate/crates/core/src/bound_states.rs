//! Bound levels `E = -κ²` of layered profiles and of the prewell–B system.
//!
//! Roots are located by scanning the κ-regularized compatibility residual
//! on a mixed uniform/geometric grid and refined by bisection. Tracking
//! across parameter sweeps lives in [`track_levels`].

use crate::error::{invalid, Result};
use crate::potential::{BilayerSpec, Ordering, PotentialProfile};
use crate::transfer::{profile_matrix, scaled_profile_matrix, TransferMatrix};
use crate::units::Energy;

/// Lowest κ probed; levels detaching from zero are detected above it.
pub const KAPPA_FLOOR: f64 = 1e-6;
/// Bisection stops once the bracket is narrower than this (nm⁻¹).
pub const BISECTION_TOL: f64 = 1e-12;
pub const MIN_GRID: usize = 64;
pub const DEFAULT_GRID: usize = 256;
const MAX_DOUBLINGS: u32 = 10;

/// Value of a bound-state residual together with the magnitude of its
/// largest term, so that "small" can be judged relative to cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    fn from_terms(terms: [f64; 4]) -> Self {
        let value = terms.iter().sum();
        let scale = terms.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
        Self { value, scale }
    }

    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.value.abs() / self.scale
        } else {
            self.value.abs()
        }
    }
}

/// `κ(λ₁₁ + λ₂₂) + κ²λ₁₂ + λ₂₁` for a matrix built at `E = -κ²`.
///
/// This is the compatibility condition multiplied by κ, which keeps it
/// finite as κ → 0⁺.
pub fn bound_condition(m: &TransferMatrix, kappa: f64) -> Residual {
    Residual::from_terms([kappa * m.l11, kappa * m.l22, kappa * kappa * m.l12, m.l21])
}

/// Uses the scaled product, so the value is the condition times a positive
/// factor and deep levels behind wide evanescent regions stay reachable.
pub fn profile_residual(profile: &PotentialProfile, kappa: f64) -> Result<Residual> {
    let m = scaled_profile_matrix(profile, Energy::bound(kappa))?;
    Ok(bound_condition(&m.matrix, kappa))
}

/// Limit condition for a squeezed prewell off the resonance set:
/// `κ(λ₁₁τ + λ₂₂) + κ²λ₁₂ + λ₂₁τ` (WB), with `λ₁₁ ↔ λ₂₂` for BW.
pub fn limit_bound_condition(
    b: &TransferMatrix,
    kappa: f64,
    tau: f64,
    ordering: Ordering,
) -> Residual {
    let (near, far) = match ordering {
        Ordering::Wb => (b.l11, b.l22),
        Ordering::Bw => (b.l22, b.l11),
    };
    Residual::from_terms([
        kappa * near * tau,
        kappa * far,
        kappa * kappa * b.l12,
        b.l21 * tau,
    ])
}

/// Explicit bilayer condition in terms of `t_ε = tan(√(d - ε²κ²)·a)` and
/// `τ = tanh(κρ)`, for the B-matrix `b` evaluated at `E = -κ²`.
///
/// It equals the plain (unregularized) compatibility residual of the full
/// structure divided by `cos(q_ε l)·cosh(κρ)`, so its roots coincide with
/// those of the generic route away from the poles of `t_ε`.
pub fn wb_bound_condition(spec: &BilayerSpec, kappa: f64) -> Result<f64> {
    spec.validate()?;
    if !(kappa > 0.0) {
        return Err(invalid("kappa", format!("must be > 0, got {kappa}")));
    }
    let b = profile_matrix(&spec.b_layer, Energy::bound(kappa))?;
    let (d, a, eps) = (spec.prewell.amplitude, spec.prewell.a, spec.prewell.epsilon);
    let inner = d - (eps * kappa).powi(2);
    if !(inner > 0.0) {
        return Err(invalid(
            "kappa",
            format!("prewell wave number is imaginary for κ = {kappa} ≥ √d/ε"),
        ));
    }
    let q = inner.sqrt() / eps;
    let t = (inner.sqrt() * a).tan();
    let tau = (kappa * spec.gap_rho).tanh();
    let (l11, l22) = match spec.ordering {
        Ordering::Wb => (b.l11, b.l22),
        Ordering::Bw => (b.l22, b.l11),
    };
    let (l12, l21, k) = (b.l12, b.l21, kappa);
    let bare = l11 + l22 + k * l12 + l21 / k;
    let linear = k / q * l11 - q / k * l22 - q * l12 + l21 / q;
    let mixed = k * k / q * l12 - q / (k * k) * l21 - q / k * l11 + k / q * l22;
    Ok(bare * (1.0 + tau) + linear * t + mixed * t * tau)
}

/// Search interval `(floor, ceil)` for κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaWindow {
    pub floor: f64,
    pub ceil: f64,
}

impl KappaWindow {
    pub fn new(floor: f64, ceil: f64) -> Result<Self> {
        if !(floor > 0.0 && ceil > floor && ceil.is_finite()) {
            return Err(invalid(
                "window",
                format!("need 0 < floor < ceil, got ({floor}, {ceil})"),
            ));
        }
        Ok(Self { floor, ceil })
    }

    /// `(κ_floor, √(-V_min))` clipped so that no segment saturates.
    /// `None` when the profile has no well and hence no bound states.
    pub fn for_profile(profile: &PotentialProfile) -> Option<Self> {
        let depth = -profile.min_height();
        if !(depth > 0.0) {
            return None;
        }
        let ceil = depth.sqrt();
        (ceil > KAPPA_FLOOR).then_some(Self {
            floor: KAPPA_FLOOR,
            ceil,
        })
    }

    pub fn contains(&self, kappa: f64) -> bool {
        kappa > self.floor && kappa < self.ceil
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundSpectrum {
    /// Descending κ values.
    pub levels: Vec<f64>,
    pub search_window: KappaWindow,
    /// `|F(κ)|` relative to the largest term of `F`, per level.
    pub residuals: Vec<f64>,
    /// Sign-change brackets that bisection could not resolve.
    pub unresolved: Vec<(f64, f64)>,
    /// Grid size at which the root count settled.
    pub grid_n: usize,
}

impl BoundSpectrum {
    pub fn empty(window: KappaWindow) -> Self {
        Self {
            levels: Vec::new(),
            search_window: window,
            residuals: Vec::new(),
            unresolved: Vec::new(),
            grid_n: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Levels in ascending order.
    pub fn ascending(&self) -> Vec<f64> {
        self.levels.iter().rev().copied().collect()
    }
}

fn scan_grid(window: KappaWindow, n: usize) -> Vec<f64> {
    let KappaWindow { floor, ceil } = window;
    let ratio = ceil / floor;
    let mut pts: Vec<f64> = (0..=n)
        .flat_map(|i| {
            let t = i as f64 / n as f64;
            [floor + (ceil - floor) * t, floor * ratio.powf(t)]
        })
        .map(|x| x.clamp(floor, ceil))
        .collect();
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    pts
}

fn sign_changes<F>(residual: &F, grid: &[f64]) -> Result<Vec<(f64, f64, f64, f64)>>
where
    F: Fn(f64) -> Result<Residual>,
{
    let values = grid
        .iter()
        .map(|&k| residual(k).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..grid.len() - 1 {
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 {
            out.push((grid[i], grid[i], fa, fa));
        } else if fa.is_finite() && fb.is_finite() && fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
            out.push((grid[i], grid[i + 1], fa, fb));
        }
    }
    Ok(out)
}

/// Shrink a sign-change bracket to [`BISECTION_TOL`]; `None` if a
/// non-finite residual is met on the way.
pub(crate) fn bisect<F>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    tol: f64,
) -> Result<Option<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if !f_mid.is_finite() {
            return Ok(None);
        }
        if f_mid == 0.0 {
            return Ok(Some(mid));
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// All roots of `residual` inside `window`.
///
/// The grid is doubled from `grid_n` until the number of sign changes is
/// unchanged over two consecutive doublings.
pub fn find_roots<F>(residual: F, window: KappaWindow, grid_n: usize) -> Result<BoundSpectrum>
where
    F: Fn(f64) -> Result<Residual>,
{
    if grid_n < MIN_GRID {
        return Err(invalid(
            "grid_n",
            format!("must be at least {MIN_GRID}, got {grid_n}"),
        ));
    }
    let mut n = grid_n;
    let mut brackets = sign_changes(&residual, &scan_grid(window, n))?;
    let mut stable = 0;
    for _ in 0..MAX_DOUBLINGS {
        let finer = sign_changes(&residual, &scan_grid(window, 2 * n))?;
        n *= 2;
        if finer.len() == brackets.len() {
            stable += 1;
        } else {
            stable = 0;
        }
        brackets = finer;
        if stable >= 2 {
            break;
        }
    }

    let mut levels = Vec::with_capacity(brackets.len());
    let mut residuals = Vec::with_capacity(brackets.len());
    let mut unresolved = Vec::new();
    for (lo, hi, f_lo, _) in brackets {
        let root = if lo == hi {
            Some(lo)
        } else {
            bisect(
                |k| residual(k).map(|r| r.value),
                lo,
                hi,
                f_lo,
                BISECTION_TOL,
            )?
        };
        match root {
            Some(k) => {
                levels.push(k);
                residuals.push(residual(k)?.relative());
            }
            None => unresolved.push((lo, hi)),
        }
    }
    // Descending order, residuals alongside.
    let mut paired: Vec<(f64, f64)> = levels.into_iter().zip(residuals).collect();
    paired.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (levels, residuals) = paired.into_iter().unzip();
    Ok(BoundSpectrum {
        levels,
        search_window: window,
        residuals,
        unresolved,
        grid_n: n,
    })
}

/// Bound levels of an arbitrary profile. With `window = None` the search
/// covers `(κ_floor, √(-V_min))`, clipped at the saturation ceiling.
pub fn find_spectrum(
    profile: &PotentialProfile,
    window: Option<KappaWindow>,
    grid_n: usize,
) -> Result<BoundSpectrum> {
    let window = match window.or_else(|| KappaWindow::for_profile(profile)) {
        Some(w) => w,
        None => {
            return Ok(BoundSpectrum::empty(KappaWindow {
                floor: KAPPA_FLOOR,
                ceil: KAPPA_FLOOR,
            }))
        }
    };
    find_roots(|k| profile_residual(profile, k), window, grid_n)
}

/// Levels of the full prewell–gap–B structure at the spec's ε.
pub fn bilayer_spectrum(spec: &BilayerSpec, grid_n: usize) -> Result<BoundSpectrum> {
    find_spectrum(&spec.profile()?, None, grid_n)
}

/// Roots of the ε → 0 limit condition for a given gap `ρ`.
pub fn limit_spectrum(
    b_layer: &PotentialProfile,
    rho: f64,
    ordering: Ordering,
    grid_n: usize,
) -> Result<BoundSpectrum> {
    if !(rho > 0.0) {
        return Err(invalid("gap_rho", format!("must be > 0, got {rho}")));
    }
    let Some(window) = KappaWindow::for_profile(b_layer) else {
        return Ok(BoundSpectrum::empty(KappaWindow {
            floor: KAPPA_FLOOR,
            ceil: KAPPA_FLOOR,
        }));
    };
    find_roots(
        |k| {
            let b = profile_matrix(b_layer, Energy::bound(k))?;
            Ok(limit_bound_condition(&b, k, (k * rho).tanh(), ordering))
        },
        window,
        grid_n,
    )
}

/// One continuous level followed across a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    /// Sample index of the first value.
    pub start: usize,
    pub values: Vec<f64>,
}

impl Track {
    pub fn end(&self) -> usize {
        self.start + self.values.len() - 1
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("tracks are never empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrackEvent {
    /// A new lowest level appeared above the floor.
    Detachment {
        sample: usize,
        parameter: f64,
        kappa: f64,
    },
    /// The highest level left through the window ceiling.
    Escape {
        sample: usize,
        parameter: f64,
        kappa: f64,
    },
    /// A level started that is not a new lowest one.
    Appearance {
        sample: usize,
        parameter: f64,
        kappa: f64,
    },
    /// A level could not be continued within its continuity bound.
    Disappearance {
        sample: usize,
        parameter: f64,
        kappa: f64,
    },
}

/// Two or more candidates inside a continuity bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ambiguity {
    pub sample: usize,
    pub kappa: f64,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelTrack {
    pub parameters: Vec<f64>,
    pub tracks: Vec<Track>,
    pub events: Vec<TrackEvent>,
    pub ambiguities: Vec<Ambiguity>,
}

impl LevelTrack {
    pub fn detachments(&self) -> impl Iterator<Item = &TrackEvent> {
        self.events
            .iter()
            .filter(|e| matches!(e, TrackEvent::Detachment { .. }))
    }

    /// Tracks alive at the final sample.
    pub fn surviving(&self) -> impl Iterator<Item = &Track> {
        let last = self.parameters.len().saturating_sub(1);
        self.tracks.iter().filter(move |t| t.end() == last)
    }
}

/// Absolute continuity bound used until a track has two samples.
pub const INITIAL_BOUND: f64 = 0.05;
/// Lower limit on the adaptive bound so flat levels survive round-off.
pub const MIN_BOUND: f64 = 1e-6;

/// Solve along a monotone grid and follow the levels.
pub fn track_levels<F>(parameters: &[f64], solver: F) -> Result<LevelTrack>
where
    F: Fn(f64) -> Result<BoundSpectrum>,
{
    let spectra = parameters
        .iter()
        .map(|&p| solver(p))
        .collect::<Result<Vec<_>>>()?;
    track_spectra(parameters, &spectra)
}

/// Nearest-neighbour matching of precomputed spectra.
///
/// The continuity bound of a track is `5·|slope|·|Δp|` with the slope from
/// its last two samples (at least [`MIN_BOUND`]), or [`INITIAL_BOUND`] for
/// tracks with a single sample.
pub fn track_spectra(parameters: &[f64], spectra: &[BoundSpectrum]) -> Result<LevelTrack> {
    if parameters.len() != spectra.len() {
        return Err(invalid(
            "spectra",
            "one spectrum per parameter sample is required",
        ));
    }
    let increasing = parameters.windows(2).all(|w| w[1] > w[0]);
    let decreasing = parameters.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(invalid(
            "parameters",
            "sweep grid must be strictly monotone",
        ));
    }

    let mut out = LevelTrack {
        parameters: parameters.to_vec(),
        ..Default::default()
    };
    let Some(first) = spectra.first() else {
        return Ok(out);
    };
    let mut active: Vec<usize> = Vec::new();
    for &k in first.levels.iter() {
        active.push(out.tracks.len());
        out.tracks.push(Track {
            start: 0,
            values: vec![k],
        });
    }

    for i in 1..spectra.len() {
        let step = (parameters[i] - parameters[i - 1]).abs();
        let levels = &spectra[i].levels;
        let previous = &spectra[i - 1].levels;

        // Candidate levels for every active track.
        let mut claims: Vec<Vec<usize>> = vec![Vec::new(); levels.len()];
        let mut choice: Vec<Option<usize>> = vec![None; active.len()];
        for (slot, &t) in active.iter().enumerate() {
            let track = &out.tracks[t];
            let bound = continuity_bound(track, parameters, step);
            let last = track.last();
            let candidates: Vec<usize> = levels
                .iter()
                .enumerate()
                .filter(|(_, &k)| (k - last).abs() <= bound)
                .map(|(j, _)| j)
                .collect();
            match candidates.len() {
                0 => {}
                1 => {
                    choice[slot] = Some(candidates[0]);
                    claims[candidates[0]].push(slot);
                }
                n => out.ambiguities.push(Ambiguity {
                    sample: i,
                    kappa: last,
                    candidates: n,
                }),
            }
        }
        // A level claimed by several tracks is ambiguous for all of them.
        for (j, slots) in claims.iter().enumerate() {
            if slots.len() > 1 {
                out.ambiguities.push(Ambiguity {
                    sample: i,
                    kappa: levels[j],
                    candidates: slots.len(),
                });
                for &s in slots {
                    choice[s] = None;
                }
            }
        }

        let mut next_active = Vec::new();
        let mut taken = vec![false; levels.len()];
        let top_previous = previous.first().copied();
        for (slot, &t) in active.iter().enumerate() {
            match choice[slot] {
                Some(j) => {
                    out.tracks[t].values.push(levels[j]);
                    taken[j] = true;
                    next_active.push(t);
                }
                None => {
                    let kappa = out.tracks[t].last();
                    let escaped = top_previous == Some(kappa)
                        && extrapolate(&out.tracks[t], parameters, i)
                            >= spectra[i].search_window.ceil;
                    out.events.push(if escaped {
                        TrackEvent::Escape {
                            sample: i,
                            parameter: parameters[i],
                            kappa,
                        }
                    } else {
                        TrackEvent::Disappearance {
                            sample: i,
                            parameter: parameters[i],
                            kappa,
                        }
                    });
                }
            }
        }
        let lowest_previous = previous.last().copied().unwrap_or(f64::INFINITY);
        let lowest_now = levels.last().copied();
        for (j, &k) in levels.iter().enumerate() {
            if taken[j] {
                continue;
            }
            let event = if Some(k) == lowest_now && k < lowest_previous {
                TrackEvent::Detachment {
                    sample: i,
                    parameter: parameters[i],
                    kappa: k,
                }
            } else {
                TrackEvent::Appearance {
                    sample: i,
                    parameter: parameters[i],
                    kappa: k,
                }
            };
            out.events.push(event);
            next_active.push(out.tracks.len());
            out.tracks.push(Track {
                start: i,
                values: vec![k],
            });
        }
        active = next_active;
    }
    Ok(out)
}

fn continuity_bound(track: &Track, parameters: &[f64], step: f64) -> f64 {
    let n = track.values.len();
    if n < 2 {
        return INITIAL_BOUND;
    }
    let end = track.end();
    let dp = (parameters[end] - parameters[end - 1]).abs();
    let slope = (track.values[n - 1] - track.values[n - 2]).abs() / dp;
    (5.0 * slope * step).max(MIN_BOUND)
}

fn extrapolate(track: &Track, parameters: &[f64], sample: usize) -> f64 {
    let n = track.values.len();
    if n < 2 {
        return track.last();
    }
    let end = track.end();
    let slope =
        (track.values[n - 1] - track.values[n - 2]) / (parameters[end] - parameters[end - 1]);
    track.last() + slope * (parameters[sample] - parameters[end])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::square_well_levels;
    use crate::potential::{Segment, SqueezeSpec};
    use crate::transfer::bilayer_matrix;
    use crate::units::UnitSystem;

    fn fig4_well() -> PotentialProfile {
        let u = UnitSystem::default();
        PotentialProfile::rectangle(7.0, u.to_internal(-0.5).value()).unwrap()
    }

    #[test]
    fn free_space_has_no_bound_states() {
        let gap = PotentialProfile::rectangle(6.0, 0.0).unwrap();
        for &k in &[1e-6, 0.01, 0.5, 3.0] {
            let m = profile_matrix(&gap, Energy::bound(k)).unwrap();
            let want = 2.0 * k * (k * 6.0).exp();
            let r = bound_condition(&m, k);
            assert!((r.value - want).abs() < 1e-12 * want);
            // The scaled residual drops the e^{κl} factor.
            let r = profile_residual(&gap, k).unwrap();
            assert!((r.value - 2.0 * k).abs() < 1e-12 * 2.0 * k);
        }
        assert!(find_spectrum(&gap, None, 64).unwrap().is_empty());
        let window = KappaWindow::new(1e-6, 2.0).unwrap();
        assert!(find_spectrum(&gap, Some(window), 64).unwrap().is_empty());
    }

    #[test]
    fn reference_well_spectrum() {
        let s = find_spectrum(&fig4_well(), None, DEFAULT_GRID).unwrap();
        let want = square_well_levels(UnitSystem::default().to_internal(0.5).value(), 7.0);
        assert_eq!(s.len(), 3, "{:?}", s.levels);
        for (got, want) in s.levels.iter().zip(want) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        assert!(s.residuals.iter().all(|&r| r < 1e-9));
        assert!(s.levels.iter().all(|&k| s.search_window.contains(k)));
        assert!(s.unresolved.is_empty());
    }

    #[test]
    fn refinement_is_stable() {
        let a = find_spectrum(&fig4_well(), None, 64).unwrap();
        let b = find_spectrum(&fig4_well(), None, 128).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.levels.iter().zip(&b.levels) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn shallow_well_binds_once() {
        let u = UnitSystem::default();
        let p = PotentialProfile::rectangle(7.0, u.to_internal(-0.001).value()).unwrap();
        assert_eq!(find_spectrum(&p, None, 64).unwrap().len(), 1);
    }

    #[test]
    fn rejects_small_grid_and_bad_window() {
        assert!(find_spectrum(&fig4_well(), None, 10).is_err());
        assert!(KappaWindow::new(1.0, 0.5).is_err());
        assert!(KappaWindow::new(0.0, 0.5).is_err());
    }

    #[test]
    fn limit_condition_with_unit_tau_is_plain_condition() {
        let b = profile_matrix(&fig4_well(), Energy::bound(0.7)).unwrap();
        for ordering in [Ordering::Wb, Ordering::Bw] {
            let lim = limit_bound_condition(&b, 0.7, 1.0, ordering);
            assert!((lim.value - bound_condition(&b, 0.7).value).abs() < 1e-14);
        }
    }

    fn fig4_spec(a: f64, eps: f64, rho: f64) -> BilayerSpec {
        let u = UnitSystem::default();
        BilayerSpec {
            prewell: SqueezeSpec::well(u.to_internal(0.2).value(), a, eps),
            gap_rho: rho,
            b_layer: fig4_well(),
            ordering: Ordering::Wb,
        }
    }

    #[test]
    fn explicit_form_is_rescaled_generic_residual() {
        // F_generic = κ·cos(q_ε l)·cosh(κρ)·explicit, for both orderings and
        // an asymmetric B-layer.
        let u = UnitSystem::default();
        let mut b = fig4_well();
        b.push(crate::potential::Segment::new(2.0, u.to_internal(-0.2).value()).unwrap());
        for ordering in [Ordering::Wb, Ordering::Bw] {
            let spec = BilayerSpec {
                b_layer: b.clone(),
                ordering,
                ..fig4_spec(6.1, 0.05, 0.5)
            };
            for i in 1..=20 {
                let k = 0.057 * i as f64;
                let generic = bound_condition(&bilayer_matrix(&spec, Energy::bound(k)).unwrap(), k);
                let inner = (spec.prewell.amplitude - (0.05 * k).powi(2)).sqrt();
                let factor = k * (inner * 6.1).cos() * (k * 0.5).cosh();
                let explicit = wb_bound_condition(&spec, k).unwrap() * factor;
                assert!(
                    (generic.value - explicit).abs() <= 1e-9 * generic.scale,
                    "{ordering:?} κ={k}: {} vs {explicit}",
                    generic.value
                );
            }
        }
    }

    #[test]
    fn explicit_form_rejects_kappa_above_prewell_depth() {
        let spec = fig4_spec(3.0, 0.1, 0.5);
        assert!(wb_bound_condition(&spec, 8.0).is_err());
        assert!(wb_bound_condition(&spec, 0.0).is_err());
    }

    #[test]
    fn constant_sweep_gives_constant_tracks() {
        let params: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let track = track_levels(&params, |_| find_spectrum(&fig4_well(), None, 64)).unwrap();
        assert_eq!(track.tracks.len(), 3);
        assert!(track.events.is_empty() && track.ambiguities.is_empty());
        for t in &track.tracks {
            assert_eq!(t.values.len(), 6);
            assert!(t.values.iter().all(|v| (v - t.values[0]).abs() < 1e-12));
        }
    }

    #[test]
    fn tracking_rejects_non_monotone_grid() {
        let s = find_spectrum(&fig4_well(), None, 64).unwrap();
        assert!(track_spectra(&[0.0, 1.0, 0.5], &[s.clone(), s.clone(), s]).is_err());
    }

    #[test]
    fn tracking_reports_ambiguity() {
        let w = KappaWindow::new(1e-6, 2.0).unwrap();
        let mk = |levels: Vec<f64>| BoundSpectrum {
            levels,
            ..BoundSpectrum::empty(w)
        };
        let spectra = [mk(vec![1.0]), mk(vec![1.01, 0.99])];
        let t = track_spectra(&[0.0, 1.0], &spectra).unwrap();
        assert_eq!(t.ambiguities.len(), 1);
        assert_eq!(t.ambiguities[0].candidates, 2);
    }

    #[test]
    fn thick_barrier_profile_has_full_window() {
        let p = PotentialProfile::new(vec![
            Segment::new(100.0, 10.0).unwrap(),
            Segment::new(2.0, -100.0).unwrap(),
            Segment::new(100.0, 10.0).unwrap(),
        ]);
        let w = KappaWindow::for_profile(&p).unwrap();
        assert_eq!(w.ceil, 10.0);
        assert!(profile_residual(&p, 9.9).unwrap().value.is_finite());
        // Levels of the inner well are unaffected by the far barriers.
        let inner = find_spectrum(
            &PotentialProfile::rectangle(2.0, -100.0).unwrap(),
            None,
            DEFAULT_GRID,
        )
        .unwrap();
        let boxed = find_spectrum(&p, None, DEFAULT_GRID).unwrap();
        let deep: Vec<f64> = boxed.levels.iter().copied().filter(|&k| k > 4.0).collect();
        let inner_deep: Vec<f64> = inner.levels.iter().copied().filter(|&k| k > 4.0).collect();
        assert_eq!(deep.len(), inner_deep.len());
    }

    #[test]
    fn composed_growth_stays_finite() {
        // Unscaled, the product of these three overflows near the ceiling.
        let p = PotentialProfile::new(vec![
            Segment::new(0.0433, -5249.3).unwrap(),
            Segment::gap(10.0).unwrap(),
            Segment::new(7.0, -1.31232).unwrap(),
        ]);
        let w = KappaWindow::for_profile(&p).unwrap();
        assert_eq!(w.ceil, 5249.3f64.sqrt());
        let r = profile_residual(&p, w.ceil * (1.0 - 1e-9)).unwrap();
        assert!(r.value.is_finite() && r.scale.is_finite());
        assert!(find_spectrum(&p, None, DEFAULT_GRID).is_ok());
    }
}
