//! Layered potentials: rectangular segments, explicit free gaps, slab
//! discretizations of smooth profiles and the ε-scaled prewell.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::units::UnitSystem;

/// A constant-potential layer. `height` is in nm⁻²; negative values are
/// wells, positive barriers, zero a free gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub width: f64,
    pub height: f64,
}

impl Segment {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid(
                "width",
                format!("must be finite and > 0, got {width}"),
            ));
        }
        if !height.is_finite() {
            return Err(Error::NonFinite("segment height"));
        }
        Ok(Self { width, height })
    }

    pub fn gap(width: f64) -> Result<Self> {
        Self::new(width, 0.0)
    }
}

/// Contiguous list of segments; the first one is met first by a particle
/// incident from the left.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PotentialProfile {
    segments: Vec<Segment>,
    /// Left edge in nm. Only used for reporting.
    pub origin: f64,
}

impl PotentialProfile {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self {
            segments,
            origin: 0.0,
        }
    }

    pub fn with_origin(mut self, origin: f64) -> Self {
        self.origin = origin;
        self
    }

    /// Rectangular layer of the given width and height (nm, nm⁻²).
    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        Ok(Self::new(vec![Segment::new(width, height)?]))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn push(&mut self, segment: Segment) {
        self.segments.push(segment);
    }

    pub fn extend(&mut self, other: &PotentialProfile) {
        self.segments.extend_from_slice(&other.segments);
    }

    pub fn total_width(&self) -> f64 {
        self.segments.iter().map(|s| s.width).sum()
    }

    /// Lowest segment height, or 0 for an empty profile.
    pub fn min_height(&self) -> f64 {
        self.segments.iter().map(|s| s.height).fold(0.0, f64::min)
    }

    /// Spatially reversed profile.
    pub fn mirrored(&self) -> Self {
        let mut segments = self.segments.clone();
        segments.reverse();
        Self {
            segments,
            origin: self.origin,
        }
    }

    /// Parse the JSON profile schema. Heights are given in eV.
    pub fn from_json(text: &str, units: &UnitSystem) -> Result<Self> {
        let file: ProfileFile =
            serde_json::from_str(text).map_err(|e| Error::Profile(e.to_string()))?;
        file.to_profile(units)
    }
}

/// On-disk profile: `{"segments":[{"width_nm":..,"height_ev":..},...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub segments: Vec<SegmentRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentRecord {
    pub width_nm: f64,
    pub height_ev: f64,
}

impl ProfileFile {
    pub fn to_profile(&self, units: &UnitSystem) -> Result<PotentialProfile> {
        if self.segments.is_empty() {
            return Err(Error::Profile("profile has no segments".into()));
        }
        let segments = self
            .segments
            .iter()
            .map(|r| Segment::new(r.width_nm, units.to_internal(r.height_ev).value()))
            .collect::<Result<Vec<_>>>()?;
        Ok(PotentialProfile::new(segments))
    }

    pub fn from_profile(profile: &PotentialProfile, units: &UnitSystem) -> Self {
        Self {
            segments: profile
                .segments()
                .iter()
                .map(|s| SegmentRecord {
                    width_nm: s.width,
                    height_ev: s.height / units.ev_to_inv_nm2,
                })
                .collect(),
        }
    }
}

/// Sample `f` at the midpoints of `n_slabs` equal slabs on `[y1, y2]`.
pub fn slabify<F>(f: F, y1: f64, y2: f64, n_slabs: usize) -> Result<PotentialProfile>
where
    F: Fn(f64) -> f64,
{
    if n_slabs == 0 {
        return Err(invalid("n_slabs", "must be at least 1"));
    }
    if !(y1.is_finite() && y2.is_finite() && y2 > y1) {
        return Err(invalid(
            "interval",
            format!("need y2 > y1, got [{y1}, {y2}]"),
        ));
    }
    let width = (y2 - y1) / n_slabs as f64;
    let segments = (0..n_slabs)
        .map(|i| {
            let mid = y1 + (i as f64 + 0.5) * width;
            let height = f(mid);
            if !height.is_finite() {
                return Err(Error::NonFinite("slab height"));
            }
            Segment::new(width, height)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PotentialProfile::new(segments).with_origin(y1))
}

/// Squeezing exponent `ν` of the family `ε^{-ν} V(x/ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SqueezeExponent {
    /// `ν = 1`: barrier of height `ε⁻¹h`, the δ-potential route.
    Delta,
    /// `ν = 2`: well of depth `ε⁻²d`, the resonant point interaction.
    Resonant,
}

impl SqueezeExponent {
    pub fn from_nu(nu: u8) -> Result<Self> {
        match nu {
            1 => Ok(Self::Delta),
            2 => Ok(Self::Resonant),
            other => Err(invalid("nu", format!("must be 1 or 2, got {other}"))),
        }
    }

    pub fn nu(self) -> u8 {
        match self {
            Self::Delta => 1,
            Self::Resonant => 2,
        }
    }
}

/// Rectangular layer of thickness `ε·a` scaled by `ε^{-ν}`.
///
/// `amplitude` is the well depth `d` for [`SqueezeExponent::Resonant`] and
/// the barrier height `h` for [`SqueezeExponent::Delta`], both in nm⁻².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeSpec {
    pub amplitude: f64,
    pub a: f64,
    pub epsilon: f64,
    pub exponent: SqueezeExponent,
}

impl SqueezeSpec {
    pub fn well(d: f64, a: f64, epsilon: f64) -> Self {
        Self {
            amplitude: d,
            a,
            epsilon,
            exponent: SqueezeExponent::Resonant,
        }
    }

    pub fn delta_barrier(h: f64, a: f64, epsilon: f64) -> Self {
        Self {
            amplitude: h,
            a,
            epsilon,
            exponent: SqueezeExponent::Delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(invalid(
                "epsilon",
                format!("must be > 0, got {}", self.epsilon),
            ));
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(invalid("d", format!("must be > 0, got {}", self.amplitude)));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(invalid("a", format!("must be > 0, got {}", self.a)));
        }
        Ok(())
    }

    /// The physical segment for this ε.
    pub fn realize(&self) -> Result<Segment> {
        self.validate()?;
        let eps = self.epsilon;
        let height = match self.exponent {
            SqueezeExponent::Resonant => -self.amplitude / (eps * eps),
            SqueezeExponent::Delta => self.amplitude / eps,
        };
        Segment::new(eps * self.a, height)
    }
}

/// Which side of the B-layer the prewell sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    /// Prewell in front of the B-layer (emitter side).
    Wb,
    /// Prewell behind the B-layer (collector side).
    Bw,
}

/// Squeezed prewell, free gap `ρ` and a B-layer of arbitrary profile.
#[derive(Debug, Clone, PartialEq)]
pub struct BilayerSpec {
    pub prewell: SqueezeSpec,
    pub gap_rho: f64,
    pub b_layer: PotentialProfile,
    pub ordering: Ordering,
}

impl BilayerSpec {
    pub fn validate(&self) -> Result<()> {
        self.prewell.validate()?;
        if self.prewell.exponent != SqueezeExponent::Resonant {
            return Err(invalid("prewell", "the prewell must use the ν = 2 scaling"));
        }
        if !(self.gap_rho.is_finite() && self.gap_rho > 0.0) {
            return Err(invalid(
                "gap_rho",
                format!("must be > 0, got {}", self.gap_rho),
            ));
        }
        Ok(())
    }

    /// The composed structure as a single segment list, left to right.
    pub fn profile(&self) -> Result<PotentialProfile> {
        self.validate()?;
        let well = self.prewell.realize()?;
        let gap = Segment::gap(self.gap_rho)?;
        let mut out = PotentialProfile::default();
        match self.ordering {
            Ordering::Wb => {
                out.push(well);
                out.push(gap);
                out.extend(&self.b_layer);
            }
            Ordering::Bw => {
                out.extend(&self.b_layer);
                out.push(gap);
                out.push(well);
            }
        }
        Ok(out)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        let mut spec = self.clone();
        spec.prewell.epsilon = epsilon;
        spec
    }

    pub fn with_a(&self, a: f64) -> Self {
        let mut spec = self.clone();
        spec.prewell.a = a;
        spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realize_examples() {
        let s = SqueezeSpec::well(0.524928, 4.0, 1.0).realize().unwrap();
        assert_eq!(
            s,
            Segment {
                width: 4.0,
                height: -0.524928
            }
        );

        let s = SqueezeSpec::well(0.524928, 4.0, 0.1).realize().unwrap();
        assert!((s.width - 0.4).abs() < 1e-15);
        assert!((s.height + 52.4928).abs() < 1e-11);

        let s = SqueezeSpec::delta_barrier(0.524928, 4.0, 0.01)
            .realize()
            .unwrap();
        assert!((s.width - 0.04).abs() < 1e-15);
        assert!((s.height - 52.4928).abs() < 1e-11);
    }

    #[test]
    fn realize_rejects_bad_input() {
        assert!(SqueezeSpec::well(0.5, 4.0, 0.0).realize().is_err());
        assert!(SqueezeSpec::well(0.5, 4.0, -0.1).realize().is_err());
        assert!(SqueezeSpec::well(0.0, 4.0, 0.1).realize().is_err());
        assert!(SqueezeExponent::from_nu(3).is_err());
        assert_eq!(
            SqueezeExponent::from_nu(2).unwrap(),
            SqueezeExponent::Resonant
        );
    }

    #[test]
    fn squeeze_scaling_laws() {
        let (d, a) = (0.524928_f64, 4.0);
        for &eps in &[1.0, 0.1, 0.01, 0.001] {
            let w = SqueezeSpec::well(d, a, eps).realize().unwrap();
            assert!((w.width * w.height.abs() * eps - d * a).abs() < 1e-12 * d * a);
            assert!((w.width * w.height.abs().sqrt() - d.sqrt() * a).abs() < 1e-12);

            let b = SqueezeSpec::delta_barrier(d, a, eps).realize().unwrap();
            assert!((b.width * b.height - d * a).abs() < 1e-12);
        }
    }

    #[test]
    fn slabify_constant_field() {
        let one = slabify(|_| -0.5, 0.0, 7.0, 1).unwrap();
        assert_eq!(
            one.segments(),
            &[Segment {
                width: 7.0,
                height: -0.5
            }]
        );
        let ten = slabify(|_| -0.5, 0.0, 7.0, 10).unwrap();
        assert_eq!(ten.segments().len(), 10);
        for s in ten.segments() {
            assert!((s.width - 0.7).abs() < 1e-15);
            assert_eq!(s.height, -0.5);
        }
    }

    #[test]
    fn slabify_is_exact_for_aligned_steps() {
        let f = |x: f64| {
            if x < 2.0 {
                -1.25
            } else if x < 3.0 {
                0.75
            } else {
                0.0
            }
        };
        let p = slabify(f, 0.0, 4.0, 8).unwrap();
        let heights: Vec<f64> = p.segments().iter().map(|s| s.height).collect();
        assert_eq!(
            heights,
            vec![-1.25, -1.25, -1.25, -1.25, 0.75, 0.75, 0.0, 0.0]
        );
    }

    #[test]
    fn slabify_rejects_bad_input() {
        assert!(slabify(|_| 0.0, 0.0, 1.0, 0).is_err());
        assert!(slabify(|_| 0.0, 1.0, 1.0, 4).is_err());
        assert!(slabify(|x| 1.0 / (x - 0.5), 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn profile_json_round_trip() {
        let units = UnitSystem::default();
        let text =
            r#"{"segments":[{"width_nm":5,"height_ev":0.1},{"width_nm":2.5,"height_ev":-0.2}]}"#;
        let p = PotentialProfile::from_json(text, &units).unwrap();
        assert_eq!(p.segments().len(), 2);
        assert!((p.segments()[0].height - 0.262464).abs() < 1e-15);
        let back = ProfileFile::from_profile(&p, &units);
        assert!((back.segments[1].height_ev + 0.2).abs() < 1e-15);

        assert!(PotentialProfile::from_json(r#"{"segments":[]}"#, &units).is_err());
        assert!(PotentialProfile::from_json(
            r#"{"segments":[{"width_nm":-1,"height_ev":0}]}"#,
            &units
        )
        .is_err());
        assert!(PotentialProfile::from_json(r#"{"layers":[]}"#, &units).is_err());
    }

    #[test]
    fn bilayer_profile_ordering() {
        let spec = BilayerSpec {
            prewell: SqueezeSpec::well(0.5, 4.0, 0.1),
            gap_rho: 10.0,
            b_layer: PotentialProfile::rectangle(5.0, 0.26).unwrap(),
            ordering: Ordering::Wb,
        };
        let wb = spec.profile().unwrap();
        assert!(wb.segments()[0].height < 0.0);
        assert_eq!(wb.segments()[1].height, 0.0);
        let bw = BilayerSpec {
            ordering: Ordering::Bw,
            ..spec.clone()
        }
        .profile()
        .unwrap();
        assert_eq!(bw.segments()[0].height, 0.26);
        assert_eq!(bw.mirrored(), wb);

        let bad = BilayerSpec {
            gap_rho: 0.0,
            ..spec
        };
        assert!(bad.profile().is_err());
    }
}
