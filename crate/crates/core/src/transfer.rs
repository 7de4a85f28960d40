//! Real 2×2 transfer matrices mapping `(ψ, ψ')` from the left edge of a
//! region to its right edge.

use std::ops::Mul;

use crate::error::{Error, Result};
use crate::potential::{BilayerSpec, Ordering, PotentialProfile, Segment};
use crate::units::Energy;

/// Below this `|E - V|` (nm⁻²) the segment matrix is evaluated by series.
pub const BRANCH_THRESHOLD: f64 = 1e-12;

/// Largest evanescent argument `p·l` accepted before reporting saturation.
pub const SATURATION_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub l11: f64,
    pub l12: f64,
    pub l21: f64,
    pub l22: f64,
}

impl TransferMatrix {
    pub const IDENTITY: Self = Self {
        l11: 1.0,
        l12: 0.0,
        l21: 0.0,
        l22: 1.0,
    };

    pub fn new(l11: f64, l12: f64, l21: f64, l22: f64) -> Self {
        Self { l11, l12, l21, l22 }
    }

    /// Determinant, evaluated with Kahan's fused 2×2 scheme.
    pub fn det(&self) -> f64 {
        let w = self.l12 * self.l21;
        let e = (-self.l12).mul_add(self.l21, w);
        let f = self.l11.mul_add(self.l22, -w);
        f + e
    }

    pub fn trace(&self) -> f64 {
        self.l11 + self.l22
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse(&self) -> Self {
        let det = self.det();
        Self {
            l11: self.l22 / det,
            l12: -self.l12 / det,
            l21: -self.l21 / det,
            l22: self.l11 / det,
        }
    }

    /// Matrix of the spatially mirrored region (diagonal entries swapped).
    pub fn mirrored(&self) -> Self {
        Self {
            l11: self.l22,
            l12: self.l12,
            l21: self.l21,
            l22: self.l11,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.l11
            .abs()
            .max(self.l12.abs())
            .max(self.l21.abs())
            .max(self.l22.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.l11.is_finite() && self.l12.is_finite() && self.l21.is_finite() && self.l22.is_finite()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.l11 - other.l11).abs() <= tol
            && (self.l12 - other.l12).abs() <= tol
            && (self.l21 - other.l21).abs() <= tol
            && (self.l22 - other.l22).abs() <= tol
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: Self) -> Self {
        Self {
            l11: self.l11 * rhs.l11 + self.l12 * rhs.l21,
            l12: self.l11 * rhs.l12 + self.l12 * rhs.l22,
            l21: self.l21 * rhs.l11 + self.l22 * rhs.l21,
            l22: self.l21 * rhs.l12 + self.l22 * rhs.l22,
        }
    }
}

/// Transfer matrix of a constant-potential segment at energy `energy`.
///
/// With `q² = E - V` the matrix is
/// `[[cos ql, sin(ql)/q], [-q sin ql, cos ql]]`; below the barrier the
/// hyperbolic form in `p = √(V - E)` is used so that every entry stays real.
pub fn segment_matrix(segment: &Segment, energy: Energy) -> Result<TransferMatrix> {
    let l = segment.width;
    let q2 = energy.value() - segment.height;
    if !q2.is_finite() {
        return Err(Error::NonFinite("segment energy"));
    }
    if q2.abs() < BRANCH_THRESHOLD {
        return Ok(series_matrix(q2, l));
    }
    if q2 > 0.0 {
        let q = q2.sqrt();
        let (s, c) = (q * l).sin_cos();
        Ok(TransferMatrix::new(c, s / q, -q * s, c))
    } else {
        let p = (-q2).sqrt();
        let arg = p * l;
        if arg > SATURATION_LIMIT {
            return Err(Error::Saturation {
                argument: arg,
                limit: SATURATION_LIMIT,
            });
        }
        let (sh, ch) = (arg.sinh(), arg.cosh());
        Ok(TransferMatrix::new(ch, sh / p, p * sh, ch))
    }
}

/// Six-term Taylor expansion in `q²` around the `E = V` crossing.
fn series_matrix(q2: f64, l: f64) -> TransferMatrix {
    // x = -q² l², so cos(ql) = Σ xⁿ/(2n)! and sin(ql)/q = l Σ xⁿ/(2n+1)!.
    let x = -q2 * l * l;
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut term_even = 1.0;
    let mut term_odd = 1.0;
    for n in 0..6 {
        even += term_even;
        odd += term_odd;
        let m = 2.0 * n as f64;
        term_even *= x / ((m + 1.0) * (m + 2.0));
        term_odd *= x / ((m + 2.0) * (m + 3.0));
    }
    let sinc = l * odd;
    TransferMatrix::new(even, sinc, -q2 * sinc, even)
}

/// Product of matrices given in physical order (left layer first): the
/// first element ends up as the rightmost factor.
pub fn compose(mats: &[TransferMatrix]) -> Result<TransferMatrix> {
    let (first, rest) = mats
        .split_first()
        .ok_or_else(|| crate::error::invalid("mats", "cannot compose an empty list"))?;
    let product = rest.iter().fold(*first, |acc, m| *m * acc);
    if !product.is_finite() {
        return Err(Error::NonFinite("composed transfer matrix"));
    }
    Ok(product)
}

/// Matrix of a whole profile. An empty profile maps to the identity.
pub fn profile_matrix(profile: &PotentialProfile, energy: Energy) -> Result<TransferMatrix> {
    if profile.is_empty() {
        return Ok(TransferMatrix::IDENTITY);
    }
    let mats = profile
        .segments()
        .iter()
        .map(|s| segment_matrix(s, energy))
        .collect::<Result<Vec<_>>>()?;
    compose(&mats)
}

/// Matrix with its exponential growth factored out: the true matrix is
/// `matrix · e^growth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMatrix {
    pub matrix: TransferMatrix,
    pub growth: f64,
}

/// [`segment_matrix`] without the saturation limit; evanescent segments
/// carry `e^{-pl}` inside the matrix.
pub fn scaled_segment_matrix(segment: &Segment, energy: Energy) -> Result<ScaledMatrix> {
    let q2 = energy.value() - segment.height;
    if !(q2 <= -BRANCH_THRESHOLD) {
        return Ok(ScaledMatrix {
            matrix: segment_matrix(segment, energy)?,
            growth: 0.0,
        });
    }
    let p = (-q2).sqrt();
    let arg = p * segment.width;
    let decay = (-2.0 * arg).exp();
    // e^{-x} cosh x and e^{-x} sinh x
    let (ch, sh) = (0.5 * (1.0 + decay), -0.5 * (-2.0 * arg).exp_m1());
    Ok(ScaledMatrix {
        matrix: TransferMatrix::new(ch, sh / p, p * sh, ch),
        growth: arg,
    })
}

/// Scaled product over a profile; the stored matrix is renormalized so its
/// largest entry stays near one.
pub fn scaled_profile_matrix(profile: &PotentialProfile, energy: Energy) -> Result<ScaledMatrix> {
    let mut acc = ScaledMatrix {
        matrix: TransferMatrix::IDENTITY,
        growth: 0.0,
    };
    for s in profile.segments() {
        let m = scaled_segment_matrix(s, energy)?;
        let mut product = m.matrix * acc.matrix;
        let mut growth = acc.growth + m.growth;
        let norm = product.max_abs();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NonFinite("scaled transfer matrix"));
        }
        if !(1e-100..=1e100).contains(&norm) {
            product = TransferMatrix::new(
                product.l11 / norm,
                product.l12 / norm,
                product.l21 / norm,
                product.l22 / norm,
            );
            growth += norm.ln();
        }
        acc = ScaledMatrix {
            matrix: product,
            growth,
        };
    }
    Ok(acc)
}

/// `Λ_b Λ₀ Λ_w` for the WB ordering, `Λ_w Λ₀ Λ_b` for BW.
pub fn bilayer_matrix(spec: &BilayerSpec, energy: Energy) -> Result<TransferMatrix> {
    spec.validate()?;
    let w = segment_matrix(&spec.prewell.realize()?, energy)?;
    let gap = segment_matrix(&Segment::gap(spec.gap_rho)?, energy)?;
    let b = profile_matrix(&spec.b_layer, energy)?;
    match spec.ordering {
        Ordering::Wb => compose(&[w, gap, b]),
        Ordering::Bw => compose(&[b, gap, w]),
    }
}

/// Explicit entries of the well–gap–B product for a real prewell wave
/// number `q`, prewell width `l`, free wave number `k` and gap `ρ`.
///
/// The BW matrix follows from the WB entries by exchanging `λ₁₁` and `λ₂₂`.
pub fn bilayer_closed_form(
    b: &TransferMatrix,
    q: f64,
    l: f64,
    k: f64,
    rho: f64,
    ordering: Ordering,
) -> TransferMatrix {
    match ordering {
        Ordering::Wb => wb_entries(b, q, l, k, rho),
        Ordering::Bw => {
            let with_l11 = wb_entries(&TransferMatrix { l22: b.l11, ..*b }, q, l, k, rho);
            let with_l22 = wb_entries(&TransferMatrix { l11: b.l22, ..*b }, q, l, k, rho);
            TransferMatrix::new(with_l11.l22, with_l22.l12, with_l11.l21, with_l22.l11)
        }
    }
}

fn wb_entries(b: &TransferMatrix, q: f64, l: f64, k: f64, rho: f64) -> TransferMatrix {
    let (sq, cq) = (q * l).sin_cos();
    let (sk, ck) = (k * rho).sin_cos();
    let first = cq * ck - (q / k) * sq * sk;
    let second = q * sq * ck + k * cq * sk;
    let third = sq / q * ck + cq * sk / k;
    let fourth = cq * ck - (k / q) * sq * sk;
    TransferMatrix::new(
        b.l11 * first - b.l12 * second,
        b.l11 * third + b.l12 * fourth,
        b.l21 * first - b.l22 * second,
        b.l21 * third + b.l22 * fourth,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::SqueezeSpec;
    use crate::units::UnitSystem;
    use proptest::prelude::*;

    fn seg(w: f64, h: f64) -> Segment {
        Segment::new(w, h).unwrap()
    }

    #[test]
    fn free_segment_matches_plane_waves() {
        let (l, k) = (3.7_f64, 0.42_f64);
        let m = segment_matrix(&seg(l, 0.0), Energy::new(k * k)).unwrap();
        let want = TransferMatrix::new(
            (k * l).cos(),
            (k * l).sin() / k,
            -k * (k * l).sin(),
            (k * l).cos(),
        );
        assert!(m.approx_eq(&want, 1e-15));
    }

    #[test]
    fn zero_wave_number_limit() {
        let m = segment_matrix(&seg(2.5, -0.3), Energy::new(-0.3)).unwrap();
        assert!(m.approx_eq(&TransferMatrix::new(1.0, 2.5, 0.0, 1.0), 1e-15));
    }

    #[test]
    fn continuous_across_branch_point() {
        let s = seg(4.0, 0.2);
        let at = segment_matrix(&s, Energy::new(0.2)).unwrap();
        for delta in [1e-9, -1e-9] {
            let m = segment_matrix(&s, Energy::new(0.2 + delta)).unwrap();
            // First-order change is of size |δ|·l²/2.
            assert!(m.approx_eq(&at, 1e-7), "{delta}: {m:?} vs {at:?}");
        }
        // Series and closed form agree just inside and outside the threshold.
        let inside = series_matrix(2e-12, 4.0);
        let q = 2e-12_f64.sqrt();
        let closed = TransferMatrix::new(
            (q * 4.0).cos(),
            (q * 4.0).sin() / q,
            -q * (q * 4.0).sin(),
            (q * 4.0).cos(),
        );
        assert!(inside.approx_eq(&closed, 1e-14));
    }

    #[test]
    fn scaled_product_matches_plain_product() {
        let p = PotentialProfile::new(vec![
            seg(0.3, -40.0),
            seg(2.0, 0.0),
            seg(1.5, 0.7),
            seg(4.0, -1.3),
        ]);
        for &e in &[-2.0, -0.5, -1e-13, 0.2, 3.0] {
            let plain = profile_matrix(&p, Energy::new(e)).unwrap();
            let scaled = scaled_profile_matrix(&p, Energy::new(e)).unwrap();
            let f = scaled.growth.exp();
            let back = TransferMatrix::new(
                scaled.matrix.l11 * f,
                scaled.matrix.l12 * f,
                scaled.matrix.l21 * f,
                scaled.matrix.l22 * f,
            );
            assert!(
                back.approx_eq(&plain, 1e-11 * plain.max_abs()),
                "{e}: {back:?} vs {plain:?}"
            );
        }
        // Far beyond saturation the scaled form stays finite.
        let thick = PotentialProfile::new(vec![seg(100.0, 100.0), seg(100.0, 100.0)]);
        let m = scaled_profile_matrix(&thick, Energy::new(-1.0)).unwrap();
        assert!(m.matrix.is_finite() && m.growth > 1000.0);
    }

    #[test]
    fn saturation_is_reported() {
        let err = segment_matrix(&seg(100.0, 100.0), Energy::new(-1.0)).unwrap_err();
        assert!(matches!(err, Error::Saturation { .. }));
        assert!(segment_matrix(&seg(1.0, 0.0), Energy::new(f64::NAN)).is_err());
    }

    #[test]
    fn compose_order_and_inverse() {
        let a = segment_matrix(&seg(1.3, 0.4), Energy::new(0.1)).unwrap();
        let b = segment_matrix(&seg(0.7, -2.0), Energy::new(0.1)).unwrap();
        assert_eq!(compose(&[a]).unwrap(), a);
        assert_eq!(compose(&[a, b]).unwrap(), b * a);
        assert!(compose(&[a, a.inverse()])
            .unwrap()
            .approx_eq(&TransferMatrix::IDENTITY, 1e-12));
        assert!(compose(&[]).is_err());
    }

    #[test]
    fn closed_form_matches_product_at_reference_point() {
        // q = 1, l = 1, k = 0.5, ρ = 2 and a barrier as the B-layer.
        let b = segment_matrix(&seg(5.0, 0.262464), Energy::new(0.25)).unwrap();
        let w = TransferMatrix::new(1f64.cos(), 1f64.sin(), -1f64.sin(), 1f64.cos());
        let gap = segment_matrix(&seg(2.0, 0.0), Energy::new(0.25)).unwrap();
        let generic = compose(&[w, gap, b]).unwrap();
        let closed = bilayer_closed_form(&b, 1.0, 1.0, 0.5, 2.0, Ordering::Wb);
        assert!(generic.approx_eq(&closed, 1e-12), "{generic:?} {closed:?}");
        let generic_bw = compose(&[b, gap, w]).unwrap();
        let closed_bw = bilayer_closed_form(&b, 1.0, 1.0, 0.5, 2.0, Ordering::Bw);
        assert!(generic_bw.approx_eq(&closed_bw, 1e-12));
    }

    #[test]
    fn bilayer_dual_path_at_barrier_parameters() {
        let u = UnitSystem::default();
        let d = u.to_internal(0.2).value();
        let energy = u.to_internal(0.02);
        let barrier = PotentialProfile::rectangle(5.0, u.to_internal(0.1).value()).unwrap();
        for ordering in [Ordering::Wb, Ordering::Bw] {
            let spec = BilayerSpec {
                prewell: SqueezeSpec::well(d, 4.0, 1.0),
                gap_rho: 10.0,
                b_layer: barrier.clone(),
                ordering,
            };
            let generic = bilayer_matrix(&spec, energy).unwrap();
            let b = profile_matrix(&barrier, energy).unwrap();
            let q = (energy.value() + d).sqrt();
            let closed = bilayer_closed_form(&b, q, 4.0, energy.value().sqrt(), 10.0, ordering);
            assert!(generic.approx_eq(&closed, 1e-12), "{ordering:?}");
        }
    }

    #[test]
    fn wb_and_bw_swap_diagonals_for_symmetric_b() {
        let u = UnitSystem::default();
        let energy = u.to_internal(0.02);
        let spec = BilayerSpec {
            prewell: SqueezeSpec::well(u.to_internal(0.2).value(), 3.3, 0.3),
            gap_rho: 4.0,
            b_layer: PotentialProfile::rectangle(5.0, u.to_internal(0.1).value()).unwrap(),
            ordering: Ordering::Wb,
        };
        let wb = bilayer_matrix(&spec, energy).unwrap();
        let bw = bilayer_matrix(
            &BilayerSpec {
                ordering: Ordering::Bw,
                ..spec
            },
            energy,
        )
        .unwrap();
        assert!(bw.approx_eq(&wb.mirrored(), 1e-12));
    }

    #[test]
    fn empty_layers_reduce_to_gap_matrix() {
        let k = 0.3_f64;
        let energy = Energy::new(k * k);
        let gap = profile_matrix(&PotentialProfile::rectangle(7.0, 0.0).unwrap(), energy).unwrap();
        let want = TransferMatrix::new(
            (k * 7.0).cos(),
            (k * 7.0).sin() / k,
            -k * (k * 7.0).sin(),
            (k * 7.0).cos(),
        );
        assert!(gap.approx_eq(&want, 1e-14));
        assert_eq!(
            profile_matrix(&PotentialProfile::default(), energy).unwrap(),
            TransferMatrix::IDENTITY
        );
    }

    fn any_segment() -> impl Strategy<Value = Segment> {
        (0.05f64..2.0, -1.5f64..1.0).prop_map(|(w, h)| seg(w, h))
    }

    proptest! {
        #[test]
        fn unit_determinant(s in any_segment(), e in -1.0f64..2.0) {
            let m = segment_matrix(&s, Energy::new(e)).unwrap();
            prop_assert!((m.det() - 1.0).abs() < 1e-12 * m.max_abs().max(1.0).powi(2));
        }

        #[test]
        fn associative(a in any_segment(), b in any_segment(), c in any_segment(), e in 0.01f64..2.0) {
            let e = Energy::new(e);
            let (ma, mb, mc) = (
                segment_matrix(&a, e).unwrap(),
                segment_matrix(&b, e).unwrap(),
                segment_matrix(&c, e).unwrap(),
            );
            let flat = compose(&[ma, mb, mc]).unwrap();
            let nested = compose(&[compose(&[ma, mb]).unwrap(), mc]).unwrap();
            prop_assert!(flat.approx_eq(&nested, 1e-12 * flat.max_abs().max(1.0)));
        }
    }
}
