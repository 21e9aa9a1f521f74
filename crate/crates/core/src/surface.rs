//! Laplace-Beltrami eigenstructure of the sphere `|x| = R` and the coefficient
//! algebra of tangential fields in the basis `{grad Y_lm, curl Y_lm}`.
//!
//! Scalar eigenvalues are `mu(l) = l(l+1)/R^2` with multiplicity `2l+1`.
//! A tangential field is stored as a sparse map from [`ModeIndex`] to its
//! coefficient in the orthonormal vector basis, so the `L^2_t` pairing is the
//! plain coefficient sum and every operator here acts mode by mode.
//!
//! Vector modes are flattened by nondecreasing `mu`, ties broken by
//! `(l, m, family)` with `Grad < Curl`. The divergence-free subspace uses its
//! own flat index over `Curl` modes only, which is what the truncation
//! `I^(M)` counts.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("degree {degree} outside 0..={l_max}")]
    DegreeOutOfRange { degree: usize, l_max: usize },
    #[error("order {order} invalid for degree {degree}")]
    OrderOutOfRange { degree: usize, order: i32 },
    #[error("coefficient at degree 0 has no vector mode")]
    ZeroModePresent,
    #[error("fields live on different spectra")]
    SpectrumMismatch,
    #[error("field has gradient components; not divergence free")]
    NotDivergenceFree,
    #[error("need mu(L_max) > e^2; largest degree is {l_max} with mu = {mu}")]
    SpectrumTooSmall { l_max: usize, mu: f64 },
    #[error("invalid spectrum: radius {radius}, l_max {l_max}")]
    InvalidSpectrum { radius: f64, l_max: usize },
}

/// Truncated Laplace-Beltrami spectrum of a sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSpectrum {
    radius: f64,
    l_max: usize,
}

impl SurfaceSpectrum {
    pub fn new(radius: f64, l_max: usize) -> Result<Self, SurfaceError> {
        if !(radius.is_finite() && radius > 0.0) || l_max < 1 {
            return Err(SurfaceError::InvalidSpectrum { radius, l_max });
        }
        Ok(Self { radius, l_max })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn lb_eigenvalue(&self, l: usize) -> Result<f64, SurfaceError> {
        if l > self.l_max {
            return Err(SurfaceError::DegreeOutOfRange {
                degree: l,
                l_max: self.l_max,
            });
        }
        Ok(mu(self.radius, l))
    }

    /// Number of divergence-free (`Curl`) modes with degree `1..=l_max`.
    pub fn curl_mode_count(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1) - 1
    }

    /// All vector modes in flat order.
    pub fn modes(&self) -> impl Iterator<Item = ModeIndex> + '_ {
        (1..=self.l_max).flat_map(|l| {
            let l_i = l as i32;
            (-l_i..=l_i).flat_map(move |m| {
                [ModeFamily::Grad, ModeFamily::Curl]
                    .into_iter()
                    .map(move |family| ModeIndex { l, m, family })
            })
        })
    }

    /// Degree owning the `Curl` mode with flat index `index`.
    pub fn curl_degree_at(&self, index: usize) -> Option<usize> {
        if index >= self.curl_mode_count() {
            return None;
        }
        // indices l^2 - 1 ..= (l+1)^2 - 2 belong to degree l
        let mut l = ((index + 1) as f64).sqrt().floor() as usize;
        while (l + 1) * (l + 1) - 1 <= index {
            l += 1;
        }
        while l * l > index + 1 {
            l -= 1;
        }
        Some(l)
    }
}

/// `l(l+1)/R^2`.
pub fn mu(radius: f64, l: usize) -> f64 {
    let lf = l as f64;
    lf * (lf + 1.0) / (radius * radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeFamily {
    Grad,
    Curl,
}

/// Vector spherical harmonic label. `Ord` is the flattening order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub l: usize,
    pub m: i32,
    pub family: ModeFamily,
}

impl ModeIndex {
    pub fn new(l: usize, m: i32, family: ModeFamily) -> Result<Self, SurfaceError> {
        if m.unsigned_abs() as usize > l {
            return Err(SurfaceError::OrderOutOfRange {
                degree: l,
                order: m,
            });
        }
        Ok(Self { l, m, family })
    }

    pub fn grad(l: usize, m: i32) -> Self {
        Self::new(l, m, ModeFamily::Grad).expect("valid order")
    }

    pub fn curl(l: usize, m: i32) -> Self {
        Self::new(l, m, ModeFamily::Curl).expect("valid order")
    }

    /// Position in the flattened enumeration of all vector modes.
    pub fn flat_index(&self) -> usize {
        let before = 2 * (self.l * self.l - 1);
        let within = 2 * (self.m + self.l as i32) as usize;
        before + within + usize::from(self.family == ModeFamily::Curl)
    }

    /// Position among `Curl` modes only; `None` for gradient modes.
    pub fn curl_flat_index(&self) -> Option<usize> {
        (self.family == ModeFamily::Curl && self.l >= 1)
            .then(|| self.l * self.l - 1 + (self.m + self.l as i32) as usize)
    }
}

/// `xi = sum xi1 grad Y + xi2 curl Y`, truncated at the spectrum's `l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentialField {
    spectrum: SurfaceSpectrum,
    coefficients: BTreeMap<ModeIndex, Complex64>,
}

impl TangentialField {
    pub fn zero(spectrum: SurfaceSpectrum) -> Self {
        Self {
            spectrum,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn spectrum(&self) -> &SurfaceSpectrum {
        &self.spectrum
    }

    pub fn set(&mut self, mode: ModeIndex, value: Complex64) -> Result<(), SurfaceError> {
        if mode.l > self.spectrum.l_max {
            return Err(SurfaceError::DegreeOutOfRange {
                degree: mode.l,
                l_max: self.spectrum.l_max,
            });
        }
        self.coefficients.insert(mode, value);
        Ok(())
    }

    pub fn with(mut self, mode: ModeIndex, value: Complex64) -> Result<Self, SurfaceError> {
        self.set(mode, value)?;
        Ok(self)
    }

    pub fn get(&self, mode: ModeIndex) -> Complex64 {
        self.coefficients.get(&mode).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        self.coefficients.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_divergence_free(&self) -> bool {
        self.coefficients
            .iter()
            .all(|(k, v)| k.family == ModeFamily::Curl || *v == Complex64::default())
    }

    fn mu(&self, l: usize) -> f64 {
        mu(self.spectrum.radius, l)
    }
}

/// `S_delta`: multiplies `Curl` coefficients by `mu^-delta`, drops the rest.
///
/// Panics if `delta` is negative or not finite.
pub fn apply_smoothing(delta: f64, field: &TangentialField) -> TangentialField {
    assert!(
        delta.is_finite() && delta >= 0.0,
        "smoothing parameter must be >= 0, got {delta}"
    );
    let mut out = TangentialField::zero(field.spectrum);
    for (mode, value) in field.iter() {
        if mode.l == 0 {
            continue;
        }
        let kept = match mode.family {
            ModeFamily::Grad => Complex64::default(),
            ModeFamily::Curl => value * field.mu(mode.l).powf(-delta),
        };
        out.coefficients.insert(mode, kept);
    }
    out
}

/// `I^(M)`: keeps `Curl` coefficients with flat `Curl` index below `rank`.
pub fn truncate(rank: usize, field: &TangentialField) -> TangentialField {
    let mut out = TangentialField::zero(field.spectrum);
    for (mode, value) in field.iter() {
        let keep = mode.curl_flat_index().is_some_and(|i| i < rank);
        out.coefficients
            .insert(mode, if keep { value } else { Complex64::default() });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SobolevSpace {
    /// `H^s_t`
    Ht(f64),
    /// `H^s(div^0)`; same weights as `Ht(s)`, gradient part must vanish.
    HdivZero(f64),
    /// `H^{-1/2}(div)`
    HdivMinusHalf,
    /// `H^{-1/2}(curl)`
    HcurlMinusHalf,
}

impl SobolevSpace {
    /// Squared-norm weights `(w_grad, w_curl)` at eigenvalue `mu`.
    pub fn weights(&self, mu: f64) -> (f64, f64) {
        match *self {
            SobolevSpace::Ht(s) | SobolevSpace::HdivZero(s) => {
                let w = mu.powf(s + 1.0);
                (w, w)
            }
            SobolevSpace::HdivMinusHalf => (mu.powf(1.5), mu.sqrt()),
            SobolevSpace::HcurlMinusHalf => (mu.sqrt(), mu.powf(1.5)),
        }
    }
}

pub fn sobolev_norm(field: &TangentialField, space: SobolevSpace) -> Result<f64, SurfaceError> {
    if matches!(space, SobolevSpace::HdivZero(_)) && !field.is_divergence_free() {
        return Err(SurfaceError::NotDivergenceFree);
    }
    let mut sum = 0.0;
    for (mode, value) in field.iter() {
        if mode.l == 0 {
            return Err(SurfaceError::ZeroModePresent);
        }
        let (wg, wc) = space.weights(field.mu(mode.l));
        sum += value.norm_sqr()
            * match mode.family {
                ModeFamily::Grad => wg,
                ModeFamily::Curl => wc,
            };
    }
    Ok(sum.sqrt())
}

/// `<xi, eta>` = `sum xi_m conj(eta_m)` over the orthonormal basis.
pub fn duality_pairing(
    xi: &TangentialField,
    eta: &TangentialField,
) -> Result<Complex64, SurfaceError> {
    if xi.spectrum != eta.spectrum {
        return Err(SurfaceError::SpectrumMismatch);
    }
    Ok(xi
        .iter()
        .map(|(mode, value)| value * eta.get(mode).conj())
        .sum())
}

/// Per-degree factor `|1 - mu^-delta| / sqrt(mu)` of `S_delta - S_0`.
pub fn smoothing_distance_factor(delta: f64, mu: f64) -> f64 {
    (1.0 - mu.powf(-delta)).abs() / mu.sqrt()
}

/// Norm of `S_delta - S_0` from the `H^1`-type to the `L^2`-type weights.
///
/// The factor is non-increasing once `mu > e^2`, so the maximum is attained
/// at or below the first such degree.
pub fn smoothing_distance_norm(
    delta: f64,
    spectrum: &SurfaceSpectrum,
) -> Result<f64, SurfaceError> {
    let threshold = std::f64::consts::E.powi(2);
    let l_star = (1..=spectrum.l_max)
        .find(|&l| mu(spectrum.radius, l) > threshold)
        .ok_or(SurfaceError::SpectrumTooSmall {
            l_max: spectrum.l_max,
            mu: mu(spectrum.radius, spectrum.l_max),
        })?;
    Ok((1..=l_star)
        .map(|l| smoothing_distance_factor(delta, mu(spectrum.radius, l)))
        .fold(0.0, f64::max))
}

/// Partial sums of `mu_m^-beta` over the flattened vector modes
/// (`2(2l+1)` terms per degree).
pub fn weyl_partial_sums(beta: f64, spectrum: &SurfaceSpectrum) -> Vec<f64> {
    let mut acc = 0.0;
    spectrum
        .modes()
        .map(|mode| {
            acc += mu(spectrum.radius, mode.l).powf(-beta);
            acc
        })
        .collect()
}
