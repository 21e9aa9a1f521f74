//! Radial Maxwell solves inside a radially layered ball.
//!
//! Separating `curl curl w - k^2 eps w = 0` in vector spherical harmonics
//! leaves, in each shell, the spherical Bessel equation with wavenumber
//! `kappa = k sqrt(eps_j)`. Writing `f` for the radial factor:
//!
//! * TE (`w = f(r) X_lm`, tangential trace along `curl_S Y`): `f` and
//!   `(r f)'` are continuous across interfaces.
//! * TM (`curl w = g(r) X_lm`, tangential trace along `grad_S Y`): `g` and
//!   `(r g)' / eps` are continuous.
//!
//! The core carries `j_l(kappa_1 r)` with coefficient one; every outer shell
//! carries `A j_l(kappa r) + B y_l(kappa r)`. Since
//! `d/dr [r j_l(kappa r)] = (x j_l)'(x)` at `x = kappa r`, the shell basis
//! matrix is `[[j, y], [(xj)', (xy)']]` with determinant `1/x`.

use num_complex::Complex64;
use thiserror::Error;

use crate::specfun::{cdiv, BesselKind, SpecFunError, SphericalBessel};

/// Relative size of `f(R)` below which a mode counts as resonant.
pub const RESONANCE_TOL: f64 = 1e-12;

/// Default relative wavenumber distance to a resonance that is still flagged.
pub const DEFAULT_WAVENUMBER_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadialError {
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
    #[error("wavenumber must be positive and finite, got {0}")]
    InvalidWavenumber(f64),
    #[error("degree must be >= 1")]
    ZeroDegree,
    #[error("degenerate boundary trace at l = {degree}")]
    DegenerateTrace { degree: usize },
    #[error("interior resonance at l = {degree}: f(R) = {value}, (rf)'(R) = {riccati}")]
    InteriorResonance {
        degree: usize,
        value: Complex64,
        riccati: Complex64,
    },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// Radially piecewise-constant permittivity on the ball `|x| < R`.
///
/// Shell `j` occupies `(r_{j-1}, r_j)` with `r_0 = 0`; the last radius is `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredMedium {
    radii: Vec<f64>,
    permittivities: Vec<Complex64>,
}

impl LayeredMedium {
    pub fn new(radii: Vec<f64>, permittivities: Vec<Complex64>) -> Result<Self, RadialError> {
        if radii.is_empty() || radii.len() != permittivities.len() {
            return Err(RadialError::InvalidMedium(format!(
                "{} radii for {} permittivities",
                radii.len(),
                permittivities.len()
            )));
        }
        let mut prev = 0.0;
        for &r in &radii {
            if !(r.is_finite() && r > prev) {
                return Err(RadialError::InvalidMedium(format!(
                    "radii must be positive and strictly increasing, got {radii:?}"
                )));
            }
            prev = r;
        }
        for eps in &permittivities {
            if !(eps.re.is_finite() && eps.im.is_finite()) || eps.re <= 0.0 || eps.im < 0.0 {
                return Err(RadialError::InvalidMedium(format!(
                    "permittivity {eps} needs Re > 0 and Im >= 0"
                )));
            }
        }
        Ok(Self {
            radii,
            permittivities,
        })
    }

    pub fn homogeneous(eps: Complex64, radius: f64) -> Result<Self, RadialError> {
        Self::new(vec![radius], vec![eps])
    }

    pub fn vacuum(radius: f64) -> Self {
        Self::homogeneous(Complex64::new(1.0, 0.0), radius).expect("valid vacuum ball")
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn permittivities(&self) -> &[Complex64] {
        &self.permittivities
    }

    pub fn outer_radius(&self) -> f64 {
        *self.radii.last().expect("non-empty")
    }

    pub fn shells(&self) -> impl Iterator<Item = (f64, f64, Complex64)> + '_ {
        let inner = std::iter::once(0.0).chain(self.radii.iter().copied());
        inner
            .zip(self.radii.iter().copied())
            .zip(self.permittivities.iter().copied())
            .map(|((a, b), e)| (a, b, e))
    }

    pub fn is_real(&self) -> bool {
        self.permittivities.iter().all(|e| e.im == 0.0)
    }

    pub fn is_absorbing(&self) -> bool {
        self.permittivities.iter().any(|e| e.im > 0.0)
    }

    pub fn is_vacuum(&self) -> bool {
        self.permittivities
            .iter()
            .all(|e| *e == Complex64::new(1.0, 0.0))
    }

    /// Same profile with an extra interface at `r` (no-op if already present).
    pub fn with_interface(&self, r: f64) -> Result<Self, RadialError> {
        if !(r > 0.0 && r < self.outer_radius()) {
            return Err(RadialError::InvalidMedium(format!(
                "interface {r} outside (0, R)"
            )));
        }
        if self.radii.contains(&r) {
            return Ok(self.clone());
        }
        let pos = self.radii.iter().position(|&x| x > r).expect("r < R");
        let mut radii = self.radii.clone();
        let mut eps = self.permittivities.clone();
        radii.insert(pos, r);
        eps.insert(pos, self.permittivities[pos]);
        Self::new(radii, eps)
    }

    /// Permittivity at radius `r` (interfaces belong to the inner shell).
    pub fn permittivity_at(&self, r: f64) -> Complex64 {
        let idx = self
            .radii
            .iter()
            .position(|&x| r <= x)
            .unwrap_or(self.radii.len() - 1);
        self.permittivities[idx]
    }

    /// Sorted union of both interface sets.
    fn merged_radii(&self, other: &Self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .radii
            .iter()
            .chain(other.radii.iter())
            .copied()
            .collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    }

    /// `sup |eps_1 - eps_0|` over the ball.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.merged_radii(other)
            .iter()
            .map(|&r| (self.permittivity_at(r) - other.permittivity_at(r)).norm())
            .fold(0.0, f64::max)
    }

    /// `(int_B |eps_1 - eps_0|^p dx)^(1/p)` for piecewise-constant profiles.
    pub fn lp_distance(&self, other: &Self, p: f64) -> f64 {
        let mut inner = 0.0;
        let mut acc = 0.0;
        for r in self.merged_radii(other) {
            let volume = 4.0 / 3.0 * std::f64::consts::PI * (r.powi(3) - inner * inner * inner);
            acc += volume
                * (self.permittivity_at(r) - other.permittivity_at(r))
                    .norm()
                    .powf(p);
            inner = r;
        }
        acc.powf(1.0 / p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Te,
    Tm,
}

/// Radial data of the regular solution at `r = R`.
///
/// For TE, `value_at_r = f(R)` and `riccati_at_r = (r f)'(R)` of the electric
/// radial factor. For TM they refer to the magnetic radial factor `g`, taken
/// from inside the outermost shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTrace {
    pub value_at_r: Complex64,
    pub riccati_at_r: Complex64,
    pub degree: usize,
    pub polarization: Polarization,
}

/// `[[j(x), y(x)], [(xj)'(x), (xy)'(x)]]` at `x = kappa r`.
pub fn shell_basis(
    bessel: &SphericalBessel,
    kappa: Complex64,
    r: f64,
    l: usize,
) -> Result<[[Complex64; 2]; 2], SpecFunError> {
    let x = kappa * r;
    let pair = bessel.pair(l, x)?;
    // (x f)' = f + x f'
    Ok([
        [pair.j, pair.y],
        [pair.j + x * pair.dj, pair.y + x * pair.dy],
    ])
}

pub fn determinant(m: &[[Complex64; 2]; 2]) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub(crate) fn validate_inputs(k: f64, l: usize) -> Result<(), RadialError> {
    if !(k.is_finite() && k > 0.0) {
        return Err(RadialError::InvalidWavenumber(k));
    }
    if l == 0 {
        return Err(RadialError::ZeroDegree);
    }
    Ok(())
}

fn radial_trace(
    med: &LayeredMedium,
    k: f64,
    l: usize,
    polarization: Polarization,
) -> Result<BoundaryTrace, RadialError> {
    validate_inputs(k, l)?;
    let bessel = SphericalBessel::default();
    let mut shells = med.shells();
    let (_, r1, eps1) = shells.next().expect("non-empty");
    let kappa1 = k * eps1.sqrt();
    let x1 = kappa1 * r1;
    let mut value = bessel.eval(BesselKind::J, l, x1)?;
    let mut riccati = bessel.riccati_derivative(BesselKind::J, l, x1)?;
    let core_scale = value.norm().max(riccati.norm());
    let mut eps_prev = eps1;

    for (r_in, r_out, eps) in shells {
        if polarization == Polarization::Tm {
            riccati *= eps / eps_prev;
        }
        let kappa = k * eps.sqrt();
        let at_in = shell_basis(&bessel, kappa, r_in, l)?;
        // inverse of the basis matrix is [[d, -b], [-c, a]] * x
        let x_in = kappa * r_in;
        let a = (at_in[1][1] * value - at_in[0][1] * riccati) * x_in;
        let b = (at_in[0][0] * riccati - at_in[1][0] * value) * x_in;
        let at_out = shell_basis(&bessel, kappa, r_out, l)?;
        value = a * at_out[0][0] + b * at_out[0][1];
        riccati = a * at_out[1][0] + b * at_out[1][1];
        eps_prev = eps;
    }

    let scale = value.norm().max(riccati.norm());
    if !scale.is_finite() || scale <= 1e-30 * core_scale || scale == 0.0 {
        return Err(RadialError::DegenerateTrace { degree: l });
    }
    Ok(BoundaryTrace {
        value_at_r: value,
        riccati_at_r: riccati,
        degree: l,
        polarization,
    })
}

/// Regular TE solution data at `R`, core coefficient one.
pub fn te_radial_trace(
    med: &LayeredMedium,
    k: f64,
    l: usize,
) -> Result<BoundaryTrace, RadialError> {
    radial_trace(med, k, l, Polarization::Te)
}

/// Regular TM solution data at `R`, core coefficient one.
pub fn tm_radial_trace(
    med: &LayeredMedium,
    k: f64,
    l: usize,
) -> Result<BoundaryTrace, RadialError> {
    radial_trace(med, k, l, Polarization::Tm)
}

/// `Z_l = (r f)'(R) / (R f(R))` of the TE solution.
pub fn te_impedance(med: &LayeredMedium, k: f64, l: usize) -> Result<Complex64, RadialError> {
    let trace = te_radial_trace(med, k, l)?;
    impedance_from_trace(&trace, med.outer_radius())
}

pub fn impedance_from_trace(trace: &BoundaryTrace, radius: f64) -> Result<Complex64, RadialError> {
    if trace.value_at_r.norm() < RESONANCE_TOL * trace.riccati_at_r.norm() {
        return Err(RadialError::InteriorResonance {
            degree: trace.degree,
            value: trace.value_at_r,
            riccati: trace.riccati_at_r,
        });
    }
    Ok(cdiv(trace.riccati_at_r, radius * trace.value_at_r))
}

/// One degree at which the boundary-value problem with vanishing filtered
/// traces has a nontrivial solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantDegree {
    pub degree: usize,
    pub polarization: Polarization,
    /// `|f(R)| / |(rf)'(R)|`
    pub relative_trace: f64,
    /// Newton estimate of the distance from `k` to the resonant wavenumber.
    pub wavenumber_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub k: f64,
    pub l_max: usize,
    /// Short-circuited: some shell absorbs, so no real-`k` resonance exists.
    pub absorbing: bool,
    pub offenders: Vec<ResonantDegree>,
}

impl AssumptionReport {
    pub fn all_clear(&self) -> bool {
        self.offenders.is_empty()
    }

    pub fn offending_degrees(&self, polarization: Polarization) -> Vec<usize> {
        self.offenders
            .iter()
            .filter(|o| o.polarization == polarization)
            .map(|o| o.degree)
            .collect()
    }
}

fn trace_ratio(
    med: &LayeredMedium,
    k: f64,
    l: usize,
    pol: Polarization,
) -> Result<Complex64, RadialError> {
    let t = radial_trace(med, k, l, pol)?;
    Ok(cdiv(t.value_at_r, t.riccati_at_r))
}

/// Degrees `1..=l_max` whose regular solution has a vanishing boundary
/// factor at `R`.
///
/// On the sphere the excluded problem splits by polarization: a TM field has
/// a gradient-type tangential trace (zero surface curl), so the only
/// remaining condition is `g(R) = 0`; a TE field has `div_S (n x curl w) = 0`
/// identically, leaving `f(R) = 0`. A degree is flagged when
/// `|f(R)| < 1e-12 |(rf)'(R)|` or when a Newton step on `f/(rf)'` puts a root
/// within `k_tol * k` of `k`.
pub fn check_assumption_with_tol(
    med: &LayeredMedium,
    k: f64,
    l_max: usize,
    k_tol: f64,
) -> Result<AssumptionReport, RadialError> {
    validate_inputs(k, 1)?;
    let mut report = AssumptionReport {
        k,
        l_max,
        absorbing: med.is_absorbing(),
        offenders: Vec::new(),
    };
    if report.absorbing {
        return Ok(report);
    }
    let h = 1e-6 * k;
    for l in 1..=l_max {
        for pol in [Polarization::Tm, Polarization::Te] {
            let q = trace_ratio(med, k, l, pol)?;
            let dq =
                (trace_ratio(med, k + h, l, pol)? - trace_ratio(med, k - h, l, pol)?) / (2.0 * h);
            let distance = if dq.norm() > 0.0 {
                cdiv(q, dq).norm()
            } else {
                f64::INFINITY
            };
            if q.norm() < RESONANCE_TOL || distance <= k_tol * k {
                report.offenders.push(ResonantDegree {
                    degree: l,
                    polarization: pol,
                    relative_trace: q.norm(),
                    wavenumber_distance: distance,
                });
            }
        }
    }
    Ok(report)
}

pub fn check_assumption(
    med: &LayeredMedium,
    k: f64,
    l_max: usize,
) -> Result<AssumptionReport, RadialError> {
    check_assumption_with_tol(med, k, l_max, DEFAULT_WAVENUMBER_TOL)
}
