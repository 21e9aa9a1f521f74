//! Per-mode far-field data of the layered sphere and of the auxiliary
//! impedance problem, and eigenvalue detection from their difference.
//!
//! Outside `R` the radial factor of a mode is `j_l(kr) + a h_l(kr)`: an
//! incident regular wave with unit amplitude plus an outgoing wave. The
//! coefficient `a` is the per-mode entry of the far field operator up to a
//! factor depending only on `(k, l)`, which is shared by the physical and
//! auxiliary problems and cancels in their difference. For a lossless
//! scatterer `|1 + 2a| = 1`.
//!
//! TE entries refer to the electric radial factor `f`, TM entries to the
//! magnetic factor `g`. In the auxiliary problem the TE total field obeys
//! `-(rf)'/R - lambda mu^-delta f = 0` at `R`, while the TM condition loses
//! its `lambda` term (`S_delta` kills gradient traces) and becomes
//! `g(R) = 0`.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::radial::{self, LayeredMedium, RadialError};
use crate::specfun::{cdiv, BesselKind, SpecFunError, SphericalBessel};
use crate::surface;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatteringError {
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("auxiliary problem ill-posed at lambda = {0} (Im < 0 and singular)")]
    IllPosedParameter(Complex64),
    #[error("no root of the modified far field entry in [{lo}, {hi}]")]
    NoRootInWindow { lo: f64, hi: f64 },
    #[error("modified far field entry does not depend on lambda at l = {0}")]
    DegenerateMoebius(usize),
    #[error("assumption on k violated at degree {0}")]
    AssumptionViolated(usize),
    #[error("smoothing parameter must be finite and >= 0, got {0}")]
    InvalidDelta(f64),
}

/// Exterior vacuum data at `x = kR`: `j`, `(xj)'`, `h`, `(xh)'`.
#[derive(Debug, Clone, Copy)]
struct Exterior {
    j: Complex64,
    dj: Complex64,
    h: Complex64,
    dh: Complex64,
}

fn exterior(k: f64, radius: f64, l: usize) -> Result<Exterior, SpecFunError> {
    let bessel = SphericalBessel::default();
    let x = Complex64::new(k * radius, 0.0);
    let j = bessel.eval(BesselKind::J, l, x)?;
    let y = bessel.eval(BesselKind::Y, l, x)?;
    let dj = bessel.riccati_derivative(BesselKind::J, l, x)?;
    let dy = bessel.riccati_derivative(BesselKind::Y, l, x)?;
    let i = Complex64::i();
    Ok(Exterior {
        j,
        dj,
        h: j + i * y,
        dh: dj + i * dy,
    })
}

/// Physical scattering coefficients `(te, tm)` of degree `l`.
///
/// Matching happens at the outer radius of the last non-vacuum shell:
/// beyond it the field is already `j + a h`, and matching further out only
/// buries the scattered part under the incident one.
pub fn mie_coefficients(
    med: &LayeredMedium,
    k: f64,
    l: usize,
) -> Result<(Complex64, Complex64), ScatteringError> {
    radial::validate_inputs(k, l)?;
    let one = Complex64::new(1.0, 0.0);
    let Some(last) = med.permittivities().iter().rposition(|e| *e != one) else {
        return Ok((Complex64::default(), Complex64::default()));
    };
    let core = LayeredMedium::new(
        med.radii()[..=last].to_vec(),
        med.permittivities()[..=last].to_vec(),
    )?;
    let ext = exterior(k, core.outer_radius(), l)?;
    let te = radial::te_radial_trace(&core, k, l)?;
    let tm = radial::tm_radial_trace(&core, k, l)?;
    let eps_out = med.permittivities()[last];
    let match_coeff = |value: Complex64, riccati: Complex64| {
        -cdiv(
            ext.dj * value - ext.j * riccati,
            ext.dh * value - ext.h * riccati,
        )
    };
    Ok((
        match_coeff(te.value_at_r, te.riccati_at_r),
        match_coeff(tm.value_at_r, tm.riccati_at_r / eps_out),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryCoefficients {
    pub te: Complex64,
    pub tm: Complex64,
    /// Set when `Im(lambda) < 0`, outside the guaranteed well-posed regime.
    pub ill_posed_warning: bool,
}

/// Scattering coefficients of the exterior impedance problem at `lambda`.
pub fn auxiliary_coefficients(
    radius: f64,
    k: f64,
    lambda: Complex64,
    delta: f64,
    l: usize,
) -> Result<AuxiliaryCoefficients, ScatteringError> {
    radial::validate_inputs(k, l)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(ScatteringError::InvalidDelta(delta));
    }
    let ext = exterior(k, radius, l)?;
    let damp = surface::mu(radius, l).powf(-delta);
    let num = ext.dj / radius + lambda * damp * ext.j;
    let den = ext.dh / radius + lambda * damp * ext.h;
    let ill_posed_warning = lambda.im < 0.0;
    if ill_posed_warning && den.norm() <= f64::EPSILON * (ext.dh.norm() / radius) {
        return Err(ScatteringError::IllPosedParameter(lambda));
    }
    Ok(AuxiliaryCoefficients {
        te: -cdiv(num, den),
        tm: -cdiv(ext.j, ext.h),
        ill_posed_warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeScattering {
    pub degree: usize,
    pub mie_te: Complex64,
    pub mie_tm: Complex64,
    pub aux_te: Complex64,
    pub aux_tm: Complex64,
    pub modified_te: Complex64,
    pub modified_tm: Complex64,
    pub ill_posed_warning: bool,
}

impl ModeScattering {
    fn assemble(degree: usize, mie: (Complex64, Complex64), aux: AuxiliaryCoefficients) -> Self {
        Self {
            degree,
            mie_te: mie.0,
            mie_tm: mie.1,
            aux_te: aux.te,
            aux_tm: aux.tm,
            modified_te: mie.0 - aux.te,
            modified_tm: mie.1 - aux.tm,
            ill_posed_warning: aux.ill_posed_warning,
        }
    }
}

/// Per-mode entries of `F`, `F_lambda` and `F - F_lambda`.
pub fn modified_ff_entry(
    med: &LayeredMedium,
    k: f64,
    lambda: Complex64,
    delta: f64,
    l: usize,
) -> Result<ModeScattering, ScatteringError> {
    let mie = mie_coefficients(med, k, l)?;
    let aux = auxiliary_coefficients(med.outer_radius(), k, lambda, delta, l)?;
    Ok(ModeScattering::assemble(l, mie, aux))
}

/// Multiplicative noise `1 + eta`, `|eta| <= magnitude`, applied once per
/// measured entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub magnitude: f64,
    pub seed: u64,
}

impl Noise {
    /// Deterministic perturbation of the degree-`l` measured entry.
    pub fn perturb(&self, value: Complex64, l: usize) -> Complex64 {
        let stream = self.seed ^ (l as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        let radius = self.magnitude * rng.random_range(0.0..1.0f64).sqrt();
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        value * (1.0 + Complex64::from_polar(radius, angle))
    }
}

/// Measured TE data for one degree, with the auxiliary problem evaluated on
/// demand.
#[derive(Debug, Clone, Copy)]
pub struct ModeData {
    pub degree: usize,
    pub radius: f64,
    pub k: f64,
    pub delta: f64,
    pub measured_te: Complex64,
}

impl ModeData {
    pub fn measure(
        med: &LayeredMedium,
        k: f64,
        delta: f64,
        l: usize,
        noise: Option<Noise>,
    ) -> Result<Self, ScatteringError> {
        let (te, _) = mie_coefficients(med, k, l)?;
        Ok(Self {
            degree: l,
            radius: med.outer_radius(),
            k,
            delta,
            measured_te: noise.map_or(te, |n| n.perturb(te, l)),
        })
    }

    pub fn modified_te(&self, lambda: Complex64) -> Result<Complex64, ScatteringError> {
        let aux = auxiliary_coefficients(self.radius, self.k, lambda, self.delta, self.degree)?;
        Ok(self.measured_te - aux.te)
    }

    /// Scale of the auxiliary eigenparameter, `mu^delta (l+1) / R^2`.
    pub fn lambda_scale(&self) -> f64 {
        surface::mu(self.radius, self.degree).powf(self.delta) * (self.degree as f64 + 1.0)
            / (self.radius * self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectionMethod {
    /// Fit `m(lambda) = (a lambda + b)/(c lambda + d)` to three samples,
    /// check on a fourth, return `-b/a`.
    Moebius,
    /// Scan the real window, then refine the best sample by secant steps.
    GridRefine { lo: f64, hi: f64, points: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub degree: usize,
    pub lambda: Complex64,
    /// `|m(lambda*)|` relative to the largest sampled `|m|`.
    pub residual: f64,
    /// Set when the root lies in `Im(lambda) < 0`, where the auxiliary
    /// problem is not guaranteed to be well-posed.
    pub lower_half_plane_warning: bool,
}

const MOEBIUS_CONSISTENCY_TOL: f64 = 1e-6;

fn det3(m: [[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Coefficients `(a, b, c, d)` of the Moebius map through three samples.
fn moebius_through(points: &[(Complex64, Complex64); 3]) -> [Complex64; 4] {
    // rows [x, 1, -m x, -m]; the null vector is the signed 3x3 minors
    let rows: Vec<[Complex64; 4]> = points
        .iter()
        .map(|&(x, m)| [x, Complex64::new(1.0, 0.0), -m * x, -m])
        .collect();
    let minor = |skip: usize| {
        let mut sub = [[Complex64::default(); 3]; 3];
        for (r, row) in rows.iter().enumerate() {
            let mut c = 0;
            for (j, v) in row.iter().enumerate() {
                if j != skip {
                    sub[r][c] = *v;
                    c += 1;
                }
            }
        }
        det3(sub)
    };
    [minor(0), -minor(1), minor(2), -minor(3)]
}

fn moebius_eval(coef: &[Complex64; 4], x: Complex64) -> Complex64 {
    cdiv(coef[0] * x + coef[1], coef[2] * x + coef[3])
}

fn detect_moebius(data: &ModeData) -> Result<Detection, ScatteringError> {
    let s = data.lambda_scale();
    // upper half plane: the auxiliary pole sits below the real axis
    let nodes = [
        Complex64::new(-1.0, 1.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(1.0, 1.0),
    ];
    let check_node = Complex64::new(-1.0, 2.0);
    let mut samples = [(Complex64::default(), Complex64::default()); 3];
    for (slot, node) in samples.iter_mut().zip(nodes) {
        *slot = (node, data.modified_te(node * s)?);
    }
    let m_scale = samples.iter().map(|p| p.1.norm()).fold(0.0, f64::max);
    if m_scale == 0.0
        || samples
            .iter()
            .all(|p| (p.1 - samples[0].1).norm() <= 1e-13 * m_scale)
    {
        return Err(ScatteringError::DegenerateMoebius(data.degree));
    }
    for p in samples.iter_mut() {
        p.1 /= m_scale;
    }
    let coef = moebius_through(&samples);
    let check = data.modified_te(check_node * s)? / m_scale;
    if (moebius_eval(&coef, check_node) - check).norm()
        > MOEBIUS_CONSISTENCY_TOL * (1.0 + check.norm())
        || coef[0].norm() <= 1e-14 * coef.iter().map(|c| c.norm()).fold(0.0, f64::max)
    {
        return Err(ScatteringError::DegenerateMoebius(data.degree));
    }
    let lambda = -cdiv(coef[1], coef[0]) * s;
    finish(data, lambda, m_scale)
}

fn finish(data: &ModeData, lambda: Complex64, m_scale: f64) -> Result<Detection, ScatteringError> {
    let residual = match data.modified_te(lambda) {
        Ok(m) => m.norm() / m_scale,
        Err(ScatteringError::IllPosedParameter(_)) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    Ok(Detection {
        degree: data.degree,
        lambda,
        residual,
        lower_half_plane_warning: lambda.im < 0.0,
    })
}

fn detect_grid(
    data: &ModeData,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Detection, ScatteringError> {
    let no_root = ScatteringError::NoRootInWindow { lo, hi };
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) || points < 3 {
        return Err(no_root);
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    let values = grid
        .iter()
        .map(|&x| data.modified_te(Complex64::new(x, 0.0)).map(|m| m.norm()))
        .collect::<Result<Vec<_>, _>>()?;
    let m_scale = values.iter().copied().fold(0.0, f64::max);
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or(no_root.clone())?;
    let step = (hi - lo) / (points - 1) as f64;
    let mut x0 = Complex64::new(grid[best], 0.0);
    let mut x1 = x0 + step * 0.5;
    let mut f0 = data.modified_te(x0)?;
    let mut f1 = data.modified_te(x1)?;
    for _ in 0..100 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - cdiv(f1 * (x1 - x0), f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = data.modified_te(x1)?;
        if (x1 - x0).norm() <= 1e-15 * (1.0 + x1.norm()) {
            break;
        }
    }
    if !x1.re.is_finite() || x1.re < lo - step || x1.re > hi + step {
        return Err(no_root);
    }
    finish(data, x1, m_scale)
}

/// Root in `lambda` of the TE modified far field entry.
pub fn detect_eigenvalues(
    med: &LayeredMedium,
    k: f64,
    delta: f64,
    l: usize,
    method: DetectionMethod,
    noise: Option<Noise>,
) -> Result<Detection, ScatteringError> {
    let report = radial::check_assumption(med, k, l)?;
    if let Some(bad) = report.offenders.iter().find(|o| o.degree == l) {
        return Err(ScatteringError::AssumptionViolated(bad.degree));
    }
    let data = ModeData::measure(med, k, delta, l, noise)?;
    detect_from_data(&data, method)
}

pub fn detect_from_data(
    data: &ModeData,
    method: DetectionMethod,
) -> Result<Detection, ScatteringError> {
    match method {
        DetectionMethod::Moebius => detect_moebius(data),
        DetectionMethod::GridRefine { lo, hi, points } => detect_grid(data, lo, hi, points),
    }
}
