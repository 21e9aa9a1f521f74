//! Delta-Stekloff eigenvalues of a layered ball and the diagonal solution
//! operators `T_z`, `Psi_z = S_{delta/2} T_z S_{delta/2}` and
//! `Psi~_z = S_delta T_z`.
//!
//! With `w = c f(r) X_lm` the boundary condition
//! `n x curl w - lambda S_delta w_T = 0` reads, per TE mode,
//! `-(rf)'(R)/R - lambda mu^-delta f(R) = 0`, hence
//! `lambda_l = -mu(l)^delta Z_l` with `Z_l = (rf)'(R) / (R f(R))`.
//! Gradient-type (TM) traces are annihilated by `S_delta` and carry no
//! eigenvalues. Solving the same condition with shift `z` and unit datum
//! gives `t_l = R f / (-(rf)' - z mu^-delta R f)`, so
//! `mu^-delta t_l = 1 / (lambda_l - z)`.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::radial::{self, LayeredMedium, Polarization, RadialError};
use crate::specfun::cdiv;
use crate::surface::{self, ModeFamily, SurfaceError, SurfaceSpectrum, TangentialField};

/// Minimum relative gap `|lambda - z| / (1 + |lambda|)` for an admissible shift.
pub const SHIFT_MARGIN: f64 = 1e-6;
/// Retries of `z -> z - 1` when the default shift is too close to an eigenvalue.
pub const SHIFT_RETRIES: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StekloffError {
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("assumption on k violated at degrees {degrees:?}")]
    AssumptionViolated { degrees: Vec<usize> },
    #[error("shift z = {z} is within the margin of eigenvalue at l = {degree}")]
    ShiftIsEigenvalue { z: f64, degree: usize },
    #[error("rank {rank} exceeds mode count {count}")]
    RankOutOfRange { rank: usize, count: usize },
    #[error("smoothing parameter must be finite and >= 0, got {0}")]
    InvalidDelta(f64),
    #[error("shift must be finite, got {0}")]
    InvalidShift(f64),
    #[error("media have different outer radii ({0} vs {1})")]
    MediaMismatch(f64, f64),
    #[error("empty delta grid")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigRecord {
    pub lambda: Complex64,
    pub degree: usize,
    pub multiplicity: usize,
    pub delta: f64,
    pub mu: f64,
}

fn check_delta(delta: f64) -> Result<(), StekloffError> {
    if delta.is_finite() && delta >= 0.0 {
        Ok(())
    } else {
        Err(StekloffError::InvalidDelta(delta))
    }
}

pub fn eigenvalue_te(
    med: &LayeredMedium,
    k: f64,
    delta: f64,
    l: usize,
) -> Result<EigRecord, StekloffError> {
    check_delta(delta)?;
    let impedance = radial::te_impedance(med, k, l)?;
    let mu = surface::mu(med.outer_radius(), l);
    Ok(EigRecord {
        lambda: -mu.powf(delta) * impedance,
        degree: l,
        multiplicity: 2 * l + 1,
        delta,
        mu,
    })
}

/// A degree left out of a spectrum because its TE boundary factor vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedMode {
    pub degree: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub k: f64,
    pub delta: f64,
    pub l_max: usize,
    pub records: Vec<EigRecord>,
    pub excluded: Vec<ExcludedMode>,
}

impl Spectrum {
    pub fn by_degree(&self, l: usize) -> Option<&EigRecord> {
        self.records.iter().find(|r| r.degree == l)
    }
}

fn sort_records(records: &mut [EigRecord]) {
    records.sort_by(|a, b| {
        a.lambda
            .re
            .total_cmp(&b.lambda.re)
            .then(a.lambda.im.total_cmp(&b.lambda.im))
            .then(a.degree.cmp(&b.degree))
    });
}

/// One eigenvalue per degree `1..=l_max`, sorted by `(Re, Im, l)`.
///
/// Fails with `AssumptionViolated` when some degree has a TM resonance at
/// `k`. TE-resonant degrees (whose eigenvalue sits at infinity) are reported
/// in `excluded` instead.
pub fn spectrum(
    med: &LayeredMedium,
    k: f64,
    delta: f64,
    l_max: usize,
) -> Result<Spectrum, StekloffError> {
    check_delta(delta)?;
    let report = radial::check_assumption(med, k, l_max)?;
    let tm = report.offending_degrees(Polarization::Tm);
    if !tm.is_empty() {
        return Err(StekloffError::AssumptionViolated { degrees: tm });
    }
    let outcomes: Vec<_> = (1..=l_max)
        .into_par_iter()
        .map(|l| (l, eigenvalue_te(med, k, delta, l)))
        .collect();
    let mut records = Vec::with_capacity(l_max);
    let mut excluded = Vec::new();
    for (l, outcome) in outcomes {
        match outcome {
            Ok(rec) => records.push(rec),
            Err(StekloffError::Radial(err @ RadialError::InteriorResonance { .. })) => excluded
                .push(ExcludedMode {
                    degree: l,
                    reason: err.to_string(),
                }),
            Err(e) => return Err(e),
        }
    }
    for te in report.offending_degrees(Polarization::Te) {
        if let Some(pos) = records.iter().position(|r| r.degree == te) {
            let rec = records.remove(pos);
            excluded.push(ExcludedMode {
                degree: te,
                reason: format!(
                    "TE boundary factor vanishes near k (lambda = {})",
                    rec.lambda
                ),
            });
        }
    }
    sort_records(&mut records);
    excluded.sort_by_key(|e| e.degree);
    Ok(Spectrum {
        k,
        delta,
        l_max,
        records,
        excluded,
    })
}

fn check_shift(records: &[EigRecord], z: f64) -> Result<(), StekloffError> {
    if !z.is_finite() {
        return Err(StekloffError::InvalidShift(z));
    }
    match records
        .iter()
        .find(|r| (r.lambda - z).norm() < SHIFT_MARGIN * (1.0 + r.lambda.norm()))
    {
        Some(r) => Err(StekloffError::ShiftIsEigenvalue {
            z,
            degree: r.degree,
        }),
        None => Ok(()),
    }
}

/// `z = 0`, moved to `z - 1` up to [`SHIFT_RETRIES`] times while it sits on
/// an eigenvalue.
pub fn default_shift(records: &[EigRecord]) -> Result<f64, StekloffError> {
    let mut z = 0.0;
    let mut last = Ok(());
    for _ in 0..=SHIFT_RETRIES {
        last = check_shift(records, z);
        if last.is_ok() {
            return Ok(z);
        }
        z -= 1.0;
    }
    last.map(|_| z)
}

/// Diagonal entry of `T_z^(delta)` on the degree-`l` divergence-free modes.
pub fn t_entry(
    med: &LayeredMedium,
    k: f64,
    delta: f64,
    z: f64,
    l: usize,
) -> Result<Complex64, StekloffError> {
    check_delta(delta)?;
    if let Ok(rec) = eigenvalue_te(med, k, delta, l) {
        check_shift(&[rec], z)?;
    }
    t_entry_unchecked(med, k, delta, z, l)
}

fn t_entry_unchecked(
    med: &LayeredMedium,
    k: f64,
    delta: f64,
    z: f64,
    l: usize,
) -> Result<Complex64, StekloffError> {
    let trace = radial::te_radial_trace(med, k, l)?;
    let radius = med.outer_radius();
    let damp = surface::mu(radius, l).powf(-delta);
    let rf = radius * trace.value_at_r;
    Ok(cdiv(rf, -trace.riccati_at_r - z * damp * rf))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorFlavor {
    /// `T_z^(delta)`
    T,
    /// `S_{delta/2} T_z^(delta) S_{delta/2}`
    Psi,
    /// `S_delta T_z^(delta)`
    PsiTilde,
}

/// Diagonal operator on the divergence-free tangential fields, one entry
/// per degree (each repeated `2l+1` times in the flat mode order).
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedDiagonalOperator {
    pub z: f64,
    pub delta: f64,
    pub flavor: OperatorFlavor,
    spectrum: SurfaceSpectrum,
    entries: Vec<Complex64>,
}

impl ShiftedDiagonalOperator {
    /// Operator from explicit per-degree entries `1..=entries.len()`.
    pub fn from_entries(
        radius: f64,
        z: f64,
        delta: f64,
        flavor: OperatorFlavor,
        entries: Vec<Complex64>,
    ) -> Result<Self, StekloffError> {
        let spectrum = SurfaceSpectrum::new(radius, entries.len())?;
        Ok(Self {
            z,
            delta,
            flavor,
            spectrum,
            entries,
        })
    }

    pub fn surface(&self) -> &SurfaceSpectrum {
        &self.spectrum
    }

    pub fn l_max(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, l: usize) -> Option<Complex64> {
        l.checked_sub(1).and_then(|i| self.entries.get(i)).copied()
    }

    /// `(degree, entry)` pairs.
    pub fn entries(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.entries.iter().enumerate().map(|(i, e)| (i + 1, *e))
    }

    pub fn mode_count(&self) -> usize {
        self.spectrum.curl_mode_count()
    }

    /// Diagonal action; gradient components map to zero.
    pub fn apply(&self, field: &TangentialField) -> Result<TangentialField, StekloffError> {
        if field.spectrum() != &self.spectrum {
            return Err(SurfaceError::SpectrumMismatch.into());
        }
        let mut out = TangentialField::zero(self.spectrum);
        for (mode, value) in field.iter() {
            let scaled = match (mode.family, self.entry(mode.l)) {
                (ModeFamily::Curl, Some(e)) => value * e,
                _ => Complex64::default(),
            };
            out.set(mode, scaled)?;
        }
        Ok(out)
    }
}

/// Diagonal representation of `T`, `Psi` or `Psi~` at shift `z`.
pub fn psi_operator(
    med: &LayeredMedium,
    k: f64,
    delta: f64,
    z: f64,
    l_max: usize,
    flavor: OperatorFlavor,
) -> Result<ShiftedDiagonalOperator, StekloffError> {
    check_delta(delta)?;
    let radius = med.outer_radius();
    let entries = (1..=l_max)
        .into_par_iter()
        .map(|l| {
            let t = t_entry(med, k, delta, z, l)?;
            let mu = surface::mu(radius, l);
            Ok(match flavor {
                OperatorFlavor::T => t,
                OperatorFlavor::Psi => {
                    let half = mu.powf(-delta / 2.0);
                    half * t * half
                }
                OperatorFlavor::PsiTilde => mu.powf(-delta) * t,
            })
        })
        .collect::<Result<Vec<_>, StekloffError>>()?;
    ShiftedDiagonalOperator::from_entries(radius, z, delta, flavor, entries)
}

/// `||Psi - I^(M) Psi||`: largest entry over flat modes with index `>= rank`.
pub fn tail_norm(op: &ShiftedDiagonalOperator, rank: usize) -> Result<f64, StekloffError> {
    let count = op.mode_count();
    if rank > count {
        return Err(StekloffError::RankOutOfRange { rank, count });
    }
    let Some(first) = op.spectrum.curl_degree_at(rank) else {
        return Ok(0.0);
    };
    Ok(op
        .entries()
        .filter(|(l, _)| *l >= first)
        .map(|(_, e)| e.norm())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSumDiagnostic {
    /// `sum_{M' <= M} tail_norm(M')` for every rank `M` below the mode count.
    pub partial_sums: Vec<f64>,
    /// Contribution of the last degree block relative to the total.
    pub final_relative_increment: f64,
    pub converged: bool,
}

/// Relative last-block increment below which the partial sums count as settled.
pub const TRACE_PLATEAU_TOL: f64 = 1e-3;

/// Partial sums of the truncation errors `||Psi - I^(M) Psi||`.
///
/// The verdict compares what the outermost degree block (`2 L + 1` ranks)
/// adds against the total; a summable tail leaves it negligible, while a
/// divergent one keeps adding a fixed fraction.
pub fn trace_sum_diagnostic(op: &ShiftedDiagonalOperator) -> TraceSumDiagnostic {
    let count = op.mode_count();
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = (0..count)
        .map(|m| {
            acc += tail_norm(op, m).expect("rank below count");
            acc
        })
        .collect();
    let block = 2 * op.l_max() + 1;
    let total = partial_sums.last().copied().unwrap_or(0.0);
    let before = if partial_sums.len() > block {
        partial_sums[partial_sums.len() - block - 1]
    } else {
        0.0
    };
    let final_relative_increment = if total > 0.0 {
        (total - before) / total
    } else {
        0.0
    };
    let converged = if op.l_max() == 1 {
        true
    } else {
        final_relative_increment < TRACE_PLATEAU_TOL
    };
    TraceSumDiagnostic {
        partial_sums,
        final_relative_increment,
        converged,
    }
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// usable points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Minimum number of points for a reported rate.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub lambda: Complex64,
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSweep {
    pub degree: usize,
    pub reference: Complex64,
    pub rows: Vec<SweepRow>,
    /// Slope of `ln drift` vs `ln delta` over the positive grid points.
    pub fitted_exponent: Option<f64>,
}

/// `lambda_l(delta)` and `|lambda_l(delta) - lambda_l(0)|` over a grid.
///
/// A `delta = 0` row is always present.
pub fn delta_sweep(
    med: &LayeredMedium,
    k: f64,
    l: usize,
    grid: &[f64],
) -> Result<DeltaSweep, StekloffError> {
    if grid.is_empty() {
        return Err(StekloffError::EmptyGrid);
    }
    for &d in grid {
        check_delta(d)?;
    }
    let reference = eigenvalue_te(med, k, 0.0, l)?.lambda;
    let mut deltas: Vec<f64> = grid.to_vec();
    if !deltas.contains(&0.0) {
        deltas.push(0.0);
    }
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let rows = deltas
        .iter()
        .map(|&delta| {
            let lambda = eigenvalue_te(med, k, delta, l)?.lambda;
            Ok(SweepRow {
                delta,
                lambda,
                drift: (lambda - reference).norm(),
            })
        })
        .collect::<Result<Vec<_>, StekloffError>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.delta > 0.0)
        .map(|r| (r.delta, r.drift))
        .unzip();
    let fitted_exponent = if xs.len() >= MIN_FIT_POINTS {
        loglog_slope(&xs, &ys)
    } else {
        None
    };
    Ok(DeltaSweep {
        degree: l,
        reference,
        rows,
        fitted_exponent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedEigenvalue {
    pub degree: usize,
    pub lambda0: Complex64,
    pub lambda1: Complex64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub rows: Vec<PairedEigenvalue>,
    pub max_distance: f64,
    pub hausdorff: f64,
    /// `sup |eps_1 - eps_0|`
    pub eps_sup_distance: f64,
    /// Volume-weighted `L^6` distance of the permittivities.
    pub eps_l6_distance: f64,
}

/// Hausdorff distance between two finite point sets in the complex plane.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let directed = |from: &[Complex64], to: &[Complex64]| {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    directed(a, b).max(directed(b, a))
}

/// Per-degree comparison of the spectra of two media sharing `R`.
pub fn epsilon_perturb(
    med0: &LayeredMedium,
    med1: &LayeredMedium,
    k: f64,
    delta: f64,
    l_max: usize,
) -> Result<PerturbationReport, StekloffError> {
    if med0.outer_radius() != med1.outer_radius() {
        return Err(StekloffError::MediaMismatch(
            med0.outer_radius(),
            med1.outer_radius(),
        ));
    }
    let s0 = spectrum(med0, k, delta, l_max)?;
    let s1 = spectrum(med1, k, delta, l_max)?;
    let rows: Vec<PairedEigenvalue> = (1..=l_max)
        .filter_map(|l| {
            let a = s0.by_degree(l)?;
            let b = s1.by_degree(l)?;
            Some(PairedEigenvalue {
                degree: l,
                lambda0: a.lambda,
                lambda1: b.lambda,
                distance: (b.lambda - a.lambda).norm(),
            })
        })
        .collect();
    let max_distance = rows.iter().map(|r| r.distance).fold(0.0, f64::max);
    let set0: Vec<_> = s0.records.iter().map(|r| r.lambda).collect();
    let set1: Vec<_> = s1.records.iter().map(|r| r.lambda).collect();
    Ok(PerturbationReport {
        rows,
        max_distance,
        hausdorff: hausdorff(&set0, &set1),
        eps_sup_distance: med0.sup_distance(med1),
        eps_l6_distance: med0.lp_distance(med1, 6.0),
    })
}
