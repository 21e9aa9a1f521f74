//! Spherical Bessel, Neumann and Hankel functions of integer order and
//! complex argument.
//!
//! `j_l` uses its power series when `|z| < l/2` and Miller's downward
//! recurrence (normalized against `j_0` or `j_1`) otherwise. `y_l` is always
//! obtained by upward recurrence from `y_0`, `y_1`. `h_l^(1)` is composed as
//! `j_l + i y_l` from those two values.

use num_complex::Complex64;
use thiserror::Error;

/// Largest degree accepted by default.
pub const DEFAULT_DEGREE_CAP: usize = 64;

/// Scaled Wronskian residual above which a (j, y) pair is rejected.
pub const LOSS_OF_PRECISION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BesselKind {
    J,
    Y,
    H1,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeTooLarge { degree: usize, cap: usize },
    #[error("argument z = 0 is singular for {0:?}")]
    SingularArgument(BesselKind),
    #[error("loss of precision at l = {degree}, z = {z}: residual {residual:e}")]
    LossOfPrecision {
        degree: usize,
        z: Complex64,
        residual: f64,
    },
}

/// Evaluator with a configurable degree cap.
#[derive(Debug, Clone, Copy)]
pub struct SphericalBessel {
    degree_cap: usize,
}

impl Default for SphericalBessel {
    fn default() -> Self {
        Self {
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }
}

/// `j_l`, `y_l` and their z-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselPair {
    pub degree: usize,
    pub z: Complex64,
    pub j: Complex64,
    pub y: Complex64,
    pub dj: Complex64,
    pub dy: Complex64,
}

impl BesselPair {
    /// `j y' - j' y - 1/z^2`.
    pub fn wronskian_residual(&self) -> Complex64 {
        self.j * self.dy - self.dj * self.y - (self.z * self.z).inv()
    }

    /// Magnitude of the terms entering the Wronskian; the floating-point
    /// floor of the residual is a small multiple of `EPSILON * scale`.
    pub fn wronskian_scale(&self) -> f64 {
        (self.j * self.dy).norm() + (self.dj * self.y).norm() + (self.z * self.z).inv().norm()
    }

    pub fn scaled_wronskian_residual(&self) -> f64 {
        self.wronskian_residual().norm() / self.wronskian_scale()
    }
}

impl SphericalBessel {
    pub fn with_degree_cap(degree_cap: usize) -> Self {
        Self { degree_cap }
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    fn check(&self, kind: BesselKind, l: usize, z: Complex64) -> Result<(), SpecFunError> {
        if l > self.degree_cap {
            return Err(SpecFunError::DegreeTooLarge {
                degree: l,
                cap: self.degree_cap,
            });
        }
        if kind != BesselKind::J && z == Complex64::new(0.0, 0.0) {
            return Err(SpecFunError::SingularArgument(kind));
        }
        Ok(())
    }

    /// `f_l(z)` for `f` in {j, y, h^(1)}.
    pub fn eval(
        &self,
        kind: BesselKind,
        l: usize,
        z: Complex64,
    ) -> Result<Complex64, SpecFunError> {
        self.check(kind, l, z)?;
        Ok(match kind {
            BesselKind::J => sph_j(l, z),
            BesselKind::Y => sph_y(l, z),
            BesselKind::H1 => {
                let (j, y) = (sph_j(l, z), sph_y(l, z));
                j + Complex64::i() * y
            }
        })
    }

    /// `d/dz [z f_l(z)] = z f_{l-1}(z) - l f_l(z)`, with `j_{-1} = cos z / z`
    /// and `y_{-1} = sin z / z`.
    pub fn riccati_derivative(
        &self,
        kind: BesselKind,
        l: usize,
        z: Complex64,
    ) -> Result<Complex64, SpecFunError> {
        self.check(kind, l, z)?;
        let lf = l as f64;
        Ok(match kind {
            BesselKind::J => {
                if z == Complex64::new(0.0, 0.0) {
                    return Ok(if l == 0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    });
                }
                if l == 0 {
                    z.cos()
                } else {
                    z * sph_j(l - 1, z) - lf * sph_j(l, z)
                }
            }
            BesselKind::Y => {
                if l == 0 {
                    z.sin()
                } else {
                    z * sph_y(l - 1, z) - lf * sph_y(l, z)
                }
            }
            BesselKind::H1 => {
                let dj = self.riccati_derivative(BesselKind::J, l, z)?;
                let dy = self.riccati_derivative(BesselKind::Y, l, z)?;
                dj + Complex64::i() * dy
            }
        })
    }

    /// Both kinds plus derivatives, validated by the Wronskian.
    pub fn pair(&self, l: usize, z: Complex64) -> Result<BesselPair, SpecFunError> {
        self.check(BesselKind::Y, l, z)?;
        let pair = raw_pair(l, z);
        let residual = pair.scaled_wronskian_residual();
        if !residual.is_finite() || residual > LOSS_OF_PRECISION_TOL {
            return Err(SpecFunError::LossOfPrecision {
                degree: l,
                z,
                residual,
            });
        }
        Ok(pair)
    }

    /// Unscaled `j_l y_l' - j_l' y_l - 1/z^2`.
    pub fn wronskian_residual(&self, l: usize, z: Complex64) -> Result<Complex64, SpecFunError> {
        self.check(BesselKind::Y, l, z)?;
        let pair = raw_pair(l, z);
        Ok(pair.wronskian_residual())
    }
}

/// `f_l(z)` with the default degree cap.
pub fn sph_bessel(kind: BesselKind, l: usize, z: Complex64) -> Result<Complex64, SpecFunError> {
    SphericalBessel::default().eval(kind, l, z)
}

/// `(z f_l(z))'` with the default degree cap.
pub fn riccati_derivative(
    kind: BesselKind,
    l: usize,
    z: Complex64,
) -> Result<Complex64, SpecFunError> {
    SphericalBessel::default().riccati_derivative(kind, l, z)
}

/// `j_l y_l' - j_l' y_l - 1/z^2` with the default degree cap.
pub fn wronskian_residual(l: usize, z: Complex64) -> Result<Complex64, SpecFunError> {
    SphericalBessel::default().wronskian_residual(l, z)
}

fn raw_pair(l: usize, z: Complex64) -> BesselPair {
    let j = sph_j(l, z);
    let y = sph_y(l, z);
    let (jm, ym) = if l == 0 {
        (z.cos() / z, z.sin() / z)
    } else {
        (sph_j(l - 1, z), sph_y(l - 1, z))
    };
    let c = (l as f64 + 1.0) / z;
    BesselPair {
        degree: l,
        z,
        j,
        y,
        dj: jm - c * j,
        dy: ym - c * y,
    }
}

fn j_series(l: usize, z: Complex64) -> Complex64 {
    let mut lead = Complex64::new(1.0, 0.0);
    for i in 1..=l {
        lead *= z / (2 * i + 1) as f64;
    }
    let w = -0.5 * z * z;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..200 {
        term *= w / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    lead * sum
}

/// `a / b` without the overflow and underflow of `|b|^2` for extreme `|b|`.
pub fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    let s = b.re.abs().max(b.im.abs());
    if s == 0.0 || !s.is_finite() {
        return a / b;
    }
    (a / s) / (b / s)
}

fn j0(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        j_series(0, z)
    } else {
        z.sin() / z
    }
}

fn j1(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        j_series(1, z)
    } else {
        (z.sin() / z - z.cos()) / z
    }
}

fn sph_j(l: usize, z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        return if l == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    if l == 0 {
        return j0(z);
    }
    if r < 0.5 * l as f64 {
        return j_series(l, z);
    }
    if l == 1 {
        return j1(z);
    }
    miller_j(l, z)
}

/// Downward recurrence from well above `max(l, |z|)`.
fn miller_j(l: usize, z: Complex64) -> Complex64 {
    let r = z.norm();
    let start = l.max(r.ceil() as usize) + 40 + (4.0 * r.cbrt()).ceil() as usize;
    let mut upper = Complex64::new(0.0, 0.0);
    let mut current = Complex64::new(1e-200, 0.0);
    let mut at_l = Complex64::new(0.0, 0.0);
    let mut f1 = Complex64::new(0.0, 0.0);
    for n in (1..=start).rev() {
        // current = f_n, upper = f_{n+1}
        let lower = (2 * n + 1) as f64 / z * current - upper;
        upper = current;
        current = lower;
        if n - 1 == l {
            at_l = current;
        }
        if n - 1 == 1 {
            f1 = current;
        }
        let mag = current.norm();
        if mag > 1e250 {
            let s = 1e-250;
            current *= s;
            upper *= s;
            at_l *= s;
            f1 *= s;
        }
    }
    // current = f_0
    let (exact0, exact1) = (j0(z), j1(z));
    if exact0.norm() >= exact1.norm() {
        at_l * cdiv(exact0, current)
    } else {
        at_l * cdiv(exact1, f1)
    }
}

fn sph_y(l: usize, z: Complex64) -> Complex64 {
    let (s, c) = (z.sin(), z.cos());
    let y0 = -c / z;
    if l == 0 {
        return y0;
    }
    let y1 = -c / (z * z) - s / z;
    let (mut prev, mut cur) = (y0, y1);
    for n in 1..l {
        let next = (2 * n + 1) as f64 / z * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}
