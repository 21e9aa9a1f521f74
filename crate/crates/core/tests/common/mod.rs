//! Independent reference implementations shared by the integration tests.
//! None of these call into the library's special functions or transfer
//! matrices.
#![allow(dead_code)]

use dstek::radial::LayeredMedium;
use dstek::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `j_l(z)` from its Taylor series. Accurate while `|z|` stays moderate.
pub fn j_series(l: usize, z: Complex64) -> Complex64 {
    let mut lead = Complex64::new(1.0, 0.0);
    for i in 1..=l {
        lead *= z / (2 * i + 1) as f64;
    }
    let w = -z * z / 2.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..400 {
        term *= w / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    lead * sum
}

/// `h^(1)_l(z)` from the finite Rayleigh sum.
pub fn h1_rayleigh(l: usize, z: Complex64) -> Complex64 {
    let i = Complex64::i();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut coeff = 1.0f64; // (l+k)! / (k! (l-k)!)
    let mut ipow = Complex64::new(1.0, 0.0);
    let mut zpow = Complex64::new(1.0, 0.0);
    for k in 0..=l {
        if k > 0 {
            coeff *= ((l + k) * (l - k + 1)) as f64 / k as f64;
            ipow *= i;
            zpow *= 2.0 * z;
        }
        sum += ipow * coeff / zpow;
    }
    (-i).powu(l as u32 + 1) * (i * z).exp() / z * sum
}

/// `(z j_l)'` and `(z h_l)'` via `z f_{l-1} - l f_l`.
pub fn riccati(f: impl Fn(usize, Complex64) -> Complex64, l: usize, z: Complex64) -> Complex64 {
    assert!(l >= 1);
    z * f(l - 1, z) - l as f64 * f(l, z)
}

/// First root of `f` in `[a, b]` by bisection; `f(a)` and `f(b)` must differ
/// in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa * f(b) < 0.0, "no sign change on [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a) < 1e-16 * m.abs() {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Dormand-Prince 5(4) for `u'' = (l(l+1)/r^2 - kappa^2) u` on `[r0, r1]`.
fn dp45(
    state: [Complex64; 2],
    r0: f64,
    r1: f64,
    l: usize,
    kappa2: Complex64,
    rtol: f64,
) -> [Complex64; 2] {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let ll = (l * (l + 1)) as f64;
    let rhs = |r: f64, y: [Complex64; 2]| [y[1], (ll / (r * r) - kappa2) * y[0]];
    let mut r = r0;
    let mut y = state;
    let mut h = (r1 - r0) / 64.0;
    while r < r1 {
        if r + h > r1 {
            h = r1 - r;
        }
        let mut k = [[Complex64::default(); 2]; 7];
        k[0] = rhs(r, y);
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s - 1][j];
                ys[0] += h * a * kj[0];
                ys[1] += h * a * kj[1];
            }
            k[s] = rhs(r + C[s] * h, ys);
        }
        let mut y5 = y;
        let mut err = [Complex64::default(); 2];
        for s in 0..7 {
            for i in 0..2 {
                y5[i] += h * B5[s] * k[s][i];
                err[i] += h * (B5[s] - B4[s]) * k[s][i];
            }
        }
        let scale = y[0]
            .norm()
            .max(y[1].norm())
            .max(y5[0].norm())
            .max(y5[1].norm());
        let e = err[0].norm().max(err[1].norm()) / (rtol * scale);
        if e <= 1.0 {
            r += h;
            y = y5;
        }
        let factor = if e == 0.0 {
            5.0
        } else {
            (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    y
}

/// `(f(R), (rf)'(R))` of the regular radial solution normalized to
/// `j_l(kappa_1 r)` in the core, by direct integration. `tm` switches the
/// interface condition from continuity of `(rf)'` to that of `(rf)'/eps`.
pub fn radial_trace_ode(med: &LayeredMedium, k: f64, l: usize, tm: bool) -> (Complex64, Complex64) {
    let radii = med.radii();
    let eps = med.permittivities();
    let kappa1 = k * eps[0].sqrt();
    let r0 = 0.2 * radii[0];
    let x0 = kappa1 * r0;
    let mut y = [r0 * j_series(l, x0), riccati(j_series, l, x0)];
    let mut start = r0;
    for (i, &r_out) in radii.iter().enumerate() {
        if i > 0 && tm {
            y[1] *= eps[i] / eps[i - 1];
        }
        y = dp45(y, start, r_out, l, k * k * eps[i], 1e-13);
        start = r_out;
    }
    let r = med.outer_radius();
    (y[0] / r, y[1])
}

/// Homogeneous sphere of radius `a`, relative index `m`, in vacuum; returns
/// the textbook `(a_n, b_n)` coefficients at size parameter `x = k a`.
pub fn textbook_mie(n: usize, m: Complex64, x: f64) -> (Complex64, Complex64) {
    let xc = c(x, 0.0);
    let mx = m * x;
    let psi = |z: Complex64| z * j_series(n, z);
    let dpsi = |z: Complex64| riccati(j_series, n, z);
    let xi = xc * h1_rayleigh(n, xc);
    let dxi = riccati(h1_rayleigh, n, xc);
    let (p_mx, dp_mx, p_x, dp_x) = (psi(mx), dpsi(mx), psi(xc), dpsi(xc));
    let a = (m * p_mx * dp_x - p_x * dp_mx) / (m * p_mx * dxi - xi * dp_mx);
    let b = (p_mx * dp_x - m * p_x * dp_mx) / (p_mx * dxi - m * xi * dp_mx);
    (a, b)
}

/// Random ball of radius 1: `layers` shells, real parts of the
/// permittivity in `[1, 6]`, imaginary parts in `(0, 1]` when absorbing.
pub fn random_medium(rng: &mut ChaCha8Rng, layers: usize, absorbing: bool) -> LayeredMedium {
    loop {
        let mut radii: Vec<f64> = (0..layers - 1)
            .map(|_| rng.random_range(0.2..0.9))
            .collect();
        radii.sort_by(f64::total_cmp);
        radii.push(1.0);
        if radii.windows(2).any(|w| w[1] - w[0] < 0.05) {
            continue;
        }
        let eps = radii
            .iter()
            .map(|_| {
                let im = if absorbing {
                    rng.random_range(0.0..1.0) + 1e-3
                } else {
                    0.0
                };
                c(rng.random_range(1.0..6.0), im)
            })
            .collect();
        return LayeredMedium::new(radii, eps).expect("valid random medium");
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
