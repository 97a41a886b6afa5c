//! Spectral analysis of the two-mode drift matrix and exceptional-point
//! location.
//!
//! The drift matrix M of the reduced model is 2×2, so its spectrum is
//! governed entirely by the complex discriminant
//!
//!   disc = (M₁₁ − M₂₂)² + 4·M₁₂·M₂₁ = (λ₊ − λ₋)²,
//!
//! which vanishes exactly at an exceptional point where the eigenvalues and
//! eigenvectors coalesce. disc is a quadratic polynomial in each of J, Δ′_b,
//! and the loss ratio r, and linear in cos φ, so single-parameter EP
//! searches reduce to exact quadratic root-finding; two-parameter searches
//! use a damped Newton iteration on (Re disc, Im disc).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{wrap_angle, EffectiveParams};
use crate::scalar::Real;
use crate::tol;

/// The 2×2 drift matrix M (row-major) and drive vector of the reduced model:
/// dv/dt = M·v + drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix<T> {
    pub m: [Complex<T>; 4],
    pub drive: [Complex<T>; 2],
}

impl<T: Real> DriftMatrix<T> {
    pub fn from_effective(eff: &EffectiveParams<T>) -> Self {
        let i = Complex::new(T::zero(), T::one());
        let half = T::of(0.5);
        let amps = eff.coupling_amplitudes();
        DriftMatrix {
            m: [
                Complex::new(-eff.lambda_a * half, -eff.delta_a_p),
                amps.backward,
                amps.forward,
                Complex::new(-eff.lambda_b * half, -eff.delta_b_p),
            ],
            drive: [-i * eff.epsilon, Complex::new(T::zero(), T::zero())],
        }
    }

    /// Squared Frobenius norm of M, the natural scale for the discriminant.
    pub fn frobenius_sqr(&self) -> T {
        self.m
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn discriminant(&self) -> Complex<T> {
        let d = self.m[0] - self.m[3];
        d * d + self.m[1] * self.m[2] * T::of(4.0)
    }
}

/// Eigenstructure of a drift matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralReport<T> {
    pub lambda_plus: Complex<T>,
    pub lambda_minus: Complex<T>,
    pub eigvec_plus: [Complex<T>; 2],
    pub eigvec_minus: [Complex<T>; 2],
    /// |⟨v₊, v₋⟩| for unit eigenvectors; 1 at an exceptional point.
    pub eigvec_overlap: T,
    pub discriminant: Complex<T>,
    /// |disc| below `tol`·‖M‖²_F: eigenvalues coalesce to working precision.
    pub is_ep: bool,
}

/// Eigenvalues, eigenvectors, and EP classification of `dm`. `tol` is the
/// relative discriminant threshold ([`tol::EP_DISCRIMINANT`] is the usual
/// choice).
pub fn spectral<T: Real>(dm: &DriftMatrix<T>, tol: T) -> SpectralReport<T> {
    let m = &dm.m;
    let half = T::of(0.5);
    let mean = (m[0] + m[3]) * half;
    let disc = dm.discriminant();
    let root = disc.sqrt() * half;
    let lambda_plus = mean + root;
    let lambda_minus = mean - root;
    let scale = dm.frobenius_sqr();
    let is_ep = disc.norm() < tol * scale.max(T::of(f64::MIN_POSITIVE));

    let eigvec = |lambda: Complex<T>| -> [Complex<T>; 2] {
        // (M − λ)v = 0 has solutions (M₁₂, λ − M₁₁) and (λ − M₂₂, M₂₁);
        // both are valid, the larger one is numerically safer. For a
        // diagonal matrix one of them degenerates to zero per eigenvalue.
        let c1 = [m[1], lambda - m[0]];
        let c2 = [lambda - m[3], m[2]];
        let n1 = c1[0].norm_sqr() + c1[1].norm_sqr();
        let n2 = c2[0].norm_sqr() + c2[1].norm_sqr();
        let v = if n1 >= n2 { c1 } else { c2 };
        let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if norm > T::zero() {
            [v[0] / norm, v[1] / norm]
        } else {
            // Scalar matrix: every vector is an eigenvector.
            [
                Complex::new(T::one(), T::zero()),
                Complex::new(T::zero(), T::zero()),
            ]
        }
    };
    let eigvec_plus = eigvec(lambda_plus);
    let eigvec_minus = eigvec(lambda_minus);
    let eigvec_overlap = if is_ep {
        T::one()
    } else {
        (eigvec_plus[0].conj() * eigvec_minus[0] + eigvec_plus[1].conj() * eigvec_minus[1]).norm()
    };
    SpectralReport {
        lambda_plus,
        lambda_minus,
        eigvec_plus,
        eigvec_minus,
        eigvec_overlap,
        discriminant: disc,
        is_ep,
    }
}

/// Parameters the EP solver may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpVariable {
    /// Direct coupling J.
    J,
    /// Coupling phase φ.
    Phi,
    /// Reduced battery detuning Δ′_b.
    DeltaBP,
    /// Loss ratio r = κ_b/κ_a (rescales κ_b).
    R,
}

/// One exceptional-point solution: the free-variable values (parallel to
/// the `free` list passed in), the re-evaluated |disc| residual, and the
/// parameter set with the solution applied.
#[derive(Debug, Clone)]
pub struct EpSolution<T> {
    pub values: Vec<T>,
    pub residual: T,
    pub params: EffectiveParams<T>,
}

fn current_value<T: Real>(eff: &EffectiveParams<T>, var: EpVariable) -> T {
    match var {
        EpVariable::J => eff.j_direct,
        EpVariable::Phi => eff.phi,
        EpVariable::DeltaBP => eff.delta_b_p,
        EpVariable::R => eff.r(),
    }
}

fn apply<T: Real>(eff: &EffectiveParams<T>, var: EpVariable, x: T) -> Result<EffectiveParams<T>> {
    match var {
        EpVariable::J => Ok(eff.with_j(x)),
        EpVariable::Phi => Ok(eff.with_phase(x)),
        EpVariable::DeltaBP => Ok(eff.with_delta_b_p(x)),
        EpVariable::R => eff.with_r(x),
    }
}

fn disc_at<T: Real>(eff: &EffectiveParams<T>, var: EpVariable, x: T) -> Result<Complex<T>> {
    Ok(DriftMatrix::from_effective(&apply(eff, var, x)?).discriminant())
}

/// Find parameter values where the spectrum has an exceptional point.
///
/// With one free variable the discriminant is polynomial (quadratic in J,
/// Δ′_b, r; linear in cos φ) and is solved exactly; only real-valued roots
/// survive, plus J ≥ 0, r > 0, |cos φ| ≤ 1 feasibility. With two free
/// variables the two real equations Re disc = Im disc = 0 are solved by
/// Newton iteration from a few starting points. No admissible solution
/// yields [`Error::NoRealSolution`].
pub fn solve_ep<T: Real>(
    eff: &EffectiveParams<T>,
    free: &[EpVariable],
) -> Result<Vec<EpSolution<T>>> {
    match free {
        [var] => solve_single(eff, *var),
        [v1, v2] => {
            if v1 == v2 {
                return Err(Error::InvalidParam {
                    name: "free",
                    message: "free variables must be distinct".into(),
                });
            }
            solve_pair(eff, *v1, *v2)
        }
        _ => Err(Error::InvalidParam {
            name: "free",
            message: format!("need one or two free variables, got {}", free.len()),
        }),
    }
}

fn solve_single<T: Real>(eff: &EffectiveParams<T>, var: EpVariable) -> Result<Vec<EpSolution<T>>> {
    // The discriminant is at most quadratic in the solve variable (cos φ in
    // the phase case), so three evaluations recover the coefficients
    // exactly: c0 = d(0), c1 = (d(1) − d(−1))/2, c2 = (d(1) + d(−1))/2 − d(0).
    let half = T::of(0.5);
    let sample = |x: f64| -> Result<Complex<T>> {
        match var {
            // cos φ = x has a representative angle acos(x).
            EpVariable::Phi => disc_at(eff, var, T::of(x).acos()),
            // r samples must stay in the valid domain; shift to {1, 2, 3}
            // and fit the quadratic there instead.
            EpVariable::R => disc_at(eff, var, T::of(x + 2.0)),
            _ => disc_at(eff, var, T::of(x)),
        }
    };
    let d0 = sample(0.0)?;
    let dp = sample(1.0)?;
    let dm = sample(-1.0)?;
    let c0 = d0;
    let c1 = (dp - dm) * half;
    let c2 = (dp + dm) * half - d0;

    let mut roots = quadratic_real_roots(c2, c1, c0)?;
    if let EpVariable::R = var {
        // Undo the sampling shift.
        for x in &mut roots {
            *x += T::of(2.0);
        }
    }

    let mut candidates: Vec<T> = Vec::new();
    for x in roots {
        match var {
            EpVariable::J => {
                if x >= T::zero() {
                    candidates.push(x);
                }
            }
            EpVariable::R => {
                if x > T::zero() {
                    candidates.push(x);
                }
            }
            EpVariable::DeltaBP => candidates.push(x),
            EpVariable::Phi => {
                // x is cos φ; both acos branches are genuine angles.
                let c = if x.abs() <= T::one() + T::of(tol::EP_REAL_ROOT) {
                    x.max(-T::one()).min(T::one())
                } else {
                    continue;
                };
                let phi = c.acos();
                candidates.push(wrap_angle(phi));
                let mirrored = wrap_angle(T::of(2.0) * T::PI() - phi);
                if (mirrored - wrap_angle(phi)).abs() > T::of(1e-12) {
                    candidates.push(mirrored);
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("roots are finite"));
    candidates.dedup_by(|a, b| (*a - *b).abs() <= T::of(1e-12) * a.abs().max(T::one()));

    let mut solutions = Vec::new();
    for x in candidates {
        let params = apply(eff, var, x)?;
        let residual = DriftMatrix::from_effective(&params).discriminant().norm();
        solutions.push(EpSolution {
            values: vec![x],
            residual,
            params,
        });
    }
    if solutions.is_empty() {
        return Err(Error::NoRealSolution);
    }
    Ok(solutions)
}

/// Real roots of c2·x² + c1·x + c0 = 0 with complex coefficients. A root
/// counts as real when its imaginary part is negligible against its size.
fn quadratic_real_roots<T: Real>(c2: Complex<T>, c1: Complex<T>, c0: Complex<T>) -> Result<Vec<T>> {
    let scale = c2.norm().max(c1.norm()).max(c0.norm());
    let tiny = T::of(1e-14) * scale;
    let real_tol = T::of(tol::EP_REAL_ROOT);
    let is_real = |z: Complex<T>| z.im.abs() <= real_tol * z.re.abs().max(T::one());

    let mut roots = Vec::new();
    if scale == T::zero() {
        // disc ≡ 0 along this line: already an EP everywhere. Signal the
        // degenerate case rather than invent a value.
        return Err(Error::NoRealSolution);
    }
    if c2.norm() <= tiny {
        if c1.norm() <= tiny {
            return Err(Error::NoRealSolution);
        }
        let x = -c0 / c1;
        if is_real(x) {
            roots.push(x.re);
        }
        return Ok(roots);
    }
    let sq = (c1 * c1 - c2 * c0 * T::of(4.0)).sqrt();
    // Pick the sign that adds magnitudes, then get the second root from the
    // product c0/c2 to avoid cancellation.
    let q = if (c1.conj() * sq).re >= T::zero() {
        (c1 + sq) * T::of(-0.5)
    } else {
        (c1 - sq) * T::of(-0.5)
    };
    let r1 = q / c2;
    if is_real(r1) {
        roots.push(r1.re);
    }
    if q.norm() > T::zero() {
        let r2 = c0 / q;
        if is_real(r2) {
            roots.push(r2.re);
        }
    }
    Ok(roots)
}

fn solve_pair<T: Real>(
    eff: &EffectiveParams<T>,
    v1: EpVariable,
    v2: EpVariable,
) -> Result<Vec<EpSolution<T>>> {
    let x0 = current_value(eff, v1);
    let y0 = current_value(eff, v2);
    let spread1 = x0.abs().max(T::one()) * T::of(0.1);
    let spread2 = y0.abs().max(T::one()) * T::of(0.1);
    let starts = [(x0, y0), (x0 + spread1, y0), (x0, y0 + spread2)];

    let disc_xy = |x: T, y: T| -> Result<Complex<T>> {
        let p = apply(&apply(eff, v1, x)?, v2, y)?;
        Ok(DriftMatrix::from_effective(&p).discriminant())
    };
    let scale = DriftMatrix::from_effective(eff)
        .frobenius_sqr()
        .max(T::one());
    let tol_abs = T::of(tol::EP_NEWTON) * scale;

    let mut found: Vec<(T, T)> = Vec::new();
    for &(sx, sy) in &starts {
        if let Some((x, y)) = newton_2d(&disc_xy, sx, sy, tol_abs) {
            let feasible = match (v1, x) {
                (EpVariable::J, x) => x >= T::zero(),
                (EpVariable::R, x) => x > T::zero(),
                _ => true,
            } && match (v2, y) {
                (EpVariable::J, y) => y >= T::zero(),
                (EpVariable::R, y) => y > T::zero(),
                _ => true,
            };
            if !feasible {
                continue;
            }
            let (x, y) = (
                if v1 == EpVariable::Phi {
                    wrap_angle(x)
                } else {
                    x
                },
                if v2 == EpVariable::Phi {
                    wrap_angle(y)
                } else {
                    y
                },
            );
            let dup = found.iter().any(|&(fx, fy)| {
                (fx - x).abs() <= T::of(1e-8) * fx.abs().max(T::one())
                    && (fy - y).abs() <= T::of(1e-8) * fy.abs().max(T::one())
            });
            if !dup {
                found.push((x, y));
            }
        }
    }
    if found.is_empty() {
        return Err(Error::NoRealSolution);
    }
    found.sort_by(|a, b| a.partial_cmp(b).expect("solutions are finite"));
    let mut solutions = Vec::new();
    for (x, y) in found {
        let params = apply(&apply(eff, v1, x)?, v2, y)?;
        let residual = DriftMatrix::from_effective(&params).discriminant().norm();
        solutions.push(EpSolution {
            values: vec![x, y],
            residual,
            params,
        });
    }
    Ok(solutions)
}

/// Newton iteration on F(x, y) = (Re disc, Im disc) with a central
/// finite-difference Jacobian. Returns None on divergence or when the
/// parameter domain is left.
fn newton_2d<T: Real>(
    f: &dyn Fn(T, T) -> Result<Complex<T>>,
    mut x: T,
    mut y: T,
    tol_abs: T,
) -> Option<(T, T)> {
    for _ in 0..100 {
        let d = f(x, y).ok()?;
        if d.norm() <= tol_abs {
            return Some((x, y));
        }
        let hx = T::of(1e-6) * x.abs().max(T::one());
        let hy = T::of(1e-6) * y.abs().max(T::one());
        let dx = (f(x + hx, y).ok()? - f(x - hx, y).ok()?) / (hx * T::of(2.0));
        let dy = (f(x, y + hy).ok()? - f(x, y - hy).ok()?) / (hy * T::of(2.0));
        // Solve [dx dy]·step = −d in real 2×2 form.
        let det = dx.re * dy.im - dy.re * dx.im;
        if det.abs() < T::of(f64::MIN_POSITIVE).max(T::of(1e-300)) {
            return None;
        }
        let sx = (-d.re * dy.im + dy.re * d.im) / det;
        let sy = (-dx.re * d.im + d.re * dx.im) / det;
        x += sx;
        y += sy;
        if !(x.is_finite() && y.is_finite()) {
            return None;
        }
    }
    None
}
