//! Complex-valued ODE integration.
//!
//! Two modes, both stepping a flat `Vec<Complex<T>>` state:
//!
//! * an embedded Dormand–Prince 5(4) pair with PI-free step control and the
//!   matching fifth-order dense interpolant, used for everything adaptive;
//! * classical fixed-step RK4 marching grid point to grid point, used where
//!   bitwise reproducibility matters more than error control (the adaptive
//!   controller couples every component through the shared step size, so a
//!   perturbation in one mode shifts the sample points of all of them).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tol;

/// Right-hand side of dy/dt = f(t, y) over a complex state vector.
pub trait OdeSystem<T: Real> {
    /// State dimension.
    fn dim(&self) -> usize;
    /// Write f(t, y) into `dy`.
    fn rhs(&self, t: T, y: &[Complex<T>], dy: &mut [Complex<T>]);
    /// Optional cleanup applied to accepted and sampled states (e.g.
    /// restoring an algebraic symmetry the flow preserves only up to
    /// rounding). Must be idempotent and ulp-scale.
    fn project(&self, _y: &mut [Complex<T>]) {}
}

/// Adaptive integration controls.
#[derive(Debug, Clone, Copy)]
pub struct Options<T> {
    /// Relative tolerance per component.
    pub rtol: T,
    /// Absolute tolerance per component.
    pub atol: T,
    /// Hard cap on accepted+rejected steps.
    pub max_steps: usize,
    /// Below this step size the integration reports underflow.
    pub min_step: T,
}

impl<T: Real> Default for Options<T> {
    fn default() -> Self {
        Self {
            rtol: T::of(tol::ODE_RTOL),
            atol: T::of(tol::ODE_ATOL),
            max_steps: 10_000_000,
            min_step: T::of(1e-12),
        }
    }
}

// Dormand–Prince coefficients. The final stage row equals the 5th-order
// weights (FSAL), so k7 of an accepted step is k1 of the next.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Weights of the quartic term of the dense interpolant.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct DenseStep<T> {
    r1: Vec<Complex<T>>,
    r2: Vec<Complex<T>>,
    r3: Vec<Complex<T>>,
    r4: Vec<Complex<T>>,
    r5: Vec<Complex<T>>,
}

impl<T: Real> DenseStep<T> {
    fn eval(&self, theta: T, out: &mut [Complex<T>]) {
        let one_m = T::one() - theta;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.r1[i]
                + (self.r2[i] + (self.r3[i] + (self.r4[i] + self.r5[i] * one_m) * theta) * one_m)
                    * theta;
        }
    }
}

fn scaled_err_norm<T: Real>(
    err: &[Complex<T>],
    y0: &[Complex<T>],
    y1: &[Complex<T>],
    opts: &Options<T>,
) -> T {
    let mut acc = T::zero();
    for i in 0..err.len() {
        let sc = opts.atol + opts.rtol * y0[i].norm().max(y1[i].norm());
        let q = err[i].norm() / sc;
        acc += q * q;
    }
    (acc / T::of(err.len() as f64)).sqrt()
}

fn initial_step<T: Real, S: OdeSystem<T>>(
    sys: &S,
    t0: T,
    y0: &[Complex<T>],
    f0: &[Complex<T>],
    t_end: T,
    opts: &Options<T>,
) -> T {
    // Hairer's starting-step heuristic, order 5.
    let n = y0.len();
    let sc = |y: &[Complex<T>], i: usize| opts.atol + opts.rtol * y[i].norm();
    let mut d0 = T::zero();
    let mut d1 = T::zero();
    for i in 0..n {
        let s = sc(y0, i);
        let a = y0[i].norm() / s;
        let b = f0[i].norm() / s;
        d0 += a * a;
        d1 += b * b;
    }
    d0 = (d0 / T::of(n as f64)).sqrt();
    d1 = (d1 / T::of(n as f64)).sqrt();
    let h0 = if d0 < T::of(1e-5) || d1 < T::of(1e-5) {
        T::of(1e-6)
    } else {
        T::of(0.01) * d0 / d1
    };
    let h0 = h0.min(t_end - t0);

    let mut y1 = vec![Complex::new(T::zero(), T::zero()); n];
    let mut f1 = y1.clone();
    for i in 0..n {
        y1[i] = y0[i] + f0[i] * h0;
    }
    sys.rhs(t0 + h0, &y1, &mut f1);
    let mut d2 = T::zero();
    for i in 0..n {
        let s = sc(y0, i);
        let q = (f1[i] - f0[i]).norm() / s;
        d2 += q * q;
    }
    d2 = (d2 / T::of(n as f64)).sqrt() / h0;

    let d_max = d1.max(d2);
    let h1 = if d_max <= T::of(1e-15) {
        (h0 * T::of(1e-3)).max(T::of(1e-6))
    } else {
        (T::of(0.01) / d_max).powf(T::of(0.2))
    };
    (h0 * T::of(100.0)).min(h1).min(t_end - t0)
}

/// Integrate from `t0`, writing the dense-output solution at each of the
/// ascending `sample_times` (all within `[t0, t_end]`). The state at `t0`
/// is sampled exactly if requested.
pub fn integrate_adaptive<T: Real, S: OdeSystem<T>>(
    sys: &S,
    t0: T,
    y0: &[Complex<T>],
    t_end: T,
    sample_times: &[T],
    opts: &Options<T>,
) -> Result<Vec<Vec<Complex<T>>>> {
    let n = sys.dim();
    assert_eq!(y0.len(), n, "initial state dimension");
    debug_assert!(sample_times.windows(2).all(|w| w[0] < w[1]));
    let zero = Complex::new(T::zero(), T::zero());

    let mut samples: Vec<Vec<Complex<T>>> = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0;
    while next_sample < sample_times.len() && sample_times[next_sample] <= t0 {
        let mut s = y0.to_vec();
        sys.project(&mut s);
        samples.push(s);
        next_sample += 1;
    }
    if t_end <= t0 {
        return Ok(samples);
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<Complex<T>>> = (0..7).map(|_| vec![zero; n]).collect();
    let mut y_stage = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut err = vec![zero; n];

    {
        let (k1, _) = k.split_at_mut(1);
        sys.rhs(t, &y, &mut k1[0]);
    }
    let mut h = initial_step(sys, t, &y, &k[0], t_end, opts);
    let mut rejected = false;

    let safe = T::of(0.9);
    let facmin = T::of(0.2);
    let facmax = T::of(10.0);

    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok(samples);
        }
        if h < opts.min_step {
            return Err(Error::StepSizeUnderflow {
                t_reached: t.as_f64(),
            });
        }
        h = h.min(t_end - t);

        // Stages 2..7; row 7 lands on y_new itself.
        let tableau: [(&[f64], f64); 5] = [
            (&A2, C[0]),
            (&A3, C[1]),
            (&A4, C[2]),
            (&A5, C[3]),
            (&A6, C[4]),
        ];
        for (stage, (row, c)) in tableau.iter().enumerate() {
            for i in 0..n {
                let mut acc = zero;
                for (j, &a) in row.iter().enumerate() {
                    acc += k[j][i] * T::of(a);
                }
                y_stage[i] = y[i] + acc * h;
            }
            let ki = &mut k[stage + 1];
            sys.rhs(t + T::of(*c) * h, &y_stage, ki);
        }
        for i in 0..n {
            let mut acc = zero;
            for (j, &b) in B.iter().enumerate() {
                acc += k[j][i] * T::of(b);
            }
            y_new[i] = y[i] + acc * h;
        }
        {
            let (head, tail) = k.split_at_mut(6);
            sys.rhs(t + h, &y_new, &mut tail[0]);
            let _ = head;
        }
        for i in 0..n {
            let mut acc = zero;
            for (j, &e) in E.iter().enumerate() {
                acc += k[j][i] * T::of(e);
            }
            err[i] = acc * h;
        }

        let err_norm = scaled_err_norm(&err, &y, &y_new, opts);
        if err_norm <= T::one() {
            // Accepted. Build the interpolant before anything mutates.
            let needs_dense =
                next_sample < sample_times.len() && sample_times[next_sample] <= t + h;
            if needs_dense {
                let mut dense = DenseStep {
                    r1: y.clone(),
                    r2: vec![zero; n],
                    r3: vec![zero; n],
                    r4: vec![zero; n],
                    r5: vec![zero; n],
                };
                for i in 0..n {
                    let dy = y_new[i] - y[i];
                    let bspl = k[0][i] * h - dy;
                    dense.r2[i] = dy;
                    dense.r3[i] = bspl;
                    dense.r4[i] = dy - k[6][i] * h - bspl;
                    let mut acc = zero;
                    for (j, &d) in D.iter().enumerate() {
                        acc += k[j][i] * T::of(d);
                    }
                    dense.r5[i] = acc * h;
                }
                while next_sample < sample_times.len() && sample_times[next_sample] <= t + h {
                    let theta = (sample_times[next_sample] - t) / h;
                    let mut s = vec![zero; n];
                    dense.eval(theta, &mut s);
                    sys.project(&mut s);
                    samples.push(s);
                    next_sample += 1;
                }
            }

            t += h;
            std::mem::swap(&mut y, &mut y_new);
            sys.project(&mut y);
            k.swap(0, 6); // FSAL
            if next_sample >= sample_times.len() || t >= t_end {
                return Ok(samples);
            }

            let fac = (safe * err_norm.powf(T::of(-0.2)))
                .min(if rejected { T::one() } else { facmax })
                .max(facmin);
            h *= fac;
            rejected = false;
        } else {
            let fac = (safe * err_norm.powf(T::of(-0.2)))
                .max(facmin)
                .min(T::one());
            h *= fac;
            rejected = true;
        }
    }
    Err(Error::NonConvergence {
        residual: (t_end - t).as_f64(),
    })
}

/// Classical RK4 marching exactly onto `sample_times`, with `substeps`
/// uniform internal steps between consecutive samples. No error control;
/// the step sequence depends only on the time grid, never on the state.
pub fn integrate_rk4<T: Real, S: OdeSystem<T>>(
    sys: &S,
    t0: T,
    y0: &[Complex<T>],
    sample_times: &[T],
    substeps: usize,
) -> Result<Vec<Vec<Complex<T>>>> {
    let n = sys.dim();
    assert_eq!(y0.len(), n, "initial state dimension");
    assert!(substeps > 0, "substeps must be positive");
    let zero = Complex::new(T::zero(), T::zero());
    let half = T::of(0.5);
    let sixth = T::of(1.0 / 6.0);
    let two = T::of(2.0);

    let mut samples = Vec::with_capacity(sample_times.len());
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut tmp = vec![zero; n];

    for &ts in sample_times {
        if ts > t {
            let h = (ts - t) / T::of(substeps as f64);
            for step in 0..substeps {
                let t_sub = t + h * T::of(step as f64);
                sys.rhs(t_sub, &y, &mut k1);
                for i in 0..n {
                    tmp[i] = y[i] + k1[i] * (h * half);
                }
                sys.rhs(t_sub + h * half, &tmp, &mut k2);
                for i in 0..n {
                    tmp[i] = y[i] + k2[i] * (h * half);
                }
                sys.rhs(t_sub + h * half, &tmp, &mut k3);
                for i in 0..n {
                    tmp[i] = y[i] + k3[i] * h;
                }
                sys.rhs(t_sub + h, &tmp, &mut k4);
                for i in 0..n {
                    y[i] += (k1[i] + (k2[i] + k3[i]) * two + k4[i]) * (h * sixth);
                }
            }
            t = ts;
        }
        let mut s = y.clone();
        sys.project(&mut s);
        samples.push(s);
    }
    Ok(samples)
}
