//! First- and second-moment dynamics for the effective and full models.
//!
//! Both models are linear in the mode operators, so the means obey
//! dv/dt = M·v + f and the normally ordered second moments N_ij = ⟨x_i†x_j⟩
//! obey dN/dt = conj(M)·N + N·Mᵀ + conj(f)·vᵀ + conj(v)·fᵀ. Writing the
//! dynamics this way (rather than one hand-expanded equation per moment)
//! keeps the two-mode and three-mode cases structurally identical; the unit
//! tests pin the expansion against the per-moment equations term by term.
//!
//! N is evolved redundantly even though vacuum-start dynamics factorize as
//! N = conj(v)·vᵀ: that supports occupied initial states and turns the
//! factorization into a cross-check instead of an assumption.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{EffectiveParams, SystemParams};
use crate::ode::{self, OdeSystem};
use crate::scalar::Real;
use crate::tol;

/// Mean amplitudes plus the Hermitian second-moment matrix over the same
/// mode list (2 modes for the effective model, 3 with the auxiliary cavity).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState<T> {
    first: Vec<Complex<T>>,
    /// Row-major n×n, N_ij = ⟨x_i†x_j⟩; ⟨x_i x_j†⟩ is conj(N_ij), never stored.
    second: Vec<Complex<T>>,
}

impl<T: Real> MomentState<T> {
    /// The vacuum: all moments zero.
    pub fn vacuum(n_modes: usize) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        Self {
            first: vec![zero; n_modes],
            second: vec![zero; n_modes * n_modes],
        }
    }

    /// Coherent state with the given amplitudes: N_ij = conj(α_i)·α_j.
    pub fn coherent(amps: &[Complex<T>]) -> Self {
        let n = amps.len();
        let mut second = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                second.push(amps[i].conj() * amps[j]);
            }
        }
        Self {
            first: amps.to_vec(),
            second,
        }
    }

    /// Build from explicit moments, enforcing shape, Hermiticity, and
    /// nonnegative occupations (up to rounding slack).
    pub fn new(first: Vec<Complex<T>>, second: Vec<Complex<T>>) -> Result<Self> {
        let n = first.len();
        if second.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: second.len(),
            });
        }
        let mut scale = T::zero();
        for z in &second {
            scale = scale.max(z.norm());
        }
        let herm_tol = T::of(tol::HERMITICITY) * scale.max(T::one());
        for i in 0..n {
            for j in 0..n {
                let defect = (second[i * n + j] - second[j * n + i].conj()).norm();
                if defect > herm_tol {
                    return Err(Error::InvalidParam {
                        name: "second",
                        message: format!(
                            "moment matrix is not Hermitian: |N[{i}][{j}] - conj(N[{j}][{i}])| = {defect:e}"
                        ),
                    });
                }
            }
            let occ = second[i * n + i].re;
            if occ < T::of(tol::OCCUPATION_FLOOR) * scale.max(T::one()) {
                return Err(Error::InvalidParam {
                    name: "second",
                    message: format!("negative occupation N[{i}][{i}] = {occ:e}"),
                });
            }
        }
        let mut state = Self { first, second };
        state.resymmetrize();
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.first.len()
    }

    /// Mean amplitude of mode `i`.
    pub fn amp(&self, i: usize) -> Complex<T> {
        self.first[i]
    }

    /// Occupation ⟨x_i†x_i⟩ (real by Hermiticity).
    pub fn occupation(&self, i: usize) -> T {
        self.second[i * self.n_modes() + i].re
    }

    /// Cross moment ⟨x_i†x_j⟩.
    pub fn cross(&self, i: usize, j: usize) -> Complex<T> {
        self.second[i * self.n_modes() + j]
    }

    pub fn first_moments(&self) -> &[Complex<T>] {
        &self.first
    }

    /// Row-major second-moment matrix.
    pub fn second_moments(&self) -> &[Complex<T>] {
        &self.second
    }

    /// Replace N by (N + N†)/2, removing rounding-level Hermiticity drift.
    pub fn resymmetrize(&mut self) {
        resymmetrize_flat(self.n_modes(), &mut self.second);
        let n = self.n_modes();
        for i in 0..n {
            self.second[i * n + i].im = T::zero();
        }
    }

    /// Largest entry of N − conj(v)·vᵀ; zero (to tolerance) for any state
    /// reached from vacuum under the linear dynamics.
    pub fn factorization_defect(&self) -> T {
        let n = self.n_modes();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let defect = (self.second[i * n + j] - self.first[i].conj() * self.first[j]).norm();
                worst = worst.max(defect);
            }
        }
        worst
    }

    fn flatten(&self) -> Vec<Complex<T>> {
        let mut flat = Vec::with_capacity(self.first.len() + self.second.len());
        flat.extend_from_slice(&self.first);
        flat.extend_from_slice(&self.second);
        flat
    }

    fn unflatten(n: usize, flat: &[Complex<T>]) -> Self {
        Self {
            first: flat[..n].to_vec(),
            second: flat[n..].to_vec(),
        }
    }
}

fn resymmetrize_flat<T: Real>(n: usize, second: &mut [Complex<T>]) {
    let half = T::of(0.5);
    for i in 0..n {
        for j in i..n {
            let upper = second[i * n + j];
            let lower = second[j * n + i];
            let sym = (upper + lower.conj()) * half;
            second[i * n + j] = sym;
            second[j * n + i] = sym.conj();
        }
    }
}

/// Linear moment model: drift matrix M, drive f, and the frequencies used
/// for energy bookkeeping. Mode order is (a, b) or (a, b, c).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentModel<T> {
    n: usize,
    m: Vec<Complex<T>>,
    f: Vec<Complex<T>>,
    omega_a: T,
    omega_b: T,
}

impl<T: Real> MomentModel<T> {
    /// Two-mode model from reduced parameters:
    /// M = [[−iΔ′_a − Λ_a/2, −iJ₋ − (Γ/2)e^(−iφ)], [−iJ₊ − (Γ/2)e^(+iφ), −iΔ′_b − Λ_b/2]],
    /// f = (−iε, 0).
    pub fn from_effective(eff: &EffectiveParams<T>) -> Self {
        let i = Complex::new(T::zero(), T::one());
        let zero = Complex::new(T::zero(), T::zero());
        let half = T::of(0.5);
        let amps = eff.coupling_amplitudes();
        let m = vec![
            Complex::new(-eff.lambda_a * half, -eff.delta_a_p),
            amps.backward,
            amps.forward,
            Complex::new(-eff.lambda_b * half, -eff.delta_b_p),
        ];
        let f = vec![-i * eff.epsilon, zero];
        Self {
            n: 2,
            m,
            f,
            omega_a: eff.omega_a,
            omega_b: eff.omega_b,
        }
    }

    /// Three-mode model straight from the physical parameters; the modes
    /// couple with rates g_a·e^(±iφ), g_b, and J, and the auxiliary mode's
    /// amplitude decays at γ_m.
    ///
    /// The γ_m convention matters: with amplitude decay γ_m, eliminating
    /// the auxiliary mode (Schur complement of the drift, Δ_c = 0) induces
    /// exactly the reduced rates Γ_i/2 = g_i²/γ_m and Γ/2 = g_a g_b/γ_m of
    /// [`Self::from_effective`], so the two descriptions share their steady
    /// state and [`SystemParams::from_effective`] round-trips through
    /// [`SystemParams::reduce_to_effective`].
    pub fn from_full(p: &SystemParams<T>) -> Self {
        let i = Complex::new(T::zero(), T::one());
        let zero = Complex::new(T::zero(), T::zero());
        let half = T::of(0.5);
        let phase = Complex::from_polar(T::one(), p.phi);
        let m = vec![
            Complex::new(-p.kappa_a * half, -p.delta_a),
            -i * p.j,
            -i * phase.conj() * p.g_a,
            -i * p.j,
            Complex::new(-p.kappa_b * half, -p.delta_b),
            -i * p.g_b,
            -i * phase * p.g_a,
            -i * p.g_b,
            Complex::new(-p.gamma_m, -p.delta_c),
        ];
        let f = vec![-i * p.epsilon, zero, zero];
        Self {
            n: 3,
            m,
            f,
            omega_a: p.omega_a,
            omega_b: p.omega_b,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    /// Row-major drift matrix.
    pub fn drift(&self) -> &[Complex<T>] {
        &self.m
    }

    /// Drive vector.
    pub fn drive(&self) -> &[Complex<T>] {
        &self.f
    }

    pub fn omega_a(&self) -> T {
        self.omega_a
    }

    pub fn omega_b(&self) -> T {
        self.omega_b
    }

    fn rhs_flat(&self, y: &[Complex<T>], dy: &mut [Complex<T>]) {
        let n = self.n;
        let (v, nn) = y.split_at(n);
        let (dv, dn) = dy.split_at_mut(n);
        for (i, dvi) in dv.iter_mut().enumerate() {
            let mut acc = self.f[i];
            for (mij, vj) in self.m[i * n..(i + 1) * n].iter().zip(v) {
                acc += *mij * *vj;
            }
            *dvi = acc;
        }
        for i in 0..n {
            for j in 0..n {
                // (conj(M)·N + N·Mᵀ)_ij plus the drive cross-terms.
                let mut acc = self.f[i].conj() * v[j] + v[i].conj() * self.f[j];
                for k in 0..n {
                    acc += self.m[i * n + k].conj() * nn[k * n + j]
                        + nn[i * n + k] * self.m[j * n + k];
                }
                dn[i * n + j] = acc;
            }
        }
    }

    /// Moment derivative at `state`. The result reuses the state layout but
    /// holds d/dt values, so its "occupations" may be negative.
    pub fn rhs(&self, state: &MomentState<T>) -> Result<MomentState<T>> {
        if state.n_modes() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: state.n_modes(),
            });
        }
        let y = state.flatten();
        let mut dy = vec![Complex::new(T::zero(), T::zero()); y.len()];
        self.rhs_flat(&y, &mut dy);
        Ok(MomentState::unflatten(self.n, &dy))
    }
}

/// Two-mode moment derivative (see [`MomentModel::rhs`]).
pub fn effective_rhs<T: Real>(
    state: &MomentState<T>,
    eff: &EffectiveParams<T>,
) -> Result<MomentState<T>> {
    MomentModel::from_effective(eff).rhs(state)
}

/// Three-mode moment derivative (see [`MomentModel::rhs`]).
pub fn full_rhs<T: Real>(
    state: &MomentState<T>,
    params: &SystemParams<T>,
) -> Result<MomentState<T>> {
    MomentModel::from_full(params).rhs(state)
}

impl<T: Real> OdeSystem<T> for MomentModel<T> {
    fn dim(&self) -> usize {
        self.n + self.n * self.n
    }

    fn rhs(&self, _t: T, y: &[Complex<T>], dy: &mut [Complex<T>]) {
        self.rhs_flat(y, dy);
    }

    fn project(&self, y: &mut [Complex<T>]) {
        let n = self.n;
        resymmetrize_flat(n, &mut y[n..]);
    }
}

/// Output sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid<T> {
    /// `samples` points uniformly spaced over [0, t_end], endpoints included.
    Uniform { t_end: T, samples: usize },
    /// Explicit strictly increasing times, all ≥ 0.
    Explicit(Vec<T>),
}

impl<T: Real> Grid<T> {
    pub fn times(&self) -> Result<Vec<T>> {
        match self {
            Grid::Uniform { t_end, samples } => {
                if !(*t_end > T::zero()) {
                    return Err(Error::InvalidParam {
                        name: "t_end",
                        message: format!("must be positive, got {t_end}"),
                    });
                }
                if *samples < 2 {
                    return Err(Error::InvalidParam {
                        name: "samples",
                        message: "need at least 2 samples".into(),
                    });
                }
                let n = *samples;
                let dt = *t_end / T::of((n - 1) as f64);
                Ok((0..n)
                    .map(|i| {
                        if i == n - 1 {
                            *t_end
                        } else {
                            dt * T::of(i as f64)
                        }
                    })
                    .collect())
            }
            Grid::Explicit(times) => {
                if times.is_empty() {
                    return Err(Error::InvalidParam {
                        name: "times",
                        message: "grid is empty".into(),
                    });
                }
                if times[0] < T::zero() || times.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidParam {
                        name: "times",
                        message: "grid must be nonnegative and strictly increasing".into(),
                    });
                }
                Ok(times.clone())
            }
        }
    }
}

/// How to step the moment equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Adaptive embedded pair with dense-output sampling.
    Adaptive,
    /// Fixed-step RK4, `substeps` uniform steps between output samples.
    /// Bitwise reproducible, and perturbations cannot leak between modes
    /// through the step-size controller.
    FixedRk4 { substeps: usize },
}

/// Integration controls for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions<T> {
    pub method: Method,
    pub ode: ode::Options<T>,
}

impl<T: Real> Default for IntegrationOptions<T> {
    fn default() -> Self {
        Self {
            method: Method::Adaptive,
            ode: ode::Options::default(),
        }
    }
}

/// A sampled solution with derived energy observables.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<MomentState<T>>,
    /// Charger energy ω_a·N_aa per sample.
    pub e_a: Vec<T>,
    /// Battery energy ω_b·N_bb per sample.
    pub e_b: Vec<T>,
    /// Transfer efficiency E_B/(E_A+E_B); 0 where the total is negligible.
    pub eta: Vec<T>,
    /// Charging power dE_B/dt by finite differences on the sample grid.
    pub power: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    /// Recompute energies, efficiency, and finite-difference power from the
    /// stored states.
    pub fn recompute_observables(&mut self, omega_a: T, omega_b: T) {
        let n = self.times.len();
        self.e_a = (0..n)
            .map(|k| omega_a * self.states[k].occupation(0))
            .collect();
        self.e_b = (0..n)
            .map(|k| omega_b * self.states[k].occupation(1))
            .collect();
        self.eta = (0..n)
            .map(|k| {
                let total = self.e_a[k] + self.e_b[k];
                if total.abs() < T::of(tol::RATIO_FLOOR) {
                    T::zero()
                } else {
                    self.e_b[k] / total
                }
            })
            .collect();
        self.power = finite_difference(&self.times, &self.e_b);
    }
}

/// Second-order finite-difference derivative on a possibly non-uniform grid
/// (three-point one-sided stencils at the ends). Returns zeros when fewer
/// than three samples exist.
pub fn finite_difference<T: Real>(t: &[T], y: &[T]) -> Vec<T> {
    let n = t.len();
    if n < 3 {
        return vec![T::zero(); n];
    }
    let mut d = vec![T::zero(); n];
    // Lagrange derivative through (t0,y0), (t1,y1), (t2,y2) evaluated at x.
    let stencil = |i0: usize, i1: usize, i2: usize, x: T| {
        let (t0, t1, t2) = (t[i0], t[i1], t[i2]);
        let (y0, y1, y2) = (y[i0], y[i1], y[i2]);
        y0 * ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2))
            + y1 * ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2))
            + y2 * ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1))
    };
    d[0] = stencil(0, 1, 2, t[0]);
    for i in 1..n - 1 {
        d[i] = stencil(i - 1, i, i + 1, t[i]);
    }
    d[n - 1] = stencil(n - 3, n - 2, n - 1, t[n - 1]);
    d
}

/// Integrate the moment equations over `grid` and derive observables.
pub fn integrate<T: Real>(
    model: &MomentModel<T>,
    initial: &MomentState<T>,
    grid: &Grid<T>,
    opts: &IntegrationOptions<T>,
) -> Result<Trajectory<T>> {
    if initial.n_modes() != model.n {
        return Err(Error::DimensionMismatch {
            expected: model.n,
            got: initial.n_modes(),
        });
    }
    let times = grid.times()?;
    let y0 = initial.flatten();
    let flat_states = match opts.method {
        Method::Adaptive => {
            let t_end = *times.last().expect("grid is nonempty");
            ode::integrate_adaptive(model, T::zero(), &y0, t_end, &times, &opts.ode)?
        }
        Method::FixedRk4 { substeps } => {
            ode::integrate_rk4(model, T::zero(), &y0, &times, substeps)?
        }
    };
    let states: Vec<MomentState<T>> = flat_states
        .iter()
        .map(|flat| MomentState::unflatten(model.n, flat))
        .collect();
    let mut traj = Trajectory {
        times,
        states,
        e_a: Vec::new(),
        e_b: Vec::new(),
        eta: Vec::new(),
        power: Vec::new(),
    };
    traj.recompute_observables(model.omega_a, model.omega_b);
    Ok(traj)
}

/// Steady state of the two-mode model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState<T> {
    pub amp_a: Complex<T>,
    pub amp_b: Complex<T>,
    /// ω_a·|⟨a⟩|²; for the (unique) steady state the second moments
    /// factorize, so this is the full steady charger energy.
    pub e_a: T,
    pub e_b: T,
    pub eta: T,
}

/// Solve M·v = −f for the effective model after checking that both drift
/// eigenvalues decay.
pub fn steady_state<T: Real>(eff: &EffectiveParams<T>) -> Result<SteadyState<T>> {
    let model = MomentModel::from_effective(eff);
    let (lp, lm) = eigenvalues_2x2(model.drift());
    let max_re = lp.re.max(lm.re);
    if max_re >= T::of(tol::STABILITY_MARGIN) {
        return Err(Error::UnstableSystem {
            max_re: max_re.as_f64(),
        });
    }
    let v = steady_first_moments(&model)?;
    let e_a = eff.omega_a * v[0].norm_sqr();
    let e_b = eff.omega_b * v[1].norm_sqr();
    let total = e_a + e_b;
    let eta = if total.abs() < T::of(tol::RATIO_FLOOR) {
        T::zero()
    } else {
        e_b / total
    };
    Ok(SteadyState {
        amp_a: v[0],
        amp_b: v[1],
        e_a,
        e_b,
        eta,
    })
}

/// First-moment fixed point M·v = −f for either model. A singular drift
/// matrix means a zero eigenvalue, i.e. no decay to a unique fixed point.
pub fn steady_first_moments<T: Real>(model: &MomentModel<T>) -> Result<Vec<Complex<T>>> {
    let n = model.n;
    let mut a = model.m.clone();
    let mut b: Vec<Complex<T>> = model.f.iter().map(|z| -z).collect();
    linalg::solve_in_place(n, &mut a, &mut b).ok_or(Error::UnstableSystem { max_re: 0.0 })?;
    Ok(b)
}

pub(crate) fn eigenvalues_2x2<T: Real>(m: &[Complex<T>]) -> (Complex<T>, Complex<T>) {
    let half = T::of(0.5);
    let mean = (m[0] + m[3]) * half;
    let diff = (m[0] - m[3]) * half;
    let root = (diff * diff + m[1] * m[2]).sqrt();
    (mean + root, mean - root)
}
