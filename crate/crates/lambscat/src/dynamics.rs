//! Exact time evolution by the method of characteristics.
//!
//! Writing the field as φ(t,x) = a(x+t) + b(t-x), the initial data fixes a on
//! [0, ∞) and b on (-∞, 0]; the boundary coupling closes the evolution into a
//! finite-dimensional ODE for (b, y, ẏ); the wave equation itself is never
//! discretized. For θ ≠ 0 the boundary condition gives
//!
//! ```text
//! b'(t) = a'(t) + (a(t) + b(t) - <c,y>)/θ,    φ'(t,0+) = -(a(t)+b(t)-<c,y>)/θ,
//! ```
//!
//! while for θ = 0 the constraint is algebraic, b(t) = <c,y(t)> - a(t), and
//! φ'(t,0+) = 2a'(t) - <c,ẏ>. In both cases ÿ = Ly + c φ'(t,0+) (or
//! -∇V(y) + c φ'(t,0+) for an anharmonic oscillator block), and the reduced
//! state dimension equals the degree of the boundary polynomial.
//!
//! The integrator is classical RK4 with cubic Hermite dense output; energies
//! are evaluated by quadrature of the characteristic profiles and the
//! reduced-state contributions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::NormalizedModel;
use crate::poly::{build_p_closed_form, build_pk_sequence};
use crate::potential::Potential;
use crate::profile::FieldProfile;
use crate::quad::{adaptive_simpson, gl16, gl8};

/// Tail integral T(x) = ∫_x^∞ f(s) ds of a decaying profile, precomputed on a
/// cell grid with per-cell Gauss-Legendre completion.
#[derive(Debug, Clone)]
struct TailIntegral {
    hi: f64,
    dx: f64,
    /// suffix[j] = ∫ from node j to hi; node j at j*dx
    suffix: Vec<f64>,
}

impl TailIntegral {
    fn build(f: &FieldProfile) -> Result<TailIntegral> {
        if f.is_zero() {
            return Ok(TailIntegral {
                hi: 0.0,
                dx: 1.0,
                suffix: vec![0.0],
            });
        }
        let (_, hi) = f.support();
        let cells = 1024usize;
        let dx = hi / cells as f64;
        let mut cell = Vec::with_capacity(cells);
        for j in 0..cells {
            let lo = j as f64 * dx;
            cell.push(adaptive_simpson(&|x| f.value(x), lo, lo + dx, 1e-15)?);
        }
        let mut suffix = vec![0.0; cells + 1];
        for j in (0..cells).rev() {
            suffix[j] = suffix[j + 1] + cell[j];
        }
        Ok(TailIntegral { hi, dx, suffix })
    }

    fn eval(&self, f: &FieldProfile, x: f64) -> f64 {
        if x >= self.hi || f.is_zero() {
            return 0.0;
        }
        if x <= 0.0 {
            return self.suffix[0];
        }
        let j = ((x / self.dx) as usize).min(self.suffix.len() - 2);
        let node = (j + 1) as f64 * self.dx;
        gl16(&|s| f.value(s), x, node) + self.suffix[j + 1]
    }
}

/// The d'Alembert pieces determined by the initial data: a on [0, ∞) and b on
/// (-∞, 0], with the integration constant fixed to 0 (all scattering
/// quantities depend only on a', b').
#[derive(Debug, Clone)]
pub struct Characteristics {
    pub phi0: FieldProfile,
    pub phidot0: FieldProfile,
    tail: TailIntegral,
}

impl Characteristics {
    pub fn build(phi0: &FieldProfile, phidot0: &FieldProfile) -> Result<Characteristics> {
        Ok(Characteristics {
            phi0: phi0.clone(),
            phidot0: phidot0.clone(),
            tail: TailIntegral::build(phidot0)?,
        })
    }

    /// a(s) = φ₀(s)/2 - T(s)/2 for s >= 0, with T(s) = ∫_s^∞ φ̇₀.
    pub fn a(&self, s: f64) -> f64 {
        0.5 * self.phi0.value(s) - 0.5 * self.tail.eval(&self.phidot0, s)
    }

    /// a'(s) = (φ̇₀(s) + φ₀'(s))/2.
    pub fn a_prime(&self, s: f64) -> f64 {
        0.5 * (self.phidot0.value(s) + self.phi0.derivative(1, s))
    }

    /// k-th derivative of a at s (k >= 1).
    pub fn a_deriv(&self, k: usize, s: f64) -> f64 {
        if k == 0 {
            return self.a(s);
        }
        0.5 * (self.phidot0.derivative(k - 1, s) + self.phi0.derivative(k, s))
    }

    /// b(s) = φ₀(-s)/2 + T(-s)/2 for s <= 0.
    pub fn b_neg(&self, s: f64) -> f64 {
        debug_assert!(s <= 0.0);
        0.5 * self.phi0.value(-s) + 0.5 * self.tail.eval(&self.phidot0, -s)
    }

    /// b'(s) = (φ̇₀(-s) - φ₀'(-s))/2 for s <= 0.
    pub fn b_neg_prime(&self, s: f64) -> f64 {
        debug_assert!(s <= 0.0);
        0.5 * (self.phidot0.value(-s) - self.phi0.derivative(1, -s))
    }

    /// Upper edge of the union of the profile supports.
    pub fn support_hi(&self) -> f64 {
        self.phi0.support().1.max(self.phidot0.support().1)
    }
}

/// Whether oscillator data is slaved to the field (class D) or supplied
/// directly subject to the form-domain constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataMode {
    ClassD,
    Compatible,
}

/// Initial state: smooth decaying field profiles plus oscillator data.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub phi0: FieldProfile,
    pub phidot0: FieldProfile,
    pub y0: Vec<f64>,
    pub ydot0: Vec<f64>,
    pub mode: DataMode,
}

impl InitialData {
    /// Class-D data: the oscillator state is computed from the boundary
    /// derivatives of the field, y = M⁻¹v(φ₀), ẏ = M⁻¹v(φ̇₀).
    pub fn class_d(model: &NormalizedModel, phi0: FieldProfile, phidot0: FieldProfile) -> Result<InitialData> {
        let y0 = lift_class_d(model, &phi0)?;
        let ydot0 = lift_class_d(model, &phidot0)?;
        Ok(InitialData {
            phi0,
            phidot0,
            y0,
            ydot0,
            mode: DataMode::ClassD,
        })
    }

    /// User-supplied oscillator data. When θ = 0 the form domain requires
    /// φ₀(0+) = <c, y₀> (checked to 1e-10).
    pub fn compatible(
        model: &NormalizedModel,
        phi0: FieldProfile,
        phidot0: FieldProfile,
        y0: Vec<f64>,
        ydot0: Vec<f64>,
    ) -> Result<InitialData> {
        let n = model.n();
        if y0.len() != n || ydot0.len() != n {
            return Err(Error::InvalidData(format!(
                "oscillator data must have {n} components, got {} and {}",
                y0.len(),
                ydot0.len()
            )));
        }
        if model.theta == 0.0 {
            let lhs = phi0.value(0.0);
            let rhs: f64 = model.c.iter().zip(&y0).map(|(c, y)| c * y).sum();
            if (lhs - rhs).abs() > 1e-10 {
                return Err(Error::InvalidData(format!(
                    "theta = 0 requires phi0(0+) = <c, y0>; got {lhs} vs {rhs}"
                )));
            }
        }
        Ok(InitialData {
            phi0,
            phidot0,
            y0,
            ydot0,
            mode: DataMode::Compatible,
        })
    }

    /// (φ₀, y₀, -φ̇₀, -ẏ₀): running this data forward traces the original
    /// state backward in time.
    pub fn time_reversed(&self) -> InitialData {
        InitialData {
            phi0: self.phi0.clone(),
            phidot0: self.phidot0.negated(),
            y0: self.y0.clone(),
            ydot0: self.ydot0.iter().map(|v| -v).collect(),
            mode: self.mode,
        }
    }
}

/// The class-D lift y = M⁻¹ v(φ) with vₖ = pₖ(∂ₓ)φ(0+) and M = VW
/// (Vandermonde rows of λ powers times diag(c)).
pub fn lift_class_d(model: &NormalizedModel, phi: &FieldProfile) -> Result<Vec<f64>> {
    let n = model.n();
    let pk = build_pk_sequence(model, n);
    let mut derivs = vec![0.0; pk.iter().map(|p| p.coeffs.len()).max().unwrap_or(1)];
    for (k, d) in derivs.iter_mut().enumerate() {
        *d = phi.derivative(k, 0.0);
    }
    let v: Vec<f64> = pk
        .iter()
        .map(|p| p.coeffs.iter().zip(&derivs).map(|(c, d)| c * d).sum())
        .collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            m[i * n + k] = model.lambda[k].powi(i as i32) * model.c[k];
        }
    }
    let (y, _) = linalg::solve(&m, &v, n).map_err(|_| Error::SingularM)?;
    Ok(y)
}

/// Energy split into its quadratic-form pieces; `total` is their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub field_gradient: f64,
    pub field_kinetic: f64,
    pub oscillator_kinetic: f64,
    pub oscillator_potential: f64,
    pub boundary: f64,
    pub total: f64,
}

/// The reduced-ODE solution with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub model: NormalizedModel,
    pub dt: f64,
    pub t_final: f64,
    pub times: Vec<f64>,
    /// Reduced state dimension; equals the degree of the boundary polynomial.
    pub state_dim: usize,
    pub warnings: Vec<String>,
    pub energy_samples: Vec<(f64, EnergyBreakdown)>,
    chars: Characteristics,
    t0: f64,
    n: usize,
    y: Vec<f64>,
    ydot: Vec<f64>,
    yddot: Vec<f64>,
    b: Vec<f64>,
    bprime: Vec<f64>,
    /// prefix[k] = ∫ b'(s)² ds from max(t0, 0) to t_k (dense part).
    bb_prefix: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Ode<'a> {
    model: &'a NormalizedModel,
    chars: &'a Characteristics,
    potential: Option<&'a dyn Potential>,
    n: usize,
    scratch: Vec<f64>,
}

impl<'a> Ode<'a> {
    fn force(&mut self, y: &[f64], out: &mut [f64]) {
        match self.potential {
            None => {
                for ((o, &l), &yi) in out.iter_mut().zip(&self.model.lambda).zip(y) {
                    *o = l * yi;
                }
            }
            Some(p) => {
                p.grad(y, &mut self.scratch);
                for (o, g) in out.iter_mut().zip(&self.scratch) {
                    *o = -g;
                }
            }
        }
    }

    /// du/dt at absolute time t. Layout: θ≠0 → [b, y, ẏ]; θ=0 → [y, ẏ].
    fn rhs(&mut self, t: f64, u: &[f64], du: &mut [f64]) {
        let n = self.n;
        let theta = self.model.theta;
        if theta != 0.0 {
            let (b, rest) = (u[0], &u[1..]);
            let (y, yd) = rest.split_at(n);
            let r = (self.chars.a(t) + b - dot(&self.model.c, y)) / theta;
            du[0] = self.chars.a_prime(t) + r;
            du[1..1 + n].copy_from_slice(yd);
            let phip = -r;
            let (_, force) = du.split_at_mut(1 + n);
            self.force(y, force);
            for (f, &ci) in force.iter_mut().zip(&self.model.c) {
                *f += ci * phip;
            }
        } else {
            let (y, yd) = u.split_at(n);
            let phip = 2.0 * self.chars.a_prime(t) - dot(&self.model.c, yd);
            du[..n].copy_from_slice(yd);
            let (_, force) = du.split_at_mut(n);
            self.force(y, force);
            for (f, &ci) in force.iter_mut().zip(&self.model.c) {
                *f += ci * phip;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn evolve_core(
    model: &NormalizedModel,
    chars: &Characteristics,
    potential: Option<&dyn Potential>,
    t0: f64,
    u0: Vec<f64>,
    t_span: f64,
    dt: f64,
    mode_warnings: Vec<String>,
) -> Result<Trajectory> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidData(format!("step dt = {dt} must be positive")));
    }
    if !t_span.is_finite() || t_span < 0.0 {
        return Err(Error::InvalidData(format!("duration {t_span} must be nonnegative")));
    }
    let n = model.n();
    let theta = model.theta;
    let steps = (t_span / dt).round().max(1.0) as usize;
    let dt = t_span / steps as f64;
    let dim = u0.len();
    let deg_p = build_p_closed_form(model).degree();
    assert_eq!(dim, deg_p, "reduced state dimension must equal deg p");

    let mut warnings = mode_warnings;
    if theta != 0.0 && dt > theta.abs() / 5.0 {
        warnings.push(format!(
            "stiff boundary relaxation: dt = {dt} exceeds |theta|/5 = {}; reduce dt",
            theta.abs() / 5.0
        ));
    }

    let mut ode = Ode {
        model,
        chars,
        potential,
        n,
        scratch: vec![0.0; n],
    };

    let k_total = steps + 1;
    let mut out_y = vec![0.0; k_total * n];
    let mut out_yd = vec![0.0; k_total * n];
    let mut out_ydd = vec![0.0; k_total * n];
    let mut out_b = vec![0.0; k_total];
    let mut out_bp = vec![0.0; k_total];
    let mut times = Vec::with_capacity(k_total);

    let mut u = u0;
    let mut du = vec![0.0; dim];
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];

    for k in 0..=steps {
        let t = t0 + k as f64 * dt;
        times.push(t);
        // record node data (ÿ and b' from one extra RHS evaluation)
        ode.rhs(t, &u, &mut du);
        if theta != 0.0 {
            out_b[k] = u[0];
            out_bp[k] = du[0];
            out_y[k * n..(k + 1) * n].copy_from_slice(&u[1..1 + n]);
            out_yd[k * n..(k + 1) * n].copy_from_slice(&u[1 + n..]);
            out_ydd[k * n..(k + 1) * n].copy_from_slice(&du[1 + n..]);
        } else {
            let (y, yd) = u.split_at(n);
            out_b[k] = dot(&model.c, y) - chars.a(t);
            out_bp[k] = dot(&model.c, yd) - chars.a_prime(t);
            out_y[k * n..(k + 1) * n].copy_from_slice(y);
            out_yd[k * n..(k + 1) * n].copy_from_slice(yd);
            out_ydd[k * n..(k + 1) * n].copy_from_slice(&du[n..]);
        }
        if k == steps {
            break;
        }
        // RK4 step (k1 = du already computed)
        k1.copy_from_slice(&du);
        for i in 0..dim {
            tmp[i] = u[i] + 0.5 * dt * k1[i];
        }
        ode.rhs(t + 0.5 * dt, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = u[i] + 0.5 * dt * k2[i];
        }
        ode.rhs(t + 0.5 * dt, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = u[i] + dt * k3[i];
        }
        ode.rhs(t + dt, &tmp, &mut k4);
        for i in 0..dim {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: t + dt });
        }
    }

    let mut traj = Trajectory {
        model: model.clone(),
        dt,
        t_final: t0 + t_span,
        times,
        state_dim: dim,
        warnings,
        energy_samples: Vec::new(),
        chars: chars.clone(),
        t0,
        n,
        y: out_y,
        ydot: out_yd,
        yddot: out_ydd,
        b: out_b,
        bprime: out_bp,
        bb_prefix: Vec::new(),
    };
    let mut prefix = Vec::with_capacity(traj.times.len());
    prefix.push(0.0);
    for k in 0..traj.times.len() - 1 {
        let lo = traj.times[k].max(0.0);
        let hi = traj.times[k + 1];
        let cell = if hi > lo {
            gl8(&|s| traj.b_prime_at(s).unwrap_or(0.0).powi(2), lo, hi)
        } else {
            0.0
        };
        prefix.push(prefix[k] + cell);
    }
    traj.bb_prefix = prefix;
    Ok(traj)
}

/// Evolve initial data for duration `t_final` with step `dt`.
///
/// `potential` switches the oscillator force from Ly to -∇V(y); everything
/// else (boundary coupling, field transport) is unchanged. Energy samples
/// along the way are stored on the returned trajectory.
pub fn evolve(
    model: &NormalizedModel,
    data: &InitialData,
    t_final: f64,
    dt: f64,
    potential: Option<&dyn Potential>,
) -> Result<Trajectory> {
    let chars = Characteristics::build(&data.phi0, &data.phidot0)?;
    let n = model.n();
    let u0 = if model.theta != 0.0 {
        let mut u = Vec::with_capacity(2 * n + 1);
        u.push(chars.b_neg(0.0));
        u.extend_from_slice(&data.y0);
        u.extend_from_slice(&data.ydot0);
        u
    } else {
        let mut u = Vec::with_capacity(2 * n);
        u.extend_from_slice(&data.y0);
        u.extend_from_slice(&data.ydot0);
        u
    };
    let mut traj = evolve_core(model, &chars, potential, 0.0, u0, t_final, dt, Vec::new())?;
    // energy samples on a decimated grid (always including both endpoints)
    let steps = traj.times.len() - 1;
    let stride = (steps / 256).max(1);
    let mut samples = Vec::new();
    for k in (0..=steps).step_by(stride) {
        let t = traj.times[k];
        samples.push((t, traj.energy_at(t, potential)?));
    }
    if steps % stride != 0 {
        let t = traj.times[steps];
        samples.push((t, traj.energy_at(t, potential)?));
    }
    traj.energy_samples = samples;
    Ok(traj)
}

/// Restart the reduced ODE from the dense state of `traj` at time `t`,
/// evolving for `t_span` more. Used by the translation-covariance check.
pub fn evolve_from_state(
    traj: &Trajectory,
    t: f64,
    t_span: f64,
    dt: f64,
    potential: Option<&dyn Potential>,
) -> Result<Trajectory> {
    let (b, y, yd) = traj.state_at(t)?;
    let u0 = if traj.model.theta != 0.0 {
        let mut u = Vec::with_capacity(2 * traj.n + 1);
        u.push(b);
        u.extend_from_slice(&y);
        u.extend_from_slice(&yd);
        u
    } else {
        let mut u = Vec::with_capacity(2 * traj.n);
        u.extend_from_slice(&y);
        u.extend_from_slice(&yd);
        u
    };
    evolve_core(&traj.model, &traj.chars, potential, t, u0, t_span, dt, Vec::new())
}

fn hermite(f0: f64, f1: f64, d0: f64, d1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (1.0 - 3.0 * s2 + 2.0 * s3) * f0
        + (3.0 * s2 - 2.0 * s3) * f1
        + h * ((s - 2.0 * s2 + s3) * d0 + (s3 - s2) * d1)
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn characteristics(&self) -> &Characteristics {
        &self.chars
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        if t < self.t0 - 1e-12 || t > self.t_final + 1e-12 {
            return Err(Error::OutOfRange(format!(
                "t = {t} outside [{}, {}]",
                self.t0, self.t_final
            )));
        }
        let steps = self.times.len() - 1;
        let raw = (t - self.t0) / self.dt;
        let k = (raw.floor() as usize).min(steps.saturating_sub(1));
        Ok((k, (raw - k as f64).clamp(0.0, 1.0)))
    }

    /// Dense reduced state (b, y, ẏ) at time t.
    pub fn state_at(&self, t: f64) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let (k, s) = self.locate(t)?;
        let n = self.n;
        if s == 0.0 {
            return Ok((
                self.b[k],
                self.y[k * n..(k + 1) * n].to_vec(),
                self.ydot[k * n..(k + 1) * n].to_vec(),
            ));
        }
        let h = self.dt;
        let b = hermite(self.b[k], self.b[k + 1], self.bprime[k], self.bprime[k + 1], h, s);
        let mut y = vec![0.0; n];
        let mut yd = vec![0.0; n];
        for i in 0..n {
            y[i] = hermite(
                self.y[k * n + i],
                self.y[(k + 1) * n + i],
                self.ydot[k * n + i],
                self.ydot[(k + 1) * n + i],
                h,
                s,
            );
            yd[i] = hermite(
                self.ydot[k * n + i],
                self.ydot[(k + 1) * n + i],
                self.yddot[k * n + i],
                self.yddot[(k + 1) * n + i],
                h,
                s,
            );
        }
        Ok((b, y, yd))
    }

    /// y at node k (no interpolation).
    pub fn y_node(&self, k: usize) -> &[f64] {
        &self.y[k * self.n..(k + 1) * self.n]
    }

    pub fn ydot_node(&self, k: usize) -> &[f64] {
        &self.ydot[k * self.n..(k + 1) * self.n]
    }

    pub fn b_node(&self, k: usize) -> f64 {
        self.b[k]
    }

    pub fn bprime_node(&self, k: usize) -> f64 {
        self.bprime[k]
    }

    fn dense_b(&self, k: usize, s: f64) -> f64 {
        hermite(self.b[k], self.b[k + 1], self.bprime[k], self.bprime[k + 1], self.dt, s)
    }

    /// <c, y(t)> through the dense output, allocation-free (hot path).
    fn dense_dot_c_y(&self, k: usize, s: f64) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.model.c[i]
                    * hermite(
                        self.y[k * n + i],
                        self.y[(k + 1) * n + i],
                        self.ydot[k * n + i],
                        self.ydot[(k + 1) * n + i],
                        self.dt,
                        s,
                    )
            })
            .sum()
    }

    fn dense_dot_c_ydot(&self, k: usize, s: f64) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.model.c[i]
                    * hermite(
                        self.ydot[k * n + i],
                        self.ydot[(k + 1) * n + i],
                        self.yddot[k * n + i],
                        self.yddot[(k + 1) * n + i],
                        self.dt,
                        s,
                    )
            })
            .sum()
    }

    /// b(s): analytic for s <= t0 (from the initial data), dense inside the
    /// integrated window.
    pub fn b_at(&self, s: f64) -> Result<f64> {
        if s <= self.t0 {
            if self.t0 != 0.0 {
                return Err(Error::OutOfRange(
                    "restarted trajectory has no analytic prefix".into(),
                ));
            }
            return Ok(self.chars.b_neg(s));
        }
        let (k, u) = self.locate(s)?;
        Ok(if u == 0.0 { self.b[k] } else { self.dense_b(k, u) })
    }

    /// b'(s): analytic for s <= t0, otherwise reconstructed algebraically
    /// from the dense state (exact boundary relation, no differencing).
    pub fn b_prime_at(&self, s: f64) -> Result<f64> {
        if s <= self.t0 {
            if self.t0 != 0.0 {
                return Err(Error::OutOfRange(
                    "restarted trajectory has no analytic prefix".into(),
                ));
            }
            return Ok(self.chars.b_neg_prime(s));
        }
        let (k, u) = self.locate(s)?;
        if u == 0.0 {
            return Ok(self.bprime[k]);
        }
        let theta = self.model.theta;
        if theta != 0.0 {
            let b = self.dense_b(k, u);
            Ok(self.chars.a_prime(s) + (self.chars.a(s) + b - self.dense_dot_c_y(k, u)) / theta)
        } else {
            Ok(self.dense_dot_c_ydot(k, u) - self.chars.a_prime(s))
        }
    }

    /// Field snapshot φ(t,x), φ̇(t,x) = a(x+t) ± b(t-x) pieces.
    pub fn field_snapshot(&self, t: f64, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
        if t < self.t0 || t > self.t_final {
            return Err(Error::OutOfRange(format!(
                "snapshot time {t} outside [{}, {}]",
                self.t0, self.t_final
            )));
        }
        xs.iter()
            .map(|&x| {
                if x < 0.0 {
                    return Err(Error::OutOfRange(format!("snapshot point x = {x} < 0")));
                }
                let phi = self.chars.a(x + t) + self.b_at(t - x)?;
                let phidot = self.chars.a_prime(x + t) + self.b_prime_at(t - x)?;
                Ok((phi, phidot))
            })
            .collect()
    }

    /// Energy at time t, split into its pieces.
    ///
    /// Field integrals reduce to one-dimensional quadratures of a' and b':
    /// `∫ a'(x+t)² dx = ∫_t^∞ a'²` and `∫ b'(t-x)² dx = ∫_{-∞}^t b'²`, plus
    /// the cross term over the overlap window; the dense part of b' is
    /// integrated panel-wise on the RK grid where it is piecewise polynomial.
    pub fn energy_at(&self, t: f64, potential: Option<&dyn Potential>) -> Result<EnergyBreakdown> {
        let chars = &self.chars;
        let hi = chars.support_hi();
        // ∫_t^∞ a'^2
        let aa = if t < hi {
            adaptive_simpson(&|s| chars.a_prime(s).powi(2), t, hi, 1e-14)?
        } else {
            0.0
        };
        // ∫_{-∞}^{min(t,0)} b'^2 (analytic piece)
        let neg_hi = t.min(0.0);
        let bb_neg = if -hi < neg_hi {
            adaptive_simpson(&|s| chars.b_neg_prime(s).powi(2), -hi, neg_hi, 1e-14)?
        } else {
            0.0
        };
        // dense piece on (0, t] from the cached prefix integrals
        let mut bb_pos = 0.0;
        if t > self.t0.max(0.0) {
            let (k, u) = self.locate(t)?;
            bb_pos = self.bb_prefix[k];
            if u > 0.0 {
                let lo = self.times[k].max(0.0);
                if t > lo {
                    bb_pos += gl8(&|s| self.b_prime_at(s).unwrap_or(0.0).powi(2), lo, t);
                }
            }
        }
        let bb = bb_neg + bb_pos;
        // cross term ∫_0^∞ a'(x+t) b'(t-x) dx over the a' support
        let (lo_a, hi_a) = {
            let (l0, h0) = chars.phi0.support();
            let (l1, h1) = chars.phidot0.support();
            (l0.min(l1), h0.max(h1))
        };
        let x_lo = (lo_a - t).max(0.0);
        let x_hi = hi_a - t;
        let mut cross = 0.0;
        if x_hi > x_lo {
            // dense region x < t: panel boundaries at the nodes x = t - t_k
            let dense_hi = t.min(x_hi);
            if dense_hi > x_lo {
                let mut cuts = vec![x_lo, dense_hi];
                for &tk in &self.times {
                    let x = t - tk;
                    if x > x_lo && x < dense_hi {
                        cuts.push(x);
                    }
                }
                cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
                for w in cuts.windows(2) {
                    cross += gl8(
                        &|x| chars.a_prime(x + t) * self.b_prime_at(t - x).unwrap_or(0.0),
                        w[0],
                        w[1],
                    );
                }
            }
            // analytic region x > t: both factors smooth
            let ana_lo = t.max(x_lo);
            if x_hi > ana_lo {
                cross += adaptive_simpson(
                    &|x| chars.a_prime(x + t) * chars.b_neg_prime(t - x),
                    ana_lo,
                    x_hi,
                    1e-14,
                )?;
            }
        }
        let (b, y, yd) = self.state_at(t)?;
        let oscillator_kinetic = 0.5 * yd.iter().map(|v| v * v).sum::<f64>();
        let oscillator_potential = match potential {
            None => -0.5 * self.model.lambda.iter().zip(&y).map(|(l, yi)| l * yi * yi).sum::<f64>(),
            Some(p) => p.value(&y),
        };
        let theta = self.model.theta;
        let boundary = if theta != 0.0 {
            let tau = chars.a(t) + b - dot(&self.model.c, &y);
            -tau * tau / (2.0 * theta)
        } else {
            0.0
        };
        let field_gradient = 0.5 * (aa + bb - 2.0 * cross);
        let field_kinetic = 0.5 * (aa + bb + 2.0 * cross);
        Ok(EnergyBreakdown {
            field_gradient,
            field_kinetic,
            oscillator_kinetic,
            oscillator_potential,
            boundary,
            total: field_gradient + field_kinetic + oscillator_kinetic + oscillator_potential + boundary,
        })
    }

    /// Max relative energy drift over the stored samples.
    pub fn energy_drift(&self) -> f64 {
        let e0 = match self.energy_samples.first() {
            Some((_, e)) => e.total,
            None => return 0.0,
        };
        if e0 == 0.0 {
            return self
                .energy_samples
                .iter()
                .map(|(_, e)| e.total.abs())
                .fold(0.0, f64::max);
        }
        self.energy_samples
            .iter()
            .map(|(_, e)| (e.total - e0).abs() / e0.abs())
            .fold(0.0, f64::max)
    }

    /// Boundary-condition residual |θφ'(t,0+) + φ(t,0+) - <c,y>| sampled at
    /// step midpoints through the dense output (at the nodes the relation
    /// holds by construction; midpoints measure interpolation consistency).
    pub fn boundary_residual_max(&self) -> f64 {
        let mut worst = 0.0_f64;
        let steps = self.times.len() - 1;
        for k in 0..steps {
            let t = 0.5 * (self.times[k] + self.times[k + 1]);
            let (b, y, yd) = match self.state_at(t) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let phi = self.chars.a(t) + b;
            let theta = self.model.theta;
            let phip = if theta != 0.0 {
                -(self.chars.a(t) + b - dot(&self.model.c, &y)) / theta
            } else {
                2.0 * self.chars.a_prime(t) - dot(&self.model.c, &yd)
            };
            let res = (theta * phip + phi - dot(&self.model.c, &y)).abs();
            worst = worst.max(res);
        }
        worst
    }

    /// Least-squares slope of log ||(y, ẏ)(t)|| over nodes in [t0, t1]
    /// (the asymptotic decay rate; compare against -min Re of the resonances).
    pub fn decay_fit(&self, t_lo: f64, t_hi: f64) -> Option<f64> {
        let n = self.n;
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        let mut count = 0.0;
        for (k, &t) in self.times.iter().enumerate() {
            if t < t_lo || t > t_hi {
                continue;
            }
            let norm2: f64 = (0..n)
                .map(|i| self.y[k * n + i].powi(2) + self.ydot[k * n + i].powi(2))
                .sum();
            if norm2 <= 1e-300 {
                continue;
            }
            let ln = 0.5 * norm2.ln();
            sx += t;
            sy += ln;
            sxx += t * t;
            sxy += t * ln;
            count += 1.0;
        }
        if count < 8.0 {
            return None;
        }
        let denom = count * sxx - sx * sx;
        if denom.abs() < 1e-30 {
            return None;
        }
        Some((count * sxy - sx * sy) / denom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize, ModelSpec};

    fn model(lambda: Vec<f64>, c: Vec<f64>, theta: f64) -> NormalizedModel {
        normalize(&ModelSpec {
            eigenvalues: lambda,
            coupling: c,
            metric: None,
            theta,
        })
        .unwrap()
    }

    fn lamb() -> NormalizedModel {
        model(vec![-1.0], vec![1.0], 0.0)
    }

    fn gaussian_data(m: &NormalizedModel) -> InitialData {
        InitialData::compatible(
            m,
            FieldProfile::gaussian(1.0, 5.0, 1.0),
            FieldProfile::zero(),
            vec![0.0; m.n()],
            vec![0.0; m.n()],
        )
        .unwrap()
    }

    #[test]
    fn characteristics_split_hand_checked() {
        // phi0 = e^{-(x-5)^2}, phidot0 = 0: a' = phi0'/2, b'(-x) = -phi0'/2
        let phi0 = FieldProfile::gaussian(1.0, 5.0, 1.0);
        let chars = Characteristics::build(&phi0, &FieldProfile::zero()).unwrap();
        for &x in &[0.5, 3.0, 5.0, 6.5] {
            let dp = phi0.derivative(1, x);
            assert!((chars.a_prime(x) - 0.5 * dp).abs() < 1e-15);
            assert!((chars.b_neg_prime(-x) + 0.5 * dp).abs() < 1e-15);
            // reconstruction identities at t = 0
            assert!((chars.a(x) + chars.b_neg(-x) - phi0.value(x)).abs() < 1e-13);
            assert!((chars.a_prime(x) + chars.b_neg_prime(-x)).abs() < 1e-15);
        }
    }

    #[test]
    fn characteristics_right_mover_has_no_incoming_part() {
        // phidot0 = -phi0' makes the data purely outgoing: a' = 0
        let phi0 = FieldProfile::gaussian(1.0, 5.0, 1.0);
        let phidot0 = FieldProfile::new(vec![crate::profile::ProfileTerm::Gaussian {
            amplitude: 2.0,
            center: 5.0,
            sigma: 1.0,
            power: 1,
        }])
        .unwrap();
        let chars = Characteristics::build(&phi0, &phidot0).unwrap();
        for &x in &[1.0, 4.0, 5.0, 7.0] {
            assert!((phidot0.value(x) + phi0.derivative(1, x)).abs() < 1e-15);
            assert!(chars.a_prime(x).abs() < 1e-15);
        }
    }

    #[test]
    fn characteristics_with_nonzero_velocity_profile() {
        // tail integral path: T(x) = ∫_x^∞ phidot0 with phidot0 a gaussian
        let phidot0 = FieldProfile::gaussian(0.7, 4.0, 2.0);
        let chars = Characteristics::build(&FieldProfile::zero(), &phidot0).unwrap();
        for &x in &[0.0, 2.0, 4.0, 6.0] {
            let direct = adaptive_simpson(&|s| phidot0.value(s), x, 12.0, 1e-14).unwrap();
            let tail = -2.0 * chars.a(x); // a = -T/2 here
            assert!((tail - direct).abs() < 1e-11, "{tail} vs {direct}");
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let m = lamb();
        let data = InitialData::compatible(
            &m,
            FieldProfile::zero(),
            FieldProfile::zero(),
            vec![0.0],
            vec![0.0],
        )
        .unwrap();
        let traj = evolve(&m, &data, 5.0, 1e-2, None).unwrap();
        assert_eq!(traj.state_dim, 2);
        let (b, y, yd) = traj.state_at(5.0).unwrap();
        assert_eq!(b, 0.0);
        assert_eq!(y[0], 0.0);
        assert_eq!(yd[0], 0.0);
        assert_eq!(traj.energy_samples.last().unwrap().1.total, 0.0);
        for (phi, phidot) in traj.field_snapshot(2.5, &[0.0, 1.0, 3.0]).unwrap() {
            assert_eq!(phi, 0.0);
            assert_eq!(phidot, 0.0);
        }
    }

    #[test]
    fn causality_with_bump_data() {
        // data supported on [5, 6]: y stays exactly zero until t = 5
        let m = lamb();
        let data = InitialData::compatible(
            &m,
            FieldProfile::bump(1.0, 5.5, 0.5).unwrap(),
            FieldProfile::zero(),
            vec![0.0],
            vec![0.0],
        )
        .unwrap();
        let traj = evolve(&m, &data, 8.0, 1e-3, None).unwrap();
        let mut max_pre = 0.0_f64;
        let mut max_post = 0.0_f64;
        for (k, &t) in traj.times.iter().enumerate() {
            let norm = traj.y_node(k)[0].abs();
            if t < 5.0 {
                max_pre = max_pre.max(norm);
            } else {
                max_post = max_post.max(norm);
            }
        }
        assert!(max_pre <= 1e-12, "causality violated: {max_pre}");
        assert!(max_post > 1e-3, "pulse should excite the oscillator");
    }

    #[test]
    fn snapshot_reproduces_initial_data_and_free_region() {
        let m = lamb();
        let data = gaussian_data(&m);
        let traj = evolve(&m, &data, 3.0, 1e-3, None).unwrap();
        let xs = [0.5, 2.0, 5.0, 7.5];
        for (x, (phi, phidot)) in xs.iter().zip(traj.field_snapshot(0.0, &xs).unwrap()) {
            assert!((phi - data.phi0.value(*x)).abs() < 1e-12);
            assert!(phidot.abs() < 1e-12);
        }
        // x > t: not yet influenced by the boundary, so the snapshot equals
        // the free whole-line evolution (phi0(x-t) + phi0(x+t))/2
        let t = 3.0;
        let xs = [6.0, 8.0, 9.5];
        for (x, (phi, _)) in xs.iter().zip(traj.field_snapshot(t, &xs).unwrap()) {
            let expect = 0.5 * (data.phi0.value(x - t) + data.phi0.value(x + t));
            assert!((phi - expect).abs() < 1e-12, "{phi} vs {expect}");
        }
    }

    #[test]
    fn lift_class_d_hand_values() {
        // bump far from the origin: all boundary derivatives vanish
        let m2 = model(vec![-1.0, -2.0], vec![1.0, 1.0], 0.0);
        let bump = FieldProfile::bump(1.0, 5.5, 0.5).unwrap();
        let y = lift_class_d(&m2, &bump).unwrap();
        assert_eq!(y, vec![0.0, 0.0]);

        // Lamb, phi = e^{-x^2}: v1 = phi(0) = 1, M = 1
        let m = lamb();
        let phi = FieldProfile::gaussian(1.0, 0.0, 1.0);
        let y = lift_class_d(&m, &phi).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-14);

        // theta = 2: p1 = 2z + 1, v1 = 2 phi'(0) + phi(0) = 1 (phi'(0) = 0)
        let mt = model(vec![-1.0], vec![1.0], 2.0);
        let y = lift_class_d(&mt, &phi).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn energy_at_zero_matches_direct_quadrature() {
        let m = lamb();
        let data = gaussian_data(&m);
        let traj = evolve(&m, &data, 1.0, 1e-3, None).unwrap();
        let e = traj.energy_at(0.0, None).unwrap();
        let direct = 0.5
            * adaptive_simpson(&|x| data.phi0.derivative(1, x).powi(2), 0.0, 12.0, 1e-14).unwrap();
        assert!(
            (e.total - direct).abs() < 1e-10 * direct,
            "{} vs {direct}",
            e.total
        );
        assert!((e.field_kinetic).abs() < 1e-12);
        assert!(e.oscillator_kinetic == 0.0 && e.oscillator_potential == 0.0);
        let sum = e.field_gradient + e.field_kinetic + e.oscillator_kinetic + e.oscillator_potential + e.boundary;
        assert_eq!(sum, e.total);
    }

    #[test]
    fn energy_conserved_along_lamb_trajectory() {
        let m = lamb();
        let data = gaussian_data(&m);
        let traj = evolve(&m, &data, 10.0, 1e-3, None).unwrap();
        assert!(traj.energy_drift() < 1e-8, "drift {}", traj.energy_drift());
    }

    #[test]
    fn theta_nonzero_dynamics_conserves_energy_and_satisfies_boundary() {
        let pi = std::f64::consts::PI;
        let m = model(vec![-0.5], vec![-pi.sqrt()], -0.5);
        let data = gaussian_data(&m);
        let traj = evolve(&m, &data, 10.0, 1e-3, None).unwrap();
        assert_eq!(traj.state_dim, 3);
        assert!(traj.energy_drift() < 1e-8, "drift {}", traj.energy_drift());
        assert!(traj.boundary_residual_max() < 1e-8);
        assert!(traj.warnings.is_empty());
    }

    #[test]
    fn relaxation_rate_matches_slowest_resonance_for_theta_nonzero() {
        // elastic-shell parameters: the slow real resonance sets the rate
        let pi = std::f64::consts::PI;
        let m = model(vec![-0.5], vec![-pi.sqrt()], -0.5);
        let data = gaussian_data(&m);
        let traj = evolve(&m, &data, 50.0, 2e-3, None).unwrap();
        let slope = traj.decay_fit(20.0, 50.0).unwrap();
        let roots = crate::poly::find_roots(&build_p_closed_form(&m)).unwrap();
        let min_re = roots.min_resonance_decay().unwrap();
        let rel = ((-slope) - min_re).abs() / min_re;
        assert!(rel < 0.05, "rate {} vs {min_re} (rel {rel:.3})", -slope);
        // the oscillator relaxes
        let early: f64 = traj.state_at(10.0).unwrap().1[0].abs();
        let late: f64 = traj.state_at(50.0).unwrap().1[0].abs();
        assert!(late < 1e-2 * early);
    }

    #[test]
    fn stiff_warning_when_dt_exceeds_theta_scale() {
        let m = model(vec![-1.0], vec![1.0], -0.01);
        let data = gaussian_data(&m);
        let traj = evolve(&m, &data, 0.5, 1e-2, None).unwrap();
        assert!(traj.warnings.iter().any(|w| w.contains("stiff")));
    }

    #[test]
    fn nonlinear_potential_matching_linear_term_reproduces_trajectory() {
        use crate::potential::PolyPotential;
        let m = lamb();
        let data = gaussian_data(&m);
        let lin = evolve(&m, &data, 5.0, 1e-3, None).unwrap();
        // V(y) = -1/2 <Ly, y> = 1/2 y^2 for lambda = -1
        let pot = PolyPotential::parse("0.5*y^2", &["y".into()], 1).unwrap();
        let non = evolve(&m, &data, 5.0, 1e-3, Some(&pot)).unwrap();
        let mut worst = 0.0_f64;
        for k in 0..lin.times.len() {
            worst = worst.max((lin.y_node(k)[0] - non.y_node(k)[0]).abs());
        }
        assert!(worst < 1e-10, "sup deviation {worst}");
    }

    #[test]
    fn incompatible_data_rejected_when_theta_zero() {
        let m = lamb();
        let err = InitialData::compatible(
            &m,
            FieldProfile::gaussian(1.0, 5.0, 1.0),
            FieldProfile::zero(),
            vec![1.0],
            vec![0.0],
        );
        assert!(err.is_err(), "phi0(0) != <c,y0> must be rejected for theta = 0");
    }

    #[test]
    fn nonfinite_state_reported_for_runaway_potential() {
        use crate::potential::PolyPotential;
        // theta != 0 has no form-domain constraint, so the oscillator can
        // start displaced; V unbounded below blows the flow up in finite time
        let m = model(vec![-1.0], vec![1.0], -0.5);
        let pot = PolyPotential::parse("-1*y^4", &["-4*y^3".into()], 1).unwrap();
        let data = InitialData::compatible(
            &m,
            FieldProfile::zero(),
            FieldProfile::zero(),
            vec![1.0],
            vec![0.0],
        )
        .unwrap();
        let r = evolve(&m, &data, 50.0, 1e-2, Some(&pot));
        match r {
            Err(Error::NonFiniteState { .. }) => {}
            other => panic!("expected NonFiniteState, got {:?}", other.map(|t| t.times.len())),
        }
    }

    #[test]
    fn state_dimension_equals_polynomial_degree() {
        for (theta, expect) in [(0.0, 4), (1.5, 5)] {
            let m = model(vec![-1.0, -2.0], vec![1.0, 1.0], theta);
            let data = gaussian_data(&m);
            let traj = evolve(&m, &data, 1.0, 1e-2, None).unwrap();
            assert_eq!(traj.state_dim, expect);
            assert_eq!(traj.state_dim, build_p_closed_form(&m).degree());
        }
    }
}
