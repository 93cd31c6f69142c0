//! Hamiltonian flow of the main Hamiltonian and extraction of the scattering
//! data `(q, p)` from late-time behaviour.
//!
//! Hamilton's equations `lambda' = dH/dtheta`, `theta' = -dH/dlambda` are
//! integrated with the Dormand-Prince 5(4) pair. At late times
//! `theta_k -> q_k` and `lambda_k(t) = t sinh(q_k) - p_k + O(1/t)`.

use serde::Serialize;

use super::poisson::{grad_raw, Observable};
use crate::domain::{check_chamber, ActionVector, Params, PhasePoint, DEFAULT_GUARD};
use crate::error::{Error, Result};
use crate::lax::build_lax;
use crate::spectral::char_poly_eigen;
use crate::vandiejen::main_hamiltonian;

/// Integrator settings.
#[derive(Debug, Clone, Serialize)]
pub struct FlowOptions {
    pub t_end: f64,
    /// Local error tolerance; each component is scaled by `1 + |y|`.
    pub tol: f64,
    /// Times the integrator lands on exactly (in addition to every accepted step).
    pub checkpoints: Vec<f64>,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl FlowOptions {
    pub fn new(t_end: f64, tol: f64) -> Self {
        FlowOptions {
            t_end,
            tol,
            checkpoints: Vec::new(),
            h_init: 1e-3,
            h_min: 1e-12,
            max_steps: 1_000_000,
        }
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<f64>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidArgument(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.h_init > 0.0 && self.h_min > 0.0 && self.h_min <= self.h_init) {
            return Err(Error::InvalidArgument("need 0 < h_min <= h_init".into()));
        }
        Ok(())
    }
}

/// Accepted states of a flow together with the conserved quantities
/// `[H, K_1, ..., K_n]` at each of them.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub conserved: Vec<Vec<f64>>,
}

impl Trajectory {
    fn new() -> Self {
        Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            conserved: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has its initial state")
    }

    pub fn final_state(&self) -> &PhasePoint {
        self.states.last().expect("trajectory has its initial state")
    }

    /// The recorded state whose time is closest to `t`.
    pub fn state_near(&self, t: f64) -> (f64, &PhasePoint) {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .expect("trajectory has its initial state");
        (self.times[i], &self.states[i])
    }

    /// Per-quantity `max_t |c(t) - c(0)| / (1 + |c(0)|)`, ordered `[H, K_1..K_n]`.
    pub fn conserved_drift(&self) -> Vec<f64> {
        let first = &self.conserved[0];
        (0..first.len())
            .map(|i| {
                self.conserved
                    .iter()
                    .map(|c| (c[i] - first[i]).abs() / (1.0 + first[i].abs()))
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// Largest drift among `K_1..K_n`.
    pub fn max_k_drift(&self) -> f64 {
        self.conserved_drift().into_iter().skip(1).fold(0.0, f64::max)
    }
}

/// `[H, K_1, ..., K_n]` at a point.
pub fn conserved_quantities(point: &PhasePoint, params: &Params) -> Result<Vec<f64>> {
    let k = char_poly_eigen(&build_lax(point, params)?)?;
    let mut out = Vec::with_capacity(point.n() + 1);
    out.push(main_hamiltonian(point, params));
    out.extend_from_slice(&k.as_slice()[1..=point.n()]);
    Ok(out)
}

/// Phase-space velocity `(dH/dtheta, -dH/dlambda)` in the layout `[lambda, theta]`.
fn vector_field(y: &[f64], params: &Params) -> Result<Vec<f64>> {
    let n = y.len() / 2;
    let g = grad_raw(Observable::MainH, &y[..n], &y[n..], params)?;
    Ok(g.d_theta.into_iter().chain(g.d_lambda.into_iter().map(|x| -x)).collect())
}

fn in_chamber(y: &[f64]) -> bool {
    let n = y.len() / 2;
    y.iter().all(|x| x.is_finite()) && check_chamber(&y[..n], DEFAULT_GUARD).is_ok()
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

enum StepOutcome {
    Accepted { y: Vec<f64>, err: f64 },
    /// A stage left the chamber.
    OutOfChamber,
}

fn dopri_step(y: &[f64], h: f64, tol: f64, params: &Params) -> Result<StepOutcome> {
    let dim = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    for row in &A {
        let stage: Vec<f64> = (0..dim)
            .map(|i| y[i] + h * k.iter().zip(row).map(|(kj, a)| a * kj[i]).sum::<f64>())
            .collect();
        if !in_chamber(&stage) {
            return Ok(StepOutcome::OutOfChamber);
        }
        k.push(vector_field(&stage, params)?);
    }
    let y5: Vec<f64> = (0..dim)
        .map(|i| y[i] + h * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>())
        .collect();
    let err = (0..dim)
        .map(|i| {
            let e = h * (0..7).map(|s| (B5[s] - B4[s]) * k[s][i]).sum::<f64>();
            e.abs() / (tol * (1.0 + y[i].abs().max(y5[i].abs())))
        })
        .fold(0.0, f64::max);
    Ok(StepOutcome::Accepted { y: y5, err })
}

fn pack(point: &PhasePoint) -> Vec<f64> {
    point.lambda().iter().chain(point.theta()).copied().collect()
}

fn unpack(y: &[f64]) -> Result<PhasePoint> {
    let n = y.len() / 2;
    PhasePoint::new(y[..n].to_vec(), y[n..].to_vec())
}

/// Integrates the flow of the main Hamiltonian from `start` to `options.t_end`.
///
/// Fails with `ChamberExit` (carrying the partial trajectory) if the solution
/// cannot be continued inside the Weyl chamber, and with `StepUnderflow` if the
/// step size collapses for accuracy reasons.
pub fn integrate_flow(start: &PhasePoint, params: &Params, options: &FlowOptions) -> Result<Trajectory> {
    options.validate()?;
    let mut stops: Vec<f64> = options
        .checkpoints
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < options.t_end)
        .chain(std::iter::once(options.t_end))
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut traj = Trajectory::new();
    let record = |traj: &mut Trajectory, t: f64, point: PhasePoint| -> Result<()> {
        traj.conserved.push(conserved_quantities(&point, params)?);
        traj.times.push(t);
        traj.states.push(point);
        Ok(())
    };
    record(&mut traj, 0.0, start.clone())?;

    let mut y = pack(start);
    let mut t = 0.0;
    let mut h = options.h_init.min(options.t_end);
    let mut next_stop = 0;
    let mut steps = 0;
    while next_stop < stops.len() {
        if steps >= options.max_steps {
            return Err(Error::StepUnderflow { t, step: h });
        }
        steps += 1;
        let target = stops[next_stop];
        let lands = t + h >= target;
        let h_try = if lands { target - t } else { h };
        match dopri_step(&y, h_try, options.tol, params)? {
            StepOutcome::OutOfChamber => {
                h = h_try * 0.25;
                if h < options.h_min {
                    return Err(Error::ChamberExit {
                        t,
                        reason: "no step keeps the positions ordered and positive".into(),
                        partial: Box::new(traj),
                    });
                }
            }
            StepOutcome::Accepted { y: y_new, err } => {
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if err <= 1.0 {
                    if !in_chamber(&y_new) {
                        return Err(Error::ChamberExit {
                            t: t + h_try,
                            reason: "accepted state left the chamber".into(),
                            partial: Box::new(traj),
                        });
                    }
                    t = if lands { target } else { t + h_try };
                    y = y_new;
                    record(&mut traj, t, unpack(&y)?)?;
                    if lands {
                        next_stop += 1;
                    }
                    h = (h_try * factor).max(if lands { h } else { 0.0 });
                } else {
                    h = h_try * factor;
                    if h < options.h_min {
                        return Err(Error::StepUnderflow { t, step: h });
                    }
                }
            }
        }
    }
    Ok(traj)
}

/// Late-time estimates of the scattering data.
#[derive(Debug, Clone, Serialize)]
pub struct ScatteringData {
    /// Momenta at the final time (flow route).
    pub q_flow: Vec<f64>,
    /// Actions from the Lax spectrum (spectral route).
    pub q_spectral: Vec<f64>,
    /// `max_k |q_flow - q_spectral|`.
    pub q_agreement: f64,
    /// Mean of `t sinh(q_k) - lambda_k(t)` over the later half-window.
    pub p_est: Vec<f64>,
    /// `[t_start, t_mid, t_end]` of the averaging windows.
    pub fit_window: [f64; 3],
    /// `max_k` difference of the two half-window means of the impact parameters.
    pub p_stabilization: f64,
}

/// Default fraction of the time span used for averaging.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.2;
/// Largest acceptable difference between the two half-window estimates.
pub const STABILIZATION_TOLERANCE: f64 = 1e-2;

/// [`extract_scattering_with`] using the final [`DEFAULT_WINDOW_FRACTION`] of the run.
pub fn extract_scattering(traj: &Trajectory, actions: &ActionVector) -> Result<ScatteringData> {
    extract_scattering_with(traj, actions, DEFAULT_WINDOW_FRACTION)
}

fn window_mean(times: &[f64], values: &[f64], from: f64, to: f64) -> f64 {
    let mut integral = 0.0;
    for i in 1..times.len() {
        let (a, b) = (times[i - 1].max(from), times[i].min(to));
        if b <= a {
            continue;
        }
        let slope = (values[i] - values[i - 1]) / (times[i] - times[i - 1]);
        let at = |t: f64| values[i - 1] + slope * (t - times[i - 1]);
        integral += 0.5 * (at(a) + at(b)) * (b - a);
    }
    integral / (to - from)
}

/// Estimates `p` by time-averaging over the final `window_fraction` of the run,
/// split in two halves; the halves must agree to [`STABILIZATION_TOLERANCE`].
pub fn extract_scattering_with(
    traj: &Trajectory,
    actions: &ActionVector,
    window_fraction: f64,
) -> Result<ScatteringData> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "window fraction must lie in (0, 1], got {window_fraction}"
        )));
    }
    let n = actions.n();
    if traj.final_state().n() != n {
        return Err(Error::LengthMismatch {
            expected: traj.final_state().n(),
            found: n,
        });
    }
    if traj.len() < 3 {
        return Err(Error::InvalidArgument("trajectory too short".into()));
    }
    let t_end = traj.final_time();
    let t_start = t_end * (1.0 - window_fraction);
    let t_mid = 0.5 * (t_start + t_end);
    let q = actions.q();
    let q_flow = traj.final_state().theta().to_vec();
    let q_agreement = q_flow.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut p_est = Vec::with_capacity(n);
    let mut p_stabilization: f64 = 0.0;
    for (k, qk) in q.iter().enumerate() {
        let shift = qk.sinh();
        let p: Vec<f64> = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| t * shift - s.lambda()[k])
            .collect();
        let early = window_mean(&traj.times, &p, t_start, t_mid);
        let late = window_mean(&traj.times, &p, t_mid, t_end);
        p_stabilization = p_stabilization.max((late - early).abs());
        p_est.push(late);
    }
    if !(p_stabilization <= STABILIZATION_TOLERANCE) {
        return Err(Error::NotAsymptotic {
            difference: p_stabilization,
            tolerance: STABILIZATION_TOLERANCE,
        });
    }
    Ok(ScatteringData {
        q_flow,
        q_spectral: q.to_vec(),
        q_agreement,
        p_est,
        fit_window: [t_start, t_mid, t_end],
        p_stabilization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_mean_of_linear_function() {
        let t: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let v: Vec<f64> = t.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((window_mean(&t, &v, 2.5, 7.5) - 11.0).abs() < 1e-14);
    }

    #[test]
    fn single_particle_energy_is_conserved() {
        let pr = Params::new(1.0, 0.5, 0.8).unwrap();
        let start = PhasePoint::new(vec![2.0], vec![-0.5]).unwrap();
        let traj = integrate_flow(&start, &pr, &FlowOptions::new(20.0, 1e-10)).unwrap();
        assert!(traj.conserved_drift()[0] < 1e-8);
        assert_eq!(traj.final_time(), 20.0);
        // incoming particle is reflected
        assert!(traj.final_state().theta()[0] > 0.0);
    }

    #[test]
    fn checkpoints_are_hit_exactly() {
        let pr = Params::new(1.0, 0.5, 0.8).unwrap();
        let start = PhasePoint::new(vec![3.0, 1.0], vec![0.2, -0.1]).unwrap();
        let opts = FlowOptions::new(5.0, 1e-8).with_checkpoints(vec![1.0, 2.5]);
        let traj = integrate_flow(&start, &pr, &opts).unwrap();
        assert!(traj.times.contains(&1.0));
        assert!(traj.times.contains(&2.5));
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn bad_options_are_rejected() {
        let pr = Params::new(1.0, 0.5, 0.8).unwrap();
        let start = PhasePoint::new(vec![2.0], vec![0.0]).unwrap();
        let err = integrate_flow(&start, &pr, &FlowOptions::new(-1.0, 1e-8)).unwrap_err();
        assert_eq!(err.kind(), "InvalidArgument");
        let err = integrate_flow(&start, &pr, &FlowOptions::new(1.0, 0.0)).unwrap_err();
        assert_eq!(err.kind(), "InvalidArgument");
    }
}
