//! Natural-parameter continuation of a single state with a secant predictor.

use crate::error::{Error, Result};

use super::{GaugeSlice, Problem, ShootingState, Solution, UNKNOWNS};

/// Largest ratio of the predicted step to the previous one.
pub const MAX_SECANT_RATIO: f64 = 4.0;

/// Step limits for [`Track::advance`].
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepControl {
    pub max_step: f64,
    /// Smallest substep tried before giving up.
    pub min_step: f64,
}

impl StepControl {
    pub const fn new(max_step: f64, min_step: f64) -> Self {
        Self { max_step, min_step }
    }
}

impl Default for StepControl {
    fn default() -> Self {
        Self::new(1e-3, 1e-5)
    }
}

/// A converged state at parameter `t` together with the previous point of
/// the path, used for secant prediction.
#[derive(Clone, Debug)]
pub struct Track {
    param: f64,
    solution: Solution,
    prev: Option<(f64, ShootingState)>,
}

impl Track {
    pub fn new(param: f64, solution: Solution) -> Self {
        Self {
            param,
            solution,
            prev: None,
        }
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn solution(&self) -> &Solution {
        &self.solution
    }

    pub fn into_solution(self) -> Solution {
        self.solution
    }

    /// Linear extrapolation of the last two points to `t`. Falls back to the
    /// current state when `t` lies more than [`MAX_SECANT_RATIO`] previous
    /// steps ahead.
    pub fn predict(&self, t: f64) -> ShootingState {
        let cur = self.solution.state();
        let Some((t0, s0)) = self.prev else {
            return cur;
        };
        let dt = self.param - t0;
        if dt == 0.0 {
            return cur;
        }
        let w = (t - self.param) / dt;
        if w.abs() > MAX_SECANT_RATIO {
            return cur;
        }
        // both ends in one gauge, or the secant picks up a phase rotation
        let Ok((s0, cur)) = GaugeSlice::through(&cur).and_then(|sl| Ok((s0.gauge_fixed(&sl)?, cur.gauge_fixed(&sl)?))) else {
            return cur;
        };
        let (u0, u1) = (s0.to_unknowns(), cur.to_unknowns());
        let u: [f64; UNKNOWNS] = core::array::from_fn(|k| u1[k] + w * (u1[k] - u0[k]));
        ShootingState::from_unknowns(&u)
    }

    /// Continues to `target`, where `make(t)` builds the problem at parameter
    /// `t`. Substeps are halved on failure down to `ctrl.min_step` and doubled
    /// after success up to `ctrl.max_step`. On error the track stays at the
    /// last converged point.
    pub fn advance<F>(&mut self, make: F, target: f64, ctrl: &StepControl) -> Result<()>
    where
        F: Fn(f64) -> Result<Problem>,
    {
        self.advance_checked(make, target, ctrl, |_| true)
    }

    /// Like [`Track::advance`], but a converged state rejected by `accept`
    /// counts as a failed substep (e.g. after sliding onto another branch).
    pub fn advance_checked<F, A>(&mut self, make: F, target: f64, ctrl: &StepControl, accept: A) -> Result<()>
    where
        F: Fn(f64) -> Result<Problem>,
        A: Fn(&Solution) -> bool,
    {
        let dir = if target >= self.param { 1.0 } else { -1.0 };
        let mut step = ctrl.max_step.min((target - self.param).abs());
        let mut slice = GaugeSlice::through(&self.solution.state())?;
        while (target - self.param) * dir > 0.0 {
            let remaining = (target - self.param).abs();
            // avoid leaving a sliver, unless already at the smallest step
            let h = if remaining <= step * 1.5 && step > ctrl.min_step {
                remaining
            } else {
                step.min(remaining)
            };
            let t = if h == remaining { target } else { self.param + dir * h };
            let guess = self.predict(t);
            let attempt = make(t).and_then(|p| p.solve_in(&guess, &slice)).and_then(|sol| {
                if accept(&sol) {
                    Ok(sol)
                } else {
                    Err(Error::NoSolution {
                        iterations: sol.iterations,
                        residual: 0.0,
                    })
                }
            });
            match attempt {
                Ok(mut sol) => {
                    sol.branch = self.solution.branch;
                    self.prev = Some((self.param, self.solution.state()));
                    self.param = t;
                    self.solution = sol;
                    slice = GaugeSlice::through(&self.solution.state())?;
                    step = (2.0 * step).min(ctrl.max_step);
                }
                Err(e @ (Error::NoSolution { .. } | Error::Diverged)) => {
                    if h <= ctrl.min_step * 1.0000001 {
                        return Err(e);
                    }
                    step = (0.5 * h).max(ctrl.min_step);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PotentialParams;
    use crate::solver::{linear_basis, SolverConfig};
    use crate::JComplex;

    fn ground(gamma: f64) -> Solution {
        let p = PotentialParams::standard().with_gamma(gamma);
        let mut v = linear_basis(&p, &SolverConfig::default()).unwrap();
        v.sort_by(|a, b| a.mu.c1.total_cmp(&b.mu.c1));
        v.swap_remove(0)
    }

    fn make(gamma: f64) -> Result<Problem> {
        Problem::new(0.0, &PotentialParams::standard().with_gamma(gamma), &SolverConfig::default())
    }

    #[test]
    fn continued_state_matches_a_direct_solve() {
        let mut track = Track::new(0.01, ground(0.01));
        track.advance(make, 0.0125, &StepControl::new(1e-3, 1e-5)).unwrap();
        assert_eq!(track.param(), 0.0125);
        let direct = ground(0.0125);
        assert!((track.solution().mu - direct.mu).max_abs() < 1e-9);
    }

    #[test]
    fn rejected_substeps_end_in_an_error() {
        let mut track = Track::new(0.01, ground(0.01));
        let r = track.advance_checked(make, 0.01 + 3.3e-5, &StepControl::new(1e-3, 1e-5), |_| false);
        assert!(matches!(r, Err(Error::NoSolution { .. })));
        assert_eq!(track.param(), 0.01);
    }

    #[test]
    fn tiny_previous_step_does_not_blow_up_the_predictor() {
        let mut track = Track::new(0.01, ground(0.01));
        track.advance(make, 0.01 - 4e-18, &StepControl::new(1e-3, 1e-5)).unwrap();
        let guess = track.predict(0.005);
        assert_eq!(guess, track.solution().state());
        track.advance(make, 0.005, &StepControl::new(1e-3, 1e-5)).unwrap();
        assert!((track.solution().mu - ground(0.005).mu).max_abs() < 1e-9);
    }

    #[test]
    fn prediction_ignores_the_gauge_of_the_previous_state() {
        let mut track = Track::new(0.01, ground(0.01));
        track.advance(make, 0.0105, &StepControl::new(1e-3, 1e-5)).unwrap();
        let plain = track.predict(0.011);
        let (t0, s0) = track.prev.unwrap();
        track.prev = Some((t0, s0.rotated(JComplex::new(0.3, 0.0))));
        let slice = GaugeSlice::through(&track.solution().state()).unwrap();
        let rotated = track.predict(0.011).gauge_fixed(&slice).unwrap();
        assert!(rotated.distance(&plain.gauge_fixed(&slice).unwrap()) < 1e-9);
    }
}
