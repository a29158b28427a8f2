use super::{FieldState, SolverConfig, Stepper, WaveSystem};
use crate::error::{Error, Result};

/// Receives read-only snapshots every `cadence` steps, including step 0
/// and the final step.
pub trait Observer {
    fn name(&self) -> &str;
    fn cadence(&self) -> usize;
    fn observe(&mut self, state: &FieldState, sys: &WaveSystem) -> Result<()>;
}

/// Steps `initial` to `config.t_end` and returns the final state.
pub fn evolve_run(
    config: &SolverConfig,
    sys: &WaveSystem,
    initial: FieldState,
    observers: &mut [&mut dyn Observer],
) -> Result<FieldState> {
    config.validate(&sys.grid, &sys.modes, &sys.background)?;
    if config.semilinear != sys.semilinear.is_some() {
        return Err(Error::Config("solver and system disagree on the semilinear flag".into()));
    }
    initial.check_shape(&sys.grid, sys.modes.len())?;
    let steps = config.steps()?;
    for o in observers.iter() {
        let c = o.cadence();
        if c == 0 || (steps > 0 && steps % c != 0) {
            return Err(Error::Config(format!(
                "observer `{}` cadence {c} does not divide the step count {steps}",
                o.name()
            )));
        }
    }

    let mut state = initial;
    let notify = |observers: &mut [&mut dyn Observer], state: &FieldState, k: usize| -> Result<()> {
        for o in observers.iter_mut() {
            if k.is_multiple_of(o.cadence()) {
                o.observe(state, sys).map_err(|e| Error::Observer {
                    name: o.name().to_string(),
                    t: state.t(),
                    source: Box::new(e),
                })?;
            }
        }
        Ok(())
    };

    notify(observers, &state, 0)?;
    let mut stepper = Stepper::new(sys);
    let tau0 = state.tau;
    for k in 1..=steps {
        stepper.advance(&mut state, config.dt)?;
        // keep the clock free of accumulated round-off
        state.tau = tau0 + k as f64 * config.dt;
        stepper.mark_current(state.tau);
        notify(observers, &state, k)?;
    }
    Ok(state)
}

/// Observer that keeps copies of the states it sees.
#[derive(Debug, Clone)]
pub struct Snapshots {
    cadence: usize,
    pub states: Vec<FieldState>,
}

impl Snapshots {
    pub fn new(cadence: usize) -> Self {
        Snapshots { cadence, states: Vec::new() }
    }
}

impl Observer for Snapshots {
    fn name(&self) -> &str {
        "snapshots"
    }

    fn cadence(&self) -> usize {
        self.cadence
    }

    fn observe(&mut self, state: &FieldState, _sys: &WaveSystem) -> Result<()> {
        self.states.push(state.clone());
        Ok(())
    }
}
