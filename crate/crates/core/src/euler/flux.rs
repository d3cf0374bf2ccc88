use crate::error::{Error, Result};
use crate::thermo::{ConservativeState, GasParams, VACUUM_FLOOR};

/// Flux vectors share the layout of conservative states: (mass, momentum, energy).
pub type Flux = ConservativeState;

/// Pressure and velocity of a state; exact vacuum gives zeros.
fn pressure_velocity(state: &ConservativeState, gas: &GasParams) -> Result<Option<(f64, [f64; 3])>> {
    if state.rho <= VACUUM_FLOOR {
        let norm = state.momentum_norm_sq().sqrt();
        if norm <= VACUUM_FLOOR {
            return Ok(None);
        }
        return Err(Error::NonPhysicalState { rho: state.rho, momentum: norm });
    }
    let u = state.velocity();
    let kin = 0.5 * state.momentum_norm_sq() / state.rho;
    Ok(Some(((state.energy - kin) / gas.c_v(), u)))
}

/// Physical flux of the complete Euler system along `axis`.
pub fn euler_physical_flux(state: &ConservativeState, gas: &GasParams, axis: usize) -> Result<Flux> {
    let Some((p, u)) = pressure_velocity(state, gas)? else {
        return Ok(Flux::ZERO);
    };
    let ua = u[axis];
    let mut m = [state.m[0] * ua, state.m[1] * ua, state.m[2] * ua];
    m[axis] += p;
    Ok(Flux { rho: state.m[axis], m, energy: (state.energy + p) * ua })
}

/// `|u_axis| + sqrt(gamma theta)`, zero at vacuum.
pub fn max_wave_speed(state: &ConservativeState, gas: &GasParams, axis: usize) -> Result<f64> {
    Ok(match pressure_velocity(state, gas)? {
        None => 0.0,
        Some((p, u)) => u[axis].abs() + (gas.gamma() * (p / state.rho).max(0.0)).sqrt(),
    })
}

/// Rusanov (local Lax-Friedrichs) flux.
pub fn rusanov_flux(left: &ConservativeState, right: &ConservativeState, gas: &GasParams, axis: usize) -> Result<Flux> {
    let lambda = max_wave_speed(left, gas, axis)?.max(max_wave_speed(right, gas, axis)?);
    Ok(rusanov_combine(
        &euler_physical_flux(left, gas, axis)?,
        &euler_physical_flux(right, gas, axis)?,
        left,
        right,
        lambda,
    ))
}

pub(crate) fn rusanov_combine(fl: &Flux, fr: &Flux, left: &ConservativeState, right: &ConservativeState, lambda: f64) -> Flux {
    (*fl + *fr) * 0.5 - (*right - *left) * (0.5 * lambda)
}

/// Mirror image across a wall normal to `axis`.
pub fn mirror(state: &ConservativeState, axis: usize) -> ConservativeState {
    let mut g = *state;
    g.m[axis] = -g.m[axis];
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn physical_flux_examples() {
        let g = GasParams::new(1.5).unwrap();
        let f = euler_physical_flux(&ConservativeState::new_1d(1.0, 0.0, 1.5), &g, 0).unwrap();
        assert_eq!((f.rho, f.m[0], f.energy), (0.0, 1.0, 0.0));
        assert_eq!(euler_physical_flux(&ConservativeState::ZERO, &g, 0).unwrap(), Flux::ZERO);
        let g1 = GasParams::new(1.0).unwrap();
        let f = euler_physical_flux(&ConservativeState::new_1d(1.0, 1.0, 1.0), &g1, 0).unwrap();
        assert_eq!((f.rho, f.m[0], f.energy), (1.0, 1.5, 1.5));
        assert!(euler_physical_flux(&ConservativeState::new_1d(0.0, 1.0, 1.0), &g1, 0).is_err());
    }

    #[test]
    fn rusanov_consistency_and_symmetry() {
        let g = GasParams::from_gamma(1.4).unwrap();
        let a = ConservativeState::new_1d(1.3, 0.4, 3.0);
        assert_eq!(rusanov_flux(&a, &a, &g, 0).unwrap(), euler_physical_flux(&a, &g, 0).unwrap());
        let f = rusanov_flux(&a, &mirror(&a, 0), &g, 0).unwrap();
        assert_eq!(f.rho, 0.0);
        assert_eq!(f.energy, 0.0);
    }

    #[test]
    fn rusanov_sod_interface_by_hand() {
        let gamma: f64 = 1.4;
        let g = GasParams::from_gamma(gamma).unwrap();
        let (rl, pl, rr, pr) = (1.0, 1.0, 0.125, 0.1);
        let el = pl / (gamma - 1.0);
        let er = pr / (gamma - 1.0);
        let lam = (gamma * pl / rl).sqrt().max((gamma * pr / rr).sqrt());
        let expect = [
            -0.5 * lam * (rr - rl),
            0.5 * (pl + pr),
            -0.5 * lam * (er - el),
        ];
        let f = rusanov_flux(&ConservativeState::new_1d(rl, 0.0, el), &ConservativeState::new_1d(rr, 0.0, er), &g, 0)
            .unwrap();
        assert!((f.rho - expect[0]).abs() < 1e-14);
        assert!((f.m[0] - expect[1]).abs() < 1e-14);
        assert!((f.energy - expect[2]).abs() < 1e-14);
    }
}
