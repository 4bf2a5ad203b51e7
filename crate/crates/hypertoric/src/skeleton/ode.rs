//! Dormand-Prince 5(4) with step size control and a stopping predicate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepFailure { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            h0: 1e-3,
            h_min: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; 2]>,
    /// The stop predicate fired (as opposed to reaching `t_end`).
    pub stopped: bool,
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
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

/// Integrate the autonomous system `y' = f(y)` from `t0` until `t_end` or until `stop(t, y, f(y))`
/// holds at an accepted step.
pub fn dormand_prince<F, S>(
    f: F,
    t0: f64,
    y0: [f64; 2],
    t_end: f64,
    opts: &OdeOptions,
    mut stop: S,
) -> Result<OdeSolution, OdeError>
where
    F: Fn(&[f64; 2]) -> [f64; 2],
    S: FnMut(f64, &[f64; 2], &[f64; 2]) -> bool,
{
    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(&y);
    let mut sol = OdeSolution {
        ts: vec![t],
        ys: vec![y],
        stopped: false,
    };
    if stop(t, &y, &k0) {
        sol.stopped = true;
        return Ok(sol);
    }
    let mut h = opts.h0.min(t_end - t0);
    for _ in 0..opts.max_steps {
        if t >= t_end {
            break;
        }
        h = h.min(t_end - t);
        let mut k = [[0.0; 2]; 7];
        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..2 {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = f(&ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..2 {
            let mut e = 0.0;
            for s in 0..7 {
                y5[i] += h * B5[s] * k[s][i];
                e += h * (B5[s] - B4[s]) * k[s][i];
            }
            let scale = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((e / scale).abs());
        }
        if !y5.iter().all(|v| v.is_finite()) || !err.is_finite() {
            return Err(OdeError::NonFinite { t });
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            // first same as last
            k0 = k[6];
            sol.ts.push(t);
            sol.ys.push(y);
            if stop(t, &y, &k0) {
                sol.stopped = true;
                return Ok(sol);
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < opts.h_min {
            return Err(OdeError::StepFailure { t, h });
        }
    }
    Ok(sol)
}
