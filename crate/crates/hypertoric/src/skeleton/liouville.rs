//! The planar local model: the Liouville form interpolating between
//! `y dx` far out and `c rho dtheta` (with `rho = -log r`) near the unit
//! circle, the area coefficient `F`, and the downward flow.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ode::{dormand_prince, OdeError, OdeOptions};

/// Monotone piecewise cubic Hermite profile, 0 at the first knot, 1 at the
/// last, flat outside. Interior slopes follow Fritsch-Carlson.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EtaKnots", into = "EtaKnots")]
pub struct Eta {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct EtaKnots {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<EtaKnots> for Eta {
    type Error = String;

    fn try_from(k: EtaKnots) -> Result<Self, String> {
        Eta::new(k.knots, k.values).ok_or_else(|| "eta knots must increase from 0 to 1".into())
    }
}

impl From<Eta> for EtaKnots {
    fn from(e: Eta) -> Self {
        EtaKnots {
            knots: e.knots,
            values: e.values,
        }
    }
}

impl Eta {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Option<Eta> {
        let n = knots.len();
        if n < 2 || values.len() != n || values[0] != 0.0 || values[n - 1] != 1.0 {
            return None;
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) || values.windows(2).any(|w| w[1] <= w[0]) {
            return None;
        }
        let delta: Vec<f64> = (0..n - 1)
            .map(|i| (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            // weighted harmonic mean keeps each piece monotone
            let (h0, h1) = (knots[i] - knots[i - 1], knots[i + 1] - knots[i]);
            let (w0, w1) = (2.0 * h1 + h0, h1 + 2.0 * h0);
            slopes[i] = (w0 + w1) / (w0 / delta[i - 1] + w1 / delta[i]);
        }
        Some(Eta {
            knots,
            values,
            slopes,
        })
    }

    /// Cubic smoothstep between `1 + eps` and `2 - eps`.
    pub fn standard(epsilon: f64) -> Eta {
        Eta::new(vec![1.0 + epsilon, 2.0 - epsilon], vec![0.0, 1.0]).expect("valid knots")
    }

    fn piece(&self, r: f64) -> Option<(usize, f64, f64)> {
        let n = self.knots.len();
        if r <= self.knots[0] || r >= self.knots[n - 1] {
            return None;
        }
        let i = self.knots.partition_point(|&k| k <= r) - 1;
        let h = self.knots[i + 1] - self.knots[i];
        Some((i, (r - self.knots[i]) / h, h))
    }

    pub fn value(&self, r: f64) -> f64 {
        match self.piece(r) {
            None => {
                if r <= self.knots[0] {
                    0.0
                } else {
                    1.0
                }
            }
            Some((i, s, h)) => {
                let (s2, s3) = (s * s, s * s * s);
                (2.0 * s3 - 3.0 * s2 + 1.0) * self.values[i]
                    + (s3 - 2.0 * s2 + s) * h * self.slopes[i]
                    + (-2.0 * s3 + 3.0 * s2) * self.values[i + 1]
                    + (s3 - s2) * h * self.slopes[i + 1]
            }
        }
    }

    pub fn deriv(&self, r: f64) -> f64 {
        match self.piece(r) {
            None => 0.0,
            Some((i, s, h)) => {
                let s2 = s * s;
                ((6.0 * s2 - 6.0 * s) * self.values[i]
                    + (3.0 * s2 - 4.0 * s + 1.0) * h * self.slopes[i]
                    + (-6.0 * s2 + 6.0 * s) * self.values[i + 1]
                    + (3.0 * s2 - 2.0 * s) * h * self.slopes[i + 1])
                    / h
            }
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowParams {
    pub epsilon: f64,
    pub c: f64,
    pub eta: Eta,
    pub rtol: f64,
    /// Trajectories stop once the speed drops below this.
    pub velocity_tol: f64,
    /// Distance to the skeleton accepted as converged.
    pub distance_tol: f64,
    pub max_time: f64,
}

impl FlowParams {
    pub fn new(epsilon: f64, c: f64) -> FlowParams {
        FlowParams {
            epsilon,
            c,
            eta: Eta::standard(epsilon),
            rtol: 1e-9,
            velocity_tol: 1e-8,
            distance_tol: 1e-3,
            max_time: 1e4,
        }
    }

    /// Half of the largest `c` keeping `F` positive on a `grid x grid`
    /// sample, as found by bisection.
    pub fn admissible(epsilon: f64, grid: usize) -> FlowParams {
        let eta = Eta::standard(epsilon);
        let c = 0.5 * max_admissible_c(epsilon, &eta, grid);
        FlowParams::new(epsilon, c)
    }

    pub fn is_valid(&self) -> bool {
        self.epsilon > 0.0
            && self.epsilon < 0.5
            && self.c > 0.0
            && self.rtol > 0.0
            && self.max_time > 0.0
    }

    /// `F = r eta + eta' r^2 sin^2 + c ((1 - eta) log r)'`.
    pub fn area(&self, r: f64, theta: f64) -> f64 {
        let (a, b) = area_parts(&self.eta, r, theta);
        a + self.c * b
    }

    /// Downward flow in polar coordinates.
    pub fn field(&self, r: f64, theta: f64) -> [f64; 2] {
        let eta = self.eta.value(r);
        let (s, co) = theta.sin_cos();
        let l_theta = -r * r * s * s * eta - self.c * r.ln() * (1.0 - eta);
        let l_r = r * s * co * eta;
        let f = self.area(r, theta);
        [l_theta / f, -l_r / f]
    }

    fn speed(&self, r: f64, v: &[f64; 2]) -> f64 {
        (v[0] * v[0] + r * r * v[1] * v[1]).sqrt()
    }
}

/// `F = a + c b`, split so that bisection over `c` can reuse the grid.
fn area_parts(eta: &Eta, r: f64, theta: f64) -> (f64, f64) {
    let (e, de) = (eta.value(r), eta.deriv(r));
    let s = theta.sin();
    (r * e + de * r * r * s * s, -de * r.ln() + (1.0 - e) / r)
}

fn grid_parts(epsilon: f64, eta: &Eta, grid: usize) -> Vec<(f64, f64, [f64; 2])> {
    let (lo, hi) = (1.0 + epsilon, 2.0 - epsilon);
    let mut out = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        let r = if grid == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (grid - 1) as f64
        };
        for j in 0..grid {
            let theta = 2.0 * PI * j as f64 / grid as f64;
            let (a, b) = area_parts(eta, r, theta);
            out.push((a, b, [r, theta]));
        }
    }
    out
}

fn min_over(parts: &[(f64, f64, [f64; 2])], c: f64) -> (f64, [f64; 2]) {
    parts
        .iter()
        .map(|(a, b, p)| (a + c * b, *p))
        .fold((f64::INFINITY, [0.0, 0.0]), |acc, x| if x.0 < acc.0 { x } else { acc })
}

/// Largest `c` with `min F > 0` on the grid over the transition annulus.
/// The minimum is concave in `c`, so the admissible set is an interval.
pub fn max_admissible_c(epsilon: f64, eta: &Eta, grid: usize) -> f64 {
    let parts = grid_parts(epsilon, eta, grid);
    let ok = |c: f64| min_over(&parts, c).0 > 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while ok(hi) {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    lo
}

#[derive(Clone, Debug, Serialize)]
pub struct LiouvilleReport {
    pub epsilon: f64,
    pub c: f64,
    pub grid: usize,
    pub min_f: f64,
    /// `(r, theta)` where the minimum is attained.
    pub argmin: [f64; 2],
    pub positive: bool,
    pub c_max: f64,
}

/// Samples `F` on a `grid x grid` polar grid over `1 + eps <= r <= 2 - eps`.
/// Outside that annulus `F` is `c / r` or `r`.
pub fn liouville_check_2d(params: &FlowParams, grid: usize) -> LiouvilleReport {
    let eta = &params.eta;
    let parts = grid_parts(params.epsilon, eta, grid);
    let (min_f, argmin) = min_over(&parts, params.c);
    LiouvilleReport {
        epsilon: params.epsilon,
        c: params.c,
        grid,
        min_f,
        argmin,
        positive: min_f > 0.0,
        c_max: max_admissible_c(params.epsilon, eta, grid),
    }
}

/// Euclidean distance to the union of the rays `|x| >= 1` on the x-axis and
/// the unit circle.
pub fn distance_to_skeleton(p: [f64; 2]) -> f64 {
    circle_distance(p).min(ray_distance(p, 1.0)).min(ray_distance(p, -1.0))
}

fn circle_distance(p: [f64; 2]) -> f64 {
    (p[0].hypot(p[1]) - 1.0).abs()
}

fn ray_distance(p: [f64; 2], sign: f64) -> f64 {
    let x = sign * p[0];
    if x >= 1.0 {
        p[1].abs()
    } else {
        (x - 1.0).hypot(p[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    RayPlus,
    RayMinus,
    Circle,
    NotConverged,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub start: [f64; 2],
    /// `(t, x, y)` at accepted steps.
    #[serde(skip)]
    pub points: Vec<[f64; 3]>,
    pub end: [f64; 2],
    pub time: f64,
    pub distance: f64,
    pub limit: Limit,
    /// Distance to the skeleton never grew (up to 1e-9) once inside
    /// `r < 2 - eps`.
    pub monotone: bool,
    /// Largest `|y|` seen along the way.
    pub max_abs_y: f64,
}

pub type FlowOutcome = Result<Trajectory, OdeError>;

/// Integrate the downward flow from a Cartesian point.
pub fn flow_to_skeleton(params: &FlowParams, start: [f64; 2]) -> FlowOutcome {
    let r0 = start[0].hypot(start[1]);
    if r0 == 0.0 {
        return Ok(Trajectory {
            start,
            points: vec![[0.0, 0.0, 0.0]],
            end: start,
            time: 0.0,
            distance: 1.0,
            limit: Limit::NotConverged,
            monotone: true,
            max_abs_y: 0.0,
        });
    }
    let theta0 = start[1].atan2(start[0]);
    let opts = OdeOptions {
        rtol: params.rtol,
        ..OdeOptions::default()
    };
    let sol = dormand_prince(
        |y| params.field(y[0], y[1]),
        0.0,
        [r0, theta0],
        params.max_time,
        &opts,
        |_, y, v| params.speed(y[0], v) < params.velocity_tol,
    )?;
    let points: Vec<[f64; 3]> = sol
        .ts
        .iter()
        .zip(&sol.ys)
        .map(|(t, y)| [*t, y[0] * y[1].cos(), y[0] * y[1].sin()])
        .collect();
    let last = points[points.len() - 1];
    let end = [last[1], last[2]];
    let distance = distance_to_skeleton(end);
    let inner = 2.0 - params.epsilon;
    let mut monotone = true;
    let mut prev: Option<f64> = None;
    for p in &points {
        if p[1].hypot(p[2]) >= inner && prev.is_none() {
            continue;
        }
        let d = distance_to_skeleton([p[1], p[2]]);
        if let Some(q) = prev {
            if d > q + 1e-9 {
                monotone = false;
            }
        }
        prev = Some(d);
    }
    let limit = if sol.stopped && distance < params.distance_tol {
        let (dc, dp, dm) = (
            circle_distance(end),
            ray_distance(end, 1.0),
            ray_distance(end, -1.0),
        );
        if dc <= dp && dc <= dm {
            Limit::Circle
        } else if dp <= dm {
            Limit::RayPlus
        } else {
            Limit::RayMinus
        }
    } else {
        Limit::NotConverged
    };
    Ok(Trajectory {
        start,
        max_abs_y: points.iter().map(|p| p[2].abs()).fold(0.0, f64::max),
        points,
        end,
        time: last[0],
        distance,
        limit,
        monotone,
    })
}

/// Uniform samples in `r_lo < r < r_hi`, uniform in angle.
pub fn annulus_points(n: usize, seed: u64, r_lo: f64, r_hi: f64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = r_lo + (r_hi - r_lo) * rng.gen::<f64>();
            let r = r.clamp(r_lo + 1e-12, r_hi - 1e-12);
            let th = 2.0 * PI * rng.gen::<f64>();
            [r * th.cos(), r * th.sin()]
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowReport {
    pub params: FlowParams,
    pub area: LiouvilleReport,
    pub trajectories: Vec<Trajectory>,
    /// Largest distance from a limit point to the skeleton.
    pub max_distance: f64,
    pub converged: usize,
    pub all_monotone: bool,
}

impl FlowReport {
    pub fn passed(&self) -> bool {
        self.area.positive && self.converged == self.trajectories.len() && self.all_monotone
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["trajectory", "t", "x", "y"])?;
        for (k, tr) in self.trajectories.iter().enumerate() {
            for p in &tr.points {
                w.serialize((k, p[0], p[1], p[2]))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn flow_report(
    params: &FlowParams,
    grid: usize,
    starts: &[[f64; 2]],
) -> Result<FlowReport, OdeError> {
    let area = liouville_check_2d(params, grid);
    let trajectories = starts
        .iter()
        .map(|&s| flow_to_skeleton(params, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FlowReport {
        params: params.clone(),
        area,
        max_distance: trajectories.iter().map(|t| t.distance).fold(0.0, f64::max),
        converged: trajectories
            .iter()
            .filter(|t| t.limit != Limit::NotConverged)
            .count(),
        all_monotone: trajectories.iter().all(|t| t.monotone),
        trajectories,
    })
}
