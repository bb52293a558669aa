//! Deterministic 2D racing simulator: procedural closed-loop tracks built
//! from quadrilateral checkpoints, simple car kinematics, ray-cast distance
//! sensors, and crash/respawn handling.
//!
//! All constants live here; the rest of the stack only sees normalized
//! observations in \[-1,1\] and rewards in {-10} ∪ \[0,1\].

use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

/// Physics tick length in seconds.
pub const DT: f64 = 1.0 / 30.0;
/// Maximum car speed in px/s; also the reward normalizer.
pub const TOP_SPEED: f64 = 300.0;
/// Bound on speed change per second (reaches top speed in one second).
pub const MAX_ACCEL: f64 = 300.0;
/// Sensor range in px; rays report at most this distance.
pub const D_MAX: f64 = 400.0;
/// Minimum turn radius in px, binding at low speed.
pub const R_MIN: f64 = 40.0;
/// Upper bound on angular velocity in rad/s. Sized so the full-speed turn
/// radius (TOP_SPEED / OMEGA_MAX ≈ 136 px) sits just under the tightest
/// generated bend: the fastest lines through tight corners still demand
/// deliberate speed and line management.
pub const OMEGA_MAX: f64 = 2.2;
/// Half the track corridor width in px.
pub const HALF_WIDTH: f64 = 45.0;
/// Reward on leaving the track.
pub const CRASH_REWARD: f64 = -10.0;
/// Sensor directions relative to the heading, in radians.
pub const RAY_ANGLES: [f64; 5] = [
    -std::f64::consts::FRAC_PI_2,
    -std::f64::consts::FRAC_PI_4,
    0.0,
    std::f64::consts::FRAC_PI_4,
    std::f64::consts::FRAC_PI_2,
];
/// Observation layout: 5 normalized ray distances plus normalized speed.
pub const OBS_DIM: usize = 6;

/// Planar point or direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2<F> {
    pub x: F,
    pub y: F,
}

impl<F: Scalar> Vec2<F> {
    pub fn new(x: F, y: F) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Self) -> F {
        self.x * o.x + self.y * o.y
    }

    /// 2D cross product (z component of the 3D cross).
    pub fn cross(self, o: Self) -> F {
        self.x * o.y - self.y * o.x
    }

    pub fn length(self) -> F {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Self {
        let len = self.length();
        assert!(len > F::zero(), "cannot normalize a zero vector");
        self * (F::one() / len)
    }

    /// Counterclockwise perpendicular.
    pub fn perp(self) -> Self {
        Vec2::new(-self.y, self.x)
    }

    pub fn from_angle(theta: F) -> Self {
        Vec2::new(theta.cos(), theta.sin())
    }
}

impl<F: Scalar> Add for Vec2<F> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl<F: Scalar> Sub for Vec2<F> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl<F: Scalar> Mul<F> for Vec2<F> {
    type Output = Self;
    fn mul(self, s: F) -> Self {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl<F: Scalar> Neg for Vec2<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec2::new(-self.x, -self.y)
    }
}

/// One checkpoint: a convex quadrilateral slice of the corridor.
///
/// Vertex order is [entry_left, exit_left, exit_right, entry_right], so the
/// entry edge is v0-v3, the exit edge v1-v2, and the corridor walls are the
/// lateral edges v0-v1 (left) and v3-v2 (right). Consecutive checkpoints
/// share the exit/entry edge with bit-identical coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad<F> {
    pub v: [Vec2<F>; 4],
}

impl<F: Scalar> Quad<F> {
    /// Point-in-convex-quad test; boundary points count as inside.
    pub fn contains(&self, p: Vec2<F>) -> bool {
        let mut pos = false;
        let mut neg = false;
        for i in 0..4 {
            let a = self.v[i];
            let b = self.v[(i + 1) % 4];
            let c = (b - a).cross(p - a);
            if c > F::zero() {
                pos = true;
            } else if c < F::zero() {
                neg = true;
            }
        }
        !(pos && neg)
    }

    /// Strict convexity with nonzero area; also rejects self-intersecting
    /// (bowtie) vertex orders, whose turn signs are mixed.
    pub fn is_convex(&self) -> bool {
        let mut sign = F::zero();
        for i in 0..4 {
            let a = self.v[i];
            let b = self.v[(i + 1) % 4];
            let c = self.v[(i + 2) % 4];
            let turn = (b - a).cross(c - b);
            if turn == F::zero() {
                return false;
            }
            if sign == F::zero() {
                sign = turn;
            } else if (turn > F::zero()) != (sign > F::zero()) {
                return false;
            }
        }
        true
    }

    pub fn centroid(&self) -> Vec2<F> {
        let sum = self.v[1] + self.v[2] + (self.v[0] + self.v[3]);
        sum * (F::one() / F::of(4.0))
    }

    pub fn entry_edge(&self) -> (Vec2<F>, Vec2<F>) {
        (self.v[0], self.v[3])
    }

    pub fn exit_edge(&self) -> (Vec2<F>, Vec2<F>) {
        (self.v[1], self.v[2])
    }

    /// The two wall segments rays can hit; shared entry/exit edges are open
    /// corridor, not obstacles.
    pub fn walls(&self) -> [(Vec2<F>, Vec2<F>); 2] {
        [(self.v[0], self.v[1]), (self.v[3], self.v[2])]
    }

    fn entry_mid(&self) -> Vec2<F> {
        (self.v[0] + self.v[3]) * F::of(0.5)
    }

    fn exit_mid(&self) -> Vec2<F> {
        (self.v[1] + self.v[2]) * F::of(0.5)
    }

    /// Forward direction through the checkpoint, entry midpoint to exit
    /// midpoint.
    pub fn centerline_heading(&self) -> F {
        let d = self.exit_mid() - self.entry_mid();
        d.y.atan2(d.x)
    }
}

/// Closed loop of checkpoint quadrilaterals.
#[derive(Clone, Debug, PartialEq)]
pub struct Track<F> {
    seed: u64,
    quads: Vec<Quad<F>>,
}

/// Control-point count range for track generation.
const CONTROL_POINTS: std::ops::RangeInclusive<usize> = 12..=20;
/// Control-point radius range in px.
const RADIUS_RANGE: (f64, f64) = (150.0, 400.0);

impl<F: Scalar> Track<F> {
    /// Generate a random closed loop, deterministic in `seed`.
    ///
    /// Control points sit at evenly spaced angles around the origin with
    /// radii drawn uniformly and smoothed by one cyclic three-point average;
    /// the corridor is extruded [`HALF_WIDTH`] along each point's normal.
    /// Invalid geometry (any non-convex checkpoint) is discarded and drawn
    /// again from the same RNG stream.
    pub fn generate(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10_000 {
            let n = rng.random_range(CONTROL_POINTS);
            let radii: Vec<F> = (0..n)
                .map(|_| F::uniform(&mut rng, F::of(RADIUS_RANGE.0), F::of(RADIUS_RANGE.1)))
                .collect();
            let smoothed: Vec<F> = (0..n)
                .map(|k| {
                    (radii[(k + n - 1) % n] + radii[k] + radii[(k + 1) % n]) / F::of(3.0)
                })
                .collect();
            let center: Vec<Vec2<F>> = (0..n)
                .map(|k| {
                    let theta = F::of(2.0) * F::PI() * F::of(k as f64) / F::of(n as f64);
                    Vec2::from_angle(theta) * smoothed[k]
                })
                .collect();
            let left: Vec<Vec2<F>> = (0..n)
                .map(|k| {
                    let tangent = (center[(k + 1) % n] - center[(k + n - 1) % n]).normalized();
                    center[k] + tangent.perp() * F::of(HALF_WIDTH)
                })
                .collect();
            let right: Vec<Vec2<F>> = (0..n)
                .map(|k| {
                    let tangent = (center[(k + 1) % n] - center[(k + n - 1) % n]).normalized();
                    center[k] - tangent.perp() * F::of(HALF_WIDTH)
                })
                .collect();
            let quads: Vec<Quad<F>> = (0..n)
                .map(|k| Quad {
                    v: [left[k], left[(k + 1) % n], right[(k + 1) % n], right[k]],
                })
                .collect();
            if quads.iter().all(Quad::is_convex) {
                return Track { seed, quads };
            }
        }
        unreachable!("track generation failed to find valid geometry for seed {seed}");
    }

    /// Build a track from explicit checkpoints, for tests and tooling.
    ///
    /// The caller is responsible for the loop invariants `generate`
    /// guarantees (cyclic adjacency, convexity).
    pub fn from_parts(seed: u64, quads: Vec<Quad<F>>) -> Self {
        assert!(!quads.is_empty(), "a track needs at least one checkpoint");
        Track { seed, quads }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn quads(&self) -> &[Quad<F>] {
        &self.quads
    }

    pub fn num_checkpoints(&self) -> usize {
        self.quads.len()
    }

    /// On-track test: inside at least one checkpoint.
    pub fn contains(&self, p: Vec2<F>) -> bool {
        self.quads.iter().any(|q| q.contains(p))
    }

    /// Plain-text export: `seed=<n>` header, then one checkpoint per line as
    /// 8 comma-separated floats (x,y of the 4 vertices in storage order).
    pub fn export_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = format!("seed={}\n", self.seed);
        for q in &self.quads {
            let c: Vec<String> = q
                .v
                .iter()
                .flat_map(|p| [format!("{:?}", p.x.as_f64()), format!("{:?}", p.y.as_f64())])
                .collect();
            let _ = writeln!(out, "{}", c.join(","));
        }
        out
    }
}

/// Car pose plus progress marker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarState<F> {
    pub pos: Vec2<F>,
    /// Radians, wrapped to (-π, π].
    pub heading: F,
    /// px/s, in [0, TOP_SPEED].
    pub speed: F,
    /// Index of the last checkpoint the car passed (never decreases except
    /// by wrapping around the loop).
    pub last_checkpoint: usize,
}

/// Throttle and steering, each meaningful in [-1,1]; values outside are
/// clamped on use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvAction<F> {
    pub throttle: F,
    pub steering: F,
}

/// Six normalized components: 5 ray distances then speed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation<F> {
    values: [F; OBS_DIM],
}

impl<F: Scalar> Observation<F> {
    pub fn as_array(&self) -> &[F; OBS_DIM] {
        &self.values
    }

    pub fn distances(&self) -> &[F] {
        &self.values[..5]
    }

    pub fn speed(&self) -> F {
        self.values[5]
    }
}

/// Result of one physics step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome<F> {
    pub observation: Observation<F>,
    pub reward: F,
    pub crashed: bool,
}

/// Map a raw ray distance to [-1,1], saturating at [`D_MAX`].
pub fn normalize_distance<F: Scalar>(d: F) -> F {
    let dmax = F::of(D_MAX);
    F::of(2.0) * d.min(dmax) / dmax - F::one()
}

/// Map speed in [0, TOP_SPEED] to [-1,1].
pub fn normalize_speed<F: Scalar>(v: F) -> F {
    F::of(2.0) * v / F::of(TOP_SPEED) - F::one()
}

/// Wrap an angle into (-π, π].
fn wrap_angle<F: Scalar>(a: F) -> F {
    let two_pi = F::of(2.0) * F::PI();
    let wrapped = a - two_pi * (a / two_pi).round();
    if wrapped <= -F::PI() {
        wrapped + two_pi
    } else {
        wrapped
    }
}

/// Distance along the ray to a segment, if the ray hits it.
///
/// Solves origin + t·direction = a + u·(b-a); a hit needs t ≥ 0 and
/// u ∈ \[0,1\]. Parallel lines (including collinear) report no hit.
pub fn ray_segment_intersect<F: Scalar>(
    origin: Vec2<F>,
    direction: Vec2<F>,
    a: Vec2<F>,
    b: Vec2<F>,
) -> Option<F> {
    let e = b - a;
    let denom = direction.cross(e);
    if denom == F::zero() {
        return None;
    }
    let ao = a - origin;
    let t = ao.cross(e) / denom;
    let u = ao.cross(direction) / denom;
    if t >= F::zero() && u >= F::zero() && u <= F::one() {
        Some(t)
    } else {
        None
    }
}

/// Place the car at the midpoint of checkpoint 0's entry edge, facing along
/// the checkpoint, at standstill.
pub fn reset<F: Scalar>(track: &Track<F>) -> (CarState<F>, Observation<F>) {
    let q0 = &track.quads()[0];
    let car = CarState {
        pos: q0.entry_mid(),
        heading: q0.centerline_heading(),
        speed: F::zero(),
        last_checkpoint: 0,
    };
    let obs = sense(&car, track);
    (car, obs)
}

/// Cast the 5 sensor rays and append normalized speed.
///
/// Rays intersect only corridor walls (lateral checkpoint edges); the
/// shortest hit per ray wins, saturating at [`D_MAX`] when nothing is hit.
/// A car outside the track (which respawn prevents) reads all distances as
/// zero.
pub fn sense<F: Scalar>(car: &CarState<F>, track: &Track<F>) -> Observation<F> {
    let mut values = [F::zero(); OBS_DIM];
    let on_track = track.contains(car.pos);
    for (i, &rel) in RAY_ANGLES.iter().enumerate() {
        let raw = if on_track {
            let dir = Vec2::from_angle(car.heading + F::of(rel));
            let mut best = F::of(D_MAX);
            for quad in track.quads() {
                for (a, b) in quad.walls() {
                    if let Some(t) = ray_segment_intersect(car.pos, dir, a, b) {
                        best = best.min(t);
                    }
                }
            }
            best
        } else {
            F::zero()
        };
        values[i] = normalize_distance(raw);
    }
    values[5] = normalize_speed(car.speed);
    Observation { values }
}

/// Advance the car one tick.
///
/// Throttle maps to a target speed in [0, TOP_SPEED]; speed moves toward it
/// at bounded acceleration, then the heading turns with speed-coupled
/// steering, then position integrates the new velocity. Leaving the corridor
/// costs [`CRASH_REWARD`] and teleports the car to the middle of its last
/// passed checkpoint at standstill, facing along the checkpoint; otherwise
/// the reward is the speed fraction of [`TOP_SPEED`].
pub fn step<F: Scalar>(
    car: &CarState<F>,
    action: EnvAction<F>,
    track: &Track<F>,
    dt: F,
) -> (CarState<F>, StepOutcome<F>) {
    let one = F::one();
    let throttle = action.throttle.clamp(-one, one);
    let steering = action.steering.clamp(-one, one);

    let target = (throttle + one) * F::of(0.5) * F::of(TOP_SPEED);
    let dv_bound = F::of(MAX_ACCEL) * dt;
    let speed = car.speed + (target - car.speed).clamp(-dv_bound, dv_bound);

    let turn_radius = F::of(R_MIN).max(speed / F::of(OMEGA_MAX));
    let omega = steering * speed / turn_radius;
    let heading = wrap_angle(car.heading + omega * dt);

    let pos = car.pos + Vec2::from_angle(heading) * (speed * dt);

    let mut next = CarState {
        pos,
        heading,
        speed,
        last_checkpoint: car.last_checkpoint,
    };
    let succ = (car.last_checkpoint + 1) % track.num_checkpoints();
    if track.quads()[succ].contains(pos) {
        next.last_checkpoint = succ;
    }

    if track.contains(pos) {
        let reward = speed / F::of(TOP_SPEED);
        let observation = sense(&next, track);
        (next, StepOutcome { observation, reward, crashed: false })
    } else {
        let home = &track.quads()[next.last_checkpoint];
        next.pos = home.centroid();
        next.heading = home.centerline_heading();
        next.speed = F::zero();
        let observation = sense(&next, track);
        (
            next,
            StepOutcome { observation, reward: F::of(CRASH_REWARD), crashed: true },
        )
    }
}
