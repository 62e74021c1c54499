use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::EnvConfig;
use super::obs::{frame, privileged, FrameStack, Observation, PrivilegedState};
use super::randomize::{randomize, DomainDraw};
use super::rules::{collided, crashed, reward, terminated, TerminationReason};
use super::EnvError;
use crate::physics::{
    formation_hover, solve_hover, step_rk4, CableSpec, Euler, HoverSolution, PayloadState, PhysicsError, PhysicsParams,
    SystemState, UavCommand, UavState, Vec3, ROTORS,
};
use crate::world::{sample_map_between, OccupancyGrid};

/// Per-UAV action width: collective thrust fraction, then roll, pitch, and
/// yaw rate commands, each in [−1, 1].
pub const ACTION_PER_UAV: usize = 4;

#[derive(Clone, Debug)]
pub struct StepResult {
    pub observation: Observation,
    pub privileged: PrivilegedState,
    pub reward: f64,
    pub done: bool,
    pub reason: TerminationReason,
}

/// One line of an episode trace.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRecord {
    pub t: f64,
    pub uav_positions: Vec<[f64; 3]>,
    pub uav_attitudes: Vec<[f64; 3]>,
    pub payload_position: Option<[f64; 3]>,
    pub payload_orientation: Option<[f64; 3]>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub reason: TerminationReason,
}

const PLACEMENT_STREAM: u64 = 2;

/// Single-episode environment. Create with [`Env::new`], then [`Env::reset`]
/// before stepping.
#[derive(Clone, Debug)]
pub struct Env {
    config: EnvConfig,
    base_params: PhysicsParams,
    params: PhysicsParams,
    grid: OccupancyGrid,
    draw: Option<DomainDraw>,
    state: Option<SystemState>,
    hover: Option<HoverSolution>,
    goal: Vec3,
    beacon: Vec3,
    frames: Option<FrameStack>,
    steps: usize,
    reason: TerminationReason,
    commands: Vec<UavCommand>,
    trace: Option<Vec<TraceRecord>>,
}

impl Env {
    pub fn new(config: EnvConfig, params: PhysicsParams) -> Result<Self, EnvError> {
        config.validate().map_err(EnvError::Config)?;
        params.validate().map_err(EnvError::Config)?;
        Ok(Self {
            grid: OccupancyGrid::default_room(),
            params: params.clone(),
            base_params: params,
            draw: None,
            state: None,
            hover: None,
            goal: Vec3::ZERO,
            beacon: Vec3::ZERO,
            frames: None,
            steps: 0,
            reason: TerminationReason::Running,
            commands: Vec::new(),
            trace: None,
            config,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }
    /// Physics parameters of the current episode (wind included).
    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }
    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }
    pub fn goal(&self) -> Vec3 {
        self.goal
    }
    pub fn draw(&self) -> Option<&DomainDraw> {
        self.draw.as_ref()
    }
    /// Physical state; `None` before the first reset.
    pub fn state(&self) -> Option<&SystemState> {
        self.state.as_ref()
    }
    /// Equilibrium the current episode started from.
    pub fn initial_hover(&self) -> Option<&HoverSolution> {
        self.hover.as_ref()
    }
    pub fn steps(&self) -> usize {
        self.steps
    }
    pub fn reason(&self) -> TerminationReason {
        self.reason
    }
    /// Control period, s.
    pub fn control_dt(&self) -> f64 {
        self.config.substeps as f64 * self.base_params.dt
    }
    /// Actuator commands applied during the last step.
    pub fn last_commands(&self) -> &[UavCommand] {
        &self.commands
    }
    pub fn action_len(&self) -> usize {
        self.config.n_uavs * ACTION_PER_UAV
    }

    pub fn reset(&mut self) -> Result<(Observation, PrivilegedState), EnvError> {
        self.reset_seeded(self.config.seed)
    }

    /// Starts a new episode whose map, parameters, start, and goal are all
    /// determined by `seed`.
    pub fn reset_seeded(&mut self, seed: u64) -> Result<(Observation, PrivilegedState), EnvError> {
        let cfg = &self.config;
        let grid = sample_map_between(seed, cfg.difficulty, &cfg.regions())?;
        let draw = randomize(seed, cfg, &self.base_params)?;
        let params = draw.physics(&self.base_params);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(PLACEMENT_STREAM);
        let in_rect = |rng: &mut ChaCha8Rng, r: &crate::world::Rect| {
            Vec3::new(rng.random_range(r.x0..=r.x1), rng.random_range(r.y0..=r.y1), cfg.start_height)
        };
        let start = in_rect(&mut rng, &cfg.start_region);
        let goal = match cfg.goal {
            Some(g) => g,
            None => in_rect(&mut rng, &cfg.goal_region),
        };
        if grid.is_occupied(goal) {
            return Err(EnvError::Config(format!("goal ({}, {}, {}) is outside the room or occupied", goal.x, goal.y, goal.z)));
        }
        let yaw = (goal.y - start.y).atan2(goal.x - start.x);

        let uavs: Vec<UavState> = draw
            .uav_masses
            .iter()
            .zip(&draw.thrust_coeffs)
            .map(|(&m, &kb)| UavState::at_rest(start, m, kb))
            .collect();
        let hover = match &draw.payload {
            Some(sample) => {
                let payload = PayloadState {
                    position: start,
                    velocity: Vec3::ZERO,
                    orientation: Euler::LEVEL,
                    angular_velocity: Vec3::ZERO,
                    mass: sample.mass,
                    inertia_diag: sample.inertia_diag,
                    geometry: sample.geometry,
                };
                let cables = sample
                    .attach_points
                    .iter()
                    .map(|&a| CableSpec { rest_length: draw.cable_length, ..CableSpec::with_attach(a) })
                    .collect();
                formation_hover(payload, uavs, cables, cfg.formation_radius, yaw, &params)?
            }
            None => {
                let n = uavs.len();
                let uavs = uavs
                    .into_iter()
                    .enumerate()
                    .map(|(i, mut u)| {
                        if n > 1 {
                            let a = std::f64::consts::PI + std::f64::consts::TAU * i as f64 / n as f64;
                            u.position = start + Vec3::new(a.cos(), a.sin(), 0.0) * cfg.formation_radius;
                        }
                        u.attitude.yaw = yaw;
                        u
                    })
                    .collect();
                solve_hover(&SystemState { uavs, payload: None, cables: Vec::new(), t: 0.0 }, &params)?
            }
        };
        let state = hover.state.clone();
        // The sensor looks for a beacon at UAV height above the goal so the
        // goal stays in the field of view while the payload hangs below.
        let suspension = state.uav_centroid().z - state.transport_point().z;
        let beacon = goal + Vec3::new(0.0, 0.0, suspension);

        let first = frame(&state, &grid, cfg, beacon)?;
        self.frames = Some(FrameStack::filled(first, cfg.frame_stack));
        self.commands = hover.commands.clone();
        self.grid = grid;
        self.draw = Some(draw);
        self.params = params;
        self.goal = goal;
        self.beacon = beacon;
        self.state = Some(state);
        self.hover = Some(hover);
        self.steps = 0;
        self.reason = TerminationReason::Running;
        if let Some(t) = self.trace.as_mut() {
            t.clear();
        }
        let obs = self.frames.as_ref().expect("just set").observation();
        let state = self.state.as_ref().expect("just set");
        Ok((obs, self.privileged_of(state)))
    }

    /// Maps a clamped action to actuator commands. Thrust uses the nominal
    /// mass and thrust coefficient: the policy does not know the drawn ones.
    pub fn commands_for(&self, action: &[f64]) -> Vec<UavCommand> {
        let hover_thrust = self.config.uav_mass * self.base_params.gravity;
        action
            .chunks_exact(ACTION_PER_UAV)
            .map(|a| {
                let thrust = (a[0] + 1.0) * hover_thrust;
                let omega = (thrust / (ROTORS as f64 * self.base_params.thrust_coeff)).sqrt();
                UavCommand::uniform(omega, Vec3::new(a[1], a[2], a[3]) * self.config.omega_max)
            })
            .collect()
    }

    pub fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        let Some(prev) = self.state.clone() else {
            return Err(EnvError::Protocol("step before reset".into()));
        };
        if self.reason.is_done() {
            return Err(EnvError::Protocol(format!("step after episode ended ({})", self.reason)));
        }
        if action.len() != self.action_len() {
            return Err(EnvError::Action(format!("expected {} action values, got {}", self.action_len(), action.len())));
        }
        if action.iter().any(|a| a.is_nan()) {
            return Err(EnvError::Action("NaN in action".into()));
        }
        let action: Vec<f64> = action.iter().map(|a| a.clamp(-1.0, 1.0)).collect();
        self.commands = self.commands_for(&action);

        let mut state = prev.clone();
        let mut reason = TerminationReason::Running;
        for _ in 0..self.config.substeps {
            match step_rk4(&state, &self.commands, &self.params, self.params.dt) {
                Ok(next) => state = next,
                Err(PhysicsError::Faulted { state: faulted, reason: why }) => {
                    log::debug!("physics fault at t={:.2}: {why}", faulted.t);
                    state = *faulted;
                    reason = TerminationReason::Crash;
                    break;
                }
                Err(e) => return Err(e.into()),
            }
            if collided(&state, &self.grid, &self.config) {
                reason = TerminationReason::Collision;
                break;
            }
            if crashed(&state, &self.config) {
                reason = TerminationReason::Crash;
                break;
            }
        }
        self.steps += 1;
        if reason == TerminationReason::Running {
            reason = terminated(&state, &self.grid, self.goal, self.steps, &self.config);
        }
        let sanitized = sanitize(&state);
        // A non-finite state scores as if nothing moved.
        let scored = if sanitized == state { &state } else { &prev };
        let r = reward(&prev, scored, &action, self.goal, reason, &self.config);

        let f = frame(&sanitized, &self.grid, &self.config, self.beacon)?;
        let frames = self.frames.as_mut().expect("episode started");
        frames.push(f);
        let observation = frames.observation();
        self.state = Some(state);
        self.reason = reason;
        let privileged = self.privileged_of(&sanitized);
        if let Some(trace) = self.trace.as_mut() {
            let s = self.state.as_ref().expect("set above");
            trace.push(TraceRecord {
                t: s.t,
                uav_positions: s.uavs.iter().map(|u| u.position.to_array()).collect(),
                uav_attitudes: s.uavs.iter().map(|u| u.attitude.as_vec().to_array()).collect(),
                payload_position: s.payload.as_ref().map(|p| p.position.to_array()),
                payload_orientation: s.payload.as_ref().map(|p| p.orientation.as_vec().to_array()),
                action: action.clone(),
                reward: r,
                reason,
            });
        }
        Ok(StepResult { observation, privileged, reward: r, done: reason.is_done(), reason })
    }

    fn privileged_of(&self, state: &SystemState) -> PrivilegedState {
        let class = self.draw.as_ref().and_then(|d| d.payload.as_ref()).map(|p| p.class);
        let time_frac = self.steps as f64 / self.config.max_steps as f64;
        privileged(state, class, self.goal, self.base_params.thrust_coeff, time_frac)
    }

    /// Starts recording a trace of every subsequent step.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[TraceRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Writes the recorded trace as one JSON object per line.
    pub fn write_trace(&self, path: &Path) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for rec in self.trace() {
            serde_json::to_writer(&mut out, rec)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }
}

/// Replaces non-finite values (possible after a physics fault) so the final
/// observation and critic input stay finite.
fn sanitize(state: &SystemState) -> SystemState {
    let fix = |v: Vec3| Vec3::new(finite(v.x), finite(v.y), finite(v.z));
    let mut s = state.clone();
    for u in &mut s.uavs {
        u.position = fix(u.position);
        u.velocity = fix(u.velocity);
        u.body_rates = fix(u.body_rates);
        u.attitude = Euler::from_vec(fix(u.attitude.as_vec()));
    }
    if let Some(p) = s.payload.as_mut() {
        p.position = fix(p.position);
        p.velocity = fix(p.velocity);
        p.angular_velocity = fix(p.angular_velocity);
        p.orientation = Euler::from_vec(fix(p.orientation.as_vec()));
    }
    s
}

fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}
