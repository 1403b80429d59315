//! The inspection mission loop: perceive, generate viewpoints, solve the clustered tour,
//! then fly it edge by edge with a lazy path-length check and a per-tour flight-time
//! limit, crediting inspections on arrival.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baseline::detect_frontiers;
use crate::error::MissionError;
use crate::gtsp::{build_instance, solve_warm, GtspInstance, SolverBudget, Tour, START_VERTEX};
use crate::log::{EdgeAudit, Inspection, MissionLog, Phase, TimelineRow, TimingRow, TourOutcome};
use crate::mapping::{CellState, IntegrationReport, SemanticOccupancyGrid};
use crate::nav::{distance_field, plan_path, GridPath};
use crate::scenario::ScenarioConfig;
use crate::sensing::{apply_label_noise, simulate_scan};
use crate::view::{generate_viewpoints, is_viewable, viewable_from, Candidate};
use crate::voxel::{Bounds, Face, Pose, VoxelIdx};
use crate::world::{inspectable_set, WorldModel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MissionOptions {
    /// Chebyshev radius, in voxels, kept clear of occupied cells.
    pub clearance: u32,
    /// Credit every viewable face at every flown waypoint, not only at tour vertices.
    pub opportunistic: bool,
    /// Fly to the nearest frontier when a planning round makes no progress, including
    /// after every known bridge voxel is inspected.
    pub explore_when_idle: bool,
    pub solver: SolverBudget,
    /// Budget for re-solves triggered while flying a tour.
    pub resolve: SolverBudget,
    /// Re-solves allowed per tour before it is abandoned.
    pub retry_budget: usize,
    /// Safety cap on planning rounds.
    pub max_iterations: usize,
}

impl Default for MissionOptions {
    fn default() -> Self {
        Self {
            clearance: 0,
            opportunistic: false,
            explore_when_idle: true,
            solver: SolverBudget::default(),
            resolve: SolverBudget {
                max_iterations: 300,
                stagnation: 100,
            },
            retry_budget: 10,
            max_iterations: 1000,
        }
    }
}

/// A solved instance together with the candidates its vertices refer to.
#[derive(Clone, Debug)]
pub struct Plan {
    pub instance: GtspInstance,
    pub tour: Tour,
    pub candidates: Vec<Candidate>,
}

impl Plan {
    fn candidate(&self, v: usize) -> &Candidate {
        &self.candidates[self.instance.vertices()[v].candidate.expect("not the start vertex")]
    }

    fn target(&self, v: usize) -> VoxelIdx {
        self.candidate(v).bridge_voxel
    }

    fn targets(&self) -> Vec<VoxelIdx> {
        self.tour.vertices[1..].iter().map(|&v| self.target(v)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EdgeCheck {
    Proceed(GridPath, EdgeAudit),
    /// The edge cost was overridden with the true path length.
    Replan,
    Unreachable,
}

fn mix_seed(seed: u64, a: usize, b: usize) -> u64 {
    seed ^ (a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (b as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
}

/// Mutable mission state shared by the inspection planner and the frontier baseline.
pub struct Mission<'a> {
    pub world: &'a WorldModel,
    pub config: &'a ScenarioConfig,
    pub options: MissionOptions,
    pub grid: SemanticOccupancyGrid,
    pub pose: Pose,
    /// Simulated seconds.
    pub clock: f64,
    pub distance: f64,
    pub log: MissionLog,
    inspectable: BTreeSet<VoxelIdx>,
    inspected_in_set: usize,
    next_scan: f64,
    phase: Phase,
    rng: ChaCha8Rng,
    explore_box: Bounds,
    visited_frontiers: BTreeSet<VoxelIdx>,
}

impl<'a> Mission<'a> {
    pub fn new(world: &'a WorldModel, config: &'a ScenarioConfig, options: MissionOptions) -> Self {
        let inspectable = inspectable_set(world, &config.view);
        let log = MissionLog {
            inspectable_total: inspectable.len(),
            trajectory: vec![config.start_pose.position],
            ..Default::default()
        };
        Self {
            world,
            config,
            options,
            grid: SemanticOccupancyGrid::new(world.voxel_size(), world.bounds()),
            pose: config.start_pose,
            clock: 0.0,
            distance: 0.0,
            log,
            inspectable,
            inspected_in_set: 0,
            next_scan: config.scan_period,
            phase: Phase::Bootstrap,
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            explore_box: config.exploration_bounds(world),
            visited_frontiers: BTreeSet::new(),
        }
    }

    pub fn inspectable(&self) -> &BTreeSet<VoxelIdx> {
        &self.inspectable
    }

    pub fn explore_box(&self) -> Bounds {
        self.explore_box
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn pose_voxel(&self) -> VoxelIdx {
        VoxelIdx::containing(&self.pose.position, self.grid.voxel_size())
    }

    pub fn pct_inspected(&self) -> f64 {
        if self.inspectable.is_empty() {
            1.0
        } else {
            self.inspected_in_set as f64 / self.inspectable.len() as f64
        }
    }

    pub fn record(&mut self) {
        let c = self.grid.counts();
        self.log.timeline.push(TimelineRow {
            clock_s: self.clock,
            distance_m: self.distance,
            v_f: c.free,
            v_o: c.obstacle,
            v_bn: c.bridge_not_inspected,
            v_bi: c.bridge_inspected,
            pct_inspected: self.pct_inspected(),
            phase: self.phase,
        });
    }

    /// Scans from the current pose and integrates the result.
    pub fn scan(&mut self) -> Result<IntegrationReport, MissionError> {
        let mut scan = simulate_scan(self.world, &self.pose, &self.config.lidar)?;
        if self.config.lidar.label_noise > 0.0 {
            apply_label_noise(&mut scan, self.config.lidar.label_noise, &mut self.rng);
        }
        Ok(self.grid.integrate_scan(&scan))
    }

    fn knowledge(&self) -> (usize, usize, usize) {
        let c = self.grid.counts();
        (self.grid.unknown_count(), c.bridge_not_inspected, c.bridge_inspected)
    }

    fn credit(&mut self, voxel: VoxelIdx, face: Face, viewpoint: VoxelIdx, opportunistic: bool) {
        self.grid
            .mark_inspected(voxel)
            .expect("credited voxels are awaiting inspection");
        if self.inspectable.contains(&voxel) {
            self.inspected_in_set += 1;
        }
        self.log.inspections.push(Inspection {
            clock_s: self.clock,
            voxel,
            face,
            viewpoint,
            opportunistic,
        });
    }

    /// Credits every face viewable from the current voxel.
    pub fn credit_here(&mut self) -> usize {
        let here = self.pose_voxel();
        let found = viewable_from(&self.grid, here, &self.config.view);
        let mut n = 0;
        for (b, face) in found {
            if self.grid.state(b) == CellState::BridgeNotInspected {
                self.credit(b, face, here, true);
                n += 1;
            }
        }
        n
    }

    /// Flies `path` from the current pose, scanning every `scan_period` simulated seconds
    /// at the interpolated position. Stops early at the first waypoint reached at or after
    /// `deadline`; returns whether the end of the path was reached.
    pub fn fly_segment(
        &mut self,
        path: &GridPath,
        deadline: Option<f64>,
        credit_waypoints: bool,
    ) -> Result<bool, MissionError> {
        let vs = self.grid.voxel_size();
        let speed = self.config.flight_speed;
        for w in path.voxels.windows(2) {
            if deadline.is_some_and(|d| self.clock >= d) {
                return Ok(false);
            }
            let (a, b) = (w[0].center(vs), w[1].center(vs));
            let d = b - a;
            let len = d.norm();
            let yaw = d.y.atan2(d.x);
            let t0 = self.clock;
            let dt = len / speed;
            while self.next_scan <= t0 + dt + 1e-9 {
                let frac = ((self.next_scan - t0) / dt).clamp(0.0, 1.0);
                self.pose = Pose::new(a + d * frac, yaw);
                self.clock = self.next_scan.max(t0);
                self.scan()?;
                self.record();
                self.next_scan += self.config.scan_period;
            }
            self.clock = t0 + dt;
            self.distance += len;
            self.pose = Pose::new(b, yaw);
            self.log.trajectory.push(b);
            if credit_waypoints && self.credit_here() > 0 {
                self.record();
            }
        }
        Ok(true)
    }

    /// Flies to the nearest reachable frontier not visited before. Returns false when
    /// there is none.
    pub fn explore_step(&mut self, credit_waypoints: bool) -> Result<bool, MissionError> {
        let Ok(field) = distance_field(&self.grid, &self.pose.position, self.options.clearance) else {
            return Ok(false);
        };
        let mut best: Option<(f64, VoxelIdx)> = None;
        for f in detect_frontiers(&self.grid, &self.explore_box) {
            if self.visited_frontiers.contains(&f) {
                continue;
            }
            if let Some(d) = field.distance(f) {
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, f));
                }
            }
        }
        let Some((_, target)) = best else {
            return Ok(false);
        };
        self.visited_frontiers.insert(target);
        let vs = self.grid.voxel_size();
        let path = plan_path(&self.grid, &self.pose.position, &target.center(vs), self.options.clearance)
            .expect("frontier was reachable in the distance field");
        self.fly_segment(&path, None, credit_waypoints)?;
        self.scan()?;
        self.record();
        Ok(true)
    }

    /// Initial scan, then frontier steps until some bridge voxel is mapped.
    pub fn bootstrap(&mut self) -> Result<(), MissionError> {
        self.phase = Phase::Bootstrap;
        self.scan()?;
        self.record();
        loop {
            let c = self.grid.counts();
            if c.bridge_not_inspected + c.bridge_inspected > 0 {
                return Ok(());
            }
            if !self.explore_step(false)? {
                return Err(MissionError::BridgeNotObservable);
            }
        }
    }

    /// Viewpoints reachable from the current pose, solved into a tour. `None` when no
    /// candidate is reachable.
    pub fn plan_iteration(&mut self) -> Result<Option<Plan>, MissionError> {
        let t0 = Instant::now();
        let mut candidates = generate_viewpoints(&self.grid, &self.config.view);
        if let Ok(field) = distance_field(&self.grid, &self.pose.position, self.options.clearance) {
            candidates.retain(|c| field.is_reachable(c.free_voxel));
        } else {
            candidates.clear();
        }
        if candidates.is_empty() {
            return Ok(None);
        }
        let instance = build_instance(&candidates, &self.pose.position, self.grid.voxel_size());
        let non_gtsp_s = t0.elapsed().as_secs_f64();
        let replan_idx = self.log.timing.len();
        let t1 = Instant::now();
        let tour = solve_warm(
            &instance,
            self.options.solver,
            mix_seed(self.config.rng_seed, replan_idx, 0),
            &[],
        )?;
        let gtsp_s = t1.elapsed().as_secs_f64();
        self.log.timing.push(TimingRow {
            replan_idx,
            non_gtsp_s,
            gtsp_s,
            flight_s: 0.0,
        });
        let plan = Plan {
            instance,
            tour,
            candidates,
        };
        self.log.tours.push(plan.targets());
        Ok(Some(plan))
    }

    /// Compares the collision-free path length to the next vertex against the cost the
    /// solver used. A gap above the discrepancy distance overrides the edge cost and asks
    /// for a re-solve.
    pub fn lazy_edge_check(&self, plan: &mut Plan, cur: usize, next: usize) -> EdgeCheck {
        let inst = &mut plan.instance;
        let to = inst.vertices()[next].position;
        let Ok(path) = plan_path(&self.grid, &self.pose.position, &to, self.options.clearance) else {
            return EdgeCheck::Unreachable;
        };
        let (a, b) = (inst.voxel_of(cur), inst.voxel_of(next));
        let planned = inst.cost(cur, next);
        let euclidean = inst.euclidean(cur, next);
        let overridden = inst.override_cost(a, b).is_some();
        let dd = self.config.dd;
        let gap = path.length - planned;
        let stale = overridden
            && (planned - path.length).abs() > 1e-9 * path.length.max(1.0)
            && path.length - euclidean > dd;
        if gap > dd || stale {
            inst.set_override(a, b, path.length);
            return EdgeCheck::Replan;
        }
        let audit = EdgeAudit {
            replan_idx: self.log.timing.len().saturating_sub(1),
            from: a,
            to: b,
            euclidean,
            planned_cost: planned,
            path_distance: path.length,
            overridden,
            dd,
        };
        EdgeCheck::Proceed(path, audit)
    }

    /// Re-solves the clusters still ahead from the current pose.
    fn resolve(
        &mut self,
        plan: &mut Plan,
        remaining: &[usize],
        excluded: &BTreeSet<VoxelIdx>,
        attempt: usize,
    ) -> Result<(), MissionError> {
        let targets: Vec<VoxelIdx> = remaining
            .iter()
            .map(|&v| plan.target(v))
            .filter(|&b| self.grid.state(b) == CellState::BridgeNotInspected)
            .collect();
        let wanted: BTreeSet<VoxelIdx> = targets.iter().copied().collect();
        let candidates: Vec<Candidate> = plan
            .candidates
            .iter()
            .filter(|c| wanted.contains(&c.bridge_voxel) && !excluded.contains(&c.free_voxel))
            .copied()
            .collect();
        let t = Instant::now();
        let mut instance = build_instance(&candidates, &self.pose.position, self.grid.voxel_size());
        instance.copy_overrides_from(&plan.instance);
        let hint: Vec<usize> = targets
            .iter()
            .filter_map(|b| (1..instance.cluster_count()).find(|&c| instance.target(c) == Some(*b)))
            .collect();
        let replan_idx = self.log.timing.len() - 1;
        let tour = solve_warm(
            &instance,
            self.options.resolve,
            mix_seed(self.config.rng_seed, replan_idx, attempt),
            &hint,
        )?;
        self.log.timing[replan_idx].gtsp_s += t.elapsed().as_secs_f64();
        *plan = Plan {
            instance,
            tour,
            candidates,
        };
        self.log.tours.push(plan.targets());
        Ok(())
    }

    /// Flies the tour until it completes, the flight-time limit passes, or the retry
    /// budget for re-solves runs out.
    pub fn run_tour(&mut self, mut plan: Plan) -> Result<TourOutcome, MissionError> {
        let replan_idx = self.log.timing.len() - 1;
        let start_clock = self.clock;
        let deadline = start_clock + self.config.rpt;
        let mut remaining: Vec<usize> = plan.tour.vertices[1..].to_vec();
        let mut cur = START_VERTEX;
        let mut retries = 0;
        let mut excluded = BTreeSet::new();
        let outcome = loop {
            let Some(&next) = remaining.first() else {
                break TourOutcome::Completed;
            };
            if self.clock >= deadline {
                break TourOutcome::TimedOut;
            }
            let target = plan.target(next);
            if self.grid.state(target) != CellState::BridgeNotInspected {
                remaining.remove(0);
                continue;
            }
            match self.lazy_edge_check(&mut plan, cur, next) {
                EdgeCheck::Proceed(path, audit) => {
                    self.log.edges.push(audit);
                    let credit = self.options.opportunistic;
                    if !self.fly_segment(&path, Some(deadline), credit)? {
                        break TourOutcome::TimedOut;
                    }
                    cur = next;
                    remaining.remove(0);
                    let cand = *plan.candidate(next);
                    if self.grid.state(target) == CellState::BridgeNotInspected
                        && is_viewable(&self.grid, cand.free_voxel, target, cand.face, &self.config.view)
                    {
                        self.credit(target, cand.face, cand.free_voxel, false);
                    }
                    self.record();
                }
                check => {
                    if check == EdgeCheck::Unreachable {
                        excluded.insert(plan.candidate(next).free_voxel);
                    }
                    retries += 1;
                    if retries > self.options.retry_budget {
                        break TourOutcome::Invalidated;
                    }
                    self.resolve(&mut plan, &remaining, &excluded, retries)?;
                    remaining = plan.tour.vertices[1..].to_vec();
                    cur = START_VERTEX;
                }
            }
        };
        self.log.timing[replan_idx].flight_s = self.clock - start_clock;
        self.log.outcomes.push(outcome);
        Ok(outcome)
    }

    /// Planning rounds until nothing awaits inspection and nothing is left to explore, or
    /// two consecutive rounds change nothing.
    pub fn run(&mut self) -> Result<(), MissionError> {
        self.bootstrap()?;
        let mut stagnant = 0;
        for _ in 0..self.options.max_iterations {
            let before = self.knowledge();
            self.phase = Phase::Inspect;
            self.scan()?;
            self.record();
            if self.grid.counts().bridge_not_inspected > 0 {
                if let Some(plan) = self.plan_iteration()? {
                    self.run_tour(plan)?;
                }
            }
            let mut progressed = self.knowledge() != before;
            if !progressed && self.options.explore_when_idle {
                self.phase = Phase::Explore;
                progressed = self.explore_step(self.options.opportunistic)?;
            }
            if progressed {
                stagnant = 0;
            } else {
                stagnant += 1;
            }
            if (!progressed && self.grid.counts().bridge_not_inspected == 0) || stagnant >= 2 {
                break;
            }
        }
        self.finish();
        Ok(())
    }

    pub fn finish(&mut self) {
        self.phase = Phase::End;
        self.record();
    }
}

pub fn run_mission(
    world: &WorldModel,
    config: &ScenarioConfig,
    options: MissionOptions,
) -> Result<MissionLog, MissionError> {
    let mut m = Mission::new(world, config, options);
    m.run()?;
    Ok(m.log)
}
