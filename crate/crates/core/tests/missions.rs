mod common;

use std::collections::BTreeSet;

use bridge_inspect::baseline::{detect_frontiers, run_frontier_mission};
use bridge_inspect::executor::{EdgeCheck, Mission, MissionOptions, Plan};
use bridge_inspect::gtsp::{build_instance, Tour};
use bridge_inspect::log::{MissionLog, TourOutcome};
use bridge_inspect::mapping::{CellState, SemanticOccupancyGrid};
use bridge_inspect::nav::GridPath;
use bridge_inspect::view::Candidate;
use bridge_inspect::voxel::{Bounds, Face, Pose, Position, VoxelIdx};
use bridge_inspect::world::{inspectable_set, WorldModel};
use bridge_inspect::{load_world, run_mission, MissionError, ScenarioConfig};
use common::*;
use rand::Rng;

fn scenario(shapes: &[(&str, [f64; 3], [f64; 3])], start: [f64; 3], bbox: Option<([f64; 3], [f64; 3])>) -> String {
    let mut s = format!(
        "voxel_size = 1.0\nflight_speed = 2.0\nscan_period = 1.0\nrng_seed = 3\n\n\
         [start_pose]\nposition = {start:?}\n\n[view]\napex_deg = 0.0\nd_min = 2.0\nd_max = 10.0\n"
    );
    if let Some((lo, hi)) = bbox {
        s += &format!("\n[bounding_box]\nmin = {lo:?}\nmax = {hi:?}\n");
    }
    for (label, lo, hi) in shapes {
        s += &format!("\n[[shapes]]\nlabel = \"{label}\"\nmin = {lo:?}\nmax = {hi:?}\n");
    }
    s
}

fn deck() -> (WorldModel, ScenarioConfig) {
    load_world(DECK_SCENARIO).unwrap()
}

fn open_grid(b: Bounds) -> SemanticOccupancyGrid {
    let mut g = SemanticOccupancyGrid::new(1.0, b);
    for v in b.iter() {
        g.set_state(v, CellState::Free);
    }
    g
}

fn single_plan(grid: &SemanticOccupancyGrid, start: &Position, free: VoxelIdx, bridge: VoxelIdx, face: Face) -> Plan {
    let candidates = vec![Candidate::new(grid, free, bridge, face)];
    let instance = build_instance(&candidates, start, 1.0);
    let tour = Tour::new(&instance, vec![0, 1]);
    Plan { instance, tour, candidates }
}

/// Safety and bookkeeping checks that hold for every finished mission.
fn check_log(world: &WorldModel, log: &MissionLog) {
    for w in log.trajectory.windows(2) {
        for v in touched_voxels(&w[0], &w[1], world.voxel_size()) {
            assert!(!world.is_occupied(v), "trajectory touches occupied {v}");
        }
    }
    for r in log.timeline.windows(2) {
        assert!(r[1].v_bi >= r[0].v_bi);
        assert!(r[1].clock_s >= r[0].clock_s);
        assert!(r[1].distance_m >= r[0].distance_m);
    }
    for r in &log.timeline {
        assert!(r.v_f + r.v_o + r.v_bn + r.v_bi <= world.bounds().len());
    }
    let voxels: BTreeSet<VoxelIdx> = log.inspections.iter().map(|i| i.voxel).collect();
    assert_eq!(voxels.len(), log.inspections.len(), "a voxel was inspected twice");
    assert_eq!(log.last_row().unwrap().v_bi, log.inspections.len());
    for e in &log.edges {
        assert!(e.satisfies_dd(), "edge audit violates the discrepancy bound: {e:?}");
    }
}

#[test]
fn four_meter_leg_takes_two_seconds_and_two_scans() {
    let (world, config) = deck();
    let mut m = Mission::new(&world, &config, MissionOptions::default());
    let s = m.pose_voxel();
    let voxels: Vec<VoxelIdx> = (0..=4).map(|i| s.offset(i, 0, 0)).collect();
    let path = GridPath {
        waypoints: voxels.iter().map(|v| v.center(1.0)).collect(),
        voxels,
        length: 4.0,
    };
    assert!(m.fly_segment(&path, None, false).unwrap());
    assert!((m.clock - 2.0).abs() < 1e-12);
    assert!((m.distance - 4.0).abs() < 1e-12);
    assert_eq!(m.log.timeline.len(), 2);
    assert_eq!(m.log.timeline[0].clock_s, 1.0);
    assert_eq!(m.log.trajectory.len(), 5);
    assert_eq!(m.pose.position, s.offset(4, 0, 0).center(1.0));
}

#[test]
fn deadline_stops_at_the_first_waypoint_past_it() {
    let (world, config) = deck();
    let mut m = Mission::new(&world, &config, MissionOptions::default());
    let s = m.pose_voxel();
    let voxels: Vec<VoxelIdx> = (0..=6).map(|i| s.offset(i, 0, 0)).collect();
    let path = GridPath {
        waypoints: voxels.iter().map(|v| v.center(1.0)).collect(),
        voxels,
        length: 6.0,
    };
    assert!(!m.fly_segment(&path, Some(1.2), false).unwrap());
    assert!((m.clock - 1.5).abs() < 1e-12);
}

#[test]
fn detour_overrides_edge_with_true_path_length() {
    let (world, config) = deck();
    let mut m = Mission::new(&world, &config, MissionOptions::default());
    let b = Bounds::new(VoxelIdx::new(0, 0, 0), VoxelIdx::new(12, 14, 4));
    let mut grid = open_grid(b);
    for x in 1..=11 {
        for z in 0..=4 {
            grid.set_state(VoxelIdx::new(x, 5, z), CellState::Obstacle);
        }
    }
    let bridge = VoxelIdx::new(6, 14, 2);
    grid.set_state(bridge, CellState::BridgeNotInspected);
    let start = VoxelIdx::new(6, 0, 2);
    let target = VoxelIdx::new(6, 8, 2);
    m.grid = grid;
    m.pose = Pose::new(start.center(1.0), 0.0);
    let mut plan = single_plan(&m.grid, &start.center(1.0), target, bridge, Face::NegY);

    assert_eq!(m.lazy_edge_check(&mut plan, 0, 1), EdgeCheck::Replan);
    let oracle = brute_shortest(&m.grid, start)
        .into_iter()
        .find(|(v, _)| *v == target)
        .unwrap()
        .1;
    let stored = plan.instance.override_cost(start, target).unwrap();
    assert!((stored - oracle).abs() < 1e-9, "{stored} vs {oracle}");
    assert!(oracle - 8.0 > config.dd);

    // With the true cost in place the same edge is flown.
    match m.lazy_edge_check(&mut plan, 0, 1) {
        EdgeCheck::Proceed(path, audit) => {
            assert!((path.length - oracle).abs() < 1e-9);
            assert!(audit.overridden);
            assert!(audit.satisfies_dd());
        }
        other => panic!("expected Proceed, got {other:?}"),
    }

    // Without the wall the straight edge passes.
    m.grid = open_grid(b);
    m.grid.set_state(bridge, CellState::BridgeNotInspected);
    let mut plan = single_plan(&m.grid, &start.center(1.0), target, bridge, Face::NegY);
    match m.lazy_edge_check(&mut plan, 0, 1) {
        EdgeCheck::Proceed(path, audit) => {
            assert_eq!(path.length, 8.0);
            assert_eq!(audit.euclidean, 8.0);
            assert!(!audit.overridden);
        }
        other => panic!("expected Proceed, got {other:?}"),
    }
}

fn caged_grid() -> (SemanticOccupancyGrid, VoxelIdx, VoxelIdx) {
    let b = Bounds::new(VoxelIdx::new(0, 0, 0), VoxelIdx::new(24, 12, 12));
    let mut grid = open_grid(b);
    // A hollow obstacle shell around x 10..=22, y 2..=10, z 2..=10.
    let cage = Bounds::new(VoxelIdx::new(10, 2, 2), VoxelIdx::new(22, 10, 10));
    for v in cage.iter() {
        let edge = v.x == 10 || v.x == 22 || v.y == 2 || v.y == 10 || v.z == 2 || v.z == 10;
        if edge {
            grid.set_state(v, CellState::Obstacle);
        }
    }
    let inside = VoxelIdx::new(20, 6, 6);
    let outside = VoxelIdx::new(4, 6, 0);
    grid.set_state(inside, CellState::BridgeNotInspected);
    grid.set_state(outside, CellState::BridgeNotInspected);
    (grid, inside, outside)
}

#[test]
fn unreachable_viewpoints_are_dropped_before_solving() {
    let (world, config) = deck();
    let mut m = Mission::new(&world, &config, MissionOptions::default());
    let (grid, inside, outside) = caged_grid();
    m.grid = grid;
    m.pose = Pose::new(VoxelIdx::new(2, 1, 5).center(1.0), 0.0);
    let plan = m.plan_iteration().unwrap().unwrap();
    assert!(plan.candidates.iter().all(|c| c.bridge_voxel == outside));
    assert_eq!(plan.instance.cluster_count(), 2);
    assert!(generate_has(&m.grid, inside));

    let mut caged = single_plan(&m.grid, &m.pose.position, VoxelIdx::new(16, 6, 6), inside, Face::NegX);
    assert_eq!(m.lazy_edge_check(&mut caged, 0, 1), EdgeCheck::Unreachable);
}

fn generate_has(grid: &SemanticOccupancyGrid, b: VoxelIdx) -> bool {
    bridge_inspect::view::generate_viewpoints(grid, &Default::default())
        .iter()
        .any(|c| c.bridge_voxel == b)
}

#[test]
fn one_second_limit_times_the_tour_out() {
    let (world, mut config) = deck();
    config.rpt = 1.0;
    let mut m = Mission::new(&world, &config, MissionOptions::default());
    m.bootstrap().unwrap();
    let plan = m.plan_iteration().unwrap().unwrap();
    assert!(plan.tour.vertices.len() > 3);
    let t0 = m.clock;
    assert_eq!(m.run_tour(plan).unwrap(), TourOutcome::TimedOut);
    let flown = m.clock - t0;
    assert!(flown >= 1.0 && flown <= 1.0 + 3f64.sqrt() / 2.0 + 1e-9, "flew {flown} s");
    assert_eq!(m.log.timing[0].flight_s, flown);
}

#[test]
fn bootstrap_without_flight_when_bridge_is_in_view() {
    let (world, config) = deck();
    let mut m = Mission::new(&world, &config, MissionOptions::default());
    m.bootstrap().unwrap();
    assert_eq!(m.log.trajectory.len(), 1);
    assert!(m.grid.counts().bridge_not_inspected > 0);
}

#[test]
fn bootstrap_explores_around_an_occluding_wall() {
    let text = scenario(
        &[
            ("obstacle", [-2.0, -6.0, 0.0], [22.0, 6.0, 1.0]),
            ("obstacle", [6.0, -6.0, 0.0], [7.0, 6.0, 8.0]),
            ("bridge", [14.0, -1.0, 1.0], [16.0, 1.0, 3.0]),
        ],
        [5.5, 0.5, 1.5],
        Some(([-2.0, -6.0, 1.0], [22.0, 6.0, 12.0])),
    );
    let (world, config) = load_world(&text).unwrap();
    let mut m = Mission::new(&world, &config, MissionOptions::default());
    m.scan().unwrap();
    assert_eq!(m.grid.counts().bridge_not_inspected, 0);
    let mut m = Mission::new(&world, &config, MissionOptions::default());
    m.bootstrap().unwrap();
    assert!(m.log.trajectory.len() > 1);
    assert!(m.grid.counts().bridge_not_inspected > 0);
    check_log(&world, &m.log);
}

#[test]
fn sealed_bridge_is_never_observed() {
    let text = scenario(
        &[
            ("obstacle", [9.0, -1.0, 2.0], [12.0, 2.0, 5.0]),
            ("bridge", [10.0, 0.0, 3.0], [11.0, 1.0, 4.0]),
        ],
        [5.5, 0.5, 3.5],
        Some(([4.0, -5.0, 1.0], [16.0, 6.0, 8.0])),
    );
    let (world, config) = load_world(&text).unwrap();
    assert!(inspectable_set(&world, &config.view).is_empty());
    let err = run_mission(&world, &config, MissionOptions::default()).unwrap_err();
    assert!(matches!(err, MissionError::BridgeNotObservable), "{err}");
}

#[test]
fn single_voxel_bridge_is_one_completed_tour() {
    let text = scenario(&[("bridge", [10.0, 0.0, 5.0], [11.0, 1.0, 6.0])], [13.5, -5.5, 5.5], None);
    let (world, config) = load_world(&text).unwrap();
    let log = run_mission(&world, &config, MissionOptions::default()).unwrap();
    assert_eq!(log.outcomes.first(), Some(&TourOutcome::Completed));
    assert_eq!(log.tours[0].len(), 1);
    assert_eq!(log.final_pct(), 1.0);
    assert_eq!(log.inspections.len(), 1);
    check_log(&world, &log);
}

#[test]
fn deck_mission_inspects_everything_deterministically() {
    let (world, config) = deck();
    let a = run_mission(&world, &config, MissionOptions::default()).unwrap();
    let b = run_mission(&world, &config, MissionOptions::default()).unwrap();
    assert_eq!(a.final_pct(), 1.0);
    assert_eq!(a.timeline_csv(), b.timeline_csv());
    assert_eq!(a.tours, b.tours);
    check_log(&world, &a);

    let inspectable = inspectable_set(&world, &config.view);
    let credited: BTreeSet<VoxelIdx> = a.inspections.iter().map(|i| i.voxel).collect();
    assert!(inspectable.is_subset(&credited));
    assert_eq!(a.inspectable_total, inspectable.len());
    assert!(a.inspections.iter().all(|i| !i.opportunistic));
}

#[test]
fn enclosed_voxel_is_excluded_and_mission_still_completes() {
    let mut text = DECK_SCENARIO.to_string();
    text += "\n[[shapes]]\nlabel = \"obstacle\"\nmin = [7.0, -1.0, 2.0]\nmax = [10.0, 2.0, 5.0]\n";
    text += "\n[[shapes]]\nlabel = \"bridge\"\nmin = [8.0, 0.0, 3.0]\nmax = [9.0, 1.0, 4.0]\n";
    let (world, config) = load_world(&text).unwrap();
    let set = inspectable_set(&world, &config.view);
    assert!(!set.contains(&VoxelIdx::new(8, 0, 3)));
    let log = run_mission(&world, &config, MissionOptions::default()).unwrap();
    assert_eq!(log.final_pct(), 1.0);
    check_log(&world, &log);
}

#[test]
fn frontier_baseline_trails_the_inspection_planner() {
    let (world, config) = deck();
    let g = run_mission(&world, &config, MissionOptions::default()).unwrap();
    let f = run_frontier_mission(&world, &config, MissionOptions::default()).unwrap();
    assert!(f.final_pct() < g.final_pct());
    check_log(&world, &f);
    assert!(f.inspections.iter().all(|i| i.opportunistic));
}

#[test]
fn frontier_baseline_rejects_start_outside_box() {
    let (world, mut config) = deck();
    config.start_pose = Pose::new(Position::new(-10.5, -10.5, 4.5), 0.0);
    let err = run_frontier_mission(&world, &config, MissionOptions::default()).unwrap_err();
    assert!(matches!(err, MissionError::StartOutsideBox(_)));
}

#[test]
fn frontiers_match_neighbourhood_scan() {
    let mut r = rng(99);
    for _ in 0..20 {
        let grid = random_grid(&mut r, [6, 5, 4]);
        let b = grid.bounds();
        let region = Bounds::new(
            VoxelIdx::new(r.gen_range(0..3), r.gen_range(0..3), 0),
            VoxelIdx::new(r.gen_range(3..6), r.gen_range(2..5), 3),
        );
        let mut expect = Vec::new();
        for v in b.iter() {
            if !region.contains(v) || grid.state(v) != CellState::Free {
                continue;
            }
            let offs = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)];
            if offs.iter().any(|&(x, y, z)| {
                let n = v.offset(x, y, z);
                b.contains(n) && grid.state(n) == CellState::Unknown
            }) {
                expect.push(v);
            }
        }
        assert_eq!(detect_frontiers(&grid, &region), expect);
    }
}
