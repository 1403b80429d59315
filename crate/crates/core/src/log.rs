//! Mission records and their CSV form.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::voxel::{Face, Position, VoxelIdx};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Bootstrap,
    Inspect,
    Explore,
    End,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Bootstrap => "bootstrap",
            Phase::Inspect => "inspect",
            Phase::Explore => "explore",
            Phase::End => "end",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimelineRow {
    pub clock_s: f64,
    pub distance_m: f64,
    pub v_f: usize,
    pub v_o: usize,
    pub v_bn: usize,
    pub v_bi: usize,
    /// Fraction in [0, 1] of the inspectable bridge voxels marked inspected.
    pub pct_inspected: f64,
    pub phase: Phase,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub replan_idx: usize,
    /// Viewpoint generation and instance construction, wall seconds.
    pub non_gtsp_s: f64,
    /// Solver wall seconds, including re-solves triggered while flying the tour.
    pub gtsp_s: f64,
    /// Simulated flight seconds spent executing the tour.
    pub flight_s: f64,
}

/// One flown tour edge and the numbers the discrepancy check saw before flying it.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeAudit {
    pub replan_idx: usize,
    pub from: VoxelIdx,
    pub to: VoxelIdx,
    pub euclidean: f64,
    /// Cost the solver used for this edge.
    pub planned_cost: f64,
    pub path_distance: f64,
    /// The planned cost came from an earlier path-distance override.
    pub overridden: bool,
    pub dd: f64,
}

impl EdgeAudit {
    pub fn satisfies_dd(&self) -> bool {
        let slack = 1e-9 * self.path_distance.max(1.0);
        self.path_distance - self.euclidean <= self.dd + slack
            || (self.overridden && (self.planned_cost - self.path_distance).abs() <= slack)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inspection {
    pub clock_s: f64,
    pub voxel: VoxelIdx,
    pub face: Face,
    pub viewpoint: VoxelIdx,
    pub opportunistic: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TourOutcome {
    Completed,
    TimedOut,
    Invalidated,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MissionLog {
    pub timeline: Vec<TimelineRow>,
    pub timing: Vec<TimingRow>,
    pub edges: Vec<EdgeAudit>,
    pub inspections: Vec<Inspection>,
    /// Voxel-center waypoints in flight order, starting at the start pose.
    pub trajectory: Vec<Position>,
    /// Bridge voxels in visiting order, one entry per solve.
    pub tours: Vec<Vec<VoxelIdx>>,
    pub outcomes: Vec<TourOutcome>,
    pub inspectable_total: usize,
}

pub const TIMELINE_HEADER: &str = "clock_s,distance_m,v_f,v_o,v_bn,v_bi,pct_inspected,phase";
pub const TIMING_HEADER: &str = "replan_idx,non_gtsp_s,gtsp_s,flight_s";

impl MissionLog {
    pub fn last_row(&self) -> Option<&TimelineRow> {
        self.timeline.last()
    }

    pub fn final_pct(&self) -> f64 {
        self.last_row().map_or(0.0, |r| r.pct_inspected)
    }

    pub fn final_occupied(&self) -> usize {
        self.last_row().map_or(0, |r| r.v_o + r.v_bn + r.v_bi)
    }

    pub fn timeline_csv(&self) -> String {
        let mut s = String::from(TIMELINE_HEADER);
        s.push('\n');
        for r in &self.timeline {
            let _ = writeln!(
                s,
                "{:.3},{:.3},{},{},{},{},{:.6},{}",
                r.clock_s,
                r.distance_m,
                r.v_f,
                r.v_o,
                r.v_bn,
                r.v_bi,
                r.pct_inspected,
                r.phase.as_str()
            );
        }
        s
    }

    pub fn timing_csv(&self) -> String {
        let mut s = String::from(TIMING_HEADER);
        s.push('\n');
        for r in &self.timing {
            let _ = writeln!(
                s,
                "{},{:.6},{:.6},{:.3}",
                r.replan_idx, r.non_gtsp_s, r.gtsp_s, r.flight_s
            );
        }
        s
    }

    /// Writes `timeline.csv` and `timing.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("timeline.csv"), self.timeline_csv())?;
        std::fs::write(dir.join("timing.csv"), self.timing_csv())
    }
}

/// Parses the timing CSV back into rows.
pub fn parse_timing_csv(text: &str) -> Result<Vec<TimingRow>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(TIMING_HEADER) {
        return Err("unexpected timing header".into());
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 4 {
                return Err(format!("bad timing row `{l}`"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
            Ok(TimingRow {
                replan_idx: f[0].parse().map_err(|e| format!("`{}`: {e}", f[0]))?,
                non_gtsp_s: num(f[1])?,
                gtsp_s: num(f[2])?,
                flight_s: num(f[3])?,
            })
        })
        .collect()
}
