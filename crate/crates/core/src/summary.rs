//! Per-run aggregates and the paired-run comparison table.

use std::fmt::Write as _;

use clap::ValueEnum;

use crate::log::{MissionLog, TimingRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Planner {
    Gatsbi,
    Frontier,
}

impl Planner {
    pub fn as_str(self) -> &'static str {
        match self {
            Planner::Gatsbi => "gatsbi",
            Planner::Frontier => "frontier",
        }
    }
}

/// Average, extremes and population standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Stats {
    pub avg: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Stats {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Stats::default();
        }
        let n = v.len() as f64;
        let avg = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - avg) * (x - avg)).sum::<f64>() / n;
        Stats {
            avg,
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            std: var.sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub scenario: String,
    pub planner: Planner,
    pub seed: u64,
    pub pct_inspected: f64,
    pub distance_m: f64,
    pub time_s: f64,
    pub occupied_seen: usize,
    pub replans: usize,
    pub non_gtsp: Stats,
    pub gtsp: Stats,
    pub flight: Stats,
    /// `ok`, or the error that stopped the run.
    pub status: String,
}

pub const SUMMARY_HEADER: &str = "scenario,planner,seed,status,pct_inspected,distance_m,time_s,occupied_seen,replans,\
non_gtsp_avg,non_gtsp_min,non_gtsp_max,non_gtsp_std,\
gtsp_avg,gtsp_min,gtsp_max,gtsp_std,\
flight_avg,flight_min,flight_max,flight_std";

impl RunSummary {
    pub fn from_timing(
        scenario: &str,
        planner: Planner,
        seed: u64,
        log: &MissionLog,
        timing: &[TimingRow],
    ) -> Self {
        let last = log.last_row();
        Self {
            scenario: scenario.to_string(),
            planner,
            seed,
            pct_inspected: log.final_pct(),
            distance_m: last.map_or(0.0, |r| r.distance_m),
            time_s: last.map_or(0.0, |r| r.clock_s),
            occupied_seen: log.final_occupied(),
            replans: timing.len(),
            non_gtsp: Stats::of(timing.iter().map(|t| t.non_gtsp_s)),
            gtsp: Stats::of(timing.iter().map(|t| t.gtsp_s)),
            flight: Stats::of(timing.iter().map(|t| t.flight_s)),
            status: "ok".into(),
        }
    }

    pub fn from_log(scenario: &str, planner: Planner, seed: u64, log: &MissionLog) -> Self {
        Self::from_timing(scenario, planner, seed, log, &log.timing)
    }

    pub fn failed(scenario: &str, planner: Planner, seed: u64, error: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            planner,
            seed,
            pct_inspected: 0.0,
            distance_m: 0.0,
            time_s: 0.0,
            occupied_seen: 0,
            replans: 0,
            non_gtsp: Stats::default(),
            gtsp: Stats::default(),
            flight: Stats::default(),
            status: format!("error: {}", error.replace(',', ";")),
        }
    }

    pub fn csv_row(&self) -> String {
        let mut s = format!(
            "{},{},{},{},{:.6},{:.3},{:.3},{},{}",
            self.scenario,
            self.planner.as_str(),
            self.seed,
            self.status,
            self.pct_inspected,
            self.distance_m,
            self.time_s,
            self.occupied_seen,
            self.replans
        );
        for st in [self.non_gtsp, self.gtsp, self.flight] {
            let _ = write!(s, ",{:.6},{:.6},{:.6},{:.6}", st.avg, st.min, st.max, st.std);
        }
        s
    }
}

pub fn summary_csv(rows: &[RunSummary]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Human-readable table in the layout of a timing breakdown: one block per planner with
/// average, minimum, maximum and standard deviation per column.
pub fn timing_table(rows: &[RunSummary]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} {:<9} {:>5} {:>8} {:>10} {:>9}  {:>28}  {:>28}  {:>28}",
        "scenario",
        "planner",
        "seed",
        "pct",
        "dist_m",
        "time_s",
        "non-gtsp s avg/min/max/std",
        "gtsp s avg/min/max/std",
        "flight s avg/min/max/std"
    );
    let cell = |st: Stats| format!("{:.3}/{:.3}/{:.3}/{:.3}", st.avg, st.min, st.max, st.std);
    for r in rows {
        let _ = writeln!(
            s,
            "{:<12} {:<9} {:>5} {:>7.2}% {:>10.1} {:>9.1}  {:>28}  {:>28}  {:>28}{}",
            r.scenario,
            r.planner.as_str(),
            r.seed,
            100.0 * r.pct_inspected,
            r.distance_m,
            r.time_s,
            cell(r.non_gtsp),
            cell(r.gtsp),
            cell(r.flight),
            if r.status == "ok" { String::new() } else { format!("  [{}]", r.status) }
        );
    }
    s
}

/// Both planners' inspection and occupancy curves on the union of their clock values,
/// each carried forward from its latest row.
pub fn comparison_csv(runs: &[(u64, &MissionLog, &MissionLog)]) -> String {
    let mut s = String::from("seed,clock_s,gatsbi_pct,frontier_pct,gatsbi_occupied,frontier_occupied\n");
    for (seed, a, b) in runs {
        let mut clocks: Vec<f64> = a
            .timeline
            .iter()
            .chain(&b.timeline)
            .map(|r| r.clock_s)
            .collect();
        clocks.sort_by(f64::total_cmp);
        clocks.dedup();
        let (mut ia, mut ib) = (0usize, 0usize);
        for t in clocks {
            while ia + 1 < a.timeline.len() && a.timeline[ia + 1].clock_s <= t {
                ia += 1;
            }
            while ib + 1 < b.timeline.len() && b.timeline[ib + 1].clock_s <= t {
                ib += 1;
            }
            let (ra, rb) = (&a.timeline[ia], &b.timeline[ib]);
            let _ = writeln!(
                s,
                "{seed},{t:.3},{:.6},{:.6},{},{}",
                ra.pct_inspected,
                rb.pct_inspected,
                ra.v_o + ra.v_bn + ra.v_bi,
                rb.v_o + rb.v_bn + rb.v_bi
            );
        }
    }
    s
}
