//! Adaptive large-neighborhood search over cluster orders.
//!
//! Construction is cheapest insertion. Each iteration removes k clusters (segment, random
//! or worst removal, chosen with adaptive weights, as is k) and greedily reinserts them
//! in random order. New incumbents are polished with 2-opt on the open path and an exact
//! layered shortest path over vertex choices. All comparisons are relative, so scaling
//! every coordinate by a power of two leaves the search trajectory unchanged.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GtspInstance, Tour, START_CLUSTER, START_VERTEX};
use crate::error::GtspError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverBudget {
    pub max_iterations: usize,
    /// Stop after this many iterations without a new best tour.
    pub stagnation: usize,
}

impl Default for SolverBudget {
    fn default() -> Self {
        Self {
            max_iterations: 3000,
            stagnation: 600,
        }
    }
}

const REL_EPS: f64 = 1e-12;
const K_BUCKETS: [(usize, usize); 4] = [(1, 2), (3, 5), (6, 12), (13, 30)];
const T_START: f64 = 0.02;
const T_END: f64 = 0.0005;

fn better(a: f64, b: f64) -> bool {
    a < b - REL_EPS * b.abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Removal {
    Segment,
    Random,
    Worst,
}

const REMOVALS: [Removal; 3] = [Removal::Segment, Removal::Random, Removal::Worst];

struct Weights(Vec<f64>);

impl Weights {
    fn new(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    fn pick(&self, rng: &mut ChaCha8Rng, allowed: usize) -> usize {
        let total: f64 = self.0[..allowed].iter().sum();
        let mut r = rng.gen::<f64>() * total;
        for (i, w) in self.0[..allowed].iter().enumerate() {
            if r < *w {
                return i;
            }
            r -= w;
        }
        allowed - 1
    }

    fn reward(&mut self, i: usize, score: f64) {
        self.0[i] = (0.8 * self.0[i] + 0.2 * score).max(0.05);
    }
}

pub fn solve(instance: &GtspInstance, budget: SolverBudget, seed: u64) -> Result<Tour, GtspError> {
    solve_warm(instance, budget, seed, &[])
}

/// Like [`solve`], but the construction starts from `hint`, a partial cluster order.
/// Unknown or repeated clusters in the hint are ignored.
pub fn solve_warm(
    instance: &GtspInstance,
    budget: SolverBudget,
    seed: u64,
    hint: &[usize],
) -> Result<Tour, GtspError> {
    instance.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_clusters = instance.cluster_count();

    let mut used = vec![false; n_clusters];
    used[START_CLUSTER] = true;
    let hint: Vec<usize> = hint
        .iter()
        .copied()
        .filter(|&c| c < n_clusters && !std::mem::replace(&mut used[c], true))
        .collect();
    let initial = optimal_choice(instance, &hint);
    let mut cur = construct(instance, initial);
    let mut cur_cost = instance.path_cost(&cur);
    let mut best = cur.clone();
    let mut best_cost = cur_cost;

    let m = n_clusters - 1;
    if m >= 2 {
        let buckets = K_BUCKETS.iter().filter(|(lo, _)| *lo <= m).count();
        let mut op_w = Weights::new(REMOVALS.len());
        let mut k_w = Weights::new(buckets);
        let mut since_best = 0;
        for iter in 0..budget.max_iterations {
            if since_best >= budget.stagnation {
                break;
            }
            since_best += 1;
            let op = op_w.pick(&mut rng, REMOVALS.len());
            let b = k_w.pick(&mut rng, buckets);
            let (lo, hi) = K_BUCKETS[b];
            let k = rng.gen_range(lo..=hi.min(m).max(lo)).min(m);

            let mut route = cur.clone();
            let mut removed = remove(instance, &mut route, REMOVALS[op], k, &mut rng);
            removed.shuffle(&mut rng);
            for c in removed {
                let (v, pos) = best_insertion(instance, &route, c);
                route.insert(pos, v);
            }
            let cost = instance.path_cost(&route);

            let score;
            if better(cost, best_cost) {
                let (polished, polished_cost) = polish(instance, route);
                best = polished.clone();
                best_cost = polished_cost;
                cur = polished;
                cur_cost = polished_cost;
                since_best = 0;
                score = 10.0;
            } else if better(cost, cur_cost) {
                cur = route;
                cur_cost = cost;
                score = 4.0;
            } else {
                let frac = iter as f64 / budget.max_iterations.max(1) as f64;
                let temp = T_START * (T_END / T_START).powf(frac);
                let accept = cur_cost > 0.0
                    && rng.gen::<f64>() < (-(cost - cur_cost) / (cur_cost * temp)).exp();
                if accept {
                    cur = route;
                    cur_cost = cost;
                    score = 1.0;
                } else {
                    score = 0.0;
                }
            }
            op_w.reward(op, score);
            k_w.reward(b, score);
        }
    }

    let (best, best_cost) = polish(instance, best);
    debug_assert!(instance.is_feasible(&best));
    Ok(Tour {
        vertices: best,
        total_cost: best_cost,
    })
}

/// Cheapest insertion from `route`, caching each open vertex's best slot.
fn construct(inst: &GtspInstance, mut route: Vec<usize>) -> Vec<usize> {
    let n = inst.vertex_count();
    let mut inserted = vec![false; inst.cluster_count()];
    for &v in &route {
        inserted[inst.vertices()[v].cluster] = true;
    }
    let open: Vec<usize> = (0..n)
        .filter(|&v| !inserted[inst.vertices()[v].cluster])
        .collect();
    if open.is_empty() {
        return route;
    }
    // slot p means "after route[p]"
    let mut slot = vec![0usize; n];
    let mut delta = vec![f64::INFINITY; n];
    for &v in &open {
        (slot[v], delta[v]) = scan_slots(inst, &route, v);
    }
    let mut alive = open;
    while !alive.is_empty() {
        let mut pick = alive[0];
        for &v in &alive[1..] {
            if delta[v] < delta[pick] {
                pick = v;
            }
        }
        let p = slot[pick];
        route.insert(p + 1, pick);
        let c = inst.vertices()[pick].cluster;
        alive.retain(|&v| inst.vertices()[v].cluster != c);
        for &w in &alive {
            if slot[w] == p {
                (slot[w], delta[w]) = scan_slots(inst, &route, w);
                continue;
            }
            if slot[w] > p {
                slot[w] += 1;
            }
            for q in [p, p + 1] {
                let d = slot_delta(inst, &route, w, q);
                if d < delta[w] || (d == delta[w] && q < slot[w]) {
                    slot[w] = q;
                    delta[w] = d;
                }
            }
        }
    }
    route
}

fn slot_delta(inst: &GtspInstance, route: &[usize], v: usize, p: usize) -> f64 {
    let a = route[p];
    match route.get(p + 1) {
        Some(&b) => inst.cost(a, v) + inst.cost(v, b) - inst.cost(a, b),
        None => inst.cost(a, v),
    }
}

fn scan_slots(inst: &GtspInstance, route: &[usize], v: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for p in 0..route.len() {
        let d = slot_delta(inst, route, v, p);
        if d < best.1 {
            best = (p, d);
        }
    }
    best
}

/// Best (vertex, insert index) for cluster `c`.
fn best_insertion(inst: &GtspInstance, route: &[usize], c: usize) -> (usize, usize) {
    let mut best = (usize::MAX, 0, f64::INFINITY);
    for &v in &inst.clusters()[c] {
        let (p, d) = scan_slots(inst, route, v);
        if d < best.2 {
            best = (v, p + 1, d);
        }
    }
    (best.0, best.1)
}

/// Removes `k` clusters from `route` (never the start) and returns them.
fn remove(
    inst: &GtspInstance,
    route: &mut Vec<usize>,
    op: Removal,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let m = route.len() - 1;
    let positions: Vec<usize> = match op {
        Removal::Segment => {
            let s = rng.gen_range(1..=m - k + 1);
            (s..s + k).collect()
        }
        Removal::Random => sample(rng, m, k).into_iter().map(|i| i + 1).collect(),
        Removal::Worst => {
            let mut savings: Vec<(f64, usize)> = (1..=m)
                .map(|i| {
                    let (a, v) = (route[i - 1], route[i]);
                    let s = match route.get(i + 1) {
                        Some(&b) => inst.cost(a, v) + inst.cost(v, b) - inst.cost(a, b),
                        None => inst.cost(a, v),
                    };
                    (s, i)
                })
                .collect();
            savings.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
            let mut out = Vec::with_capacity(k);
            for _ in 0..k {
                let y: f64 = rng.gen();
                let j = ((y * y * y) * savings.len() as f64) as usize;
                out.push(savings.remove(j.min(savings.len() - 1)).1);
            }
            out
        }
    };
    let mut drop = vec![false; route.len()];
    for &p in &positions {
        drop[p] = true;
    }
    let mut removed = Vec::with_capacity(k);
    let mut kept = Vec::with_capacity(route.len() - k);
    for (i, &v) in route.iter().enumerate() {
        if drop[i] {
            removed.push(inst.vertices()[v].cluster);
        } else {
            kept.push(v);
        }
    }
    *route = kept;
    removed
}

/// Exact best vertex per cluster for a fixed cluster order (layered shortest path).
fn optimal_choice(inst: &GtspInstance, order: &[usize]) -> Vec<usize> {
    let mut route = vec![START_VERTEX];
    if order.is_empty() {
        return route;
    }
    let mut layers: Vec<(Vec<f64>, Vec<usize>)> = Vec::with_capacity(order.len());
    let mut prev: Vec<usize> = vec![START_VERTEX];
    let mut prev_dist = vec![0.0];
    for &c in order {
        let members = &inst.clusters()[c];
        let mut dist = vec![f64::INFINITY; members.len()];
        let mut from = vec![0usize; members.len()];
        for (j, &v) in members.iter().enumerate() {
            for (i, &u) in prev.iter().enumerate() {
                let d = prev_dist[i] + inst.cost(u, v);
                if d < dist[j] {
                    dist[j] = d;
                    from[j] = i;
                }
            }
        }
        prev = members.clone();
        prev_dist = dist.clone();
        layers.push((dist, from));
    }
    let (last_dist, _) = layers.last().expect("order is non-empty");
    let mut j = 0;
    for (i, d) in last_dist.iter().enumerate() {
        if *d < last_dist[j] {
            j = i;
        }
    }
    let mut picks = vec![0usize; order.len()];
    for l in (0..order.len()).rev() {
        picks[l] = inst.clusters()[order[l]][j];
        j = layers[l].1[j];
    }
    route.extend(picks);
    route
}

/// 2-opt on the open path with fixed vertices.
fn two_opt(inst: &GtspInstance, route: &mut [usize]) -> bool {
    let m = route.len() - 1;
    let mut changed = false;
    loop {
        let total = inst.path_cost(route);
        let mut improved = false;
        'outer: for i in 1..m {
            for j in i + 1..=m {
                let before = inst.cost(route[i - 1], route[i])
                    + route.get(j + 1).map_or(0.0, |&b| inst.cost(route[j], b));
                let after = inst.cost(route[i - 1], route[j])
                    + route.get(j + 1).map_or(0.0, |&b| inst.cost(route[i], b));
                if after - before < -REL_EPS * total {
                    route[i..=j].reverse();
                    improved = true;
                    break 'outer;
                }
            }
        }
        if !improved {
            return changed;
        }
        changed = true;
    }
}

/// Alternates 2-opt and vertex re-selection until neither helps.
fn polish(inst: &GtspInstance, mut route: Vec<usize>) -> (Vec<usize>, f64) {
    let mut cost = inst.path_cost(&route);
    loop {
        two_opt(inst, &mut route);
        let order: Vec<usize> = route[1..]
            .iter()
            .map(|&v| inst.vertices()[v].cluster)
            .collect();
        let chosen = optimal_choice(inst, &order);
        let chosen_cost = inst.path_cost(&chosen);
        let two_opt_cost = inst.path_cost(&route);
        if better(chosen_cost, two_opt_cost) {
            route = chosen;
        }
        let new_cost = inst.path_cost(&route);
        if !better(new_cost, cost) {
            return (route, new_cost.min(cost));
        }
        cost = new_cost;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::Position;

    fn line_instance() -> GtspInstance {
        let pts: Vec<Position> = [0.0, 3.0, 1.0, 4.0, 2.0]
            .iter()
            .map(|&x| Position::new(x, 0.0, 0.0))
            .collect();
        let clusters: Vec<Vec<usize>> = (0..pts.len()).map(|i| vec![i]).collect();
        GtspInstance::from_points(&pts, &clusters, 1.0).unwrap()
    }

    #[test]
    fn collinear_singletons_follow_the_line() {
        let inst = line_instance();
        let tour = solve(&inst, SolverBudget::default(), 1).unwrap();
        assert_eq!(tour.vertices, vec![0, 2, 4, 1, 3]);
        assert_eq!(tour.total_cost, 4.0);
    }

    #[test]
    fn single_cluster_takes_nearest_vertex() {
        let pts = [
            Position::origin(),
            Position::new(5.0, 0.0, 0.0),
            Position::new(0.0, 2.0, 0.0),
            Position::new(0.0, 0.0, -7.0),
        ];
        let inst = GtspInstance::from_points(&pts, &[vec![0], vec![1, 2, 3]], 1.0).unwrap();
        let tour = solve(&inst, SolverBudget::default(), 3).unwrap();
        assert_eq!(tour.vertices, vec![0, 2]);
        assert_eq!(tour.total_cost, 2.0);
    }

    #[test]
    fn start_only_instance() {
        let inst = GtspInstance::from_points(&[Position::origin()], &[vec![0]], 1.0).unwrap();
        let tour = solve(&inst, SolverBudget::default(), 0).unwrap();
        assert_eq!(tour.vertices, vec![0]);
        assert_eq!(tour.total_cost, 0.0);
    }

    #[test]
    fn layered_choice_is_exact() {
        // two clusters of two; greedy picks the wrong first vertex
        let pts = [
            Position::origin(),
            Position::new(1.0, 0.0, 0.0),
            Position::new(0.0, 1.5, 0.0),
            Position::new(10.0, 0.0, 0.0),
            Position::new(0.0, 2.0, 0.0),
        ];
        let inst =
            GtspInstance::from_points(&pts, &[vec![0], vec![1, 2], vec![3, 4]], 1.0).unwrap();
        let route = optimal_choice(&inst, &[1, 2]);
        assert_eq!(route, vec![0, 2, 4]);
    }

    #[test]
    fn layered_choice_matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let m = r.gen_range(1..5);
            let mut pts = vec![Position::origin()];
            let mut clusters = vec![vec![0]];
            for _ in 0..m {
                let k = r.gen_range(1..4);
                clusters.push((pts.len()..pts.len() + k).collect());
                for _ in 0..k {
                    pts.push(Position::new(r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0), 0.0));
                }
            }
            let inst = GtspInstance::from_points(&pts, &clusters, 1.0).unwrap();
            let order: Vec<usize> = (1..=m).rev().collect();
            let mut best = f64::INFINITY;
            let mut pick = vec![0usize; m];
            loop {
                let mut seq = vec![0];
                seq.extend(order.iter().zip(&pick).map(|(&c, &i)| clusters[c][i]));
                best = best.min(inst.path_cost(&seq));
                let mut j = 0;
                while j < m {
                    pick[j] += 1;
                    if pick[j] < clusters[order[j]].len() {
                        break;
                    }
                    pick[j] = 0;
                    j += 1;
                }
                if j == m {
                    break;
                }
            }
            let got = inst.path_cost(&optimal_choice(&inst, &order));
            assert!((got - best).abs() < 1e-9, "{got} vs {best}");
        }
    }

    #[test]
    fn warm_start_ignores_bad_hints() {
        let inst = line_instance();
        let tour = solve_warm(&inst, SolverBudget::default(), 1, &[3, 3, 0, 99, 1]).unwrap();
        assert!(inst.is_feasible(&tour.vertices));
        assert_eq!(tour.total_cost, 4.0);
    }
}
