use super::{GtspInstance, Tour, START_CLUSTER, START_VERTEX};
use crate::error::GtspError;

/// Largest search space `brute_force` will enumerate.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// Number of complete tours: (#non-start clusters)! times the product of cluster sizes.
pub fn combination_count(instance: &GtspInstance) -> f64 {
    let clusters = instance.clusters();
    let m = clusters.len() - 1;
    let orders: f64 = (1..=m).map(|i| i as f64).product();
    let choices: f64 = clusters.iter().map(|c| c.len() as f64).product();
    orders * choices
}

/// Exhaustive enumeration of every cluster order and every vertex choice.
pub fn brute_force(instance: &GtspInstance) -> Result<Tour, GtspError> {
    instance.validate()?;
    let combinations = combination_count(instance);
    if combinations > BRUTE_FORCE_LIMIT {
        return Err(GtspError::TooLarge { combinations });
    }
    let mut search = Search {
        inst: instance,
        used: vec![false; instance.cluster_count()],
        route: vec![START_VERTEX],
        best: None,
    };
    search.used[START_CLUSTER] = true;
    search.descend(0.0);
    let (vertices, total_cost) = search.best.expect("at least the start-only tour exists");
    Ok(Tour {
        vertices,
        total_cost,
    })
}

struct Search<'a> {
    inst: &'a GtspInstance,
    used: Vec<bool>,
    route: Vec<usize>,
    best: Option<(Vec<usize>, f64)>,
}

impl Search<'_> {
    fn descend(&mut self, cost: f64) {
        if self.route.len() == self.used.len() {
            if self.best.as_ref().is_none_or(|(_, b)| cost < *b) {
                self.best = Some((self.route.clone(), cost));
            }
            return;
        }
        let last = *self.route.last().expect("route holds the start");
        for c in 0..self.used.len() {
            if self.used[c] {
                continue;
            }
            self.used[c] = true;
            for &v in &self.inst.clusters()[c] {
                self.route.push(v);
                self.descend(cost + self.inst.cost(last, v));
                self.route.pop();
            }
            self.used[c] = false;
        }
    }
}
