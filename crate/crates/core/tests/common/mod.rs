//! Independent reference implementations shared by the integration tests.
//!
//! Everything here is written from the problem definition with plain loops
//! and no calls into the filtering or planning code, so agreement with the
//! library is evidence rather than tautology.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use agr_core::grid::{Cell, GridMap};
use agr_core::sensor::{field_of_view, FovConfig, Observation};
use rand::seq::SliceRandom;
use rand::Rng;

/// (row, col, heading) with headings N=0, E=1, S=2, W=3.
pub type Pose = (usize, usize, usize);

const DR: [isize; 4] = [-1, 0, 1, 0];
const DC: [isize; 4] = [0, 1, 0, -1];

/// Random map with exactly `n_obstacles` blocked cells whose free cells are
/// 4-connected.
pub fn random_connected_map(rng: &mut impl Rng, w: usize, h: usize, n_obstacles: usize) -> GridMap {
    loop {
        let mut cells: Vec<Cell> = (0..w * h).map(|i| Cell::new(i / w, i % w)).collect();
        cells.shuffle(rng);
        let map = GridMap::new(w, h, cells[..n_obstacles].iter().copied()).unwrap();
        let free = free_cells(&map);
        if free.is_empty() {
            continue;
        }
        let d = bfs(&map, free[0]);
        if free.iter().all(|c| d.contains_key(c)) {
            return map;
        }
    }
}

pub fn free_cells(map: &GridMap) -> Vec<Cell> {
    let mut out = Vec::new();
    for r in 0..map.height() {
        for c in 0..map.width() {
            if !map.is_obstacle(Cell::new(r, c)) {
                out.push(Cell::new(r, c));
            }
        }
    }
    out
}

pub fn all_poses(map: &GridMap) -> Vec<Pose> {
    free_cells(map).into_iter().flat_map(|c| (0..4).map(move |h| (c.row, c.col, h))).collect()
}

pub fn bfs(map: &GridMap, src: Cell) -> HashMap<Cell, u32> {
    let mut dist = HashMap::new();
    dist.insert(src, 0);
    let mut q = VecDeque::from([src]);
    while let Some(c) = q.pop_front() {
        for h in 0..4 {
            let r = c.row as isize + DR[h];
            let cc = c.col as isize + DC[h];
            if r < 0 || cc < 0 || r >= map.height() as isize || cc >= map.width() as isize {
                continue;
            }
            let n = Cell::new(r as usize, cc as usize);
            if map.is_obstacle(n) || dist.contains_key(&n) {
                continue;
            }
            dist.insert(n, dist[&c] + 1);
            q.push_back(n);
        }
    }
    dist
}

/// Actor dynamics: action 0 forward, 1 turn left, 2 turn right, 3 stay.
/// Forward into a wall or obstacle leaves the pose unchanged.
pub fn step(map: &GridMap, p: Pose, action: usize) -> Pose {
    let (r, c, h) = p;
    match action {
        0 => {
            let nr = r as isize + DR[h];
            let nc = c as isize + DC[h];
            if nr < 0 || nc < 0 || nr >= map.height() as isize || nc >= map.width() as isize {
                return p;
            }
            if map.is_obstacle(Cell::new(nr as usize, nc as usize)) {
                return p;
            }
            (nr as usize, nc as usize, h)
        }
        1 => (r, c, (h + 3) % 4),
        2 => (r, c, (h + 1) % 4),
        _ => p,
    }
}

/// Epsilon-greedy action probabilities toward the cell whose BFS field is
/// `dist`: distance-minimising actions share `1 - eps`, all get `eps / 4`.
pub fn action_probs(map: &GridMap, dist: &HashMap<Cell, u32>, p: Pose, eps: f64) -> [f64; 4] {
    let score: Vec<u64> = (0..4)
        .map(|a| {
            let (r, c, _) = step(map, p, a);
            dist.get(&Cell::new(r, c)).map_or(u64::MAX, |&d| d as u64)
        })
        .collect();
    let best = *score.iter().min().unwrap();
    let k = score.iter().filter(|&&s| s == best).count() as f64;
    let mut out = [eps / 4.0; 4];
    for a in 0..4 {
        if score[a] == best {
            out[a] += (1.0 - eps) / k;
        }
    }
    out
}

/// Goal-conditioned transition kernel as a map from pose to successors.
pub fn kernel(map: &GridMap, goal: Cell, eps: f64) -> HashMap<Pose, Vec<(Pose, f64)>> {
    let dist = bfs(map, goal);
    all_poses(map)
        .into_iter()
        .map(|p| {
            let probs = action_probs(map, &dist, p, eps);
            let succ = (0..4).map(|a| (step(map, p, a), probs[a])).collect();
            (p, succ)
        })
        .collect()
}

pub fn consistent(
    map: &GridMap,
    observer: agr_core::grid::AgentPose,
    fov: &FovConfig,
    p: Pose,
    o: Observation,
) -> bool {
    let view = field_of_view(map, observer, fov);
    let cell = Cell::new(p.0, p.1);
    match o {
        Observation::Detected(q) => q == cell && view.contains(cell),
        Observation::NotDetected => !view.contains(cell),
    }
}

/// Exact posterior over (final pose, goal) by enumerating every actor
/// trajectory of length `observations.len() - 1`. The prior is uniform over
/// goals and over the poses of each goal's reachable cells; observation `k`
/// is made from `observers[k]`.
pub fn enumerate_posterior(
    map: &GridMap,
    goals: &[Cell],
    eps: f64,
    fov: &FovConfig,
    observers: &[agr_core::grid::AgentPose],
    observations: &[Observation],
) -> HashMap<(Pose, usize), f64> {
    let mut post: HashMap<(Pose, usize), f64> = HashMap::new();
    for (g, &goal) in goals.iter().enumerate() {
        let reach = bfs(map, goal);
        let start: Vec<Pose> =
            all_poses(map).into_iter().filter(|p| reach.contains_key(&Cell::new(p.0, p.1))).collect();
        let k = kernel(map, goal, eps);
        let w0 = 1.0 / goals.len() as f64 / start.len() as f64;
        let mut stack: Vec<(Pose, usize, f64)> = start.into_iter().map(|p| (p, 0, w0)).collect();
        while let Some((p, t, w)) = stack.pop() {
            if !consistent(map, observers[t], fov, p, observations[t]) {
                continue;
            }
            if t + 1 == observations.len() {
                *post.entry((p, g)).or_insert(0.0) += w;
                continue;
            }
            for &(q, pr) in &k[&p] {
                if pr > 0.0 {
                    stack.push((q, t + 1, w * pr));
                }
            }
        }
    }
    let total: f64 = post.values().sum();
    post.values_mut().for_each(|v| *v /= total);
    post
}

/// Samples one action from a distribution over four actions.
pub fn sample_action(rng: &mut impl Rng, probs: &[f64; 4]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (a, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return a;
        }
    }
    3
}
