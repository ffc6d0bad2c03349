//! Experiment configurations and seeded instance generation.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::derive_seed;
use crate::actor::{generate_cost_map, plan_actor_path, ActorPolicy, CostMap};
use crate::error::{AgrError, Result};
use crate::grid::{bfs_distances, AgentPose, Cell, Direction, GridMap};

/// Layouts generated per configuration.
pub const LAYOUTS_PER_CONFIG: usize = 10;
/// Task instances generated per layout.
pub const INSTANCES_PER_LAYOUT: usize = 5;
/// Candidate goals per instance.
pub const GOALS_PER_INSTANCE: usize = 3;
/// Fraction of cells turned into obstacles.
pub const OBSTACLE_DENSITY: f64 = 0.15;

const LAYOUT_ATTEMPTS: usize = 200;
const PLACEMENT_ATTEMPTS: usize = 2_000;
const COST_STREAM: u64 = 0xC057;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GridSize {
    Small,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistanceLevel {
    Easy,
    Normal,
    Hard,
}

/// One of the six grid-size x start-distance configurations, written `S-E` etc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExperimentConfig {
    pub size: GridSize,
    pub distance: DistanceLevel,
}

impl ExperimentConfig {
    /// Report column order: S-E, S-N, S-H, L-E, L-N, L-H.
    pub const ALL: [ExperimentConfig; 6] = [
        ExperimentConfig::new(GridSize::Small, DistanceLevel::Easy),
        ExperimentConfig::new(GridSize::Small, DistanceLevel::Normal),
        ExperimentConfig::new(GridSize::Small, DistanceLevel::Hard),
        ExperimentConfig::new(GridSize::Large, DistanceLevel::Easy),
        ExperimentConfig::new(GridSize::Large, DistanceLevel::Normal),
        ExperimentConfig::new(GridSize::Large, DistanceLevel::Hard),
    ];

    pub const fn new(size: GridSize, distance: DistanceLevel) -> Self {
        ExperimentConfig { size, distance }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).unwrap()
    }

    pub fn side(self) -> usize {
        match self.size {
            GridSize::Small => 10,
            GridSize::Large => 20,
        }
    }

    /// Required BFS distance between the actor and observer starts.
    pub fn start_distance(self) -> u32 {
        match (self.distance, self.size) {
            (DistanceLevel::Easy, _) => 3,
            (DistanceLevel::Normal, _) => 5,
            (DistanceLevel::Hard, GridSize::Small) => 7,
            (DistanceLevel::Hard, GridSize::Large) => 10,
        }
    }

    pub fn label(self) -> String {
        let s = match self.size {
            GridSize::Small => 'S',
            GridSize::Large => 'L',
        };
        let d = match self.distance {
            DistanceLevel::Easy => 'E',
            DistanceLevel::Normal => 'N',
            DistanceLevel::Hard => 'H',
        };
        format!("{s}-{d}")
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for ExperimentConfig {
    type Err = AgrError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentConfig::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| AgrError::InvalidConfig(format!("unknown configuration '{s}' (expected S|L-E|N|H)")))
    }
}

impl Serialize for ExperimentConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for ExperimentConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSeeds {
    pub master: u64,
    pub layout: u64,
    pub instance: u64,
}

/// One task instance; this is also the on-disk instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub config: ExperimentConfig,
    pub layout_index: usize,
    pub instance_index: usize,
    pub grid: GridMap,
    pub actor_cost_map: CostMap,
    pub goals: Vec<Cell>,
    pub true_goal: usize,
    pub actor_start: AgentPose,
    pub observer_start: AgentPose,
    pub seeds: InstanceSeeds,
}

impl InstanceSpec {
    pub fn goal(&self) -> Cell {
        self.goals[self.true_goal]
    }

    /// The actor's scripted path for this instance.
    pub fn actor_policy(&self) -> Result<ActorPolicy> {
        plan_actor_path(&self.grid, &self.actor_cost_map, self.actor_start, self.goal())
    }

    /// Checks the structural invariants of a loaded instance.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if self.actor_cost_map.as_slice().len() != g.cell_count() {
            return Err(AgrError::InvalidMap("cost map size mismatch".into()));
        }
        CostMap::from_flat(g, self.actor_cost_map.as_slice().to_vec())?;
        if self.true_goal >= self.goals.len() {
            return Err(AgrError::InvalidGoals("true goal index out of range".into()));
        }
        for (i, c) in self.goals.iter().enumerate() {
            if !g.is_free(*c) || self.goals[..i].contains(c) {
                return Err(AgrError::InvalidGoals(format!("goal {c} is not a distinct free cell")));
            }
        }
        if !g.is_free(self.actor_start.position) || !g.contains(self.observer_start.position) {
            return Err(AgrError::InvalidConfig("start pose outside the free space".into()));
        }
        Ok(())
    }

    /// File stem `S-E_l03_i1`.
    pub fn file_stem(&self) -> String {
        format!("{}_l{:02}_i{}", self.config, self.layout_index, self.instance_index)
    }
}

/// Cardinal heading from `from` toward `to`, preferring the row axis on ties.
pub fn facing(from: Cell, to: Cell) -> Direction {
    let dr = to.row as isize - from.row as isize;
    let dc = to.col as isize - from.col as isize;
    if dr.abs() >= dc.abs() {
        if dr < 0 {
            Direction::North
        } else {
            Direction::South
        }
    } else if dc < 0 {
        Direction::West
    } else {
        Direction::East
    }
}

fn generate_layout(side: usize, seed: u64) -> Result<GridMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_obstacles = (OBSTACLE_DENSITY * (side * side) as f64).round() as usize;
    let mut cells: Vec<Cell> = (0..side * side).map(|i| Cell::new(i / side, i % side)).collect();
    for _ in 0..LAYOUT_ATTEMPTS {
        cells.shuffle(&mut rng);
        let map = GridMap::new(side, side, cells[..n_obstacles].iter().copied())?;
        if map.is_connected() {
            return Ok(map);
        }
    }
    Err(AgrError::GenerationFailure { attempts: LAYOUT_ATTEMPTS, reason: format!("no connected {side}x{side} layout") })
}

fn place_instance(
    config: ExperimentConfig,
    (layout_index, instance_index): (usize, usize),
    map: &GridMap,
    costs: &CostMap,
    seeds: InstanceSeeds,
) -> Result<InstanceSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seeds.instance);
    let free = map.free_cells();
    let want = config.start_distance();
    for _ in 0..PLACEMENT_ATTEMPTS {
        let goals: Vec<Cell> = free.choose_multiple(&mut rng, GOALS_PER_INSTANCE).copied().collect();
        let true_goal = rng.gen_range(0..GOALS_PER_INSTANCE);
        let start = *free.choose(&mut rng).unwrap();
        let heading = Direction::from_index(rng.gen_range(0..4));
        if goals.contains(&start) {
            continue;
        }
        let dist = bfs_distances(map, start);
        let ring: Vec<Cell> = free.iter().copied().filter(|&c| dist[map.linear(c)] == Some(want)).collect();
        let Some(&observer) = ring.choose(&mut rng) else {
            continue;
        };
        let spec = InstanceSpec {
            config,
            layout_index,
            instance_index,
            grid: map.clone(),
            actor_cost_map: costs.clone(),
            goals,
            true_goal,
            actor_start: AgentPose::new(start, heading),
            observer_start: AgentPose::new(observer, facing(observer, start)),
            seeds,
        };
        if spec.actor_policy().is_ok() {
            return Ok(spec);
        }
    }
    Err(AgrError::GenerationFailure {
        attempts: PLACEMENT_ATTEMPTS,
        reason: format!("could not place a {config} instance"),
    })
}

/// All instances for one configuration: 10 layouts x 5 instances, fully
/// determined by `master_seed`.
pub fn generate_instances(master_seed: u64, config: ExperimentConfig) -> Result<Vec<InstanceSpec>> {
    let config_seed = derive_seed(master_seed, config.index() as u64);
    let mut out = Vec::with_capacity(LAYOUTS_PER_CONFIG * INSTANCES_PER_LAYOUT);
    for layout in 0..LAYOUTS_PER_CONFIG {
        let layout_seed = derive_seed(config_seed, layout as u64);
        let map = generate_layout(config.side(), layout_seed)?;
        let costs = generate_cost_map(&map, derive_seed(layout_seed, COST_STREAM));
        for inst in 0..INSTANCES_PER_LAYOUT {
            let seeds = InstanceSeeds {
                master: master_seed,
                layout: layout_seed,
                instance: derive_seed(layout_seed, inst as u64 + 1),
            };
            out.push(place_instance(config, (layout, inst), &map, &costs, seeds)?);
        }
    }
    Ok(out)
}

/// Writes one pretty-printed JSON file per instance into `dir`.
pub fn write_instances(dir: &Path, instances: &[InstanceSpec]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for spec in instances {
        let text = serde_json::to_string_pretty(spec)?;
        std::fs::write(dir.join(format!("{}.json", spec.file_stem())), text + "\n")?;
    }
    Ok(())
}

/// Loads every `*.json` instance in `dir`, sorted by file name.
pub fn load_instances(dir: &Path) -> Result<Vec<InstanceSpec>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let spec: InstanceSpec = serde_json::from_str(&std::fs::read_to_string(p)?)?;
            spec.validate()?;
            Ok(spec)
        })
        .collect()
}
