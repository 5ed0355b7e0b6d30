// SPDX-License-Identifier: Apache-2.0

//! Discrete-event execution of tiled layer plans.
//!
//! Five single-server resources process tiles strictly in program order:
//! host ingress, feature broadcast, weight fetch, the VPU array and
//! writeback. The controller starts work on a resource whenever it is idle
//! and the next tile's dependencies are met:
//!
//! - input transfers (ingress, broadcast, weights) of tile `j` need a free
//!   input buffer, i.e. compute of tile `j - depth` has finished;
//! - broadcast of a layer's first tiles waits for every writeback of the
//!   previous layer (its features are this layer's input); weights have
//!   no such dependency and prefetch across layer boundaries;
//! - compute of tile `j` needs all three inputs of `j` and a free output
//!   buffer (writeback of `j - depth` done);
//! - writeback of `j` needs compute of `j`.
//!
//! Completion times are max-plus functions of the durations, so shortening
//! any transfer never delays the end of the run.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::schedule::LayerPlan;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Resource {
    Ingress = 0,
    Broadcast = 1,
    Weights = 2,
    Compute = 3,
    Writeback = 4,
}

const RESOURCES: [Resource; 5] = [
    Resource::Ingress,
    Resource::Broadcast,
    Resource::Weights,
    Resource::Compute,
    Resource::Writeback,
];

#[derive(Clone, Copy, Debug)]
struct Tile {
    layer: usize,
    work: [u64; 5],
}

/// Min-ordered by time, then by insertion for determinism.
struct EventQueue {
    heap: BinaryHeap<Reverse<(u64, u64, Resource, usize)>>,
    seq: u64,
}

impl EventQueue {
    fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            seq: 0,
        }
    }

    fn push(&mut self, time: u64, res: Resource, tile: usize) {
        self.heap.push(Reverse((time, self.seq, res, tile)));
        self.seq += 1;
    }

    fn pop(&mut self) -> Option<(u64, Resource, usize)> {
        self.heap.pop().map(|Reverse((t, _, r, j))| (t, r, j))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Timeline {
    /// Cycle at which the last writeback of each layer completed.
    pub layer_end: Vec<u64>,
    pub makespan: u64,
    pub events: u64,
}

pub fn run(plans: &[LayerPlan], buffer_depth: u64) -> Timeline {
    let depth = buffer_depth.max(1) as usize;
    let tiles: Vec<Tile> = plans
        .iter()
        .enumerate()
        .flat_map(|(layer, plan)| {
            (0..plan.tiles).map(move |i| Tile {
                layer,
                work: [
                    plan.tile_share(plan.phases.ingress, i),
                    plan.tile_share(plan.phases.broadcast, i),
                    plan.tile_share(plan.phases.weight_load, i),
                    plan.tile_share(plan.phases.compute, i),
                    plan.tile_share(plan.phases.writeback, i),
                ],
            })
        })
        .collect();
    let n = tiles.len();
    let layer_tiles: Vec<u64> = plans.iter().map(|p| p.tiles).collect();

    let mut done = vec![vec![false; n]; RESOURCES.len()];
    let mut next = [0usize; 5];
    let mut busy = [false; 5];
    let mut writebacks_done = vec![0u64; plans.len()];
    let mut layer_end = vec![0u64; plans.len()];
    let mut queue = EventQueue::new();
    let mut events = 0u64;
    let mut now = 0u64;

    let ready = |res: Resource, j: usize, done: &[Vec<bool>], wb: &[u64]| -> bool {
        let buffer_free = |stage: Resource| j < depth || done[stage as usize][j - depth];
        match res {
            Resource::Ingress | Resource::Weights => buffer_free(Resource::Compute),
            Resource::Broadcast => {
                let layer = tiles[j].layer;
                buffer_free(Resource::Compute)
                    && (layer == 0 || wb[layer - 1] == layer_tiles[layer - 1])
            }
            Resource::Compute => {
                done[Resource::Ingress as usize][j]
                    && done[Resource::Broadcast as usize][j]
                    && done[Resource::Weights as usize][j]
                    && buffer_free(Resource::Writeback)
            }
            Resource::Writeback => done[Resource::Compute as usize][j],
        }
    };

    loop {
        // dispatch everything startable at `now`
        for res in RESOURCES {
            let r = res as usize;
            if !busy[r] && next[r] < n && ready(res, next[r], &done, &writebacks_done) {
                let j = next[r];
                busy[r] = true;
                next[r] += 1;
                queue.push(now + tiles[j].work[r], res, j);
            }
        }
        let Some((time, res, j)) = queue.pop() else {
            break;
        };
        events += 1;
        now = time;
        let r = res as usize;
        busy[r] = false;
        done[r][j] = true;
        if res == Resource::Writeback {
            let layer = tiles[j].layer;
            writebacks_done[layer] += 1;
            layer_end[layer] = time;
        }
    }

    assert!(
        done.iter().all(|d| d.iter().all(|&x| x)),
        "event loop stalled with unfinished tiles"
    );
    Timeline {
        makespan: layer_end.last().copied().unwrap_or(0),
        layer_end,
        events,
    }
}
