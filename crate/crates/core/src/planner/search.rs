//! Optimal sequential branch search.
//!
//! Breadth-first layers give the minimal horizon. Only edges into a state's
//! first layer are kept: a state reached again later cannot lie on a
//! shortest path. A backward pass over the layers then picks the cheapest
//! continuation, breaking ties by the first `(action, outcome)` pair, which
//! is the branch a depth-first search in the global order would meet first.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::ground::{BeliefState, GroundProblem, WeightedCost};

use super::Step;

struct Edge {
    step: Step,
    target: u32,
}

/// Cheapest shortest path from `start` to a goal state of at most `budget`
/// steps, with its suffix cost. `None` when no such path exists.
pub(crate) fn shortest(p: &GroundProblem, start: &BeliefState, budget: usize) -> Option<(Vec<Step>, WeightedCost)> {
    if p.is_goal(start) {
        return Some((Vec::new(), WeightedCost::zero()));
    }
    let mut states = vec![start.clone()];
    let mut index: HashMap<BeliefState, u32> = HashMap::new();
    index.insert(start.clone(), 0);
    let mut depth = vec![0usize];
    let mut edges: Vec<Vec<Edge>> = vec![Vec::new()];
    let mut layers: Vec<Vec<u32>> = vec![vec![0]];
    let mut goal_layer = None;

    for d in 0..budget {
        let layer = &layers[d];
        let expanded: Vec<Vec<(Step, BeliefState)>> = layer
            .par_iter()
            .map(|&s| {
                p.transitions(&states[s as usize])
                    .into_iter()
                    .map(|t| (Step { action: t.action, outcome: t.outcome }, t.next))
                    .collect()
            })
            .collect();
        let mut next_layer = Vec::new();
        let mut found = false;
        for (&s, succ) in layer.iter().zip(expanded) {
            for (step, next) in succ {
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = states.len() as u32;
                        found |= p.is_goal(&next);
                        index.insert(next.clone(), id);
                        states.push(next);
                        depth.push(d + 1);
                        edges.push(Vec::new());
                        next_layer.push(id);
                        id
                    }
                };
                if depth[id as usize] == d + 1 {
                    edges[s as usize].push(Edge { step, target: id });
                }
            }
        }
        layers.push(next_layer);
        if found {
            goal_layer = Some(d + 1);
            break;
        }
        if layers[d + 1].is_empty() {
            break;
        }
    }
    let h = goal_layer?;

    // best[s] = (cost to a goal in the last layer, chosen edge)
    let mut best: Vec<Option<(WeightedCost, usize)>> = vec![None; states.len()];
    for &s in &layers[h] {
        if p.is_goal(&states[s as usize]) {
            best[s as usize] = Some((WeightedCost::zero(), usize::MAX));
        }
    }
    for d in (0..h).rev() {
        let values: Vec<Option<(WeightedCost, usize)>> = layers[d]
            .par_iter()
            .map(|&s| {
                let state = &states[s as usize];
                let mut choice: Option<(WeightedCost, usize)> = None;
                for (i, e) in edges[s as usize].iter().enumerate() {
                    let Some((rest, _)) = &best[e.target as usize] else { continue };
                    let mut c = p.step_cost(state, e.step.action);
                    c.add_cost(rest);
                    if choice.as_ref().is_none_or(|(b, _)| c < *b) {
                        choice = Some((c, i));
                    }
                }
                choice
            })
            .collect();
        for (&s, v) in layers[d].iter().zip(values) {
            best[s as usize] = v;
        }
    }

    let (cost, _) = best[0].clone()?;
    let mut path = Vec::with_capacity(h);
    let mut s = 0usize;
    while let Some((_, i)) = best[s] {
        if i == usize::MAX {
            break;
        }
        let e = &edges[s][i];
        path.push(e.step);
        s = e.target as usize;
    }
    debug_assert_eq!(path.len(), h);
    Some((path, cost))
}
