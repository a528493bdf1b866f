//! Exact greedy tree growth shared by every tree learner in the crate.
//!
//! Training rows are addressed by *position* in a sample (a bootstrap sample
//! may repeat a row). Each node keeps, for every feature, its positions
//! sorted by that feature's value, so a split search is one linear scan per
//! candidate feature and a split is a stable partition of those lists.
//! Candidate thresholds are midpoints between consecutive distinct values and
//! rows go left iff `value < threshold`. Ties between equally good splits go
//! to the lowest feature index, then the lowest threshold.

use std::collections::VecDeque;

use super::Node;

/// Feature values by position: `values[feature][position]`.
pub(crate) struct PositionData {
    pub values: Vec<Vec<f64>>,
}

impl PositionData {
    pub fn new(columns: &[Vec<f64>], sample: &[usize]) -> Self {
        PositionData {
            values: columns
                .iter()
                .map(|c| sample.iter().map(|&i| c[i]).collect())
                .collect(),
        }
    }

    pub fn n_positions(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// Positions of one node, sorted by each feature.
#[derive(Clone)]
pub(crate) struct NodeOrder {
    lists: Vec<Vec<u32>>,
}

impl NodeOrder {
    pub fn root(data: &PositionData) -> Self {
        let n = data.n_positions();
        let lists = data
            .values
            .iter()
            .map(|v| {
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| v[a as usize].total_cmp(&v[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        NodeOrder { lists }
    }

    pub fn len(&self) -> usize {
        self.lists.first().map_or(0, Vec::len)
    }

    pub fn positions(&self) -> &[u32] {
        &self.lists[0]
    }

    fn partition(
        self,
        data: &PositionData,
        feature: usize,
        threshold: f64,
    ) -> (NodeOrder, NodeOrder) {
        let column = &data.values[feature];
        let mut left = Vec::with_capacity(self.lists.len());
        let mut right = Vec::with_capacity(self.lists.len());
        for list in self.lists {
            let (l, r): (Vec<u32>, Vec<u32>) = list
                .into_iter()
                .partition(|&p| column[p as usize] < threshold);
            left.push(l);
            right.push(r);
        }
        (NodeOrder { lists: left }, NodeOrder { lists: right })
    }
}

/// Statistic accumulated over a node's positions and scored for splits.
pub(crate) trait Criterion {
    type Stats: Copy;

    fn empty(&self) -> Self::Stats;
    fn add(&self, stats: &mut Self::Stats, position: usize);
    fn difference(&self, total: &Self::Stats, part: &Self::Stats) -> Self::Stats;
    /// Score of a candidate split, `None` when the split violates a
    /// constraint (minimum leaf size, minimum hessian sum).
    fn gain(
        &self,
        parent: &Self::Stats,
        left: (&Self::Stats, usize),
        right: (&Self::Stats, usize),
    ) -> Option<f64>;
    /// Whether a split with this gain may be applied.
    fn accept(&self, gain: f64) -> bool;
    /// Nodes that can never profit from splitting.
    fn is_terminal(&self, _stats: &Self::Stats) -> bool {
        false
    }

    fn total(&self, positions: &[u32]) -> Self::Stats {
        let mut s = self.empty();
        for &p in positions {
            self.add(&mut s, p as usize);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m > a {
        m
    } else {
        b
    }
}

/// Best admissible split of a node over `features` (ascending).
pub(crate) fn best_split<C: Criterion>(
    criterion: &C,
    data: &PositionData,
    order: &NodeOrder,
    parent: &C::Stats,
    features: &[usize],
) -> Option<SplitChoice> {
    let n = order.len();
    let mut best: Option<SplitChoice> = None;
    for &f in features {
        let list = &order.lists[f];
        let column = &data.values[f];
        let mut left = criterion.empty();
        for k in 0..n.saturating_sub(1) {
            let p = list[k] as usize;
            criterion.add(&mut left, p);
            let (a, b) = (column[p], column[list[k + 1] as usize]);
            if a >= b {
                continue;
            }
            let right = criterion.difference(parent, &left);
            if let Some(gain) = criterion.gain(parent, (&left, k + 1), (&right, n - k - 1)) {
                if best.is_none_or(|s| gain > s.gain) {
                    best = Some(SplitChoice {
                        feature: f,
                        threshold: midpoint(a, b),
                        gain,
                    });
                }
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Growth {
    /// Split every eligible node level by level down to `max_depth`.
    DepthWise { max_depth: usize },
    /// Repeatedly split the frontier leaf with the largest gain.
    LeafWise { max_leaves: usize },
}

pub(crate) struct GrowOptions {
    pub growth: Growth,
    pub min_samples_split: usize,
}

enum Slot<S> {
    Leaf(S),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

struct Pending<S> {
    id: usize,
    depth: usize,
    order: NodeOrder,
    stats: S,
}

struct Arena<S> {
    slots: Vec<Slot<S>>,
}

impl<S: Copy> Arena<S> {
    fn into_tree<L>(self, leaf: &dyn Fn(&S) -> L) -> Node<L> {
        fn build<S, L>(slots: &[Slot<S>], id: usize, leaf: &dyn Fn(&S) -> L) -> Node<L> {
            match &slots[id] {
                Slot::Leaf(s) => Node::Leaf(leaf(s)),
                Slot::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => Node::Split {
                    feature: *feature,
                    threshold: *threshold,
                    left: Box::new(build(slots, *left, leaf)),
                    right: Box::new(build(slots, *right, leaf)),
                },
            }
        }
        build(&self.slots, 0, leaf)
    }
}

/// Grows one tree. `choose_features` is called once per split search and
/// returns the candidate features (ascending) for that node.
pub(crate) fn grow<C: Criterion, L>(
    criterion: &C,
    data: &PositionData,
    root: NodeOrder,
    options: &GrowOptions,
    choose_features: &mut dyn FnMut() -> Vec<usize>,
    leaf: &dyn Fn(&C::Stats) -> L,
) -> Node<L> {
    let stats = criterion.total(root.positions());
    let mut arena = Arena {
        slots: vec![Slot::Leaf(stats)],
    };
    let root = Pending {
        id: 0,
        depth: 0,
        order: root,
        stats,
    };

    let search = |node: &Pending<C::Stats>,
                  choose: &mut dyn FnMut() -> Vec<usize>|
     -> Option<SplitChoice> {
        if node.order.len() < options.min_samples_split.max(2) || criterion.is_terminal(&node.stats)
        {
            return None;
        }
        best_split(criterion, data, &node.order, &node.stats, &choose())
            .filter(|s| criterion.accept(s.gain))
    };

    let split = |arena: &mut Arena<C::Stats>, node: Pending<C::Stats>, choice: SplitChoice| {
        let (lo, ro) = node.order.partition(data, choice.feature, choice.threshold);
        let ls = criterion.total(lo.positions());
        let rs = criterion.total(ro.positions());
        let (li, ri) = (arena.slots.len(), arena.slots.len() + 1);
        arena.slots.push(Slot::Leaf(ls));
        arena.slots.push(Slot::Leaf(rs));
        arena.slots[node.id] = Slot::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left: li,
            right: ri,
        };
        let depth = node.depth + 1;
        (
            Pending {
                id: li,
                depth,
                order: lo,
                stats: ls,
            },
            Pending {
                id: ri,
                depth,
                order: ro,
                stats: rs,
            },
        )
    };

    match options.growth {
        Growth::DepthWise { max_depth } => {
            let mut queue = VecDeque::from([root]);
            while let Some(node) = queue.pop_front() {
                if node.depth >= max_depth {
                    continue;
                }
                if let Some(choice) = search(&node, choose_features) {
                    let (l, r) = split(&mut arena, node, choice);
                    queue.push_back(l);
                    queue.push_back(r);
                }
            }
        }
        Growth::LeafWise { max_leaves } => {
            let mut frontier: Vec<(Pending<C::Stats>, SplitChoice)> = Vec::new();
            if let Some(c) = search(&root, choose_features) {
                frontier.push((root, c));
            }
            let mut leaves = 1;
            while leaves < max_leaves && !frontier.is_empty() {
                // Highest gain; on ties the earliest-created node.
                let pick = (0..frontier.len())
                    .max_by(|&a, &b| {
                        frontier[a]
                            .1
                            .gain
                            .total_cmp(&frontier[b].1.gain)
                            .then(frontier[b].0.id.cmp(&frontier[a].0.id))
                    })
                    .expect("frontier is not empty");
                let (node, choice) = frontier.swap_remove(pick);
                let (l, r) = split(&mut arena, node, choice);
                leaves += 1;
                for child in [l, r] {
                    if let Some(c) = search(&child, choose_features) {
                        frontier.push((child, c));
                    }
                }
            }
        }
    }
    arena.into_tree(leaf)
}
