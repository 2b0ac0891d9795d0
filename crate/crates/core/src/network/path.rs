//! Contraction order search.
//!
//! Steps follow the usual einsum-path convention: each step names two
//! positions in the current tensor list, both are removed and their product is
//! appended at the end.
//!
//! The cost model is exact for dense tensors: a step costs the product of the
//! extents of every distinct label on either operand (one multiply-add per
//! output entry per summed combination), and the memory of a step is the total
//! size of everything alive while it runs, its result included.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::NetworkShape;
use crate::error::{Error, Result};

const BYTES_PER_ENTRY: f64 = 16.0;
pub const OPTIMAL_LIMIT: usize = 24;
pub const EXHAUSTIVE_LIMIT: usize = 8;
/// Up to this many tensors per component the subset DP also tries splits whose
/// halves share no label, which makes it exact.
const DP_ALL_SPLITS_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Greedy,
    Optimal,
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Flops,
    Memory,
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Strategy::Greedy),
            "optimal" => Ok(Strategy::Optimal),
            "exhaustive" => Ok(Strategy::Exhaustive),
            _ => Err(Error::InvalidArgument(format!("unknown strategy `{s}`"))),
        }
    }
}

impl FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flops" => Ok(Objective::Flops),
            "memory" => Ok(Objective::Memory),
            _ => Err(Error::InvalidArgument(format!("unknown objective `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionPath {
    pub steps: Vec<(usize, usize)>,
    pub est_flops: f64,
    /// Bytes.
    pub est_peak_memory: f64,
}

impl ContractionPath {
    pub fn cost(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Flops => self.est_flops,
            Objective::Memory => self.est_peak_memory,
        }
    }
}

/// Label sets with dangling labels already summed away.
struct Problem {
    sets: Vec<Vec<usize>>,
    extents: Vec<f64>,
    output: Vec<bool>,
}

impl Problem {
    fn new(shape: &NetworkShape) -> Result<Self> {
        let extents_by_name = shape.validate()?;
        let ids: BTreeMap<&str, usize> = extents_by_name
            .keys()
            .enumerate()
            .map(|(i, k)| (k.as_str(), i))
            .collect();
        let extents: Vec<f64> = extents_by_name.values().map(|&e| e as f64).collect();
        let mut output = vec![false; extents.len()];
        for l in &shape.output {
            output[ids[l.as_str()]] = true;
        }
        let mut counts = vec![0usize; extents.len()];
        for slot in &shape.tensors {
            for l in &slot.labels {
                counts[ids[l.as_str()]] += 1;
            }
        }
        let sets = shape
            .tensors
            .iter()
            .map(|slot| {
                let mut s: Vec<usize> = slot
                    .labels
                    .iter()
                    .map(|l| ids[l.as_str()])
                    .filter(|&id| output[id] || counts[id] > 1)
                    .collect();
                s.sort_unstable();
                s
            })
            .collect();
        Ok(Self {
            sets,
            extents,
            output,
        })
    }

    fn size(&self, set: &[usize]) -> f64 {
        set.iter().map(|&l| self.extents[l]).product()
    }

    /// Connected components, each listed in ascending tensor order, ordered by
    /// their smallest member.
    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.sets.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        let mut owner: HashMap<usize, usize> = HashMap::new();
        for (t, set) in self.sets.iter().enumerate() {
            for &l in set {
                if let Some(&o) = owner.get(&l) {
                    let (a, b) = (find(&mut parent, o), find(&mut parent, t));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                } else {
                    owner.insert(l, t);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for t in 0..n {
            let r = find(&mut parent, t);
            groups.entry(r).or_default().push(t);
        }
        groups.into_values().collect()
    }
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
            j += 1;
        }
    }
    out
}

fn shares(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Live tensor bookkeeping shared by cost evaluation and the greedy search.
#[derive(Clone)]
struct State<'p> {
    problem: &'p Problem,
    counts: Vec<usize>,
    live: Vec<(usize, Vec<usize>)>,
    next_id: usize,
    live_bytes: f64,
}

impl<'p> State<'p> {
    fn new(problem: &'p Problem, members: &[usize], first_id: usize) -> Self {
        let mut counts = vec![0; problem.extents.len()];
        let mut live = Vec::new();
        let mut live_bytes = 0.0;
        for &t in members {
            for &l in &problem.sets[t] {
                counts[l] += 1;
            }
            live.push((t, problem.sets[t].clone()));
            live_bytes += problem.size(&problem.sets[t]) * BYTES_PER_ENTRY;
        }
        Self {
            problem,
            counts,
            live,
            next_id: first_id,
            live_bytes,
        }
    }

    /// Labels of the product of live positions `p` and `q`, with its flop count.
    fn preview(&self, p: usize, q: usize) -> (Vec<usize>, f64) {
        let a = &self.live[p].1;
        let b = &self.live[q].1;
        let all = union(a, b);
        let flops = self.problem.size(&all);
        let result = all
            .into_iter()
            .filter(|&l| {
                let inside = a.binary_search(&l).is_ok() as usize + b.binary_search(&l).is_ok() as usize;
                self.problem.output[l] || self.counts[l] > inside
            })
            .collect();
        (result, flops)
    }

    /// Applies a step; returns (flops, bytes alive during the step).
    fn apply(&mut self, p: usize, q: usize) -> (f64, f64) {
        let (result, flops) = self.preview(p, q);
        let result_bytes = self.problem.size(&result) * BYTES_PER_ENTRY;
        let during = self.live_bytes + result_bytes;
        let (hi, lo) = (p.max(q), p.min(q));
        let (_, b) = self.live.remove(hi);
        let (_, a) = self.live.remove(lo);
        for &l in a.iter().chain(&b) {
            self.counts[l] -= 1;
        }
        for &l in &result {
            self.counts[l] += 1;
        }
        self.live_bytes += result_bytes
            - (self.problem.size(&a) + self.problem.size(&b)) * BYTES_PER_ENTRY;
        self.live.push((self.next_id, result));
        self.next_id += 1;
        (flops, during)
    }

    fn position(&self, id: usize) -> usize {
        self.live.iter().position(|(x, _)| *x == id).expect("live id")
    }
}

pub(crate) fn check_steps(n: usize, steps: &[(usize, usize)]) -> Result<()> {
    let mut live = n;
    for (k, &(i, j)) in steps.iter().enumerate() {
        if i == j || i >= live || j >= live {
            return Err(Error::PathInvalid(format!(
                "step {k} ({i}, {j}) invalid with {live} live tensors"
            )));
        }
        live -= 1;
    }
    if live != 1 {
        return Err(Error::PathInvalid(format!(
            "path leaves {live} tensors uncontracted"
        )));
    }
    Ok(())
}

/// Estimated (flops, peak bytes) of an arbitrary path over `shape`.
pub fn path_cost(shape: &NetworkShape, steps: &[(usize, usize)]) -> Result<(f64, f64)> {
    let problem = Problem::new(shape)?;
    check_steps(problem.sets.len(), steps)?;
    let members: Vec<usize> = (0..problem.sets.len()).collect();
    let mut state = State::new(&problem, &members, members.len());
    let mut flops = 0.0;
    let mut peak = state.live_bytes;
    for &(i, j) in steps {
        let (f, m) = state.apply(i, j);
        flops += f;
        peak = peak.max(m);
    }
    Ok((flops, peak))
}

/// Finds a pairwise contraction order for `shape`.
///
/// Disconnected networks are handled per component; component results are
/// then combined by outer products in input order.
pub fn optimize_path(
    shape: &NetworkShape,
    strategy: Strategy,
    objective: Objective,
) -> Result<ContractionPath> {
    let problem = Problem::new(shape)?;
    let n = problem.sets.len();
    match strategy {
        Strategy::Optimal if n > OPTIMAL_LIMIT => {
            return Err(Error::TooLarge {
                strategy: "optimal",
                tensors: n,
                limit: OPTIMAL_LIMIT,
            })
        }
        Strategy::Exhaustive if n > EXHAUSTIVE_LIMIT => {
            return Err(Error::TooLarge {
                strategy: "exhaustive",
                tensors: n,
                limit: EXHAUSTIVE_LIMIT,
            })
        }
        _ => {}
    }

    // Steps in SSA ids: inputs are 0..n, each step mints the next id.
    let mut ssa: Vec<(usize, usize)> = Vec::with_capacity(n.saturating_sub(1));
    let mut next_id = n;
    let mut roots = Vec::new();
    for members in problem.components() {
        let local = match strategy {
            Strategy::Greedy => greedy(&problem, &members),
            Strategy::Optimal => subset_dp(&problem, &members, objective)?,
            Strategy::Exhaustive => exhaustive(&problem, &members, objective),
        };
        // local ids: 0..k are members, k.. are this component's intermediates
        let k = members.len();
        let mut map: Vec<usize> = members.clone();
        for (a, b) in local {
            ssa.push((map[a], map[b]));
            map.push(next_id);
            next_id += 1;
        }
        roots.push(*map.last().expect("component has a tensor"));
        debug_assert_eq!(map.len(), 2 * k - 1);
    }
    let mut acc = roots[0];
    for &r in &roots[1..] {
        ssa.push((acc, r));
        acc = next_id;
        next_id += 1;
    }

    // Replay to translate ids into positions and price the path.
    let all: Vec<usize> = (0..n).collect();
    let mut state = State::new(&problem, &all, n);
    let mut steps = Vec::with_capacity(ssa.len());
    let mut flops = 0.0;
    let mut peak = state.live_bytes;
    for (a, b) in ssa {
        let (p, q) = (state.position(a), state.position(b));
        let (p, q) = (p.min(q), p.max(q));
        let (f, m) = state.apply(p, q);
        flops += f;
        peak = peak.max(m);
        steps.push((p, q));
    }
    Ok(ContractionPath {
        steps,
        est_flops: flops,
        est_peak_memory: peak,
    })
}

/// Repeatedly contracts the label-sharing pair minimizing
/// `size(result) - size(a) - size(b)`; ties go to the smaller result, then to
/// the lexicographically smallest id pair.
fn greedy(problem: &Problem, members: &[usize]) -> Vec<(usize, usize)> {
    let k = members.len();
    let mut state = local_state(problem, members);
    let mut steps = Vec::new();
    while state.live.len() > 1 {
        let mut best: Option<((f64, f64, usize, usize), usize, usize)> = None;
        for p in 0..state.live.len() {
            for q in p + 1..state.live.len() {
                if !shares(&state.live[p].1, &state.live[q].1) {
                    continue;
                }
                let (result, _) = state.preview(p, q);
                let rs = problem.size(&result);
                let delta = rs - problem.size(&state.live[p].1) - problem.size(&state.live[q].1);
                let (ia, ib) = (state.live[p].0, state.live[q].0);
                let key = (delta, rs, ia.min(ib), ia.max(ib));
                if best.as_ref().is_none_or(|(bk, _, _)| key_less(&key, bk)) {
                    best = Some((key, p, q));
                }
            }
        }
        // A connected component always has a sharing pair; fall back to the
        // first two in case a component was passed in that is not connected.
        let (p, q) = best.map(|(_, p, q)| (p, q)).unwrap_or((0, 1));
        let (a, b) = (state.live[p].0, state.live[q].0);
        state.apply(p, q);
        steps.push((a, b));
    }
    debug_assert_eq!(steps.len(), k - 1);
    steps
}

fn key_less(a: &(f64, f64, usize, usize), b: &(f64, f64, usize, usize)) -> bool {
    a.0.total_cmp(&b.0)
        .then(a.1.total_cmp(&b.1))
        .then(a.2.cmp(&b.2))
        .then(a.3.cmp(&b.3))
        .is_lt()
}

/// State over one component using local ids `0..k`.
fn local_state<'p>(problem: &'p Problem, members: &[usize]) -> State<'p> {
    let mut state = State::new(problem, members, members.len());
    for (i, entry) in state.live.iter_mut().enumerate() {
        entry.0 = i;
    }
    state
}

/// Depth-first enumeration of every pairwise contraction sequence, with
/// branch-and-bound on the objective. Returns the first sequence attaining the
/// minimum in enumeration order.
fn exhaustive(problem: &Problem, members: &[usize], objective: Objective) -> Vec<(usize, usize)> {
    struct Search {
        objective: Objective,
        best_cost: f64,
        best: Vec<(usize, usize)>,
        trail: Vec<(usize, usize)>,
    }
    fn dfs(state: &State<'_>, cost: f64, s: &mut Search) {
        if state.live.len() == 1 {
            if cost < s.best_cost {
                s.best_cost = cost;
                s.best = s.trail.clone();
            }
            return;
        }
        for p in 0..state.live.len() {
            for q in p + 1..state.live.len() {
                let mut next = state.clone();
                let ids = (state.live[p].0, state.live[q].0);
                let (f, m) = next.apply(p, q);
                let c = match s.objective {
                    Objective::Flops => cost + f,
                    Objective::Memory => cost.max(m),
                };
                if c >= s.best_cost {
                    continue;
                }
                s.trail.push(ids);
                dfs(&next, c, s);
                s.trail.pop();
            }
        }
    }
    let state = local_state(problem, members);
    let start = match objective {
        Objective::Flops => 0.0,
        Objective::Memory => state.live_bytes,
    };
    let mut search = Search {
        objective,
        best_cost: f64::INFINITY,
        best: Vec::new(),
        trail: Vec::new(),
    };
    dfs(&state, start, &mut search);
    search.best
}

/// Dynamic programming over tensor subsets.
///
/// For flops the cost of a subset is the cheapest tree over it. For memory
/// each subset records the lowest peak (relative to everything outside it)
/// reachable by finishing one child subtree before starting the other.
fn subset_dp(
    problem: &Problem,
    members: &[usize],
    objective: Objective,
) -> Result<Vec<(usize, usize)>> {
    let k = members.len();
    if k == 1 {
        return Ok(Vec::new());
    }
    // Compact the component's labels into a u128 mask.
    let mut label_ids: BTreeMap<usize, u32> = BTreeMap::new();
    for &t in members {
        for &l in &problem.sets[t] {
            let next = label_ids.len() as u32;
            label_ids.entry(l).or_insert(next);
        }
    }
    if label_ids.len() > 128 {
        return Err(Error::TooLarge {
            strategy: "optimal (labels per component)",
            tensors: label_ids.len(),
            limit: 128,
        });
    }
    let mut extent = vec![0.0; label_ids.len()];
    for (&l, &b) in &label_ids {
        extent[b as usize] = problem.extents[l];
    }
    let mut out_mask = 0u128;
    for (&l, &b) in &label_ids {
        if problem.output[l] {
            out_mask |= 1 << b;
        }
    }
    let tmask: Vec<u128> = members
        .iter()
        .map(|&t| {
            problem.sets[t]
                .iter()
                .fold(0u128, |m, l| m | (1u128 << label_ids[l]))
        })
        .collect();
    let size_of = |mask: u128| -> f64 {
        let mut m = mask;
        let mut s = 1.0;
        while m != 0 {
            let b = m.trailing_zeros() as usize;
            s *= extent[b];
            m &= m - 1;
        }
        s
    };

    let full: u32 = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
    let nsub = 1usize << k;
    let mut labels = vec![0u128; nsub];
    for s in 1..nsub {
        let low = s.trailing_zeros() as usize;
        labels[s] = labels[s & (s - 1)] | tmask[low];
    }
    // result labels of subset s
    let result = |s: usize| -> u128 {
        let rest = labels[(full as usize) & !s];
        labels[s] & (out_mask | rest)
    };
    let connected = |s: usize| -> bool {
        let start = s & s.wrapping_neg();
        let mut seen = start;
        let mut frontier = labels[start];
        loop {
            let mut grew = false;
            let mut m = s & !seen;
            while m != 0 {
                let b = m & m.wrapping_neg();
                if tmask[b.trailing_zeros() as usize] & frontier != 0 {
                    seen |= b;
                    frontier |= labels[b];
                    grew = true;
                }
                m &= m - 1;
            }
            if !grew {
                return seen == s;
            }
        }
    };

    let all_splits = k <= DP_ALL_SPLITS_LIMIT;
    let mut cost = vec![f64::INFINITY; nsub];
    let mut split = vec![0u32; nsub];
    let mut res_size = vec![0.0f64; nsub];
    let mut leaf_sum = vec![0.0f64; nsub];
    for t in 0..k {
        let s = 1usize << t;
        res_size[s] = size_of(result(s)) * BYTES_PER_ENTRY;
        leaf_sum[s] = size_of(tmask[t]) * BYTES_PER_ENTRY;
        cost[s] = match objective {
            Objective::Flops => 0.0,
            Objective::Memory => leaf_sum[s],
        };
    }

    // Subsets in increasing popcount are not needed: every proper submask of
    // s is numerically smaller than s.
    for s in 1..nsub {
        if s & (s - 1) == 0 {
            continue;
        }
        let low = s & s.wrapping_neg();
        leaf_sum[s] = leaf_sum[s & !low] + leaf_sum[low];
        res_size[s] = size_of(result(s)) * BYTES_PER_ENTRY;
        if !all_splits && !connected(s) {
            continue;
        }
        let rs = res_size[s];
        // Enumerate submasks containing the lowest bit so each split is seen once.
        let rest = s & !low;
        let mut sub = rest;
        loop {
            let left = sub | low;
            if left != s {
                let right = s & !left;
                if all_splits || (labels[left] & labels[right] != 0 && connected(left) && connected(right)) {
                    let (cl, cr) = (cost[left], cost[right]);
                    if cl.is_finite() && cr.is_finite() {
                        match objective {
                            Objective::Flops => {
                                let c = cl + cr + size_of(result(left) | result(right));
                                if c < cost[s] {
                                    cost[s] = c;
                                    split[s] = left as u32;
                                }
                            }
                            Objective::Memory => {
                                let (ol, or) = (res_size[left], res_size[right]);
                                let tail = ol + or + rs;
                                let left_first = (cl + leaf_sum[right]).max(ol + cr).max(tail);
                                let right_first = (cr + leaf_sum[left]).max(or + cl).max(tail);
                                if left_first < cost[s] {
                                    cost[s] = left_first;
                                    split[s] = left as u32;
                                }
                                if right_first < cost[s] {
                                    cost[s] = right_first;
                                    // high bit marks "right subtree first"
                                    split[s] = (right as u32) | (1 << 31);
                                }
                            }
                        }
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }

    if !cost[full as usize].is_finite() {
        // Only reachable when connectivity pruning rejected every split.
        return Ok(greedy(problem, members));
    }

    // Emit the tree bottom-up; local ids 0..k are leaves.
    fn emit(s: usize, split: &[u32], next: &mut usize, out: &mut Vec<(usize, usize)>) -> usize {
        if s & (s - 1) == 0 {
            return s.trailing_zeros() as usize;
        }
        let first = (split[s] & !(1 << 31)) as usize;
        let second = s & !first;
        let a = emit(first, split, next, out);
        let b = emit(second, split, next, out);
        out.push((a, b));
        *next += 1;
        *next - 1
    }
    let mut out = Vec::with_capacity(k - 1);
    let mut next = k;
    emit(full as usize, &split, &mut next, &mut out);
    Ok(out)
}
