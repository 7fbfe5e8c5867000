//! Undirected networks, their combinatorics, and dominating-set enumeration.
//!
//! Vertices are 0-based everywhere in the library. The JSON document format
//! and every other I/O surface use 1-based indices; conversion happens in
//! [`parse_network`], [`Network::to_json`] and the `one_based` helpers.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, GraphError, Result};

pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_DELTA: f64 = 1.0;

/// Enumeration refuses to materialize more candidate subsets than this.
pub const MAX_ENUMERATION: u128 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Undirected connected graph with per-vertex self-loop gains and alarm thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    edges: Vec<Edge>,
    theta: Vec<f64>,
    delta: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
}

impl Network {
    /// Unit-weight network from 0-based edges.
    pub fn new(n: usize, edges: &[(usize, usize)], theta: Vec<f64>, delta: Vec<f64>) -> Result<Self> {
        let edges = edges.iter().map(|&(u, v)| Edge { u, v, weight: 1.0 }).collect();
        Self::with_edges(n, edges, theta, delta)
    }

    /// Network with explicit (positive) edge weights.
    pub fn with_edges(n: usize, edges: Vec<Edge>, theta: Vec<f64>, delta: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(GraphError::InvalidParameter("n must be positive".into()).into());
        }
        check_positive("theta", &theta, n)?;
        check_positive("delta", &delta, n)?;

        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            for idx in [e.u, e.v] {
                if idx >= n {
                    return Err(GraphError::OutOfRange { index: idx as i64 + 1, n }.into());
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfEdge(e.u + 1).into());
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(GraphError::InvalidParameter(format!(
                    "edge ({}, {}) has non-positive weight",
                    e.u + 1,
                    e.v + 1
                ))
                .into());
            }
            let (u, v) = if e.u < e.v { (e.u, e.v) } else { (e.v, e.u) };
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge(u + 1, v + 1).into());
            }
            normalized.push(Edge { u, v, weight: e.weight });
        }
        normalized.sort_by_key(|e| (e.u, e.v));

        let mut neighbors = vec![Vec::new(); n];
        for e in &normalized {
            neighbors[e.u].push(e.v);
            neighbors[e.v].push(e.u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        let net = Network { n, edges: normalized, theta, delta, neighbors };
        if !net.is_connected() {
            return Err(GraphError::Disconnected.into());
        }
        Ok(net)
    }

    /// Path graph 1 - 2 - ... - n with default gains and thresholds.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges, vec![DEFAULT_THETA; n], vec![DEFAULT_DELTA; n])
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        Self::new(n, &edges, vec![DEFAULT_THETA; n], vec![DEFAULT_DELTA; n])
    }

    /// Star with vertex 0 as the center.
    pub fn star(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Self::new(n, &edges, vec![DEFAULT_THETA; n], vec![DEFAULT_DELTA; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        Self::with_edges(self.n, self.edges.clone(), theta, self.delta.clone())
    }

    pub fn with_delta(&self, delta: Vec<f64>) -> Result<Self> {
        Self::with_edges(self.n, self.edges.clone(), self.theta.clone(), delta)
    }

    /// Weighted adjacency matrix `A`.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.u, e.v)] = e.weight;
            a[(e.v, e.u)] = e.weight;
        }
        a
    }

    pub fn is_connected(&self) -> bool {
        distances_from(self, 0).iter().all(|d| d.is_some())
    }

    /// Serializes with 1-based indices in the same schema [`parse_network`] reads.
    pub fn to_json(&self) -> String {
        let doc = NetworkDoc {
            n: self.n,
            edges: self.edges.iter().map(|e| [e.u as i64 + 1, e.v as i64 + 1]).collect(),
            theta: Some(self.theta.iter().map(|&x| crate::report::sig9(x)).collect()),
            delta: Some(self.delta.iter().map(|&x| crate::report::sig9(x)).collect()),
        };
        serde_json::to_string(&doc).expect("network serializes") + "\n"
    }
}

fn check_positive(name: &str, values: &[f64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(GraphError::InvalidParameter(format!("{name} has length {}, expected {n}", values.len())).into());
    }
    if let Some(i) = values.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(GraphError::InvalidParameter(format!("{name}[{}] must be positive", i + 1)).into());
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    n: usize,
    edges: Vec<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<Vec<f64>>,
}

/// Parses the network JSON document (1-based vertex indices).
///
/// `theta` and `delta` are optional and default to 0.5 and 1.0 per vertex.
pub fn parse_network(document: &str) -> Result<Network> {
    let doc: NetworkDoc = serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    let n = doc.n;
    if n == 0 {
        return Err(Error::Schema("n must be positive".into()));
    }
    let mut edges = Vec::with_capacity(doc.edges.len());
    for [u, v] in doc.edges {
        for idx in [u, v] {
            if idx < 1 || idx > n as i64 {
                return Err(GraphError::OutOfRange { index: idx, n }.into());
            }
        }
        edges.push(Edge { u: (u - 1) as usize, v: (v - 1) as usize, weight: 1.0 });
    }
    let theta = doc.theta.unwrap_or_else(|| vec![DEFAULT_THETA; n]);
    let delta = doc.delta.unwrap_or_else(|| vec![DEFAULT_DELTA; n]);
    Network::with_edges(n, edges, theta, delta)
}

#[derive(Debug, Clone)]
pub struct GenerationConfig {
    pub max_attempts: usize,
    pub theta: f64,
    pub delta: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig { max_attempts: 1000, theta: DEFAULT_THETA, delta: DEFAULT_DELTA }
    }
}

/// Seeded Erdős–Rényi G(n, q) sample, resampled until connected.
pub fn generate_erdos_renyi(n: usize, q: f64, seed: u64) -> Result<Network> {
    generate_erdos_renyi_with(n, q, seed, &GenerationConfig::default())
}

pub fn generate_erdos_renyi_with(n: usize, q: f64, seed: u64, cfg: &GenerationConfig) -> Result<Network> {
    if n < 2 {
        return Err(GraphError::InvalidParameter("Erdős–Rényi generation needs n >= 2".into()).into());
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(GraphError::InvalidParameter(format!("edge probability {q} outside (0, 1]")).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.max_attempts {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(q) {
                    edges.push((i, j));
                }
            }
        }
        match Network::new(n, &edges, vec![cfg.theta; n], vec![cfg.delta; n]) {
            Ok(net) => return Ok(net),
            Err(Error::Graph(GraphError::Disconnected)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Generation { n, q, attempts: cfg.max_attempts })
}

/// Graph Laplacian `L = Δ − A`.
pub fn laplacian(net: &Network) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(net.n, net.n);
    for e in &net.edges {
        l[(e.u, e.v)] -= e.weight;
        l[(e.v, e.u)] -= e.weight;
        l[(e.u, e.u)] += e.weight;
        l[(e.v, e.v)] += e.weight;
    }
    l
}

/// BFS hop counts from `source`; `None` for unreachable vertices.
pub fn distances_from(net: &Network, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; net.n];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &w in &net.neighbors[u] {
            if dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Shortest-path edge count between `u` and `v`.
pub fn distance(net: &Network, u: usize, v: usize) -> usize {
    distances_from(net, u)[v].expect("network is connected")
}

/// Strictly increasing, nonempty vertex subset within a sensor budget.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonitorSet {
    vertices: Vec<usize>,
    budget: usize,
}

impl MonitorSet {
    pub fn new(mut vertices: Vec<usize>, budget: usize, n: usize) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidScenario("monitor set is empty".into()));
        }
        vertices.sort_unstable();
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidScenario(format!("vertex {} repeated in monitor set", w[0] + 1)));
        }
        if let Some(&v) = vertices.iter().find(|&&v| v >= n) {
            return Err(GraphError::OutOfRange { index: v as i64 + 1, n }.into());
        }
        if vertices.len() > budget {
            return Err(Error::InvalidScenario(format!(
                "monitor set has {} vertices, budget is {budget}",
                vertices.len()
            )));
        }
        Ok(MonitorSet { vertices, budget })
    }

    /// Monitor set with budget equal to its size.
    pub fn exact(vertices: Vec<usize>, n: usize) -> Result<Self> {
        let budget = vertices.len();
        Self::new(vertices, budget, n)
    }

    pub fn from_one_based(vertices: &[usize], budget: usize, n: usize) -> Result<Self> {
        let mut zero = Vec::with_capacity(vertices.len());
        for &v in vertices {
            if v == 0 || v > n {
                return Err(GraphError::OutOfRange { index: v as i64, n }.into());
            }
            zero.push(v - 1);
        }
        Self::new(zero, budget, n)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.vertices.iter().map(|v| v + 1).collect()
    }

    /// `self ∪ {v}`, growing the budget if needed.
    pub fn with_vertex(&self, v: usize) -> MonitorSet {
        let mut vertices = self.vertices.clone();
        if let Err(pos) = vertices.binary_search(&v) {
            vertices.insert(pos, v);
        }
        let budget = self.budget.max(vertices.len());
        MonitorSet { vertices, budget }
    }
}

/// All dominating monitor sets within a budget, sorted lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct DominatingCollection {
    sets: Vec<MonitorSet>,
    budget: usize,
}

impl DominatingCollection {
    pub fn sets(&self) -> &[MonitorSet] {
        &self.sets
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// JSON array of arrays of 1-based indices.
    pub fn to_json(&self) -> String {
        let sets: Vec<Vec<usize>> = self.sets.iter().map(MonitorSet::one_based).collect();
        serde_json::to_string(&sets).expect("collection serializes") + "\n"
    }
}

/// Tests `e_iᵀ (A + I) Σ e_m > 0` row by row, stopping at the first zero entry.
pub fn is_dominating(net: &Network, m: &MonitorSet) -> bool {
    let mut member = vec![false; net.n];
    for &v in m.vertices() {
        member[v] = true;
    }
    dominated_by(net, &member)
}

fn dominated_by(net: &Network, member: &[bool]) -> bool {
    let weights = adjacency_weights(net);
    (0..net.n).all(|i| {
        let mut c = if member[i] { 1.0 } else { 0.0 };
        for (j, w) in &weights[i] {
            if member[*j] {
                c += w;
            }
        }
        c > 0.0
    })
}

fn adjacency_weights(net: &Network) -> Vec<Vec<(usize, f64)>> {
    let mut rows = vec![Vec::new(); net.n];
    for e in &net.edges {
        rows[e.u].push((e.v, e.weight));
        rows[e.v].push((e.u, e.weight));
    }
    rows
}

/// Number of nonempty subsets with at most `n_s` elements.
pub fn subset_count(n: usize, n_s: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128; // C(n, 0)
    for k in 1..=n_s.min(n) {
        binom = binom * (n - k + 1) as u128 / k as u128;
        total += binom;
    }
    total
}

/// Candidate subsets by size, each size in lexicographic order.
fn candidate_subsets(n: usize, n_s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in 1..=n_s.min(n) {
        let mut comb: Vec<usize> = (0..k).collect();
        loop {
            out.push(comb.clone());
            // advance to the next k-combination
            let mut i = k;
            while i > 0 && comb[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            comb[i - 1] += 1;
            for j in i..k {
                comb[j] = comb[j - 1] + 1;
            }
        }
    }
    out
}

pub fn enumerate_dominating_sets(net: &Network, n_s: usize) -> Result<DominatingCollection> {
    enumerate_dominating_sets_with(net, n_s, 1)
}

/// Enumeration split into `workers` contiguous partitions of the fixed candidate order.
pub fn enumerate_dominating_sets_with(net: &Network, n_s: usize, workers: usize) -> Result<DominatingCollection> {
    if n_s == 0 {
        return Err(Error::InvalidScenario("sensor budget must be at least 1".into()));
    }
    let total = subset_count(net.n, n_s);
    if total > MAX_ENUMERATION {
        return Err(Error::InvalidScenario(format!("{total} candidate subsets exceed the enumeration limit")));
    }
    let candidates = candidate_subsets(net.n, n_s);
    let workers = workers.max(1);
    let chunk = candidates.len().div_ceil(workers).max(1);
    let weights = adjacency_weights(net);

    let check = |subset: &Vec<usize>| {
        let mut member = vec![false; net.n];
        for &v in subset {
            member[v] = true;
        }
        (0..net.n).all(|i| member[i] || weights[i].iter().any(|(j, w)| member[*j] && *w > 0.0))
    };

    let mut found: Vec<Vec<usize>> = candidates
        .par_chunks(chunk)
        .map(|part| part.iter().filter(|s| check(s)).cloned().collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .concat();
    found.sort();

    if found.is_empty() {
        return Err(Error::EmptyCollection { budget: n_s });
    }
    let sets = found.into_iter().map(|vertices| MonitorSet { vertices, budget: n_s }).collect();
    Ok(DominatingCollection { sets, budget: n_s })
}
