//! Undirected simple graphs, edge-list I/O, and the graph statistics used
//! throughout: triangle and wedge counts, clustering coefficients, degree and
//! distance CCDFs, and empirical overlap between generated graphs.

use std::collections::VecDeque;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Undirected simple graph on nodes `0..n`. Edges are stored sorted as
/// `(u, v)` with `u < v`, without duplicates or self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

/// Lines dropped while reading an edge list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DropReport {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    /// Builds a graph from an arbitrary edge list; orients, sorts, and
    /// deduplicates pairs, and rejects self-loops or out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut es: Vec<(u32, u32)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for n = {n}"
                )));
            }
            es.push((a.min(b), a.max(b)));
        }
        es.sort_unstable();
        es.dedup();
        Ok(Self { n, edges: es })
    }

    /// Internal constructor for sampler output: edges already oriented
    /// `u < v` and in range, but possibly unsorted or duplicated.
    pub(crate) fn from_oriented_edges(n: usize, mut edges: Vec<(u32, u32)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Self { n, edges }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).is_ok()
    }

    /// Sorted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(u, v) in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut w = BufWriter::new(file);
        let mut write = || -> std::io::Result<()> {
            writeln!(w, "# nodes={}", self.n)?;
            for &(u, v) in &self.edges {
                writeln!(w, "{u} {v}")?;
            }
            w.flush()
        };
        write().map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }
}

/// Reads a whitespace-delimited `u v` edge list. Self-loops and duplicate
/// edges are dropped and counted. `n` is `1 + max id` unless a `# nodes=N`
/// header overrides it.
pub fn read_edge_list(path: &Path) -> Result<(Graph, DropReport)> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let reader = std::io::BufReader::new(file);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut report = DropReport::default();
    let mut n_override: Option<usize> = None;
    let mut max_id: i64 = -1;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(val) = rest.trim().strip_prefix("nodes=") {
                n_override = val.trim().parse::<usize>().ok();
            }
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let next_id = |tok: Option<&str>| -> Result<u32> {
            let tok = tok.unwrap_or("");
            tok.parse::<u32>().map_err(|_| Error::Parse {
                path: path.to_owned(),
                line: lineno + 1,
                token: tok.to_owned(),
            })
        };
        let u = next_id(tokens.next())?;
        let v = next_id(tokens.next())?;
        max_id = max_id.max(u as i64).max(v as i64);
        if u == v {
            report.self_loops += 1;
            continue;
        }
        edges.push((u.min(v), u.max(v)));
    }
    let n = n_override.unwrap_or((max_id + 1) as usize);
    let before = edges.len();
    edges.sort_unstable();
    edges.dedup();
    report.duplicates = before - edges.len();
    for &(u, v) in &edges {
        if u as usize >= n || v as usize >= n {
            return Err(Error::InvalidGraph(format!(
                "edge ({u}, {v}) out of range for declared n = {n}"
            )));
        }
    }
    Ok((Graph { n, edges }, report))
}

/// Graph statistics: exact triangle/wedge counts, GCC = 3*triangles/wedges,
/// ALCC averaged over nodes of degree >= 2, and CCDFs for degrees and
/// largest-component distances.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub triangle_count: u64,
    pub wedge_count: u64,
    pub gcc: f64,
    pub alcc: f64,
    /// `(k, number of nodes with degree >= k)`
    pub degree_ccdf: Vec<(usize, u64)>,
    /// `(d, number of node pairs in the largest component at distance >= d)`
    pub distance_ccdf: Vec<(usize, f64)>,
}

pub fn compute_stats(g: &Graph, distance_sample: Option<usize>) -> GraphStats {
    let adj = g.adjacency();
    let deg = g.degrees();
    let n = g.node_count();

    // Triangles by sorted-adjacency intersection; each triangle is seen once
    // per edge, and the common vertex of that edge is credited once.
    let mut tri_per_node = vec![0u64; n];
    let mut tri3: u64 = 0;
    for &(u, v) in g.edges() {
        let (a, b) = (&adj[u as usize], &adj[v as usize]);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    tri_per_node[a[i] as usize] += 1;
                    tri3 += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    let triangle_count = tri3 / 3;

    let wedge_count: u64 = deg
        .iter()
        .map(|&d| {
            let d = d as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum::<u64>();
    let gcc = if wedge_count == 0 {
        0.0
    } else {
        3.0 * triangle_count as f64 / wedge_count as f64
    };

    let mut alcc_sum = 0.0;
    let mut alcc_n = 0usize;
    for v in 0..n {
        if deg[v] >= 2 {
            let wedges_v = (deg[v] * (deg[v] - 1) / 2) as f64;
            alcc_sum += tri_per_node[v] as f64 / wedges_v;
            alcc_n += 1;
        }
    }
    let alcc = if alcc_n == 0 { 0.0 } else { alcc_sum / alcc_n as f64 };

    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let mut deg_hist = vec![0u64; max_deg + 1];
    for &d in &deg {
        deg_hist[d] += 1;
    }
    let mut degree_ccdf = Vec::with_capacity(max_deg + 1);
    let mut acc = 0u64;
    let mut tail = vec![0u64; max_deg + 1];
    for k in (0..=max_deg).rev() {
        acc += deg_hist[k];
        tail[k] = acc;
    }
    for (k, &c) in tail.iter().enumerate() {
        degree_ccdf.push((k, c));
    }

    let distance_ccdf = distance_ccdf_largest_component(g, &adj, distance_sample);

    GraphStats {
        triangle_count,
        wedge_count,
        gcc,
        alcc,
        degree_ccdf,
        distance_ccdf,
    }
}

fn distance_ccdf_largest_component(
    g: &Graph,
    adj: &[Vec<u32>],
    sample: Option<usize>,
) -> Vec<(usize, f64)> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    // Largest connected component.
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0usize;
        let mut queue = VecDeque::from([start]);
        comp[start] = id;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &w in &adj[v] {
                if comp[w as usize] == usize::MAX {
                    comp[w as usize] = id;
                    queue.push_back(w as usize);
                }
            }
        }
        sizes.push(size);
    }
    let largest = sizes
        .iter()
        .enumerate()
        .max_by_key(|&(_, s)| s)
        .map(|(i, _)| i)
        .unwrap();
    let members: Vec<usize> = (0..n).filter(|&v| comp[v] == largest).collect();
    if members.len() < 2 {
        return Vec::new();
    }

    // BFS from all sources, or from an evenly spaced deterministic sample.
    let sources: Vec<usize> = match sample {
        Some(budget) if budget < members.len() && budget > 0 => {
            let step = members.len() as f64 / budget as f64;
            (0..budget)
                .map(|i| members[(i as f64 * step) as usize])
                .collect()
        }
        _ => members.clone(),
    };

    let mut hist: Vec<f64> = Vec::new();
    let mut dist = vec![u32::MAX; n];
    let mut touched: Vec<usize> = Vec::new();
    for &src in &sources {
        let mut queue = VecDeque::from([src]);
        dist[src] = 0;
        touched.push(src);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v];
            for &w in &adj[v] {
                let w = w as usize;
                if dist[w] == u32::MAX {
                    dist[w] = dv + 1;
                    touched.push(w);
                    queue.push_back(w);
                }
            }
        }
        for &v in &touched {
            let d = dist[v] as usize;
            if d > 0 {
                if hist.len() <= d {
                    hist.resize(d + 1, 0.0);
                }
                hist[d] += 1.0;
            }
            dist[v] = u32::MAX;
        }
        touched.clear();
    }
    // Each unordered pair is visited from both endpoints when all sources are
    // used; with a sampled budget, scale ordered counts to the full component.
    let scale = members.len() as f64 / sources.len() as f64 / 2.0;
    let mut ccdf = Vec::with_capacity(hist.len());
    let mut acc = 0.0;
    for d in (1..hist.len()).rev() {
        acc += hist[d] * scale;
        ccdf.push((d, acc));
    }
    ccdf.reverse();
    ccdf
}

/// Sample analogue of the overlap Ov: mean pairwise shared-edge count over
/// all unordered graph pairs, divided by the mean edge count.
pub fn empirical_overlap(graphs: &[Graph]) -> Result<f64> {
    if graphs.len() < 2 {
        return Err(Error::InvalidGraph(
            "overlap needs at least two graphs".into(),
        ));
    }
    let mean_edges =
        graphs.iter().map(|g| g.edge_count() as f64).sum::<f64>() / graphs.len() as f64;
    if mean_edges == 0.0 {
        return Err(Error::UndefinedOverlap);
    }
    let mut inter_sum = 0.0;
    let mut pairs = 0u64;
    for i in 0..graphs.len() {
        for j in (i + 1)..graphs.len() {
            inter_sum += sorted_intersection_len(graphs[i].edges(), graphs[j].edges()) as f64;
            pairs += 1;
        }
    }
    Ok(inter_sum / pairs as f64 / mean_edges)
}

fn sorted_intersection_len(a: &[(u32, u32)], b: &[(u32, u32)]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}
