//! The four edge-probability models (ER, CL, SB, KR): fitting from an input
//! graph, marginal edge probability queries, node-equivalence classes, and
//! the JSON parameter format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Node-equivalence classes: nodes in the same class share the node-sampling
/// probability `g`, and for ER/CL/SB the edge probability to any other node
/// depends only on the two classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassStructure {
    pub class_of: Vec<usize>,
    pub class_size: Vec<usize>,
}

impl ClassStructure {
    pub fn num_classes(&self) -> usize {
        self.class_size.len()
    }

    pub fn members(&self) -> Vec<Vec<u32>> {
        let mut members = vec![Vec::new(); self.num_classes()];
        for (v, &c) in self.class_of.iter().enumerate() {
            members[c].push(v as u32);
        }
        members
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeProbModel {
    Er {
        n: usize,
        p0: f64,
    },
    Cl {
        degrees: Vec<f64>,
        /// Distinct degree value per class, ascending.
        class_degree: Vec<f64>,
        classes: ClassStructure,
    },
    Sb {
        block_of: Vec<usize>,
        block_sizes: Vec<usize>,
        p_block: Vec<Vec<f64>>,
    },
    Kr {
        theta: [[f64; 2]; 2],
        k: u32,
    },
}

impl EdgeProbModel {
    pub fn node_count(&self) -> usize {
        match self {
            Self::Er { n, .. } => *n,
            Self::Cl { degrees, .. } => degrees.len(),
            Self::Sb { block_of, .. } => block_of.len(),
            Self::Kr { k, .. } => 1usize << k,
        }
    }

    /// Marginal edge probability `p(u, v)`, `u != v`.
    pub fn prob(&self, u: u32, v: u32) -> f64 {
        debug_assert_ne!(u, v);
        match self {
            Self::Er { p0, .. } => *p0,
            Self::Cl { degrees, .. } => {
                let sum: f64 = degrees.iter().sum();
                ((degrees[u as usize] * degrees[v as usize]) / sum).min(1.0)
            }
            Self::Sb {
                block_of, p_block, ..
            } => p_block[block_of[u as usize]][block_of[v as usize]],
            Self::Kr { theta, k } => {
                let mut p = 1.0;
                for b in 0..*k {
                    let ub = ((u >> b) & 1) as usize;
                    let vb = ((v >> b) & 1) as usize;
                    p *= theta[ub][vb];
                }
                p
            }
        }
    }

    pub fn class_structure(&self) -> ClassStructure {
        match self {
            Self::Er { n, .. } => ClassStructure {
                class_of: vec![0; *n],
                class_size: vec![*n],
            },
            Self::Cl { classes, .. } => classes.clone(),
            Self::Sb {
                block_of,
                block_sizes,
                ..
            } => ClassStructure {
                class_of: block_of.clone(),
                class_size: block_sizes.clone(),
            },
            Self::Kr { k, .. } => {
                let n = 1usize << k;
                let class_of: Vec<usize> = (0..n).map(|v| v.count_ones() as usize).collect();
                let mut class_size = vec![0usize; *k as usize + 1];
                for &c in &class_of {
                    class_size[c] += 1;
                }
                ClassStructure { class_of, class_size }
            }
        }
    }

    /// `p(u, v)` for any representatives `u` in class `a`, `v` in class `b`
    /// (`u != v`). Not well-defined for KR, whose equivalence is weaker.
    pub fn class_pair_prob(&self, a: usize, b: usize) -> Result<f64> {
        let check = |c: usize, num: usize| {
            if c >= num {
                Err(Error::InvalidModel(format!("class id {c} out of range")))
            } else {
                Ok(())
            }
        };
        match self {
            Self::Er { p0, .. } => Ok(*p0),
            Self::Cl {
                degrees,
                class_degree,
                ..
            } => {
                check(a, class_degree.len())?;
                check(b, class_degree.len())?;
                let sum: f64 = degrees.iter().sum();
                Ok(((class_degree[a] * class_degree[b]) / sum).min(1.0))
            }
            Self::Sb { p_block, .. } => {
                check(a, p_block.len())?;
                check(b, p_block.len())?;
                Ok(p_block[a][b])
            }
            Self::Kr { .. } => Err(Error::UnsupportedClassQuery),
        }
    }

    /// Class members plus the class-pair probability matrix, for the models
    /// whose edge probabilities are class-determined (ER/CL/SB).
    pub fn class_view(&self) -> Option<ClassView> {
        if matches!(self, Self::Kr { .. }) {
            return None;
        }
        let structure = self.class_structure();
        let c = structure.num_classes();
        let mut p = vec![vec![0.0; c]; c];
        for (a, row) in p.iter_mut().enumerate() {
            for (b, entry) in row.iter_mut().enumerate() {
                *entry = self.class_pair_prob(a, b).expect("non-KR class query");
            }
        }
        Some(ClassView {
            members: structure.members(),
            sizes: structure.class_size.clone(),
            p,
        })
    }

    /// Sum of `p(u, v)` over all unordered pairs, via class counts.
    pub fn total_pair_prob(&self) -> f64 {
        match self.class_view() {
            Some(view) => {
                let mut sum = 0.0;
                for a in 0..view.sizes.len() {
                    let na = view.sizes[a] as f64;
                    sum += na * (na - 1.0) / 2.0 * view.p[a][a];
                    for b in (a + 1)..view.sizes.len() {
                        sum += na * view.sizes[b] as f64 * view.p[a][b];
                    }
                }
                sum
            }
            None => {
                let n = self.node_count() as u32;
                let mut sum = 0.0;
                for u in 0..n {
                    for v in (u + 1)..n {
                        sum += self.prob(u, v);
                    }
                }
                sum
            }
        }
    }
}

/// ER/CL/SB view used by fast samplers and class-aggregated analytics.
#[derive(Debug, Clone)]
pub struct ClassView {
    pub members: Vec<Vec<u32>>,
    pub sizes: Vec<usize>,
    /// Symmetric class-pair probability matrix.
    pub p: Vec<Vec<f64>>,
}

pub fn fit_er(g: &Graph) -> Result<EdgeProbModel> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InvalidModel("ER needs at least 2 nodes".into()));
    }
    let p0 = 2.0 * g.edge_count() as f64 / (n as f64 * (n as f64 - 1.0));
    Ok(EdgeProbModel::Er { n, p0 })
}

pub fn fit_cl(g: &Graph) -> Result<EdgeProbModel> {
    if g.edge_count() == 0 {
        return Err(Error::InvalidModel("CL needs at least one edge".into()));
    }
    let degrees: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
    Ok(cl_from_degrees(degrees))
}

/// CL model from an explicit expected-degree sequence.
pub fn cl_from_degrees(degrees: Vec<f64>) -> EdgeProbModel {
    let mut distinct: Vec<f64> = degrees.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    let class_of: Vec<usize> = degrees
        .iter()
        .map(|d| distinct.partition_point(|x| x < d))
        .collect();
    let mut class_size = vec![0usize; distinct.len()];
    for &c in &class_of {
        class_size[c] += 1;
    }
    EdgeProbModel::Cl {
        degrees,
        class_degree: distinct,
        classes: ClassStructure { class_of, class_size },
    }
}

pub fn fit_sb(g: &Graph, block_of: Vec<usize>) -> Result<EdgeProbModel> {
    let n = g.node_count();
    if block_of.len() != n {
        return Err(Error::MissingPartition(block_of.len().min(n)));
    }
    let c = block_of.iter().copied().max().map_or(0, |m| m + 1);
    let mut block_sizes = vec![0usize; c];
    for &b in &block_of {
        block_sizes[b] += 1;
    }
    if block_sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidModel("empty block in partition".into()));
    }
    let mut edge_counts = vec![vec![0u64; c]; c];
    for &(u, v) in g.edges() {
        let (a, b) = (block_of[u as usize], block_of[v as usize]);
        edge_counts[a.min(b)][a.max(b)] += 1;
    }
    let mut p_block = vec![vec![0.0; c]; c];
    for a in 0..c {
        let na = block_sizes[a] as f64;
        let within_pairs = na * (na - 1.0) / 2.0;
        p_block[a][a] = if within_pairs > 0.0 {
            edge_counts[a][a] as f64 / within_pairs
        } else {
            0.0
        };
        for b in (a + 1)..c {
            let cross = na * block_sizes[b] as f64;
            let p = edge_counts[a][b] as f64 / cross;
            p_block[a][b] = p;
            p_block[b][a] = p;
        }
    }
    Ok(EdgeProbModel::Sb {
        block_of,
        block_sizes,
        p_block,
    })
}

/// Convenience partitioner (not part of the model definitions): buckets nodes
/// into `c` blocks of near-equal size by ascending degree.
pub fn degree_bucket_partition(g: &Graph, c: usize) -> Result<Vec<usize>> {
    let n = g.node_count();
    if c == 0 || c > n {
        return Err(Error::InvalidModel(format!(
            "cannot bucket {n} nodes into {c} blocks"
        )));
    }
    let deg = g.degrees();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (deg[v], v));
    let mut block_of = vec![0usize; n];
    for (rank, &v) in order.iter().enumerate() {
        block_of[v] = rank * c / n;
    }
    Ok(block_of)
}

pub fn load_kr(theta: [[f64; 2]; 2], k: u32) -> Result<EdgeProbModel> {
    if k == 0 {
        return Err(Error::InvalidModel("KR power k must be >= 1".into()));
    }
    if (theta[0][1] - theta[1][0]).abs() > 1e-12 {
        return Err(Error::InvalidModel(
            "KR seed matrix must be symmetric for undirected graphs".into(),
        ));
    }
    for row in &theta {
        for &x in row {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidModel(
                    "KR seed entries must lie in [0, 1]".into(),
                ));
            }
        }
    }
    Ok(EdgeProbModel::Kr { theta, k })
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
enum ModelJson {
    Er {
        n0: usize,
        p0: f64,
    },
    Cl {
        degrees: Vec<f64>,
    },
    Sb {
        blocks: Vec<usize>,
        #[serde(rename = "pB")]
        p_b: Vec<Vec<f64>>,
    },
    Kr {
        theta: Vec<Vec<f64>>,
        k: u32,
    },
}

pub fn model_to_json(m: &EdgeProbModel) -> String {
    let json = match m {
        EdgeProbModel::Er { n, p0 } => ModelJson::Er { n0: *n, p0: *p0 },
        EdgeProbModel::Cl { degrees, .. } => ModelJson::Cl {
            degrees: degrees.clone(),
        },
        EdgeProbModel::Sb {
            block_of, p_block, ..
        } => ModelJson::Sb {
            blocks: block_of.clone(),
            p_b: p_block.clone(),
        },
        EdgeProbModel::Kr { theta, k } => ModelJson::Kr {
            theta: theta.iter().map(|r| r.to_vec()).collect(),
            k: *k,
        },
    };
    serde_json::to_string_pretty(&json).expect("model serialization")
}

pub fn model_from_json(text: &str) -> Result<EdgeProbModel> {
    let json: ModelJson = serde_json::from_str(text)?;
    match json {
        ModelJson::Er { n0, p0 } => {
            if !(0.0..=1.0).contains(&p0) {
                return Err(Error::InvalidModel("p0 must lie in [0, 1]".into()));
            }
            Ok(EdgeProbModel::Er { n: n0, p0 })
        }
        ModelJson::Cl { degrees } => Ok(cl_from_degrees(degrees)),
        ModelJson::Sb { blocks, p_b } => {
            let c = p_b.len();
            if blocks.iter().any(|&b| b >= c) {
                return Err(Error::InvalidModel("block id out of range".into()));
            }
            let mut block_sizes = vec![0usize; c];
            for &b in &blocks {
                block_sizes[b] += 1;
            }
            Ok(EdgeProbModel::Sb {
                block_of: blocks,
                block_sizes,
                p_block: p_b,
            })
        }
        ModelJson::Kr { theta, k } => {
            if theta.len() != 2 || theta.iter().any(|r| r.len() != 2) {
                return Err(Error::InvalidModel("theta must be 2x2".into()));
            }
            load_kr([[theta[0][0], theta[0][1]], [theta[1][0], theta[1][1]]], k)
        }
    }
}

pub fn read_model(path: &Path) -> Result<EdgeProbModel> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    model_from_json(&text)
}

pub fn write_model(m: &EdgeProbModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(m)).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}
