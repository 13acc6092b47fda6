use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Simple undirected graph whose vertices carry user-facing labels.
///
/// Qubit order follows ascending label order, so vertex `k` (0-based) is the
/// `k`-th smallest label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from vertex labels and edges given by label.
    pub fn new(labels: &[usize], edges: &[(usize, usize)]) -> Result<Self> {
        let mut sorted = labels.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(Error::InvalidArgument(format!("duplicate vertex labels in {labels:?}")));
        }
        if sorted.is_empty() {
            return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on vertex {a}")));
            }
            let ia = index_of(&sorted, a)?;
            let ib = index_of(&sorted, b)?;
            let e = (ia.min(ib), ia.max(ib));
            if !set.insert(e) {
                return Err(Error::InvalidArgument(format!("duplicate edge {a}-{b}")));
            }
        }
        Ok(Self { labels: sorted, edges: set })
    }

    /// Star `K_{1,n-1}` on labels `1..=n`, centred on `center`.
    pub fn star(n: usize, center: usize) -> Result<Self> {
        let labels: Vec<usize> = (1..=n).collect();
        let edges: Vec<(usize, usize)> =
            labels.iter().filter(|&&v| v != center).map(|&v| (center, v)).collect();
        Self::new(&labels, &edges)
    }

    /// Path visiting the given labels in order.
    pub fn path(order: &[usize]) -> Result<Self> {
        let edges: Vec<(usize, usize)> = order.windows(2).map(|w| (w[0], w[1])).collect();
        Self::new(order, &edges)
    }

    /// Four-qubit star centred on vertex 4.
    pub fn star4() -> Self {
        Self::star(4, 4).expect("valid star")
    }

    /// Four-qubit line 3–1–2–4.
    pub fn line4() -> Self {
        Self::path(&[3, 1, 2, 4]).expect("valid path")
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Edges as pairs of 0-based vertex indices.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_labels(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&(a, b)| (self.labels[a], self.labels[b])).collect()
    }

    pub fn neighbors(&self, vertex: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == vertex {
                    Some(b)
                } else if b == vertex {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn index_of(&self, label: usize) -> Result<usize> {
        index_of(&self.labels, label)
    }

    /// Graph left after measuring the given vertices in `Z` with outcome `|0>`:
    /// the vertices and their incident edges are deleted.
    pub fn project_zero(&self, remove: &[usize]) -> Result<Graph> {
        for &r in remove {
            self.index_of(r)?;
        }
        let keep: Vec<usize> = self.labels.iter().copied().filter(|l| !remove.contains(l)).collect();
        if keep.is_empty() {
            return Err(Error::InvalidArgument("cannot project out every vertex".into()));
        }
        let edges: Vec<(usize, usize)> = self
            .edge_labels()
            .into_iter()
            .filter(|(a, b)| keep.contains(a) && keep.contains(b))
            .collect();
        Graph::new(&keep, &edges)
    }
}

fn index_of(labels: &[usize], label: usize) -> Result<usize> {
    labels
        .binary_search(&label)
        .map_err(|_| Error::InvalidArgument(format!("no vertex labelled {label}")))
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> =
            self.edge_labels().iter().map(|(a, b)| format!("{a}-{b}")).collect();
        write!(f, "V={:?} E=[{}]", self.labels, edges.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_and_duplicates() {
        assert!(Graph::new(&[1, 2], &[(1, 1)]).is_err());
        assert!(Graph::new(&[1, 2], &[(1, 2), (2, 1)]).is_err());
        assert!(Graph::new(&[1, 1], &[]).is_err());
    }

    #[test]
    fn star_projections() {
        let s = Graph::star4();
        assert_eq!(s.project_zero(&[3]).unwrap(), Graph::star(4, 4).unwrap().project_zero(&[3]).unwrap());
        let g = s.project_zero(&[3]).unwrap();
        assert_eq!(g.labels(), &[1, 2, 4]);
        assert_eq!(g.edge_labels(), vec![(1, 4), (2, 4)]);
        let g = s.project_zero(&[2, 3]).unwrap();
        assert_eq!(g.edge_labels(), vec![(1, 4)]);
        let g = s.project_zero(&[1, 2]).unwrap();
        assert_eq!(g.edge_labels(), vec![(3, 4)]);
        assert_eq!(s.project_zero(&[]).unwrap(), s);
        assert!(s.project_zero(&[1, 2, 3, 4]).is_err());
        assert!(s.project_zero(&[9]).is_err());
    }
}
