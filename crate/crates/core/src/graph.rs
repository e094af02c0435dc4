//! Undirected binary graphs on positionally labelled nodes.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dims, input, Error, Result};
use crate::linalg::Matrix;

/// Simple undirected graph stored as a dense 0/1 adjacency matrix.
///
/// Node identity is the index; two graphs are compared entry by entry, never
/// up to isomorphism. Values are immutable: edits return a new graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adjacency: Vec<u8>,
}

impl Graph {
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(input("graph needs at least one node"));
        }
        Ok(Self {
            n,
            adjacency: vec![0; n * n],
        })
    }

    /// Builds a graph from unordered node pairs. Repeated pairs (in either
    /// orientation) collapse to a single edge.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for &(u, v) in edges {
            g.check_pair(u, v)?;
            g.set(u, v, 1);
        }
        Ok(g)
    }

    /// Builds a graph from a row-major `n x n` adjacency matrix, checking
    /// binary entries, symmetry and an empty diagonal.
    pub fn from_adjacency(n: usize, adjacency: Vec<u8>) -> Result<Self> {
        if n == 0 {
            return Err(input("graph needs at least one node"));
        }
        check_dims(n * n, adjacency.len())?;
        for i in 0..n {
            if adjacency[i * n + i] != 0 {
                return Err(input(format!("self-loop at node {i}")));
            }
            for j in 0..n {
                let a = adjacency[i * n + j];
                if a > 1 {
                    return Err(input(format!("entry ({i},{j}) = {a} is not 0 or 1")));
                }
                if a != adjacency[j * n + i] {
                    return Err(input(format!("adjacency not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { n, adjacency })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adjacency[u * self.n + v] == 1
    }

    /// Row `i` of the adjacency matrix.
    pub fn neighbors_row(&self, i: usize) -> &[u8] {
        &self.adjacency[i * self.n..(i + 1) * self.n]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors_row(i)
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == 1)
            .map(|(j, _)| j)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors_row(i).iter().map(|&a| a as usize).sum()
    }

    /// Edges `(u, v)` with `u < v`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| (u + 1..self.n).filter(move |&v| self.has_edge(u, v)).map(move |v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn adjacency(&self) -> &[u8] {
        &self.adjacency
    }

    /// `L = D - A`, built in integer arithmetic so row sums are exactly zero.
    pub fn laplacian(&self) -> LaplacianMatrix {
        let n = self.n;
        let mut entries = Matrix::zeros(n, n);
        for i in 0..n {
            let mut degree: i64 = 0;
            for j in 0..n {
                if self.has_edge(i, j) {
                    entries[(i, j)] = -1.0;
                    degree += 1;
                }
            }
            entries[(i, i)] = degree as f64;
        }
        LaplacianMatrix { entries }
    }

    pub fn remove_edge(&self, u: usize, v: usize) -> Result<Graph> {
        self.check_pair(u, v)?;
        if !self.has_edge(u, v) {
            return Err(Error::State(format!("edge ({u},{v}) is not present")));
        }
        let mut g = self.clone();
        g.set(u, v, 0);
        Ok(g)
    }

    pub fn add_edge(&self, u: usize, v: usize) -> Result<Graph> {
        self.check_pair(u, v)?;
        if self.has_edge(u, v) {
            return Err(Error::State(format!("edge ({u},{v}) already present")));
        }
        let mut g = self.clone();
        g.set(u, v, 1);
        Ok(g)
    }

    /// Component index of every node, numbered in order of first appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for v in self.neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn component_count(&self) -> usize {
        self.components().into_iter().max().map_or(0, |c| c + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(input(format!(
                "node pair ({u},{v}) out of range for {} nodes",
                self.n
            )));
        }
        if u == v {
            return Err(input(format!("self-loop ({u},{u}) not allowed")));
        }
        Ok(())
    }

    fn set(&mut self, u: usize, v: usize, value: u8) {
        self.adjacency[u * self.n + v] = value;
        self.adjacency[v * self.n + u] = value;
    }
}

/// Combinatorial graph Laplacian `D - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    entries: Matrix,
}

impl LaplacianMatrix {
    /// Wraps an arbitrary square matrix. Used by tests and oracles that need
    /// Laplacian-shaped input not coming from a [`Graph`].
    pub fn from_matrix(entries: Matrix) -> Result<Self> {
        check_dims(entries.rows(), entries.cols())?;
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }
}

/// Number of unordered node pairs whose adjacency differs.
pub fn hamming_distance(g1: &Graph, g2: &Graph) -> Result<usize> {
    check_dims(g1.n, g2.n)?;
    let n = g1.n;
    let mut count = 0;
    for i in 0..n {
        for j in i + 1..n {
            if g1.adjacency[i * n + j] != g2.adjacency[i * n + j] {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Frobenius norm of the difference of the two Laplacians.
pub fn frobenius_laplacian_distance(g1: &Graph, g2: &Graph) -> Result<f64> {
    check_dims(g1.n, g2.n)?;
    let n = g1.n;
    // Integer sum of squares, so the result is exactly sqrt(k) for integer k.
    let mut sum: i64 = 0;
    for i in 0..n {
        let mut deg_diff: i64 = 0;
        for j in 0..n {
            let d = g1.adjacency[i * n + j] as i64 - g2.adjacency[i * n + j] as i64;
            sum += d * d;
            deg_diff += d;
        }
        sum += deg_diff * deg_diff;
    }
    Ok(libm::sqrt(sum as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::from_edge_list(3, &[(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    #[test]
    fn edge_list_construction() {
        let g = Graph::from_edge_list(2, &[(0, 1)]).unwrap();
        assert_eq!(g.adjacency(), &[0, 1, 1, 0]);
        let e = Graph::from_edge_list(3, &[]).unwrap();
        assert!(e.adjacency().iter().all(|&a| a == 0));
        let path = Graph::from_edge_list(3, &[(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(path.adjacency(), &[0, 1, 0, 1, 0, 1, 0, 1, 0]);
        assert_eq!(path.edge_count(), 2);
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(Graph::from_edge_list(3, &[(0, 3)]), Err(Error::Input(_))));
        assert!(matches!(Graph::from_edge_list(3, &[(1, 1)]), Err(Error::Input(_))));
        assert!(Graph::from_edge_list(0, &[]).is_err());
    }

    #[test]
    fn adjacency_validation() {
        assert!(Graph::from_adjacency(2, vec![0, 1, 0, 0]).is_err());
        assert!(Graph::from_adjacency(2, vec![1, 0, 0, 0]).is_err());
        assert!(Graph::from_adjacency(2, vec![0, 2, 2, 0]).is_err());
        assert!(Graph::from_adjacency(2, vec![0, 1, 1]).is_err());
        assert!(Graph::from_adjacency(2, vec![0, 1, 1, 0]).is_ok());
    }

    #[test]
    fn laplacians() {
        let k2 = Graph::from_edge_list(2, &[(0, 1)]).unwrap().laplacian();
        assert_eq!(k2.matrix().as_slice(), &[1.0, -1.0, -1.0, 1.0]);
        let e = Graph::empty(4).unwrap().laplacian();
        assert_eq!(e.matrix().max_abs(), 0.0);
        let l = k3().laplacian();
        assert_eq!(
            l.matrix().as_slice(),
            &[2.0, -1.0, -1.0, -1.0, 2.0, -1.0, -1.0, -1.0, 2.0]
        );
    }

    #[test]
    fn hamming_and_frobenius_on_single_edits() {
        let parent = k3();
        let a = parent.remove_edge(0, 1).unwrap();
        assert_eq!(hamming_distance(&parent, &parent).unwrap(), 0);
        assert_eq!(hamming_distance(&parent, &a).unwrap(), 1);
        assert_eq!(frobenius_laplacian_distance(&parent, &a).unwrap(), 2.0);

        let square = Graph::from_edge_list(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let c1 = square.remove_edge(0, 1).unwrap();
        let c2 = square.remove_edge(2, 3).unwrap();
        assert_eq!(hamming_distance(&c1, &c2).unwrap(), 2);
        assert_eq!(
            frobenius_laplacian_distance(&c1, &c2).unwrap(),
            libm::sqrt(8.0)
        );
    }

    #[test]
    fn dimension_mismatch() {
        let a = Graph::empty(2).unwrap();
        let b = Graph::empty(3).unwrap();
        assert!(matches!(hamming_distance(&a, &b), Err(Error::Dimension { .. })));
        assert!(matches!(
            frobenius_laplacian_distance(&a, &b),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn edits() {
        let k2 = Graph::from_edge_list(2, &[(0, 1)]).unwrap();
        let e = k2.remove_edge(0, 1).unwrap();
        assert_eq!(e, Graph::empty(2).unwrap());
        assert_eq!(k2.edge_count(), 1);
        assert_eq!(e.add_edge(1, 0).unwrap(), k2);
        assert!(matches!(e.remove_edge(0, 1), Err(Error::State(_))));
        assert!(matches!(k2.add_edge(0, 1), Err(Error::State(_))));
    }

    #[test]
    fn connectivity() {
        assert!(k3().is_connected());
        assert!(!Graph::empty(2).unwrap().is_connected());
        assert!(Graph::empty(1).unwrap().is_connected());
        // barbell: two triangles joined by a bridge (2,3)
        let g = Graph::from_edge_list(6, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.remove_edge(2, 3).unwrap().component_count(), 2);
        assert_eq!(g.remove_edge(0, 1).unwrap().component_count(), 1);
    }
}
