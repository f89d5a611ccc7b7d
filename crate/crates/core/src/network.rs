//! Oscillator interaction graph.
//!
//! Every network is embedded in the complete graph on `N` vertices. Edges are
//! indexed lexicographically, `(1,2), (1,3), …, (1,N), (2,3), …, (N-1,N)`, and a
//! zero coupling gain encodes an absent edge. All edge-indexed vectors in the
//! crate use this order.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Number of edges of the complete graph on `n` vertices.
pub fn edge_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Zero-based vertex pairs `(i, j)`, `i < j`, in edge order.
pub fn edge_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(edge_count(n));
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Position of the zero-based pair `(i, j)`, `i < j`, in edge order.
pub fn edge_index(n: usize, i: usize, j: usize) -> Option<usize> {
    if i >= j || j >= n {
        return None;
    }
    // edges before row i: sum_{r<i} (n - 1 - r)
    Some(i * (2 * n - i - 1) / 2 + (j - i - 1))
}

/// Oriented incidence matrix of the complete graph.
///
/// Column `k` belongs to edge `(i, j)` with `i < j` and holds `+1` in row `i`
/// and `-1` in row `j`, so `Bᵀθ` collects the phase differences `θ_i − θ_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl IncidenceMatrix {
    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Entry `B[row, col]`.
    pub fn entry(&self, row: usize, col: usize) -> i64 {
        let (i, j) = self.pairs[col];
        if row == i {
            1
        } else if row == j {
            -1
        } else {
            0
        }
    }

    pub fn to_integer(&self) -> DMatrix<i64> {
        DMatrix::from_fn(self.n, self.n_edges(), |r, c| self.entry(r, c))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n_edges(), |r, c| self.entry(r, c) as f64)
    }

    /// `Bᵀθ`: per-edge differences `θ_i − θ_j` (unwrapped).
    pub fn edge_differences(&self, node: &[f64]) -> Vec<f64> {
        self.pairs.iter().map(|&(i, j)| node[i] - node[j]).collect()
    }

    /// `B·y` for an edge-indexed vector `y`.
    pub fn scatter(&self, edge: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&(i, j), &y) in self.pairs.iter().zip(edge) {
            out[i] += y;
            out[j] -= y;
        }
        out
    }
}

/// The fixed lexicographic incidence matrix for `n` oscillators.
pub fn incidence_matrix(n: usize) -> Result<IncidenceMatrix> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "an oscillator network needs at least 2 vertices, got {n}"
        )));
    }
    Ok(IncidenceMatrix {
        n,
        pairs: edge_pairs(n),
    })
}

/// The edge Laplacian `BᵀB`.
pub fn edge_laplacian(b: &IncidenceMatrix) -> DMatrix<i64> {
    let pairs = b.pairs();
    DMatrix::from_fn(pairs.len(), pairs.len(), |p, q| {
        let (a, bb) = pairs[p];
        let (c, d) = pairs[q];
        let delta = |u: usize, v: usize| i64::from(u == v);
        // column inner product of δ_a − δ_b with δ_c − δ_d
        delta(a, c) - delta(a, d) - delta(bb, c) + delta(bb, d)
    })
}

/// Finite Kuramoto network with symmetric, possibly sparse coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorNetwork {
    omega: Vec<f64>,
    gains: Vec<f64>,
    incidence: IncidenceMatrix,
}

impl OscillatorNetwork {
    /// Builds a network from natural frequencies (rad/s) and per-edge gains
    /// `K̃` (rad/s) in edge order.
    pub fn new(omega: Vec<f64>, gains: Vec<f64>) -> Result<Self> {
        let n = omega.len();
        let incidence = incidence_matrix(n).map_err(|e| Error::Validation(e.to_string()))?;
        if gains.len() != incidence.n_edges() {
            return Err(Error::Validation(format!(
                "expected {} coupling gains for {n} oscillators, got {}",
                incidence.n_edges(),
                gains.len()
            )));
        }
        if let Some(i) = omega.iter().position(|w| !w.is_finite()) {
            return Err(Error::Validation(format!(
                "natural frequency {} is not finite",
                i + 1
            )));
        }
        for (k, &g) in gains.iter().enumerate() {
            let (i, j) = incidence.pairs()[k];
            if !g.is_finite() || g < 0.0 {
                return Err(Error::Validation(format!(
                    "coupling gain on edge ({}, {}) must be finite and non-negative, got {g}",
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(Self {
            omega,
            gains,
            incidence,
        })
    }

    /// Builds a network from a 1-based edge list; unlisted edges get zero gain.
    pub fn from_edges(omega: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = omega.len();
        let mut gains = vec![0.0; edge_count(n)];
        for &(i, j, k) in edges {
            let idx = (i >= 1 && j >= 1)
                .then(|| edge_index(n, i - 1, j - 1))
                .flatten()
                .ok_or_else(|| {
                    Error::Validation(format!("edge ({i}, {j}) is not a pair i < j within 1..={n}"))
                })?;
            gains[idx] = k;
        }
        Self::new(omega, gains)
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn n_edges(&self) -> usize {
        self.gains.len()
    }

    pub fn natural_frequencies(&self) -> &[f64] {
        &self.omega
    }

    pub fn coupling_gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn incidence(&self) -> &IncidenceMatrix {
        &self.incidence
    }

    /// Diagonal of `K = diag(K̃)/N`, the coupling matrix used by the dynamics.
    pub fn scaled_gains(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.gains.iter().map(|k| k / n).collect()
    }

    /// Active edges as zero-based pairs.
    pub fn active_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.incidence
            .pairs()
            .iter()
            .zip(&self.gains)
            .filter(|(_, &g)| g > 0.0)
            .map(|(&p, _)| p)
    }

    pub fn with_gains(&self, gains: Vec<f64>) -> Result<Self> {
        Self::new(self.omega.clone(), gains)
    }

    pub fn with_frequencies(&self, omega: Vec<f64>) -> Result<Self> {
        Self::new(omega, self.gains.clone())
    }
}

/// Whether the graph of edges with positive gain spans all oscillators.
pub fn is_connected(net: &OscillatorNetwork) -> bool {
    let n = net.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for (i, j) in net.active_edges() {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            components -= 1;
        }
    }
    components == 1
}
