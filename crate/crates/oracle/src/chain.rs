use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::banded::BandedHermitian;
use crate::{OracleError, Result};

/// Default bound on the operator dimension.
pub const DEFAULT_DIM_CAP: usize = 2_000_000;

/// A finite piece of the chain: `n_rings` rings between two terminal
/// vertices held at zero, each semicircle split into `points_per_edge`
/// intervals. `vertex_couplings[v]` is the coupling at vertex v, v = 0 and
/// v = n_rings being the terminal ones.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedChain {
    pub n_rings: usize,
    pub points_per_edge: usize,
    pub flux: f64,
    pub vertex_couplings: Vec<f64>,
    pub dim_cap: usize,
}

impl TruncatedChain {
    /// Places `gammas` at consecutive vertices with `margin` rings on each side.
    pub fn centered(flux: f64, alpha: f64, gammas: &[f64], margin: usize, points_per_edge: usize) -> Result<Self> {
        if margin == 0 {
            return Err(OracleError::InvalidChain("need at least one margin ring".into()));
        }
        let m = gammas.len().max(1);
        let n_rings = 2 * margin + m - 1;
        let mut vertex_couplings = vec![alpha; n_rings + 1];
        for (j, g) in gammas.iter().enumerate() {
            vertex_couplings[margin + j] += g;
        }
        Self::new(n_rings, points_per_edge, flux, vertex_couplings)
    }

    pub fn new(n_rings: usize, points_per_edge: usize, flux: f64, vertex_couplings: Vec<f64>) -> Result<Self> {
        if n_rings < 2 {
            return Err(OracleError::InvalidChain("need at least two rings".into()));
        }
        if points_per_edge < 2 {
            return Err(OracleError::InvalidChain("need at least two intervals per edge".into()));
        }
        if vertex_couplings.len() != n_rings + 1 {
            return Err(OracleError::InvalidChain(format!(
                "expected {} vertex couplings, got {}",
                n_rings + 1,
                vertex_couplings.len()
            )));
        }
        if !flux.is_finite() || vertex_couplings.iter().any(|c| !c.is_finite()) {
            return Err(OracleError::InvalidChain("parameters must be finite".into()));
        }
        Ok(Self {
            n_rings,
            points_per_edge,
            flux,
            vertex_couplings,
            dim_cap: DEFAULT_DIM_CAP,
        })
    }

    pub fn with_points(&self, points_per_edge: usize) -> Self {
        Self {
            points_per_edge,
            ..self.clone()
        }
    }

    pub fn step(&self) -> f64 {
        PI / self.points_per_edge as f64
    }

    pub fn dim(&self) -> usize {
        let m = self.points_per_edge;
        self.n_rings * 2 * (m - 1) + self.n_rings - 1
    }

    fn ring_base(&self, r: usize) -> usize {
        r * (2 * (self.points_per_edge - 1) + 1)
    }

    /// Unknown index of grid node `t` (0..=M) on the upper or lower edge of
    /// ring `r`; `None` at the terminal vertices.
    fn node(&self, r: usize, upper: bool, t: usize) -> Option<usize> {
        let m = self.points_per_edge;
        if t == 0 {
            self.vertex(r)
        } else if t == m {
            self.vertex(r + 1)
        } else {
            Some(self.ring_base(r) + 2 * (t - 1) + usize::from(!upper))
        }
    }

    fn vertex(&self, v: usize) -> Option<usize> {
        if v == 0 || v == self.n_rings {
            None
        } else {
            Some(self.ring_base(v - 1) + 2 * (self.points_per_edge - 1))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Upper { ring: usize, t: usize },
    Lower { ring: usize, t: usize },
    Vertex { v: usize },
}

impl NodeKind {
    /// Ring a node is attributed to; a vertex counts towards the ring on its left.
    pub fn ring(&self) -> usize {
        match *self {
            NodeKind::Upper { ring, .. } | NodeKind::Lower { ring, .. } => ring,
            NodeKind::Vertex { v } => v - 1,
        }
    }
}

/// The generalized problem K u = E B u with B diagonal.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub k: BandedHermitian,
    pub b: Vec<f64>,
    pub nodes: Vec<NodeKind>,
    pub n_rings: usize,
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// B^{-1/2} K B^{-1/2} as a dense matrix.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i.abs_diff(j) > 2 {
                Complex64::new(0.0, 0.0)
            } else {
                self.k.get(i, j) / (self.b[i] * self.b[j]).sqrt()
            }
        })
    }
}

/// Builds the discrete quadratic form
/// sum over links |e^{i theta} u_b - u_a|^2 / h + sum over vertices c_v |u_v|^2
/// with theta = A h on upper and -A h on lower edges, and the lumped mass
/// (h at edge nodes, 2h at vertices).
pub fn assemble(chain: &TruncatedChain) -> Result<DiscreteOperator> {
    let dim = chain.dim();
    if dim > chain.dim_cap {
        return Err(OracleError::DimensionOverflow { dim, cap: chain.dim_cap });
    }
    let m = chain.points_per_edge;
    let h = chain.step();
    let mut k = BandedHermitian::zeros(dim);
    let mut b = vec![0.0; dim];
    let mut nodes = vec![NodeKind::Vertex { v: 1 }; dim];
    for r in 0..chain.n_rings {
        for upper in [true, false] {
            let theta = if upper { chain.flux * h } else { -chain.flux * h };
            let w = Complex64::from_polar(1.0, theta);
            for t in 0..m {
                let a = chain.node(r, upper, t);
                let c = chain.node(r, upper, t + 1);
                if let Some(a) = a {
                    k.diag[a] += 1.0 / h;
                    b[a] += 0.5 * h;
                }
                if let Some(c) = c {
                    k.diag[c] += 1.0 / h;
                    b[c] += 0.5 * h;
                }
                if let (Some(a), Some(c)) = (a, c) {
                    // coefficient of conj(u_a) u_c
                    k.add_upper(a, c, -w / h);
                }
            }
            for t in 1..m {
                let idx = chain.node(r, upper, t).expect("interior node");
                nodes[idx] = if upper {
                    NodeKind::Upper { ring: r, t }
                } else {
                    NodeKind::Lower { ring: r, t }
                };
            }
        }
    }
    for v in 1..chain.n_rings {
        let idx = chain.vertex(v).expect("interior vertex");
        k.diag[idx] += chain.vertex_couplings[v];
        nodes[idx] = NodeKind::Vertex { v };
    }
    Ok(DiscreteOperator {
        k,
        b,
        nodes,
        n_rings: chain.n_rings,
    })
}
