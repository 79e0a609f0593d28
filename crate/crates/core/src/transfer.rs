//! Transfer matrices along the chain and reconstruction of wave functions
//! from their vertex values.
//!
//! A solution of the continuum problem at energy E is determined by its
//! values psi_j at the vertices, which obey
//! psi_{j+1} + psi_{j-1} = 2 xi_j(E) psi_j, where xi_j uses the local
//! coupling alpha + gamma_j.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::band::EdgeSamples;
use crate::dispersion::{check_flat, cos_kernel, lambda_pair_from_xi, lambda_small, s_kernel, sinc_kernel, xi};
use crate::error::{Error, Result};
use crate::params::{ChainParams, PerturbationPattern};

/// Real 2x2 matrix acting on pairs (psi_{j+1}, psi_j).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Transfer2 {
    pub const IDENTITY: Transfer2 = Transfer2 {
        a11: 1.0,
        a12: 0.0,
        a21: 0.0,
        a22: 1.0,
    };

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    /// [[2 xi, -1], [1, 0]]
    pub fn from_xi(xi: f64) -> Self {
        Self::new(2.0 * xi, -1.0, 1.0, 0.0)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    /// `self * rhs`
    pub fn mul(&self, rhs: &Transfer2) -> Transfer2 {
        Transfer2::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a21.abs()).max(self.a22.abs())
    }

    pub fn max_diff(&self, other: &Transfer2) -> f64 {
        (self.a11 - other.a11)
            .abs()
            .max((self.a12 - other.a12).abs())
            .max((self.a21 - other.a21).abs())
            .max((self.a22 - other.a22).abs())
    }
}

/// Transfer matrix across vertex j with extra coupling `coupling_j`.
pub fn local_matrix(energy: f64, coupling_j: f64, params: &ChainParams) -> Result<Transfer2> {
    Ok(Transfer2::from_xi(xi(energy, params.alpha() + coupling_j, params)?))
}

/// The quadruple (P_m, Q_m, P_{m-1}, Q_{m-1}) describing the m-fold product
/// [[P_m, -Q_m], [P_{m-1}, -Q_{m-1}]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PQState {
    pub p: f64,
    pub q: f64,
    pub p_prev: f64,
    pub q_prev: f64,
    pub m: usize,
}

impl PQState {
    /// Empty product (m = 0): the identity.
    pub fn seed() -> Self {
        Self {
            p: 1.0,
            q: 0.0,
            p_prev: 0.0,
            q_prev: -1.0,
            m: 0,
        }
    }

    /// -P_m Q_{m-1} + Q_m P_{m-1}; equals one for every exact product.
    pub fn invariant(&self) -> f64 {
        -self.p * self.q_prev + self.q * self.p_prev
    }

    pub fn matrix(&self) -> Transfer2 {
        Transfer2::new(self.p, -self.q, self.p_prev, -self.q_prev)
    }
}

/// One step of the three-term recursion P_{m+1} = 2 xi_{m+1} P_m - P_{m-1}.
pub fn pq_advance(state: PQState, xi_next: f64) -> PQState {
    PQState {
        p: 2.0 * xi_next * state.p - state.p_prev,
        q: 2.0 * xi_next * state.q - state.q_prev,
        p_prev: state.p,
        q_prev: state.q,
        m: state.m + 1,
    }
}

pub fn pq_state(energy: f64, pattern: &PerturbationPattern, params: &ChainParams) -> Result<PQState> {
    let mut st = PQState::seed();
    for &g in pattern.gammas() {
        st = pq_advance(st, xi(energy, params.alpha() + g, params)?);
    }
    Ok(st)
}

/// Product N_m ... N_1 of the local matrices over the pattern.
pub fn product_matrix(energy: f64, pattern: &PerturbationPattern, params: &ChainParams) -> Result<Transfer2> {
    Ok(pq_state(energy, pattern, params)?.matrix())
}

/// Chebyshev polynomial of the second kind U_n(x), n >= -1, from its
/// trigonometric or hyperbolic closed form.
pub fn chebyshev_u(n: i64, x: f64) -> f64 {
    if n < 0 {
        return 0.0;
    }
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let y = x.abs();
    let nf = (n + 1) as f64;
    let value = if y == 1.0 {
        nf
    } else if y < 1.0 {
        // theta = arccos y without cancellation near y = 1
        let theta = 2.0 * ((0.5 * (1.0 - y)).sqrt()).asin();
        (nf * theta).sin() / theta.sin()
    } else {
        let d = y - 1.0;
        let t = (d + (d * (y + 1.0)).sqrt()).ln_1p();
        (nf * t).sinh() / t.sinh()
    };
    sign * value
}

/// Closed form of the m-fold product when all m couplings equal `gamma`:
/// [[U_m, -U_{m-1}], [U_{m-1}, -U_{m-2}]] evaluated at xi_1.
pub fn identical_closed_form(energy: f64, gamma: f64, m: usize, params: &ChainParams) -> Result<Transfer2> {
    let x = xi(energy, params.alpha() + gamma, params)?;
    let m = m as i64;
    Ok(Transfer2::new(
        chebyshev_u(m, x),
        -chebyshev_u(m - 1, x),
        chebyshev_u(m - 1, x),
        -chebyshev_u(m - 2, x),
    ))
}

/// Eigenvectors u_1 = (1, lambda_2) and u_2 = (1, lambda_1) of the
/// unperturbed transfer matrix, for lambda_1 and lambda_2 respectively.
pub fn eigenvectors(energy: f64, params: &ChainParams) -> Result<([f64; 2], [f64; 2])> {
    let x = xi(energy, params.alpha(), params)?;
    if x.abs() < 1.0 {
        return Err(Error::InsideBand {
            energy,
            xi_abs: x.abs(),
        });
    }
    let (l1, l2) = lambda_pair_from_xi(x);
    Ok(([1.0, l2], [1.0, l1]))
}

/// Vertex values psi_j for j in `first..first + values.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSolution {
    pub energy: f64,
    pub first: i64,
    pub values: Vec<f64>,
}

impl LatticeSolution {
    pub fn last(&self) -> i64 {
        self.first + self.values.len() as i64 - 1
    }

    pub fn get(&self, j: i64) -> Option<f64> {
        if j < self.first {
            return None;
        }
        self.values.get((j - self.first) as usize).copied()
    }
}

/// Gauge phase e^{i a t}.
fn phase(a: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, a * t)
}

/// Edge functions on I_j and their derivatives, with local coordinate t in [0, pi].
struct EdgePair {
    energy: f64,
    flux: f64,
    psi_j: f64,
    /// coefficient of S(t)/S(pi) on the upper and lower semicircle
    b_upper: Complex64,
    b_lower: Complex64,
    s_pi: f64,
}

impl EdgePair {
    fn new(energy: f64, psi_j: f64, psi_j1: f64, params: &ChainParams) -> Result<Self> {
        check_flat(energy)?;
        let a = params.flux();
        let c_pi = cos_kernel(energy, PI);
        Ok(Self {
            energy,
            flux: a,
            psi_j,
            b_upper: psi_j1 * phase(a, PI) - psi_j * c_pi,
            b_lower: psi_j1 * phase(-a, PI) - psi_j * c_pi,
            s_pi: s_kernel(energy),
        })
    }

    fn bracket(&self, b: Complex64, t: f64) -> Complex64 {
        self.psi_j * cos_kernel(self.energy, t) + b * (sinc_kernel(self.energy, t) / self.s_pi)
    }

    fn bracket_dt(&self, b: Complex64, t: f64) -> Complex64 {
        let s = sinc_kernel(self.energy, t);
        Complex64::from(-self.energy * s * self.psi_j) + b * (cos_kernel(self.energy, t) / self.s_pi)
    }

    /// (psi(t), phi(t))
    fn values(&self, t: f64) -> (Complex64, Complex64) {
        (
            phase(-self.flux, t) * self.bracket(self.b_upper, t),
            phase(self.flux, t) * self.bracket(self.b_lower, t),
        )
    }

    /// (psi'(t), phi'(t))
    fn derivatives(&self, t: f64) -> (Complex64, Complex64) {
        let i = Complex64::i();
        let up = phase(-self.flux, t)
            * (-i * self.flux * self.bracket(self.b_upper, t) + self.bracket_dt(self.b_upper, t));
        let lo = phase(self.flux, t)
            * (i * self.flux * self.bracket(self.b_lower, t) + self.bracket_dt(self.b_lower, t));
        (up, lo)
    }
}

/// Samples of the upper (psi) and lower (phi) components on the edge pair
/// between vertices j and j+1, built from the vertex values alone.
/// `x` holds absolute positions j*pi + t.
pub fn reconstruct_edge(
    energy: f64,
    psi_j: f64,
    psi_j1: f64,
    j: i64,
    params: &ChainParams,
    samples: usize,
) -> Result<EdgeSamples> {
    if samples < 2 {
        return Err(Error::InvalidParams("need at least two samples per edge".into()));
    }
    let edge = EdgePair::new(energy, psi_j, psi_j1, params)?;
    let mut out = EdgeSamples {
        x: Vec::with_capacity(samples),
        upper: Vec::with_capacity(samples),
        lower: Vec::with_capacity(samples),
    };
    for i in 0..samples {
        let t = PI * i as f64 / (samples - 1) as f64;
        let (u, l) = edge.values(t);
        out.x.push(j as f64 * PI + t);
        out.upper.push(u);
        out.lower.push(l);
    }
    Ok(out)
}

/// Largest violation of continuity and of the delta condition
/// sum of outgoing derivatives = (alpha + gamma_j) psi_j over the interior
/// vertices of the lattice window.
pub fn vertex_condition_residual(
    lattice: &LatticeSolution,
    pattern: &PerturbationPattern,
    params: &ChainParams,
) -> Result<f64> {
    let e = lattice.energy;
    let mut worst = 0.0f64;
    let edges: Vec<EdgePair> = lattice
        .values
        .windows(2)
        .map(|w| EdgePair::new(e, w[0], w[1], params))
        .collect::<Result<_>>()?;
    for (idx, edge) in edges.iter().enumerate() {
        let (u0, l0) = edge.values(0.0);
        let (u1, l1) = edge.values(PI);
        let a = lattice.values[idx];
        let b = lattice.values[idx + 1];
        for v in [u0 - a, l0 - a, u1 - b, l1 - b] {
            worst = worst.max(v.norm());
        }
    }
    for idx in 1..edges.len() {
        let j = lattice.first + idx as i64;
        let psi = lattice.values[idx];
        let (ru, rl) = edges[idx].derivatives(0.0);
        let (lu, ll) = edges[idx - 1].derivatives(PI);
        let coupling = params.alpha() + pattern.at(j);
        let r = ru + rl - lu - ll - coupling * psi;
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Vertex values of the bound state at an eigenvalue E of the perturbed
/// chain: geometric decay by lambda on both sides of the pattern and the
/// three-term recursion across it, normalized to max |psi_j| = 1.
/// The window extends `margin` vertices beyond the support on each side.
pub fn bound_state_lattice(
    energy: f64,
    pattern: &PerturbationPattern,
    params: &ChainParams,
    margin: usize,
) -> Result<LatticeSolution> {
    let lam = lambda_small(energy, params.alpha(), params)?;
    let m = pattern.len() as i64;
    let first = 1 - margin as i64;
    let last = m + 1 + margin as i64;
    let mut values = Vec::with_capacity((last - first + 1) as usize);
    for j in first..=1 {
        values.push(lam.powi((1 - j) as i32));
    }
    for j in 1..=m {
        let xj = xi(energy, params.alpha() + pattern.at(j), params)?;
        let cur = values[(j - first) as usize];
        let prev = values[(j - 1 - first) as usize];
        values.push(2.0 * xj * cur - prev);
    }
    for _ in (m + 2)..=last {
        let prev = *values.last().expect("window is non-empty");
        values.push(lam * prev);
    }
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale > 0.0 && scale.is_finite() {
        values.iter_mut().for_each(|v| *v /= scale);
    }
    Ok(LatticeSolution { energy, first, values })
}

/// L^2 norm over each ring (both semicircles) of the reconstructed function,
/// by composite Simpson quadrature with `samples` (odd) points per edge.
pub fn ring_l2_norms(lattice: &LatticeSolution, params: &ChainParams, samples: usize) -> Result<Vec<f64>> {
    let n = if samples % 2 == 0 { samples + 1 } else { samples }.max(3);
    let h = PI / (n - 1) as f64;
    let mut norms = Vec::with_capacity(lattice.values.len().saturating_sub(1));
    for (idx, w) in lattice.values.windows(2).enumerate() {
        let j = lattice.first + idx as i64;
        let s = reconstruct_edge(lattice.energy, w[0], w[1], j, params, n)?;
        let mut acc = 0.0;
        for i in 0..n {
            let weight = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += weight * (s.upper[i].norm_sqr() + s.lower[i].norm_sqr());
        }
        norms.push((acc * h / 3.0).sqrt());
    }
    Ok(norms)
}
