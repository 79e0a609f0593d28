use num_complex::Complex64;

use crate::chain::{assemble, DiscreteOperator, TruncatedChain};
use crate::eigen::{eigenvalues_in_window, eigenvector};
use crate::{OracleError, Result};

/// States with more than this share of their mass in the two outermost rings
/// at either end are treated as truncation artefacts.
pub const END_FRACTION_LIMIT: f64 = 0.5;

const WINDOW_TOL: f64 = 1e-15;
const FIRST_MARGIN: usize = 6;
const MARGIN_STEP: usize = 4;
const MAX_MARGIN: usize = 60;
const SIZE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleState {
    pub window: usize,
    pub energy: f64,
    pub end_fraction: f64,
}

impl OracleState {
    pub fn is_end_state(&self) -> bool {
        self.end_fraction > END_FRACTION_LIMIT
    }
}

/// B-weighted squared norm of `u` per ring.
pub fn ring_masses(op: &DiscreteOperator, u: &[Complex64]) -> Vec<f64> {
    let mut out = vec![0.0; op.n_rings];
    for ((node, v), b) in op.nodes.iter().zip(u).zip(&op.b) {
        out[node.ring()] += v.norm_sqr() * b;
    }
    out
}

fn end_fraction(masses: &[f64]) -> f64 {
    let n = masses.len();
    let total: f64 = masses.iter().sum();
    let outer = if n >= 4 {
        masses[0] + masses[1] + masses[n - 2] + masses[n - 1]
    } else {
        total
    };
    outer / total
}

/// Every eigenvalue inside the given windows, with its end-localization score.
pub fn gap_states(op: &DiscreteOperator, windows: &[(f64, f64)]) -> Result<Vec<OracleState>> {
    let mut out = Vec::new();
    for (w, &(lo, hi)) in windows.iter().enumerate() {
        for energy in eigenvalues_in_window(op, lo, hi, WINDOW_TOL) {
            let u = eigenvector(op, energy)?;
            let end_fraction = end_fraction(&ring_masses(op, &u));
            out.push(OracleState {
                window: w,
                energy,
                end_fraction,
            });
        }
    }
    Ok(out)
}

fn bulk_energies(chain: &TruncatedChain, windows: &[(f64, f64)]) -> Result<Vec<Vec<f64>>> {
    let op = assemble(chain)?;
    let mut per_window = vec![Vec::new(); windows.len()];
    for s in gap_states(&op, windows)? {
        if !s.is_end_state() {
            per_window[s.window].push(s.energy);
        }
    }
    Ok(per_window)
}

/// Grows the margin around the pattern until the interior states in the
/// windows stop moving at resolution `points_per_edge`.
pub fn sized_chain(
    flux: f64,
    alpha: f64,
    gammas: &[f64],
    points_per_edge: usize,
    windows: &[(f64, f64)],
) -> Result<TruncatedChain> {
    let mut margin = FIRST_MARGIN;
    let mut chain = TruncatedChain::centered(flux, alpha, gammas, margin, points_per_edge)?;
    let mut prev = bulk_energies(&chain, windows)?;
    while margin < MAX_MARGIN {
        margin += MARGIN_STEP;
        let next_chain = TruncatedChain::centered(flux, alpha, gammas, margin, points_per_edge)?;
        let next = bulk_energies(&next_chain, windows)?;
        let settled = prev.iter().zip(&next).all(|(a, b)| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= SIZE_TOL * x.abs().max(1.0))
        });
        chain = next_chain;
        if settled {
            return Ok(chain);
        }
        prev = next;
    }
    Err(OracleError::SolverNoConvergence(format!(
        "interior states still move with {MAX_MARGIN} margin rings"
    )))
}

pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub window: usize,
    pub n_rings: usize,
    /// (M, eigenvalue) for each resolution, ascending in M.
    pub raw: Vec<(usize, f64)>,
    /// Richardson value from the two finest resolutions.
    pub extrapolated: f64,
    /// log2 of the ratio of successive differences over the three finest resolutions.
    pub observed_order: Option<f64>,
}

/// Tracks every interior window state across resolutions doubling from one
/// to the next.
pub fn convergence_study(chain: &TruncatedChain, ms: &[usize], windows: &[(f64, f64)]) -> Result<Vec<ConvergenceRow>> {
    if ms.len() < 3 || ms.windows(2).any(|p| p[1] != 2 * p[0]) {
        return Err(OracleError::InvalidChain(
            "need at least three resolutions, each twice the previous".into(),
        ));
    }
    let levels: Vec<Vec<Vec<f64>>> = ms
        .iter()
        .map(|&m| bulk_energies(&chain.with_points(m), windows))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for w in 0..windows.len() {
        let count = levels[0][w].len();
        if levels.iter().any(|l| l[w].len() != count) {
            return Err(OracleError::FitFailed(format!(
                "window {w}: state count changes with resolution"
            )));
        }
        for i in 0..count {
            let raw: Vec<(usize, f64)> = ms.iter().zip(&levels).map(|(&m, l)| (m, l[w][i])).collect();
            let n = raw.len();
            let (e0, e1, e2) = (raw[n - 3].1, raw[n - 2].1, raw[n - 1].1);
            let d1 = (e1 - e0).abs();
            let d2 = (e2 - e1).abs();
            let observed_order = (d1 > 0.0 && d2 > 0.0).then(|| (d1 / d2).log2());
            rows.push(ConvergenceRow {
                window: w,
                n_rings: chain.n_rings,
                raw,
                extrapolated: richardson(e1, e2),
                observed_order,
            });
        }
    }
    Ok(rows)
}
