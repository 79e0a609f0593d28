//! Weak-coupling and distant-impurity regimes.

use serde::Serialize;

use crate::band::Interval;
use crate::dispersion::{f_raw, lambda_small_from_xi, xi, xi_raw};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fit::{log_log_fit, semi_log_fit, LinearFit};
use crate::impurity::{find_roots, scan_bounds, solve_gap, ImpurityState, SolveOptions};
use crate::params::{ChainParams, PerturbationPattern};
use crate::roots::bisect;

/// The pattern epsilon * gamma for a fixed base pattern gamma.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakCouplingProblem {
    pub pattern: PerturbationPattern,
    pub epsilon: f64,
}

impl WeakCouplingProblem {
    pub fn new(pattern: PerturbationPattern, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParams(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        Ok(Self { pattern, epsilon })
    }

    pub fn scaled(&self) -> PerturbationPattern {
        self.pattern.scaled(self.epsilon)
    }

    pub fn target(&self) -> f64 {
        self.epsilon * self.pattern.sum()
    }
}

/// Offsets from the gap ends used when probing f; small enough to resolve
/// states a few 1e-13 away from a band edge.
fn inner(gap_lo: f64, gap_hi: f64) -> (f64, f64) {
    let w = gap_hi - gap_lo;
    let d = (1e-15 * gap_lo.abs().max(gap_hi.abs()).max(1.0)).max(1e-15 * w);
    (gap_lo + d, gap_hi - d)
}

/// Root of f(E) = target in the gap, by bisection; f is increasing there.
fn solve_f_equals(target: f64, gap: &Interval, params: &ChainParams) -> Option<f64> {
    let (alpha, c) = (params.alpha(), params.cos_flux());
    let h = |e: f64| f_raw(e, alpha, c) - target;
    let (mut lo, hi) = if gap.lo.is_finite() {
        inner(gap.lo, gap.hi)
    } else {
        let (lo, _) = scan_bounds(gap, &PerturbationPattern::new(vec![0.0]).ok()?, params);
        (lo, inner(lo, gap.hi).1)
    };
    if !gap.lo.is_finite() {
        // f tends to -infinity on the semi-infinite gap
        let mut tries = 0;
        while h(lo) > 0.0 && tries < 60 {
            lo = 2.0 * lo - 1.0;
            tries += 1;
        }
    }
    let (hl, hh) = (h(lo), h(hi));
    if !(hl.is_finite() && hh.is_finite()) || (hl < 0.0) == (hh < 0.0) {
        return None;
    }
    Some(bisect(h, lo, hi, hl, 0.0))
}

/// Leading-order location of the weakly bound state: the solution of
/// f(E) = epsilon * sum(gamma) in the gap, if any.
pub fn weak_predictor(gap: &Interval, problem: &WeakCouplingProblem, params: &ChainParams) -> Result<Option<f64>> {
    params.require_defined_xi()?;
    let t = problem.target();
    if t == 0.0 {
        return Ok(None);
    }
    Ok(solve_f_equals(t, gap, params))
}

/// Exact states of the scaled pattern in the gap. No edge filter is applied
/// since weakly bound states sit arbitrarily close to a band edge.
pub fn weak_exact(
    gap_index: usize,
    gap: &Interval,
    problem: &WeakCouplingProblem,
    params: &ChainParams,
) -> Result<Vec<ImpurityState>> {
    let opts = SolveOptions {
        edge_discard: 0.0,
        tol: 0.0,
    };
    solve_gap(&problem.scaled(), gap_index, gap, params, &opts)
}

/// The band edge bounding the gap, i.e. the finite end that is not a
/// flat-band energy, which a weakly bound state emerges from.
pub fn approached_edge(gap: &Interval, layout_flat: &[f64]) -> Option<f64> {
    let is_flat = |e: f64| layout_flat.iter().any(|&f| (f - e).abs() < 1e-12);
    if gap.lo.is_finite() && !is_flat(gap.lo) {
        Some(gap.lo)
    } else if !is_flat(gap.hi) {
        Some(gap.hi)
    } else {
        None
    }
}

/// Predictor and exact solution for one epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakPoint {
    pub epsilon: f64,
    pub predicted: f64,
    pub exact: f64,
    /// |E_exact - E_edge|
    pub edge_distance: f64,
    /// |E_pred - E_exact|
    pub energy_error: f64,
    /// |f(E_exact) - epsilon * sum(gamma)|
    pub coupling_remainder: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakScaling {
    pub points: Vec<WeakPoint>,
    /// exponent of edge_distance against epsilon
    pub edge_distance: LinearFit,
    /// exponent of coupling_remainder against epsilon, when it is above rounding
    pub remainder: Option<LinearFit>,
    /// exponent of energy_error against epsilon, when it is above rounding
    pub energy_error: Option<LinearFit>,
}

/// Exact and predicted state for each epsilon, with log-log fits of the
/// distance to the band edge and of the predictor error.
pub fn weak_scaling(
    gap_index: usize,
    gap: &Interval,
    edge: f64,
    pattern: &PerturbationPattern,
    params: &ChainParams,
    eps_list: &[f64],
    exec: Exec,
) -> Result<WeakScaling> {
    if eps_list.len() < 4 {
        return Err(Error::FitFailed("need at least four epsilon values".into()));
    }
    let (alpha, c) = (params.alpha(), params.cos_flux());
    let pts: Vec<Result<WeakPoint>> = exec.map(eps_list, |&eps| {
        let problem = WeakCouplingProblem::new(pattern.clone(), eps)?;
        let states = weak_exact(gap_index, gap, &problem, params)?;
        let exact = states
            .iter()
            .map(|s| s.energy)
            .min_by(|a, b| (a - edge).abs().total_cmp(&(b - edge).abs()))
            .ok_or_else(|| Error::FitFailed(format!("no state in gap {gap_index} at epsilon {eps}")))?;
        let predicted = weak_predictor(gap, &problem, params)?
            .ok_or_else(|| Error::FitFailed(format!("no predictor root at epsilon {eps}")))?;
        Ok(WeakPoint {
            epsilon: eps,
            predicted,
            exact,
            edge_distance: (exact - edge).abs(),
            energy_error: (predicted - exact).abs(),
            coupling_remainder: (f_raw(exact, alpha, c) - problem.target()).abs(),
        })
    });
    let points: Vec<WeakPoint> = pts.into_iter().collect::<Result<_>>()?;
    let eps: Vec<f64> = points.iter().map(|p| p.epsilon).collect();
    let dist: Vec<f64> = points.iter().map(|p| p.edge_distance).collect();
    let rem: Vec<f64> = points.iter().map(|p| p.coupling_remainder).collect();
    let err: Vec<f64> = points.iter().map(|p| p.energy_error).collect();
    let above_rounding = |v: &[f64], floor: f64| v.iter().all(|&e| e > floor);
    let energy_error = above_rounding(&err, 1e-14).then(|| log_log_fit(&eps, &err).ok()).flatten();
    let remainder = above_rounding(&rem, 1e-12).then(|| log_log_fit(&eps, &rem).ok()).flatten();
    Ok(WeakScaling {
        edge_distance: log_log_fit(&eps, &dist)?,
        remainder,
        energy_error,
        points,
    })
}

/// Exponent of |E_epsilon - E_edge| against epsilon.
pub fn weak_gap_distance_scaling(
    gap_index: usize,
    gap: &Interval,
    edge: f64,
    pattern: &PerturbationPattern,
    params: &ChainParams,
    eps_list: &[f64],
) -> Result<LinearFit> {
    Ok(weak_scaling(gap_index, gap, edge, pattern, params, eps_list, Exec::default())?.edge_distance)
}

/// Two couplings separated by `n` unperturbed vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistantPair {
    pub gamma1: f64,
    pub gamma2: f64,
    pub n: usize,
}

impl DistantPair {
    pub fn new(gamma1: f64, gamma2: f64, n: usize) -> Result<Self> {
        if !(gamma1.is_finite() && gamma2.is_finite()) || gamma1 == 0.0 || gamma2 == 0.0 {
            return Err(Error::InvalidParams(format!(
                "distant pair couplings must be finite and nonzero, got {gamma1}, {gamma2}"
            )));
        }
        Ok(Self { gamma1, gamma2, n })
    }

    /// The same operator as a consecutive pattern {gamma1, 0 (n times), gamma2}.
    pub fn as_pattern(&self) -> PerturbationPattern {
        PerturbationPattern::distant(self.gamma1, self.gamma2, self.n).expect("couplings validated")
    }
}

/// |lambda|^p, through logarithms for long separations.
fn lambda_power(lam: f64, p: usize) -> f64 {
    if p > 62 {
        (p as f64 * lam.abs().ln()).exp()
    } else {
        lam.abs().powi(p as i32)
    }
}

fn distant_residual_raw(energy: f64, pair: &DistantPair, alpha: f64, c: f64) -> f64 {
    let x = xi_raw(energy, alpha, c);
    let lam = lambda_small_from_xi(x);
    let f = f_raw(energy, alpha, c);
    (f / pair.gamma1 - 1.0) * (f / pair.gamma2 - 1.0) - lambda_power(lam, 2 * pair.n + 2)
}

/// (f/gamma_1 - 1)(f/gamma_2 - 1) - lambda^{2n+2}.
pub fn distant_residual(energy: f64, pair: &DistantPair, params: &ChainParams) -> Result<f64> {
    let x = xi(energy, params.alpha(), params)?;
    crate::dispersion::check_flat(energy)?;
    if x.abs() < 1.0 {
        return Err(Error::InsideBand {
            energy,
            xi_abs: x.abs(),
        });
    }
    Ok(distant_residual_raw(energy, pair, params.alpha(), params.cos_flux()))
}

/// States of the distant pair in one gap. Equal couplings split the equation
/// into the two branches f = gamma (1 +/- |lambda|^{n+1}).
pub fn distant_solve(
    pair: &DistantPair,
    gap_index: usize,
    gap: &Interval,
    params: &ChainParams,
    opts: &SolveOptions,
) -> Result<Vec<ImpurityState>> {
    params.require_defined_xi()?;
    let (alpha, c) = (params.alpha(), params.cos_flux());
    let (lo, hi) = scan_bounds(gap, &pair.as_pattern(), params);
    let in_gap = |e: f64| xi_raw(e, alpha, c).abs() >= 1.0;
    let mut roots = Vec::new();
    if pair.gamma1 == pair.gamma2 {
        let g = pair.gamma1;
        for sign in [1.0, -1.0] {
            let h = |e: f64| {
                if !in_gap(e) {
                    return f64::NAN;
                }
                let lam = lambda_small_from_xi(xi_raw(e, alpha, c));
                f_raw(e, alpha, c) / g - 1.0 - sign * lambda_power(lam, pair.n + 1)
            };
            roots.extend(find_roots(h, lo, hi, opts.tol));
        }
        roots.sort_by(f64::total_cmp);
    } else {
        let h = |e: f64| {
            if !in_gap(e) {
                return f64::NAN;
            }
            distant_residual_raw(e, pair, alpha, c)
        };
        roots = find_roots(h, lo, hi, opts.tol);
    }
    Ok(roots
        .into_iter()
        .filter(|&e| (!gap.lo.is_finite() || e - gap.lo > opts.edge_discard) && gap.hi - e > opts.edge_discard)
        .map(|e| ImpurityState {
            energy: e,
            gap_index,
            residual: distant_residual_raw(e, pair, alpha, c),
            multiplicity: 1,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingReport {
    /// (n, E_+ - E_-)
    pub splittings: Vec<[f64; 2]>,
    /// ln(splitting) against n
    pub fit: LinearFit,
    /// single-impurity root the pair converges to
    pub limit_energy: f64,
    /// ln |lambda| at the limit energy
    pub ln_lambda: f64,
}

/// Decay rate of the level splitting of an equal pair with the separation n,
/// compared with ln |lambda(E*)| at the limiting single-impurity root E*.
pub fn splitting_rate(
    gamma: f64,
    gap_index: usize,
    gap: &Interval,
    params: &ChainParams,
    n_list: &[usize],
    exec: Exec,
) -> Result<SplittingReport> {
    if n_list.len() < 4 {
        return Err(Error::FitFailed("need at least four separations".into()));
    }
    let limit_energy = solve_f_equals(gamma, gap, params)
        .ok_or_else(|| Error::FitFailed(format!("no single-impurity root in gap {gap_index}")))?;
    let ln_lambda = lambda_small_from_xi(xi(limit_energy, params.alpha(), params)?).abs().ln();
    let opts = SolveOptions::default();
    let split: Vec<Result<f64>> = exec.map(n_list, |&n| {
        let pair = DistantPair::new(gamma, gamma, n)?;
        let s = distant_solve(&pair, gap_index, gap, params, &opts)?;
        let near: Vec<f64> = s
            .iter()
            .map(|st| st.energy)
            .filter(|e| (e - limit_energy).abs() < 0.1 * gap.width().min(1.0))
            .collect();
        if near.len() != 2 {
            return Err(Error::FitFailed(format!("expected two states near the limit at n = {n}, found {}", near.len())));
        }
        Ok((near[1] - near[0]).abs())
    });
    let split: Vec<f64> = split.into_iter().collect::<Result<_>>()?;
    let ns: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let fit = semi_log_fit(&ns, &split)?;
    Ok(SplittingReport {
        splittings: ns.iter().zip(&split).map(|(&n, &s)| [n, s]).collect(),
        fit,
        limit_energy,
        ln_lambda,
    })
}
