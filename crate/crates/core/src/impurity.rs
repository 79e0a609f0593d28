//! Discrete eigenvalues created by a finite perturbation of the couplings.
//!
//! E in a gap is an eigenvalue of the perturbed chain exactly when the
//! decaying solution on the left, transported across the pattern by the
//! m-fold transfer product, leaves the pattern as the decaying solution on
//! the right:
//! Q_{m-1} lambda^2 - (P_{m-1} + Q_m) lambda + P_m = 0.

use std::f64::consts::PI;

use serde::Serialize;

use crate::band::{negative_floor_kappa, Interval, SpectrumLayout};
use crate::dispersion::{check_flat, cot_kernel, f_raw, lambda_small_from_xi, s_kernel, xi, xi_raw};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::params::{ChainParams, FluxRegime, PerturbationPattern};
use crate::roots::{bisect, golden_min};
use crate::transfer::{pq_advance, pq_state, PQState};

/// Default distance to a gap edge below which roots are dropped.
pub const EDGE_DISCARD: f64 = 1e-8;
/// Chebyshev-clustered scan points per gap.
const SCAN_POINTS: usize = 600;
/// Largest normalized residual accepted at a located root.
const ROOT_ACCEPT: f64 = 1e-6;

/// An eigenvalue of the perturbed chain inside a gap of the periodic one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImpurityState {
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(skip)]
    pub gap_index: usize,
    pub residual: f64,
    #[serde(skip)]
    pub multiplicity: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Roots closer than this to a finite gap edge are not reported.
    pub edge_discard: f64,
    /// Bisection stops once the bracket is narrower; 0 means full precision.
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            edge_discard: EDGE_DISCARD,
            tol: 0.0,
        }
    }
}

fn gap_point_checks(energy: f64, params: &ChainParams) -> Result<f64> {
    let x = xi(energy, params.alpha(), params)?;
    check_flat(energy)?;
    if x.abs() < 1.0 {
        return Err(Error::InsideBand {
            energy,
            xi_abs: x.abs(),
        });
    }
    Ok(lambda_small_from_xi(x))
}

/// Left side of the characteristic equation at a gap energy.
pub fn char_residual(energy: f64, pattern: &PerturbationPattern, params: &ChainParams) -> Result<f64> {
    let lam = gap_point_checks(energy, params)?;
    let st = pq_state(energy, pattern, params)?;
    Ok(st.q_prev * lam * lam - (st.p_prev + st.q) * lam + st.p)
}

/// The characteristic residual divided by the sum of the magnitudes of its
/// terms. Bounded by one and free of overflow for long patterns.
pub fn char_residual_normalized(
    energy: f64,
    pattern: &PerturbationPattern,
    params: &ChainParams,
) -> Result<f64> {
    let lam = gap_point_checks(energy, params)?;
    Ok(normalized_unchecked(energy, lam, pattern, params.alpha(), params.cos_flux()))
}

fn normalized_unchecked(energy: f64, lam: f64, pattern: &PerturbationPattern, alpha: f64, cos_flux: f64) -> f64 {
    let mut st = PQState::seed();
    for &g in pattern.gammas() {
        st = pq_advance(st, xi_raw(energy, alpha + g, cos_flux));
        let big = st.p.abs().max(st.q.abs()).max(st.p_prev.abs()).max(st.q_prev.abs());
        if big > 1e150 {
            st.p /= big;
            st.q /= big;
            st.p_prev /= big;
            st.q_prev /= big;
        }
    }
    let terms = [st.q_prev * lam * lam, -st.p_prev * lam, -st.q * lam, st.p];
    let sum: f64 = terms.iter().sum();
    let mag: f64 = terms.iter().map(|t| t.abs()).sum();
    if mag == 0.0 {
        0.0
    } else {
        sum / mag
    }
}

/// Finite scan interval for a gap; the semi-infinite gap is cut where no
/// eigenvalue can exist because every vertex is diagonally dominant.
pub(crate) fn scan_bounds(gap: &Interval, pattern: &PerturbationPattern, params: &ChainParams) -> (f64, f64) {
    let lo = if gap.lo.is_finite() {
        gap.lo
    } else {
        let worst = pattern
            .gammas()
            .iter()
            .map(|g| params.alpha() + g)
            .chain(std::iter::once(params.alpha()))
            .fold(0.0f64, |m, b| m.max(b.abs()));
        let kf = negative_floor_kappa(worst) + 1.0 / 64.0;
        (-kf * kf).min(gap.hi - 1.0)
    };
    (lo, gap.hi)
}

/// Scan points strictly inside (lo, hi): Chebyshev clustering plus
/// geometric ladders towards both ends.
fn scan_grid(lo: f64, hi: f64) -> Vec<f64> {
    let w = hi - lo;
    let mid = 0.5 * (lo + hi);
    let mut pts: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| mid - 0.5 * w * (PI * (i as f64 + 0.5) / SCAN_POINTS as f64).cos())
        .collect();
    for j in 2..=15 {
        let d = w * 10f64.powi(-j);
        pts.push(lo + d);
        pts.push(hi - d);
        pts.push(lo + 3.0 * d);
        pts.push(hi - 3.0 * d);
    }
    pts.retain(|&e| e > lo && e < hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Sign changes and tangential near-zeros of `g` on the open interval
/// (lo, hi), each refined to a root.
pub(crate) fn find_roots<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    let xs = scan_grid(lo, hi);
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let gmax = gs.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { m });
    let mut roots = Vec::new();
    let accept = |x: f64, roots: &mut Vec<f64>| {
        let v = g(x);
        if v.is_finite() && v.abs() <= gmax {
            roots.push(x);
        }
    };
    for i in 0..xs.len() {
        if gs[i] == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if i + 1 < xs.len() && gs[i + 1] != 0.0 && (gs[i] < 0.0) != (gs[i + 1] < 0.0) {
            let r = bisect(&g, xs[i], xs[i + 1], gs[i], tol);
            accept(r, &mut roots);
        }
        if i >= 1 && i + 1 < xs.len() {
            let s = gs[i].signum();
            let same = gs[i - 1].signum() == s && gs[i + 1].signum() == s;
            if same && gs[i].abs() < gs[i - 1].abs() && gs[i].abs() <= gs[i + 1].abs() {
                let (xm, vm) = golden_min(|x| s * g(x), xs[i - 1], xs[i + 1], 200);
                if vm < 0.0 {
                    let r1 = bisect(&g, xs[i - 1], xm, gs[i - 1], tol);
                    let r2 = bisect(&g, xm, xs[i + 1], g(xm), tol);
                    accept(r1, &mut roots);
                    accept(r2, &mut roots);
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0));
    roots
}

/// Eigenvalues of the perturbed chain inside one gap.
pub fn solve_gap(
    pattern: &PerturbationPattern,
    gap_index: usize,
    gap: &Interval,
    params: &ChainParams,
    opts: &SolveOptions,
) -> Result<Vec<ImpurityState>> {
    params.require_defined_xi()?;
    let (lo, hi) = scan_bounds(gap, pattern, params);
    let (alpha, c) = (params.alpha(), params.cos_flux());
    let g = |e: f64| {
        let x = xi_raw(e, alpha, c);
        if x.abs() < 1.0 {
            return f64::NAN;
        }
        normalized_unchecked(e, lambda_small_from_xi(x), pattern, alpha, c)
    };
    let roots = find_roots(g, lo, hi, opts.tol);
    Ok(roots
        .into_iter()
        .filter(|&e| {
            let lo_ok = !gap.lo.is_finite() || e - gap.lo > opts.edge_discard;
            lo_ok && gap.hi - e > opts.edge_discard
        })
        .filter_map(|e| {
            let r = g(e);
            (r.abs() <= ROOT_ACCEPT).then_some(ImpurityState {
                energy: e,
                gap_index,
                residual: r,
                multiplicity: 1,
            })
        })
        .collect())
}

/// The pair (f_-, f_+) for two adjacent couplings: E is an eigenvalue when
/// gamma_1 + gamma_2 equals one of them.
pub fn f_pm(energy: f64, gamma1: f64, gamma2: f64, params: &ChainParams) -> Result<(f64, f64)> {
    gap_point_checks(energy, params)?;
    let (alpha, c) = (params.alpha(), params.cos_flux());
    let f = f_raw(energy, alpha, c);
    let q = 4.0 * c / s_kernel(energy);
    let base = f - (4.0 * cot_kernel(energy) + alpha);
    let root = q.signum() * q.hypot(gamma1 - gamma2);
    Ok((base + root, base - root))
}

/// lambda_+ and lambda_- for m identical couplings at xi_1 = x, i.e. the two
/// roots (U_{m-1} +/- 1)/U_{m-2} written with half angles.
fn identical_ratios(x: f64, m: usize) -> (f64, f64) {
    let mf = m as f64;
    let y = x.abs();
    let (lp, lm) = if y == 1.0 {
        ((mf + 1.0) / (mf - 1.0), 1.0)
    } else if y < 1.0 {
        let phi = 2.0 * ((0.5 * (1.0 - y)).sqrt()).asin();
        let (a, b) = (0.5 * (mf + 1.0) * phi, 0.5 * (mf - 1.0) * phi);
        (a.sin() / b.sin(), a.cos() / b.cos())
    } else {
        let d = y - 1.0;
        let t = (d + (d * (y + 1.0)).sqrt()).ln_1p();
        let (a, b) = (0.5 * (mf + 1.0) * t, 0.5 * (mf - 1.0) * t);
        (a.sinh() / b.sinh(), a.cosh() / b.cosh())
    };
    if x >= 0.0 {
        (lp, lm)
    } else if m % 2 == 1 {
        (-lp, -lm)
    } else {
        (-lm, -lp)
    }
}

/// Right-hand sides of the two conditions for m identical couplings gamma:
/// E is an eigenvalue when gamma equals either value. Both depend on gamma
/// through xi_1; poles are returned as infinities.
pub fn identical_conditions(energy: f64, gamma: f64, m: usize, params: &ChainParams) -> Result<(f64, f64)> {
    if m < 2 {
        return Err(Error::InvalidParams("identical-array conditions need m >= 2".into()));
    }
    gap_point_checks(energy, params)?;
    let (alpha, c) = (params.alpha(), params.cos_flux());
    let x1 = xi_raw(energy, alpha + gamma, c);
    let (lp, lm) = identical_ratios(x1, m);
    let f = f_raw(energy, alpha, c);
    let q = 4.0 * c / s_kernel(energy);
    let cot_sin = lp - x1;
    let tan_sin = x1 - lm;
    Ok((f - q * cot_sin, f + q * tan_sin))
}

/// States found in one gap of the layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub index: usize,
    pub interval: Interval,
    pub states: Vec<ImpurityState>,
}

/// Runs the gap solver over every gap of the layout.
pub fn solve_layout(
    pattern: &PerturbationPattern,
    layout: &SpectrumLayout,
    params: &ChainParams,
    opts: &SolveOptions,
    exec: Exec,
) -> Result<Vec<GapReport>> {
    let gaps: Vec<(usize, Interval)> = layout.gaps.iter().copied().enumerate().collect();
    exec.map(&gaps, |(i, g)| {
        solve_gap(pattern, *i, g, params, opts).map(|states| GapReport {
            index: *i,
            interval: *g,
            states,
        })
    })
    .into_iter()
    .collect()
}

/// Number of states per gap, in gap order.
pub fn count_states_per_gap(
    pattern: &PerturbationPattern,
    layout: &SpectrumLayout,
    params: &ChainParams,
) -> Result<Vec<usize>> {
    Ok(solve_layout(pattern, layout, params, &SolveOptions::default(), Exec::default())?
        .into_iter()
        .map(|r| r.states.len())
        .collect())
}

/// Predicted number of states in a gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountPrediction {
    Exactly(usize),
    Between(usize, usize),
    /// The theorems say nothing about this gap.
    Unspecified,
}

impl CountPrediction {
    pub fn admits(&self, n: usize) -> bool {
        match *self {
            CountPrediction::Exactly(k) => n == k,
            CountPrediction::Between(a, b) => n >= a && n <= b,
            CountPrediction::Unspecified => true,
        }
    }
}

/// Counts predicted by the one- and two-impurity theorems for the first
/// `n_gaps` gaps. Gap 0 is the semi-infinite one; for non-integer flux the
/// states of an attractive perturbation sit in gaps 0, 2, 4, ...
pub fn predicted_counts(pattern: &PerturbationPattern, params: &ChainParams, n_gaps: usize) -> Vec<CountPrediction> {
    let sum = pattern.sum();
    let attractive = sum < 0.0;
    let regime = params.regime();
    let alpha_pos = params.alpha() > 0.0;
    (0..n_gaps)
        .map(|i| {
            let even = i % 2 == 0;
            match (pattern.len(), regime) {
                (1, FluxRegime::Magnetic) => CountPrediction::Exactly(usize::from(even == attractive)),
                (1, FluxRegime::NonMagnetic) => CountPrediction::Exactly(match (alpha_pos, attractive) {
                    (true, false) => 0,
                    (true, true) => 1,
                    (false, false) => usize::from(i > 0),
                    (false, true) => usize::from(i == 0),
                }),
                (2, FluxRegime::Magnetic) if sum != 0.0 => {
                    if even == attractive {
                        CountPrediction::Between(1, 2)
                    } else {
                        CountPrediction::Unspecified
                    }
                }
                _ => CountPrediction::Unspecified,
            }
        })
        .collect()
}
