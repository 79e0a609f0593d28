//! Agreement between characteristic-equation roots and the eigenvalues of
//! the direct discretization on random configurations.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use ringchain::band::band_edges;
use ringchain::dispersion::lambda_small;
use ringchain::impurity::{solve_gap, SolveOptions};
use ringchain::{ChainParams, FluxRegime, PerturbationPattern};
use ringchain_oracle::{assemble, convergence_study, gap_states, sized_chain, TruncatedChain};

/// Raw agreement required at the finest resolution.
pub const RAW_TOL: f64 = 1e-4;
/// Agreement required after Richardson extrapolation.
pub const EXTRAPOLATED_TOL: f64 = 1e-6;
/// Resolutions per edge, each twice the previous.
pub const RESOLUTIONS: [usize; 3] = [64, 128, 256];
/// Gaps compared, counted from the semi-infinite one.
pub const GAPS: usize = 3;
/// Truncation states tolerated per gap.
pub const MAX_END_STATES: usize = 2;

const LAYOUT_CUTOFF: f64 = 12.0;
const FLOOR: f64 = -1e4;
/// Largest |E| admitted: the raw discretization error grows like E^2 h^2 / 12.
const MAX_ABS_ENERGY: f64 = 2.5;
/// Largest decay factor admitted, which bounds the chain length needed.
const MAX_LAMBDA: f64 = 0.75;
const MAX_DRAWS: usize = 10_000;

/// Window shrink at a gap edge covering the O(h^2) shift of discretized band edges.
pub fn window_margin(edge: f64, points_per_edge: usize) -> f64 {
    let h = PI / points_per_edge as f64;
    0.25 * (1.0 + edge * edge) * h * h
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCase {
    pub case: usize,
    pub regime: FluxRegime,
    pub flux: f64,
    #[serde(rename = "cosA")]
    pub cos_flux: f64,
    pub alpha: f64,
    pub gammas: Vec<f64>,
    /// characteristic-equation roots per compared gap
    pub roots: Vec<Vec<f64>>,
    /// search windows per compared gap
    pub windows: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchRow {
    pub case: usize,
    pub gap: usize,
    /// points per edge; 0 marks the extrapolated value
    pub points: usize,
    pub n_rings: usize,
    pub e_oracle: f64,
    pub e_char: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub case: OracleCase,
    pub rows: Vec<MatchRow>,
    pub end_states: Vec<usize>,
    pub observed_orders: Vec<f64>,
    /// every root has exactly one interior oracle state and vice versa
    pub counts_match: bool,
    pub raw_max_err: f64,
    pub extrapolated_max_err: f64,
    pub error: Option<String>,
}

impl CaseReport {
    pub fn raw_ok(&self) -> bool {
        self.error.is_none()
            && self.counts_match
            && self.raw_max_err <= RAW_TOL
            && self.end_states.iter().all(|&n| n <= MAX_END_STATES)
    }

    pub fn extrapolated_ok(&self) -> bool {
        self.raw_ok() && self.extrapolated_max_err <= EXTRAPOLATED_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub seed: u64,
    pub cases: Vec<CaseReport>,
}

impl OracleSummary {
    pub fn raw_matched(&self) -> usize {
        self.cases.iter().filter(|c| c.raw_ok()).count()
    }

    pub fn extrapolated_matched(&self) -> usize {
        self.cases.iter().filter(|c| c.extrapolated_ok()).count()
    }

    pub fn all_matched(&self) -> bool {
        self.cases.iter().all(CaseReport::extrapolated_ok)
    }

    pub fn rows(&self) -> impl Iterator<Item = &MatchRow> {
        self.cases.iter().flat_map(|c| c.rows.iter())
    }
}

fn draw_params(rng: &mut ChaCha8Rng) -> (f64, ChainParams) {
    let alpha = rng.gen_range(-2.5..2.5);
    let flux = if rng.gen_bool(0.75) {
        let c: f64 = rng.gen_range(0.1..0.95) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        c.acos() / PI
    } else {
        0.0
    };
    (flux, ChainParams::new(flux, alpha).expect("finite draw"))
}

/// Draws a configuration whose roots all lie in the range the discretization
/// resolves; even cases carry a negative root, odd cases a positive one.
fn draw_case(case: usize, rng: &mut ChaCha8Rng) -> Option<OracleCase> {
    let coarse = RESOLUTIONS[0];
    for _ in 0..MAX_DRAWS {
        let (flux, params) = draw_params(rng);
        let m = rng.gen_range(1..=3);
        let gammas: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let pattern = PerturbationPattern::new(gammas.clone()).expect("finite draw");
        let Ok(layout) = band_edges(&params, LAYOUT_CUTOFF) else { continue };
        if layout.gaps.len() < GAPS || layout.gaps[..GAPS].iter().any(|g| !layout.is_complete(g)) {
            continue;
        }
        let mut roots = Vec::with_capacity(GAPS);
        let mut windows = Vec::with_capacity(GAPS);
        let mut admissible = true;
        for (i, gap) in layout.gaps[..GAPS].iter().enumerate() {
            let lo = if i == 0 { FLOOR } else { gap.lo + window_margin(gap.lo, coarse) };
            let hi = gap.hi - window_margin(gap.hi, coarse);
            let Ok(states) = solve_gap(&pattern, i, gap, &params, &SolveOptions::default()) else {
                admissible = false;
                break;
            };
            let r: Vec<f64> = states.iter().map(|s| s.energy).collect();
            admissible &= r.iter().all(|&e| {
                let clear_lo = !gap.lo.is_finite() || e - gap.lo > 3.0 * window_margin(gap.lo, coarse);
                let clear_hi = gap.hi - e > 3.0 * window_margin(gap.hi, coarse);
                let lam = lambda_small(e, params.alpha(), &params).map(f64::abs).unwrap_or(1.0);
                e.abs() <= MAX_ABS_ENERGY && clear_lo && clear_hi && lam <= MAX_LAMBDA
            });
            admissible &= hi > lo;
            roots.push(r);
            windows.push((lo, hi));
        }
        let all: Vec<f64> = roots.iter().flatten().copied().collect();
        let wanted_sign = if case % 2 == 0 { all.iter().any(|&e| e < 0.0) } else { all.iter().any(|&e| e > 0.0) };
        if admissible && wanted_sign {
            return Some(OracleCase {
                case,
                regime: params.regime(),
                flux,
                cos_flux: params.cos_flux(),
                alpha: params.alpha(),
                gammas,
                roots,
                windows,
            });
        }
    }
    None
}

/// Deterministic list of `count` configurations for `seed`.
pub fn draw_cases(seed: u64, count: usize) -> Vec<Option<OracleCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| draw_case(i, &mut rng)).collect()
}

fn compare_case(case: OracleCase) -> CaseReport {
    let mut report = CaseReport {
        case,
        rows: Vec::new(),
        end_states: Vec::new(),
        observed_orders: Vec::new(),
        counts_match: false,
        raw_max_err: f64::INFINITY,
        extrapolated_max_err: f64::INFINITY,
        error: None,
    };
    if let Err(e) = fill_report(&mut report) {
        report.error = Some(e);
    }
    report
}

fn fill_report(report: &mut CaseReport) -> Result<(), String> {
    let c = &report.case;
    let chain = sized_chain(c.flux, c.alpha, &c.gammas, RESOLUTIONS[0], &c.windows).map_err(|e| e.to_string())?;
    let conv = convergence_study(&chain, &RESOLUTIONS, &c.windows).map_err(|e| e.to_string())?;
    let fine = assemble(&chain.with_points(RESOLUTIONS[RESOLUTIONS.len() - 1])).map_err(|e| e.to_string())?;
    let states = gap_states(&fine, &c.windows).map_err(|e| e.to_string())?;
    report.end_states = (0..GAPS)
        .map(|g| states.iter().filter(|s| s.window == g && s.is_end_state()).count())
        .collect();
    report.observed_orders = conv.iter().filter_map(|r| r.observed_order).collect();
    let mut counts_match = true;
    let (mut raw_max, mut ext_max) = (0.0f64, 0.0f64);
    for (g, roots) in c.roots.iter().enumerate() {
        let rows: Vec<_> = conv.iter().filter(|r| r.window == g).collect();
        if rows.len() != roots.len() {
            counts_match = false;
            continue;
        }
        for (row, &root) in rows.iter().zip(roots) {
            for &(points, e) in &row.raw {
                report.rows.push(MatchRow {
                    case: c.case,
                    gap: g,
                    points,
                    n_rings: chain.n_rings,
                    e_oracle: e,
                    e_char: root,
                    abs_err: (e - root).abs(),
                });
            }
            let finest = row.raw[row.raw.len() - 1].1;
            raw_max = raw_max.max((finest - root).abs());
            ext_max = ext_max.max((row.extrapolated - root).abs());
            report.rows.push(MatchRow {
                case: c.case,
                gap: g,
                points: 0,
                n_rings: chain.n_rings,
                e_oracle: row.extrapolated,
                e_char: root,
                abs_err: (row.extrapolated - root).abs(),
            });
        }
    }
    report.counts_match = counts_match;
    report.raw_max_err = raw_max;
    report.extrapolated_max_err = ext_max;
    Ok(())
}

/// Draws `count` configurations from `seed` and compares each one.
pub fn run(seed: u64, count: usize) -> OracleSummary {
    let drawn = draw_cases(seed, count);
    let cases = drawn
        .into_par_iter()
        .enumerate()
        .map(|(i, c)| match c {
            Some(c) => compare_case(c),
            None => CaseReport {
                case: OracleCase {
                    case: i,
                    regime: FluxRegime::Magnetic,
                    flux: f64::NAN,
                    cos_flux: f64::NAN,
                    alpha: f64::NAN,
                    gammas: Vec::new(),
                    roots: Vec::new(),
                    windows: Vec::new(),
                },
                rows: Vec::new(),
                end_states: Vec::new(),
                observed_orders: Vec::new(),
                counts_match: false,
                raw_max_err: f64::INFINITY,
                extrapolated_max_err: f64::INFINITY,
                error: Some("no admissible configuration drawn".into()),
            },
        })
        .collect();
    OracleSummary { seed, cases }
}

/// The chain a case is compared on, for inspection.
pub fn case_chain(case: &OracleCase) -> Option<TruncatedChain> {
    sized_chain(case.flux, case.alpha, &case.gammas, RESOLUTIONS[0], &case.windows).ok()
}
