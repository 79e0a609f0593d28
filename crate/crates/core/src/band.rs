//! Spectral layout of the periodic chain: bands, gaps and flat bands.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeTuple, Serializer};

use crate::dispersion::{dxi_raw, xi, xi_numerator, xi_raw};
use crate::error::{Error, Result};
use crate::params::{ChainParams, FluxRegime};
use crate::roots::bisect;

/// Step of the scan grid in k (and in kappa on the negative half-line).
const GRID_STEP: f64 = 1.0 / 64.0;
/// Number of dyadic refinement levels around each integer k.
const INTEGER_REFINE: i32 = 10;
/// Bands separated by less than this are treated as touching.
pub const GAP_MERGE: f64 = 1e-9;

/// A closed or open energy interval; `lo` may be negative infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, e: f64) -> bool {
        e >= self.lo && e <= self.hi
    }

    pub fn contains_open(&self, e: f64) -> bool {
        e > self.lo && e < self.hi
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&finite_or_none(self.lo))?;
        t.serialize_element(&finite_or_none(self.hi))?;
        t.end()
    }
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatTag {
    IntegerK,
    HalfFluxRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FlatBand {
    #[serde(rename = "E")]
    pub energy: f64,
    pub tag: FlatTag,
}

/// Bands, gaps and flat-band energies below a cutoff.
///
/// Gaps are the complement of the bands in (-inf, cutoff], split at every
/// flat-band energy, so that gap 0 is the semi-infinite gap and the last gap
/// may be truncated by the cutoff.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SpectrumLayout {
    pub regime: FluxRegime,
    pub bands: Vec<Interval>,
    pub gaps: Vec<Interval>,
    pub flat: Vec<FlatBand>,
    pub cutoff: f64,
}

impl SpectrumLayout {
    /// True when the gap ends at a genuine spectral point rather than at the cutoff.
    pub fn is_complete(&self, gap: &Interval) -> bool {
        gap.hi < self.cutoff
    }

    pub fn gap_index_of(&self, e: f64) -> Option<usize> {
        self.gaps.iter().position(|g| g.contains_open(e))
    }

    pub fn complete_gaps(&self) -> impl Iterator<Item = (usize, &Interval)> {
        self.gaps.iter().enumerate().filter(move |(_, g)| self.is_complete(g))
    }
}

/// Whether E belongs to the absolutely continuous spectrum, i.e. |xi(E)| <= 1.
pub fn in_spectrum(energy: f64, params: &ChainParams) -> Result<bool> {
    Ok(xi(energy, params.alpha(), params)?.abs() <= 1.0)
}

/// Quasimomentum theta in [-pi, pi) with cos theta = xi(E), or `None` in a gap.
pub fn quasimomentum(energy: f64, params: &ChainParams) -> Result<Option<f64>> {
    let x = xi(energy, params.alpha(), params)?;
    if x.abs() > 1.0 {
        return Ok(None);
    }
    let theta = x.acos();
    Ok(Some(if theta >= PI { -PI } else { theta }))
}

/// kappa beyond which |xi| > 1 on the negative half-line for this coupling.
///
/// For kappa > |coupling|/2 the numerator exceeds cosh - sinh/2, which is
/// larger than one once kappa >= 1/2; no band or flat root lies below.
pub(crate) fn negative_floor_kappa(coupling: f64) -> f64 {
    (0.5f64).max(0.5 * coupling.abs())
}

/// Energies of the scan grid: uniform in kappa from the certified floor to 0,
/// uniform in k up to `k_max`, with dyadic refinement around integer k.
fn scan_grid(coupling: f64, k_max: f64) -> Vec<f64> {
    let kf = negative_floor_kappa(coupling) + GRID_STEP;
    let nk = (kf / GRID_STEP).ceil() as usize;
    let mut grid = Vec::with_capacity(nk + (k_max / GRID_STEP) as usize * 2 + 64);
    for i in (1..=nk).rev() {
        let kappa = i as f64 * GRID_STEP;
        grid.push(-kappa * kappa);
    }
    let np = (k_max / GRID_STEP).ceil() as usize;
    for i in 0..=np {
        let k = i as f64 * GRID_STEP;
        grid.push(k * k);
    }
    let nmax = k_max.floor() as i64 + 1;
    for n in 1..=nmax {
        for j in 1..=INTEGER_REFINE {
            let d = GRID_STEP * 2f64.powi(-j);
            for k in [n as f64 - d, n as f64 + d] {
                if k > 0.0 && k <= k_max {
                    grid.push(k * k);
                }
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// All crossings of xi = +1 and xi = -1 on the scan grid, sorted.
fn band_edge_candidates(coupling: f64, cos_flux: f64, k_max: f64) -> Vec<f64> {
    let g = |e: f64| xi_raw(e, coupling, cos_flux);
    let dg = |e: f64| dxi_raw(e, coupling, cos_flux);
    let grid = scan_grid(coupling, k_max);
    let mut edges = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (da, db) = (dg(a), dg(b));
        let mut cuts = vec![a];
        if da != 0.0 && db != 0.0 && (da < 0.0) != (db < 0.0) {
            cuts.push(bisect(dg, a, b, da, 0.0));
        }
        cuts.push(b);
        for c in cuts.windows(2) {
            let (lo, hi) = (c[0], c[1]);
            for target in [1.0, -1.0] {
                let h = |e: f64| g(e) - target;
                let (hl, hh) = (h(lo), h(hi));
                if hl == 0.0 {
                    edges.push(lo);
                } else if hh != 0.0 && (hl < 0.0) != (hh < 0.0) {
                    edges.push(bisect(h, lo, hi, hl, 0.0));
                }
            }
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs().max(1.0));
    edges
}

/// Bands of the periodic operator up to the cutoff, found by scanning xi.
fn scan_bands(coupling: f64, cos_flux: f64, cutoff: f64) -> Vec<Interval> {
    let k_max = cutoff.max(0.0).sqrt() + 2.0 * GRID_STEP;
    let edges = band_edge_candidates(coupling, cos_flux, k_max);
    let floor = {
        let kf = negative_floor_kappa(coupling) + GRID_STEP;
        -kf * kf
    };
    let mut pts = Vec::with_capacity(edges.len() + 2);
    pts.push(floor);
    pts.extend(edges.iter().copied().filter(|&e| e > floor && e < k_max * k_max));
    pts.push(k_max * k_max);
    let mut bands: Vec<Interval> = Vec::new();
    for w in pts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if xi_raw(mid, coupling, cos_flux).abs() > 1.0 {
            continue;
        }
        match bands.last_mut() {
            Some(last) if w[0] - last.hi <= GAP_MERGE => last.hi = w[1],
            _ => bands.push(Interval::new(w[0], w[1])),
        }
    }
    bands
        .into_iter()
        .filter(|b| b.lo <= cutoff)
        .map(|b| Interval::new(b.lo, b.hi.min(cutoff)))
        .collect()
}

fn integer_flat_energies(cutoff: f64) -> Vec<f64> {
    let nmax = cutoff.max(0.0).sqrt().floor() as u64;
    (1..=nmax).map(|n| (n * n) as f64).collect()
}

/// Roots of cos k pi + (alpha/4k) sin k pi below the cutoff.
fn half_flux_roots(alpha: f64, cutoff: f64) -> Vec<f64> {
    let k_max = cutoff.max(0.0).sqrt();
    let g = |e: f64| xi_numerator(e, alpha);
    let grid = scan_grid(alpha, k_max + GRID_STEP);
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (g(a), g(b));
        if ga == 0.0 {
            roots.push(a);
        } else if gb != 0.0 && (ga < 0.0) != (gb < 0.0) {
            roots.push(bisect(g, a, b, ga, 0.0));
        }
    }
    roots.retain(|&e| e <= cutoff);
    roots.dedup();
    roots
}

/// Flat-band energies: n^2 in every regime, plus the numerator roots of xi
/// when the flux is half-integer.
pub fn flat_band_energies(params: &ChainParams, cutoff: f64) -> Vec<f64> {
    flat_bands(params, cutoff).into_iter().map(|f| f.energy).collect()
}

fn flat_bands(params: &ChainParams, cutoff: f64) -> Vec<FlatBand> {
    let mut out: Vec<FlatBand> = integer_flat_energies(cutoff)
        .into_iter()
        .map(|energy| FlatBand {
            energy,
            tag: FlatTag::IntegerK,
        })
        .collect();
    if params.is_half_integer_flux() {
        out.extend(half_flux_roots(params.alpha(), cutoff).into_iter().map(|energy| FlatBand {
            energy,
            tag: FlatTag::HalfFluxRoot,
        }));
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    out
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if cutoff.is_finite() && cutoff > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("cutoff must be positive, got {cutoff}")))
    }
}

/// Splits the complement of `bands` in (-inf, cutoff] at the given points.
fn complement_gaps(bands: &[Interval], splits: &[f64], cutoff: f64) -> Vec<Interval> {
    let mut raw = Vec::new();
    let mut lo = f64::NEG_INFINITY;
    for b in bands {
        raw.push(Interval::new(lo, b.lo));
        lo = b.hi;
    }
    if lo < cutoff {
        raw.push(Interval::new(lo, cutoff));
    }
    let mut gaps = Vec::new();
    for g in raw {
        let mut start = g.lo;
        for &s in splits {
            if s > start && s < g.hi {
                gaps.push(Interval::new(start, s));
                start = s;
            }
        }
        gaps.push(Interval::new(start, g.hi));
    }
    gaps.retain(|g| g.width() > GAP_MERGE);
    gaps
}

/// Band layout for a flux with cos(A pi) != 0.
pub fn band_edges(params: &ChainParams, cutoff: f64) -> Result<SpectrumLayout> {
    params.require_defined_xi()?;
    check_cutoff(cutoff)?;
    let bands = scan_bands(params.alpha(), params.cos_flux(), cutoff);
    if bands.is_empty() {
        return Err(Error::CutoffTooSmall { cutoff });
    }
    let flat = flat_bands(params, cutoff);
    let splits: Vec<f64> = flat.iter().map(|f| f.energy).collect();
    let gaps = complement_gaps(&bands, &splits, cutoff);
    Ok(SpectrumLayout {
        regime: params.regime(),
        bands,
        gaps,
        flat,
        cutoff,
    })
}

/// Layout in every flux regime. At half-integer flux the spectrum is pure
/// point and the gaps are the intervals between consecutive flat bands.
pub fn spectrum_layout(params: &ChainParams, cutoff: f64) -> Result<SpectrumLayout> {
    if !params.is_half_integer_flux() {
        return band_edges(params, cutoff);
    }
    check_cutoff(cutoff)?;
    let flat = flat_bands(params, cutoff);
    let splits: Vec<f64> = flat.iter().map(|f| f.energy).collect();
    let gaps = complement_gaps(&[], &splits, cutoff);
    Ok(SpectrumLayout {
        regime: FluxRegime::HalfIntegerFlux,
        bands: Vec::new(),
        gaps,
        flat,
        cutoff,
    })
}

/// The lowest spectral band.
pub fn first_band(params: &ChainParams) -> Result<Interval> {
    params.require_defined_xi()?;
    let cutoff = 1.5;
    scan_bands(params.alpha(), params.cos_flux(), cutoff)
        .first()
        .copied()
        .ok_or(Error::CutoffTooSmall { cutoff })
}

/// Samples of one ring: the upper and lower semicircle components on a
/// uniform grid of the local coordinate x in [0, pi].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSamples {
    pub x: Vec<f64>,
    pub upper: Vec<Complex64>,
    pub lower: Vec<Complex64>,
}

/// Compactly supported eigenfunction at the flat band E = n^2. Two adjacent
/// rings for non-integer flux, a single ring when A is an integer.
pub fn flat_band_eigenfunction(
    n: u64,
    params: &ChainParams,
    samples: usize,
) -> Result<Vec<EdgeSamples>> {
    if n == 0 {
        return Err(Error::InvalidParams("flat band index must be positive".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidParams("need at least two samples per edge".into()));
    }
    let k = n as f64;
    let a = params.flux();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let x: Vec<f64> = (0..samples).map(|i| PI * i as f64 / (samples - 1) as f64).collect();
    let phase = |t: f64| Complex64::from_polar(1.0, t);
    let left = EdgeSamples {
        x: x.clone(),
        upper: x.iter().map(|&t| phase(-a * t) * (k * t).sin()).collect(),
        lower: x.iter().map(|&t| -phase(a * t) * (k * t).sin()).collect(),
    };
    if params.regime() == FluxRegime::NonMagnetic {
        return Ok(vec![left]);
    }
    let right = EdgeSamples {
        x: x.clone(),
        upper: x.iter().map(|&t| -sign * phase(a * (PI - t)) * (k * t).sin()).collect(),
        lower: x.iter().map(|&t| sign * phase(a * (t - PI)) * (k * t).sin()).collect(),
    };
    Ok(vec![left, right])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::TOL_ROOT;
    use proptest::prelude::*;

    fn params(c: f64, alpha: f64) -> ChainParams {
        ChainParams::from_cos_flux(c, alpha).unwrap()
    }

    #[test]
    fn in_spectrum_examples() {
        let free = ChainParams::new(0.0, 0.0).unwrap();
        assert!(in_spectrum(0.5, &free).unwrap());
        assert!(in_spectrum(0.0, &params(0.7, -1.0)).unwrap());
        assert!(!in_spectrum(0.0, &params(0.7, 1.0)).unwrap());
        assert!(in_spectrum(1.0, &ChainParams::new(0.5, 0.0).unwrap()).is_err());
    }

    #[test]
    fn quasimomentum_examples() {
        let free = ChainParams::new(0.0, 0.0).unwrap();
        assert_eq!(quasimomentum(0.0, &free).unwrap(), Some(0.0));
        let q = quasimomentum(0.25, &free).unwrap().unwrap();
        assert!((q - PI / 2.0).abs() < 1e-12);
        let e = (0.3f64.acos() / PI).powi(2);
        let q = quasimomentum(e, &free).unwrap().unwrap();
        assert!((q - 1.266_103_672_779_499).abs() < 1e-9);
        assert_eq!(quasimomentum(1.0, &free).unwrap(), Some(-PI));
        assert_eq!(quasimomentum(-1.0, &free).unwrap(), None);
    }

    #[test]
    fn free_chain_is_one_band() {
        let free = ChainParams::new(0.0, 0.0).unwrap();
        let l = band_edges(&free, 10.0).unwrap();
        assert_eq!(l.bands.len(), 1);
        assert!(l.bands[0].lo.abs() < 1e-9 && l.bands[0].hi == 10.0);
        assert_eq!(flat_band_energies(&free, 10.0), vec![1.0, 4.0, 9.0]);
        assert_eq!(l.gaps.len(), 1);
        assert_eq!(l.gaps[0].lo, f64::NEG_INFINITY);
    }

    #[test]
    fn zero_coupling_bands_open() {
        let l = band_edges(&params(0.7, 0.0), 25.0).unwrap();
        for (i, b) in l.bands.iter().enumerate() {
            let n = i as f64;
            let expected_lo = (n + 0.7f64.acos() / PI).powi(2);
            let expected_hi = (n + 1.0 - 0.7f64.acos() / PI).powi(2);
            assert!((b.lo - expected_lo).abs() < 1e-10, "band {i} lo {}", b.lo);
            if b.hi < 25.0 {
                assert!((b.hi - expected_hi).abs() < 1e-10, "band {i} hi {}", b.hi);
            }
            assert!(b.lo > n * n && b.hi < (n + 1.0) * (n + 1.0));
        }
        assert_eq!(l.bands.len(), 5);
    }

    #[test]
    fn strongly_attractive_first_band_negative() {
        let b = first_band(&params(0.7, -10.0)).unwrap();
        assert!(b.lo < 0.0 && b.hi < 0.0);
    }

    #[test]
    fn gap_layout_splits_at_flat_points() {
        let l = band_edges(&params(0.6, 1.0), 40.0).unwrap();
        // gap 0 semi-infinite, then each period contributes two gap pieces
        assert_eq!(l.gaps[0].lo, f64::NEG_INFINITY);
        assert_eq!(l.gaps[1].hi, 1.0);
        assert_eq!(l.gaps[2].lo, 1.0);
        assert_eq!(l.gaps[3].hi, 4.0);
        assert!(l.complete_gaps().count() >= 12);
    }

    #[test]
    fn non_magnetic_edges_at_squares() {
        let pos = band_edges(&ChainParams::new(0.0, 2.0).unwrap(), 30.0).unwrap();
        for b in &pos.bands {
            if b.hi < 30.0 {
                let n = b.hi.sqrt().round();
                assert!((b.hi - n * n).abs() < TOL_ROOT, "upper edge {}", b.hi);
            }
        }
        let neg = band_edges(&ChainParams::new(0.0, -2.0).unwrap(), 30.0).unwrap();
        for b in neg.bands.iter().filter(|b| b.lo > 0.0) {
            let n = b.lo.sqrt().round();
            assert!((b.lo - n * n).abs() < TOL_ROOT, "lower edge {}", b.lo);
        }
    }

    #[test]
    fn each_period_holds_one_band() {
        for &(c, a) in &[(0.7, 1.0), (0.3, -2.0), (-0.6, 3.0), (0.95, -0.5)] {
            let l = band_edges(&params(c, a), 30.0).unwrap();
            for n in 1..5u32 {
                let (lo, hi) = ((n * n) as f64, ((n + 1) * (n + 1)) as f64);
                let inside = l.bands.iter().filter(|b| b.lo > lo && b.hi < hi).count();
                assert_eq!(inside, 1, "c={c} a={a} n={n}");
            }
        }
    }

    #[test]
    fn half_integer_layout() {
        let p = ChainParams::new(0.5, 0.0).unwrap();
        let e = flat_band_energies(&p, 1.0);
        assert!((e[0] - 0.25).abs() < 1e-12);
        assert_eq!(e[1], 1.0);
        let p4 = ChainParams::new(0.5, 4.0).unwrap();
        let r = half_flux_roots(4.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!(r[0] > 0.25 && r[0] < 1.0);
        let k = r[0].sqrt();
        assert!(((k * PI).cos() + (k * PI).sin() / k).abs() < 1e-10);
        let l = spectrum_layout(&p4, 10.0).unwrap();
        assert!(l.bands.is_empty());
        assert_eq!(l.gaps.len(), l.flat.len() + 1);
        assert!(band_edges(&p4, 10.0).is_err());
    }

    #[test]
    fn flat_eigenfunction_vertex_conditions() {
        for &(a, n) in &[(0.0, 1u64), (0.3, 1), (0.3, 2), (1.0, 3), (0.77, 4)] {
            let p = ChainParams::new(a, 1.3).unwrap();
            let samples = 4001;
            let rings = flat_band_eigenfunction(n, &p, samples).unwrap();
            let h = PI / (samples - 1) as f64;
            let d_start = |v: &[Complex64]| (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
            let d_end = |v: &[Complex64]| {
                let m = v.len() - 1;
                (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * h)
            };
            for r in &rings {
                assert!(r.upper[0].norm() < 1e-12 && r.lower[samples - 1].norm() < 1e-12);
            }
            let scale = n as f64;
            // outward derivative sums at every vertex
            let first = d_start(&rings[0].upper) + d_start(&rings[0].lower);
            assert!(first.norm() < 1e-5 * scale, "{first}");
            let last = rings.last().unwrap();
            let end = d_end(&last.upper) + d_end(&last.lower);
            assert!(end.norm() < 1e-5 * scale, "{end}");
            if rings.len() == 2 {
                let mid = -(d_end(&rings[0].upper) + d_end(&rings[0].lower))
                    + d_start(&rings[1].upper)
                    + d_start(&rings[1].lower);
                assert!(mid.norm() < 1e-5 * scale, "{mid}");
            } else {
                assert_eq!(p.regime(), FluxRegime::NonMagnetic);
            }
        }
    }

    #[test]
    fn layout_serializes_infinite_as_null() {
        let l = band_edges(&params(0.7, 1.0), 2.0).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        assert!(s.starts_with("{\"regime\":\"magnetic\",\"bands\":[["));
        assert!(s.contains("\"gaps\":[[null,"));
        assert!(s.contains("{\"E\":1.0,\"tag\":\"integer_k\"}"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn layout_tiles_and_matches_xi(c in -0.98f64..0.98, alpha in -6.0f64..6.0, seed in 0u64..1000) {
            prop_assume!(c.abs() > 0.02);
            let p = params(c, alpha);
            let l = band_edges(&p, 20.0).unwrap();
            let mut pieces: Vec<Interval> = l.bands.iter().chain(l.gaps.iter()).copied().collect();
            pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
            prop_assert_eq!(pieces[0].lo, f64::NEG_INFINITY);
            prop_assert_eq!(pieces.last().unwrap().hi, 20.0);
            for w in pieces.windows(2) {
                prop_assert!((w[1].lo - w[0].hi).abs() <= GAP_MERGE, "{:?}", w);
            }
            let span = 40.0;
            for i in 0..25 {
                let e = -20.0 + span * ((seed * 7919 + i * 104_729) % 100_000) as f64 / 100_000.0;
                let inside = l.bands.iter().any(|b| b.contains(e));
                let near_edge = l.bands.iter().any(|b| (b.lo - e).abs() < 1e-8 || (b.hi - e).abs() < 1e-8);
                if !near_edge {
                    prop_assert_eq!(inside, in_spectrum(e, &p).unwrap(), "e = {}", e);
                }
            }
        }

        #[test]
        fn invariant_under_integer_flux_shift(a in 0.02f64..0.48, alpha in -4.0f64..4.0) {
            let p = ChainParams::new(a, alpha).unwrap();
            let q = ChainParams::new(a + 1.0, alpha).unwrap();
            let lp = band_edges(&p, 10.0).unwrap();
            let lq = band_edges(&q, 10.0).unwrap();
            prop_assert_eq!(lp.bands.len(), lq.bands.len());
            for (x, y) in lp.bands.iter().zip(&lq.bands) {
                prop_assert!((x.lo - y.lo).abs() < 1e-9 && (x.hi - y.hi).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gaps_shrink_as_flux_vanishes() {
        let widths: Vec<f64> = [0.5, 0.7, 0.9, 0.97, 0.995]
            .iter()
            .map(|&c| {
                let l = band_edges(&params(c, 0.0), 10.0).unwrap();
                l.complete_gaps().skip(1).map(|(_, g)| g.width()).sum()
            })
            .collect();
        for w in widths.windows(2) {
            assert!(w[1] < w[0], "{widths:?}");
        }
    }
}
