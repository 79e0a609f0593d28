use rayon::prelude::*;
use serde::Serialize;

use ringchain::asymptotics::{approached_edge, distant_solve, splitting_rate, weak_scaling, DistantPair, SplittingReport};
use ringchain::band::{band_edges, first_band, spectrum_layout, Interval, SpectrumLayout};
use ringchain::dispersion::f_single;
use ringchain::fit::LinearFit;
use ringchain::impurity::{f_pm, solve_gap, ImpurityState, SolveOptions};
use ringchain::{ChainParams, Exec, FluxRegime, PerturbationPattern};

use crate::args::{
    BandsArgs, BandsFigure, Cli, Command, DistantArgs, FluxArgs, Format, GlobalArgs, ImpurityArgs, ImpurityFigure,
    OracleArgs, WeakArgs,
};
use crate::compare;
use crate::error::{CliError, CliResult};
use crate::output::{emit, json, Cell, Csv};

const FIG3_COS: f64 = 0.7;
const FIG3_SWEEP: &str = "-4:2:0.01";
const FIG4_COS: f64 = 0.6;
const FIG5_COS: f64 = -0.6;
const FIG5_GAMMA: [f64; 2] = [3.0, 1.0];
const FIG4_DEFAULT_GAMMA: f64 = -2.0;
const FIGURE_ALPHAS: [f64; 3] = [1.0, -1.0, -3.0];
/// Energy span shown below the first band in curve mode.
const CURVE_DEPTH: f64 = 5.0;

#[derive(Serialize)]
struct ConfigRecord<'a> {
    command: &'a Command,
    global: &'a GlobalArgs,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Runs one parsed invocation and writes its output.
pub fn run(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    if let Some(t) = g.tol_root {
        if !(t > 0.0 && t.is_finite()) {
            return Err(usage("--tol-root must be positive"));
        }
    }
    if !g.cutoff.is_finite() {
        return Err(usage("--cutoff must be finite"));
    }
    if let Some(j) = g.jobs {
        if j == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Numeric(e.to_string()))?;
    }
    let record = ConfigRecord {
        command: &cli.command,
        global: g,
    };
    let text = match &cli.command {
        Command::Bands(a) => bands(a, g, &record)?,
        Command::Impurity(a) => impurity(a, g, &record)?,
        Command::Weak(a) => weak(a, g, &record)?,
        Command::Distant(a) => distant(a, g, &record)?,
        Command::Oracle(a) => oracle(a, g, &record)?,
    };
    emit(g.out.as_deref(), &text.body)?;
    text.verdict
}

struct Outcome {
    body: String,
    /// Error to report after the output has been written.
    verdict: CliResult<()>,
}

impl From<String> for Outcome {
    fn from(body: String) -> Self {
        Self { body, verdict: Ok(()) }
    }
}

/// Flux arguments given alongside a preset must agree with it.
fn check_preset_flux(flux: &FluxArgs, cos_flux: f64) -> CliResult<()> {
    let given = match (flux.flux, flux.cos_flux) {
        (Some(a), _) => Some((a * std::f64::consts::PI).cos()),
        (None, c) => c,
    };
    match given {
        Some(c) if (c - cos_flux).abs() > 1e-12 => Err(usage(format!("this figure preset uses cos(A pi) = {cos_flux}"))),
        _ => Ok(()),
    }
}

fn params_from(flux: &FluxArgs, preset: Option<(f64, f64)>) -> CliResult<ChainParams> {
    if let Some((c, alpha)) = preset {
        check_preset_flux(flux, c)?;
        if flux.alpha.is_some_and(|a| a != alpha) {
            return Err(usage(format!("this figure preset uses alpha = {alpha}")));
        }
        return Ok(ChainParams::from_cos_flux(c, alpha)?);
    }
    let alpha = flux.alpha.unwrap_or(0.0);
    match (flux.flux, flux.cos_flux) {
        (Some(a), None) => Ok(ChainParams::new(a, alpha)?),
        (None, Some(c)) => Ok(ChainParams::from_cos_flux(c, alpha)?),
        (None, None) => Err(usage("give the flux with --A or --cosA")),
        (Some(_), Some(_)) => Err(usage("--A and --cosA are mutually exclusive")),
    }
}

fn parse_sweep(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("bad sweep '{spec}', expected lo:hi:step")))?;
    let [lo, hi, step] = parts[..] else {
        return Err(usage(format!("bad sweep '{spec}', expected lo:hi:step")));
    };
    if !(step > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
        return Err(usage(format!("bad sweep '{spec}'")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

#[derive(Serialize)]
struct SweepPoint {
    alpha: f64,
    band0: Interval,
}

fn bands(a: &BandsArgs, g: &GlobalArgs, record: &ConfigRecord) -> CliResult<Outcome> {
    let fig3 = a.figure == Some(BandsFigure::Fig3);
    let sweep = match (&a.alpha_sweep, fig3) {
        (Some(s), _) => Some(parse_sweep(s)?),
        (None, true) => Some(parse_sweep(FIG3_SWEEP)?),
        (None, false) => None,
    };
    let params = if fig3 {
        check_preset_flux(&a.flux, FIG3_COS)?;
        ChainParams::from_cos_flux(FIG3_COS, a.flux.alpha.unwrap_or(0.0))?
    } else {
        params_from(&a.flux, None)?
    };
    if let Some(alphas) = sweep {
        let points: Vec<SweepPoint> = alphas
            .par_iter()
            .map(|&alpha| {
                let band0 = first_band(&params.with_alpha(alpha)?)?;
                Ok(SweepPoint { alpha, band0 })
            })
            .collect::<ringchain::Result<_>>()?;
        return Ok(match g.format.unwrap_or(Format::Csv) {
            Format::Json => json(&points),
            Format::Csv => {
                let mut csv = Csv::new(record, &["alpha", "band0_lo", "band0_hi"]);
                for p in &points {
                    csv.row(&[p.alpha.into(), p.band0.lo.into(), p.band0.hi.into()]);
                }
                csv.finish()
            }
        }
        .into());
    }
    let layout = spectrum_layout(&params, g.cutoff)?;
    Ok(match g.format.unwrap_or(Format::Json) {
        Format::Json => json(&layout),
        Format::Csv => layout_csv(&layout, record),
    }
    .into())
}

fn layout_csv(layout: &SpectrumLayout, record: &ConfigRecord) -> String {
    let mut csv = Csv::new(record, &["kind", "index", "lo", "hi", "tag"]);
    for (i, b) in layout.bands.iter().enumerate() {
        csv.row(&["band".into(), i.into(), b.lo.into(), b.hi.into(), "".into()]);
    }
    for (i, gp) in layout.gaps.iter().enumerate() {
        csv.row(&["gap".into(), i.into(), gp.lo.into(), gp.hi.into(), "".into()]);
    }
    for (i, f) in layout.flat.iter().enumerate() {
        let tag = serde_json::to_value(f.tag).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        csv.row(&["flat".into(), i.into(), f.energy.into(), f.energy.into(), tag.as_str().into()]);
    }
    csv.finish()
}

fn figure_setup(fig: ImpurityFigure) -> (f64, f64, Option<Vec<f64>>) {
    use ImpurityFigure::*;
    match fig {
        Fig4i => (FIG4_COS, FIGURE_ALPHAS[0], None),
        Fig4ii => (FIG4_COS, FIGURE_ALPHAS[1], None),
        Fig4iii => (FIG4_COS, FIGURE_ALPHAS[2], None),
        Fig5i => (FIG5_COS, FIGURE_ALPHAS[0], Some(FIG5_GAMMA.to_vec())),
        Fig5ii => (FIG5_COS, FIGURE_ALPHAS[1], Some(FIG5_GAMMA.to_vec())),
        Fig5iii => (FIG5_COS, FIGURE_ALPHAS[2], Some(FIG5_GAMMA.to_vec())),
    }
}

fn parse_identical(spec: &str) -> CliResult<PerturbationPattern> {
    let (g, m) = spec
        .split_once(':')
        .ok_or_else(|| usage(format!("bad --identical '{spec}', expected gamma:m")))?;
    let g: f64 = g.trim().parse().map_err(|_| usage(format!("bad coupling in '{spec}'")))?;
    let m: usize = m.trim().parse().map_err(|_| usage(format!("bad count in '{spec}'")))?;
    Ok(PerturbationPattern::identical(g, m)?)
}

#[derive(Serialize)]
struct GapStates {
    index: usize,
    /// 1-based position counting the semi-infinite gap as the first
    ordinal: usize,
    interval: Interval,
    states: Vec<ImpurityState>,
}

#[derive(Serialize)]
struct ImpurityReport<'a> {
    pattern: &'a PerturbationPattern,
    regime: FluxRegime,
    gaps: Vec<GapStates>,
}

#[derive(Serialize)]
struct CurvePoint {
    gap: usize,
    #[serde(rename = "E")]
    energy: f64,
    values: Vec<f64>,
}

fn solve_options(g: &GlobalArgs) -> SolveOptions {
    SolveOptions {
        tol: g.tol_root.unwrap_or(0.0),
        ..SolveOptions::default()
    }
}

fn complete_gaps(layout: &SpectrumLayout) -> Vec<(usize, Interval)> {
    layout.complete_gaps().map(|(i, gp)| (i, *gp)).collect()
}

fn impurity(a: &ImpurityArgs, g: &GlobalArgs, record: &ConfigRecord) -> CliResult<Outcome> {
    let preset = a.figure.map(figure_setup);
    let params = params_from(&a.flux, preset.as_ref().map(|p| (p.0, p.1)))?;
    let pattern = match (&a.gamma, &a.identical, preset.as_ref().and_then(|p| p.2.clone())) {
        (Some(_), _, Some(_)) | (_, Some(_), Some(_)) => return Err(usage("this figure preset fixes the couplings")),
        (Some(gs), None, None) => PerturbationPattern::new(gs.clone())?,
        (None, Some(spec), None) => parse_identical(spec)?,
        (None, None, Some(gs)) => PerturbationPattern::new(gs)?,
        (None, None, None) if preset.is_some() => PerturbationPattern::new(vec![FIG4_DEFAULT_GAMMA])?,
        (None, None, None) => return Err(usage("give the couplings with --gamma or --identical")),
        (Some(_), Some(_), None) => return Err(usage("--gamma and --identical are mutually exclusive")),
    };
    let layout = band_edges(&params, g.cutoff)?;
    let gaps = complete_gaps(&layout);
    if a.curve {
        return curve(a, g, record, &params, &pattern, &gaps);
    }
    let opts = solve_options(g);
    let reports: Vec<GapStates> = gaps
        .par_iter()
        .map(|&(index, interval)| {
            Ok(GapStates {
                index,
                ordinal: index + 1,
                interval,
                states: solve_gap(&pattern, index, &interval, &params, &opts)?,
            })
        })
        .collect::<ringchain::Result<_>>()?;
    Ok(match g.format.unwrap_or(Format::Json) {
        Format::Json => json(&ImpurityReport {
            pattern: &pattern,
            regime: params.regime(),
            gaps: reports,
        }),
        Format::Csv => {
            let mut csv = Csv::new(record, &["gap", "ordinal", "E", "residual"]);
            for r in &reports {
                for s in &r.states {
                    csv.row(&[r.index.into(), r.ordinal.into(), s.energy.into(), s.residual.into()]);
                }
            }
            csv.finish()
        }
    }
    .into())
}

/// Interior sample energies of a gap, clustered towards both ends.
fn curve_grid(gap: &Interval, samples: usize) -> Vec<f64> {
    let lo = if gap.lo.is_finite() { gap.lo } else { gap.hi - CURVE_DEPTH };
    (0..samples)
        .map(|i| {
            let t = 0.5 * (1.0 - (std::f64::consts::PI * (i as f64 + 0.5) / samples as f64).cos());
            lo + (gap.hi - lo) * t
        })
        .collect()
}

fn curve(
    a: &ImpurityArgs,
    g: &GlobalArgs,
    record: &ConfigRecord,
    params: &ChainParams,
    pattern: &PerturbationPattern,
    gaps: &[(usize, Interval)],
) -> CliResult<Outcome> {
    if a.samples < 2 {
        return Err(usage("--samples must be at least 2"));
    }
    let gammas = pattern.gammas();
    let header: &[&str] = match gammas.len() {
        1 => &["gap", "E", "f"],
        2 => &["gap", "E", "f_minus", "f_plus"],
        _ => return Err(usage("curve mode needs one or two couplings")),
    };
    let per_gap: Vec<Vec<CurvePoint>> = gaps
        .par_iter()
        .map(|&(index, gap)| {
            curve_grid(&gap, a.samples)
                .into_iter()
                .map(|e| {
                    let values = if gammas.len() == 1 {
                        vec![f_single(e, params)?]
                    } else {
                        let (m, p) = f_pm(e, gammas[0], gammas[1], params)?;
                        vec![m, p]
                    };
                    Ok(CurvePoint {
                        gap: index,
                        energy: e,
                        values,
                    })
                })
                .collect::<ringchain::Result<Vec<_>>>()
        })
        .collect::<ringchain::Result<_>>()?;
    let points: Vec<CurvePoint> = per_gap.into_iter().flatten().collect();
    Ok(match g.format.unwrap_or(Format::Csv) {
        Format::Json => json(&points),
        Format::Csv => {
            let mut csv = Csv::new(record, header);
            for p in &points {
                let mut cells = vec![p.gap.into(), p.energy.into()];
                cells.extend(p.values.iter().map(|&v| Cell::Num(v)));
                csv.row(&cells);
            }
            csv.finish()
        }
    }
    .into())
}

fn gap_at(layout: &SpectrumLayout, index: usize) -> CliResult<Interval> {
    let gap = *layout
        .gaps
        .get(index)
        .ok_or_else(|| usage(format!("gap {index} is not below the cutoff")))?;
    if !layout.is_complete(&gap) {
        return Err(usage(format!("gap {index} is cut by the cutoff; raise --cutoff")));
    }
    Ok(gap)
}

fn fit_line(name: &str, fit: &LinearFit) -> String {
    format!("fit {name}: slope={:.6} intercept={:.6} r2={:.6}", fit.slope, fit.intercept, fit.r2)
}

fn weak(a: &WeakArgs, g: &GlobalArgs, record: &ConfigRecord) -> CliResult<Outcome> {
    let params = params_from(&a.flux, None)?;
    let pattern = PerturbationPattern::new(a.gamma.clone())?;
    let layout = band_edges(&params, g.cutoff)?;
    let gap = gap_at(&layout, a.gap)?;
    let flat: Vec<f64> = layout.flat.iter().map(|f| f.energy).collect();
    let edge = approached_edge(&gap, &flat).ok_or_else(|| usage(format!("gap {} has no band edge", a.gap)))?;
    let report = weak_scaling(a.gap, &gap, edge, &pattern, &params, &a.eps, Exec::default())?;
    let mut fits = vec![fit_line("edge_distance", &report.edge_distance)];
    if let Some(f) = &report.remainder {
        fits.push(fit_line("coupling_remainder", f));
    }
    if let Some(f) = &report.energy_error {
        fits.push(fit_line("energy_error", f));
    }
    for f in &fits {
        eprintln!("{f}");
    }
    Ok(match g.format.unwrap_or(Format::Csv) {
        Format::Json => json(&report),
        Format::Csv => {
            let mut csv = Csv::new(
                record,
                &["epsilon", "predicted", "exact", "edge_distance", "energy_error", "coupling_remainder"],
            );
            for f in &fits {
                csv.comment(f);
            }
            for p in &report.points {
                csv.row(&[
                    p.epsilon.into(),
                    p.predicted.into(),
                    p.exact.into(),
                    p.edge_distance.into(),
                    p.energy_error.into(),
                    p.coupling_remainder.into(),
                ]);
            }
            csv.finish()
        }
    }
    .into())
}

#[derive(Serialize)]
struct DistantRow {
    n: usize,
    #[serde(rename = "E")]
    energy: f64,
    residual: f64,
}

#[derive(Serialize)]
struct DistantReport {
    states: Vec<DistantRow>,
    splitting: Option<SplittingReport>,
}

fn distant(a: &DistantArgs, g: &GlobalArgs, record: &ConfigRecord) -> CliResult<Outcome> {
    let params = params_from(&a.flux, None)?;
    let layout = band_edges(&params, g.cutoff)?;
    let gap = gap_at(&layout, a.gap)?;
    let opts = solve_options(g);
    let per_n: Vec<Vec<DistantRow>> = a
        .n
        .par_iter()
        .map(|&n| {
            let pair = DistantPair::new(a.g1, a.g2, n)?;
            Ok(distant_solve(&pair, a.gap, &gap, &params, &opts)?
                .into_iter()
                .map(|s| DistantRow {
                    n,
                    energy: s.energy,
                    residual: s.residual,
                })
                .collect())
        })
        .collect::<ringchain::Result<_>>()?;
    let splitting = if a.g1 == a.g2 && a.n.len() >= 4 {
        Some(splitting_rate(a.g1, a.gap, &gap, &params, &a.n, Exec::default())?)
    } else {
        None
    };
    let mut notes = Vec::new();
    if let Some(s) = &splitting {
        notes.push(fit_line("ln_splitting_vs_n", &s.fit));
        notes.push(format!(
            "limit_energy={:.12} ln_lambda={:.6} rate_ratio={:.6}",
            s.limit_energy,
            s.ln_lambda,
            s.fit.slope / s.ln_lambda
        ));
    }
    for n in &notes {
        eprintln!("{n}");
    }
    let report = DistantReport {
        states: per_n.into_iter().flatten().collect(),
        splitting,
    };
    Ok(match g.format.unwrap_or(Format::Csv) {
        Format::Json => json(&report),
        Format::Csv => {
            let mut csv = Csv::new(record, &["n", "E", "residual"]);
            for n in &notes {
                csv.comment(n);
            }
            for r in &report.states {
                csv.row(&[r.n.into(), r.energy.into(), r.residual.into()]);
            }
            csv.finish()
        }
    }
    .into())
}

fn oracle(a: &OracleArgs, g: &GlobalArgs, record: &ConfigRecord) -> CliResult<Outcome> {
    if a.cases == 0 {
        return Err(usage("--cases must be at least 1"));
    }
    let summary = compare::run(g.seed, a.cases);
    for c in summary.cases.iter().filter(|c| !c.extrapolated_ok()) {
        eprintln!(
            "case {}: raw {:.3e}, extrapolated {:.3e}, counts match {}, end states {:?}{}",
            c.case.case,
            c.raw_max_err,
            c.extrapolated_max_err,
            c.counts_match,
            c.end_states,
            c.error.as_deref().map(|e| format!(", {e}")).unwrap_or_default()
        );
    }
    let n = summary.cases.len();
    let raw_line = format!("{}/{n} matched ≤ 1e-4", summary.raw_matched());
    let ext_line = format!("{}/{n} matched ≤ 1e-6 after extrapolation", summary.extrapolated_matched());
    eprintln!("{raw_line}");
    eprintln!("{ext_line}");
    let body = match g.format.unwrap_or(Format::Csv) {
        Format::Json => json(&summary),
        Format::Csv => {
            let mut csv = Csv::new(record, &["case", "gap", "kind", "M", "n_rings", "E_oracle", "E_char", "abs_err"]);
            for r in summary.rows() {
                let kind = if r.points == 0 { "richardson" } else { "raw" };
                let m = if r.points == 0 { compare::RESOLUTIONS[compare::RESOLUTIONS.len() - 1] } else { r.points };
                csv.row(&[
                    r.case.into(),
                    r.gap.into(),
                    kind.into(),
                    m.into(),
                    r.n_rings.into(),
                    r.e_oracle.into(),
                    r.e_char.into(),
                    r.abs_err.into(),
                ]);
            }
            csv.finish()
        }
    };
    let verdict = if summary.all_matched() {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("oracle mismatch: {raw_line}; {ext_line}")))
    };
    Ok(Outcome { body, verdict })
}
