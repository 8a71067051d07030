use std::f64::consts::PI;
use std::path::Path;

use clap::{Args, ValueEnum};
use krein_dual::bloch::{band_structure, dual_hoppings, tl_limit_hopping, truncate_dual, BandStructure};
use krein_dual::lattice::{bkc_analytic_metric, bkc_qbh, default_offset, BkcParams, HarmonicChainParams};
use krein_dual::model::entries_of;
use krein_dual::topology::{
    connection_difference, loop_phase, single_mode_model, squeeze_from_pairing, squeezed_model, LoopStates,
    ParamFamily,
};
use krein_dual::{
    build_bdg, classify_stability, scan_phase_diagram, thermodynamic_stability, CMat, DualPipeline, Tolerances,
};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::args::{ChainArgs, ModelArgs, Preset};
use crate::output::{num, CliError, CliResult, Run};

const PAIRING_DOMINATED: &str = "dynamically unstable (pairing-dominated regime)";

pub fn stability(out: &Path, args: &ModelArgs, tol: &Tolerances) -> CliResult<()> {
    let model = args.load()?;
    let report = classify_stability(&build_bdg(&model), tol)?;
    let thermo = thermodynamic_stability(&model, tol.validation)?;
    let eigenvalues: Vec<[f64; 2]> = report.eigenvalues.iter().map(|z| [z.re, z.im]).collect();
    let body = json!({
        "dynamically_stable": report.stable,
        "max_imag": report.max_imag,
        "diagonalizable": report.diagonalizable,
        "gram_condition": finite_or_null(report.gram_condition),
        "thermodynamically_stable": thermo.stable,
        "thermodynamic_margin": thermo.margin,
        "eigenvalues": eigenvalues,
    });
    let mut run = Run::new(out, "stability", args.manifest(), *tol)?;
    run.write_json("stability.json", &body)?;
    run.finish()?;
    say!(
        "dynamically stable: {}  max |Im ω| = {:e}  thermodynamically stable: {}",
        report.stable, report.max_imag, thermo.stable
    );
    if report.stable {
        Ok(())
    } else {
        Err(unstable(args, report.max_imag))
    }
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

fn unstable(args: &ModelArgs, max_imag: f64) -> CliError {
    if args.model == Some(Preset::Bkc) && args.delta > args.t {
        CliError::Unstable(PAIRING_DOMINATED.into())
    } else {
        CliError::Unstable(format!("dynamically unstable (max |Im ω| = {max_imag:e})"))
    }
}

#[derive(Serialize)]
struct DualOutput {
    #[serde(rename = "K_dual")]
    k_dual: Vec<Vec<krein_dual::model::ComplexEntry>>,
    pairing_residual: f64,
    spectrum_error: f64,
    offset_dual: f64,
    /// Basis choice inside degenerate eigenspaces.
    reference: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    j0: Option<f64>,
}

pub fn dualize(out: &Path, args: &ModelArgs, tol: &Tolerances, csv: bool) -> CliResult<()> {
    let model = args.load()?;
    let report = classify_stability(&build_bdg(&model), tol)?;
    if !report.stable {
        return Err(unstable(args, report.max_imag));
    }
    // The Kitaev chain has degenerate mixed-sign doublets, so its metric is
    // not unique; the closed form picks the symmetric squeeze centred on the chain.
    let closed = match args.model {
        Some(Preset::Bkc) if args.delta < args.t => bkc_analytic_metric(args.t, args.delta, args.n, tol).ok(),
        _ => None,
    };
    let (pipeline, reference, j0) = match closed
        .as_ref()
        .map(|m| DualPipeline::run_with_reference(&model, Some(m.matrix()), tol))
    {
        Some(Ok(p)) => (p, "bkc-closed-form", Some(default_offset(args.n))),
        _ => (DualPipeline::run(&model, tol)?, "canonical", None),
    };
    let dual = &pipeline.dual;
    let body = DualOutput {
        k_dual: entries_of(&dual.k_dual),
        pairing_residual: dual.pairing_residual,
        spectrum_error: dual.spectrum_error,
        offset_dual: dual.offset_dual,
        reference: reference.into(),
        j0,
    };
    let mut run = Run::new(out, "dualize", args.manifest(), *tol)?;
    run.write_json("dual.json", &body)?;
    if csv {
        let n = dual.k_dual.nrows();
        let rows: Vec<Vec<String>> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let z = dual.k_dual[(i, j)];
                vec![i.to_string(), j.to_string(), num(z.re), num(z.im)]
            })
            .collect();
        run.write_csv("k_dual.csv", &["i", "j", "re", "im"], &rows)?;
    }
    run.finish()?;
    say!("{}", serde_json::to_string_pretty(&body)?);
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 61)]
    pub phi_points: usize,
    #[arg(long, default_value_t = 51)]
    pub s_points: usize,
    #[arg(long, default_value_t = 0.0)]
    pub phi_min: f64,
    #[arg(long, default_value_t = PI)]
    pub phi_max: f64,
    #[arg(long, default_value_t = 0.0)]
    pub s_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s_max: f64,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Rows `phi, s, max_imag, stable` in phi-major order.
pub fn phase_rows(grid: &SweepArgs, tol: &Tolerances) -> CliResult<Vec<Vec<String>>> {
    if grid.phi_points == 0 || grid.s_points == 0 {
        return Err(CliError::Failed("grid needs at least one point per axis".into()));
    }
    let points: Vec<(f64, f64)> = linspace(grid.phi_min, grid.phi_max, grid.phi_points)
        .into_iter()
        .flat_map(|phi| linspace(grid.s_min, grid.s_max, grid.s_points).into_iter().map(move |s| (phi, s)))
        .collect();
    let base = BkcParams { t: grid.t, delta: grid.delta, s: 0.0, phi: 0.0, n: grid.n };
    base.validate()?;
    let rows = scan_phase_diagram(|&(phi, s)| bkc_qbh(&BkcParams { s, phi, ..base }), &points, tol);
    rows.iter()
        .map(|r| match &r.error {
            Some(e) => Err(CliError::Failed(format!("at phi = {}, s = {}: {e}", r.point.0, r.point.1))),
            None => Ok(vec![num(r.point.0), num(r.point.1), num(r.max_imag), r.stable.to_string()]),
        })
        .collect()
}

pub const PHASE_HEADER: [&str; 4] = ["param1", "param2", "max_imag", "stable"];

pub fn sweep(out: &Path, grid: &SweepArgs, tol: &Tolerances) -> CliResult<()> {
    let rows = phase_rows(grid, tol)?;
    let mut run = Run::new(out, "sweep", serde_json::to_value(grid)?, *tol)?;
    run.write_csv("phase.csv", &PHASE_HEADER, &rows)?;
    let dir = run.finish()?;
    let stable = rows.iter().filter(|r| r[3] == "true").count();
    say!("{stable}/{} grid points stable; wrote {}", rows.len(), dir.join("phase.csv").display());
    Ok(())
}

fn gapped_band(p: &HarmonicChainParams) -> CliResult<BandStructure> {
    Ok(band_structure(p, false)?)
}

/// Rows `k, omega, omega_trunc_rho0..3`.
pub fn band_rows(p: &HarmonicChainParams) -> CliResult<(Vec<Vec<String>>, Vec<f64>)> {
    let band = gapped_band(p)?;
    let table = dual_hoppings(&band);
    let cuts = (0..4).map(|rho| truncate_dual(&table, &band.omega, rho)).collect::<Result<Vec<_>, _>>()?;
    let rows = (0..band.n())
        .map(|q| {
            let mut row = vec![num(band.k_values[q]), num(band.omega[q])];
            row.extend(cuts.iter().map(|c| num(c.band[q])));
            row
        })
        .collect();
    Ok((rows, cuts.iter().map(|c| c.max_error).collect()))
}

pub const BAND_HEADER: [&str; 6] =
    ["k", "omega", "omega_trunc_rho0", "omega_trunc_rho1", "omega_trunc_rho2", "omega_trunc_rho3"];

pub fn bands(out: &Path, chain: &ChainArgs) -> CliResult<()> {
    let (rows, errors) = band_rows(&chain.params())?;
    let mut run = Run::new(out, "bands", serde_json::to_value(chain)?, Tolerances::default())?;
    run.write_csv("bands.csv", &BAND_HEADER, &rows)?;
    run.finish()?;
    for (rho, e) in errors.iter().enumerate() {
        say!("rho = {rho}: max band error {e:e}");
    }
    Ok(())
}

pub fn hoppings(out: &Path, chain: &ChainArgs) -> CliResult<()> {
    let p = chain.params();
    let table = dual_hoppings(&gapped_band(&p)?);
    let omega_nn = p.omega_nn();
    let rows: Vec<Vec<String>> = table
        .k_dual_r
        .iter()
        .enumerate()
        .map(|(r, z)| vec![r.to_string(), num(z.re), num(tl_limit_hopping(r as u32, omega_nn))])
        .collect();
    let mut run = Run::new(out, "hoppings", serde_json::to_value(chain)?, Tolerances::default())?;
    run.write_csv("hoppings.csv", &["r", "K_dual_r", "tl_limit"], &rows)?;
    run.finish()?;
    say!("K_dual_0 = {}, |K_dual_1| = {:e}", table.k_dual_r[0].re, table.k_dual_r[1 % table.n()].norm());
    Ok(())
}

pub fn truncate(out: &Path, chain: &ChainArgs, rho: usize) -> CliResult<()> {
    let band = gapped_band(&chain.params())?;
    let cut = truncate_dual(&dual_hoppings(&band), &band.omega, rho)?;
    let rows: Vec<Vec<String>> = (0..band.n())
        .map(|q| vec![num(band.k_values[q]), num(band.omega[q]), num(cut.band[q])])
        .collect();
    let min_gap = cut.band.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut params = serde_json::to_value(chain)?;
    params["rho"] = json!(rho);
    let mut run = Run::new(out, "truncate", params, Tolerances::default())?;
    run.write_csv("truncation.csv", &["k", "omega", "omega_trunc"], &rows)?;
    run.write_json("truncation.json", &json!({ "rho": rho, "max_error": cut.max_error, "min_omega": min_gap }))?;
    run.finish()?;
    say!("rho = {rho}: max band error {:e}, min ω^ρ {min_gap}", cut.max_error);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// One mode with K = 1 + 0.3 cos k and Δ = (0.4 + 0.2 sin k) e^{iwk}.
    SingleMode,
    /// Two modes, fixed squeeze around a k-dependent hopping matrix.
    Squeeze,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BerryArgs {
    #[arg(long, value_enum, default_value_t = FamilyKind::SingleMode)]
    pub family: FamilyKind,
    /// Pairing winding of the single-mode family.
    #[arg(long, default_value_t = 1)]
    pub winding: i32,
    #[arg(long, default_value_t = 0)]
    pub band: usize,
    /// Samples around the loop k ∈ [0, 2π).
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-4)]
    pub dk: f64,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn squeeze_hopping(k: f64) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[c(2.0 + 0.5 * k.cos(), 0.0), Complex64::from_polar(0.6, k), Complex64::from_polar(0.6, -k), c(3.0 + 0.3 * k.sin(), 0.0)],
    )
}

pub fn family(args: &BerryArgs, tol: &Tolerances) -> CliResult<ParamFamily> {
    let mut fam = match args.family {
        FamilyKind::SingleMode => {
            let w = args.winding;
            ParamFamily::new(move |k| single_mode_model(k, w), args.band)
        }
        FamilyKind::Squeeze => {
            let b = CMat::from_row_slice(2, 2, &[c(0.3, 0.1), c(-0.2, 0.15), c(-0.2, 0.15), c(0.1, -0.25)]);
            let map = squeeze_from_pairing(&b, tol)?;
            ParamFamily::new(move |k| squeezed_model(&map, &squeeze_hopping(k)), args.band)
        }
    };
    fam.tol = *tol;
    Ok(fam)
}

pub fn berry(out: &Path, args: &BerryArgs, tol: &Tolerances) -> CliResult<()> {
    if args.points < 2 {
        return Err(CliError::Failed("--points must be at least 2".into()));
    }
    let fam = family(args, tol)?;
    let ks: Vec<f64> = (0..args.points).map(|j| 2.0 * PI * j as f64 / args.points as f64).collect();
    let mut rows = Vec::with_capacity(ks.len());
    let mut worst: f64 = 0.0;
    for &k in &ks {
        let s = connection_difference(&fam, k, args.dk)?;
        worst = worst.max(s.residual);
        rows.push(vec![num(k), num(s.a_k), num(s.a_b), num(s.correction), num(s.commutator_norm)]);
    }
    let phases = loop_phase(&LoopStates::sample(&fam, &ks)?)?;
    let mut run = Run::new(out, "berry", serde_json::to_value(args)?, *tol)?;
    run.write_csv("connections.csv", &["k", "A_K", "A_B", "correction", "commutator_norm"], &rows)?;
    run.write_json(
        "loop.json",
        &json!({ "krein_phase": phases.krein, "berry_phase": phases.berry, "max_identity_residual": worst }),
    )?;
    run.finish()?;
    say!(
        "loop phases: Krein {:.12}, Berry {:.12}; max |A_B - A_K - correction| = {worst:e}",
        phases.krein, phases.berry
    );
    Ok(())
}

pub fn emit_model(out: &Path, args: &ModelArgs) -> CliResult<()> {
    let text = args.load()?.to_json();
    let mut run = Run::new(out, "model emit", args.manifest(), Tolerances::default())?;
    run.write_text("model.json", &format!("{text}\n"))?;
    run.finish()?;
    say!("{text}");
    Ok(())
}
