use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::Path;

use krein_dual::bloch::{band_structure, dual_hoppings, tl_limit_hopping, truncate_dual};
use krein_dual::lattice::{
    bkc_analytic_metric, bkc_dual_model, bkc_qbh, harmonic_chain_qbh, BkcParams, HarmonicChainParams,
};
use krein_dual::linalg::max_abs_diff;
use krein_dual::topology::connection_difference;
use krein_dual::{
    build_bdg, classify_stability, scan_phase_diagram, thermodynamic_stability, CMat, DualPipeline, QbhModel,
    Tolerances,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::commands::{family, BerryArgs, FamilyKind};
use crate::output::{CliError, CliResult, Run};

#[derive(Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

type Outcome = krein_dual::Result<(bool, String)>;

fn bkc(t: f64, delta: f64, s: f64, phi: f64, n: usize) -> krein_dual::Result<QbhModel> {
    bkc_qbh(&BkcParams { t, delta, s, phi, n })
}

fn chain(c_o: f64, n: usize) -> HarmonicChainParams {
    HarmonicChainParams { m: 1.0, c_o, c_nn: 2.0, n }
}

fn fixed_point(tol: &Tolerances) -> Outcome {
    let k = CMat::from_fn(4, 4, |i, j| {
        let (a, b) = (i.min(j) as f64, i.max(j) as f64);
        let z = Complex64::new(1.0 / (1.0 + a + b), 0.1 * (b - a));
        if i <= j { z } else { z.conj() }
    });
    let p = DualPipeline::run(&QbhModel::number_conserving(k)?, tol)?;
    let err = max_abs_diff(p.metric.matrix(), &CMat::identity(8, 8)).max(max_abs_diff(p.dual_bdg.matrix(), p.bdg.matrix()));
    Ok((err < 1e-10, format!("|S - 1|, |G^D - G| {err:.2e}")))
}

fn bkc_closed_form(tol: &Tolerances) -> Outcome {
    let n = 20;
    let model = bkc(1.0, 0.25, 1.0, FRAC_PI_2, n)?;
    let closed = bkc_analytic_metric(1.0, 0.25, n, tol)?;
    let comm = closed.commutator_norm(&build_bdg(&model)) / closed.max_eig();
    let p = DualPipeline::run_with_reference(&model, Some(closed.matrix()), tol)?;
    let metric = max_abs_diff(p.metric.matrix(), closed.matrix());
    let dual = max_abs_diff(&p.dual.k_dual, &bkc_dual_model(1.0, 0.25, 1.0, n)?.k_dual);
    Ok((
        comm < 1e-8 && metric < 1e-8 && dual < 1e-8 && p.dual.pairing_residual < 1e-8,
        format!("|[τ₃S,G]|/‖S‖ {comm:.2e}, |S - S_a| {metric:.2e}, |K^D - closed form| {dual:.2e}"),
    ))
}

fn pairing_dominated(tol: &Tolerances) -> Outcome {
    let r = classify_stability(&build_bdg(&bkc(1.0, 1.5, 0.0, 0.0, 10)?), tol)?;
    let refused = DualPipeline::run(&bkc(1.0, 1.5, 0.0, 0.0, 10)?, tol).is_err();
    Ok((!r.stable && refused, format!("max Im ω {:.3}, dual refused: {refused}", r.max_imag)))
}

fn phase_points(tol: &Tolerances) -> Outcome {
    let grid = [(FRAC_PI_2, 0.25), (FRAC_PI_2, 1.0), (0.0, 0.0), (0.0, 1.0), (FRAC_PI_4, 1.0)];
    let rows = scan_phase_diagram(|&(phi, s)| bkc(1.0, 0.25, s, phi, 20), &grid, tol);
    let stable = rows[..3].iter().map(|r| r.max_imag).fold(0.0, f64::max);
    let unstable = rows[3..].iter().map(|r| r.max_imag).fold(f64::INFINITY, f64::min);
    Ok((
        stable < 1e-8 && unstable > 1e-3 && rows[..3].iter().all(|r| r.stable),
        format!("stable max Im ω {stable:.2e}, unstable min Im ω {unstable:.3}"),
    ))
}

fn chain_dual(tol: &Tolerances) -> Outcome {
    let p = chain(2.0, 30);
    let band = band_structure(&p, false)?;
    let table = dual_hoppings(&band);
    let pipe = DualPipeline::run(&harmonic_chain_qbh(&p)?, tol)?;
    let circ = max_abs_diff(&pipe.dual.k_dual, &table.circulant());
    Ok((
        band.diagonalization_error < 1e-10 && circ < 1e-8,
        format!("band {:.2e}, circulant {circ:.2e}", band.diagonalization_error),
    ))
}

fn truncation() -> Outcome {
    let band = band_structure(&chain(2.0, 30), false)?;
    let table = dual_hoppings(&band);
    let errors = (0..4)
        .map(|rho| truncate_dual(&table, &band.omega, rho).map(|c| c.max_error))
        .collect::<krein_dual::Result<Vec<f64>>>()?;
    let detail = errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" > ");
    Ok((errors.windows(2).all(|w| w[1] < w[0]), detail))
}

fn gapless_limit() -> Outcome {
    let p = chain(0.0, 200);
    let table = dual_hoppings(&band_structure(&p, true)?);
    let rel = (0..4u32)
        .map(|r| {
            let tl = tl_limit_hopping(r, p.omega_nn());
            ((table.k_dual_r[r as usize].re - tl) / tl).abs()
        })
        .fold(0.0, f64::max);
    Ok((rel < 1e-3, format!("C_o = 0, N = 200, r ≤ 3: relative gap {:.3}%", 100.0 * rel)))
}

fn traces(tol: &Tolerances) -> Outcome {
    let p = DualPipeline::run(&harmonic_chain_qbh(&chain(0.5, 12))?, tol)?;
    let t = p.traces();
    Ok((
        t.rigidity_error < 1e-8 && t.inverse_error < 1e-8,
        format!("|trS - Σ1/r| {:.2e}, |trS - trS⁻¹| {:.2e}", t.rigidity_error, t.inverse_error),
    ))
}

fn connections(tol: &Tolerances) -> Outcome {
    let args = BerryArgs { family: FamilyKind::SingleMode, winding: 1, band: 0, points: 0, dk: 1e-4 };
    let fam = family(&args, tol).map_err(|e| krein_dual::DualError::Numerical(e.to_string()))?;
    let mut residual: f64 = 0.0;
    for k in [0.1, 1.3, 2.9, 5.0] {
        residual = residual.max(connection_difference(&fam, k, 1e-4)?.residual);
    }
    Ok((residual < 1e-6, format!("|A_B - A_K - correction| {residual:.2e}")))
}

fn stability_kinds(tol: &Tolerances) -> Outcome {
    let single = |d: f64| {
        QbhModel::new(CMat::from_element(1, 1, Complex64::from(1.0)), CMat::from_element(1, 1, Complex64::from(d)))
    };
    let (good, bad) = (single(0.6)?, single(1.5)?);
    let ok = thermodynamic_stability(&good, 0.0)?.stable
        && classify_stability(&build_bdg(&good), tol)?.stable
        && !thermodynamic_stability(&bad, 0.0)?.stable
        && !classify_stability(&build_bdg(&bad), tol)?.stable;
    Ok((ok, "Δ = 0.6 stable both ways, Δ = 1.5 unstable both ways".into()))
}

pub fn run(out: &Path) -> CliResult<()> {
    let tol = Tolerances::default();
    let suite: [(&'static str, Outcome); 10] = [
        ("number-conserving fixed point", fixed_point(&tol)),
        ("BKC closed-form metric and dual", bkc_closed_form(&tol)),
        ("pairing-dominated BKC refused", pairing_dominated(&tol)),
        ("BKC phase diagram points", phase_points(&tol)),
        ("harmonic chain band and dual", chain_dual(&tol)),
        ("range truncation", truncation()),
        ("gapless hopping limit", gapless_limit()),
        ("trace identities", traces(&tol)),
        ("connection identity", connections(&tol)),
        ("thermodynamic vs dynamical", stability_kinds(&tol)),
    ];
    let checks: Vec<Check> = suite
        .into_iter()
        .map(|(name, o)| match o {
            Ok((pass, detail)) => Check { name, pass, detail },
            Err(e) => Check { name, pass: false, detail: format!("error: {e}") },
        })
        .collect();
    for c in &checks {
        say!("{} {:<34} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let mut run = Run::new(out, "verify", serde_json::Value::Null, tol)?;
    run.write_json("verify.json", &checks)?;
    run.finish()?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} checks failed", checks.len())));
    }
    say!("{} checks pass", checks.len());
    Ok(())
}
