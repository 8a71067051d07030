use std::path::Path;

use clap::ValueEnum;
use krein_dual::bloch::{band_structure, dual_hoppings, tl_limit_hopping};
use krein_dual::lattice::HarmonicChainParams;
use krein_dual::Tolerances;
use serde_json::json;

use crate::commands::{band_rows, phase_rows, SweepArgs, BAND_HEADER, PHASE_HEADER};
use crate::output::{num, CliResult, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Rescaled dual hoppings and bands for several onsite stiffnesses.
    Fig1,
    /// Truncated dual bands, rho = 0..3.
    Fig2,
    /// Kitaev-chain phase diagram over (phi, s).
    Fig3,
}

const M: f64 = 1.0;
const C_NN: f64 = 2.0;
const N: usize = 30;
const FIG1_CO: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];
const FIG2_CO: f64 = 2.0;

fn chain(c_o: f64) -> HarmonicChainParams {
    HarmonicChainParams { m: M, c_o, c_nn: C_NN, n: N }
}

pub fn emit(out: &Path, figure: Figure, phi_points: usize, s_points: usize) -> CliResult<()> {
    let tol = Tolerances::default();
    match figure {
        Figure::Fig1 => fig1(out, tol),
        Figure::Fig2 => {
            let params = json!({ "figure": "fig2", "m": M, "cnn": C_NN, "co": FIG2_CO, "n": N });
            let mut run = Run::new(out, "figure fig2", params, tol)?;
            run.write_csv("bands.csv", &BAND_HEADER, &band_rows(&chain(FIG2_CO))?.0)?;
            let dir = run.finish()?;
            say!("wrote {}", dir.join("bands.csv").display());
            Ok(())
        }
        Figure::Fig3 => {
            let grid = SweepArgs {
                t: 1.0,
                delta: 0.25,
                n: 20,
                phi_points,
                s_points,
                phi_min: 0.0,
                phi_max: std::f64::consts::PI,
                s_min: 0.0,
                s_max: 1.0,
            };
            let rows = phase_rows(&grid, &tol)?;
            let mut params = serde_json::to_value(&grid)?;
            params["figure"] = json!("fig3");
            let mut run = Run::new(out, "figure fig3", params, tol)?;
            run.write_csv("phase.csv", &PHASE_HEADER, &rows)?;
            let dir = run.finish()?;
            say!("wrote {}", dir.join("phase.csv").display());
            Ok(())
        }
    }
}

/// `C_o = 0` is gapless; its table is the finite-size counterpart of the TL curve.
fn fig1(out: &Path, tol: Tolerances) -> CliResult<()> {
    let omega_nn = chain(0.0).omega_nn();
    let bands = FIG1_CO
        .iter()
        .map(|&c_o| band_structure(&chain(c_o), c_o == 0.0))
        .collect::<Result<Vec<_>, _>>()?;
    let tables: Vec<_> = bands.iter().map(dual_hoppings).collect();
    let labels: Vec<String> = FIG1_CO.iter().map(|c| format!("co_{c}")).collect();

    let mut header = vec!["r"];
    header.extend(labels.iter().map(String::as_str));
    header.push("tl_limit");
    let hop_rows: Vec<Vec<String>> = (0..N)
        .map(|r| {
            let mut row = vec![r.to_string()];
            row.extend(tables.iter().map(|t| num(t.k_dual_r[r].norm() / omega_nn)));
            row.push(num(tl_limit_hopping(r as u32, omega_nn).abs() / omega_nn));
            row
        })
        .collect();

    let mut band_header = vec!["k"];
    band_header.extend(labels.iter().map(String::as_str));
    let band_rows: Vec<Vec<String>> = (0..N)
        .map(|q| {
            let mut row = vec![num(bands[0].k_values[q])];
            row.extend(bands.iter().map(|b| num(b.omega[q] / omega_nn)));
            row
        })
        .collect();

    let params = json!({ "figure": "fig1", "m": M, "cnn": C_NN, "n": N, "co": FIG1_CO });
    let mut run = Run::new(out, "figure fig1", params, tol)?;
    run.write_csv("hoppings.csv", &header, &hop_rows)?;
    run.write_csv("band_vs_co.csv", &band_header, &band_rows)?;
    let dir = run.finish()?;
    say!("wrote {} and {}", dir.join("hoppings.csv").display(), dir.join("band_vs_co.csv").display());
    Ok(())
}
