//! Experiment drivers. Each one composes library calls into a set of
//! plot-ready files; nothing here touches the filesystem except [`run`].

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;
use skinwalk::entanglement;
use skinwalk::floquet::{self, Integration, LyapunovWindow};
use skinwalk::io::{self, RunDocument};
use skinwalk::lattice::{Boundary, LatticeSpec};
use skinwalk::nonbloch;
use skinwalk::pair::{self, PairEvolution, PairOptions};
use skinwalk::C64;

use crate::config::{Experiment, Format, RunConfig};
use crate::error::{HarnessError, Result};
use crate::manifest::{self, OutputSet, RunManifest};
use crate::svg;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub format: Format,
    pub svg: bool,
}

/// Execute one experiment and write its files plus a manifest into `out`.
pub fn run(config: &RunConfig, out: &Path, options: RunOptions) -> Result<RunManifest> {
    config.validate()?;
    let started = Instant::now();
    let run_id = manifest::run_id(config);
    let files = build_outputs(config, &run_id, options)?;
    let outputs = files.write(out)?;
    let manifest = RunManifest {
        run_id,
        experiment: config.experiment.name().into(),
        figure: config.experiment.figure().into(),
        config: serde_json::to_value(config).expect("config serializes"),
        software_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let path = out.join(manifest::MANIFEST_FILE);
    if let Err(e) = std::fs::write(&path, text) {
        let written: Vec<_> = manifest.outputs.iter().map(|o| out.join(&o.path)).collect();
        manifest::remove_all(&written);
        return Err(HarnessError::io(&path)(e));
    }
    Ok(manifest)
}

/// Produce the experiment's files in memory.
pub fn build_outputs(config: &RunConfig, run_id: &str, options: RunOptions) -> Result<OutputSet> {
    let mut files = OutputSet::default();
    match config.experiment {
        Experiment::SingleWalk => single_walk(config, run_id, options, &mut files)?,
        Experiment::PairWalk => pair_walk(config, run_id, options, &mut files)?,
        Experiment::LyapunovSweep => lyapunov_sweep(config, run_id, options, &mut files)?,
        Experiment::Spectra => spectra(config, run_id, options, &mut files)?,
        Experiment::Gbz => gbz(config, run_id, options, &mut files)?,
        Experiment::EntropyCurve => entropy_curve(config, run_id, options, &mut files)?,
        Experiment::Table1 => table1(config, run_id, options, &mut files)?,
    }
    Ok(files)
}

fn csv_text(r: skinwalk::Result<String>, stage: &str) -> Result<String> {
    r.map_err(HarnessError::stage(stage))
}

#[derive(Debug, Serialize)]
struct Payload<T> {
    experiment: &'static str,
    figure: &'static str,
    results: Vec<T>,
}

fn emit_json<T: Serialize>(
    config: &RunConfig,
    run_id: &str,
    results: Vec<T>,
    files: &mut OutputSet,
) -> Result<()> {
    let payload = Payload {
        experiment: config.experiment.name(),
        figure: config.experiment.figure(),
        results,
    };
    let doc = RunDocument::new(run_id, &config.lattice, payload).map_err(HarnessError::stage("json export"))?;
    let text = doc.to_json().map_err(HarnessError::stage("json export"))?;
    files.add(format!("{}.json", config.experiment.name()), text);
    Ok(())
}

fn per_phase<T, F>(config: &RunConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    config.phases().into_par_iter().map(|phi| f(phi)).collect()
}

#[derive(Debug, Serialize)]
pub struct SingleWalkResult {
    pub phi: f64,
    pub injection: usize,
    pub periods: Vec<usize>,
    pub raw: Vec<Vec<f64>>,
    pub normalized: Vec<Vec<f64>>,
    pub center_shift: Vec<f64>,
}

pub fn single_walk_result(config: &RunConfig, phi: f64) -> Result<SingleWalkResult> {
    let spec = config.lattice.clone().with_phase(phi);
    let n0 = config.injection_ordinals()[0];
    let u = floquet::transmission_matrix(&spec, &config.integration())
        .map_err(HarnessError::stage("transmission matrix"))?;
    let (mut raw, mut normalized, mut center_shift) = (Vec::new(), Vec::new(), Vec::new());
    for &k in &config.periods {
        let d = floquet::intensity_distribution(&u.power(k), n0).map_err(HarnessError::stage("intensity"))?;
        let c = floquet::packet_center(&d.raw).map_err(HarnessError::stage("packet center"))?;
        center_shift.push(c - n0 as f64);
        raw.push(d.raw);
        normalized.push(d.normalized);
    }
    Ok(SingleWalkResult {
        phi,
        injection: n0 + 1,
        periods: config.periods.clone(),
        raw,
        normalized,
        center_shift,
    })
}

fn single_walk(config: &RunConfig, run_id: &str, options: RunOptions, files: &mut OutputSet) -> Result<()> {
    let results = per_phase(config, |phi| single_walk_result(config, phi))?;
    if options.svg {
        for (i, r) in results.iter().enumerate() {
            let labels: Vec<String> = r.periods.iter().map(|k| format!("{k}T")).collect();
            let series: Vec<svg::Series> = r
                .normalized
                .iter()
                .zip(&labels)
                .map(|(p, label)| svg::Series {
                    label,
                    points: p.iter().enumerate().map(|(n, &v)| ((n + 1) as f64, v)).collect(),
                })
                .collect();
            files.add(
                format!("single_walk_phi{i}.svg"),
                svg::line_plot(&format!("intensity, φ = {:.4}", r.phi), &series),
            );
        }
    }
    match options.format {
        Format::Json => emit_json(config, run_id, results, files),
        Format::Csv => {
            for (i, r) in results.iter().enumerate() {
                let n = config.lattice.n_straight;
                let mut names = vec!["site".to_string()];
                let mut cols = vec![(1..=n).map(|s| s as f64).collect::<Vec<_>>()];
                for (j, k) in r.periods.iter().enumerate() {
                    names.push(format!("p_{k}T"));
                    cols.push(r.normalized[j].clone());
                    names.push(format!("raw_{k}T"));
                    cols.push(r.raw[j].clone());
                }
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                files.add(format!("single_walk_phi{i}.csv"), csv_text(io::columns_csv(&names, &cols), "csv export")?);
            }
            let phis: Vec<f64> = results.iter().flat_map(|r| r.periods.iter().map(move |_| r.phi)).collect();
            let ks: Vec<f64> = results.iter().flat_map(|r| r.periods.iter().map(|&k| k as f64)).collect();
            let shifts: Vec<f64> = results.iter().flat_map(|r| r.center_shift.clone()).collect();
            files.add(
                "single_walk_centers.csv",
                csv_text(io::columns_csv(&["phi", "k", "center_shift"], &[phis, ks, shifts]), "csv export")?,
            );
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PairWalkResult {
    pub phi: f64,
    pub injection: (usize, usize),
    pub periods: Vec<usize>,
    pub survival_p2: Vec<f64>,
    /// Post-selected coincidences from the master equation.
    pub gamma: Vec<Array2<f64>>,
    /// Post-selected coincidences from the transmission matrix.
    pub gamma_via_u: Vec<Array2<f64>>,
}

pub fn pair_walk_result(config: &RunConfig, phi: f64) -> Result<PairWalkResult> {
    let spec = config.lattice.clone().with_phase(phi);
    let inj = config.injection_ordinals();
    let (n0, m0) = (inj[0], inj[1]);
    let opts = PairOptions {
        integration: config.integration(),
        ..PairOptions::default()
    };
    let engine = PairEvolution::new(&spec, opts).map_err(HarnessError::stage("pair engine"))?;
    let u = floquet::transmission_matrix(&spec, &config.integration())
        .map_err(HarnessError::stage("transmission matrix"))?;
    let initial = pair::initial_pair_state(&spec, n0, m0).map_err(HarnessError::stage("initial state"))?;
    let kmax = config.periods.iter().copied().max().unwrap_or(0);
    let mut snapshots = Vec::new();
    engine
        .run(initial, kmax, |k, rho| {
            if config.periods.contains(&k) {
                snapshots.push((k, pair::correlation_matrix(rho, &spec)?));
            }
            Ok(())
        })
        .map_err(HarnessError::stage("pair evolution"))?;
    let mut result = PairWalkResult {
        phi,
        injection: (n0 + 1, m0 + 1),
        periods: Vec::new(),
        survival_p2: Vec::new(),
        gamma: Vec::new(),
        gamma_via_u: Vec::new(),
    };
    for &k in &config.periods {
        let (_, g) = snapshots.iter().find(|(kk, _)| *kk == k).expect("snapshot recorded");
        let via_u = pair::pair_correlation_via_u(&u.power(k), n0, m0)
            .and_then(|g| g.normalized())
            .map_err(HarnessError::stage("pair correlation via U"))?;
        result.periods.push(k);
        result.survival_p2.push(g.survival_p2);
        result
            .gamma
            .push(g.normalized().map_err(HarnessError::stage("normalization"))?.gamma);
        result.gamma_via_u.push(via_u.gamma);
    }
    Ok(result)
}

fn pair_walk(config: &RunConfig, run_id: &str, options: RunOptions, files: &mut OutputSet) -> Result<()> {
    let results = per_phase(config, |phi| pair_walk_result(config, phi))?;
    if options.svg {
        for (i, r) in results.iter().enumerate() {
            for (j, k) in r.periods.iter().enumerate() {
                files.add(
                    format!("pair_walk_phi{i}_k{k}.svg"),
                    svg::heatmap(&format!("Γ, φ = {:.4}, {k}T", r.phi), &r.gamma[j]),
                );
            }
        }
    }
    match options.format {
        Format::Json => emit_json(config, run_id, results, files),
        Format::Csv => {
            for (i, r) in results.iter().enumerate() {
                for (j, k) in r.periods.iter().enumerate() {
                    files.add(
                        format!("pair_walk_phi{i}_k{k}.csv"),
                        csv_text(io::real_grid_csv(&r.gamma[j]), "csv export")?,
                    );
                    files.add(
                        format!("pair_walk_phi{i}_k{k}_via_u.csv"),
                        csv_text(io::real_grid_csv(&r.gamma_via_u[j]), "csv export")?,
                    );
                }
            }
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct LyapunovResult {
    pub phi: f64,
    pub per_um: f64,
    pub per_period: f64,
    pub boundary_ratio: f64,
}

fn lyapunov_sweep(config: &RunConfig, run_id: &str, options: RunOptions, files: &mut OutputSet) -> Result<()> {
    let window = LyapunovWindow {
        k1: config.periods[0],
        k2: config.periods[1],
    };
    let m = config.injection_ordinals()[0];
    let results = per_phase(config, |phi| {
        let spec = config.lattice.clone().with_phase(phi);
        let u = floquet::transmission_matrix(&spec, &config.integration())
            .map_err(HarnessError::stage("transmission matrix"))?;
        let est = floquet::lyapunov_from_transmission(&u, m, window, config.tolerances.boundary_ratio)
            .map_err(HarnessError::stage("Lyapunov estimate"))?;
        Ok(LyapunovResult {
            phi,
            per_um: est.per_um,
            per_period: est.per_period,
            boundary_ratio: est.boundary_ratio,
        })
    })?;
    if options.svg {
        let series = [svg::Series {
            label: "λ per period",
            points: results.iter().map(|r| (r.phi, r.per_period)).collect(),
        }];
        files.add("lyapunov_sweep.svg", svg::line_plot("Lyapunov exponent vs φ", &series));
    }
    match options.format {
        Format::Json => emit_json(config, run_id, results, files),
        Format::Csv => {
            let cols = [
                results.iter().map(|r| r.phi).collect(),
                results.iter().map(|r| r.per_um).collect(),
                results.iter().map(|r| r.per_period).collect(),
                results.iter().map(|r| r.boundary_ratio).collect(),
            ];
            files.add(
                "lyapunov_sweep.csv",
                csv_text(io::columns_csv(&["phi", "per_um", "per_period", "boundary_ratio"], &cols), "csv export")?,
            );
            Ok(())
        }
    }
}

fn ring_hoppings(config: &RunConfig, phi: f64) -> Result<nonbloch::BulkHoppings> {
    let ring = config.lattice.clone().with_phase(phi).with_boundary(Boundary::Ring);
    nonbloch::bulk_hoppings(&ring, config.n_ring, config.orders, &config.integration())
        .map_err(HarnessError::stage("bulk hoppings"))
}

fn obc_energies(config: &RunConfig, phi: f64) -> Result<nonbloch::SpectrumResult> {
    let spec = config.lattice.clone().with_phase(phi);
    nonbloch::obc_spectrum(&spec, config.obc_sites, &config.integration()).map_err(HarnessError::stage("OBC spectrum"))
}

#[derive(Debug, Serialize)]
pub struct SpectraResult {
    pub phi: f64,
    pub pbc: Vec<C64>,
    pub obc: Vec<C64>,
    pub pbc_signed_area: f64,
    pub obc_inside_pbc_loop: usize,
}

fn spectra(config: &RunConfig, run_id: &str, options: RunOptions, files: &mut OutputSet) -> Result<()> {
    let results = per_phase(config, |phi| {
        let hop = ring_hoppings(config, phi)?;
        let pbc = nonbloch::pbc_spectrum(&hop, config.pbc_samples).map_err(HarnessError::stage("PBC spectrum"))?;
        let obc = obc_energies(config, phi)?;
        let inside = obc
            .eigenvalues
            .iter()
            .filter(|&&e| nonbloch::winding_number(&pbc.eigenvalues, e) != 0)
            .count();
        Ok(SpectraResult {
            phi,
            pbc_signed_area: nonbloch::signed_area(&pbc.eigenvalues),
            pbc: pbc.eigenvalues,
            obc: obc.eigenvalues,
            obc_inside_pbc_loop: inside,
        })
    })?;
    if options.svg {
        for (i, r) in results.iter().enumerate() {
            let mut loop_pts: Vec<(f64, f64)> = r.pbc.iter().map(|z| (z.re, z.im)).collect();
            loop_pts.extend(loop_pts.first().copied());
            let series = [
                svg::Series {
                    label: "PBC",
                    points: loop_pts,
                },
                svg::Series {
                    label: "OBC",
                    points: r.obc.iter().map(|z| (z.re, z.im)).collect(),
                },
            ];
            files.add(format!("spectra_phi{i}.svg"), svg::line_plot(&format!("spectra, φ = {:.4}", r.phi), &series));
        }
    }
    match options.format {
        Format::Json => emit_json(config, run_id, results, files),
        Format::Csv => {
            for (i, r) in results.iter().enumerate() {
                files.add(format!("spectra_phi{i}_pbc.csv"), csv_text(io::complex_points_csv(&r.pbc), "csv export")?);
                files.add(format!("spectra_phi{i}_obc.csv"), csv_text(io::complex_points_csv(&r.obc), "csv export")?);
            }
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GbzResult {
    pub phi: f64,
    pub curve: nonbloch::GbzCurve,
    pub skin_depth: Option<f64>,
    /// Relative anti-Hermitian part of `i H̄` on the OBC lattice.
    pub hermitian_residual: Option<f64>,
    pub note: Option<String>,
    pub orders: (i32, i32),
    pub root_pair_tolerance: f64,
    pub circularity: f64,
}

fn gbz(config: &RunConfig, run_id: &str, options: RunOptions, files: &mut OutputSet) -> Result<()> {
    let results = per_phase(config, |phi| {
        let hop = ring_hoppings(config, phi)?;
        let open = config.lattice.clone().with_phase(phi).with_sites(config.obc_sites).with_boundary(Boundary::Open);
        let u = floquet::transmission_matrix(&open, &config.integration()).map_err(HarnessError::stage("transmission matrix"))?;
        let h = floquet::effective_hamiltonian(&u).map_err(HarnessError::stage("effective Hamiltonian"))?;
        let obc = nonbloch::spectrum_of(&h).map_err(HarnessError::stage("OBC spectrum"))?;
        let curve = nonbloch::gbz_with_tolerance(&hop, &obc.eigenvalues, config.tolerances.root_pair)
            .map_err(HarnessError::stage("GBZ"))?;
        let (skin_depth, note) = match nonbloch::skin_depth_with_tolerance(&curve, config.tolerances.circularity) {
            Ok(g) => (Some(g), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let hermitian_residual = match skin_depth {
            Some(g) => {
                let hbar = nonbloch::similarity_transform(&h.entries, g).map_err(HarnessError::stage("similarity transform"))?;
                Some(nonbloch::hermitianize(&hbar).1)
            }
            None => None,
        };
        Ok(GbzResult {
            phi,
            curve,
            skin_depth,
            hermitian_residual,
            note,
            orders: config.orders,
            root_pair_tolerance: config.tolerances.root_pair,
            circularity: config.tolerances.circularity,
        })
    })?;
    if options.svg {
        for (i, r) in results.iter().enumerate() {
            let series = [svg::Series {
                label: "β",
                points: r.curve.samples.iter().map(|s| (s.beta.re, s.beta.im)).collect(),
            }];
            files.add(format!("gbz_phi{i}.svg"), svg::line_plot(&format!("GBZ, φ = {:.4}", r.phi), &series));
        }
    }
    match options.format {
        Format::Json => emit_json(config, run_id, results, files),
        Format::Csv => {
            for (i, r) in results.iter().enumerate() {
                let s = &r.curve.samples;
                let cols = [
                    s.iter().map(|x| x.energy.re).collect(),
                    s.iter().map(|x| x.energy.im).collect(),
                    s.iter().map(|x| x.beta.re).collect(),
                    s.iter().map(|x| x.beta.im).collect(),
                ];
                files.add(
                    format!("gbz_phi{i}.csv"),
                    csv_text(io::columns_csv(&["e_re", "e_im", "beta_re", "beta_im"], &cols), "csv export")?,
                );
            }
            let cols = [
                results.iter().map(|r| r.phi).collect(),
                results.iter().map(|r| r.curve.fitted_radius).collect(),
                results.iter().map(|r| r.curve.circle_residual).collect(),
                results.iter().map(|r| r.skin_depth.unwrap_or(f64::NAN)).collect(),
                results.iter().map(|r| r.hermitian_residual.unwrap_or(f64::NAN)).collect(),
            ];
            files.add(
                "gbz_summary.csv",
                csv_text(
                    io::columns_csv(&["phi", "radius", "residual", "g", "hermitian_residual"], &cols),
                    "csv export",
                )?,
            );
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyPoint {
    pub k: usize,
    pub s2: f64,
    pub s2_exact: f64,
    pub survival_p2: f64,
}

/// Master-equation entropy curve: diagonal estimator on post-selected
/// coincidences plus the exact value from the two-photon block.
pub fn entropy_curve_for(
    spec: &LatticeSpec,
    n0: usize,
    m0: usize,
    periods: &[usize],
    integration: &Integration,
) -> Result<Vec<EntropyPoint>> {
    let opts = PairOptions {
        integration: *integration,
        ..PairOptions::default()
    };
    let engine = PairEvolution::new(spec, opts).map_err(HarnessError::stage("pair engine"))?;
    let initial = pair::initial_pair_state(spec, n0, m0).map_err(HarnessError::stage("initial state"))?;
    let straight = spec.straight_sites();
    let kmax = periods.iter().copied().max().unwrap_or(0);
    let mut points = Vec::new();
    engine
        .run(initial, kmax, |k, rho| {
            if periods.contains(&k) {
                let g = pair::correlation_matrix(rho, spec)?;
                let s2 = entanglement::renyi2_diagonal(&g)?.s2;
                let exact = entanglement::renyi2_block(&rho.two_photon_block(&straight), straight.len())?.s2;
                points.push(EntropyPoint {
                    k,
                    s2,
                    s2_exact: exact,
                    survival_p2: g.survival_p2,
                });
            }
            Ok(())
        })
        .map_err(HarnessError::stage("entropy curve"))?;
    Ok(points)
}

#[derive(Debug, Serialize)]
pub struct EntropyCurveResult {
    pub phi: f64,
    pub points: Vec<EntropyPoint>,
    pub s2_sym: Vec<f64>,
    pub s_norm: Vec<f64>,
}

fn entropy_curve(config: &RunConfig, run_id: &str, options: RunOptions, files: &mut OutputSet) -> Result<()> {
    let inj = config.injection_ordinals();
    let (n0, m0) = (inj[0], inj[1]);
    let mut phases = config.phases();
    phases.push(PI / 2.0);
    let curves: Vec<Vec<EntropyPoint>> = phases
        .par_iter()
        .map(|&phi| {
            let spec = config.lattice.clone().with_phase(phi);
            entropy_curve_for(&spec, n0, m0, &config.periods, &config.integration())
        })
        .collect::<Result<_>>()?;
    let (reference, curves) = curves.split_last().expect("reference curve");
    let s2_sym: Vec<f64> = reference.iter().map(|p| p.s2).collect();
    let results: Vec<EntropyCurveResult> = phases
        .iter()
        .zip(curves)
        .map(|(&phi, points)| EntropyCurveResult {
            phi,
            s_norm: points
                .iter()
                .zip(&s2_sym)
                .map(|(p, s)| entanglement::normalized_entropy(p.s2, *s))
                .collect(),
            s2_sym: s2_sym.clone(),
            points: points.clone(),
        })
        .collect();
    if options.svg {
        let labels: Vec<String> = results.iter().map(|r| format!("φ = {:.4}", r.phi)).collect();
        let series: Vec<svg::Series> = results
            .iter()
            .zip(&labels)
            .map(|(r, l)| svg::Series {
                label: l,
                points: r.points.iter().map(|p| (p.k as f64, p.s2)).collect(),
            })
            .collect();
        files.add("entropy_curve.svg", svg::line_plot("S₂ vs period", &series));
    }
    match options.format {
        Format::Json => emit_json(config, run_id, results, files),
        Format::Csv => {
            for (i, r) in results.iter().enumerate() {
                let cols = [
                    r.points.iter().map(|p| p.k as f64).collect(),
                    r.points.iter().map(|p| p.s2).collect(),
                    r.s2_sym.clone(),
                    r.s_norm.clone(),
                    r.points.iter().map(|p| p.survival_p2).collect(),
                    r.points.iter().map(|p| p.s2_exact).collect(),
                ];
                files.add(
                    format!("entropy_curve_phi{i}.csv"),
                    csv_text(
                        io::columns_csv(&["k", "s2", "s2_sym", "s_norm", "survival_p2", "s2_exact"], &cols),
                        "csv export",
                    )?,
                );
            }
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Table1Result {
    pub phi: f64,
    pub hoppings: nonbloch::BulkHoppings,
}

fn table1(config: &RunConfig, run_id: &str, options: RunOptions, files: &mut OutputSet) -> Result<()> {
    let results = per_phase(config, |phi| {
        let ring = config.lattice.clone().with_phase(phi).with_boundary(Boundary::Ring);
        let hoppings = nonbloch::bulk_hoppings(&ring, ring.n_straight, config.orders, &config.integration())
            .map_err(HarnessError::stage("bulk hoppings"))?;
        Ok(Table1Result { phi, hoppings })
    })?;
    if options.svg {
        let series: Vec<svg::Series> = results
            .iter()
            .map(|r| svg::Series {
                label: "|κ|",
                points: r.hoppings.iter().map(|(o, k)| (o as f64, k.norm())).collect(),
            })
            .collect();
        files.add("table1.svg", svg::line_plot("|κ_order| vs order", &series));
    }
    match options.format {
        Format::Json => emit_json(config, run_id, results, files),
        Format::Csv => {
            for (i, r) in results.iter().enumerate() {
                let h = &r.hoppings;
                let cols = [
                    h.orders().map(|o| o as f64).collect(),
                    h.kappa.iter().map(|k| k.re).collect(),
                    h.kappa.iter().map(|k| k.im).collect(),
                    h.kappa.iter().map(|k| k.re * 1e4).collect(),
                    h.kappa.iter().map(|k| k.im * 1e4).collect(),
                ];
                files.add(
                    format!("table1_phi{i}.csv"),
                    csv_text(io::columns_csv(&["order", "re", "im", "re_1e-4", "im_1e-4"], &cols), "csv export")?,
                );
            }
            Ok(())
        }
    }
}
