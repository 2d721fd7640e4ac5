//! Acceptance suite: one pass/fail report per criterion.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use skinwalk::floquet::{self, EffectiveHamiltonian, Integration, LyapunovWindow, TransmissionMatrix};
use skinwalk::lattice::{Boundary, LatticeSpec};
use skinwalk::pair::{
    self, Dissipation, ExtendedBasis, ExtendedDensityMatrix, PairEvolution, PairOptions, Propagator,
    StateTolerances,
};
use skinwalk::{entanglement, linalg, nonbloch, C64};

use crate::error::{HarnessError, Result};
use crate::experiments;
use crate::manifest::{self, OutputSet, RunManifest};
use crate::oracle::TensorFock;

pub const REPORT_FILE: &str = "acceptance_report.txt";

/// Thresholds of every criterion; the defaults are the published ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcceptanceTolerances {
    /// `|λ(π/2)| < ratio · |λ(0)|`.
    pub lyapunov_ratio: f64,
    /// Largest edge-to-peak amplitude at the end of the Lyapunov window.
    pub boundary_ratio: f64,
    pub drift_min_sites: f64,
    pub drift_max_symmetric_sites: f64,
    /// `max|Re κ| ≤ fraction · max|Im κ|`.
    pub table_real_fraction: f64,
    pub table_ratio_low: f64,
    pub table_ratio_high: f64,
    pub table_dominance: f64,
    pub gbz_circularity: f64,
    pub gbz_unit_radius: f64,
    /// Relative sup-norm distance between correlation matrices.
    pub correlation_sup: f64,
    pub restoration_relative: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
    pub trace_increase: f64,
    pub operator_entries: f64,
    pub dynamics: f64,
}

impl Default for AcceptanceTolerances {
    fn default() -> Self {
        Self {
            lyapunov_ratio: 0.1,
            boundary_ratio: floquet::BOUNDARY_TOLERANCE,
            drift_min_sites: 2.0,
            drift_max_symmetric_sites: 0.3,
            table_real_fraction: 1e-3,
            table_ratio_low: 5.0,
            table_ratio_high: 20.0,
            table_dominance: 3.0,
            gbz_circularity: nonbloch::CIRCULARITY,
            gbz_unit_radius: 1e-3,
            correlation_sup: 0.05,
            restoration_relative: 0.10,
            hermiticity: 1e-10,
            min_eigenvalue: -1e-8,
            trace_increase: 1e-10,
            operator_entries: 1e-10,
            dynamics: 1e-6,
        }
    }
}

impl AcceptanceTolerances {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(format!("tolerances: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
        Self::from_toml_str(&text)
    }
}

/// Deliberate corruption of a fixture, to prove that a criterion can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flip the sign of every Lyapunov estimate.
    LyapunovSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcceptanceOptions {
    pub tolerances: AcceptanceTolerances,
    pub fault: Option<Fault>,
    pub steps_per_period: usize,
    pub random_specs: usize,
    pub seed: u64,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        Self {
            tolerances: AcceptanceTolerances::default(),
            fault: None,
            steps_per_period: Integration::default().steps_per_period,
            random_specs: 200,
            seed: 0x5eed_2024,
        }
    }
}

impl AcceptanceOptions {
    fn integration(&self) -> Integration {
        Integration::with_steps(self.steps_per_period)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    /// Not reproducible by simulation; reported for information only.
    Excluded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub status: Status,
    pub summary: String,
    pub thresholds: String,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:?}] {:>2} {}: {} | thresholds: {} | {:.1}s",
            self.status, self.id, self.name, self.summary, self.thresholds, self.seconds
        )
    }
}

struct Outcome {
    passed: bool,
    summary: String,
    thresholds: String,
}

type Check = fn(&AcceptanceOptions) -> Result<Outcome>;

pub const CRITERIA: &[(u8, &str)] = &[
    (1, "lyapunov-monotonicity"),
    (2, "skin-effect-drift"),
    (3, "hopping-table-structure"),
    (4, "gbz-circle"),
    (5, "master-equation-vs-transmission"),
    (6, "entropy-suppression"),
    (7, "similarity-restoration"),
    (8, "lindblad-sanity"),
    (9, "fock-oracle-equivalence"),
    (10, "lab-only-figures"),
];

fn check_for(id: u8) -> Option<Check> {
    Some(match id {
        1 => lyapunov_monotonicity,
        2 => skin_effect_drift,
        3 => hopping_table,
        4 => gbz_circle,
        5 => master_vs_transmission,
        6 => entropy_suppression,
        7 => similarity_restoration,
        8 => lindblad_sanity,
        9 => fock_oracle,
        10 => lab_only,
        _ => return None,
    })
}

/// Evaluate one criterion; library errors count as failures.
pub fn evaluate(id: u8, options: &AcceptanceOptions) -> Result<CriterionReport> {
    let (_, name) = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .ok_or_else(|| HarnessError::Config(format!("no acceptance criterion {id}")))?;
    let check = check_for(id).expect("every listed criterion has a check");
    let started = Instant::now();
    let (status, summary, thresholds) = match check(options) {
        Ok(o) if id == 10 => (Status::Excluded, o.summary, o.thresholds),
        Ok(o) => (if o.passed { Status::Pass } else { Status::Fail }, o.summary, o.thresholds),
        Err(e) => (Status::Fail, format!("error: {e}"), "n/a".into()),
    };
    Ok(CriterionReport {
        id,
        name: (*name).into(),
        status,
        summary,
        thresholds,
        seconds: started.elapsed().as_secs_f64(),
    })
}

pub fn run_all(options: &AcceptanceOptions) -> Vec<CriterionReport> {
    CRITERIA
        .par_iter()
        .map(|(id, _)| evaluate(*id, options).expect("listed criterion"))
        .collect()
}

pub fn render(reports: &[CriterionReport]) -> String {
    let mut text: String = reports.iter().map(|r| format!("{r}\n")).collect();
    let failed = reports.iter().filter(|r| !r.passed()).count();
    text.push_str(&format!("{} criteria, {failed} failed\n", reports.len()));
    text
}

/// Run everything and write the report and a manifest. Failed criteria
/// are in the returned reports; callers decide what to do with them.
pub fn reproduce_all(out: &Path, options: &AcceptanceOptions) -> Result<(RunManifest, Vec<CriterionReport>)> {
    let started = Instant::now();
    let reports = run_all(options);
    let mut files = OutputSet::default();
    files.add(REPORT_FILE, render(&reports));
    files.add(
        "acceptance_report.json",
        serde_json::to_string_pretty(&reports).expect("reports serialize"),
    );
    let outputs = files.write(out)?;
    let manifest = RunManifest {
        run_id: manifest::run_id(options),
        experiment: "reproduce_all".into(),
        figure: "acceptance report".into(),
        config: serde_json::to_value(options).expect("options serialize"),
        software_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs,
    };
    let path = out.join(manifest::MANIFEST_FILE);
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes"))
        .map_err(HarnessError::io(&path))?;
    Ok((manifest, reports))
}

fn stage(name: &'static str) -> impl FnOnce(skinwalk::Error) -> HarnessError {
    HarnessError::stage(name)
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.5}")).collect();
    format!("[{}]", parts.join(", "))
}

const SWEEP: [f64; 5] = [0.0, PI / 8.0, PI / 4.0, 3.0 * PI / 8.0, PI / 2.0];

fn lyapunov_values(options: &AcceptanceOptions, phases: &[f64]) -> Result<Vec<floquet::LyapunovEstimate>> {
    let sites = floquet::LYAPUNOV_SITES;
    let m = sites / 2;
    phases
        .par_iter()
        .map(|&phi| {
            let spec = LatticeSpec::default().with_sites(sites).with_phase(phi);
            let u = floquet::transmission_matrix(&spec, &options.integration()).map_err(stage("transmission matrix"))?;
            let mut est = floquet::lyapunov_from_transmission(
                &u,
                m,
                LyapunovWindow::default(),
                options.tolerances.boundary_ratio,
            )
            .map_err(stage("Lyapunov estimate"))?;
            if options.fault == Some(Fault::LyapunovSign) {
                est.per_period = -est.per_period;
                est.per_um = -est.per_um;
            }
            Ok(est)
        })
        .collect()
}

fn lyapunov_monotonicity(options: &AcceptanceOptions) -> Result<Outcome> {
    let t = &options.tolerances;
    let est = lyapunov_values(options, &SWEEP)?;
    let lam: Vec<f64> = est.iter().map(|e| e.per_period).collect();
    let increasing = lam.windows(2).all(|w| w[0] < w[1]);
    let toward_zero = lam.windows(2).all(|w| w[1].abs() < w[0].abs());
    let ratio = lam[4].abs() / lam[0].abs();
    Ok(Outcome {
        passed: increasing && toward_zero && ratio < t.lyapunov_ratio,
        summary: format!(
            "λ per period at φ = 0..π/2 in π/8 steps {} (per μm {}), |λ(π/2)|/|λ(0)| = {ratio:.4}, N = {}",
            fmt_list(&lam),
            fmt_list(&est.iter().map(|e| e.per_um).collect::<Vec<_>>()),
            floquet::LYAPUNOV_SITES
        ),
        thresholds: format!(
            "strictly increasing toward 0, ratio < {}, boundary ratio < {:e}",
            t.lyapunov_ratio, t.boundary_ratio
        ),
    })
}

fn skin_effect_drift(options: &AcceptanceOptions) -> Result<Outcome> {
    let t = &options.tolerances;
    let n0 = 5;
    let shifts: Vec<f64> = [0.0, PI / 2.0]
        .par_iter()
        .map(|&phi| {
            let spec = LatticeSpec::default().with_phase(phi);
            let u = floquet::transmission_matrix(&spec, &options.integration()).map_err(stage("transmission matrix"))?;
            let d = floquet::intensity_distribution(&u.power(6), n0).map_err(stage("intensity"))?;
            Ok(floquet::packet_center(&d.raw).map_err(stage("packet center"))? - n0 as f64)
        })
        .collect::<Result<_>>()?;
    Ok(Outcome {
        passed: shifts[0].abs() >= t.drift_min_sites && shifts[1].abs() <= t.drift_max_symmetric_sites,
        summary: format!(
            "N = 9, injection 6, k = 6: centre shift {:.4} sites at φ = 0, {:.4} at φ = π/2",
            shifts[0], shifts[1]
        ),
        thresholds: format!(
            "|shift(0)| ≥ {}, |shift(π/2)| ≤ {}",
            t.drift_min_sites, t.drift_max_symmetric_sites
        ),
    })
}

fn hopping_table(options: &AcceptanceOptions) -> Result<Outcome> {
    let t = &options.tolerances;
    let ring = LatticeSpec::default().with_sites(10).with_boundary(Boundary::Ring);
    let hop = nonbloch::bulk_hoppings(&ring, 10, nonbloch::DEFAULT_ORDERS, &options.integration())
        .map_err(stage("bulk hoppings"))?;
    let re_max = hop.iter().map(|(_, k)| k.re.abs()).fold(0.0, f64::max);
    let im_max = hop.iter().map(|(_, k)| k.im.abs()).fold(0.0, f64::max);
    let ratio = hop.get(-1).im.abs() / hop.get(1).im.abs();
    let leading = hop.get(-1).norm().min(hop.get(0).norm());
    let others = hop
        .iter()
        .filter(|(o, _)| *o != -1 && *o != 0)
        .map(|(_, k)| k.norm())
        .fold(0.0, f64::max);
    let dominance = leading / others;
    let real_ok = re_max <= t.table_real_fraction * im_max;
    let ratio_ok = (t.table_ratio_low..=t.table_ratio_high).contains(&ratio);
    Ok(Outcome {
        passed: real_ok && ratio_ok && dominance >= t.table_dominance,
        summary: format!(
            "ring N = 10, φ = 0: max|Re κ| = {re_max:.3e}, max|Im κ| = {im_max:.3e}, |Im κ₋₁|/|Im κ₊₁| = {ratio:.3}, dominance of orders −1, 0 = {dominance:.3}"
        ),
        thresholds: format!(
            "max|Re| ≤ {:e}·max|Im|, ratio in [{}, {}], dominance ≥ {}",
            t.table_real_fraction, t.table_ratio_low, t.table_ratio_high, t.table_dominance
        ),
    })
}

/// GBZ of the default lattice at `phi` from a 30-site ring and the OBC
/// spectrum of 30 open sites.
/// Root-pair tolerance used only to report what the GBZ looks like when the
/// strict one rejects most energies. Never used for pass/fail.
pub const DIAGNOSTIC_PAIR_TOLERANCE: f64 = 1e-2;

pub fn default_gbz(phi: f64, integration: &Integration) -> Result<nonbloch::GbzCurve> {
    default_gbz_with_tolerance(phi, integration, nonbloch::ROOT_PAIR_TOLERANCE)
}

pub fn default_gbz_with_tolerance(phi: f64, integration: &Integration, tolerance: f64) -> Result<nonbloch::GbzCurve> {
    let spec = LatticeSpec::default().with_phase(phi);
    let ring = spec.clone().with_boundary(Boundary::Ring);
    let hop = nonbloch::bulk_hoppings(&ring, 30, nonbloch::DEFAULT_ORDERS, integration).map_err(stage("bulk hoppings"))?;
    let obc = nonbloch::obc_spectrum(&spec, nonbloch::OBC_SITES, integration).map_err(stage("OBC spectrum"))?;
    nonbloch::gbz_with_tolerance(&hop, &obc.eigenvalues, tolerance).map_err(stage("GBZ"))
}

/// Strict GBZ, or the diagnostic one plus a note when the strict one fails.
fn gbz_or_diagnostic(phi: f64, integration: &Integration) -> Result<(nonbloch::GbzCurve, Option<String>)> {
    match default_gbz(phi, integration) {
        Ok(curve) => Ok((curve, None)),
        Err(strict) => {
            let curve = default_gbz_with_tolerance(phi, integration, DIAGNOSTIC_PAIR_TOLERANCE)?;
            let note = format!(
                "strict GBZ failed ({strict}); diagnostic pair tolerance {DIAGNOSTIC_PAIR_TOLERANCE:e} keeps {} of {} energies",
                curve.total - curve.skipped,
                curve.total
            );
            Ok((curve, Some(note)))
        }
    }
}

fn gbz_circle(options: &AcceptanceOptions) -> Result<Outcome> {
    let t = &options.tolerances;
    let curves: Vec<(nonbloch::GbzCurve, Option<String>)> = [0.0, PI / 2.0]
        .par_iter()
        .map(|&phi| gbz_or_diagnostic(phi, &options.integration()))
        .collect::<Result<_>>()?;
    let (a, s) = (&curves[0].0, &curves[1].0);
    let notes: Vec<String> = curves
        .iter()
        .zip(["φ = 0", "φ = π/2"])
        .filter_map(|((_, note), label)| note.as_ref().map(|n| format!("{label}: {n}")))
        .collect();
    let mut summary = format!(
        "φ = 0: radius {:.5}, relative residual {:.3e}; φ = π/2: radius {:.6}, relative residual {:.3e}",
        a.fitted_radius,
        a.circle_residual / a.fitted_radius,
        s.fitted_radius,
        s.circle_residual / s.fitted_radius
    );
    for n in &notes {
        summary.push_str("; ");
        summary.push_str(n);
    }
    Ok(Outcome {
        passed: notes.is_empty()
            && a.fitted_radius < 1.0
            && a.circle_residual / a.fitted_radius < t.gbz_circularity
            && (s.fitted_radius - 1.0).abs() <= t.gbz_unit_radius,
        summary,
        thresholds: format!(
            "GBZ root pairs matched within {:e}, radius(0) < 1, relative residual(0) < {}, |radius(π/2) − 1| ≤ {:e}",
            nonbloch::ROOT_PAIR_TOLERANCE,
            t.gbz_circularity,
            t.gbz_unit_radius
        ),
    })
}

fn master_vs_transmission(options: &AcceptanceOptions) -> Result<Outcome> {
    let t = &options.tolerances;
    let (n0, m0) = (4, 5);
    let periods = [3, 4, 5, 6];
    let worst: Vec<f64> = [0.0, PI / 2.0]
        .par_iter()
        .map(|&phi| {
            let spec = LatticeSpec::default().with_phase(phi);
            let opts = PairOptions {
                integration: options.integration(),
                ..PairOptions::default()
            };
            let engine = PairEvolution::new(&spec, opts).map_err(stage("pair engine"))?;
            let u = floquet::transmission_matrix(&spec, &options.integration()).map_err(stage("transmission matrix"))?;
            let initial = pair::initial_pair_state(&spec, n0, m0).map_err(stage("initial state"))?;
            let mut worst = 0.0f64;
            engine
                .run(initial, 6, |k, rho| {
                    if periods.contains(&k) {
                        let me = pair::correlation_matrix(rho, &spec)?.normalized()?;
                        let via_u = pair::pair_correlation_via_u(&u.power(k), n0, m0)?.normalized()?;
                        let scale = via_u.gamma.iter().cloned().fold(0.0, f64::max);
                        worst = worst.max(me.sup_distance(&via_u)? / scale);
                    }
                    Ok(())
                })
                .map_err(stage("pair evolution"))?;
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let max = worst.iter().cloned().fold(0.0, f64::max);
    Ok(Outcome {
        passed: max <= t.correlation_sup,
        summary: format!(
            "N = 9, injection (5, 6), k = 3..6: relative sup distance {:.3e} at φ = 0, {:.3e} at φ = π/2",
            worst[0], worst[1]
        ),
        thresholds: format!("sup|Γ_me − Γ_U| / max Γ_U ≤ {}", t.correlation_sup),
    })
}

fn entropy_suppression(options: &AcceptanceOptions) -> Result<Outcome> {
    let periods: Vec<usize> = (1..=15).collect();
    let curves: Vec<Vec<experiments::EntropyPoint>> = [0.0, PI / 4.0, PI / 2.0]
        .par_iter()
        .map(|&phi| {
            let spec = LatticeSpec::default().with_phase(phi);
            experiments::entropy_curve_for(&spec, 4, 5, &periods, &options.integration())
        })
        .collect::<Result<_>>()?;
    let s = |c: usize, k: usize| curves[c].iter().find(|p| p.k == k).expect("period recorded").s2;
    let suppressed = (10..=15).all(|k| s(0, k) < s(2, k));
    let ordered = s(0, 15) < s(1, 15) && s(1, 15) < s(2, 15);
    let late: Vec<f64> = (10..=15).map(|k| s(2, k) - s(0, k)).collect();
    Ok(Outcome {
        passed: suppressed && ordered,
        summary: format!(
            "S₂ at k = 15: {:.4} (φ = 0), {:.4} (φ = π/4), {:.4} (φ = π/2); S₂(π/2) − S₂(0) for k = 10..15 {}",
            s(0, 15),
            s(1, 15),
            s(2, 15),
            fmt_list(&late)
        ),
        thresholds: "S₂(0, k) < S₂(π/2, k) for k ≥ 10; S₂(0) < S₂(π/4) < S₂(π/2) at k = 15".into(),
    })
}

fn pair_entropy(u: &TransmissionMatrix, k: usize) -> Result<f64> {
    let psi = pair::pair_amplitudes(u, 4, 5, k).map_err(stage("pair amplitudes"))?;
    let gamma = pair::correlation_from_amplitudes(&psi).map_err(stage("coincidences"))?;
    Ok(entanglement::renyi2_diagonal(&gamma).map_err(stage("entropy"))?.s2)
}

fn similarity_restoration(options: &AcceptanceOptions) -> Result<Outcome> {
    let t = &options.tolerances;
    let k = 15;
    let integration = options.integration();
    let (curve, note) = gbz_or_diagnostic(0.0, &integration)?;
    let g = nonbloch::skin_depth_with_tolerance(&curve, t.gbz_circularity).map_err(stage("skin depth"))?;
    let asym_spec = LatticeSpec::default();
    let u_asym = floquet::transmission_matrix(&asym_spec, &integration).map_err(stage("transmission matrix"))?;
    let u_sym = floquet::transmission_matrix(&asym_spec.clone().with_phase(PI / 2.0), &integration)
        .map_err(stage("transmission matrix"))?;
    let h = floquet::effective_hamiltonian(&u_asym).map_err(stage("effective Hamiltonian"))?;
    let hbar = nonbloch::similarity_transform(&h.entries, g).map_err(stage("similarity transform"))?;
    let u_bar = EffectiveHamiltonian::from_matrix(hbar, u_asym.period_t)
        .map_err(stage("transformed Hamiltonian"))?
        .propagator();
    let s_bar = pair_entropy(&u_bar, k)?;
    let s_sym = pair_entropy(&u_sym, k)?;
    let s_asym = pair_entropy(&u_asym, k)?;
    let restored = (s_bar - s_sym).abs() / s_sym;
    let floor = s_bar.min(s_sym);
    let margin = (floor - s_asym) / floor;
    Ok(Outcome {
        passed: note.is_none() && restored <= t.restoration_relative && margin > t.restoration_relative,
        summary: format!(
            "g = {g:.5}, k = 15: S₂ transformed {s_bar:.4}, symmetric {s_sym:.4}, asymmetric {s_asym:.4}; relative gap {restored:.4}, asymmetric margin {margin:.4}{}",
            note.map(|n| format!("; g from diagnostic GBZ, {n}")).unwrap_or_default()
        ),
        thresholds: format!(
            "|S̄ − S_sym|/S_sym ≤ {0}, asymmetric below both by > {0}",
            t.restoration_relative
        ),
    })
}

/// Random physical state with at most `max_photons` photons, built in the
/// tensor oracle and embedded into the extended basis.
fn random_state(rng: &mut ChaCha8Rng, fock: &TensorFock, basis: &ExtendedBasis, max_photons: usize) -> Array2<C64> {
    let emb = fock.embedding(basis);
    let d = fock.dimension();
    let allowed: Vec<usize> = (0..d)
        .filter(|&i| fock.occupation(i).iter().sum::<usize>() <= max_photons)
        .collect();
    let mixtures = rng.gen_range(1..=3);
    let mut rho_f = Array2::<C64>::zeros((d, d));
    let mut total = 0.0;
    for _ in 0..mixtures {
        let mut v = Array1::<C64>::zeros(d);
        for &i in &allowed {
            v[i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let norm = linalg::vector_norm(&v);
        v.mapv_inplace(|z| z / norm);
        let w: f64 = rng.gen_range(0.1..1.0);
        total += w;
        let col = v.view().insert_axis(ndarray::Axis(1));
        rho_f.scaled_add(C64::new(w, 0.0), &col.dot(&col.t().mapv(|z| z.conj())));
    }
    rho_f.mapv_inplace(|z| z / total);
    emb.dot(&rho_f).dot(&linalg::dagger(&emb))
}

struct Trial {
    spec: LatticeSpec,
    rho: Array2<C64>,
    max_photons: usize,
    dissipation: Dissipation,
}

#[derive(Debug, Default, Clone, Copy)]
struct TrialStats {
    hermiticity: f64,
    min_eigenvalue: f64,
    trace_increase: f64,
    block_leak: f64,
}

fn random_trials(options: &AcceptanceOptions) -> Vec<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    (0..options.random_specs)
        .map(|i| {
            let spacing = rng.gen_range(0.8..1.0);
            let spec = LatticeSpec {
                n_straight: rng.gen_range(2..=3),
                boundary: if rng.gen_bool(0.5) { Boundary::Open } else { Boundary::Ring },
                spacing_a: spacing,
                radius_r: rng.gen_range(0.0..0.3),
                period_t: rng.gen_range(20.0..60.0),
                phase_phi: rng.gen_range(0.0..2.0 * PI),
                coupling_a: rng.gen_range(5.0..16.0),
                coupling_b: rng.gen_range(7.0..9.0),
                onsite_beta0: rng.gen_range(-0.1..0.1),
                ..LatticeSpec::default()
            };
            let fock = TensorFock::new(spec.site_count());
            let basis = ExtendedBasis::new(spec.site_count()).expect("non-empty lattice");
            let max_photons = rng.gen_range(0..=2);
            let rho = random_state(&mut rng, &fock, &basis, max_photons);
            let dissipation = if i % 4 == 3 {
                Dissipation::FiniteRate {
                    gamma_tau: Dissipation::DEFAULT_GAMMA_TAU,
                }
            } else {
                Dissipation::Complete
            };
            Trial {
                spec,
                rho,
                max_photons,
                dissipation,
            }
        })
        .collect()
}

fn run_trial(trial: &Trial, options: &AcceptanceOptions) -> Result<TrialStats> {
    let opts = PairOptions {
        integration: Integration::with_steps(400),
        dissipation: trial.dissipation,
        tolerances: StateTolerances {
            hermiticity: options.tolerances.hermiticity,
            trace: options.tolerances.trace_increase,
            min_eigenvalue: options.tolerances.min_eigenvalue,
        },
        ..PairOptions::default()
    };
    let engine = PairEvolution::new(&trial.spec, opts).map_err(stage("pair engine"))?;
    let basis = engine.basis();
    let initial = ExtendedDensityMatrix::new(trial.rho.clone(), basis).map_err(stage("random state"))?;
    let mut stats = TrialStats {
        min_eigenvalue: f64::INFINITY,
        ..TrialStats::default()
    };
    let mut previous = initial.trace();
    engine
        .run(initial, 3, |_, rho| {
            stats.hermiticity = stats.hermiticity.max(rho.hermiticity_residual());
            stats.min_eigenvalue = stats.min_eigenvalue.min(rho.min_eigenvalue()?);
            stats.trace_increase = stats.trace_increase.max(rho.trace() - previous);
            previous = rho.trace();
            for ((r, c), z) in rho.entries.indexed_iter() {
                if basis.photons(r) > trial.max_photons || basis.photons(c) > trial.max_photons {
                    stats.block_leak = stats.block_leak.max(z.norm());
                }
            }
            Ok(())
        })
        .map_err(stage("random-spec evolution"))?;
    Ok(stats)
}

fn lindblad_sanity(options: &AcceptanceOptions) -> Result<Outcome> {
    let t = &options.tolerances;
    let trials = random_trials(options);
    let results: Vec<std::result::Result<TrialStats, String>> = trials
        .par_iter()
        .map(|trial| run_trial(trial, options).map_err(|e| e.to_string()))
        .collect();
    let errors: Vec<(usize, &String)> = results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().err().map(|e| (i, e)))
        .collect();
    let ok: Vec<TrialStats> = results.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
    let fold = |f: fn(&TrialStats) -> f64, init: f64, pick: fn(f64, f64) -> f64| ok.iter().map(f).fold(init, pick);
    let herm = fold(|s| s.hermiticity, 0.0, f64::max);
    let min_eig = fold(|s| s.min_eigenvalue, f64::INFINITY, f64::min);
    let trace_up = fold(|s| s.trace_increase, f64::NEG_INFINITY, f64::max);
    let leak = fold(|s| s.block_leak, 0.0, f64::max);
    let passed = errors.is_empty()
        && herm < t.hermiticity
        && min_eig > t.min_eigenvalue
        && trace_up <= t.trace_increase
        && leak == 0.0;
    let first_error = errors
        .first()
        .map(|(i, e)| format!("; first failure at trial {i}: {e}"))
        .unwrap_or_default();
    Ok(Outcome {
        passed,
        summary: format!(
            "{} random specs (seed {:#x}), 3 periods: {} errors, max hermiticity {herm:.2e}, min eigenvalue {min_eig:.2e}, max trace change {trace_up:.2e}, higher-block leak {leak:e}{first_error}",
            trials.len(),
            options.seed,
            errors.len()
        ),
        thresholds: format!(
            "hermiticity < {:e}, min eigenvalue > {:e}, trace increase ≤ {:e}, leak = 0 exactly",
            t.hermiticity, t.min_eigenvalue, t.trace_increase
        ),
    })
}

/// Largest deviation of the lifted ladder operators and Hamiltonian from
/// the tensor oracle over 1..=4 sites.
fn lift_deviation() -> Result<f64> {
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in 1..=4 {
        let fock = TensorFock::new(m);
        let basis = ExtendedBasis::new(m).map_err(stage("basis"))?;
        let emb = fock.embedding(&basis);
        let embd = linalg::dagger(&emb);
        for j in 0..m {
            let oracle = emb.dot(&fock.annihilation(j)).dot(&embd);
            let lifted = pair::lift_annihilation(j, &basis).map_err(stage("annihilation lift"))?;
            worst = worst.max(linalg::max_abs(&(&lifted.matrix - &oracle)));
            let created = pair::lift_creation(j, &basis).map_err(stage("creation lift"))?;
            worst = worst.max(linalg::max_abs(&(&created.matrix - &linalg::dagger(&oracle))));
        }
        let mut h = Array2::from_shape_fn((m, m), |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        h = &h + &linalg::dagger(&h);
        let oracle = emb.dot(&fock.quadratic(&h)).dot(&embd);
        let lifted = pair::lift_hamiltonian(&h).map_err(stage("Hamiltonian lift"))?;
        // the lift also acts on the antisymmetric pair sector; compare on the physical one
        let physical = emb.dot(&embd);
        worst = worst.max(linalg::max_abs(&(&physical.dot(&lifted).dot(&physical) - &oracle)));
    }
    Ok(worst)
}

/// Largest deviation between the library pair dynamics and the tensor
/// oracle with partial-trace loss, over a few small lattices.
fn dynamics_deviation(options: &AcceptanceOptions) -> Result<f64> {
    let cases = [
        (LatticeSpec::default().with_sites(2), Propagator::Factorized),
        (LatticeSpec::default().with_sites(2).with_phase(PI / 3.0), Propagator::Commutator),
        (
            LatticeSpec::default().with_sites(2).with_boundary(Boundary::Ring).with_phase(0.7),
            Propagator::Factorized,
        ),
    ];
    let worst: Vec<f64> = cases
        .par_iter()
        .map(|(spec, propagator)| {
            let m = spec.site_count();
            let fock = TensorFock::new(m);
            let basis = ExtendedBasis::new(m).map_err(stage("basis"))?;
            let emb = fock.embedding(&basis);
            let s = spec.straight_sites();
            let psi = fock.two_photon(s[0], s[1]);
            let col = psi.view().insert_axis(ndarray::Axis(1));
            let mut rho_f = col.dot(&col.t().mapv(|z| z.conj()));
            let u_f = fock
                .period_propagator(spec, options.steps_per_period)
                .map_err(stage("oracle propagator"))?;
            let opts = PairOptions {
                integration: options.integration(),
                propagator: *propagator,
                ..PairOptions::default()
            };
            let engine = PairEvolution::new(spec, opts).map_err(stage("pair engine"))?;
            let initial = pair::initial_pair_state(spec, 0, 1).map_err(stage("initial state"))?;
            let aux = spec.aux_sites();
            let mut worst = 0.0f64;
            engine
                .run(initial, 3, |k, rho| {
                    if k > 0 {
                        rho_f = fock.empty_modes(&u_f.dot(&rho_f).dot(&linalg::dagger(&u_f)), &aux);
                    }
                    let expected = emb.dot(&rho_f).dot(&linalg::dagger(&emb));
                    worst = worst.max(linalg::max_abs(&(&rho.entries - &expected)));
                    Ok(())
                })
                .map_err(stage("pair evolution"))?;
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// Two guides at `κℓ = π/4`: `(coincidence, bunched(0), bunched(1))` from
/// the library lift and the deviation from the oracle.
fn hom_dip() -> Result<([f64; 3], f64)> {
    let kappa = 0.05;
    let length = PI / 4.0 / kappa;
    let h = ndarray::array![
        [C64::new(0.0, 0.0), C64::new(-kappa, 0.0)],
        [C64::new(-kappa, 0.0), C64::new(0.0, 0.0)]
    ];
    let w = linalg::expm(&h.mapv(|z| z * C64::new(0.0, -length)));
    let basis = ExtendedBasis::new(2).map_err(stage("basis"))?;
    let w_ext = pair::lift_propagator(&w).map_err(stage("propagator lift"))?;
    let rho = ExtendedDensityMatrix::two_photon(basis, 0, 1).map_err(stage("initial state"))?;
    let out = w_ext.dot(&rho.entries).dot(&linalg::dagger(&w_ext));
    let p = |n: usize, m: usize| out[[basis.pair(n, m), basis.pair(n, m)]].re;
    let library = [p(0, 1) + p(1, 0), p(0, 0), p(1, 1)];

    let fock = TensorFock::new(2);
    let u_f = linalg::expm(&fock.quadratic(&h).mapv(|z| z * C64::new(0.0, -length)));
    let psi = u_f.dot(&fock.two_photon(0, 1));
    let q = |occ: [usize; 2]| psi[fock.index(&occ)].norm_sqr();
    let oracle = [q([1, 1]), q([2, 0]), q([0, 2])];
    let dev = library
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((library, dev))
}

fn fock_oracle(options: &AcceptanceOptions) -> Result<Outcome> {
    let t = &options.tolerances;
    let lift = lift_deviation()?;
    let dynamics = dynamics_deviation(options)?;
    let (hom, hom_dev) = hom_dip()?;
    let passed = lift <= t.operator_entries
        && dynamics <= t.dynamics
        && hom_dev <= t.dynamics
        && hom[0] <= t.dynamics
        && (hom[1] - 0.5).abs() <= t.dynamics
        && (hom[2] - 0.5).abs() <= t.dynamics;
    Ok(Outcome {
        passed,
        summary: format!(
            "lift deviation {lift:.2e} (M ≤ 4), 3-period dynamics deviation {dynamics:.2e}, HOM coincidence {:.2e}, bunching ({:.6}, {:.6}), oracle deviation {hom_dev:.2e}",
            hom[0], hom[1], hom[2]
        ),
        thresholds: format!("operator entries ≤ {:e}, dynamics ≤ {:e}", t.operator_entries, t.dynamics),
    })
}

fn lab_only(options: &AcceptanceOptions) -> Result<Outcome> {
    let est = lyapunov_values(options, &[0.0, PI / 4.0])?;
    let (a, b) = (est[0].per_period, est[1].per_period);
    let (quoted_a, quoted_b) = (-0.157, -0.086);
    let sign = a < 0.0 && b < 0.0;
    let order = a < b;
    Ok(Outcome {
        passed: true,
        summary: format!(
            "similarity and HOM visibility are lab-hardware figures; quoted λ {quoted_a}/{quoted_b} vs computed λ(0) = {a:.4}/period ({:.5}/μm), λ(π/4) = {b:.4}/period ({:.5}/μm): sign {}, ordering {}",
            est[0].per_um,
            est[1].per_um,
            if sign { "matches" } else { "differs" },
            if order { "matches" } else { "differs" }
        ),
        thresholds: "informational".into(),
    })
}
