//! Two-photon density-matrix dynamics on the extended basis.
//!
//! The extended space stacks the ordered two-photon kets `|n,m⟩`
//! (`M²` components, first-quantized and bosonically symmetric), the
//! one-photon kets `|l⟩` and the vacuum. A period is coherent propagation
//! with the lifted Hamiltonian followed by loss of every photon sitting on an
//! auxiliary site.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::floquet::{self, Integration, TransmissionMatrix};
use crate::fock::FockSpace;
use crate::lattice::{Bond, LatticeSpec};
use crate::linalg;
use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedBasis {
    sites: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisLabel {
    Pair(usize, usize),
    Single(usize),
    Vacuum,
}

impl BasisLabel {
    pub fn photons(self) -> usize {
        match self {
            BasisLabel::Pair(..) => 2,
            BasisLabel::Single(_) => 1,
            BasisLabel::Vacuum => 0,
        }
    }
}

impl ExtendedBasis {
    pub fn new(sites: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::Domain("extended basis needs at least one site".into()));
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// `M² + M + 1`.
    pub fn dimension(&self) -> usize {
        self.sites * self.sites + self.sites + 1
    }

    pub fn pair(&self, n: usize, m: usize) -> usize {
        n * self.sites + m
    }

    pub fn single(&self, l: usize) -> usize {
        self.sites * self.sites + l
    }

    pub fn vacuum(&self) -> usize {
        self.sites * self.sites + self.sites
    }

    pub fn label(&self, index: usize) -> Option<BasisLabel> {
        let m2 = self.sites * self.sites;
        match index {
            i if i < m2 => Some(BasisLabel::Pair(i / self.sites, i % self.sites)),
            i if i < m2 + self.sites => Some(BasisLabel::Single(i - m2)),
            i if i == m2 + self.sites => Some(BasisLabel::Vacuum),
            _ => None,
        }
    }

    pub fn index(&self, label: BasisLabel) -> Option<usize> {
        match label {
            BasisLabel::Pair(n, m) if n < self.sites && m < self.sites => Some(self.pair(n, m)),
            BasisLabel::Single(l) if l < self.sites => Some(self.single(l)),
            BasisLabel::Vacuum => Some(self.vacuum()),
            _ => None,
        }
    }

    pub fn photons(&self, index: usize) -> usize {
        let m2 = self.sites * self.sites;
        if index < m2 {
            2
        } else if index < m2 + self.sites {
            1
        } else {
            0
        }
    }
}

/// Sparse operator as a coordinate list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseOperator {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseOperator {
    pub fn to_dense(&self) -> Array2<C64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        for &(r, c, v) in &self.entries {
            out[[r, c]] += v;
        }
        out
    }

    /// `K ρ K†`.
    pub fn sandwich(&self, rho: &Array2<C64>) -> Array2<C64> {
        let mut out = Array2::zeros(rho.raw_dim());
        self.sandwich_into(rho, ONE, &mut out);
        out
    }

    fn sandwich_into(&self, rho: &Array2<C64>, scale: C64, out: &mut Array2<C64>) {
        for &(r1, c1, v1) in &self.entries {
            let left = v1 * scale;
            for &(r2, c2, v2) in &self.entries {
                out[[r1, r2]] += left * v2.conj() * rho[[c1, c2]];
            }
        }
    }

    /// `A ρ` accumulated into `out` with a scalar factor.
    fn left_multiply_into(&self, rho: &Array2<C64>, scale: C64, out: &mut Array2<C64>) {
        for &(r, c, v) in &self.entries {
            let row = rho.row(c);
            out.row_mut(r).scaled_add(v * scale, &row);
        }
    }

    /// `ρ A` accumulated into `out` with a scalar factor.
    fn right_multiply_into(&self, rho: &Array2<C64>, scale: C64, out: &mut Array2<C64>) {
        for &(r, c, v) in &self.entries {
            let col = rho.column(r);
            out.column_mut(c).scaled_add(v * scale, &col);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ladder {
    Annihilation,
    Creation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorLift {
    pub site: usize,
    pub ladder: Ladder,
    pub matrix: Array2<C64>,
}

/// Block-diagonal lift: `H⊗I + I⊗H` on pairs, `H` on singles, `0` on vacuum.
pub fn lift_hamiltonian(h: &Array2<C64>) -> Result<Array2<C64>> {
    if !h.is_square() {
        return Err(Error::Domain("Hamiltonian must be square".into()));
    }
    let m = h.nrows();
    let basis = ExtendedBasis::new(m)?;
    let eye = linalg::identity(m);
    let mut out = Array2::zeros((basis.dimension(), basis.dimension()));
    let two = linalg::kron(h, &eye) + linalg::kron(&eye, h);
    let m2 = m * m;
    out.slice_mut(ndarray::s![..m2, ..m2]).assign(&two);
    out.slice_mut(ndarray::s![m2..m2 + m, m2..m2 + m]).assign(h);
    Ok(out)
}

/// Block-diagonal propagator lift: `W⊗W`, `W`, `1`.
pub fn lift_propagator(w: &Array2<C64>) -> Result<Array2<C64>> {
    if !w.is_square() {
        return Err(Error::Domain("propagator must be square".into()));
    }
    let m = w.nrows();
    let basis = ExtendedBasis::new(m)?;
    let mut out = Array2::zeros((basis.dimension(), basis.dimension()));
    let m2 = m * m;
    out.slice_mut(ndarray::s![..m2, ..m2]).assign(&linalg::kron(w, w));
    out.slice_mut(ndarray::s![m2..m2 + m, m2..m2 + m]).assign(w);
    out[[basis.vacuum(), basis.vacuum()]] = ONE;
    Ok(out)
}

/// Sparse annihilation lift from the closed form
/// `T_{l,nm} = (δ_jn δ_lm + δ_jm δ_ln)/√2`, `R_l = δ_jl`.
fn annihilation_entries(basis: &ExtendedBasis, j: usize) -> SparseOperator {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut entries = Vec::new();
    for l in 0..basis.sites() {
        if l == j {
            entries.push((basis.single(j), basis.pair(j, j), C64::new(2.0 * r, 0.0)));
        } else {
            entries.push((basis.single(l), basis.pair(j, l), C64::new(r, 0.0)));
            entries.push((basis.single(l), basis.pair(l, j), C64::new(r, 0.0)));
        }
    }
    entries.push((basis.vacuum(), basis.single(j), ONE));
    SparseOperator {
        dim: basis.dimension(),
        entries,
    }
}

/// Coefficient of the lift with the `1/(1+δ_nm)` normalization that is
/// sometimes quoted. It gives `a_j|2_j⟩ = |1_j⟩` instead of `√2 |1_j⟩`, so
/// it is kept only for comparison.
pub fn unnormalized_lift_coefficient(j: usize, l: usize, n: usize, m: usize) -> f64 {
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    (delta(j, n) * delta(l, m) + delta(j, m) * delta(l, n)) / (1.0 + delta(n, m))
}

/// Lifted `a_j`, checked entry by entry against the Fock-space oracle.
pub fn lift_annihilation(j: usize, basis: &ExtendedBasis) -> Result<OperatorLift> {
    if j >= basis.sites() {
        return Err(Error::Domain(format!("site {j} outside 0..{}", basis.sites())));
    }
    let matrix = annihilation_entries(basis, j).to_dense();
    let oracle = FockSpace::new(basis.sites())?.extended_annihilation(basis, j)?;
    let mismatch = linalg::max_abs(&(&matrix - &oracle));
    if mismatch > 1e-12 {
        return Err(Error::Construction(format!(
            "lift of a_{j} deviates from the Fock oracle by {mismatch:.3e}"
        )));
    }
    Ok(OperatorLift {
        site: j,
        ladder: Ladder::Annihilation,
        matrix,
    })
}

pub fn lift_creation(j: usize, basis: &ExtendedBasis) -> Result<OperatorLift> {
    let a = lift_annihilation(j, basis)?;
    Ok(OperatorLift {
        site: j,
        ladder: Ladder::Creation,
        matrix: linalg::dagger(&a.matrix),
    })
}

/// Thresholds checked after every period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateTolerances {
    pub hermiticity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl Default for StateTolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-10,
            trace: 1e-10,
            min_eigenvalue: -1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedDensityMatrix {
    pub entries: Array2<C64>,
    pub basis: ExtendedBasis,
}

impl ExtendedDensityMatrix {
    /// Wrap and validate a density matrix.
    pub fn new(entries: Array2<C64>, basis: ExtendedBasis) -> Result<Self> {
        if entries.dim() != (basis.dimension(), basis.dimension()) {
            return Err(Error::Domain(format!(
                "density matrix is {:?}, basis needs {}",
                entries.dim(),
                basis.dimension()
            )));
        }
        let rho = Self { entries, basis };
        rho.check(&StateTolerances::default())
            .map_err(|detail| Error::Domain(format!("invalid density matrix: {detail}")))?;
        Ok(rho)
    }

    pub fn vacuum(basis: ExtendedBasis) -> Self {
        let d = basis.dimension();
        let mut entries = Array2::zeros((d, d));
        entries[[basis.vacuum(), basis.vacuum()]] = ONE;
        Self { entries, basis }
    }

    /// `|v⟩⟨v|` for a normalized extended vector.
    pub fn pure(basis: ExtendedBasis, v: &Array1<C64>) -> Result<Self> {
        if v.len() != basis.dimension() {
            return Err(Error::Domain("state vector has wrong length".into()));
        }
        let norm = linalg::vector_norm(v);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Normalization(format!("state norm {norm}")));
        }
        let col = v.view().insert_axis(ndarray::Axis(1));
        let entries = col.dot(&col.t().mapv(|z| z.conj()));
        Ok(Self { entries, basis })
    }

    /// `a_n† a_m† |0⟩` normalized: `|1_n 1_m⟩`, or `|2_n⟩` when `n == m`.
    pub fn two_photon(basis: ExtendedBasis, n: usize, m: usize) -> Result<Self> {
        if n >= basis.sites() || m >= basis.sites() {
            return Err(Error::Domain(format!("sites ({n}, {m}) outside 0..{}", basis.sites())));
        }
        let mut v = Array1::zeros(basis.dimension());
        if n == m {
            v[basis.pair(n, n)] = ONE;
        } else {
            let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            v[basis.pair(n, m)] = r;
            v[basis.pair(m, n)] = r;
        }
        Self::pure(basis, &v)
    }

    pub fn single_photon(basis: ExtendedBasis, l: usize) -> Result<Self> {
        if l >= basis.sites() {
            return Err(Error::Domain(format!("site {l} outside 0..{}", basis.sites())));
        }
        let mut v = Array1::zeros(basis.dimension());
        v[basis.single(l)] = ONE;
        Self::pure(basis, &v)
    }

    pub fn trace(&self) -> f64 {
        self.entries.diag().iter().map(|z| z.re).sum()
    }

    /// Populations of the vacuum, one-photon and two-photon blocks.
    pub fn photon_weights(&self) -> [f64; 3] {
        let mut w = [0.0; 3];
        for (i, z) in self.entries.diag().iter().enumerate() {
            w[self.basis.photons(i)] += z.re;
        }
        w
    }

    /// Largest photon number whose block (rows or columns) holds any nonzero
    /// entry; `None` for the zero matrix.
    pub fn highest_occupied_block(&self) -> Option<usize> {
        let mut highest = None;
        for ((r, c), z) in self.entries.indexed_iter() {
            if *z != ZERO {
                let p = self.basis.photons(r).max(self.basis.photons(c));
                highest = Some(highest.map_or(p, |h: usize| h.max(p)));
            }
        }
        highest
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::hermiticity_residual(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::hermitian_eigenvalues(&self.entries)?
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min))
    }

    /// Largest `|ρ_{(n,m),x} − ρ_{(m,n),x}|` over the two-photon rows.
    pub fn exchange_asymmetry(&self) -> f64 {
        let b = &self.basis;
        let mut worst: f64 = 0.0;
        for n in 0..b.sites() {
            for m in (n + 1)..b.sites() {
                let (i, j) = (b.pair(n, m), b.pair(m, n));
                for x in 0..b.dimension() {
                    worst = worst.max((self.entries[[i, x]] - self.entries[[j, x]]).norm());
                }
            }
        }
        worst
    }

    fn check(&self, tol: &StateTolerances) -> std::result::Result<(), String> {
        if self.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err("non-finite entries".into());
        }
        let herm = self.hermiticity_residual();
        if herm > tol.hermiticity {
            return Err(format!("hermiticity residual {herm:.3e}"));
        }
        let tr = self.trace();
        if tr < -tol.trace || tr > 1.0 + tol.trace {
            return Err(format!("trace {tr}"));
        }
        let min = self.min_eigenvalue().map_err(|e| e.to_string())?;
        if min < tol.min_eigenvalue {
            return Err(format!("minimum eigenvalue {min:.3e}"));
        }
        Ok(())
    }

    /// Reduced two-photon block on the given sites, `(n,m) × (n',m')`.
    pub fn two_photon_block(&self, sites: &[usize]) -> Array2<C64> {
        let k = sites.len();
        let idx: Vec<usize> = sites
            .iter()
            .flat_map(|&n| sites.iter().map(move |&m| (n, m)))
            .map(|(n, m)| self.basis.pair(n, m))
            .collect();
        Array2::from_shape_fn((k * k, k * k), |(r, c)| self.entries[[idx[r], idx[c]]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Propagator {
    /// `ρ → W_ext ρ W_ext†` with the lifted single-particle propagator.
    #[default]
    Factorized,
    /// Direct integration of `dρ/dz = −i[H_ext(z), ρ]`; slow reference path.
    Commutator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Dissipation {
    /// Every auxiliary photon is lost with certainty.
    Complete,
    /// Integrate `dρ/ds = −{N_aux, ρ} + 2 Σ a ρ a†` over `s ∈ [0, γτ]`.
    FiniteRate { gamma_tau: f64 },
}

impl Default for Dissipation {
    fn default() -> Self {
        Dissipation::Complete
    }
}

impl Dissipation {
    /// `2γτ = 30`.
    pub const DEFAULT_GAMMA_TAU: f64 = 15.0;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PairOptions {
    pub integration: Integration,
    pub propagator: Propagator,
    pub dissipation: Dissipation,
    pub tolerances: StateTolerances,
    /// Skip the per-period eigenvalue check (it dominates the cost for large M).
    pub skip_positivity: bool,
}

/// Precomputed one-period map for one lattice.
#[derive(Debug, Clone)]
pub struct PairEvolution {
    spec: LatticeSpec,
    basis: ExtendedBasis,
    options: PairOptions,
    lifted_w: Option<Array2<C64>>,
    kraus: Vec<SparseOperator>,
    aux_annihilators: Vec<SparseOperator>,
    aux_number: Vec<f64>,
}

impl PairEvolution {
    pub fn new(spec: &LatticeSpec, options: PairOptions) -> Result<Self> {
        spec.validate()?;
        let basis = ExtendedBasis::new(spec.site_count())?;
        let lifted_w = match options.propagator {
            Propagator::Factorized => {
                let w = floquet::period_propagator(spec, &options.integration)?;
                Some(lift_propagator(&w)?)
            }
            Propagator::Commutator => None,
        };
        let aux = spec.aux_sites();
        if let Dissipation::FiniteRate { gamma_tau } = options.dissipation {
            if !(gamma_tau > 0.0 && gamma_tau.is_finite()) {
                return Err(Error::Configuration(format!("gamma_tau must be positive, got {gamma_tau}")));
            }
        }
        for &a in &aux {
            lift_annihilation(a, &basis)?;
        }
        let aux_annihilators = aux.iter().map(|&a| annihilation_entries(&basis, a)).collect();
        let is_aux: Vec<bool> = (0..basis.sites()).map(|s| aux.contains(&s)).collect();
        let aux_number = (0..basis.dimension())
            .map(|i| match basis.label(i) {
                Some(BasisLabel::Pair(n, m)) => is_aux[n] as u8 as f64 + is_aux[m] as u8 as f64,
                Some(BasisLabel::Single(l)) => is_aux[l] as u8 as f64,
                _ => 0.0,
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            basis,
            options,
            lifted_w,
            kraus: complete_loss_kraus(&basis, &is_aux),
            aux_annihilators,
            aux_number,
        })
    }

    pub fn basis(&self) -> ExtendedBasis {
        self.basis
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn kraus_operators(&self) -> &[SparseOperator] {
        &self.kraus
    }

    pub fn propagate(&self, rho: &Array2<C64>) -> Result<Array2<C64>> {
        match &self.lifted_w {
            Some(w) => Ok(w.dot(rho).dot(&linalg::dagger(w))),
            None => commutator_period(&self.spec, &self.basis, rho, &self.options.integration),
        }
    }

    pub fn dissipate(&self, rho: &Array2<C64>) -> Array2<C64> {
        match self.options.dissipation {
            Dissipation::Complete => {
                let mut out = Array2::zeros(rho.raw_dim());
                for k in &self.kraus {
                    k.sandwich_into(rho, ONE, &mut out);
                }
                out
            }
            Dissipation::FiniteRate { gamma_tau } => self.lindblad(rho, gamma_tau),
        }
    }

    fn lindblad_rhs(&self, rho: &Array2<C64>) -> Array2<C64> {
        let n = &self.aux_number;
        let mut out = Array2::from_shape_fn(rho.raw_dim(), |(r, c)| -(n[r] + n[c]) * rho[[r, c]]);
        for a in &self.aux_annihilators {
            a.sandwich_into(rho, C64::new(2.0, 0.0), &mut out);
        }
        out
    }

    fn lindblad(&self, rho: &Array2<C64>, gamma_tau: f64) -> Array2<C64> {
        let steps = (gamma_tau / LINDBLAD_STEP).ceil().max(1.0) as usize;
        let h = gamma_tau / steps as f64;
        let mut y = rho.clone();
        for _ in 0..steps {
            let k1 = self.lindblad_rhs(&y);
            let k2 = self.lindblad_rhs(&(&y + &k1.mapv(|v| v * (0.5 * h))));
            let k3 = self.lindblad_rhs(&(&y + &k2.mapv(|v| v * (0.5 * h))));
            let k4 = self.lindblad_rhs(&(&y + &k3.mapv(|v| v * h)));
            let incr = k1 + &k2.mapv(|v| v * 2.0) + &k3.mapv(|v| v * 2.0) + &k4;
            y.scaled_add(C64::new(h / 6.0, 0.0), &incr);
        }
        y
    }

    /// One full period; `period` is only used in diagnostics.
    pub fn step(&self, rho: &ExtendedDensityMatrix, period: usize) -> Result<ExtendedDensityMatrix> {
        if rho.basis != self.basis {
            return Err(Error::Domain("density matrix basis does not match the lattice".into()));
        }
        let propagated = self.propagate(&rho.entries)?;
        let tr_in = rho.trace();
        let tr_mid: f64 = propagated.diag().iter().map(|z| z.re).sum();
        if (tr_mid - tr_in).abs() > 1e-8 {
            return Err(Error::NumericalStability {
                period,
                detail: format!("propagation changed the trace by {:.3e}", tr_mid - tr_in),
            });
        }
        let out = ExtendedDensityMatrix {
            entries: self.dissipate(&propagated),
            basis: self.basis,
        };
        self.check_step(rho, &out, period)?;
        Ok(out)
    }

    fn check_step(
        &self,
        before: &ExtendedDensityMatrix,
        after: &ExtendedDensityMatrix,
        period: usize,
    ) -> Result<()> {
        let tol = &self.options.tolerances;
        let fail = |detail: String| Err(Error::NumericalStability { period, detail });
        if after.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return fail("non-finite entries".into());
        }
        let herm = after.hermiticity_residual();
        if herm > tol.hermiticity {
            return fail(format!("hermiticity residual {herm:.3e}"));
        }
        let (t0, t1) = (before.trace(), after.trace());
        if t1 > t0 + tol.trace || t1 < -tol.trace {
            return fail(format!("trace went from {t0} to {t1}"));
        }
        let (w0, w1) = (before.photon_weights(), after.photon_weights());
        if w1[2] > w0[2] + tol.trace || w1[0] < w0[0] - tol.trace {
            return fail(format!("photon-number weights moved upward: {w0:?} -> {w1:?}"));
        }
        if after.highest_occupied_block() > before.highest_occupied_block() {
            return fail("weight appeared in a higher photon-number block".into());
        }
        if !self.options.skip_positivity {
            let min = after.min_eigenvalue()?;
            if min < tol.min_eigenvalue {
                return fail(format!("minimum eigenvalue {min:.3e}"));
            }
        }
        Ok(())
    }

    /// Evolve `k` periods, handing every intermediate state (including the
    /// initial one at index 0) to `visit`.
    pub fn run<F>(&self, initial: ExtendedDensityMatrix, k: usize, mut visit: F) -> Result<ExtendedDensityMatrix>
    where
        F: FnMut(usize, &ExtendedDensityMatrix) -> Result<()>,
    {
        let mut rho = initial;
        visit(0, &rho)?;
        for period in 1..=k {
            rho = self.step(&rho, period)?;
            visit(period, &rho)?;
        }
        Ok(rho)
    }
}

/// Step length in `γz` for the finite-rate loss integration.
const LINDBLAD_STEP: f64 = 0.004;

/// Kraus operators of total loss on the auxiliary sites, one per auxiliary
/// occupation pattern: none, one photon on `a`, two photons on `{a, a'}`.
fn complete_loss_kraus(basis: &ExtendedBasis, is_aux: &[bool]) -> Vec<SparseOperator> {
    let dim = basis.dimension();
    let m = basis.sites();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let straight: Vec<usize> = (0..m).filter(|&s| !is_aux[s]).collect();
    let aux: Vec<usize> = (0..m).filter(|&s| is_aux[s]).collect();
    let mut ops = Vec::new();

    let mut keep = Vec::new();
    for &n in &straight {
        for &k in &straight {
            keep.push((basis.pair(n, k), basis.pair(n, k), ONE));
        }
        keep.push((basis.single(n), basis.single(n), ONE));
    }
    keep.push((basis.vacuum(), basis.vacuum(), ONE));
    ops.push(SparseOperator { dim, entries: keep });

    for &a in &aux {
        let mut entries: Vec<_> = straight
            .iter()
            .flat_map(|&s| {
                [
                    (basis.single(s), basis.pair(s, a), C64::new(r, 0.0)),
                    (basis.single(s), basis.pair(a, s), C64::new(r, 0.0)),
                ]
            })
            .collect();
        entries.push((basis.vacuum(), basis.single(a), ONE));
        ops.push(SparseOperator { dim, entries });
    }

    for (i, &a) in aux.iter().enumerate() {
        for &b in &aux[i..] {
            let entries = if a == b {
                vec![(basis.vacuum(), basis.pair(a, a), ONE)]
            } else {
                vec![
                    (basis.vacuum(), basis.pair(a, b), C64::new(r, 0.0)),
                    (basis.vacuum(), basis.pair(b, a), C64::new(r, 0.0)),
                ]
            };
            ops.push(SparseOperator { dim, entries });
        }
    }
    ops
}

fn lifted_bonds(basis: &ExtendedBasis, bonds: &[Bond], beta0: f64) -> SparseOperator {
    let m = basis.sites();
    let mut entries = Vec::new();
    for b in bonds {
        let e = C64::new(b.element, 0.0);
        for (x, y) in [(b.straight, b.aux), (b.aux, b.straight)] {
            for k in 0..m {
                entries.push((basis.pair(x, k), basis.pair(y, k), e));
                entries.push((basis.pair(k, x), basis.pair(k, y), e));
            }
            entries.push((basis.single(x), basis.single(y), e));
        }
    }
    if beta0 != 0.0 {
        for n in 0..m {
            for k in 0..m {
                entries.push((basis.pair(n, k), basis.pair(n, k), C64::new(2.0 * beta0, 0.0)));
            }
            entries.push((basis.single(n), basis.single(n), C64::new(beta0, 0.0)));
        }
    }
    SparseOperator {
        dim: basis.dimension(),
        entries,
    }
}

fn commutator_rhs(h: &SparseOperator, rho: &Array2<C64>) -> Array2<C64> {
    // −i(Hρ − ρH)
    let mut out = Array2::zeros(rho.raw_dim());
    h.left_multiply_into(rho, C64::new(0.0, -1.0), &mut out);
    h.right_multiply_into(rho, C64::new(0.0, 1.0), &mut out);
    out
}

fn commutator_period(
    spec: &LatticeSpec,
    basis: &ExtendedBasis,
    rho: &Array2<C64>,
    opts: &Integration,
) -> Result<Array2<C64>> {
    if opts.steps_per_period == 0 {
        return Err(Error::Configuration("steps_per_period must be positive".into()));
    }
    let h = spec.period_t / opts.steps_per_period as f64;
    let lift = |z: f64| -> Result<SparseOperator> {
        Ok(lifted_bonds(basis, &spec.bonds(z)?, spec.onsite_beta0))
    };
    let mut y = rho.clone();
    for step in 0..opts.steps_per_period {
        let z = step as f64 * h;
        let (h0, hh, h1) = (lift(z)?, lift(z + 0.5 * h)?, lift(z + h)?);
        let k1 = commutator_rhs(&h0, &y);
        let k2 = commutator_rhs(&hh, &(&y + &k1.mapv(|v| v * (0.5 * h))));
        let k3 = commutator_rhs(&hh, &(&y + &k2.mapv(|v| v * (0.5 * h))));
        let k4 = commutator_rhs(&h1, &(&y + &k3.mapv(|v| v * h)));
        let incr = k1 + &k2.mapv(|v| v * 2.0) + &k3.mapv(|v| v * 2.0) + &k4;
        y.scaled_add(C64::new(h / 6.0, 0.0), &incr);
    }
    Ok(y)
}

/// One period from an arbitrary valid state.
pub fn propagate_density_period(
    spec: &LatticeSpec,
    rho: &ExtendedDensityMatrix,
    options: PairOptions,
) -> Result<ExtendedDensityMatrix> {
    PairEvolution::new(spec, options)?.step(rho, 1)
}

/// Two photons injected at straight ordinals `n0`, `m0`, evolved `k` periods.
pub fn evolve_pair(
    spec: &LatticeSpec,
    n0: usize,
    m0: usize,
    k: usize,
    options: PairOptions,
) -> Result<ExtendedDensityMatrix> {
    let engine = PairEvolution::new(spec, options)?;
    let initial = initial_pair_state(spec, n0, m0)?;
    engine.run(initial, k, |_, _| Ok(()))
}

pub fn initial_pair_state(spec: &LatticeSpec, n0: usize, m0: usize) -> Result<ExtendedDensityMatrix> {
    let n = spec.n_straight;
    if n0 >= n || m0 >= n {
        return Err(Error::Domain(format!("injection ({n0}, {m0}) outside 0..{n}")));
    }
    let basis = ExtendedBasis::new(spec.site_count())?;
    let s = spec.straight_sites();
    ExtendedDensityMatrix::two_photon(basis, s[n0], s[m0])
}

/// Coincidence distribution on the straight sites.
///
/// `gamma[n][m] = ⟨n,m|ρ|n,m⟩` over ordered pairs, so an unordered pair
/// `n ≠ m` carries weight `gamma[n][m] + gamma[m][n]` and the full sum is
/// the two-photon survival probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub gamma: Array2<f64>,
    pub survival_p2: f64,
}

impl CorrelationMatrix {
    pub fn new(gamma: Array2<f64>) -> Result<Self> {
        if !gamma.is_square() {
            return Err(Error::Domain("correlation matrix must be square".into()));
        }
        for ((r, c), &v) in gamma.indexed_iter() {
            if !v.is_finite() || v < -1e-12 {
                return Err(Error::Positivity { row: r, col: c, value: v });
            }
        }
        let survival_p2 = gamma.sum();
        Ok(Self { gamma, survival_p2 })
    }

    pub fn size(&self) -> usize {
        self.gamma.nrows()
    }

    /// Divide by the survival probability (post-selection on two detections).
    pub fn normalized(&self) -> Result<Self> {
        if !(self.survival_p2 > 0.0) {
            return Err(Error::Normalization("no two-photon weight to normalize".into()));
        }
        Ok(Self {
            gamma: self.gamma.mapv(|v| v / self.survival_p2),
            survival_p2: self.survival_p2,
        })
    }

    /// Weights over unordered pairs, upper triangle.
    pub fn unordered(&self) -> Array2<f64> {
        let n = self.size();
        Array2::from_shape_fn((n, n), |(i, j)| match i.cmp(&j) {
            std::cmp::Ordering::Less => self.gamma[[i, j]] + self.gamma[[j, i]],
            std::cmp::Ordering::Equal => self.gamma[[i, i]],
            std::cmp::Ordering::Greater => 0.0,
        })
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.gamma - &self.gamma.t()).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Weighted mean of the pair coordinates `(n, m)`.
    pub fn centroid(&self) -> Result<(f64, f64)> {
        let total = self.gamma.sum();
        if !(total > 0.0) {
            return Err(Error::Domain("correlation matrix has no weight".into()));
        }
        let (mut x, mut y) = (0.0, 0.0);
        for ((r, c), &v) in self.gamma.indexed_iter() {
            x += r as f64 * v;
            y += c as f64 * v;
        }
        Ok((x / total, y / total))
    }

    /// Largest absolute entry difference.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        if self.size() != other.size() {
            return Err(Error::Domain("correlation matrices differ in size".into()));
        }
        Ok((&self.gamma - &other.gamma).iter().fold(0.0, |m, v| m.max(v.abs())))
    }
}

pub fn correlation_matrix(rho: &ExtendedDensityMatrix, spec: &LatticeSpec) -> Result<CorrelationMatrix> {
    if rho.basis.sites() != spec.site_count() {
        return Err(Error::Domain("density matrix does not belong to this lattice".into()));
    }
    let s = spec.straight_sites();
    let n = s.len();
    let mut gamma = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let idx = rho.basis.pair(s[i], s[j]);
            let v = rho.entries[[idx, idx]].re;
            if v < -1e-12 {
                return Err(Error::Positivity { row: i, col: j, value: v });
            }
            gamma[[i, j]] = v.max(0.0);
        }
    }
    CorrelationMatrix::new(gamma)
}

/// Coincidences from the single-photon transmission matrix:
/// `|U_{j,n0} U_{l,m0} + U_{j,m0} U_{l,n0}|² / (1 + δ_jl)` over unordered
/// pairs, halved when both photons start in the same guide.
pub fn pair_correlation_via_u(u: &TransmissionMatrix, n0: usize, m0: usize) -> Result<CorrelationMatrix> {
    let n = u.size();
    if n0 >= n || m0 >= n {
        return Err(Error::Domain(format!("injection ({n0}, {m0}) outside 0..{n}")));
    }
    let e = &u.entries;
    let source = if n0 == m0 { 0.5 } else { 1.0 };
    let mut gamma = Array2::zeros((n, n));
    for j in 0..n {
        for l in 0..n {
            let amp = e[[j, n0]] * e[[l, m0]] + e[[j, m0]] * e[[l, n0]];
            let unordered = source * amp.norm_sqr() / if j == l { 2.0 } else { 1.0 };
            // split the unordered weight evenly over (j, l) and (l, j)
            gamma[[j, l]] = if j == l { unordered } else { unordered / 2.0 };
        }
    }
    CorrelationMatrix::new(gamma)
}

/// First-quantized two-photon amplitudes `ψ_{jl}` after `Uᵏ`, symmetric.
pub fn pair_amplitudes(u: &TransmissionMatrix, n0: usize, m0: usize, k: usize) -> Result<Array2<C64>> {
    let n = u.size();
    if n0 >= n || m0 >= n {
        return Err(Error::Domain(format!("injection ({n0}, {m0}) outside 0..{n}")));
    }
    let mut psi = Array2::zeros((n, n));
    if n0 == m0 {
        psi[[n0, n0]] = ONE;
    } else {
        let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[[n0, m0]] = r;
        psi[[m0, n0]] = r;
    }
    let uk = u.power(k).entries;
    Ok(uk.dot(&psi).dot(&uk.t()))
}

/// `Γ_{jl} = |ψ_{jl}|²` for first-quantized amplitudes.
pub fn correlation_from_amplitudes(psi: &Array2<C64>) -> Result<CorrelationMatrix> {
    CorrelationMatrix::new(psi.mapv(|z| z.norm_sqr()))
}
