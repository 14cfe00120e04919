//! Newton iteration for Abreu's equation `u^{ij}_{ij} = -A` on the lattice
//! correction of a potential, and continuation along a path of data.
//!
//! The unknowns are the correction values at interior nodes. The two outer
//! rings of kept nodes are held fixed, so the canonical part carries the
//! boundary behaviour and the linear system is square.

mod manifest;

pub use manifest::{run_manifest, PathSpec, SolveManifest, SolveOutcome};

use nalgebra::{DMatrix, Matrix2};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix, CsrMatrix};
use serde::Serialize;

use crate::functionals::f_functional;
use crate::polygon::{balance_report, ContinuityPath, ScalarField};
use crate::potential::{
    checked_inverse, guillemin_potential, min_eigenvalue, second_differences, CorrectedFields, Correction, Lattice,
    PointCurvature, PotentialField, HESSIAN_STENCIL,
};
use crate::{Error, Result};

/// Residual `r = Abreu(u) + A` at the interior nodes of the correction
/// lattice, or at kept nodes of a fresh lattice for a closed-form potential.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualField {
    #[serde(skip)]
    pub lattice: Lattice,
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
    /// Smallest Hessian eigenvalue over the nodes where the Hessian is formed.
    pub min_eigenvalue: f64,
}

impl ResidualField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L²` norm `(h² Σ r²)^{1/2}`.
    pub fn l2(&self) -> f64 {
        self.lattice.h * self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Grid used by [`residual`] when the potential has no correction.
pub const DEFAULT_SAMPLE_GRID: usize = 65;

pub fn residual(u: &PotentialField, a: &ScalarField) -> Result<ResidualField> {
    residual_on(u, a, DEFAULT_SAMPLE_GRID)
}

/// As [`residual`], sampling a closed-form potential on an `n`-node lattice.
pub fn residual_on(u: &PotentialField, a: &ScalarField, n: usize) -> Result<ResidualField> {
    let samples = crate::potential::tensor_samples(u, n)?;
    let (nodes, values) = samples
        .nodes
        .iter()
        .map(|s| (s.node, s.curvature.abreu + a.eval(&s.x)))
        .unzip();
    let min_eigenvalue = match &u.correction {
        Some(_) => {
            let fields = CorrectedFields::new(u)?;
            fields.hess.iter().flatten().map(min_eigenvalue).fold(f64::INFINITY, f64::min)
        }
        None => samples
            .nodes
            .iter()
            .map(|s| min_eigenvalue(&s.curvature.hess))
            .fold(f64::INFINITY, f64::min),
    };
    Ok(ResidualField {
        lattice: samples.lattice,
        nodes,
        values,
        min_eigenvalue,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverOptions {
    /// Target for the max-norm of the residual.
    pub tol: f64,
    /// Stop when the accepted update is this small in max-norm.
    pub step_tol: f64,
    pub max_steps: usize,
    pub max_halvings: usize,
    /// Whether the lattice energy is required not to increase on accepted
    /// steps.
    pub energy_descent: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            step_tol: 1e-10,
            max_steps: 25,
            max_halvings: 20,
            energy_descent: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveState {
    pub potential: PotentialField,
    pub a: ScalarField,
    pub residual: ResidualField,
    pub steps: usize,
    /// Step length accepted at each step.
    pub damping: Vec<f64>,
    /// Max-norm residual before the first step and after each step.
    pub residual_history: Vec<f64>,
    /// Lattice energy alongside `residual_history`: its gradient with
    /// respect to interior values is exactly `-h² r`, so Newton updates are
    /// descent directions. Starts from `𝓕` of the initial potential when
    /// that is available and from 0 otherwise.
    pub energy_history: Vec<f64>,
    /// `𝓕` by quadrature alongside `residual_history`, when available.
    pub functional_history: Vec<f64>,
    pub min_eigenvalue_history: Vec<f64>,
    /// Max-norm of the last accepted update.
    pub last_step: f64,
    /// `A + Abreu(u₀) - D_ij (u₀^{ij})` at interior nodes: the part of the
    /// residual that does not depend on the correction.
    source: Vec<f64>,
}

#[derive(Serialize)]
pub struct Diagnostics<'a> {
    pub steps: usize,
    pub max_residual: f64,
    pub l2_residual: f64,
    pub damping: &'a [f64],
    pub residual_history: &'a [f64],
    pub energy_history: &'a [f64],
    pub functional_history: &'a [f64],
    pub min_eigenvalue_history: &'a [f64],
}

fn functional_of(u: &PotentialField, a: &ScalarField) -> Option<f64> {
    match (u.domain.polygon(), a.as_affine()) {
        (Some(_), Some(_)) => f_functional(u, a).ok().map(|e| e.total),
        _ => None,
    }
}

impl SolveState {
    /// Starts from `u`, attaching a zero correction on an `grid`-node
    /// lattice when `u` has none.
    pub fn new(u: PotentialField, a: ScalarField, grid: usize) -> Result<Self> {
        let potential = if u.correction.is_some() { u } else { u.with_grid(grid)? };
        let residual = residual(&potential, &a)?;
        let functional = functional_of(&potential, &a);
        let source = source_term(&potential, &a)?;
        Ok(Self {
            residual_history: vec![residual.max_abs()],
            energy_history: vec![functional.unwrap_or(0.0)],
            functional_history: functional.into_iter().collect(),
            source,
            min_eigenvalue_history: vec![residual.min_eigenvalue],
            potential,
            a,
            residual,
            steps: 0,
            damping: Vec::new(),
            last_step: f64::INFINITY,
        })
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.max_abs()
    }

    pub fn correction(&self) -> &Correction {
        self.potential.correction.as_ref().expect("solver state carries a correction")
    }

    pub fn diagnostics(&self) -> Diagnostics<'_> {
        Diagnostics {
            steps: self.steps,
            max_residual: self.max_residual(),
            l2_residual: self.residual.l2(),
            damping: &self.damping,
            residual_history: &self.residual_history,
            energy_history: &self.energy_history,
            functional_history: &self.functional_history,
            min_eigenvalue_history: &self.min_eigenvalue_history,
        }
    }
}

fn source_term(u: &PotentialField, a: &ScalarField) -> Result<Vec<f64>> {
    let corr = u.correction.as_ref().expect("solver potentials carry a correction");
    let lat = *corr.lattice();
    let mut u0_inv = vec![Matrix2::zeros(); lat.len()];
    for k in corr.hessian_indices() {
        let x = lat.point(k);
        u0_inv[k] = checked_inverse(&u.analytic.hessian(&x)?, &x)?;
    }
    corr.interior_indices()
        .into_iter()
        .map(|k| {
            let x = lat.point(k);
            let exact = PointCurvature::from_jet(&u.analytic.jet(&x)?, &x)?;
            let [d11, d12, d22] = second_differences(&lat, k, |m| u0_inv[m]);
            Ok(a.eval(&x) + exact.abreu - (d11[(0, 0)] + 2.0 * d12[(0, 1)] + d22[(1, 1)]))
        })
        .collect()
}

/// Change of the lattice energy
/// `-h² Σ_q log det u_ij(q) - h² Σ_m c_m f_m` when `alpha · delta` is added
/// at interior nodes, `q` ranging over Hessian nodes and `c` the source.
fn energy_change(u: &PotentialField, delta: &[f64], alpha: f64, source: &[f64]) -> Result<f64> {
    let corr = u.correction.as_ref().expect("solver potentials carry a correction");
    let lat = *corr.lattice();
    let mut full = vec![0.0; lat.len()];
    for (&k, d) in corr.interior_indices().iter().zip(delta) {
        full[k] = alpha * d;
    }
    let fields = CorrectedFields::new(u)?;
    let mut log_det = 0.0;
    for q in corr.hessian_indices() {
        let h = fields.hess[q].expect("Hessian node");
        let [a, b, c] = second_differences(&lat, q, |m| full[m]);
        let trial = h + Matrix2::new(a, b, b, c);
        let det = trial.determinant();
        if !(det > 0.0) {
            return Err(Error::NotConvex { at: lat.point(q) });
        }
        log_det += (det / h.determinant()).ln();
    }
    let linear: f64 = source.iter().zip(delta).map(|(c, d)| c * alpha * d).sum();
    Ok(-lat.h * lat.h * (log_det + linear))
}

/// Jacobian of the interior residual with respect to interior correction
/// values, assembled from the linearization `δG = -U δH U` and the
/// second-difference stencils. Rows and columns follow interior node order.
pub fn jacobian(u: &PotentialField) -> Result<CsrMatrix<f64>> {
    let corr = u
        .correction
        .as_ref()
        .ok_or_else(|| Error::Precondition("the Jacobian needs a lattice correction".into()))?;
    let fields = CorrectedFields::new(u)?;
    let lat = *corr.lattice();
    let interior = corr.interior_indices();
    let mut column = vec![usize::MAX; lat.len()];
    for (c, &k) in interior.iter().enumerate() {
        column[k] = c;
    }
    let h2 = lat.h * lat.h;
    let stencil_matrix = |w: &[f64; 3]| Matrix2::new(w[0], w[1], w[1], w[2]) / h2;
    let offset = |k: usize, di: isize, dj: isize| lat.offset(k, di, dj).expect("stencil inside lattice");

    let mut coo = CooMatrix::new(interior.len(), interior.len());
    for (row, &k) in interior.iter().enumerate() {
        for (ti, tj, wt) in HESSIAN_STENCIL {
            let q = offset(k, ti, tj);
            let ui = fields.inv[q].expect("Hessian node");
            for (si, sj, ws) in HESSIAN_STENCIL {
                let m = offset(q, si, sj);
                if column[m] == usize::MAX {
                    continue;
                }
                let dg = -(ui * stencil_matrix(&ws) * ui);
                let v = (wt[0] * dg[(0, 0)] + 2.0 * wt[1] * dg[(0, 1)] + wt[2] * dg[(1, 1)]) / h2;
                if v != 0.0 {
                    coo.push(row, column[m], v);
                }
            }
        }
    }
    Ok(CsrMatrix::from(&coo))
}

/// Solves `J x = b` through a sparse Cholesky factorization of `JᵀJ`,
/// followed by iterative refinement against `J` itself.
fn solve_square(j: &CsrMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let jt = j.transpose();
    let normal = CscMatrix::from(&(&jt * j));
    let chol = CscCholesky::factor(&normal).map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
    let rhs = DMatrix::from_column_slice(b.len(), 1, b);
    let mut x = chol.solve(&(&jt * &rhs));
    for _ in 0..3 {
        let r = &rhs - j * &x;
        x += chol.solve(&(&jt * &r));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearSolve("non-finite Newton update".into()));
    }
    Ok(x.as_slice().to_vec())
}

/// Lifts interior-ordered values to a kept-ordered vector, zero elsewhere.
fn interior_to_kept(corr: &Correction, values: &[f64]) -> Vec<f64> {
    let interior = corr.interior();
    let mut it = values.iter();
    corr.kept_indices()
        .into_iter()
        .map(|k| if interior[k] { *it.next().expect("one value per interior node") } else { 0.0 })
        .collect()
}

/// `u` with `scale · delta` added at the interior nodes (interior order).
pub fn perturbed(u: &PotentialField, delta: &[f64], scale: f64) -> Result<PotentialField> {
    let corr = u
        .correction
        .as_ref()
        .ok_or_else(|| Error::Precondition("perturbing needs a lattice correction".into()))?;
    if delta.len() != corr.interior_indices().len() {
        return Err(Error::InvalidParameter("update length differs from the interior node count".into()));
    }
    let mut c = corr.clone();
    c.add_to_kept(&interior_to_kept(corr, delta), scale);
    Ok(u.clone().with_correction(c))
}

/// One damped Newton step. Trial steps are halved until the potential is
/// convex at every Hessian node, the residual max-norm does not grow and,
/// when enabled, the lattice energy does not grow.
pub fn newton_step(state: &SolveState, opts: &SolverOptions) -> Result<SolveState> {
    let j = jacobian(&state.potential)?;
    let rhs: Vec<f64> = state.residual.values.iter().map(|r| -r).collect();
    let delta = solve_square(&j, &rhs)?;
    let step_norm = delta.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if step_norm < opts.step_tol {
        let mut next = state.clone();
        next.last_step = step_norm;
        return Ok(next);
    }
    let current = state.max_residual();
    let mut alpha = 1.0;
    for _ in 0..=opts.max_halvings {
        if let Some(next) = try_step(state, &delta, alpha, current, opts)? {
            let mut next = next;
            next.last_step = alpha * step_norm;
            return Ok(next);
        }
        alpha *= 0.5;
    }
    Err(Error::Stagnation {
        halvings: opts.max_halvings,
    })
}

fn try_step(
    state: &SolveState,
    delta: &[f64],
    alpha: f64,
    current: f64,
    opts: &SolverOptions,
) -> Result<Option<SolveState>> {
    let trial = perturbed(&state.potential, delta, alpha)?;
    let r = match residual(&trial, &state.a) {
        Ok(r) => r,
        Err(Error::NotConvex { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if !(r.max_abs() <= current) || r.min_eigenvalue <= 0.0 {
        return Ok(None);
    }
    let change = energy_change(&state.potential, delta, alpha, &state.source)?;
    if opts.energy_descent && change > 0.0 {
        return Ok(None);
    }
    let energy = state.energy_history.last().expect("initial energy recorded") + change;
    let mut next = state.clone();
    next.residual_history.push(r.max_abs());
    next.min_eigenvalue_history.push(r.min_eigenvalue);
    next.energy_history.push(energy);
    next.functional_history.extend(functional_of(&trial, &state.a));
    next.damping.push(alpha);
    next.steps += 1;
    next.potential = trial;
    next.residual = r;
    Ok(Some(next))
}

/// Newton steps until the residual or the update falls below tolerance.
pub fn solve(mut state: SolveState, opts: &SolverOptions) -> Result<SolveState> {
    while state.max_residual() >= opts.tol {
        if state.steps >= opts.max_steps {
            return Err(Error::NoConvergence {
                iterations: state.steps,
                residual: state.max_residual(),
            });
        }
        state = newton_step(&state, opts)?;
        if state.last_step < opts.step_tol {
            break;
        }
    }
    Ok(state)
}

/// Outcome of a continuation run.
#[derive(Clone, Debug)]
pub struct Continuation {
    /// Converged states, one per completed sample.
    pub states: Vec<SolveState>,
    pub completed: bool,
    /// Why the run stopped early, with the sample index.
    pub failure: Option<(usize, String)>,
}

#[derive(Serialize)]
struct SampleSummary {
    t: f64,
    steps: usize,
    max_residual: f64,
    residual_history: Vec<f64>,
    min_eigenvalue_history: Vec<f64>,
}

impl Continuation {
    pub fn to_json(&self, path: &ContinuityPath) -> serde_json::Value {
        let samples: Vec<SampleSummary> = self
            .states
            .iter()
            .zip(&path.samples)
            .map(|(s, p)| SampleSummary {
                t: p.t,
                steps: s.steps,
                max_residual: s.max_residual(),
                residual_history: s.residual_history.clone(),
                min_eigenvalue_history: s.min_eigenvalue_history.clone(),
            })
            .collect();
        serde_json::json!({
            "completed": self.completed,
            "failure": self.failure.as_ref().map(|(i, m)| serde_json::json!({"sample": i, "error": m})),
            "samples": samples,
        })
    }
}

/// Solves at each path sample, warm-starting from the previous solution
/// resampled onto the new lattice. Every sample is checked for balance
/// before any solve. A failing sample stops the run and is reported with
/// the states converged so far.
pub fn continue_path(path: &ContinuityPath, grid: usize, opts: &SolverOptions) -> Result<Continuation> {
    for s in &path.samples {
        let r = balance_report(&s.polygon, &s.a);
        let residual = r.max_residual();
        if residual > 1e-8 * (1.0 + r.boundary_mass.abs()) {
            return Err(Error::Unbalanced { residual });
        }
    }
    let mut states: Vec<SolveState> = Vec::new();
    for (i, sample) in path.samples.iter().enumerate() {
        let cold = guillemin_potential(&sample.polygon).with_grid(grid)?;
        let warm = states.last().map(|prev| {
            let fresh = cold.correction.as_ref().expect("grid attached");
            cold.clone().with_correction(prev.correction().resample_onto(fresh))
        });
        // a warm start that is not convex on the new polygon falls back to u₀
        let start = match warm.map(|u| SolveState::new(u, sample.a.clone(), grid)) {
            Some(Ok(s)) => Ok(s),
            _ => SolveState::new(cold, sample.a.clone(), grid),
        };
        let attempt = start.and_then(|s| solve(s, opts));
        match attempt {
            Ok(state) => states.push(state),
            Err(e) => {
                return Ok(Continuation {
                    states,
                    completed: false,
                    failure: Some((i, e.to_string())),
                })
            }
        }
    }
    Ok(Continuation {
        states,
        completed: true,
        failure: None,
    })
}
