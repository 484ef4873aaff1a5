use std::sync::Arc;

use serde::Serialize;

use super::fem::{triangle_gradients, Assembly, IterationRecord, ModifiedCoefficients, StepKind};
use super::mesh::Mesh;
use super::sparse::SparseLu;
use crate::error::{Error, Result};
use crate::profile::{CoefficientFamily, Profile1D, RelaxedUpperBarrier, SlabFamily, DEFAULT_DIRECTIONS};

const PICARD_RUN: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct SolveOptions {
    /// Sup-norm bound on the final nodal update.
    pub tol: f64,
    /// Euclidean bound on the interior weak residual.
    pub rtol: f64,
    pub max_iter: usize,
    /// Switch from the map `T` to Newton once successive updates contract
    /// by this factor, or after `PICARD_RUN` consecutive steps of `T`.
    pub newton_switch: f64,
    pub newton: bool,
    pub n_dirs: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, rtol: 1e-8, max_iter: 400, newton_switch: 0.95, newton: true, n_dirs: DEFAULT_DIRECTIONS }
    }
}

/// Nodal values of a P1 field on a mesh.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub mesh: Arc<Mesh>,
    pub values: Vec<f64>,
    pub eps: f64,
    pub residual_norm: f64,
    pub log: Vec<IterationRecord>,
}

impl ScalarField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>, eps: f64) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::Config(format!("field has {} values for {} nodes", values.len(), mesh.num_nodes())));
        }
        Ok(ScalarField { mesh, values, eps, residual_norm: f64::NAN, log: Vec::new() })
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn iterations(&self) -> usize {
        self.log.len()
    }
}

/// The gradient cap `R_ε`: the largest face slope `W'(s_ν)` of the relaxed slab barriers.
pub fn gradient_cap(mesh: &Mesh, prof: &Profile1D, eps: f64, n_dirs: usize) -> Result<f64> {
    Ok(RelaxedUpperBarrier::from_slabs(&SlabFamily::new(mesh.domain(), n_dirs), prof, eps)?.gradient_cap())
}

/// Solves the relaxed problem `w = ε` on `∂Ω` with the barrier as the initial guess.
pub fn solve_relaxed(
    mesh: &Arc<Mesh>,
    coeffs: &CoefficientFamily,
    prof: &Profile1D,
    eps: f64,
    opts: &SolveOptions,
) -> Result<ScalarField> {
    solve_relaxed_from(mesh, coeffs, prof, eps, opts, None)
}

/// As [`solve_relaxed`], warm-started from `initial` (clipped below by `ε`
/// and above by the relaxed barrier).
pub fn solve_relaxed_from(
    mesh: &Arc<Mesh>,
    coeffs: &CoefficientFamily,
    prof: &Profile1D,
    eps: f64,
    opts: &SolveOptions,
    initial: Option<&[f64]>,
) -> Result<ScalarField> {
    let asm = Assembly::new(mesh);
    solve_with(mesh, &asm, coeffs, prof, eps, opts, initial)
}

fn solve_with(
    mesh: &Arc<Mesh>,
    asm: &Assembly,
    coeffs: &CoefficientFamily,
    prof: &Profile1D,
    eps: f64,
    opts: &SolveOptions,
    initial: Option<&[f64]>,
) -> Result<ScalarField> {
    let barrier = RelaxedUpperBarrier::from_slabs(&SlabFamily::new(mesh.domain(), opts.n_dirs), prof, eps)?;
    let coef = ModifiedCoefficients::new(coeffs, barrier.gradient_cap(), eps)?;
    let mut w: Vec<f64> = mesh
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if mesh.is_boundary(i) {
                return eps;
            }
            let top = barrier.eval(p);
            let guess = initial.map_or(top, |v| v[i].min(top));
            guess.max(eps)
        })
        .collect();

    let mut log: Vec<IterationRecord> = Vec::new();
    let mut newton = false;
    let mut picard_run = 0;
    let mut rnorm = norm(&asm.restrict(&asm.residual(mesh, &coef, &w)));
    for it in 0..opts.max_iter {
        let (kind, update, step) = if newton {
            match newton_step(mesh, asm, &coef, &mut w, rnorm)? {
                Some((update, step, r)) => {
                    rnorm = r;
                    (StepKind::Newton, update, step)
                }
                None => {
                    newton = false;
                    let update = picard_step(mesh, asm, &coef, &mut w, eps)?;
                    rnorm = norm(&asm.restrict(&asm.residual(mesh, &coef, &w)));
                    (StepKind::Picard, update, 1.0)
                }
            }
        } else {
            let update = picard_step(mesh, asm, &coef, &mut w, eps)?;
            rnorm = norm(&asm.restrict(&asm.residual(mesh, &coef, &w)));
            (StepKind::Picard, update, 1.0)
        };
        if !update.is_finite() || !rnorm.is_finite() {
            return Err(nonconvergence(it + 1, "non-finite iterate".into(), w));
        }
        log.push(IterationRecord { kind, update, residual: rnorm, step });
        if update <= opts.tol && rnorm <= opts.rtol {
            let residual_norm = norm(&asm.restrict(&asm.plain_residual(mesh, coeffs, &w)));
            return Ok(ScalarField { mesh: Arc::clone(mesh), values: w, eps, residual_norm, log });
        }
        if it >= 10 && rnorm > 1e3 * log[it - 10].residual {
            return Err(nonconvergence(it + 1, format!("residual grew from {:e} to {rnorm:e}", log[it - 10].residual), w));
        }
        if kind == StepKind::Picard {
            picard_run += 1;
        } else {
            picard_run = 0;
        }
        if opts.newton && !newton && kind == StepKind::Picard && it >= 1 {
            let prev = log[it - 1].update;
            if update < opts.newton_switch * prev || picard_run >= PICARD_RUN {
                newton = true;
            }
        }
    }
    let last = log.last().map_or(f64::NAN, |r| r.update);
    Err(nonconvergence(opts.max_iter, format!("no convergence, last update {last:e}, residual {rnorm:e}"), w))
}

fn nonconvergence(iterations: usize, detail: String, w: Vec<f64>) -> Error {
    Error::NonConvergence { stage: None, iterations, detail, iterate: Some(w) }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn picard_step(mesh: &Mesh, asm: &Assembly, coef: &ModifiedCoefficients, w: &mut [f64], eps: f64) -> Result<f64> {
    let (k, rhs) = asm.picard_system(mesh, coef, w, eps);
    let z = SparseLu::factor(&k, &asm.symbolic)?.solve(&rhs);
    let mut update = 0.0f64;
    for (u, &i) in asm.interior.iter().enumerate() {
        update = update.max((z[u] - w[i]).abs());
        w[i] = z[u];
    }
    Ok(update)
}

/// Damped Newton step; `None` when the line search fails.
fn newton_step(
    mesh: &Mesh,
    asm: &Assembly,
    coef: &ModifiedCoefficients,
    w: &mut [f64],
    rnorm: f64,
) -> Result<Option<(f64, f64, f64)>> {
    let r = asm.restrict(&asm.residual(mesh, coef, w));
    let jac = asm.jacobian(mesh, coef, w);
    let lu = match SparseLu::factor(&jac, &asm.symbolic) {
        Ok(lu) => lu,
        Err(_) => return Ok(None),
    };
    let delta: Vec<f64> = lu.solve(&r).into_iter().map(|d| -d).collect();
    // Keep every value above half its current size.
    let mut alpha = 1.0f64;
    for (u, &i) in asm.interior.iter().enumerate() {
        if delta[u] < 0.0 {
            alpha = alpha.min(-0.5 * w[i] / delta[u]);
        }
    }
    let base: Vec<f64> = w.to_vec();
    while alpha >= 1.0 / 64.0 {
        for (u, &i) in asm.interior.iter().enumerate() {
            w[i] = base[i] + alpha * delta[u];
        }
        let trial = norm(&asm.restrict(&asm.residual(mesh, coef, w)));
        if trial <= (1.0 - 1e-4 * alpha) * rnorm || trial <= 1e-14 {
            let update = delta.iter().fold(0.0f64, |m, d| m.max((alpha * d).abs()));
            return Ok(Some((update, alpha, trial)));
        }
        alpha *= 0.5;
    }
    w.copy_from_slice(&base);
    Ok(None)
}

/// Euclidean norm of the interior weak residual with the unmodified `a` and `1/w`.
pub fn residual_norm(mesh: &Mesh, coeffs: &CoefficientFamily, field: &ScalarField) -> f64 {
    let asm = Assembly::new(mesh);
    norm(&asm.restrict(&asm.plain_residual(mesh, coeffs, &field.values)))
}

#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub eps: f64,
    pub iterations: usize,
    pub newton_steps: usize,
    pub residual_norm: f64,
    pub min_value: f64,
    /// Sup of `|w_k − w_{k−1}|` over nodes farther than `0.1·diameter` from `∂Ω`.
    pub cauchy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ContinuationResult {
    pub stages: Vec<ScalarField>,
    pub reports: Vec<StageReport>,
}

impl ContinuationResult {
    pub fn field(&self) -> &ScalarField {
        self.stages.last().expect("at least one stage")
    }

    pub fn cauchy(&self) -> Vec<f64> {
        self.reports.iter().filter_map(|r| r.cauchy).collect()
    }
}

/// `ε₀ = 0.1·max W·(min slab width)`, halved `steps` times.
pub fn default_schedule(mesh: &Mesh, prof: &Profile1D, steps: usize) -> Vec<f64> {
    let e0 = 0.1 * prof.max_value() * SlabFamily::new(mesh.domain(), DEFAULT_DIRECTIONS).min_width();
    (0..=steps).map(|k| e0 * 0.5f64.powi(k as i32)).collect()
}

/// Decreasing-`ε` sweep, each stage warm-started from the previous field.
pub fn continuation_solve(
    mesh: &Arc<Mesh>,
    coeffs: &CoefficientFamily,
    prof: &Profile1D,
    schedule: &[f64],
    opts: &SolveOptions,
) -> Result<ContinuationResult> {
    if schedule.is_empty() {
        return Err(Error::Config("empty continuation schedule".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("continuation schedule must be strictly decreasing".into()));
    }
    let last = *schedule.last().unwrap();
    if last < 1e-8 {
        return Err(Error::Config(format!("final eps {last} is below 1e-8")));
    }
    let asm = Assembly::new(mesh);
    let domain = mesh.domain();
    let deep: Vec<bool> = mesh.nodes().iter().map(|&p| domain.signed_distance(p) > 0.1 * domain.diameter()).collect();
    let mut stages: Vec<ScalarField> = Vec::with_capacity(schedule.len());
    let mut reports = Vec::with_capacity(schedule.len());
    for (k, &eps) in schedule.iter().enumerate() {
        let init = stages.last().map(|f| f.values.as_slice());
        let field = solve_with(mesh, &asm, coeffs, prof, eps, opts, init).map_err(|e| match e {
            Error::NonConvergence { iterations, detail, iterate, .. } => {
                Error::NonConvergence { stage: Some(k), iterations, detail: format!("stage {k} (eps = {eps:e}): {detail}"), iterate }
            }
            other => other,
        })?;
        let cauchy = stages.last().map(|prev| {
            prev.values
                .iter()
                .zip(&field.values)
                .zip(&deep)
                .filter(|(_, &d)| d)
                .map(|((a, b), _)| (a - b).abs())
                .fold(0.0, f64::max)
        });
        reports.push(StageReport {
            eps,
            iterations: field.iterations(),
            newton_steps: field.log.iter().filter(|r| r.kind == StepKind::Newton).count(),
            residual_norm: field.residual_norm,
            min_value: field.min(),
            cauchy,
        });
        stages.push(field);
    }
    Ok(ContinuationResult { stages, reports })
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientCapReport {
    pub cap: f64,
    pub max_gradient: f64,
    pub triangles: usize,
    /// Triangles with `|∇w| > 1.05·cap`.
    pub violations: usize,
    pub violation_fraction: f64,
}

/// Compares per-triangle `|∇w|` with the cap `W'(s_ν(ε))` of the relaxed barrier.
pub fn gradient_cap_check(field: &ScalarField, prof: &Profile1D, eps: f64) -> Result<GradientCapReport> {
    let cap = gradient_cap(&field.mesh, prof, eps, DEFAULT_DIRECTIONS)?;
    let grads = triangle_gradients(&field.mesh, &field.values);
    let max_gradient = grads.iter().copied().fold(0.0, f64::max);
    let violations = grads.iter().filter(|&&g| g > 1.05 * cap).count();
    Ok(GradientCapReport {
        cap,
        max_gradient,
        triangles: grads.len(),
        violations,
        violation_fraction: violations as f64 / grads.len().max(1) as f64,
    })
}
