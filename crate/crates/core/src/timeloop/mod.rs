//! Implicit Runge-Kutta time stepping for systems in mass form M u' = N(t, u).
//!
//! Stage slopes F_r solve M F_r = N(t + c_r dt, u + dt Σ_s a_rs F_s). Linear systems
//! take one stacked solve per step; nonlinear systems use Newton on the same equations.

mod system;

pub use system::{check_linearity, Jacobian, LinearOde, System};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::butcher::ButcherTableau;
use crate::error::{Error, Result};
use crate::linalg::{bicgstab, factor_csr, norm_inf, Csr, LinearOp, SparseLu};

/// Linear-solver choice for the stacked stage system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Direct,
    Krylov,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" => Ok(SolverKind::Direct),
            "krylov" => Ok(SolverKind::Krylov),
            _ => Err(Error::Data(format!("unknown solver `{s}` (expected direct or krylov)"))),
        }
    }
}

/// Handling of a span that is not an integer number of steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StepPolicy {
    /// Reject the run.
    #[default]
    Exact,
    /// Keep stepping while t < t_end; the run ends at the first grid time ≥ t_end.
    Cover,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    pub solver: SolverKind,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub krylov_tol: f64,
    pub krylov_max_iter: usize,
    pub policy: StepPolicy,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            solver: SolverKind::Direct,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            krylov_tol: 1e-12,
            krylov_max_iter: 5000,
            policy: StepPolicy::Exact,
        }
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepStats {
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    pub linear_residual: f64,
    pub newton_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepReport {
    pub steps: usize,
    pub t_final: f64,
    pub newton_iterations: Vec<usize>,
    pub max_linear_residual: f64,
    pub max_newton_residual: f64,
    /// Steps that were retried as two half steps after a Newton failure.
    pub halved_steps: usize,
    pub wall_time_s: f64,
}

/// Stepper bound to one system and tableau; caches the stacked factorization of linear
/// systems per step size.
pub struct Integrator<'a> {
    system: &'a dyn System,
    tab: &'a ButcherTableau,
    opts: StepOptions,
    cached: Option<(u64, SparseLu)>,
    mass_lu: Option<SparseLu>,
}

impl<'a> Integrator<'a> {
    pub fn new(system: &'a dyn System, tab: &'a ButcherTableau, opts: StepOptions) -> Self {
        Self { system, tab, opts, cached: None, mass_lu: None }
    }

    pub fn options(&self) -> &StepOptions {
        &self.opts
    }

    fn stage_times(&self, t: f64, dt: f64) -> Vec<f64> {
        self.tab.c().iter().map(|c| t + c * dt).collect()
    }

    /// Stacked right-hand side [N(t + c_r dt, u)]_r.
    fn frozen_rhs(&self, t: f64, u: &[f64], dt: f64) -> Vec<f64> {
        let n = self.system.dim();
        let r = self.tab.stages();
        let mut out = vec![0.0; n * r];
        let mut tmp = vec![0.0; n];
        for (s, ts) in self.stage_times(t, dt).into_iter().enumerate() {
            self.system.rhs(ts, u, &mut tmp);
            for i in 0..n {
                out[i * r + s] = tmp[i];
            }
        }
        out
    }

    /// U_r = u + dt Σ_s a_rs F_s for stacked F.
    fn stage_states(&self, u: &[f64], f: &[f64], dt: f64) -> Vec<Vec<f64>> {
        let n = u.len();
        let r = self.tab.stages();
        (0..r)
            .map(|p| (0..n).map(|i| u[i] + dt * (0..r).map(|s| self.tab.a(p, s) * f[i * r + s]).sum::<f64>()).collect())
            .collect()
    }

    fn update(&self, u: &[f64], f: &[f64], dt: f64) -> Vec<f64> {
        let r = self.tab.stages();
        let b = self.tab.b();
        u.iter().enumerate().map(|(i, ui)| ui + dt * (0..r).map(|s| b[s] * f[i * r + s]).sum::<f64>()).collect()
    }

    /// One step from (t, u) with step dt.
    pub fn step(&mut self, t: f64, u: &[f64], dt: f64) -> Result<(Vec<f64>, StepStats)> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Dimension(format!("step size must be positive, got {dt}")));
        }
        if u.len() != self.system.dim() {
            return Err(Error::Dimension(format!("state has {} entries, system {}", u.len(), self.system.dim())));
        }
        let (f, stats) =
            if self.system.is_linear() { self.linear_stages(t, u, dt)? } else { self.newton_stages(t, u, dt)? };
        Ok((self.update(u, &f, dt), stats))
    }

    fn linear_stages(&mut self, t: f64, u: &[f64], dt: f64) -> Result<(Vec<f64>, StepStats)> {
        let rhs = self.frozen_rhs(t, u, dt);
        let jac = self.system.jacobian(t, u);
        match (self.opts.solver, &jac) {
            (SolverKind::Direct, Jacobian::Sparse(k)) => {
                let key = dt.to_bits();
                if self.cached.as_ref().map(|c| c.0) != Some(key) {
                    let js: Vec<&Csr> = vec![k.as_ref(); self.tab.stages()];
                    let lu = factor_csr(&assemble(self.system.mass(), &js, self.tab, dt))?;
                    self.cached = Some((key, lu));
                }
                let f = self.cached.as_ref().unwrap().1.solve(&rhs);
                Ok((f, StepStats::default()))
            }
            (SolverKind::Direct, Jacobian::Operator(_)) => {
                Err(Error::Unsupported("direct stage solves need an assembled Jacobian; use the krylov solver".into()))
            }
            (SolverKind::Krylov, _) => {
                let ops: Vec<&dyn LinearOp> = vec![jac.as_op(); self.tab.stages()];
                let mut f = self.mass_solve_guess(&rhs)?;
                let rep = self.krylov(&ops, dt, &rhs, &mut f)?;
                Ok((f, StepStats { linear_iterations: rep.0, linear_residual: rep.1, ..Default::default() }))
            }
        }
    }

    /// Initial stage guess M⁻¹ N(t_r, u), stage by stage.
    fn mass_solve_guess(&mut self, rhs: &[f64]) -> Result<Vec<f64>> {
        let Some(m) = self.system.mass() else {
            return Ok(rhs.to_vec());
        };
        if self.mass_lu.is_none() {
            self.mass_lu = Some(factor_csr(m)?);
        }
        let lu = self.mass_lu.as_ref().unwrap();
        let n = m.n();
        let r = self.tab.stages();
        let mut out = vec![0.0; rhs.len()];
        for s in 0..r {
            let col: Vec<f64> = (0..n).map(|i| rhs[i * r + s]).collect();
            for (i, v) in lu.solve(&col).into_iter().enumerate() {
                out[i * r + s] = v;
            }
        }
        Ok(out)
    }

    fn krylov(&self, ops: &[&dyn LinearOp], dt: f64, b: &[f64], x: &mut [f64]) -> Result<(usize, f64)> {
        let n = self.system.dim();
        let r = self.tab.stages();
        let mass = self.system.mass();
        let mdiag = mass.map_or_else(|| vec![1.0; n], |m| m.diagonal());
        let kdiags: Vec<Vec<f64>> = ops.iter().map(|o| o.diagonal()).collect();
        let mut diag = vec![0.0; n * r];
        for i in 0..n {
            for p in 0..r {
                diag[i * r + p] = mdiag[i] - dt * self.tab.a(p, p) * kdiags[p][i];
            }
        }
        let apply = |xv: &[f64], yv: &mut [f64]| stacked_apply(mass, ops, self.tab, dt, xv, yv);
        let rep = bicgstab(apply, &diag, b, x, self.opts.krylov_tol, self.opts.krylov_max_iter)?;
        Ok((rep.iterations, rep.relative_residual))
    }

    /// Newton iteration on the stage equations; works for linear systems too.
    pub fn newton_stages(&mut self, t: f64, u: &[f64], dt: f64) -> Result<(Vec<f64>, StepStats)> {
        let n = self.system.dim();
        let r = self.tab.stages();
        let times = self.stage_times(t, dt);
        let mut f = self.mass_solve_guess(&self.frozen_rhs(t, u, dt))?;
        let mut stats = StepStats::default();
        let mut tmp = vec![0.0; n];
        let residual = |f: &[f64], states: &[Vec<f64>], tmp: &mut Vec<f64>| -> Vec<f64> {
            let mut g = vec![0.0; n * r];
            for p in 0..r {
                self.system.rhs(times[p], &states[p], tmp);
                let fp: Vec<f64> = (0..n).map(|i| f[i * r + p]).collect();
                let mf = self.system.mass().map_or(fp.clone(), |m| m.mul_vec(&fp));
                for i in 0..n {
                    g[i * r + p] = mf[i] - tmp[i];
                }
            }
            g
        };
        let mut states = self.stage_states(u, &f, dt);
        let mut g = residual(&f, &states, &mut tmp);
        let mut res = norm_inf(&g);
        while res > self.opts.newton_tol {
            if stats.newton_iterations >= self.opts.newton_max_iter || !res.is_finite() {
                return Err(Error::Newton { step: 0, residual: res, iterations: stats.newton_iterations });
            }
            let jacs: Vec<Jacobian<'_>> = (0..r).map(|p| self.system.jacobian(times[p], &states[p])).collect();
            let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
            let delta = match self.opts.solver {
                SolverKind::Direct => {
                    let js = jacs
                        .iter()
                        .map(|j| match j {
                            Jacobian::Sparse(c) => Ok(c.as_ref()),
                            Jacobian::Operator(_) => Err(Error::Unsupported(
                                "direct stage solves need an assembled Jacobian; use the krylov solver".into(),
                            )),
                        })
                        .collect::<Result<Vec<&Csr>>>()?;
                    factor_csr(&assemble(self.system.mass(), &js, self.tab, dt))?.solve(&neg_g)
                }
                SolverKind::Krylov => {
                    let ops: Vec<&dyn LinearOp> = jacs.iter().map(|j| j.as_op()).collect();
                    let mut d = vec![0.0; n * r];
                    let rep = self.krylov(&ops, dt, &neg_g, &mut d)?;
                    stats.linear_iterations += rep.0;
                    stats.linear_residual = stats.linear_residual.max(rep.1);
                    d
                }
            };
            let step_size = norm_inf(&delta);
            f.iter_mut().zip(&delta).for_each(|(a, d)| *a += d);
            stats.newton_iterations += 1;
            states = self.stage_states(u, &f, dt);
            g = residual(&f, &states, &mut tmp);
            res = norm_inf(&g);
            // the residual of a converged iterate can sit at rounding level above an absolute
            // tolerance when N is large; a correction at rounding level ends the iteration too
            if step_size <= 1e-14 * (1.0 + norm_inf(&f)) {
                break;
            }
        }
        stats.newton_residual = res;
        Ok((f, stats))
    }
}

/// Stacked stage matrix (node-interleaved): block (p, s) = δ_ps M − dt a_ps J_p.
pub fn assemble(mass: Option<&Csr>, jacs: &[&Csr], tab: &ButcherTableau, dt: f64) -> Csr {
    let r = tab.stages();
    let n = jacs[0].n();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n * r];
    for i in 0..n {
        for p in 0..r {
            let row = &mut rows[i * r + p];
            match mass {
                Some(m) => row.extend(m.row(i).map(|(j, v)| (j * r + p, v))),
                None => row.push((i * r + p, 1.0)),
            }
            for (j, v) in jacs[p].row(i) {
                for s in 0..r {
                    let a = tab.a(p, s);
                    if a != 0.0 {
                        row.push((j * r + s, -dt * a * v));
                    }
                }
            }
        }
    }
    Csr::from_rows(n * r, rows)
}

fn stacked_apply(mass: Option<&Csr>, ops: &[&dyn LinearOp], tab: &ButcherTableau, dt: f64, x: &[f64], y: &mut [f64]) {
    let r = tab.stages();
    let n = x.len() / r;
    let mut xs = vec![0.0; n];
    let mut ys = vec![0.0; n];
    y.iter_mut().for_each(|v| *v = 0.0);
    for p in 0..r {
        // combined stage input Σ_s a_ps x_s
        for (i, v) in xs.iter_mut().enumerate() {
            *v = (0..r).map(|s| tab.a(p, s) * x[i * r + s]).sum();
        }
        ops[p].apply(&xs, &mut ys);
        for i in 0..n {
            y[i * r + p] -= dt * ys[i];
        }
        let xp: Vec<f64> = (0..n).map(|i| x[i * r + p]).collect();
        match mass {
            Some(m) => {
                m.apply(&xp, &mut ys);
                for i in 0..n {
                    y[i * r + p] += ys[i];
                }
            }
            None => {
                for i in 0..n {
                    y[i * r + p] += xp[i];
                }
            }
        }
    }
}

/// Number of steps covering [t0, t_end] under the policy.
pub fn step_count(t0: f64, t_end: f64, dt: f64, policy: StepPolicy) -> Result<usize> {
    let span = t_end - t0;
    if span < 0.0 || !(dt > 0.0) {
        return Err(Error::StepCount { span, dt });
    }
    let m = span / dt;
    let near = m.round();
    if (m - near).abs() <= 1e-9 * near.max(1.0) {
        return Ok(near as usize);
    }
    match policy {
        StepPolicy::Exact => Err(Error::StepCount { span, dt }),
        StepPolicy::Cover => Ok(m.ceil() as usize),
    }
}

/// Steps from t0 to t_end; `recorder` sees (t, u) after every step.
pub fn integrate(
    system: &dyn System,
    tab: &ButcherTableau,
    u0: &[f64],
    t0: f64,
    t_end: f64,
    dt: f64,
    opts: StepOptions,
    mut recorder: Option<&mut dyn FnMut(f64, &[f64])>,
) -> Result<(Vec<f64>, StepReport)> {
    let clock = Instant::now();
    let steps = step_count(t0, t_end, dt, opts.policy)?;
    let mut integ = Integrator::new(system, tab, opts);
    let mut u = u0.to_vec();
    let mut report = StepReport { t_final: t0, ..Default::default() };
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let (next, stats) = match integ.step(t, &u, dt) {
            Ok(v) => v,
            Err(Error::Newton { .. }) => {
                report.halved_steps += 1;
                let (mid, s1) = integ.step(t, &u, 0.5 * dt).map_err(|e| wrap(k, e))?;
                let (end, s2) = integ.step(t + 0.5 * dt, &mid, 0.5 * dt).map_err(|e| wrap(k, e))?;
                (
                    end,
                    StepStats {
                        newton_iterations: s1.newton_iterations + s2.newton_iterations,
                        linear_iterations: s1.linear_iterations + s2.linear_iterations,
                        linear_residual: s1.linear_residual.max(s2.linear_residual),
                        newton_residual: s1.newton_residual.max(s2.newton_residual),
                    },
                )
            }
            Err(e) => return Err(wrap(k, e)),
        };
        u = next;
        report.steps += 1;
        report.t_final = t0 + (k + 1) as f64 * dt;
        report.newton_iterations.push(stats.newton_iterations);
        report.max_linear_residual = report.max_linear_residual.max(stats.linear_residual);
        report.max_newton_residual = report.max_newton_residual.max(stats.newton_residual);
        if let Some(rec) = recorder.as_deref_mut() {
            rec(report.t_final, &u);
        }
    }
    report.wall_time_s = clock.elapsed().as_secs_f64();
    Ok((u, report))
}

fn wrap(step: usize, e: Error) -> Error {
    match e {
        Error::Newton { residual, iterations, .. } => Error::Newton { step, residual, iterations },
        other => Error::Step { step, source: Box::new(other) },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub error: f64,
    /// log(e_i / e_{i−1}) / log(dt_i / dt_{i−1}); None for the first entry.
    pub rate: Option<f64>,
}

/// Errors for each step size and pairwise observed rates; equal step sizes give rate 0.
pub fn convergence_study(dts: &[f64], mut error_at: impl FnMut(f64) -> Result<f64>) -> Result<Vec<ConvergenceRow>> {
    let mut out: Vec<ConvergenceRow> = Vec::with_capacity(dts.len());
    for &dt in dts {
        let error = error_at(dt)?;
        let rate =
            out.last().map(|prev| if prev.dt == dt { 0.0 } else { (error / prev.error).ln() / (dt / prev.dt).ln() });
        out.push(ConvergenceRow { dt, error, rate });
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
