use nonlocal_core::analysis::{caccioppoli_check, counterexample_suite, fit_regularity_exponent, lower_bound};
use nonlocal_core::increments::{discrete_parts_check, Ball};
use nonlocal_core::io::{fmt, seminorm_table, solution_table, Table};
use nonlocal_core::kernels::{verify_bounds, verify_holder};
use nonlocal_core::seminorms::{besov, embed_n_in_w, embed_w_in_n, gagliardo, nikolskii, Ladder, ModulusProfile};
use nonlocal_core::solver::{assemble, residual};
use nonlocal_core::{Analytic, Domain1D, Error, GridFunction, RealFn, WeakProblem};

use crate::config::{Command, RunConfig};
use crate::output::OutputDir;

/// Why a run stopped; each variant maps to one exit code.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Numerical(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "configuration error: {e:#}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e:#}"),
            Failure::Io(e) => write!(f, "output error: {e:#}"),
        }
    }
}

fn classify(e: &Error) -> bool {
    matches!(
        e,
        Error::QuadratureFailure { .. } | Error::SingularSystem | Error::PVDivergence(_) | Error::TailNotIntegrable
    )
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if classify(&e) {
            Failure::Numerical(e.into())
        } else {
            Failure::Config(e.into())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(inner) if classify(inner) => Failure::Numerical(e),
            _ => Failure::Config(e),
        }
    }
}

/// Everything a command needs besides the config.
pub struct Run<'a> {
    pub cfg: &'a RunConfig,
    pub seed: u64,
    pub tolerance: f64,
    pub out: &'a mut OutputDir,
    /// Invariants that failed; a nonempty list means exit 4.
    pub violations: Vec<String>,
}

type Step = Result<(), Failure>;

fn io<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Io)
}

impl Run<'_> {
    pub fn execute(&mut self) -> Step {
        match self.cfg.command {
            Command::Seminorm => self.seminorm(),
            Command::Solve => self.solve(),
            Command::Caccioppoli => self.caccioppoli(),
            Command::FitExponent => self.fit_exponent(),
            Command::Counterexample => self.counterexample(),
            Command::VerifyKernel => self.verify_kernel(),
            Command::PartsIdentity => self.parts_identity(),
        }
    }

    fn violation(&mut self, what: String) {
        self.violations.push(what);
    }

    fn problem(&self) -> Result<WeakProblem, Failure> {
        let (dom, cells) = self.cfg.domain()?;
        Ok(WeakProblem::new(self.cfg.kernel()?, dom, self.cfg.rhs()?, cells)?)
    }

    fn solved(&mut self) -> Result<(WeakProblem, GridFunction), Failure> {
        let problem = self.problem()?;
        let sys = assemble(&problem)?;
        let m = &sys.matrix;
        let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let asym = (m - m.transpose()).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if asym > self.tolerance * scale {
            self.violation(format!("stiffness matrix asymmetry {asym:e} exceeds tolerance"));
        }
        let u = sys.solve()?;
        Ok((problem, u))
    }

    /// The analysed function and the set it is analysed on.
    fn analysed(&mut self) -> Result<(Box<dyn RealFn>, Domain1D), Failure> {
        if self.cfg.analysis.function.as_deref() == Some("solution") {
            let (_, u) = self.solved()?;
            let dom = self.cfg.subdomain()?;
            return Ok((Box::new(u), dom));
        }
        let u = self.cfg.builtin_function()?;
        let dom = match (&self.cfg.domain, self.cfg.analysis.sub_a) {
            (None, None) => Domain1D::new(-1.0, 1.0)?,
            _ => self.cfg.subdomain()?,
        };
        Ok((Box::new(u), dom))
    }

    fn seminorm(&mut self) -> Step {
        let a = &self.cfg.analysis;
        let s = a.s.unwrap_or(0.5);
        let p = a.p.unwrap_or(2.0);
        let l = a.l.unwrap_or(s.floor() as usize + 1);
        let lambda = a.lambda.unwrap_or(p);
        let sigma = a.sigma.unwrap_or(s);
        let (u, dom) = self.analysed()?;
        let u = u.as_ref();
        let ladder = Ladder::default();
        let mut reports = vec![besov(u, dom, s, p, lambda, l, None)?, nikolskii(u, dom, s, p, l, &ladder)?];
        if sigma < 1.0 {
            reports.insert(0, gagliardo(u, dom, sigma, p)?);
        }
        io(self.out.write_table("seminorms.csv", &seminorm_table(&reports)))?;

        let profile = ModulusProfile::new(u, dom, p, l, &ladder);
        let mut modulus = Table::new(["eta", "omega"]);
        for (e, w) in profile.etas.iter().zip(&profile.omegas) {
            modulus.push_numbers(&[*e, *w]);
        }
        io(self.out.write_table("modulus.csv", &modulus))?;

        let r = 0.5 * s;
        let checks = [
            ("w_in_n", embed_w_in_n(&profile, s, p)?),
            ("n_in_w", embed_n_in_w(&profile, s, r, p)?),
        ];
        let mut emb = Table::new(["embedding", "s", "r", "p", "lhs", "rhs", "constant", "holds"]);
        for (name, c) in &checks {
            emb.push([
                name.to_string(),
                fmt(s),
                fmt(if *name == "n_in_w" { r } else { s }),
                fmt(p),
                fmt(c.lhs),
                fmt(c.rhs),
                fmt(c.constant),
                c.holds.to_string(),
            ]);
            if !c.holds {
                self.violation(format!("embedding {name}: {} > {}", c.lhs, c.rhs));
            }
        }
        io(self.out.write_table("embeddings.csv", &emb))
    }

    fn solve(&mut self) -> Step {
        let (problem, u) = self.solved()?;
        let res = residual(&u, &problem, 8)?;
        io(self.out.write_table("solution.csv", &solution_table(&u)))?;
        let mut summary = Table::new(["kernel", "s", "a", "b", "cells", "h", "max_abs", "residual"]);
        summary.push([
            problem.kernel.name.to_string(),
            fmt(problem.kernel.s),
            fmt(problem.domain.lo),
            fmt(problem.domain.hi),
            problem.cells.to_string(),
            fmt(problem.mesh().h()),
            fmt(u.max_abs()),
            fmt(res),
        ]);
        io(self.out.write_table("summary.csv", &summary))
    }

    fn caccioppoli(&mut self) -> Step {
        let (problem, u) = self.solved()?;
        let dom = problem.domain;
        let x0 = self.cfg.analysis.x0.unwrap_or(dom.midpoint());
        let r = self.cfg.analysis.r.unwrap_or(0.25 * dom.len());
        let rep = caccioppoli_check(&u, &problem.rhs, dom, x0, r, &problem.kernel)?;
        let mut t = Table::new(["x0", "r", "lhs", "l2_u", "weighted_l1_u", "l2_f", "ratio"]);
        let [a, b, c] = rep.rhs_terms;
        t.push_numbers(&[x0, r, rep.lhs, a, b, c, rep.ratio]);
        if !rep.ratio.is_finite() {
            self.violation(format!("Caccioppoli ratio is {}", rep.ratio));
        }
        io(self.out.write_table("caccioppoli.csv", &t))
    }

    fn fit_exponent(&mut self) -> Step {
        let a = &self.cfg.analysis;
        let l = a.l.unwrap_or(2);
        let p = a.p.unwrap_or(2.0);
        let window = (a.z_min.unwrap_or(1.0 / 8192.0), a.z_max.unwrap_or(1.0 / 16.0));
        let (u, dom) = self.analysed()?;
        let fit = fit_regularity_exponent(u.as_ref(), dom, l, p, window)?;
        let mut t = Table::new(["slope", "intercept", "residual", "z_min", "z_max", "samples", "l", "p"]);
        t.push([
            fmt(fit.slope),
            fmt(fit.intercept),
            fmt(fit.residual),
            fmt(fit.window.0),
            fmt(fit.window.1),
            fit.samples.to_string(),
            l.to_string(),
            fmt(p),
        ]);
        io(self.out.write_table("exponent_fit.csv", &t))?;
        let mut inc = Table::new(["z", "increment_norm"]);
        for (z, n) in &fit.points {
            inc.push_numbers(&[*z, *n]);
        }
        io(self.out.write_table("increments.csv", &inc))
    }

    fn counterexample(&mut self) -> Step {
        let a = &self.cfg.analysis;
        let s = a.s.unwrap_or(0.5);
        let (k0, k1) = (a.eps_k_min.unwrap_or(16), a.eps_k_max.unwrap_or(40));
        let eps: Vec<f64> = (k0..=k1).map(|k| 2f64.powi(-k)).collect();
        let rep = counterexample_suite(s, &eps)?;

        let mut energy = Table::new(["eps", "energy", "error_estimate", "lower_bound", "log_inv_eps"]);
        for &(e, v, err) in &rep.energy_table {
            energy.push_numbers(&[e, v, err, lower_bound(s, e), (1.0 / e).ln()]);
        }
        io(self.out.write_table("energy.csv", &energy))?;

        let mut harm = Table::new(["t", "frac_laplacian"]);
        let mut worst: f64 = 0.0;
        for &(t, r) in &rep.harmonicity_residuals {
            harm.push_numbers(&[t, r]);
            worst = worst.max(r.abs());
        }
        io(self.out.write_table("harmonicity.csv", &harm))?;
        if worst > HARMONICITY_TOLERANCE.max(self.tolerance) {
            self.violation(format!("profile is not s-harmonic: residual {worst:e}"));
        }
        if !rep.lower_bound_check {
            self.violation("truncated energy fell below its lower bound".into());
        }

        let mut summary = Table::new([
            "s",
            "varpi",
            "divergence_slope",
            "log_ratio",
            "log_squared_ratio",
            "lower_bound_check",
        ]);
        summary.push([
            fmt(s),
            fmt(rep.varpi),
            fmt(rep.divergence_slope),
            fmt(rep.log_ratio),
            fmt(rep.log_squared_ratio),
            rep.lower_bound_check.to_string(),
        ]);
        io(self.out.write_table("counterexample.csv", &summary))
    }

    fn verify_kernel(&mut self) -> Step {
        let k = self.cfg.kernel()?;
        let n = self.cfg.analysis.samples.unwrap_or(20_000);
        let b = verify_bounds(&k, n, self.seed);
        let h = verify_holder(&k, n, self.seed);
        let mut t = Table::new(["check", "samples", "observed_min", "observed_max", "declared_min", "declared_max", "violations", "passed"]);
        t.push([
            "short_range".to_string(),
            n.to_string(),
            fmt(b.small_ratio_min),
            fmt(b.small_ratio_max),
            fmt(k.lambda),
            fmt(k.lambda_max),
            b.violations.to_string(),
            (b.violations == 0).to_string(),
        ]);
        t.push([
            "tail".to_string(),
            n.to_string(),
            fmt(0.0),
            fmt(b.tail_ratio_max),
            fmt(0.0),
            fmt(k.tail_bound),
            b.violations.to_string(),
            (b.violations == 0).to_string(),
        ]);
        t.push([
            "symmetry".to_string(),
            n.to_string(),
            fmt(0.0),
            fmt(0.0),
            fmt(0.0),
            fmt(0.0),
            b.asymmetric.to_string(),
            (b.asymmetric == 0).to_string(),
        ]);
        let holder_ok = h.stable && h.within_declared;
        t.push([
            "holder".to_string(),
            (3 * n).to_string(),
            fmt(h.estimate),
            fmt(h.refined_estimate),
            fmt(0.0),
            fmt(k.gamma),
            usize::from(!holder_ok).to_string(),
            holder_ok.to_string(),
        ]);
        io(self.out.write_table("kernel_checks.csv", &t))?;
        if !b.passed() {
            self.violation(format!("{} bound violations, {} asymmetric pairs", b.violations, b.asymmetric));
        }
        if !holder_ok {
            self.violation(format!("Holder estimate {} (stable: {})", h.refined_estimate, h.stable));
        }
        Ok(())
    }

    fn parts_identity(&mut self) -> Step {
        let k = self.cfg.kernel()?;
        let a = &self.cfg.analysis;
        let x0 = a.x0.unwrap_or(0.0);
        let r = a.r.unwrap_or(1.0);
        let cases = a.cases.unwrap_or(5).max(1);
        let ball = Ball::interval(x0, r)?;
        let u: Analytic = if a.function.is_some() {
            self.cfg.builtin_function()?
        } else {
            Analytic::new(|x: f64| (0.9 * x).sin() + 0.1 * x * x)
        };
        let v = Analytic::bump(x0, 1.7 * r, 1.0);
        let mut t = Table::new([
            "z",
            "lhs",
            "rhs",
            "gap",
            "pairing_term",
            "kernel_increment_term",
            "overlap_term",
            "error_estimate",
            "passed",
        ]);
        for j in 1..=cases {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            let z = sign * 0.9 * r * j as f64 / cases as f64;
            let rep = discrete_parts_check(&u, &v, &k, &ball, z)?;
            let ok = rep.gap <= 10.0 * rep.error_estimate + self.tolerance;
            t.push([
                fmt(z),
                fmt(rep.lhs),
                fmt(rep.rhs),
                fmt(rep.gap),
                fmt(rep.terms[0]),
                fmt(rep.terms[1]),
                fmt(rep.terms[2]),
                fmt(rep.error_estimate),
                ok.to_string(),
            ]);
            if !ok {
                self.violation(format!("identity gap {} at z = {z}", rep.gap));
            }
        }
        io(self.out.write_table("parts.csv", &t))
    }
}

/// Principal values of the profile are computed to about this accuracy.
const HARMONICITY_TOLERANCE: f64 = 1e-3;
