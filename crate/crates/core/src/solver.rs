//! P1 Galerkin discretization of `E_K(u, φ) = ⟨f, φ⟩` on an interval with
//! zero exterior values.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::function::{Analytic, Domain1D, Exterior, GridFunction, RealFn, ScalarFn, UniformMesh};
use crate::kernels::KernelSpec;
use crate::quadrature::{
    self, clip_breaks, geometric_toward_left, subdivide, PairIntegrator, PairRule, Tolerance,
};

/// Right-hand side `f` with optional declared singular points.
#[derive(Clone)]
pub struct Rhs {
    f: ScalarFn,
    singular_points: Vec<f64>,
    label: String,
}

impl std::fmt::Debug for Rhs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Rhs")
            .field("label", &self.label)
            .field("singular_points", &self.singular_points)
            .finish()
    }
}

impl Rhs {
    pub fn constant(c: f64) -> Self {
        Rhs {
            f: Arc::new(move |_| c),
            singular_points: Vec::new(),
            label: format!("constant({c})"),
        }
    }

    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Rhs {
            f: Arc::new(f),
            singular_points: Vec::new(),
            label: "function".into(),
        }
    }

    /// `|x - center|^{-gamma}` with `0 ≤ gamma < 1/2`, so that `f ∈ L²`.
    pub fn power_singularity(center: f64, gamma: f64) -> Result<Self> {
        check_range(
            "gamma",
            gamma,
            (0.0..0.5).contains(&gamma),
            "singularity exponent must lie in [0, 1/2)",
        )?;
        Ok(Rhs {
            f: Arc::new(move |x: f64| {
                let d = (x - center).abs();
                if d == 0.0 {
                    0.0
                } else {
                    d.powf(-gamma)
                }
            }),
            singular_points: vec![center],
            label: format!("|x-{center}|^-{gamma}"),
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        let f = self.f.clone();
        Rhs {
            f: Arc::new(move |x| c * f(x)),
            singular_points: self.singular_points.clone(),
            label: format!("{c}*{}", self.label),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn singular_points(&self) -> &[f64] {
        &self.singular_points
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `∫ f φ` over `[lo, hi]`, split at the kinks of `φ` and the singular points.
    pub fn pair_with(&self, phi: &dyn RealFn, lo: f64, hi: f64) -> Result<f64> {
        let mut pts = phi.kinks();
        pts.extend(self.singular_points.iter().copied());
        let breaks = clip_breaks(lo, hi, pts);
        let tol = Tolerance::relative(1e-11);
        let mut total = 0.0;
        for w in breaks.windows(2) {
            total += quadrature::adaptive_strict(|x| self.eval(x) * phi.eval(x), w[0], w[1], tol)?
                .value;
        }
        Ok(total)
    }
}

impl RealFn for Rhs {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn kinks(&self) -> Vec<f64> {
        self.singular_points.clone()
    }
}

#[derive(Debug, Clone)]
pub struct WeakProblem {
    pub kernel: KernelSpec,
    pub domain: Domain1D,
    pub rhs: Rhs,
    pub cells: usize,
    pub rule: PairRule,
}

impl WeakProblem {
    pub fn new(kernel: KernelSpec, domain: Domain1D, rhs: Rhs, cells: usize) -> Result<Self> {
        if cells < 4 {
            return Err(Error::InvalidMesh("at least 3 interior nodes are required"));
        }
        UniformMesh::new(domain, cells)?;
        Ok(WeakProblem {
            kernel,
            domain,
            rhs,
            cells,
            rule: PairRule::default(),
        })
    }

    pub fn mesh(&self) -> UniformMesh {
        UniformMesh::new(self.domain, self.cells).expect("validated in constructor")
    }

    pub fn with_cells(&self, cells: usize) -> Result<Self> {
        let mut p = WeakProblem::new(self.kernel.clone(), self.domain, self.rhs.clone(), cells)?;
        p.rule = self.rule;
        Ok(p)
    }
}

/// Stiffness matrix and load vector on the interior nodes `1..cells`.
#[derive(Debug, Clone)]
pub struct StiffnessSystem {
    pub matrix: DMatrix<f64>,
    pub load: DVector<f64>,
    pub mesh: UniformMesh,
    pub kernel: KernelSpec,
}

impl StiffnessSystem {
    pub fn solve(&self) -> Result<GridFunction> {
        let chol = self.matrix.clone().cholesky().ok_or(Error::SingularSystem)?;
        let coeffs = chol.solve(&self.load);
        let mut values = Vec::with_capacity(self.mesh.cells + 1);
        values.push(0.0);
        values.extend(coeffs.iter().copied());
        values.push(0.0);
        GridFunction::new(self.mesh, values, Exterior::ZeroOutside)
    }

    pub fn dim(&self) -> usize {
        self.load.len()
    }
}

/// Slots of the local array: the hat with relative node `rel` restricted to
/// the `x` cell (local index `a`) and to the `y` cell (local index `b`).
#[derive(Clone, Copy)]
struct Slot {
    rel: usize,
    a: Option<usize>,
    b: Option<usize>,
}

fn slots(d: usize) -> Vec<Slot> {
    match d {
        0 => vec![
            Slot { rel: 0, a: Some(0), b: Some(0) },
            Slot { rel: 1, a: Some(1), b: Some(1) },
        ],
        1 => vec![
            Slot { rel: 0, a: Some(0), b: None },
            Slot { rel: 1, a: Some(1), b: Some(0) },
            Slot { rel: 2, a: None, b: Some(1) },
        ],
        _ => vec![
            Slot { rel: 0, a: Some(0), b: None },
            Slot { rel: 1, a: Some(1), b: None },
            Slot { rel: d, a: None, b: Some(0) },
            Slot { rel: d + 1, a: None, b: Some(1) },
        ],
    }
}

#[inline]
fn shape(cell: (f64, f64), local: usize, x: f64) -> f64 {
    let h = cell.1 - cell.0;
    if local == 0 {
        (cell.1 - x) / h
    } else {
        (x - cell.0) / h
    }
}

/// `∫_{cell e} ∫_{cell f} (φ_k(x) - φ_k(y)) (φ_l(x) - φ_l(y)) K` summed with
/// its mirror image when `e ≠ f`.
fn local_array(k: &KernelSpec, integ: &PairIntegrator, mesh: &UniformMesh, e: usize, f: usize) -> [f64; 16] {
    let d = f - e;
    let sl = slots(d);
    let ce = mesh.cell(e);
    let cf = mesh.cell(f);
    let g = |x: f64, t: f64| -> [f64; 16] {
        let y = x + t;
        let kv = k.eval_xt(x, t);
        let mut diff = [0.0; 4];
        for (i, s) in sl.iter().enumerate() {
            let vx = s.a.map_or(0.0, |a| shape(ce, a, x));
            let vy = s.b.map_or(0.0, |b| shape(cf, b, y));
            diff[i] = vx - vy;
        }
        let mut out = [0.0; 16];
        for i in 0..sl.len() {
            for j in i..sl.len() {
                out[4 * i + j] = diff[i] * diff[j] * kv;
            }
        }
        out
    };
    if d == 0 {
        integ.same(ce.0, ce.1, &g)
    } else {
        let mut v = integ.pair(ce, cf, &g);
        for x in v.iter_mut() {
            *x *= 2.0;
        }
        v
    }
}

fn scatter(a: &mut DMatrix<f64>, cells: usize, e: usize, d: usize, loc: &[f64; 16]) {
    let sl = slots(d);
    for i in 0..sl.len() {
        let ni = e + sl[i].rel;
        if ni == 0 || ni == cells {
            continue;
        }
        for j in i..sl.len() {
            let nj = e + sl[j].rel;
            if nj == 0 || nj == cells {
                continue;
            }
            let v = loc[4 * i + j];
            a[(ni - 1, nj - 1)] += v;
            if ni != nj {
                a[(nj - 1, ni - 1)] += v;
            }
        }
    }
}

/// `2 ∫_Ω φ_i φ_j κ` with `κ(x) = ∫_{ℝ∖Ω} K(x, y) dy`, per cell.
fn exterior_cell(k: &KernelSpec, mesh: &UniformMesh, e: usize) -> [f64; 3] {
    let dom = mesh.domain();
    let cell = mesh.cell(e);
    let rule = quadrature::gauss_legendre(10);
    let breaks = if e == 0 {
        geometric_toward_left(cell.0, cell.1, 40)
    } else if e + 1 == mesh.cells {
        let mut b: Vec<f64> = geometric_toward_left(-cell.1, -cell.0, 40)
            .into_iter()
            .map(|x| -x)
            .collect();
        b.reverse();
        b
    } else {
        vec![cell.0, cell.1]
    };
    let mut acc = [0.0; 3];
    for w in breaks.windows(2).filter(|w| w[1] > w[0]) {
        for (x, wt) in rule.mapped(w[0], w[1]) {
            let kap = k.exterior_mass(x, dom.lo, dom.hi);
            let (p0, p1) = (shape(cell, 0, x), shape(cell, 1, x));
            acc[0] += wt * p0 * p0 * kap;
            acc[1] += wt * p0 * p1 * kap;
            acc[2] += wt * p1 * p1 * kap;
        }
    }
    acc.map(|v| 2.0 * v)
}

/// Assembles `A_ij = E_K(φ_i, φ_j)` and `b_i = ⟨f, φ_i⟩`.
pub fn assemble(problem: &WeakProblem) -> Result<StiffnessSystem> {
    let mesh = problem.mesh();
    let m = mesh.cells;
    let n = m - 1;
    let k = &problem.kernel;
    let integ = PairIntegrator::new(problem.rule, 1.0 - 2.0 * k.s);
    let mut a = DMatrix::<f64>::zeros(n, n);

    if k.translation_invariant {
        // the local array depends only on the cell offset
        let by_offset: Vec<[f64; 16]> = (0..m)
            .into_par_iter()
            .map(|d| local_array(k, &integ, &mesh, 0, d))
            .collect();
        for e in 0..m {
            for (d, loc) in by_offset.iter().enumerate().take(m - e) {
                scatter(&mut a, m, e, d, loc);
            }
        }
    } else {
        let rows: Vec<Vec<[f64; 16]>> = (0..m)
            .into_par_iter()
            .map(|e| (e..m).map(|f| local_array(k, &integ, &mesh, e, f)).collect())
            .collect();
        for (e, row) in rows.iter().enumerate() {
            for (d, loc) in row.iter().enumerate() {
                scatter(&mut a, m, e, d, loc);
            }
        }
    }

    let ext: Vec<[f64; 3]> = (0..m)
        .into_par_iter()
        .map(|e| exterior_cell(k, &mesh, e))
        .collect();
    for (e, c) in ext.iter().enumerate() {
        let (i, j) = (e, e + 1);
        if i >= 1 {
            a[(i - 1, i - 1)] += c[0];
        }
        if j <= n {
            a[(j - 1, j - 1)] += c[2];
        }
        if i >= 1 && j <= n {
            a[(i - 1, j - 1)] += c[1];
            a[(j - 1, i - 1)] += c[1];
        }
    }

    let loads: Vec<Result<f64>> = (1..m)
        .into_par_iter()
        .map(|i| {
            let hat = hat_function(&mesh, i);
            let (lo, hi) = (mesh.node(i - 1), mesh.node(i + 1));
            problem.rhs.pair_with(&hat, lo, hi)
        })
        .collect();
    let load = DVector::from_vec(loads.into_iter().collect::<Result<Vec<_>>>()?);
    Ok(StiffnessSystem {
        matrix: a,
        load,
        mesh,
        kernel: k.clone(),
    })
}

/// The P1 hat of node `i` as a zero-extended grid function.
pub fn hat_function(mesh: &UniformMesh, i: usize) -> GridFunction {
    let mut values = vec![0.0; mesh.cells + 1];
    values[i] = 1.0;
    GridFunction::new(*mesh, values, Exterior::ZeroOutside).expect("finite values")
}

pub fn solve(problem: &WeakProblem) -> Result<GridFunction> {
    assemble(problem)?.solve()
}

/// `E_K(u, v)` where `v` vanishes outside `support`. Set `u_zero_outside`
/// when `u` vanishes outside `support` as well; otherwise the exterior
/// values of `u` enter through the kernel tail.
pub fn energy_on(
    u: &dyn RealFn,
    v: &dyn RealFn,
    support: Domain1D,
    k: &KernelSpec,
    u_zero_outside: bool,
    rule: PairRule,
) -> Result<f64> {
    if support.is_empty() {
        return Ok(0.0);
    }
    if !u_zero_outside {
        // |u(y)| must grow slower than |y|^β for the tail to converge
        let c = support.midpoint();
        let q = |r: f64| u.eval(c + r).abs().max(u.eval(c - r).abs()) / r.powf(k.beta);
        let (q3, q6, q9) = (q(1e3), q(1e6), q(1e9));
        if !q9.is_finite() || (q9 > 0.0 && (q9 >= 0.999 * q6 || q6 >= 0.999 * q3)) {
            return Err(Error::TailNotIntegrable);
        }
    }
    let mut pts = u.kinks();
    pts.extend(v.kinks());
    let breaks = subdivide(&clip_breaks(support.lo, support.hi, pts), support.len() / 32.0);
    let integ = PairIntegrator::new(rule, 1.0 - 2.0 * k.s);
    let [inner] = integ.over_square(&breaks, &|x, t| {
        let y = x + t;
        [(u.eval(x) - u.eval(y)) * (v.eval(x) - v.eval(y)) * k.eval_xt(x, t)]
    });

    // 2 ∫_D v(x) ∫_{ℝ∖D} (u(x) - u(y)) K(x, y) dy dx
    let outer = |x: f64| {
        let vx = v.eval(x);
        if vx == 0.0 {
            return 0.0;
        }
        let mut val = u.eval(x) * k.exterior_mass(x, support.lo, support.hi);
        if !u_zero_outside {
            let w = |y: f64| u.eval(y);
            val -= k.radial_mass(x, x - support.lo, -1.0, &w);
            val -= k.radial_mass(x, support.hi - x, 1.0, &w);
        }
        vx * val
    };
    let rule10 = quadrature::gauss_legendre(10);
    let np = breaks.len() - 1;
    let parts: Vec<f64> = (0..np)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (breaks[i], breaks[i + 1]);
            let sub = if i == 0 {
                geometric_toward_left(a, b, 40)
            } else if i + 1 == np {
                let mut s: Vec<f64> = geometric_toward_left(-b, -a, 40).into_iter().map(|x| -x).collect();
                s.reverse();
                s
            } else {
                vec![a, b]
            };
            sub.windows(2)
                .filter(|w| w[1] > w[0])
                .map(|w| rule10.integrate(w[0], w[1], outer))
                .sum()
        })
        .collect();
    let boundary: f64 = parts.iter().sum();
    Ok(inner + 2.0 * boundary)
}

/// `E_K(u, v)` for grid functions; at least one must vanish outside its mesh.
pub fn energy(u: &GridFunction, v: &GridFunction, k: &KernelSpec) -> Result<f64> {
    let zu = matches!(u.exterior(), Exterior::ZeroOutside);
    let zv = matches!(v.exterior(), Exterior::ZeroOutside);
    let rule = PairRule::default();
    match (zu, zv) {
        (true, true) => {
            let (du, dv) = (u.domain(), v.domain());
            let hull = Domain1D::clamped(du.lo.min(dv.lo), du.hi.max(dv.hi));
            energy_on(u, v, hull, k, true, rule)
        }
        (false, true) => energy_on(u, v, v.domain(), k, false, rule),
        (true, false) => energy_on(v, u, u.domain(), k, false, rule),
        (false, false) => Err(Error::TailNotIntegrable),
    }
}

/// `max_m |E_K(u, φ_m) - ⟨f, φ_m⟩| / E_K(φ_m, φ_m)^{1/2}` over smooth bumps
/// `φ_m` compactly supported in `Ω`, a lower bound for the residual in the
/// dual energy norm.
pub fn residual(u: &GridFunction, problem: &WeakProblem, test_count: usize) -> Result<f64> {
    check_range("test_count", test_count as f64, test_count >= 1, "need at least one test function")?;
    let dom = problem.domain;
    let mut worst: f64 = 0.0;
    for phi in test_bumps(dom, test_count) {
        let supp = Domain1D::clamped(dom.lo, dom.hi);
        let e = energy_on(u, &phi, supp, &problem.kernel, true, problem.rule)?;
        let kinks = phi.kinks();
        let (lo, hi) = (kinks[0], kinks[1]);
        let f = problem.rhs.pair_with(&phi, lo, hi)?;
        let bump_supp = Domain1D::new(lo, hi)?;
        let norm = energy_on(&phi, &phi, bump_supp, &problem.kernel, true, problem.rule)?.sqrt();
        worst = worst.max((e - f).abs() / norm);
    }
    Ok(worst)
}

/// Smooth bumps with centers spread over `dom` and supports inside it.
pub fn test_bumps(dom: Domain1D, count: usize) -> Vec<Analytic> {
    (0..count)
        .map(|m| {
            let c = dom.lo + dom.len() * (m as f64 + 1.0) / (count as f64 + 1.0);
            let r = 0.9 * (c - dom.lo).min(dom.hi - c).min(0.3 * dom.len());
            Analytic::bump(c, r, 1.0)
        })
        .collect()
}
