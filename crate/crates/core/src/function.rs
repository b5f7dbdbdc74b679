//! Functions on the real line: intervals, uniform meshes, nodal grid functions
//! with an exterior extension rule, and closed-form functions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An open interval `(lo, hi)`, or the empty set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain1D {
    pub lo: f64,
    pub hi: f64,
}

impl Domain1D {
    pub const EMPTY: Domain1D = Domain1D { lo: 0.0, hi: 0.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo < hi && lo.is_finite() && hi.is_finite() {
            Ok(Domain1D { lo, hi })
        } else {
            Err(Error::InvalidMesh("domain requires finite lo < hi"))
        }
    }

    /// Same as [`Domain1D::new`] but yields the empty domain for `lo >= hi`.
    pub fn clamped(lo: f64, hi: f64) -> Self {
        if lo < hi {
            Domain1D { lo, hi }
        } else {
            Domain1D::EMPTY
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn len(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// `self ⊆ other` (the empty set is contained in everything).
    pub fn is_subset_of(&self, other: &Domain1D) -> bool {
        self.is_empty() || (!other.is_empty() && self.lo >= other.lo && self.hi <= other.hi)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

impl fmt::Display for Domain1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "∅")
        } else {
            write!(f, "({}, {})", self.lo, self.hi)
        }
    }
}

/// A real function on ℝ that can be evaluated anywhere.
pub trait RealFn: Sync {
    fn eval(&self, x: f64) -> f64;

    /// Points where the function fails to be smooth. Quadratures split there.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<T: RealFn + ?Sized> RealFn for &T {
    fn eval(&self, x: f64) -> f64 {
        (**self).eval(x)
    }
    fn kinks(&self) -> Vec<f64> {
        (**self).kinks()
    }
}

impl<T: RealFn + ?Sized + Send> RealFn for Box<T> {
    fn eval(&self, x: f64) -> f64 {
        (**self).eval(x)
    }
    fn kinks(&self) -> Vec<f64> {
        (**self).kinks()
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A closed-form function with declared non-smooth points.
#[derive(Clone)]
pub struct Analytic {
    f: ScalarFn,
    kinks: Vec<f64>,
}

impl Analytic {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Analytic {
            f: Arc::new(f),
            kinks: Vec::new(),
        }
    }

    pub fn with_kinks(mut self, kinks: impl IntoIterator<Item = f64>) -> Self {
        self.kinks.extend(kinks);
        self
    }

    /// `x ↦ (x - at)_+^alpha` for `alpha > 0`.
    pub fn positive_power(alpha: f64, at: f64) -> Self {
        Analytic::new(move |x| if x > at { (x - at).powf(alpha) } else { 0.0 }).with_kinks([at])
    }

    /// The C^∞ bump `amplitude · exp(1 - 1/(1 - ((x-c)/r)^2))` supported in `(c-r, c+r)`.
    pub fn bump(center: f64, radius: f64, amplitude: f64) -> Self {
        Analytic::new(move |x| {
            let q = (x - center) / radius;
            let d = 1.0 - q * q;
            if d > 0.0 {
                amplitude * (1.0 - 1.0 / d).exp()
            } else {
                0.0
            }
        })
        .with_kinks([center - radius, center + radius])
    }

    pub fn scaled(&self, c: f64) -> Self {
        let f = self.f.clone();
        Analytic {
            f: Arc::new(move |x| c * f(x)),
            kinks: self.kinks.clone(),
        }
    }

    pub fn function(&self) -> ScalarFn {
        self.f.clone()
    }
}

impl fmt::Debug for Analytic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Analytic").field("kinks", &self.kinks).finish()
    }
}

impl RealFn for Analytic {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn kinks(&self) -> Vec<f64> {
        self.kinks.clone()
    }
}

/// Uniform partition of `[lo, hi]` into `cells` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformMesh {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
}

impl UniformMesh {
    pub fn new(domain: Domain1D, cells: usize) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::InvalidMesh("mesh over an empty domain"));
        }
        if cells == 0 {
            return Err(Error::InvalidMesh("mesh needs at least one cell"));
        }
        Ok(UniformMesh {
            lo: domain.lo,
            hi: domain.hi,
            cells,
        })
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.cells {
            self.hi
        } else {
            self.lo + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.cells).map(|i| self.node(i))
    }

    pub fn domain(&self) -> Domain1D {
        Domain1D {
            lo: self.lo,
            hi: self.hi,
        }
    }

    pub fn cell(&self, e: usize) -> (f64, f64) {
        (self.node(e), self.node(e + 1))
    }
}

/// How a grid function continues outside its mesh.
#[derive(Clone)]
pub enum Exterior {
    ZeroOutside,
    ClosedFormTail(ScalarFn),
}

impl fmt::Debug for Exterior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exterior::ZeroOutside => write!(f, "ZeroOutside"),
            Exterior::ClosedFormTail(_) => write!(f, "ClosedFormTail"),
        }
    }
}

/// Nodal values on a uniform mesh, piecewise linear inside, extended by an
/// exterior rule outside.
#[derive(Debug, Clone)]
pub struct GridFunction {
    mesh: UniformMesh,
    values: Vec<f64>,
    exterior: Exterior,
}

impl GridFunction {
    pub fn new(mesh: UniformMesh, values: Vec<f64>, exterior: Exterior) -> Result<Self> {
        if values.len() != mesh.cells + 1 {
            return Err(Error::InvalidMesh("one value per node required"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh("nodal values must be finite"));
        }
        Ok(GridFunction {
            mesh,
            values,
            exterior,
        })
    }

    /// Samples `f` at the nodes; outside the mesh `f` itself is used.
    pub fn from_closed_form(
        mesh: UniformMesh,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let f: ScalarFn = Arc::new(f);
        let values = mesh.nodes().map(|x| f(x)).collect();
        GridFunction::new(mesh, values, Exterior::ClosedFormTail(f))
    }

    /// Samples `f` at the nodes and extends by zero.
    pub fn sample_zero_outside(mesh: UniformMesh, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = mesh.nodes().map(f).collect();
        GridFunction::new(mesh, values, Exterior::ZeroOutside)
    }

    pub fn mesh(&self) -> &UniformMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exterior(&self) -> &Exterior {
        &self.exterior
    }

    pub fn domain(&self) -> Domain1D {
        self.mesh.domain()
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        let exterior = match &self.exterior {
            Exterior::ZeroOutside => Exterior::ZeroOutside,
            Exterior::ClosedFormTail(f) => {
                let f = f.clone();
                Exterior::ClosedFormTail(Arc::new(move |x| c * f(x)))
            }
        };
        GridFunction {
            mesh: self.mesh,
            values: self.values.iter().map(|v| c * v).collect(),
            exterior,
        }
    }

    /// Pointwise linear combination `a·self + b·other` on a shared mesh.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        if self.mesh != other.mesh {
            return Err(Error::InvalidMesh("combination requires identical meshes"));
        }
        let exterior = match (&self.exterior, &other.exterior) {
            (Exterior::ZeroOutside, Exterior::ZeroOutside) => Exterior::ZeroOutside,
            (ea, eb) => {
                let fa = exterior_fn(ea);
                let fb = exterior_fn(eb);
                Exterior::ClosedFormTail(Arc::new(move |x| a * fa(x) + b * fb(x)))
            }
        };
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + b * v)
            .collect();
        GridFunction::new(self.mesh, values, exterior)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn exterior_fn(e: &Exterior) -> ScalarFn {
    match e {
        Exterior::ZeroOutside => Arc::new(|_| 0.0),
        Exterior::ClosedFormTail(f) => f.clone(),
    }
}

impl RealFn for GridFunction {
    fn eval(&self, x: f64) -> f64 {
        let m = &self.mesh;
        if x < m.lo || x > m.hi {
            return match &self.exterior {
                Exterior::ZeroOutside => 0.0,
                Exterior::ClosedFormTail(f) => f(x),
            };
        }
        let h = m.h();
        let pos = (x - m.lo) / h;
        let e = (pos.floor() as usize).min(m.cells - 1);
        let theta = pos - e as f64;
        self.values[e] * (1.0 - theta) + self.values[e + 1] * theta
    }

    fn kinks(&self) -> Vec<f64> {
        self.mesh.nodes().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_exact_on_affine() {
        let mesh = UniformMesh::new(Domain1D::new(-1.0, 1.0).unwrap(), 7).unwrap();
        let u = GridFunction::from_closed_form(mesh, |x| 3.0 * x - 0.5).unwrap();
        for x in [-1.0, -0.93, 0.0, 0.123, 0.999, 1.0, 1.5, -3.0] {
            assert!((u.eval(x) - (3.0 * x - 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_outside() {
        let mesh = UniformMesh::new(Domain1D::new(0.0, 1.0).unwrap(), 4).unwrap();
        let u = GridFunction::sample_zero_outside(mesh, |x| x * (1.0 - x) + 1.0).unwrap();
        assert_eq!(u.eval(-0.1), 0.0);
        assert_eq!(u.eval(1.1), 0.0);
        assert!((u.eval(0.5) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonfinite_values() {
        let mesh = UniformMesh::new(Domain1D::new(0.0, 1.0).unwrap(), 1).unwrap();
        assert!(GridFunction::new(mesh, vec![0.0, f64::NAN], Exterior::ZeroOutside).is_err());
    }

    #[test]
    fn empty_domain() {
        assert!(Domain1D::clamped(1.0, 1.0).is_empty());
        assert!(Domain1D::EMPTY.is_subset_of(&Domain1D::new(0.0, 1.0).unwrap()));
        assert!(Domain1D::new(2.0, 1.0).is_err());
    }
}
