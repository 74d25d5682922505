use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};

use super::{dot, norm};
use crate::error::{Error, Result};

/// One eigenvalue of the barrier Hessian with its unit eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub lambda: f64,
    pub v: Vec<f64>,
}

/// Self-concordant barrier on a convex body in `ℝ^d`.
///
/// The provided methods give a symmetric eigensolver and a damped-Newton
/// mirror step; implementors with closed forms override them.
pub trait Barrier {
    fn dim(&self) -> usize;

    /// Self-concordance parameter `ν`.
    fn nu(&self) -> f64;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn grad(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>>;

    fn eigen(&self, x: &[f64]) -> Result<Vec<Eigenpair>> {
        let h = self.hessian(x)?;
        let eig = h.symmetric_eigen();
        let mut pairs = Vec::with_capacity(self.dim());
        for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::Numeric(format!("Hessian eigenvalue {lambda} is not positive")));
            }
            pairs.push(Eigenpair {
                lambda,
                v: eig.eigenvectors.column(i).iter().copied().collect(),
            });
        }
        Ok(pairs)
    }

    /// `argmin_x η⟨x, g⟩ + D_ψ(x, anchor)`, i.e. `∇ψ(x) = ∇ψ(anchor) − ηg`.
    fn mirror_step(&self, anchor: &[f64], g: &[f64], eta: f64, tol: f64) -> Result<Vec<f64>> {
        damped_newton_step(self, anchor, g, eta, tol)
    }
}

/// Minimizes `F(x) = η⟨x, g⟩ + ψ(x) − ⟨∇ψ(anchor), x⟩` by damped Newton.
pub(crate) fn damped_newton_step<B: Barrier + ?Sized>(
    b: &B,
    anchor: &[f64],
    g: &[f64],
    eta: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let ga = b.grad(anchor)?;
    let target: Vec<f64> = ga.iter().zip(g).map(|(a, gi)| a - eta * gi).collect();
    let scale = norm(&target).max(1.0);
    let mut x = anchor.to_vec();
    for _ in 0..200 {
        let gx = b.grad(&x)?;
        let r = DVector::from_iterator(x.len(), gx.iter().zip(&target).map(|(a, t)| a - t));
        if r.norm() <= tol * scale {
            return Ok(x);
        }
        let h = b.hessian(&x)?;
        let chol = h
            .cholesky()
            .ok_or_else(|| Error::Numeric("barrier Hessian is not positive definite".into()))?;
        let step = chol.solve(&r);
        let decrement = r.dot(&step).max(0.0).sqrt();
        if decrement <= tol {
            return Ok(x);
        }
        // Steps shorter than the Dikin radius stay feasible.
        let damp = if decrement > 0.25 { 1.0 / (1.0 + decrement) } else { 1.0 };
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi -= damp * si;
        }
    }
    Err(Error::Numeric("damped Newton did not reach the stationarity tolerance".into()))
}

/// `ψ(x) = −ln(1 − ‖x‖²)` on the open unit ball, with `ν = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallBarrier {
    pub dimension: usize,
}

impl BallBarrier {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        Ok(Self { dimension })
    }

    /// `1 − ‖x‖²`, rejecting points outside the open ball.
    fn slack(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::Domain(format!(
                "point has dimension {}, barrier {}",
                x.len(),
                self.dimension
            )));
        }
        let s2 = dot(x, x);
        if !(s2 < 1.0) {
            return Err(Error::Domain(format!("point norm {} is not inside the unit ball", s2.sqrt())));
        }
        Ok(1.0 - s2)
    }

    /// `‖r‖` in the metric of `∇²ψ(x)⁻¹`.
    pub fn dual_local_norm(&self, x: &[f64], r: &[f64]) -> f64 {
        let s = norm(x);
        let (par, perp) = Self::eigenvalues(s);
        if s == 0.0 {
            return norm(r) / par.sqrt();
        }
        let along = dot(r, x) / s;
        let rest = (dot(r, r) - along * along).max(0.0);
        (along * along / par + rest / perp).sqrt()
    }

    /// Eigenvalues along `x` and orthogonal to it.
    pub fn eigenvalues(s: f64) -> (f64, f64) {
        let q = 1.0 - s * s;
        ((2.0 + 2.0 * s * s) / (q * q), 2.0 / q)
    }
}

impl Barrier for BallBarrier {
    fn dim(&self) -> usize {
        self.dimension
    }

    fn nu(&self) -> f64 {
        1.0
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(-self.slack(x)?.ln())
    }

    fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        let q = self.slack(x)?;
        Ok(x.iter().map(|v| 2.0 * v / q).collect())
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let q = self.slack(x)?;
        let d = self.dimension;
        Ok(DMatrix::from_fn(d, d, |i, j| {
            let diag = if i == j { 2.0 / q } else { 0.0 };
            diag + 4.0 * x[i] * x[j] / (q * q)
        }))
    }

    /// Radial direction first, then a Gram–Schmidt completion of its complement.
    fn eigen(&self, x: &[f64]) -> Result<Vec<Eigenpair>> {
        self.slack(x)?;
        let d = self.dimension;
        let s = norm(x);
        let (par, perp) = Self::eigenvalues(s);
        if s == 0.0 {
            return Ok((0..d)
                .map(|i| {
                    let mut v = vec![0.0; d];
                    v[i] = 1.0;
                    Eigenpair { lambda: par, v }
                })
                .collect());
        }
        let u: Vec<f64> = x.iter().map(|v| v / s).collect();
        let pivot = (0..d)
            .max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()))
            .unwrap_or(0);
        let mut basis = vec![u];
        for j in (0..d).filter(|&j| j != pivot) {
            let mut v = vec![0.0; d];
            v[j] = 1.0;
            // Two passes keep the completion orthonormal to rounding.
            for _ in 0..2 {
                for b in &basis {
                    let p = dot(&v, b);
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= p * bi;
                    }
                }
            }
            let n = norm(&v);
            if !(n > 0.0) {
                return Err(Error::Numeric("degenerate eigenvector completion".into()));
            }
            basis.push(v.iter().map(|vi| vi / n).collect());
        }
        Ok(basis
            .into_iter()
            .enumerate()
            .map(|(i, v)| Eigenpair {
                lambda: if i == 0 { par } else { perp },
                v,
            })
            .collect())
    }

    /// `∇ψ(x) = 2x/(1 − ‖x‖²)` is radial, so invert its norm in closed form.
    fn mirror_step(&self, anchor: &[f64], g: &[f64], eta: f64, tol: f64) -> Result<Vec<f64>> {
        let ga = self.grad(anchor)?;
        if g.len() != self.dimension {
            return Err(Error::Domain("gradient dimension mismatch".into()));
        }
        if eta == 0.0 || g.iter().all(|v| *v == 0.0) {
            return Ok(anchor.to_vec());
        }
        let target: Vec<f64> = ga.iter().zip(g).map(|(a, gi)| a - eta * gi).collect();
        let r = norm(&target);
        if !r.is_finite() {
            return Err(Error::Numeric("mirror-step target is not finite".into()));
        }
        if r == 0.0 {
            return Ok(vec![0.0; self.dimension]);
        }
        // 2s/(1 − s²) = r  ⇔  s = r / (√(1 + r²) + 1).
        let s = r / ((1.0 + r * r).sqrt() + 1.0);
        let x: Vec<f64> = target.iter().map(|t| s * t / r).collect();
        let gx = match self.grad(&x) {
            Ok(gx) => gx,
            Err(_) => return damped_newton_step(self, anchor, g, eta, tol),
        };
        let res: Vec<f64> = gx.iter().zip(&target).map(|(a, t)| a - t).collect();
        // Near the boundary the Euclidean residual is limited by conditioning;
        // the local dual norm is the scale-free measure.
        if norm(&res) <= tol * r.max(1.0) || self.dual_local_norm(&x, &res) <= tol {
            Ok(x)
        } else {
            damped_newton_step(self, anchor, g, eta, tol)
        }
    }
}

/// `(value, gradient, Hessian)` of the ball barrier.
pub fn barrier_eval(b: &BallBarrier, x: &[f64]) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
    Ok((b.value(x)?, b.grad(x)?, b.hessian(x)?))
}

/// One principal-axis endpoint of the unit Dikin ellipsoid.
#[derive(Debug, Clone, PartialEq)]
pub struct DikinSample {
    pub w: Vec<f64>,
    pub axis: usize,
    pub sigma: f64,
    pub lambda: f64,
    pub v: Vec<f64>,
}

/// Endpoint for a given axis and sign.
pub fn dikin_endpoint(x: &[f64], pair: &Eigenpair, axis: usize, sigma: f64) -> DikinSample {
    let scale = sigma / pair.lambda.sqrt();
    DikinSample {
        w: x.iter().zip(&pair.v).map(|(xi, vi)| xi + scale * vi).collect(),
        axis,
        sigma,
        lambda: pair.lambda,
        v: pair.v.clone(),
    }
}

/// Picks an axis and a sign uniformly and returns `x + σ v_i / √λ_i`.
pub fn dikin_sample<B: Barrier + ?Sized>(
    b: &B,
    x: &[f64],
    rng: &mut dyn RngCore,
) -> Result<DikinSample> {
    let pairs = b.eigen(x)?;
    let axis = rng.random_range(0..pairs.len());
    let sigma = if rng.random::<bool>() { 1.0 } else { -1.0 };
    Ok(dikin_endpoint(x, &pairs[axis], axis, sigma))
}
