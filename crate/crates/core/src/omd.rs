//! Bregman machinery and constrained mirror-descent solves over the simplex.
//!
//! Both regularizers are separable, `ψ(x) = Σᵢ φ(xᵢ)`, so the minimizer of
//! `⟨x, ℓ⟩ + D_ψ(x, a)` over the simplex satisfies, for one multiplier `μ`,
//!
//! ```text
//! φ'(xᵢ) = φ'(aᵢ) − ℓᵢ − μ      for every i,      Σᵢ xᵢ = 1.
//! ```
//!
//! The solve inverts `φ'` coordinate-wise (closed form for the log-barrier,
//! safeguarded Newton for the hybrid) and finds `μ` with a bracketed Newton
//! iteration on the decreasing map `μ ↦ Σᵢ xᵢ(μ) − 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

/// Outer tolerance on `|Σ xᵢ − 1|`.
pub const SUM_TOLERANCE: f64 = 1e-10;
/// Iteration cap of the multiplier search.
pub const OUTER_MAX_ITER: usize = 200;
/// Iteration cap of the per-coordinate inversion.
pub const INNER_MAX_ITER: usize = 100;
/// Default KKT tolerance used by the learners.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    /// `(1/η) Σ ln(1/xᵢ)`
    LogBarrier,
    /// `(1/η) Σ ln(1/xᵢ) + (K/η) Σ xᵢ ln xᵢ`
    Hybrid,
}

/// A regularizer together with its learning rate and the number of arms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    pub kind: RegularizerKind,
    pub eta: f64,
    pub num_arms: usize,
}

/// Diagnostics of a simplex solve.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Largest of `|Σxᵢ − 1|` and the per-coordinate stationarity residual
    /// expressed as a displacement, `|rᵢ| / φ''(xᵢ)`.
    pub kkt_residual: f64,
    /// Multiplier of the simplex constraint.
    pub multiplier: f64,
}

impl RegularizerSpec {
    pub fn new(kind: RegularizerKind, eta: f64, num_arms: usize) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::Config(format!("learning rate must be positive, got {eta}")));
        }
        if num_arms == 0 {
            return Err(Error::Config("number of arms must be positive".into()));
        }
        Ok(Self {
            kind,
            eta,
            num_arms,
        })
    }

    pub fn log_barrier(eta: f64, num_arms: usize) -> Result<Self> {
        Self::new(RegularizerKind::LogBarrier, eta, num_arms)
    }

    pub fn hybrid(eta: f64, num_arms: usize) -> Result<Self> {
        Self::new(RegularizerKind::Hybrid, eta, num_arms)
    }

    fn k(&self) -> f64 {
        self.num_arms as f64
    }

    /// `ψ(x)`; requires positive coordinates.
    pub fn value(&self, x: &[f64]) -> f64 {
        let barrier: f64 = x.iter().map(|v| -v.ln()).sum::<f64>() / self.eta;
        match self.kind {
            RegularizerKind::LogBarrier => barrier,
            RegularizerKind::Hybrid => {
                barrier + self.k() / self.eta * x.iter().map(|v| v * v.ln()).sum::<f64>()
            }
        }
    }

    /// Per-coordinate derivative `φ'(v)`.
    pub fn grad(&self, v: f64) -> f64 {
        match self.kind {
            RegularizerKind::LogBarrier => -1.0 / (self.eta * v),
            RegularizerKind::Hybrid => (-1.0 / v + self.k() * (v.ln() + 1.0)) / self.eta,
        }
    }

    /// Per-coordinate second derivative `φ''(v)`.
    pub fn curvature(&self, v: f64) -> f64 {
        match self.kind {
            RegularizerKind::LogBarrier => 1.0 / (self.eta * v * v),
            RegularizerKind::Hybrid => (1.0 / (v * v) + self.k() / v) / self.eta,
        }
    }

    /// Solves `φ'(v) = target` for `v > 0`.
    pub fn grad_inverse(&self, target: f64) -> Result<f64> {
        grad_inverse_coordinate(self, target)
    }
}

/// `D_ψ(x, y) = ψ(x) − ψ(y) − ⟨∇ψ(y), x − y⟩`, evaluated term-wise in a
/// cancellation-free form.
pub fn bregman_divergence(reg: &RegularizerSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Domain(format!("coordinate must be positive, got {v}")));
    }
    let mut barrier = 0.0;
    let mut entropy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let r = a / b;
        barrier += r - 1.0 - r.ln();
        entropy += a * r.ln() - a + b;
    }
    let d = match reg.kind {
        RegularizerKind::LogBarrier => barrier / reg.eta,
        RegularizerKind::Hybrid => barrier / reg.eta + reg.k() / reg.eta * entropy,
    };
    Ok(d.max(0.0))
}

/// Inverse of the per-coordinate derivative map `v ↦ φ'(v)`, which is strictly
/// increasing on `(0, ∞)` for both regularizers.
pub fn grad_inverse_coordinate(reg: &RegularizerSpec, target: f64) -> Result<f64> {
    if !target.is_finite() {
        return Err(Error::Domain(format!("target must be finite, got {target}")));
    }
    match reg.kind {
        RegularizerKind::LogBarrier => {
            if target >= 0.0 {
                return Err(Error::Domain(format!(
                    "log-barrier derivative is negative, target {target} is out of range"
                )));
            }
            Ok(-1.0 / (reg.eta * target))
        }
        RegularizerKind::Hybrid => hybrid_inverse(reg.k(), reg.eta * target),
    }
}

/// Solves `−1/v + K (ln v + 1) = rhs` in `u = ln v`, where the left side is
/// `h(u) = −e^{−u} + K(u + 1)`, increasing and concave.
fn hybrid_inverse(k: f64, rhs: f64) -> Result<f64> {
    let h = |u: f64| -(-u).exp() + k * (u + 1.0) - rhs;
    let dh = |u: f64| (-u).exp() + k;

    let mut lo = 0.0_f64;
    let mut step = 1.0;
    while h(lo) > 0.0 {
        lo -= step;
        step *= 2.0;
    }
    let mut hi = 0.0_f64;
    step = 1.0;
    while h(hi) < 0.0 {
        hi += step;
        step *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Domain(format!("hybrid inverse diverged for rhs {rhs}")));
        }
    }

    let guess = if rhs > k {
        rhs / k - 1.0
    } else if rhs < -1.0 {
        -(-rhs).ln()
    } else {
        0.0
    };
    let mut u = guess.clamp(lo, hi);
    for _ in 0..INNER_MAX_ITER {
        let f = h(u);
        let scale = (-u).exp() + k * (u + 1.0).abs() + rhs.abs();
        if f.abs() <= 1e-15 * scale {
            return Ok(u.exp());
        }
        if f < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let mut next = u - f / dh(u);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 4.0 * f64::EPSILON * u.abs().max(1.0) {
            return Ok(next.exp());
        }
        u = next;
    }
    Err(Error::Numeric(format!(
        "hybrid inverse did not converge for rhs {rhs}"
    )))
}

/// `argmin_{x ∈ Δ_K} ⟨x, loss⟩ + D_ψ(x, anchor)`.
pub fn omd_simplex_step(
    reg: &RegularizerSpec,
    anchor: &SimplexPoint,
    loss: &[f64],
    tol: f64,
) -> Result<(SimplexPoint, SolveReport)> {
    let k = anchor.len();
    if loss.len() != k || reg.num_arms != k {
        return Err(Error::Domain(format!(
            "dimension mismatch: anchor {k}, loss {}, regularizer {}",
            loss.len(),
            reg.num_arms
        )));
    }
    if let Some(v) = loss.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("loss must be finite, got {v}")));
    }
    let shift = loss.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = loss.iter().copied().fold(f64::NEG_INFINITY, f64::max) - shift;
    if spread == 0.0 {
        // A constant loss is absorbed entirely by the multiplier.
        let report = SolveReport {
            iterations: 0,
            kkt_residual: 0.0,
            multiplier: -shift,
        };
        return Ok((anchor.clone(), report));
    }

    let a = anchor.as_slice();
    let shifted: Vec<f64> = loss.iter().map(|l| l - shift).collect();
    // For μ, coordinate i solves φ'(xᵢ) = targetᵢ − μ.
    let targets: Vec<f64> = a
        .iter()
        .zip(&shifted)
        .map(|(&ai, &li)| reg.grad(ai) - li)
        .collect();

    let mut x = vec![0.0; k];
    // Fills `x` and returns (Σx − 1, d/dμ Σx); +∞ when μ is left of a pole.
    let evaluate = |mu: f64, x: &mut [f64]| -> Result<(f64, f64)> {
        let mut sum = 0.0;
        let mut slope = 0.0;
        for i in 0..k {
            let xi = match reg.kind {
                RegularizerKind::LogBarrier => {
                    let denom = 1.0 / a[i] + reg.eta * (shifted[i] + mu);
                    if denom <= 0.0 {
                        return Ok((f64::INFINITY, f64::NEG_INFINITY));
                    }
                    1.0 / denom
                }
                RegularizerKind::Hybrid => grad_inverse_coordinate(reg, targets[i] - mu)?,
            };
            x[i] = xi;
            sum += xi;
            slope -= 1.0 / reg.curvature(xi);
        }
        Ok((sum - 1.0, slope))
    };

    // Coordinate i equals 1/K at μᵢ, so [min μᵢ, max μᵢ] brackets the root.
    let pivot = reg.grad(1.0 / k as f64);
    let mut lo = targets
        .iter()
        .map(|t| t - pivot)
        .fold(f64::INFINITY, f64::min);
    let mut hi = targets
        .iter()
        .map(|t| t - pivot)
        .fold(f64::NEG_INFINITY, f64::max);
    // Widen until the sign change is certain under rounding.
    let mut width = (hi - lo).max(1.0);
    while evaluate(lo, &mut x)?.0 < 0.0 {
        lo -= width;
        width *= 2.0;
    }
    width = (hi - lo).max(1.0);
    while evaluate(hi, &mut x)?.0 > 0.0 {
        hi += width;
        width *= 2.0;
    }

    let mut mu = lo;
    let mut iterations = 0;
    let mut converged = false;
    let mut widths = [f64::INFINITY; 2];
    while iterations < OUTER_MAX_ITER {
        iterations += 1;
        let (f, df) = evaluate(mu, &mut x)?;
        if f.abs() <= SUM_TOLERANCE {
            converged = true;
            break;
        }
        if f > 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        // Near a pole Newton only doubles its distance per step; bisect
        // whenever two steps failed to halve the bracket.
        let stalled = hi - lo > 0.5 * widths[0];
        widths = [widths[1], hi - lo];
        let mut next = if f.is_finite() && !stalled {
            mu - f / df
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == mu || hi - lo <= f64::EPSILON * mu.abs().max(1.0) {
            evaluate(next, &mut x)?;
            mu = next;
            break;
        }
        mu = next;
    }

    let kkt_residual = kkt_residual(reg, &x, a, &shifted, &targets, mu);
    let report = SolveReport {
        iterations,
        kkt_residual,
        multiplier: mu - shift,
    };
    if !(kkt_residual <= tol) {
        let message = if converged {
            "KKT residual above tolerance".to_string()
        } else {
            "multiplier search exhausted".to_string()
        };
        return Err(Error::Solver { message, report });
    }
    let point = SimplexPoint::new(x).map_err(|e| Error::Solver {
        message: e.to_string(),
        report,
    })?;
    Ok((point, report))
}

fn kkt_residual(
    reg: &RegularizerSpec,
    x: &[f64],
    anchor: &[f64],
    shifted: &[f64],
    targets: &[f64],
    mu: f64,
) -> f64 {
    if x.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return f64::INFINITY;
    }
    let sum_gap = (x.iter().sum::<f64>() - 1.0).abs();
    (0..x.len())
        .map(|i| match reg.kind {
            // Reciprocal form: 1/xᵢ = 1/aᵢ + η(ℓᵢ + μ).
            RegularizerKind::LogBarrier => {
                let want = 1.0 / (1.0 / anchor[i] + reg.eta * (shifted[i] + mu));
                (x[i] - want).abs()
            }
            RegularizerKind::Hybrid => {
                (reg.grad(x[i]) - (targets[i] - mu)).abs() / reg.curvature(x[i])
            }
        })
        .fold(sum_gap, f64::max)
}

/// Objective `⟨x, loss⟩ + D_ψ(x, anchor)` used by tests and diagnostics.
pub fn step_objective(reg: &RegularizerSpec, anchor: &[f64], loss: &[f64], x: &[f64]) -> Result<f64> {
    let linear: f64 = x.iter().zip(loss).map(|(a, b)| a * b).sum();
    Ok(linear + bregman_divergence(reg, x, anchor)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sp(v: &[f64]) -> SimplexPoint {
        SimplexPoint::new(v.to_vec()).unwrap()
    }

    fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> SimplexPoint {
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.02..1.0)).collect();
        let s: f64 = raw.iter().sum();
        sp(&raw.iter().map(|v| v / s).collect::<Vec<_>>())
    }

    /// ψ(x) − ψ(y) − ⟨∇ψ(y), x − y⟩ evaluated literally.
    fn divergence_by_definition(reg: &RegularizerSpec, x: &[f64], y: &[f64]) -> f64 {
        let inner: f64 = x.iter().zip(y).map(|(a, b)| reg.grad(*b) * (a - b)).sum();
        reg.value(x) - reg.value(y) - inner
    }

    #[test]
    fn divergence_of_point_with_itself_is_zero() {
        let reg = RegularizerSpec::log_barrier(1.0, 3).unwrap();
        let u = SimplexPoint::uniform(3);
        assert_eq!(bregman_divergence(&reg, u.as_slice(), u.as_slice()).unwrap(), 0.0);
    }

    #[test]
    fn hybrid_divergence_matches_hand_evaluation() {
        let reg = RegularizerSpec::hybrid(0.005, 2).unwrap();
        let d = bregman_divergence(&reg, &[0.6, 0.4], &[0.5, 0.5]).unwrap();
        // High-precision evaluation of the three-term definition.
        approx::assert_relative_eq!(d, 16.218_604_324_326_575, max_relative = 1e-12);
        let literal = divergence_by_definition(&reg, &[0.6, 0.4], &[0.5, 0.5]);
        approx::assert_relative_eq!(d, literal, max_relative = 1e-10);
    }

    #[test]
    fn divergence_positive_for_distinct_points() {
        let reg = RegularizerSpec::log_barrier(1.0, 2).unwrap();
        assert!(bregman_divergence(&reg, &[0.9, 0.1], &[0.1, 0.9]).unwrap() > 0.0);
    }

    #[test]
    fn divergence_rejects_nonpositive_coordinates() {
        let reg = RegularizerSpec::log_barrier(1.0, 2).unwrap();
        assert!(matches!(
            bregman_divergence(&reg, &[1.0, 0.0], &[0.5, 0.5]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn grad_inverse_closed_forms() {
        let r1 = RegularizerSpec::log_barrier(1.0, 3).unwrap();
        assert_eq!(grad_inverse_coordinate(&r1, -2.0).unwrap(), 0.5);
        let r2 = RegularizerSpec::log_barrier(0.25, 3).unwrap();
        assert_eq!(grad_inverse_coordinate(&r2, -8.0).unwrap(), 0.5);
        assert!(matches!(grad_inverse_coordinate(&r1, 0.5), Err(Error::Domain(_))));
        assert!(matches!(
            grad_inverse_coordinate(&r1, f64::NAN),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn hybrid_grad_inverse_reevaluates_to_target() {
        let reg = RegularizerSpec::hybrid(0.01, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let target = rng.random_range(-1e6..1e5);
            let v = grad_inverse_coordinate(&reg, target).unwrap();
            assert!(v > 0.0);
            let err = (reg.grad(v) - target).abs();
            assert!(err <= 1e-10 * target.abs().max(1.0), "target {target}: err {err}");
        }
    }

    #[test]
    fn zero_or_constant_loss_returns_anchor() {
        let anchor = sp(&[0.2, 0.3, 0.5]);
        for reg in [
            RegularizerSpec::log_barrier(0.1, 3).unwrap(),
            RegularizerSpec::hybrid(0.1, 3).unwrap(),
        ] {
            let (x, _) = omd_simplex_step(&reg, &anchor, &[0.0; 3], 1e-9).unwrap();
            assert_eq!(x, anchor);
            let (x, rep) = omd_simplex_step(&reg, &anchor, &[0.7; 3], 1e-9).unwrap();
            assert_eq!(x, anchor);
            assert_eq!(rep.multiplier, -0.7);
        }
    }

    #[test]
    fn log_barrier_two_arms_matches_grid_oracle() {
        let reg = RegularizerSpec::log_barrier(0.1, 2).unwrap();
        let (x, _) = omd_simplex_step(&reg, &sp(&[0.5, 0.5]), &[1.0, 0.0], 1e-9).unwrap();
        // Brute-force minimization over p ∈ {k · 1e-6}.
        assert!((x[0] - 0.487_508).abs() <= 1e-4);
        assert!((x[1] - 0.512_492).abs() <= 1e-4);
    }

    #[test]
    fn log_barrier_closed_form_stationarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in [2, 3, 10] {
            for _ in 0..50 {
                let eta = rng.random_range(0.001..2.0);
                let reg = RegularizerSpec::log_barrier(eta, k).unwrap();
                let anchor = random_simplex(&mut rng, k);
                let loss: Vec<f64> = (0..k).map(|_| rng.random_range(-20.0..20.0)).collect();
                let (x, rep) = omd_simplex_step(&reg, &anchor, &loss, 1e-9).unwrap();
                let mu = rep.multiplier;
                for i in 0..k {
                    let closed = 1.0 / (1.0 / anchor[i] + eta * (loss[i] + mu));
                    assert!((x[i] - closed).abs() <= 1e-8, "coordinate {i}");
                }
            }
        }
    }

    #[test]
    fn output_beats_random_simplex_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in [2, 3, 5] {
            for pair in 0..100 {
                let kind = if pair % 2 == 0 {
                    RegularizerKind::LogBarrier
                } else {
                    RegularizerKind::Hybrid
                };
                let reg = RegularizerSpec::new(kind, rng.random_range(0.005..1.0), k).unwrap();
                let anchor = random_simplex(&mut rng, k);
                let loss: Vec<f64> = (0..k).map(|_| rng.random_range(-5.0..5.0)).collect();
                let (x, _) = omd_simplex_step(&reg, &anchor, &loss, 1e-9).unwrap();
                let best = step_objective(&reg, anchor.as_slice(), &loss, x.as_slice()).unwrap();
                for _ in 0..1000 {
                    let z = random_simplex(&mut rng, k);
                    let f = step_objective(&reg, anchor.as_slice(), &loss, z.as_slice()).unwrap();
                    assert!(best <= f + 1e-12 * f.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn extreme_losses_stay_interior() {
        let anchor = sp(&[0.001, 0.009, 0.99]);
        for reg in [
            RegularizerSpec::log_barrier(1.0 / 162.0, 3).unwrap(),
            RegularizerSpec::hybrid(1.0 / 162.0, 3).unwrap(),
        ] {
            for loss in [[1e6, 0.0, -1e6], [-1e4, 3.0, 1e4], [0.0, 0.0, 1e9]] {
                let (x, rep) = omd_simplex_step(&reg, &anchor, &loss, 1e-9).unwrap();
                assert!(x.as_slice().iter().all(|v| *v > 0.0));
                assert!(rep.kkt_residual <= 1e-9);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let reg = RegularizerSpec::log_barrier(0.1, 3).unwrap();
        let anchor = SimplexPoint::uniform(3);
        assert!(omd_simplex_step(&reg, &anchor, &[1.0, 2.0], 1e-9).is_err());
        assert!(omd_simplex_step(&reg, &anchor, &[1.0, f64::INFINITY, 0.0], 1e-9).is_err());
    }

    proptest! {
        #[test]
        fn permuting_inputs_permutes_output(
            raw in prop::collection::vec(0.05f64..1.0, 2..6),
            loss_seed in any::<u64>(),
            hybrid in any::<bool>(),
            rot in 0usize..6,
        ) {
            let k = raw.len();
            let s: f64 = raw.iter().sum();
            let anchor: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(loss_seed);
            let loss: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
            let kind = if hybrid { RegularizerKind::Hybrid } else { RegularizerKind::LogBarrier };
            let reg = RegularizerSpec::new(kind, 0.05, k).unwrap();
            let perm: Vec<usize> = (0..k).map(|i| (i + rot) % k).collect();
            let (x, _) = omd_simplex_step(&reg, &sp(&anchor), &loss, 1e-9).unwrap();
            let pa: Vec<f64> = perm.iter().map(|&i| anchor[i]).collect();
            let pl: Vec<f64> = perm.iter().map(|&i| loss[i]).collect();
            let (y, _) = omd_simplex_step(&reg, &sp(&pa), &pl, 1e-9).unwrap();
            for (j, &i) in perm.iter().enumerate() {
                prop_assert!((y[j] - x[i]).abs() <= 1e-12);
            }
        }

        #[test]
        fn output_is_strictly_interior(
            raw in prop::collection::vec(0.001f64..1.0, 1..8),
            scale in 0.0f64..1e4,
            eta in 0.001f64..1.0,
            hybrid in any::<bool>(),
        ) {
            let k = raw.len();
            let s: f64 = raw.iter().sum();
            let anchor = sp(&raw.iter().map(|v| v / s).collect::<Vec<_>>());
            let loss: Vec<f64> = (0..k).map(|i| scale * ((i as f64 * 1.7).sin())).collect();
            let kind = if hybrid { RegularizerKind::Hybrid } else { RegularizerKind::LogBarrier };
            let reg = RegularizerSpec::new(kind, eta, k).unwrap();
            let (x, rep) = omd_simplex_step(&reg, &anchor, &loss, 1e-9).unwrap();
            prop_assert!(x.as_slice().iter().all(|v| *v > 0.0 && v.is_finite()));
            prop_assert!((x.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            prop_assert!(rep.kkt_residual <= 1e-9);
        }
    }
}
