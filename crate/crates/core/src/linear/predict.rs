use super::{dot, norm};
use crate::error::{Error, Result};

/// Hyperplane slice `{m ∈ B : ⟨w, m⟩ = c}` of the unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub w: Vec<f64>,
    pub c: f64,
}

/// Euclidean projection onto the unit ball.
pub fn project_ball(m: &[f64]) -> Vec<f64> {
    let n = norm(m);
    if n <= 1.0 {
        m.to_vec()
    } else {
        m.iter().map(|v| v / n).collect()
    }
}

/// Projected gradient step on `f(m) = ⟨w, m⟩ − c` squared, step size 1/8.
pub fn predict_option1(m: &[f64], w: &[f64], c: f64) -> Vec<f64> {
    let err = dot(w, m) - c;
    let stepped: Vec<f64> = m.iter().zip(w).map(|(mi, wi)| mi - 0.25 * err * wi).collect();
    project_ball(&stepped)
}

/// Nearest point to `m` on the slice `{m' ∈ B : ⟨w, m'⟩ = c}`.
pub fn predict_option2(m: &[f64], w: &[f64], c: f64) -> Result<Vec<f64>> {
    let ww = dot(w, w);
    if !(ww > 0.0) {
        return Err(Error::Domain("slice normal is zero".into()));
    }
    let shift = (c - dot(w, m)) / ww;
    let p: Vec<f64> = m.iter().zip(w).map(|(mi, wi)| mi + shift * wi).collect();
    if dot(&p, &p) <= 1.0 {
        return Ok(p);
    }
    // Slice center and radius of the sphere section.
    let q: Vec<f64> = w.iter().map(|wi| c / ww * wi).collect();
    let qq = dot(&q, &q);
    if qq > 1.0 {
        return Err(Error::Infeasible(format!(
            "slice at offset {} misses the unit ball",
            qq.sqrt()
        )));
    }
    let r = (1.0 - qq).sqrt();
    let dir: Vec<f64> = p.iter().zip(&q).map(|(pi, qi)| pi - qi).collect();
    let dn = norm(&dir);
    Ok(q.iter().zip(&dir).map(|(qi, di)| qi + r * di / dn).collect())
}

/// Greedy chasing: `m_t = proj_{K_t}(m_{t−1})`, one point per slice.
pub fn chase_greedy(sets: &[Slice], m0: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(sets.len());
    let mut m = m0.to_vec();
    for s in sets {
        m = predict_option2(&m, &s.w, s.c)?;
        out.push(m.clone());
    }
    Ok(out)
}
