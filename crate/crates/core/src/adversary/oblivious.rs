use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{stream_rng, LossStream, StreamKind};
use crate::error::{Error, Result};
use crate::linear::project_ball;

fn check_round(t: usize, horizon: usize) -> Result<()> {
    if t == 0 || t > horizon {
        return Err(Error::Domain(format!("round {t} outside 1..={horizon}")));
    }
    Ok(())
}

/// Piecewise-constant losses: one best arm at `0.5 − gap/2`, the rest at
/// `0.5 + gap/2`, with the best arm replaced at each change point.
#[derive(Debug, Clone)]
pub struct Piecewise {
    num_arms: usize,
    horizon: usize,
    gap: f64,
    /// First round of each segment after the first, ascending.
    change_points: Vec<usize>,
    /// Best arm of each segment.
    best: Vec<usize>,
}

impl Piecewise {
    pub fn new(num_arms: usize, horizon: usize, num_switches: usize, gap: f64, seed: u64) -> Result<Self> {
        if num_arms == 0 || horizon == 0 {
            return Err(Error::Config("piecewise stream needs arms and rounds".into()));
        }
        if num_switches >= horizon.max(1) {
            return Err(Error::Config(format!(
                "{num_switches} switches do not fit in {horizon} rounds"
            )));
        }
        if num_switches > 0 && num_arms < 2 {
            return Err(Error::Config("switching the best arm needs two arms".into()));
        }
        if !(0.0..=1.0).contains(&gap) {
            return Err(Error::Config(format!("gap {gap} must lie in [0, 1]")));
        }
        let mut rng = stream_rng(seed);
        let mut change_points: Vec<usize> = sample(&mut rng, horizon - 1, num_switches)
            .into_iter()
            .map(|i| i + 2)
            .collect();
        change_points.sort_unstable();
        let mut best = vec![rng.random_range(0..num_arms)];
        for _ in 0..num_switches {
            let prev = *best.last().unwrap_or(&0);
            let next = (prev + rng.random_range(1..num_arms)) % num_arms;
            best.push(next);
        }
        Ok(Self {
            num_arms,
            horizon,
            gap,
            change_points,
            best,
        })
    }

    pub fn change_points(&self) -> &[usize] {
        &self.change_points
    }

    pub fn best_arm(&self, t: usize) -> usize {
        self.best[self.change_points.partition_point(|&c| c <= t)]
    }
}

impl<A> LossStream<A> for Piecewise {
    fn kind(&self) -> StreamKind {
        StreamKind::Oblivious
    }

    fn dim(&self) -> usize {
        self.num_arms
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn next(&mut self, t: usize, _history: &[A]) -> Result<Vec<f64>> {
        check_round(t, self.horizon)?;
        let best = self.best_arm(t);
        let mut loss = vec![0.5 + self.gap / 2.0; self.num_arms];
        loss[best] = 0.5 - self.gap / 2.0;
        Ok(loss)
    }
}

/// Independent uniform losses in `[0, 1]^K`.
#[derive(Debug, Clone)]
pub struct IidUniform {
    num_arms: usize,
    horizon: usize,
    rng: ChaCha8Rng,
}

impl IidUniform {
    pub fn new(num_arms: usize, horizon: usize, seed: u64) -> Result<Self> {
        if num_arms == 0 {
            return Err(Error::Config("need at least one arm".into()));
        }
        Ok(Self {
            num_arms,
            horizon,
            rng: stream_rng(seed),
        })
    }
}

impl<A> LossStream<A> for IidUniform {
    fn kind(&self) -> StreamKind {
        StreamKind::Oblivious
    }

    fn dim(&self) -> usize {
        self.num_arms
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn next(&mut self, t: usize, _history: &[A]) -> Result<Vec<f64>> {
        check_round(t, self.horizon)?;
        Ok((0..self.num_arms).map(|_| self.rng.random()).collect())
    }
}

/// The same loss vector every round.
#[derive(Debug, Clone)]
pub struct ConstantStream {
    loss: Vec<f64>,
    horizon: usize,
}

impl ConstantStream {
    pub fn new(loss: Vec<f64>, horizon: usize) -> Result<Self> {
        if loss.is_empty() || loss.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("constant loss must be a nonempty finite vector".into()));
        }
        Ok(Self { loss, horizon })
    }
}

impl<A> LossStream<A> for ConstantStream {
    fn kind(&self) -> StreamKind {
        StreamKind::Oblivious
    }

    fn dim(&self) -> usize {
        self.loss.len()
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn next(&mut self, t: usize, _history: &[A]) -> Result<Vec<f64>> {
        check_round(t, self.horizon)?;
        Ok(self.loss.clone())
    }
}

/// Random walk in the unit ball: `ℓ_t = proj_B(ℓ_{t−1} + step·u_t)` with
/// `u_t` a uniform unit direction and `ℓ_1` a uniform unit vector.
#[derive(Debug, Clone)]
pub struct LinearDrift {
    dim: usize,
    horizon: usize,
    step_size: f64,
    current: Vec<f64>,
    emitted: usize,
    rng: ChaCha8Rng,
}

impl LinearDrift {
    pub fn new(dim: usize, horizon: usize, step_size: f64, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if !(step_size >= 0.0 && step_size.is_finite()) {
            return Err(Error::Config(format!("step size {step_size} must be nonnegative")));
        }
        Ok(Self {
            dim,
            horizon,
            step_size,
            current: Vec::new(),
            emitted: 0,
            rng: stream_rng(seed),
        })
    }

    fn unit_direction(&mut self) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..self.dim).map(|_| self.rng.sample(StandardNormal)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-12 {
                return v.iter().map(|x| x / n).collect();
            }
        }
    }
}

impl<A> LossStream<A> for LinearDrift {
    fn kind(&self) -> StreamKind {
        StreamKind::Oblivious
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn next(&mut self, t: usize, _history: &[A]) -> Result<Vec<f64>> {
        check_round(t, self.horizon)?;
        if t != self.emitted + 1 {
            return Err(Error::Domain(format!(
                "drift stream is sequential: expected round {}, got {t}",
                self.emitted + 1
            )));
        }
        self.current = if t == 1 {
            self.unit_direction()
        } else {
            let u = self.unit_direction();
            let moved: Vec<f64> = self
                .current
                .iter()
                .zip(&u)
                .map(|(l, d)| l + self.step_size * d)
                .collect();
            project_ball(&moved)
        };
        self.emitted = t;
        Ok(self.current.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::path_lengths;

    fn collect<S: LossStream<usize>>(s: &mut S, history: &[usize]) -> Vec<Vec<f64>> {
        (1..=s.horizon()).map(|t| s.next(t, &history[..t - 1]).unwrap()).collect()
    }

    #[test]
    fn piecewise_without_switches() {
        let mut s = Piecewise::new(4, 100, 0, 0.4, 1).unwrap();
        let seq = collect(&mut s, &[0; 100]);
        let p = path_lengths(&seq);
        assert!((p.vinf - 0.7).abs() < 1e-15);
    }

    #[test]
    fn piecewise_unit_gap_path_length() {
        for s in [1, 5, 40] {
            let mut stream = Piecewise::new(6, 500, s, 1.0, 7).unwrap();
            let seq = collect(&mut stream, &[0; 500]);
            let p = path_lengths(&seq);
            assert!(p.vinf >= s as f64 && p.vinf <= s as f64 + 1.0, "V∞ {}", p.vinf);
            assert_eq!(stream.change_points().len(), s);
        }
    }

    #[test]
    fn streams_are_deterministic_and_history_invariant() {
        let h1 = vec![0usize; 300];
        let h2: Vec<usize> = (0..300).map(|i| i % 3).collect();
        let a = collect(&mut Piecewise::new(3, 300, 10, 0.5, 9).unwrap(), &h1);
        let b = collect(&mut Piecewise::new(3, 300, 10, 0.5, 9).unwrap(), &h2);
        assert_eq!(a, b);
        let a = collect(&mut IidUniform::new(3, 300, 9).unwrap(), &h1);
        let b = collect(&mut IidUniform::new(3, 300, 9).unwrap(), &h2);
        assert_eq!(a, b);
        let a = collect(&mut LinearDrift::new(3, 300, 0.01, 9).unwrap(), &h1);
        let b = collect(&mut LinearDrift::new(3, 300, 0.01, 9).unwrap(), &h2);
        assert_eq!(a, b);
    }

    #[test]
    fn drift_stays_in_ball_and_bounds_v2() {
        let (t, step) = (2000, 0.01);
        let mut s = LinearDrift::new(4, t, step, 3).unwrap();
        let seq = collect(&mut s, &vec![0; t]);
        assert!(seq.iter().all(|l| l.iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-12));
        let p = path_lengths(&seq);
        assert!(p.v2 >= 0.0 && p.v2 <= t as f64 * step + 1.0);
    }

    #[test]
    fn zero_step_drift_is_constant() {
        let mut s = LinearDrift::new(3, 50, 0.0, 4).unwrap();
        let seq = collect(&mut s, &[0; 50]);
        assert!(seq.windows(2).all(|w| w[0] == w[1]));
        let n = seq[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((path_lengths(&seq).v2 - n).abs() < 1e-15);
    }
}
