use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{weighted::WeightedIndex, Distribution};

use super::state::QuditState;
use crate::error::{Error, Result};

/// Outcome tuple of a measurement, one basis index per measured wire.
pub type Outcome = Vec<usize>;

impl QuditState {
    fn check_measured_wires(&self, wires: &[usize]) -> Result<()> {
        if wires.is_empty() {
            return Err(Error::Empty("measured wires"));
        }
        for (i, &w) in wires.iter().enumerate() {
            self.check_wire(w)?;
            if wires[..i].contains(&w) {
                return Err(Error::CoincidentWires(w));
            }
        }
        Ok(())
    }

    /// Dense marginal over `wires`, indexed in mixed radix with `wires[0]`
    /// most significant.
    pub fn marginal(&self, wires: &[usize]) -> Result<Vec<f64>> {
        self.check_measured_wires(wires)?;
        let size: usize = wires.iter().map(|&w| self.dims()[w]).product();
        let geometry: Vec<(usize, usize)> = wires.iter().map(|&w| (self.stride(w), self.dims()[w])).collect();
        let mut probs = vec![0.0; size];
        for (idx, a) in self.amplitudes().iter().enumerate() {
            let mut outcome = 0;
            for &(stride, d) in &geometry {
                outcome = outcome * d + (idx / stride) % d;
            }
            probs[outcome] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Exact marginal probability of every outcome on `wires`.
    pub fn measure_probabilities(&self, wires: &[usize]) -> Result<BTreeMap<Outcome, f64>> {
        let probs = self.marginal(wires)?;
        let dims: Vec<usize> = wires.iter().map(|&w| self.dims()[w]).collect();
        Ok(probs
            .into_iter()
            .enumerate()
            .map(|(i, p)| (unflatten(i, &dims), p))
            .collect())
    }

    /// Multinomial sample of `shots` measurements on `wires`. Only observed
    /// outcomes appear in the result.
    pub fn sample_measurement(&self, wires: &[usize], shots: usize, seed: u64) -> Result<BTreeMap<Outcome, usize>> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        let probs = self.marginal(wires)?;
        let dims: Vec<usize> = wires.iter().map(|&w| self.dims()[w]).collect();
        let dist = WeightedIndex::new(&probs).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0usize; probs.len()];
        for _ in 0..shots {
            counts[dist.sample(&mut rng)] += 1;
        }
        Ok(counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(i, c)| (unflatten(i, &dims), c))
            .collect())
    }
}

fn unflatten(mut index: usize, dims: &[usize]) -> Outcome {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}
