use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chain tunables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MhConfig {
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    /// Step budget per requested location before falling back to the
    /// highest-probability unvisited pixels.
    #[serde(default = "default_patience")]
    pub patience: usize,
}

fn default_burn_in() -> usize {
    1000
}

fn default_thin() -> usize {
    5
}

fn default_patience() -> usize {
    200
}

impl Default for MhConfig {
    fn default() -> Self {
        MhConfig { burn_in: default_burn_in(), thin: default_thin(), patience: default_patience() }
    }
}

/// Metropolis-Hastings chain over grid cells with uniform proposals.
///
/// Starts from a cell drawn directly from `m`, so it never visits cells
/// without mass.
#[derive(Debug)]
pub struct MhChain<'a, R> {
    m: &'a [f64],
    state: usize,
    rng: R,
    thin: usize,
    steps: usize,
}

impl<'a, R: Rng> MhChain<'a, R> {
    pub fn new(m: &'a [f64], mut rng: R, cfg: &MhConfig) -> Result<Self> {
        let total: f64 = m.iter().filter(|p| **p > 0.0).sum();
        if !(total > 0.0) {
            return Err(Error::InsufficientSupport { available: 0, requested: 1 });
        }
        let mut u = rng.random::<f64>() * total;
        let mut state = m.iter().rposition(|&p| p > 0.0).unwrap();
        for (i, &p) in m.iter().enumerate() {
            if p > 0.0 {
                if u < p {
                    state = i;
                    break;
                }
                u -= p;
            }
        }
        let mut chain = MhChain { m, state, rng, thin: cfg.thin.max(1), steps: 0 };
        for _ in 0..cfg.burn_in {
            chain.step();
        }
        chain.steps = 0;
        Ok(chain)
    }

    /// One proposal; returns the new state.
    pub fn step(&mut self) -> usize {
        self.steps += 1;
        let prop = self.rng.random_range(0..self.m.len());
        let (cur, next) = (self.m[self.state], self.m[prop]);
        if next >= cur || self.rng.random::<f64>() * cur < next {
            self.state = prop;
        }
        self.state
    }

    /// Steps taken since burn-in.
    pub fn steps(&self) -> usize {
        self.steps
    }
}

impl<R: Rng> Iterator for MhChain<'_, R> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        for _ in 1..self.thin {
            self.step();
        }
        Some(self.step())
    }
}

/// `count` distinct cells drawn by Metropolis-Hastings from `m`.
pub fn mh_sample_locations<R: Rng>(m: &[f64], count: usize, rng: R, cfg: &MhConfig) -> Result<Vec<usize>> {
    let available = m.iter().filter(|&&p| p > 0.0).count();
    if available < count {
        return Err(Error::InsufficientSupport { available, requested: count });
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut chain = MhChain::new(m, rng, cfg)?;
    let mut taken = vec![false; m.len()];
    let mut out = Vec::with_capacity(count);
    let budget = cfg.patience.max(1) * count * chain.thin;
    while out.len() < count && chain.steps() < budget {
        let s = chain.next().unwrap();
        if !taken[s] {
            taken[s] = true;
            out.push(s);
        }
    }
    if out.len() < count {
        let mut rest: Vec<usize> = (0..m.len()).filter(|&i| !taken[i] && m[i] > 0.0).collect();
        rest.sort_by(|&a, &b| m[b].total_cmp(&m[a]).then(a.cmp(&b)));
        out.extend(rest.into_iter().take(count - out.len()));
    }
    Ok(out)
}
