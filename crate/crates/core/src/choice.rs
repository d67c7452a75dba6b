//! Logit machinery shared by every demand model.
//!
//! Utilities are in "utils"; the scale `mu` multiplies them before
//! exponentiation. A nested model groups alternatives into nests with a
//! coefficient in (0, 1]; alternatives not listed in any nest form their own
//! degenerate nest.
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nest {
    pub members: Vec<usize>,
    pub coef: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiceModel {
    pub utilities: Vec<f64>,
    pub scale: f64,
    pub nests: Vec<Nest>,
}

impl ChoiceModel {
    pub fn mnl(utilities: Vec<f64>, scale: f64) -> ChoiceModel {
        ChoiceModel {
            utilities,
            scale,
            nests: Vec::new(),
        }
    }

    pub fn nested(utilities: Vec<f64>, scale: f64, nests: Vec<Nest>) -> ChoiceModel {
        ChoiceModel { utilities, scale, nests }
    }

    fn validate_flat(&self) -> Result<()> {
        if self.utilities.is_empty() {
            return Err(Error::invalid("empty choice set"));
        }
        if self.utilities.iter().any(|v| v.is_nan()) {
            return Err(Error::invalid("NaN utility"));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::invalid("scale must be positive"));
        }
        Ok(())
    }

    fn validate(&self) -> Result<Vec<Nest>> {
        self.validate_flat()?;
        let n = self.utilities.len();
        let mut seen = vec![false; n];
        let mut nests = Vec::with_capacity(self.nests.len());
        for nest in &self.nests {
            if !(nest.coef > 0.0 && nest.coef <= 1.0) {
                return Err(Error::invalid("nest coefficient outside (0, 1]"));
            }
            for &m in &nest.members {
                if m >= n || seen[m] {
                    return Err(Error::invalid("malformed nesting"));
                }
                seen[m] = true;
            }
            if !nest.members.is_empty() {
                nests.push(nest.clone());
            }
        }
        for (i, s) in seen.iter().enumerate() {
            if !s {
                nests.push(Nest {
                    members: vec![i],
                    coef: 1.0,
                });
            }
        }
        Ok(nests)
    }

    /// Scaled inclusive value of each nest plus within-nest probabilities.
    fn decompose(&self) -> Result<(Vec<Nest>, Vec<f64>, Vec<Vec<f64>>)> {
        let nests = self.validate()?;
        let mut inclusive = Vec::with_capacity(nests.len());
        let mut within = Vec::with_capacity(nests.len());
        for nest in &nests {
            let scaled: Vec<f64> = nest
                .members
                .iter()
                .map(|&m| self.scale * self.utilities[m] / nest.coef)
                .collect();
            let (lse, probs) = log_sum_exp_probs(&scaled);
            inclusive.push(nest.coef * lse);
            within.push(probs);
        }
        Ok((nests, inclusive, within))
    }

    pub fn probabilities(&self) -> Result<Vec<f64>> {
        if self.nests.is_empty() {
            self.validate_flat()?;
            let scaled: Vec<f64> = self.utilities.iter().map(|v| self.scale * v).collect();
            return Ok(log_sum_exp_probs(&scaled).1);
        }
        let (nests, inclusive, within) = self.decompose()?;
        let (_, upper) = log_sum_exp_probs(&inclusive);
        let mut p = vec![0.0; self.utilities.len()];
        for ((nest, pu), w) in nests.iter().zip(&upper).zip(&within) {
            for (&m, pw) in nest.members.iter().zip(w) {
                p[m] = pu * pw;
            }
        }
        Ok(p)
    }

    /// Expected maximum utility, in utility units.
    pub fn logsum(&self) -> Result<f64> {
        if self.nests.is_empty() {
            self.validate_flat()?;
            let scaled: Vec<f64> = self.utilities.iter().map(|v| self.scale * v).collect();
            return Ok(log_sum_exp(&scaled) / self.scale);
        }
        let (_, inclusive, _) = self.decompose()?;
        Ok(log_sum_exp(&inclusive) / self.scale)
    }

    /// Samples an alternative and returns it with the probability vector.
    pub fn choose<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(usize, Vec<f64>)> {
        let p = self.probabilities()?;
        Ok((sample_index(&p, rng.random::<f64>()), p))
    }
}

pub fn log_sum_exp(x: &[f64]) -> f64 {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + x.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn log_sum_exp_probs(x: &[f64]) -> (f64, Vec<f64>) {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    (m + s.ln(), e.into_iter().map(|v| v / s).collect())
}

/// Multinomial-logit probabilities of `utilities` at scale `mu`.
pub fn mnl_probabilities(utilities: &[f64], mu: f64) -> Result<Vec<f64>> {
    ChoiceModel::mnl(utilities.to_vec(), mu).probabilities()
}

/// `(1/mu) ln sum exp(mu v)`.
pub fn mnl_logsum(utilities: &[f64], mu: f64) -> Result<f64> {
    ChoiceModel::mnl(utilities.to_vec(), mu).logsum()
}

/// Inverse-CDF draw with a uniform `u` in [0, 1).
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left the tail short; fall back to the last positive entry.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Path-size factor of each path: the length share of each link divided by
/// the number of paths using it. `paths[i]` lists `(link, length)` pairs.
pub fn path_sizes<L: PartialEq + Copy>(paths: &[Vec<(L, f64)>]) -> Vec<f64> {
    paths
        .iter()
        .map(|p| {
            let total: f64 = p.iter().map(|&(_, len)| len).sum();
            if total <= 0.0 {
                return 1.0;
            }
            p.iter()
                .map(|&(link, len)| {
                    let users = paths.iter().filter(|q| q.iter().any(|&(l, _)| l == link)).count();
                    len / total / users as f64
                })
                .sum()
        })
        .collect()
}
