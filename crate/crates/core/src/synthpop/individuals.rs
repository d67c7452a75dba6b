use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::choice::sample_index;
use crate::error::{Error, Result};
use crate::netgraph::ZoneId;
use crate::rng::{stream, tags};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncomeGroup {
    pub share: f64,
    /// Median annual household income, $.
    pub income_median: f64,
    /// Median value of time, $/h.
    pub vot_median: f64,
    pub car_ownership: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PopulationSpec {
    pub income_groups: Vec<IncomeGroup>,
    pub vot_cv: f64,
    pub income_sigma: f64,
    pub worker_share: f64,
    pub student_share: f64,
    pub max_household_size: u32,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        PopulationSpec {
            income_groups: vec![
                IncomeGroup {
                    share: 0.3,
                    income_median: 35_000.0,
                    vot_median: 10.0,
                    car_ownership: 0.7,
                },
                IncomeGroup {
                    share: 0.45,
                    income_median: 75_000.0,
                    vot_median: 18.0,
                    car_ownership: 0.88,
                },
                IncomeGroup {
                    share: 0.25,
                    income_median: 150_000.0,
                    vot_median: 30.0,
                    car_ownership: 0.95,
                },
            ],
            vot_cv: 0.2,
            income_sigma: 0.35,
            worker_share: 0.6,
            student_share: 0.15,
            max_household_size: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Worker,
    Student,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: usize,
    pub household: usize,
    pub home_zone: ZoneId,
    pub role: Role,
    /// Fixed work or education zone.
    pub fixed_zone: Option<ZoneId>,
    pub income: f64,
    pub income_group: usize,
    /// $/h.
    pub vot: f64,
    pub has_car: bool,
}

/// Samples individuals zone by zone. `work_weights` and `school_weights`
/// give the attraction of each zone for fixed work and education places.
pub fn generate_individuals(
    zone_populations: &[u32],
    spec: &PopulationSpec,
    work_weights: &[f64],
    school_weights: &[f64],
    seed: u64,
) -> Result<Vec<Individual>> {
    let total: u64 = zone_populations.iter().map(|&p| p as u64).sum();
    if total == 0 {
        return Err(Error::invalid("non-positive population"));
    }
    if spec.income_groups.is_empty() {
        return Err(Error::invalid("no income groups"));
    }
    let nz = zone_populations.len();
    if work_weights.len() != nz || school_weights.len() != nz {
        return Err(Error::invalid("attraction weights must cover every zone"));
    }
    let norm = |w: &[f64]| -> Result<Vec<f64>> {
        let s: f64 = w.iter().sum();
        if !(s > 0.0) || w.iter().any(|&x| x < 0.0) {
            return Err(Error::invalid("attraction weights must be nonnegative with a positive sum"));
        }
        Ok(w.iter().map(|x| x / s).collect())
    };
    let work = norm(work_weights)?;
    let school = norm(school_weights)?;
    let shares = norm(&spec.income_groups.iter().map(|g| g.share).collect::<Vec<_>>())?;
    let sigma_vot = (1.0 + spec.vot_cv * spec.vot_cv).ln().sqrt();
    let mut out = Vec::with_capacity(total as usize);
    let mut household = 0;
    for (zone, &pop) in zone_populations.iter().enumerate() {
        let mut left_in_household = 0;
        for _ in 0..pop {
            let id = out.len();
            let mut rng = stream(seed, tags::INDIVIDUALS, id as u64);
            if left_in_household == 0 {
                household += 1;
                left_in_household = rng.random_range(1..=spec.max_household_size.max(1));
            }
            left_in_household -= 1;
            let g = sample_index(&shares, rng.random());
            let group = &spec.income_groups[g];
            let income = LogNormal::new(group.income_median.ln(), spec.income_sigma)
                .map_err(|e| Error::invalid(e.to_string()))?
                .sample(&mut rng);
            let vot = LogNormal::new(group.vot_median.ln(), sigma_vot)
                .map_err(|e| Error::invalid(e.to_string()))?
                .sample(&mut rng);
            let u: f64 = rng.random();
            let (role, fixed_zone) = if u < spec.worker_share {
                (Role::Worker, Some(sample_index(&work, rng.random())))
            } else if u < spec.worker_share + spec.student_share {
                (Role::Student, Some(sample_index(&school, rng.random())))
            } else {
                (Role::Other, None)
            };
            out.push(Individual {
                id,
                household: household - 1,
                home_zone: zone,
                role,
                fixed_zone,
                income,
                income_group: g,
                vot,
                has_car: rng.random_bool(group.car_ownership.clamp(0.0, 1.0)),
            });
        }
    }
    Ok(out)
}
