//! Household e-commerce: monthly adoption, then a nested choice of
//! expenditure level, order value, delivery mode and delivery option.
use serde::{Deserialize, Serialize};

use crate::choice::{log_sum_exp, mnl_probabilities, sample_index};
use crate::clock::{hhmm, Minutes};
use crate::error::{Error, Result};
use crate::netgraph::ZoneId;
use crate::rng::{normal_quantile, tags, uniform};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcomCommodity {
    pub name: String,
    /// Orders per month of each expenditure level; "no orders" is implicit.
    pub orders_per_month: Vec<f64>,
    pub level_asc: Vec<f64>,
    /// Order values ($) and their constants.
    pub order_values: Vec<f64>,
    pub value_asc: Vec<f64>,
    pub kg_per_dollar_median: f64,
    pub kg_per_dollar_sigma: f64,
    pub max_packages: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeliveryOption {
    pub name: String,
    pub fee: f64,
    pub asc: f64,
    /// Delivery (home) or collection (pickup) window.
    pub window: (Minutes, Minutes),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EcomSpec {
    pub adoption_asc: f64,
    /// Per unit of log income relative to `reference_income`.
    pub adoption_income: f64,
    pub adoption_size: f64,
    /// Per km of the household's mean off-line shopping distance.
    pub adoption_shop_km: f64,
    pub reference_income: f64,
    pub commodities: Vec<EcomCommodity>,
    pub home_options: Vec<DeliveryOption>,
    pub pickup_options: Vec<DeliveryOption>,
    pub home_asc: f64,
    pub pickup_asc: f64,
    pub pickup_km: f64,
    /// Utility per dollar of fee.
    pub fee_coef: f64,
    pub level_nest: f64,
    pub value_nest: f64,
    pub mode_nest: f64,
    pub weekdays_per_month: f64,
}

fn opt(name: &str, fee: f64, asc: f64, w: (Minutes, Minutes)) -> DeliveryOption {
    DeliveryOption {
        name: name.into(),
        fee,
        asc,
        window: w,
    }
}

impl Default for EcomSpec {
    fn default() -> Self {
        let commodity = |name: &str, asc: [f64; 3], values: [f64; 2], kg: f64, pk: u32| EcomCommodity {
            name: name.into(),
            orders_per_month: vec![1.0, 2.0, 4.0],
            level_asc: asc.to_vec(),
            order_values: values.to_vec(),
            value_asc: vec![0.0, -0.8],
            kg_per_dollar_median: kg,
            kg_per_dollar_sigma: 0.5,
            max_packages: pk,
        };
        EcomSpec {
            adoption_asc: -0.2,
            adoption_income: 0.6,
            adoption_size: 0.15,
            adoption_shop_km: 0.05,
            reference_income: 75_000.0,
            commodities: vec![
                commodity("groceries", [-1.0, -2.0, -3.5], [40.0, 120.0], 0.15, 3),
                commodity("household_goods", [-0.8, -1.8, -3.5], [30.0, 90.0], 0.08, 2),
                commodity("durable_goods", [-1.2, -2.5, -4.5], [60.0, 300.0], 0.04, 2),
            ],
            home_options: vec![
                opt("standard", 0.0, 0.0, (hhmm(9, 0), hhmm(20, 0))),
                opt("time_slot", 4.0, 0.3, (hhmm(17, 0), hhmm(20, 0))),
                opt("express", 8.0, 0.2, (hhmm(9, 0), hhmm(13, 0))),
            ],
            pickup_options: vec![
                opt("in_store", 0.0, 0.0, (hhmm(16, 0), hhmm(19, 0))),
                opt("curbside", 2.0, 0.3, (hhmm(16, 0), hhmm(19, 0))),
            ],
            home_asc: 0.8,
            pickup_asc: 0.0,
            pickup_km: -0.15,
            fee_coef: -0.35,
            level_nest: 0.7,
            value_nest: 0.7,
            mode_nest: 0.6,
            weekdays_per_month: 21.0,
        }
    }
}

impl EcomSpec {
    pub fn validate(&self) -> Result<()> {
        let nests = [self.level_nest, self.value_nest, self.mode_nest];
        if nests.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(Error::invalid("e-commerce nest coefficients must lie in (0, 1]"));
        }
        if self.home_options.is_empty() || self.pickup_options.is_empty() || self.weekdays_per_month <= 0.0 {
            return Err(Error::invalid("e-commerce needs delivery options on both modes"));
        }
        let fees = self.home_options.iter().chain(&self.pickup_options);
        if fees.clone().any(|o| !(o.fee >= 0.0) || o.window.1 <= o.window.0) {
            return Err(Error::invalid("delivery fees must be nonnegative with nonempty windows"));
        }
        for c in &self.commodities {
            let n = c.orders_per_month.len();
            if n == 0
                || c.level_asc.len() != n
                || c.order_values.is_empty()
                || c.value_asc.len() != c.order_values.len()
                || c.orders_per_month.iter().any(|m| *m < 0.0)
                || c.order_values.iter().any(|v| !(*v > 0.0))
                || c.kg_per_dollar_median <= 0.0
                || c.max_packages == 0
            {
                return Err(Error::invalid(format!("malformed e-commerce commodity {}", c.name)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Household {
    pub id: usize,
    pub zone: ZoneId,
    pub members: Vec<usize>,
    pub income: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryMode {
    Home,
    Pickup,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcomOrder {
    pub household: usize,
    pub commodity: usize,
    /// Index of the order among the household's orders of this commodity today.
    pub index: u32,
    pub value: f64,
    pub mode: DeliveryMode,
    pub option: usize,
    pub fee: f64,
    pub weight_kg: f64,
    pub packages: u32,
    pub window: (Minutes, Minutes),
}

/// Conditions a household faces today.
#[derive(Clone, Copy, Debug)]
pub struct EcomContext<'a> {
    pub spec: &'a EcomSpec,
    pub shop_km: f64,
    pub pickup_km: f64,
    /// Added to every home-delivery fee.
    pub fee_increment: f64,
    pub seed: u64,
}

fn nest_value(utils: &[f64], theta: f64) -> f64 {
    let scaled: Vec<f64> = utils.iter().map(|u| u / theta).collect();
    theta * log_sum_exp(&scaled)
}

fn option_utils(opts: &[DeliveryOption], extra_fee: f64, fee_coef: f64) -> Vec<f64> {
    opts.iter().map(|o| o.asc + fee_coef * (o.fee + extra_fee)).collect()
}

/// Utilities of the home and pickup modes, and the option utilities below
/// each.
fn mode_level(ctx: &EcomContext) -> ([f64; 2], [Vec<f64>; 2]) {
    let s = ctx.spec;
    let home = option_utils(&s.home_options, ctx.fee_increment, s.fee_coef);
    let pick = option_utils(&s.pickup_options, 0.0, s.fee_coef);
    let uh = s.home_asc + nest_value(&home, s.mode_nest);
    let up = s.pickup_asc + s.pickup_km * ctx.pickup_km + nest_value(&pick, s.mode_nest);
    ([uh, up], [home, pick])
}

fn value_utils(c: &EcomCommodity, mode_iv: f64) -> Vec<f64> {
    // Mode choice does not depend on order value beyond the value constant.
    c.value_asc.iter().map(|a| a + mode_iv).collect()
}

/// Probability the household adopts e-commerce this month.
pub fn adoption_probability(hh: &Household, ctx: &EcomContext) -> f64 {
    let s = ctx.spec;
    let v = s.adoption_asc
        + s.adoption_income * (hh.income.max(1.0) / s.reference_income).ln()
        + s.adoption_size * hh.members.len() as f64
        + s.adoption_shop_km * ctx.shop_km;
    1.0 / (1.0 + (-v).exp())
}

/// Expected orders per weekday by commodity (zero when not adopted),
/// for diagnostics.
pub fn expected_daily_orders(hh: &Household, ctx: &EcomContext) -> Result<Vec<f64>> {
    let s = ctx.spec;
    let (modes, _) = mode_level(ctx);
    let mode_iv = nest_value(&modes, s.value_nest);
    let pa = adoption_probability(hh, ctx);
    s.commodities
        .iter()
        .map(|c| {
            let iv = nest_value(&value_utils(c, mode_iv), s.level_nest);
            let mut u = vec![0.0];
            u.extend(c.level_asc.iter().map(|a| a + iv));
            let p = mnl_probabilities(&u, 1.0)?;
            let m: f64 = c.orders_per_month.iter().zip(&p[1..]).map(|(m, p)| m * p).sum();
            Ok(pa * m / s.weekdays_per_month)
        })
        .collect()
}

/// Orders the household places on the simulated weekday. All draws are
/// keyed by household, commodity and order index, so two scenarios with
/// the same seed differ only where costs change a choice.
pub fn simulate_ecommerce(hh: &Household, ctx: &EcomContext) -> Result<Vec<EcomOrder>> {
    let s = ctx.spec;
    let key = |c: usize, k: u64, stage: u64| uniform(&[ctx.seed, tags::ECOMMERCE, hh.id as u64, c as u64, k, stage]);
    if key(usize::MAX, 0, 0) >= adoption_probability(hh, ctx) {
        return Ok(Vec::new());
    }
    let (modes, opts) = mode_level(ctx);
    let mode_iv = nest_value(&modes, s.value_nest);
    let pm = mnl_probabilities(&modes.map(|u| u / s.value_nest), 1.0)?;
    let po = [
        mnl_probabilities(&opts[0].iter().map(|u| u / s.mode_nest).collect::<Vec<_>>(), 1.0)?,
        mnl_probabilities(&opts[1].iter().map(|u| u / s.mode_nest).collect::<Vec<_>>(), 1.0)?,
    ];
    let mut out = Vec::new();
    for (ci, c) in s.commodities.iter().enumerate() {
        let vu = value_utils(c, mode_iv);
        let iv = nest_value(&vu, s.level_nest);
        let mut lu = vec![0.0];
        lu.extend(c.level_asc.iter().map(|a| a + iv));
        let level = sample_index(&mnl_probabilities(&lu, 1.0)?, key(ci, 0, 1));
        if level == 0 {
            continue;
        }
        let rate = c.orders_per_month[level - 1] / s.weekdays_per_month;
        let n = rate.floor() as u32 + u32::from(key(ci, 0, 2) < rate.fract());
        let pv = mnl_probabilities(&vu.iter().map(|u| u / s.level_nest).collect::<Vec<_>>(), 1.0)?;
        for k in 0..n {
            let kk = k as u64 + 1;
            let vi = sample_index(&pv, key(ci, kk, 3));
            let mi = sample_index(&pm, key(ci, kk, 4));
            let oi = sample_index(&po[mi], key(ci, kk, 5));
            let (mode, option) = if mi == 0 {
                (DeliveryMode::Home, &s.home_options[oi])
            } else {
                (DeliveryMode::Pickup, &s.pickup_options[oi])
            };
            let fee = option.fee + if mode == DeliveryMode::Home { ctx.fee_increment } else { 0.0 };
            let z = normal_quantile(key(ci, kk, 6).clamp(1e-12, 1.0 - 1e-12));
            let value = c.order_values[vi];
            out.push(EcomOrder {
                household: hh.id,
                commodity: ci,
                index: k,
                value,
                mode,
                option: oi,
                fee,
                weight_kg: value * c.kg_per_dollar_median * (c.kg_per_dollar_sigma * z).exp(),
                packages: 1 + (key(ci, kk, 7) * c.max_packages as f64) as u32 % c.max_packages,
                window: option.window,
            });
        }
    }
    Ok(out)
}
