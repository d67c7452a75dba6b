//! Route choice for goods vehicles: money-metric utility with the planning
//! coefficients and a path-size correction.
use crate::choice::{mnl_probabilities, path_sizes, sample_index};
use crate::error::{Error, Result};
use crate::pax::RouteOption;
use crate::vehicle::VehicleClass;

use super::vop::VopParams;

pub fn freight_route_utilities(options: &[RouteOption], class: VehicleClass, p: &VopParams) -> Result<Vec<f64>> {
    if options.is_empty() {
        return Err(Error::invalid("empty path set"));
    }
    let ps = path_sizes(&options.iter().map(|o| o.links.clone()).collect::<Vec<_>>());
    Ok(options
        .iter()
        .zip(ps)
        .map(|(o, ps)| -o.toll + p.time_per_h * o.time_h + p.per_km(class) * o.km + p.overlap * ps.ln())
        .collect())
}

pub fn freight_route_choice(
    options: &[RouteOption],
    class: VehicleClass,
    p: &VopParams,
    u: f64,
) -> Result<(usize, Vec<f64>)> {
    let v = freight_route_utilities(options, class, p)?;
    let probs = mnl_probabilities(&v, p.scale)?;
    Ok((sample_index(&probs, u), probs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt(link: usize, toll: f64) -> RouteOption {
        RouteOption {
            links: vec![(link, 2.0)],
            time_h: 0.1,
            toll,
            km: 2.0,
            signals: 1,
            right_turns: 0,
        }
    }

    #[test]
    fn single_and_symmetric() {
        let p = VopParams::default();
        assert_eq!(freight_route_choice(&[opt(0, 0.0)], VehicleClass::Hgv, &p, 0.9).unwrap().0, 0);
        let (_, pr) = freight_route_choice(&[opt(0, 0.0), opt(1, 0.0)], VehicleClass::Hgv, &p, 0.9).unwrap();
        assert!((pr[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn untolled_preferred() {
        let p = VopParams::default();
        let (_, pr) = freight_route_choice(&[opt(0, 2.0), opt(1, 0.0)], VehicleClass::Lgv, &p, 0.9).unwrap();
        assert!(pr[1] > 0.5);
    }
}
