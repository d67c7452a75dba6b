use serde::{Deserialize, Serialize};

/// Road vehicle classes. Goods vehicles are split by maximum laden weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VehicleClass {
    Car,
    Lgv,
    Hgv,
    Vhgv,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 4] = [
        VehicleClass::Car,
        VehicleClass::Lgv,
        VehicleClass::Hgv,
        VehicleClass::Vhgv,
    ];
    pub const GOODS: [VehicleClass; 3] = [VehicleClass::Lgv, VehicleClass::Hgv, VehicleClass::Vhgv];

    /// Passenger-car units.
    pub fn pcu(self) -> f64 {
        match self {
            VehicleClass::Car => 1.0,
            VehicleClass::Lgv => 1.5,
            VehicleClass::Hgv => 2.0,
            VehicleClass::Vhgv => 2.5,
        }
    }

    pub fn index(self) -> usize {
        match self {
            VehicleClass::Car => 0,
            VehicleClass::Lgv => 1,
            VehicleClass::Hgv => 2,
            VehicleClass::Vhgv => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VehicleClass::Car => "car",
            VehicleClass::Lgv => "lgv",
            VehicleClass::Hgv => "hgv",
            VehicleClass::Vhgv => "vhgv",
        }
    }

    pub fn is_goods(self) -> bool {
        self != VehicleClass::Car
    }
}
