//! Freight demand: shipment sizing, e-commerce orders, carrier planning
//! and goods-vehicle route choice.
mod demand;
mod ecommerce;
mod eoq;
mod oracle;
mod route;
mod vop;

pub use self::demand::{
    generate_contracts, next_fee_increment, simulate_freight_day, size_contract, CarrierDay, CommodityType, Contract,
    ContractDay, ContractSpec, FreightDay, FreightDayInputs, FreightSpec, FreightWorld, PickupActivity, Shipment,
    ShipmentSource,
};
pub use self::ecommerce::{
    adoption_probability, expected_daily_orders, simulate_ecommerce, DeliveryMode, DeliveryOption, EcomCommodity,
    EcomContext, EcomOrder, EcomSpec, Household,
};
pub use self::eoq::{
    delivery_fee_increment, optimal_shipment_size, shipment_frequency, size_dependent_cost, ShipmentSizeParams,
};
pub use self::oracle::{average_operating_cost, SkimOracle};
pub use self::route::{freight_route_choice, freight_route_utilities};
pub use self::vop::{
    check_plan, generate_vop_choice_set, overlap_factors, run_heuristic, vop_choose, vop_utility, LegCost,
    PlanShipment, PlanTrip, PlanVehicle, Requirement, ShipmentOrder, Similarity, Stop, StopKind, Tour, TravelOracle,
    VehicleOrder, VopParams, VopPlan, SHIPMENT_ORDERS, SIMILARITIES, VEHICLE_ORDERS,
};
