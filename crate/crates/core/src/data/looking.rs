use std::f64::consts::PI;

use super::window::Point;
use crate::error::{Error, Result};

pub const DEFAULT_LOOK_HALF_ANGLE: f64 = 30.0 * PI / 180.0;

/// Slack on the inclusive boundary to absorb the rounding of `θ − bearing`.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Smallest absolute difference between two angles, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// 1 when the pedestrian's head yaw is within `half_angle` of the bearing to
/// the vehicle (boundary inclusive), otherwise 0.
pub fn looking_flag(head_theta: f64, ped: Point, veh: Point, half_angle: f64) -> Result<u8> {
    if !(head_theta.is_finite() && ped.iter().chain(&veh).all(|v| v.is_finite())) {
        return Err(Error::NonFinite("looking_flag input".into()));
    }
    let (dx, dy) = (veh[0] - ped[0], veh[1] - ped[1]);
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::InvalidArgument("looking_flag: pedestrian and vehicle positions coincide".into()));
    }
    let bearing = dy.atan2(dx);
    Ok(u8::from(angular_distance(head_theta, bearing) <= half_angle + BOUNDARY_SLACK))
}
