//! Random-walk mobility.
//!
//! Each moving user travels at its class speed in a direction redrawn
//! uniformly every `MOBILITY_STEP_S` of model time. Directions come from a
//! hash of (seed, user, step) so trajectories do not depend on user order.

use crate::rng::{derive, unit_open};
use crate::topology::{Point, Region, UserProfile};

pub const MOBILITY_STEP_S: f64 = 0.1;

/// Direction (radians) of `user` during walk step `step`.
pub fn walk_direction(seed: u64, user: u64, step: u64) -> f64 {
    unit_open(derive(seed, &[user, step])) * std::f64::consts::TAU
}

/// Moves every user for `dt` seconds of walk step `step`, reflecting off the
/// region boundary.
pub fn step_mobility(users: &mut [UserProfile], dt: f64, step: u64, seed: u64, region: &Region) {
    assert!(dt > 0.0, "mobility step must be positive");
    for u in users.iter_mut() {
        let speed = u.speed_class.speed_mps();
        if speed == 0.0 {
            u.velocity = Point::default();
            continue;
        }
        let a = walk_direction(seed, u.id.0 as u64, step);
        u.velocity = Point::new(speed * a.cos(), speed * a.sin());
        let next = Point::new(u.position.x + u.velocity.x * dt, u.position.y + u.velocity.y * dt);
        u.position = reflect(next, region);
    }
}

/// Mirrors a point that left the region back across the nearest disk edge.
pub fn reflect(p: Point, region: &Region) -> Point {
    if region.contains(p) {
        return p;
    }
    let c = region.nearest_center(p);
    let d = p.dist(c);
    let r = (2.0 * region.radius - d).clamp(0.0, region.radius);
    Point::new(c.x + (p.x - c.x) * r / d, c.y + (p.y - c.y) * r / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::UserId;
    use crate::topology::{SpeedClass, UserKind};

    fn user(id: u32, class: SpeedClass, at: Point) -> UserProfile {
        UserProfile {
            id: UserId(id),
            kind: UserKind::Gbr,
            gbr_demand_bps: 250_000,
            ngbr_app: None,
            qos_weight: 0.0,
            speed_class: class,
            position: at,
            velocity: Point::default(),
        }
    }

    fn region() -> Region {
        Region { centers: vec![Point::default()], radius: 300.0 }
    }

    #[test]
    fn stationary_stays() {
        let mut u = vec![user(0, SpeedClass::Stationary, Point::new(3.0, 4.0))];
        for k in 0..10 {
            step_mobility(&mut u, 0.1, k, 9, &region());
        }
        assert_eq!(u[0].position, Point::new(3.0, 4.0));
    }

    #[test]
    fn vehicular_displacement_bound() {
        let start = Point::default();
        let mut u = vec![user(0, SpeedClass::Vehicular, start)];
        for k in 0..10 {
            step_mobility(&mut u, 0.1, k, 1, &region());
        }
        assert!(u[0].position.dist(start) <= 30_000.0 / 3600.0 + 1e-9);
    }

    #[test]
    fn deterministic() {
        let mk = || {
            vec![user(0, SpeedClass::Vehicular, Point::default()), user(1, SpeedClass::Pedestrian, Point::default())]
        };
        let (mut a, mut b) = (mk(), mk());
        for k in 0..50 {
            step_mobility(&mut a, 0.1, k, 77, &region());
            step_mobility(&mut b, 0.1, k, 77, &region());
        }
        assert_eq!(a, b);
    }

    #[test]
    fn reflection_returns_inside() {
        let r = region();
        let p = reflect(Point::new(305.0, 0.0), &r);
        assert!((p.x - 295.0).abs() < 1e-9 && p.y.abs() < 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn walkers_stay_in_region(seed in any::<u64>(), x in -290.0f64..290.0, steps in 1u64..300) {
                let r = region();
                let start = Point::new(x, 0.0);
                let mut u = vec![user(3, SpeedClass::Vehicular, start)];
                for k in 0..steps {
                    step_mobility(&mut u, 0.1, k, seed, &r);
                    prop_assert!(r.contains(u[0].position));
                }
                prop_assert!(u[0].position.dist(start) <= VEHICULAR_BOUND * steps as f64 + 1e-6);
            }
        }

        const VEHICULAR_BOUND: f64 = 30_000.0 / 3600.0 * 0.1;
    }
}
