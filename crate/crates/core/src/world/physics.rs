use crate::dynamics::VehicleState;
use crate::geometry::{Obb, Vec2};
use crate::params::{SimParams, VehicleParams, GRAVITY};

use super::map::{ObstructionBox, TileKind, TileMap};

/// Penetration accepted after positional correction, m.
pub const PENETRATION_SLACK: f64 = 1e-6;

/// Nearest hit of a ray with any box footprint.
pub fn raycast(origin: Vec2, bearing: f64, boxes: &[ObstructionBox]) -> Option<f64> {
    boxes
        .iter()
        .filter_map(|b| b.footprint().raycast(origin, bearing))
        .min_by(f64::total_cmp)
}

pub fn vehicle_footprint(state: &VehicleState, params: &VehicleParams) -> Obb {
    Obb::new(
        state.center(params).into(),
        params.chassis_length,
        params.chassis_width,
        state.yaw,
    )
}

/// Momentum handed from the vehicle to one box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impulse {
    pub box_index: usize,
    /// Unit contact normal, vehicle towards box.
    pub normal: Vec2,
    /// N·s along `normal`.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionOutcome {
    pub state: VehicleState,
    pub impulses: Vec<Impulse>,
    pub on_lawn: bool,
    pub clamped: bool,
}

/// Resolves the vehicle against terrain, boxes and the map edge.
///
/// Contacts are perfectly inelastic. The tyres only let the vehicle change
/// speed along its heading, so its effective mass along a contact normal is
/// `mass / cos²` of the angle between heading and normal; for head-on
/// contact the exchange conserves momentum along the normal exactly.
pub fn collide_vehicle(
    state: VehicleState,
    map: &TileMap,
    boxes: &mut [ObstructionBox],
    params: &SimParams,
    dt: f64,
) -> CollisionOutcome {
    let vp = &params.vehicle;
    let mut state = state;

    let center: Vec2 = state.center(vp).into();
    let on_lawn = map
        .tile_at(center)
        .is_some_and(|t| t.kind == TileKind::Lawn);
    if on_lawn {
        // The drive servo already cancels nominal drag; lawn adds the surplus.
        let extra = (params.world.lawn_drag_multiplier - 1.0) * vp.linear_drag;
        state.speed *= (1.0 - extra * dt).max(0.0);
    }

    let mut impulses = Vec::new();
    for (box_index, b) in boxes.iter_mut().enumerate() {
        let Some(contact) = vehicle_footprint(&state, vp).overlap(&b.footprint()) else {
            continue;
        };
        let n = contact.normal;
        let heading = Vec2::from_angle(state.yaw);
        let c = heading.dot(n);
        let closing = state.speed * c - b.velocity.dot(n);
        if closing > 0.0 {
            let j = closing / (c * c / vp.mass + 1.0 / b.mass);
            b.velocity = b.velocity + n * (j / b.mass);
            state.speed -= j * c / vp.mass;
            impulses.push(Impulse {
                box_index,
                normal: n,
                magnitude: j,
            });
        }
        let total = vp.mass + b.mass;
        let shift = n * contact.depth;
        b.center = b.center + shift * (vp.mass / total);
        state.x -= shift.x * (b.mass / total);
        state.y -= shift.y * (b.mass / total);
    }

    let center: Vec2 = state.center(vp).into();
    let clamped_center = map.clamp_to_tiles(center);
    let clamped = clamped_center != center;
    if clamped {
        state.x += clamped_center.x - center.x;
        state.y += clamped_center.y - center.y;
        state.speed = 0.0;
    }

    CollisionOutcome {
        state,
        impulses,
        on_lawn,
        clamped,
    }
}

/// Integrates box motion under sliding friction, then exchanges momentum
/// between overlapping boxes (perfectly inelastic along the contact normal).
pub fn box_step(boxes: &mut [ObstructionBox], friction: f64, dt: f64) {
    let decel = friction * GRAVITY * dt;
    for b in boxes.iter_mut() {
        let speed = b.velocity.norm();
        if speed <= decel {
            b.velocity = Vec2::ZERO;
        } else {
            b.velocity = b.velocity * ((speed - decel) / speed);
        }
        b.center = b.center + b.velocity * dt;
    }

    for i in 0..boxes.len() {
        for k in i + 1..boxes.len() {
            let (head, tail) = boxes.split_at_mut(k);
            let (a, b) = (&mut head[i], &mut tail[0]);
            let Some(contact) = a.footprint().overlap(&b.footprint()) else {
                continue;
            };
            let n = contact.normal;
            let closing = a.velocity.dot(n) - b.velocity.dot(n);
            if closing > 0.0 {
                let j = closing / (1.0 / a.mass + 1.0 / b.mass);
                a.velocity = a.velocity - n * (j / a.mass);
                b.velocity = b.velocity + n * (j / b.mass);
            }
            separate_pair(a, b, n * contact.depth);
        }
    }
}

fn separate_pair(a: &mut ObstructionBox, b: &mut ObstructionBox, shift: Vec2) {
    let total = a.mass + b.mass;
    a.center = a.center - shift * (b.mass / total);
    b.center = b.center + shift * (a.mass / total);
}

/// Positional relaxation so that no footprints overlap beyond the slack.
/// Returns the deepest remaining penetration.
pub fn separate_all(
    state: &mut VehicleState,
    boxes: &mut [ObstructionBox],
    params: &VehicleParams,
) -> f64 {
    const MAX_PASSES: usize = 32;
    let mut worst = 0.0;
    for _ in 0..MAX_PASSES {
        worst = 0.0_f64;
        for b in boxes.iter_mut() {
            if let Some(c) = vehicle_footprint(state, params).overlap(&b.footprint()) {
                worst = worst.max(c.depth);
                let total = params.mass + b.mass;
                let shift = c.normal * c.depth;
                b.center = b.center + shift * (params.mass / total);
                state.x -= shift.x * (b.mass / total);
                state.y -= shift.y * (b.mass / total);
            }
        }
        for i in 0..boxes.len() {
            for k in i + 1..boxes.len() {
                let (head, tail) = boxes.split_at_mut(k);
                if let Some(c) = head[i].footprint().overlap(&tail[0].footprint()) {
                    worst = worst.max(c.depth);
                    separate_pair(&mut head[i], &mut tail[0], c.normal * c.depth);
                }
            }
        }
        if worst <= PENETRATION_SLACK {
            break;
        }
    }
    worst
}

/// Deepest overlap among all vehicle/box and box/box pairs.
pub fn max_penetration(
    state: &VehicleState,
    boxes: &[ObstructionBox],
    params: &VehicleParams,
) -> f64 {
    let car = vehicle_footprint(state, params);
    let mut worst = 0.0_f64;
    for (i, a) in boxes.iter().enumerate() {
        if let Some(c) = car.overlap(&a.footprint()) {
            worst = worst.max(c.depth);
        }
        for b in &boxes[i + 1..] {
            if let Some(c) = a.footprint().overlap(&b.footprint()) {
                worst = worst.max(c.depth);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn strip_map(len: i32) -> TileMap {
        let tiles: String = (0..len)
            .map(|i| format!("[[tiles]]\nkind = \"straight\"\ngrid = [{i}, 0]\nrotation = 90\n"))
            .collect();
        TileMap::parse(&tiles).unwrap()
    }

    #[test]
    fn raycast_examples() {
        assert_eq!(raycast(Vec2::ZERO, 0.0, &[]), None);
        let b = ObstructionBox {
            size: [0.2, 0.2, 0.2],
            ..ObstructionBox::new(Vec2::new(1.0, 0.0))
        };
        assert_relative_eq!(
            raycast(Vec2::ZERO, 0.0, &[b]).unwrap(),
            0.9,
            epsilon = 1e-12
        );
        let behind = ObstructionBox::new(Vec2::new(-1.0, 0.0));
        assert_eq!(raycast(Vec2::ZERO, 0.0, &[behind]), None);
        let near = ObstructionBox::new(Vec2::new(0.5, 0.0));
        assert_relative_eq!(
            raycast(Vec2::ZERO, 0.0, &[b, near]).unwrap(),
            0.45,
            epsilon = 1e-12
        );
    }

    #[test]
    fn far_vehicle_is_untouched() {
        let map = strip_map(3);
        let params = SimParams::default();
        let mut boxes = vec![ObstructionBox::new(Vec2::new(1.2, 0.0))];
        let state = VehicleState {
            speed: 0.3,
            ..VehicleState::default()
        };
        let out = collide_vehicle(state, &map, &mut boxes, &params, 0.01);
        assert_eq!(out.state, state);
        assert!(out.impulses.is_empty());
        assert_eq!(boxes[0].velocity, Vec2::ZERO);
    }

    #[test]
    fn head_on_push_conserves_momentum() {
        let map = strip_map(3);
        let params = SimParams::default();
        let vp = params.vehicle;
        let state = VehicleState {
            speed: 0.3,
            ..VehicleState::default()
        };
        // Rear of the box just inside the vehicle's nose.
        let nose = vp.wheelbase / 2.0 + vp.chassis_length / 2.0;
        let mut boxes = vec![ObstructionBox::new(Vec2::new(nose + 0.05 - 0.002, 0.0))];
        let before = vp.mass * state.speed;
        let out = collide_vehicle(state, &map, &mut boxes, &params, 0.01);
        assert_eq!(out.impulses.len(), 1);
        let after = vp.mass * out.state.speed + boxes[0].mass * boxes[0].velocity.x;
        assert!((after - before).abs() < 1e-9);
        // 1-D perfectly inelastic oracle.
        let common = 1.75 * 0.3 / (1.75 + 0.1);
        assert_relative_eq!(out.state.speed, common, epsilon = 1e-12);
        assert_relative_eq!(boxes[0].velocity.x, common, epsilon = 1e-12);
        assert!(max_penetration(&out.state, &boxes, &vp) < 1e-9);
    }

    #[test]
    fn map_edge_clamps_and_stops() {
        let map = strip_map(1);
        let params = SimParams::default();
        let state = VehicleState {
            x: 0.3,
            speed: 0.4,
            ..VehicleState::default()
        };
        let out = collide_vehicle(state, &map, &mut [], &params, 0.01);
        assert!(out.clamped);
        assert_eq!(out.state.speed, 0.0);
        let c = out.state.center(&params.vehicle);
        assert_relative_eq!(c.0, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn lawn_adds_drag() {
        let map = TileMap::parse(
            "[[tiles]]\nkind = \"straight\"\ngrid = [0, 0]\n[[tiles]]\nkind = \"lawn\"\ngrid = [1, 0]\n",
        )
        .unwrap();
        let params = SimParams::default();
        let state = VehicleState {
            x: 0.6,
            speed: 0.4,
            ..VehicleState::default()
        };
        let out = collide_vehicle(state, &map, &mut [], &params, 0.01);
        assert!(out.on_lawn);
        assert_relative_eq!(out.state.speed, 0.4 * (1.0 - 0.2 * 0.01), epsilon = 1e-15);
    }

    #[test]
    fn box_friction_stopping_time() {
        let dt = 1e-3;
        let mut boxes = vec![ObstructionBox {
            velocity: Vec2::new(0.2, 0.0),
            ..ObstructionBox::new(Vec2::ZERO)
        }];
        let mut t = 0.0;
        while boxes[0].velocity != Vec2::ZERO {
            box_step(&mut boxes, 0.5, dt);
            t += dt;
        }
        let oracle: f64 = 0.2 / (0.5 * 9.81);
        assert!((oracle - 0.0408).abs() < 1e-4);
        assert!(t >= oracle - 1e-12 && t <= oracle + dt, "{t}");
        let mut rest = vec![ObstructionBox::new(Vec2::ZERO)];
        box_step(&mut rest, 0.5, 0.01);
        assert_eq!(rest[0], ObstructionBox::new(Vec2::ZERO));
    }

    #[test]
    fn equal_boxes_share_velocity() {
        let mut boxes = vec![
            ObstructionBox {
                velocity: Vec2::new(0.2, 0.0),
                ..ObstructionBox::new(Vec2::new(0.0, 0.0))
            },
            ObstructionBox::new(Vec2::new(0.0995, 0.0)),
        ];
        box_step(&mut boxes, 0.0, 0.01);
        assert_relative_eq!(boxes[0].velocity.x, 0.1, epsilon = 1e-12);
        assert_relative_eq!(boxes[1].velocity.x, 0.1, epsilon = 1e-12);
        let p: f64 = boxes[0].mass * boxes[0].velocity.x + boxes[1].mass * boxes[1].velocity.x;
        assert!((p - 0.02).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn raycast_invariant_under_rigid_motion(
            bx in -3.0f64..3.0, by in -3.0f64..3.0, byaw in -3.0f64..3.0,
            bearing in -3.1f64..3.1, rot in -3.1f64..3.1, tx in -5.0f64..5.0, ty in -5.0f64..5.0,
        ) {
            let b = ObstructionBox { size: [0.4, 0.2, 0.1], yaw: byaw, ..ObstructionBox::new(Vec2::new(bx, by)) };
            let base = raycast(Vec2::ZERO, bearing, &[b]);
            let t = Vec2::new(tx, ty);
            let moved = ObstructionBox { center: b.center.rotate(rot) + t, yaw: byaw + rot, ..b };
            let other = raycast(t, bearing + rot, &[moved]);
            match (base, other) {
                (Some(d0), Some(d1)) => prop_assert!((d0 - d1).abs() < 1e-9),
                (None, None) => {}
                // Grazing rays may flip by rounding.
                (a, b) => prop_assert!(a.or(b).unwrap() >= 0.0),
            }
        }

        #[test]
        fn no_interpenetration_after_relaxation(
            pts in proptest::collection::vec((-0.4f64..0.4, -0.4f64..0.4, -1.5f64..1.5), 1..6),
            yaw in -3.0f64..3.0,
        ) {
            let params = VehicleParams::default();
            let mut state = VehicleState::at_pose(-0.07, 0.0, yaw);
            let mut boxes: Vec<_> = pts.iter()
                .map(|&(x, y, w)| ObstructionBox { yaw: w, ..ObstructionBox::new(Vec2::new(x, y)) })
                .collect();
            separate_all(&mut state, &mut boxes, &params);
            prop_assert!(max_penetration(&state, &boxes, &params) <= PENETRATION_SLACK);
        }
    }
}
