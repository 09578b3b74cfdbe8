//! Corridor geometry: planar projection, RSU deployment with frequency
//! reuse, RSRP measurement, and A3 hysteresis association.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{pathloss_uma, ChannelParams};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// A roadside unit along the corridor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsuSite {
    pub rsu_id: usize,
    /// Planar position, meters.
    pub x: f64,
    pub y: f64,
    /// Antennas at this site.
    pub n_antennas: usize,
    pub antenna_height_m: f64,
    /// Frequency band index; same-band sites reuse spectrum.
    pub band_index: usize,
    pub coverage_radius_m: f64,
}

/// Current vehicle -> serving-RSU map; each vehicle has exactly one server.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssociationState {
    serving: BTreeMap<String, usize>,
}

impl AssociationState {
    pub fn serving(&self, vehicle_id: &str) -> Option<usize> {
        self.serving.get(vehicle_id).copied()
    }

    pub fn set(&mut self, vehicle_id: &str, rsu_id: usize) {
        self.serving.insert(vehicle_id.to_string(), rsu_id);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &usize)> {
        self.serving.iter()
    }
}

#[derive(Debug, Error)]
pub enum MobilityError {
    #[error("degenerate geometry: zero 3-D distance between vehicle and RSU {0}")]
    ZeroDistance(usize),
    #[error("no candidate RSUs")]
    NoCandidates,
}

/// Equirectangular projection around `(lat0, lon0)`:
/// `x = R (lon-lon0) cos(lat0) pi/180`, `y = R (lat-lat0) pi/180`.
pub fn project_to_local(lat: f64, lon: f64, ref_point: (f64, f64)) -> (f64, f64) {
    let (lat0, lon0) = ref_point;
    let deg = std::f64::consts::PI / 180.0;
    let x = EARTH_RADIUS_M * (lon - lon0) * deg * (lat0 * deg).cos();
    let y = EARTH_RADIUS_M * (lat - lat0) * deg;
    (x, y)
}

/// Place sites every `spacing` meters from x = 0 up to `corridor_length`,
/// at perpendicular offset `offset`, cycling `bands` frequency bands.
pub fn deploy_rsus(
    corridor_length: f64,
    spacing: f64,
    offset: f64,
    bands: usize,
    n_antennas: usize,
    antenna_height_m: f64,
    coverage_radius_m: f64,
) -> Vec<RsuSite> {
    assert!(spacing > 0.0, "spacing must be positive");
    if corridor_length < 0.0 {
        return Vec::new();
    }
    let count = (corridor_length / spacing).floor() as usize + 1;
    (0..count)
        .map(|i| RsuSite {
            rsu_id: i,
            x: i as f64 * spacing,
            y: offset,
            n_antennas,
            antenna_height_m,
            band_index: i % bands.max(1),
            coverage_radius_m,
        })
        .collect()
}

/// 3-D distance between a vehicle at ground position `(x, y)` and a site,
/// accounting for both antenna heights.
pub fn distance_3d(vehicle_pos: (f64, f64), site: &RsuSite, vehicle_height_m: f64) -> f64 {
    let dx = vehicle_pos.0 - site.x;
    let dy = vehicle_pos.1 - site.y;
    let dz = site.antenna_height_m - vehicle_height_m;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

pub fn distance_2d(vehicle_pos: (f64, f64), site: &RsuSite) -> f64 {
    let dx = vehicle_pos.0 - site.x;
    let dy = vehicle_pos.1 - site.y;
    (dx * dx + dy * dy).sqrt()
}

/// Large-scale received power in dBm: per-pRB transmit power plus antenna
/// gains minus pathloss minus `shadow_loss_db`. Fast fading is excluded,
/// matching measurement averaging.
pub fn rsrp(
    vehicle_pos: (f64, f64),
    site: &RsuSite,
    params: &ChannelParams,
    shadow_loss_db: f64,
) -> Result<f64, MobilityError> {
    let d3d = distance_3d(vehicle_pos, site, params.antenna_height_vehicle_m);
    if d3d <= 0.0 {
        return Err(MobilityError::ZeroDistance(site.rsu_id));
    }
    let pl = pathloss_uma(
        d3d,
        params.carrier_ghz,
        params.antenna_height_rsu_m,
        params.antenna_height_vehicle_m,
    );
    Ok(params.tx_power_rsu_dbm + params.antenna_gain_rsu_dbi + params.antenna_gain_vehicle_dbi
        - pl
        - shadow_loss_db)
}

/// A3-style association decision. Without a current server the strongest
/// candidate wins (ties to the lowest id); with one, handover happens only
/// when a neighbour beats the server by more than `hysteresis_db`.
pub fn associate(
    candidates: &[(usize, f64)],
    current: Option<usize>,
    hysteresis_db: f64,
) -> Result<usize, MobilityError> {
    if candidates.is_empty() {
        return Err(MobilityError::NoCandidates);
    }
    let best = candidates
        .iter()
        .fold(None::<(usize, f64)>, |acc, &(id, p)| match acc {
            None => Some((id, p)),
            Some((bid, bp)) => {
                if p > bp || (p == bp && id < bid) {
                    Some((id, p))
                } else {
                    Some((bid, bp))
                }
            }
        })
        .expect("nonempty");

    match current.and_then(|c| candidates.iter().find(|(id, _)| *id == c)) {
        None => Ok(best.0),
        Some(&(cur_id, cur_p)) => {
            if best.0 != cur_id && best.1 > cur_p + hysteresis_db {
                Ok(best.0)
            } else {
                Ok(cur_id)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn site(id: usize, x: f64) -> RsuSite {
        RsuSite {
            rsu_id: id,
            x,
            y: 15.0,
            n_antennas: 4,
            antenna_height_m: 25.0,
            band_index: 0,
            coverage_radius_m: 500.0,
        }
    }

    #[test]
    fn projection_of_reference_is_origin() {
        assert_eq!(project_to_local(37.0, -122.0, (37.0, -122.0)), (0.0, 0.0));
    }

    #[test]
    fn projection_one_degree_longitude_at_equator() {
        let (x, _) = project_to_local(0.0, 1.0, (0.0, 0.0));
        let expected = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        assert_relative_eq!(x, expected, max_relative = 1e-12);
        assert!((x - 111_194.9).abs() < 0.1);
    }

    #[test]
    fn projection_is_antisymmetric() {
        let a = project_to_local(37.1, -122.2, (37.0, -122.0));
        let b = project_to_local(36.9, -121.8, (37.0, -122.0));
        assert_relative_eq!(a.0, -b.0, epsilon = 1e-9);
        assert_relative_eq!(a.1, -b.1, epsilon = 1e-9);
    }

    #[test]
    fn deploy_counts_and_reuse_distance() {
        let sites = deploy_rsus(5000.0, 1000.0, 15.0, 2, 4, 25.0, 500.0);
        assert_eq!(sites.len(), 6);
        assert_eq!(sites[0].x, 0.0);
        assert_eq!(sites[5].x, 5000.0);
        // Same-band neighbours sit 2000 m apart for 1000 m spacing.
        let band0: Vec<f64> = sites
            .iter()
            .filter(|s| s.band_index == 0)
            .map(|s| s.x)
            .collect();
        for pair in band0.windows(2) {
            assert_eq!(pair[1] - pair[0], 2000.0);
        }
    }

    #[test]
    fn deploy_boundary_single_site() {
        let sites = deploy_rsus(999.0, 1000.0, 15.0, 2, 4, 25.0, 500.0);
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].x, 0.0);
    }

    #[test]
    fn deploy_negative_corridor_is_empty() {
        assert!(deploy_rsus(-1.0, 1000.0, 15.0, 2, 4, 25.0, 500.0).is_empty());
    }

    #[test]
    fn rsrp_matches_db_arithmetic() {
        // 30 dBm + 3 + 8 dBi - PL(100 m) with zero shadowing.
        let params = ChannelParams::default();
        let s = RsuSite {
            y: 0.0,
            antenna_height_m: params.antenna_height_vehicle_m, // flat geometry: d3d = 100
            ..site(0, 100.0)
        };
        let got = rsrp((0.0, 0.0), &s, &params, 0.0).unwrap();
        let pl = 28.0 + 22.0 * 100.0f64.log10() + 20.0 * 2.4f64.log10();
        assert_relative_eq!(got, 41.0 - pl, epsilon = 1e-12);
        assert!((got - (-38.60)).abs() < 5e-3);
    }

    #[test]
    fn rsrp_decreases_with_distance_and_shadow() {
        let params = ChannelParams::default();
        let near = rsrp((100.0, 0.0), &site(0, 0.0), &params, 0.0).unwrap();
        let far = rsrp((200.0, 0.0), &site(0, 0.0), &params, 0.0).unwrap();
        assert!(far < near);
        let shadowed = rsrp((100.0, 0.0), &site(0, 0.0), &params, 4.0).unwrap();
        assert_relative_eq!(shadowed, near - 4.0, epsilon = 1e-12);
    }

    #[test]
    fn rsrp_zero_distance_errors() {
        let params = ChannelParams::default();
        let s = RsuSite {
            y: 0.0,
            antenna_height_m: params.antenna_height_vehicle_m,
            ..site(0, 0.0)
        };
        assert!(rsrp((0.0, 0.0), &s, &params, 0.0).is_err());
    }

    #[test]
    fn a3_hysteresis_rules() {
        // Neighbour at serving + 2.9 dB with 3 dB hysteresis: stay.
        let stay = associate(&[(0, -50.0), (1, -47.1)], Some(0), 3.0).unwrap();
        assert_eq!(stay, 0);
        // Neighbour at serving + 3.1 dB: handover.
        let go = associate(&[(0, -50.0), (1, -46.9)], Some(0), 3.0).unwrap();
        assert_eq!(go, 1);
    }

    #[test]
    fn initial_attach_is_argmax() {
        assert_eq!(associate(&[(0, -50.0), (1, -40.0)], None, 3.0).unwrap(), 1);
    }

    #[test]
    fn unknown_current_treated_as_initial_attach() {
        assert_eq!(
            associate(&[(0, -50.0), (1, -40.0)], Some(7), 3.0).unwrap(),
            1
        );
    }

    #[test]
    fn zero_hysteresis_degenerates_to_argmax() {
        let cands = [(2, -41.0), (0, -40.0), (1, -40.0)];
        for current in [None, Some(2), Some(0)] {
            let pick = associate(&cands, current, 0.0).unwrap();
            // Argmax with ties to the lowest id; equal-power server keeps
            // its cell only when it is itself an argmax.
            if current == Some(0) {
                assert_eq!(pick, 0);
            } else {
                assert_eq!(pick, 0);
            }
        }
    }
}
