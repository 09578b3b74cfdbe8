//! GPS trace ingestion, synthetic trace generation, vehicle-specific-power
//! labelling, and causal lag/horizon window construction.

use std::io::Read;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{self, tag};

/// One GPS log sample: `{unixtime, latitude, longitude, speed}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// Seconds since epoch.
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    /// Ground speed, m/s.
    pub speed: f64,
}

/// All samples of one vehicle, sorted by time.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleTrace {
    pub vehicle_id: String,
    pub points: Vec<TracePoint>,
    /// Nominal sensing interval, seconds.
    pub dt: f64,
}

/// Uniformly resampled kinematics with derived acceleration and VSP labels.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicSeries {
    pub t: Vec<f64>,
    /// Velocity, m/s.
    pub u: Vec<f64>,
    /// Acceleration, m/s^2.
    pub a: Vec<f64>,
    /// Vehicle-specific power, kW/tonne.
    pub vsp: Vec<f64>,
    pub dt: f64,
}

/// Road-load coefficients and unit-conversion constants of the VSP formula.
///
/// Defaults are the light-duty road-load values of the MOVES physics model
/// with SI inputs and kW/tonne output, so both conversion constants are 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VspCoefficients {
    /// Rolling term, kW·s/m.
    pub a_roll: f64,
    /// Rotating term, kW·s^2/m^2.
    pub b_rot: f64,
    /// Drag term, kW·s^3/m^3.
    pub c_drag: f64,
    /// Velocity unit conversion.
    pub c1: f64,
    /// Power unit conversion.
    pub c2: f64,
    /// Vehicle mass, tonnes.
    pub mass: f64,
}

impl Default for VspCoefficients {
    fn default() -> Self {
        VspCoefficients {
            a_roll: 0.156461,
            b_rot: 0.00200193,
            c_drag: 0.000492646,
            c1: 1.0,
            c2: 1.0,
            mass: 1.4788,
        }
    }
}

/// Supervised samples: `x` holds the last `lag` VSP values, `y` the VSP
/// value `horizon` steps after the window end.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub lag: usize,
    pub horizon: usize,
    pub samples: Vec<WindowSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub x: Vec<f64>,
    pub y: f64,
    /// Timestamp of the label `y`.
    pub t_label: f64,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("row {row}: {msg}")]
    MalformedRow { row: u64, msg: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace `{0}` is empty")]
    EmptyTrace(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

const TRACE_HEADER: [&str; 5] = ["vehicle_id", "unixtime", "lat", "lon", "speed_mps"];

/// Parse trace CSV rows (`vehicle_id,unixtime,lat,lon,speed_mps`) into
/// per-vehicle traces sorted by time. Exact-duplicate timestamps keep the
/// first occurrence. Empty input yields an empty vector.
pub fn parse_trace_csv<R: Read>(raw: R) -> Result<Vec<VehicleTrace>, TraceError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(raw);

    // Keyed by first-seen order so output order follows the file.
    let mut order: Vec<String> = Vec::new();
    let mut by_vehicle: std::collections::BTreeMap<String, Vec<TracePoint>> =
        std::collections::BTreeMap::new();

    for record in reader.records() {
        let record = record?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() < 5 {
            return Err(TraceError::MalformedRow {
                row,
                msg: format!("expected 5 columns, found {}", record.len()),
            });
        }
        let id = record[0].to_string();
        let parse_field = |idx: usize, name: &str| -> Result<f64, TraceError> {
            record[idx].parse::<f64>().map_err(|_| TraceError::MalformedRow {
                row,
                msg: format!("non-numeric {name} `{}`", &record[idx]),
            })
        };
        let point = TracePoint {
            t: parse_field(1, "unixtime")?,
            lat: parse_field(2, "lat")?,
            lon: parse_field(3, "lon")?,
            speed: parse_field(4, "speed_mps")?,
        };
        if !point.t.is_finite() {
            return Err(TraceError::MalformedRow {
                row,
                msg: "non-finite unixtime".into(),
            });
        }
        if !by_vehicle.contains_key(&id) {
            order.push(id.clone());
        }
        by_vehicle.entry(id).or_default().push(point);
    }

    let mut traces = Vec::with_capacity(order.len());
    for id in order {
        let mut points = by_vehicle.remove(&id).unwrap_or_default();
        points.sort_by(|a, b| a.t.total_cmp(&b.t));
        points.dedup_by(|a, b| a.t == b.t);
        let dt = nominal_dt(&points);
        traces.push(VehicleTrace {
            vehicle_id: id,
            points,
            dt,
        });
    }
    Ok(traces)
}

/// Median inter-sample spacing; 1.0 for traces too short to tell.
fn nominal_dt(points: &[TracePoint]) -> f64 {
    if points.len() < 2 {
        return 1.0;
    }
    let mut gaps: Vec<f64> = points.windows(2).map(|w| w[1].t - w[0].t).collect();
    gaps.sort_by(f64::total_cmp);
    gaps[gaps.len() / 2]
}

/// Serialize traces back to the ingestion CSV format.
pub fn write_traces_csv<W: std::io::Write>(
    out: &mut W,
    traces: &[VehicleTrace],
) -> std::io::Result<()> {
    writeln!(out, "{}", TRACE_HEADER.join(","))?;
    for trace in traces {
        for p in &trace.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                trace.vehicle_id, p.t, p.lat, p.lon, p.speed
            )?;
        }
    }
    Ok(())
}

/// Eq.-style VSP for zero road grade:
/// `(c1/c2)(A u / m) + (c1^2/c2)(B u^2 / m) + (c1^3/c2)(C u^3 / m) + c1^2 u a`.
pub fn compute_vsp(u: f64, a: f64, coeffs: &VspCoefficients) -> f64 {
    let VspCoefficients {
        a_roll,
        b_rot,
        c_drag,
        c1,
        c2,
        mass,
    } = *coeffs;
    (c1 / c2) * (a_roll * u / mass)
        + (c1 * c1 / c2) * (b_rot * u * u / mass)
        + (c1 * c1 * c1 / c2) * (c_drag * u * u * u / mass)
        + c1 * c1 * u * a
}

/// Resample a raw trace onto a uniform `dt` grid (linear interpolation of
/// speed), split segments wherever the raw spacing exceeds `gap_limit`,
/// and derive acceleration (central difference, one-sided at the ends) and
/// VSP per grid point. Traces with fewer than two points yield nothing.
pub fn preprocess_trace(
    trace: &VehicleTrace,
    dt: f64,
    gap_limit: f64,
    coeffs: &VspCoefficients,
) -> Result<Vec<KinematicSeries>, TraceError> {
    if dt <= 0.0 {
        return Err(TraceError::InvalidParameter("dt must be positive".into()));
    }
    if trace.points.len() < 2 {
        return Ok(Vec::new());
    }

    let mut segments: Vec<&[TracePoint]> = Vec::new();
    let mut start = 0;
    for i in 1..trace.points.len() {
        if trace.points[i].t - trace.points[i - 1].t > gap_limit {
            segments.push(&trace.points[start..i]);
            start = i;
        }
    }
    segments.push(&trace.points[start..]);

    let mut out = Vec::new();
    for seg in segments {
        if seg.len() < 2 {
            continue;
        }
        let t0 = seg[0].t;
        let t1 = seg[seg.len() - 1].t;
        let n = ((t1 - t0) / dt).floor() as usize + 1;
        if n < 2 {
            continue;
        }
        let mut t = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        let mut cursor = 0usize;
        for i in 0..n {
            let ti = t0 + i as f64 * dt;
            while cursor + 1 < seg.len() && seg[cursor + 1].t < ti {
                cursor += 1;
            }
            let lo = &seg[cursor];
            let hi = &seg[(cursor + 1).min(seg.len() - 1)];
            let speed = if hi.t > lo.t {
                let f = ((ti - lo.t) / (hi.t - lo.t)).clamp(0.0, 1.0);
                lo.speed + f * (hi.speed - lo.speed)
            } else {
                lo.speed
            };
            t.push(ti);
            u.push(speed);
        }
        let a = central_difference(&u, dt);
        let vsp = u
            .iter()
            .zip(&a)
            .map(|(&ui, &ai)| compute_vsp(ui, ai, coeffs))
            .collect();
        out.push(KinematicSeries { t, u, a, vsp, dt });
    }
    Ok(out)
}

fn central_difference(u: &[f64], dt: f64) -> Vec<f64> {
    let n = u.len();
    let mut a = vec![0.0; n];
    if n < 2 {
        return a;
    }
    a[0] = (u[1] - u[0]) / dt;
    a[n - 1] = (u[n - 1] - u[n - 2]) / dt;
    for i in 1..n - 1 {
        a[i] = (u[i + 1] - u[i - 1]) / (2.0 * dt);
    }
    a
}

/// Build causal supervised windows: sample `i` pairs `x = vsp[i-l+1..=i]`
/// with `y = vsp[i+h]`, keeping only labels stamped at or before `cutoff`.
pub fn build_windows(
    series: &KinematicSeries,
    lag: usize,
    horizon: usize,
    cutoff: f64,
) -> WindowedDataset {
    assert!(lag >= 1 && horizon >= 1, "lag and horizon must be >= 1");
    let n = series.vsp.len();
    let mut samples = Vec::new();
    if n >= lag + horizon {
        for i in (lag - 1)..(n - horizon) {
            let t_label = series.t[i + horizon];
            if t_label > cutoff {
                continue;
            }
            samples.push(WindowSample {
                x: series.vsp[i + 1 - lag..=i].to_vec(),
                y: series.vsp[i + horizon],
                t_label,
            });
        }
    }
    WindowedDataset {
        lag,
        horizon,
        samples,
    }
}

/// Mean/standard-deviation pair for per-agent z-scoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormStats {
    pub mean: f64,
    pub std: f64,
}

impl NormStats {
    /// Statistics of the values observed up to `cutoff`.
    pub fn from_series(series: &KinematicSeries, cutoff: f64) -> NormStats {
        let values: Vec<f64> = series
            .t
            .iter()
            .zip(&series.vsp)
            .filter(|(t, _)| **t <= cutoff)
            .map(|(_, v)| *v)
            .collect();
        if values.is_empty() {
            return NormStats { mean: 0.0, std: 1.0 };
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / values.len() as f64;
        let std = var.sqrt();
        NormStats {
            mean,
            std: if std > 1e-9 { std } else { 1.0 },
        }
    }

    pub fn normalize(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    pub fn denormalize(&self, v: f64) -> f64 {
        v * self.std + self.mean
    }
}

/// Shape of the synthetic corridor fleet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_vehicles: usize,
    pub duration_s: f64,
    pub dt_s: f64,
    /// Corridor length; vehicles reflect at the ends so they stay on it.
    pub corridor_length_m: f64,
    /// Initial gap between consecutive vehicles.
    pub start_spacing_m: f64,
    /// Reference geodetic origin of the corridor's west end.
    pub ref_lat_deg: f64,
    pub ref_lon_deg: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_vehicles: 61,
            duration_s: 3600.0,
            dt_s: 3.0,
            corridor_length_m: 20_000.0,
            start_spacing_m: 200.0,
            ref_lat_deg: 37.48,
            ref_lon_deg: -122.16,
        }
    }
}

/// Mean-reverting speed process parameters (fixed by contract).
const OU_MEAN_MPS: f64 = 25.0;
const OU_RATE_PER_S: f64 = 0.05;
const OU_VOL: f64 = 1.5;

/// Generate a deterministic synthetic fleet: per-vehicle mean-reverting
/// speed (mean 25 m/s, rate 0.05 /s, volatility 1.5 m/s·sqrt(s), clipped
/// at zero), integrated along a straight corridor with reflection at both
/// ends, back-projected to latitude/longitude.
pub fn gen_synthetic_traces(
    n_vehicles: usize,
    duration: f64,
    dt: f64,
    seed: u64,
) -> Vec<VehicleTrace> {
    let spec = SyntheticSpec {
        n_vehicles,
        duration_s: duration,
        dt_s: dt,
        ..SyntheticSpec::default()
    };
    gen_synthetic_traces_spec(&spec, seed)
}

pub fn gen_synthetic_traces_spec(spec: &SyntheticSpec, seed: u64) -> Vec<VehicleTrace> {
    let n_steps = (spec.duration_s / spec.dt_s).floor() as usize + 1;
    let earth = crate::mobility::EARTH_RADIUS_M;
    let lat0 = spec.ref_lat_deg;
    let meters_per_deg_lon = earth * (std::f64::consts::PI / 180.0) * lat0.to_radians().cos();

    (0..spec.n_vehicles)
        .map(|v| {
            let mut rng = rng::stream(seed, &[tag::TRACE, v as u64]);
            let mut speed = OU_MEAN_MPS;
            let mut x = (v as f64 * spec.start_spacing_m) % spec.corridor_length_m.max(1.0);
            let mut direction = 1.0f64;
            let mut points = Vec::with_capacity(n_steps);
            for step in 0..n_steps {
                let t = step as f64 * spec.dt_s;
                let lon = spec.ref_lon_deg + x / meters_per_deg_lon;
                points.push(TracePoint {
                    t,
                    lat: lat0,
                    lon,
                    speed,
                });
                // Euler-Maruyama step of the mean-reverting process.
                let z: f64 = rng.sample(StandardNormal);
                speed += OU_RATE_PER_S * (OU_MEAN_MPS - speed) * spec.dt_s
                    + OU_VOL * spec.dt_s.sqrt() * z;
                speed = speed.max(0.0);
                x += direction * speed * spec.dt_s;
                if x > spec.corridor_length_m {
                    x = 2.0 * spec.corridor_length_m - x;
                    direction = -direction;
                }
                if x < 0.0 {
                    x = -x;
                    direction = -direction;
                }
            }
            VehicleTrace {
                vehicle_id: format!("veh{v:03}"),
                points,
                dt: spec.dt_s,
            }
        })
        .collect()
}

/// Linearly interpolated position (lat, lon) and speed at time `t`, or
/// `None` outside the recorded span. Interpolation is skipped across
/// implausible jumps (reflection corners), snapping to the nearer sample.
pub fn sample_trace_at(trace: &VehicleTrace, t: f64) -> Option<(f64, f64, f64)> {
    let points = &trace.points;
    if points.is_empty() || t < points[0].t || t > points[points.len() - 1].t {
        return None;
    }
    let idx = points.partition_point(|p| p.t <= t);
    if idx == 0 {
        let p = &points[0];
        return Some((p.lat, p.lon, p.speed));
    }
    if idx >= points.len() {
        let p = &points[points.len() - 1];
        return Some((p.lat, p.lon, p.speed));
    }
    let lo = &points[idx - 1];
    let hi = &points[idx];
    let span = hi.t - lo.t;
    if span <= 0.0 {
        return Some((lo.lat, lo.lon, lo.speed));
    }
    let f = (t - lo.t) / span;
    // A displacement far beyond what the faster endpoint speed allows marks
    // a reflection corner or data glitch; snap instead of sweeping across.
    let max_speed = lo.speed.max(hi.speed).max(1.0);
    let dist_deg = ((hi.lat - lo.lat).powi(2) + (hi.lon - lo.lon).powi(2)).sqrt();
    let approx_m = dist_deg * 111_000.0;
    if approx_m > 4.0 * max_speed * span {
        let p = if f < 0.5 { lo } else { hi };
        return Some((p.lat, p.lon, p.speed));
    }
    Some((
        lo.lat + f * (hi.lat - lo.lat),
        lo.lon + f * (hi.lon - lo.lon),
        lo.speed + f * (hi.speed - lo.speed),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn series(vsp: &[f64], dt: f64) -> KinematicSeries {
        KinematicSeries {
            t: (0..vsp.len()).map(|i| i as f64 * dt).collect(),
            u: vec![0.0; vsp.len()],
            a: vec![0.0; vsp.len()],
            vsp: vsp.to_vec(),
            dt,
        }
    }

    #[test]
    fn parse_roundtrip_single_row() {
        let csv = "vehicle_id,unixtime,lat,lon,speed_mps\nveh1,100.5,37.0,-122.0,12.25\n";
        let traces = parse_trace_csv(csv.as_bytes()).unwrap();
        assert_eq!(traces.len(), 1);
        assert_eq!(traces[0].vehicle_id, "veh1");
        assert_eq!(
            traces[0].points,
            vec![TracePoint {
                t: 100.5,
                lat: 37.0,
                lon: -122.0,
                speed: 12.25
            }]
        );
    }

    #[test]
    fn parse_sorts_shuffled_timestamps() {
        let csv = "vehicle_id,unixtime,lat,lon,speed_mps\n\
                   v,9,0,0,1\nv,3,0,0,2\nv,6,0,0,3\n";
        let traces = parse_trace_csv(csv.as_bytes()).unwrap();
        let ts: Vec<f64> = traces[0].points.iter().map(|p| p.t).collect();
        assert_eq!(ts, vec![3.0, 6.0, 9.0]);
    }

    #[test]
    fn parse_reports_row_of_malformed_input() {
        let csv = "vehicle_id,unixtime,lat,lon,speed_mps\na,b,c,d,e\n";
        let err = parse_trace_csv(csv.as_bytes()).unwrap_err();
        match err {
            TraceError::MalformedRow { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_empty_input_is_empty() {
        let traces = parse_trace_csv("vehicle_id,unixtime,lat,lon,speed_mps\n".as_bytes()).unwrap();
        assert!(traces.is_empty());
    }

    #[test]
    fn parse_drops_duplicate_timestamps() {
        let csv = "vehicle_id,unixtime,lat,lon,speed_mps\nv,3,0,0,1\nv,3,0,0,9\nv,6,0,0,2\n";
        let traces = parse_trace_csv(csv.as_bytes()).unwrap();
        assert_eq!(traces[0].points.len(), 2);
        assert_eq!(traces[0].points[0].speed, 1.0);
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let traces = gen_synthetic_traces(3, 60.0, 3.0, 11);
        let mut buf = Vec::new();
        write_traces_csv(&mut buf, &traces).unwrap();
        let back = parse_trace_csv(buf.as_slice()).unwrap();
        assert_eq!(traces.len(), back.len());
        for (a, b) in traces.iter().zip(&back) {
            assert_eq!(a.vehicle_id, b.vehicle_id);
            assert_eq!(a.points, b.points);
        }
    }

    #[test]
    fn vsp_zero_speed_zero_accel_is_zero() {
        assert_eq!(compute_vsp(0.0, 0.0, &VspCoefficients::default()), 0.0);
    }

    #[test]
    fn vsp_zero_roadload_zero_accel_is_zero() {
        let coeffs = VspCoefficients {
            a_roll: 0.0,
            b_rot: 0.0,
            c_drag: 0.0,
            ..VspCoefficients::default()
        };
        assert_eq!(compute_vsp(17.3, 0.0, &coeffs), 0.0);
    }

    #[test]
    fn vsp_matches_direct_hand_evaluation() {
        // Independent evaluation of the published formula, term by term.
        let c = VspCoefficients::default();
        let (u, a) = (10.0, 0.5);
        let term1 = (c.c1 / c.c2) * c.a_roll * u / c.mass;
        let term2 = (c.c1.powi(2) / c.c2) * c.b_rot * u.powi(2) / c.mass;
        let term3 = (c.c1.powi(3) / c.c2) * c.c_drag * u.powi(3) / c.mass;
        let term4 = c.c1.powi(2) * u * a;
        let expected = term1 + term2 + term3 + term4;
        assert_relative_eq!(compute_vsp(u, a, &c), expected, max_relative = 1e-14);
    }

    #[test]
    fn vsp_is_linear_in_acceleration() {
        let c = VspCoefficients::default();
        for u in [0.0, 3.0, 27.5] {
            let lhs = compute_vsp(u, 1.7 + 0.9, &c) - compute_vsp(u, 0.9, &c);
            let rhs = compute_vsp(u, 1.7, &c) - compute_vsp(u, 0.0, &c);
            assert_relative_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }

    #[test]
    fn preprocess_constant_speed_has_zero_accel() {
        let trace = VehicleTrace {
            vehicle_id: "v".into(),
            points: (0..20)
                .map(|i| TracePoint {
                    t: i as f64 * 3.0,
                    lat: 0.0,
                    lon: 0.0,
                    speed: 10.0,
                })
                .collect(),
            dt: 3.0,
        };
        let segs = preprocess_trace(&trace, 3.0, 30.0, &VspCoefficients::default()).unwrap();
        assert_eq!(segs.len(), 1);
        assert!(segs[0].u.iter().all(|&u| u == 10.0));
        assert!(segs[0].a.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn preprocess_splits_on_large_gap() {
        let mut points: Vec<TracePoint> = (0..5)
            .map(|i| TracePoint {
                t: i as f64 * 3.0,
                lat: 0.0,
                lon: 0.0,
                speed: 5.0,
            })
            .collect();
        points.extend((0..5).map(|i| TracePoint {
            t: 72.0 + i as f64 * 3.0,
            lat: 0.0,
            lon: 0.0,
            speed: 5.0,
        }));
        let trace = VehicleTrace {
            vehicle_id: "v".into(),
            points,
            dt: 3.0,
        };
        let segs = preprocess_trace(&trace, 3.0, 30.0, &VspCoefficients::default()).unwrap();
        assert_eq!(segs.len(), 2);
    }

    #[test]
    fn preprocess_short_trace_is_empty() {
        let trace = VehicleTrace {
            vehicle_id: "v".into(),
            points: vec![TracePoint {
                t: 0.0,
                lat: 0.0,
                lon: 0.0,
                speed: 1.0,
            }],
            dt: 3.0,
        };
        let segs = preprocess_trace(&trace, 3.0, 30.0, &VspCoefficients::default()).unwrap();
        assert!(segs.is_empty());
    }

    #[test]
    fn finite_differences_match_hand_values() {
        // Speeds (0, 6, 0) at 3 s spacing: central a = 0, endpoints ±2.
        let trace = VehicleTrace {
            vehicle_id: "v".into(),
            points: [0.0, 6.0, 0.0]
                .iter()
                .enumerate()
                .map(|(i, &s)| TracePoint {
                    t: i as f64 * 3.0,
                    lat: 0.0,
                    lon: 0.0,
                    speed: s,
                })
                .collect(),
            dt: 3.0,
        };
        let segs = preprocess_trace(&trace, 3.0, 30.0, &VspCoefficients::default()).unwrap();
        assert_eq!(segs[0].a, vec![2.0, 0.0, -2.0]);
    }

    #[test]
    fn windows_count_and_first_sample() {
        let s = series(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 1.0);
        let ds = build_windows(&s, 2, 1, f64::INFINITY);
        assert_eq!(ds.samples.len(), 4);
        assert_eq!(ds.samples[0].x, vec![1.0, 2.0]);
        assert_eq!(ds.samples[0].y, 3.0);
    }

    #[test]
    fn windows_counting_examples() {
        let s = series(&[0.0; 10], 1.0);
        assert_eq!(build_windows(&s, 3, 2, f64::INFINITY).samples.len(), 6);
        let boundary = series(&[0.0; 4], 1.0);
        assert_eq!(build_windows(&boundary, 3, 2, f64::INFINITY).samples.len(), 0);
    }

    #[test]
    fn windows_count_formula_exhaustive() {
        for n in 0..=50usize {
            let s = series(&vec![0.5; n], 1.0);
            for lag in 1..=8usize {
                for horizon in 1..=8usize {
                    let expect = (n as i64 - lag as i64 - horizon as i64 + 1).max(0) as usize;
                    assert_eq!(
                        build_windows(&s, lag, horizon, f64::INFINITY).samples.len(),
                        expect,
                        "n={n} l={lag} h={horizon}"
                    );
                }
            }
        }
    }

    #[test]
    fn windows_respect_cutoff() {
        let s = series(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 1.0);
        let ds = build_windows(&s, 2, 1, 3.0);
        assert!(ds.samples.iter().all(|w| w.t_label <= 3.0));
        assert_eq!(ds.samples.len(), 2);
    }

    #[test]
    fn synthetic_is_deterministic_and_nonnegative() {
        let a = gen_synthetic_traces(4, 300.0, 3.0, 42);
        let b = gen_synthetic_traces(4, 300.0, 3.0, 42);
        assert_eq!(a, b);
        assert!(a
            .iter()
            .flat_map(|t| &t.points)
            .all(|p| p.speed >= 0.0));
    }

    #[test]
    fn synthetic_long_run_mean_near_process_mean() {
        let traces = gen_synthetic_traces(4, 7200.0, 3.0, 9);
        for t in traces {
            let mean =
                t.points.iter().map(|p| p.speed).sum::<f64>() / t.points.len() as f64;
            assert!((mean - 25.0).abs() < 2.0, "mean {mean}");
        }
    }

    #[test]
    fn resampling_preserves_constant_signals() {
        let trace = VehicleTrace {
            vehicle_id: "v".into(),
            points: (0..30)
                .map(|i| TracePoint {
                    t: i as f64 * 3.1,
                    lat: 0.0,
                    lon: 0.0,
                    speed: 7.25,
                })
                .collect(),
            dt: 3.1,
        };
        let segs = preprocess_trace(&trace, 2.0, 30.0, &VspCoefficients::default()).unwrap();
        assert!(segs[0].u.iter().all(|&u| u == 7.25));
    }

    #[test]
    fn norm_stats_guard_zero_variance() {
        let s = series(&[2.0, 2.0, 2.0], 1.0);
        let stats = NormStats::from_series(&s, f64::INFINITY);
        assert_eq!(stats.std, 1.0);
        assert_eq!(stats.normalize(2.0), 0.0);
    }
}
