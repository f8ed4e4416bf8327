use super::track::{AgentKind, TrackRecord, SPACING_TOLERANCE};
use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Observed steps per stream, inclusive of the current time `t`.
pub const PAST_LEN: usize = 5;
/// Predicted steps, `t + Δt … t + 10Δt`.
pub const FUTURE_LEN: usize = 10;
pub const WINDOW_LEN: usize = PAST_LEN + FUTURE_LEN;
/// Model time step in seconds (5 Hz).
pub const MODEL_DT: f64 = 0.2;
pub const RAW_RATE_HZ: f64 = 10.0;
pub const MODEL_RATE_HZ: f64 = 5.0;
/// Minimum 10 Hz track length for one sample in either phase.
pub const MIN_RAW_FRAMES: usize = 2 * WINDOW_LEN - 1;

/// One supervised example in the pedestrian-centered frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub ped_past: [Point; PAST_LEN],
    pub veh_past: [Point; PAST_LEN],
    /// Absolute world-frame head yaw, radians.
    pub head_past: [f64; PAST_LEN],
    pub ped_future: [Point; FUTURE_LEN],
    /// World position of the pedestrian at `t`, removed from every point.
    pub origin_world: Point,
    pub t: f64,
}

impl TrajectorySample {
    pub fn world_ped_past(&self) -> Vec<Point> {
        from_pedestrian_frame(&self.ped_past, self.origin_world)
    }

    pub fn world_veh_past(&self) -> Vec<Point> {
        from_pedestrian_frame(&self.veh_past, self.origin_world)
    }

    pub fn world_ped_future(&self) -> Vec<Point> {
        from_pedestrian_frame(&self.ped_future, self.origin_world)
    }

    pub fn is_finite(&self) -> bool {
        self.ped_past
            .iter()
            .chain(&self.veh_past)
            .chain(&self.ped_future)
            .flatten()
            .chain(&self.head_past)
            .chain(&self.origin_world)
            .all(|v| v.is_finite())
            && self.t.is_finite()
    }
}

/// Keeps 10 Hz frames `phase, phase + 2, …`, yielding a 5 Hz track.
pub fn resample_to_5hz(track: &TrackRecord, phase: usize) -> Result<TrackRecord> {
    if (track.source_rate - RAW_RATE_HZ).abs() > 1e-9 {
        return Err(Error::Data(format!(
            "{}: resampling needs a {RAW_RATE_HZ} Hz track, got {} Hz",
            track.agent_id, track.source_rate
        )));
    }
    if phase > 1 {
        return Err(Error::InvalidArgument(format!("resampling phase must be 0 or 1, got {phase}")));
    }
    Ok(TrackRecord {
        agent_id: track.agent_id.clone(),
        kind: track.kind,
        frames: track.frames.iter().skip(phase).step_by(2).cloned().collect(),
        source_rate: MODEL_RATE_HZ,
    })
}

/// A window translated into the pedestrian-centered frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredWindow {
    pub ped: Vec<Point>,
    pub veh: Vec<Point>,
    pub origin_world: Point,
}

/// Subtracts the pedestrian's world position at `t_index` from every point of
/// both streams. Axes are not rotated.
pub fn to_pedestrian_frame(ped: &[Point], veh: &[Point], t_index: usize) -> Result<CenteredWindow> {
    let origin = *ped
        .get(t_index)
        .ok_or_else(|| Error::dim("to_pedestrian_frame t_index", format!("< {}", ped.len()), t_index))?;
    let shift = |pts: &[Point]| -> Vec<Point> { pts.iter().map(|p| [p[0] - origin[0], p[1] - origin[1]]).collect() };
    Ok(CenteredWindow {
        ped: shift(ped),
        veh: shift(veh),
        origin_world: origin,
    })
}

pub fn from_pedestrian_frame(points: &[Point], origin_world: Point) -> Vec<Point> {
    points
        .iter()
        .map(|p| [p[0] + origin_world[0], p[1] + origin_world[1]])
        .collect()
}

fn check_aligned(ped: &TrackRecord, veh: &TrackRecord) -> Result<()> {
    if ped.kind != AgentKind::Pedestrian || veh.kind != AgentKind::EgoVehicle {
        return Err(Error::Data(format!(
            "expected (pedestrian, ego_vehicle) tracks, got ({}, {})",
            ped.kind.token(),
            veh.kind.token()
        )));
    }
    let misaligned = || Error::Data(format!("tracks {} and {} are not time-aligned", ped.agent_id, veh.agent_id));
    if ped.len() != veh.len() || (ped.source_rate - veh.source_rate).abs() > 1e-9 {
        return Err(misaligned());
    }
    if ped
        .frames
        .iter()
        .zip(&veh.frames)
        .any(|(a, b)| (a.timestamp - b.timestamp).abs() > SPACING_TOLERANCE)
    {
        return Err(misaligned());
    }
    Ok(())
}

/// Builds the sample for the window whose first frame is `start`, or `None`
/// when a pedestrian frame is occluded or lacks head orientation.
fn window_sample(ped: &TrackRecord, veh: &TrackRecord, idx: impl Fn(usize) -> usize) -> Option<TrajectorySample> {
    let pf: Vec<_> = (0..WINDOW_LEN).map(|k| &ped.frames[idx(k)]).collect();
    if pf.iter().any(|f| f.occluded || f.head_theta.is_none()) {
        return None;
    }
    let ped_pts: Vec<Point> = pf.iter().map(|f| [f.x, f.y]).collect();
    let veh_pts: Vec<Point> = (0..PAST_LEN)
        .map(|k| {
            let f = &veh.frames[idx(k)];
            [f.x, f.y]
        })
        .collect();
    let c = to_pedestrian_frame(&ped_pts, &veh_pts, PAST_LEN - 1).ok()?;
    let mut s = TrajectorySample {
        ped_past: [[0.0; 2]; PAST_LEN],
        veh_past: [[0.0; 2]; PAST_LEN],
        head_past: [0.0; PAST_LEN],
        ped_future: [[0.0; 2]; FUTURE_LEN],
        origin_world: c.origin_world,
        t: pf[PAST_LEN - 1].timestamp,
    };
    s.ped_past.copy_from_slice(&c.ped[..PAST_LEN]);
    s.ped_future.copy_from_slice(&c.ped[PAST_LEN..]);
    s.veh_past.copy_from_slice(&c.veh);
    for (h, f) in s.head_past.iter_mut().zip(&pf) {
        *h = f.head_theta.unwrap_or_default();
    }
    Some(s)
}

/// Slides a 15-frame window (5 past incl. `t`, 10 future) one frame at a time
/// over time-aligned 5 Hz tracks.
pub fn extract_samples(ped: &TrackRecord, veh: &TrackRecord) -> Result<Vec<TrajectorySample>> {
    check_aligned(ped, veh)?;
    if (ped.source_rate - MODEL_RATE_HZ).abs() > 1e-9 {
        return Err(Error::Data(format!(
            "{}: sample extraction needs {MODEL_RATE_HZ} Hz tracks, got {} Hz",
            ped.agent_id, ped.source_rate
        )));
    }
    let n = ped.len();
    if n < WINDOW_LEN {
        return Ok(Vec::new());
    }
    Ok((0..=n - WINDOW_LEN)
        .filter_map(|start| window_sample(ped, veh, |k| start + k))
        .collect())
}

/// Samples of one (track, phase) resampling; the unit of dataset splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGroup {
    pub track_id: String,
    pub phase: u8,
    pub samples: Vec<TrajectorySample>,
}

/// Resamples a 10 Hz pair at both phases and extracts each phase's samples.
pub fn extract_groups(ped: &TrackRecord, veh: &TrackRecord) -> Result<Vec<SampleGroup>> {
    check_aligned(ped, veh)?;
    (0..2)
        .map(|phase| {
            let p = resample_to_5hz(ped, phase)?;
            let v = resample_to_5hz(veh, phase)?;
            Ok(SampleGroup {
                track_id: ped.agent_id.clone(),
                phase: phase as u8,
                samples: extract_samples(&p, &v)?,
            })
        })
        .collect()
}

/// Samples taken directly from a 10 Hz pair: every start frame, stride 2
/// inside the window. Independent of [`resample_to_5hz`].
pub fn extract_samples_10hz(ped: &TrackRecord, veh: &TrackRecord) -> Result<Vec<TrajectorySample>> {
    check_aligned(ped, veh)?;
    let span = 2 * (WINDOW_LEN - 1);
    if ped.len() <= span {
        return Ok(Vec::new());
    }
    Ok((0..ped.len() - span)
        .filter_map(|start| window_sample(ped, veh, |k| start + 2 * k))
        .collect())
}

#[cfg(test)]
pub(crate) use tests::straight_pair;
