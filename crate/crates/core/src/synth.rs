//! Synthetic crossing scenes: a pedestrian walking across a straight road in
//! `+y` and an ego vehicle driving along the lane in `+x`.
//!
//! World layout: near sidewalk `y < 0`, ego lane `0 ≤ y ≤ LANE_WIDTH` with
//! the vehicle on its center line, far sidewalk beyond.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::binio::write_atomic;
use crate::data::{
    format_tracks, AgentKind, Frame, MapOverlay, Point, Surface, TrackRecord, MAP_FILE_NAME, RAW_RATE_HZ,
    TRACK_FILE_EXTENSION,
};
use crate::error::{Error, Result};

pub const LANE_WIDTH: f64 = 3.5;
pub const VEHICLE_LANE_Y: f64 = LANE_WIDTH / 2.0;
pub const DEFAULT_PED_SPEED: f64 = 1.4;
pub const DEFAULT_VEH_SPEED: f64 = 8.0;
pub const DEFAULT_DURATION: f64 = 12.0;
/// A halting pedestrian comes to rest this far before the lane edge.
pub const HALT_MARGIN: f64 = 0.5;
/// The pedestrian starts watching the vehicle this long before onset.
pub const LOOK_LEAD: f64 = 1.0;
/// Speed-up of a pedestrian once the vehicle yields.
pub const YIELD_SPEEDUP: f64 = 1.5;
pub const YIELD_RAMP: f64 = 1.0;
pub const CORPUS_MANIFEST_HEADER: &str = "pedfuse-corpus v1";
pub const CORPUS_MANIFEST_NAME: &str = "manifest.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// The vehicle brakes; the pedestrian speeds up and crosses.
    VehicleYields,
    /// The vehicle keeps its speed; the pedestrian stops short of the lane.
    PedestrianHalts,
    /// Both move at constant velocity, far apart.
    IndependentFar,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [Self::VehicleYields, Self::PedestrianHalts, Self::IndependentFar];

    pub fn token(self) -> &'static str {
        match self {
            Self::VehicleYields => "vehicle_yields",
            Self::PedestrianHalts => "pedestrian_halts",
            Self::IndependentFar => "independent_far",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.token() == s)
    }

    pub fn interacts(self) -> bool {
        self != Self::IndependentFar
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// m; the crossing point is `(ped_start.x, 0)`.
    pub ped_start: Point,
    /// m/s, walking speed before any reaction.
    pub ped_speed: f64,
    /// m; the vehicle drives along `y = veh_start.y`.
    pub veh_start: Point,
    /// m/s
    pub veh_speed: f64,
    /// s; the interaction starts when the vehicle's time to arrival at the
    /// crossing point drops below this.
    pub onset_tta: f64,
    /// m/s², vehicle braking when it yields.
    pub decel: f64,
    /// s between onset and the pedestrian's change of speed.
    pub reaction_delay: f64,
    /// m, standard deviation of additive position noise.
    pub noise_sigma: f64,
    /// s, track duration at 10 Hz.
    pub duration: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Randomized scene of `kind` around the default speeds, drawn from `seed`.
    pub fn sample(kind: ScenarioKind, seed: u64, noise_sigma: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ped_speed = DEFAULT_PED_SPEED * rng.random_range(0.75..1.15);
        let veh_speed = DEFAULT_VEH_SPEED * rng.random_range(0.8..1.2);
        let onset_tta = rng.random_range(2.5..4.0);
        let reaction_delay = rng.random_range(0.6..1.2);
        let onset = rng.random_range(3.0..5.0);
        let decel = rng.random_range(1.5..3.0);
        let react_y = rng.random_range(-3.5..-2.5);
        let crossing_x = rng.random_range(-2.0..2.0);
        let far = rng.random_range(150.0..200.0);

        let ped_start = [crossing_x, react_y - ped_speed * (onset + reaction_delay)];
        let veh_x = match kind {
            ScenarioKind::IndependentFar => crossing_x - far,
            _ => crossing_x - veh_speed * (onset + onset_tta),
        };
        ScenarioSpec {
            kind,
            ped_start,
            ped_speed,
            veh_start: [veh_x, VEHICLE_LANE_Y],
            veh_speed,
            onset_tta,
            decel,
            reaction_delay,
            noise_sigma,
            duration: DEFAULT_DURATION,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.ped_start[0],
            self.ped_start[1],
            self.ped_speed,
            self.veh_start[0],
            self.veh_start[1],
            self.veh_speed,
            self.onset_tta,
            self.decel,
            self.reaction_delay,
            self.noise_sigma,
            self.duration,
        ]
        .iter()
        .all(|v| v.is_finite());
        let bad = |m: &str| Err(Error::InvalidArgument(format!("scenario {}: {m}", self.kind)));
        if !finite {
            return bad("every field must be finite");
        }
        if self.ped_speed < 0.0 || self.veh_speed < 0.0 {
            return bad("speeds must be nonnegative");
        }
        if self.noise_sigma < 0.0 {
            return bad("noise sigma must be nonnegative");
        }
        if self.duration < 0.1 {
            return bad("duration must be at least one frame spacing");
        }
        if self.reaction_delay < 0.0 {
            return bad("reaction delay must be nonnegative");
        }
        if self.ped_start[1] >= 0.0 {
            return bad("pedestrian must start on the near sidewalk (y < 0)");
        }
        if self.kind.interacts() {
            if self.onset_tta <= 0.0 {
                return bad("onset time-to-arrival must be positive");
            }
            if self.kind == ScenarioKind::VehicleYields && self.decel <= 0.0 {
                return bad("yielding deceleration must be positive");
            }
            let Some(t_on) = self.onset_time() else {
                return bad("vehicle never reaches the onset threshold");
            };
            if t_on >= self.duration {
                return bad("onset falls after the end of the track");
            }
            if self.kind == ScenarioKind::PedestrianHalts {
                let y_react = self.ped_start[1] + self.ped_speed * (t_on + self.reaction_delay);
                if y_react >= -HALT_MARGIN {
                    return bad("pedestrian reaches the lane before reacting");
                }
            }
        }
        Ok(())
    }

    /// Time at which the vehicle's time to arrival at the crossing point
    /// first drops below `onset_tta`.
    pub fn onset_time(&self) -> Option<f64> {
        let gap = self.ped_start[0] - self.veh_start[0];
        if self.veh_speed <= 0.0 || gap < 0.0 {
            return None;
        }
        Some((gap / self.veh_speed - self.onset_tta).max(0.0))
    }
}

/// Piecewise-linear speed over time, constant outside its knots.
#[derive(Debug, Clone)]
struct SpeedProfile {
    knots: Vec<(f64, f64)>,
}

impl SpeedProfile {
    fn constant(v: f64) -> Self {
        SpeedProfile { knots: vec![(0.0, v)] }
    }

    fn ramp(v0: f64, t0: f64, t1: f64, v1: f64) -> Self {
        SpeedProfile {
            knots: vec![(0.0, v0), (t0, v0), (t1, v1)],
        }
    }

    /// Exact path length travelled by time `t`.
    fn distance(&self, t: f64) -> f64 {
        let mut s = 0.0;
        let mut prev = (0.0, self.knots[0].1);
        for &(tk, vk) in &self.knots {
            if tk <= prev.0 {
                prev = (prev.0, vk);
                continue;
            }
            if t <= tk {
                let v_t = prev.1 + (vk - prev.1) * (t - prev.0) / (tk - prev.0);
                return s + 0.5 * (prev.1 + v_t) * (t - prev.0);
            }
            s += 0.5 * (prev.1 + vk) * (tk - prev.0);
            prev = (tk, vk);
        }
        s + prev.1 * (t - prev.0)
    }
}

fn frame_count(duration: f64) -> usize {
    (duration * RAW_RATE_HZ + 1e-9).floor() as usize + 1
}

/// Deterministic pedestrian and vehicle tracks at 10 Hz. Agent ids are
/// `ped` and `veh`; [`generate_corpus`] renames them per scene.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<(TrackRecord, TrackRecord)> {
    spec.validate()?;
    let t_on = spec.onset_time().unwrap_or(f64::INFINITY);
    let t_react = t_on + spec.reaction_delay;
    let vp = spec.ped_speed;
    let vv = spec.veh_speed;
    let t_pass = if vv > 0.0 {
        (spec.ped_start[0] - spec.veh_start[0]) / vv
    } else {
        f64::INFINITY
    };

    let (ped_profile, veh_profile, look) = match spec.kind {
        ScenarioKind::VehicleYields => (
            SpeedProfile::ramp(vp, t_react, t_react + YIELD_RAMP, YIELD_SPEEDUP * vp),
            SpeedProfile::ramp(vv, t_on, t_on + vv / spec.decel, 0.0),
            // Glances away once the vehicle is seen braking, ahead of the speed-up.
            (t_on - LOOK_LEAD, t_on + 0.5 * spec.reaction_delay),
        ),
        ScenarioKind::PedestrianHalts => {
            let room = -HALT_MARGIN - (spec.ped_start[1] + vp * t_react);
            let stop = if vp > 0.0 { 2.0 * room / vp } else { 0.0 };
            (
                SpeedProfile::ramp(vp, t_react, t_react + stop, 0.0),
                SpeedProfile::constant(vv),
                (t_on - LOOK_LEAD, t_pass),
            )
        }
        ScenarioKind::IndependentFar => (SpeedProfile::constant(vp), SpeedProfile::constant(vv), (0.0, 0.0)),
    };

    let n = frame_count(spec.duration);
    let mut ped_pts = Vec::with_capacity(n);
    let mut veh_pts = Vec::with_capacity(n);
    let mut heads = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / RAW_RATE_HZ;
        let ped = [spec.ped_start[0], spec.ped_start[1] + ped_profile.distance(t)];
        let veh = [spec.veh_start[0] + veh_profile.distance(t), spec.veh_start[1]];
        let theta = if t >= look.0 && t < look.1 {
            (veh[1] - ped[1]).atan2(veh[0] - ped[0])
        } else {
            std::f64::consts::FRAC_PI_2
        };
        ped_pts.push(ped);
        veh_pts.push(veh);
        heads.push(theta);
    }

    if spec.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(1);
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::InvalidArgument(format!("noise sigma: {e}")))?;
        for p in ped_pts.iter_mut().chain(veh_pts.iter_mut()) {
            p[0] += normal.sample(&mut rng);
            p[1] += normal.sample(&mut rng);
        }
    }

    let frames = |pts: &[Point], heads: Option<&[f64]>| -> Vec<Frame> {
        pts.iter()
            .enumerate()
            .map(|(k, p)| Frame {
                timestamp: k as f64 / RAW_RATE_HZ,
                x: p[0],
                y: p[1],
                head_theta: heads.map(|h| h[k]),
                occluded: false,
            })
            .collect()
    };
    let ped = TrackRecord::new("ped", AgentKind::Pedestrian, frames(&ped_pts, Some(&heads)), RAW_RATE_HZ)?;
    let veh = TrackRecord::new("veh", AgentKind::EgoVehicle, frames(&veh_pts, None), RAW_RATE_HZ)?;
    Ok((ped, veh))
}

/// Street band plus both sidewalks, wide enough for every generated scene.
pub fn default_map() -> MapOverlay {
    let rect = |y0: f64, y1: f64| vec![[-400.0, y0], [100.0, y0], [100.0, y1], [-400.0, y1]];
    MapOverlay {
        polygons: vec![
            (Surface::Sidewalk, rect(-60.0, 0.0)),
            (Surface::Street, rect(0.0, LANE_WIDTH)),
            (Surface::Sidewalk, rect(LANE_WIDTH, LANE_WIDTH + 60.0)),
        ],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub file: String,
    pub spec: ScenarioSpec,
}

/// Per-scene seed `index` of a corpus rooted at `base_seed`.
pub fn scenario_seed(base_seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    rng.next_u64()
}

pub fn corpus_manifest_text(base_seed: u64, entries: &[CorpusEntry]) -> String {
    let mut out = format!(
        "{CORPUS_MANIFEST_HEADER}\nbase_seed {base_seed}\n\
         file\tkind\tseed\tped_speed\tveh_speed\tonset_tta\tdecel\treaction_delay\tnoise_sigma\n"
    );
    for e in entries {
        let s = &e.spec;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            e.file, s.kind, s.seed, s.ped_speed, s.veh_speed, s.onset_tta, s.decel, s.reaction_delay, s.noise_sigma
        );
    }
    out
}

/// Writes `kinds.len() × n_per_kind` scene files, `manifest.txt` and
/// `map.txt` into `out`. Pedestrian ids are `pedNNNN`, unique across the
/// corpus.
pub fn generate_corpus(
    out: &Path,
    kinds: &[ScenarioKind],
    n_per_kind: usize,
    base_seed: u64,
    noise_sigma: f64,
) -> Result<Vec<CorpusEntry>> {
    if n_per_kind == 0 {
        return Err(Error::InvalidArgument("n_per_kind must be at least 1".into()));
    }
    if kinds.is_empty() {
        return Err(Error::InvalidArgument("no scenario kinds selected".into()));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let mut entries = Vec::with_capacity(kinds.len() * n_per_kind);
    for _ in 0..n_per_kind {
        for &kind in kinds {
            let index = entries.len();
            let spec = ScenarioSpec::sample(kind, scenario_seed(base_seed, index as u64), noise_sigma);
            let (mut ped, mut veh) = generate_scenario(&spec)?;
            ped.agent_id = format!("ped{index:04}");
            veh.agent_id = format!("veh{index:04}");
            let file = format!("scenario_{index:04}.{TRACK_FILE_EXTENSION}");
            write_atomic(&out.join(&file), format_tracks(&[ped, veh]).as_bytes())?;
            entries.push(CorpusEntry { file, spec });
        }
    }
    write_atomic(&out.join(CORPUS_MANIFEST_NAME), corpus_manifest_text(base_seed, &entries).as_bytes())?;
    default_map().save(&out.join(MAP_FILE_NAME))?;
    Ok(entries)
}
