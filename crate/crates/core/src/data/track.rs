use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const TRACK_FILE_HEADER: &str = "pedfuse-tracks v1";

/// Allowed deviation of any frame spacing from the track's nominal spacing.
pub const SPACING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Pedestrian,
    EgoVehicle,
}

impl AgentKind {
    pub fn token(self) -> &'static str {
        match self {
            AgentKind::Pedestrian => "pedestrian",
            AgentKind::EgoVehicle => "ego_vehicle",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        match s {
            "pedestrian" => Some(AgentKind::Pedestrian),
            "ego_vehicle" => Some(AgentKind::EgoVehicle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub timestamp: f64,
    pub x: f64,
    pub y: f64,
    /// World-frame head yaw in radians. Always `None` for vehicles.
    pub head_theta: Option<f64>,
    pub occluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackRecord {
    pub agent_id: String,
    pub kind: AgentKind,
    pub frames: Vec<Frame>,
    pub source_rate: f64,
}

impl TrackRecord {
    /// Builds a track and checks every invariant.
    pub fn new(agent_id: impl Into<String>, kind: AgentKind, frames: Vec<Frame>, source_rate: f64) -> Result<Self> {
        let track = TrackRecord {
            agent_id: agent_id.into(),
            kind,
            frames,
            source_rate,
        };
        track.validate()?;
        Ok(track)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.agent_id.is_empty() || self.agent_id.chars().any(char::is_whitespace) {
            return Err(Error::Data(format!("invalid agent id {:?}", self.agent_id)));
        }
        if !(self.source_rate > 0.0 && self.source_rate.is_finite()) {
            return Err(Error::Data(format!("{}: invalid source rate {}", self.agent_id, self.source_rate)));
        }
        if let Some(i) = first_invalid_frame(self) {
            return Err(Error::Data(format!("{}: frame {i} violates track invariants", self.agent_id)));
        }
        Ok(())
    }
}

fn frame_ok(kind: AgentKind, f: &Frame) -> bool {
    let theta_ok = match (kind, f.head_theta) {
        (AgentKind::EgoVehicle, Some(_)) => false,
        (_, Some(t)) => t.is_finite(),
        _ => true,
    };
    theta_ok && f.timestamp.is_finite() && f.x.is_finite() && f.y.is_finite()
}

fn first_invalid_frame(track: &TrackRecord) -> Option<usize> {
    let spacing = 1.0 / track.source_rate;
    track.frames.iter().enumerate().position(|(i, f)| {
        !frame_ok(track.kind, f)
            || (i > 0 && {
                let dt = f.timestamp - track.frames[i - 1].timestamp;
                dt <= 0.0 || (dt - spacing).abs() > SPACING_TOLERANCE
            })
    })
}

/// Shortest round-trip decimal, padded to at least six fractional digits.
fn format_timestamp(t: f64) -> String {
    let mut s = format!("{t}");
    let decimals = match s.find('.') {
        Some(dot) => s.len() - dot - 1,
        None => {
            s.push('.');
            0
        }
    };
    for _ in decimals..6 {
        s.push('0');
    }
    s
}

/// Serializes tracks in the `pedfuse-tracks v1` text format.
///
/// One frame per line: `agent_id kind timestamp x y theta occluded`, with
/// `theta` written as `-` when absent and `occluded` as `0`/`1`.
pub fn format_tracks(tracks: &[TrackRecord]) -> String {
    let mut out = String::new();
    out.push_str(TRACK_FILE_HEADER);
    out.push('\n');
    for track in tracks {
        for f in &track.frames {
            let theta = f.head_theta.map_or_else(|| "-".to_string(), |t| format!("{t}"));
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {}",
                track.agent_id,
                track.kind.token(),
                format_timestamp(f.timestamp),
                f.x,
                f.y,
                theta,
                u8::from(f.occluded)
            );
        }
    }
    out
}

pub fn write_tracks(path: &Path, tracks: &[TrackRecord]) -> Result<()> {
    for t in tracks {
        t.validate()?;
    }
    crate::binio::write_atomic(path, format_tracks(tracks).as_bytes())
}

pub fn load_tracks(path: &Path) -> Result<Vec<TrackRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tracks(&text, &path.display().to_string())
}

/// Infers the nominal rate from the first spacing; integer rates are snapped.
fn infer_rate(dt: f64) -> f64 {
    let r = 1.0 / dt;
    if (r - r.round()).abs() < 1e-3 {
        r.round()
    } else {
        r
    }
}

/// Rate assumed for single-frame tracks, where no spacing is observable.
pub const DEFAULT_SOURCE_RATE: f64 = 10.0;

pub fn parse_tracks(text: &str, source: &str) -> Result<Vec<TrackRecord>> {
    let perr = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim_end() == TRACK_FILE_HEADER => {}
        Some((n, l)) => return Err(perr(n, format!("expected header `{TRACK_FILE_HEADER}`, found {l:?}"))),
        None => return Err(perr(1, "empty file".into())),
    }

    let mut tracks: Vec<TrackRecord> = Vec::new();
    for (n, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 7 {
            return Err(perr(n, format!("expected 7 columns, found {}", cols.len())));
        }
        let kind = AgentKind::from_token(cols[1]).ok_or_else(|| perr(n, format!("unknown agent kind {:?}", cols[1])))?;
        let num = |i: usize, name: &str| -> Result<f64> {
            let v: f64 = cols[i].parse().map_err(|_| perr(n, format!("invalid {name} {:?}", cols[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(perr(n, format!("non-finite {name}")))
            }
        };
        let timestamp = num(2, "timestamp")?;
        let x = num(3, "x")?;
        let y = num(4, "y")?;
        let head_theta = match (cols[5], kind) {
            ("-", _) => None,
            (_, AgentKind::EgoVehicle) => return Err(perr(n, "head orientation given for a vehicle".into())),
            _ => Some(num(5, "theta")?),
        };
        let occluded = match cols[6] {
            "0" => false,
            "1" => true,
            other => return Err(perr(n, format!("occluded flag must be 0 or 1, found {other:?}"))),
        };
        let frame = Frame {
            timestamp,
            x,
            y,
            head_theta,
            occluded,
        };

        let idx = match tracks.iter().position(|t| t.agent_id == cols[0]) {
            Some(i) => i,
            None => {
                tracks.push(TrackRecord {
                    agent_id: cols[0].to_string(),
                    kind,
                    frames: Vec::new(),
                    source_rate: DEFAULT_SOURCE_RATE,
                });
                tracks.len() - 1
            }
        };
        let track = &mut tracks[idx];
        if track.kind != kind {
            return Err(perr(n, format!("agent {} changes kind", track.agent_id)));
        }
        if let Some(prev) = track.frames.last() {
            let dt = timestamp - prev.timestamp;
            if dt <= 0.0 {
                return Err(perr(n, format!("timestamp {timestamp} not after previous {}", prev.timestamp)));
            }
            if track.frames.len() == 1 {
                track.source_rate = infer_rate(dt);
            }
            let spacing = 1.0 / track.source_rate;
            if (dt - spacing).abs() > SPACING_TOLERANCE {
                return Err(perr(n, format!("non-uniform spacing {dt} s (expected {spacing} s)")));
            }
        }
        track.frames.push(frame);
    }
    Ok(tracks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame(t: f64, x: f64, theta: Option<f64>) -> Frame {
        Frame {
            timestamp: t,
            x,
            y: -x,
            head_theta: theta,
            occluded: false,
        }
    }

    fn two_track_text() -> String {
        let ped = TrackRecord::new(
            "p1",
            AgentKind::Pedestrian,
            (0..4).map(|i| frame(i as f64 * 0.1, i as f64, Some(0.5))).collect(),
            10.0,
        )
        .unwrap();
        let veh = TrackRecord::new(
            "v1",
            AgentKind::EgoVehicle,
            (0..3).map(|i| frame(i as f64 * 0.1, 2.0 * i as f64, None)).collect(),
            10.0,
        )
        .unwrap();
        format_tracks(&[ped, veh])
    }

    #[test]
    fn parses_two_tracks() {
        let tracks = parse_tracks(&two_track_text(), "mem").unwrap();
        assert_eq!(tracks.len(), 2);
        assert_eq!(tracks[0].len(), 4);
        assert_eq!(tracks[1].len(), 3);
        assert_eq!(tracks[1].kind, AgentKind::EgoVehicle);
        assert_eq!(tracks[0].source_rate, 10.0);
    }

    #[test]
    fn timestamps_have_six_decimals() {
        assert_eq!(format_timestamp(0.1), "0.100000");
        assert_eq!(format_timestamp(3.0), "3.000000");
        assert_eq!(format_timestamp(0.30000000000000004), "0.30000000000000004");
    }

    #[test]
    fn decreasing_timestamp_names_line() {
        let text = "pedfuse-tracks v1\n# comment\np1 pedestrian 0.200000 0 0 0 0\np1 pedestrian 0.100000 0 0 0 0\n";
        match parse_tracks(text, "bad.tracks").unwrap_err() {
            Error::Parse { line, path, .. } => {
                assert_eq!(line, 4);
                assert_eq!(path, "bad.tracks");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn non_uniform_spacing_rejected() {
        let text = "pedfuse-tracks v1\np1 pedestrian 0.0 0 0 0 0\np1 pedestrian 0.1 0 0 0 0\np1 pedestrian 0.25 0 0 0 0\n";
        let err = parse_tracks(text, "x").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn malformed_rows_rejected() {
        let cases = [
            "pedfuse-tracks v2\n",
            "pedfuse-tracks v1\np1 pedestrian 0.0 0 0 0\n",
            "pedfuse-tracks v1\np1 cyclist 0.0 0 0 0 0\n",
            "pedfuse-tracks v1\nv1 ego_vehicle 0.0 0 0 1.0 0\n",
            "pedfuse-tracks v1\np1 pedestrian 0.0 0 0 0 2\n",
            "pedfuse-tracks v1\np1 pedestrian 0.0 nan 0 0 0\n",
            "pedfuse-tracks v1\np1 pedestrian 0.0 0 0 0 0\np1 ego_vehicle 0.1 0 0 - 0\n",
        ];
        for text in cases {
            assert!(parse_tracks(text, "x").is_err(), "{text:?} accepted");
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_tracks(Path::new("/nonexistent/definitely.tracks")).unwrap_err();
        assert_eq!(err.exit_code(), 5);
    }

    #[test]
    fn constructor_rejects_vehicle_theta() {
        let r = TrackRecord::new("v", AgentKind::EgoVehicle, vec![frame(0.0, 0.0, Some(1.0))], 10.0);
        assert!(r.is_err());
    }

    fn arb_track(id: usize) -> impl Strategy<Value = TrackRecord> {
        (
            any::<bool>(),
            prop_oneof![Just(5.0), Just(10.0)],
            -100.0f64..100.0,
            proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3, -4.0f64..4.0, any::<bool>(), any::<bool>()), 1..40),
        )
            .prop_map(move |(is_ped, rate, t0, rows)| {
                let kind = if is_ped { AgentKind::Pedestrian } else { AgentKind::EgoVehicle };
                let frames = rows
                    .into_iter()
                    .enumerate()
                    .map(|(i, (x, y, th, has_th, occ))| Frame {
                        timestamp: t0 + i as f64 / rate,
                        x,
                        y,
                        head_theta: (is_ped && has_th).then_some(th),
                        occluded: occ,
                    })
                    .collect();
                TrackRecord {
                    agent_id: format!("agent{id}"),
                    kind,
                    frames,
                    source_rate: rate,
                }
            })
    }

    proptest! {
        #[test]
        fn write_read_round_trip(a in arb_track(0), b in arb_track(1)) {
            let tracks = vec![a, b];
            prop_assume!(tracks.iter().all(|t| t.validate().is_ok()));
            let text = format_tracks(&tracks);
            let back = parse_tracks(&text, "mem").unwrap();
            prop_assert_eq!(format_tracks(&back), text);
            for (x, y) in tracks.iter().zip(&back) {
                prop_assert_eq!(&x.frames, &y.frames);
                if x.len() > 1 {
                    prop_assert_eq!(x.source_rate, y.source_rate);
                }
            }
        }
    }
}
