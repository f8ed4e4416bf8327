use std::path::{Path, PathBuf};

use super::track::{load_tracks, AgentKind, TrackRecord};
use super::window::{extract_groups, SampleGroup};
use crate::error::{Error, Result};

pub const TRACK_FILE_EXTENSION: &str = "tracks";

/// Pairs every pedestrian in one file with that file's single ego vehicle.
pub fn pair_tracks(tracks: Vec<TrackRecord>, source: &str) -> Result<Vec<(TrackRecord, TrackRecord)>> {
    let (vehicles, peds): (Vec<_>, Vec<_>) = tracks.into_iter().partition(|t| t.kind == AgentKind::EgoVehicle);
    let [veh] = <[TrackRecord; 1]>::try_from(vehicles)
        .map_err(|v| Error::Data(format!("{source}: expected exactly one ego_vehicle track, found {}", v.len())))?;
    Ok(peds.into_iter().map(|p| (p, veh.clone())).collect())
}

pub fn track_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == TRACK_FILE_EXTENSION) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every `*.tracks` file of a corpus directory, in file-name order.
pub fn load_corpus(dir: &Path) -> Result<Vec<(TrackRecord, TrackRecord)>> {
    let files = track_files(dir)?;
    if files.is_empty() {
        return Err(Error::Data(format!("{}: no .{TRACK_FILE_EXTENSION} files", dir.display())));
    }
    let mut pairs = Vec::new();
    for f in files {
        pairs.extend(pair_tracks(load_tracks(&f)?, &f.display().to_string())?);
    }
    Ok(pairs)
}

/// Both-phase sample groups for every pair, ordered by (track id, phase).
pub fn corpus_groups(pairs: &[(TrackRecord, TrackRecord)]) -> Result<Vec<SampleGroup>> {
    let mut groups = Vec::new();
    for (p, v) in pairs {
        groups.extend(extract_groups(p, v)?);
    }
    groups.sort_by(|a, b| (&a.track_id, a.phase).cmp(&(&b.track_id, b.phase)));
    for w in groups.windows(2) {
        if w[0].track_id == w[1].track_id && w[0].phase == w[1].phase {
            return Err(Error::Data(format!("duplicate pedestrian track id {}", w[0].track_id)));
        }
    }
    Ok(groups)
}
