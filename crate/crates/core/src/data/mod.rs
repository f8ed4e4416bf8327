//! Track ingestion, 10 Hz → 5 Hz resampling, the pedestrian-centered frame,
//! sliding-window sample extraction and track-level splitting.

mod cache;
mod corpus;
mod looking;
mod map;
mod split;
mod track;
mod window;

pub use cache::{
    decode_sample_cache, encode_sample_cache, read_sample_cache, write_sample_cache, SAMPLE_CACHE_MAGIC,
    SAMPLE_CACHE_VERSION,
};
pub use corpus::{corpus_groups, load_corpus, pair_tracks, track_files, TRACK_FILE_EXTENSION};
pub use looking::{angular_distance, looking_flag, DEFAULT_LOOK_HALF_ANGLE};
pub use map::{MapOverlay, Surface, MAP_FILE_HEADER, MAP_FILE_NAME};
pub use split::{split_dataset, DatasetSplit, SplitName, SplitRatios, SPLIT_MANIFEST_HEADER};
pub use track::{
    format_tracks, load_tracks, parse_tracks, write_tracks, AgentKind, Frame, TrackRecord, DEFAULT_SOURCE_RATE,
    SPACING_TOLERANCE, TRACK_FILE_HEADER,
};
pub use window::{
    extract_groups, extract_samples, extract_samples_10hz, from_pedestrian_frame, resample_to_5hz,
    to_pedestrian_frame, CenteredWindow, Point, SampleGroup, TrajectorySample, FUTURE_LEN, MIN_RAW_FRAMES,
    MODEL_DT, MODEL_RATE_HZ, PAST_LEN, RAW_RATE_HZ, WINDOW_LEN,
};
