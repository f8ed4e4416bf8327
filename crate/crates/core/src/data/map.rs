use std::fmt::Write as _;
use std::path::Path;

use super::window::Point;
use crate::binio::write_atomic;
use crate::error::{Error, Result};

pub const MAP_FILE_HEADER: &str = "pedfuse-map v1";
pub const MAP_FILE_NAME: &str = "map.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    Sidewalk,
    Street,
}

impl Surface {
    pub fn token(self) -> &'static str {
        match self {
            Surface::Sidewalk => "sidewalk",
            Surface::Street => "street",
        }
    }
}

/// World-frame polygons describing where sidewalk and street are.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapOverlay {
    pub polygons: Vec<(Surface, Vec<Point>)>,
}

impl MapOverlay {
    /// One line per polygon: `surface x,y x,y …`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{MAP_FILE_HEADER}\n");
        for (surface, pts) in &self.polygons {
            out.push_str(surface.token());
            for p in pts {
                let _ = write!(out, " {},{}", p[0], p[1]);
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: source.to_string(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == MAP_FILE_HEADER => {}
            _ => return Err(err(1, format!("expected header `{MAP_FILE_HEADER}`"))),
        }
        let mut polygons = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let surface = match fields.next() {
                Some("sidewalk") => Surface::Sidewalk,
                Some("street") => Surface::Street,
                Some(other) => return Err(err(i + 1, format!("unknown surface `{other}`"))),
                None => unreachable!(),
            };
            let mut pts = Vec::new();
            for f in fields {
                let (x, y) = f.split_once(',').ok_or_else(|| err(i + 1, format!("expected x,y, got `{f}`")))?;
                let parse = |s: &str| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| err(i + 1, format!("bad coordinate `{s}`")))
                };
                pts.push([parse(x)?, parse(y)?]);
            }
            if pts.len() < 3 {
                return Err(err(i + 1, "polygon needs at least 3 vertices".into()));
            }
            polygons.push((surface, pts));
        }
        Ok(MapOverlay { polygons })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}
