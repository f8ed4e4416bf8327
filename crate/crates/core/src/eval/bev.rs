//! SVG bird's-eye view in the sample's pedestrian-centered frame.
//!
//! Sample point `(x, y)` in metres maps to pixel
//! `(BEV_ANCHOR_PX.0 + s·x, BEV_ANCHOR_PX.1 − s·y)` with
//! `s = BEV_PIXELS_PER_METER`, so the pedestrian's position at `t` lands on
//! the anchor and `+y` points up.

use std::fmt::Write as _;
use std::path::Path;

use crate::binio::write_atomic;
use crate::data::{MapOverlay, Point, Surface, TrajectorySample};
use crate::error::Result;
use crate::model::Forecast;

pub const BEV_SIZE_PX: (f64, f64) = (400.0, 400.0);
pub const BEV_ANCHOR_PX: (f64, f64) = (200.0, 200.0);
pub const BEV_PIXELS_PER_METER: f64 = 20.0;
const CIRCLE_RADIUS_PX: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotRole {
    /// Drawn red.
    Fused,
    /// Drawn blue.
    Baseline,
}

impl PlotRole {
    fn color(self) -> &'static str {
        match self {
            PlotRole::Fused => "red",
            PlotRole::Baseline => "blue",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BevForecast {
    pub label: String,
    pub role: PlotRole,
    pub forecast: Forecast,
}

fn to_px(p: Point) -> (f64, f64) {
    (
        BEV_ANCHOR_PX.0 + BEV_PIXELS_PER_METER * p[0],
        BEV_ANCHOR_PX.1 - BEV_PIXELS_PER_METER * p[1],
    )
}

fn polyline(out: &mut String, pts: &[Point], stroke: &str) {
    out.push_str("  <polyline fill=\"none\" stroke-width=\"2\" stroke=\"");
    out.push_str(stroke);
    out.push_str("\" points=\"");
    for (i, &p) in pts.iter().enumerate() {
        let (x, y) = to_px(p);
        let _ = write!(out, "{}{x:.3},{y:.3}", if i == 0 { "" } else { " " });
    }
    out.push_str("\"/>\n");
}

fn circles(out: &mut String, pts: &[Point], fill: &str, label: &str) {
    let _ = writeln!(out, "  <g class=\"{label}\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"0.5\">");
    for &p in pts {
        let (x, y) = to_px(p);
        let _ = writeln!(out, "    <circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{CIRCLE_RADIUS_PX}\"/>");
    }
    out.push_str("  </g>\n");
}

/// The document [`render_bev`] writes. Ground truth is yellow; past tracks
/// are polylines (pedestrian grey, vehicle green) so that the only circles
/// are the ten future positions of ground truth and of each forecast.
pub fn svg_text(sample: &TrajectorySample, forecasts: &[BevForecast], map: Option<&MapOverlay>) -> String {
    let (w, h) = BEV_SIZE_PX;
    let mut out = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         \x20 <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"#9e9e9e\"/>\n"
    );
    if let Some(map) = map {
        let o = sample.origin_world;
        for (surface, pts) in &map.polygons {
            let fill = match surface {
                Surface::Sidewalk => "white",
                Surface::Street => "black",
            };
            let _ = write!(out, "  <polygon class=\"{}\" fill=\"{fill}\" points=\"", surface.token());
            for (i, p) in pts.iter().enumerate() {
                let (x, y) = to_px([p[0] - o[0], p[1] - o[1]]);
                let _ = write!(out, "{}{x:.3},{y:.3}", if i == 0 { "" } else { " " });
            }
            out.push_str("\"/>\n");
        }
    }
    polyline(&mut out, &sample.ped_past, "#606060");
    polyline(&mut out, &sample.veh_past, "green");
    circles(&mut out, &sample.ped_future, "yellow", "ground_truth");
    for f in forecasts {
        circles(&mut out, &f.forecast.positions, f.role.color(), &f.label);
    }
    out.push_str("</svg>\n");
    out
}

pub fn render_bev(
    sample: &TrajectorySample,
    forecasts: &[BevForecast],
    map: Option<&MapOverlay>,
    out_path: &Path,
) -> Result<()> {
    write_atomic(out_path, svg_text(sample, forecasts, map).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FUTURE_LEN;

    fn sample() -> TrajectorySample {
        TrajectorySample {
            ped_past: std::array::from_fn(|k| [0.0, 0.3 * (k as f64 - 4.0)]),
            veh_past: std::array::from_fn(|k| [-8.0 + 1.5 * k as f64, 3.0]),
            head_past: [1.5; 5],
            ped_future: std::array::from_fn(|k| [0.0, 0.3 * (k + 1) as f64]),
            origin_world: [10.0, -2.0],
            t: 3.0,
        }
    }

    fn forecast(dx: f64) -> Forecast {
        Forecast {
            positions: std::array::from_fn(|k| [dx, 0.25 * (k + 1) as f64]),
        }
    }

    fn circles_of(svg: &str) -> Vec<(f64, f64)> {
        svg.lines()
            .filter(|l| l.trim_start().starts_with("<circle"))
            .map(|l| {
                let attr = |name: &str| -> f64 {
                    let start = l.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
                    l[start..].split('"').next().unwrap().parse().unwrap()
                };
                (attr("cx"), attr("cy"))
            })
            .collect()
    }

    #[test]
    fn circle_count_is_ten_per_series() {
        let s = sample();
        for k in 0..3 {
            let fs: Vec<BevForecast> = (0..k)
                .map(|i| BevForecast {
                    label: format!("f{i}"),
                    role: if i == 0 { PlotRole::Fused } else { PlotRole::Baseline },
                    forecast: forecast(i as f64),
                })
                .collect();
            let svg = svg_text(&s, &fs, None);
            assert_eq!(svg.matches("<circle").count(), FUTURE_LEN * (1 + k));
            assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
        }
    }

    #[test]
    fn origin_maps_to_anchor() {
        let mut s = sample();
        s.ped_future[0] = [0.0, 0.0];
        s.ped_future[1] = [1.0, 2.0];
        let c = circles_of(&svg_text(&s, &[], None));
        assert_eq!(c[0], BEV_ANCHOR_PX);
        assert_eq!(c[1], (BEV_ANCHOR_PX.0 + 20.0, BEV_ANCHOR_PX.1 - 40.0));
    }

    #[test]
    fn map_is_translated_into_sample_frame() {
        let map = MapOverlay {
            polygons: vec![(Surface::Street, vec![[10.0, -2.0], [11.0, -2.0], [11.0, -1.0]])],
        };
        let svg = svg_text(&sample(), &[], Some(&map));
        assert!(svg.contains("fill=\"black\" points=\"200.000,200.000 220.000,200.000 220.000,180.000\""));
        let fs = [BevForecast {
            label: "method2".into(),
            role: PlotRole::Fused,
            forecast: forecast(0.0),
        }];
        let svg = svg_text(&sample(), &fs, Some(&map));
        assert!(svg.contains("fill=\"red\"") && svg.contains("fill=\"yellow\""));
    }

    #[test]
    fn render_writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bev.svg");
        render_bev(&sample(), &[], None, &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), svg_text(&sample(), &[], None));
        // parent is a regular file
        assert!(render_bev(&sample(), &[], None, &p.join("x.svg")).is_err());
    }
}
