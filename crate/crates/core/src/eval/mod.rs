//! Displacement metrics, the three-way cue comparison and bird's-eye-view
//! plots.

mod bev;
mod metrics;
mod report;

pub use bev::{render_bev, svg_text, BevForecast, PlotRole, BEV_ANCHOR_PX, BEV_PIXELS_PER_METER, BEV_SIZE_PX};
pub use metrics::{evaluate_params, forecast_all, per_horizon_displacement, rmse, Evaluation};
pub use report::{compare_methods, MethodMetrics, MetricsReport, REPORT_TSV_HEADER};
