pub mod error;
pub mod flow;
pub mod free_norm;
pub mod io;
pub mod lp;
pub mod metric;
pub mod numeric;
pub mod opnorm;
pub mod lip_ops;
pub mod banach_lab;
pub mod decomposition;
pub mod quotient;
pub mod rng;
pub mod sample;

pub use error::{Error, Result};
pub use metric::{BasePolicy, MetricSource, Point, PointedMetricSpace, PseudoMetric};
