//! One-phase route: a monthly sentiment index from classified posts and its
//! statistical validation against a survey benchmark series.

mod calibration;
mod index;
mod sensitivity;
mod series;
mod validation;

pub use calibration::{calibrate_null, CalibrationSummary};
pub use index::{compute_smi, month_label, monthly_smi, read_posts_csv, write_posts_csv, Sentiment, SentimentPost, SmiValue};
pub use sensitivity::{bisect_threshold, sensitivity_sweep, sigma_from_cv, SensitivityCurve};
pub use series::{compare_periods, bundled_series, IndexSeries, PairedSeries};
pub use validation::{validation_test, validation_test_with_covariance, TestResult, ValidationTest};
