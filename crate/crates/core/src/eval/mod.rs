//! Human evaluation: the ten-item rubric, rating files, per-criterion and
//! agreement statistics, and the rendered report.

pub mod ratings;
pub mod report;
pub mod rubric;
pub mod stats;

pub use ratings::{load_ratings, LoadError, Rating, RatingError, RatingInput, RatingSet};
pub use report::{build_report, format_percent, EvalReport, Percent};
pub use rubric::{rubric, RubricItem};
pub use stats::{chosen_option, EvalError, Share};
