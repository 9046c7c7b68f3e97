//! Raw event ingestion, deduplication and k-core filtering, chronological
//! splitting, and train-split popularity structure.

mod dataset;
mod kcore;
mod load;
mod persist;
mod popularity;
pub mod synthetic;

pub use dataset::{chrono_split, dataset_stats, DatasetStats, InteractionDataset, Split};
pub use kcore::{dedup_and_kcore, distinct_counts};
pub use load::{load_interactions, parse_interactions, FormatSpec, RawEvent};
pub use persist::{read_dataset, read_popularity, write_dataset, DATASET_FILES};
pub use popularity::{history_distribution, popularity_bins, tail_mask, PopBin, PopularityProfile, DEFAULT_PRIOR};
