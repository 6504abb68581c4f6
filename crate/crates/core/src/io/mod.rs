//! File formats: dataset CSV with a `.meta` sidecar, IDX image files and
//! generic numeric CSV tables.

mod dataset_csv;
mod idx;
mod tabular;

pub use dataset_csv::{load_dataset, meta_path, parse_kv, read_dataset, save_dataset, write_dataset_csv, write_meta};
pub use idx::{binarize_labels, encode_idx, parse_idx, parse_idx_bytes, RawImageSet, IMAGES_MAGIC, LABELS_MAGIC};
pub use tabular::{load_csv_tabular, read_csv_tabular, Tabular};
