//! Netpbm frames, CSV and JSON-lines results, overlays.

pub mod emit;
pub mod frames;
pub mod overlay;
pub mod pgm;

pub use emit::{format_sig, write_csv, write_csv_row, write_jsonl, write_target_lines, CSV_HEADER};
pub use frames::{frame_file_name, write_frames, FrameDir, SIDECAR_NAME};
pub use overlay::{render_overlay, write_debug_maps, write_overlay, DEFAULT_ARROW_SCALE};
pub use pgm::{encode_pgm, parse_pgm, read_pgm, write_pgm, Rgb};
