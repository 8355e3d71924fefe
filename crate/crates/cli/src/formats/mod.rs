//! File formats: grayscale images, PBM masks with JSON sidecars, CSV tables,
//! raw binary arrays and the artifact manifest.

pub mod array;
pub mod image;
pub mod manifest;
pub mod mask;
pub mod table;

pub use self::array::{read_array, write_array, ArrayData, ArrayMeta};
pub use self::image::{fit_square, load_image, save_image, GrayImage, ResizeMode};
pub use self::manifest::{sha256_hex, Artifacts, FileEntry, Manifest, SolverFlag};
pub use self::mask::{read_mask, write_mask, MaskSidecar};
pub use self::table::write_csv;
