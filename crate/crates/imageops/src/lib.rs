//! Image containers, color conversion, contrast enhancement, blur and
//! geometric augmentation for the capsule-endoscopy pipeline.

pub mod augment;
pub mod blur;
pub mod clahe;
pub mod color;
pub mod error;
pub mod image;
pub mod netpbm;
pub mod preprocess;
pub mod sample;

pub use augment::{apply_augment, sample_augment, AugmentConfig, AugmentDraw};
pub use blur::{gaussian_blur, gaussian_kernel};
pub use clahe::clahe;
pub use color::{lab_pixel_to_srgb, lab_to_srgb, srgb_pixel_to_lab, srgb_to_lab};
pub use error::{ImageError, Result};
pub use image::{clamp_u8, ImageU8, MaskPlane, PlaneF32};
pub use netpbm::{read_pgm, read_ppm, write_pgm, write_ppm};
pub use preprocess::{preprocess, PreprocessConfig};
pub use sample::{mixup, BoxAnnotation, LabeledSample};
