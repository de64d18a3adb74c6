//! Talking-head quality metrics: PSNR, SSIM, LPIPS, LMD, FID, AUE and the
//! audio-visual sync confidence, plus a corpus-level report generator.

mod aue;
mod fid;
mod image;
mod lmd;
mod lpips;
mod psnr;
mod ssim;
pub mod suite;
mod sync;

pub use aue::{aue_lower, AuSubset, AuVector};
pub use fid::{fid, sqrtm_psd, symmetrized_product, FeatureSet};
pub use image::ImageFrame;
pub use lmd::{lmd, LandmarkSet};
pub use lpips::{lpips, lpips_from_features, GridStatsEmbedder, PatchEmbedder};
pub use psnr::{mse, psnr};
pub use ssim::{gaussian_kernel, ssim, SsimConfig};
pub use suite::{evaluate_suite, Manifest, Metric, QualityReport};
pub use sync::{cosine_confidence, sync_conf, EmbeddingPairSeries};
