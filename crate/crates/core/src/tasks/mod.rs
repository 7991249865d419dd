//! Data loading, training, superresolution and ablation runs.

mod ablate;
mod band;
mod data;
mod superres;
mod train;

pub use ablate::{ablate, write_ablation_csv, AblationCell, AblationMatrix, CellResult};
pub use band::{band_errors, BandErrors};
pub use data::{
    linspace_coords, load_image, load_image_sized, load_named, load_sound, normalize_symmetric,
    parse_pgm, pixel_center, pixel_grid, read_csv_column, read_pgm, read_wav, smooth_field,
    smooth_image, subsample, two_tone, write_pgm, write_wav, Image, Normalization, SignalDataset,
    IMAGE_SIZE, SOUND_SAMPLES,
};
pub use superres::{image_mse, interp_baseline, superresolve, Interp};
pub use train::{median, train, train_seeds, SeedRun, TrainConfig, TrainReport};
