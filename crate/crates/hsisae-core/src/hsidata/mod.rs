//! Hyperspectral cubes, ground truth, train/test splits and synthetic
//! scenes.

mod cube;
pub mod io;
mod split;
mod synth;

pub use cube::HsiCube;
pub use io::{load_cube, load_labels_csv, load_labels_pgm, save_cube, save_labels_pgm, CubeHeader};
pub use split::{stratified_split, GroundTruth, SplitIndex};
pub use synth::{synth_full_classes, synth_scene, SynthSpec};
