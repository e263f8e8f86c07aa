//! Speech emotion feature extraction, filter and wrapper feature ranking,
//! and the set algebra that derives language- and classifier-independent
//! feature subsets.
pub mod audio;
pub mod classifiers;
pub mod dataset;
pub mod evaluation;
pub mod features;
pub mod filters;
pub mod fixtures;
pub mod selection;
pub mod spectro;
pub mod synth;
