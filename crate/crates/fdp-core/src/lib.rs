pub mod catalog;
pub mod dataset;
pub mod indicators;
pub mod linalg;
pub mod preprocess;
pub mod models;
pub mod selection;
pub mod synthetic;
pub mod evaluation;
