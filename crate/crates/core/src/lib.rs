pub mod cli;
pub mod error;
pub mod geometry;
pub mod gluing;
pub mod immersion;
pub mod numeric;
pub mod profile;
pub mod report;
