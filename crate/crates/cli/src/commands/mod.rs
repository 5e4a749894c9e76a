pub mod cluster;
pub mod compare;
pub mod gen;
pub mod metrics;
pub mod tune;
