//! Formal normal forms of germs by degree-wise solution of cohomological equations.

pub mod engine;
pub mod geometry;
pub mod gevrey;
pub mod graded;
pub mod majorant;
pub mod sample;
pub mod selfcheck;
pub mod singularity;
pub mod vf;
