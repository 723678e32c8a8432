//! Compiler from a monomorphic image-pipeline language to a streaming
//! dataflow design, with exact rate solving, optimal FIFO allocation and a
//! cycle-accurate token simulator checked against a reference interpreter.

pub mod backend;
pub mod buffer;
pub mod cli;
pub mod compile;
pub mod corpus;
pub mod design;
pub mod frontend;
pub mod image_io;
pub mod interp;
pub mod mapper;
pub mod ops;
pub mod plan;
pub mod sdf;
pub mod sim;
pub mod types;
pub mod value;
