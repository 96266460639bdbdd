//! Binarization of definite logic programs and depth-1 partial deduction of
//! the binarized result, with a stratification analysis that predicts when
//! the continuation variables introduced by binarization disappear, and an
//! LD-resolution interpreter used to check that answers are preserved.

pub mod term;
pub mod syntax;
pub mod engine;
pub mod stratify;
pub mod binarize;
pub mod pd;
pub mod post_opt;
pub mod pipeline;
pub mod verify;
pub mod corpus;
