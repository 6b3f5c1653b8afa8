//! Exact arithmetic over `Z[1/5]`, generating sets, words and word-metric balls.
//!
//! Matrices act on column vectors from the left; a word `[s1, s2, ..., sn]`
//! evaluates to the product `s1·s2···sn`.

mod ball;
mod generators;
mod matrix;
mod rational;

pub use ball::{free_reduce, group_ball, group_ball_within, GroupBall, DEFAULT_BALL_CAP};
pub use generators::{diagnose, library, verify_special_orthogonal, word_eval, word_eval_indices, Generator, GeneratorSet};
pub use matrix::RationalMatrix;
pub use rational::Rational5;
