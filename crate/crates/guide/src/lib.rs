//! The book chapters, compiled so that their code blocks run as doc tests.

#[doc = include_str!("../../../book/src/introduction.md")]
mod chapter0 {}

#[doc = include_str!("../../../book/src/tensors.md")]
mod chapter1 {}

#[doc = include_str!("../../../book/src/proximal.md")]
mod chapter2 {}

#[doc = include_str!("../../../book/src/solver.md")]
mod chapter3 {}

#[doc = include_str!("../../../book/src/clustering.md")]
mod chapter4 {}

#[doc = include_str!("../../../book/src/experiments.md")]
mod chapter5 {}
