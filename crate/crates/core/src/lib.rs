//! A resource-aware π-calculus with leftover typing.
//!
//! Processes use de Bruijn indices ([`ast`]); channels carry input/output
//! multiplicities drawn from pluggable usage algebras ([`algebra`]); the
//! checker threads usage contexts through a derivation and returns what is
//! left over ([`checker`]). [`semantics`] gives reduction, and
//! [`metatheory`] turns the soundness results into derivation transformers.

pub mod algebra;
pub mod ast;
pub mod checker;
pub mod context;
pub mod metatheory;
pub mod semantics;
