//! Simulation and inversion toolkit for photo-acoustic imaging with
//! plasmonic nano-particle contrast agents.
//!
//! A small dispersive particle (radius `a`, Lorentz permittivity) sits at an
//! unknown point `z` inside a ball-shaped observation domain filled with a
//! host medium of unknown permittivity `eps0`. An incident time-harmonic
//! plane wave drives a plasmonic resonance of the particle; the absorbed
//! energy launches an acoustic pressure wave recorded by detectors on the
//! domain boundary. The crate provides:
//!
//! * the forward chain: particle spectral data -> dispersion roots ->
//!   resonant electric energy -> initial pressure -> boundary traces
//!   ([`spectral`], [`dispersion`], [`emfield`], [`acoustic`]);
//! * the inverse chain: arrival-time localization of `z`, a frequency sweep
//!   of the averaged-pressure indicator, peak/eigenvalue matching, and
//!   algebraic recovery of `eps0` ([`inversion`]);
//! * deterministic geometry and quadrature support shared by both
//!   ([`geometry`]).
//!
//! Units are normalized: acoustic speed 1, Grueneisen-type coupling 1, so the
//! initial pressure equals the absorbed electric energy density.

// Guards written as `!(x > y)` are deliberate: they fail closed when a
// computed quantity is NaN, which the superficially equivalent `x <= y`
// would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustic;
pub mod dispersion;
pub mod emfield;
pub mod geometry;
pub mod inversion;
pub mod spectral;
