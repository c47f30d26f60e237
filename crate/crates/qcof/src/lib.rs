//! Quantized compute-and-forward over prime fields.
//!
//! Relays in a Gaussian network observe superpositions of lattice-coded
//! transmissions. Instead of decoding individual messages, each relay scales
//! its observation, quantizes it to the coding lattice, and decodes an integer
//! linear combination of the transmitted codewords. The combination travels
//! over the equivalent discrete channel
//!
//! ```text
//! u = q_1 c_1 + ... + q_L c_L + z   (over Z_p)
//! ```
//!
//! whose noise term `z` captures both the receiver noise and the
//! self-interference left by approximating real channel gains with integers.
//!
//! The crate implements the full pipeline:
//!
//! * [`field`] - arithmetic and linear algebra over Z_p,
//! * [`lattice`] - the scaled-integer constellation, its modulation map, and
//!   dithered transmission,
//! * [`channel`] - the equivalent discrete channel seen after quantization,
//!   with exact and Gaussian-approximated noise distributions,
//! * [`coeffopt`] - search for the integer coefficient vector that maximizes
//!   the computation rate (lattice reduction plus enumeration),
//! * [`rate`] - achievable-rate formulas for quantized and unquantized
//!   compute-and-forward,
//! * [`ldpc`] - non-binary protograph LDPC codes (repeat-accumulate families),
//!   belief-propagation decoding, and EXIT-chart threshold analysis,
//! * [`wyner`] - an end-to-end simulation of a linear cellular array where
//!   relays forward decoded combinations to a central decoder.
//!
//! The `qcof` binary exposes the same functionality as a command line tool;
//! see [`cli`]. Runnable walkthroughs live in the `examples/` directory.

pub mod channel;
pub mod cli;
pub mod coeffopt;
pub mod field;
pub mod lattice;
pub mod ldpc;
pub mod rate;
pub mod selftest;
pub mod wyner;
