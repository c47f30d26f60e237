//! Non-binary protograph LDPC codes over Z_p.
//!
//! A small base matrix of edge multiplicities describes the code family; a
//! circulant lift expands it to working blocklengths. The repeat-accumulate
//! family and its irregular variant come with linear-time encoders; decoding
//! is symbol-level sum-product belief propagation; thresholds come from an
//! EXIT-chart analysis of the protograph.

mod base;
mod decode;
mod exit;
mod io;
mod lift;

pub use base::{check_merge, ira_base, merge_rows, ra_base, replicate, BaseMatrix, LdpcError};
pub use decode::{bp_decode, bp_posteriors, BpDecoder, DecodeOutcome};
pub use exit::{channel_information, exit_converges, exit_threshold, j_function, unit_scheme_family};
pub use io::{base_from_text, base_to_text, code_from_text, code_to_text};
pub use lift::{lift, LiftedCode};
