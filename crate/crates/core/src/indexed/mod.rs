//! Lossless index encoding of coupling matrices and the MAC kernel that
//! works directly on the encoded form.
//!
//! A coupling matrix with `N_v` distinct values is stored as a sorted value
//! table plus one `max(1, ceil(log2 N_v))`-bit code per entry. For MIS-style
//! models (`N_v = 2`) that is 1/32 of the float32 footprint.

mod encoded;
mod mac;
mod table;

pub use encoded::{decode, encode, EncodedJ};
pub use mac::{indexed_mac_full, indexed_mac_row, FixedPointFormat, IndexedMac};
pub use table::{build_table, IndexedJTable};

use crate::error::Result;
use crate::ising::IsingModel;

/// Builds the table for `model`'s couplings and encodes them.
pub fn encode_model(model: &IsingModel) -> Result<EncodedJ> {
    let table = build_table(model.couplings())?;
    encode(model.couplings(), model.n(), &table)
}
