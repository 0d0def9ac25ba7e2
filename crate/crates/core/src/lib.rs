//! Centralized MSR array codes: construction, multi-node repair at the
//! cut-set bound, bandwidth auditing and a file-backed cluster simulator.

pub mod audit;
pub mod construction;
pub mod field;
pub mod grs;
pub mod hamming;
pub mod mixed_radix;
pub mod repair;
pub mod sim;

pub use construction::{CodeSpec, Codeword, Family, Pattern};
pub use field::PrimeField;
pub use repair::{RepairPlan, RepairTranscript};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/coordinates.md")]
    mod coordinates {}
    #[doc = include_str!("../../../book/src/constructions.md")]
    mod constructions {}
    #[doc = include_str!("../../../book/src/repair.md")]
    mod repair {}
    #[doc = include_str!("../../../book/src/audit.md")]
    mod audit {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
