//! Scalar type for edge lengths.
//!
//! Every algorithm in this crate compares lengths against powers of two and
//! against small integer multiples of other lengths, so lengths are exact
//! unsigned integers. Any primitive unsigned integer works; the crate root
//! exports `u64` aliases for everyday use.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigUint;
use num_traits::{PrimInt, Unsigned};

/// An exact, non-negative edge length.
pub trait Length: PrimInt + Unsigned + Hash + Debug + Display + Default + Send + Sync + 'static {
    /// Number of value bits in the representation.
    const BITS: u32;

    /// Widen to `u128` for bound arithmetic.
    fn widen(self) -> u128 {
        self.to_u128().expect("unsigned lengths always fit in u128")
    }

    fn to_big(self) -> BigUint {
        BigUint::from(self.widen())
    }

    /// `⌈log₂ self⌉`, with `0` for lengths `0` and `1`.
    fn ceil_log2(self) -> u32 {
        if self <= Self::one() {
            0
        } else {
            Self::BITS - (self - Self::one()).leading_zeros()
        }
    }

    /// `self ≤ 2^exp`, without overflowing for large exponents.
    fn within_pow2(self, exp: u32) -> bool {
        exp >= Self::BITS || self <= Self::one() << exp as usize
    }
}

macro_rules! impl_length {
    ($($t:ty),*) => {
        $(impl Length for $t {
            const BITS: u32 = <$t>::BITS;
        })*
    };
}

impl_length!(u8, u16, u32, u64, u128, usize);
