use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_integer::{Integer, Roots};
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Exact integer type the library is generic over: `i64`, `i128` and
/// `BigInt` all qualify.
///
/// Fixed-width types are fast but overflow silently once products of
/// discriminant coordinates exceed their range (around `t ≈ 3·10⁴` for
/// `i64`); `BigInt` never does and is what the crate-root aliases use.
pub trait Scalar:
    Integer
    + Signed
    + Roots
    + Clone
    + Hash
    + Debug
    + Display
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Integer
        + Signed
        + Roots
        + Clone
        + Hash
        + Debug
        + Display
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Lifts a small machine integer into `T`.
#[inline]
pub fn int<T: Scalar>(n: i64) -> T {
    T::from_i64(n).expect("every scalar type holds i64 values")
}

/// Saturating conversion to `u64`, used only for comparisons against caps.
pub(crate) fn to_u64_sat<T: Scalar>(n: &T) -> u64 {
    n.to_u64().unwrap_or(u64::MAX)
}
