//! Scalar abstractions shared by the analytic models and the simulator.
//!
//! The simulator is generic over [`Element`], the value type flowing through
//! the schedule. Integer elements use wrapping arithmetic modulo `2^w` like the
//! hardware does; floating-point elements use plain (unfused) multiply and add
//! so every execution order that visits `k` ascending is bit-identical.

use half::f16;
use num_traits::{Float, FromPrimitive, WrappingAdd, WrappingMul, Zero};
use rand::Rng;
use std::fmt::Debug;

/// Floating-point type usable for time and bandwidth figures.
pub trait Real: Float + FromPrimitive + Debug + Send + Sync {}
impl Real for f32 {}
impl Real for f64 {}

/// Element encoding code used in matrix files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u32)]
pub enum DTypeCode {
    U8 = 1,
    U16 = 2,
    U32 = 3,
    U64 = 4,
    F16 = 10,
    F32 = 11,
    F64 = 12,
}

impl DTypeCode {
    pub fn from_u32(code: u32) -> Option<Self> {
        Some(match code {
            1 => Self::U8,
            2 => Self::U16,
            3 => Self::U32,
            4 => Self::U64,
            10 => Self::F16,
            11 => Self::F32,
            12 => Self::F64,
            _ => return None,
        })
    }

    pub fn width_bits(self) -> u32 {
        match self {
            Self::U8 => 8,
            Self::U16 | Self::F16 => 16,
            Self::U32 | Self::F32 => 32,
            Self::U64 | Self::F64 => 64,
        }
    }

    pub fn is_float(self) -> bool {
        matches!(self, Self::F16 | Self::F32 | Self::F64)
    }

    /// Maps a data-type description onto the native element it simulates as.
    pub fn for_type(is_float: bool, width_bits: u32) -> Option<Self> {
        Some(match (is_float, width_bits) {
            (false, 8) => Self::U8,
            (false, 16) => Self::U16,
            (false, 32) => Self::U32,
            (false, 64) => Self::U64,
            (true, 16) => Self::F16,
            (true, 32) => Self::F32,
            (true, 64) => Self::F64,
            _ => return None,
        })
    }
}

pub trait Element: Copy + Default + PartialEq + Debug + Send + Sync + 'static {
    const DTYPE: DTypeCode;
    /// Mantissa bits including the implicit one; zero for integers.
    const MANTISSA_BITS: u32;

    fn zero() -> Self;
    /// `acc + a * b` with the data type's hardware semantics.
    fn mul_add(acc: Self, a: Self, b: Self) -> Self;
    /// Draws a value from the documented generator distribution: the full
    /// range for integers, uniform in `[-1, 1)` for floats.
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self;
    fn to_f64(self) -> f64;
    fn write_le(self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;
}

macro_rules! impl_int_element {
    ($t:ty, $code:ident) => {
        impl Element for $t {
            const DTYPE: DTypeCode = DTypeCode::$code;
            const MANTISSA_BITS: u32 = 0;

            fn zero() -> Self {
                <$t as Zero>::zero()
            }
            fn mul_add(acc: Self, a: Self, b: Self) -> Self {
                WrappingAdd::wrapping_add(&acc, &WrappingMul::wrapping_mul(&a, &b))
            }
            fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.gen::<$t>()
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
            fn write_le(self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }
            fn read_le(bytes: &[u8]) -> Self {
                <$t>::from_le_bytes(bytes.try_into().expect("element byte width"))
            }
        }
    };
}

impl_int_element!(u8, U8);
impl_int_element!(u16, U16);
impl_int_element!(u32, U32);
impl_int_element!(u64, U64);

macro_rules! impl_float_element {
    ($t:ty, $code:ident, $mant:expr) => {
        impl Element for $t {
            const DTYPE: DTypeCode = DTypeCode::$code;
            const MANTISSA_BITS: u32 = $mant;

            fn zero() -> Self {
                0.0
            }
            fn mul_add(acc: Self, a: Self, b: Self) -> Self {
                acc + a * b
            }
            fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.gen_range(-1.0..1.0)
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
            fn write_le(self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }
            fn read_le(bytes: &[u8]) -> Self {
                <$t>::from_le_bytes(bytes.try_into().expect("element byte width"))
            }
        }
    };
}

impl_float_element!(f32, F32, 24);
impl_float_element!(f64, F64, 53);

impl Element for f16 {
    const DTYPE: DTypeCode = DTypeCode::F16;
    const MANTISSA_BITS: u32 = 11;

    fn zero() -> Self {
        f16::ZERO
    }
    fn mul_add(acc: Self, a: Self, b: Self) -> Self {
        acc + a * b
    }
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        f16::from_f32(rng.gen_range(-1.0f32..1.0))
    }
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f16::from_le_bytes(bytes.try_into().expect("element byte width"))
    }
}

/// Elementwise relative error, with the denominator floored at one ulp-scale
/// value so exact zeros compare cleanly.
pub fn relative_error<T: Element>(got: T, want: T) -> f64 {
    let (g, w) = (got.to_f64(), want.to_f64());
    if g == w {
        return 0.0;
    }
    (g - w).abs() / w.abs().max(f64::MIN_POSITIVE)
}

/// Relative-error bound for float accumulation over `k` terms:
/// `2^(4 - mantissa_bits) * k`.
pub fn float_tolerance<T: Element>(k: u64) -> f64 {
    if T::MANTISSA_BITS == 0 {
        0.0
    } else {
        2f64.powi(4 - T::MANTISSA_BITS as i32) * k as f64
    }
}
