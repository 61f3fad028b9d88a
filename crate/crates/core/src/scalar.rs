use num_traits::Float;
use rand::Rng;

/// Floating scalar the numeric kernels are generic over.
///
/// `f64` is what the binaries use; `f32` is supported so the kernels stay
/// scalar-agnostic (exercised by a couple of smoke tests).
pub trait Scalar:
    Float
    + std::iter::Sum<Self>
    + std::iter::Product<Self>
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;

    fn from_usize_(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    /// Uniform draw from `[0, 1)`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn to_f64(self) -> f64;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen::<f64>()
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen::<f32>()
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}
