use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};

/// Element type of a point cloud: f32 or f64.
///
/// Distances are always accumulated in f64, so every scalar widens losslessly.
pub trait Scalar: Float + FromPrimitive + Debug + Send + Sync + 'static {
    /// NPY type descriptor for little-endian storage of this type.
    const DESCR: &'static str;

    fn widen(self) -> f64;

    fn narrow(value: f64) -> Self;

    fn to_le_bytes_vec(self) -> Vec<u8>;
}

impl Scalar for f32 {
    const DESCR: &'static str = "<f4";

    #[inline]
    fn widen(self) -> f64 {
        f64::from(self)
    }

    #[inline]
    fn narrow(value: f64) -> Self {
        value as f32
    }

    fn to_le_bytes_vec(self) -> Vec<u8> {
        self.to_le_bytes().to_vec()
    }
}

impl Scalar for f64 {
    const DESCR: &'static str = "<f8";

    #[inline]
    fn widen(self) -> f64 {
        self
    }

    #[inline]
    fn narrow(value: f64) -> Self {
        value
    }

    fn to_le_bytes_vec(self) -> Vec<u8> {
        self.to_le_bytes().to_vec()
    }
}
