//! Scalar abstraction for the numeric core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;

/// Floating-point scalar every numeric routine is generic over.
///
/// Implemented for `f32` and `f64`. Experiments and the CLI use `f64`
/// (see the aliases at the crate root); `f32` is available for callers
/// that trade precision for footprint.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant, panicking only on non-finite input.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    /// Lossy view as `f64` for formatting and export.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    /// One standard normal draw (Box-Muller over two uniforms).
    fn standard_normal<G: Rng + ?Sized>(rng: &mut G) -> Self {
        // 1 - u in (0, 1] keeps the log argument positive.
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        Self::of((-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos())
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ceiling that first snaps values within a relative `1e-9` of an integer
/// onto it, so quantities that are integers in exact arithmetic (`2·exp(ln 2)`
/// and friends) do not get bumped a whole step by floating-point residue.
pub fn ceil_with_snap(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() <= nearest.abs().max(1.0) * 1e-9 {
        nearest
    } else {
        x.ceil()
    }
}
