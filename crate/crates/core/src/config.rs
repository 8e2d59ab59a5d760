/// Enumeration limits. Exceeding one is reported as [`crate::Error::CapExceeded`],
/// never silently truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Largest space whose opens may be enumerated.
    pub opens: usize,
    /// Largest base space accepted by the monad multiplication.
    pub mu: usize,
    /// Largest number of maps enumerated when building an exponential.
    pub maps: usize,
    /// Largest number of affine branches on one piece of a real envelope.
    pub branches: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            opens: 16,
            mu: 8,
            maps: 4096,
            branches: 64,
        }
    }
}
