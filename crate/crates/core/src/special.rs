/// Euler's Gamma function, valid for negative non-integer arguments too.
///
/// Every Gamma evaluation in the crate goes through this function so the
/// coefficient checks and the manufactured forcing agree to the last bit.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}
