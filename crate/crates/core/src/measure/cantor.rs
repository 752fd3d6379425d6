//! The ternary Cantor function and its depth-m atomic approximation.

/// Maximum supported approximation depth (2^24 atoms).
pub const MAX_DEPTH: u32 = 24;

/// The Cantor function `c` on `[0, 1]`, extended by 0 to the left and 1 to the right.
pub fn cantor_function(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let mut x = x;
    let mut value = 0.0;
    let mut scale = 0.5;
    for _ in 0..64 {
        x *= 3.0;
        let digit = x.floor();
        x -= digit;
        if digit == 1.0 {
            return value + scale;
        }
        if digit == 2.0 {
            value += scale;
        }
        scale *= 0.5;
    }
    value
}

/// Midpoints of the `2^depth` intervals of length `3^{-depth}` that remain
/// after `depth` middle-third removals, in increasing order.
pub fn cantor_midpoints(depth: u32) -> Vec<f64> {
    assert!(depth <= MAX_DEPTH, "Cantor depth {depth} exceeds {MAX_DEPTH}");
    let mut lefts = vec![0.0f64];
    let mut len = 1.0f64;
    for _ in 0..depth {
        len /= 3.0;
        let mut next = Vec::with_capacity(lefts.len() * 2);
        for &a in &lefts {
            next.push(a);
            next.push(a + 2.0 * len);
        }
        lefts = next;
    }
    lefts.into_iter().map(|a| a + 0.5 * len).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cantor_function_values() {
        assert_eq!(cantor_function(0.0), 0.0);
        assert_eq!(cantor_function(1.0), 1.0);
        assert_eq!(cantor_function(0.5), 0.5);
        assert_abs_diff_eq!(cantor_function(1.0 / 3.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cantor_function(0.25), 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cantor_function(0.75), 2.0 / 3.0, epsilon = 1e-12);
        let mut prev = 0.0;
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let c = cantor_function(x);
            assert!(c >= prev);
            // c is only (log 2 / log 3)-Hölder, so rounding in 1 - x shows up near 1e-10
            assert_abs_diff_eq!(c + cantor_function(1.0 - x), 1.0, epsilon = 1e-9);
            prev = c;
        }
    }

    #[test]
    fn midpoints_are_symmetric_and_sorted() {
        let m = cantor_midpoints(5);
        assert_eq!(m.len(), 32);
        assert!(m.windows(2).all(|w| w[1] > w[0]));
        for (a, b) in m.iter().zip(m.iter().rev()) {
            assert_abs_diff_eq!(a + b, 1.0, epsilon = 1e-14);
        }
        // each midpoint splits the Cantor mass evenly
        let step = 1.0 / 32.0;
        for (i, x) in m.iter().enumerate() {
            assert_abs_diff_eq!(cantor_function(*x), (i as f64 + 0.5) * step, epsilon = 1e-12);
        }
    }
}
