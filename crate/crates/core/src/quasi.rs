//! Halton low-discrepancy sequence.

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131,
];

pub const MAX_DIM: usize = PRIMES.len();

fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let base = u64::from(base);
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while index > 0 {
        acc += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    acc
}

/// The `index`-th Halton point in `[0, 1)^dim`. Index 0 is skipped so the
/// first point is not the corner.
///
/// # Panics
/// If `dim > MAX_DIM`.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= MAX_DIM, "Halton sequence supports at most {MAX_DIM} dimensions");
    PRIMES[..dim].iter().map(|&p| radical_inverse(index + 1, p)).collect()
}

/// Maps the `index`-th Halton point into a box given as `(lo, hi)` per axis.
pub fn halton_in_box(index: u64, bounds: &[(f64, f64)]) -> Vec<f64> {
    halton(index, bounds.len()).into_iter().zip(bounds).map(|(u, &(lo, hi))| lo + u * (hi - lo)).collect()
}

/// The `index`-th point of a quasi-uniform cover of the closed ball of
/// radius `radius` in `dim` dimensions, by rejection from the enclosing cube.
/// Index 0 is always the center.
pub fn halton_in_ball(index: u64, center: &[f64], radius: f64) -> Vec<f64> {
    if index == 0 || radius == 0.0 {
        return center.to_vec();
    }
    let dim = center.len();
    let mut k = index - 1;
    let mut seen = 0u64;
    loop {
        let u: Vec<f64> = halton(k, dim).iter().map(|v| 2.0 * v - 1.0).collect();
        if u.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            if seen == index - 1 {
                return center.iter().zip(&u).map(|(c, v)| c + radius * v).collect();
            }
            seen += 1;
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_points() {
        assert_eq!(halton(0, 2), vec![0.5, 1.0 / 3.0]);
        assert_eq!(halton(1, 2), vec![0.25, 2.0 / 3.0]);
        assert_eq!(halton(2, 1), vec![0.75]);
    }

    #[test]
    fn ball_points_stay_inside() {
        let c = [1.0, -2.0, 0.5];
        assert_eq!(halton_in_ball(0, &c, 0.1), c.to_vec());
        for i in 1..200 {
            let p = halton_in_ball(i, &c, 0.1);
            let r: f64 = p.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(r <= 0.1 + 1e-15);
        }
    }
}
