//! Magnetic-dipole and electric-quadrupole hyperfine offsets.

use crate::angular::f_range;

fn casimir(f: f64, j: f64, i: f64) -> f64 {
    f * (f + 1.0) - i * (i + 1.0) - j * (j + 1.0)
}

/// Coefficient multiplying B; zero when J < 1 or I < 1 (no quadrupole moment).
fn quadrupole_factor(f: f64, j: f64, i: f64) -> f64 {
    if j < 1.0 || i < 1.0 {
        return 0.0;
    }
    let k = casimir(f, j, i);
    (1.5 * k * (k + 1.0) - 2.0 * i * (i + 1.0) * j * (j + 1.0))
        / (4.0 * i * (2.0 * i - 1.0) * j * (2.0 * j - 1.0))
}

/// Offset of level F from the manifold centroid, in the units of `a` and `b`.
pub fn hyperfine_offset(a: f64, b: f64, f: f64, j: f64, i: f64) -> f64 {
    0.5 * a * casimir(f, j, i) + b * quadrupole_factor(f, j, i)
}

/// Offsets for every F of the manifold, ascending in F.
pub fn manifold_offsets(a: f64, b: f64, j: f64, i: f64) -> Vec<(f64, f64)> {
    f_range(j, i).into_iter().map(|f| (f, hyperfine_offset(a, b, f, j, i))).collect()
}

/// Least-squares recovery of (A, B) from offsets `(F, E_F)`.
///
/// B is fixed to zero when the manifold carries no quadrupole term or only
/// one level is supplied.
pub fn fit_hyperfine_constants(levels: &[(f64, f64)], j: f64, i: f64) -> Option<(f64, f64)> {
    if levels.is_empty() {
        return None;
    }
    let rows: Vec<(f64, f64, f64)> = levels
        .iter()
        .map(|&(f, e)| (0.5 * casimir(f, j, i), quadrupole_factor(f, j, i), e))
        .collect();
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x1, x2, y) in &rows {
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        r1 += x1 * y;
        r2 += x2 * y;
    }
    if s11 == 0.0 {
        return None;
    }
    let det = s11 * s22 - s12 * s12;
    if s22 == 0.0 || det.abs() < 1e-12 * s11 * s22 {
        return Some((r1 / s11, 0.0));
    }
    Some(((r1 * s22 - r2 * s12) / det, (s11 * r2 - s12 * r1) / det))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cs_storage_manifold_offsets() {
        let offs = manifold_offsets(-21.24, 0.2, 2.5, 3.5);
        let expected = [239.06, 196.52, 132.74, 47.73, -58.46, -185.8];
        for ((_, e), x) in offs.iter().zip(expected) {
            assert!((e - x).abs() < 0.01, "{e} vs {x}");
        }
    }

    #[test]
    fn offsets_are_centroid_weighted_zero() {
        let (j, i) = (1.5, 3.5);
        let s: f64 = manifold_offsets(50.28827, -0.4934, j, i).iter().map(|(f, e)| (2.0 * f + 1.0) * e).sum();
        assert!(s.abs() < 1e-9);
    }

    #[test]
    fn dipole_only_when_j_half() {
        let (a, b) = fit_hyperfine_constants(&manifold_offsets(2298.1579425, 0.0, 0.5, 3.5), 0.5, 3.5).unwrap();
        assert!((a - 2298.1579425).abs() < 1e-9);
        assert_eq!(b, 0.0);
    }
}
