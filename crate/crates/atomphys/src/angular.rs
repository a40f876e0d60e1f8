//! Wigner 3j/6j symbols and hyperfine-resolved dipole factors.
//!
//! Angular momenta are passed as `f64` and converted to doubled integers
//! internally, so half-integer values are exact.

use std::sync::OnceLock;

const MAX_FACTORIAL: usize = 120;

fn factorials() -> &'static [f64; MAX_FACTORIAL + 1] {
    static TABLE: OnceLock<[f64; MAX_FACTORIAL + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; MAX_FACTORIAL + 1];
        for k in 1..=MAX_FACTORIAL {
            t[k] = t[k - 1] * k as f64;
        }
        t
    })
}

/// Factorial of a doubled argument; `None` when the argument is negative or odd.
fn fact2(twice_n: i32) -> Option<f64> {
    if twice_n < 0 || twice_n % 2 != 0 {
        return None;
    }
    factorials().get((twice_n / 2) as usize).copied()
}

/// Doubles an angular momentum, rejecting anything that is not a multiple of 1/2.
pub fn twice(j: f64) -> Option<i32> {
    let t = (2.0 * j).round();
    if (2.0 * j - t).abs() > 1e-9 {
        None
    } else {
        Some(t as i32)
    }
}

fn is_triad(a: i32, b: i32, c: i32) -> bool {
    a >= 0 && b >= 0 && c >= 0 && (a + b + c) % 2 == 0 && c <= a + b && c >= (a - b).abs()
}

fn triangle(a: i32, b: i32, c: i32) -> f64 {
    let num = fact2(a + b - c).unwrap() * fact2(a - b + c).unwrap() * fact2(-a + b + c).unwrap();
    (num / fact2(a + b + c + 2).unwrap()).sqrt()
}

fn sign(twice_exp: i32) -> f64 {
    debug_assert!(twice_exp % 2 == 0);
    if (twice_exp / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3) in doubled-integer arguments.
pub fn wigner_3j_twice(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0 || !is_triad(j1, j2, j3) {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j3 + m3) % 2 != 0 {
        return 0.0;
    }
    let pre = triangle(j1, j2, j3)
        * (fact2(j1 + m1).unwrap()
            * fact2(j1 - m1).unwrap()
            * fact2(j2 + m2).unwrap()
            * fact2(j2 - m2).unwrap()
            * fact2(j3 + m3).unwrap()
            * fact2(j3 - m3).unwrap())
        .sqrt();
    let kmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let kmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    let mut k = kmin;
    while k <= kmax {
        let den = fact2(k).unwrap()
            * fact2(j1 + j2 - j3 - k).unwrap()
            * fact2(j1 - m1 - k).unwrap()
            * fact2(j2 + m2 - k).unwrap()
            * fact2(j3 - j2 + m1 + k).unwrap()
            * fact2(j3 - j1 - m2 + k).unwrap();
        sum += sign(k) / den;
        k += 2;
    }
    sign(j1 - j2 - m3) * pre * sum
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6} in doubled-integer arguments (Racah formula).
pub fn wigner_6j_twice(j1: i32, j2: i32, j3: i32, j4: i32, j5: i32, j6: i32) -> f64 {
    if !is_triad(j1, j2, j3) || !is_triad(j1, j5, j6) || !is_triad(j4, j2, j6) || !is_triad(j4, j5, j3) {
        return 0.0;
    }
    let pre = triangle(j1, j2, j3) * triangle(j1, j5, j6) * triangle(j4, j2, j6) * triangle(j4, j5, j3);
    let a1 = j1 + j2 + j3;
    let a2 = j1 + j5 + j6;
    let a3 = j4 + j2 + j6;
    let a4 = j4 + j5 + j3;
    let b1 = j1 + j2 + j4 + j5;
    let b2 = j2 + j3 + j5 + j6;
    let b3 = j3 + j1 + j6 + j4;
    let tmin = a1.max(a2).max(a3).max(a4);
    let tmax = b1.min(b2).min(b3);
    let mut sum = 0.0;
    let mut t = tmin;
    while t <= tmax {
        let den = fact2(t - a1).unwrap()
            * fact2(t - a2).unwrap()
            * fact2(t - a3).unwrap()
            * fact2(t - a4).unwrap()
            * fact2(b1 - t).unwrap()
            * fact2(b2 - t).unwrap()
            * fact2(b3 - t).unwrap();
        sum += sign(t) * fact2(t + 2).unwrap() / den;
        t += 2;
    }
    pre * sum
}

/// Wigner 3j symbol; zero for any invalid combination.
pub fn wigner_3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> f64 {
    match (twice(j1), twice(j2), twice(j3), twice(m1), twice(m2), twice(m3)) {
        (Some(a), Some(b), Some(c), Some(d), Some(e), Some(f)) => wigner_3j_twice(a, b, c, d, e, f),
        _ => 0.0,
    }
}

/// Wigner 6j symbol; zero for any invalid combination.
pub fn wigner_6j(j1: f64, j2: f64, j3: f64, j4: f64, j5: f64, j6: f64) -> f64 {
    match (twice(j1), twice(j2), twice(j3), twice(j4), twice(j5), twice(j6)) {
        (Some(a), Some(b), Some(c), Some(d), Some(e), Some(f)) => wigner_6j_twice(a, b, c, d, e, f),
        _ => 0.0,
    }
}

/// Clebsch-Gordan coefficient ⟨j1 m1; j2 m2 | J M⟩.
pub fn clebsch_gordan(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> f64 {
    let Some(e) = twice(j1 - j2 + m) else { return 0.0 };
    sign(e) * (2.0 * j + 1.0).sqrt() * wigner_3j(j1, j2, j, m1, m2, -m)
}

/// Signed hyperfine amplitude w with w² the relative line strength S_FF'.
///
/// Normalised so that Σ_F' w² = 1 for fixed lower F. Returns 0 for
/// dipole-forbidden pairs (|ΔF| > 1, F = 0 → 0, or invalid couplings).
pub fn relative_line_strength(f_lower: f64, f_upper: f64, j_lower: f64, j_upper: f64, i: f64) -> f64 {
    if (f_lower - f_upper).abs() > 1.0 + 1e-9 || (f_lower == 0.0 && f_upper == 0.0) {
        return 0.0;
    }
    let Some(e) = twice(f_upper + j_lower + 1.0 + i) else { return 0.0 };
    sign(e)
        * ((2.0 * f_upper + 1.0) * (2.0 * j_lower + 1.0)).sqrt()
        * wigner_6j(j_lower, j_upper, 1.0, f_upper, f_lower, i)
}

/// Matrix element ⟨F_l m_l| d_q |F_u m_u⟩ in units of the lower-J-normalised
/// reduced dipole.
///
/// Summed over F_u, m_u and q the squares give 1 for every lower sublevel.
#[allow(clippy::too_many_arguments)]
pub fn dipole_component(
    j_lower: f64,
    j_upper: f64,
    i: f64,
    f_lower: f64,
    m_lower: f64,
    f_upper: f64,
    m_upper: f64,
    q: i32,
) -> f64 {
    let Some(e1) = twice(f_lower - m_lower) else { return 0.0 };
    let Some(e2) = twice(j_lower + i + f_upper + 1.0) else { return 0.0 };
    (2.0 * j_lower + 1.0).sqrt()
        * sign(e1)
        * wigner_3j(f_lower, 1.0, f_upper, -m_lower, q as f64, m_upper)
        * sign(e2)
        * ((2.0 * f_lower + 1.0) * (2.0 * f_upper + 1.0)).sqrt()
        * wigner_6j(j_lower, f_lower, i, f_upper, j_upper, 1.0)
}

/// Absorption amplitude for light of spherical component `q` promoting
/// (F_l, m) to (F_u, m + q). Zero when the target sublevel does not exist.
pub fn absorption_amplitude(j_lower: f64, j_upper: f64, i: f64, f_lower: f64, m: f64, f_upper: f64, q: i32) -> f64 {
    let m_upper = m + q as f64;
    if m_upper.abs() > f_upper + 1e-9 {
        return 0.0;
    }
    dipole_component(j_lower, j_upper, i, f_lower, m, f_upper, m_upper, -q)
}

/// Allowed F values for coupling J and I.
pub fn f_range(j: f64, i: f64) -> Vec<f64> {
    let lo = (j - i).abs();
    let n = ((j + i - lo).round() as usize) + 1;
    (0..n).map(|k| lo + k as f64).collect()
}
