//! Quadrature primitives: Gauss-Legendre rules, exact power-law integrals
//! over boxes and balls, and deterministic sphere samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::params::unit_sphere_area;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                // Legendre recurrence
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = nf * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int_a^b f`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

/// Shared rule with `n <= 64` nodes.
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static RULES: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (1..=64).map(GaussLegendre::new).collect());
    &rules[n.clamp(1, 64) - 1]
}

const FACE_NODES: usize = 16;

/// `int_{prod [0, a_k]} |z|^alpha dz` for `alpha > -N`.
///
/// The box is split into cones from the origin over its far faces; each face
/// integral uses the substitution `q = a_i sinh(u)` which removes the peak of
/// the integrand near the face foot point.
pub fn corner_box_power_integral(lengths: &[f64], alpha: f64) -> f64 {
    let dim = lengths.len();
    debug_assert!(alpha > -(dim as f64));
    if lengths.iter().any(|&a| a <= 0.0) {
        return 0.0;
    }
    let beta = alpha + dim as f64;
    let rule = gauss_legendre(FACE_NODES);
    let mut total = 0.0;
    for i in 0..dim {
        let a = lengths[i];
        let others: Vec<f64> = (0..dim).filter(|&j| j != i).map(|j| lengths[j]).collect();
        let face = face_integral(a, &others, alpha, rule);
        total += a * face / beta;
    }
    total
}

// int_{prod [0, b_j]} (a^2 + |q|^2)^{alpha/2} dq
fn face_integral(a: f64, extents: &[f64], alpha: f64, rule: &GaussLegendre) -> f64 {
    let m = extents.len();
    if m == 0 {
        return a.powf(alpha);
    }
    let upper: Vec<f64> = extents.iter().map(|&b| (b / a).asinh()).collect();
    let n = rule.len();
    let total_nodes = n.pow(m as u32);
    let mut acc = 0.0;
    let mut idx = vec![0usize; m];
    for flat in 0..total_nodes {
        let mut rem = flat;
        for k in (0..m).rev() {
            idx[k] = rem % n;
            rem /= n;
        }
        let mut sum_sq = 1.0;
        let mut weight = 1.0;
        for k in 0..m {
            let half = 0.5 * upper[k];
            let u = half * (1.0 + rule.nodes[idx[k]]);
            let sh = u.sinh();
            sum_sq += sh * sh;
            weight *= rule.weights[idx[k]] * half * u.cosh();
        }
        acc += weight * sum_sq.powf(0.5 * alpha);
    }
    acc * a.powf(alpha + m as f64)
}

/// `int_{box} |z - apex|^alpha dz` for an axis-aligned box `[lo, hi]` and
/// any apex, `alpha > -N`.
pub fn box_power_integral(lo: &[f64], hi: &[f64], apex: &[f64], alpha: f64) -> f64 {
    let dim = lo.len();
    // per axis: signed list of half-open corner intervals [0, len]
    let mut pieces: Vec<Vec<(f64, f64)>> = Vec::with_capacity(dim);
    for k in 0..dim {
        let a = lo[k] - apex[k];
        let b = hi[k] - apex[k];
        let axis = if a >= 0.0 {
            vec![(b, 1.0), (a, -1.0)]
        } else if b <= 0.0 {
            vec![(-a, 1.0), (-b, -1.0)]
        } else {
            vec![(b, 1.0), (-a, 1.0)]
        };
        pieces.push(axis);
    }
    let combos = 1usize << dim;
    let mut total = 0.0;
    let mut lengths = vec![0.0; dim];
    for c in 0..combos {
        let mut sign = 1.0;
        let mut degenerate = false;
        for k in 0..dim {
            let (len, sg) = pieces[k][(c >> k) & 1];
            if len <= 0.0 {
                degenerate = true;
                break;
            }
            lengths[k] = len;
            sign *= sg;
        }
        if !degenerate {
            total += sign * corner_box_power_integral(&lengths, alpha);
        }
    }
    total
}

/// `int_{[-a, a]^N} |z|^alpha dz`.
pub fn centered_cube_power_integral(dim: usize, half_side: f64, alpha: f64) -> f64 {
    let lengths = vec![half_side; dim];
    (1u64 << dim) as f64 * corner_box_power_integral(&lengths, alpha)
}

/// `int_{R^N \ [-a, a]^N} |z|^alpha dz` for `alpha < -N`.
pub fn cube_exterior_power_integral(dim: usize, half_side: f64, alpha: f64) -> f64 {
    // cones from the origin through each face, extended to infinity:
    // 2N faces * (a / (-(alpha + N))) * face integral
    let beta = alpha + dim as f64;
    debug_assert!(beta < 0.0);
    let rule = gauss_legendre(FACE_NODES);
    let others = vec![half_side; dim - 1];
    let quarter = face_integral(half_side, &others, alpha, rule);
    let face = quarter * (1u64 << (dim - 1)) as f64;
    2.0 * dim as f64 * half_side * face / (-beta)
}

/// `int_{B(center, radius)} |x - y|^alpha dy` for `alpha > -N`, by reduction
/// to a one-dimensional integral over the polar angle about the axis through
/// `x` and the center.
pub fn ball_power_integral(center: &[f64], radius: f64, x: &[f64], alpha: f64) -> f64 {
    let dim = center.len();
    let beta = alpha + dim as f64;
    let d = crate::grid::distance(x, center);
    let axis_area = unit_sphere_area(dim - 1);
    let rule = gauss_legendre(32);
    let sin_pow = |phi: f64| phi.sin().powi(dim as i32 - 2);
    if d < 1e-14 * radius {
        return unit_sphere_area(dim) * radius.powf(beta) / beta;
    }
    let panels = 16;
    if d < radius {
        let mut acc = 0.0;
        for p in 0..panels {
            let a = PI * p as f64 / panels as f64;
            let b = PI * (p + 1) as f64 / panels as f64;
            acc += rule.integrate(a, b, |phi| {
                let (s, c) = phi.sin_cos();
                let far = d * c + (radius * radius - d * d * s * s).max(0.0).sqrt();
                far.powf(beta) / beta * sin_pow(phi)
            });
        }
        axis_area * acc
    } else {
        let phi_max = (radius / d).min(1.0).asin();
        // substitution phi = phi_max * (1 - t^2) removes the square-root edge
        let mut acc = 0.0;
        for p in 0..panels {
            let a = p as f64 / panels as f64;
            let b = (p + 1) as f64 / panels as f64;
            acc += rule.integrate(a, b, |t| {
                let phi = phi_max * (1.0 - t * t);
                let (s, c) = phi.sin_cos();
                let root = (radius * radius - d * d * s * s).max(0.0).sqrt();
                let near = d * c - root;
                let far = d * c + root;
                let radial = (far.powf(beta) - near.max(0.0).powf(beta)) / beta;
                radial * sin_pow(phi) * 2.0 * phi_max * t
            });
        }
        axis_area * acc
    }
}

/// `count` deterministic, well-spread unit vectors in `R^dim`.
pub fn sphere_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match dim {
        2 => {
            let offset: f64 = rng.gen();
            (0..count)
                .map(|k| {
                    let t = 2.0 * PI * (k as f64 + offset) / count as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect()
        }
        3 => {
            // Fibonacci lattice with a seeded azimuthal offset
            let golden = PI * (3.0 - 5f64.sqrt());
            let offset: f64 = rng.gen::<f64>() * 2.0 * PI;
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * k as f64 + offset;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => (0..count)
            .map(|_| {
                let mut v: Vec<f64> = (0..dim).map(|_| standard_normal(&mut rng)).collect();
                let n = crate::grid::norm(&v);
                v.iter_mut().for_each(|c| *c /= n);
                v
            })
            .collect(),
    }
}

pub(crate) fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 16, 33] {
            let r = GaussLegendre::new(n);
            let wsum: f64 = r.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((r.integrate(-1.0, 1.0, |x| x.powi(deg as i32)) - exact).abs() < 1e-13);
            let even = 2 * n - 2;
            let exact = 2.0 / (even as f64 + 1.0);
            assert!((r.integrate(-1.0, 1.0, |x| x.powi(even as i32)) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn box_integral_of_constant_is_volume() {
        let v = box_power_integral(&[0.2, -1.0, 0.5], &[1.0, 0.5, 0.7], &[0.3, 0.0, 0.6], 0.0);
        assert!((v - 0.8 * 1.5 * 0.2).abs() < 1e-12, "{v}");
        let v = box_power_integral(&[0.2, -1.0], &[1.0, 0.5], &[5.0, 5.0], 0.0);
        assert!((v - 0.8 * 1.5).abs() < 1e-12, "{v}");
    }

    #[test]
    fn centered_square_matches_polar_oracle() {
        // 8 * int_0^{pi/4} sec^{alpha+2}(t) / (alpha + 2) dt, independent route
        let polar = |alpha: f64| {
            let r = GaussLegendre::new(40);
            8.0 * r.integrate(0.0, PI / 4.0, |t| (1.0 / t.cos()).powf(alpha + 2.0)) / (alpha + 2.0)
        };
        for alpha in [-1.5, -0.5, 0.3, 1.0] {
            let cube = centered_cube_power_integral(2, 1.0, alpha);
            assert!((cube - polar(alpha)).abs() < 1e-11 * polar(alpha).abs(), "{alpha}");
        }
    }

    #[test]
    fn box_integral_homogeneity_and_off_center_apex() {
        let alpha = -1.2;
        let a = box_power_integral(&[-0.3, 0.1, -0.2], &[0.4, 0.5, 0.3], &[0.0, 0.0, 0.0], alpha);
        let b = box_power_integral(&[-0.6, 0.2, -0.4], &[0.8, 1.0, 0.6], &[0.0, 0.0, 0.0], alpha);
        assert!((b - 2f64.powf(3.0 + alpha) * a).abs() < 1e-11 * b);
        // tensor-product midpoint oracle on a far box (smooth integrand)
        let lo = [2.0, 1.0];
        let hi = [2.5, 1.75];
        let exact = box_power_integral(&lo, &hi, &[0.0, 0.0], -1.5);
        let n = 400;
        let mut mid = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = lo[0] + (i as f64 + 0.5) * 0.5 / n as f64;
                let y = lo[1] + (j as f64 + 0.5) * 0.75 / n as f64;
                mid += (x * x + y * y).powf(-0.75);
            }
        }
        mid *= 0.5 * 0.75 / (n * n) as f64;
        assert!((exact - mid).abs() < 1e-7, "{exact} vs {mid}");
    }

    #[test]
    fn cube_exterior_matches_radial_bound() {
        // exterior of [-1,1]^2 lies between exterior of the circumscribed
        // and inscribed disks
        let alpha = -3.5;
        let ext = cube_exterior_power_integral(2, 1.0, alpha);
        let disk = |r: f64| 2.0 * PI * r.powf(alpha + 2.0) / (-(alpha + 2.0));
        assert!(ext < disk(1.0) && ext > disk(2f64.sqrt()));
        // exterior(1) - exterior(2) is the square annulus
        let e2 = cube_exterior_power_integral(2, 2.0, alpha);
        let rule = GaussLegendre::new(48);
        let strip = |x0: f64, x1: f64, y0: f64, y1: f64| {
            rule.integrate(x0, x1, |x| {
                rule.integrate(y0, y1, |y| (x * x + y * y).powf(0.5 * alpha))
            })
        };
        let annulus = 4.0 * (strip(1.0, 2.0, 0.0, 1.0) + strip(1.0, 2.0, 1.0, 2.0))
            + 4.0 * strip(0.0, 1.0, 1.0, 2.0);
        assert!(((ext - e2) - annulus).abs() < 1e-10 * annulus, "{} {}", ext - e2, annulus);
    }

    #[test]
    fn ball_integral_matches_closed_form_at_center_and_symmetry() {
        let alpha = -1.5;
        let at_center = ball_power_integral(&[0.0, 0.0], 1.0, &[0.0, 0.0], alpha);
        let exact = 2.0 * PI / (alpha + 2.0);
        assert!((at_center - exact).abs() < 1e-12);
        let near = ball_power_integral(&[0.0, 0.0], 1.0, &[1e-9, 0.0], alpha);
        assert!((near - exact).abs() < 1e-6);
        // alpha = 0: volume of the ball regardless of x
        for x in [[0.3, 0.1], [2.0, 0.0], [0.0, -5.0]] {
            let v = ball_power_integral(&[0.0, 0.0], 1.0, &x, 0.0);
            assert!((v - PI).abs() < 1e-9, "{x:?} {v}");
        }
        let v3 = ball_power_integral(&[0.0, 0.0, 0.0], 2.0, &[0.5, 0.5, 0.0], 0.0);
        assert!((v3 - 4.0 / 3.0 * PI * 8.0).abs() < 1e-9);
        // far away: ~ vol * d^alpha
        let far = ball_power_integral(&[0.0, 0.0], 0.1, &[10.0, 0.0], alpha);
        let approx = PI * 0.01 * 10f64.powf(alpha);
        assert!((far - approx).abs() < 1e-3 * approx);
    }

    #[test]
    fn sphere_points_are_unit_and_deterministic() {
        for dim in [2, 3, 4] {
            let a = sphere_points(dim, 64, 7);
            let b = sphere_points(dim, 64, 7);
            assert_eq!(a, b);
            for p in &a {
                assert!((crate::grid::norm(p) - 1.0).abs() < 1e-12);
            }
        }
    }
}
