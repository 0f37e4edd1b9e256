use crate::error::{config, Result};

/// Orders with embedded level-symmetric tables.
pub const SUPPORTED_2D_ORDERS: [usize; 3] = [2, 4, 8];

/// Discrete ordinates with weights normalized to sum to one.
///
/// In 1D only `mu` is meaningful. In 2D the directions cover the upper
/// hemisphere (the lower one is its mirror image) and `eta` is the
/// `y` direction cosine.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub dimension: usize,
    pub order: usize,
    pub mu: Vec<f64>,
    pub eta: Vec<f64>,
    pub weights: Vec<f64>,
    reflect_x: Vec<usize>,
    reflect_y: Vec<usize>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Index of the direction with `mu` negated.
    pub fn reflect_x(&self, angle: usize) -> usize {
        self.reflect_x[angle]
    }

    /// Index of the direction with `eta` negated (2D only).
    pub fn reflect_y(&self, angle: usize) -> usize {
        self.reflect_y[angle]
    }

    fn from_directions(dimension: usize, order: usize, dirs: Vec<(f64, f64, f64)>) -> Self {
        let total: f64 = dirs.iter().map(|d| d.2).sum();
        let mu: Vec<f64> = dirs.iter().map(|d| d.0).collect();
        let eta: Vec<f64> = dirs.iter().map(|d| d.1).collect();
        let weights = dirs.iter().map(|d| d.2 / total).collect();
        let find = |m: f64, e: f64| {
            (0..mu.len())
                .find(|&b| mu[b] == m && eta[b] == e)
                .expect("quadrature is sign-symmetric by construction")
        };
        let reflect_x = (0..mu.len()).map(|a| find(-mu[a], eta[a])).collect();
        let reflect_y = (0..mu.len()).map(|a| find(mu[a], -eta[a])).collect();
        Self {
            dimension,
            order,
            mu,
            eta,
            weights,
            reflect_x,
            reflect_y,
        }
    }
}

/// Gauss-Legendre (1D) or level-symmetric (2D) quadrature of order `n`.
pub fn build_quadrature(dimension: usize, n: usize) -> Result<Quadrature> {
    match dimension {
        1 => {
            if n < 2 || n % 2 != 0 || n > 128 {
                return Err(config(format!(
                    "1D Gauss-Legendre order must be even and in [2, 128], got {n}"
                )));
            }
            let (nodes, weights) = gauss_legendre(n);
            // Nodes are symmetric in exact arithmetic; mirror them so reflection
            // pairs match bit for bit.
            let half = n / 2;
            let mut dirs = Vec::with_capacity(n);
            for i in 0..half {
                dirs.push((nodes[i], 0.0, weights[i]));
            }
            for i in (0..half).rev() {
                dirs.push((-nodes[i], 0.0, weights[i]));
            }
            Ok(Quadrature::from_directions(1, n, dirs))
        }
        2 => {
            let octant = level_symmetric_octant(n).ok_or_else(|| {
                config(format!(
                    "2D level-symmetric quadrature supports orders {SUPPORTED_2D_ORDERS:?}, got {n}"
                ))
            })?;
            let mut dirs = Vec::with_capacity(4 * octant.len());
            for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
                for &(mu, eta, w) in &octant {
                    dirs.push((sx * mu, sy * eta, w));
                }
            }
            Ok(Quadrature::from_directions(2, n, dirs))
        }
        d => Err(config(format!("quadrature dimension must be 1 or 2, got {d}"))),
    }
}

/// Negative nodes in ascending order paired with their weights (which sum to
/// one over the full symmetric set of `n`).
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let half = n / 2;
    let mut nodes = Vec::with_capacity(half);
    let mut weights = Vec::with_capacity(half);
    for i in 0..half {
        // Largest roots first, starting from the Tricomi estimate.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(-x);
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// First-octant directions `(mu, eta, weight)` of the level-symmetric set.
fn level_symmetric_octant(n: usize) -> Option<Vec<(f64, f64, f64)>> {
    // First cosine and the per-class point weights (Lewis & Miller tables).
    let (mu1, class_weights): (f64, &[f64]) = match n {
        2 => (1.0 / 3f64.sqrt(), &[1.0]),
        4 => (0.350_021_2, &[1.0 / 3.0]),
        8 => (0.218_217_9, &[0.120_987_7, 0.090_740_7, 0.092_592_6]),
        _ => return None,
    };
    let levels = n / 2;
    let cosines: Vec<f64> = if n == 2 {
        vec![mu1]
    } else {
        let delta = 2.0 * (1.0 - 3.0 * mu1 * mu1) / (n as f64 - 2.0);
        (0..levels)
            .map(|i| (mu1 * mu1 + i as f64 * delta).sqrt())
            .collect()
    };
    let mut dirs = Vec::new();
    // Index triples (i, j, k) with i + j + k = levels + 2 (1-based).
    for i in 1..=levels {
        for j in 1..=levels {
            let Some(k) = (levels + 2).checked_sub(i + j) else {
                continue;
            };
            if k < 1 {
                continue;
            }
            let w = class_weights[weight_class(n, i, j, k)];
            dirs.push((cosines[i - 1], cosines[j - 1], w));
        }
    }
    Some(dirs)
}

fn weight_class(n: usize, i: usize, j: usize, k: usize) -> usize {
    if n != 8 {
        return 0;
    }
    let mut t = [i, j, k];
    t.sort_unstable();
    match t {
        [1, 1, 4] => 0,
        [1, 2, 3] => 1,
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_gauss_legendre() {
        let q = build_quadrature(1, 2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((q.mu[0] + r).abs() < 1e-15 && (q.mu[1] - r).abs() < 1e-15);
        assert!(q.weights.iter().all(|w| (w - 0.5).abs() < 1e-15));
        assert_eq!(q.reflect_x(0), 1);
    }

    #[test]
    fn s2_level_symmetric() {
        let q = build_quadrature(2, 2).unwrap();
        assert_eq!(q.len(), 4);
        let r = 1.0 / 3f64.sqrt();
        for a in 0..4 {
            assert!((q.mu[a].abs() - r).abs() < 1e-15);
            assert!((q.eta[a].abs() - r).abs() < 1e-15);
            assert!((q.weights[a] - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn octant_sizes_and_unit_directions() {
        for n in SUPPORTED_2D_ORDERS {
            let oct = level_symmetric_octant(n).unwrap();
            assert_eq!(oct.len(), n * (n + 2) / 8);
            for (mu, eta, _) in oct {
                let xi2 = 1.0 - mu * mu - eta * eta;
                assert!(xi2 > 0.0, "direction out of the unit sphere for S{n}");
            }
        }
    }

    #[test]
    fn unsupported_orders_name_the_supported_ones() {
        let e = build_quadrature(2, 6).unwrap_err().to_string();
        assert!(e.contains("[2, 4, 8]"), "{e}");
        assert!(build_quadrature(1, 3).is_err());
    }
}
