//! Planar geometry on complex points: smallest enclosing circle and convex
//! hull membership of the origin.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Slack used when testing whether a point lies inside a candidate circle.
const INSIDE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
    /// Indices (into the input) of the points that determine the circle.
    pub support: Vec<usize>,
}

impl Circle {
    fn contains(&self, p: Complex64) -> bool {
        (p - self.center).norm() <= self.radius + INSIDE_SLACK * self.radius.max(1.0)
    }

    fn point(p: Complex64, i: usize) -> Self {
        Circle {
            center: p,
            radius: 0.0,
            support: vec![i],
        }
    }

    fn diameter(pts: &[Complex64], i: usize, j: usize) -> Self {
        let center = (pts[i] + pts[j]) / 2.0;
        Circle {
            center,
            radius: (pts[i] - center).norm().max((pts[j] - center).norm()),
            support: vec![i, j],
        }
    }

    fn through(pts: &[Complex64], i: usize, j: usize, k: usize) -> Self {
        let (a, b, c) = (pts[i], pts[j], pts[k]);
        let (ab, ac) = (b - a, c - a);
        let cross = ab.re * ac.im - ab.im * ac.re;
        let scale = ab.norm_sqr().max(ac.norm_sqr()).max(f64::MIN_POSITIVE);
        if cross.abs() <= 1e-14 * scale {
            // Collinear or repeated points: the farthest pair decides.
            let cands = [(i, j), (i, k), (j, k)];
            let (p, q) = cands
                .into_iter()
                .max_by(|x, y| {
                    let dx = (pts[x.0] - pts[x.1]).norm();
                    let dy = (pts[y.0] - pts[y.1]).norm();
                    dx.total_cmp(&dy)
                })
                .unwrap();
            return Circle::diameter(pts, p, q);
        }
        let d = 2.0 * cross;
        let ux = (ac.im * ab.norm_sqr() - ab.im * ac.norm_sqr()) / d;
        let uy = (ab.re * ac.norm_sqr() - ac.re * ab.norm_sqr()) / d;
        let center = a + Complex64::new(ux, uy);
        let radius = [a, b, c]
            .iter()
            .map(|p| (p - center).norm())
            .fold(0.0, f64::max);
        Circle {
            center,
            radius,
            support: vec![i, j, k],
        }
    }
}

/// Smallest disk containing every point (randomized incremental algorithm
/// with a fixed shuffle seed, so the result is deterministic).
pub fn smallest_enclosing_circle(points: &[Complex64]) -> Option<Circle> {
    if points.is_empty() {
        return None;
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5ec));
    let mut c = Circle::point(points[order[0]], order[0]);
    for a in 1..order.len() {
        let i = order[a];
        if c.contains(points[i]) {
            continue;
        }
        c = Circle::point(points[i], i);
        for &j in &order[..a] {
            if c.contains(points[j]) {
                continue;
            }
            c = Circle::diameter(points, i, j);
            for &k in &order[..a] {
                if k == j {
                    break;
                }
                if !c.contains(points[k]) {
                    c = Circle::through(points, i, j, k);
                }
            }
        }
    }
    Some(c)
}

/// Convex weights `t` over `subset` with `sum t_j points[subset_j] = target`,
/// or `None` when the target is outside their hull by more than `tol`.
fn convex_weights(points: &[Complex64], subset: &[usize], target: Complex64, tol: f64) -> Option<Vec<f64>> {
    let w = match subset.len() {
        1 => vec![1.0],
        2 => {
            let (a, b) = (points[subset[0]], points[subset[1]]);
            let ab = b - a;
            let len2 = ab.norm_sqr();
            let s = if len2 == 0.0 {
                0.5
            } else {
                ((target - a) * ab.conj()).re / len2
            };
            vec![1.0 - s, s]
        }
        3 => {
            let (a, b, c) = (points[subset[0]], points[subset[1]], points[subset[2]]);
            let (u, v, r) = (a - c, b - c, target - c);
            let det = u.re * v.im - u.im * v.re;
            if det.abs() <= 1e-14 {
                return None;
            }
            let t1 = (r.re * v.im - r.im * v.re) / det;
            let t2 = (u.re * r.im - u.im * r.re) / det;
            vec![t1, t2, 1.0 - t1 - t2]
        }
        _ => return None,
    };
    if w.iter().any(|&x| x < -tol) {
        return None;
    }
    let recon: Complex64 = subset
        .iter()
        .zip(&w)
        .map(|(&i, &t)| points[i] * t)
        .sum();
    if (recon - target).norm() > tol.max(1e-9) {
        return None;
    }
    let clamped: Vec<f64> = w.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    Some(clamped.iter().map(|x| x / total).collect())
}

/// Expresses the circle center as a convex combination of boundary points.
///
/// Returns `(indices, weights)`. The Welzl support is tried first; if roundoff
/// puts the center outside it, all pairs and triples of points on the circle
/// are searched.
pub fn center_weights(points: &[Complex64], circle: &Circle) -> (Vec<usize>, Vec<f64>) {
    if circle.radius == 0.0 {
        return (vec![circle.support[0]], vec![1.0]);
    }
    if let Some(w) = convex_weights(points, &circle.support, circle.center, 1e-10) {
        return (circle.support.clone(), w);
    }
    let on_circle: Vec<usize> = (0..points.len())
        .filter(|&i| ((points[i] - circle.center).norm() - circle.radius).abs() <= 1e-9)
        .collect();
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    let mut consider = |subset: Vec<usize>| {
        if let Some(w) = convex_weights(points, &subset, circle.center, 1e-9) {
            let worst = w.iter().cloned().fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|(b, _, _)| worst > *b) {
                best = Some((worst, subset, w));
            }
        }
    };
    for (x, &i) in on_circle.iter().enumerate() {
        for (y, &j) in on_circle.iter().enumerate().skip(x + 1) {
            consider(vec![i, j]);
            for &k in &on_circle[y + 1..] {
                consider(vec![i, j, k]);
            }
        }
    }
    match best {
        Some((_, s, w)) => (s, w),
        None => (circle.support.clone(), vec![1.0 / circle.support.len() as f64; circle.support.len()]),
    }
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Convex hull in counter-clockwise order (Andrew's monotone chain), with
/// collinear boundary points dropped.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let s = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * s)).norm()
}

/// Distance from the origin to the convex hull of `points` (0 when inside,
/// infinite for an empty set).
pub fn hull_distance_to_zero(points: &[Complex64]) -> f64 {
    let hull = convex_hull(points);
    let zero = Complex64::new(0.0, 0.0);
    match hull.len() {
        0 => f64::INFINITY,
        1 => hull[0].norm(),
        2 => segment_distance(zero, hull[0], hull[1]),
        m => {
            if (0..m).all(|i| cross(hull[i], hull[(i + 1) % m], zero) >= 0.0) {
                0.0
            } else {
                (0..m)
                    .map(|i| segment_distance(zero, hull[i], hull[(i + 1) % m]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// True if the origin lies in the convex hull of `points` or within `tol` of it.
pub fn hull_contains_zero(points: &[Complex64], tol: f64) -> bool {
    hull_distance_to_zero(points) <= tol
}
