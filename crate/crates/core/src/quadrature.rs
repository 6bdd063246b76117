//! Gauss–Legendre rules, composite and adaptive integration, and product
//! rules on round spheres.

use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1] by Newton iteration on the three-term
    /// recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Mapped nodes and weights on [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, w * half))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Shared 16- and 32-point rules.
pub fn gl16() -> &'static GaussLegendre {
    static R: OnceLock<GaussLegendre> = OnceLock::new();
    R.get_or_init(|| GaussLegendre::new(16))
}

pub fn gl32() -> &'static GaussLegendre {
    static R: OnceLock<GaussLegendre> = OnceLock::new();
    R.get_or_init(|| GaussLegendre::new(32))
}

/// Composite rule over the panels delimited by `breaks`.
pub fn composite<F: FnMut(f64) -> f64>(rule: &GaussLegendre, breaks: &[f64], mut f: F) -> f64 {
    breaks.windows(2).map(|w| rule.integrate(w[0], w[1], &mut f)).sum()
}

/// Panel breakpoints on [a, b]: uniform up to `unit` then geometric with the
/// given ratio, so that long ranges with scale-invariant integrands are cheap.
pub fn graded_breaks(a: f64, b: f64, unit: f64, per_unit: usize, ratio: f64) -> Vec<f64> {
    assert!(b > a);
    let mut breaks = vec![a];
    let uniform_end = (a + unit).min(b).max(a);
    if uniform_end > a {
        for i in 1..=per_unit {
            breaks.push(a + (uniform_end - a) * i as f64 / per_unit as f64);
        }
    }
    let mut x = *breaks.last().unwrap();
    while x < b {
        let step = (x.abs().max(unit) * (ratio - 1.0)).max(1e-300);
        x = (x + step).min(b);
        if b - x < 0.25 * step {
            x = b;
        }
        breaks.push(x);
    }
    breaks.dedup();
    breaks
}

/// Adaptive Gauss–Legendre: bisect until the 10- and 20-point estimates agree.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    static LO: OnceLock<GaussLegendre> = OnceLock::new();
    static HI: OnceLock<GaussLegendre> = OnceLock::new();
    let lo = LO.get_or_init(|| GaussLegendre::new(10));
    let hi = HI.get_or_init(|| GaussLegendre::new(20));
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        depth: usize,
        lo: &GaussLegendre,
        hi: &GaussLegendre,
    ) -> f64 {
        let coarse = lo.integrate(a, b, f);
        let fine = hi.integrate(a, b, f);
        if (fine - coarse).abs() <= tol || depth >= 40 {
            return fine;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1, lo, hi) + rec(f, m, b, 0.5 * tol, depth + 1, lo, hi)
    }
    rec(f, a, b, tol, 0, lo, hi)
}

/// Volume of the Euclidean unit ball in R^k.
pub fn unit_ball_volume(k: usize) -> f64 {
    PI.powf(k as f64 / 2.0) / gamma(k as f64 / 2.0 + 1.0)
}

/// Area of the unit sphere S^{k-1} in R^k.
pub fn unit_sphere_area(k: usize) -> f64 {
    k as f64 * unit_ball_volume(k)
}

/// Gamma function on positive half-integers and integers (exact recursion),
/// Lanczos otherwise.
pub fn gamma(x: f64) -> f64 {
    let twice = 2.0 * x;
    if x > 0.0 && (twice - twice.round()).abs() < 1e-12 && twice <= 200.0 {
        let k = twice.round() as i64;
        let (mut acc, mut y) = if k % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
        while y < x - 1e-12 {
            acc *= y;
            y += 1.0;
        }
        return acc;
    }
    lanczos_gamma(x)
}

fn lanczos_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * lanczos_gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Product Gauss–Legendre rule on the unit sphere S^{d-1} in R^d using
/// hyperspherical coordinates.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(dim: usize, order: usize) -> Self {
        assert!(dim >= 2);
        let rule = GaussLegendre::new(order);
        let polar: Vec<(f64, f64)> = rule.mapped(0.0, PI).collect();
        let azim: Vec<(f64, f64)> = rule.mapped(0.0, 2.0 * PI).collect();
        let n_polar = dim - 2;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0usize; n_polar];
        loop {
            for &(phi, wphi) in &azim {
                let mut x = vec![0.0; dim];
                let mut w = wphi;
                let mut s = 1.0;
                for (j, &k) in idx.iter().enumerate() {
                    let (th, wth) = polar[k];
                    x[j] = s * th.cos();
                    s *= th.sin();
                    w *= wth * th.sin().powi((dim - 2 - j) as i32);
                }
                x[dim - 2] = s * phi.cos();
                x[dim - 1] = s * phi.sin();
                points.push(x);
                weights.push(w);
            }
            // odometer over polar indices
            let mut j = 0;
            loop {
                if j == n_polar {
                    return Self { dim, points, weights };
                }
                idx[j] += 1;
                if idx[j] < order {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    /// Largest per-axis order not exceeding `order` whose product rule stays
    /// below `max_points`.
    pub fn capped_order(dim: usize, order: usize, max_points: usize) -> usize {
        let axes = (dim - 1) as f64;
        let cap = (max_points as f64).powf(1.0 / axes).floor() as usize;
        order.min(cap.max(2))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let r = GaussLegendre::new(8);
        let v = r.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10 * 4096.0);
        let w: f64 = r.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((lanczos_gamma(4.5) - gamma(4.5)).abs() < 1e-10);
    }

    #[test]
    fn sphere_rule_area() {
        for d in 2..=5 {
            let rule = SphereRule::new(d, 16);
            let a: f64 = rule.weights.iter().sum();
            assert!((a - unit_sphere_area(d)).abs() < 1e-12, "d = {d}: {}", a - unit_sphere_area(d));
            for p in &rule.points {
                let r: f64 = p.iter().map(|v| v * v).sum();
                assert!((r - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let f = |x: f64| 1.0 / (1e-4 + x * x);
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        let v = adaptive(&f, -1.0, 1.0, 1e-10);
        assert!((v - exact).abs() < 1e-8);
    }
}
