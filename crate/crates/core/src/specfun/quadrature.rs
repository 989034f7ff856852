use std::sync::OnceLock;

/// Order used wherever the pipeline integrates.
pub const DEFAULT_ORDER: usize = 64;

/// Gauss-Legendre nodes and weights on `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub lo: f64,
    pub hi: f64,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_order`.
fn reference_rule(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
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
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn cached_reference(order: usize) -> (Vec<f64>, Vec<f64>) {
    static DEFAULT: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    if order == DEFAULT_ORDER {
        DEFAULT.get_or_init(|| reference_rule(DEFAULT_ORDER)).clone()
    } else {
        reference_rule(order)
    }
}

/// Gauss-Legendre rule of the given order mapped affinely onto `[lo, hi]`.
pub fn gauss_legendre(lo: f64, hi: f64, order: usize) -> Quadrature {
    assert!(order >= 1, "quadrature order must be positive");
    let (t, w) = cached_reference(order);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    Quadrature {
        lo,
        hi,
        order,
        nodes: t.iter().map(|x| mid + half * x).collect(),
        weights: w.iter().map(|v| v * half).collect(),
    }
}

/// Equal panels over `[lo, hi]`, each with its own Gauss-Legendre rule.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeRule {
    pub lo: f64,
    pub hi: f64,
    pub panels: Vec<Quadrature>,
}

impl CompositeRule {
    pub fn new(lo: f64, hi: f64, panels: usize, order: usize) -> Self {
        let h = (hi - lo) / panels as f64;
        CompositeRule {
            lo,
            hi,
            panels: (0..panels)
                .map(|i| {
                    let a = lo + h * i as f64;
                    let b = if i + 1 == panels { hi } else { lo + h * (i + 1) as f64 };
                    gauss_legendre(a, b, order)
                })
                .collect(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.panels.iter().map(|p| p.integrate(&f)).sum()
    }

    /// All `(node, weight)` pairs in increasing node order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.panels
            .iter()
            .flat_map(|p| p.nodes.iter().copied().zip(p.weights.iter().copied()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_two_point() {
        let q = gauss_legendre(-1.0, 1.0, 2);
        let r = 1.0 / 3f64.sqrt();
        assert!((q.nodes[0] + r).abs() < 1e-15 && (q.nodes[1] - r).abs() < 1e-15);
        assert!((q.weights[0] - 1.0).abs() < 1e-15 && (q.weights[1] - 1.0).abs() < 1e-15);
        let v = gauss_legendre(0.0, 1.0, 2).integrate(|x| x * x);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_integrand() {
        let v = gauss_legendre(0.0, std::f64::consts::PI, 20).integrate(f64::sin);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weights_positive_and_sum() {
        for order in [1, 2, 3, 7, 64, 65] {
            let q = gauss_legendre(-2.0, 3.0, order);
            assert!(q.weights.iter().all(|w| *w > 0.0));
            assert!((q.weights.iter().sum::<f64>() - 5.0).abs() < 1e-12, "order {}", order);
            assert!(q.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn composite_matches_single() {
        let c = CompositeRule::new(0.0, 2.0, 8, 16);
        assert!((c.integrate(|x| x.exp()) - (2f64.exp() - 1.0)).abs() < 1e-13);
    }
}
