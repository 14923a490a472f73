//! Symmetric-polynomial kernel: power sums, elementary symmetric polynomials
//! via Newton's identities, the inverse-Vandermonde coefficient matrix, and
//! the integrated Lagrange basis whose node sums drive the test statistics.

use crate::error::{Error, Result};

/// Relative tolerance for the node-distinctness check. Nodes closer than
/// `DISTINCTNESS_TOL * (1 + max|node|)` are treated as tied, since the
/// reciprocals Π(μ_l − μ_j) would blow up past that point.
pub const DISTINCTNESS_TOL: f64 = 1e-9;

/// A set of k ≥ 2 real interpolation nodes (reference means or √-frequencies).
///
/// Construction does not require distinctness; operations that need it
/// (matrix inversion, Lagrange coefficients) check and report
/// [`Error::DegenerateNodes`] so the caller can switch to the tied-value path.
#[derive(Debug, Clone, PartialEq)]
pub struct Nodes {
    values: Vec<f64>,
}

impl Nodes {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 nodes, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("nodes must be finite".into()));
        }
        Ok(Self { values })
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest pairwise gap |μ_j − μ_l| over j ≠ l.
    pub fn min_gap(&self) -> f64 {
        let mut sorted = self.values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Errors with `DegenerateNodes` when two nodes coincide within tolerance.
    pub fn check_distinct(&self) -> Result<()> {
        let scale = 1.0 + self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = DISTINCTNESS_TOL * scale;
        let gap = self.min_gap();
        if gap < tol {
            Err(Error::DegenerateNodes { gap, tol })
        } else {
            Ok(())
        }
    }
}

/// Power sums p_l(x) = Σ_j x_j^l for l = 1..=max_order.
pub fn power_sums(x: &[f64], max_order: usize) -> Vec<f64> {
    debug_assert!(max_order >= 1);
    let mut out = vec![0.0; max_order];
    for &v in x {
        let mut pow = 1.0;
        for slot in out.iter_mut() {
            pow *= v;
            *slot += pow;
        }
    }
    out
}

/// Elementary symmetric polynomials together with the power sums they were
/// derived from. `e[0] = 1` by convention and `e` has length k + 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricCoefficients {
    pub e: Vec<f64>,
    pub p: Vec<f64>,
}

/// e_0..e_k via the Newton recurrence
/// l·e_l = Σ_{j=1}^{l} (−1)^{j−1} e_{l−j} p_j.
pub fn elementary_symmetric(x: &[f64]) -> SymmetricCoefficients {
    let k = x.len();
    if k == 0 {
        return SymmetricCoefficients {
            e: vec![1.0],
            p: vec![],
        };
    }
    let p = power_sums(x, k);
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for l in 1..=k {
        let mut acc = 0.0;
        for j in 1..=l {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[l - j] * p[j - 1];
        }
        e[l] = acc / l as f64;
    }
    SymmetricCoefficients { e, p }
}

/// Ascending coefficients of Π_{j≠l}(t − μ_j), built by multiplying the
/// linear factors directly. Coefficient of t^m is (−1)^{k−1−m} e_{k−1−m}(∖l).
/// Dividing the full characteristic polynomial by (t − μ_l) instead loses
/// one to two digits to cancellation, which the inverse-identity tolerance
/// cannot afford.
fn leave_one_out_quotient(mu: &[f64], skip: usize) -> Vec<f64> {
    let k = mu.len();
    let mut q = vec![0.0; k];
    q[0] = 1.0;
    let mut degree = 0;
    for (j, &root) in mu.iter().enumerate() {
        if j == skip {
            continue;
        }
        degree += 1;
        for idx in (1..=degree).rev() {
            q[idx] = q[idx - 1] - root * q[idx];
        }
        q[0] *= -root;
    }
    q
}

/// The k×k matrix E with entry (j, l) equal to
/// (−1)^{j−1} e_{k−j}(nodes ∖ {l}) / Π_{j'≠l}(μ_{j'} − μ_l),
/// which is the inverse of the Vandermonde matrix of the same nodes.
#[derive(Debug, Clone)]
pub struct EMatrix {
    k: usize,
    /// Row-major k×k entries.
    entries: Vec<f64>,
    nodes: Nodes,
}

impl EMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    /// Entry at 0-based (row, col).
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.k + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Determinant via LU with partial pivoting; equals
    /// 1 / Π_{j<l}(μ_l − μ_j).
    pub fn det(&self) -> f64 {
        lu_det(&self.entries, self.k)
    }
}

pub fn e_matrix(nodes: &Nodes) -> Result<EMatrix> {
    nodes.check_distinct()?;
    let k = nodes.k();
    let mu = nodes.values();
    let mut entries = vec![0.0; k * k];
    for l in 0..k {
        let q = leave_one_out_quotient(mu, l);
        let mut denom = 1.0;
        for (jp, &v) in mu.iter().enumerate() {
            if jp != l {
                denom *= v - mu[l];
            }
        }
        for row in 0..k {
            // (−1)^{row} e_{k−1−row}(∖ l) = q[row] up to the sign folded below.
            let sign = if (k - 1 - row).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            let e_loo = sign * q[row];
            let entry_sign = if row % 2 == 0 { 1.0 } else { -1.0 };
            entries[row * k + l] = entry_sign * e_loo / denom;
        }
    }
    Ok(EMatrix {
        k,
        entries,
        nodes: nodes.clone(),
    })
}

/// Vandermonde matrix with (j, l) entry μ_j^l (0-based powers), row-major.
pub fn vandermonde(nodes: &Nodes) -> Vec<f64> {
    let k = nodes.k();
    let mut v = vec![0.0; k * k];
    for (j, &node) in nodes.values().iter().enumerate() {
        let mut pow = 1.0;
        for l in 0..k {
            v[j * k + l] = pow;
            pow *= node;
        }
    }
    v
}

/// Row-major product of two k×k matrices.
pub fn mat_mul(a: &[f64], b: &[f64], k: usize) -> Vec<f64> {
    let mut c = vec![0.0; k * k];
    for i in 0..k {
        for l in 0..k {
            let ail = a[i * k + l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..k {
                c[i * k + j] += ail * b[l * k + j];
            }
        }
    }
    c
}

fn lu_det(m: &[f64], k: usize) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..k {
        let mut pivot = col;
        for row in col + 1..k {
            if a[row * k + col].abs() > a[pivot * k + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * k + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..k {
                a.swap(col * k + j, pivot * k + j);
            }
            det = -det;
        }
        let diag = a[col * k + col];
        det *= diag;
        for row in col + 1..k {
            let factor = a[row * k + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for j in col..k {
                a[row * k + j] -= factor * a[col * k + j];
            }
        }
    }
    det
}

/// Monomial coefficients c_1..c_k of the integrated Lagrange basis function
/// for the node at `index` (0-based): f(t) = Σ_j c_j t^j, whose derivative is
/// the Lagrange interpolating polynomial with f'(μ_index) = 1 and f'(μ_j) = 0
/// elsewhere.
pub fn f_coefficients(nodes: &Nodes, index: usize) -> Result<Vec<f64>> {
    nodes.check_distinct()?;
    let k = nodes.k();
    if index >= k {
        return Err(Error::InvalidArgument(format!(
            "basis index {index} out of range for k = {k}"
        )));
    }
    Ok(f_coefficients_inner(nodes.values(), index))
}

fn f_coefficients_inner(mu: &[f64], index: usize) -> Vec<f64> {
    let k = mu.len();
    let q = leave_one_out_quotient(mu, index);
    let mut denom = 1.0;
    for (jp, &v) in mu.iter().enumerate() {
        if jp != index {
            denom *= mu[index] - v;
        }
    }
    // f'(t) = quotient(t) / denom, so c_j = q[j−1] / (j · denom).
    (1..=k).map(|j| q[j - 1] / (j as f64 * denom)).collect()
}

/// Σ_j f(x_j) evaluated as a dot product of the monomial coefficients with
/// the power sums of x; O(k·|x|) with no per-element polynomial evaluation.
pub fn sum_f(x: &[f64], coeffs: &[f64]) -> f64 {
    if x.is_empty() || coeffs.is_empty() {
        return 0.0;
    }
    let p = power_sums(x, coeffs.len());
    coeffs.iter().zip(&p).map(|(c, ps)| c * ps).sum()
}

/// All k integrated-Lagrange coefficient rows for a node set, with shared
/// power-sum evaluation of the node sums Σ_j f_l(x_j).
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    k: usize,
    nodes: Nodes,
    /// Row l holds c_1..c_k of f_l.
    coefficients: Vec<Vec<f64>>,
}

impl LagrangeBasis {
    pub fn new(nodes: &Nodes) -> Result<Self> {
        nodes.check_distinct()?;
        let k = nodes.k();
        let coefficients = (0..k)
            .map(|l| f_coefficients_inner(nodes.values(), l))
            .collect();
        Ok(Self {
            k,
            nodes: nodes.clone(),
            coefficients,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    pub fn coefficients(&self, l: usize) -> &[f64] {
        &self.coefficients[l]
    }

    /// Σ_j f_l(x_j) for every l, from a single power-sum pass over x.
    pub fn sums(&self, x: &[f64]) -> Vec<f64> {
        let p = power_sums(x, self.k);
        self.coefficients
            .iter()
            .map(|row| row.iter().zip(&p).map(|(c, ps)| c * ps).sum())
            .collect()
    }

    /// f_l(t).
    pub fn eval(&self, l: usize, t: f64) -> f64 {
        let mut pow = 1.0;
        let mut acc = 0.0;
        for &c in &self.coefficients[l] {
            pow *= t;
            acc += c * pow;
        }
        acc
    }

    /// f_l'(t) by term-wise differentiation of the stored coefficients.
    pub fn derivative(&self, l: usize, t: f64) -> f64 {
        let mut pow = 1.0;
        let mut acc = 0.0;
        for (j, &c) in self.coefficients[l].iter().enumerate() {
            acc += c * (j + 1) as f64 * pow;
            pow *= t;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Subset-enumeration oracle for e_l: sum over all size-l subsets of the
    /// product of their elements. Exponential, for k ≤ 10 test inputs only.
    fn elementary_oracle(x: &[f64]) -> Vec<f64> {
        let k = x.len();
        let mut e = vec![0.0; k + 1];
        for mask in 0u32..(1 << k) {
            let mut prod = 1.0;
            for (j, &v) in x.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    prod *= v;
                }
            }
            e[mask.count_ones() as usize] += prod;
        }
        e
    }

    #[test]
    fn power_sums_examples() {
        assert_eq!(power_sums(&[1.0, 2.0, 3.0], 3), vec![6.0, 14.0, 36.0]);
        assert_eq!(power_sums(&[0.0, 0.0], 2), vec![0.0, 0.0]);
        let c = 1.7;
        assert_eq!(power_sums(&[c], 2), vec![c, c * c]);
    }

    #[test]
    fn elementary_symmetric_examples() {
        let s = elementary_symmetric(&[1.0, 2.0, 3.0]);
        assert_eq!(s.e, vec![1.0, 6.0, 11.0, 6.0]);
        let s1 = elementary_symmetric(&[4.5]);
        assert_eq!(s1.e, vec![1.0, 4.5]);
        // Repeated root: (t − a)² has e = (1, 2a, a²).
        let a = 0.3;
        let s2 = elementary_symmetric(&[a, a]);
        assert!((s2.e[1] - 2.0 * a).abs() < 1e-15);
        assert!((s2.e[2] - a * a).abs() < 1e-15);
    }

    #[test]
    fn newton_identity_holds() {
        let x = [0.5, -1.2, 3.3, 2.0];
        let s = elementary_symmetric(&x);
        for l in 1..=x.len() {
            let mut rhs = 0.0;
            for j in 1..=l {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                rhs += sign * s.e[l - j] * s.p[j - 1];
            }
            assert!((l as f64 * s.e[l] - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn elementary_matches_subset_oracle_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let k = rng.random_range(1..=10);
            let x: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
            let got = elementary_symmetric(&x).e;
            let want = elementary_oracle(&x);
            for (g, w) in got.iter().zip(&want) {
                let scale = 1.0f64.max(w.abs());
                assert!((g - w).abs() / scale < 1e-10, "k={k} got={g} want={w}");
            }
        }
    }

    #[test]
    fn e_matrix_inverts_vandermonde() {
        let nodes = Nodes::new(vec![1.0, 2.0, 3.0]).unwrap();
        let e = e_matrix(&nodes).unwrap();
        let v = vandermonde(&nodes);
        let prod = mat_mul(e.entries(), &v, 3);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i * 3 + j] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn e_matrix_det_formula() {
        let nodes = Nodes::new(vec![1.0, 2.0, 3.0]).unwrap();
        let e = e_matrix(&nodes).unwrap();
        // 1 / ((2−1)(3−1)(3−2)) = 0.5
        assert!((e.det() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn e_matrix_two_by_two_analytic() {
        // Nodes (0, 1): V = [[1,0],[1,1]], analytic inverse [[1,0],[−1,1]].
        let nodes = Nodes::new(vec![0.0, 1.0]).unwrap();
        let e = e_matrix(&nodes).unwrap();
        assert!((e.entry(0, 0) - 1.0).abs() < 1e-14);
        assert!(e.entry(0, 1).abs() < 1e-14);
        assert!((e.entry(1, 0) + 1.0).abs() < 1e-14);
        assert!((e.entry(1, 1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn e_matrix_rejects_tied_nodes() {
        let nodes = Nodes::new(vec![1.0, 3.0, 3.0, 5.0]).unwrap();
        assert!(matches!(
            e_matrix(&nodes),
            Err(crate::error::Error::DegenerateNodes { .. })
        ));
    }

    #[test]
    fn f_coefficients_two_nodes() {
        // Nodes (0, 1), first basis function: f(t) = t − t²/2.
        let nodes = Nodes::new(vec![0.0, 1.0]).unwrap();
        let c = f_coefficients(&nodes, 0).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-14);
        assert!((c[1] + 0.5).abs() < 1e-14);
        let basis = LagrangeBasis::new(&nodes).unwrap();
        assert!((basis.derivative(0, 0.0) - 1.0).abs() < 1e-14);
        assert!(basis.derivative(0, 1.0).abs() < 1e-14);
    }

    #[test]
    fn interpolation_identity_scenario_nodes() {
        let nodes = Nodes::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let basis = LagrangeBasis::new(&nodes).unwrap();
        for l in 0..5 {
            for (j, &mu) in nodes.values().iter().enumerate() {
                let expect = if l == j { 1.0 } else { 0.0 };
                assert!(
                    (basis.derivative(l, mu) - expect).abs() < 1e-9,
                    "l={l} j={j}"
                );
            }
        }
    }

    #[test]
    fn derivative_rows_are_orthonormal() {
        let nodes = Nodes::new(vec![-0.7, 0.1, 0.9, 2.2]).unwrap();
        let basis = LagrangeBasis::new(&nodes).unwrap();
        for l in 0..4 {
            for h in 0..4 {
                let dot: f64 = nodes
                    .values()
                    .iter()
                    .map(|&mu| basis.derivative(l, mu) * basis.derivative(h, mu))
                    .sum();
                let expect = if l == h { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sum_f_matches_direct_evaluation() {
        let nodes = Nodes::new(vec![0.0, 1.0]).unwrap();
        let basis = LagrangeBasis::new(&nodes).unwrap();
        let c = basis.coefficients(0);
        // f_1 from nodes (0,1) evaluated at (0,0): 2·f(0) = 0.
        assert_eq!(sum_f(&[0.0, 0.0], c), 0.0);
        let x = [0.3, -0.4, 1.9];
        let direct: f64 = x.iter().map(|&t| basis.eval(0, t)).sum();
        assert!((sum_f(&x, c) - direct).abs() < 1e-13);
    }

    #[test]
    fn sum_f_is_additive_over_concatenation() {
        let nodes = Nodes::new(vec![0.5, 1.5, 2.5]).unwrap();
        let c = f_coefficients(&nodes, 1).unwrap();
        let a = [0.1, 0.9];
        let b = [2.4, -0.3, 1.1];
        let whole: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
        let split = sum_f(&a, &c) + sum_f(&b, &c);
        assert!((sum_f(&whole, &c) - split).abs() < 1e-12);
    }

    #[test]
    fn node_sums_are_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 2..=6usize {
            let values: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
            let nodes = match Nodes::new(values.clone()) {
                Ok(n) => n,
                Err(_) => continue,
            };
            let basis = match LagrangeBasis::new(&nodes) {
                Ok(b) => b,
                Err(_) => continue,
            };
            let mut perm = values.clone();
            perm.reverse();
            perm.rotate_left(1);
            let a = basis.sums(&values);
            let b = basis.sums(&perm);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Random node sets on [−5, 5] with pairwise gaps of at least half a
        /// grid cell. The inverse identity is verified through an explicit
        /// matrix product, so the Vandermonde conditioning — governed by the
        /// node separation — must leave headroom under the 1e-8 tolerance.
        fn separated_nodes() -> impl Strategy<Value = Vec<f64>> {
            (2usize..=10)
                .prop_flat_map(|k| proptest::collection::vec(0.2f64..0.8, k))
                .prop_map(|jitter| {
                    let k = jitter.len();
                    let step = 10.0 / k as f64;
                    jitter
                        .iter()
                        .enumerate()
                        .map(|(i, u)| -5.0 + (i as f64 + u) * step)
                        .collect::<Vec<f64>>()
                })
                .prop_shuffle()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn ev_product_is_identity(values in separated_nodes()) {
                let k = values.len();
                let nodes = Nodes::new(values).unwrap();
                let e = e_matrix(&nodes).unwrap();
                let v = vandermonde(&nodes);
                for (order, prod) in [mat_mul(e.entries(), &v, k), mat_mul(&v, e.entries(), k)].iter().enumerate() {
                    for i in 0..k {
                        for j in 0..k {
                            let expect = if i == j { 1.0 } else { 0.0 };
                            prop_assert!(
                                (prod[i * k + j] - expect).abs() < 1e-8,
                                "order={} i={} j={} got={}", order, i, j, prod[i * k + j]
                            );
                        }
                    }
                }
            }

            #[test]
            fn interpolation_property(values in separated_nodes()) {
                let nodes = Nodes::new(values).unwrap();
                let basis = LagrangeBasis::new(&nodes).unwrap();
                for l in 0..nodes.k() {
                    for (j, &mu) in nodes.values().iter().enumerate() {
                        let expect = if l == j { 1.0 } else { 0.0 };
                        prop_assert!((basis.derivative(l, mu) - expect).abs() < 1e-8);
                    }
                }
            }
        }
    }
}
