use nalgebra::{DMatrix, DVector};

/// Result of a nonnegative least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    /// One weight per column, all `≥ 0`.
    pub weights: Vec<f64>,
    /// `‖target − Σ wᵢ colᵢ‖`.
    pub residual: f64,
    pub iterations: usize,
}

/// Lawson–Hanson active-set solver for `min_{w ≥ 0} ‖E w − target‖` where the
/// columns of `E` are given as slices. At most `50·m` outer iterations.
pub fn nnls(columns: &[&[f64]], target: &[f64]) -> NnlsSolution {
    let m = columns.len();
    let n = target.len();
    let f = DVector::from_column_slice(target);
    if m == 0 {
        return NnlsSolution { weights: Vec::new(), residual: scaled_norm(&f), iterations: 0 };
    }
    let e = DMatrix::from_fn(n, m, |r, c| columns[c][r]);
    let scale = e.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f.amax()).max(1.0);
    let grad_tol = 10.0 * f64::EPSILON * scale * scale * (n.max(m) as f64);

    let mut x = DVector::<f64>::zeros(m);
    let mut passive = vec![false; m];
    let mut banned = vec![false; m];
    let max_outer = 50 * m;
    let mut iterations = 0;
    let mut best = (scaled_norm(&f), x.clone());
    let mut stalled = 0;

    while iterations < max_outer {
        iterations += 1;
        let w = e.transpose() * (&f - &e * &x);
        let entering = (0..m).filter(|&j| !passive[j] && !banned[j] && w[j] > grad_tol).max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = entering else { break };
        passive[j] = true;

        let mut changed = false;
        for _ in 0..(3 * m + 3) {
            let idx: Vec<usize> = (0..m).filter(|&i| passive[i]).collect();
            let z = passive_least_squares(&e, &f, &idx);
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = z[k];
                }
                changed = true;
                break;
            }
            // step from x toward z until the first passive weight hits zero
            let mut alpha = 1.0f64;
            let mut blocking = None;
            for (k, &i) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[i] - z[k];
                    let step = if denom > 0.0 { x[i] / denom } else { 0.0 };
                    if blocking.is_none() || step < alpha {
                        alpha = step.min(1.0);
                        blocking = Some(i);
                    }
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                let next = x[i] + alpha * (z[k] - x[i]);
                if next != x[i] {
                    changed = true;
                }
                x[i] = next;
            }
            // rounding can leave the blocking weight slightly positive
            if let Some(i) = blocking {
                x[i] = 0.0;
            }
            for &i in &idx {
                if x[i] <= 0.0 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
        // near machine precision the passive sets can cycle; keep the best iterate
        let residual = scaled_norm(&(&f - &e * &x));
        if residual < best.0 * (1.0 - 1e-9) {
            best = (residual, x.clone());
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > m + 2 {
                break;
            }
        }
        if changed {
            banned.iter_mut().for_each(|b| *b = false);
        } else {
            // column dependent on the current passive set: skip it until x moves
            passive[j] = false;
            banned[j] = true;
        }
    }

    let residual = scaled_norm(&(&f - &e * &x));
    let (residual, x) = if residual <= best.0 { (residual, x) } else { best };
    NnlsSolution { weights: x.iter().copied().collect(), residual, iterations }
}

/// Euclidean norm without underflow for tiny residuals.
fn scaled_norm(v: &DVector<f64>) -> f64 {
    let s = v.amax();
    if s == 0.0 {
        0.0
    } else {
        s * (v / s).norm()
    }
}

fn passive_least_squares(e: &DMatrix<f64>, f: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    let sub = e.select_columns(idx);
    let svd = sub.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (smax * 1e-12).max(f64::MIN_POSITIVE);
    let z = svd.solve(f, eps).expect("SVD computed with both factors");
    // one refinement step recovers the digits the SVD iteration leaves behind
    let r = f - &sub * &z;
    z + svd.solve(&r, eps).expect("SVD computed with both factors")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_columns_give_target_norm() {
        let s = nnls(&[], &[3.0, 4.0]);
        assert_eq!(s.residual, 5.0);
    }

    #[test]
    fn unconstrained_optimum_inside_orthant() {
        let c0 = [1.0, 0.0, 0.0];
        let c1 = [0.0, 1.0, 0.0];
        let s = nnls(&[&c0, &c1], &[2.0, 3.0, 1.0]);
        assert!((s.weights[0] - 2.0).abs() < 1e-12);
        assert!((s.weights[1] - 3.0).abs() < 1e-12);
        assert!((s.residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_coefficient_is_clamped() {
        let c0 = [1.0, 0.0];
        let c1 = [0.0, 1.0];
        let s = nnls(&[&c0, &c1], &[2.0, -3.0]);
        assert_eq!(s.weights[1], 0.0);
        assert!((s.residual - 3.0).abs() < 1e-12);
    }

    #[test]
    fn blocking_weight_leaves_the_passive_set() {
        let cols = [
            [0.23728252005924844, 3.1947948947342995, -4.017405153931817],
            [2.6260344025788678, 2.769622549086063, -4.410428711609725],
            [-4.591101120426001, -0.5442918471370422, 4.499533499035873],
            [-2.149750647484796, 4.96105359740212, -2.0991863332748895],
        ];
        let w = [0.36463872065981573, 0.19408511870821096, 0.20703901918591516, 1.3469231391549665];
        let target: Vec<f64> = (0..3).map(|r| cols.iter().zip(&w).map(|(c, wi)| wi * c[r]).sum()).collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        assert!(nnls(&refs, &target).residual < 1e-9);
    }

    #[test]
    fn duplicate_columns_do_not_stall() {
        let c = [1.0, 1.0];
        let d = [-1.0, 1.0];
        let s = nnls(&[&c, &c, &d, &d], &[0.0, 2.0]);
        assert!(s.residual < 1e-12);
        assert!(s.weights.iter().all(|&w| w >= 0.0));
    }
}
