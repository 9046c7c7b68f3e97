use super::scalar::Scalar;

/// Per-block outcome of a central-difference gradient check.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockError {
    pub name: String,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    /// Index of the worst entry within the block.
    pub worst_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub blocks: Vec<BlockError>,
    pub max_rel_error: f64,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error <= self.tolerance
    }

    pub fn worst_block(&self) -> Option<&BlockError> {
        self.blocks.iter().max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
    }
}

/// Absolute discrepancies below this are treated as exact agreement; they
/// are indistinguishable from round-off in the difference quotient.
pub const ABS_FLOOR: f64 = 1e-9;

/// Compares `analytic` against central differences of `loss_fn` around
/// `params`, reporting `|analytic − numeric| / (|analytic| + 1e-12)` per block.
pub fn finite_diff_check<F, L>(
    mut loss_fn: L,
    params: &[Vec<F>],
    analytic: &[Vec<F>],
    names: &[String],
    h: f64,
    tol: f64,
) -> GradCheckReport
where
    F: Scalar,
    L: FnMut(&[Vec<F>]) -> F,
{
    assert_eq!(params.len(), analytic.len(), "parameter/gradient block count differs");
    let mut work: Vec<Vec<F>> = params.to_vec();
    let mut blocks = Vec::with_capacity(params.len());
    let step = F::lit(h);
    for b in 0..params.len() {
        assert_eq!(params[b].len(), analytic[b].len(), "block {b} size differs");
        let mut worst = BlockError {
            name: names.get(b).cloned().unwrap_or_else(|| format!("block{b}")),
            max_rel_error: 0.0,
            max_abs_error: 0.0,
            worst_index: 0,
        };
        for j in 0..params[b].len() {
            let orig = work[b][j];
            work[b][j] = orig + step;
            let up = loss_fn(&work).as_f64();
            work[b][j] = orig - step;
            let down = loss_fn(&work).as_f64();
            work[b][j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[b][j].as_f64();
            let abs = (a - numeric).abs();
            let rel = if abs <= ABS_FLOOR { 0.0 } else { abs / (a.abs() + 1e-12) };
            if rel > worst.max_rel_error || !rel.is_finite() {
                worst.max_rel_error = if rel.is_finite() { rel } else { f64::INFINITY };
                worst.worst_index = j;
            }
            worst.max_abs_error = worst.max_abs_error.max(abs);
        }
        blocks.push(worst);
    }
    let max_rel_error = blocks.iter().map(|b| b.max_rel_error).fold(0.0, f64::max);
    GradCheckReport { blocks, max_rel_error, tolerance: tol }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(p: &[Vec<f64>]) -> f64 {
        p[0].iter().enumerate().map(|(i, x)| (i as f64 + 1.0) * x * x).sum::<f64>() + 3.0 * p[1][0]
    }

    fn quad_grad(p: &[Vec<f64>]) -> Vec<Vec<f64>> {
        vec![p[0].iter().enumerate().map(|(i, x)| 2.0 * (i as f64 + 1.0) * x).collect(), vec![3.0]]
    }

    #[test]
    fn exact_gradient_passes() {
        let p = vec![vec![0.3, -1.1, 2.0], vec![0.5]];
        let names = vec!["a".to_string(), "b".to_string()];
        let r = finite_diff_check(quad, &p, &quad_grad(&p), &names, 1e-5, 1e-8);
        assert!(r.passed(), "{r:?}");
        assert!(r.max_rel_error <= 1e-8);
    }

    #[test]
    fn doubled_gradient_is_flagged() {
        let p = vec![vec![0.3, -1.1, 2.0], vec![0.5]];
        let mut g = quad_grad(&p);
        for block in g.iter_mut() {
            for v in block.iter_mut() {
                *v *= 2.0;
            }
        }
        let r = finite_diff_check(quad, &p, &g, &[], 1e-5, 1e-4);
        assert!(!r.passed());
        // |2g - g| / |2g|
        assert!((r.max_rel_error - 0.5).abs() < 1e-6);
        assert_eq!(r.blocks[1].name, "block1");
    }
}
