//! Derivative-free Nelder-Mead simplex minimizer.
//!
//! Standard coefficients (reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5). Convergence is declared when the spread of function values
//! across the simplex falls below the tolerance.

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    initial_step: f64,
    tol: f64,
    max_iter: usize,
) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let dim = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += initial_step;
        simplex.push(p);
    }
    let mut scores: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;

        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let spread = scores[worst] - scores[best];
        if spread.is_finite() && spread < tol {
            converged = true;
            break;
        }

        // Centroid of all vertices except the worst.
        let mut centroid = vec![0.0; dim];
        for &idx in order.iter().take(dim) {
            for d in 0..dim {
                centroid[d] += simplex[idx][d];
            }
        }
        for c in &mut centroid {
            *c /= dim as f64;
        }

        let reflected: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + ALPHA * (centroid[d] - simplex[worst][d]))
            .collect();
        let f_reflected = f(&reflected);

        if f_reflected < scores[best] {
            let expanded: Vec<f64> = (0..dim)
                .map(|d| centroid[d] + GAMMA * (reflected[d] - centroid[d]))
                .collect();
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                scores[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                scores[worst] = f_reflected;
            }
            continue;
        }

        if f_reflected < scores[second_worst] {
            simplex[worst] = reflected;
            scores[worst] = f_reflected;
            continue;
        }

        let contracted: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + RHO * (simplex[worst][d] - centroid[d]))
            .collect();
        let f_contracted = f(&contracted);
        if f_contracted < scores[worst] {
            simplex[worst] = contracted;
            scores[worst] = f_contracted;
            continue;
        }

        // Shrink toward the best vertex.
        let best_point = simplex[best].clone();
        for &idx in order.iter().skip(1) {
            for d in 0..dim {
                simplex[idx][d] = best_point[d] + SIGMA * (simplex[idx][d] - best_point[d]);
            }
            scores[idx] = f(&simplex[idx]);
        }
    }

    let best = scores
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, _)| i)
        .expect("simplex is non-empty");
    NelderMeadResult {
        x: simplex[best].clone(),
        fx: scores[best],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic_bowl() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.5).powi(2) + 0.5;
        let res = nelder_mead(f, &[0.0, 0.0], 0.5, 1e-12, 2000);
        assert!(res.converged);
        assert!((res.x[0] - 3.0).abs() < 1e-5);
        assert!((res.x[1] + 1.5).abs() < 1e-5);
        assert!((res.fx - 0.5).abs() < 1e-9);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| {
            let a = 1.0 - x[0];
            let b = x[1] - x[0] * x[0];
            a * a + 100.0 * b * b
        };
        let res = nelder_mead(f, &[-1.2, 1.0], 0.5, 1e-14, 5000);
        assert!((res.x[0] - 1.0).abs() < 1e-4, "x = {:?}", res.x);
        assert!((res.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn reports_non_convergence_at_iteration_cap() {
        let f = |x: &[f64]| x[0] * x[0];
        let res = nelder_mead(f, &[100.0], 1.0, 0.0, 3);
        assert!(!res.converged);
        assert_eq!(res.iterations, 3);
    }

    #[test]
    fn tolerates_infinite_regions() {
        // Objective is +inf on half the plane; the minimizer must still find
        // the finite valley.
        let f = |x: &[f64]| {
            if x[0] <= 0.0 {
                f64::INFINITY
            } else {
                (x[0].ln()).powi(2) + x[1] * x[1]
            }
        };
        let res = nelder_mead(f, &[5.0, 1.0], 0.5, 1e-12, 4000);
        assert!((res.x[0] - 1.0).abs() < 1e-4, "x = {:?}", res.x);
        assert!(res.fx < 1e-8);
    }
}
