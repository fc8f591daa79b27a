//! Small dense phase-1 simplex, used to decide linear feasibility exactly.

/// Decides whether `{λ ≥ 0 : A λ = b}` is nonempty.
///
/// Runs a phase-1 simplex (artificial variables, Bland's anti-cycling rule)
/// and reports feasibility when the minimal artificial mass is ≤ `tol`.
/// `a` is row-major with `b.len()` rows.
pub(crate) fn equality_feasible(a: &[Vec<f64>], b: &[f64], tol: f64) -> bool {
    const PIVOT_EPS: f64 = 1e-12;
    let rows = b.len();
    if rows == 0 {
        return true;
    }
    let cols = a[0].len();
    let width = cols + rows + 1; // structural + artificial + rhs

    let mut t = vec![vec![0.0; width]; rows];
    for (i, row) in a.iter().enumerate() {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for (j, &v) in row.iter().enumerate() {
            t[i][j] = flip * v;
        }
        t[i][cols + i] = 1.0;
        t[i][width - 1] = flip * b[i];
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Phase-1 objective: minimize the sum of artificials. Reduced costs for
    // the artificial basis are the negated column sums.
    let mut obj = vec![0.0; width];
    for j in 0..cols {
        obj[j] = -(0..rows).map(|i| t[i][j]).sum::<f64>();
    }
    let mut obj_rhs = -(0..rows).map(|i| t[i][width - 1]).sum::<f64>();

    loop {
        // Bland: the lowest-index improving column enters.
        let Some(enter) = (0..cols + rows).find(|&j| obj[j] < -PIVOT_EPS) else {
            break;
        };
        // Ratio test; ties broken by the lowest basis index (Bland).
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..rows {
            if t[i][enter] > PIVOT_EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                let better = ratio < best - PIVOT_EPS
                    || (ratio <= best + PIVOT_EPS
                        && leave.is_some_and(|l| basis[i] < basis[l]));
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            // Phase-1 objective is bounded below by zero; an apparently
            // unbounded ray only arises from numerical noise.
            break;
        };

        let pivot = t[leave][enter];
        for v in t[leave].iter_mut() {
            *v /= pivot;
        }
        for i in 0..rows {
            if i != leave && t[i][enter].abs() > 0.0 {
                let f = t[i][enter];
                for j in 0..width {
                    t[i][j] -= f * t[leave][j];
                }
            }
        }
        let f = obj[enter];
        for j in 0..width {
            obj[j] -= f * t[leave][j];
        }
        obj_rhs -= f * t[leave][width - 1];
        basis[leave] = enter;
    }

    // Optimal phase-1 value = total artificial mass remaining.
    (-obj_rhs).abs() <= tol
}
