//! The dense invariant class of smooth states: the oscillator components are
//! slaved to boundary derivatives of the field, y = M^{-1} v(φ), and this
//! relation is preserved by the flow: recomputing the lift from a field
//! snapshot at any later time reproduces the integrated oscillator state.

use lambscat::{evolve, lift_class_d, normalize, FieldProfile, InitialData, ModelSpec};

/// One-sided finite-difference derivatives at 0 from a polynomial fit
/// (verification path only; the production lift uses analytic derivatives).
fn fd_derivatives(values: &[f64], h: f64, orders: usize) -> Vec<f64> {
    let n = values.len();
    // Newton's forward differences on the uniform stencil
    let mut table = values.to_vec();
    let mut diffs = Vec::with_capacity(n);
    diffs.push(table[0]);
    for level in 1..n {
        for i in 0..n - level {
            table[i] = table[i + 1] - table[i];
        }
        diffs.push(table[0]);
    }
    // derivative k at the left end: sum over forward differences
    (0..=orders)
        .map(|k| {
            let mut acc = 0.0;
            let mut stirling = vec![0.0; n];
            stirling[k] = 1.0;
            // expand falling-factorial basis: d^k/dx^k of prod_{i<m}(x - i h)/m! h^m
            for (m, &dm) in diffs.iter().enumerate().skip(k) {
                // k-th derivative at 0 of the m-th Newton basis polynomial
                let mut coeffs = vec![0.0_f64; m + 1];
                coeffs[0] = 1.0;
                for i in 0..m {
                    // multiply by (x - i)
                    for j in (0..=i).rev() {
                        coeffs[j + 1] += coeffs[j];
                        coeffs[j] *= -(i as f64);
                    }
                }
                let fact: f64 = (1..=m).map(|v| v as f64).product::<f64>().max(1.0);
                let kfact: f64 = (1..=k).map(|v| v as f64).product::<f64>().max(1.0);
                acc += dm / fact * coeffs[k] * kfact;
            }
            acc / h.powi(k as i32)
        })
        .collect()
}

fn main() -> lambscat::Result<()> {
    let model = normalize(&ModelSpec {
        eigenvalues: vec![-1.0, -2.0],
        coupling: vec![1.0, 1.0],
        metric: None,
        theta: 0.0,
    })?;
    let phi0 = FieldProfile::gaussian(1.0, 5.0, 1.0);
    let data = InitialData::class_d(&model, phi0, FieldProfile::zero())?;
    println!("lifted initial state y0 = {:?}", data.y0);
    assert_eq!(data.y0, lift_class_d(&model, &data.phi0)?);

    let traj = evolve(&model, &data, 12.0, 5e-4, None)?;
    let mu0 = model.moment(0);
    let h = 0.04;
    let xs: Vec<f64> = (0..9).map(|i| i as f64 * h).collect();
    println!("t     integrated y(t)               lift from snapshot            max |Δ|");
    for t in [2.0, 4.0, 7.0, 10.0] {
        let snap = traj.field_snapshot(t, &xs)?;
        let phi_vals: Vec<f64> = snap.iter().map(|(p, _)| *p).collect();
        let d = fd_derivatives(&phi_vals, h, 3);
        // v_k = p_k(d/dx) phi(0+): p_1 = 1, p_2 = z^2 - mu_0 z
        let v = [d[0], d[2] - mu0 * d[1]];
        // M = V diag(c)
        let m = [1.0, 1.0, model.lambda[0], model.lambda[1]];
        let det = m[0] * m[3] - m[1] * m[2];
        let y_lift = [
            (m[3] * v[0] - m[1] * v[1]) / det,
            (-m[2] * v[0] + m[0] * v[1]) / det,
        ];
        let (_, y, _) = traj.state_at(t)?;
        let err = (y[0] - y_lift[0]).abs().max((y[1] - y_lift[1]).abs());
        println!(
            "{t:4.1}  [{:+.8}, {:+.8}]  [{:+.8}, {:+.8}]  {err:.2e}",
            y[0], y[1], y_lift[0], y_lift[1]
        );
    }
    Ok(())
}
