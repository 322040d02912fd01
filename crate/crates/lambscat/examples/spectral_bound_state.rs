//! A model with a bound state (theta > 0): the eigenvalue solves
//! theta + Gamma(lambda) = 0 on (0, inf) and equals the square of the unique
//! negative real root of the boundary polynomial.

use num_complex::Complex64;

use lambscat::{
    build_p_closed_form, classify_roots, find_roots, gamma, normalize, point_spectrum, ModelSpec,
};

fn main() -> lambscat::Result<()> {
    let model = normalize(&ModelSpec {
        eigenvalues: vec![-1.0],
        coupling: vec![1.0],
        metric: None,
        theta: 2.0,
    })?;

    let sd = point_spectrum(&model)?;
    for bs in &sd.bound_states {
        println!(
            "eigenvalue lambda = {:.12}  decay rate sqrt(lambda) = {:.12}",
            bs.lambda, bs.decay_rate
        );
        println!("oscillator component y = {:?}, normalization {:.6}", bs.y, bs.normalization);
        let g = gamma(&model, Complex64::new(bs.lambda, 0.0))?;
        println!("|theta + Gamma(lambda)| = {:.3e}", (g + model.theta).norm());
    }

    let p = build_p_closed_form(&model);
    let roots = classify_roots(&model, &find_roots(&p)?)?;
    for r in &roots.eigen_roots {
        println!(
            "polynomial route: root z = {:+.12}, z^2 = {:.12}",
            r.value.re,
            r.value.re * r.value.re
        );
    }
    for r in &roots.resonances {
        println!("resonance z = {:+.6} {:+.6}i", r.value.re, r.value.im);
    }
    Ok(())
}
