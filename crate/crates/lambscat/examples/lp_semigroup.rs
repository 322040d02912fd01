//! The Lax-Phillips semigroup of the elastic-shell model: a 3-dimensional
//! contraction semigroup e^{-tB} whose spectrum is the resonance set.

use lambscat::scattering::{dissipativity_min_eigenvalue, gram_operator_norm};
use lambscat::{
    build_lp_semigroup, build_p_closed_form, classify_roots, find_roots, lp_evolve_check,
    normalize, ModelSpec,
};

fn main() -> lambscat::Result<()> {
    // elastic shell with unit mass, Young modulus and rest radius
    let pi = std::f64::consts::PI;
    let model = normalize(&ModelSpec {
        eigenvalues: vec![-0.5],
        coupling: vec![-2.0 * pi],
        metric: Some(vec![1.0 / (4.0 * pi)]),
        theta: -0.5,
    })?;

    let p = build_p_closed_form(&model);
    let roots = classify_roots(&model, &find_roots(&p)?)?;
    let sg = build_lp_semigroup(&roots)?;
    println!("deg p = {}, dim K = {}", p.degree(), sg.dim);
    for r in &sg.roots {
        println!("resonance z = {:+.8} {:+.8}i (multiplicity {})", r.value.re, r.value.im, r.multiplicity);
    }
    println!("dissipativity: min eig of GB + B*G = {:+.3e}", dissipativity_min_eigenvalue(&sg));

    println!("t     ||e^(-tB)||_G    deviation from analytic action");
    for k in 0..=10 {
        let t = k as f64;
        let chk = lp_evolve_check(&sg, t)?;
        println!("{t:4.1}  {:.10}   {:.3e}", chk.gram_norm, chk.max_deviation);
    }

    // identity at t = 0 has unit norm
    let id: Vec<_> = (0..sg.dim * sg.dim)
        .map(|i| {
            if i % (sg.dim + 1) == 0 {
                num_complex::Complex64::new(1.0, 0.0)
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    println!("norm of the identity in the gram metric: {}", gram_operator_norm(&sg, &id)?);
    Ok(())
}
