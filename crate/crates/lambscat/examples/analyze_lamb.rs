//! Spectral analysis of the classic single-mass model: build the boundary
//! polynomial by both constructions, find and classify its roots, and check
//! the empty-point-spectrum criterion.

use lambscat::{
    build_chain, build_p_closed_form, build_p_vandermonde, classify_roots, find_roots,
    point_spectrum, pp_empty_check, ChainSpec,
};

fn main() -> lambscat::Result<()> {
    // unit mass on a unit spring at the end of a unit-tension string
    let model = build_chain(&ChainSpec {
        masses: vec![1.0],
        springs: vec![1.0],
        tension: 1.0,
    })?;
    println!("normalized model: lambda = {:?}, c = {:?}, theta = {}", model.lambda, model.c, model.theta);

    let p = build_p_closed_form(&model);
    let pv = build_p_vandermonde(&model)?;
    println!("boundary polynomial (ascending): {:?}", p.coeffs);
    let disc = p
        .coeffs
        .iter()
        .zip(&pv.coeffs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    println!("construction discrepancy: {disc:.3e}");

    let roots = classify_roots(&model, &find_roots(&p)?)?;
    for r in &roots.roots {
        println!(
            "root {:+.6} {:+.6}i  (multiplicity {})",
            r.value.re, r.value.im, r.multiplicity
        );
    }
    println!("eigenvalue roots: {}, resonances: {}", roots.eigen_roots.len(), roots.resonances.len());

    let sd = point_spectrum(&model)?;
    println!(
        "essential spectrum {}, point spectrum empty: {} (criterion: {})",
        sd.essential,
        sd.pp_empty,
        pp_empty_check(&model)
    );
    Ok(())
}
