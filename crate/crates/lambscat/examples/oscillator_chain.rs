//! Normalize a four-mass oscillator chain: symmetrize the tridiagonal
//! generator, diagonalize it, and inspect the normalized coupling.

use lambscat::{build_chain, build_p_closed_form, ChainSpec};

fn main() -> lambscat::Result<()> {
    let chain = ChainSpec {
        masses: vec![1.0, 2.0, 1.5, 0.5],
        springs: vec![1.0, 0.8, 1.2, 2.0],
        tension: 1.0,
    };
    let model = build_chain(&chain)?;
    println!("chain modes (lambda_i < 0, natural frequencies sqrt(-lambda_i)):");
    for (l, c) in model.lambda.iter().zip(&model.c) {
        println!("  lambda = {l:+.8}   freq = {:.8}   c = {c:+.8}", (-l).sqrt());
    }
    println!("moments mu_0..mu_3: {:?}", &model.moments[..4]);

    let p = build_p_closed_form(&model);
    println!(
        "boundary polynomial degree {} (= 2n for theta = 0), constant term {:+.6}",
        p.degree(),
        p.coeffs[0]
    );
    let prod: f64 = model.lambda.iter().map(|l| -l).product();
    println!("product of -lambda_i:                       {prod:+.6}");
    Ok(())
}
