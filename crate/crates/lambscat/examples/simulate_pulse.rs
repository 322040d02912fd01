//! Evolve a Gaussian pulse against the single-mass boundary oscillator:
//! watch the pulse arrive, the oscillator ring down at the resonance rate,
//! and the total energy stay constant.

use lambscat::{
    build_chain, build_p_closed_form, evolve, find_roots, ChainSpec, FieldProfile, InitialData,
};

fn main() -> lambscat::Result<()> {
    let model = build_chain(&ChainSpec {
        masses: vec![1.0],
        springs: vec![1.0],
        tension: 1.0,
    })?;
    let data = InitialData::compatible(
        &model,
        FieldProfile::gaussian(1.0, 5.0, 1.0),
        FieldProfile::zero(),
        vec![0.0],
        vec![0.0],
    )?;
    let traj = evolve(&model, &data, 20.0, 1e-3, None)?;

    println!("t       y(t)         |b'(t)|      E(t)");
    for (t, e) in traj.energy_samples.iter().step_by(16) {
        let (_, y, _) = traj.state_at(*t)?;
        println!(
            "{t:5.2}  {:+.6e}  {:.6e}  {:.12}",
            y[0],
            traj.b_prime_at(*t)?.abs(),
            e.total
        );
    }
    println!("relative energy drift over [0, 20]: {:.3e}", traj.energy_drift());

    let slope = traj.decay_fit(10.0, 20.0).expect("enough samples");
    let roots = find_roots(&build_p_closed_form(&model))?;
    let min_re = roots.min_resonance_decay().unwrap();
    println!("fitted decay rate {:.4} vs resonance real part {:.4}", -slope, min_re);
    Ok(())
}
