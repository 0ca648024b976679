//! A classical restricted Boltzmann machine trained on a distribution from
//! a teacher machine, with exact and Monte Carlo gradients.

use qbmgrad::gradients::{classical_gradient, classical_objective};
use qbmgrad::prelude::*;
use qbmgrad::random;
use qbmgrad::trainer::{monte_carlo_gradient, train_classical};

fn main() -> qbmgrad::Result<()> {
    let teacher = ClassicalBm::restricted_bits(2, 1, vec![0.8, -1.2, 0.5, 1.0, -0.7])?;
    let target = teacher.marginal();
    let student = teacher.with_theta(&[0.1, -0.1, 0.2, -0.3, 0.15]);
    println!("target {target:.4?}");

    let exact = classical_gradient(&student, &target)?;
    let (mc, se) = monte_carlo_gradient(&student, &target, 20_000, &mut random::rng(3))?;
    for j in 0..exact.len() {
        println!("θ_{j}: exact {:+.5}  sampled {:+.5} ± {:.5}", exact[j], mc[j], se[j]);
    }

    let traj = train_classical(&student, &target, &TrainConfig { log_every: 500, ..TrainConfig::exact(0.5, 3000) })?;
    for r in &traj.rows {
        println!("{:5}  D = {:.3e}", r.iter, r.objective);
    }
    let learned = student.with_theta(traj.final_theta());
    println!("learned marginal {:.4?}", learned.marginal());
    println!("Tsallis-2 divergence {:.3e}", classical_objective(&learned, &target, Objective::PetzTsallis(2.0))?);
    Ok(())
}
