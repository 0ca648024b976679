//! Gradient descent with exact and shot gradients on a one-qubit target.

use qbmgrad::prelude::*;

fn main() -> qbmgrad::Result<()> {
    let dims = BipartiteDims::new(2, 1)?;
    let h = ParamHamiltonian::new(dims, vec![pauli("Z")?], vec![0.0])?;
    let machine = Machine::Generic(h);
    let target = Target::State(QuantumState::diagonal(&[0.8, 0.2])?);
    let theta_star = 0.5 * (0.2f64 / 0.8).ln();

    let exact = train(&machine, &target, &TrainConfig { log_every: 25, ..TrainConfig::exact(0.5, 100) })?;
    for r in &exact.rows {
        println!("{:4}  D = {:.3e}  |g| = {:.3e}  θ = {:+.8}", r.iter, r.objective, r.grad_norm, r.theta[0]);
    }
    println!("θ* = {theta_star:+.8}");

    let shots = EstimatorConfig { shots: Some(4_000), ..EstimatorConfig::new(0.1, 0.05, 7) };
    let cfg = TrainConfig { gradient_mode: GradientMode::Shot(shots), log_every: 10, ..TrainConfig::exact(0.5, 40) };
    let noisy = train(&machine, &target, &cfg)?;
    println!("shot training: θ = {:+.4}, D = {:.3e}, rejected steps {}", noisy.final_theta()[0], noisy.final_objective(), noisy.rejected_steps);
    Ok(())
}
