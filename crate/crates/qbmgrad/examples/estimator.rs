//! The swap-test circuit estimator: exact averages, block encodings and
//! shot estimates with their Hoeffding budgets.

use qbmgrad::estimator::{estimate_gradient, inv_sqrt_encoding, modular_unitary, time_rules};
use qbmgrad::prelude::*;
use qbmgrad::random;

fn main() -> qbmgrad::Result<()> {
    let mut rng = random::rng(5);
    let dims = BipartiteDims::new(2, 2)?;
    let h = random::model(dims, 2, 0.8, &mut rng)?;
    let model = thermalize(&h)?;
    let rho = random::state(2, 2, &mut rng);
    let exact = grad(&model, &rho, Objective::Umegaki)?;
    println!("κ = {:.4}", model.kappa());

    let flow = modular_unitary(&model, 0.7)?;
    let inv = inv_sqrt_encoding(&model)?;
    println!("encodings: flow defect {:.1e}, inverse root α = {:.4}", flow.unitarity_defect(), inv.alpha);

    let (s_rule, t_rule) = time_rules()?;
    let circuit = Circuit::new(&model, &rho, &h.terms[0])?;
    let avg = circuit.averaged_expectation(&s_rule, &t_rule)?;
    println!("first term: circuit average {avg:.12}, exact {:.12}", exact.first_terms[0]);

    let cfg = EstimatorConfig::new(0.1, 0.05, 42);
    println!("Hoeffding shots per term at ε/2: {}", hoeffding_shots(model.kappa(), circuit.g_norm(), 0.05, 0.025));
    for (j, e) in estimate_gradient(&model, &rho, &cfg)?.iter().enumerate() {
        println!("θ_{j}: {:+.4} ± {:.4} (exact {:+.4}, {} shots)", e.value, e.stderr, exact.values[j], e.first.shots);
    }
    let single = estimate_first_term(&model, &rho, &h.terms[1], &EstimatorConfig { shots: Some(20_000), ..cfg })?;
    println!("first term of θ_1 from 20000 shots: {:.4} ± {:.4}", single.mean, single.stderr);
    Ok(())
}
