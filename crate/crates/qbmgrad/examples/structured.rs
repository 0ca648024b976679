//! Restricted, quantum–classical and classical–quantum machines and their
//! specialized gradients.

use qbmgrad::gradients::{grad_qc, pgm_povm, povm_probs, restricted_grads, RestrictedKind};
use qbmgrad::model::{identity_basis, restricted_to_param};
use qbmgrad::prelude::*;
use qbmgrad::random;

fn main() -> qbmgrad::Result<()> {
    let mut rng = random::rng(11);

    let spec = random::restricted(2, 2, 2, 2, 0.5, &mut rng);
    let rho = random::state(2, 2, &mut rng);
    let g = restricted_grads(&RestrictedKind::FullyQuantum, &spec, &Target::State(rho.clone()), Objective::Umegaki)?;
    println!("restricted: ∂a = {:.6?}\n            ∂b = {:.6?}\n            ∂w = {:.6?}", g.a, g.b, g.w);
    println!("            {} parameters", restricted_to_param(&spec)?.num_params());

    let dims = BipartiteDims::new(2, 3)?;
    let basis = random::unitary(3, &mut rng);
    let h = random::qc_model(dims, 3, 1.0, &basis, &mut rng)?;
    let qc = qc_decompose(&h, &basis)?;
    let g_qc = grad_qc(&qc, &rho, Objective::Umegaki)?;
    let g_full = grad(&thermalize(&h)?, &rho, Objective::Umegaki)?;
    println!("qc: branch weights {:.4?}", qc.p());
    println!("    gradient {:.10?}\n    full     {:.10?}", g_qc.values, g_full.values);
    let povm = pgm_povm(&qc)?;
    println!("    pretty-good measurement on ρ: {:.4?}", povm_probs(&povm, &rho)?);

    let dims = BipartiteDims::new(3, 2)?;
    let h = random::cq_model(dims, 3, 1.0, &identity_basis(3), &mut rng)?;
    let cq = cq_decompose(&h, &identity_basis(3))?;
    let r = random::distribution(3, &mut rng);
    let g_cq = grad_cq(&cq, &r, Objective::PetzTsallis(1.5))?;
    println!("cq: model {:.4?} target {:.4?}", cq.p(), r);
    println!("    Petz–Tsallis gradient {:.8?}, Q = {:.6}", g_cq.values, g_cq.q_value.unwrap_or(f64::NAN));
    Ok(())
}
