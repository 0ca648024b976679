//! Exact gradients of a two-qubit machine, checked against finite differences.

use qbmgrad::prelude::*;
use qbmgrad::random;
use qbmgrad::trainer::finite_diff_gradient;

fn main() -> qbmgrad::Result<()> {
    let dims = BipartiteDims::new(2, 2)?;
    let terms = ["ZI", "IX", "XX", "YZ"].iter().map(|s| pauli(s)).collect::<Result<Vec<_>>>()?;
    let h = ParamHamiltonian::new(dims, terms, vec![0.4, -0.3, 0.7, 0.2])?;
    let rho = random::state(2, 2, &mut random::rng(1));
    let machine = Machine::Generic(h.clone());
    let target = Target::State(rho.clone());
    let model = thermalize(&h)?;

    for obj in [Objective::Umegaki, Objective::PetzTsallis(0.5), Objective::PetzTsallis(1.5)] {
        let g = grad(&model, &rho, obj)?;
        let fd = finite_diff_gradient(&machine, &target, obj, 1e-5)?;
        println!("{obj:?}: D = {:.6}", relative_entropy(&rho, model.sigma_v(), obj)?);
        for (j, (a, b)) in g.values.iter().zip(&fd).enumerate() {
            println!("  θ_{j}: {a:+.10}  fd {b:+.10}  first {:+.6} second {:+.6}", g.first_terms[j], g.second_terms[j]);
        }
    }
    Ok(())
}
