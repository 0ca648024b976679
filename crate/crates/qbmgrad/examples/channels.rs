//! The three modular channels, evaluated spectrally and by quadrature over
//! their time densities, and the Fréchet derivatives they come from.

use qbmgrad::calculus::{channel_factor, frechet_power, ExpForm, LogForm};
use qbmgrad::hermitian::eigh;
use qbmgrad::prelude::*;
use qbmgrad::random;

fn main() -> qbmgrad::Result<()> {
    let mut rng = random::rng(3);
    let b = random::hermitian(4, 3.0, &mut rng);
    let a = random::state(4, 4, &mut rng);
    let x = random::hermitian(4, 1.0, &mut rng);
    let (sb, sa) = (eigh(&b)?, eigh(a.op())?);

    println!("channel factors at u = 2:");
    for kind in [ChannelKind::ExpTent, ChannelKind::LogLogistic, ChannelKind::PowerBeta(0.5)] {
        println!("  {kind:?}: {:.12}", channel_factor(kind, 2.0));
    }

    let q = EvalMode::quadrature_default();
    for (kind, s) in [(ChannelKind::ExpTent, &sb), (ChannelKind::LogLogistic, &sa), (ChannelKind::PowerBeta(-0.5), &sa)] {
        let spectral = apply_channel(kind, s, &x, EvalMode::Spectral)?;
        let quad = apply_channel(kind, s, &x, q)?;
        println!("{kind:?}: spectral vs quadrature {:.2e}", spectral.max_abs_diff(&quad));
    }

    let e1 = frechet_exp(&b, &x, ExpForm::Duhamel)?;
    let e2 = frechet_exp(&b, &x, ExpForm::Fourier)?;
    println!("D exp: Duhamel vs Fourier {:.2e}", e1.max_abs_diff(&e2));
    let l1 = frechet_log(a.op(), &x, LogForm::Resolvent)?;
    let l2 = frechet_log(a.op(), &x, LogForm::Fourier)?;
    println!("D log: resolvent vs Fourier {:.2e}", l1.max_abs_diff(&l2));
    let p = frechet_power(a.op(), &x, 0.5)?;
    println!("D sqrt: trace {:.6}", p.trace());
    Ok(())
}
