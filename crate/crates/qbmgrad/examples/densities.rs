//! Time densities: values, tail bounds and seeded sampling.

use qbmgrad::densities::{cdf, pdf, tail_mass, tail_mass_bound};
use qbmgrad::prelude::*;

fn main() -> qbmgrad::Result<()> {
    let all = [Density::HighPeakTent, Density::Logistic, Density::BetaR(0.5), Density::BetaR(-0.5)];
    for d in all {
        println!("{d:?}");
        println!("  pdf(1) = {:.12}", pdf(d, 1.0)?);
        println!("  tail(10) = {:.4e} <= bound {:.4e}", tail_mass(d, 10.0)?, tail_mass_bound(d, 10.0)?);
        let mut s = SeededSampler::new(d, 2024)?;
        let n = 50_000;
        let below = (0..n).filter(|_| s.sample() <= 0.5).count();
        println!("  P(t <= 0.5): empirical {:.4}, exact {:.4}", below as f64 / n as f64, cdf(d, 0.5)?);
    }
    Ok(())
}
