//! Integrate the bounded mean-reverting SDE and verify that the ensemble
//! matches its closed-form steady state.
//!
//! ```bash
//! cargo run --release -p genbeta --example sde_steady_state
//! ```

use genbeta::fit;
use genbeta::sde::{IntegrationConfig, SdeSpec};

fn main() -> genbeta::Result<()> {
    // dx = −γ(x−θ)dt + √(x(1−x/β₁)(1+x/β₂)) dW on (0, 1)
    let spec = SdeSpec::mb(2.0, 0.5, 1.0, 1.0);
    let target = spec.param_map()?;
    println!("model: mB with gamma=2, theta=0.5, beta1=beta2=1");
    println!("steady state: {}", serde_json::to_string(&target)?);

    let config = IntegrationConfig::desk(spec.relaxation_rate(), 50_000, 7);
    println!(
        "integrating: dt={}, burn_in={}, thin={}, paths={}, {} samples/path",
        config.dt, config.burn_in, config.thin, config.paths, config.samples_per_path
    );
    let ensemble = spec.integrate(&config)?;
    let ks = fit::ks_statistic(&ensemble.samples, &target)?;
    let threshold = fit::ks_threshold(ensemble.effective_count, 0.05)?;
    println!(
        "n={} reflections={} (per 1e6 steps: {:.2})",
        ensemble.effective_count,
        ensemble.reflections,
        ensemble.reflections as f64 / ensemble.steps as f64 * 1e6
    );
    println!(
        "KS distance to the closed form: {ks:.5} (5% threshold {threshold:.5}) -> {}",
        if ks < threshold { "pass" } else { "fail" }
    );

    // Empirical deciles against closed-form quantiles.
    let mut xs = ensemble.samples.clone();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("\ndecile\tempirical\tclosed form");
    for d in 1..10 {
        let u = d as f64 / 10.0;
        let emp = xs[(u * xs.len() as f64) as usize];
        println!("{u:.1}\t{emp:.4}\t{:.4}", target.quantile(u)?);
    }
    Ok(())
}
