//! Degenerate the SDE coefficients one at a time and watch the steady state
//! walk the family hierarchy: bounded -> power-law tail -> exponential tail.
//!
//! ```bash
//! cargo run --release -p genbeta --example hierarchy_sweep
//! ```

use genbeta::sde::{hierarchy_sweep, IntegrationConfig, SdeSpec, SweepKnob};

fn main() -> genbeta::Result<()> {
    let n = 30_000;

    let mb = SdeSpec::mb(2.0, 0.5, 1.0, 1.0);
    let cfg = IntegrationConfig::desk(mb.relaxation_rate(), n, 5);
    println!("base model mB(gamma=2, theta=0.5, beta1=beta2=1)\n");
    println!("knob\tlimit\tks");
    for (label, knob) in [
        ("kappa1 -> 0", SweepKnob::Kappa1ToZero),
        ("kappa2 -> 0", SweepKnob::Kappa2ToZero),
    ] {
        for pt in hierarchy_sweep(&mb, knob, &cfg)? {
            println!("{label}\t{}\t{:.5}", pt.target.family(), pt.ks);
        }
    }

    let gb2 = SdeSpec::gb2(1.0, 1.0, 2.0, 1.0, 1.0);
    let cfg = IntegrationConfig::desk(gb2.relaxation_rate(), n, 5);
    for pt in hierarchy_sweep(&gb2, SweepKnob::KappaToZero, &cfg)? {
        println!("GB2, kappa -> 0\t{}\t{:.5}", pt.target.family(), pt.ks);
    }

    // The mixing model walks from the bounded member through the Gamma link
    // to the power-law member as c goes 0 -> 1/2 -> 1.
    let mix = SdeSpec::b2b1_mix(1.5, 0.5, 1.0, 1.0, 0.0);
    let cfg = IntegrationConfig::desk(mix.relaxation_rate(), n, 5);
    println!("\nB2B1mix c scan (gamma=1.5, theta=0.5, kappa=kappa_tilde=1):");
    println!("c\tsteady state\tks");
    for pt in hierarchy_sweep(&mix, SweepKnob::CGrid(vec![0.0, 0.25, 0.5, 0.75, 1.0]), &cfg)? {
        println!(
            "{}\t{}\t{:.5}",
            pt.spec.c,
            serde_json::to_string(&pt.target)?,
            pt.ks
        );
    }
    Ok(())
}
