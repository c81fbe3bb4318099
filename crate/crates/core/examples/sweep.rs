//! Prints the minimal sample count for each method and sparsity level.
//!
//! ```text
//! cargo run --release -p dstump --example sweep -- [uniform01|gaussian] [methods...]
//! ```

use std::time::Instant;

use dstump::harness::{min_samples, Method, ModelTemplate};
use dstump::synth::DesignDistribution;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let design: DesignDistribution = args.next().as_deref().unwrap_or("uniform01").parse()?;
    let mut methods: Vec<Method> = args.map(|a| a.parse()).collect::<Result<_, _>>()?;
    if methods.is_empty() {
        methods = vec![
            Method::DStumpMedian,
            Method::DStumpOptimal,
            Method::DStumpLeftOnly,
            Method::Lasso,
        ];
    }
    println!("method,s,n_star,fraction,seconds");
    for m in methods {
        for s in [5, 10, 20, 40] {
            let t = Instant::now();
            let template = ModelTemplate::linear(200, s, design, 0.1);
            let lo = (s + 1).max(m.min_samples());
            let r = min_samples(m, &template, 0.95, 25, (lo, 16 * s), 0)?;
            println!(
                "{m},{s},{},{:.4},{:.1}",
                r.n_star,
                r.achieved_fraction,
                t.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
