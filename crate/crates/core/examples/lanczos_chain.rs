//! Chain coefficients of an exponential bath, written as CSV.

use liebsim::chain::{DilationParams, SpectralDensity};
use liebsim::kernels::MemoryKernel;

fn main() -> liebsim::Result<()> {
    let v = MemoryKernel::exponential(1.0)?;
    let grid: Vec<f64> = (-4..=4).map(f64::from).collect();
    let sd = SpectralDensity::from_kernel(v.clone(), 0.1, &grid)?;
    for (w, x) in sd.omegas().iter().zip(sd.values()) {
        println!("V^({w:+.0}) = {x:.6}");
    }
    let chain = DilationParams::new(0.1, 10.0, 8)?.chain_for(&v)?;
    print!("{}", chain.to_csv());
    let (nodes, weights) = chain.spectral_measure();
    println!("Gauss nodes   {nodes:.4?}");
    println!("Gauss weights {weights:.4?}");
    Ok(())
}
