//! Total variation, half-weighted atoms and the upper-bound kernel of a bath.

use liebsim::kernels::{build_upper_bound, MemoryKernel};
use num_complex::Complex64 as C64;

fn main() -> liebsim::Result<()> {
    let k = MemoryKernel::exponential(1.0)?.with_atom(C64::new(0.5, 0.5), 2.0)?;
    println!("TV(K)            = {:.6}", k.total_variation(None)?);
    println!("TV(K; [0, 2])    = {:.6}  (atom on the edge counts half)", k.total_variation(Some((0.0, 2.0)))?);
    println!("TV(K; [0, 3])    = {:.6}", k.total_variation(Some((0.0, 3.0)))?);
    println!("K^(1)            = {:.6}", k.fourier(1.0)?);

    let reflected = k.transformed(C64::new(0.0, 1.0), true);
    let u = build_upper_bound(&[k, reflected])?;
    println!("TV(U)            = {:.6}", u.total_variation(None)?);
    for t in [0.0, 0.5, 1.0, 2.0] {
        println!("U_c({t:.1})         = {:.6}", u.eval_continuous(t));
    }
    Ok(())
}
