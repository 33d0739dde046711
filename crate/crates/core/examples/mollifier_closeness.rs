//! Distance between a kernel with a delayed-feedback atom and its mollification.

use liebsim::kernels::{closeness_test, lemma_lambdas, mollify, MemoryKernel, TestFunction};
use num_complex::Complex64 as C64;

fn main() -> liebsim::Result<()> {
    let k = MemoryKernel::exponential(1.0)?.with_atom(C64::new(1.0, 0.0), 1.0)?;
    let fs = vec![
        TestFunction::smooth("sin", f64::sin, 1.0, 1.0),
        TestFunction::smooth("gauss", |x: f64| (-x * x).exp(), 1.0, 2f64.sqrt() * (-0.5f64).exp()),
        TestFunction::step("step at 0", 0.0, -1.0, 1.0),
        TestFunction::step("step at 1", 1.0, 0.0, 1.0),
    ];
    let breakpoints = [0.0, 1.0];
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "delta", "fit l0", "fit l1", "lemma l0", "lemma l1");
    for delta in [0.2, 0.1, 0.05, 0.025] {
        let m = mollify(&k, delta, delta)?;
        let r = closeness_test(&k, &m, &breakpoints, &fs)?;
        let (l0, l1) = lemma_lambdas(&k, &breakpoints, 2.0 * delta)?;
        println!("{delta:>6} {:>12.3e} {:>12.3e} {l0:>12.3e} {l1:>12.3e}", r.lambda0, r.lambda1);
        assert!(r.violations(l0, l1, 0.0).is_empty());
    }
    Ok(())
}
