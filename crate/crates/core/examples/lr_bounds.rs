//! Lieb-Robinson velocity and restriction bound as memory grows.

use liebsim::lattice::{lr_velocity, prop1_bound, prop1_log_bound, Prop1Inputs};

fn main() -> liebsim::Result<()> {
    println!("{:>6} {:>12} {:>14} {:>14}", "TV(U)", "v_LR", "bound(l=20)", "log10 bound");
    for tv_u in [0.0, 0.1, 0.5, 1.0, 5.0] {
        let p = Prop1Inputs { o_norm: 1.0, diam_x: 0.0, l: 20.0, dt: 0.01, a0: 1.0, z: 2.0, tv_u, d: 1 };
        let v = lr_velocity(p.a0, p.z, tv_u)?;
        let log10 = prop1_log_bound(&p)? / std::f64::consts::LN_10;
        println!("{tv_u:>6} {v:>12.4} {:>14.4e} {log10:>14.4}", prop1_bound(&p)?);
    }
    // The front: smallest l where the bound drops below 1e-3 at t = 0.05.
    for tv_u in [0.0, 1.0] {
        let l = (0..100_000)
            .map(f64::from)
            .find(|&l| {
                let p = Prop1Inputs { o_norm: 1.0, diam_x: 0.0, l, dt: 0.05, a0: 1.0, z: 2.0, tv_u, d: 1 };
                prop1_log_bound(&p).is_ok_and(|b| b < (1e-3f64).ln())
            })
            .unwrap();
        println!("TV(U) = {tv_u}: bound < 1e-3 beyond l = {l}");
    }
    Ok(())
}
