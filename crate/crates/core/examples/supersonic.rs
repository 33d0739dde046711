//! The pulsed qubit-oscillator protocol: transport beyond the light cone.

use liebsim::supersonic::{bound_violation_report, build_protocol, simulate_protocol, simulate_restricted};

fn main() -> liebsim::Result<()> {
    let m: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let p = build_protocol(m)?;
    let n_max = p.photons() + 2;
    println!("m = {m}: {} qubits, {} hops, duration {}", p.qubits(), p.hops(), p.duration());

    let full = simulate_protocol(&p, n_max)?;
    print!("{}", full.to_csv());
    let l = p.hops() - 1;
    let restricted = simulate_restricted(&p, l, n_max)?;
    let report = bound_violation_report(&p, l, &full, &restricted, &[0.0, 1.0, 10.0])?;
    println!("{}", report.to_json()?);
    Ok(())
}
