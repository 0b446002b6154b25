use std::time::Instant;

use qsr::gkls::build_generator;
use qsr::oracle::{
    build_hamiltonian, discretize_bath, error_curve, working_window, BathDiscretization, ErrorCurveSettings, EvolveSettings,
    TruncatedSpace,
};
use qsr::propagator::ApproxPropagator;
use qsr::spin::pauli;
use qsr::BathKernel;

fn main() -> qsr::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n_modes: usize = args.get(1).map_or(200, |s| s.parse().unwrap());
    let cap: usize = args.get(2).map_or(2, |s| s.parse().unwrap());
    let tol: f64 = args.get(3).map_or(1e-4, |s| s.parse().unwrap());
    let dt: f64 = args.get(4).map_or(0.5, |s| s.parse().unwrap());
    let gs: Vec<f64> = args.get(5).map_or(vec![0.2, 0.1, 0.05], |s| s.split(',').map(|x| x.parse().unwrap()).collect());
    let kernel = BathKernel::standard();
    let d = kernel.d_coefficients()?;
    let spec = BathDiscretization { n_modes, ..Default::default() };
    let (modes, _) = discretize_bath(&kernel, &spec, 1.0)?;
    let target = 3.0 / (2.0 * 0.05 * 0.05 * d.re_d1());
    let t0 = Instant::now();
    let window = working_window(&kernel, &modes, target, tol, 0.05)?;
    let moment = modes.kernel_mismatch_moment(&kernel, window, 0.05)?;
    println!("window {window} moment {moment:e} ({:?})", t0.elapsed());
    let space = TruncatedSpace::new(modes.total_modes(), cap, 1 << 22)?;
    let h = build_hamiltonian(&modes, 1.0, 0.0, &space)?;
    println!("dim {} nnz {} ({:?})", h.dimension(), h.nnz(), t0.elapsed());
    let approx = ApproxPropagator::new(&build_generator(&d)?, 1.0)?;
    let n = (window / dt).floor() as usize;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let settings = ErrorCurveSettings { times, evolve: EvolveSettings::default(), kernel_moment: moment };
    let c = error_curve(&h, &approx, &pauli(3)?, &gs, &settings)?;
    for r in &c.rows {
        println!("g {} E {:.4e} at t {} E/g2 {:.4} growth {:.3}", r.g, r.sup_error, r.argmax_t, r.scaled, r.growth);
        let step = (r.trace.len() / 12).max(1);
        let s: Vec<String> = r.trace.iter().step_by(step).map(|e| format!("{e:.2e}")).collect();
        println!("   {}", s.join(" "));
    }
    println!(
        "floor {:.3e} (prop {:.3e}, kernel {:.3e}) status {:?} ratio {:?} spread {:?} sred {:.1e} ({:?})",
        c.floor, c.propagation_floor, c.kernel_floor, c.status, c.ratio_consistency, c.scaled_spread, c.sred_defect, t0.elapsed()
    );
    Ok(())
}
