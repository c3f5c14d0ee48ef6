//! CSV formatting. Numbers carry 17 significant digits so that files
//! round-trip exactly and repeated runs are byte-identical.

use splitdyn::diagnostics::EnergyRecord;
use splitdyn::discrete::IterateRun;
use splitdyn::dynamics::Trajectory;
use splitdyn::vecmath::norm;

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Column order: t, x[..], xdot[..], norm_xdot, norm_T, norm_residual,
/// energy, objective (empty when unavailable).
pub fn trajectory_csv(
    traj: &Trajectory,
    energies: &[EnergyRecord],
    objective: Option<&[f64]>,
) -> String {
    let dim = traj.problem.dim();
    let mut out = String::new();
    out.push('t');
    for i in 0..dim {
        out.push_str(&format!(",x{i}"));
    }
    for i in 0..dim {
        out.push_str(&format!(",xdot{i}"));
    }
    out.push_str(",norm_xdot,norm_T,norm_residual,energy,objective\n");

    for (i, s) in traj.samples.iter().enumerate() {
        let mut row = vec![fmt_num(s.t)];
        row.extend(s.x.iter().map(|v| fmt_num(*v)));
        row.extend(s.xdot.iter().map(|v| fmt_num(*v)));
        row.push(fmt_num(s.speed));
        row.push(fmt_num(norm(&s.t_op)));
        row.push(fmt_num(norm(&s.residual)));
        row.push(fmt_num(energies[i].energy));
        row.push(match objective {
            Some(vals) => fmt_num(vals[i]),
            None => String::new(),
        });
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Column order: k, x[..], norm_dx_times_k, norm_residual_times_gamma,
/// norm_xy_times_k, inner_iters.
pub fn iterate_csv(run: &IterateRun) -> String {
    let dim = run
        .records
        .first()
        .map(|r| r.x.len())
        .unwrap_or(0);
    let mut out = String::new();
    out.push('k');
    for i in 0..dim {
        out.push_str(&format!(",x{i}"));
    }
    out.push_str(",norm_dx_times_k,norm_residual_times_gamma,norm_xy_times_k,inner_iters\n");
    for r in &run.records {
        let gamma_k = run.params.gamma_k(r.k);
        let mut row = vec![r.k.to_string()];
        row.extend(r.x.iter().map(|v| fmt_num(*v)));
        row.push(fmt_num(r.k as f64 * r.dx_norm));
        row.push(fmt_num(gamma_k * r.residual_norm));
        row.push(fmt_num(r.k as f64 * r.xy_norm));
        row.push(r.inner_iters.to_string());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
