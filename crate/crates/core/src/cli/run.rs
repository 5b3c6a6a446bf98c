use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use super::config::{Command, RotationSection, RunConfig};
use super::CliError;
use crate::eos::{EquationOfState, ScaleSet};
use crate::equilibrium::{
    continuation_in_beta, extended_theta, hl_certificate, solve_equilibrium, solve_equilibrium_j,
    EquilibriumSolution,
};
use crate::mass::{constant_mass_curve, curve_csv, curve_monotonicity, MassModel};
use crate::perturb::{compute_h_field, measured_oblateness, oblateness, resolvent_h_field};
use crate::potential::field::AxiField;
use crate::potential::verify::{laplacian_study, multipole_direct_gap, uniform_ball_error};
use crate::radial::{solve_lane_emden_default, RadialProfile};
use crate::rotation::{b_from_omega, CentrifugalField};

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Record of one run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub command: Command,
    pub config_sha256: String,
    pub files: Vec<Artifact>,
}

fn hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn load_config(path: &Path) -> Result<(RunConfig, Vec<u8>), CliError> {
    let raw = fs::read(path).map_err(io_err(path))?;
    let text = String::from_utf8(raw.clone()).map_err(|_| CliError::Config {
        field: "config".into(),
        reason: "not valid UTF-8".into(),
    })?;
    Ok((RunConfig::parse(&text, path)?, raw))
}

struct Sink {
    dir: PathBuf,
    csv: bool,
    json: bool,
    files: Vec<Artifact>,
}

impl Sink {
    fn write(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let target = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(data).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, &target).map_err(io_err(&target))?;
        info!("wrote {}", target.display());
        self.files.push(Artifact {
            path: name.into(),
            sha256: hex(data),
            bytes: data.len(),
        });
        Ok(())
    }

    fn csv(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        if self.csv {
            self.write(name, body.as_bytes())?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if self.json {
            let mut s = serde_json::to_string_pretty(value).expect("serializable");
            s.push('\n');
            self.write(name, s.as_bytes())?;
        }
        Ok(())
    }
}

struct Setup {
    eos: EquationOfState,
    profile: RadialProfile,
    init: AxiField,
    scale: ScaleSet,
}

fn setup(cfg: &RunConfig) -> Result<Setup, CliError> {
    let eos = cfg.eos()?;
    let profile = solve_lane_emden_default(&eos, cfg.physics.u_o, cfg.solver.ode_tol)?;
    let grid = cfg.grid.grid(profile.xi1)?;
    let init = extended_theta(&profile, grid);
    let scale = ScaleSet::from_central_enthalpy(&eos, cfg.physics.u_o, cfg.physics.g_grav)?;
    Ok(Setup {
        eos,
        profile,
        init,
        scale,
    })
}

fn boundary_csv(sol: &EquilibriumSolution) -> String {
    let mut s = String::from("zeta,R\n");
    for (z, r) in sol.zeta_nodes.iter().zip(&sol.r_of_zeta) {
        let _ = writeln!(s, "{z:.16e},{r:.16e}");
    }
    s
}

fn solve_rotation(cfg: &RunConfig, st: &Setup) -> Result<EquilibriumSolution, CliError> {
    let opts = cfg.solver.options();
    let grid = st.init.grid.clone();
    let u_o = cfg.physics.u_o;
    let sol = match &cfg.rotation {
        RotationSection::None => {
            solve_equilibrium(&CentrifugalField::zero(grid), &st.eos, u_o, &st.init, &opts)?
        }
        RotationSection::Beta { beta } => solve_equilibrium(
            &CentrifugalField::rigid(*beta, grid),
            &st.eos,
            u_o,
            &st.init,
            &opts,
        )?,
        r => {
            let law = r.law().expect("physical law");
            if law.is_angular_momentum() {
                solve_equilibrium_j(&law, &st.eos, &st.scale, &st.init, &opts)?
            } else {
                let g = b_from_omega(&law, &st.scale, &st.eos, grid)?;
                solve_equilibrium(&g, &st.eos, u_o, &st.init, &opts)?
            }
        }
    };
    Ok(sol)
}

fn summary(sol: &EquilibriumSolution, xi1: f64) -> Result<serde_json::Value, CliError> {
    let re = sol.equatorial_radius()?;
    let rp = sol.polar_radius()?;
    Ok(json!({
        "beta": sol.beta,
        "equatorial_radius": re,
        "polar_radius": rp,
        "oblateness": (re - rp) / xi1,
        "residual": sol.residual(),
        "iterations": sol.residual_history.len(),
        "hl_sigma_min": sol.hl_sigma_min,
        "admissible": sol.admissibility.all(),
        "admissibility": sol.admissibility,
    }))
}

fn cmd_lane_emden(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let eos = cfg.eos()?;
    let p = solve_lane_emden_default(&eos, cfg.physics.u_o, cfg.solver.ode_tol)?;
    println!("xi1 = {:.16e}\nmu1 = {:.16e}", p.xi1, p.mu1);
    sink.csv("profile.csv", &p.to_csv())?;
    sink.json(
        "lane_emden.json",
        &json!({ "nu": eos.nu, "xi1": p.xi1, "mu1": p.mu1 }),
    )
}

fn cmd_solve(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let st = setup(cfg)?;
    let xi1 = st.profile.xi1;
    let sol = if cfg.solver.beta_schedule.is_empty() {
        solve_rotation(cfg, &st)?
    } else {
        let sols = continuation_in_beta(
            &cfg.solver.beta_schedule,
            &st.eos,
            cfg.physics.u_o,
            &st.init,
            &cfg.solver.options(),
        )
        .into_result()?;
        let mut csv = String::from("beta,R_eq,R_pole,sigma,residual,hl_sigma_min\n");
        for s in &sols {
            let (re, rp) = (s.equatorial_radius()?, s.polar_radius()?);
            let _ = writeln!(
                csv,
                "{:.16e},{re:.16e},{rp:.16e},{:.16e},{:.16e},{:.16e}",
                s.beta.unwrap_or(0.0),
                (re - rp) / xi1,
                s.residual(),
                s.hl_sigma_min
            );
        }
        sink.csv("continuation.csv", &csv)?;
        sols.into_iter().last().expect("nonempty schedule")
    };
    let report = summary(&sol, xi1)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializable")
    );
    sink.json("summary.json", &report)?;
    sink.json("solution.json", &sol)?;
    sink.csv("u.csv", &sol.u_csv())?;
    sink.csv("boundary.csv", &boundary_csv(&sol))
}

fn cmd_oblateness(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let st = setup(cfg)?;
    let p = &st.profile;
    let h = compute_h_field(p)?;
    let resolvent = resolvent_h_field(p, st.init.grid.clone())?;
    let mut gap = 0.0f64;
    for (i, &r) in st.init.grid.r_nodes.iter().enumerate() {
        if r <= p.xi1 {
            gap = gap.max((resolvent.mode(2)[i] - h.h2.eval(r)).abs());
        }
    }
    let mut rep = oblateness(p, &h, cfg.oblateness.beta, &cfg.oblateness.zeta)?;
    if cfg.oblateness.measure {
        let g = CentrifugalField::rigid(cfg.oblateness.beta, st.init.grid.clone());
        let sol = solve_equilibrium(
            &g,
            &st.eos,
            cfg.physics.u_o,
            &st.init,
            &cfg.solver.options(),
        )?;
        rep.sigma_measured = Some(measured_oblateness(&sol, p.xi1)?);
    }
    println!(
        "sigma/beta = {:.16e}\nh2(xi1) = {:.16e}\nrepresentation vs resolvent gap = {gap:.3e}",
        rep.sigma_linear, rep.h2_at_xi1
    );
    let mut csv = String::from("r,h0,h2\n");
    for &r in &h.h2.r_nodes {
        let _ = writeln!(csv, "{r:.16e},{:.16e},{:.16e}", h.h0.eval(r), h.h2.eval(r));
    }
    sink.csv("h.csv", &csv)?;
    sink.json(
        "oblateness.json",
        &json!({ "report": rep, "shooting_gap": h.shooting_gap, "resolvent_gap": gap }),
    )
}

fn cmd_mass_curve(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let m = cfg.mass.as_ref().expect("validated");
    let model = MassModel::new(
        cfg.eos()?,
        cfg.physics.g_grav,
        cfg.grid,
        cfg.solver.options(),
    )?;
    let m_bar = match (m.m_target, m.rho_ref) {
        (Some(v), _) => v,
        (None, Some(rho)) => model.point(rho, 0.0)?.m,
        _ => unreachable!("validated"),
    };
    let pts = constant_mass_curve(&model, m_bar, &m.omega2, (m.bracket[0], m.bracket[1]))?;
    for p in &pts {
        println!(
            "Omega2 = {:.6e}  rho_O = {:.12e}  M = {:.12e}",
            p.omega2, p.rho_o, p.m
        );
    }
    sink.csv("curve.csv", &curve_csv(&pts))?;
    let mono = curve_monotonicity(&model, &pts, (m.bracket[0], m.bracket[1]), 5)?;
    sink.json(
        "curve.json",
        &json!({ "m_target": m_bar, "points": pts, "monotonicity": mono }),
    )
}

fn cmd_kernel_check(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let g = &cfg.grid;
    let ball = uniform_ball_error(1.0, g.n_r.max(129) | 1, g.n_zeta)?;
    let gap = multipole_direct_gap(64, 32)?;
    let lap = laplacian_study(&[64, 128, 256])?;
    let order = lap.orders.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("uniform ball error = {ball:.3e}\nmultipole vs direct = {gap:.3e}\nlaplacian order = {order:.3}");
    sink.json(
        "kernel_check.json",
        &json!({
            "uniform_ball_error": ball,
            "multipole_direct_gap": gap,
            "laplacian": lap,
            "pass": ball <= 1e-6 && gap <= 1e-5 && order >= 1.8,
        }),
    )
}

fn cmd_hl_check(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let st = setup(cfg)?;
    let theta_sigma = hl_certificate(&st.init, &st.eos, cfg.physics.u_o, None)?;
    let opts = cfg.solver.options();
    let cfg_certified = RunConfig {
        solver: super::config::SolverSection {
            certify: true,
            ..cfg.solver.clone()
        },
        ..cfg.clone()
    };
    let sol = solve_rotation(&cfg_certified, &st)?;
    let pass = theta_sigma > opts.hl_threshold && sol.hl_sigma_min > opts.hl_threshold;
    println!(
        "sigma_min at theta = {theta_sigma:.6e}\nsigma_min at solution = {:.6e}\nthreshold = {:.1e}",
        sol.hl_sigma_min, opts.hl_threshold
    );
    sink.json(
        "hl_check.json",
        &json!({
            "sigma_min_theta": theta_sigma,
            "sigma_min_solution": sol.hl_sigma_min,
            "blocks": sol.hl_blocks,
            "threshold": opts.hl_threshold,
            "pass": pass,
        }),
    )
}

/// Execute `cfg`, writing artifacts and a manifest into `out_dir`.
pub fn run(cfg: &RunConfig, config_bytes: &[u8], out_dir: &Path) -> Result<Manifest, CliError> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut sink = Sink {
        dir: out_dir.to_path_buf(),
        csv: cfg.output.csv,
        json: cfg.output.json,
        files: Vec::new(),
    };
    match cfg.command {
        Command::LaneEmden => cmd_lane_emden(cfg, &mut sink)?,
        Command::Solve => cmd_solve(cfg, &mut sink)?,
        Command::Oblateness => cmd_oblateness(cfg, &mut sink)?,
        Command::MassCurve => cmd_mass_curve(cfg, &mut sink)?,
        Command::KernelCheck => cmd_kernel_check(cfg, &mut sink)?,
        Command::HlCheck => cmd_hl_check(cfg, &mut sink)?,
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").into(),
        command: cfg.command,
        config_sha256: hex(config_bytes),
        files: std::mem::take(&mut sink.files),
    };
    sink.json = true;
    sink.json("manifest.json", &manifest)?;
    Ok(manifest)
}
