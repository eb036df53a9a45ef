//! Runs a reduced highway study and the bench sweep, printing the gain
//! table the full study reports. Handy for eyeballing a config change
//! without waiting for the 1000-drop defaults.

use cirs_core::config::RawConfig;
use cirs_core::experiment::{run_chamber, run_v2v_sweep, Mode, SnrAveraging};

fn main() {
    let raw = RawConfig::from_json("{}").unwrap();
    let mut cfg = raw.sweep_config().unwrap();
    cfg.drops_per_point = 200;
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--linear") {
        cfg.averaging = SnrAveraging::LinearMean;
    }
    if let Some(i) = args.iter().position(|a| a == "--drops") {
        cfg.drops_per_point = args[i + 1].parse().unwrap();
    }
    if let Some(i) = args.iter().position(|a| a == "--seed") {
        cfg.global_seed = args[i + 1].parse().unwrap();
    }
    if args.iter().any(|a| a == "--no-cris") {
        cfg.modes = vec![Mode::Direct, Mode::Cirs];
    }
    let t0 = std::time::Instant::now();
    let results = run_v2v_sweep(cfg.clone()).unwrap();
    eprintln!("sweep took {:.1?}", t0.elapsed());

    let mut csv = Vec::new();
    results.write_csv(&mut csv).unwrap();
    print!("{}", String::from_utf8(csv).unwrap());

    let row = |mode: Mode, rho: f64, p: f64| {
        results
            .rows
            .iter()
            .find(|r| r.mode == mode && r.rho == rho && r.p == p)
            .unwrap()
    };
    let has_cris = cfg.modes.contains(&Mode::Cris);
    for &rho in &cfg.rho_list {
        for &p in &cfg.p_grid {
            let d = row(Mode::Direct, rho, p);
            let c = row(Mode::Cirs, rho, p);
            let r = if has_cris { row(Mode::Cris, rho, p) } else { c };
            let se = |s: &cirs_core::experiment::SnrStats| {
                s.std_snr_db / (s.drops as f64).sqrt()
            };
            println!(
                "rho={rho:>4} P={p:<4} direct={:>7.2} cirs={:>7.2} (gain {:>6.2}, se {:.2}) cris={:>7.2} (gain {:>6.2}) blk={:.2} skip={}",
                d.mean_snr_db,
                c.mean_snr_db,
                c.mean_snr_db - d.mean_snr_db,
                se(c),
                r.mean_snr_db,
                r.mean_snr_db - d.mean_snr_db,
                d.blockage_rate,
                r.skipped_near_field,
            );
        }
    }

    let chamber = run_chamber(&raw.chamber_config().unwrap()).unwrap();
    println!(
        "chamber: gain {:.2} dB, ref width {:.2} deg, patterned width {:.2} deg",
        chamber.focusing_gain_db,
        chamber.reference_width_rad.to_degrees(),
        chamber.patterned_width_rad.to_degrees()
    );
}
