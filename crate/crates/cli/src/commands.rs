use rayon::prelude::*;
use serde_json::Value;

use prewell_core::bilayer::{bilayer_transmission, limit_transmission, peak_valley_report, PeakValleyConfig};
use prewell_core::bound_states::{
    bilayer_spectrum, find_spectrum, limit_spectrum, track_spectra, BoundSpectrum, TrackEvent,
};
use prewell_core::checks::{run_suite, CheckLine, Suite};
use prewell_core::potential::{BilayerSpec, PotentialProfile, SqueezeExponent, SqueezeSpec};
use prewell_core::scattering::{resonance_index, resonance_set, scatter, RESONANCE_TOLERANCE};
use prewell_core::transfer::{profile_matrix, segment_matrix};
use prewell_core::units::{Energy, UnitSystem};

use crate::config::*;
use crate::table::{label, Cell, Table};
use crate::CliError;

/// Tables to write plus diagnostic notes for stderr.
pub struct Output {
    pub config: Value,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

fn squeezed_t(spec: &SqueezeSpec, e: Energy) -> Result<f64, CliError> {
    Ok(scatter(&segment_matrix(&spec.realize()?, e)?, e)?.trans_prob)
}

fn positive_energy(units: &UnitSystem, ev: f64, name: &str) -> Result<Energy, CliError> {
    if !(ev > 0.0) {
        return Err(CliError::Config(format!("{name} must be > 0 eV, got {ev}")));
    }
    Ok(units.to_internal(ev))
}

fn depth(units: &UnitSystem, ev: f64, name: &str) -> Result<f64, CliError> {
    Ok(positive_energy(units, ev, name)?.value())
}

pub fn transmit(o: &Overrides) -> Result<Output, CliError> {
    let (cfg, config) = o.resolve::<TransmitConfig>()?;
    let units = cfg.units.system()?;
    let profile = profile_of(&cfg.profile, &units)?;
    let energies = cfg.energy_ev.values("energy_ev")?;
    if energies.iter().any(|&e| !(e > 0.0)) {
        return Err(CliError::Config("energy_ev must be > 0 everywhere".into()));
    }
    let rows = energies
        .par_iter()
        .map(|&ev| {
            let e = units.to_internal(ev);
            let r = scatter(&profile_matrix(&profile, e)?, e)?;
            Ok(vec![ev.into(), r.trans_prob.into(), r.refl_prob.into()])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new(["energy_ev", "T", "R"]);
    t.rows = rows;
    Ok(Output { config, tables: vec![t], notes: vec![] })
}

pub fn bound(o: &Overrides) -> Result<Output, CliError> {
    let (cfg, config) = o.resolve::<BoundConfig>()?;
    let units = cfg.units.system()?;
    let profile = profile_of(&cfg.profile, &units)?;
    let s = find_spectrum(&profile, None, cfg.grid_n)?;
    let mut t = Table::new(["level_index", "kappa_inv_nm", "energy_ev"]);
    for (i, &k) in s.levels.iter().enumerate() {
        t.push(vec![(i + 1).into(), k.into(), units.to_ev(Energy::bound(k)).into()]);
    }
    Ok(Output { config, tables: vec![t], notes: spectrum_notes(&s, &profile) })
}

fn spectrum_notes(s: &BoundSpectrum, profile: &PotentialProfile) -> Vec<String> {
    let mut notes = Vec::new();
    let full = (-profile.min_height()).max(0.0).sqrt();
    if s.search_window.ceil < full * (1.0 - 1e-9) {
        notes.push(format!(
            "search window clipped at kappa = {:.6} (well depth allows {:.6})",
            s.search_window.ceil, full
        ));
    }
    for (lo, hi) in &s.unresolved {
        notes.push(format!("unresolved bracket ({lo:.6e}, {hi:.6e})"));
    }
    notes
}

pub fn squeeze(o: &Overrides) -> Result<Output, CliError> {
    let (cfg, config) = o.resolve::<SqueezeConfig>()?;
    let units = cfg.units.system()?;
    let exponent = SqueezeExponent::from_nu(cfg.nu)?;
    let amplitude = depth(&units, cfg.amplitude_ev, "amplitude_ev")?;
    let e = positive_energy(&units, cfg.energy_ev, "energy_ev")?;
    let a_grid = cfg.a_nm.values("a_nm")?;
    if cfg.eps.is_empty() {
        return Err(CliError::Config("eps must list at least one value".into()));
    }
    let rows = a_grid
        .par_iter()
        .map(|&a| {
            let mut row: Vec<Cell> = vec![a.into()];
            for &eps in &cfg.eps {
                let spec = SqueezeSpec { amplitude, a, epsilon: eps, exponent };
                row.push(squeezed_t(&spec, e)?.into());
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new(std::iter::once("a_nm".to_string()).chain(cfg.eps.iter().map(|&x| label("T_eps", x))));
    t.rows = rows;
    Ok(Output { config, tables: vec![t], notes: vec![] })
}

pub fn bilayer(o: &Overrides) -> Result<Output, CliError> {
    let (cfg, config) = o.resolve::<BilayerConfig>()?;
    let units = cfg.units.system()?;
    let d = depth(&units, cfg.d_ev, "d_ev")?;
    let a = match cfg.a_nm {
        Some(a) => a,
        None => resonance_set(d, 1)?[0],
    };
    let spec = BilayerSpec {
        prewell: SqueezeSpec::well(d, a, cfg.epsilon),
        gap_rho: cfg.rho_nm,
        b_layer: profile_of(&cfg.b_layer, &units)?,
        ordering: cfg.ordering,
    };
    spec.validate()?;
    let energies = cfg.energy_ev.values("energy_ev")?;
    if energies.iter().any(|&e| !(e > 0.0)) {
        return Err(CliError::Config("energy_ev must be > 0 everywhere".into()));
    }
    let rows = energies
        .par_iter()
        .map(|&ev| {
            let e = units.to_internal(ev);
            let r = bilayer_transmission(&spec, e)?;
            let lim = limit_transmission(&spec, e)?;
            Ok(vec![ev.into(), r.trans_prob.into(), lim.t_limit.into(), lim.on_sigma.into()])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new(["energy_ev", "T", "T_limit", "on_sigma"]);
    t.rows = rows;
    let notes = vec![format!("prewell thickness a = {a:.9} nm")];
    Ok(Output { config, tables: vec![t], notes })
}

pub fn fig1(o: &Overrides) -> Result<Output, CliError> {
    let (cfg, config) = o.resolve::<Fig1Config>()?;
    let units = cfg.units.system()?;
    let d = depth(&units, cfg.d_ev, "d_ev")?;
    let h = depth(&units, cfg.h_ev, "h_ev")?;
    let e = positive_energy(&units, cfg.energy_ev, "energy_ev")?;
    let a_grid = cfg.a_nm.values("a_nm")?;
    let rows = a_grid
        .par_iter()
        .map(|&a| {
            let mut row: Vec<Cell> = vec![a.into()];
            for &eps in &cfg.eps {
                row.push(squeezed_t(&SqueezeSpec::well(d, a, eps), e)?.into());
            }
            row.push(squeezed_t(&SqueezeSpec::delta_barrier(h, a, cfg.delta_eps), e)?.into());
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let columns = std::iter::once("a_nm".to_string())
        .chain(cfg.eps.iter().map(|&x| label("T_eps", x)))
        .chain(std::iter::once("T_delta_nu1".to_string()));
    let mut t = Table::new(columns);
    t.rows = rows;
    Ok(Output { config, tables: vec![t], notes: vec![] })
}

pub fn fig3(o: &Overrides) -> Result<Output, CliError> {
    let (cfg, config) = o.resolve::<Fig3Config>()?;
    let units = cfg.units.system()?;
    let pv = PeakValleyConfig {
        d: depth(&units, cfg.d_ev, "d_ev")?,
        barrier: units.to_internal(cfg.barrier_ev).value(),
        energy: positive_energy(&units, cfg.energy_ev, "energy_ev")?,
        rho: cfg.rho_nm,
        ordering: cfg.ordering,
        a_grid: cfg.a_nm.values("a_nm")?,
        lb_grid: cfg.lb_nm.values("lb_nm")?,
        eps: cfg.eps.clone(),
        ratio_lb: cfg.ratio_lb_nm,
    };
    let report = peak_valley_report(&pv)?;
    let columns = ["a_nm".to_string(), "lb_nm".to_string()]
        .into_iter()
        .chain(cfg.eps.iter().map(|&x| label("T_eps", x)));
    let mut t = Table::new(columns);
    for (i, &a) in pv.a_grid.iter().enumerate() {
        for (j, &lb) in pv.lb_grid.iter().enumerate() {
            let mut row: Vec<Cell> = vec![a.into(), lb.into()];
            row.extend(report.transmission.iter().map(|grid| Cell::Num(grid[i][j])));
            t.push(row);
        }
    }
    let notes = report
        .ratios
        .iter()
        .map(|r| {
            format!(
                "eps={}: peak-to-valley along a at l_b={} nm: {:.6e} (peak {:.6e}, valley {:.6e})",
                r.epsilon, cfg.ratio_lb_nm, r.ratio, r.peak, r.valley
            )
        })
        .collect();
    Ok(Output { config, tables: vec![t], notes })
}

struct SpectrumSetup {
    d: f64,
    b_layer: PotentialProfile,
    bare: Vec<f64>,
}

fn spectrum_setup(units: &UnitSystem, d_ev: f64, b_height_ev: f64, lb_nm: f64) -> Result<SpectrumSetup, CliError> {
    let b_layer = PotentialProfile::rectangle(lb_nm, units.to_internal(b_height_ev).value())?;
    let bare = find_spectrum(&b_layer, None, prewell_core::bound_states::DEFAULT_GRID)?.levels;
    Ok(SpectrumSetup {
        d: depth(units, d_ev, "d_ev")?,
        b_layer,
        bare,
    })
}

pub fn fig4(o: &Overrides) -> Result<Output, CliError> {
    let (cfg, config) = o.resolve::<Fig4Config>()?;
    let units = cfg.units.system()?;
    let setup = spectrum_setup(&units, cfg.d_ev, cfg.b_height_ev, cfg.lb_nm)?;
    let a_grid = cfg.a_nm.values("a_nm")?;
    if a_grid.windows(2).any(|w| !(w[1] > w[0])) || a_grid[0] <= 0.0 {
        return Err(CliError::Config("a_nm must be positive and increasing".into()));
    }
    let spectra = a_grid
        .par_iter()
        .map(|&a| {
            let spec = BilayerSpec {
                prewell: SqueezeSpec::well(setup.d, a, cfg.epsilon),
                gap_rho: cfg.rho_nm,
                b_layer: setup.b_layer.clone(),
                ordering: cfg.ordering,
            };
            bilayer_spectrum(&spec, cfg.grid_n)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut t = Table::new(["series", "a_nm", "level_index", "kappa_inv_nm"]);
    for (&a, s) in a_grid.iter().zip(&spectra) {
        for (i, &k) in s.levels.iter().enumerate() {
            t.push(vec!["eps".into(), a.into(), (i + 1).into(), k.into()]);
        }
        for (i, &k) in setup.bare.iter().enumerate() {
            t.push(vec!["reference".into(), a.into(), (i + 1).into(), k.into()]);
        }
    }

    let mut notes = Vec::new();
    let track = track_spectra(&a_grid, &spectra)?;
    for ev in &track.events {
        if let TrackEvent::Detachment { parameter, kappa, .. } = ev {
            notes.push(format!("detachment at a = {parameter:.6} nm, kappa = {kappa:.6e}"));
        }
    }
    for amb in &track.ambiguities {
        notes.push(format!(
            "ambiguous continuation at a = {:.6} nm near kappa = {:.6} ({} candidates)",
            a_grid[amb.sample], amb.kappa, amb.candidates
        ));
    }
    Ok(Output { config, tables: vec![t], notes })
}

pub fn fig5(o: &Overrides) -> Result<Output, CliError> {
    let (cfg, config) = o.resolve::<Fig5Config>()?;
    let units = cfg.units.system()?;
    let setup = spectrum_setup(&units, cfg.d_ev, cfg.b_height_ev, cfg.lb_nm)?;
    let eps = cfg.eps.log_values("eps")?;
    let a1 = resonance_set(setup.d, 1)?[0];
    let limit = limit_spectrum(&setup.b_layer, cfg.rho_nm, cfg.ordering, cfg.grid_n)?.levels;
    let mut tables = Vec::new();
    let mut notes = Vec::new();
    for (p, &frac) in cfg.a_over_a1.iter().enumerate() {
        let a = frac * a1;
        let spectra = eps
            .par_iter()
            .map(|&x| {
                let spec = BilayerSpec {
                    prewell: SqueezeSpec::well(setup.d, a, x),
                    gap_rho: cfg.rho_nm,
                    b_layer: setup.b_layer.clone(),
                    ordering: cfg.ordering,
                };
                Ok((bilayer_spectrum(&spec, cfg.grid_n)?, spec.profile()?))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let on_sigma = resonance_index(setup.d, a, RESONANCE_TOLERANCE).is_some();
        let reference = if on_sigma { &setup.bare } else { &limit };
        let panel = panel_name(p);
        let mut t = Table::new(["series", "epsilon", "level_index", "kappa_inv_nm"]).with_suffix(panel.clone());
        for (&x, (s, profile)) in eps.iter().zip(&spectra) {
            for (i, &k) in s.levels.iter().enumerate() {
                t.push(vec!["eps".into(), x.into(), (i + 1).into(), k.into()]);
            }
            for (i, &k) in reference.iter().enumerate() {
                t.push(vec!["limit".into(), x.into(), (i + 1).into(), k.into()]);
            }
            for n in spectrum_notes(s, profile) {
                notes.push(format!("panel {panel}, eps={x}: {n}"));
            }
        }
        tables.push(t);
    }
    Ok(Output { config, tables, notes })
}

fn panel_name(i: usize) -> String {
    let letters = b"abcdefghijklmnopqrstuvwxyz";
    match letters.get(i) {
        Some(&c) => (c as char).to_string(),
        None => format!("p{i}"),
    }
}

pub fn check(o: &Overrides, suite: Suite) -> Result<Vec<CheckLine>, CliError> {
    let (cfg, _) = o.resolve::<CheckConfig>()?;
    Ok(run_suite(suite, &cfg.units.system()?)?)
}
