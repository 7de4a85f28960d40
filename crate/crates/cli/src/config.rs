//! Config resolution: built-in defaults, then the JSON config file, then
//! `--set key=value` and the dedicated flags. Energies are in eV, lengths
//! in nm.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use prewell_core::potential::{Ordering, ProfileFile, SegmentRecord};
use prewell_core::units::{UnitSystem, DEFAULT_EV_TO_INV_NM2};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub ev_to_inv_nm2: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            ev_to_inv_nm2: DEFAULT_EV_TO_INV_NM2,
        }
    }
}

impl Units {
    pub fn system(&self) -> Result<UnitSystem, CliError> {
        UnitSystem::new(self.ev_to_inv_nm2).map_err(CliError::from)
    }
}

/// Evenly spaced grid including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn values(&self, name: &str) -> Result<Vec<f64>, CliError> {
        if self.count < 2 {
            return Err(CliError::Config(format!("{name}.count must be at least 2, got {}", self.count)));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::Config(format!("{name} bounds must be finite")));
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 })
            .collect())
    }

    /// Geometric spacing; both ends must be positive.
    pub fn log_values(&self, name: &str) -> Result<Vec<f64>, CliError> {
        if !(self.start > 0.0 && self.stop > 0.0) {
            return Err(CliError::Config(format!("{name} bounds must be positive for log spacing")));
        }
        let logs = Grid::new(self.start.ln(), self.stop.ln(), self.count).values(name)?;
        Ok(logs
            .iter()
            .enumerate()
            .map(|(i, l)| match i {
                0 => self.start,
                _ if i + 1 == self.count => self.stop,
                _ => l.exp(),
            })
            .collect())
    }
}

pub fn segments(list: &[(f64, f64)]) -> Vec<SegmentRecord> {
    list.iter()
        .map(|&(width_nm, height_ev)| SegmentRecord { width_nm, height_ev })
        .collect()
}

pub fn profile_of(records: &[SegmentRecord], units: &UnitSystem) -> Result<prewell_core::PotentialProfile, CliError> {
    ProfileFile {
        segments: records.to_vec(),
    }
    .to_profile(units)
    .map_err(CliError::from)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmitConfig {
    pub units: Units,
    pub profile: Vec<SegmentRecord>,
    pub energy_ev: Grid,
}

impl Default for TransmitConfig {
    fn default() -> Self {
        Self {
            units: Units::default(),
            profile: segments(&[(5.0, 0.1)]),
            energy_ev: Grid::new(0.001, 0.3, 300),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub units: Units,
    pub profile: Vec<SegmentRecord>,
    pub grid_n: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            units: Units::default(),
            profile: segments(&[(7.0, -0.5)]),
            grid_n: prewell_core::bound_states::DEFAULT_GRID,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeConfig {
    pub units: Units,
    /// Well depth for ν = 2, barrier height for ν = 1.
    pub amplitude_ev: f64,
    pub nu: u8,
    pub energy_ev: f64,
    pub a_nm: Grid,
    pub eps: Vec<f64>,
}

impl Default for SqueezeConfig {
    fn default() -> Self {
        Self {
            units: Units::default(),
            amplitude_ev: 0.2,
            nu: 2,
            energy_ev: 0.01,
            a_nm: Grid::new(0.01, 15.0, 1500),
            eps: vec![1.0, 0.1, 0.01],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilayerConfig {
    pub units: Units,
    pub d_ev: f64,
    /// Prewell thickness; `null` selects the first resonance `π/√d`.
    pub a_nm: Option<f64>,
    pub epsilon: f64,
    pub rho_nm: f64,
    pub ordering: Ordering,
    pub b_layer: Vec<SegmentRecord>,
    pub energy_ev: Grid,
}

impl Default for BilayerConfig {
    fn default() -> Self {
        Self {
            units: Units::default(),
            d_ev: 0.2,
            a_nm: None,
            epsilon: 1e-3,
            rho_nm: 10.0,
            ordering: Ordering::Bw,
            b_layer: segments(&[(5.0, 0.1)]),
            energy_ev: Grid::new(0.001, 0.09, 90),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig1Config {
    pub units: Units,
    pub energy_ev: f64,
    pub d_ev: f64,
    pub eps: Vec<f64>,
    /// Barrier amplitude `h` of the ν = 1 comparison curve.
    pub h_ev: f64,
    pub delta_eps: f64,
    pub a_nm: Grid,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            units: Units::default(),
            energy_ev: 0.01,
            d_ev: 0.2,
            eps: vec![1.0, 0.1, 0.01],
            h_ev: 0.2,
            delta_eps: 0.01,
            a_nm: Grid::new(0.01, 15.0, 1500),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig3Config {
    pub units: Units,
    pub d_ev: f64,
    pub barrier_ev: f64,
    pub energy_ev: f64,
    pub rho_nm: f64,
    pub ordering: Ordering,
    pub eps: Vec<f64>,
    pub a_nm: Grid,
    pub lb_nm: Grid,
    pub ratio_lb_nm: f64,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self {
            units: Units::default(),
            d_ev: 0.2,
            barrier_ev: 0.1,
            energy_ev: 0.02,
            rho_nm: 10.0,
            ordering: Ordering::Bw,
            eps: vec![1.0, 0.1],
            a_nm: Grid::new(0.1, 15.0, 150),
            lb_nm: Grid::new(0.1, 15.0, 150),
            ratio_lb_nm: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig4Config {
    pub units: Units,
    pub d_ev: f64,
    pub rho_nm: f64,
    pub b_height_ev: f64,
    pub lb_nm: f64,
    pub epsilon: f64,
    pub ordering: Ordering,
    pub a_nm: Grid,
    pub grid_n: usize,
}

impl Default for Fig4Config {
    fn default() -> Self {
        Self {
            units: Units::default(),
            d_ev: 0.2,
            rho_nm: 0.5,
            b_height_ev: -0.5,
            lb_nm: 7.0,
            epsilon: 0.01,
            ordering: Ordering::Wb,
            a_nm: Grid::new(0.05, 13.0, 260),
            grid_n: prewell_core::bound_states::DEFAULT_GRID,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig5Config {
    pub units: Units,
    pub d_ev: f64,
    pub rho_nm: f64,
    pub b_height_ev: f64,
    pub lb_nm: f64,
    pub ordering: Ordering,
    /// Prewell thicknesses in units of the first resonance `π/√d`.
    pub a_over_a1: Vec<f64>,
    /// Log-spaced ε values.
    pub eps: Grid,
    pub grid_n: usize,
}

impl Default for Fig5Config {
    fn default() -> Self {
        Self {
            units: Units::default(),
            d_ev: 0.2,
            rho_nm: 10.0,
            b_height_ev: -0.5,
            lb_nm: 7.0,
            ordering: Ordering::Wb,
            a_over_a1: vec![0.5, 1.0, 1.5],
            eps: Grid::new(1.0, 0.01, 41),
            grid_n: prewell_core::bound_states::DEFAULT_GRID,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub units: Units,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { units: Units::default() }
    }
}

/// Overrides collected from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub file: Option<Value>,
    pub sets: Vec<(String, Value)>,
}

impl Overrides {
    pub fn load(path: Option<&Path>, sets: &[String], ev_to_inv_nm2: Option<f64>) -> Result<Self, CliError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                let value: Value = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                if !value.is_object() {
                    return Err(CliError::Config(format!("{}: top level must be an object", p.display())));
                }
                Some(value)
            }
            None => None,
        };
        let mut parsed = sets.iter().map(|s| parse_set(s)).collect::<Result<Vec<_>, _>>()?;
        if let Some(x) = ev_to_inv_nm2 {
            parsed.push(("units.ev_to_inv_nm2".into(), Value::from(x)));
        }
        Ok(Self { file, sets: parsed })
    }

    pub fn resolve<T>(&self) -> Result<(T, Value), CliError>
    where
        T: Default + Serialize + DeserializeOwned,
    {
        let mut value = serde_json::to_value(T::default()).expect("defaults serialize");
        if let Some(file) = &self.file {
            merge(&mut value, file);
        }
        for (key, v) in &self.sets {
            set_path(&mut value, key, v.clone())?;
        }
        let typed: T = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        // Re-serialize so the echoed config is in canonical field order.
        let echoed = serde_json::to_value(&typed).expect("config serializes");
        Ok((typed, echoed))
    }
}

fn parse_set(s: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {s:?}")))?;
    if key.is_empty() {
        return Err(CliError::Config(format!("--set has an empty key in {s:?}")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

fn set_path(root: &mut Value, key: &str, v: Value) -> Result<(), CliError> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if i + 1 == parts.len() {
            match cur {
                Value::Object(map) => {
                    map.insert((*part).to_string(), v);
                    return Ok(());
                }
                Value::Array(items) => {
                    let idx: usize = part
                        .parse()
                        .map_err(|_| CliError::Config(format!("{key}: {part:?} is not an index")))?;
                    let slot = items
                        .get_mut(idx)
                        .ok_or_else(|| CliError::Config(format!("{key}: index {idx} out of range")))?;
                    *slot = v;
                    return Ok(());
                }
                _ => return Err(CliError::Config(format!("{key}: cannot set inside a scalar"))),
            }
        }
        cur = match cur {
            Value::Object(map) => map.entry((*part).to_string()).or_insert_with(|| Value::Object(Map::new())),
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| CliError::Config(format!("{key}: {part:?} is not an index")))?;
                items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::Config(format!("{key}: index {idx} out of range")))?
            }
            _ => return Err(CliError::Config(format!("{key}: cannot descend into a scalar"))),
        };
    }
    Ok(())
}
