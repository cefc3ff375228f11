//! Scenario configuration: one flat TOML document with a section per kind.

use crate::error::{Error, Result};
use crate::geometry::{FieldTerm, VectorFieldSet};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Distance,
    WaveCone,
    Fractional,
    Kernels,
    Masuda,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Distance => "distance",
            Kind::WaveCone => "wave-cone",
            Kind::Fractional => "fractional",
            Kind::Kernels => "kernels",
            Kind::Masuda => "masuda",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// `[lo, hi]` per axis.
    pub bounds: Option<Vec<[f64; 2]>>,
    /// Nodes per axis; a single entry is repeated on every axis.
    pub resolution: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistanceParams {
    /// Source point, default the origin.
    pub source: Option<Vec<f64>>,
    pub stencil: usize,
    pub eps0: f64,
    pub levels: usize,
    /// Points whose distance is reported; with `exact`, also checked.
    pub targets: Vec<Vec<f64>>,
    pub exact: Vec<f64>,
    /// Axis of the ball comparison; default the last axis.
    pub ball_axis: Option<usize>,
}

impl Default for DistanceParams {
    fn default() -> Self {
        Self {
            source: None,
            stencil: 2,
            eps0: 1.0,
            levels: 12,
            targets: Vec::new(),
            exact: Vec::new(),
            ball_axis: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveParams {
    /// Apex radius: data are cut off inside `B(x0, t0 - delta/2)`.
    pub t0: f64,
    pub delta: f64,
    /// Cone margin; default twice the flow-reference distance error.
    pub margin: Option<f64>,
    /// Step as a fraction of the stable step.
    pub dt_factor: f64,
    /// Regularization of the wave operator.
    pub epsilon: f64,
    /// Regularization of the metric that defines the cone.
    pub distance_epsilon: f64,
    pub bump_center: Option<Vec<f64>>,
    pub bump_radius: f64,
    pub snapshot_stride: usize,
    /// Also run on a finer grid and require the leakage to drop.
    pub refine: bool,
    /// Finer resolution, default `2 n - 1` per axis.
    pub refined_resolution: Option<Vec<usize>>,
    pub dump_trajectory: bool,
}

impl Default for WaveParams {
    fn default() -> Self {
        Self {
            t0: 0.6,
            delta: 0.1,
            margin: None,
            dt_factor: 0.5,
            epsilon: 0.0,
            distance_epsilon: 1e-3,
            bump_center: None,
            bump_radius: 0.4,
            snapshot_stride: 1,
            refine: true,
            refined_resolution: None,
            dump_trajectory: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FractionalParams {
    pub s: Vec<f64>,
    /// Eigenpairs; default all for small grids, else 40.
    pub modes: Option<usize>,
    pub t0: f64,
    pub t_levels: usize,
    pub bump_center: Option<Vec<f64>>,
    pub bump_radius: Option<f64>,
    /// Time of the heat-route comparison on the lowest five modes.
    pub two_route_t: f64,
    /// Times of the Fuchsian residual table.
    pub fuchs_t: Vec<f64>,
}

impl Default for FractionalParams {
    fn default() -> Self {
        Self {
            s: vec![0.25, 0.5, 0.75],
            modes: None,
            t0: 1e-3,
            t_levels: 6,
            bump_center: None,
            bump_radius: None,
            two_route_t: 0.5,
            fuchs_t: vec![0.1, 0.2, 0.4, 0.8],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelParams {
    pub s: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub t: Vec<f64>,
    /// Random `(s, lambda, t)` triples for the monotonicity check.
    pub random_triples: usize,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            s: vec![0.1, 0.25, 0.5, 0.75, 0.9],
            lambdas: vec![0.5, 1.0, 4.0],
            t: vec![0.1, 0.25, 0.5, 1.0, 2.0, 3.0],
            random_triples: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MasudaParams {
    pub modes: usize,
    pub xi: [f64; 2],
    pub eta: [f64; 2],
    pub step: f64,
    pub data_center: Option<Vec<f64>>,
    pub data_width: f64,
}

impl Default for MasudaParams {
    fn default() -> Self {
        Self {
            modes: 20,
            xi: [-0.5, 0.5],
            eta: [0.5, 1.0],
            step: 1e-2,
            data_center: None,
            data_width: 0.5,
        }
    }
}

/// Pass/fail bars; the defaults are the acceptance thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub violation_fraction: f64,
    pub distance_rel: f64,
    pub ball_exponent: [f64; 2],
    pub leakage: f64,
    pub energy_drift: f64,
    pub trace_rel: f64,
    pub two_route: f64,
    pub kernel_abs: f64,
    pub constant_abs: f64,
    pub masuda: f64,
    pub masuda_order: [f64; 2],
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            violation_fraction: 1e-3,
            distance_rel: 0.02,
            ball_exponent: [0.4, 0.6],
            leakage: 1e-2,
            energy_drift: 1e-6,
            trace_rel: 1e-3,
            two_route: 1e-8,
            kernel_abs: 1e-8,
            constant_abs: 1e-9,
            masuda: 1e-3,
            masuda_order: [3.5, 4.5],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: Kind,
    #[serde(default = "default_preset")]
    pub preset: String,
    /// Dimension of the `euclidean` preset and of custom fields.
    #[serde(default)]
    pub dim: Option<usize>,
    /// Number of custom fields.
    #[serde(default)]
    pub field_count: Option<usize>,
    #[serde(default)]
    pub fields: Vec<FieldTerm>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub distance: DistanceParams,
    #[serde(default)]
    pub wave: WaveParams,
    #[serde(default)]
    pub fractional: FractionalParams,
    #[serde(default)]
    pub kernels: KernelParams,
    #[serde(default)]
    pub masuda: MasudaParams,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn default_preset() -> String {
    "euclidean".into()
}

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn in_open_unit(name: &str, s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(cfg(format!(
            "{name} = {s} out of range: s must lie in (0,1)"
        )))
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(cfg(format!("{name} = {x} out of range: must be > 0")))
    }
}

/// Parses and validates; defaults are filled by serde and by the preset.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut c: ScenarioConfig = toml::from_str(text).map_err(|e| cfg(e.to_string()))?;
    c.fill_defaults()?;
    c.validate()?;
    Ok(c)
}

impl ScenarioConfig {
    /// Spatial dimension implied by the preset.
    pub fn space_dim(&self) -> Result<usize> {
        match self.preset.as_str() {
            "heisenberg" => Ok(3),
            "grushin" => Ok(2),
            "euclidean" => Ok(self
                .dim
                .or_else(|| {
                    self.grid
                        .resolution
                        .as_ref()
                        .filter(|r| r.len() > 1)
                        .map(|r| r.len())
                })
                .or_else(|| self.grid.bounds.as_ref().map(|b| b.len()))
                .unwrap_or(2)),
            "custom" => self.dim.ok_or_else(|| cfg("preset \"custom\" needs `dim`")),
            other => Err(cfg(format!("unknown preset \"{other}\""))),
        }
    }

    pub fn field_set(&self) -> Result<VectorFieldSet> {
        let d = self.space_dim()?;
        let f = if self.preset == "custom" {
            let count = self
                .field_count
                .ok_or_else(|| cfg("preset \"custom\" needs `field_count`"))?;
            VectorFieldSet::from_terms(d, count, &self.fields)
        } else {
            VectorFieldSet::preset(&self.preset, d)
        };
        f.map_err(|e| cfg(e.to_string()))
    }

    fn fill_defaults(&mut self) -> Result<()> {
        let d = self.space_dim()?;
        if self.grid.bounds.is_none() {
            let b = match self.preset.as_str() {
                "heisenberg" => [-1.5, 1.5],
                "grushin" => [-1.0, 1.0],
                _ => [-1.0, 1.0],
            };
            self.grid.bounds = Some(vec![b; d]);
        }
        let res = match self.grid.resolution.take() {
            None => vec![
                if d >= 3 {
                    33
                } else if d == 2 {
                    65
                } else {
                    257
                };
                d
            ],
            Some(r) if r.len() == 1 => vec![r[0]; d],
            Some(r) => r,
        };
        self.grid.resolution = Some(res);
        if self.dim.is_none() && self.preset == "euclidean" {
            self.dim = Some(d);
        }
        Ok(())
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.grid
            .bounds
            .as_ref()
            .expect("filled")
            .iter()
            .map(|b| (b[0], b[1]))
            .collect()
    }

    pub fn resolution(&self) -> Vec<usize> {
        self.grid.resolution.clone().expect("filled")
    }

    fn validate(&self) -> Result<()> {
        let d = self.space_dim()?;
        self.field_set()?;
        let bounds = self.grid.bounds.as_ref().expect("filled");
        let res = self.grid.resolution.as_ref().expect("filled");
        if bounds.len() != d || res.len() != d {
            return Err(cfg(format!(
                "grid has {} bounds and {} resolutions for dimension {d}",
                bounds.len(),
                res.len()
            )));
        }
        for (a, b) in bounds.iter().enumerate() {
            if !(b[0] < b[1]) {
                return Err(cfg(format!("grid.bounds[{a}] = {b:?} is empty")));
            }
        }
        if let Some(a) = res.iter().position(|&n| n < 3) {
            return Err(cfg(format!(
                "grid.resolution[{a}] = {} out of range: must be >= 3",
                res[a]
            )));
        }
        let point = |name: &str, p: &Option<Vec<f64>>| -> Result<()> {
            match p {
                Some(p) if p.len() != d => Err(cfg(format!(
                    "{name} has {} coordinates, expected {d}",
                    p.len()
                ))),
                _ => Ok(()),
            }
        };
        let dp = &self.distance;
        point("distance.source", &dp.source)?;
        if dp.stencil == 0 || dp.stencil > 4 {
            return Err(cfg(format!(
                "distance.stencil = {} out of range: must be in 1..=4",
                dp.stencil
            )));
        }
        positive("distance.eps0", dp.eps0)?;
        if dp.levels == 0 || dp.levels > 40 {
            return Err(cfg(format!(
                "distance.levels = {} out of range: must be in 1..=40",
                dp.levels
            )));
        }
        if !dp.exact.is_empty() && dp.exact.len() != dp.targets.len() {
            return Err(cfg("distance.exact must match distance.targets"));
        }
        if dp.targets.iter().any(|t| t.len() != d) {
            return Err(cfg(format!("distance.targets need {d} coordinates")));
        }
        if dp.ball_axis.is_some_and(|a| a >= d) {
            return Err(cfg("distance.ball_axis out of range"));
        }
        let w = &self.wave;
        positive("wave.t0", w.t0)?;
        positive("wave.delta", w.delta)?;
        if w.t0 - w.delta <= 0.0 {
            return Err(cfg(format!(
                "wave.delta = {} out of range: needs t0 - delta > 0",
                w.delta
            )));
        }
        if !(w.dt_factor > 0.0 && w.dt_factor <= 1.0) {
            return Err(cfg(format!(
                "wave.dt_factor = {} out of range: must be in (0,1]",
                w.dt_factor
            )));
        }
        if !(w.epsilon >= 0.0) {
            return Err(cfg("wave.epsilon must be >= 0"));
        }
        positive("wave.distance_epsilon", w.distance_epsilon)?;
        positive("wave.bump_radius", w.bump_radius)?;
        if let Some(m) = w.margin {
            if !(m >= 0.0) {
                return Err(cfg("wave.margin must be >= 0"));
            }
        }
        point("wave.bump_center", &w.bump_center)?;
        if w.refined_resolution
            .as_ref()
            .is_some_and(|r| r.len() != d || r.iter().any(|&n| n < 3))
        {
            return Err(cfg(
                "wave.refined_resolution must have one entry >= 3 per axis",
            ));
        }
        let f = &self.fractional;
        for &s in &f.s {
            in_open_unit("fractional.s", s)?;
        }
        positive("fractional.t0", f.t0)?;
        positive("fractional.two_route_t", f.two_route_t)?;
        if f.t_levels < 2 || f.t_levels > 12 {
            return Err(cfg(format!(
                "fractional.t_levels = {} out of range: must be in 2..=12",
                f.t_levels
            )));
        }
        if f.modes == Some(0) {
            return Err(cfg("fractional.modes must be >= 1"));
        }
        for &t in &f.fuchs_t {
            positive("fractional.fuchs_t", t)?;
        }
        point("fractional.bump_center", &f.bump_center)?;
        let k = &self.kernels;
        for &s in &k.s {
            in_open_unit("kernels.s", s)?;
        }
        if k.lambdas
            .iter()
            .chain(&k.t)
            .any(|&x| !(x >= 0.0 && x.is_finite()))
        {
            return Err(cfg("kernels.lambdas and kernels.t must be >= 0"));
        }
        let m = &self.masuda;
        if m.modes == 0 {
            return Err(cfg("masuda.modes must be >= 1"));
        }
        positive("masuda.step", m.step)?;
        positive("masuda.data_width", m.data_width)?;
        if !(m.xi[0] < m.xi[1]) || !(m.eta[0] > 0.0 && m.eta[0] < m.eta[1]) {
            return Err(cfg(
                "masuda ranges need xi[0] < xi[1] and 0 < eta[0] < eta[1]",
            ));
        }
        point("masuda.data_center", &m.data_center)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_distance_config_gets_defaults() {
        let c = parse_config("kind = \"distance\"\npreset = \"heisenberg\"\n").unwrap();
        assert_eq!(c.distance.stencil, 2);
        assert_eq!(c.distance.levels, 12);
        assert_eq!(c.resolution(), vec![33, 33, 33]);
        assert_eq!(c.bounds().len(), 3);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse_config("kind = \"kernels\"\nfoo = 1\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("foo"), "{e}");
        let e = parse_config("kind = \"kernels\"\n[wave]\nfoo = 1\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("foo"), "{e}");
    }

    #[test]
    fn s_out_of_range() {
        let e = parse_config("kind = \"fractional\"\n[fractional]\ns = [1.5]\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("(0,1)"), "{e}");
    }

    #[test]
    fn custom_fields_and_scalar_resolution() {
        let text = r#"
kind = "distance"
preset = "custom"
dim = 2
field_count = 2
[grid]
resolution = [9]
[[fields]]
field = 0
axis = 0
exponents = [0, 0]
coefficient = 1.0
[[fields]]
field = 1
axis = 1
exponents = [2, 0]
coefficient = 1.0
"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.resolution(), vec![9, 9]);
        assert_eq!(c.field_set().unwrap().len(), 2);
        assert!(parse_config("kind = \"distance\"\npreset = \"nope\"\n").is_err());
    }
}
