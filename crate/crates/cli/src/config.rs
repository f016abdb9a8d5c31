//! The TOML run configuration. See `docs/config.md` for the schema.
//!
//! Unknown keys anywhere are rejected. Relative paths are resolved against
//! the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Training snapshots, one per row.
    pub data: PathBuf,
    /// Optional held-out snapshots for scoring and sweeps.
    pub test: Option<PathBuf>,
    #[serde(default)]
    pub header: bool,
    #[serde(default)]
    pub seed: u64,
    pub sensors: usize,
    /// Measurement noise standard deviation.
    pub noise: Option<f64>,
    pub output: Option<PathBuf>,
    pub grid: Option<GridSection>,
    pub basis: BasisSection,
    pub optimizer: OptimizerSection,
    pub prior: Option<PriorSection>,
    pub constraint: Option<ConstraintSection>,
    pub reconstruct: Option<ReconstructSection>,
    pub rmse_curve: Option<RmseCurveSection>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSection {
    Image {
        height: usize,
        width: usize,
    },
    Points {
        path: PathBuf,
        x: String,
        y: String,
        z: Option<String>,
    },
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisSection {
    Identity,
    Svd {
        r: usize,
        #[serde(default)]
        center: bool,
        #[serde(default)]
        randomized: bool,
    },
    RandomProjection {
        r: usize,
    },
    Custom {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerSection {
    Qr,
    Ccqr {
        costs: Option<Vec<f64>>,
        costs_file: Option<PathBuf>,
    },
    Gqr,
    Tpgr,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSection {
    Flat { scale: f64 },
    Decreasing,
    Explicit { values: Vec<f64> },
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    MaxN,
    ExactN,
    Predetermined,
    Distance,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum LocName {
    #[default]
    In,
    Out,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSection {
    pub mode: ModeName,
    pub s: Option<usize>,
    pub d: Option<f64>,
    pub predetermined: Option<Vec<usize>>,
    #[serde(default)]
    pub loc: LocName,
    pub region: Option<RegionSection>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSection {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        center: [f64; 2],
        semi_axes: [f64; 2],
        #[serde(default)]
        angle: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Line {
        start: [f64; 2],
        end: [f64; 2],
        side: SideName,
    },
    Parabola {
        vertex: [f64; 2],
        focal: f64,
        orientation: OrientationName,
        side: SideName,
    },
    Cylinder {
        axis: AxisName,
        center: [f64; 2],
        radius: f64,
        range: [f64; 2],
    },
    Expression {
        text: String,
    },
}

/// `left`/`right` for lines, `inside`/`outside` for parabolas.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SideName {
    Left,
    Right,
    Inside,
    Outside,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OrientationName {
    Up,
    Down,
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    /// Regularized least squares with the configured prior.
    Rls,
    /// Plain least squares (pseudoinverse).
    Unregularized,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReconstructSection {
    pub method: Option<MethodName>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RmseCurveSection {
    pub p: Option<Vec<usize>>,
    #[serde(default)]
    pub inject_noise: bool,
    pub noise_seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::cannot_open(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    /// Parses and checks a config without touching the filesystem.
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data);
        if let Some(t) = &mut self.test {
            fix(t);
        }
        if let Some(o) = &mut self.output {
            fix(o);
        }
        if let Some(GridSection::Points { path, .. }) = &mut self.grid {
            fix(path);
        }
        if let BasisSection::Custom { path } = &mut self.basis {
            fix(path);
        }
        if let OptimizerSection::Ccqr {
            costs_file: Some(path), ..
        } = &mut self.optimizer
        {
            fix(path);
        }
    }

    fn validate(&self) -> Result<(), String> {
        if self.sensors == 0 {
            return Err("`sensors` must be at least 1".into());
        }
        if let Some(eta) = self.noise {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(format!("`noise` must be positive, got {eta}"));
            }
        }
        if let Some(GridSection::Image { height, width }) = self.grid {
            if height == 0 || width == 0 {
                return Err("grid height and width must be positive".into());
            }
        }
        match self.basis {
            BasisSection::Svd { r, .. } | BasisSection::RandomProjection { r } if r == 0 => {
                return Err("basis rank `r` must be at least 1".into())
            }
            _ => {}
        }
        if let OptimizerSection::Ccqr { costs, costs_file } = &self.optimizer {
            if costs.is_some() == costs_file.is_some() {
                return Err("ccqr needs exactly one of `costs` or `costs_file`".into());
            }
        }
        match (&self.optimizer, &self.constraint) {
            (OptimizerSection::Gqr, None) => return Err("optimizer gqr needs a [constraint] block".into()),
            (OptimizerSection::Gqr, Some(c)) => c.validate()?,
            (_, Some(_)) => return Err("a [constraint] block is only used by optimizer gqr".into()),
            _ => {}
        }
        match &self.prior {
            Some(PriorSection::Flat { scale }) if !(*scale > 0.0 && scale.is_finite()) => {
                return Err(format!("prior scale must be positive, got {scale}"))
            }
            Some(PriorSection::Explicit { values }) if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) => {
                return Err("explicit prior values must be positive".into())
            }
            Some(PriorSection::Decreasing) if !matches!(self.basis, BasisSection::Svd { .. }) => {
                return Err("a decreasing prior needs an svd basis".into())
            }
            _ => {}
        }
        if let Some(RmseCurveSection { p: Some(p), .. }) = &self.rmse_curve {
            check_counts(p)?;
        }
        Ok(())
    }

    /// The rank the basis will have, when the config fixes it.
    pub fn basis_rank(&self) -> Option<usize> {
        match self.basis {
            BasisSection::Svd { r, .. } | BasisSection::RandomProjection { r } => Some(r),
            _ => None,
        }
    }
}

impl ConstraintSection {
    fn validate(&self) -> Result<(), String> {
        let needs_s = |what| self.s.ok_or_else(|| format!("constraint mode {what} needs `s`"));
        match self.mode {
            ModeName::MaxN | ModeName::ExactN => {
                needs_s(if self.mode == ModeName::MaxN {
                    "max_n"
                } else {
                    "exact_n"
                })?;
                if self.region.is_none() {
                    return Err("this constraint mode needs a [constraint.region]".into());
                }
            }
            ModeName::Predetermined => {
                let s = needs_s("predetermined")?;
                match (&self.predetermined, &self.region) {
                    (Some(list), _) if list.len() != s => {
                        return Err(format!("`predetermined` lists {} sensors but s = {s}", list.len()))
                    }
                    (None, None) => return Err("predetermined mode needs `predetermined` or a region".into()),
                    _ => {}
                }
            }
            ModeName::Distance => {
                let d = self.d.ok_or("constraint mode distance needs `d`")?;
                if !(d >= 0.0 && d.is_finite()) {
                    return Err(format!("distance `d` must be nonnegative, got {d}"));
                }
            }
        }
        if self.mode != ModeName::Distance && self.d.is_some() {
            return Err("`d` only applies to mode distance".into());
        }
        if self.mode != ModeName::Predetermined && self.predetermined.is_some() {
            return Err("`predetermined` only applies to mode predetermined".into());
        }
        if let Some(RegionSection::Line { side, .. }) = &self.region {
            if !matches!(side, SideName::Left | SideName::Right) {
                return Err("line side must be left or right".into());
            }
        }
        if let Some(RegionSection::Parabola { side, .. }) = &self.region {
            if !matches!(side, SideName::Inside | SideName::Outside) {
                return Err("parabola side must be inside or outside".into());
            }
        }
        Ok(())
    }
}

/// Sensor counts for a sweep: nonempty, positive, strictly increasing.
pub fn check_counts(p: &[usize]) -> Result<(), String> {
    if p.is_empty() {
        return Err("the list of sensor counts is empty".into());
    }
    if p[0] == 0 {
        return Err("sensor counts must be positive".into());
    }
    if p.windows(2).any(|w| w[0] >= w[1]) {
        return Err("sensor counts must be strictly increasing".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING: &str = r#"
        data = "train.csv"
        sensors = 10
        [grid]
        kind = "image"
        height = 32
        width = 32
        [basis]
        kind = "svd"
        r = 10
        [optimizer]
        kind = "gqr"
        [constraint]
        mode = "exact_n"
        s = 4
        [constraint.region]
        shape = "circle"
        center = [20.0, 5.0]
        radius = 5.0
    "#;

    #[test]
    fn circle_example_parses() {
        let cfg = RunConfig::parse(LISTING).unwrap();
        let c = cfg.constraint.unwrap();
        assert_eq!(c.mode, ModeName::ExactN);
        assert_eq!(c.loc, LocName::In);
        assert_eq!(
            c.region,
            Some(RegionSection::Circle {
                center: [20.0, 5.0],
                radius: 5.0
            })
        );
    }

    #[test]
    fn unknown_keys_are_rejected_everywhere() {
        for (from, to) in [
            ("sensors = 10", "sensors = 10\nbogus = 1"),
            ("r = 10", "r = 10\nwhatever = true"),
            ("radius = 5.0", "radius = 5.0\ncolor = \"red\""),
            ("s = 4", "s = 4\nextra = 2"),
            ("width = 32", "width = 32\ndepth = 3"),
        ] {
            let text = LISTING.replace(from, to);
            assert!(RunConfig::parse(&text).is_err(), "accepted: {to}");
        }
    }

    #[test]
    fn semantic_checks() {
        for (from, to) in [
            ("sensors = 10", "sensors = 0"),
            ("s = 4", "d = 1.0"),
            ("kind = \"gqr\"", "kind = \"qr\""),
            ("radius = 5.0", "radius = 5.0\n[prior]\nkind = \"flat\"\nscale = -1.0"),
            (
                "kind = \"svd\"\n        r = 10",
                "kind = \"identity\"\n[prior]\nkind = \"decreasing\"",
            ),
        ] {
            let text = LISTING.replace(from, to);
            assert!(RunConfig::parse(&text).is_err(), "accepted: {to}");
        }
    }

    #[test]
    fn relative_paths_follow_the_config() {
        let mut cfg = RunConfig::parse(LISTING).unwrap();
        cfg.resolve_paths(Path::new("/runs/a"));
        assert_eq!(cfg.data, PathBuf::from("/runs/a/train.csv"));
    }

    #[test]
    fn counts() {
        assert!(check_counts(&[1, 2, 5]).is_ok());
        assert!(check_counts(&[]).is_err());
        assert!(check_counts(&[0, 1]).is_err());
        assert!(check_counts(&[3, 3]).is_err());
    }
}
