//! The subcommands. Each one loads and checks every input first, computes,
//! and returns its outputs rendered in memory; `run` writes them at the end.

use std::path::{Path, PathBuf};

use sensorplace::basis::fit_custom;
use sensorplace::constraints::{get_constraint_indices, Axis, LineSide, Orientation, ParabolaSide};
use sensorplace::optimizers::qr_select;
use sensorplace::pipeline::{rmse_curve, NoiseInjection, DEFAULT_PRIOR_SCALE};
use sensorplace::synthetic::SyntheticField;
use sensorplace::{
    BasisConfig, ConstraintMode, ConstraintRegion, ConstraintSpec, CostMap, FittedModel, GaussianPrior, GridGeometry,
    Loc, Method, OptimizerConfig, PriorConfig, ReconstructionMatrix, SensorSelection, Shape, SnapshotMatrix,
    SsporModel,
};

use crate::config::{
    AxisName, BasisSection, ConstraintSection, GridSection, LocName, MethodName, ModeName, OptimizerSection,
    OrientationName, PriorSection, RegionSection, RunConfig, SideName,
};
use crate::error::{CliError, CliResult};
use crate::io::{self, fmt_f64, Output};
use crate::{Cli, Command, LandscapeKind};

/// Noise level used when the config sets none.
pub const DEFAULT_NOISE: f64 = 1.0;

pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    if let Command::GenerateSynthetic {
        height,
        width,
        train,
        test,
        waves,
        decay,
        noise,
    } = cli.command
    {
        let outputs = generate_synthetic(cli.seed.unwrap_or(0), height, width, train, test, waves, decay, noise)?;
        let dir = cli.output.clone().unwrap_or_else(|| PathBuf::from("."));
        return io::write_all(&dir, &outputs);
    }

    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::usage("--config is required for this command"))?;
    let setup = Setup::new(cli, RunConfig::load(path)?)?;
    let outputs = match &cli.command {
        Command::Fit => setup.fit()?,
        Command::Reconstruct {
            test,
            measurements,
            method,
        } => setup.reconstruct(test.as_deref(), measurements.as_deref(), *method)?,
        Command::Heatmap { method } => setup.heatmap(*method)?,
        Command::Landscape { kind, reference } => setup.landscape(*kind, reference.as_deref())?,
        Command::RmseCurve { p, p_range } => setup.rmse_curve(p.as_deref(), p_range.as_deref())?,
        Command::GenerateSynthetic { .. } => unreachable!("handled above"),
    };
    io::write_all(&setup.output, &outputs)
}

fn bad(e: impl std::fmt::Display) -> CliError {
    CliError::usage(e.to_string())
}

/// Everything a command needs, loaded and validated.
struct Setup {
    cfg: RunConfig,
    seed: u64,
    quiet: bool,
    output: PathBuf,
    train: SnapshotMatrix,
    geometry: GridGeometry,
    image: Option<(usize, usize)>,
    region: Option<Vec<usize>>,
    basis: BasisConfig,
    optimizer: OptimizerConfig,
    prior: Option<PriorConfig>,
    noise: f64,
}

impl Setup {
    fn new(cli: &Cli, cfg: RunConfig) -> CliResult<Self> {
        let seed = cli.seed.unwrap_or(cfg.seed);
        let output = cli
            .output
            .clone()
            .or_else(|| cfg.output.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        let train = load_snapshots(&cfg.data, cfg.header)?;
        let n = train.n_states();

        let (geometry, image) = match (&cli.image_shape, &cfg.grid) {
            (Some(hw), _) => image_grid(hw[0], hw[1])?,
            (None, Some(GridSection::Image { height, width })) => image_grid(*height, *width)?,
            (None, Some(GridSection::Points { path, x, y, z })) => {
                let coords = io::read_coordinates(path, x, y, z.as_deref())?;
                (GridGeometry::PointCloud { coords }, None)
            }
            (None, None) => return Err(CliError::usage("no grid: add a [grid] block or pass --image-shape H W")),
        };
        if geometry.n_states() != n {
            return Err(CliError::usage(format!(
                "the grid has {} locations but the snapshots have {n} states",
                geometry.n_states()
            )));
        }
        if cfg.sensors > n {
            return Err(CliError::usage(format!(
                "cannot place {} sensors on {n} locations",
                cfg.sensors
            )));
        }

        let basis = match &cfg.basis {
            BasisSection::Identity => BasisConfig::Identity,
            BasisSection::Svd { r, center, randomized } => {
                let max = n.min(train.n_snapshots());
                if *r > max {
                    return Err(CliError::usage(format!(
                        "svd rank {r} exceeds min(snapshots, states) = {max}"
                    )));
                }
                BasisConfig::Svd {
                    r: *r,
                    center: *center,
                    randomized_seed: randomized.then_some(seed),
                }
            }
            BasisSection::RandomProjection { r } => {
                if *r > n {
                    return Err(CliError::usage(format!(
                        "random projection rank {r} exceeds {n} states"
                    )));
                }
                BasisConfig::RandomProjection { r: *r, seed }
            }
            BasisSection::Custom { path } => {
                let modes = io::read_matrix(path, false)?;
                if modes.rows() != n {
                    return Err(CliError::usage(format!(
                        "{}: custom modes have {} rows but snapshots have {n} states",
                        path.display(),
                        modes.rows()
                    )));
                }
                fit_custom(modes.clone()).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
                BasisConfig::Custom(modes)
            }
        };
        let rank = match &basis {
            BasisConfig::Identity => n,
            BasisConfig::Custom(m) => m.cols(),
            _ => cfg.basis_rank().expect("ranked basis"),
        };

        let prior = cfg.prior.as_ref().map(|p| match p {
            PriorSection::Flat { scale } => PriorConfig::Flat { scale: *scale },
            PriorSection::Decreasing => PriorConfig::Decreasing,
            PriorSection::Explicit { values } => PriorConfig::Explicit(values.clone()),
        });
        if let Some(PriorConfig::Explicit(values)) = &prior {
            if values.len() != rank {
                return Err(CliError::usage(format!(
                    "explicit prior has {} values but the basis has {rank} modes",
                    values.len()
                )));
            }
        }
        let noise = cfg.noise.unwrap_or(DEFAULT_NOISE);

        let mut region = None;
        let optimizer = match &cfg.optimizer {
            OptimizerSection::Qr => OptimizerConfig::Qr,
            OptimizerSection::Ccqr { costs, costs_file } => {
                let costs = match (costs, costs_file) {
                    (Some(c), _) => c.clone(),
                    (None, Some(path)) => io::read_matrix(path, false)?.into_vec(),
                    (None, None) => unreachable!("checked by the config"),
                };
                if costs.len() != n {
                    return Err(CliError::usage(format!(
                        "{} costs given for {n} locations",
                        costs.len()
                    )));
                }
                OptimizerConfig::Ccqr {
                    costs: CostMap::new(costs).map_err(bad)?,
                }
            }
            OptimizerSection::Gqr => {
                let section = cfg.constraint.as_ref().expect("checked by the config");
                if cfg.sensors > rank {
                    return Err(CliError::usage(format!(
                        "gqr places at most r = {rank} sensors, {} requested",
                        cfg.sensors
                    )));
                }
                let (spec, predetermined, idx) = constraint_spec(section, &geometry)?;
                region = idx;
                OptimizerConfig::Gqr { spec, predetermined }
            }
            OptimizerSection::Tpgr => OptimizerConfig::Tpgr {
                prior: prior.clone().unwrap_or(PriorConfig::Flat {
                    scale: DEFAULT_PRIOR_SCALE,
                }),
                noise,
            },
        };

        let setup = Setup {
            seed,
            quiet: cli.quiet,
            output,
            train,
            geometry,
            image,
            region,
            basis,
            optimizer,
            prior,
            noise,
            cfg,
        };
        if matches!(setup.cfg.optimizer, OptimizerSection::Tpgr) && setup.prior.is_none() {
            setup.warn(format!(
                "no [prior] for tpgr; using a flat prior of {DEFAULT_PRIOR_SCALE}"
            ));
        }
        Ok(setup)
    }

    fn warn(&self, msg: impl std::fmt::Display) {
        if !self.quiet {
            eprintln!("warning: {msg}");
        }
    }

    fn n(&self) -> usize {
        self.train.n_states()
    }

    fn fit_model(&self) -> CliResult<SsporModel> {
        let mut model = SsporModel::new(self.basis.clone(), self.optimizer.clone(), self.cfg.sensors);
        for w in model.fit(&self.train)?.warnings() {
            self.warn(w);
        }
        Ok(model)
    }

    fn method(&self, flag: Option<MethodName>) -> Method {
        let name = flag
            .or(self.cfg.reconstruct.as_ref().and_then(|r| r.method))
            .unwrap_or(MethodName::Rls);
        match name {
            MethodName::Rls => Method::Rls,
            MethodName::Unregularized => Method::Ls,
        }
    }

    fn reconstruction_matrix(&self, fitted: &FittedModel, method: Method) -> CliResult<ReconstructionMatrix> {
        let prior = match (&self.prior, method) {
            (Some(p), Method::Rls) => Some(fitted.prior(p, self.noise)?),
            _ => None,
        };
        let (rm, warnings) = fitted.reconstruction_matrix(method, prior.as_ref(), self.noise)?;
        for w in warnings {
            self.warn(w);
        }
        Ok(rm)
    }

    fn coordinates(&self, i: usize) -> Vec<String> {
        let p = self.geometry.point(i);
        if self.image.is_some() {
            return vec![(p.x as usize).to_string(), (p.y as usize).to_string()];
        }
        let mut out = vec![fmt_f64(p.x), fmt_f64(p.y)];
        out.extend(p.z.map(fmt_f64));
        out
    }

    fn coordinate_header(&self) -> &'static [&'static str] {
        match &self.geometry {
            GridGeometry::PointCloud { coords } if coords.first().is_some_and(|c| c.z.is_some()) => &["x", "y", "z"],
            _ => &["x", "y"],
        }
    }

    /// `<stem>.csv` keyed by state index, plus `<stem>.pgm` on image grids.
    fn field_outputs(&self, csv: &'static str, pgm: &'static str, column: &str, values: &[f64]) -> Vec<Output> {
        let rows = values.iter().enumerate().map(|(i, &v)| vec![i.to_string(), fmt_f64(v)]);
        let mut out = vec![Output::csv(csv, Some(&["state_index", column]), rows)];
        match self.image {
            Some((h, w)) => out.push(io::pgm(pgm, values, h, w)),
            None => self.warn(format!(
                "point-cloud grid: {pgm} needs an image grid, writing {csv} only"
            )),
        }
        out
    }

    fn fit(&self) -> CliResult<Vec<Output>> {
        let model = self.fit_model()?;
        let fitted = model.fitted()?;
        let selected = fitted.selected_sensors();
        let p = selected.len();
        let reference = qr_select(fitted.basis(), p)?;
        let top = &reference.indices()[..p];

        let mut header = vec!["rank", "state_index"];
        header.extend_from_slice(self.coordinate_header());
        header.extend_from_slice(&["in_constraint_region", "moved"]);
        let rows = selected.indices().iter().enumerate().map(|(k, &i)| {
            let mut row = vec![(k + 1).to_string(), i.to_string()];
            row.extend(self.coordinates(i));
            let inside = self.region.as_ref().is_some_and(|r| r.binary_search(&i).is_ok());
            row.push(u8::from(inside).to_string());
            row.push(u8::from(!top.contains(&i)).to_string());
            row
        });
        let sensors = Output::csv("sensors.csv", Some(&header), rows);

        let all = fitted.all_sensors();
        let pivots = Output::csv(
            "pivots.csv",
            Some(&["rank", "step_norm"]),
            all.step_scores()
                .iter()
                .enumerate()
                .map(|(k, &s)| vec![(k + 1).to_string(), fmt_f64(s)]),
        );
        Ok(vec![sensors, pivots])
    }

    fn reconstruct(
        &self,
        test: Option<&Path>,
        measurements: Option<&Path>,
        method: Option<MethodName>,
    ) -> CliResult<Vec<Output>> {
        enum Input {
            Test(SnapshotMatrix),
            Readings(sensorplace::Matrix),
        }
        let input = match (test, measurements, &self.cfg.test) {
            (Some(path), _, _) => Input::Test(self.load_test(path)?),
            (None, Some(path), _) => Input::Readings(io::read_matrix(path, self.cfg.header)?),
            (None, None, Some(path)) => Input::Test(self.load_test(path)?),
            (None, None, None) => {
                return Err(CliError::usage(
                    "reconstruct needs --test, --measurements or `test` in the config",
                ))
            }
        };
        let model = self.fit_model()?;
        let fitted = model.fitted()?;
        let rm = self.reconstruction_matrix(fitted, self.method(method))?;

        let mut states = Vec::new();
        let mut outputs = Vec::new();
        match &input {
            Input::Test(t) => {
                for k in 0..t.n_snapshots() {
                    let x = t.snapshot(k);
                    let y: Vec<f64> = rm.sensors().iter().map(|&i| x[i]).collect();
                    states.push(fitted.predict(&rm, &y)?.state);
                }
                let rmse = fitted.score(&rm, t)?;
                outputs.push(Output::text("rmse.txt", format!("{}\n", fmt_f64(rmse))));
            }
            Input::Readings(m) => {
                for k in 0..m.rows() {
                    states.push(fitted.predict(&rm, m.row(k))?.state);
                }
            }
        }
        let rows = states.into_iter().map(|s| s.into_iter().map(fmt_f64).collect());
        outputs.insert(0, Output::csv("reconstruction.csv", None, rows));
        Ok(outputs)
    }

    fn load_test(&self, path: &Path) -> CliResult<SnapshotMatrix> {
        let t = load_snapshots(path, self.cfg.header)?;
        if t.n_states() != self.n() {
            return Err(CliError::usage(format!(
                "{}: {} states, training data has {}",
                path.display(),
                t.n_states(),
                self.n()
            )));
        }
        Ok(t)
    }

    fn heatmap(&self, method: Option<MethodName>) -> CliResult<Vec<Output>> {
        let model = self.fit_model()?;
        let fitted = model.fitted()?;
        let rm = self.reconstruction_matrix(fitted, self.method(method))?;
        let sigma = fitted.std(&rm, self.noise)?.sigma;
        Ok(self.field_outputs("sigma.csv", "sigma.pgm", "sigma", &sigma))
    }

    fn landscape(&self, kind: LandscapeKind, reference: Option<&str>) -> CliResult<Vec<Output>> {
        enum Ref {
            Selected,
            List(Vec<usize>),
        }
        let reference = match (kind, reference) {
            (LandscapeKind::One, Some(_)) => return Err(CliError::usage("--ref only applies to --kind two")),
            (LandscapeKind::One, None) => None,
            (LandscapeKind::Two, None) => {
                return Err(CliError::usage(
                    "--kind two needs reference sensors: --ref LIST or --ref selected",
                ))
            }
            (LandscapeKind::Two, Some("selected")) => Some(Ref::Selected),
            (LandscapeKind::Two, Some(list)) => {
                let idx = parse_list(list).map_err(|e| CliError::usage(format!("--ref: {e}")))?;
                SensorSelection::new(idx.clone(), self.n()).map_err(|e| CliError::usage(format!("--ref: {e}")))?;
                Some(Ref::List(idx))
            }
        };
        let prior_config = self.prior.clone().unwrap_or_else(|| {
            self.warn(format!("no [prior]; using a flat prior of {DEFAULT_PRIOR_SCALE}"));
            PriorConfig::Flat {
                scale: DEFAULT_PRIOR_SCALE,
            }
        });

        let values = match reference {
            None => {
                let basis = self.basis.fit(&self.train)?;
                let prior = prior_config.resolve(&basis, self.train.n_snapshots(), self.noise)?;
                sensorplace::uq::one_pt_energy_landscape(&basis, &prior)?.values
            }
            Some(Ref::List(idx)) => {
                let basis = self.basis.fit(&self.train)?;
                let prior = prior_config.resolve(&basis, self.train.n_snapshots(), self.noise)?;
                let reference = SensorSelection::new(idx, self.n())?;
                sensorplace::uq::two_pt_energy_landscape(&basis, &prior, &reference)?.values
            }
            Some(Ref::Selected) => {
                let model = self.fit_model()?;
                let fitted = model.fitted()?;
                let prior: GaussianPrior = fitted.prior(&prior_config, self.noise)?;
                fitted.two_pt_energy_landscape(&prior, None)?.values
            }
        };
        Ok(self.field_outputs("landscape.csv", "landscape.pgm", "energy", &values))
    }

    fn rmse_curve(&self, p: Option<&str>, p_range: Option<&str>) -> CliResult<Vec<Output>> {
        let section = self.cfg.rmse_curve.clone().unwrap_or_default();
        let counts = match (p, p_range, &section.p) {
            (Some(list), _, _) => parse_list(list).map_err(|e| CliError::usage(format!("--p: {e}")))?,
            (None, Some(range), _) => parse_range(range).map_err(|e| CliError::usage(format!("--p-range: {e}")))?,
            (None, None, Some(list)) => list.clone(),
            (None, None, None) => {
                return Err(CliError::usage(
                    "rmse-curve needs --p, --p-range or [rmse_curve] p in the config",
                ))
            }
        };
        crate::config::check_counts(&counts).map_err(CliError::usage)?;
        if let Some(&max) = counts.last() {
            if max > self.n() {
                return Err(CliError::usage(format!(
                    "cannot place {max} sensors on {} locations",
                    self.n()
                )));
            }
        }
        let test_path = self
            .cfg
            .test
            .as_deref()
            .ok_or_else(|| CliError::usage("rmse-curve needs `test` in the config"))?;
        let test = self.load_test(test_path)?;
        let injection = if section.inject_noise {
            let eta = self
                .cfg
                .noise
                .ok_or_else(|| CliError::usage("inject_noise needs `noise` in the config"))?;
            Some(NoiseInjection {
                eta,
                seed: section.noise_seed.unwrap_or(self.seed),
            })
        } else {
            None
        };
        let prior = self.prior.clone().unwrap_or_else(|| {
            self.warn(format!(
                "no [prior]; regularized reconstruction uses a flat prior of {DEFAULT_PRIOR_SCALE}"
            ));
            PriorConfig::Flat {
                scale: DEFAULT_PRIOR_SCALE,
            }
        });
        let template = SsporModel::new(self.basis.clone(), self.optimizer.clone(), self.cfg.sensors);
        let curve = rmse_curve(&template, &self.train, &test, &counts, &prior, injection)?;
        let rows = curve
            .points
            .iter()
            .map(|pt| vec![pt.p.to_string(), fmt_f64(pt.rmse_ls), fmt_f64(pt.rmse_rls)]);
        Ok(vec![Output::csv(
            "rmse_curve.csv",
            Some(&["p", "rmse_ls", "rmse_rls"]),
            rows,
        )])
    }
}

fn load_snapshots(path: &Path, header: bool) -> CliResult<SnapshotMatrix> {
    SnapshotMatrix::new(io::read_matrix(path, header)?).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn image_grid(height: usize, width: usize) -> CliResult<(GridGeometry, Option<(usize, usize)>)> {
    if height == 0 || width == 0 {
        return Err(CliError::usage("image height and width must be positive"));
    }
    Ok((GridGeometry::ImageGrid { height, width }, Some((height, width))))
}

type Spec = (ConstraintSpec, Option<Vec<usize>>, Option<Vec<usize>>);

/// The GQR constraint, the predetermined list and the region's indices.
fn constraint_spec(section: &ConstraintSection, geometry: &GridGeometry) -> CliResult<Spec> {
    let n = geometry.n_states();
    let loc = match section.loc {
        LocName::In => Loc::In,
        LocName::Out => Loc::Out,
    };
    let idx = match &section.region {
        Some(r) => Some(get_constraint_indices(&region(r, loc)?, geometry).map_err(|e| bad(format!("region: {e}")))?),
        None => None,
    };
    if let Some(list) = &section.predetermined {
        SensorSelection::new(list.clone(), n).map_err(|e| bad(format!("predetermined: {e}")))?;
    }
    let s = section.s.unwrap_or(0);
    let mode = match section.mode {
        ModeName::MaxN => ConstraintMode::MaxN { s },
        ModeName::ExactN => ConstraintMode::ExactN { s },
        ModeName::Predetermined => ConstraintMode::Predetermined { s },
        ModeName::Distance => ConstraintMode::Distance {
            d: section.d.expect("checked by the config"),
        },
    };
    let spec = ConstraintSpec::new(idx.clone().unwrap_or_default(), mode).with_geometry(geometry.clone());
    Ok((spec, section.predetermined.clone(), idx))
}

fn region(section: &RegionSection, loc: Loc) -> CliResult<ConstraintRegion> {
    let pair = |p: [f64; 2]| (p[0], p[1]);
    let shape = match section {
        RegionSection::Circle { center, radius } => Shape::Circle {
            cx: center[0],
            cy: center[1],
            radius: *radius,
        },
        RegionSection::Ellipse {
            center,
            semi_axes,
            angle,
        } => Shape::Ellipse {
            cx: center[0],
            cy: center[1],
            a: semi_axes[0],
            b: semi_axes[1],
            angle: *angle,
        },
        RegionSection::Polygon { vertices } => Shape::Polygon {
            vertices: vertices.iter().copied().map(pair).collect(),
        },
        RegionSection::Line { start, end, side } => Shape::Line {
            start: pair(*start),
            end: pair(*end),
            side: if *side == SideName::Left {
                LineSide::Left
            } else {
                LineSide::Right
            },
        },
        RegionSection::Parabola {
            vertex,
            focal,
            orientation,
            side,
        } => Shape::Parabola {
            vertex: pair(*vertex),
            focal: *focal,
            orientation: match orientation {
                OrientationName::Up => Orientation::Up,
                OrientationName::Down => Orientation::Down,
                OrientationName::Left => Orientation::Left,
                OrientationName::Right => Orientation::Right,
            },
            side: if *side == SideName::Inside {
                ParabolaSide::Inside
            } else {
                ParabolaSide::Outside
            },
        },
        RegionSection::Cylinder {
            axis,
            center,
            radius,
            range,
        } => Shape::Cylinder {
            axis: match axis {
                AxisName::X => Axis::X,
                AxisName::Y => Axis::Y,
                AxisName::Z => Axis::Z,
            },
            center: pair(*center),
            radius: *radius,
            range: pair(*range),
        },
        RegionSection::Expression { text } => {
            return sensorplace::constraints::parse_constraint_expression(text)
                .map(|r| r.with_loc(loc))
                .map_err(|e| bad(format!("region expression `{text}`: {e}")))
        }
    };
    ConstraintRegion::new(shape, loc).map_err(|e| bad(format!("region: {e}")))
}

/// `3,5,8` as indices.
pub fn parse_list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<usize>()
                .map_err(|_| format!("`{t}` is not a nonnegative integer"))
        })
        .collect()
}

/// Inclusive `a:b` or `a:b:step`.
pub fn parse_range(text: &str) -> Result<Vec<usize>, String> {
    let parts = parse_list(&text.replace(':', ","))?;
    let (a, b, step) = match parts[..] {
        [a, b] => (a, b, 1),
        [a, b, step] => (a, b, step),
        _ => return Err(format!("`{text}` is not a:b or a:b:step")),
    };
    if step == 0 || a > b {
        return Err(format!("`{text}` is an empty range"));
    }
    Ok((a..=b).step_by(step).collect())
}

#[allow(clippy::too_many_arguments)]
fn generate_synthetic(
    seed: u64,
    height: usize,
    width: usize,
    train: usize,
    test: usize,
    waves: usize,
    decay: f64,
    noise: f64,
) -> CliResult<Vec<Output>> {
    if train == 0 || test == 0 {
        return Err(CliError::usage("--train and --test must be positive"));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(CliError::usage(format!("--noise must be nonnegative, got {noise}")));
    }
    let field = SyntheticField::new(height, width, waves, decay, seed).map_err(bad)?;
    let train = field.sample(train, noise, seed.wrapping_add(1))?;
    let test = field.sample(test, noise, seed.wrapping_add(2))?;
    Ok(vec![
        Output::csv("train.csv", None, io::matrix_rows(train.data())),
        Output::csv("test.csv", None, io::matrix_rows(test.data())),
    ])
}
