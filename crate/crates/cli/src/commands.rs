use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use lugre_pinn::datagen::{self, Dataset, DatasetRecipe, SimSettings};
use lugre_pinn::eval::{self, EvalData, EvalReport, SimFriction, SpeedAccuracyRow, SteadyModel, Trajectory};
use lugre_pinn::friction::LuGreParams;
use lugre_pinn::ident::{self, IdentConfig, IdentObjective, Method};
use lugre_pinn::nn::ModelFile;
use lugre_pinn::pinn::{self, LrSchedule, ModelConfig, PinnModel, PlateauConfig, TrainConfig, Variant};
use lugre_pinn::systems::{PoBParams, SDoBParams};

use crate::config::Config;
use crate::manifest::RunManifest;
use crate::{CliError, CliResult, Common};

const DEFAULT_NOISE: f64 = 0.05;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn write_file(path: &Path, text: &str, m: &mut RunManifest) -> CliResult<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    m.outputs.push(path.to_path_buf());
    Ok(())
}

fn resolve_data(c: &Common, explicit: Option<PathBuf>, from_config: Option<&String>) -> CliResult<PathBuf> {
    if let Some(p) = explicit.or_else(|| from_config.map(PathBuf::from)) {
        return Ok(p);
    }
    for name in ["train_noisy.csv", "train_clean.csv"] {
        let p = c.out.join(name);
        if p.exists() {
            return Ok(p);
        }
    }
    Err(CliError::Runtime(anyhow!(
        "no dataset found in {} (run `generate` first or pass --data)",
        c.out.display()
    )))
}

fn load_dataset(path: &Path) -> CliResult<Dataset> {
    datagen::read_csv(path)
        .with_context(|| format!("reading dataset {}", path.display()))
        .map_err(CliError::Runtime)
}

pub fn generate(c: &Common, cfg: &Config, noise: Option<f64>) -> CliResult<()> {
    let g = &cfg.generate;
    let mut recipe = DatasetRecipe::default();
    if let Some(a) = &g.amplitudes_deg {
        recipe.amplitudes_deg = a.clone();
    }
    if let Some(f) = g.freq {
        recipe.freq = f;
    }
    if let Some(d) = g.swing_duration {
        recipe.swing_duration = d;
    }
    if let Some(d) = g.translation_duration {
        recipe.translation_duration = d;
    }
    recipe.noise_fraction = noise.or(g.noise).unwrap_or(recipe.noise_fraction);
    recipe.seed = c.seed.or(g.seed).unwrap_or(recipe.seed);
    if recipe.noise_fraction.is_nan() || recipe.noise_fraction < 0.0 {
        return Err(usage("noise must be a non-negative fraction"));
    }
    let mut settings = SimSettings::default();
    if let Some(r) = g.rate {
        settings.rate = r;
    }

    let mut m = RunManifest::start("generate", c.config.as_deref(), recipe.seed);
    let clean = datagen::generate_clean_dataset(&recipe, &settings)?;
    let clean_path = c.out.join("train_clean.csv");
    datagen::write_csv(&clean, &clean_path)?;
    m.outputs.push(clean_path.clone());
    println!(
        "clean: {} samples, {} trials, {:.2} s -> {}",
        clean.len(),
        clean.trials().len(),
        clean.duration(),
        clean_path.display()
    );
    if recipe.noise_fraction > 0.0 {
        let noisy = datagen::add_noise(&clean, recipe.noise_fraction, recipe.seed, &settings.pob);
        let noisy_path = c.out.join("train_noisy.csv");
        datagen::write_csv(&noisy, &noisy_path)?;
        m.outputs.push(noisy_path.clone());
        println!("noisy: {:.1}% noise -> {}", 100.0 * recipe.noise_fraction, noisy_path.display());
    }
    m.finish()?;
    Ok(())
}

fn parse_variants(s: &str) -> CliResult<Vec<Variant>> {
    if s == "all" {
        return Ok(Variant::ALL.to_vec());
    }
    s.parse::<Variant>().map(|v| vec![v]).map_err(|e| usage(e.to_string()))
}

pub fn train(
    c: &Common,
    cfg: &Config,
    variant: Option<String>,
    epochs: Option<usize>,
    data: Option<PathBuf>,
) -> CliResult<()> {
    let t = &cfg.train;
    let variants = parse_variants(variant.as_deref().or(t.variant.as_deref()).unwrap_or("all"))?;
    let precision = t.precision.as_deref().unwrap_or("f32");
    if precision != "f32" && precision != "f64" {
        return Err(usage(format!("train.precision: expected f32 or f64, got `{precision}`")));
    }
    let data_path = resolve_data(c, data, t.data.as_ref())?;
    let ds = load_dataset(&data_path)?;
    let pob = PoBParams::default();

    for v in variants {
        let mut mc = ModelConfig::default_for(v);
        if let Some(w) = t.width {
            mc.width = w;
        }
        if let Some(h) = t.hidden_layers {
            mc.hidden_layers = h;
        }
        let mut tc = TrainConfig::default_for(v);
        if let Some(e) = epochs.or(t.epochs) {
            tc.epochs = e;
        }
        if let Some(lr) = t.lr {
            tc.lr = lr;
        }
        if let Some(l) = t.lambda {
            tc.lambda = l;
        }
        if let Some(s) = t.scalar_lr {
            tc.scalar_lr = s;
        }
        match t.schedule.as_deref() {
            None => {}
            Some("fixed") => tc.schedule = LrSchedule::Fixed,
            Some("plateau") => tc.schedule = LrSchedule::Plateau(PlateauConfig::default()),
            Some(other) => return Err(usage(format!("train.schedule: expected fixed or plateau, got `{other}`"))),
        }
        tc.seed = c.seed.or(t.seed).unwrap_or(0);
        tc.record_timing = c.timing;
        tc.validate().map_err(|e| usage(e.to_string()))?;

        let mut m = RunManifest::start("train", c.config.as_deref(), tc.seed);
        m.inputs.push(data_path.clone());
        let (file, history, final_loss, params) = if precision == "f32" {
            let tm = pinn::train::<f32>(&mc, &tc, &ds, &pob)?;
            (tm.to_model_file(), tm.history_csv(), tm.final_loss, tm.lugre_params())
        } else {
            let tm = pinn::train::<f64>(&mc, &tc, &ds, &pob)?;
            (tm.to_model_file(), tm.history_csv(), tm.final_loss, tm.lugre_params())
        };
        let model_path = c.out.join(format!("{v}.model"));
        file.save(&model_path)?;
        m.outputs.push(model_path.clone());
        write_file(&c.out.join(format!("{v}_history.csv")), &history, &mut m)?;
        m.finish()?;

        println!(
            "{v}: {} epochs, final loss {:.6e} (L_P {:.6e}, L_z {:.6e}) -> {}",
            tc.epochs,
            final_loss.total,
            final_loss.physics,
            final_loss.bristle,
            model_path.display()
        );
        if let Some(p) = params {
            print!("{}", ident::param_table(&[("truth", LuGreParams::ground_truth()), (v.name(), p)]));
        }
    }
    Ok(())
}

fn load_model(path: &Path) -> CliResult<(String, PinnModel<f64>, f64)> {
    let file = ModelFile::load(path).with_context(|| format!("loading model {}", path.display()))?;
    let model = PinnModel::<f64>::from_model_file(&file)?;
    let wall = file.meta("wall_clock_s").ok().and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| model.variant.name().to_string());
    Ok((label, model, wall))
}

pub fn identify(
    c: &Common,
    cfg: &Config,
    method: Option<String>,
    data: Option<PathBuf>,
    models: &[PathBuf],
) -> CliResult<()> {
    let s = &cfg.identify;
    let name = method.as_deref().or(s.method.as_deref()).unwrap_or("all");
    let methods = if name == "all" {
        Method::ALL.to_vec()
    } else {
        vec![name
            .parse::<Method>()
            .map_err(|_| usage(format!("unknown method `{name}` (valid: nelder-mead, ga, nls, all)")))?]
    };
    let mut icfg = IdentConfig::default();
    icfg.ga.seed = c.seed.or(s.seed).unwrap_or(0);
    if let Some(n) = s.nm_max_iters {
        icfg.nelder_mead.max_iters = n;
    }
    if let Some(n) = s.ga_population {
        icfg.ga.population = n;
    }
    if let Some(n) = s.ga_generations {
        icfg.ga.generations = n;
    }
    if let Some(n) = s.lm_max_iters {
        icfg.lm.max_iters = n;
    }
    let data_path = resolve_data(c, data, s.data.as_ref())?;
    let ds = load_dataset(&data_path)?;
    let objective = IdentObjective::new(&ds, &PoBParams::default())?;

    let mut m = RunManifest::start("identify", c.config.as_deref(), icfg.ga.seed);
    m.inputs.push(data_path);
    let mut csv = format!("{}\n", ident::IDENT_CSV_HEADER);
    let mut table: Vec<(String, LuGreParams<f64>)> = vec![("truth".into(), LuGreParams::ground_truth())];
    for method in methods {
        let r = ident::identify(method, &objective, &icfg)?;
        println!(
            "{}: objective {:.6e}, {} evaluations{}",
            method,
            r.objective,
            r.evaluations,
            if c.timing { format!(", {:.2} s", r.wall_clock) } else { String::new() }
        );
        csv.push_str(&r.csv_row(c.timing));
        csv.push('\n');
        table.push((method.name().to_string(), r.params));
    }
    for path in models {
        let (label, model, wall) = load_model(path)?;
        let Some(p) = model.lugre_params() else {
            return Err(usage(format!("{}: black-box models carry no LuGre parameters", path.display())));
        };
        m.inputs.push(path.clone());
        let label = format!("pinn-{label}");
        csv.push_str(&ident::csv_row(&label, &p, objective.value(&p), if c.timing { wall } else { 0.0 }, true));
        csv.push('\n');
        table.push((label, p));
    }
    write_file(&c.out.join("identify.csv"), &csv, &mut m)?;
    m.finish()?;
    let rows: Vec<(&str, LuGreParams<f64>)> = table.iter().map(|(l, p)| (l.as_str(), *p)).collect();
    print!("{}", ident::param_table(&rows));
    Ok(())
}

const MODES: [&str; 5] = ["insim", "online", "transfer", "steady-map", "pareto"];

fn default_models(c: &Common) -> Vec<PathBuf> {
    Variant::ALL
        .iter()
        .map(|v| c.out.join(format!("{v}.model")))
        .filter(|p| p.exists())
        .collect()
}

fn write_reports(c: &Common, name: &str, reports: &[EvalReport], m: &mut RunManifest) -> CliResult<()> {
    let mut csv = format!("{}\n", eval::REPORT_CSV_HEADER);
    for r in reports {
        csv.push_str(&r.csv_row(c.timing));
        csv.push('\n');
        write_file(&c.out.join(format!("series_{name}_{}.csv", r.label)), &r.series_csv(), m)?;
    }
    write_file(&c.out.join(format!("eval_{name}.csv")), &csv, m)?;
    print!("{}", eval::summary_table(reports));
    Ok(())
}

fn read_ident_rows(path: &Path) -> CliResult<Vec<(String, LuGreParams<f64>, f64)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let bad = || CliError::Runtime(anyhow!("{}:{}: malformed identification row", path.display(), i + 1));
        if cols.len() != 10 {
            return Err(bad());
        }
        let nums: Vec<f64> = cols[1..9].iter().map(|s| s.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
        let p = LuGreParams::new_unchecked(nums[0], nums[1], nums[2], nums[3], nums[4], nums[5]);
        rows.push((cols[0].to_string(), p, nums[7]));
    }
    Ok(rows)
}

pub fn evaluate(
    c: &Common,
    cfg: &Config,
    mode: Option<String>,
    traj: Option<u8>,
    noise: Option<f64>,
    models: Vec<PathBuf>,
    ident_path: Option<PathBuf>,
) -> CliResult<()> {
    let e = &cfg.evaluate;
    let mode = mode.or(e.mode.clone()).unwrap_or_else(|| "all".into());
    let modes: Vec<&str> = if mode == "all" {
        MODES.iter().copied().filter(|&m| m != "pareto" || ident_path.is_some()).collect()
    } else if let Some(m) = MODES.iter().find(|&&m| m == mode) {
        vec![*m]
    } else {
        return Err(usage(format!("unknown mode `{mode}` (valid: {}, all)", MODES.join(", "))));
    };
    let trajs = match traj.or(e.traj) {
        Some(i) => vec![Trajectory::from_index(i).map_err(|e| usage(e.to_string()))?],
        None => vec![Trajectory::Swing, Trajectory::Translation],
    };
    let noise = noise.or(e.noise).unwrap_or(DEFAULT_NOISE);
    let model_paths = if models.is_empty() { default_models(c) } else { models };
    let needs_models = modes.iter().any(|&m| m != "steady-map" && m != "pareto");
    if needs_models && model_paths.is_empty() {
        return Err(CliError::Runtime(anyhow!(
            "no model files found in {} (run `train` first or pass --model)",
            c.out.display()
        )));
    }
    let mut loaded = Vec::new();
    for p in &model_paths {
        loaded.push(load_model(p)?);
    }

    let settings = SimSettings::default();
    let truth = LuGreParams::ground_truth();
    let mut m = RunManifest::start("evaluate", c.config.as_deref(), c.seed.unwrap_or(0));
    m.inputs.extend(model_paths.iter().cloned());

    for mode in modes {
        match mode {
            "insim" => {
                for &tr in &trajs {
                    let mut reports = Vec::new();
                    for (label, model, _) in &loaded {
                        let r = eval::eval_in_simulation(
                            label,
                            &SimFriction::learned(model),
                            &tr.spec(),
                            tr.name(),
                            &settings,
                            &eval::InSimOptions::default(),
                        )?;
                        reports.push(r);
                    }
                    write_reports(c, &format!("insim_{}", tr.name()), &reports, &mut m)?;
                }
            }
            "online" => {
                for &tr in &trajs {
                    let data = eval::trajectory_data(tr, &settings, noise)?;
                    let reports = online_reports(&loaded, &data, "online", &truth)?;
                    write_reports(c, &format!("online_{}", tr.name()), &reports, &mut m)?;
                }
            }
            "transfer" => {
                let data = eval::sdob_data(&eval::SdobTrajectory::default(), &SDoBParams::default(), &settings, noise)?;
                let reports = online_reports(&loaded, &data, "transfer", &truth)?;
                write_reports(c, "transfer", &reports, &mut m)?;
            }
            "steady-map" => {
                let v_grid = eval::linspace(
                    e.v_min.unwrap_or(-1.0),
                    e.v_max.unwrap_or(1.0),
                    e.v_points.unwrap_or(40),
                );
                let fn_grid = eval::linspace(
                    e.fn_min.unwrap_or(2.0),
                    e.fn_max.unwrap_or(15.0),
                    e.fn_points.unwrap_or(14),
                );
                let map = eval::steady_state_map::<f64>(SteadyModel::Reference(truth), &v_grid, &fn_grid)
                    .map_err(|e| usage(e.to_string()))?;
                write_file(
                    &c.out.join("steady_map_reference.csv"),
                    &eval::steady_map_csv(&v_grid, &fn_grid, &map),
                    &mut m,
                )?;
                for (label, model, _) in &loaded {
                    let map = eval::steady_state_map(SteadyModel::Learned(model), &v_grid, &fn_grid)?;
                    write_file(
                        &c.out.join(format!("steady_map_{label}.csv")),
                        &eval::steady_map_csv(&v_grid, &fn_grid, &map),
                        &mut m,
                    )?;
                }
                println!("steady-state maps: {} x {} grid", fn_grid.len(), v_grid.len());
            }
            "pareto" => {
                let path = ident_path
                    .clone()
                    .ok_or_else(|| usage("pareto mode needs --ident <identify.csv>"))?;
                m.inputs.push(path.clone());
                let tr = trajs[0];
                let mut rows = Vec::new();
                for (label, p, wall) in read_ident_rows(&path)? {
                    if label.starts_with("pinn-") {
                        continue;
                    }
                    rows.push(SpeedAccuracyRow {
                        method: label,
                        t_comp: wall,
                        mse: eval::lugre_in_sim_mse(&p, tr, &settings)?,
                    });
                }
                for (label, model, wall) in &loaded {
                    let r = eval::eval_in_simulation(
                        label,
                        &SimFriction::learned(model),
                        &tr.spec(),
                        tr.name(),
                        &settings,
                        &eval::InSimOptions::default(),
                    )?;
                    rows.push(SpeedAccuracyRow {
                        method: format!("pinn-{label}"),
                        t_comp: if c.timing { *wall } else { 0.0 },
                        mse: if r.failed { f64::INFINITY } else { r.mse },
                    });
                }
                let csv = eval::speed_accuracy_csv(&rows);
                write_file(&c.out.join("pareto.csv"), &csv, &mut m)?;
                print!("{csv}");
            }
            _ => unreachable!("mode list is fixed"),
        }
    }
    m.finish()?;
    Ok(())
}

fn online_reports(
    loaded: &[(String, PinnModel<f64>, f64)],
    data: &EvalData,
    mode: &'static str,
    truth: &LuGreParams<f64>,
) -> CliResult<Vec<EvalReport>> {
    let mut reports = vec![eval::eval_coulomb_viscous("coulomb", truth.mu_c, truth.sigma2, data, mode)?];
    for (label, model, _) in loaded {
        reports.push(eval::eval_online(label, model, data, mode)?);
    }
    Ok(reports)
}

/// Summary tables of the CSVs `evaluate` and `identify` leave behind.
pub fn report(c: &Common) -> CliResult<()> {
    let mut names: Vec<String> = std::fs::read_dir(&c.out)
        .with_context(|| format!("reading {}", c.out.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| {
            n.ends_with(".csv") && (n.starts_with("eval_") || n == "identify.csv" || n == "pareto.csv")
        })
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(CliError::Runtime(anyhow!(
            "nothing to report in {} (run `identify` or `evaluate` first)",
            c.out.display()
        )));
    }
    let mut m = RunManifest::start("report", None, c.seed.unwrap_or(0));
    let mut out = String::new();
    for name in &names {
        let path = c.out.join(name);
        let text = std::fs::read_to_string(&path)?;
        m.inputs.push(path);
        let _ = writeln!(out, "== {name}");
        out.push_str(&align(&text));
        out.push('\n');
    }
    write_file(&c.out.join("report.txt"), &out, &mut m)?;
    m.finish()?;
    print!("{out}");
    Ok(())
}

/// Pads CSV columns to a common width, shortening long floats.
fn align(csv: &str) -> String {
    let rows: Vec<Vec<String>> = csv
        .lines()
        .map(|l| {
            l.split(',')
                .map(|cell| match cell.parse::<f64>() {
                    Ok(x) if cell.contains('e') => format!("{x:.4e}"),
                    _ => cell.to_string(),
                })
                .collect()
        })
        .collect();
    let ncol = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..ncol)
        .map(|j| rows.iter().filter_map(|r| r.get(j)).map(String::len).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().enumerate().map(|(j, x)| format!("{x:<w$}", w = widths[j])).collect();
        let _ = writeln!(s, "{}", cells.join("  ").trim_end());
    }
    s
}
