use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};

use qiren::models::{load_checkpoint, save_checkpoint, Checkpoint, TrainingMeta};
use qiren::spectrum::{model_output_spectrum, signal_spectrum};
use qiren::tasks::{
    ablate as run_ablation, band_errors, interp_baseline, load_named, superresolve, train_seeds, write_ablation_csv,
    write_pgm, AblationMatrix, Interp,
};
use qiren::verify::{format_table, run_all};

use crate::{AblateArgs, SpectrumArgs, SuperresArgs, TrainArgs, VerifyArgs};

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

pub fn train(args: &TrainArgs) -> Result<ExitCode> {
    let run = args.run.resolve()?;
    let data = load_named(run.data()?)?;
    let model_cfg = run.model_config(data.d_in(), data.d_out())?;
    let train_cfg = run.train_config();
    let seeds = run.seeds();
    let dir = run.out_dir();
    out_dir(&dir)?;
    log::info!(
        "training {} ({} params) on {} points for {} epochs, seeds {seeds:?}",
        model_cfg.family,
        model_cfg.count_params()?,
        data.len(),
        train_cfg.epochs
    );
    let (runs, best) = train_seeds(&model_cfg, &data, &train_cfg, &seeds)?;
    for r in &runs {
        log::info!("seed {}: final mse {:.6e} ({:.1}s)", r.report.seed, r.report.final_mse, r.report.wall_time_secs);
    }
    let best = runs.into_iter().nth(best).expect("best index in range");
    log::info!("best seed {}", best.report.seed);

    let mut f = create(&dir, "report.json")?;
    writeln!(f, "{}", best.report.to_json()?)?;
    f.flush()?;
    if train_cfg.epochs > 0 {
        best.report.write_loss_csv(create(&dir, "loss.csv")?)?;
        let mut ck = Checkpoint::new(best.model);
        ck.meta = Some(TrainingMeta {
            epochs: train_cfg.epochs,
            final_loss: best.report.final_mse,
        });
        ck.optimizer = Some(best.optimizer);
        save_checkpoint(&ck, dir.join("model.qirn"))?;
    }
    log::info!("wrote results to {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

pub fn superres(args: &SuperresArgs) -> Result<ExitCode> {
    let ck = load_checkpoint(&args.checkpoint)?;
    out_dir(&args.out)?;
    let hi = superresolve(&ck.model, args.size, args.size, args.factor)?;
    let img = hi.to_image()?;
    let name = format!("superres_{}x{}.pgm", img.rows, img.cols);
    write_pgm(args.out.join(&name), &img)?;
    log::info!("wrote {}", args.out.join(&name).display());
    if let Some(src) = &args.data {
        let low = load_named(src)?.to_image()?;
        for method in [Interp::Nearest, Interp::Bilinear] {
            let up = interp_baseline(&low, method, args.factor)?;
            write_pgm(args.out.join(format!("{method}_{}x{}.pgm", up.rows, up.cols)), &up)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn spectrum(args: &SpectrumArgs) -> Result<ExitCode> {
    let ck = load_checkpoint(&args.checkpoint)?;
    let data = load_named(&args.data)?;
    if data.d_in() != 1 {
        bail!("spectrum analysis needs a 1-D signal, {} has {} input dimensions", args.data, data.d_in());
    }
    out_dir(&args.out)?;
    let target: Vec<f64> = data.values.column(0).to_vec();
    let pred: Vec<f64> = ck.model.predict(&data.coords)?.column(0).to_vec();
    model_output_spectrum(&ck.model, &data.coords)?.write_csv(create(&args.out, "model_spectrum.csv")?)?;
    signal_spectrum(&target)?.write_csv(create(&args.out, "target_spectrum.csv")?)?;
    let bands = band_errors(&pred, &target, args.cutoff)?;
    let mut f = create(&args.out, "band_errors.json")?;
    writeln!(f, "{}", serde_json::to_string_pretty(&bands)?)?;
    f.flush()?;
    log::info!(
        "residual energy: low {:.3e}, high {:.3e}, total {:.3e}",
        bands.low,
        bands.high,
        bands.total
    );
    Ok(ExitCode::SUCCESS)
}

pub fn ablate(args: &AblateArgs) -> Result<ExitCode> {
    let run = args.run.resolve()?;
    let data = load_named(run.data()?)?;
    let base = run.model_config(data.d_in(), data.d_out())?;
    let train_cfg = run.train_config();
    let matrix = AblationMatrix::default();
    let cells = if args.grid {
        matrix.full_grid()
    } else {
        matrix.one_factor_at_a_time()
    };
    let seeds = run.seeds();
    let dir = run.out_dir();
    out_dir(&dir)?;
    log::info!("ablating {} cells × {} seeds", cells.len(), seeds.len());
    let results = run_ablation(&cells, &base, &data, &train_cfg, &seeds);
    let mut f = create(&dir, "ablation.csv")?;
    write_ablation_csv(&results, &mut f)?;
    f.flush()?;
    let failed = results.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!("error: {failed} of {} ablation runs diverged", results.len());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn verify(args: &VerifyArgs) -> Result<ExitCode> {
    let checks = run_all(args.seeds);
    print!("{}", format_table(&checks));
    Ok(if checks.iter().all(|c| c.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
