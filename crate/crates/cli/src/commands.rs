//! Subcommand drivers. Each returns the text to print on standard output.

use lpdens::{
    rbc_pointwise, scale_results, select_bandwidths, uniform_band, BandwidthResult, BwConfig, InferenceTable, Sample,
};

use crate::config::{BwArgs, Cli, Command, EstArgs, FitArgs, Format, InputArgs, SimArgs};
use crate::error::CliError;
use crate::input::read_path;
use crate::output::{self, BwReport, ConfigEcho, FitReport};
use crate::simulate::run_simulation;

pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Bw(a) => cmd_bw(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

pub fn load_sample(input: &InputArgs, masspoints: bool) -> Result<Sample, CliError> {
    let data = read_path(&input.input, &input.column, input.weights_col.as_deref())?;
    Ok(Sample::new(&data.values, data.weights.as_deref())?.with_mass_points(masspoints))
}

fn bandwidths(sample: &Sample, grid: &lpdens::EvalGrid, est: &EstArgs) -> Result<BandwidthResult, CliError> {
    let cfg = BwConfig {
        regularize: est.regularize(),
        ..BwConfig::new(est.p, est.v, est.kernel)
    };
    Ok(select_bandwidths(sample, grid, &est.method(), &cfg)?)
}

fn echo(sample: &Sample, est: &EstArgs) -> ConfigEcho {
    ConfigEcho {
        n: sample.n(),
        p: est.p,
        v: est.v,
        q: None,
        kernel: est.kernel.to_string(),
        bwselect: est.method().label().to_string(),
        regularize: !est.no_regularize,
        masspoints: !est.no_masspoints,
        alpha: None,
        ciuniform: None,
        cisimul: None,
        scale: None,
        seed: None,
    }
}

/// Bandwidths and inference table for `fit`, without formatting.
pub fn fit_results(args: &FitArgs) -> Result<(Sample, BandwidthResult, InferenceTable), CliError> {
    let cfg = args.fit_config()?;
    let sample = load_sample(&args.input, !args.est.no_masspoints)?;
    let grid = args.grid.resolve(&sample)?;
    let bw = bandwidths(&sample, &grid, &args.est)?;
    let table = if args.ciuniform {
        uniform_band(&sample, &bw, &cfg, args.alpha, args.cisimul, args.seed)?
    } else {
        rbc_pointwise(&sample, &bw, &cfg, args.alpha)?
    };
    let table = scale_results(&table, args.scale)?;
    Ok((sample, bw, table))
}

pub fn cmd_fit(args: &FitArgs) -> Result<String, CliError> {
    let (sample, bw, table) = fit_results(args)?;
    let config = ConfigEcho {
        q: Some(table.config.q),
        alpha: Some(args.alpha),
        ciuniform: Some(args.ciuniform),
        cisimul: args.ciuniform.then_some(args.cisimul),
        scale: Some(args.scale),
        seed: args.ciuniform.then_some(args.seed),
        ..echo(&sample, &args.est)
    };
    let report = FitReport::new(config, &bw, &table);
    match args.est.format {
        Format::Table => Ok(output::fit_table(&report, args.est.sep)),
        Format::Csv => output::fit_csv(&report),
        Format::Json => output::to_json(&report),
    }
}

pub fn cmd_bw(args: &BwArgs) -> Result<String, CliError> {
    args.validate()?;
    let sample = load_sample(&args.input, !args.est.no_masspoints)?;
    let grid = args.grid.resolve(&sample)?;
    let bw = bandwidths(&sample, &grid, &args.est)?;
    let report = BwReport::new(echo(&sample, &args.est), &bw);
    match args.est.format {
        Format::Table => Ok(output::bw_table(&report, args.est.sep)),
        Format::Csv => output::bw_csv(&report),
        Format::Json => output::to_json(&report),
    }
}

pub fn cmd_simulate(args: &SimArgs) -> Result<String, CliError> {
    let report = run_simulation(&args.sim_config()?)?;
    match args.format {
        Format::Table => Ok(output::sim_table(&report)),
        Format::Csv => output::sim_csv(&report),
        Format::Json => output::to_json(&report),
    }
}
