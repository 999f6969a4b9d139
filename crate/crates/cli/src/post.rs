//! `semflow post`: statistics of scalar time series.

use std::path::{Path, PathBuf};

use clap::Args;

use semflow::postproc::io::Table;
use semflow::postproc::plot::{line_chart, Axis, ChartSpec, Series};
use semflow::postproc::{convergence_time, histogram, is_uniform, psd, resample_uniform, running_average};
use semflow::{Error, Result};

const DEFAULT_BINS: &str = "32";
const SAMPLING_TOL: f64 = 1e-6;

#[derive(Args)]
pub struct PostArgs {
    /// CSV files with a `t` column.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Columns to analyse; defaults to `cl` when present, else every non-time column.
    #[arg(long = "column", short = 'c')]
    columns: Vec<String>,
    /// Welch power spectral density.
    #[arg(long)]
    psd: bool,
    /// Welch segments (50% overlap).
    #[arg(long, default_value_t = 2)]
    segments: usize,
    /// Running average and the time after which it stays within the band.
    #[arg(long)]
    running_avg: bool,
    /// Relative convergence band around the final mean.
    #[arg(long, default_value_t = 0.002)]
    band: f64,
    /// Percent-occurrence histogram with this many bins.
    #[arg(long, num_args = 0..=1, default_missing_value = DEFAULT_BINS)]
    hist: Option<usize>,
    /// Interpolate every series onto uniform sampling first.
    #[arg(long)]
    resample: bool,
    /// Output directory; defaults to the directory of the first input.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

struct Signal {
    label: String,
    t: Vec<f64>,
    x: Vec<f64>,
}

fn load_signals(args: &PostArgs) -> Result<Vec<Signal>> {
    let mut out = Vec::new();
    for path in &args.inputs {
        let table = Table::read(path)?;
        let t = table
            .column("t")
            .ok_or_else(|| Error::Configuration(format!("{} has no 't' column", path.display())))?
            .to_vec();
        let names: Vec<String> = if !args.columns.is_empty() {
            args.columns.clone()
        } else if table.column("cl").is_some() {
            vec!["cl".into()]
        } else {
            table.headers.iter().filter(|h| *h != "t" && *h != "step").cloned().collect()
        };
        let stem = path.file_stem().map_or_else(|| "series".into(), |s| s.to_string_lossy().into_owned());
        for name in names {
            let x = table
                .column(&name)
                .ok_or_else(|| Error::Configuration(format!("{} has no '{name}' column", path.display())))?
                .to_vec();
            out.push(Signal {
                label: format!("{stem}.{name}"),
                t: t.clone(),
                x,
            });
        }
    }
    if out.is_empty() {
        return Err(Error::Parameter("no series selected".into()));
    }
    Ok(out)
}

fn same_sampling(a: &[f64], b: &[f64]) -> bool {
    let scale = a.iter().chain(b).fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| (p - q).abs() <= SAMPLING_TOL * scale)
}

fn harmonise(signals: &mut [Signal], resample: bool) -> Result<()> {
    if resample {
        for s in signals.iter_mut() {
            let (t, x) = resample_uniform(&s.t, &s.x)?;
            s.t = t;
            s.x = x;
        }
        return Ok(());
    }
    let first = &signals[0];
    for s in &signals[1..] {
        if !same_sampling(&first.t, &s.t) {
            return Err(Error::Parameter(format!(
                "{} and {} are sampled differently; pass --resample",
                first.label, s.label
            )));
        }
    }
    Ok(())
}

/// `name.ext` for a single series, `name_label.ext` otherwise.
fn product(dir: &Path, name: &str, label: &str, single: bool, ext: &str) -> PathBuf {
    if single {
        dir.join(format!("{name}.{ext}"))
    } else {
        dir.join(format!("{name}_{label}.{ext}"))
    }
}

pub fn run(args: &PostArgs, env_out: Option<PathBuf>) -> Result<u8> {
    if !(args.psd || args.running_avg || args.hist.is_some()) {
        return Err(Error::Parameter("choose at least one of --psd, --running-avg, --hist".into()));
    }
    let mut signals = load_signals(args)?;
    harmonise(&mut signals, args.resample)?;
    let dir = args
        .out
        .clone()
        .or(env_out)
        .or_else(|| args.inputs[0].parent().map(Path::to_path_buf))
        .unwrap_or_default();
    let dir = if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir };
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let single = signals.len() == 1;

    if args.psd {
        let mut spectra = Vec::new();
        for s in &signals {
            if !is_uniform(&s.t, SAMPLING_TOL) {
                return Err(Error::Parameter(format!("{} is not uniformly sampled; pass --resample", s.label)));
            }
            let sp = psd(&s.t, &s.x, args.segments)?;
            let mut table = Table::new(&["frequency", "density"]);
            for (f, d) in sp.frequency.iter().zip(&sp.density) {
                table.push_row(&[*f, *d]);
            }
            table.write(&product(&dir, "psd", &s.label, single, "csv"))?;
            println!("{}: peak frequency {:.6e}, power {:.6e}", s.label, sp.peak_frequency(), sp.integrated_power());
            spectra.push(sp);
        }
        // the zero bin holds the mean and does not fit a log axis
        let series: Vec<Series> = signals
            .iter()
            .zip(&spectra)
            .map(|(s, sp)| Series {
                label: &s.label,
                x: &sp.frequency[1..],
                y: &sp.density[1..],
            })
            .collect();
        let spec = ChartSpec {
            title: "Power spectral density",
            x_label: "frequency",
            y_label: "PSD",
            x_axis: Axis::Log,
            y_axis: Axis::Log,
            ..Default::default()
        };
        line_chart(&dir.join("psd.svg"), &spec, &series)?;
    }

    if args.running_avg {
        let mut averages = Vec::new();
        for s in &signals {
            let avg = running_average(&s.t, &s.x)?;
            let mut table = Table::new(&["t", "value", "running_mean"]);
            for k in 0..s.t.len() {
                table.push_row(&[s.t[k], s.x[k], avg[k]]);
            }
            table.write(&product(&dir, "running_avg", &s.label, single, "csv"))?;
            let mean = avg.last().copied().unwrap_or(f64::NAN);
            match convergence_time(&s.t, &s.x, args.band)?.time() {
                Some(tc) => println!(
                    "{}: mean {mean:.6e}, within {}% of the mean from t = {tc:.6}",
                    s.label,
                    args.band * 100.0
                ),
                None => println!("{}: mean {mean:.6e}, not converged to {}%", s.label, args.band * 100.0),
            }
            averages.push(avg);
        }
        let series: Vec<Series> = signals
            .iter()
            .zip(&averages)
            .map(|(s, a)| Series {
                label: &s.label,
                x: &s.t,
                y: a,
            })
            .collect();
        let spec = ChartSpec {
            title: "Running average",
            x_label: "t",
            y_label: "mean",
            ..Default::default()
        };
        line_chart(&dir.join("running_avg.svg"), &spec, &series)?;
    }

    if let Some(bins) = args.hist {
        let mut centres = Vec::new();
        let mut percents = Vec::new();
        for s in &signals {
            let h = histogram(&s.x, bins)?;
            let mut table = Table::new(&["lower", "upper", "percent"]);
            let mid: Vec<f64> = h.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            for (k, p) in h.percent.iter().enumerate() {
                table.push_row(&[h.edges[k], h.edges[k + 1], *p]);
            }
            table.write(&product(&dir, "histogram", &s.label, single, "csv"))?;
            centres.push(mid);
            percents.push(h.percent);
        }
        let series: Vec<Series> = signals
            .iter()
            .enumerate()
            .map(|(k, s)| Series {
                label: &s.label,
                x: &centres[k],
                y: &percents[k],
            })
            .collect();
        let spec = ChartSpec {
            title: "Percent occurrence",
            x_label: "value",
            y_label: "percent",
            ..Default::default()
        };
        line_chart(&dir.join("histogram.svg"), &spec, &series)?;
    }
    println!("wrote products to {}", dir.display());
    Ok(0)
}
