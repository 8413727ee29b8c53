//! Command implementations behind the CLI: each builds a deterministic CSV
//! (plus an optional SVG) or runs the verification suite.
//!
//! CSV conventions: comma separator, `.` decimal point, UTF-8, LF line
//! endings, `#`-prefixed provenance comments recording the full resolved
//! configuration, then a header row naming every column. All content is
//! assembled in memory after validation, so no file is created for an
//! invalid configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiment::config::{ExperimentConfig, SweepAxis};
use crate::experiment::svg::{line_chart, Series};
use crate::intermod::{intermod_noise_ratio, NoiseProfile};
use crate::security::{multichannel_gain, single_channel_key_rate, total_key_rate};
use crate::verify::{run_verification, FaultInjection, VerificationConfig, VerificationReport};

/// Files produced by a command.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub csv_path: PathBuf,
    pub svg_path: Option<PathBuf>,
}

/// Per-channel noise profile.
///
/// Without a sweep axis: one row per channel of the selected plan
/// (`k, M2, epsilon_ratio`). With `--sweep mbar`: one row per mean-index
/// value and plan (`mbar, plan, n_channels, ratio_first, ratio_last`),
/// covering the three canonical plans unless a plan was selected explicitly.
pub fn cmd_noise_profile(cfg: &ExperimentConfig) -> Result<Artifact> {
    cfg.validate()?;
    let mut csv = cfg.provenance("noise-profile");
    let chart;

    match cfg.sweep {
        None => {
            let plan = cfg.single_plan()?;
            let modulation = cfg.modulation()?;
            let profile = NoiseProfile::compute(&plan, &modulation)?;
            csv.push_str("k,m2,epsilon_ratio\n");
            let mut points = Vec::new();
            for k in 1..=plan.n_channels() {
                let ratio = profile.ratio(k)?;
                writeln!(csv, "{k},{},{}", plan.m2(k)?, ratio).expect("string write");
                points.push((k as f64, ratio));
            }
            chart = line_chart(
                &format!("Source noise ratio per channel ({})", plan.label()),
                "channel index k",
                "epsilon_S(k) / V_A",
                false,
                &[Series {
                    name: plan.label().to_string(),
                    points,
                }],
            );
        }
        Some(SweepAxis::MeanIndex) => {
            let plans = cfg.comparison_plans()?;
            let grid = cfg.grid(SweepAxis::MeanIndex)?;
            csv.push_str("mbar,plan,n_channels,ratio_first,ratio_last\n");
            let mut series: Vec<Series> = Vec::new();
            for plan in &plans {
                series.push(Series {
                    name: format!("{} k=1", plan.label()),
                    points: Vec::new(),
                });
                series.push(Series {
                    name: format!("{} k=N", plan.label()),
                    points: Vec::new(),
                });
            }
            for mbar in grid.values() {
                let mut sweep_cfg = cfg.clone();
                sweep_cfg.mbar = mbar;
                let modulation = sweep_cfg.modulation()?;
                for (i, plan) in plans.iter().enumerate() {
                    let n = plan.n_channels();
                    let first = intermod_noise_ratio(plan, 1, &modulation)?;
                    let last = intermod_noise_ratio(plan, n, &modulation)?;
                    writeln!(csv, "{mbar},{},{n},{first},{last}", plan.label())
                        .expect("string write");
                    series[2 * i].points.push((mbar, first));
                    series[2 * i + 1].points.push((mbar, last));
                }
            }
            chart = line_chart(
                "Source noise ratio vs mean modulation index",
                "mean modulation index",
                "epsilon_S / V_A",
                false,
                &series,
            );
        }
        Some(SweepAxis::Distance) => {
            return Err(Error::Config(
                "noise-profile sweeps the mean index; use `--sweep mbar` or no sweep".into(),
            ));
        }
    }

    write_artifact(cfg, "noise-profile.csv", &csv, Some(&chart))
}

/// Secret key rate vs transmission distance for one plan: per-channel rates
/// (bits/pulse and bits/s side by side), the plan total, and the
/// single-channel reference.
pub fn cmd_keyrate_sweep(cfg: &ExperimentConfig) -> Result<Artifact> {
    cfg.validate()?;
    if cfg.sweep == Some(SweepAxis::MeanIndex) {
        return Err(Error::Config(
            "keyrate sweeps distance; drop `--sweep mbar`".into(),
        ));
    }
    let plan = cfg.single_plan()?;
    let n = plan.n_channels();
    let modulation = cfg.modulation()?;
    let protocol = cfg.protocol()?;
    let detector = cfg.detector()?;
    let grid = cfg.grid(SweepAxis::Distance)?;

    let mut csv = cfg.provenance("keyrate");
    csv.push_str("distance_km,transmittance");
    for k in 1..=n {
        write!(csv, ",pulse_k{k},bps_k{k}").expect("string write");
    }
    csv.push_str(",rtot_bps,sc_pulse,sc_bps\n");

    let rows: Vec<(String, f64, f64, f64, f64)> = grid
        .values()
        .par_iter()
        .map(|&distance| -> Result<(String, f64, f64, f64, f64)> {
            let link = cfg.link_at(distance)?;
            let (r_tot, per_channel) =
                total_key_rate(&plan, &modulation, &protocol, &link, &detector)?;
            let sc = single_channel_key_rate(&protocol, &link, &detector)?;
            let mut row = format!("{distance},{}", link.transmittance());
            for r in &per_channel {
                write!(
                    row,
                    ",{},{}",
                    r.key_rate_bits_per_pulse, r.key_rate_bits_per_sec
                )
                .expect("string write");
            }
            write!(
                row,
                ",{r_tot},{},{}",
                sc.key_rate_bits_per_pulse, sc.key_rate_bits_per_sec
            )
            .expect("string write");
            Ok((
                row,
                per_channel[0].key_rate_bits_per_sec,
                per_channel[n - 1].key_rate_bits_per_sec,
                r_tot,
                sc.key_rate_bits_per_sec,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut first = Vec::new();
    let mut last = Vec::new();
    let mut tot = Vec::new();
    let mut sc = Vec::new();
    for (value, (row, k1, kn, r_tot, r_sc)) in grid.values().iter().zip(&rows) {
        csv.push_str(row);
        csv.push('\n');
        first.push((*value, *k1));
        last.push((*value, *kn));
        tot.push((*value, *r_tot));
        sc.push((*value, *r_sc));
    }
    let chart = line_chart(
        &format!("Secret key bit rate vs distance ({})", plan.label()),
        "distance (km)",
        "bits/s",
        true,
        &[
            Series {
                name: "k = 1".into(),
                points: first,
            },
            Series {
                name: format!("k = {n}"),
                points: last,
            },
            Series {
                name: "total".into(),
                points: tot,
            },
            Series {
                name: "single channel".into(),
                points: sc,
            },
        ],
    );

    write_artifact(cfg, "keyrate.csv", &csv, Some(&chart))
}

/// Multi-channel gain `G_M` per plan, against distance (fixed mean index) or
/// against the mean index (fixed distance). Undefined gains — past the
/// single-channel cutoff — are emitted as empty cells.
pub fn cmd_gain(cfg: &ExperimentConfig) -> Result<Artifact> {
    cfg.validate()?;
    let axis = cfg.sweep.unwrap_or(SweepAxis::Distance);
    let plans = cfg.comparison_plans()?;
    let protocol = cfg.protocol()?;
    let detector = cfg.detector()?;
    let grid = cfg.grid(axis)?;

    let mut csv = cfg.provenance("gain");
    let axis_name = match axis {
        SweepAxis::Distance => "distance_km",
        SweepAxis::MeanIndex => "mbar",
    };
    csv.push_str(axis_name);
    for plan in &plans {
        write!(csv, ",gm_{}", plan.label()).expect("string write");
    }
    csv.push('\n');

    let rows: Vec<(String, Vec<Option<f64>>)> = grid
        .values()
        .par_iter()
        .map(|&value| -> Result<(String, Vec<Option<f64>>)> {
            let (link, modulation) = match axis {
                SweepAxis::Distance => (cfg.link_at(value)?, cfg.modulation()?),
                SweepAxis::MeanIndex => {
                    let mut point_cfg = cfg.clone();
                    point_cfg.mbar = value;
                    (cfg.link_at(cfg.distance)?, point_cfg.modulation()?)
                }
            };
            let mut row = format!("{value}");
            let mut gains = Vec::with_capacity(plans.len());
            for plan in &plans {
                let gain = multichannel_gain(plan, &modulation, &protocol, &link, &detector)?;
                match gain {
                    Some(g) => write!(row, ",{g}").expect("string write"),
                    None => row.push(','),
                }
                gains.push(gain);
            }
            Ok((row, gains))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut series: Vec<Series> = plans
        .iter()
        .map(|p| Series {
            name: p.label().to_string(),
            points: Vec::new(),
        })
        .collect();
    for (value, (row, gains)) in grid.values().iter().zip(&rows) {
        csv.push_str(row);
        csv.push('\n');
        for (s, g) in series.iter_mut().zip(gains) {
            if let Some(g) = g {
                s.points.push((*value, *g));
            }
        }
    }
    let chart = line_chart(
        &format!("Multi-channel gain vs {axis_name}"),
        axis_name,
        "G_M",
        false,
        &series,
    );

    write_artifact(cfg, "gain.csv", &csv, Some(&chart))
}

/// Runs the oracle verification suite; callers render the report and map a
/// failure to the verification exit status.
pub fn cmd_verify(cfg: &ExperimentConfig, faults: &FaultInjection) -> Result<VerificationReport> {
    cfg.validate()?;
    run_verification(
        &VerificationConfig {
            trials: cfg.trials,
            seed: cfg.seed,
        },
        faults,
    )
}

fn write_artifact(
    cfg: &ExperimentConfig,
    default_name: &str,
    csv: &str,
    chart: Option<&str>,
) -> Result<Artifact> {
    let csv_path = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_name));
    write_file(&csv_path, csv)?;
    let svg_path = if cfg.svg {
        let path = csv_path.with_extension("svg");
        if let Some(chart) = chart {
            write_file(&path, chart)?;
        }
        Some(path)
    } else {
        None
    };
    Ok(Artifact { csv_path, svg_path })
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_cfg(dir: &tempfile::TempDir, name: &str) -> ExperimentConfig {
        ExperimentConfig {
            out: Some(dir.path().join(name)),
            trials: 20_000,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn noise_profile_channel_view() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = temp_cfg(&dir, "np.csv");
        let artifact = cmd_noise_profile(&cfg).unwrap();
        let text = std::fs::read_to_string(&artifact.csv_path).unwrap();
        assert!(text.starts_with("# subcarrier-cvqkd noise-profile\n"));
        let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
        assert_eq!(lines.next().unwrap(), "k,m2,epsilon_ratio");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "1");
        assert_eq!(first[1], "78");
        let ratio: f64 = first[2].parse().unwrap();
        assert!((ratio - 1.241e-3).abs() < 1e-6);
        // 40 channel rows.
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 41);
    }

    #[test]
    fn noise_profile_mbar_sweep_covers_three_plans() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = temp_cfg(&dir, "np3.csv");
        cfg.sweep = Some(SweepAxis::MeanIndex);
        cfg.from = Some(0.002);
        cfg.to = Some(0.004);
        cfg.step = Some(0.001);
        let artifact = cmd_noise_profile(&cfg).unwrap();
        let text = std::fs::read_to_string(&artifact.csv_path).unwrap();
        let rows: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("mbar"))
            .collect();
        assert_eq!(rows.len(), 3 * 3);
        assert!(rows[0].contains(",high,40,"));
        assert!(rows[1].contains(",medium,15,"));
        assert!(rows[2].contains(",low,5,"));
    }

    #[test]
    fn noise_profile_rejects_distance_sweep() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = temp_cfg(&dir, "np.csv");
        cfg.sweep = Some(SweepAxis::Distance);
        assert!(matches!(cmd_noise_profile(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn keyrate_sweep_columns() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = temp_cfg(&dir, "kr.csv");
        cfg.plan = Some(crate::experiment::config::PlanSelection::Low);
        cfg.from = Some(0.0);
        cfg.to = Some(10.0);
        cfg.step = Some(5.0);
        let artifact = cmd_keyrate_sweep(&cfg).unwrap();
        let text = std::fs::read_to_string(&artifact.csv_path).unwrap();
        let header = text
            .lines()
            .find(|l| l.starts_with("distance_km"))
            .unwrap();
        assert!(header.contains("pulse_k1,bps_k1"));
        assert!(header.contains("pulse_k5,bps_k5"));
        assert!(header.ends_with("rtot_bps,sc_pulse,sc_bps"));
        let rows: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("distance_km"))
            .collect();
        assert_eq!(rows.len(), 3);
        // At zero distance every channel is alive.
        let zero: Vec<&str> = rows[0].split(',').collect();
        assert_eq!(zero[0], "0");
        assert_eq!(zero[1], "1");
        for pair in zero[2..12].chunks(2) {
            let bps: f64 = pair[1].parse().unwrap();
            assert!(bps > 0.0);
        }
    }

    #[test]
    fn keyrate_rejects_mbar_sweep() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = temp_cfg(&dir, "kr.csv");
        cfg.sweep = Some(SweepAxis::MeanIndex);
        assert!(matches!(cmd_keyrate_sweep(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn gain_mbar_sweep_near_channel_count() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = temp_cfg(&dir, "gain.csv");
        cfg.sweep = Some(SweepAxis::MeanIndex);
        cfg.from = Some(0.001);
        cfg.to = Some(0.002);
        cfg.step = Some(0.001);
        let artifact = cmd_gain(&cfg).unwrap();
        let text = std::fs::read_to_string(&artifact.csv_path).unwrap();
        let header = text.lines().find(|l| l.starts_with("mbar")).unwrap();
        assert_eq!(header, "mbar,gm_high,gm_medium,gm_low");
        let row: Vec<&str> = text.lines().last().unwrap().split(',').collect();
        let gm_high: f64 = row[1].parse().unwrap();
        let gm_low: f64 = row[3].parse().unwrap();
        assert!((gm_high - 40.0).abs() / 40.0 < 0.02);
        assert!((gm_low - 5.0).abs() / 5.0 < 0.02);
    }

    #[test]
    fn gain_distance_sweep_has_undefined_tail() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = temp_cfg(&dir, "gain.csv");
        cfg.plan = Some(crate::experiment::config::PlanSelection::Low);
        cfg.from = Some(100.0);
        cfg.to = Some(120.0);
        cfg.step = Some(10.0);
        let artifact = cmd_gain(&cfg).unwrap();
        let text = std::fs::read_to_string(&artifact.csv_path).unwrap();
        let last = text.lines().last().unwrap();
        // Past the single-channel cutoff (~108.6 km) the gain cell is empty.
        assert_eq!(last, "120,");
    }

    #[test]
    fn unwritable_output_path_is_io_error() {
        let mut cfg = ExperimentConfig::default();
        cfg.out = Some(PathBuf::from("/nonexistent-dir/x.csv"));
        assert!(matches!(
            cmd_noise_profile(&cfg),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn svg_written_alongside_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = temp_cfg(&dir, "np.csv");
        cfg.svg = true;
        let artifact = cmd_noise_profile(&cfg).unwrap();
        let svg_path = artifact.svg_path.unwrap();
        assert!(svg_path.ends_with("np.svg"));
        let svg = std::fs::read_to_string(svg_path).unwrap();
        assert!(svg.starts_with("<svg"));
    }

    #[test]
    fn csv_outputs_are_byte_identical_across_runs() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = temp_cfg(&dir, "a.csv");
        cfg.plan = Some(crate::experiment::config::PlanSelection::Medium);
        cfg.from = Some(0.0);
        cfg.to = Some(40.0);
        cfg.step = Some(20.0);
        let a = cmd_keyrate_sweep(&cfg).unwrap();
        let first = std::fs::read(&a.csv_path).unwrap();
        cfg.out = Some(dir.path().join("b.csv"));
        let b = cmd_keyrate_sweep(&cfg).unwrap();
        let second = std::fs::read(&b.csv_path).unwrap();
        assert_eq!(first, second);
    }
}
