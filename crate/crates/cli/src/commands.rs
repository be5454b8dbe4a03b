use std::io::Write;
use std::path::Path;

use qba_core::calibration::{calibrate, fit_bath_temperature, CalibrationInput};
use qba_core::cascade::{integrate_column, integrate_variance, spectrum};
use qba_core::scalar::bath_occupancy;
use qba_core::{NoiseKind, Preset, Spectrum64, VarianceUnits, ZpfConvention};

use crate::config::{preset_listing, Resolved, RunConfig};
use crate::error::CliError;

fn compute(r: &Resolved) -> Result<Spectrum64, CliError> {
    Ok(spectrum(&r.system, &r.grid_hz, r.quadrature.angle())?)
}

/// Writes the spectrum as CSV. The `white_noise` column is dropped when the
/// drive carries none.
pub fn write_spectrum_csv(s: &Spectrum64, white_noise: bool, out: &mut impl Write) -> std::io::Result<()> {
    let kinds: Vec<NoiseKind> =
        NoiseKind::ALL.into_iter().filter(|&k| white_noise || k != NoiseKind::WhiteNoise).collect();
    write!(out, "freq_hz,total_sn")?;
    for k in &kinds {
        write!(out, ",{}", k.label())?;
    }
    writeln!(out)?;
    for i in 0..s.len() {
        write!(out, "{:.16e},{:.16e}", s.grid_hz[i], s.total[i])?;
        for &k in &kinds {
            write!(out, ",{:.16e}", s.column(k)[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn spectrum_cmd(config: &Path, out: &mut impl Write) -> Result<(), CliError> {
    let r = RunConfig::load(config)?.resolve()?;
    let s = compute(&r)?;
    write_spectrum_csv(&s, r.system.drive.n_wn > 0.0, out)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Units {
    Sn,
    Zpf,
}

/// Integrates `total − 1` or, with `column`, one source column or `qba`.
pub fn variance_cmd(
    config: &Path,
    band: (f64, f64),
    units: Units,
    column: Option<&str>,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let r = RunConfig::load(config)?.resolve()?;
    let s = compute(&r)?;
    let (u, name) = match units {
        Units::Sn => (VarianceUnits::ShotNoise, "sn"),
        Units::Zpf => (VarianceUnits::Zpf(ZpfConvention::FullQuantum), "zpf"),
    };
    let v = match column {
        None => integrate_variance(&s, band, u)?,
        Some("qba") => integrate_column(&s, &s.qba(), band, u)?,
        Some(c) => {
            let kind = NoiseKind::ALL.into_iter().find(|k| k.label() == c).ok_or_else(|| {
                let known: Vec<_> = NoiseKind::ALL.iter().map(|k| k.label()).collect();
                CliError::Config(format!("--column: unknown column `{c}` (known: qba, {})", known.join(", ")))
            })?;
            integrate_column(&s, s.column(kind), band, u)?
        }
    };
    write!(out, "variance={v} units={name} band={},{}", band.0, band.1)?;
    if let Some(c) = column {
        write!(out, " column={c}")?;
    }
    writeln!(out)?;
    Ok(())
}

pub fn calibrate_spin_cmd(a: f64, b: f64, n_wn: f64, eta: f64, out: &mut impl Write) -> Result<(), CliError> {
    let c = calibrate(&CalibrationInput { a_height: a, b_height: b, n_wn, eta_det: eta })?;
    writeln!(out, "ratio={:.6} r_ba2={:.6e} r_th2={:.6e}", c.ratio, c.r_ba2, c.r_th2)?;
    Ok(())
}

/// Reads `freq_hz` and the PSD column (`total_sn`, else `psd`) from a CSV with a header.
pub fn read_psd_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let fi = find("freq_hz").ok_or_else(|| bad("missing `freq_hz` column".into()))?;
    let yi = find("total_sn")
        .or_else(|| find("psd"))
        .ok_or_else(|| bad("missing `total_sn` or `psd` column".into()))?;
    let (mut f, mut y) = (Vec::new(), Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = row + 2;
        let get = |i: usize| -> Result<f64, CliError> {
            let field = rec.get(i).unwrap_or("").trim();
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("line {line}: `{field}` is not a finite number")))
        };
        f.push(get(fi)?);
        y.push(get(yi)?);
    }
    if f.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok((f, y))
}

pub fn fit_bath_cmd(config: &Path, data: &Path, tmin: f64, tmax: f64, out: &mut impl Write) -> Result<(), CliError> {
    let r = RunConfig::load(config)?.resolve()?;
    let (f, y) = read_psd_csv(data)?;
    let fit = fit_bath_temperature(&r.system, &f, &y, r.quadrature.angle(), (tmin, tmax))?;
    let n = bath_occupancy(fit.t_bath, r.system.optomech.map(|o| o.mech.omega_m).unwrap_or(f64::NAN));
    writeln!(
        out,
        "t_bath_k={:.6} n_bath={:.1} residual={:.6e} iterations={} converged={}",
        fit.t_bath, n, fit.residual, fit.iterations, fit.converged
    )?;
    Ok(())
}

pub fn presets_cmd(name: Option<&str>, out: &mut impl Write) -> Result<(), CliError> {
    let names: Vec<&str> = match name {
        Some(n) => vec![n],
        None => Preset::NAMES.to_vec(),
    };
    for (i, n) in names.iter().enumerate() {
        let v = Preset::by_name(n).map_err(|e| CliError::Config(e.to_string()))?;
        if i > 0 {
            writeln!(out)?;
        }
        writeln!(out, "# preset = \"{n}\"")?;
        for (k, x) in preset_listing(&v) {
            writeln!(out, "{k} = {x:?}")?;
        }
    }
    Ok(())
}
