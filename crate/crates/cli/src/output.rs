use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `#`-prefixed header lines: tool version, subcommand, then the resolved inputs.
pub fn header(command: &str, resolved: &[(String, String)]) -> String {
    let mut s = format!("# lambda-dicke {VERSION}\n# command = {command}\n");
    for (k, v) in resolved {
        s.push_str(&format!("# {k} = {v}\n"));
    }
    s
}

/// Writes header and body to `out`, or to stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, header: &str, body: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, header, body),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(header.as_bytes())?;
            stdout.write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, header: &str, body: &str) -> Result<()> {
    fs::write(path, format!("{header}{body}")).with_context(|| format!("cannot write {}", path.display()))
}

/// `dir/name.csv` -> `dir/name.<tag>.<ext>`
pub fn sibling(path: &Path, tag: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{tag}.{ext}"))
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

pub fn gnuplot_grid(csv: &Path, boundary: &Path) -> String {
    format!(
        "# lambda-dicke {VERSION}\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'g1 / g1_trk'\n\
         set ylabel 'g2 / g2_trk'\n\
         set cblabel 'sqrt(psi2^2 + psi3^2)'\n\
         set view map\n\
         splot '{}' using 3:4:(sqrt($5**2 + $6**2)) with image notitle\n\
         # boundary overlay in raw couplings: '{}' using 2:1\n",
        file_name(csv),
        file_name(boundary)
    )
}

pub fn gnuplot_sweep(csv: &Path) -> String {
    format!(
        "# lambda-dicke {VERSION}\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'chi'\n\
         set ylabel 'g_c'\n\
         plot for [r in 'g1 g2 diag'] '{}' using 1:(strcol(3) eq r ? $4 : NaN) with linespoints title r\n",
        file_name(csv)
    )
}
