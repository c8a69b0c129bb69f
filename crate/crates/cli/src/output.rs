//! Deterministic data emission: CSV writers, the metadata file with content
//! checksums, and timings (kept in a separate file so everything else is
//! byte-reproducible for a fixed config and seed).

use kgtx_core::dispersion::CoefficientValue;
use kgtx_core::nlsolver::EnergyReport;
use kgtx_core::params::Branch;
use kgtx_core::BranchField;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects emitted files so the metadata can checksum them.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<(String, String)>, // name, sha256 hex
}

impl OutputDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        let mut hasher = Sha256::new();
        hasher.update(contents.as_bytes());
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        fs::write(self.root.join(name), contents)?;
        self.files.push((name.to_string(), hex));
        Ok(())
    }

    /// Write `metadata.txt`: config echo, version, seed, summary lines, and a
    /// checksum per data file. Wall-clock timings go to `timings.txt`, which
    /// stays outside the determinism contract.
    pub fn finish(
        mut self,
        config_echo: &str,
        seed: u64,
        summary: &[String],
        timings: &[(String, f64)],
    ) -> std::io::Result<()> {
        let mut meta = String::new();
        meta.push_str(&format!("artifact = kgtx {}\n", env!("CARGO_PKG_VERSION")));
        meta.push_str(&format!("seed = {seed}\n"));
        meta.push_str("\n[config]\n");
        meta.push_str(config_echo);
        meta.push_str("\n[summary]\n");
        for line in summary {
            meta.push_str(line);
            meta.push('\n');
        }
        meta.push_str("\n[checksums]\n");
        for (name, hex) in &self.files {
            meta.push_str(&format!("sha256 {hex} {name}\n"));
        }
        fs::write(self.root.join("metadata.txt"), &meta)?;

        let mut tfile = fs::File::create(self.root.join("timings.txt"))?;
        writeln!(
            tfile,
            "# wall-clock seconds; excluded from determinism checks"
        )?;
        for (name, secs) in timings {
            writeln!(tfile, "{name} = {secs:.6}")?;
        }
        self.files.clear();
        Ok(())
    }
}

/// Snapshot rows `t,X,u` in the global coordinate, branch two at negative X.
pub fn fields_csv(snapshots: &[(f64, BranchField)]) -> String {
    let mut s = String::from("t,X,u\n");
    for (t, field) in snapshots {
        let grid = field.grid();
        let n = grid.n();
        for i in (1..n).rev() {
            s.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(*t),
                fmt_f64(grid.global_x(Branch::Two, i)),
                fmt_f64(field.branch(Branch::Two)[i])
            ));
        }
        for i in 0..n {
            s.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(*t),
                fmt_f64(grid.global_x(Branch::One, i)),
                fmt_f64(field.branch(Branch::One)[i])
            ));
        }
    }
    s
}

pub fn energy_csv(energies: &[EnergyReport]) -> String {
    let mut s = String::from("t,E,kinetic,elastic,dispersive,nonlinear\n");
    for e in energies {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(e.t),
            fmt_f64(e.total),
            fmt_f64(e.kinetic),
            fmt_f64(e.elastic),
            fmt_f64(e.dispersive),
            fmt_f64(e.nonlinear)
        ));
    }
    s
}

pub fn coefficients_csv(
    reflection: &[CoefficientValue],
    transmission: &[CoefficientValue],
) -> String {
    let mut s = String::from("omega,re_CR,im_CR,re_T,im_T\n");
    for (r, t) in reflection.iter().zip(transmission) {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.omega),
            fmt_f64(r.value.re),
            fmt_f64(r.value.im),
            fmt_f64(t.value.re),
            fmt_f64(t.value.im)
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
        assert_eq!(fmt_f64(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn format_round_trips() {
        for &x in &[1.5e-13, -7.25, 0.1 + 0.2, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
