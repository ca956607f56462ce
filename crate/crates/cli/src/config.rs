//! Experiment configuration: the diagonal and grid mini-grammars, key=value
//! config files, and the canonical config hash carried in every output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use rmtlab::ensembles::{DiagonalMatrix, Ensemble};
use rmtlab::ring::RingField;
use rmtlab::stats::fmt_f64;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parse `zero | ident | neg-ident | scalar:<re>[+<im>i] | diag:<v1,...,vk>
/// | uniform:<lo>:<hi>` into an n-dimensional diagonal.
pub fn parse_d_spec(spec: &str, n: usize) -> Result<DiagonalMatrix> {
    if n == 0 {
        bail!("dimension must be positive");
    }
    match spec {
        "zero" => return Ok(DiagonalMatrix::from_real(&vec![0.0; n])),
        "ident" => return Ok(DiagonalMatrix::from_real(&vec![1.0; n])),
        "neg-ident" => return Ok(DiagonalMatrix::from_real(&vec![-1.0; n])),
        _ => {}
    }
    if let Some(rest) = spec.strip_prefix("scalar:") {
        let z = parse_complex(rest).map_err(|e| anyhow!("d-spec scalar at position 7: {e}"))?;
        return Ok(DiagonalMatrix::new(vec![z; n]));
    }
    if let Some(rest) = spec.strip_prefix("diag:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != n {
            bail!("expected {} entries, got {}", n, parts.len());
        }
        let mut diag = Vec::with_capacity(n);
        for (k, p) in parts.iter().enumerate() {
            let z = parse_complex(p).map_err(|e| {
                anyhow!(
                    "d-spec entry {} at position {}: {e}",
                    k + 1,
                    5 + offset_of(rest, k)
                )
            })?;
            diag.push(z);
        }
        return Ok(DiagonalMatrix::new(diag));
    }
    if let Some(rest) = spec.strip_prefix("uniform:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 {
            bail!("d-spec uniform wants `uniform:<lo>:<hi>`, got `{spec}`");
        }
        let lo: f64 = parts[0]
            .parse()
            .map_err(|_| anyhow!("d-spec uniform lo at position 8: `{}`", parts[0]))?;
        let hi: f64 = parts[1].parse().map_err(|_| {
            anyhow!(
                "d-spec uniform hi at position {}: `{}`",
                9 + parts[0].len(),
                parts[1]
            )
        })?;
        if n == 1 {
            return Ok(DiagonalMatrix::from_real(&[lo]));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        return Ok(DiagonalMatrix::from_real(&vals));
    }
    bail!("d-spec: unknown form `{spec}` at position 0 (expected zero | ident | neg-ident | scalar: | diag: | uniform:)")
}

fn offset_of(rest: &str, entry: usize) -> usize {
    rest.split(',').take(entry).map(|p| p.len() + 1).sum()
}

/// `<re>`, `<re>+<im>i` or `<re>-<im>i`.
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some(body) = s.strip_suffix('i') {
        // Split at the last +/- that is not a leading sign or exponent sign.
        let bytes = body.as_bytes();
        let mut split = None;
        for pos in (1..bytes.len()).rev() {
            let c = bytes[pos] as char;
            if (c == '+' || c == '-') && !matches!(bytes[pos - 1] as char, 'e' | 'E') {
                split = Some(pos);
                break;
            }
        }
        let pos = split.ok_or_else(|| format!("`{s}`: imaginary literal needs `<re>+<im>i`"))?;
        let re: f64 = body[..pos]
            .parse()
            .map_err(|_| format!("bad real part `{}`", &body[..pos]))?;
        let im_str = &body[pos..];
        let im: f64 = if im_str == "+" || im_str == "-" {
            format!("{im_str}1").parse().unwrap()
        } else {
            im_str
                .parse()
                .map_err(|_| format!("bad imaginary part `{im_str}`"))?
        };
        Ok(Complex64::new(re, im))
    } else {
        let re: f64 = s.parse().map_err(|_| format!("bad number `{s}`"))?;
        Ok(Complex64::new(re, 0.0))
    }
}

/// `log:<lo>:<hi>:<points>` (log-equispaced inclusive) or `list:<v1,...>`.
pub fn parse_t_grid(spec: &str) -> Result<Vec<f64>> {
    let grid: Vec<f64> = if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            bail!("t-grid wants `log:<lo>:<hi>:<points>`, got `{spec}`");
        }
        let lo: f64 = parts[0].parse().context("t-grid lo")?;
        let hi: f64 = parts[1].parse().context("t-grid hi")?;
        let points: usize = parts[2].parse().context("t-grid points")?;
        if lo <= 0.0 || hi <= lo || points < 2 {
            bail!("t-grid needs 0 < lo < hi and points >= 2");
        }
        let (llo, lhi) = (lo.ln(), hi.ln());
        let mut g: Vec<f64> = (0..points)
            .map(|k| (llo + (lhi - llo) * k as f64 / (points - 1) as f64).exp())
            .collect();
        // Inclusive endpoints, exactly.
        g[0] = lo;
        g[points - 1] = hi;
        g
    } else if let Some(rest) = spec.strip_prefix("list:") {
        rest.split(',')
            .map(|p| {
                p.parse::<f64>()
                    .with_context(|| format!("t-grid value `{p}`"))
            })
            .collect::<Result<Vec<f64>>>()?
    } else {
        bail!("t-grid: unknown form `{spec}` (expected log: or list:)");
    };
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            bail!("t-grid must be strictly ascending");
        }
    }
    if grid.first().copied().unwrap_or(0.0) <= 0.0 {
        bail!("t-grid must be positive");
    }
    Ok(grid)
}

/// Key=value file; `#` starts a comment. Flags override file values.
pub fn load_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), lineno + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// The experiment payloads; every field here is semantic and hashed.
#[derive(Debug, Clone)]
pub enum Experiment {
    Tail {
        n: usize,
        d_spec: String,
        ensemble: Ensemble,
        t_grid_spec: String,
        trials: u64,
    },
    Lemma {
        name: String,
        n: usize,
        instances: u64,
        trials: u64,
        samples: u64,
    },
    SingleRing {
        n: usize,
        d_spec: String,
        field: RingField,
        trials: u64,
        margin: f64,
    },
    SrCheck {
        n: usize,
        d_spec: String,
        m_threshold: f64,
        kappa: f64,
        kappa1: f64,
        z_points: usize,
        symmetrize: bool,
        sr3_z: Vec<f64>,
        delta_exp: f64,
        trials: u64,
    },
    Counterexample {
        m_param: f64,
        draws: u64,
    },
    VerifyAll,
}

impl Experiment {
    pub fn tag(&self) -> &'static str {
        match self {
            Experiment::Tail { .. } => "tail",
            Experiment::Lemma { .. } => "lemma",
            Experiment::SingleRing { .. } => "single-ring",
            Experiment::SrCheck { .. } => "sr-check",
            Experiment::Counterexample { .. } => "counterexample",
            Experiment::VerifyAll => "verify-all",
        }
    }

    fn canonical_pairs(&self) -> Vec<(String, String)> {
        let mut pairs = vec![("experiment".to_string(), self.tag().to_string())];
        let mut push = |k: &str, v: String| pairs.push((k.to_string(), v));
        match self {
            Experiment::Tail {
                n,
                d_spec,
                ensemble,
                t_grid_spec,
                trials,
            } => {
                push("n", n.to_string());
                push("d", d_spec.clone());
                push("ensemble", ensemble.tag().to_string());
                push("t-grid", t_grid_spec.clone());
                push("trials", trials.to_string());
            }
            Experiment::Lemma {
                name,
                n,
                instances,
                trials,
                samples,
            } => {
                push("lemma", name.clone());
                push("n", n.to_string());
                push("instances", instances.to_string());
                push("trials", trials.to_string());
                push("samples", samples.to_string());
            }
            Experiment::SingleRing {
                n,
                d_spec,
                field,
                trials,
                margin,
            } => {
                push("n", n.to_string());
                push("d", d_spec.clone());
                push(
                    "field",
                    match field {
                        RingField::Complex => "complex".into(),
                        RingField::Real => "real".into(),
                    },
                );
                push("trials", trials.to_string());
                push("margin", fmt_f64(*margin));
            }
            Experiment::SrCheck {
                n,
                d_spec,
                m_threshold,
                kappa,
                kappa1,
                z_points,
                symmetrize,
                sr3_z,
                delta_exp,
                trials,
            } => {
                push("n", n.to_string());
                push("d", d_spec.clone());
                push("m", fmt_f64(*m_threshold));
                push("kappa", fmt_f64(*kappa));
                push("kappa1", fmt_f64(*kappa1));
                push("z-points", z_points.to_string());
                push("symmetrize", symmetrize.to_string());
                push(
                    "sr3-z",
                    sr3_z
                        .iter()
                        .map(|z| fmt_f64(*z))
                        .collect::<Vec<_>>()
                        .join(","),
                );
                push("delta-exp", fmt_f64(*delta_exp));
                push("trials", trials.to_string());
            }
            Experiment::Counterexample { m_param, draws } => {
                push("m-param", fmt_f64(*m_param));
                push("draws", draws.to_string());
            }
            Experiment::VerifyAll => {}
        }
        pairs
    }
}

/// A fully resolved run: the experiment payload plus execution details.
/// `threads` and `out_path` are execution details and are excluded from the
/// hash, so identical science at different thread counts shares a hash.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub threads: usize,
    pub out_path: PathBuf,
}

impl ExperimentConfig {
    pub fn config_hash(&self) -> String {
        let mut pairs = self.experiment.canonical_pairs();
        pairs.push(("seed".to_string(), self.seed.to_string()));
        let mut hasher = Sha256::new();
        for (k, v) in pairs {
            hasher.update(k.as_bytes());
            hasher.update(b"=");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Provenance line placed at the top of every emitted file.
    pub fn header_line(&self) -> String {
        format!(
            "# rmtlab {} config={} seed={}",
            TOOL_VERSION,
            self.config_hash(),
            self.seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_spec_fixed_forms() {
        let z = parse_d_spec("zero", 3).unwrap();
        assert!(z.diag.iter().all(|v| v.norm() == 0.0));
        let ni = parse_d_spec("neg-ident", 2).unwrap();
        assert_eq!(ni.diag[1], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn d_spec_uniform_is_equispaced() {
        let d = parse_d_spec("uniform:1:2", 3).unwrap();
        let vals: Vec<f64> = d.diag.iter().map(|z| z.re).collect();
        assert_eq!(vals, vec![1.0, 1.5, 2.0]);
    }

    #[test]
    fn d_spec_explicit_list_length_checked() {
        let err = parse_d_spec("diag:1,2+1i", 3).unwrap_err();
        assert_eq!(err.to_string(), "expected 3 entries, got 2");
        let ok = parse_d_spec("diag:1,2+1i", 2).unwrap();
        assert_eq!(ok.diag[1], Complex64::new(2.0, 1.0));
    }

    #[test]
    fn d_spec_unknown_form_reports_position() {
        let err = parse_d_spec("bogus", 2).unwrap_err().to_string();
        assert!(err.contains("position 0"), "{err}");
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("2").unwrap(), Complex64::new(2.0, 0.0));
        assert_eq!(parse_complex("2+1i").unwrap(), Complex64::new(2.0, 1.0));
        assert_eq!(
            parse_complex("-1.5-0.25i").unwrap(),
            Complex64::new(-1.5, -0.25)
        );
        assert_eq!(parse_complex("0+1i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(
            parse_complex("1e-3+2e-4i").unwrap(),
            Complex64::new(1e-3, 2e-4)
        );
        assert!(parse_complex("i").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn t_grid_log_inclusive() {
        let g = parse_t_grid("log:1e-6:1e-1:25").unwrap();
        assert_eq!(g.len(), 25);
        assert!((g[0] - 1e-6).abs() < 1e-18);
        assert!((g[24] - 1e-1).abs() < 1e-12);
        for w in g.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn t_grid_list_and_errors() {
        assert_eq!(parse_t_grid("list:0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_t_grid("list:0.2,0.1").is_err());
        assert!(parse_t_grid("log:0:1:5").is_err());
        assert!(parse_t_grid("linear:1:2").is_err());
    }

    #[test]
    fn hash_semantics() {
        let base = ExperimentConfig {
            experiment: Experiment::Tail {
                n: 8,
                d_spec: "uniform:1:2".into(),
                ensemble: Ensemble::Unitary,
                t_grid_spec: "log:1e-6:1e-1:25".into(),
                trials: 1000,
            },
            seed: 42,
            threads: 1,
            out_path: "/tmp/a.csv".into(),
        };
        let h1 = base.config_hash();

        // Execution details do not change the hash.
        let mut threads8 = base.clone();
        threads8.threads = 8;
        threads8.out_path = "/tmp/b.csv".into();
        assert_eq!(h1, threads8.config_hash());

        // Every semantic field does.
        let mut seed = base.clone();
        seed.seed = 43;
        assert_ne!(h1, seed.config_hash());
        let mut trials = base.clone();
        if let Experiment::Tail { trials: t, .. } = &mut trials.experiment {
            *t = 1001;
        }
        assert_ne!(h1, trials.config_hash());
        let mut ens = base.clone();
        if let Experiment::Tail { ensemble, .. } = &mut ens.experiment {
            *ensemble = Ensemble::Orthogonal;
        }
        assert_ne!(h1, ens.config_hash());
    }

    #[test]
    fn config_file_parsing() {
        let dir = std::env::temp_dir().join("rmtlab-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(
            &path,
            "n = 8\nd=uniform:1:2 # inline comment\n\n# full comment\ntrials=100\n",
        )
        .unwrap();
        let map = load_config_file(&path).unwrap();
        assert_eq!(map.get("n").map(String::as_str), Some("8"));
        assert_eq!(map.get("d").map(String::as_str), Some("uniform:1:2"));
        assert_eq!(map.get("trials").map(String::as_str), Some("100"));
        std::fs::write(&path, "broken line\n").unwrap();
        assert!(load_config_file(&path).is_err());
    }
}
