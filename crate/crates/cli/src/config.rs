//! JSON run configuration, schedule strings and flag/file merging.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sidon_fq::prob::{thm1_alpha_min, Schedule};
use sidon_fq::{CountKind, FieldSpec};

/// Values a JSON config file may supply. Flags take precedence.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub p: Option<u64>,
    pub s: Option<u32>,
    pub schedule: Option<String>,
    pub n_index: Option<u64>,
    pub u: Option<u64>,
    pub kind: Option<CountKind>,
    pub d: Option<usize>,
    pub d_max: Option<usize>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub max_index: Option<u64>,
    pub n_min: Option<u32>,
    pub n_max: Option<u32>,
    pub epsilon: Option<f64>,
    pub format: Option<String>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

/// A failure before any computation: bad flags, bad config, bad parameters.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, UsageError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))
}

/// `flag`, else the config value, else an error naming the flag.
pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, UsageError> {
    flag.or(file)
        .ok_or_else(|| usage(format!("missing required --{name}")))
}

pub fn field(p: Option<u64>, s: Option<u32>, cfg: &FileConfig) -> Result<FieldSpec, UsageError> {
    let p = require(p, cfg.p, "p")?;
    let s = s.or(cfg.s).unwrap_or(1);
    FieldSpec::new(p, s).map_err(|e| usage(e.to_string()))
}

fn parse_f64(text: &str, what: &str) -> Result<f64, UsageError> {
    text.trim()
        .parse()
        .map_err(|_| usage(format!("bad {what} `{text}`")))
}

/// Parses a schedule string:
///
/// * `constant:V`
/// * `thick:EPS`
/// * `thm01` (the square-root-log schedule at the minimal admissible alpha)
/// * `sqrt_log:ALPHA`
/// * `power_log:ALPHA,C,C_PRIME,J0,PREFIX`
pub fn parse_schedule(text: &str, spec: &FieldSpec) -> Result<Schedule, UsageError> {
    let (kind, args) = text.split_once(':').unwrap_or((text, ""));
    let sched = match kind {
        "constant" => Schedule::constant(parse_f64(args, "constant value")?),
        "thick" => Schedule::thick(parse_f64(args, "epsilon")?),
        "thm01" if args.is_empty() => Schedule::sqrt_log(thm1_alpha_min(spec)),
        "sqrt_log" => Schedule::sqrt_log(parse_f64(args, "alpha")?),
        "power_log" => {
            let parts: Vec<&str> = args.split(',').collect();
            let [alpha, c, cp, j0, prefix] = parts[..] else {
                return Err(usage("power_log needs ALPHA,C,C_PRIME,J0,PREFIX"));
            };
            let j0 = j0
                .trim()
                .parse()
                .map_err(|_| usage(format!("bad j0 `{j0}`")))?;
            Schedule::power_log(
                parse_f64(alpha, "alpha")?,
                parse_f64(c, "c")?,
                parse_f64(cp, "c'")?,
                j0,
                parse_f64(prefix, "prefix")?,
            )
        }
        _ => return Err(usage(format!("unknown schedule `{text}`"))),
    };
    sched.map_err(|e| usage(e.to_string()))
}

pub fn schedule(
    flag: Option<String>,
    cfg: &FileConfig,
    spec: &FieldSpec,
) -> Result<(String, Schedule), UsageError> {
    let text = require(flag, cfg.schedule.clone(), "schedule")?;
    let sched = parse_schedule(&text, spec)?;
    Ok((text, sched))
}

/// Thread cap from `SIDON_FQ_THREADS`.
pub fn thread_cap() -> Result<Option<usize>, UsageError> {
    match std::env::var("SIDON_FQ_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!(
                "SIDON_FQ_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sidon_fq::make_field;

    #[test]
    fn schedule_strings() {
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(
            parse_schedule("constant:0.5", &f3).unwrap(),
            Schedule::constant(0.5).unwrap()
        );
        assert_eq!(
            parse_schedule("thick:2", &f3).unwrap(),
            Schedule::thick(2.0).unwrap()
        );
        assert_eq!(
            parse_schedule("thm01", &f3).unwrap(),
            Schedule::sqrt_log(thm1_alpha_min(&f3)).unwrap()
        );
        assert!(parse_schedule("power_log:1.2,0.5,0.5,3,0.4", &f3).is_ok());
        for bad in [
            "constant:1.5",
            "constant:x",
            "power_log:1,2",
            "gauss:1",
            "thm01:3",
        ] {
            assert!(parse_schedule(bad, &f3).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"p": 3, "colour": 1}"#).is_err());
        let cfg: FileConfig = serde_json::from_str(r#"{"p": 3, "kind": "diff"}"#).unwrap();
        assert_eq!(cfg.kind, Some(CountKind::Diff));
    }

    #[test]
    fn flags_override_file() {
        let cfg = FileConfig {
            p: Some(3),
            ..FileConfig::default()
        };
        assert_eq!(require(Some(5), cfg.p, "p").unwrap(), 5);
        assert_eq!(require(None, cfg.p, "p").unwrap(), 3);
        assert!(require::<u64>(None, None, "p").is_err());
        assert_eq!(field(None, None, &cfg).unwrap().q(), 3);
    }
}
