use std::fs;
use std::io::Read;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use textcpd::eval::{diarization_to_cpd, prf, ConfusionMatrix, DiarizationErrors, Prf};
use textcpd::{Error, Result};

use crate::config::{resolve_seed, run_config_path, set, write_run_config};
use crate::Global;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSON array of per-utterance speaker-id arrays; `-` reads stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output JSON; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DiarRun {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct DiarReport {
    #[serde(flatten)]
    pub errors: DiarizationErrors,
    pub confusion: ConfusionMatrix,
    /// Boundaries as the positive class.
    pub change: Prf,
}

pub fn report(text: &str) -> Result<DiarReport> {
    let vectors: Vec<Vec<i64>> = serde_json::from_str(text)?;
    let errors = diarization_to_cpd(&vectors)?;
    let confusion = errors.confusion();
    Ok(DiarReport {
        errors,
        confusion,
        change: prf(&confusion),
    })
}

pub fn run(args: Args, global: &Global) -> Result<()> {
    let mut cfg: DiarRun = global.config.section("diar-eval")?;
    set(&mut cfg.input, args.input.map(Some));
    set(&mut cfg.out, args.out.map(Some));
    let seed = resolve_seed(global.seed, &global.config, 0)?;
    let input = cfg.input.clone().ok_or_else(|| Error::Config("diar-eval needs --input".into()))?;
    let text = if input.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(&input).map_err(|e| Error::File {
            path: input.clone(),
            source: e,
        })?
    };
    let r = report(&text)?;
    let json = serde_json::to_string_pretty(&r)? + "\n";
    match &cfg.out {
        Some(out) => {
            fs::write(out, &json).map_err(|e| Error::File {
                path: out.clone(),
                source: e,
            })?;
            write_run_config("diar-eval", seed, &cfg, &run_config_path(out, false))?;
            global.say(format!("type1 {} type2 {}", r.errors.type1, r.errors.type2));
        }
        None => print!("{json}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let r = report("[[1,1,2],[2,2]]").unwrap();
        assert_eq!((r.errors.type1, r.errors.type2), (1, 1));
        let r = report("[[1]]").unwrap();
        assert_eq!(r.errors, DiarizationErrors::default());
    }

    #[test]
    fn bad_inputs() {
        assert!(report("[]").is_err());
        assert!(matches!(report("[[1,"), Err(Error::Json(_))));
    }
}
