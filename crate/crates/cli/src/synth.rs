//! `--synth` specifications: `ground:n=8,p=12,k=2,sigma=0,m=500[,law=ones]`
//! or `sphere:n=8,m=500`.

use std::str::FromStr;

use dlbounds::dictionary::random_sphere_dictionary;
use dlbounds::learn::{CoeffLaw, SignalSource, SourceKind};
use dlbounds::rng::{substream, substream_seed};
use dlbounds::{Error, Result};

/// Substream of the master seed holding the ground-truth dictionary.
const GROUND_STREAM: u64 = u64::MAX;
/// Substream of the master seed holding the sample stream of `learn`.
const SAMPLE_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, PartialEq)]
pub enum SynthSpec {
    Ground { n: usize, p: usize, k: usize, sigma: f64, law: CoeffLaw, m: Option<usize> },
    Sphere { n: usize, m: Option<usize> },
}

impl SynthSpec {
    pub fn m(&self) -> Option<usize> {
        match self {
            SynthSpec::Ground { m, .. } | SynthSpec::Sphere { m, .. } => *m,
        }
    }

    /// Source whose ground dictionary and sample stream derive from `seed`.
    pub fn source(&self, seed: u64) -> Result<SignalSource> {
        let kind = match *self {
            SynthSpec::Ground { n, p, k, sigma, law, .. } => {
                let dictionary = random_sphere_dictionary(n, p, &mut substream(seed, GROUND_STREAM))?;
                SourceKind::GroundTruth { dictionary, k_true: k, sigma, law }
            }
            SynthSpec::Sphere { n, .. } => SourceKind::UniformSphere { n },
        };
        Ok(SignalSource { kind, seed: substream_seed(seed, SAMPLE_STREAM) })
    }
}

impl FromStr for SynthSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut n = None;
        let mut p = None;
        let mut k = None;
        let mut m = None;
        let mut sigma = 0.0;
        let mut law = CoeffLaw::Uniform;
        for item in rest.split(',').filter(|i| !i.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("synth item `{item}` is not key=value")))?;
            let int = || value.parse::<usize>().map_err(|e| Error::Parse(format!("{key}={value}: {e}")));
            match key {
                "n" => n = Some(int()?),
                "p" => p = Some(int()?),
                "k" => k = Some(int()?),
                "m" => m = Some(int()?),
                "sigma" => sigma = value.parse().map_err(|e| Error::Parse(format!("sigma={value}: {e}")))?,
                "law" => {
                    law = match value {
                        "uniform" => CoeffLaw::Uniform,
                        "ones" => CoeffLaw::Ones,
                        _ => return Err(Error::Parse(format!("unknown coefficient law `{value}`"))),
                    }
                }
                _ => return Err(Error::Parse(format!("unknown synth key `{key}`"))),
            }
        }
        let need = |v: Option<usize>, name: &str| v.ok_or_else(|| Error::Parse(format!("synth spec needs {name}=")));
        match kind {
            "ground" => Ok(SynthSpec::Ground { n: need(n, "n")?, p: need(p, "p")?, k: need(k, "k")?, sigma, law, m }),
            "sphere" => Ok(SynthSpec::Sphere { n: need(n, "n")?, m }),
            other => Err(Error::Parse(format!("unknown synth kind `{other}` (expected ground or sphere)"))),
        }
    }
}
