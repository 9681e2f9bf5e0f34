//! Body files, run manifests and the support-function CSV format.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::bodies::{BodySpec, ProjectionSplit, SampleMeta, SampledSupport};
use crate::error::{FiberError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyFile {
    body: BodySpec,
    #[serde(default)]
    split: Option<SplitFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitFile {
    n: usize,
    m: usize,
    #[serde(rename = "basis_V", default)]
    basis_v: Option<Vec<Vec<f64>>>,
    #[serde(rename = "basis_W", default)]
    basis_w: Option<Vec<Vec<f64>>>,
}

/// Parse and validate a body file.
///
/// Schema: `{"body": {"type": ..., ...}, "split": {"n", "m", "basis_V"?, "basis_W"?}}`.
/// Without `split` the coordinate split `n = 1`, `m = d - 1` is used; without
/// bases the split is the coordinate one for the given `n`, `m`.
pub fn parse_body_spec(text: &str) -> Result<(BodySpec, ProjectionSplit)> {
    let file: BodyFile = serde_json::from_str(text).map_err(|e| FiberError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let body = file.body;
    body.validate()?;
    let d = body.dim();
    let split = match file.split {
        None => {
            if d < 2 {
                return Err(FiberError::Validation(format!(
                    "a {d}-dimensional body has no default split"
                )));
            }
            ProjectionSplit::coordinate(1, d - 1)?
        }
        Some(SplitFile {
            n,
            m,
            basis_v,
            basis_w,
        }) => {
            let split = match (basis_v, basis_w) {
                (None, None) => ProjectionSplit::coordinate(n, m)?,
                (Some(v), Some(w)) => ProjectionSplit::from_bases(v, w)?,
                _ => {
                    return Err(FiberError::Validation(
                        "basis_V and basis_W must be given together".into(),
                    ))
                }
            };
            if split.n() != n || split.m() != m {
                return Err(FiberError::Validation(format!(
                    "split declares n = {n}, m = {m} but the bases have {} and {} vectors",
                    split.n(),
                    split.m()
                )));
            }
            split
        }
    };
    if split.ambient_dim() != d {
        return Err(FiberError::Validation(format!(
            "split has n + m = {} but the body lives in R^{d}",
            split.ambient_dim()
        )));
    }
    Ok((body, split))
}

/// Provenance block written as `# key: value` lines at the top of every output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub body_sha256: Option<String>,
    pub split: Option<ProjectionSplit>,
    pub method: Option<String>,
    pub nodes: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_s: Option<f64>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            version: TOOL_VERSION.into(),
            ..Self::default()
        }
    }

    pub fn with_meta(mut self, meta: &SampleMeta) -> Self {
        self.method = Some(meta.method.clone());
        self.nodes = meta.nodes;
        self.samples = meta.samples;
        self.seed = meta.seed;
        self
    }

    /// The header lines, each starting with `prefix` (e.g. `"# "`).
    pub fn lines(&self, prefix: &str) -> Vec<String> {
        let mut out = vec![format!("{prefix}command: {}", self.command)];
        if let Some(h) = &self.body_sha256 {
            out.push(format!("{prefix}body_sha256: {h}"));
        }
        if let Some(s) = &self.split {
            let json = serde_json::to_string(s).expect("split serializes");
            out.push(format!("{prefix}split: {json}"));
        }
        if let Some(m) = &self.method {
            out.push(format!("{prefix}method: {m}"));
        }
        if let Some(n) = self.nodes {
            out.push(format!("{prefix}nodes: {n}"));
        }
        if let Some(n) = self.samples {
            out.push(format!("{prefix}samples: {n}"));
        }
        if let Some(s) = self.seed {
            out.push(format!("{prefix}seed: {s}"));
        }
        out.push(format!("{prefix}version: {}", self.version));
        if let Some(t) = self.wall_time_s {
            out.push(format!("{prefix}wall_time_s: {t}"));
        }
        for n in &self.notes {
            out.push(format!("{prefix}note: {n}"));
        }
        out
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let bad = |what: &str| FiberError::Parse {
            line,
            column: 1,
            message: format!("bad manifest {what}: {value}"),
        };
        match key {
            "command" => self.command = value.into(),
            "body_sha256" => self.body_sha256 = Some(value.into()),
            "split" => self.split = Some(serde_json::from_str(value).map_err(|_| bad("split"))?),
            "method" => self.method = Some(value.into()),
            "nodes" => self.nodes = Some(value.parse().map_err(|_| bad("nodes"))?),
            "samples" => self.samples = Some(value.parse().map_err(|_| bad("samples"))?),
            "seed" => self.seed = Some(value.parse().map_err(|_| bad("seed"))?),
            "version" => self.version = value.into(),
            "wall_time_s" => self.wall_time_s = Some(value.parse().map_err(|_| bad("wall time"))?),
            "note" => self.notes.push(value.into()),
            _ => return Err(bad("key")),
        }
        Ok(())
    }
}

/// CSV with manifest header, column header `u_1,…,u_m,h,stderr` and one row per
/// direction. Numbers use the shortest representation that parses back to the
/// same `f64`; `stderr` is empty for deterministic routes.
pub fn write_support_csv(manifest: &RunManifest, s: &SampledSupport) -> String {
    let mut out = String::new();
    for l in manifest.lines("# ") {
        out.push_str(&l);
        out.push('\n');
    }
    let cols: Vec<String> = (1..=s.dim).map(|i| format!("u_{i}")).collect();
    let _ = writeln!(out, "{},h,stderr", cols.join(","));
    for (k, (d, h)) in s.directions.iter().zip(&s.values).enumerate() {
        for c in d {
            let _ = write!(out, "{c},");
        }
        let _ = write!(out, "{h},");
        if let Some(se) = &s.stderr {
            let _ = write!(out, "{}", se[k]);
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`write_support_csv`].
pub fn read_support_csv(text: &str) -> Result<(RunManifest, SampledSupport)> {
    let mut manifest = RunManifest::default();
    let mut header: Option<usize> = None;
    let mut directions = Vec::new();
    let mut values = Vec::new();
    let mut errs: Vec<Option<f64>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if let Some(rest) = raw.strip_prefix('#') {
            let rest = rest.trim_start();
            let (k, v) = rest.split_once(": ").ok_or(FiberError::Parse {
                line,
                column: 1,
                message: "manifest line without `key: value`".into(),
            })?;
            manifest.set(k, v, line)?;
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        let Some(m) = header else {
            let m = fields.len().saturating_sub(2);
            let ok = m >= 1
                && fields[m] == "h"
                && fields[m + 1] == "stderr"
                && fields[..m]
                    .iter()
                    .enumerate()
                    .all(|(j, f)| *f == format!("u_{}", j + 1));
            if !ok {
                return Err(FiberError::Parse {
                    line,
                    column: 1,
                    message: format!("expected header u_1,…,u_m,h,stderr, got `{raw}`"),
                });
            }
            header = Some(m);
            continue;
        };
        if fields.len() != m + 2 {
            return Err(FiberError::Parse {
                line,
                column: 1,
                message: format!("expected {} fields, got {}", m + 2, fields.len()),
            });
        }
        let num = |j: usize| -> Result<f64> {
            fields[j].parse().map_err(|_| FiberError::Parse {
                line,
                column: fields[..j].iter().map(|f| f.len() + 1).sum::<usize>() + 1,
                message: format!("not a number: `{}`", fields[j]),
            })
        };
        directions.push((0..m).map(num).collect::<Result<Vec<_>>>()?);
        values.push(num(m)?);
        errs.push(if fields[m + 1].is_empty() {
            None
        } else {
            Some(num(m + 1)?)
        });
    }
    let dim = header.ok_or(FiberError::Parse {
        line: text.lines().count() + 1,
        column: 1,
        message: "missing column header".into(),
    })?;
    let stderr = if !errs.is_empty() && errs.iter().all(Option::is_some) {
        Some(errs.into_iter().flatten().collect())
    } else if errs.iter().all(Option::is_none) {
        None
    } else {
        return Err(FiberError::Input(
            "stderr column is only partly filled".into(),
        ));
    };
    let meta = SampleMeta {
        method: manifest.method.clone().unwrap_or_default(),
        nodes: manifest.nodes,
        samples: manifest.samples,
        seed: manifest.seed,
    };
    Ok((
        manifest,
        SampledSupport {
            dim,
            directions,
            values,
            stderr,
            meta,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptope_with_split() {
        let (b, s) =
            parse_body_spec(r#"{"body":{"type":"elliptope"},"split":{"n":1,"m":2}}"#).unwrap();
        assert_eq!(b, BodySpec::Elliptope {});
        assert_eq!(s, ProjectionSplit::coordinate(1, 2).unwrap());
    }

    #[test]
    fn dice_with_default_split() {
        let (b, s) =
            parse_body_spec(r#"{"body":{"type":"discotope","axes":[[1,0,0],[0,1,0],[0,0,1]]}}"#)
                .unwrap();
        assert_eq!(b, BodySpec::dice());
        assert_eq!((s.n(), s.m()), (1, 2));
    }

    #[test]
    fn parallel_axes_rejected() {
        let r = parse_body_spec(r#"{"body":{"type":"discotope","axes":[[1,0,0],[2,0,0]]}}"#);
        assert!(matches!(r, Err(FiberError::Validation(_))), "{r:?}");
    }

    #[test]
    fn unknown_fields_rejected_with_position() {
        let text = "{\n  \"body\": {\"type\": \"elliptope\", \"radius\": 2}\n}";
        match parse_body_spec(text) {
            Err(FiberError::Parse { line, message, .. }) => {
                // tagged bodies are buffered, so the position is the end of the object
                assert!(line >= 2);
                assert!(message.contains("radius"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let r = parse_body_spec(r#"{"body":{"type":"elliptope"},"extra":1}"#);
        assert!(matches!(r, Err(FiberError::Parse { .. })));
        let r = parse_body_spec(r#"{"body":{"type":"elliptope"},"split":{"n":1,"m":2,"k":0}}"#);
        assert!(matches!(r, Err(FiberError::Parse { .. })));
    }

    #[test]
    fn puffed_and_nested_bodies() {
        let text = r#"{"body":{"type":"puffed","order":1,"facets":[
            {"normal":[1,0],"offset":1},{"normal":[-1,0],"offset":1},
            {"normal":[0,1],"offset":1},{"normal":[0,-1],"offset":1}]}}"#;
        let (b, s) = parse_body_spec(text).unwrap();
        assert_eq!(
            b,
            BodySpec::Puffed(crate::puffed::FacetSystem::square(1.0, 1))
        );
        assert_eq!((s.n(), s.m()), (1, 1));
        let bad = text.replace("\"order\":1,", "\"order\":1,\"x\":0,");
        assert!(matches!(
            parse_body_spec(&bad),
            Err(FiberError::Parse { .. })
        ));
        let text = r#"{"body":{"type":"scaled","lambda":2,"inner":{"type":"ball","radius":1}},
            "split":{"n":2,"m":1}}"#;
        let (_, s) = parse_body_spec(text).unwrap();
        assert_eq!((s.n(), s.m()), (2, 1));
    }

    #[test]
    fn split_mismatch_and_bases() {
        let r = parse_body_spec(r#"{"body":{"type":"elliptope"},"split":{"n":1,"m":1}}"#);
        assert!(matches!(r, Err(FiberError::Validation(_))));
        let r = parse_body_spec(
            r#"{"body":{"type":"elliptope"},"split":{"n":1,"m":2,
               "basis_V":[[0,0,1]],"basis_W":[[1,0,0],[0,1,0]]}}"#,
        )
        .unwrap();
        assert_eq!(r.1.basis_v(), &[vec![0.0, 0.0, 1.0]]);
        let r = parse_body_spec(
            r#"{"body":{"type":"elliptope"},"split":{"n":1,"m":2,"basis_V":[[0,0,1]]}}"#,
        );
        assert!(matches!(r, Err(FiberError::Validation(_))));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let s = SampledSupport {
            dim: 2,
            directions: vec![
                vec![1.0, 0.0],
                vec![0.1 + 0.2, -(0.91f64).sqrt()],
                vec![-0.0, -1.0],
            ],
            values: vec![1.0 / 3.0, 7.570796326794897, 1e-300],
            stderr: Some(vec![0.0, 1.2345e-3, f64::MIN_POSITIVE]),
            meta: SampleMeta {
                method: "zonoid-mc".into(),
                nodes: None,
                samples: Some(1000),
                seed: Some(9),
            },
        };
        let mut m = RunManifest::new("fiber").with_meta(&s.meta);
        m.body_sha256 = Some("ab12".into());
        m.split = Some(ProjectionSplit::coordinate(1, 2).unwrap());
        m.notes.push("two words".into());
        let text = write_support_csv(&m, &s);
        let (m2, s2) = read_support_csv(&text).unwrap();
        assert_eq!(m2, m);
        assert_eq!(s2, s);
        for (a, b) in s
            .directions
            .iter()
            .flatten()
            .zip(s2.directions.iter().flatten())
        {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(text.contains("\nu_1,u_2,h,stderr\n"));
    }

    #[test]
    fn csv_without_stderr() {
        let s = SampledSupport {
            dim: 1,
            directions: vec![vec![1.0], vec![-1.0]],
            values: vec![2.0, 2.0],
            stderr: None,
            meta: SampleMeta {
                method: "slicer".into(),
                nodes: Some(64),
                ..SampleMeta::default()
            },
        };
        let text = write_support_csv(&RunManifest::new("fiber").with_meta(&s.meta), &s);
        assert!(text.contains("\n1,2,\n"));
        assert_eq!(read_support_csv(&text).unwrap().1, s);
    }

    #[test]
    fn csv_errors_carry_lines() {
        let r = read_support_csv("# command: x\nu_1,h,stderr\n1,zz,\n");
        assert!(
            matches!(
                r,
                Err(FiberError::Parse {
                    line: 3,
                    column: 3,
                    ..
                })
            ),
            "{r:?}"
        );
        assert!(matches!(
            read_support_csv("a,b\n"),
            Err(FiberError::Parse { line: 1, .. })
        ));
    }
}
