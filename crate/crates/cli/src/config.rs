//! Plain-text run configuration: one `key = value` per line, `#` comments.
//!
//! Keys are the long flag names without dashes (`geo-tol` and `geo_tol` are
//! both accepted). Command-line flags override file values.

use std::path::PathBuf;
use std::str::FromStr;

use xhdg::cases::CaseId;
use xhdg::solver::SolverMethod;
use xhdg::spaces::Scheme;
use xhdg::study::RunConfig;
use xhdg::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Md,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Md),
            other => Err(Error::InvalidInput(format!("unknown format '{other}'"))),
        }
    }
}

/// Every setting, unset ones left as `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub case: Option<CaseId>,
    pub k: Option<usize>,
    pub scheme: Option<Scheme>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub meshes: Option<Vec<usize>>,
    pub solver: Option<SolverMethod>,
    pub tol: Option<f64>,
    pub geo_tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub dump_solution: Option<PathBuf>,
    pub dump_resolution: Option<usize>,
    pub format: Option<Format>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad value '{value}' for '{key}'")))
}

pub fn parse_meshes(value: &str) -> Result<Vec<usize>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse("meshes", s))
        .collect()
}

impl Settings {
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim().replace('_', "-"), value.trim());
            match key.as_str() {
                "case" => s.case = Some(value.parse()?),
                "k" => s.k = Some(parse(&key, value)?),
                "scheme" => s.scheme = Some(value.parse()?),
                "alpha1" => s.alpha1 = Some(parse(&key, value)?),
                "alpha2" => s.alpha2 = Some(parse(&key, value)?),
                "meshes" => s.meshes = Some(parse_meshes(value)?),
                "solver" => s.solver = Some(value.parse()?),
                "tol" => s.tol = Some(parse(&key, value)?),
                "geo-tol" => s.geo_tol = Some(parse(&key, value)?),
                "out" => s.out = Some(value.into()),
                "dump-solution" => s.dump_solution = Some(value.into()),
                "dump-resolution" => s.dump_resolution = Some(parse(&key, value)?),
                "format" => s.format = Some(value.parse()?),
                other => {
                    return Err(Error::InvalidInput(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(s)
    }

    /// Values set in `other` win.
    pub fn overridden_by(self, other: Settings) -> Settings {
        Settings {
            case: other.case.or(self.case),
            k: other.k.or(self.k),
            scheme: other.scheme.or(self.scheme),
            alpha1: other.alpha1.or(self.alpha1),
            alpha2: other.alpha2.or(self.alpha2),
            meshes: other.meshes.or(self.meshes),
            solver: other.solver.or(self.solver),
            tol: other.tol.or(self.tol),
            geo_tol: other.geo_tol.or(self.geo_tol),
            out: other.out.or(self.out),
            dump_solution: other.dump_solution.or(self.dump_solution),
            dump_resolution: other.dump_resolution.or(self.dump_resolution),
            format: other.format.or(self.format),
        }
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let case = self
            .case
            .ok_or_else(|| Error::InvalidInput("no case given".into()))?;
        let mut c = RunConfig::new(case);
        if let Some(a) = self.alpha1 {
            c.alpha1 = a;
        }
        if let Some(a) = self.alpha2 {
            c.alpha2 = a;
        }
        if let Some(m) = &self.meshes {
            c.meshes = m.clone();
        }
        let o = &mut c.options;
        o.k = self.k.unwrap_or(o.k);
        o.scheme = self.scheme.unwrap_or(o.scheme);
        o.solver = self.solver.unwrap_or(o.solver);
        o.tol = self.tol.unwrap_or(o.tol);
        o.geo_tol = self.geo_tol.unwrap_or(o.geo_tol);
        if self.dump_solution.is_some() {
            c.dump_resolution = Some(self.dump_resolution.unwrap_or(4));
        }
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_comments() {
        let s = Settings::from_config_str(
            "# sweep\ncase = segment\nk=2\nscheme = modified # reduced traces\n\
             meshes = 8, 16 32\ngeo_tol = 1e-9\nformat = md\n",
        )
        .unwrap();
        assert_eq!(s.case, Some(CaseId::Segment));
        assert_eq!(s.k, Some(2));
        assert_eq!(s.scheme, Some(Scheme::Modified));
        assert_eq!(s.meshes, Some(vec![8, 16, 32]));
        assert_eq!(s.geo_tol, Some(1e-9));
        assert_eq!(s.format, Some(Format::Md));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Settings::from_config_str("colour = red").is_err());
        assert!(Settings::from_config_str("k = two").is_err());
        assert!(Settings::from_config_str("just words").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = Settings::from_config_str("case = polygon\nk = 2\nalpha1 = 5").unwrap();
        let flags = Settings {
            k: Some(1),
            ..Default::default()
        };
        let c = file.overridden_by(flags).run_config().unwrap();
        assert_eq!(c.case, CaseId::Polygon);
        assert_eq!(c.options.k, 1);
        assert_eq!(c.alpha1, 5.0);
        assert_eq!(c.alpha2, 1.0);
    }

    #[test]
    fn modified_scheme_needs_straight_interface() {
        let s = Settings::from_config_str("case = circle-homog\nscheme = modified").unwrap();
        assert_eq!(s.run_config().unwrap_err().class(), "InvalidInput");
    }
}
