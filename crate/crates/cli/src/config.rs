//! Flat `key = value` config files.
//!
//! ```text
//! # one month in 5 minute slots
//! preset = paper-month-5min
//! origin = 1700000000
//! capacity = 1000
//! ```

use std::collections::HashMap;
use std::path::Path;

use advseg_core::{Bandwidth, Preset, TreeConfig};

use crate::error::{CliError, CliResult};

const KEYS: [&str; 5] = ["granularity_g", "divisors", "origin", "capacity", "preset"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigFile {
    pub granularity_g: Option<u64>,
    pub divisors: Option<Vec<u32>>,
    pub origin: i64,
    pub capacity: Option<Bandwidth>,
    pub preset: Option<Preset>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<ConfigFile> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ConfigFile::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> CliResult<ConfigFile> {
        let parse_err = |line: usize, message: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut seen: HashMap<&str, usize> = HashMap::new();
        let mut file = ConfigFile {
            granularity_g: None,
            divisors: None,
            origin: 0,
            capacity: None,
            preset: None,
        };

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(parse_err(line, format!("expected `key = value`, got `{content}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&key) = KEYS.iter().find(|k| **k == key) else {
                return Err(parse_err(line, format!("unknown key `{key}`")));
            };
            if let Some(first) = seen.insert(key, line) {
                return Err(parse_err(
                    line,
                    format!("duplicate key `{key}` (first set on line {first})"),
                ));
            }
            let int_err = |v: &str| parse_err(line, format!("invalid integer `{v}` for `{key}`"));
            match key {
                "granularity_g" => file.granularity_g = Some(value.parse().map_err(|_| int_err(value))?),
                "origin" => file.origin = value.parse().map_err(|_| int_err(value))?,
                "capacity" => file.capacity = Some(value.parse().map_err(|_| int_err(value))?),
                "preset" => {
                    let preset =
                        Preset::from_name(value).ok_or_else(|| parse_err(line, format!("unknown preset `{value}`")))?;
                    file.preset = Some(preset);
                }
                _ => {
                    let list = value.trim_start_matches('[').trim_end_matches(']');
                    let divisors = list
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|t| !t.is_empty())
                        .map(|t| t.parse::<u32>().map_err(|_| int_err(t)))
                        .collect::<CliResult<Vec<u32>>>()?;
                    file.divisors = Some(divisors);
                }
            }
        }

        let config_err = |message: &str| CliError::Config {
            path: path.to_path_buf(),
            message: message.to_string(),
        };
        match (&file.divisors, &file.preset) {
            (Some(_), Some(_)) => return Err(config_err("set either `divisors` or `preset`, not both")),
            (None, None) => return Err(config_err("one of `divisors` or `preset` is required")),
            (Some(_), None) if file.granularity_g.is_none() => {
                return Err(config_err("`granularity_g` is required with `divisors`"))
            }
            _ => {}
        }
        Ok(file)
    }

    pub fn tree_config(&self) -> CliResult<TreeConfig> {
        let (divisors, granularity) = match self.preset {
            Some(p) => (p.divisors(), self.granularity_g.unwrap_or(p.default_granularity())),
            None => (
                self.divisors.clone().unwrap_or_default(),
                self.granularity_g.unwrap_or(0),
            ),
        };
        let config = TreeConfig::new(granularity, divisors, self.origin)?;
        if let Some(c) = self.capacity {
            if c < 0 {
                return Err(advseg_core::Error::NegativeCapacity(c).into());
            }
        }
        Ok(config)
    }
}

/// Loads and resolves a config file.
pub fn load(path: &Path) -> CliResult<(ConfigFile, TreeConfig)> {
    let file = ConfigFile::load(path)?;
    let config = file.tree_config()?;
    Ok((file, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<ConfigFile> {
        ConfigFile::parse(text, Path::new("test.cfg"))
    }

    #[test]
    fn divisors_form() {
        let f = parse("granularity_g = 60\ndivisors = 2, 3,2\norigin=-5 # trailing\n").unwrap();
        assert_eq!(f.divisors, Some(vec![2, 3, 2]));
        assert_eq!(f.origin, -5);
        let cfg = f.tree_config().unwrap();
        assert_eq!(cfg.leaves(), 12);
        assert_eq!(cfg.span(), 720);
    }

    #[test]
    fn bracketed_and_empty_lists() {
        assert_eq!(
            parse("granularity_g=1\ndivisors=[2 2]").unwrap().divisors,
            Some(vec![2, 2])
        );
        let f = parse("granularity_g=1\ndivisors=[]").unwrap();
        assert_eq!(f.tree_config().unwrap().leaves(), 1);
    }

    #[test]
    fn preset_defaults_granularity() {
        let cfg = parse("preset = paper-month-5min\n").unwrap().tree_config().unwrap();
        assert_eq!(cfg.leaves(), 9216);
        assert_eq!(cfg.granularity(), 300);
        let cfg = parse("preset = binary-1024\ngranularity_g = 7")
            .unwrap()
            .tree_config()
            .unwrap();
        assert_eq!(cfg.leaves(), 1024);
        assert_eq!(cfg.granularity(), 7);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let cases = [
            ("granularity_g = 1\n\nbogus = 3", 3),
            ("granularity_g = x", 1),
            ("divisors = 2,a", 1),
            ("preset = nope", 1),
            ("granularity_g = 1\ngranularity_g = 2", 2),
            ("just text", 1),
        ];
        for (text, want) in cases {
            match parse(text) {
                Err(CliError::Parse { line, .. }) => assert_eq!(line, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn exactly_one_tree_shape() {
        assert!(matches!(
            parse("granularity_g=1\ndivisors=2\npreset=binary-1024"),
            Err(CliError::Config { .. })
        ));
        assert!(matches!(parse("granularity_g=1"), Err(CliError::Config { .. })));
        assert!(matches!(parse("divisors=2"), Err(CliError::Config { .. })));
    }

    #[test]
    fn invalid_values_are_range_errors() {
        let e = parse("granularity_g=1\ndivisors=1").unwrap().tree_config().unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let e = parse("granularity_g=0\ndivisors=2").unwrap().tree_config().unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let e = parse("preset=binary-1024\ncapacity=-1")
            .unwrap()
            .tree_config()
            .unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }
}
