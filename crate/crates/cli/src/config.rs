//! `key = value` configuration files. Blank lines and lines starting with
//! `#` are ignored; keys may use `-` or `_`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

pub const KEYS: &[&str] = &[
    "v_a", "v_b", "rd", "t1", "t2", "eta", "eta2", "phi", "seed", "format", "flavor",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
            let key = key.trim().replace('-', "_").to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", i + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys() {
        let cfg = ConfigFile::parse("# gains\nv-a = 3\nV_B=4.5\n\nflavor = sum\n").unwrap();
        assert_eq!(cfg.get::<f64>("v_a").unwrap(), Some(3.0));
        assert_eq!(cfg.get::<f64>("v_b").unwrap(), Some(4.5));
        assert_eq!(cfg.get::<String>("flavor").unwrap().as_deref(), Some("sum"));
        assert_eq!(cfg.get::<f64>("phi").unwrap(), None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(ConfigFile::parse("gain 3"), Err(CliError::Usage(_))));
        assert!(matches!(ConfigFile::parse("gain = 3"), Err(CliError::Usage(_))));
        assert!(matches!(
            ConfigFile::parse("v_a = x").unwrap().get::<f64>("v_a"),
            Err(CliError::Usage(_))
        ));
    }
}
