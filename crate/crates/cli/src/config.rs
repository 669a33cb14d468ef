use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::Failure;

/// Keys of a `--config` file not yet consumed.
pub struct ConfigFile {
    keys: Map<String, Value>,
}

pub fn load(path: Option<&Path>) -> Result<ConfigFile, Failure> {
    let Some(path) = path else {
        return Ok(ConfigFile { keys: Map::new() });
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(keys)) => Ok(ConfigFile { keys }),
        Ok(_) => Err(Failure::Usage("config must be a JSON object".into())),
        Err(e) => Err(Failure::Usage(format!("config {}: {e}", path.display()))),
    }
}

impl ConfigFile {
    pub fn take_global<T: DeserializeOwned>(&mut self, key: &str) -> Result<Option<T>, Failure> {
        match self.keys.remove(key) {
            None => Ok(None),
            Some(v) => {
                serde_json::from_value(v).map(Some).map_err(|e| Failure::Usage(format!("config key {key:?}: {e}")))
            }
        }
    }

    /// Overlays the remaining keys on the flag values. Nested objects merge
    /// key by key; anything the target type does not know is an error.
    pub fn apply<T: Serialize + DeserializeOwned>(&self, flags: T) -> Result<T, Failure> {
        if self.keys.is_empty() {
            return Ok(flags);
        }
        let mut merged = serde_json::to_value(flags).map_err(|e| Failure::Usage(e.to_string()))?;
        merge(&mut merged, &Value::Object(self.keys.clone()));
        serde_json::from_value(merged).map_err(|e| Failure::Usage(format!("config: {e}")))
    }
}

fn merge(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

/// Parses `a..b` (inclusive integers), `start:stop:step`, or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("cannot parse grid {s:?}; use 1..8, 20:40:5 or 1,2,4"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let grid = if let Some((a, b)) = s.split_once("..") {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        (a..=b).map(|k| k as f64).collect()
    } else if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| start + k as f64 * step).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if grid.is_empty() {
        return Err(Failure::Usage(format!("grid {s:?} is empty")));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1..8").unwrap().len(), 8);
        assert_eq!(parse_grid("20:40:5").unwrap(), vec![20.0, 25.0, 30.0, 35.0, 40.0]);
        assert_eq!(parse_grid("1, 2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert!(parse_grid("3..1").is_err());
        assert!(parse_grid("x").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn nested_merge_keeps_siblings() {
        let mut a = serde_json::json!({"w": {"n": 4, "bw": 1.0}, "k": 1});
        merge(&mut a, &serde_json::json!({"w": {"n": 8}}));
        assert_eq!(a, serde_json::json!({"w": {"n": 8, "bw": 1.0}, "k": 1}));
    }
}
