use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::dense::DenseNet;
use super::NnError;

pub const CHECKPOINT_FORMAT: u32 = 1;

/// Named networks and optimizer states plus free-form metadata, stored as
/// pretty-printed JSON. Floats are written in shortest round-trip form, so
/// load → save reproduces the file byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: u32,
    /// Learner that produced the checkpoint (`dral`, `dqn`, ...).
    pub method: String,
    pub rng_seed: u64,
    pub nets: BTreeMap<String, DenseNet>,
    pub optimizers: BTreeMap<String, Adam>,
    /// Learner configuration and other method-specific state.
    pub meta: serde_json::Value,
}

impl Checkpoint {
    pub fn new(method: &str, rng_seed: u64) -> Self {
        Self {
            format: CHECKPOINT_FORMAT,
            method: method.to_string(),
            rng_seed,
            nets: BTreeMap::new(),
            optimizers: BTreeMap::new(),
            meta: serde_json::Value::Null,
        }
    }

    pub fn net(&self, name: &str) -> Result<&DenseNet, NnError> {
        self.nets.get(name).ok_or_else(|| NnError::Checkpoint(format!("checkpoint has no network `{name}`")))
    }

    pub fn to_text(&self) -> Result<String, NnError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| NnError::Checkpoint(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_text(text: &str) -> Result<Self, NnError> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| NnError::Checkpoint(e.to_string()))?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(NnError::Checkpoint(format!("unsupported checkpoint format {}", ck.format)));
        }
        for (name, net) in &ck.nets {
            if let Some(i) = net.first_non_finite() {
                return Err(NnError::Checkpoint(format!("network `{name}` has a non-finite parameter at {i}")));
            }
        }
        Ok(ck)
    }

    /// Writes to a temporary file next to `path`, then renames it into place.
    pub fn save(&self, path: &Path) -> Result<(), NnError> {
        write_atomic(path, self.to_text()?.as_bytes()).map_err(|e| NnError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, NnError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| NnError::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }
}

/// Atomic file replacement: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn byte_stable_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let net = DenseNet::new(&[5, 7, 3], &mut rng).unwrap();
        let mut opt = Adam::new(net.n_params(), 1e-3);
        let mut p = net.params().to_vec();
        let g = vec![0.1; p.len()];
        opt.step(&mut p, &g).unwrap();
        let mut ck = Checkpoint::new("dral", 42);
        ck.nets.insert("actor".into(), DenseNet::from_params(&[5, 7, 3], p).unwrap());
        ck.optimizers.insert("actor".into(), opt);
        ck.meta = serde_json::json!({"note": 1.0e-300, "third": 1.0 / 3.0});
        let text = ck.to_text().unwrap();
        let back = Checkpoint::from_text(&text).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_text().unwrap(), text);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("ck.json");
        ck.save(&path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
        assert_eq!(Checkpoint::load(&path).unwrap(), ck);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Checkpoint::from_text("{").is_err());
        assert!(Checkpoint::load(Path::new("/nonexistent/ck.json")).is_err());
    }
}
