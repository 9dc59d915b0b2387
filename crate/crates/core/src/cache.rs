//! On-disk memo of resultants, keyed by a content hash of the inputs.
//!
//! Entries are written through a temporary file and renamed into place, so a
//! crashed run never leaves a truncated entry. An entry that fails to parse is
//! ignored and recomputed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::poly::{Poly, VarId};

/// Bumped whenever the resultant routine could produce different text.
pub const ALGORITHM_VERSION: &str = "resultant-v1";

pub const CACHE_ENV: &str = "IDEAL_ELIM_CACHE";

#[derive(Clone, Debug)]
pub struct ResultantCache {
    dir: PathBuf,
}

impl ResultantCache {
    pub fn open(dir: impl AsRef<Path>) -> std::io::Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(ResultantCache { dir: dir.as_ref().to_path_buf() })
    }

    /// Uses `IDEAL_ELIM_CACHE` when set and non-empty.
    pub fn from_env() -> Option<Self> {
        let dir = std::env::var_os(CACHE_ENV)?;
        if dir.is_empty() {
            return None;
        }
        Self::open(dir).ok()
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(f: &Poly, g: &Poly, v: VarId) -> String {
        let mut h = Sha256::new();
        h.update(ALGORITHM_VERSION.as_bytes());
        h.update(b"\n");
        h.update(f.vars().names().join(",").as_bytes());
        h.update(b"\n");
        h.update(f.vars().name(v).as_bytes());
        h.update(b"\n");
        h.update(f.to_string().as_bytes());
        h.update(b"\n");
        h.update(g.to_string().as_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.res"))
    }

    pub fn get(&self, f: &Poly, g: &Poly, v: VarId) -> Option<Poly> {
        let text = fs::read_to_string(self.path(&Self::key(f, g, v))).ok()?;
        Poly::parse(text.trim(), f.vars()).ok()
    }

    /// Best effort: a failed write only costs a recomputation later.
    pub fn put(&self, f: &Poly, g: &Poly, v: VarId, res: &Poly) {
        let target = self.path(&Self::key(f, g, v));
        let write = || -> std::io::Result<()> {
            let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
            tmp.write_all(res.to_string().as_bytes())?;
            tmp.persist(&target).map_err(|e| e.error)?;
            Ok(())
        };
        let _ = write();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::VarSet;

    #[test]
    fn round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let c = ResultantCache::open(dir.path()).unwrap();
        let vars = VarSet::aux(&["x", "y"]);
        let f = Poly::parse("x^2 + -1*y", &vars).unwrap();
        let g = Poly::parse("x + 2", &vars).unwrap();
        let x = vars.find("x").unwrap();
        assert!(c.get(&f, &g, x).is_none());
        let r = Poly::parse("4 + -1*y", &vars).unwrap();
        c.put(&f, &g, x, &r);
        assert_eq!(c.get(&f, &g, x), Some(r));
        // A different variable is a different key.
        assert!(c.get(&f, &g, vars.find("y").unwrap()).is_none());
        fs::write(c.path(&ResultantCache::key(&f, &g, x)), "x +* garbage").unwrap();
        assert!(c.get(&f, &g, x).is_none());
    }
}
