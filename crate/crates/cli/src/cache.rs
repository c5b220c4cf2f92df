//! File-backed rank cache: one JSON record per content-addressed key,
//! written via atomic rename so concurrent inserters never corrupt each
//! other, version-stamped so engine bumps invalidate old entries.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use jetbound_core::bound_engine::{CachedRank, RankCache};
use jetbound_core::ENGINE_VERSION;

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    rank: usize,
    certified: bool,
    version: String,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Content-addressed store under one directory.
#[derive(Debug, Clone)]
pub struct FileCache {
    dir: PathBuf,
}

impl FileCache {
    pub fn open(dir: &Path) -> std::io::Result<FileCache> {
        std::fs::create_dir_all(dir)?;
        Ok(FileCache { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn entry_count(&self) -> usize {
        std::fs::read_dir(&self.dir)
            .map(|rd| {
                rd.filter_map(|e| e.ok())
                    .filter(|e| e.path().extension().is_some_and(|x| x == "json"))
                    .count()
            })
            .unwrap_or(0)
    }

    pub fn clear(&self) -> std::io::Result<usize> {
        let mut removed = 0;
        for entry in std::fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|x| x == "json") {
                std::fs::remove_file(&path)?;
                removed += 1;
            }
        }
        Ok(removed)
    }
}

impl RankCache for FileCache {
    fn get(&self, key: &str) -> Option<CachedRank> {
        let path = self.path_for(key);
        let text = std::fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<Record>(&text) {
            Ok(rec) if rec.version == ENGINE_VERSION => {
                Some(CachedRank { rank: rec.rank, certified: rec.certified })
            }
            // stale or corrupt entries are evicted, never trusted
            _ => {
                let _ = std::fs::remove_file(&path);
                None
            }
        }
    }

    fn put(&self, key: &str, value: CachedRank) {
        let rec = Record {
            rank: value.rank,
            certified: value.certified,
            version: ENGINE_VERSION.to_string(),
        };
        let Ok(body) = serde_json::to_string(&rec) else {
            return;
        };
        let unique = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
        let tmp = self
            .dir
            .join(format!(".tmp-{}-{unique}-{key}", std::process::id()));
        if std::fs::write(&tmp, body).is_ok() {
            let _ = std::fs::rename(&tmp, self.path_for(key));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_eviction() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FileCache::open(dir.path()).unwrap();
        let key = "a".repeat(64);
        assert!(cache.get(&key).is_none());
        cache.put(&key, CachedRank { rank: 13, certified: true });
        assert_eq!(cache.get(&key), Some(CachedRank { rank: 13, certified: true }));
        assert_eq!(cache.entry_count(), 1);

        // version bump invalidates
        let stale = serde_json::json!({"rank": 5, "certified": false, "version": "0.0.0"});
        std::fs::write(cache.path_for("stale"), stale.to_string()).unwrap();
        assert!(cache.get("stale").is_none());
        assert!(!cache.path_for("stale").exists());

        // corrupt entries are evicted
        std::fs::write(cache.path_for("bad"), "{not json").unwrap();
        assert!(cache.get("bad").is_none());
        assert!(!cache.path_for("bad").exists());

        assert_eq!(cache.clear().unwrap(), 1);
        assert_eq!(cache.entry_count(), 0);
    }

    #[test]
    fn concurrent_insertions_are_safe() {
        let dir = tempfile::tempdir().unwrap();
        let cache = std::sync::Arc::new(FileCache::open(dir.path()).unwrap());
        let mut handles = Vec::new();
        for t in 0..8u64 {
            let cache = cache.clone();
            handles.push(std::thread::spawn(move || {
                for i in 0..50u64 {
                    let key = format!("{:064}", i % 10);
                    cache.put(&key, CachedRank { rank: (i % 10) as usize, certified: t % 2 == 0 });
                    let _ = cache.get(&key);
                }
            }));
        }
        for h in handles {
            h.join().unwrap();
        }
        for i in 0..10u64 {
            let key = format!("{i:064}");
            let got = cache.get(&key).expect("entry written");
            assert_eq!(got.rank, i as usize);
        }
    }
}
