//! External predicates: a named registry with a shared result cache, backed
//! by the grid workspace checker.

mod workspace;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

pub use workspace::{Manipulator, Region, Workspace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeasibilityError {
    #[error("unregistered external `{0}`")]
    Unregistered(String),
    #[error("external `{name}` expects {expected} arguments, got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("unknown {0}")]
    Unknown(String),
    #[error("cell ({0}, {1}) is outside the grid")]
    OutOfBounds(i32, i32),
    #[error("invalid workspace: {0}")]
    Invalid(String),
    #[error("{line}:{col}: invalid workspace JSON: {message}")]
    Format { line: usize, col: usize, message: String },
}

/// Counter snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CheckStats {
    pub calls: u64,
    pub hits: u64,
    pub seconds: f64,
}

type ExternalFn = Box<dyn Fn(&[String]) -> Result<bool, FeasibilityError> + Send + Sync>;

struct Entry {
    arity: usize,
    f: ExternalFn,
}

/// Registry of external predicates. Safe to share between threads; the
/// cache is guarded by a mutex and never changes a result.
pub struct FeasibilityOracle {
    registry: BTreeMap<String, Entry>,
    cache: Mutex<HashMap<(String, Vec<String>), bool>>,
    caching: bool,
    calls: AtomicU64,
    hits: AtomicU64,
    nanos: AtomicU64,
}

impl Default for FeasibilityOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl FeasibilityOracle {
    pub fn new() -> Self {
        FeasibilityOracle {
            registry: BTreeMap::new(),
            cache: Mutex::new(HashMap::new()),
            caching: true,
            calls: AtomicU64::new(0),
            hits: AtomicU64::new(0),
            nanos: AtomicU64::new(0),
        }
    }

    /// Oracle with `reachable/2` bound to the given workspace.
    pub fn for_workspace(ws: Workspace) -> Self {
        let ws = Arc::new(ws);
        let mut o = Self::new();
        o.register("reachable", 2, move |args| ws.reachable(&args[0], &args[1]));
        o
    }

    pub fn without_cache(mut self) -> Self {
        self.caching = false;
        self
    }

    pub fn register<F>(&mut self, name: &str, arity: usize, f: F)
    where
        F: Fn(&[String]) -> Result<bool, FeasibilityError> + Send + Sync + 'static,
    {
        self.registry.insert(name.to_string(), Entry { arity, f: Box::new(f) });
    }

    pub fn is_registered(&self, name: &str) -> bool {
        self.registry.contains_key(name)
    }

    pub fn eval(&self, name: &str, args: &[String]) -> Result<bool, FeasibilityError> {
        let entry = self.registry.get(name).ok_or_else(|| FeasibilityError::Unregistered(name.to_string()))?;
        if entry.arity != args.len() {
            return Err(FeasibilityError::Arity { name: name.to_string(), expected: entry.arity, got: args.len() });
        }
        let start = Instant::now();
        self.calls.fetch_add(1, Ordering::Relaxed);
        let key = (name.to_string(), args.to_vec());
        if self.caching {
            if let Some(&v) = self.cache.lock().expect("cache lock").get(&key) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                self.nanos.fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
                return Ok(v);
            }
        }
        let result = (entry.f)(args);
        if let (true, Ok(v)) = (self.caching, &result) {
            self.cache.lock().expect("cache lock").insert(key, *v);
        }
        self.nanos.fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
        result
    }

    pub fn check_stats(&self) -> CheckStats {
        CheckStats {
            calls: self.calls.load(Ordering::Relaxed),
            hits: self.hits.load(Ordering::Relaxed),
            seconds: self.nanos.load(Ordering::Relaxed) as f64 * 1e-9,
        }
    }
}
