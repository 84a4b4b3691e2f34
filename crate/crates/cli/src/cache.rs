//! JSON disk cache for supersingular sets and Manin presentations.
//!
//! Entries are keyed by `p`, the `F_{p²}` model (`qnr`), the coefficient
//! modulus where relevant, and the schema version. Every read is validated
//! before use; invalid or unreadable entries are recomputed and rewritten.

use std::fs;
use std::path::{Path, PathBuf};

use mtcircle::gfield::PrimeContext;
use mtcircle::modsym::{build_presentation, ManinSpace};
use mtcircle::ssgraph::{enumerate_supersingular, SupersingularSet};
use mtcircle::Result;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::output::{atomic_write, warn};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Entry<T> {
    schema: u32,
    p: u64,
    qnr: u64,
    value: T,
}

#[derive(Debug, Clone, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Cache { dir }
    }

    pub fn supersingular_path(&self, ctx: &PrimeContext) -> Option<PathBuf> {
        let name = format!("supersingular-p{}-qnr{}-v{SCHEMA_VERSION}.json", ctx.p, ctx.qnr);
        self.dir.as_ref().map(|d| d.join(name))
    }

    pub fn presentation_path(&self, ctx: &PrimeContext) -> Option<PathBuf> {
        let name = format!(
            "presentation-p{}-qnr{}-m{}-v{SCHEMA_VERSION}.json",
            ctx.p,
            ctx.qnr,
            ctx.s_modulus().value()
        );
        self.dir.as_ref().map(|d| d.join(name))
    }

    pub fn supersingular(&self, ctx: &PrimeContext) -> SupersingularSet {
        let path = self.supersingular_path(ctx);
        self.fetch(path.as_deref(), ctx, |set: &SupersingularSet| set.validate(ctx), || {
            Ok(enumerate_supersingular(ctx))
        })
        .expect("enumeration is infallible")
    }

    pub fn presentation(&self, ctx: &PrimeContext) -> Result<ManinSpace> {
        let path = self.presentation_path(ctx);
        self.fetch(path.as_deref(), ctx, |h: &ManinSpace| h.validate(ctx), || build_presentation(ctx))
    }

    fn fetch<T: Serialize + DeserializeOwned>(
        &self,
        path: Option<&Path>,
        ctx: &PrimeContext,
        validate: impl Fn(&T) -> Result<()>,
        compute: impl FnOnce() -> Result<T>,
    ) -> Result<T> {
        let Some(path) = path else {
            return compute();
        };
        if let Some(value) = load(path, ctx, &validate) {
            return Ok(value);
        }
        let value = compute()?;
        store(path, ctx, &value);
        Ok(value)
    }
}

fn load<T: DeserializeOwned>(
    path: &Path,
    ctx: &PrimeContext,
    validate: impl Fn(&T) -> Result<()>,
) -> Option<T> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
        Err(e) => {
            warn(&format!("cannot read cache entry {}: {e}", path.display()));
            return None;
        }
    };
    let reject = |why: String| {
        warn(&format!("discarding cache entry {}: {why}", path.display()));
        None
    };
    let entry: Entry<T> = match serde_json::from_slice(&bytes) {
        Ok(e) => e,
        Err(e) => return reject(e.to_string()),
    };
    if entry.schema != SCHEMA_VERSION || entry.p != ctx.p || entry.qnr != ctx.qnr {
        return reject("key fields do not match".into());
    }
    match validate(&entry.value) {
        Ok(()) => Some(entry.value),
        Err(e) => reject(e.to_string()),
    }
}

fn store<T: Serialize>(path: &Path, ctx: &PrimeContext, value: &T) {
    let entry = Entry {
        schema: SCHEMA_VERSION,
        p: ctx.p,
        qnr: ctx.qnr,
        value,
    };
    let result = fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))
        .map_err(|e| e.to_string())
        .and_then(|()| serde_json::to_vec(&entry).map_err(|e| e.to_string()))
        .and_then(|bytes| atomic_write(path, &bytes).map_err(|e| e.to_string()));
    if let Err(e) = result {
        warn(&format!("cannot write cache entry {}: {e}", path.display()));
    }
}
