//! Hecke eigenvalues from the LMFDB JSON API, with a content-addressed cache.
//!
//! Classical forms come from `mf_hecke_nf` (field `ap`, one entry per rational prime in
//! increasing order), Hilbert forms from `hmf_forms` (field `hecke_eigenvalues`, one entry
//! per prime ideal in the database's order). Only rational eigenvalues are accepted.

use std::path::{Path, PathBuf};
use std::thread::sleep;
use std::time::Duration;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::schema::{parse_series, serialize_series};
use super::{write_atomic, IoError};
use crate::field_arith::QuadField;
use crate::sign_pipeline::EigenvalueSeries;

pub const DEFAULT_BASE_URL: &str = "https://www.lmfdb.org";

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "SHIMURA_SIGNS_CACHE";

pub trait Transport {
    fn get(&self, url: &str) -> Result<String, IoError>;
}

/// Blocking HTTP with retries and exponential backoff.
pub struct HttpTransport {
    agent: ureq::Agent,
    retries: u32,
    backoff: Duration,
}

impl HttpTransport {
    pub fn new() -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        HttpTransport { agent, retries: 3, backoff: Duration::from_millis(500) }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<String, IoError> {
        let mut delay = self.backoff;
        let mut attempt = 0;
        loop {
            let result = self
                .agent
                .get(url)
                .header("Accept", "application/json")
                .call()
                .and_then(|mut r| r.body_mut().read_to_string());
            match result {
                Ok(body) => return Ok(body),
                // client errors will not improve on retry
                Err(ureq::Error::StatusCode(code)) if (400..500).contains(&code) && code != 429 => {
                    return Err(IoError::Network(format!("GET {url}: HTTP {code}")));
                }
                Err(e) if attempt >= self.retries => return Err(IoError::Network(format!("GET {url}: {e}"))),
                Err(_) => {
                    attempt += 1;
                    sleep(delay);
                    delay *= 2;
                }
            }
        }
    }
}

/// Refuses every request; used for `--offline`.
pub struct OfflineTransport;

impl Transport for OfflineTransport {
    fn get(&self, url: &str) -> Result<String, IoError> {
        Err(IoError::Network(format!("offline: refusing GET {url}")))
    }
}

/// How raw eigenvalues map to `c(P)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Normalization {
    /// Integral Hecke eigenvalues `a_P` with `|a_P| <= 2 N(P)^{(k0-1)/2}`; `c = a_P / N(P)^{k0/2}`.
    Arithmetic,
    /// The values already are `c(P)`.
    Coefficient,
}

/// One directory holding `<sha256(label)>.json` (parsed) and `<sha256(label)>.raw.json` (verbatim).
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    /// `$SHIMURA_SIGNS_CACHE`, else `$XDG_CACHE_HOME/shimura-signs`, else `~/.cache/shimura-signs`.
    pub fn from_env() -> Self {
        if let Some(dir) = std::env::var_os(CACHE_ENV) {
            return Cache::new(dir);
        }
        let base = std::env::var_os("XDG_CACHE_HOME")
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))
            .unwrap_or_else(std::env::temp_dir);
        Cache::new(base.join("shimura-signs"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(label: &str) -> String {
        hex::encode(Sha256::digest(label.as_bytes()))
    }

    pub fn parsed_path(&self, label: &str) -> PathBuf {
        self.dir.join(format!("{}.json", Self::key(label)))
    }

    pub fn raw_path(&self, label: &str) -> PathBuf {
        self.dir.join(format!("{}.raw.json", Self::key(label)))
    }

    pub fn load(&self, label: &str) -> Result<Option<EigenvalueSeries>, IoError> {
        let path = self.parsed_path(label);
        match std::fs::read_to_string(&path) {
            Ok(text) => parse_series(&text, &path.display().to_string()).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn store(&self, label: &str, raw: &str, series: &EigenvalueSeries) -> Result<(), IoError> {
        write_atomic(&self.raw_path(label), raw.as_bytes())?;
        write_atomic(&self.parsed_path(label), serialize_series(series).as_bytes())
    }
}

pub struct LmfdbClient<T: Transport> {
    base_url: String,
    cache: Cache,
    transport: T,
    normalization: Normalization,
}

impl<T: Transport> LmfdbClient<T> {
    pub fn new(base_url: impl Into<String>, cache: Cache, transport: T, normalization: Normalization) -> Self {
        LmfdbClient { base_url: base_url.into().trim_end_matches('/').to_string(), cache, transport, normalization }
    }

    /// Returns the cached series for `label`, downloading and caching it on a miss.
    pub fn fetch(&self, label: &str) -> Result<EigenvalueSeries, IoError> {
        validate_label(label)?;
        if let Some(series) = self.cache.load(label)? {
            return Ok(series);
        }
        let url = self.url(label);
        let raw = self.transport.get(&url)?;
        let series = parse_response(label, &raw, self.normalization)?;
        self.cache.store(label, &raw, &series)?;
        Ok(series)
    }

    pub fn url(&self, label: &str) -> String {
        let collection = if is_hilbert_label(label) { "hmf_forms" } else { "mf_hecke_nf" };
        format!("{}/api/{collection}/?label={label}&_format=json", self.base_url)
    }
}

fn validate_label(label: &str) -> Result<(), IoError> {
    if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '-') {
        return Err(IoError::Usage(format!("bad LMFDB label {label:?}")));
    }
    Ok(())
}

/// Hilbert labels look like `2.2.5.1-31.1-a`; classical ones like `37.2.a.a`.
fn is_hilbert_label(label: &str) -> bool {
    label.contains('-')
}

/// Maps an API response to a series, validating every value.
pub fn parse_response(label: &str, raw: &str, normalization: Normalization) -> Result<EigenvalueSeries, IoError> {
    let doc: Value = serde_json::from_str(raw).map_err(|e| IoError::Parse {
        source_name: format!("lmfdb:{label}"),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let record = doc
        .get("data")
        .and_then(Value::as_array)
        .and_then(|d| d.first())
        .ok_or_else(|| IoError::Validation(format!("{label}: no record in response")))?;
    if is_hilbert_label(label) {
        hilbert_series(label, record, normalization)
    } else {
        classical_series(label, record, normalization)
    }
}

fn rational_value(v: &Value, what: &str) -> Result<BigRational, IoError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        // [a] for a one-dimensional coefficient field
        Value::Array(a) if a.len() == 1 => return rational_value(&a[0], what),
        other => return Err(IoError::Validation(format!("{what}: unsupported eigenvalue {other}"))),
    };
    let parsed = match text.split_once('/') {
        Some((n, d)) => n.trim().parse::<BigInt>().ok().zip(d.trim().parse::<BigInt>().ok()),
        None => text.parse::<BigInt>().ok().map(|n| (n, BigInt::from(1))),
    };
    match parsed {
        Some((n, d)) if d != BigInt::from(0) => Ok(BigRational::new(n, d)),
        _ => Err(IoError::Validation(format!("{what}: {text:?} is not rational"))),
    }
}

fn normalize(value: BigRational, norm: u64, k0: u32, normalization: Normalization) -> BigRational {
    match normalization {
        Normalization::Arithmetic => value / BigInt::from(norm).pow(k0 / 2),
        Normalization::Coefficient => value,
    }
}

fn classical_series(label: &str, record: &Value, normalization: Normalization) -> Result<EigenvalueSeries, IoError> {
    let mut parts = label.split('.');
    let level: u64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad_label(label))?;
    let k: u32 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad_label(label))?;
    let aps = record
        .get("ap")
        .and_then(Value::as_array)
        .ok_or_else(|| IoError::Validation(format!("{label}: missing ap list")))?;
    let field = QuadField::rationals();
    let mut series = EigenvalueSeries::new(field, vec![k], label)
        .map_err(|e| IoError::Validation(format!("{label}: {e}")))?;
    let primes = field.prime_ideals_up_to(prime_bound(aps.len()));
    for (p, v) in primes.into_iter().zip(aps) {
        if level.is_multiple_of(p.rational_prime()) {
            series.mark_bad(p);
            continue;
        }
        let c = normalize(rational_value(v, &format!("{label} a_{}", p.rational_prime()))?, p.norm(), k, normalization);
        series.insert(p, c).map_err(|e| IoError::Validation(format!("{label}: {e}")))?;
    }
    Ok(series)
}

/// Large enough that the first `n` rational primes lie below it.
fn prime_bound(n: usize) -> u64 {
    let n = n.max(6) as f64;
    (n * (n.ln() + n.ln().ln())).ceil() as u64
}

fn hilbert_series(label: &str, record: &Value, normalization: Normalization) -> Result<EigenvalueSeries, IoError> {
    // field label 2.2.D.1 with D the discriminant
    let disc: u64 = label
        .split('-')
        .next()
        .and_then(|f| f.split('.').nth(2))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad_label(label))?;
    let d = if disc.is_multiple_of(4) { disc / 4 } else { disc };
    let field = QuadField::new(d).map_err(|e| IoError::Validation(format!("{label}: {e}")))?;
    let weight: Vec<u32> = match record.get("weight") {
        Some(Value::String(s)) => serde_json::from_str(s).map_err(|_| IoError::Validation(format!("{label}: weight {s:?}")))?,
        Some(v) => serde_json::from_value(v.clone()).map_err(|_| IoError::Validation(format!("{label}: weight {v}")))?,
        None => vec![2, 2],
    };
    let level_norm = record.get("level_norm").and_then(Value::as_u64).unwrap_or(1);
    let values = record
        .get("hecke_eigenvalues")
        .and_then(Value::as_array)
        .ok_or_else(|| IoError::Validation(format!("{label}: missing hecke_eigenvalues")))?;
    let mut series = EigenvalueSeries::new(field, weight, label)
        .map_err(|e| IoError::Validation(format!("{label}: {e}")))?;
    let k0 = series.k0();
    let mut bound = 64;
    let primes = loop {
        let primes = field.prime_ideals_up_to(bound);
        if primes.len() >= values.len() {
            break primes;
        }
        bound *= 2;
    };
    // Positional: the i-th value belongs to the i-th prime in canonical order.
    for (p, v) in primes.into_iter().zip(values) {
        if level_norm.is_multiple_of(p.norm()) {
            series.mark_bad(p);
            continue;
        }
        let c = normalize(rational_value(v, &format!("{label} at {p}"))?, p.norm(), k0, normalization);
        series.insert(p, c).map_err(|e| IoError::Validation(format!("{label}: {e}")))?;
    }
    Ok(series)
}

fn bad_label(label: &str) -> IoError {
    IoError::Validation(format!("cannot read level and weight from label {label:?}"))
}
