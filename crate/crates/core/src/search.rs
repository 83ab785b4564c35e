//! Checkpointable search for negative values of the triple integrand.
//!
//! Evaluation `k` (1-based) pairs candidate `(k - 1) / m` with point
//! `(k - 1) % m`, where `m` is the number of configured points. Candidate `c`
//! is generated from ChaCha stream `c` of the configured seed, so any range of
//! evaluations can be produced independently. Workers evaluate blocks of
//! indices in parallel and a single writer appends records in index order.
//!
//! The output is line-delimited JSON with one record per evaluation that is
//! negative or lowers the running minimum. Checkpoints store the next index,
//! the counters, and the byte length of the output at that moment; resuming
//! truncates the output to that length and continues the same stream, so an
//! interrupted run ends byte-identical to an uninterrupted one.

use std::cmp::Ordering;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{parse_rational, ExactRational, GaussianRational, HpReal, Log2Multiple, RealValue};
use crate::linalg::GramRows;
use crate::loops::{triple_integrand, IntegrandPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Random,
    Neighborhood,
}

fn default_points() -> Vec<String> {
    vec!["1,1,1/3".into()]
}
fn default_unit() -> String {
    "3".into()
}
fn default_n() -> usize {
    3
}
fn default_magnitude() -> f64 {
    1e6
}
fn default_neg() -> f64 {
    0.5
}
fn default_lambda_max() -> i64 {
    30
}
fn default_interval() -> u64 {
    1000
}
fn default_precision() -> usize {
    128
}

/// Search parameters, read from JSON. Exponents are `λ_k = unit · m_k · ln 2`
/// with integer multipliers `m_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub mode: SearchMode,
    /// Starting family of a neighborhood search, integer entries.
    #[serde(default)]
    pub seed_family: Option<Vec<Vec<i64>>>,
    /// Starting multipliers of a neighborhood search.
    #[serde(default)]
    pub seed_lambda: Option<Vec<i64>>,
    /// Largest `δ` of an entry move; 0 disables entry moves.
    #[serde(default)]
    pub radius: i64,
    /// Entries `[row, col]` open to entry moves; all when absent.
    #[serde(default)]
    pub entries: Option<Vec<[usize; 2]>>,
    /// Whether `±1` moves on the multipliers are allowed.
    #[serde(default = "default_true")]
    pub lambda_moves: bool,
    /// Rational `unit` in `λ_k = unit · m_k · ln 2`.
    #[serde(default = "default_unit")]
    pub lambda_unit: String,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_n")]
    pub dim: usize,
    /// Entry magnitudes are log-uniform on `[1, magnitude_max]`.
    #[serde(default = "default_magnitude")]
    pub magnitude_max: f64,
    #[serde(default = "default_neg")]
    pub negative_probability: f64,
    /// Multipliers are uniform on `0..=lambda_max`.
    #[serde(default = "default_lambda_max")]
    pub lambda_max: i64,
    #[serde(default = "default_points")]
    pub points: Vec<String>,
    pub budget: u64,
    pub seed: u64,
    pub output: PathBuf,
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
    #[serde(default = "default_interval")]
    pub checkpoint_interval: u64,
    #[serde(default = "default_precision")]
    pub precision: usize,
}

fn default_true() -> bool {
    true
}

impl SearchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SearchConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Neighborhood of `family` with multipliers `lambda` and the defaults
    /// for everything else.
    pub fn neighborhood(family: Vec<Vec<i64>>, lambda: Vec<i64>, radius: i64, budget: u64, seed: u64, output: PathBuf) -> Self {
        Self {
            mode: SearchMode::Neighborhood,
            n: family.len(),
            dim: family.first().map_or(0, Vec::len),
            seed_family: Some(family),
            seed_lambda: Some(lambda),
            radius,
            entries: None,
            lambda_moves: true,
            lambda_unit: default_unit(),
            magnitude_max: default_magnitude(),
            negative_probability: default_neg(),
            lambda_max: default_lambda_max(),
            points: default_points(),
            budget,
            seed,
            output,
            checkpoint: None,
            checkpoint_interval: default_interval(),
            precision: default_precision(),
        }
    }

    /// Random candidates with the defaults for everything else.
    pub fn random(n: usize, dim: usize, budget: u64, seed: u64, output: PathBuf) -> Self {
        Self {
            mode: SearchMode::Random,
            seed_family: None,
            seed_lambda: None,
            n,
            dim,
            ..Self::neighborhood(vec![], vec![], 0, budget, seed, output)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::invalid("search budget must be positive"));
        }
        if self.radius < 0 {
            return Err(Error::invalid("radius must be >= 0"));
        }
        if self.points.is_empty() {
            return Err(Error::invalid("no integrand points"));
        }
        for p in &self.points {
            IntegrandPoint::parse(p)?;
        }
        parse_rational(&self.lambda_unit)?;
        if self.precision < crate::exactnum::MIN_PRECISION {
            return Err(Error::invalid(format!("precision must be at least {}", crate::exactnum::MIN_PRECISION)));
        }
        match self.mode {
            SearchMode::Neighborhood => {
                let fam = self.seed_family.as_ref().ok_or_else(|| Error::invalid("neighborhood search needs seed_family"))?;
                let lam = self.seed_lambda.as_ref().ok_or_else(|| Error::invalid("neighborhood search needs seed_lambda"))?;
                let dim = fam.first().map_or(0, Vec::len);
                if fam.is_empty() || dim == 0 || fam.iter().any(|r| r.len() != dim) {
                    return Err(Error::invalid("seed_family must be a nonempty rectangular array"));
                }
                if lam.len() != fam.len() {
                    return Err(Error::invalid("seed_lambda needs one multiplier per vector"));
                }
                if let Some(entries) = &self.entries {
                    if entries.iter().any(|&[r, c]| r >= fam.len() || c >= dim) {
                        return Err(Error::invalid("entry outside seed_family"));
                    }
                }
            }
            SearchMode::Random => {
                if self.n == 0 || self.dim == 0 {
                    return Err(Error::invalid("random search needs n >= 1 and dim >= 1"));
                }
                if !(self.magnitude_max >= 1.0) || !(0.0..=1.0).contains(&self.negative_probability) || self.lambda_max < 0 {
                    return Err(Error::invalid("bad sampling distribution"));
                }
            }
        }
        Ok(())
    }
}

/// A family with integer entries and integer multipliers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub family: Vec<Vec<i64>>,
    pub lambda: Vec<i64>,
}

/// One line of the output log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    /// 1-based evaluation number.
    pub index: u64,
    /// Logical clock: the number of evaluations completed when the record
    /// was produced.
    pub timestamp: u64,
    pub family: Vec<Vec<i64>>,
    pub lambda: Vec<i64>,
    pub lambda_unit: String,
    pub point: IntegrandPoint,
    pub value: String,
    pub mode: String,
    pub negative: bool,
    pub new_minimum: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub evaluations: u64,
    pub negatives_found: u64,
    pub min_value: Option<String>,
    pub argmin: Option<u64>,
    pub complete: bool,
}

/// Resumption state; `output_bytes` is the log length it is consistent with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: SearchConfig,
    pub next_index: u64,
    pub negatives_found: u64,
    pub argmin: Option<u64>,
    pub output_bytes: u64,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let ck: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::parse(format!("corrupt checkpoint: {e}")))?;
        ck.config.validate()?;
        if ck.next_index > ck.config.budget || ck.argmin.is_some_and(|a| a == 0 || a > ck.next_index) {
            return Err(Error::parse("corrupt checkpoint: counters out of range"));
        }
        Ok(ck)
    }

    fn store(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn sample_entry(rng: &mut ChaCha8Rng, cfg: &SearchConfig) -> i64 {
    let mag = (rng.gen::<f64>() * cfg.magnitude_max.ln()).exp().round() as i64;
    if rng.gen::<f64>() < cfg.negative_probability {
        -mag
    } else {
        mag
    }
}

/// Candidate number `c` (0-based) of the stream.
pub fn candidate(cfg: &SearchConfig, c: u64) -> Candidate {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(c);
    match cfg.mode {
        SearchMode::Random => Candidate {
            family: (0..cfg.n).map(|_| (0..cfg.dim).map(|_| sample_entry(&mut rng, cfg)).collect()).collect(),
            lambda: (0..cfg.n).map(|_| rng.gen_range(0..=cfg.lambda_max)).collect(),
        },
        SearchMode::Neighborhood => {
            let mut cand =
                Candidate { family: cfg.seed_family.clone().expect("validated"), lambda: cfg.seed_lambda.clone().expect("validated") };
            if c == 0 {
                return cand;
            }
            let entries: Vec<[usize; 2]> = match &cfg.entries {
                Some(e) => e.clone(),
                None => (0..cand.family.len()).flat_map(|r| (0..cand.family[0].len()).map(move |k| [r, k])).collect(),
            };
            let entry_moves = if cfg.radius > 0 { entries.len() as u64 * 2 * cfg.radius as u64 } else { 0 };
            let lambda_moves = if cfg.lambda_moves { 2 * cand.lambda.len() as u64 } else { 0 };
            let total = entry_moves + lambda_moves;
            if total == 0 {
                return cand;
            }
            let mv = rng.gen_range(0..total);
            if mv < entry_moves {
                let per_entry = 2 * cfg.radius as u64;
                let [r, k] = entries[(mv / per_entry) as usize];
                let offset = (mv % per_entry) as i64;
                let delta = if offset < cfg.radius { offset + 1 } else { -(offset - cfg.radius + 1) };
                cand.family[r][k] += delta;
            } else {
                let m = mv - entry_moves;
                cand.lambda[(m / 2) as usize] += if m % 2 == 0 { 1 } else { -1 };
            }
            cand
        }
    }
}

/// Evaluates the integrand for `cand` at `point`.
pub fn evaluate(cand: &Candidate, unit: &ExactRational, point: &IntegrandPoint, prec: usize) -> Result<RealValue> {
    let fam = GramRows::new(cand.family.iter().map(|r| r.iter().map(|&v| GaussianRational::from_int(v)).collect()).collect())?;
    let lambda: Vec<Log2Multiple> = cand.lambda.iter().map(|&m| Log2Multiple::new(unit * ExactRational::from_integer(m.into()))).collect();
    triple_integrand(&fam, &lambda, point, prec)
}

fn compare(a: &RealValue, b: &RealValue, prec: usize) -> Ordering {
    match (a, b) {
        (RealValue::Exact(x), RealValue::Exact(y)) => x.cmp(y),
        _ => a.to_hp(prec).partial_cmp(&b.to_hp(prec)).unwrap_or(Ordering::Equal),
    }
}

struct Prepared {
    points: Vec<IntegrandPoint>,
    unit: ExactRational,
}

impl Prepared {
    fn new(cfg: &SearchConfig) -> Result<Self> {
        Ok(Self {
            points: cfg.points.iter().map(|p| IntegrandPoint::parse(p)).collect::<Result<_>>()?,
            unit: parse_rational(&cfg.lambda_unit)?,
        })
    }

    /// Evaluation number `k` (1-based).
    fn eval(&self, cfg: &SearchConfig, k: u64) -> Result<(Candidate, usize, RealValue)> {
        let m = self.points.len() as u64;
        let cand = candidate(cfg, (k - 1) / m);
        let pi = ((k - 1) % m) as usize;
        let v = evaluate(&cand, &self.unit, &self.points[pi], cfg.precision)?;
        Ok((cand, pi, v))
    }
}

/// Options that do not change results.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; the rayon default when `None`.
    pub workers: Option<usize>,
    /// Stop after this many new evaluations, leaving a checkpoint.
    pub stop_after: Option<u64>,
}

struct State {
    next: u64,
    negatives: u64,
    argmin: Option<u64>,
    min: Option<RealValue>,
}

/// Starts a fresh search, truncating the output log.
pub fn run_search(cfg: &SearchConfig, opts: &RunOptions) -> Result<SearchSummary> {
    cfg.validate()?;
    File::create(&cfg.output)?;
    let state = State { next: 1, negatives: 0, argmin: None, min: None };
    drive(cfg, state, 0, opts)
}

/// Continues from a checkpoint written by [`run_search`].
pub fn resume(checkpoint: &Path, opts: &RunOptions) -> Result<SearchSummary> {
    let ck = Checkpoint::load(checkpoint)?;
    let cfg = ck.config;
    let prepared = Prepared::new(&cfg)?;
    let min = match ck.argmin {
        Some(k) => Some(prepared.eval(&cfg, k)?.2),
        None => None,
    };
    let state = State { next: ck.next_index + 1, negatives: ck.negatives_found, argmin: ck.argmin, min };
    drive(&cfg, state, ck.output_bytes, opts)
}

fn drive(cfg: &SearchConfig, mut st: State, output_bytes: u64, opts: &RunOptions) -> Result<SearchSummary> {
    let prepared = Prepared::new(cfg)?;
    let file = OpenOptions::new().write(true).open(&cfg.output)?;
    if file.metadata()?.len() < output_bytes {
        return Err(Error::parse("output log is shorter than the checkpoint records"));
    }
    file.set_len(output_bytes)?;
    let mut file = file;
    std::io::Seek::seek(&mut file, std::io::SeekFrom::End(0))?;
    let mut out = BufWriter::new(file);
    let mut written = output_bytes;

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = opts.workers {
            b = b.num_threads(w.max(1));
        }
        b.build().map_err(|e| Error::Numerical(format!("worker pool: {e}")))?
    };
    let workers = pool.current_num_threads() as u64;
    let end = match opts.stop_after {
        Some(s) => cfg.budget.min(st.next - 1 + s),
        None => cfg.budget,
    };
    let interval = cfg.checkpoint_interval.max(1);
    while st.next <= end {
        // Blocks never straddle a checkpoint boundary.
        let boundary = ((st.next - 1) / interval + 1) * interval;
        let block_end = end.min(boundary).min(st.next - 1 + workers * 16);
        let results: Vec<(Candidate, usize, RealValue)> =
            pool.install(|| (st.next..=block_end).into_par_iter().map(|k| prepared.eval(cfg, k)).collect::<Result<_>>())?;
        for (offset, (cand, pi, value)) in results.into_iter().enumerate() {
            let k = st.next + offset as u64;
            let negative = value.signum_i8() < 0;
            let new_minimum = st.min.as_ref().map_or(true, |m| compare(&value, m, cfg.precision) == Ordering::Less);
            if negative {
                st.negatives += 1;
            }
            if new_minimum {
                st.min = Some(value.clone());
                st.argmin = Some(k);
            }
            if negative || new_minimum {
                let rec = SearchRecord {
                    index: k,
                    timestamp: k,
                    family: cand.family,
                    lambda: cand.lambda,
                    lambda_unit: cfg.lambda_unit.clone(),
                    point: prepared.points[pi].clone(),
                    value: value.to_text(crate::traceder::digits_for(cfg.precision)),
                    mode: value.mode().into(),
                    negative,
                    new_minimum,
                };
                let mut line = serde_json::to_string(&rec)?;
                line.push('\n');
                out.write_all(line.as_bytes())?;
                written += line.len() as u64;
            }
        }
        st.next = block_end + 1;
        let at_boundary = (st.next - 1) % interval == 0;
        if let Some(path) = &cfg.checkpoint {
            if at_boundary || st.next > end {
                out.flush()?;
                Checkpoint {
                    config: cfg.clone(),
                    next_index: st.next - 1,
                    negatives_found: st.negatives,
                    argmin: st.argmin,
                    output_bytes: written,
                }
                .store(path)?;
            }
        }
    }
    out.flush()?;
    Ok(SearchSummary {
        evaluations: st.next - 1,
        negatives_found: st.negatives,
        min_value: st.min.as_ref().map(|v| v.to_text(crate::traceder::digits_for(cfg.precision))),
        argmin: st.argmin,
        complete: st.next > cfg.budget,
    })
}

/// Reads an output log.
pub fn read_records(path: &Path) -> Result<Vec<SearchRecord>> {
    fs::read_to_string(path)?.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}

/// Re-evaluates a record from its inputs.
pub fn reverify(rec: &SearchRecord, prec: usize) -> Result<bool> {
    let cand = Candidate { family: rec.family.clone(), lambda: rec.lambda.clone() };
    let v = evaluate(&cand, &parse_rational(&rec.lambda_unit)?, &rec.point, prec)?;
    Ok(v.to_text(crate::traceder::digits_for(prec)) == rec.value && v.mode() == rec.mode)
}

/// Value of a record as a float, for ranking mixed-mode logs.
pub fn record_value(rec: &SearchRecord, prec: usize) -> Result<HpReal> {
    match rec.mode.as_str() {
        "exact" => Ok(HpReal::from_rational(&parse_rational(&rec.value)?, prec)),
        _ => HpReal::parse(&rec.value, prec),
    }
}
