//! Starter generation with orbit-based isomorph rejection, the per-starter
//! backtrack, and a resumable parallel driver.
//!
//! A starter `(S_i, S_e)` stands for every spread containing `S_i` and
//! avoiding `S_e`. Refining a starter takes the orbits of the stabilizer of
//! `S_i` on the secants still compatible with it, discards orbits touching
//! `S_e`, sorts the rest by (size, smallest id) and creates one child per
//! orbit: its smallest member is added to `S_i` and every later orbit is
//! added to `S_e`.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::constructions::Spread;
use crate::geometry::{SecantId, UnitalGeometry};
use crate::group::UnitaryGroup;

pub const DEFAULT_STARTER_LIMIT: usize = 25_000;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("the reference search is limited to q <= 4 (got q = {0})")]
    TooLarge(u32),
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint line {line}: {msg}")]
    Checkpoint { line: usize, msg: String },
    #[error("checkpoint was written for a different run ({0})")]
    CheckpointMismatch(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarterConfig {
    /// Sorted secant ids that every spread of this starter contains.
    pub included: Vec<SecantId>,
    /// Secants no spread of this starter may contain.
    pub excluded: FixedBitSet,
}

impl StarterConfig {
    /// `({[1,0,0]}, ∅)`.
    pub fn initial(geom: &UnitalGeometry, group: &UnitaryGroup) -> Self {
        StarterConfig { included: vec![group.anchor()], excluded: FixedBitSet::with_capacity(geom.num_secants()) }
    }

    /// Secants compatible with `included` (pairwise disjoint blocks), ignoring exclusions.
    pub fn compatible(&self, geom: &UnitalGeometry) -> FixedBitSet {
        let mut ok = FixedBitSet::with_capacity(geom.num_secants());
        ok.insert_range(..);
        for &s in &self.included {
            ok.intersect_with(geom.disjoint_row(s));
        }
        ok
    }

    /// Compatible secants that are not excluded.
    pub fn candidates(&self, geom: &UnitalGeometry) -> FixedBitSet {
        let mut c = self.compatible(geom);
        c.difference_with(&self.excluded);
        c
    }

    pub fn is_full(&self, geom: &UnitalGeometry) -> bool {
        self.included.len() == geom.spread_size()
    }

    /// Number of excluded secants and a hash of the set, for checkpoints.
    pub fn exclusion_summary(&self) -> (usize, u64) {
        let mut h = Sha256::new();
        for x in self.excluded.ones() {
            h.update((x as u32).to_le_bytes());
        }
        (self.excluded.count_ones(..), digest_prefix(h))
    }
}

/// Children of `starter`, or `None` when its stabilizer fixes every remaining
/// candidate (or `S_i` is already a spread) and refinement gains nothing.
pub fn refine(geom: &UnitalGeometry, group: &UnitaryGroup, starter: &StarterConfig) -> Option<Vec<StarterConfig>> {
    if starter.is_full(geom) {
        return None;
    }
    let compatible: Vec<u32> = starter.compatible(geom).ones().map(|x| x as u32).collect();
    let stab = group.setwise_stabilizer(&starter.included);
    let mut orbits: Vec<Vec<u32>> = stab
        .orbits(&compatible)
        .expect("compatible secants are invariant")
        .into_iter()
        .filter(|o| o.iter().all(|&x| !starter.excluded.contains(x as usize)))
        .collect();
    if orbits.iter().all(|o| o.len() == 1) {
        return None;
    }
    orbits.sort_by_key(|o| (o.len(), o[0]));
    let mut children = Vec::with_capacity(orbits.len());
    for (j, o) in orbits.iter().enumerate() {
        let mut included = starter.included.clone();
        included.push(o[0]);
        included.sort_unstable();
        let mut excluded = starter.excluded.clone();
        for later in &orbits[j + 1..] {
            for &x in later {
                excluded.insert(x as usize);
            }
        }
        children.push(StarterConfig { included, excluded });
    }
    Some(children)
}

/// Refines level by level from the initial starter while some starter can be
/// refined and the total stays within `limit`. Starters come out in tree pre-order.
pub fn generate_starters(geom: &UnitalGeometry, group: &UnitaryGroup, limit: usize) -> Vec<StarterConfig> {
    let mut level = vec![StarterConfig::initial(geom, group)];
    loop {
        let refined: Vec<Option<Vec<StarterConfig>>> = level.par_iter().map(|s| refine(geom, group, s)).collect();
        if refined.iter().all(Option::is_none) {
            return level;
        }
        let total: usize = refined.iter().map(|r| r.as_ref().map_or(1, Vec::len)).sum();
        if total > limit {
            return level;
        }
        level = level
            .into_iter()
            .zip(refined)
            .flat_map(|(s, r)| r.unwrap_or_else(|| vec![s]))
            .collect();
    }
}

/// Secant-secant conflicts: for each secant, the other secants sharing a unital point with it.
struct Conflicts {
    offsets: Vec<usize>,
    data: Vec<u32>,
}

impl Conflicts {
    fn new(geom: &UnitalGeometry) -> Self {
        let n = geom.num_secants();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut data = Vec::new();
        offsets.push(0);
        for s in 0..n as u32 {
            let start = data.len();
            for &p in geom.block(s) {
                data.extend(geom.secants_at(p).iter().copied().filter(|&t| t != s));
            }
            data[start..].sort_unstable();
            let mut tail = data.split_off(start);
            tail.dedup();
            data.extend(tail);
            offsets.push(data.len());
        }
        Conflicts { offsets, data }
    }

    #[inline]
    fn of(&self, s: u32) -> &[u32] {
        &self.data[self.offsets[s as usize]..self.offsets[s as usize + 1]]
    }
}

/// Exact cover over unital points. Each step branches on the uncovered point
/// with the fewest live secants (lowest position on ties); live counts are kept
/// incrementally, so a dead end shows up as a point with count zero.
struct Backtracker<'a> {
    geom: &'a UnitalGeometry,
    conflicts: &'a Conflicts,
    live: Vec<bool>,
    count: Vec<u32>,
    covered: Vec<bool>,
    uncovered: usize,
    killed: Vec<u32>,
    chosen: Vec<u32>,
    out: Vec<Spread>,
}

impl Backtracker<'_> {
    fn kill(&mut self, t: u32) {
        self.live[t as usize] = false;
        self.killed.push(t);
        for &p in self.geom.block(t) {
            self.count[p as usize] -= 1;
        }
    }

    fn revive_to(&mut self, mark: usize) {
        while self.killed.len() > mark {
            let t = self.killed.pop().expect("non-empty");
            self.live[t as usize] = true;
            for &p in self.geom.block(t) {
                self.count[p as usize] += 1;
            }
        }
    }

    /// Marks the block of `s` covered and kills every secant meeting it.
    fn place(&mut self, s: u32) {
        for &p in self.geom.block(s) {
            self.covered[p as usize] = true;
        }
        self.uncovered -= self.geom.block(s).len();
        if self.live[s as usize] {
            self.kill(s);
        }
        for &t in self.conflicts.of(s) {
            if self.live[t as usize] {
                self.kill(t);
            }
        }
        self.chosen.push(s);
    }

    fn unplace(&mut self, s: u32, mark: usize) {
        self.chosen.pop();
        self.revive_to(mark);
        for &p in self.geom.block(s) {
            self.covered[p as usize] = false;
        }
        self.uncovered += self.geom.block(s).len();
    }

    fn pivot(&self) -> usize {
        let mut best = usize::MAX;
        let mut best_count = u32::MAX;
        for (p, &c) in self.count.iter().enumerate() {
            if !self.covered[p] && c < best_count {
                best = p;
                best_count = c;
                if c == 0 {
                    break;
                }
            }
        }
        best
    }

    fn run(&mut self) {
        if self.uncovered == 0 {
            let spread = Spread::new(self.geom, self.chosen.clone()).expect("backtrack emits partitions");
            self.out.push(spread);
            return;
        }
        let p = self.pivot();
        let options: Vec<u32> = self.geom.secants_at(p as u32).iter().copied().filter(|&s| self.live[s as usize]).collect();
        for s in options {
            let mark = self.killed.len();
            self.place(s);
            self.run();
            self.unplace(s, mark);
        }
    }
}

fn backtrack_with(geom: &UnitalGeometry, conflicts: &Conflicts, starter: &StarterConfig) -> Vec<Spread> {
    let points = geom.unital().len();
    let allowed = starter.candidates(geom);
    let live: Vec<bool> = (0..geom.num_secants()).map(|s| allowed.contains(s)).collect();
    let mut count = vec![0u32; points];
    for s in allowed.ones() {
        for &p in geom.block(s as u32) {
            count[p as usize] += 1;
        }
    }
    let mut bt = Backtracker {
        geom,
        conflicts,
        live,
        count,
        covered: vec![false; points],
        uncovered: points,
        killed: Vec::new(),
        chosen: Vec::new(),
        out: Vec::new(),
    };
    for &s in &starter.included {
        bt.place(s);
    }
    bt.killed.clear();
    bt.run();
    bt.out.sort();
    bt.out
}

/// Every spread containing `S_i` and avoiding `S_e`, each once, in sorted order.
pub fn backtrack(geom: &UnitalGeometry, starter: &StarterConfig) -> Vec<Spread> {
    backtrack_with(geom, &Conflicts::new(geom), starter)
}

/// Every spread containing `[1,0,0]`, with no isomorph rejection.
pub fn exhaustive_reference_search(geom: &UnitalGeometry) -> Result<Vec<Spread>, SearchError> {
    if geom.q() > 4 {
        return Err(SearchError::TooLarge(geom.q()));
    }
    let (o, z) = (crate::FieldElement::ONE, crate::FieldElement::ZERO);
    let anchor = geom.secant_of_line(geom.id_of(&[o, z, z]).expect("point")).expect("secant");
    let starter = StarterConfig { included: vec![anchor], excluded: FixedBitSet::with_capacity(geom.num_secants()) };
    Ok(backtrack(geom, &starter))
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Load finished starters from the checkpoint instead of starting over.
    pub resume: bool,
    /// Process at most this many pending starters, then stop.
    pub stop_after: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { workers: 1, checkpoint: None, resume: false, stop_after: None }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Spreads per starter, `None` for starters not yet processed.
    pub per_starter: Vec<Option<Vec<Spread>>>,
}

impl SearchOutcome {
    pub fn is_complete(&self) -> bool {
        self.per_starter.iter().all(Option::is_some)
    }

    pub fn completed(&self) -> usize {
        self.per_starter.iter().filter(|r| r.is_some()).count()
    }

    /// All spreads found, in starter order.
    pub fn spreads(&self) -> Vec<Spread> {
        self.per_starter.iter().flatten().flatten().cloned().collect()
    }
}

const CHECKPOINT_HEADER: &str = "unital-checkpoint v1";

fn digest_prefix(h: Sha256) -> u64 {
    let d = h.finalize();
    u64::from_be_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

fn fingerprint(q: u32, starters: &[StarterConfig]) -> String {
    let mut h = Sha256::new();
    h.update(q.to_le_bytes());
    for s in starters {
        h.update((s.included.len() as u32).to_le_bytes());
        for &x in &s.included {
            h.update(x.to_le_bytes());
        }
        h.update(s.exclusion_summary().1.to_le_bytes());
    }
    format!("q={q} starters={} fingerprint={:016x}", starters.len(), digest_prefix(h))
}

fn join_ids(ids: &[u32]) -> String {
    ids.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn checkpoint_record(index: usize, starter: &StarterConfig, result: Option<&[Spread]>) -> String {
    let (count, hash) = starter.exclusion_summary();
    let status = if result.is_some() { "done" } else { "pending" };
    let found = result.map_or(String::new(), |r| r.iter().map(|s| join_ids(s.lines())).collect::<Vec<_>>().join(";"));
    let n = result.map_or(0, <[Spread]>::len);
    format!("{index} included={} excluded={count}:{hash:016x} status={status} spreads={n} found={found}", join_ids(&starter.included))
}

fn write_checkpoint(path: &Path, q: u32, starters: &[StarterConfig], results: &[Option<Vec<Spread>>]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        writeln!(w, "{CHECKPOINT_HEADER}")?;
        writeln!(w, "{}", fingerprint(q, starters))?;
        for (i, (s, r)) in starters.iter().zip(results).enumerate() {
            writeln!(w, "{}", checkpoint_record(i, s, r.as_deref()))?;
        }
        w.flush()?;
    }
    std::fs::rename(tmp, path)
}

fn parse_ids(text: &str, line: usize) -> Result<Vec<u32>, SearchError> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| t.parse().map_err(|_| SearchError::Checkpoint { line, msg: format!("bad id {t:?}") }))
        .collect()
}

/// Reads finished results; later records for the same starter win.
fn read_checkpoint(
    path: &Path,
    geom: &UnitalGeometry,
    starters: &[StarterConfig],
) -> Result<Vec<Option<Vec<Spread>>>, SearchError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let mut next = |n: usize| -> Result<String, SearchError> {
        lines.next().transpose()?.ok_or(SearchError::Checkpoint { line: n, msg: "truncated".into() })
    };
    if next(1)? != CHECKPOINT_HEADER {
        return Err(SearchError::Checkpoint { line: 1, msg: "unknown header".into() });
    }
    let expect = fingerprint(geom.q(), starters);
    let got = next(2)?;
    if got != expect {
        return Err(SearchError::CheckpointMismatch(got));
    }
    let mut results: Vec<Option<Vec<Spread>>> = vec![None; starters.len()];
    let mut n = 2;
    while let Ok(line) = next(n + 1) {
        n += 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: &str| SearchError::Checkpoint { line: n, msg: msg.to_string() };
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        let mut parts = line.split(' ');
        let index: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| err("bad index"))?;
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(|| err("expected key=value"))?;
            fields.insert(k, v);
        }
        let starter = starters.get(index).ok_or_else(|| err("index out of range"))?;
        let included = parse_ids(fields.get("included").ok_or_else(|| err("missing included"))?, n)?;
        if included != starter.included {
            return Err(err("starter does not match"));
        }
        match *fields.get("status").ok_or_else(|| err("missing status"))? {
            "pending" => {}
            "done" => {
                let found = fields.get("found").copied().unwrap_or("");
                let mut spreads = Vec::new();
                for part in found.split(';').filter(|p| !p.is_empty()) {
                    let ids = parse_ids(part, n)?;
                    spreads.push(Spread::new(geom, ids).map_err(|e| err(&e.to_string()))?);
                }
                let count: usize = fields.get("spreads").and_then(|t| t.parse().ok()).ok_or_else(|| err("bad spreads"))?;
                if count != spreads.len() {
                    return Err(err("spread count mismatch"));
                }
                results[index] = Some(spreads);
            }
            _ => return Err(err("bad status")),
        }
    }
    Ok(results)
}

/// Runs the backtrack for every pending starter on `options.workers` threads.
///
/// With a checkpoint path, the full starter list is written first and each
/// finished starter is appended as it completes; the file is rewritten with
/// one record per starter when the run ends.
pub fn run_search(
    geom: &UnitalGeometry,
    starters: &[StarterConfig],
    options: &SearchOptions,
) -> Result<SearchOutcome, SearchError> {
    let q = geom.q();
    let mut results: Vec<Option<Vec<Spread>>> = match &options.checkpoint {
        Some(path) if options.resume && path.exists() => read_checkpoint(path, geom, starters)?,
        _ => vec![None; starters.len()],
    };
    if let Some(path) = &options.checkpoint {
        write_checkpoint(path, q, starters, &results)?;
    }
    let mut pending: Vec<usize> = (0..starters.len()).filter(|&i| results[i].is_none()).collect();
    if let Some(k) = options.stop_after {
        pending.truncate(k);
    }
    let log = match &options.checkpoint {
        Some(path) => Some(Mutex::new(BufWriter::new(OpenOptions::new().append(true).open(path)?))),
        None => None,
    };
    let conflicts = Conflicts::new(geom);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| SearchError::Pool(e.to_string()))?;
    let found: Vec<(usize, Vec<Spread>)> = pool.install(|| {
        pending
            .par_iter()
            .map(|&i| {
                let spreads = backtrack_with(geom, &conflicts, &starters[i]);
                if let Some(log) = &log {
                    let mut w = log.lock().expect("checkpoint lock");
                    writeln!(w, "{}", checkpoint_record(i, &starters[i], Some(&spreads)))?;
                    w.flush()?;
                }
                Ok((i, spreads))
            })
            .collect::<Result<_, std::io::Error>>()
    })?;
    drop(log);
    for (i, spreads) in found {
        results[i] = Some(spreads);
    }
    if let Some(path) = &options.checkpoint {
        write_checkpoint(path, q, starters, &results)?;
    }
    Ok(SearchOutcome { per_starter: results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::reference_regular_spread;
    use crate::field::{FieldSpec, FieldTable};

    fn setup(q: u32) -> (UnitalGeometry, UnitaryGroup) {
        let g = UnitalGeometry::build(FieldTable::build(FieldSpec::preset(q).unwrap()).unwrap());
        let grp = UnitaryGroup::build(&g).unwrap();
        (g, grp)
    }

    #[test]
    fn initial_starter_and_first_refinement() {
        let (g, grp) = setup(4);
        let root = StarterConfig::initial(&g, &grp);
        assert_eq!(root.included, vec![grp.anchor()]);
        assert_eq!(root.excluded.count_ones(..), 0);
        let children = refine(&g, &grp, &root).unwrap();
        let compatible: Vec<u32> = root.compatible(&g).ones().map(|x| x as u32).collect();
        let orbits = grp.setwise_stabilizer(&[grp.anchor()]).orbits(&compatible).unwrap();
        assert_eq!(children.len(), orbits.len());
        let mut sorted = orbits.clone();
        sorted.sort_by_key(|o| (o.len(), o[0]));
        for (j, child) in children.iter().enumerate() {
            assert!(child.included.contains(&sorted[j][0]));
            let later: usize = sorted[j + 1..].iter().map(Vec::len).sum();
            assert_eq!(child.excluded.count_ones(..), later);
        }
    }

    #[test]
    fn full_starter_yields_itself() {
        let (g, _) = setup(4);
        let reg = reference_regular_spread(&g);
        let s = StarterConfig { included: reg.lines().to_vec(), excluded: FixedBitSet::with_capacity(208) };
        assert_eq!(backtrack(&g, &s), vec![reg]);
    }

    #[test]
    fn everything_excluded_yields_nothing() {
        let (g, grp) = setup(4);
        let mut s = StarterConfig::initial(&g, &grp);
        s.excluded.insert_range(..);
        s.excluded.set(grp.anchor() as usize, false);
        assert!(backtrack(&g, &s).is_empty());
    }

    #[test]
    fn reference_search_is_distinct_and_deterministic() {
        let (g, _) = setup(4);
        let a = exhaustive_reference_search(&g).unwrap();
        let b = exhaustive_reference_search(&g).unwrap();
        assert_eq!(a, b);
        let mut d = a.clone();
        d.sort();
        d.dedup();
        assert_eq!(d.len(), a.len());
        let (g5, _) = setup(5);
        assert!(matches!(exhaustive_reference_search(&g5), Err(SearchError::TooLarge(5))));
    }

    #[test]
    fn starters_partition_their_stopping_rule() {
        let (g, grp) = setup(4);
        let starters = generate_starters(&g, &grp, DEFAULT_STARTER_LIMIT);
        for s in &starters {
            assert!(refine(&g, &grp, s).is_none());
            assert!(s.included.iter().all(|&x| !s.excluded.contains(x as usize)));
        }
    }

    #[test]
    fn parallel_run_matches_serial_and_checkpoint_resumes() {
        let (g, grp) = setup(4);
        let starters = generate_starters(&g, &grp, DEFAULT_STARTER_LIMIT);
        let serial = run_search(&g, &starters, &SearchOptions::default()).unwrap();
        let par = run_search(&g, &starters, &SearchOptions { workers: 4, ..Default::default() }).unwrap();
        assert_eq!(serial.spreads(), par.spreads());

        let dir = std::env::temp_dir().join(format!("unital-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.ckpt");
        let opts = SearchOptions { workers: 2, checkpoint: Some(path.clone()), resume: true, stop_after: Some(2) };
        let partial = run_search(&g, &starters, &opts).unwrap();
        assert_eq!(partial.completed(), 2.min(starters.len()));
        let resumed = run_search(&g, &starters, &SearchOptions { stop_after: None, ..opts }).unwrap();
        assert!(resumed.is_complete());
        assert_eq!(resumed.spreads(), serial.spreads());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
