//! File formats: `posts.jsonl`, `interactions.jsonl`, `friendships.csv`, the
//! propagation-graph dump and the feature CSVs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CascadeError, Result};
use crate::features::FeatureTable;
use crate::model::{
    CascadeDataset, EdgeAttrs, FriendshipStore, InteractionRecord, PostRecord, PropagationGraph,
    EARLY_FEATURE_NAMES, FINAL_FEATURE_NAMES,
};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CascadeError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CascadeError::io(path, e))
}

/// Parses one JSON object per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(r: impl BufRead, source: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| CascadeError::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| CascadeError::parse(source, i + 1, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(w: &mut impl Write, records: &[T]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut *w, r)?;
        w.write_all(b"\n").map_err(|e| CascadeError::io("<jsonl>", e))?;
    }
    Ok(())
}

pub fn read_posts(path: &Path) -> Result<Vec<PostRecord>> {
    read_jsonl(open(path)?, &path.display().to_string())
}

pub fn read_interactions(path: &Path) -> Result<Vec<InteractionRecord>> {
    read_jsonl(open(path)?, &path.display().to_string())
}

/// Reads raw `user_id,friend_id` rows (header required).
pub fn read_friendship_rows(r: impl Read, source: &str) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        // a completely empty file has no rows
        return Ok(Vec::new());
    }
    if headers.len() != 2 || &headers[0] != "user_id" || &headers[1] != "friend_id" {
        return Err(CascadeError::parse(source, 1, "expected header \"user_id,friend_id\""));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            CascadeError::parse(source, line, e.to_string())
        })?;
        rows.push((rec[0].to_string(), rec[1].to_string()));
    }
    Ok(rows)
}

pub fn read_friendships(path: &Path) -> Result<FriendshipStore> {
    let rows = read_friendship_rows(open(path)?, &path.display().to_string())?;
    Ok(FriendshipStore::from_rows(rows))
}

/// Writes both directions of every friendship, sorted.
pub fn write_friendships(w: &mut impl Write, store: &FriendshipStore) -> Result<()> {
    let mut rows: Vec<(&str, &str)> = store.edges().into_iter().flat_map(|(a, b)| [(a, b), (b, a)]).collect();
    rows.sort_unstable();
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["user_id", "friend_id"])?;
    for (a, b) in rows {
        wtr.write_record([a, b])?;
    }
    wtr.flush().map_err(|e| CascadeError::io("<friendships>", e))?;
    Ok(())
}

pub struct DatasetPaths<'a> {
    pub posts: &'a Path,
    pub interactions: &'a Path,
    pub friendships: &'a Path,
}

pub fn load_dataset(paths: &DatasetPaths<'_>) -> Result<CascadeDataset> {
    Ok(CascadeDataset {
        posts: read_posts(paths.posts)?,
        interactions: read_interactions(paths.interactions)?,
        friends: read_friendships(paths.friendships)?,
    })
}

pub fn save_dataset(ds: &CascadeDataset, paths: &DatasetPaths<'_>) -> Result<()> {
    let mut w = create(paths.posts)?;
    write_jsonl(&mut w, &ds.posts)?;
    w.flush().map_err(|e| CascadeError::io(paths.posts, e))?;
    let mut w = create(paths.interactions)?;
    write_jsonl(&mut w, &ds.interactions)?;
    w.flush().map_err(|e| CascadeError::io(paths.interactions, e))?;
    let mut w = create(paths.friendships)?;
    write_friendships(&mut w, &ds.friends)?;
    w.flush().map_err(|e| CascadeError::io(paths.friendships, e))
}

fn check_token(id: &str) -> Result<()> {
    if id.is_empty() || id.contains(',') || id.chars().any(char::is_whitespace) {
        return Err(CascadeError::InvalidParams(format!("id {id:?} cannot be written to a graph dump")));
    }
    Ok(())
}

/// Graph dump: a `# post_id seed_id n_vertices` header followed by one
/// `u,v,type,time_seconds|null` line per edge. Several graphs may be
/// concatenated.
pub fn write_graph_dump(w: &mut impl Write, g: &PropagationGraph) -> Result<()> {
    let io = |e| CascadeError::io("<graph dump>", e);
    check_token(g.post_id())?;
    check_token(g.seed_id())?;
    writeln!(w, "# {} {} {}", g.post_id(), g.seed_id(), g.vertex_count()).map_err(io)?;
    for e in g.edges() {
        check_token(e.u)?;
        check_token(e.v)?;
        match e.time {
            Some(t) => writeln!(w, "{},{},{},{}", e.u, e.v, e.kind.as_str(), t),
            None => writeln!(w, "{},{},{},null", e.u, e.v, e.kind.as_str()),
        }
        .map_err(io)?;
    }
    Ok(())
}

pub fn parse_graph_dump(text: &str) -> Result<Vec<PropagationGraph>> {
    const SRC: &str = "<graph dump>";
    let mut graphs: Vec<(PropagationGraph, usize, usize)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let parts: Vec<&str> = header.split_whitespace().collect();
            let [post, seed, n] = parts[..] else {
                return Err(CascadeError::parse(SRC, line_no, "header must be '# post_id seed_id n_vertices'"));
            };
            let n: usize = n.parse().map_err(|_| CascadeError::parse(SRC, line_no, "bad vertex count"))?;
            graphs.push((PropagationGraph::new(post, seed), n, line_no));
            continue;
        }
        let Some((g, _, _)) = graphs.last_mut() else {
            return Err(CascadeError::parse(SRC, line_no, "edge before header"));
        };
        let fields: Vec<&str> = line.split(',').collect();
        let [u, v, kind, time] = fields[..] else {
            return Err(CascadeError::parse(SRC, line_no, "edge must be 'u,v,type,time'"));
        };
        let kind = kind.parse().map_err(|e: String| CascadeError::parse(SRC, line_no, e))?;
        let time = match time {
            "null" => None,
            t => Some(t.parse::<u64>().map_err(|_| CascadeError::parse(SRC, line_no, "bad edge time"))?),
        };
        if u == v {
            return Err(CascadeError::parse(SRC, line_no, "self-loop"));
        }
        if !g.add_edge(u, v, EdgeAttrs { kind, time }) {
            return Err(CascadeError::parse(SRC, line_no, "duplicate edge"));
        }
    }
    graphs
        .into_iter()
        .map(|(g, n, line)| {
            if g.vertex_count() != n {
                Err(CascadeError::parse(SRC, line, format!("header says {n} vertices, edges imply {}", g.vertex_count())))
            } else {
                Ok(g)
            }
        })
        .collect()
}

fn comment_line(w: &mut impl Write, comment: Option<&str>) -> Result<()> {
    if let Some(c) = comment {
        writeln!(w, "# {c}").map_err(|e| CascadeError::io("<csv>", e))?;
    }
    Ok(())
}

/// `post_id,label,<28 final-stage features>`; an optional leading
/// `# comment` line carries provenance.
pub fn write_final_features(w: &mut impl Write, table: &FeatureTable, comment: Option<&str>) -> Result<()> {
    comment_line(w, comment)?;
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["post_id", "label"];
    header.extend(FINAL_FEATURE_NAMES);
    wtr.write_record(&header)?;
    for p in &table.posts {
        let mut rec = vec![p.post_id.clone(), p.label.to_string()];
        rec.extend(p.final_vector.values().iter().map(f64::to_string));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| CascadeError::io("<csv>", e))?;
    Ok(())
}

/// `post_id,label,delta_minutes,<18 early-stage features>` for each δ given.
pub fn write_early_features(
    w: &mut impl Write,
    table: &FeatureTable,
    deltas: &[u32],
    comment: Option<&str>,
) -> Result<()> {
    comment_line(w, comment)?;
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["post_id", "label", "delta_minutes"];
    header.extend(EARLY_FEATURE_NAMES);
    wtr.write_record(&header)?;
    for &delta in deltas {
        if delta == 0 || delta % table.step_minutes != 0 || delta > table.horizon_minutes {
            return Err(CascadeError::InvalidStep { step: table.step_minutes, horizon: delta });
        }
        let n = (delta / table.step_minutes) as usize;
        for p in &table.posts {
            let v = p.series.early_vector(n)?;
            let mut rec = vec![p.post_id.clone(), p.label.to_string(), delta.to_string()];
            rec.extend(v.values().iter().map(f64::to_string));
            wtr.write_record(&rec)?;
        }
    }
    wtr.flush().map_err(|e| CascadeError::io("<csv>", e))?;
    Ok(())
}
