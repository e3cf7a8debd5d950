//! Dataset ingestion, synthetic fixtures, exports and run reports.

mod report;
mod synth;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Layer, LayerWeights, LayeredGraph, WeightedGraph};
use crate::model::{AgentId, AgentProfile, BigFive, Demographics, Item, ItemCatalog, ItemId, StructuralAttributes};
use crate::Real;

pub use report::{compare_runs, report, write_metrics_csv, MetricRow, Report, METRICS_HEADER};
pub use synth::{synth_population, SyntheticFixture, GENRES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRow {
    pub user_id: u32,
    pub item_id: ItemId,
    pub rating: u8,
    pub timestamp: i64,
}

/// Ratings after deduplication.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingSet {
    pub rows: Vec<RatingRow>,
    /// Rows dropped because a later rating of the same pair superseded them.
    pub duplicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: AgentId,
    pub attributes: StructuralAttributes,
    pub demographics: Demographics,
}

fn schema(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn reader(path: &Path, expected: &[&str]) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers().map_err(|e| schema(path, 1, e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(schema(path, 1, format!("expected header {:?}, found {:?}", expected.join(","), got.join(","))));
    }
    Ok(rdr)
}

fn records(path: &Path, expected: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rdr = reader(path, expected)?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| schema(path, line, e.to_string()))?;
        if rec.len() != expected.len() {
            return Err(schema(path, line, format!("expected {} fields, found {}", expected.len(), rec.len())));
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(path: &Path, line: usize, field: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| schema(path, line, format!("cannot parse `{raw}` as {field}")))
}

fn parse_opt<T: std::str::FromStr>(path: &Path, line: usize, field: &str, raw: &str) -> Result<Option<T>> {
    if raw.is_empty() {
        Ok(None)
    } else {
        parse(path, line, field, raw).map(Some)
    }
}

fn opt_string(raw: &str) -> Option<String> {
    (!raw.is_empty()).then(|| raw.to_string())
}

pub const RATINGS_HEADER: [&str; 4] = ["user_id", "item_id", "rating", "timestamp"];
pub const ITEMS_HEADER: [&str; 7] = ["item_id", "title", "genres", "language", "length_minutes", "age_rating", "embedding"];
pub const NODES_HEADER: [&str; 8] =
    ["node_id", "occupation_id", "age_group_id", "education_id", "language", "gender", "location", "age_group"];
pub const LABELS_HEADER: [&str; 6] = ["user_id", "o", "c", "e", "a", "n"];
pub const PROFILES_HEADER: [&str; 10] = ["node_id", "t1", "t2", "t3", "t4", "b1", "b2", "b3", "b4", "b5"];
pub const GRAPH_HEADER: [&str; 4] = ["u", "v", "layer", "weight"];

/// Loads ratings, keeping the latest timestamp per (user, item).
///
/// Ratings of items missing from `items` are rejected.
pub fn load_ratings(path: &Path, items: &ItemCatalog) -> Result<RatingSet> {
    let mut latest: BTreeMap<(u32, ItemId), (i64, usize, RatingRow)> = BTreeMap::new();
    let mut duplicates = 0;
    for (line, rec) in records(path, &RATINGS_HEADER)? {
        let row = RatingRow {
            user_id: parse(path, line, "user_id", &rec[0])?,
            item_id: ItemId(parse(path, line, "item_id", &rec[1])?),
            rating: parse(path, line, "rating", &rec[2])?,
            timestamp: parse(path, line, "timestamp", &rec[3])?,
        };
        if !(1..=5).contains(&row.rating) {
            return Err(schema(path, line, format!("rating {} outside 1..5", row.rating)));
        }
        if items.get(row.item_id).is_none() {
            return Err(Error::DanglingReference {
                path: path.to_path_buf(),
                id: format!("item {}", row.item_id.0),
            });
        }
        let key = (row.user_id, row.item_id);
        match latest.get(&key) {
            Some(&(ts, _, _)) => {
                duplicates += 1;
                if row.timestamp >= ts {
                    latest.insert(key, (row.timestamp, line, row));
                }
            }
            None => {
                latest.insert(key, (row.timestamp, line, row));
            }
        }
    }
    if duplicates > 0 {
        warn!("{}: {duplicates} duplicate ratings resolved by latest timestamp", path.display());
    }
    let mut rows: Vec<(usize, RatingRow)> = latest.into_values().map(|(_, line, r)| (line, r)).collect();
    rows.sort_by_key(|&(line, _)| line);
    Ok(RatingSet {
        rows: rows.into_iter().map(|(_, r)| r).collect(),
        duplicates,
    })
}

fn normalize(mut v: Vec<Real>) -> Vec<Real> {
    let n = v.iter().map(|x| x * x).sum::<Real>().sqrt();
    if n > 0.0 {
        for x in &mut v {
            *x /= n;
        }
    }
    v
}

/// Loads item metadata. Genres are `|`-separated, embeddings `;`-separated
/// and normalized to unit length. Rating statistics start empty; see
/// [`with_rating_stats`].
pub fn load_items(path: &Path) -> Result<ItemCatalog> {
    let mut items = Vec::new();
    let mut dim = None;
    for (line, rec) in records(path, &ITEMS_HEADER)? {
        let embedding: Vec<Real> = if rec[6].is_empty() {
            Vec::new()
        } else {
            rec[6].split(';').map(|x| parse(path, line, "embedding", x.trim())).collect::<Result<_>>()?
        };
        match dim {
            None => dim = Some(embedding.len()),
            Some(d) if d != embedding.len() => {
                return Err(schema(path, line, format!("embedding has {} dims, expected {d}", embedding.len())));
            }
            _ => {}
        }
        let length_minutes: Real = parse(path, line, "length_minutes", &rec[4])?;
        if !(length_minutes > 0.0) {
            return Err(schema(path, line, "length_minutes must be positive"));
        }
        items.push(Item {
            id: ItemId(parse(path, line, "item_id", &rec[0])?),
            title: rec[1].to_string(),
            genres: rec[2].split('|').map(|g| g.trim().to_lowercase()).filter(|g| !g.is_empty()).collect(),
            language: rec[3].to_string(),
            length_minutes,
            age_rating: parse(path, line, "age_rating", &rec[5])?,
            embedding: normalize(embedding),
            rating_mean: 0.0,
            rating_var: 0.0,
            popularity: 0,
        });
    }
    ItemCatalog::new(items)
}

/// Fills per-item rating mean, variance and rater count from `ratings`.
pub fn with_rating_stats(catalog: ItemCatalog, ratings: &[RatingRow]) -> Result<ItemCatalog> {
    let mut items = catalog.into_items();
    let mut acc: Vec<Vec<Real>> = vec![Vec::new(); items.len()];
    for r in ratings {
        acc.get_mut(r.item_id.index()).ok_or(Error::UnknownItem(r.item_id))?.push(Real::from(r.rating));
    }
    for (item, rs) in items.iter_mut().zip(&acc) {
        item.popularity = rs.len() as u32;
        if rs.is_empty() {
            item.rating_mean = 0.0;
            item.rating_var = 0.0;
        } else {
            let n = rs.len() as Real;
            item.rating_mean = rs.iter().sum::<Real>() / n;
            item.rating_var = rs.iter().map(|x| (x - item.rating_mean).powi(2)).sum::<Real>() / n;
        }
    }
    ItemCatalog::new(items)
}

/// Loads node attributes; ids must be dense from 0. Degree is filled from the edge list later.
pub fn load_nodes(path: &Path) -> Result<Vec<NodeRecord>> {
    let mut nodes = Vec::new();
    for (line, rec) in records(path, &NODES_HEADER)? {
        let id: u32 = parse(path, line, "node_id", &rec[0])?;
        nodes.push((
            line,
            NodeRecord {
                id: AgentId(id),
                attributes: StructuralAttributes {
                    degree: 0,
                    occupation_id: parse_opt(path, line, "occupation_id", &rec[1])?,
                    age_group_id: parse(path, line, "age_group_id", &rec[2])?,
                    education_id: parse_opt(path, line, "education_id", &rec[3])?,
                },
                demographics: Demographics {
                    language: opt_string(&rec[4]),
                    gender: opt_string(&rec[5]),
                    location: opt_string(&rec[6]),
                    age_group: parse_opt(path, line, "age_group", &rec[7])?,
                },
            },
        ));
    }
    nodes.sort_by_key(|(_, n)| n.id);
    for (pos, (line, n)) in nodes.iter().enumerate() {
        if n.id.index() != pos {
            return Err(schema(path, *line, format!("node ids must be contiguous from 0; found {} at position {pos}", n.id.0)));
        }
    }
    Ok(nodes.into_iter().map(|(_, n)| n).collect())
}

/// Loads a whitespace-separated undirected edge list over `n` nodes.
///
/// Blank lines and `#` comments are skipped; self loops and duplicates are dropped.
pub fn load_edges(path: &Path, n: usize) -> Result<Vec<(u32, u32)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut set = BTreeSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let parts: Vec<&str> = body.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(schema(path, line, format!("expected `u v`, found `{body}`")));
        }
        let u: u32 = parse(path, line, "u", parts[0])?;
        let v: u32 = parse(path, line, "v", parts[1])?;
        for id in [u, v] {
            if id as usize >= n {
                return Err(Error::DanglingReference {
                    path: path.to_path_buf(),
                    id: format!("node {id}"),
                });
            }
        }
        if u != v {
            set.insert((u.min(v), u.max(v)));
        }
    }
    Ok(set.into_iter().collect())
}

/// Loads Big-Five labels keyed by user id.
pub fn load_labels(path: &Path) -> Result<BTreeMap<u32, [Real; 5]>> {
    let mut out = BTreeMap::new();
    for (line, rec) in records(path, &LABELS_HEADER)? {
        let id: u32 = parse(path, line, "user_id", &rec[0])?;
        let mut b = [0.0; 5];
        for k in 0..5 {
            b[k] = parse(path, line, LABELS_HEADER[k + 1], &rec[k + 1])?;
            if !(0.0..=1.0).contains(&b[k]) {
                return Err(schema(path, line, format!("trait `{}` outside [0, 1]", LABELS_HEADER[k + 1])));
            }
        }
        out.insert(id, b);
    }
    Ok(out)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidInput(format!("{}: {other:?}", path.display())),
    })
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidInput(format!("{}: {other:?}", path.display())),
    }
}

fn opt_cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per agent: `node_id,t1..t4,b1..b5`.
pub fn write_profiles_csv(path: &Path, profiles: &[AgentProfile]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(PROFILES_HEADER).map_err(|e| csv_err(path, e))?;
    for p in profiles {
        let mut row = vec![
            p.id.0.to_string(),
            p.t.degree.to_string(),
            opt_cell(p.t.occupation_id),
            p.t.age_group_id.to_string(),
            opt_cell(p.t.education_id),
        ];
        row.extend(p.b.0.iter().map(|x| x.to_string()));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a profiles CSV back into `(attributes, traits)` per node id.
pub fn load_profiles_csv(path: &Path) -> Result<Vec<(AgentId, StructuralAttributes, BigFive)>> {
    let mut out = Vec::new();
    for (line, rec) in records(path, &PROFILES_HEADER)? {
        let id = AgentId(parse(path, line, "node_id", &rec[0])?);
        let t = StructuralAttributes {
            degree: parse(path, line, "t1", &rec[1])?,
            occupation_id: parse_opt(path, line, "t2", &rec[2])?,
            age_group_id: parse(path, line, "t3", &rec[3])?,
            education_id: parse_opt(path, line, "t4", &rec[4])?,
        };
        let mut b = [0.0; 5];
        for k in 0..5 {
            b[k] = parse(path, line, PROFILES_HEADER[k + 5], &rec[k + 5])?;
        }
        let b = BigFive::new(b).map_err(|e| schema(path, line, e.to_string()))?;
        out.push((id, t, b));
    }
    Ok(out)
}

fn layer_name(l: Option<Layer>) -> &'static str {
    l.map_or("unified", Layer::name)
}

/// Writes every materialized edge of each layer and of the unified graph.
pub fn write_graph_csv(path: &Path, graph: &LayeredGraph<Real>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(GRAPH_HEADER).map_err(|e| csv_err(path, e))?;
    let sections: Vec<(Option<Layer>, &WeightedGraph<Real>)> = Layer::ALL
        .iter()
        .map(|&l| (Some(l), graph.layer(l)))
        .chain(std::iter::once((None, graph.unified())))
        .collect();
    for (layer, g) in sections {
        for (u, v, x) in g.edges() {
            w.write_record([u.to_string(), v.to_string(), layer_name(layer).to_string(), x.to_string()])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Rebuilds a layered graph from [`write_graph_csv`] output. The unified
/// layer is re-derived from the three layers and checked against the file.
pub fn load_graph_csv(path: &Path, n: usize, weights: LayerWeights<Real>) -> Result<LayeredGraph<Real>> {
    let mut layers = [WeightedGraph::new(n), WeightedGraph::new(n), WeightedGraph::new(n)];
    let mut unified = WeightedGraph::new(n);
    for (line, rec) in records(path, &GRAPH_HEADER)? {
        let u: usize = parse(path, line, "u", &rec[0])?;
        let v: usize = parse(path, line, "v", &rec[1])?;
        if u >= n || v >= n {
            return Err(Error::DanglingReference {
                path: path.to_path_buf(),
                id: format!("node {}", u.max(v)),
            });
        }
        let w: Real = parse(path, line, "weight", &rec[3])?;
        match &rec[2] {
            "interest" => layers[0].set(u, v, w),
            "personality" => layers[1].set(u, v, w),
            "structural" => layers[2].set(u, v, w),
            "unified" => unified.set(u, v, w),
            other => return Err(schema(path, line, format!("unknown layer `{other}`"))),
        }
    }
    let [i, p, s] = layers;
    let g = LayeredGraph::new(i, p, s, weights)?;
    for (u, v, w) in unified.edges() {
        if (g.unified().get(u as usize, v as usize) - w).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "{}: unified weight of ({u}, {v}) does not match its layers",
                path.display()
            )));
        }
    }
    Ok(g)
}

/// Writes an items CSV in the format read by [`load_items`].
pub fn write_items_csv(path: &Path, items: &ItemCatalog) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(ITEMS_HEADER).map_err(|e| csv_err(path, e))?;
    for it in items.iter() {
        let genres: Vec<&str> = it.genres.iter().map(String::as_str).collect();
        let emb: Vec<String> = it.embedding.iter().map(|x| x.to_string()).collect();
        w.write_record([
            it.id.0.to_string(),
            it.title.clone(),
            genres.join("|"),
            it.language.clone(),
            it.length_minutes.to_string(),
            it.age_rating.to_string(),
            emb.join(";"),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_ratings_csv(path: &Path, ratings: &[RatingRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(RATINGS_HEADER).map_err(|e| csv_err(path, e))?;
    for r in ratings {
        w.write_record([r.user_id.to_string(), r.item_id.0.to_string(), r.rating.to_string(), r.timestamp.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_nodes_csv(path: &Path, nodes: &[NodeRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(NODES_HEADER).map_err(|e| csv_err(path, e))?;
    for n in nodes {
        let d = &n.demographics;
        w.write_record([
            n.id.0.to_string(),
            opt_cell(n.attributes.occupation_id),
            n.attributes.age_group_id.to_string(),
            opt_cell(n.attributes.education_id),
            opt_cell(d.language.clone()),
            opt_cell(d.gender.clone()),
            opt_cell(d.location.clone()),
            opt_cell(d.age_group),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_edges(path: &Path, edges: &[(u32, u32)]) -> Result<()> {
    let mut s = String::new();
    for (u, v) in edges {
        s.push_str(&format!("{u} {v}\n"));
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn write_labels_csv(path: &Path, labels: &BTreeMap<u32, [Real; 5]>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(LABELS_HEADER).map_err(|e| csv_err(path, e))?;
    for (id, b) in labels {
        let mut row = vec![id.to_string()];
        row.extend(b.iter().map(|x| x.to_string()));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn items_fixture(dir: &Path) -> ItemCatalog {
        let p = write(
            dir,
            "items.csv",
            "item_id,title,genres,language,length_minutes,age_rating,embedding\n\
             0,Alpha,Drama|War,en,120,0,3;4\n\
             1,Beta,Comedy,fr,95,2,1;0\n\
             2,Gamma,,en,100,0,\n",
        );
        let p2 = write(
            dir,
            "items2.csv",
            "item_id,title,genres,language,length_minutes,age_rating,embedding\n\
             0,Alpha,Drama|War,en,120,0,3;4\n\
             1,Beta,Comedy,fr,95,2,1;0\n\
             2,Gamma,,en,100,0,0;0\n",
        );
        assert!(matches!(load_items(&p), Err(Error::Schema { line: 4, .. })));
        load_items(&p2).unwrap()
    }

    #[test]
    fn items_are_parsed_and_normalized() {
        let dir = tempfile::tempdir().unwrap();
        let c = items_fixture(dir.path());
        assert_eq!(c.len(), 3);
        let a = c.get(ItemId(0)).unwrap();
        assert_eq!(a.embedding, vec![0.6, 0.8]);
        assert!(a.genres.contains("war"));
        assert_eq!(c.get(ItemId(2)).unwrap().embedding, vec![0.0, 0.0]);
    }

    #[test]
    fn ratings_three_lines() {
        let dir = tempfile::tempdir().unwrap();
        let c = items_fixture(dir.path());
        let p = write(dir.path(), "r.csv", "user_id,item_id,rating,timestamp\n0,0,4,10\n0,1,2,11\n1,2,5,12\n");
        let r = load_ratings(&p, &c).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.duplicates, 0);
    }

    #[test]
    fn ratings_dangling_item() {
        let dir = tempfile::tempdir().unwrap();
        let c = items_fixture(dir.path());
        let p = write(dir.path(), "r.csv", "user_id,item_id,rating,timestamp\n0,7,4,10\n");
        assert!(matches!(load_ratings(&p, &c), Err(Error::DanglingReference { .. })));
    }

    #[test]
    fn ratings_last_timestamp_wins() {
        let dir = tempfile::tempdir().unwrap();
        let c = items_fixture(dir.path());
        let p = write(
            dir.path(),
            "r.csv",
            "user_id,item_id,rating,timestamp\n0,0,4,30\n0,0,1,10\n0,0,2,20\n1,0,3,5\n",
        );
        let r = load_ratings(&p, &c).unwrap();
        assert_eq!(r.duplicates, 2);
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.rows[0].rating, 4);
    }

    #[test]
    fn ratings_schema_errors_carry_line() {
        let dir = tempfile::tempdir().unwrap();
        let c = items_fixture(dir.path());
        let bad_header = write(dir.path(), "h.csv", "user,item,rating,ts\n0,0,4,1\n");
        assert!(matches!(load_ratings(&bad_header, &c), Err(Error::Schema { line: 1, .. })));
        let bad_value = write(dir.path(), "v.csv", "user_id,item_id,rating,timestamp\n0,0,4,1\n0,1,x,2\n");
        assert!(matches!(load_ratings(&bad_value, &c), Err(Error::Schema { line: 3, .. })));
        let out_of_range = write(dir.path(), "o.csv", "user_id,item_id,rating,timestamp\n0,0,9,1\n");
        assert!(matches!(load_ratings(&out_of_range, &c), Err(Error::Schema { line: 2, .. })));
    }

    #[test]
    fn rating_stats() {
        let dir = tempfile::tempdir().unwrap();
        let c = items_fixture(dir.path());
        let rows = vec![
            RatingRow { user_id: 0, item_id: ItemId(0), rating: 4, timestamp: 0 },
            RatingRow { user_id: 1, item_id: ItemId(0), rating: 2, timestamp: 0 },
        ];
        let c = with_rating_stats(c, &rows).unwrap();
        let a = c.get(ItemId(0)).unwrap();
        assert_eq!((a.rating_mean, a.rating_var, a.popularity), (3.0, 1.0, 2));
        assert_eq!(c.get(ItemId(1)).unwrap().popularity, 0);
    }

    #[test]
    fn nodes_and_edges() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = write(
            dir.path(),
            "n.csv",
            "node_id,occupation_id,age_group_id,education_id,language,gender,location,age_group\n\
             1,3,2,,en,f,x,2\n0,,1,4,zh,m,y,1\n",
        );
        let n = load_nodes(&nodes).unwrap();
        assert_eq!(n.len(), 2);
        assert_eq!(n[0].attributes.occupation_id, None);
        assert_eq!(n[1].demographics.language.as_deref(), Some("en"));
        let edges = write(dir.path(), "e.txt", "# comment\n0 1\n1 0\n\n1 1\n");
        assert_eq!(load_edges(&edges, 2).unwrap(), vec![(0, 1)]);
        let dangling = write(dir.path(), "d.txt", "0 5\n");
        assert!(matches!(load_edges(&dangling, 2), Err(Error::DanglingReference { .. })));
        let malformed = write(dir.path(), "m.txt", "0 1\n0 1 2\n");
        assert!(matches!(load_edges(&malformed, 2), Err(Error::Schema { line: 2, .. })));
        let gap = write(
            dir.path(),
            "g.csv",
            "node_id,occupation_id,age_group_id,education_id,language,gender,location,age_group\n0,1,1,1,en,f,x,1\n2,1,1,1,en,f,x,1\n",
        );
        assert!(matches!(load_nodes(&gap), Err(Error::Schema { .. })));
    }

    #[test]
    fn labels_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let labels: BTreeMap<u32, [Real; 5]> = [(3, [0.1, 0.2, 0.3, 0.4, 0.5]), (9, [0.9; 5])].into_iter().collect();
        let p = dir.path().join("labels.csv");
        write_labels_csv(&p, &labels).unwrap();
        assert_eq!(load_labels(&p).unwrap(), labels);
        let bad = write(dir.path(), "b.csv", "user_id,o,c,e,a,n\n0,0.1,0.2,1.5,0.1,0.1\n");
        assert!(matches!(load_labels(&bad), Err(Error::Schema { line: 2, .. })));
    }
}
