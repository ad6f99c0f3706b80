//! Temporal grid records and yearly snapshots.
//!
//! Substations and lines carry a commissioning year and an optional
//! decommissioning year. An element is active in year `y` iff
//! `commissioned <= y < decommissioned`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};

use crate::error::{Error, Result};
use crate::graph::Snapshot;

pub const NODE_HEADER: [&str; 7] = [
    "id",
    "name",
    "commissioned",
    "decommissioned",
    "voltage_kv",
    "lat",
    "lon",
];
pub const EDGE_HEADER: [&str; 6] = [
    "id",
    "from_id",
    "to_id",
    "commissioned",
    "decommissioned",
    "voltage_kv",
];

pub const NODES_FILE: &str = "nodes.csv";
pub const EDGES_FILE: &str = "edges.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lifetime {
    pub commissioned: i32,
    pub decommissioned: Option<i32>,
}

impl Lifetime {
    pub fn new(commissioned: i32, decommissioned: Option<i32>) -> Self {
        Self {
            commissioned,
            decommissioned,
        }
    }

    pub fn active_in(&self, year: i32) -> bool {
        self.commissioned <= year && self.decommissioned.map_or(true, |d| year < d)
    }

    /// Whether `self` lies within `outer`.
    pub fn within(&self, outer: &Lifetime) -> bool {
        let end_ok = match (self.decommissioned, outer.decommissioned) {
            (_, None) => true,
            (Some(a), Some(b)) => a <= b,
            (None, Some(_)) => false,
        };
        outer.commissioned <= self.commissioned && end_ok
    }
}

/// A substation.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub id: String,
    pub name: String,
    pub lifetime: Lifetime,
    pub voltage_kv: Option<f64>,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
}

/// A power line between two substations.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub id: String,
    pub from: String,
    pub to: String,
    pub lifetime: Lifetime,
    pub voltage_kv: Option<f64>,
}

impl NodeRecord {
    pub fn new(id: impl Into<String>, commissioned: i32, decommissioned: Option<i32>) -> Self {
        Self {
            id: id.into(),
            name: String::new(),
            lifetime: Lifetime::new(commissioned, decommissioned),
            voltage_kv: None,
            lat: None,
            lon: None,
        }
    }
}

impl EdgeRecord {
    pub fn new(
        id: impl Into<String>,
        from: impl Into<String>,
        to: impl Into<String>,
        commissioned: i32,
        decommissioned: Option<i32>,
    ) -> Self {
        Self {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            lifetime: Lifetime::new(commissioned, decommissioned),
            voltage_kv: None,
        }
    }
}

/// Validated set of node and edge records, each sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalDataset {
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
}

impl TemporalDataset {
    pub fn new(mut nodes: Vec<NodeRecord>, mut edges: Vec<EdgeRecord>) -> Result<Self> {
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in nodes.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicateId {
                    kind: "node",
                    id: pair[0].id.clone(),
                });
            }
        }
        for pair in edges.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicateId {
                    kind: "edge",
                    id: pair[0].id.clone(),
                });
            }
        }
        let check_interval = |id: &str, l: &Lifetime| match l.decommissioned {
            Some(d) if d < l.commissioned => Err(Error::InvalidInterval {
                id: id.to_string(),
                commissioned: l.commissioned,
                decommissioned: d,
            }),
            _ => Ok(()),
        };
        for n in &nodes {
            check_interval(&n.id, &n.lifetime)?;
        }
        let by_id: HashMap<&str, &NodeRecord> = nodes.iter().map(|n| (n.id.as_str(), n)).collect();
        for e in &edges {
            check_interval(&e.id, &e.lifetime)?;
            if e.from == e.to {
                return Err(Error::SelfLoop {
                    edge: e.id.clone(),
                    node: e.from.clone(),
                });
            }
            for end in [&e.from, &e.to] {
                let Some(node) = by_id.get(end.as_str()) else {
                    return Err(Error::DanglingEndpoint {
                        edge: e.id.clone(),
                        node: end.clone(),
                    });
                };
                if !e.lifetime.within(&node.lifetime) {
                    log::warn!(
                        "edge `{}` is active outside the lifetime of node `{}`; it is dropped from snapshots in those years",
                        e.id,
                        end
                    );
                }
            }
        }
        Ok(Self { nodes, edges })
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    /// `(first commissioning year, last year any event is recorded)`.
    pub fn year_range(&self) -> Option<(i32, i32)> {
        let lifetimes = self
            .nodes
            .iter()
            .map(|n| n.lifetime)
            .chain(self.edges.iter().map(|e| e.lifetime));
        lifetimes.fold(None, |acc, l| {
            let last = l.decommissioned.unwrap_or(l.commissioned).max(l.commissioned);
            Some(match acc {
                None => (l.commissioned, last),
                Some((lo, hi)) => (lo.min(l.commissioned), hi.max(last)),
            })
        })
    }

    /// Years in which any element is commissioned or decommissioned.
    pub fn event_years(&self) -> BTreeSet<i32> {
        let mut years = BTreeSet::new();
        let lifetimes = self
            .nodes
            .iter()
            .map(|n| n.lifetime)
            .chain(self.edges.iter().map(|e| e.lifetime));
        for l in lifetimes {
            years.insert(l.commissioned);
            if let Some(d) = l.decommissioned {
                years.insert(d);
            }
        }
        years
    }
}

fn malformed(file: &str, line: u64, field: &str, message: impl Into<String>) -> Error {
    Error::MalformedRow {
        file: file.to_string(),
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

struct Row<'a> {
    file: &'a str,
    line: u64,
    header: &'a [&'a str],
    record: StringRecord,
}

impl Row<'_> {
    fn text(&self, col: usize) -> &str {
        self.record.get(col).unwrap_or("")
    }

    fn required(&self, col: usize) -> Result<String> {
        let v = self.text(col);
        if v.is_empty() {
            return Err(malformed(self.file, self.line, self.header[col], "value is required"));
        }
        Ok(v.to_string())
    }

    fn year(&self, col: usize) -> Result<Option<i32>> {
        let v = self.text(col);
        if v.is_empty() {
            return Ok(None);
        }
        if v.len() != 4 || !v.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed(
                self.file,
                self.line,
                self.header[col],
                format!("`{v}` is not a 4-digit year"),
            ));
        }
        Ok(Some(v.parse().expect("four ASCII digits")))
    }

    fn number(&self, col: usize) -> Result<Option<f64>> {
        let v = self.text(col);
        if v.is_empty() {
            return Ok(None);
        }
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(malformed(
                self.file,
                self.line,
                self.header[col],
                format!("`{v}` is not a number"),
            )),
        }
    }

    fn voltage(&self, col: usize) -> Result<Option<f64>> {
        match self.number(col)? {
            Some(v) if v <= 0.0 => Err(malformed(
                self.file,
                self.line,
                self.header[col],
                format!("voltage must be positive, got {v}"),
            )),
            other => Ok(other),
        }
    }

    fn lifetime(&self, col: usize) -> Result<Lifetime> {
        let commissioned = self
            .year(col)?
            .ok_or_else(|| malformed(self.file, self.line, self.header[col], "value is required"))?;
        Ok(Lifetime::new(commissioned, self.year(col + 1)?))
    }
}

fn read_rows<R: Read>(reader: R, file: &str, header: &[&str]) -> Result<Vec<(u64, StringRecord)>> {
    let mut rdr = ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(Trim::All)
        .from_reader(reader);
    let found = rdr.headers().map_err(|e| csv_error(file, e))?.clone();
    let names: Vec<&str> = found.iter().collect();
    if names != header {
        return Err(Error::BadHeader {
            file: file.to_string(),
            message: format!("expected `{}`, found `{}`", header.join(","), names.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(file, e))?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push((line, record));
    }
    Ok(rows)
}

fn csv_error(file: &str, e: csv::Error) -> Error {
    match e.position() {
        Some(pos) => malformed(file, pos.line(), "<row>", e.to_string()),
        None => Error::Csv(e),
    }
}

/// Parses `nodes.csv` and `edges.csv` streams into a validated dataset.
pub fn parse_dataset<N: Read, E: Read>(nodes: N, edges: E) -> Result<TemporalDataset> {
    let mut node_records = Vec::new();
    let mut node_seen = HashSet::new();
    for (line, record) in read_rows(nodes, NODES_FILE, &NODE_HEADER)? {
        let row = Row {
            file: NODES_FILE,
            line,
            header: &NODE_HEADER,
            record,
        };
        let id = row.required(0)?;
        if !node_seen.insert(id.clone()) {
            return Err(Error::DuplicateId { kind: "node", id });
        }
        node_records.push(NodeRecord {
            id,
            name: row.text(1).to_string(),
            lifetime: row.lifetime(2)?,
            voltage_kv: row.voltage(4)?,
            lat: row.number(5)?,
            lon: row.number(6)?,
        });
    }

    let mut edge_records = Vec::new();
    let mut edge_seen = HashSet::new();
    for (line, record) in read_rows(edges, EDGES_FILE, &EDGE_HEADER)? {
        let row = Row {
            file: EDGES_FILE,
            line,
            header: &EDGE_HEADER,
            record,
        };
        let id = row.required(0)?;
        if !edge_seen.insert(id.clone()) {
            return Err(Error::DuplicateId { kind: "edge", id });
        }
        edge_records.push(EdgeRecord {
            id,
            from: row.required(1)?,
            to: row.required(2)?,
            lifetime: row.lifetime(3)?,
            voltage_kv: row.voltage(5)?,
        });
    }
    TemporalDataset::new(node_records, edge_records)
}

/// Reads `nodes.csv` and `edges.csv` from a directory.
pub fn load_dir(dir: impl AsRef<Path>) -> Result<TemporalDataset> {
    let dir = dir.as_ref();
    let open = |name: &str| {
        let path = dir.join(name);
        File::open(&path).map_err(|source| Error::Open {
            path: path.display().to_string(),
            source,
        })
    };
    parse_dataset(open(NODES_FILE)?, open(EDGES_FILE)?)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Serializes a dataset in the format read by [`parse_dataset`].
pub fn write_dataset<N: Write, E: Write>(ds: &TemporalDataset, nodes: N, edges: E) -> Result<()> {
    let mut w = WriterBuilder::new().from_writer(nodes);
    w.write_record(NODE_HEADER)?;
    for n in &ds.nodes {
        w.write_record([
            n.id.clone(),
            n.name.clone(),
            n.lifetime.commissioned.to_string(),
            opt(n.lifetime.decommissioned),
            opt(n.voltage_kv),
            opt(n.lat),
            opt(n.lon),
        ])?;
    }
    w.flush()?;

    let mut w = WriterBuilder::new().from_writer(edges);
    w.write_record(EDGE_HEADER)?;
    for e in &ds.edges {
        w.write_record([
            e.id.clone(),
            e.from.clone(),
            e.to.clone(),
            e.lifetime.commissioned.to_string(),
            opt(e.lifetime.decommissioned),
            opt(e.voltage_kv),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `nodes.csv` and `edges.csv` into `dir`, creating it if needed.
pub fn save_dir(ds: &TemporalDataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let create = |name: &str| {
        let path = dir.join(name);
        File::create(&path).map_err(|source| Error::Open {
            path: path.display().to_string(),
            source,
        })
    };
    write_dataset(ds, create(NODES_FILE)?, create(EDGES_FILE)?)
}

/// The grid as it stood in `year`.
///
/// Nodes are indexed in id order. An edge is kept only if it and both of its
/// endpoints are active; parallel lines between one substation pair collapse
/// into one edge labeled with the smallest line id.
pub fn snapshot(ds: &TemporalDataset, year: i32) -> Result<Snapshot> {
    let active: Vec<&NodeRecord> = ds.nodes.iter().filter(|n| n.lifetime.active_in(year)).collect();
    if active.is_empty() {
        return Err(Error::EmptySnapshot { year });
    }
    let index: HashMap<&str, usize> = active
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    let mut edges = Vec::new();
    for e in ds.edges.iter().filter(|e| e.lifetime.active_in(year)) {
        match (index.get(e.from.as_str()), index.get(e.to.as_str())) {
            (Some(&u), Some(&v)) => edges.push((u, v, e.id.clone())),
            _ => log::warn!("{year}: line `{}` skipped, an endpoint is not in service", e.id),
        }
    }
    let ids = active.iter().map(|n| n.id.clone()).collect();
    let (g, collapsed) = Snapshot::assemble(ids, edges)?;
    for (kept, dropped) in collapsed {
        log::warn!("{year}: parallel line `{dropped}` collapsed into `{kept}`");
    }
    Ok(g.with_year(year))
}

#[cfg(test)]
mod tests {
    use super::*;

    const NODES: &str = "id,name,commissioned,decommissioned,voltage_kv,lat,lon\n\
        # comment lines are ignored\n\
        a,Alpha,1949,,220,47.5,19.0\n\
        b,Beta,1960,1980,,,\n\
        c,\"Gamma, East\",1949,,120,,\n";
    const EDGES: &str = "id,from_id,to_id,commissioned,decommissioned,voltage_kv\n\
        e1,a,b,1960,1980,\n\
        e2,a,c,1949,,120\n\
        e3,c,a,1955,,\n";

    fn parse(nodes: &str, edges: &str) -> Result<TemporalDataset> {
        parse_dataset(nodes.as_bytes(), edges.as_bytes())
    }

    #[test]
    fn minimal_dataset() {
        let ds = parse(
            "id,name,commissioned,decommissioned,voltage_kv,lat,lon\na,,1949,,,,\nb,,1949,,,,\n",
            "id,from_id,to_id,commissioned,decommissioned,voltage_kv\ne1,a,b,1949,,\n",
        )
        .unwrap();
        assert_eq!((ds.nodes().len(), ds.edges().len()), (2, 1));
        assert_eq!(ds.year_range(), Some((1949, 1949)));
    }

    #[test]
    fn optional_fields_stay_absent() {
        let ds = parse(NODES, EDGES).unwrap();
        let b = &ds.nodes()[1];
        assert_eq!((b.voltage_kv, b.lat, b.lon), (None, None, None));
        assert_eq!(ds.nodes()[2].name, "Gamma, East");
        assert_eq!(ds.nodes()[0].voltage_kv, Some(220.0));
        assert_eq!(ds.year_range(), Some((1949, 1980)));
    }

    #[test]
    fn dangling_endpoint_is_named() {
        let err = parse(NODES, "id,from_id,to_id,commissioned,decommissioned,voltage_kv\nx,a,zzz,1950,,\n")
            .unwrap_err();
        assert!(matches!(&err, Error::DanglingEndpoint { node, .. } if node == "zzz"));
        assert!(err.to_string().contains("zzz"));
    }

    #[test]
    fn reversed_interval_is_rejected() {
        let err = parse(
            "id,name,commissioned,decommissioned,voltage_kv,lat,lon\nq,,1990,1980,,,\n",
            "id,from_id,to_id,commissioned,decommissioned,voltage_kv\n",
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidInterval {
                commissioned: 1990,
                decommissioned: 1980,
                ..
            }
        ));
    }

    #[test]
    fn malformed_rows_report_line_and_field() {
        let err = parse(
            "id,name,commissioned,decommissioned,voltage_kv,lat,lon\na,,1949,,,,\nb,,19x9,,,,\n",
            "id,from_id,to_id,commissioned,decommissioned,voltage_kv\n",
        )
        .unwrap_err();
        match err {
            Error::MalformedRow { line, field, .. } => {
                assert_eq!(line, 3);
                assert_eq!(field, "commissioned");
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse(
            "id,name,commissioned,decommissioned,voltage_kv,lat,lon\na,,1949,,-5,,\n",
            "id,from_id,to_id,commissioned,decommissioned,voltage_kv\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::MalformedRow { ref field, .. } if field == "voltage_kv"));
        let err = parse("id,name\n", EDGES).unwrap_err();
        assert!(matches!(err, Error::BadHeader { .. }));
    }

    #[test]
    fn duplicates_and_self_loops_are_rejected() {
        let err = parse(
            "id,name,commissioned,decommissioned,voltage_kv,lat,lon\na,,1949,,,,\na,,1950,,,,\n",
            "id,from_id,to_id,commissioned,decommissioned,voltage_kv\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId { kind: "node", .. }));
        let err = parse(NODES, "id,from_id,to_id,commissioned,decommissioned,voltage_kv\ns,a,a,1950,,\n")
            .unwrap_err();
        assert!(matches!(err, Error::SelfLoop { .. }));
    }

    #[test]
    fn snapshot_interval_membership() {
        let ds = parse(NODES, EDGES).unwrap();
        let g = snapshot(&ds, 1970).unwrap();
        assert_eq!(g.ids(), ["a", "b", "c"]);
        assert_eq!(g.year(), Some(1970));
        // e2 and e3 are parallel a–c lines.
        assert_eq!(g.m(), 2);
        assert_eq!(g.edge_label(g.edge_index(0, 2).unwrap()), "e2");

        let g = snapshot(&ds, 1980).unwrap();
        assert_eq!(g.ids(), ["a", "c"]);
        assert_eq!(g.m(), 1);

        assert!(matches!(
            snapshot(&ds, 1948),
            Err(Error::EmptySnapshot { year: 1948 })
        ));
    }

    #[test]
    fn edges_never_outlive_their_endpoints_in_snapshots() {
        let ds = parse(
            "id,name,commissioned,decommissioned,voltage_kv,lat,lon\na,,1949,,,,\nb,,1949,1960,,,\n",
            "id,from_id,to_id,commissioned,decommissioned,voltage_kv\ne,a,b,1949,,\n",
        )
        .unwrap();
        let g = snapshot(&ds, 1965).unwrap();
        assert_eq!((g.n(), g.m()), (1, 0));
    }

    #[test]
    fn row_order_is_irrelevant() {
        let shuffled_nodes = "id,name,commissioned,decommissioned,voltage_kv,lat,lon\n\
            c,\"Gamma, East\",1949,,120,,\n\
            b,Beta,1960,1980,,,\n\
            a,Alpha,1949,,220,47.5,19.0\n";
        assert_eq!(parse(NODES, EDGES).unwrap(), parse(shuffled_nodes, EDGES).unwrap());
    }

    #[test]
    fn write_then_parse_round_trips() {
        let ds = parse(NODES, EDGES).unwrap();
        let (mut n, mut e) = (Vec::new(), Vec::new());
        write_dataset(&ds, &mut n, &mut e).unwrap();
        assert_eq!(parse_dataset(&n[..], &e[..]).unwrap(), ds);
    }
}
