use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::network::{TensorNetwork, UnionFind};
use crate::tensor::SparseTensor;

/// A relation with named attributes; values are kept as text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub attrs: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Relation {
    pub fn new(name: impl Into<String>, attrs: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        let name = name.into();
        if let Some(r) = rows.iter().position(|r| r.len() != attrs.len()) {
            return Err(Error::Parse(format!(
                "relation {name}: row {} has {} fields, expected {}",
                r + 1,
                rows[r].len(),
                attrs.len()
            )));
        }
        Ok(Relation { name, attrs, rows })
    }

    /// Reads CSV with a header row.
    pub fn from_csv(name: impl Into<String>, reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let attrs = rdr.headers()?.iter().map(str::to_string).collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
        Relation::new(name, attrs, rows)
    }

    pub fn read_csv(name: impl Into<String>, path: impl AsRef<Path>) -> Result<Self> {
        Relation::from_csv(name, std::fs::File::open(path)?)
    }

    pub fn attr_index(&self, attr: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a == attr)
    }
}

/// Attribute reference `(relation position, column)`.
pub type AttrRef = (usize, usize);

/// Relations plus equi-join predicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinQuery {
    relations: Vec<Relation>,
    predicates: Vec<(AttrRef, AttrRef)>,
}

impl JoinQuery {
    /// `joins` holds pairs of `"Relation.attr"` names.
    pub fn new<S: AsRef<str>>(relations: Vec<Relation>, joins: &[(S, S)]) -> Result<Self> {
        let resolve = |s: &str| -> Result<AttrRef> {
            let (rel, attr) =
                s.split_once('.').ok_or_else(|| Error::Parse(format!("expected Relation.attr, got {s:?}")))?;
            let r = relations
                .iter()
                .position(|x| x.name == rel)
                .ok_or_else(|| Error::Parse(format!("unknown relation {rel:?} in {s:?}")))?;
            let c = relations[r]
                .attr_index(attr)
                .ok_or_else(|| Error::Parse(format!("relation {rel} has no attribute {attr:?}")))?;
            Ok((r, c))
        };
        let predicates = joins
            .iter()
            .map(|(a, b)| Ok((resolve(a.as_ref())?, resolve(b.as_ref())?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(JoinQuery { relations, predicates })
    }

    /// Reads a JSON join spec; relation files resolve against the spec's
    /// directory.
    pub fn read_spec(path: impl AsRef<Path>) -> Result<Self> {
        #[derive(Deserialize)]
        struct RelationEntry {
            name: String,
            file: String,
            #[serde(default)]
            attrs: Option<Vec<String>>,
        }
        #[derive(Deserialize)]
        struct SpecFile {
            relations: Vec<RelationEntry>,
            #[serde(default)]
            joins: Vec<(String, String)>,
        }
        let path = path.as_ref();
        let spec: SpecFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let relations = spec
            .relations
            .into_iter()
            .map(|e| {
                let rel = Relation::read_csv(e.name, base.join(&e.file))?;
                match e.attrs {
                    Some(attrs) if attrs != rel.attrs => Err(Error::Parse(format!(
                        "relation {}: header {:?} does not match declared attributes {attrs:?}",
                        rel.name, rel.attrs
                    ))),
                    _ => Ok(rel),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        JoinQuery::new(relations, &spec.joins)
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn predicates(&self) -> &[(AttrRef, AttrRef)] {
        &self.predicates
    }
}

/// Value encoding shared by a class of joined attributes: the sorted union
/// of their values, numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dictionary {
    /// Attributes sharing this dictionary, as `"Relation.attr"`.
    pub attrs: Vec<String>,
    pub values: Vec<String>,
}

impl Dictionary {
    pub fn index_of(&self, value: &str) -> Option<usize> {
        self.values.binary_search_by(|v| v.as_str().cmp(value)).ok().map(|p| p + 1)
    }
}

/// Frequency-tensor encoding of a join query.
#[derive(Clone, Debug)]
pub struct JoinEncoding {
    /// Per relation, the joined columns that became its modes.
    pub mode_columns: Vec<Vec<usize>>,
    /// Per relation and mode, the dictionary position.
    pub mode_dicts: Vec<Vec<usize>>,
    pub dictionaries: Vec<Dictionary>,
}

impl JoinEncoding {
    fn new(query: &JoinQuery) -> Self {
        let rels = query.relations();
        let offsets: Vec<usize> = rels
            .iter()
            .scan(0, |acc, r| {
                let o = *acc;
                *acc += r.attrs.len();
                Some(o)
            })
            .collect();
        let total = rels.iter().map(|r| r.attrs.len()).sum();
        let mut uf = UnionFind::new(total);
        let mut joined = BTreeSet::new();
        for &((ra, ca), (rb, cb)) in query.predicates() {
            uf.union(offsets[ra] + ca, offsets[rb] + cb);
            joined.insert((ra, ca));
            joined.insert((rb, cb));
        }
        let mut class_of_root: BTreeMap<usize, usize> = BTreeMap::new();
        let mut members: Vec<Vec<AttrRef>> = Vec::new();
        for &(r, c) in &joined {
            let root = uf.find(offsets[r] + c);
            let next = members.len();
            let d = *class_of_root.entry(root).or_insert(next);
            if d == next {
                members.push(Vec::new());
            }
            members[d].push((r, c));
        }
        let dictionaries = members
            .iter()
            .map(|cols| {
                let values: BTreeSet<&str> =
                    cols.iter().flat_map(|&(r, c)| rels[r].rows.iter().map(move |row| row[c].as_str())).collect();
                Dictionary {
                    attrs: cols.iter().map(|&(r, c)| format!("{}.{}", rels[r].name, rels[r].attrs[c])).collect(),
                    values: values.into_iter().map(str::to_string).collect(),
                }
            })
            .collect();
        let mut mode_columns = vec![Vec::new(); rels.len()];
        let mut mode_dicts = vec![Vec::new(); rels.len()];
        for &(r, c) in &joined {
            mode_columns[r].push(c);
            mode_dicts[r].push(class_of_root[&uf.find(offsets[r] + c)]);
        }
        JoinEncoding { mode_columns, mode_dicts, dictionaries }
    }

    /// Mode index of one tuple of relation `r`.
    pub fn encode_row(&self, r: usize, row: &[String]) -> Result<Vec<usize>> {
        self.mode_columns[r]
            .iter()
            .zip(&self.mode_dicts[r])
            .map(|(&c, &d)| {
                self.dictionaries[d]
                    .index_of(&row[c])
                    .ok_or_else(|| Error::Parse(format!("value {:?} is not in the join dictionary", row[c])))
            })
            .collect()
    }

    fn shape(&self, r: usize) -> Vec<usize> {
        self.mode_dicts[r].iter().map(|&d| self.dictionaries[d].values.len()).collect()
    }
}

/// One frequency tensor per relation over its joined attributes (other
/// attributes are summed out), contracted along the join predicates. The
/// full contraction equals the join size.
pub fn relations_to_network(query: &JoinQuery) -> Result<(TensorNetwork, JoinEncoding)> {
    let enc = JoinEncoding::new(query);
    let mut tensors = Vec::with_capacity(query.relations().len());
    for (r, rel) in query.relations().iter().enumerate() {
        let mut counts: HashMap<Vec<usize>, f64> = HashMap::new();
        for row in &rel.rows {
            *counts.entry(enc.encode_row(r, row)?).or_insert(0.0) += 1.0;
        }
        tensors.push(SparseTensor::from_entries(enc.shape(r), counts)?);
    }
    // Global mode of attribute (r, c): offset of r plus its position among
    // r's modes.
    let mut offset = 0;
    let mut global = HashMap::new();
    for (r, cols) in enc.mode_columns.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            global.insert((r, c), offset + j + 1);
        }
        offset += cols.len();
    }
    let contractions = query.predicates().iter().map(|(a, b)| (global[a], global[b])).collect();
    Ok((TensorNetwork::new(tensors, contractions), enc))
}

/// One unit update per tuple, as `(tensor, index)`, in relation order.
pub fn relation_updates(query: &JoinQuery, enc: &JoinEncoding) -> Result<Vec<(usize, Vec<usize>)>> {
    let mut out = Vec::new();
    for (r, rel) in query.relations().iter().enumerate() {
        for row in &rel.rows {
            out.push((r, enc.encode_row(r, row)?));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{contract_exact, join_size_nested_loop, OracleBudget};

    fn rel(name: &str, attrs: &[&str], rows: &[&[i64]]) -> Relation {
        Relation::new(
            name,
            attrs.iter().map(|s| s.to_string()).collect(),
            rows.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect(),
        )
        .unwrap()
    }

    fn exact(net: &TensorNetwork) -> f64 {
        contract_exact(net, OracleBudget::default()).unwrap().scalar_value()
    }

    #[test]
    fn two_relation_join() {
        let q = JoinQuery::new(
            vec![rel("R1", &["a"], &[&[1], &[2]]), rel("R2", &["a", "b"], &[&[1, 5], &[2, 5], &[2, 6]])],
            &[("R1.a", "R2.a")],
        )
        .unwrap();
        assert_eq!(join_size_nested_loop(&q), 3);
        let (net, enc) = relations_to_network(&q).unwrap();
        assert_eq!(exact(&net), 3.0);
        assert_eq!(net.tensor(1).shape(), &[2]);
        assert_eq!(enc.dictionaries[0].values, vec!["1", "2"]);
    }

    #[test]
    fn four_way_query_shape() {
        let q = JoinQuery::new(
            vec![
                rel("R1", &["1"], &[&[1], &[2]]),
                rel("R2", &["2", "3"], &[&[1, 7], &[2, 8], &[2, 7]]),
                rel("R3", &["4"], &[&[2], &[2], &[3]]),
                rel("R4", &["5"], &[&[7], &[9]]),
            ],
            &[("R1.1", "R2.2"), ("R3.4", "R2.2"), ("R4.5", "R2.3")],
        )
        .unwrap();
        let (net, _) = relations_to_network(&q).unwrap();
        let orders: Vec<usize> = net.tensors().iter().map(|t| t.order()).collect();
        assert_eq!(orders, vec![1, 2, 1, 1]);
        assert_eq!(net.contractions(), &[(1, 2), (2, 4), (3, 5)]);
        // R2 tuple (2, 7) pairs with R1 2, R3 2 twice, R4 7
        assert_eq!(join_size_nested_loop(&q), 2);
        assert_eq!(exact(&net), 2.0);
    }

    #[test]
    fn no_joins_counts_rows() {
        let q = JoinQuery::new(vec![rel("R", &["a", "b"], &[&[1, 2], &[3, 4], &[1, 2]])], &[] as &[(&str, &str)]).unwrap();
        let (net, _) = relations_to_network(&q).unwrap();
        assert_eq!(net.tensor(0).order(), 0);
        assert_eq!(exact(&net), 3.0);
        assert_eq!(join_size_nested_loop(&q), 3);
    }

    #[test]
    fn empty_relation_gives_zero() {
        let q = JoinQuery::new(vec![rel("A", &["x"], &[&[1]]), rel("B", &["x"], &[])], &[("A.x", "B.x")]).unwrap();
        assert_eq!(join_size_nested_loop(&q), 0);
        assert_eq!(exact(&relations_to_network(&q).unwrap().0), 0.0);
    }

    #[test]
    fn csv_and_reference_errors() {
        let r = Relation::from_csv("R", "a, b\n1, x\n2, y\n".as_bytes()).unwrap();
        assert_eq!(r.attrs, vec!["a", "b"]);
        assert_eq!(r.rows[1], vec!["2", "y"]);
        assert!(Relation::from_csv("R", "a,b\n1\n".as_bytes()).is_err());
        assert!(JoinQuery::new(vec![r.clone()], &[("R.a", "R.c")]).is_err());
        assert!(JoinQuery::new(vec![r.clone()], &[("S.a", "R.a")]).is_err());
        assert!(JoinQuery::new(vec![r], &[("Ra", "R.a")]).is_err());
    }
}
