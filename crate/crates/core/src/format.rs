//! Text formats. Instances and the auxiliary inputs are TOML documents with
//! named integer fields; matrices are arrays of rows.
//!
//! ```toml
//! kind = "two-stage"
//! n = 1
//! r = 1
//! s = 1
//! t = 1
//! a_blocks = [
//!     [[1]],
//! ]
//! b_blocks = [
//!     [[2]],
//! ]
//! rhs = [4]
//! lower = [0, 0]
//! upper = [4, 2]
//! objective = [0, 1]
//! ```
//!
//! Tree instances use `kind = "tree"`, the four vectors and one `[[block]]`
//! table per block with `row_start`, `col_start`, `rows`, `cols`, `entries`
//! and an optional `parent`.

use std::fmt::Write as _;

use toml::{Table, Value};

use crate::cones::GeneratorSet;
use crate::error::{Error, Result};
use crate::instance::TwoStageInstance;
use crate::multistage::{TreeBlock, TreeInstance};
use crate::subrep::VectorMultiset;
use crate::types::{IntMatrix, IntVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    TwoStage(TwoStageInstance),
    Tree(TreeInstance),
}

fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))
}

fn field<'a>(t: &'a Table, name: &str) -> Result<&'a Value> {
    t.get(name).ok_or_else(|| Error::Parse(format!("missing field `{name}`")))
}

fn as_int(v: &Value, at: &str) -> Result<i64> {
    match v {
        Value::Integer(i) => Ok(*i),
        Value::Float(f) => Err(Error::Parse(format!("field `{at}`: non-integer literal {f}"))),
        other => Err(Error::Parse(format!("field `{at}`: expected an integer, found {}", other.type_str()))),
    }
}

fn as_count(v: &Value, at: &str) -> Result<usize> {
    let i = as_int(v, at)?;
    usize::try_from(i).map_err(|_| Error::Parse(format!("field `{at}`: expected a nonnegative count, found {i}")))
}

fn as_array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("field `{at}`: expected an array, found {}", v.type_str())))
}

fn as_vector(v: &Value, at: &str) -> Result<IntVector> {
    as_array(v, at)?.iter().enumerate().map(|(i, x)| as_int(x, &format!("{at}[{i}]"))).collect()
}

fn as_matrix(v: &Value, at: &str, shape: Option<(usize, usize)>) -> Result<IntMatrix> {
    let rows: Vec<Vec<i64>> = as_array(v, at)?
        .iter()
        .enumerate()
        .map(|(i, r)| Ok(as_vector(r, &format!("{at}[{i}]"))?.into_inner()))
        .collect::<Result<_>>()?;
    let (nr, nc) = match shape {
        Some(s) => s,
        None => (rows.len(), rows.first().map_or(0, Vec::len)),
    };
    if rows.len() != nr {
        return Err(Error::Parse(format!("field `{at}`: expected {nr} rows, found {}", rows.len())));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != nc) {
        return Err(Error::Parse(format!("field `{at}[{i}]`: expected {nc} entries, found {}", r.len())));
    }
    IntMatrix::new(nr, nc, rows.concat())
}

fn count_field(t: &Table, name: &str) -> Result<usize> {
    as_count(field(t, name)?, name)
}

fn vector_field(t: &Table, name: &str) -> Result<IntVector> {
    as_vector(field(t, name)?, name)
}

fn check_known(t: &Table, known: &[&str], at: &str) -> Result<()> {
    match t.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(Error::Parse(format!("{at}: unknown field `{k}`"))),
        None => Ok(()),
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let t = parse_table(text)?;
    let kind = field(&t, "kind")?
        .as_str()
        .ok_or_else(|| Error::Parse("field `kind`: expected a string".into()))?;
    match kind {
        "two-stage" => parse_two_stage_table(&t).map(Instance::TwoStage),
        "tree" => parse_tree_table(&t).map(Instance::Tree),
        other => Err(Error::Parse(format!("field `kind`: unknown kind {other:?}, expected \"two-stage\" or \"tree\""))),
    }
}

pub fn parse_two_stage(text: &str) -> Result<TwoStageInstance> {
    match parse_instance(text)? {
        Instance::TwoStage(i) => Ok(i),
        Instance::Tree(_) => Err(Error::Parse("expected a two-stage instance, found a tree".into())),
    }
}

pub fn parse_tree(text: &str) -> Result<TreeInstance> {
    match parse_instance(text)? {
        Instance::Tree(i) => Ok(i),
        Instance::TwoStage(i) => TreeInstance::from_two_stage(&i),
    }
}

fn parse_two_stage_table(t: &Table) -> Result<TwoStageInstance> {
    check_known(
        t,
        &["kind", "n", "r", "s", "t", "a_blocks", "b_blocks", "rhs", "lower", "upper", "objective"],
        "two-stage instance",
    )?;
    let (n, r, s, tt) = (count_field(t, "n")?, count_field(t, "r")?, count_field(t, "s")?, count_field(t, "t")?);
    let blocks = |name: &str, cols: usize| -> Result<Vec<IntMatrix>> {
        as_array(field(t, name)?, name)?
            .iter()
            .enumerate()
            .map(|(i, m)| as_matrix(m, &format!("{name}[{i}]"), Some((r, cols))))
            .collect()
    };
    let inst = TwoStageInstance {
        n,
        r,
        s,
        t: tt,
        a_blocks: blocks("a_blocks", s)?,
        b_blocks: blocks("b_blocks", tt)?,
        rhs: vector_field(t, "rhs")?,
        lower: vector_field(t, "lower")?,
        upper: vector_field(t, "upper")?,
        objective: vector_field(t, "objective")?,
    };
    let problems = inst.validate();
    if !problems.is_empty() {
        return Err(Error::Parse(problems.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")));
    }
    Ok(inst)
}

fn parse_tree_table(t: &Table) -> Result<TreeInstance> {
    check_known(t, &["kind", "block", "rhs", "lower", "upper", "objective"], "tree instance")?;
    let blocks = as_array(field(t, "block")?, "block")?
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let at = format!("block[{i}]");
            let bt = b.as_table().ok_or_else(|| Error::Parse(format!("field `{at}`: expected a table")))?;
            check_known(bt, &["row_start", "col_start", "rows", "cols", "parent", "entries"], &at)?;
            let get = |name: &str| as_count(field(bt, name)?, &format!("{at}.{name}"));
            let parent = match bt.get("parent") {
                None => None,
                Some(v) => Some(as_count(v, &format!("{at}.parent"))?),
            };
            let shape = (get("rows")?, get("cols")?);
            Ok(TreeBlock {
                row_start: get("row_start")?,
                col_start: get("col_start")?,
                parent,
                matrix: as_matrix(field(bt, "entries")?, &format!("{at}.entries"), Some(shape))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let inst = TreeInstance {
        blocks,
        rhs: vector_field(t, "rhs")?,
        lower: vector_field(t, "lower")?,
        upper: vector_field(t, "upper")?,
        objective: vector_field(t, "objective")?,
    };
    let problems = inst.validate();
    if !problems.is_empty() {
        return Err(Error::Parse(problems.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")));
    }
    Ok(inst)
}

pub fn format_vector(v: &[i64]) -> String {
    let items: Vec<String> = v.iter().map(i64::to_string).collect();
    format!("[{}]", items.join(", "))
}

pub fn format_matrix(m: &IntMatrix) -> String {
    let rows: Vec<String> = (0..m.rows()).map(|r| format_vector(m.row(r))).collect();
    format!("[{}]", rows.join(", "))
}

/// Canonical text of an instance.
pub fn serialize_instance(inst: &Instance) -> String {
    match inst {
        Instance::TwoStage(i) => serialize_two_stage(i),
        Instance::Tree(i) => serialize_tree(i),
    }
}

pub fn serialize_two_stage(inst: &TwoStageInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind = \"two-stage\"");
    for (k, v) in [("n", inst.n), ("r", inst.r), ("s", inst.s), ("t", inst.t)] {
        let _ = writeln!(out, "{k} = {v}");
    }
    for (name, list) in [("a_blocks", &inst.a_blocks), ("b_blocks", &inst.b_blocks)] {
        let _ = writeln!(out, "{name} = [");
        for m in list {
            let _ = writeln!(out, "    {},", format_matrix(m));
        }
        let _ = writeln!(out, "]");
    }
    write_vectors(&mut out, &inst.rhs, &inst.lower, &inst.upper, &inst.objective);
    out
}

pub fn serialize_tree(inst: &TreeInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind = \"tree\"");
    write_vectors(&mut out, &inst.rhs, &inst.lower, &inst.upper, &inst.objective);
    for b in &inst.blocks {
        let _ = writeln!(out, "\n[[block]]");
        let _ = writeln!(out, "row_start = {}", b.row_start);
        let _ = writeln!(out, "col_start = {}", b.col_start);
        let _ = writeln!(out, "rows = {}", b.matrix.rows());
        let _ = writeln!(out, "cols = {}", b.matrix.cols());
        if let Some(p) = b.parent {
            let _ = writeln!(out, "parent = {p}");
        }
        let _ = writeln!(out, "entries = {}", format_matrix(&b.matrix));
    }
    out
}

fn write_vectors(out: &mut String, rhs: &IntVector, lower: &IntVector, upper: &IntVector, objective: &IntVector) {
    for (k, v) in [("rhs", rhs), ("lower", lower), ("upper", upper), ("objective", objective)] {
        let _ = writeln!(out, "{k} = {}", format_vector(v));
    }
}

/// `entries = [[...], ...]`, with optional `rows`/`cols` for empty shapes.
pub fn parse_matrix(text: &str) -> Result<IntMatrix> {
    let t = parse_table(text)?;
    check_known(&t, &["rows", "cols", "entries"], "matrix file")?;
    let shape = match (t.get("rows"), t.get("cols")) {
        (Some(r), Some(c)) => Some((as_count(r, "rows")?, as_count(c, "cols")?)),
        (None, None) => None,
        _ => return Err(Error::Parse("give both `rows` and `cols` or neither".into())),
    };
    as_matrix(field(&t, "entries")?, "entries", shape)
}

pub fn serialize_matrix(m: &IntMatrix) -> String {
    format!("rows = {}\ncols = {}\nentries = {}\n", m.rows(), m.cols(), format_matrix(m))
}

/// `vectors = [[...], ...]` and an optional `delta`.
pub fn parse_vectors(text: &str) -> Result<(Vec<IntVector>, Option<i64>)> {
    let t = parse_table(text)?;
    check_known(&t, &["delta", "vectors"], "vector file")?;
    let vectors = as_array(field(&t, "vectors")?, "vectors")?
        .iter()
        .enumerate()
        .map(|(i, v)| as_vector(v, &format!("vectors[{i}]")))
        .collect::<Result<_>>()?;
    let delta = t.get("delta").map(|d| as_int(d, "delta")).transpose()?;
    Ok((vectors, delta))
}

/// `dim`, optional `delta`, and `[[set]]` tables with `generators`.
pub fn parse_generator_sets(text: &str) -> Result<(Vec<GeneratorSet>, Option<i64>)> {
    let t = parse_table(text)?;
    check_known(&t, &["dim", "delta", "set"], "generator file")?;
    let dim = count_field(&t, "dim")?;
    let delta = t.get("delta").map(|d| as_int(d, "delta")).transpose()?;
    let sets = as_array(field(&t, "set")?, "set")?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let at = format!("set[{i}]");
            let st = s.as_table().ok_or_else(|| Error::Parse(format!("field `{at}`: expected a table")))?;
            check_known(st, &["generators"], &at)?;
            let gens = as_array(field(st, "generators")?, &format!("{at}.generators"))?
                .iter()
                .enumerate()
                .map(|(j, g)| as_vector(g, &format!("{at}.generators[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            GeneratorSet::new(dim, gens).map_err(|e| Error::Parse(format!("field `{at}`: {e}")))
        })
        .collect::<Result<_>>()?;
    Ok((sets, delta))
}

/// `dim`, optional `delta`, and `[[multiset]]` tables listing `vectors`
/// with repetition.
pub fn parse_multisets(text: &str) -> Result<(Vec<VectorMultiset>, Option<i64>)> {
    let t = parse_table(text)?;
    check_known(&t, &["dim", "delta", "multiset"], "multiset file")?;
    let dim = count_field(&t, "dim")?;
    let delta = t.get("delta").map(|d| as_int(d, "delta")).transpose()?;
    let sets = as_array(field(&t, "multiset")?, "multiset")?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let at = format!("multiset[{i}]");
            let st = s.as_table().ok_or_else(|| Error::Parse(format!("field `{at}`: expected a table")))?;
            check_known(st, &["vectors"], &at)?;
            let vectors = as_array(field(st, "vectors")?, &format!("{at}.vectors"))?
                .iter()
                .enumerate()
                .map(|(j, v)| as_vector(v, &format!("{at}.vectors[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            VectorMultiset::from_vectors(dim, vectors).map_err(|e| Error::Parse(format!("field `{at}`: {e}")))
        })
        .collect::<Result<_>>()?;
    Ok((sets, delta))
}

pub fn serialize_multisets(sets: &[VectorMultiset], delta: Option<i64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dim = {}", sets.first().map_or(0, VectorMultiset::dim));
    if let Some(d) = delta {
        let _ = writeln!(out, "delta = {d}");
    }
    for s in sets {
        let vs: Vec<String> = s.to_vec().iter().map(|v| format_vector(v)).collect();
        let _ = writeln!(out, "\n[[multiset]]\nvectors = [{}]", vs.join(", "));
    }
    out
}
