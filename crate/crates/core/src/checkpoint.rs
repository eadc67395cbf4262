//! Binary model checkpoints.
//!
//! Layout: magic `SIGRECKP`, u32 format version, u32 K/N/M/|W|, a flag byte
//! (bit 0 social, bit 1 content), u64 seed, then the tables in declared
//! order — Pr(z), the influence triples (f, u, value) sorted by (f, u), and
//! the row-major Pr(f|z), Pr(i|z) and (content only) Pr(w|z) tables — each
//! as a length-prefixed array of little-endian 64-bit floats. Round-trips
//! are bit exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::params::{Matrix, ParamSet};

const MAGIC: &[u8; 8] = b"SIGRECKP";
const VERSION: u32 = 1;

pub fn save_checkpoint(params: &ParamSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    write_checkpoint(params, &mut w).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<ParamSet> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_checkpoint(&mut BufReader::new(file))
}

pub fn write_checkpoint<W: Write>(params: &ParamSet, w: &mut W) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u32::<LittleEndian>(params.k() as u32)?;
    w.write_u32::<LittleEndian>(params.n_users() as u32)?;
    w.write_u32::<LittleEndian>(params.n_items() as u32)?;
    w.write_u32::<LittleEndian>(params.n_tags() as u32)?;
    let mut flags = 0u8;
    if params.social() {
        flags |= 1;
    }
    if params.content() {
        flags |= 2;
    }
    w.write_u8(flags)?;
    w.write_u64::<LittleEndian>(params.seed())?;

    write_array(w, params.topic_prior())?;

    // influence triples sorted by (f, u)
    let mut triples: Vec<(u32, u32, f64)> = Vec::new();
    for u in 0..params.n_users() as u32 {
        for (&f, &v) in params.influencers(u).iter().zip(params.influence_row(u)) {
            triples.push((f, u, v));
        }
    }
    triples.sort_unstable_by_key(|&(f, u, _)| (f, u));
    w.write_u64::<LittleEndian>(triples.len() as u64)?;
    for (f, u, v) in triples {
        w.write_u32::<LittleEndian>(f)?;
        w.write_u32::<LittleEndian>(u)?;
        w.write_f64::<LittleEndian>(v)?;
    }

    write_array(w, params.topic_user().data())?;
    write_array(w, params.topic_item().data())?;
    if let Some(tags) = params.topic_tag() {
        write_array(w, tags.data())?;
    }
    Ok(())
}

fn write_array<W: Write>(w: &mut W, data: &[f64]) -> std::io::Result<()> {
    w.write_u32::<LittleEndian>(data.len() as u32)?;
    for &v in data {
        w.write_f64::<LittleEndian>(v)?;
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(r: &mut R) -> Result<ParamSet> {
    let bad = |msg: String| Error::Checkpoint(msg);
    let io = |e: std::io::Error| Error::Checkpoint(format!("truncated checkpoint: {e}"));

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(bad("bad magic string".into()));
    }
    let version = r.read_u32::<LittleEndian>().map_err(io)?;
    if version != VERSION {
        return Err(bad(format!("unsupported format version {version}")));
    }
    let k = r.read_u32::<LittleEndian>().map_err(io)? as usize;
    let n_users = r.read_u32::<LittleEndian>().map_err(io)? as usize;
    let n_items = r.read_u32::<LittleEndian>().map_err(io)? as usize;
    let n_tags = r.read_u32::<LittleEndian>().map_err(io)? as usize;
    let flags = r.read_u8().map_err(io)?;
    let social = flags & 1 != 0;
    let content = flags & 2 != 0;
    let seed = r.read_u64::<LittleEndian>().map_err(io)?;

    let topic_prior = read_array(r, k, "topic prior")?;

    let n_triples = r.read_u64::<LittleEndian>().map_err(io)? as usize;
    let mut support = vec![Vec::new(); n_users];
    let mut influence = vec![Vec::new(); n_users];
    let mut prev = None;
    for _ in 0..n_triples {
        let f = r.read_u32::<LittleEndian>().map_err(io)?;
        let u = r.read_u32::<LittleEndian>().map_err(io)?;
        let v = r.read_f64::<LittleEndian>().map_err(io)?;
        if f as usize >= n_users || u as usize >= n_users {
            return Err(bad(format!("influence pair ({f},{u}) out of range")));
        }
        if let Some(p) = prev {
            if (f, u) <= p {
                return Err(bad("influence triples not sorted by (f,u)".into()));
            }
        }
        prev = Some((f, u));
        support[u as usize].push(f);
        influence[u as usize].push(v);
    }
    for (u, s) in support.iter().enumerate() {
        if s.binary_search(&(u as u32)).is_err() {
            return Err(bad(format!("missing self pair for user {u}")));
        }
    }

    let topic_user = Matrix::from_data(k, n_users, read_array(r, k * n_users, "Pr(f|z)")?);
    let topic_item = Matrix::from_data(k, n_items, read_array(r, k * n_items, "Pr(i|z)")?);
    let topic_tag = if content {
        Some(Matrix::from_data(
            k,
            n_tags,
            read_array(r, k * n_tags, "Pr(w|z)")?,
        ))
    } else {
        None
    };

    Ok(ParamSet::from_tables(
        social,
        content,
        seed,
        topic_prior,
        support,
        influence,
        topic_user,
        topic_item,
        topic_tag,
    ))
}

fn read_array<R: Read>(r: &mut R, expected: usize, label: &str) -> Result<Vec<f64>> {
    let len = r
        .read_u32::<LittleEndian>()
        .map_err(|e| Error::Checkpoint(format!("truncated {label} length: {e}")))?
        as usize;
    if len != expected {
        return Err(Error::Checkpoint(format!(
            "{label} length {len}, expected {expected}"
        )));
    }
    let mut data = vec![0.0f64; len];
    r.read_f64_into::<LittleEndian>(&mut data)
        .map_err(|e| Error::Checkpoint(format!("truncated {label}: {e}")))?;
    Ok(data)
}
