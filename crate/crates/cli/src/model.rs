//! Model files: alphabet, incidence matrix, named potential tables and an
//! optional affine IFS, in JSON.

use std::collections::BTreeMap;
use std::path::Path;

use gibbs_core::{AffineIfs, AffineMap, Error, Potential, Result, Sft};
use serde::Deserialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    alphabet: Vec<String>,
    incidence: Vec<Vec<u8>>,
    #[serde(default)]
    potentials: BTreeMap<String, PotentialSpec>,
    ifs: Option<IfsSpec>,
    gibbs: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialSpec {
    depth: usize,
    /// Word to value, one entry per admissible word of length `depth`.
    table: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IfsSpec {
    interval: [f64; 2],
    maps: BTreeMap<String, MapSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapSpec {
    rate: f64,
    offset: f64,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub sft: Sft,
    pub potentials: BTreeMap<String, Potential>,
    pub ifs: Option<AffineIfs>,
    pub gibbs: Option<String>,
    /// Hex SHA-256 of the file bytes.
    pub hash: String,
}

impl Model {
    pub fn load(path: &Path) -> Result<Model> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::Validation(format!("cannot read model {}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Model> {
        let file: ModelFile =
            serde_json::from_slice(bytes).map_err(|e| Error::Validation(format!("model file: {e}")))?;
        let mut rows = Vec::with_capacity(file.incidence.len());
        for (i, row) in file.incidence.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for &x in row {
                match x {
                    0 => out.push(false),
                    1 => out.push(true),
                    _ => {
                        return Err(Error::Validation(format!(
                            "incidence row {i} has entry {x}; entries must be 0 or 1"
                        )))
                    }
                }
            }
            rows.push(out);
        }
        let sft = Sft::new(file.alphabet, rows)?;
        let mut potentials = BTreeMap::new();
        for (name, spec) in file.potentials {
            let entries = spec
                .table
                .iter()
                .map(|(k, v)| Ok((sft.parse_word(k)?, *v)))
                .collect::<Result<Vec<_>>>()?;
            let p = Potential::new(&sft, spec.depth, entries)
                .map_err(|e| Error::Validation(format!("potential {name}: {e}")))?;
            potentials.insert(name, p);
        }
        let ifs = match file.ifs {
            None => None,
            Some(spec) => {
                let mut maps = vec![None; sft.size()];
                for (name, m) in &spec.maps {
                    let a = sft
                        .symbol_index(name)
                        .ok_or_else(|| Error::Validation(format!("ifs map for unknown symbol {name:?}")))?;
                    maps[a] = Some(AffineMap {
                        rate: m.rate,
                        offset: m.offset,
                    });
                }
                let maps = maps
                    .into_iter()
                    .enumerate()
                    .map(|(a, m)| {
                        m.ok_or_else(|| Error::Validation(format!("ifs has no map for symbol {}", sft.alphabet()[a])))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(AffineIfs::new(&sft, spec.interval[0], spec.interval[1], maps)?)
            }
        };
        if let Some(g) = &file.gibbs {
            if !potentials.contains_key(g) {
                return Err(Error::Validation(format!("gibbs names unknown potential {g:?}")));
            }
        }
        Ok(Model {
            sft,
            potentials,
            ifs,
            gibbs: file.gibbs,
            hash: hex::encode(Sha256::digest(bytes)),
        })
    }

    /// `name`, else the `gibbs` potential, else `fallback`, else the only potential.
    pub fn phi(&self, name: Option<&str>, fallback: &str) -> Result<&Potential> {
        if let Some(n) = name {
            return self.named(n);
        }
        if let Some(g) = &self.gibbs {
            return self.named(g);
        }
        if let Some(p) = self.potentials.get(fallback) {
            return Ok(p);
        }
        match self.potentials.len() {
            1 => Ok(self.potentials.values().next().unwrap()),
            0 => Err(Error::Validation("model defines no potentials".into())),
            _ => Err(Error::Validation(format!(
                "several potentials and none named {fallback:?}; pick one by name"
            ))),
        }
    }

    /// `name`, else `psi`, else the geometric potential of the IFS.
    pub fn psi(&self, name: Option<&str>) -> Result<Potential> {
        if let Some(n) = name {
            return self.named(n).cloned();
        }
        if let Some(p) = self.potentials.get("psi") {
            return Ok(p.clone());
        }
        match &self.ifs {
            Some(ifs) => Ok(ifs.geometric_potential()),
            None => Err(Error::Validation(
                "no psi potential and no ifs to derive a geometric potential from".into(),
            )),
        }
    }

    pub fn ifs(&self) -> Result<&AffineIfs> {
        self.ifs
            .as_ref()
            .ok_or_else(|| Error::Validation("this command needs an ifs section in the model".into()))
    }

    fn named(&self, name: &str) -> Result<&Potential> {
        self.potentials
            .get(name)
            .ok_or_else(|| Error::Validation(format!("unknown potential {name:?}")))
    }
}
