//! Seeded instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::BipartiteTournament;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenKind {
    /// Every arc oriented by a fair coin.
    UniformRandom,
    /// Arcs agree with a random interleaving of both sides.
    Acyclic,
    /// An acyclic base with `k` vertices whose arcs are re-drawn at random,
    /// so those `k` vertices form an FVS.
    PlantedFvs { k: usize },
    /// A uniform base whose rows and columns are repeated `class_size`
    /// times, giving large false-twin classes.
    TwinHeavy { class_size: usize },
}

impl GenKind {
    pub fn name(&self) -> &'static str {
        match self {
            GenKind::UniformRandom => "uniform",
            GenKind::Acyclic => "acyclic",
            GenKind::PlantedFvs { .. } => "planted",
            GenKind::TwinHeavy { .. } => "twins",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub m: usize,
    pub n: usize,
    #[serde(flatten)]
    pub kind: GenKind,
    pub seed: u64,
    /// Independent stream of the same seed, one per corpus member.
    #[serde(default)]
    pub stream: u64,
}

impl GenSpec {
    pub fn new(m: usize, n: usize, kind: GenKind, seed: u64) -> Self {
        GenSpec {
            m,
            n,
            kind,
            seed,
            stream: 0,
        }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    /// `<kind>-<m>x<n>-<seed>`, with `-<stream>` appended when nonzero.
    pub fn file_stem(&self) -> String {
        let base = format!("{}-{}x{}-{}", self.kind.name(), self.m, self.n, self.seed);
        if self.stream == 0 {
            base
        } else {
            format!("{base}-{}", self.stream)
        }
    }
}

/// ChaCha8 seeded from `seed`, on stream `stream`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn generate(spec: &GenSpec) -> BipartiteTournament {
    let mut rng = rng_for(spec.seed, spec.stream);
    let (m, n) = (spec.m, spec.n);
    match spec.kind {
        GenKind::UniformRandom => BipartiteTournament::from_fn(m, n, |_, _| rng.gen()),
        GenKind::Acyclic => acyclic(m, n, &mut rng),
        GenKind::PlantedFvs { k } => {
            let base = acyclic(m, n, &mut rng);
            let mut ids: Vec<usize> = (0..m + n).collect();
            ids.shuffle(&mut rng);
            let planted = &ids[..k.min(m + n)];
            let mut rows = base.orient_rows();
            for (i, row) in rows.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    if planted.contains(&i) || planted.contains(&(m + j)) {
                        *cell = rng.gen();
                    }
                }
            }
            BipartiteTournament::new(m, n, rows).expect("dimensions preserved")
        }
        GenKind::TwinHeavy { class_size } => {
            let c = class_size.max(1);
            let base: Vec<Vec<bool>> = (0..m.div_ceil(c))
                .map(|_| (0..n.div_ceil(c)).map(|_| rng.gen()).collect())
                .collect();
            BipartiteTournament::from_fn(m, n, |i, j| base[i / c][j / c])
        }
    }
}

fn acyclic(m: usize, n: usize, rng: &mut ChaCha8Rng) -> BipartiteTournament {
    let mut order: Vec<usize> = (0..m + n).collect();
    order.shuffle(rng);
    let mut pos = vec![0; m + n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    BipartiteTournament::from_fn(m, n, |i, j| pos[i] < pos[m + j])
}

/// `count` instances from `template`, one stream each.
pub fn corpus(template: &GenSpec, count: usize) -> Vec<(GenSpec, BipartiteTournament)> {
    (0..count as u64)
        .map(|s| {
            let spec = template.clone().with_stream(s);
            let t = generate(&spec);
            (spec, t)
        })
        .collect()
}
