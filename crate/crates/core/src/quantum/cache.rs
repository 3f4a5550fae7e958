//! Shared cache of reflection unitaries keyed by program, input and `α`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::unitary::{build_u, ReflectionUnitary};
use crate::config::Config;
use crate::error::Result;
use crate::graph::Vertex;
use crate::span::StConnProgram;

const CACHE_CAPACITY: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key {
    s: Vertex,
    t: Vertex,
    edges: Vec<(Vertex, Vertex)>,
    present: Vec<bool>,
    alpha: u64,
}

/// Configuration plus a bounded cache of `U(P,x,α)`; cleared wholesale when full.
#[derive(Debug, Default)]
pub struct Simulator {
    config: Config,
    cache: Mutex<HashMap<Key, Arc<ReflectionUnitary>>>,
}

impl Simulator {
    pub fn new(config: Config) -> Self {
        Simulator { config, cache: Mutex::new(HashMap::new()) }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn unitary(&self, p: &StConnProgram, x: &[bool], alpha: f64) -> Result<Arc<ReflectionUnitary>> {
        let key = Key {
            s: p.s(),
            t: p.t(),
            edges: p.directed_edges().to_vec(),
            present: p.program().hx_mask(x)?,
            alpha: alpha.to_bits(),
        };
        if let Some(u) = self.cache.lock().expect("unitary cache poisoned").get(&key) {
            return Ok(u.clone());
        }
        let u = Arc::new(build_u(p.program(), x, alpha)?);
        let mut cache = self.cache.lock().expect("unitary cache poisoned");
        if cache.len() >= CACHE_CAPACITY {
            cache.clear();
        }
        cache.insert(key, u.clone());
        Ok(u)
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().expect("unitary cache poisoned").len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::span::build_stconn_program;

    #[test]
    fn reuses_entries() {
        let sim = Simulator::new(Config::default());
        let sp = build_stconn_program(&Graph::new(2, &[(0, 1)], 0, 1).unwrap());
        let a = sim.unitary(&sp, &[true], 1.0).unwrap();
        let b = sim.unitary(&sp, &[true], 1.0).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        sim.unitary(&sp, &[false], 1.0).unwrap();
        assert_eq!(sim.cached(), 2);
    }
}
