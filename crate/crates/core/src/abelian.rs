//! Finite abelian groups, their characters, and generator-multiset Cayley
//! graphs with exact character-sum spectra.
//!
//! A group is a product of cyclic factors `Z/d_1 x ... x Z/d_r`; an element
//! is its vector of residues. The eigenvalues of the Cayley adjacency
//! operator are the character sums `lambda_chi = sum_{s in S} chi(s)`, which
//! are real whenever the generator multiset is closed under inversion. The
//! spectrum is therefore computed exactly as cosine sums, never through a
//! generic eigensolver; [`CayleyGraph::dense_spectrum_oracle`] keeps a dense
//! eigendecomposition around purely as an independent check.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Error;
use crate::Result;

/// A finite abelian group presented as a product of cyclic factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianGroup {
    moduli: Vec<u64>,
}

/// Group element: one residue per cyclic factor.
pub type Element = Vec<u64>;

impl AbelianGroup {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        if moduli.iter().any(|&d| d == 0) {
            return Err(Error::domain("cyclic factor moduli must be positive"));
        }
        Ok(AbelianGroup { moduli })
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn order(&self) -> u64 {
        self.moduli.iter().product()
    }

    pub fn identity(&self) -> Element {
        vec![0; self.moduli.len()]
    }

    pub fn is_identity(&self, g: &[u64]) -> bool {
        g.iter().all(|&x| x == 0)
    }

    pub fn reduce(&self, g: &[u64]) -> Element {
        g.iter().zip(&self.moduli).map(|(&x, &d)| x % d).collect()
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Element {
        a.iter()
            .zip(b)
            .zip(&self.moduli)
            .map(|((&x, &y), &d)| (x + y) % d)
            .collect()
    }

    pub fn neg(&self, a: &[u64]) -> Element {
        a.iter()
            .zip(&self.moduli)
            .map(|(&x, &d)| if x == 0 { 0 } else { d - x })
            .collect()
    }

    /// Mixed-radix index of an element, least significant factor first.
    pub fn index_of(&self, g: &[u64]) -> usize {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (&x, &d) in g.iter().zip(&self.moduli) {
            idx += x as usize * stride;
            stride *= d as usize;
        }
        idx
    }

    pub fn element(&self, mut idx: usize) -> Element {
        let mut g = Vec::with_capacity(self.moduli.len());
        for &d in &self.moduli {
            g.push((idx % d as usize) as u64);
            idx /= d as usize;
        }
        g
    }

    pub fn lcm_exponent(&self) -> u64 {
        self.moduli
            .iter()
            .fold(1u64, |acc, &d| acc / crate::arith::gcd_u64(acc, d) * d)
    }

    pub fn element_order(&self, g: &[u64]) -> u64 {
        let mut ord = 1u64;
        for (&x, &d) in g.iter().zip(&self.moduli) {
            let o = d / crate::arith::gcd_u64(x, d);
            ord = ord / crate::arith::gcd_u64(ord, o) * o;
        }
        ord
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.order() as usize).map(|i| self.element(i))
    }
}

/// A character of an abelian group, given by its exponent vector:
/// `chi(g) = exp(2 pi i sum_j a_j g_j / d_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Character {
    pub exponents: Vec<u64>,
}

impl Character {
    /// The character with index `idx` in mixed-radix order.
    pub fn nth(group: &AbelianGroup, idx: usize) -> Character {
        Character { exponents: group.element(idx) }
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&a| a == 0)
    }

    /// Evaluate as `(re, im)`.
    pub fn eval(&self, group: &AbelianGroup, g: &[u64]) -> (f64, f64) {
        let theta = self.angle(group, g);
        (theta.cos(), theta.sin())
    }

    /// The phase `2 pi sum_j a_j g_j / d_j`, reduced into `[0, 2 pi)`.
    pub fn angle(&self, group: &AbelianGroup, g: &[u64]) -> f64 {
        let l = group.lcm_exponent();
        let mut t = 0u64;
        for ((&a, &x), &d) in self.exponents.iter().zip(g).zip(group.moduli()) {
            t = (t + (a % d) * ((x % d) * (l / d) % l)) % l;
        }
        TAU * t as f64 / l as f64
    }
}

/// A Cayley graph `Cay(G, S)` for a generator multiset `S = S^{-1}`.
#[derive(Debug, Clone)]
pub struct CayleyGraph {
    group: AbelianGroup,
    generators: Vec<Element>,
}

impl CayleyGraph {
    /// Build a Cayley graph, rejecting identity generators (self-loops).
    pub fn new(group: AbelianGroup, generators: Vec<Element>) -> Result<Self> {
        Self::build(group, generators, false)
    }

    /// Build a Cayley graph in which identity generators are permitted,
    /// each contributing a self-loop at every vertex.
    pub fn new_with_loops(group: AbelianGroup, generators: Vec<Element>) -> Result<Self> {
        Self::build(group, generators, true)
    }

    fn build(group: AbelianGroup, generators: Vec<Element>, allow_loops: bool) -> Result<Self> {
        let generators: Vec<Element> = generators.iter().map(|s| group.reduce(s)).collect();
        let mut counts: HashMap<&Element, i64> = HashMap::new();
        for s in &generators {
            if !allow_loops && group.is_identity(s) {
                return Err(Error::domain(
                    "identity generator requires the self-loop constructor",
                ));
            }
            *counts.entry(s).or_insert(0) += 1;
        }
        for (s, &c) in &counts {
            let inv = group.neg(s);
            if counts.get(&inv).copied().unwrap_or(0) != c {
                return Err(Error::AsymmetricGenerators);
            }
        }
        Ok(CayleyGraph { group, generators })
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    /// Degree `k = |S|`, counting multiplicity.
    pub fn degree(&self) -> usize {
        self.generators.len()
    }

    /// Number of generators equal to the identity (self-loops per vertex).
    pub fn loop_count(&self) -> usize {
        self.generators.iter().filter(|s| self.group.is_identity(s)).count()
    }

    /// Exact spectrum as character sums, indexed by character (mixed-radix
    /// order; entry 0 is the trivial character).
    ///
    /// With `L = lcm(d_j)` every phase is an exact multiple of `2 pi / L`,
    /// so each eigenvalue is a short sum of table cosines: `O(|G| |S|)`
    /// total work and no eigensolver anywhere.
    pub fn spectrum(&self) -> Vec<f64> {
        let group = &self.group;
        let n = group.order() as usize;
        let l = group.lcm_exponent();
        let table: Vec<f64> = (0..l).map(|t| (TAU * t as f64 / l as f64).cos()).collect();

        // w[s][j] = s_j * (L / d_j) mod L: the phase step contributed by
        // incrementing character digit j.
        let w: Vec<Vec<u64>> = self
            .generators
            .iter()
            .map(|s| {
                s.iter()
                    .zip(group.moduli())
                    .map(|(&x, &d)| (x % d) * (l / d) % l)
                    .collect()
            })
            .collect();

        let mut spectrum = Vec::with_capacity(n);
        let mut digits = vec![0u64; group.rank()];
        let mut phases = vec![0u64; self.generators.len()];
        for idx in 0..n {
            if idx > 0 {
                // Advance the character odometer; each incremented digit j
                // (including the ones that wrap) adds w[s][j] to the phase,
                // because d_j * w[s][j] = 0 mod L.
                let mut j = 0;
                loop {
                    for (phase, ws) in phases.iter_mut().zip(&w) {
                        *phase = (*phase + ws[j]) % l;
                    }
                    digits[j] += 1;
                    if digits[j] < group.moduli()[j] {
                        break;
                    }
                    digits[j] = 0;
                    j += 1;
                }
            }
            spectrum.push(phases.iter().map(|&t| table[t as usize]).sum());
        }
        spectrum
    }

    /// Independent spectral oracle: materialize the adjacency matrix and
    /// diagonalize it. Returns eigenvalues sorted ascending.
    pub fn dense_spectrum_oracle(&self) -> Result<Vec<f64>> {
        let n = self.group.order();
        if n > 4096 {
            return Err(Error::SizeCap("dense oracle group order".into(), "4096".into()));
        }
        let n = n as usize;
        let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
        for g in 0..n {
            let gv = self.group.element(g);
            for s in &self.generators {
                let h = self.group.index_of(&self.group.add(&gv, s));
                a[(h, g)] += 1.0;
            }
        }
        let mut eigen: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
        eigen.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(eigen)
    }

    /// Edge list export, one `u v` pair per line; vertices are serialized
    /// as comma-joined residue vectors. Multi-edges repeat lines.
    pub fn edge_list(&self) -> String {
        let fmt = |g: &Element| {
            g.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        };
        let mut out = String::new();
        let n = self.group.order() as usize;
        for g in 0..n {
            let gv = self.group.element(g);
            for s in &self.generators {
                let hv = self.group.add(&gv, s);
                let h = self.group.index_of(&hv);
                if h >= g {
                    let _ = writeln!(out, "{} {}", fmt(&gv), fmt(&hv));
                }
            }
        }
        out
    }

    /// Spectrum CSV export: one row per character, exponent columns then
    /// the eigenvalue.
    pub fn spectrum_csv(&self) -> String {
        let r = self.group.rank();
        let mut out = String::new();
        let header: Vec<String> = (0..r).map(|j| format!("a{j}")).chain(["lambda".into()]).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for (idx, lambda) in self.spectrum().iter().enumerate() {
            let chi = self.group.element(idx);
            let mut cells: Vec<String> = chi.iter().map(|x| x.to_string()).collect();
            cells.push(format!("{lambda:.12}"));
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Spectral summary of a Cayley graph.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    pub lambda_triv: f64,
    pub max_nontrivial_abs: f64,
    /// `1 - max|lambda_nontrivial| / lambda_triv`.
    pub delta: f64,
    /// `max|lambda_nontrivial| / (lambda_triv ln lambda_triv)^(1/2 + 1/B)`.
    pub grh_ratio: f64,
    pub b: f64,
    pub connected_components: usize,
}

/// Compute the expansion summary at exponent parameter `b`.
///
/// Components are counted as the multiplicity of the trivial eigenvalue
/// (within 1e-9); requires `lambda_triv > 1` so the ratio denominator is
/// positive.
pub fn expansion_report(graph: &CayleyGraph, b: f64) -> Result<ExpansionReport> {
    let spectrum = graph.spectrum();
    let lambda_triv = graph.degree() as f64;
    if lambda_triv <= 1.0 {
        return Err(Error::RatioUndefined(lambda_triv));
    }
    let mut max_nontrivial = 0.0f64;
    let mut components = 0usize;
    for (idx, &lambda) in spectrum.iter().enumerate() {
        if (lambda - lambda_triv).abs() < 1e-9 {
            components += 1;
        }
        if idx != 0 {
            max_nontrivial = max_nontrivial.max(lambda.abs());
        }
    }
    let delta = 1.0 - max_nontrivial / lambda_triv;
    let grh_ratio = if max_nontrivial == 0.0 {
        0.0
    } else {
        max_nontrivial / (lambda_triv * lambda_triv.ln()).powf(0.5 + 1.0 / b)
    };
    Ok(ExpansionReport {
        lambda_triv,
        max_nontrivial_abs: max_nontrivial,
        delta,
        grh_ratio,
        b,
        connected_components: components,
    })
}

/// Connected components by union-find over the edge set; independent of the
/// spectral multiplicity count.
pub fn connected_components_union_find(graph: &CayleyGraph) -> usize {
    let n = graph.group().order() as usize;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for g in 0..n {
        let gv = graph.group().element(g);
        for s in graph.generators() {
            let h = graph.group().index_of(&graph.group().add(&gv, s));
            let (rg, rh) = (find(&mut parent, g), find(&mut parent, h));
            if rg != rh {
                parent[rg] = rh;
            }
        }
    }
    (0..n).filter(|&x| find(&mut parent, x) == x).count()
}

/// One signed step of a girth witness: `(base generator index, sign)`.
pub type SignedStep = (usize, i8);

/// Result of the single-sign girth search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NonabelianGirth {
    Found { length: usize, word: Vec<SignedStep> },
    AtLeast(usize),
}

/// Result of the odd-girth search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OddGirth {
    Found(usize),
    AtLeast(usize),
}

/// Shortest nontrivial closed word in which every base generator is used
/// with a single sign, by breadth-first search over (element, sign-state)
/// pairs. `base_generators` lists one representative per inverse pair.
pub fn nonabelian_girth(
    graph: &CayleyGraph,
    base_generators: &[Element],
    max_len: usize,
) -> Result<NonabelianGirth> {
    if max_len > 30 {
        return Err(Error::SizeCap("nonabelian girth search length".into(), "30".into()));
    }
    let group = graph.group();
    let m = base_generators.len();
    let states = 3usize.pow(m as u32);
    let base: Vec<Element> = base_generators.iter().map(|g| group.reduce(g)).collect();
    let neg: Vec<Element> = base.iter().map(|g| group.neg(g)).collect();

    // Sign state: base-3 digits, 0 = unused, 1 = positive, 2 = negative.
    let pow3: Vec<usize> = (0..m).map(|i| 3usize.pow(i as u32)).collect();
    let start = group.index_of(&group.identity()) * states;
    let mut dist: HashMap<usize, (usize, usize, SignedStep)> = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(start, (0, usize::MAX, (usize::MAX, 0)));
    queue.push_back(start);

    while let Some(node) = queue.pop_front() {
        let (d, _, _) = dist[&node];
        if d >= max_len {
            continue;
        }
        let elem_idx = node / states;
        let state = node % states;
        let elem = group.element(elem_idx);
        for i in 0..m {
            let digit = state / pow3[i] % 3;
            for (sign, step) in [(1i8, &base[i]), (-1i8, &neg[i])] {
                let want = if sign > 0 { 1 } else { 2 };
                if digit != 0 && digit != want {
                    continue;
                }
                let new_state = state + if digit == 0 { want * pow3[i] } else { 0 };
                let target = group.add(&elem, step);
                let target_idx = group.index_of(&target);
                if group.is_identity(&target) {
                    // Reconstruct the witness word.
                    let mut word = vec![(i, sign)];
                    let mut cursor = node;
                    while cursor != start {
                        let (_, prev, s) = dist[&cursor];
                        word.push(s);
                        cursor = prev;
                    }
                    word.reverse();
                    return Ok(NonabelianGirth::Found { length: d + 1, word });
                }
                let key = target_idx * states + new_state;
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(key) {
                    e.insert((d + 1, node, (i, sign)));
                    queue.push_back(key);
                }
            }
        }
    }
    Ok(NonabelianGirth::AtLeast(max_len))
}

/// Shortest odd closed cycle, by breadth-first search on the bipartite
/// double cover (element, parity); `AtLeast` when the graph is bipartite or
/// the bound is hit.
pub fn odd_girth(graph: &CayleyGraph, max_len: usize) -> Result<OddGirth> {
    let group = graph.group();
    if graph.loop_count() > 0 {
        return Ok(OddGirth::Found(1));
    }
    // Distinct steps suffice: multiplicities never change walk existence.
    let mut steps: Vec<Element> = graph.generators().to_vec();
    steps.sort();
    steps.dedup();

    let n = group.order() as usize;
    let mut dist = vec![usize::MAX; 2 * n];
    let start = group.index_of(&group.identity());
    dist[2 * start] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(2 * start);
    while let Some(node) = queue.pop_front() {
        let d = dist[node];
        if d >= max_len {
            continue;
        }
        let elem = group.element(node / 2);
        let parity = node % 2;
        for s in &steps {
            let t = group.index_of(&group.add(&elem, s));
            if t == start && parity == 0 {
                return Ok(OddGirth::Found(d + 1));
            }
            let key = 2 * t + (1 - parity);
            if dist[key] == usize::MAX {
                dist[key] = d + 1;
                queue.push_back(key);
            }
        }
    }
    Ok(OddGirth::AtLeast(max_len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c4_graph() -> CayleyGraph {
        let g = AbelianGroup::new(vec![4]).unwrap();
        CayleyGraph::new(g, vec![vec![1], vec![3]]).unwrap()
    }

    #[test]
    fn c4_spectrum() {
        let mut s = c4_graph().spectrum();
        assert_eq!(s[0], 2.0);
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [-2.0, 0.0, 0.0, 2.0];
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn complete_cayley_orthogonality() {
        let g = AbelianGroup::new(vec![6]).unwrap();
        let gens: Vec<Element> = g.elements().collect();
        let graph = CayleyGraph::new_with_loops(g, gens).unwrap();
        let s = graph.spectrum();
        assert_eq!(s[0], 6.0);
        for &l in &s[1..] {
            assert!(l.abs() < 1e-12);
        }
    }

    #[test]
    fn dense_oracle_matches() {
        let graph = c4_graph();
        let mut a = graph.spectrum();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let b = graph.dense_spectrum_oracle().unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn single_vertex_empty_generators() {
        let g = AbelianGroup::new(vec![1]).unwrap();
        let graph = CayleyGraph::new(g, vec![]).unwrap();
        assert_eq!(graph.spectrum(), vec![0.0]);
        assert_eq!(graph.dense_spectrum_oracle().unwrap(), vec![0.0]);
    }

    #[test]
    fn k4_spectrum_and_report() {
        let g = AbelianGroup::new(vec![2, 2]).unwrap();
        let gens = vec![vec![1, 0], vec![0, 1], vec![1, 1]];
        let graph = CayleyGraph::new(g, gens).unwrap();
        let mut s = graph.spectrum();
        s.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (a, b) in s.iter().zip([-1.0, -1.0, -1.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let report = expansion_report(&graph, 2.5).unwrap();
        assert!((report.delta - (1.0 - 1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(report.connected_components, 1);
    }

    #[test]
    fn disconnected_components() {
        // S = {2, 2} in C4 generates the index-2 subgroup: two components.
        let g = AbelianGroup::new(vec![4]).unwrap();
        let graph = CayleyGraph::new(g, vec![vec![2], vec![2]]).unwrap();
        let report = expansion_report(&graph, 2.5).unwrap();
        assert_eq!(report.connected_components, 2);
        assert_eq!(connected_components_union_find(&graph), 2);
        assert_eq!(report.delta, 0.0);
    }

    #[test]
    fn zero_nontrivial_ratio() {
        let g = AbelianGroup::new(vec![1]).unwrap();
        let graph = CayleyGraph::new_with_loops(g, vec![vec![0], vec![0]]).unwrap();
        let report = expansion_report(&graph, 2.5).unwrap();
        assert_eq!(report.max_nontrivial_abs, 0.0);
        assert_eq!(report.grh_ratio, 0.0);
        assert_eq!(report.lambda_triv, 2.0);
    }

    #[test]
    fn report_requires_degree() {
        let g = AbelianGroup::new(vec![3]).unwrap();
        let graph = CayleyGraph::new_with_loops(g, vec![vec![0]]).unwrap();
        assert!(matches!(expansion_report(&graph, 2.5), Err(Error::RatioUndefined(_))));
    }

    #[test]
    fn rejects_asymmetric_multiset() {
        let g = AbelianGroup::new(vec![5]).unwrap();
        assert!(matches!(
            CayleyGraph::new(g.clone(), vec![vec![1]]),
            Err(Error::AsymmetricGenerators)
        ));
        assert!(CayleyGraph::new(g.clone(), vec![vec![1], vec![4]]).is_ok());
        // Doubled one-sided entry also fails.
        assert!(matches!(
            CayleyGraph::new(g, vec![vec![1], vec![1], vec![4]]),
            Err(Error::AsymmetricGenerators)
        ));
    }

    #[test]
    fn identity_generator_needs_flag() {
        let g = AbelianGroup::new(vec![4]).unwrap();
        assert!(CayleyGraph::new(g.clone(), vec![vec![0]]).is_err());
        assert!(CayleyGraph::new_with_loops(g, vec![vec![0]]).is_ok());
    }

    #[test]
    fn girth_cyclic_single_generator() {
        for n in [5u64, 7, 9] {
            let g = AbelianGroup::new(vec![n]).unwrap();
            let graph = CayleyGraph::new(g, vec![vec![1], vec![n - 1]]).unwrap();
            match nonabelian_girth(&graph, &[vec![1]], 30).unwrap() {
                NonabelianGirth::Found { length, word } => {
                    assert_eq!(length, n as usize);
                    assert_eq!(word.len(), n as usize);
                    // Single sign throughout.
                    assert!(word.iter().all(|&(_, s)| s == word[0].1));
                }
                other => panic!("expected cycle of length {n}, got {other:?}"),
            }
        }
    }

    #[test]
    fn girth_order_two_generator() {
        let g = AbelianGroup::new(vec![2, 2]).unwrap();
        let gens = vec![vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1]];
        let graph = CayleyGraph::new(g, gens).unwrap();
        match nonabelian_girth(&graph, &[vec![1, 0], vec![0, 1]], 10).unwrap() {
            NonabelianGirth::Found { length, .. } => assert_eq!(length, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn odd_girth_examples() {
        // C4 is bipartite.
        assert_eq!(odd_girth(&c4_graph(), 20).unwrap(), OddGirth::AtLeast(20));
        // K4 has triangles.
        let g = AbelianGroup::new(vec![2, 2]).unwrap();
        let gens = vec![vec![1, 0], vec![0, 1], vec![1, 1]];
        let graph = CayleyGraph::new(g, gens).unwrap();
        assert_eq!(odd_girth(&graph, 20).unwrap(), OddGirth::Found(3));
        // A self-loop is an odd cycle of length 1.
        let g1 = AbelianGroup::new(vec![3]).unwrap();
        let loops = CayleyGraph::new_with_loops(g1, vec![vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(odd_girth(&loops, 20).unwrap(), OddGirth::Found(1));
    }

    #[test]
    fn exports_have_expected_shape() {
        let graph = c4_graph();
        let edges = graph.edge_list();
        // 4 vertices, degree 2: 4 undirected edges.
        assert_eq!(edges.lines().count(), 4);
        assert!(edges.lines().all(|l| l.split(' ').count() == 2));
        let csv = graph.spectrum_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("a0,lambda"));
    }

    fn random_graph(rng: &mut StdRng, max_order: u64) -> CayleyGraph {
        let group = loop {
            let rank = rng.gen_range(1..=3);
            let moduli: Vec<u64> = (0..rank).map(|_| rng.gen_range(1..=16)).collect();
            let g = AbelianGroup::new(moduli).unwrap();
            if g.order() <= max_order {
                break g;
            }
        };
        let mut gens = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let idx = rng.gen_range(0..group.order()) as usize;
            let s = group.element(idx);
            let inv = group.neg(&s);
            gens.push(s);
            gens.push(inv);
        }
        CayleyGraph::new_with_loops(group, gens).unwrap()
    }

    #[test]
    fn random_graphs_match_oracle_and_trace() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..25 {
            let graph = random_graph(&mut rng, 512);
            let mut s = graph.spectrum();
            assert!((s[0] - graph.degree() as f64).abs() < 1e-12);
            let trace: f64 = s.iter().sum();
            let loops = graph.loop_count() as f64 * graph.group().order() as f64;
            assert!((trace - loops).abs() < 1e-8 * (1.0 + loops));
            s.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let oracle = graph.dense_spectrum_oracle().unwrap();
            for (a, b) in s.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            }
            // Spectral component count agrees with union-find.
            let triv = graph.degree() as f64;
            let mult = s.iter().filter(|&&l| (l - triv).abs() < 1e-9).count();
            assert_eq!(mult, connected_components_union_find(&graph));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn spectrum_invariant_under_factor_permutation(seed in 0u64..1000) {
            let mut rng = StdRng::seed_from_u64(seed);
            let rank = rng.gen_range(2..=3);
            let moduli: Vec<u64> = (0..rank).map(|_| rng.gen_range(1..=8)).collect();
            let group = AbelianGroup::new(moduli.clone()).unwrap();
            let mut gens = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                let s = group.element(rng.gen_range(0..group.order()) as usize);
                gens.push(group.neg(&s));
                gens.push(s);
            }
            let graph = CayleyGraph::new_with_loops(group, gens.clone()).unwrap();

            // Reverse the factor order and permute generator coordinates.
            let rev_moduli: Vec<u64> = moduli.iter().rev().copied().collect();
            let rev_group = AbelianGroup::new(rev_moduli).unwrap();
            let rev_gens: Vec<Element> = gens
                .iter()
                .map(|s| s.iter().rev().copied().collect())
                .collect();
            let rev_graph = CayleyGraph::new_with_loops(rev_group, rev_gens).unwrap();

            let mut a = graph.spectrum();
            let mut b = rev_graph.spectrum();
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-8);
            }
        }
    }
}
