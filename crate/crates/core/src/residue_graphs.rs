//! Unit groups `(Z/qZ)*` with small-prime generators: the structure map to a
//! product of cyclic factors, the generator multiset of primes `p <= x`
//! together with their inverses, the resulting Cayley graphs, and the
//! character-over-primes sums that reproduce the spectrum along a second
//! route.

use serde::Serialize;

use crate::abelian::{AbelianGroup, CayleyGraph, Character, Element};
use crate::arith::{self, factor_u64, gcd_u64, inv_mod_u64, mul_mod_u64, pow_mod_u64, primes_up_to};
use crate::error::Error;
use crate::Result;

/// Largest supported modulus; discrete logs are full enumeration tables.
pub const MAX_Q: u64 = 10_000_000;

/// One prime-power block of `(Z/qZ)*` with its enumeration-backed dlog table.
#[derive(Debug, Clone)]
struct PrimePowerBlock {
    /// The prime power p^e this block covers.
    pe: u64,
    /// Index of this block's first cyclic factor inside the group moduli.
    start: usize,
    /// Number of cyclic factors (2 only for p = 2, e >= 3).
    count: usize,
    /// Packed dlog table over residues mod p^e; `u32::MAX` marks non-units.
    /// For two-factor blocks the entry packs `sign_exp + 2 * five_exp`.
    table: Vec<u32>,
}

/// `(Z/qZ)*` as an explicit product of cyclic groups with mutually inverse
/// residue-to-vector and vector-to-residue maps.
#[derive(Debug, Clone)]
pub struct UnitGroup {
    q: u64,
    factorization: Vec<(u64, u32)>,
    group: AbelianGroup,
    blocks: Vec<PrimePowerBlock>,
    /// CRT-lifted generator of each cyclic factor, as a residue mod q.
    factor_generators: Vec<u64>,
}

/// Smallest primitive root modulo the odd prime power `pe = p^e`, found by
/// exhaustive order testing.
fn smallest_primitive_root(p: u64, pe: u64, phi: u64) -> u64 {
    let phi_primes: Vec<u64> = factor_u64(phi).into_iter().map(|(r, _)| r).collect();
    'cand: for g in 2..pe {
        if g % p == 0 {
            continue;
        }
        for &r in &phi_primes {
            if pow_mod_u64(g, phi / r, pe) == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    unreachable!("odd prime powers always have primitive roots");
}

impl UnitGroup {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn phi(&self) -> u64 {
        self.group.order()
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn factorization(&self) -> &[(u64, u32)] {
        &self.factorization
    }

    /// Map a unit residue to its exponent vector.
    pub fn forward(&self, r: u64) -> Result<Element> {
        let r = r % self.q;
        if gcd_u64(r, self.q) != 1 {
            return Err(Error::domain(format!("{r} is not a unit mod {}", self.q)));
        }
        let mut out = vec![0u64; self.group.rank()];
        for block in &self.blocks {
            let packed = block.table[(r % block.pe) as usize];
            debug_assert_ne!(packed, u32::MAX);
            if block.count == 1 {
                out[block.start] = packed as u64;
            } else {
                out[block.start] = (packed % 2) as u64;
                out[block.start + 1] = (packed / 2) as u64;
            }
        }
        Ok(out)
    }

    /// Map an exponent vector back to its unit residue.
    pub fn to_residue(&self, el: &[u64]) -> u64 {
        let mut acc = 1 % self.q;
        for (g, (&e, &d)) in self.factor_generators.iter().zip(el.iter().zip(self.group.moduli())) {
            acc = mul_mod_u64(acc, pow_mod_u64(*g, e % d, self.q), self.q);
        }
        acc
    }
}

/// Build the cyclic decomposition of `(Z/qZ)*` for `3 <= q <= 10^7`.
///
/// Odd prime powers contribute one cyclic factor generated by the smallest
/// primitive root; `2^e` contributes nothing for e = 1, `C_2 = <-1>` for
/// e = 2, and `C_2 x C_{2^(e-2)} = <-1> x <5>` for e >= 3. Blocks are
/// ordered by prime.
pub fn unit_group_structure(q: u64) -> Result<UnitGroup> {
    if q < 3 {
        return Err(Error::domain(format!("unit group modulus must be >= 3, got {q}")));
    }
    if q > MAX_Q {
        return Err(Error::SizeCap(format!("unit group modulus {q}"), MAX_Q.to_string()));
    }
    let factorization = factor_u64(q);
    let mut moduli = Vec::new();
    let mut blocks = Vec::new();
    let mut generators_mod_pe: Vec<(u64, u64)> = Vec::new(); // (generator mod pe, pe)

    for &(p, e) in &factorization {
        let pe = p.pow(e);
        if p == 2 {
            match e {
                1 => continue,
                2 => {
                    // (Z/4)* = {1, 3} = <-1>.
                    let mut table = vec![u32::MAX; 4];
                    table[1] = 0;
                    table[3] = 1;
                    blocks.push(PrimePowerBlock { pe, start: moduli.len(), count: 1, table });
                    moduli.push(2);
                    generators_mod_pe.push((3, pe));
                }
                _ => {
                    // (Z/2^e)* = <-1> x <5>.
                    let half = pe / 4; // order of 5
                    let mut table = vec![u32::MAX; pe as usize];
                    for sign in 0..2u64 {
                        let mut acc = if sign == 0 { 1 } else { pe - 1 };
                        for j in 0..half {
                            table[acc as usize] = (sign + 2 * j) as u32;
                            acc = acc * 5 % pe;
                        }
                    }
                    blocks.push(PrimePowerBlock { pe, start: moduli.len(), count: 2, table });
                    moduli.push(2);
                    moduli.push(half);
                    generators_mod_pe.push((pe - 1, pe));
                    generators_mod_pe.push((5, pe));
                }
            }
        } else {
            let phi = pe / p * (p - 1);
            let g = smallest_primitive_root(p, pe, phi);
            let mut table = vec![u32::MAX; pe as usize];
            let mut acc = 1u64;
            for k in 0..phi {
                table[acc as usize] = k as u32;
                acc = mul_mod_u64(acc, g, pe);
            }
            blocks.push(PrimePowerBlock { pe, start: moduli.len(), count: 1, table });
            moduli.push(phi);
            generators_mod_pe.push((g, pe));
        }
    }

    // CRT-lift each factor generator to a residue mod q that is 1 modulo
    // every other prime power.
    let q_total = q;
    let mut factor_generators = Vec::with_capacity(generators_mod_pe.len());
    for &(g, pe) in &generators_mod_pe {
        let rest = q_total / pe;
        let lifted = if rest == 1 {
            g % q_total
        } else {
            // x = 1 + rest * t with t chosen so x = g mod pe.
            let inv = inv_mod_u64(rest % pe, pe).expect("coprime CRT cofactor");
            let t = mul_mod_u64((g + pe - 1) % pe, inv, pe);
            (1 + (rest as u128 * t as u128 % q_total as u128) as u64) % q_total
        };
        factor_generators.push(lifted);
    }

    let group = AbelianGroup::new(moduli)?;
    let ug = UnitGroup { q, factorization, group, blocks, factor_generators };
    debug_assert_eq!(ug.to_residue(&ug.group.identity()), 1 % q);
    Ok(ug)
}

/// The generator multiset `S_x`: for every prime `p <= x` coprime to `q`,
/// the image of `p` and of `p^{-1}`, each pushed once (so a prime with
/// `p^2 = 1 mod q` contributes the same element twice).
pub fn generator_multiset(units: &UnitGroup, x: u64) -> Vec<Element> {
    let mut out = Vec::new();
    for p in primes_up_to(x) {
        if units.q() % p == 0 {
            continue;
        }
        let r = p % units.q();
        let inv = inv_mod_u64(r, units.q()).expect("coprime");
        out.push(units.forward(r).expect("unit"));
        out.push(units.forward(inv).expect("unit"));
    }
    out
}

/// How the prime bound `x` is chosen.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum XBound {
    /// `x = ceil((ln q)^B)`.
    Exponent(f64),
    Explicit(u64),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrhGraphConfig {
    pub q: u64,
    pub bound: XBound,
}

impl GrhGraphConfig {
    pub fn resolve_x(&self) -> u64 {
        match self.bound {
            XBound::Explicit(x) => x,
            XBound::Exponent(b) => (self.q as f64).ln().powf(b).ceil() as u64,
        }
    }
}

/// A unit-group Cayley graph together with its construction parameters.
#[derive(Debug, Clone)]
pub struct GrhGraph {
    pub units: UnitGroup,
    pub graph: CayleyGraph,
    pub x: u64,
    pub b: Option<f64>,
}

/// Build `Cay((Z/qZ)*, S_x)`.
///
/// Fails with the smallest admissible `x` when no prime `<= x` is coprime
/// to `q`. A prime congruent to 1 mod q maps to the identity and yields
/// self-loops, so the loop-permitting constructor is used.
pub fn build_grh_graph(config: &GrhGraphConfig) -> Result<GrhGraph> {
    let units = unit_group_structure(config.q)?;
    let x = config.resolve_x();
    let gens = generator_multiset(&units, x);
    if gens.is_empty() {
        let minimum = primes_up_to(2 * config.q + 3)
            .into_iter()
            .find(|&p| config.q % p != 0)
            .unwrap_or(2);
        return Err(Error::EmptyGenerators { parameter: "x".into(), minimum });
    }
    let graph = CayleyGraph::new_with_loops(units.group().clone(), gens)?;
    let b = match config.bound {
        XBound::Exponent(b) => Some(b),
        XBound::Explicit(_) => None,
    };
    Ok(GrhGraph { units, graph, x, b })
}

/// `2 Re sum_{p <= x, p coprime to q} chi(p)`: the spectrum of the graph
/// along the prime-sum route. For the trivial character this is twice the
/// number of contributing primes.
pub fn character_prime_sum(units: &UnitGroup, chi: &Character, x: u64) -> f64 {
    let mut acc = 0.0;
    for p in primes_up_to(x) {
        if units.q() % p == 0 {
            continue;
        }
        let el = units.forward(p % units.q()).expect("unit");
        acc += 2.0 * chi.eval(units.group(), &el).0;
    }
    acc
}

/// Smallest prime `p` with Legendre symbol `(p/q) = -1`, for odd prime `q`.
pub fn least_prime_nonresidue(q: u64) -> u64 {
    debug_assert!(q >= 3 && arith::is_prime_u64(q) && q % 2 == 1);
    let mut bound = 64;
    loop {
        for p in primes_up_to(bound) {
            if arith::kronecker(p as i128, q as i128) == -1 {
                return p;
            }
        }
        bound *= 4;
        assert!(bound <= 16 * q, "nonresidues exist below q for odd prime q");
    }
}

/// Per-q record emitted by the CLI survey.
#[derive(Debug, Clone, Serialize)]
pub struct UnitGraphRecord {
    pub q: u64,
    pub x: u64,
    pub b: Option<f64>,
    pub k: usize,
    pub lambda_triv: f64,
    pub max_nontrivial: f64,
    pub delta: f64,
    pub grh_ratio: f64,
    pub components: usize,
}

impl UnitGraphRecord {
    pub fn build(grh: &GrhGraph, b_for_ratio: f64) -> Result<Self> {
        let report = crate::abelian::expansion_report(&grh.graph, b_for_ratio)?;
        Ok(UnitGraphRecord {
            q: grh.units.q(),
            x: grh.x,
            b: grh.b,
            k: grh.graph.degree(),
            lambda_triv: report.lambda_triv,
            max_nontrivial: report.max_nontrivial_abs,
            delta: report.delta,
            grh_ratio: report.grh_ratio,
            components: report.connected_components,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::expansion_report;

    #[test]
    fn structures_match_known_decompositions() {
        assert_eq!(unit_group_structure(5).unwrap().group().moduli(), &[4]);
        assert_eq!(unit_group_structure(8).unwrap().group().moduli(), &[2, 2]);
        assert_eq!(unit_group_structure(15).unwrap().group().moduli(), &[2, 4]);
        assert_eq!(unit_group_structure(16).unwrap().group().moduli(), &[2, 4]);
        assert_eq!(unit_group_structure(7).unwrap().group().moduli(), &[6]);
        assert!(unit_group_structure(2).is_err());
    }

    #[test]
    fn forward_is_an_isomorphism() {
        for q in [5u64, 6, 8, 12, 15, 16, 24, 45, 99, 101, 128, 360, 1009] {
            let ug = unit_group_structure(q).unwrap();
            let units: Vec<u64> = (1..q).filter(|&r| gcd_u64(r, q) == 1).collect();
            assert_eq!(units.len() as u64, ug.phi(), "phi({q})");
            assert_eq!(ug.forward(1).unwrap(), ug.group().identity());
            for &r in &units {
                let el = ug.forward(r).unwrap();
                assert_eq!(ug.to_residue(&el), r, "roundtrip {r} mod {q}");
            }
            // Homomorphism on a sample of pairs.
            for (i, &a) in units.iter().enumerate().step_by(7) {
                let b = units[(i * 13 + 5) % units.len()];
                let lhs = ug.forward(mul_mod_u64(a, b, q)).unwrap();
                let rhs = ug.group().add(&ug.forward(a).unwrap(), &ug.forward(b).unwrap());
                assert_eq!(lhs, rhs);
            }
            assert!(ug.forward(0).is_err());
        }
    }

    #[test]
    fn graph_order_is_phi_by_gcd_count() {
        for q in (3u64..=2000).chain((2001..=10_000).step_by(97)) {
            let ug = unit_group_structure(q).unwrap();
            let count = (1..q).filter(|&r| gcd_u64(r, q) == 1).count() as u64;
            assert_eq!(ug.phi(), count, "q = {q}");
        }
    }

    #[test]
    fn generator_multiset_examples() {
        let as_residues = |els: &[Element], ug: &UnitGroup| -> Vec<u64> {
            els.iter().map(|e| ug.to_residue(e)).collect()
        };
        let ug5 = unit_group_structure(5).unwrap();
        assert_eq!(as_residues(&generator_multiset(&ug5, 3), &ug5), vec![2, 3, 3, 2]);
        assert_eq!(as_residues(&generator_multiset(&ug5, 2), &ug5), vec![2, 3]);

        let ug6 = unit_group_structure(6).unwrap();
        assert_eq!(as_residues(&generator_multiset(&ug6, 5), &ug6), vec![5, 5]);
        assert!(generator_multiset(&ug6, 4).is_empty());
    }

    #[test]
    fn grh_graph_small_cases() {
        // q = 5, x = 3: 4-regular on 4 vertices, spectrum {4, 0, -4, 0}.
        let g = build_grh_graph(&GrhGraphConfig { q: 5, bound: XBound::Explicit(3) }).unwrap();
        assert_eq!(g.graph.degree(), 4);
        assert_eq!(g.graph.group().order(), 4);
        let mut s = g.graph.spectrum();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in s.iter().zip([-4.0, 0.0, 0.0, 4.0]) {
            assert!((a - b).abs() < 1e-12);
        }

        // q = 7, x = 2: 2 has order 3 mod 7, so two components.
        let g = build_grh_graph(&GrhGraphConfig { q: 7, bound: XBound::Explicit(2) }).unwrap();
        assert_eq!(g.graph.degree(), 2);
        let report = expansion_report(&g.graph, 2.5).unwrap();
        assert_eq!(report.connected_components, 2);

        // q prime, x >= q: degree 2(pi(x) - 1).
        let g = build_grh_graph(&GrhGraphConfig { q: 13, bound: XBound::Explicit(13) }).unwrap();
        assert_eq!(g.graph.degree(), 2 * (primes_up_to(13).len() - 1));
    }

    #[test]
    fn empty_generator_error_names_minimum() {
        let err = build_grh_graph(&GrhGraphConfig { q: 6, bound: XBound::Explicit(4) });
        match err {
            Err(Error::EmptyGenerators { minimum, .. }) => assert_eq!(minimum, 5),
            other => panic!("expected EmptyGenerators, got {other:?}"),
        }
    }

    #[test]
    fn lambda_triv_counts_coprime_primes() {
        for (q, x) in [(5u64, 10u64), (12, 20), (1009, 126)] {
            let g = build_grh_graph(&GrhGraphConfig { q, bound: XBound::Explicit(x) }).unwrap();
            let coprime = primes_up_to(x).into_iter().filter(|&p| q % p != 0).count();
            assert_eq!(g.graph.degree(), 2 * coprime);
            assert_eq!(g.graph.spectrum()[0], (2 * coprime) as f64);
        }
    }

    #[test]
    fn spectrum_matches_character_prime_sums() {
        for (q, x) in [(5u64, 10u64), (35, 10), (16, 13), (101, 30)] {
            let g = build_grh_graph(&GrhGraphConfig { q, bound: XBound::Explicit(x) }).unwrap();
            let spectrum = g.graph.spectrum();
            for idx in 0..g.units.phi() as usize {
                let chi = Character::nth(g.units.group(), idx);
                let via_primes = character_prime_sum(&g.units, &chi, x);
                assert!(
                    (spectrum[idx] - via_primes).abs() < 1e-8,
                    "q={q} chi#{idx}: {} vs {}",
                    spectrum[idx],
                    via_primes
                );
            }
        }
    }

    #[test]
    fn trivial_character_prime_sum() {
        let ug = unit_group_structure(5).unwrap();
        let chi = Character::nth(ug.group(), 0);
        // Primes 2, 3, 7 are <= 10 and coprime to 5.
        assert_eq!(character_prime_sum(&ug, &chi, 10), 6.0);
        assert_eq!(character_prime_sum(&ug, &chi, 1), 0.0);
    }

    #[test]
    fn least_nonresidue_examples() {
        assert_eq!(least_prime_nonresidue(5), 2);
        assert_eq!(least_prime_nonresidue(7), 3);
        assert_eq!(least_prime_nonresidue(3), 2);
        assert_eq!(least_prime_nonresidue(71), 7);
    }

    #[test]
    fn no_cancellation_below_least_nonresidue() {
        // For odd prime q the quadratic character has exponent phi/2; below
        // the least nonresidue every prime contributes +2.
        for q in [7u64, 11, 23, 71] {
            let lnr = least_prime_nonresidue(q);
            if lnr < 3 {
                continue;
            }
            let x = lnr - 1;
            let ug = unit_group_structure(q).unwrap();
            let chi = Character { exponents: vec![ug.phi() / 2] };
            let triv = Character::nth(ug.group(), 0);
            let quad_sum = character_prime_sum(&ug, &chi, x);
            let triv_sum = character_prime_sum(&ug, &triv, x);
            assert_eq!(quad_sum, triv_sum, "q={q}");
        }
    }
}
