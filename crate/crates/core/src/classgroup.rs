//! Imaginary-quadratic class groups via primitive positive-definite binary
//! quadratic forms: reduction, Gauss composition, reduced-form enumeration,
//! prime forms, and the resulting class-group Cayley graphs.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::abelian::{AbelianGroup, CayleyGraph, Element};
use crate::arith::{fundamental_decomposition, gcd_i64, kronecker};
use crate::error::Error;
use crate::Result;

/// A binary quadratic form `a x^2 + b xy + c y^2` with `D = b^2 - 4ac < 0`,
/// `a > 0`, `gcd(a, b, c) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        let f = QuadForm { a, b, c };
        if a <= 0 || f.discriminant() >= 0 || gcd_i64(gcd_i64(a, b), c) != 1 {
            return Err(Error::InvalidForm(a, b, c));
        }
        Ok(f)
    }

    pub fn discriminant(&self) -> i64 {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        (b * b - 4 * a * c) as i64
    }

    /// The principal form of discriminant `d`.
    pub fn identity(d: i64) -> Result<Self> {
        if d >= 0 {
            return Err(Error::InvalidDiscriminant(d));
        }
        match d.rem_euclid(4) {
            0 => QuadForm::new(1, 0, -d / 4),
            1 => QuadForm::new(1, 1, (1 - d) / 4),
            _ => Err(Error::InvalidDiscriminant(d)),
        }
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() < a && a < c))
    }

    /// The unique reduced representative of this form's class.
    pub fn reduce(&self) -> QuadForm {
        let d = self.discriminant() as i128;
        let (mut a, mut b) = (self.a as i128, self.b as i128);
        loop {
            // Normalize b into (-a, a].
            if b > a || b <= -a {
                let r = b.rem_euclid(2 * a);
                b = if r > a { r - 2 * a } else { r };
            }
            let c = (b * b - d) / (4 * a);
            if a > c {
                // Swap outer coefficients and flip the middle sign.
                b = -b;
                a = c;
                continue;
            }
            if (a == c || b.abs() == a) && b < 0 {
                b = -b;
            }
            let f = QuadForm { a: a as i64, b: b as i64, c: c as i64 };
            debug_assert!(f.is_reduced());
            debug_assert_eq!(f.discriminant() as i128, d);
            return f;
        }
    }

    /// The inverse class: `(a, -b, c)`, reduced.
    pub fn inverse(&self) -> QuadForm {
        QuadForm { a: self.a, b: -self.b, c: self.c }.reduce()
    }

    pub fn is_principal(&self) -> bool {
        self.reduce().a == 1
    }
}

fn ext_gcd3(a: i128, b: i128, c: i128) -> (i128, i128, i128, i128) {
    let (g1, u1, v1) = crate::arith::ext_gcd(a, b);
    let (g, u2, v2) = crate::arith::ext_gcd(g1, c);
    (g, u2 * u1, u2 * v1, v2)
}

/// Gauss composition of two forms of equal discriminant; returns the
/// reduced composite.
pub fn compose(f1: &QuadForm, f2: &QuadForm) -> Result<QuadForm> {
    let d = f1.discriminant();
    if d != f2.discriminant() {
        return Err(Error::DiscriminantMismatch(d, f2.discriminant()));
    }
    let (a1, b1) = (f1.a as i128, f1.b as i128);
    let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
    let s = (b1 + b2) / 2;
    let n = (b1 - b2) / 2;
    let (g, _u, v, w) = ext_gcd3(a1, a2, s);
    let a = a1 / g * (a2 / g);
    let b_raw = b2 + 2 * (a2 / g) * (v * n - w * c2);
    let two_a = 2 * a;
    let b = b_raw.rem_euclid(two_a);
    debug_assert_eq!((b * b - d as i128) % (4 * a), 0);
    let c = (b * b - d as i128) / (4 * a);
    Ok(QuadForm { a: a as i64, b: b as i64, c: c as i64 }.reduce())
}

/// `f` composed with itself `k` times, by repeated squaring.
pub fn power(f: &QuadForm, mut k: u64) -> Result<QuadForm> {
    let d = f.discriminant();
    let mut acc = QuadForm::identity(d)?;
    let mut base = f.reduce();
    while k > 0 {
        if k & 1 == 1 {
            acc = compose(&acc, &base)?;
        }
        base = compose(&base, &base)?;
        k >>= 1;
    }
    Ok(acc)
}

/// The class group `Cl(O_D)` with an explicit cyclic decomposition and a
/// form-to-vector discrete log map.
#[derive(Debug, Clone)]
pub struct ClassGroup {
    d: i64,
    forms: Vec<QuadForm>,
    group: AbelianGroup,
    basis: Vec<QuadForm>,
    dlog: HashMap<QuadForm, Element>,
    by_index: Vec<QuadForm>,
}

impl ClassGroup {
    pub fn discriminant(&self) -> i64 {
        self.d
    }

    pub fn h(&self) -> u64 {
        self.forms.len() as u64
    }

    /// Reduced forms in canonical (lexicographic) order.
    pub fn forms(&self) -> &[QuadForm] {
        &self.forms
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    /// Generators of the cyclic factors, parallel to `group().moduli()`.
    pub fn basis(&self) -> &[QuadForm] {
        &self.basis
    }

    pub fn identity_form(&self) -> QuadForm {
        QuadForm::identity(self.d).expect("valid discriminant")
    }

    /// Exponent vector of a form's class.
    pub fn to_element(&self, f: &QuadForm) -> Element {
        self.dlog[&f.reduce()].clone()
    }

    pub fn from_element(&self, el: &Element) -> QuadForm {
        self.by_index[self.group.index_of(el)]
    }

    /// Invariant factors `d_1 | d_2 | ...` in ascending order.
    pub fn invariant_factors(&self) -> Vec<u64> {
        let mut by_prime: HashMap<u64, Vec<u32>> = HashMap::new();
        for &m in self.group.moduli() {
            for (p, e) in crate::arith::factor_u64(m) {
                by_prime.entry(p).or_default().push(e);
            }
        }
        let mut slots = 0usize;
        for exps in by_prime.values_mut() {
            exps.sort_unstable_by(|x, y| y.cmp(x));
            slots = slots.max(exps.len());
        }
        let mut factors = vec![1u64; slots];
        for (p, exps) in by_prime {
            for (i, e) in exps.into_iter().enumerate() {
                factors[i] *= p.pow(e);
            }
        }
        factors.retain(|&f| f > 1);
        factors.reverse();
        if factors.is_empty() {
            factors.push(1);
        }
        factors
    }
}

fn isqrt_u64(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r > 0 && r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn validate_discriminant(d: i64) -> Result<()> {
    if d >= 0 || !(d % 4 == 0 || d.rem_euclid(4) == 1) {
        return Err(Error::InvalidDiscriminant(d));
    }
    if d.unsigned_abs() > 100_000_000 {
        return Err(Error::SizeCap(format!("discriminant {d}"), "1e8".into()));
    }
    Ok(())
}

/// Enumerate all reduced primitive forms of discriminant `d`.
pub fn reduced_forms(d: i64) -> Result<Vec<QuadForm>> {
    validate_discriminant(d)?;
    let abs_d = d.unsigned_abs();
    let a_max = isqrt_u64(abs_d / 3).max(1);
    let mut out = Vec::new();
    for a in 1..=a_max as i64 {
        let parity = d.rem_euclid(2);
        let mut b = -a + 1;
        if b.rem_euclid(2) != parity {
            b += 1;
        }
        while b <= a {
            let num = (b as i128) * (b as i128) - d as i128;
            if num % (4 * a as i128) == 0 {
                let c = (num / (4 * a as i128)) as i64;
                if c >= a && gcd_i64(gcd_i64(a, b), c) == 1 {
                    let boundary_ok = b >= 0 || (b.abs() < a && a < c);
                    if boundary_ok {
                        out.push(QuadForm { a, b, c });
                    }
                }
            }
            b += 2;
        }
    }
    out.sort();
    Ok(out)
}

/// Basis of an abelian p-group given by its element list and a composition
/// projector; returns `(generator, order)` pairs, largest order first.
fn abelian_p_basis(
    elems: &[QuadForm],
    p: u64,
    identity: &QuadForm,
    project: &dyn Fn(&QuadForm) -> QuadForm,
) -> Vec<(QuadForm, u64)> {
    if elems.len() <= 1 {
        return Vec::new();
    }
    let op = |x: &QuadForm, y: &QuadForm| project(&compose(x, y).expect("same discriminant"));
    let order = |x: &QuadForm| -> u64 {
        let mut acc = *x;
        let mut ord = 1;
        while acc != *identity {
            acc = op(&acc, x);
            ord += 1;
        }
        ord
    };

    let mut g = *identity;
    let mut max_ord = 1;
    for f in elems {
        let o = order(f);
        if o > max_ord {
            max_ord = o;
            g = *f;
        }
    }
    if max_ord as usize == elems.len() {
        return vec![(g, max_ord)];
    }

    // Powers of g, for coset canonicalization and discrete logs in <g>.
    let mut g_powers = vec![*identity];
    for _ in 1..max_ord {
        let last = *g_powers.last().unwrap();
        g_powers.push(op(&last, &g));
    }

    // Quotient by <g>: canonical coset representative = coset minimum.
    let mut rep: HashMap<QuadForm, QuadForm> = HashMap::new();
    for f in elems {
        if rep.contains_key(f) {
            continue;
        }
        let coset: Vec<QuadForm> = g_powers.iter().map(|gp| op(f, gp)).collect();
        let canon = *coset.iter().min().unwrap();
        for x in coset {
            rep.insert(x, canon);
        }
    }
    let mut quotient: Vec<QuadForm> = rep.values().copied().collect();
    quotient.sort();
    quotient.dedup();

    let project2 = |x: &QuadForm| rep[&project(x)];
    let sub = abelian_p_basis(&quotient, p, &rep[identity], &project2);

    let mut basis = vec![(g, max_ord)];
    for (zbar, ord_q) in sub {
        // Lift: zbar^ord_q lands in <g>; divide out the matching power of g.
        let mut zp = zbar;
        let mut k = 1;
        while k < ord_q {
            zp = op(&zp, &zbar);
            k += 1;
        }
        let t = g_powers.iter().position(|gp| *gp == zp).expect("power of g") as u64;
        assert_eq!(t % ord_q, 0, "lift divisibility");
        let shift = (max_ord - t / ord_q) % max_ord;
        let mut w = zbar;
        let mut s = 0;
        while s < shift {
            w = op(&w, &g);
            s += 1;
        }
        debug_assert_eq!(order(&w), ord_q);
        basis.push((w, ord_q));
    }
    basis
}

/// Build `Cl(O_D)` by enumerating reduced forms and extracting the cyclic
/// decomposition from element orders, one Sylow subgroup at a time.
pub fn class_group(d: i64) -> Result<ClassGroup> {
    let forms = reduced_forms(d)?;
    let h = forms.len() as u64;
    let identity = QuadForm::identity(d)?;
    debug_assert!(forms.contains(&identity));

    let mut basis: Vec<(QuadForm, u64)> = Vec::new();
    let mut hf = crate::arith::factor_u64(h);
    hf.sort_unstable();
    for &(p, e) in &hf {
        let cofactor = h / p.pow(e);
        let mut sylow: Vec<QuadForm> = forms
            .iter()
            .map(|f| power(f, cofactor).expect("valid"))
            .collect();
        sylow.sort();
        sylow.dedup();
        debug_assert_eq!(sylow.len() as u64, p.pow(e));
        let reduce_only = |x: &QuadForm| *x;
        basis.extend(abelian_p_basis(&sylow, p, &identity, &reduce_only));
    }

    let moduli: Vec<u64> =
        if basis.is_empty() { vec![1] } else { basis.iter().map(|&(_, o)| o).collect() };
    let basis_forms: Vec<QuadForm> =
        if basis.is_empty() { vec![identity] } else { basis.iter().map(|&(f, _)| f).collect() };
    let group = AbelianGroup::new(moduli)?;
    debug_assert_eq!(group.order(), h);

    // Enumerate the whole group once to build the dlog map; distinctness
    // proves the basis generates a direct product.
    let mut dlog = HashMap::with_capacity(h as usize);
    let mut by_index = vec![identity; h as usize];
    for idx in 0..h as usize {
        let exps = group.element(idx);
        let mut f = identity;
        for (gen, &e) in basis_forms.iter().zip(&exps) {
            f = compose(&f, &power(gen, e)?)?;
        }
        by_index[idx] = f;
        if dlog.insert(f, exps).is_some() {
            panic!("cyclic decomposition failed to enumerate Cl({d}) bijectively");
        }
    }
    debug_assert_eq!(dlog.len() as u64, h);

    Ok(ClassGroup { d, forms, group, basis: basis_forms, dlog, by_index })
}

/// How a prime interacts with the discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Splitting {
    Split,
    Ramified,
    Inert,
}

/// Splitting type of `ell` in the order of discriminant `d`.
pub fn splitting(d: i64, ell: u64) -> Splitting {
    match kronecker(d as i128, ell as i128) {
        1 => Splitting::Split,
        0 => Splitting::Ramified,
        _ => Splitting::Inert,
    }
}

/// The reduced class of an ideal of prime norm `ell`, or `None` when `ell`
/// is inert. Rejects primes dividing the conductor (non-invertible ideals).
///
/// The representative is `(ell, b, (b^2 - D)/(4 ell))` for the smallest
/// `b >= 0` with `b^2 = D mod 4 ell` and `b = D mod 2`; the conjugate ideal
/// is its inverse class.
pub fn prime_form(d: i64, ell: u64) -> Result<Option<QuadForm>> {
    validate_discriminant(d)?;
    let (_, conductor) = fundamental_decomposition(d as i128)?;
    if conductor % ell == 0 {
        return Err(Error::NonInvertibleIdeal(ell, d));
    }
    if kronecker(d as i128, ell as i128) == -1 {
        return Ok(None);
    }
    let parity = d.rem_euclid(2);
    let mut b = parity;
    while b <= 2 * ell as i64 {
        let num = (b as i128) * (b as i128) - d as i128;
        if num % (4 * ell as i128) == 0 {
            let c = (num / (4 * ell as i128)) as i64;
            let f = QuadForm::new(ell as i64, b, c)?;
            return Ok(Some(f.reduce()));
        }
        b += 2;
    }
    unreachable!("non-inert primes coprime to the conductor are representable");
}

/// One generator of a class-group Cayley graph, with report-facing flags.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorInfo {
    pub ell: u64,
    pub splitting: Splitting,
    pub form: String,
    pub self_inverse: bool,
    pub principal: bool,
}

/// A class-group Cayley graph plus the data that produced it.
#[derive(Debug)]
pub struct ClassCayley {
    pub class_group: ClassGroup,
    pub graph: CayleyGraph,
    pub generators: Vec<GeneratorInfo>,
    pub m: u64,
}

/// `Cay(Cl(O_D), S)` where `S` pairs the prime form and its inverse for
/// every non-inert prime `ell < M` coprime to the conductor. A ramified
/// prime contributes its self-inverse class twice (image and inverse).
pub fn class_cayley_graph(d: i64, m: u64) -> Result<ClassCayley> {
    class_cayley_graph_for_primes(d, m, &crate::arith::primes_up_to(m.saturating_sub(1)))
}

/// Same as [`class_cayley_graph`] but over an explicit candidate prime set
/// (used to mirror an isogeny graph built from a restricted table).
pub fn class_cayley_graph_for_primes(d: i64, m: u64, primes: &[u64]) -> Result<ClassCayley> {
    let cg = class_group(d)?;
    let (_, conductor) = fundamental_decomposition(d as i128)?;
    let mut gens: Vec<Element> = Vec::new();
    let mut infos = Vec::new();
    for &ell in primes {
        if conductor % ell == 0 {
            continue;
        }
        let Some(pf) = prime_form(d, ell)? else { continue };
        let inv = pf.inverse();
        gens.push(cg.to_element(&pf));
        gens.push(cg.to_element(&inv));
        infos.push(GeneratorInfo {
            ell,
            splitting: splitting(d, ell),
            form: pf.to_string(),
            self_inverse: pf == inv,
            principal: pf.is_principal(),
        });
    }
    if gens.is_empty() {
        let minimum = crate::arith::primes_up_to(2 * d.unsigned_abs() + 100)
            .into_iter()
            .find(|&ell| conductor % ell != 0 && kronecker(d as i128, ell as i128) != -1)
            .map(|ell| ell + 1)
            .unwrap_or(2);
        return Err(Error::EmptyGenerators { parameter: "M".into(), minimum });
    }
    let graph = CayleyGraph::new_with_loops(cg.group().clone(), gens)?;
    Ok(ClassCayley { class_group: cg, graph, generators: infos, m })
}

/// Class-group report payload.
#[derive(Debug, Clone, Serialize)]
pub struct ClassGroupRecord {
    pub d: i64,
    pub h: u64,
    pub cyclic_factors: Vec<u64>,
    pub generators_used: Vec<GeneratorInfo>,
    pub spectrum_summary: crate::abelian::ExpansionReport,
}
