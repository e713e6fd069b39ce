//! The semigroup reduced modulo `q`: closures, admissible residues and the
//! search for local obstructions.
//!
//! Over a finite ring a semigroup of invertible matrices is a group, so the
//! closure is computed as a breadth-first fixpoint under right multiplication
//! by generators. Matrices are packed into one `u64` as `((a·q + b)·q + c)·q + d`.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::cf::Alphabet;
use crate::error::{Error, Result};
use crate::numth::{factorize, gcd, prime_power, prime_powers_up_to, primes_up_to, sl2_order};
use crate::orbit::DetFilter;

/// Largest modulus accepted by [`closure_mod_q`].
pub const TABLE_BUDGET: u64 = 512;
/// Moduli up to this size use a `q⁴` bitset for membership; larger ones a hash set.
pub const BITSET_LIMIT: u64 = 128;
/// Closures larger than this are refused as a resource error.
pub const MAX_CLOSURE: usize = 1 << 25;
/// Default bound for obstruction searches.
pub const DEFAULT_Q_MAX: u64 = 120;

pub type ModMat = [u64; 4];

enum Membership {
    Bits(Vec<u64>),
    Hash(HashSet<u64>),
}

impl Membership {
    fn new(q: u64) -> Self {
        if q <= BITSET_LIMIT {
            let bits = (q as usize).pow(4);
            Membership::Bits(vec![0; bits.div_ceil(64)])
        } else {
            Membership::Hash(HashSet::new())
        }
    }

    /// Inserts and reports whether the key was new.
    fn insert(&mut self, key: u64) -> bool {
        match self {
            Membership::Bits(v) => {
                let (w, b) = ((key / 64) as usize, key % 64);
                let fresh = v[w] & (1 << b) == 0;
                v[w] |= 1 << b;
                fresh
            }
            Membership::Hash(h) => h.insert(key),
        }
    }

    fn contains(&self, key: u64) -> bool {
        match self {
            Membership::Bits(v) => v[(key / 64) as usize] & (1 << (key % 64)) != 0,
            Membership::Hash(h) => h.contains(&key),
        }
    }
}

/// The image of the semigroup in `GL₂(ℤ/q)` together with the residues its
/// bottom-right entries take.
pub struct ResidueTable {
    pub q: u64,
    pub filter: DetFilter,
    /// Number of closure elements whose bottom-right entry is each residue.
    pub d_counts: Vec<u64>,
    pub is_full_sl2: bool,
    elements: Vec<u64>,
    members: Membership,
}

impl std::fmt::Debug for ResidueTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ResidueTable")
            .field("q", &self.q)
            .field("filter", &self.filter)
            .field("size", &self.len())
            .field("is_full_sl2", &self.is_full_sl2)
            .finish()
    }
}

impl ResidueTable {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn pack(&self, m: ModMat) -> u64 {
        pack(self.q, m)
    }

    pub fn contains(&self, m: ModMat) -> bool {
        let q = self.q;
        m.iter().all(|&x| x < q) && self.members.contains(pack(q, m))
    }

    pub fn elements(&self) -> impl Iterator<Item = ModMat> + '_ {
        self.elements.iter().map(move |&k| unpack(self.q, k))
    }

    /// Residues `d mod q` that occur, ascending.
    pub fn d_residues(&self) -> Vec<u64> {
        (0..self.q)
            .filter(|&r| self.d_counts[r as usize] > 0)
            .collect()
    }

    pub fn has_d_residue(&self, n: u64) -> bool {
        self.d_counts[(n % self.q) as usize] > 0
    }

    /// Elements with determinant `+1`.
    pub fn det_plus_count(&self) -> u64 {
        self.elements()
            .filter(|m| det_mod(self.q, *m) == 1 % self.q)
            .count() as u64
    }
}

#[inline]
fn pack(q: u64, [a, b, c, d]: ModMat) -> u64 {
    ((a * q + b) * q + c) * q + d
}

#[inline]
fn unpack(q: u64, mut k: u64) -> ModMat {
    let d = k % q;
    k /= q;
    let c = k % q;
    k /= q;
    let b = k % q;
    [k / q, b, c, d]
}

pub fn mul_mod(q: u64, [a, b, c, d]: ModMat, [e, f, g, h]: ModMat) -> ModMat {
    [
        (a * e + b * g) % q,
        (a * f + b * h) % q,
        (c * e + d * g) % q,
        (c * f + d * h) % q,
    ]
}

pub fn det_mod(q: u64, [a, b, c, d]: ModMat) -> u64 {
    (a * d % q + q - b * c % q) % q
}

pub fn generator_mod(q: u64, x: u64) -> ModMat {
    [0, 1 % q, 1 % q, x % q]
}

/// Generators of the closure. For the determinant-one part the pairs
/// `g(a)·g(a₀)` and `g(a₀)·g(b)` suffice: every `g(a)·g(b)` is a product of
/// these and an inverse of `g(a₀)²`, which lies in the finite group they span.
fn closure_generators(alphabet: &Alphabet, q: u64, filter: DetFilter) -> Vec<ModMat> {
    let mut residues: Vec<u64> = alphabet.iter().map(|a| a % q).collect();
    residues.sort_unstable();
    residues.dedup();
    let mut gens: Vec<ModMat> = match filter {
        DetFilter::All => residues.iter().map(|&a| generator_mod(q, a)).collect(),
        DetFilter::PlusOne => {
            let g0 = generator_mod(q, residues[0]);
            residues
                .iter()
                .flat_map(|&a| {
                    let ga = generator_mod(q, a);
                    [mul_mod(q, ga, g0), mul_mod(q, g0, ga)]
                })
                .collect()
        }
    };
    gens.sort_unstable();
    gens.dedup();
    gens
}

pub fn closure_mod_q(alphabet: &Alphabet, q: u64, filter: DetFilter) -> Result<ResidueTable> {
    if q < 2 {
        return Err(Error::domain(format!("modulus must be ≥ 2, got {q}")));
    }
    if q > TABLE_BUDGET {
        return Err(Error::Resource(format!(
            "modulus {q} exceeds table budget {TABLE_BUDGET}"
        )));
    }
    let gens = closure_generators(alphabet, q, filter);
    let mut members = Membership::new(q);
    let mut elements = Vec::new();
    let mut queue = VecDeque::new();
    for &g in &gens {
        if members.insert(pack(q, g)) {
            elements.push(pack(q, g));
            queue.push_back(g);
        }
    }
    while let Some(x) = queue.pop_front() {
        for &g in &gens {
            let y = mul_mod(q, x, g);
            let k = pack(q, y);
            if members.insert(k) {
                if elements.len() >= MAX_CLOSURE {
                    return Err(Error::Resource(format!(
                        "closure mod {q} exceeds {MAX_CLOSURE} elements"
                    )));
                }
                elements.push(k);
                queue.push_back(y);
            }
        }
    }
    elements.sort_unstable();
    let mut d_counts = vec![0u64; q as usize];
    for &k in &elements {
        d_counts[(k % q) as usize] += 1;
    }
    let mut table = ResidueTable {
        q,
        filter,
        d_counts,
        is_full_sl2: false,
        elements,
        members,
    };
    table.is_full_sl2 = table.det_plus_count() == sl2_order(q);
    Ok(table)
}

/// Residues mod `q` of denominators, taken from the full semigroup.
pub fn admissible_residues(alphabet: &Alphabet, q: u64) -> Result<Vec<u64>> {
    Ok(closure_mod_q(alphabet, q, DetFilter::All)?.d_residues())
}

/// Greatest common divisor of all pairwise differences; `0` for a singleton.
pub fn k_star(alphabet: &Alphabet) -> u64 {
    let a0 = alphabet.min();
    alphabet.iter().fold(0, |g, a| gcd(g, a - a0))
}

/// Whether every closure mod `p^t` is already determined by `k*`: true for
/// all primes not dividing it.
pub fn is_certified_prime(alphabet: &Alphabet, p: u64) -> bool {
    let k = k_star(alphabet);
    k != 0 && k % p != 0
}

/// Highest power of `p` examined when looking for the exponent at which the
/// closure mod `p^s` becomes the full preimage of the closure mod `p^{s−1}`.
pub fn lift_search_depth(p: u64) -> u32 {
    match p {
        2 => 6,
        3 => 3,
        _ => 1,
    }
}

/// Stabilization exponent of `p` for the full semigroup together with the
/// table at `p^t`. `t` is the least exponent with `|S(p^s)| = p³·|S(p^{s−1})|`
/// for every `t < s ≤` [`lift_search_depth`].
pub fn lift_exponent(alphabet: &Alphabet, p: u64) -> Result<(u32, ResidueTable)> {
    let depth = lift_search_depth(p);
    let mut tables = Vec::with_capacity(depth as usize);
    for s in 1..=depth {
        tables.push(closure_mod_q(alphabet, p.pow(s), DetFilter::All)?);
    }
    let mut t = depth;
    while t > 1
        && tables[t as usize - 1].len() == tables[t as usize - 2].len() * (p * p * p) as usize
    {
        t -= 1;
    }
    let table = tables.swap_remove(t as usize - 1);
    Ok((t, table))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    /// `0` when the alphabet is a single letter (no differences).
    pub k_star: u64,
    /// `(r, k*)` with every letter `≡ r mod k*`, when `k* ≥ 2`.
    pub residue_class: Option<(u64, u64)>,
    /// `k* = 1`: strong approximation holds for every modulus.
    pub certified: bool,
    pub q_max: u64,
    /// Prime powers whose closure was computed.
    pub searched: Vec<u64>,
    /// Prime powers where the determinant-one closure is not all of `SL₂`.
    pub failing_moduli: Vec<u64>,
    pub inadmissible_residues: BTreeMap<u64, Vec<u64>>,
}

impl ObstructionReport {
    pub fn is_degenerate(&self) -> bool {
        self.k_star == 0
    }
}

pub fn find_bad_modulus(alphabet: &Alphabet, q_max: u64) -> Result<ObstructionReport> {
    if q_max < 2 {
        return Err(Error::domain("q_max must be ≥ 2"));
    }
    let k = k_star(alphabet);
    let residue_class = (k >= 2).then(|| (alphabet.min() % k, k));
    let mut report = ObstructionReport {
        k_star: k,
        residue_class,
        certified: k == 1,
        q_max,
        searched: Vec::new(),
        failing_moduli: Vec::new(),
        inadmissible_residues: BTreeMap::new(),
    };
    for q in prime_powers_up_to(q_max) {
        let (p, _) = prime_power(q).expect("prime power");
        if is_certified_prime(alphabet, p) {
            continue;
        }
        report.searched.push(q);
        if !closure_mod_q(alphabet, q, DetFilter::PlusOne)?.is_full_sl2 {
            report.failing_moduli.push(q);
        }
        let residues = closure_mod_q(alphabet, q, DetFilter::All)?;
        let missing: Vec<u64> = (0..q).filter(|&r| !residues.has_d_residue(r)).collect();
        if !missing.is_empty() {
            report.inadmissible_residues.insert(q, missing);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityCertificate {
    pub d: u64,
    pub admissible: bool,
    /// First prime power whose residue set misses `d`.
    pub witness: Option<u64>,
    /// Prime powers checked against a computed table.
    pub checked: Vec<u64>,
    /// Prime powers settled by `p ∤ k*` without a table.
    pub certified: Vec<u64>,
    /// The verdict only covers moduli up to `q_max`.
    pub bounded: bool,
    pub q_max: u64,
}

/// Checks `d` against the residue sets of every prime power up to `q_max`.
pub fn is_admissible(d: u64, alphabet: &Alphabet, q_max: u64) -> Result<AdmissibilityCertificate> {
    let mut cert = AdmissibilityCertificate {
        d,
        admissible: true,
        witness: None,
        checked: Vec::new(),
        certified: Vec::new(),
        bounded: true,
        q_max,
    };
    for q in prime_powers_up_to(q_max) {
        let (p, _) = prime_power(q).expect("prime power");
        if is_certified_prime(alphabet, p) {
            cert.certified.push(q);
            continue;
        }
        cert.checked.push(q);
        if !closure_mod_q(alphabet, q, DetFilter::All)?.has_d_residue(d) {
            cert.admissible = false;
            cert.witness = Some(q);
            break;
        }
    }
    Ok(cert)
}

/// Precomputed local conditions for fast admissibility tests.
///
/// Holds one residue set per prime that can carry an obstruction, taken at
/// that prime's [`lift_exponent`]. For a single-letter alphabet every prime
/// is suspect; those are covered up to [`DEFAULT_Q_MAX`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityProfile {
    /// `(p^t, allowed residues as a mask)`.
    pub conditions: Vec<(u64, Vec<bool>)>,
}

impl AdmissibilityProfile {
    pub fn new(alphabet: &Alphabet) -> Result<Self> {
        let k = k_star(alphabet);
        let primes: Vec<u64> = if k == 0 {
            primes_up_to(DEFAULT_Q_MAX)
        } else {
            factorize(k).into_iter().map(|(p, _)| p).collect()
        };
        let mut conditions = Vec::new();
        for p in primes {
            let (_, table) = lift_exponent(alphabet, p)?;
            let mask: Vec<bool> = table.d_counts.iter().map(|&c| c > 0).collect();
            if mask.iter().any(|&ok| !ok) {
                conditions.push((table.q, mask));
            }
        }
        Ok(AdmissibilityProfile { conditions })
    }

    pub fn admits(&self, n: u64) -> bool {
        self.conditions
            .iter()
            .all(|(q, mask)| mask[(n % q) as usize])
    }
}
